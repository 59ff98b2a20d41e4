// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Acceptance suite. Prints one `[PASS]` or `[FAIL]` line per criterion and
//! exits nonzero if any criterion fails.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode, Output};
use std::time::{Duration, Instant};

use aec_core::bicycle::{brute_force_acyclic, is_acyclic_proper, smallest_bichromatic_cycle};
use aec_core::bounds::{phi_e, SeriesBound};
use aec_core::engine::{
    run_observed, run_seeded, EngineConfig, ExecutionRecord, Observer, StepRecord,
};
use aec_core::graph::{enumerate_cycles_upto, generate_random_regular};
use aec_core::validator::{monte_carlo_success, relaxed_success_bound, success_bound};
use aec_core::witness::{
    build_forest, check_against_record, check_properties, encode_forest, AdmissibleTriple,
};
use aec_core::{split_seed, Color, ColoringState, Cycle, EdgeId, Graph, Palette, RandomStream};
use serde_json::Value;

const GAMMA: f64 = 1.569;
/// Success bound for one `k = 3` triple at `K = 5`, `Δ = 3`: `(1/5)(0.36)^3`.
const SINGLE_TRIPLE_BOUND: f64 = 0.0093312;

type Verdict = Result<String, String>;

fn aec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Result<Value, String> {
    serde_json::from_slice(&out.stdout).map_err(|e| format!("bad JSON: {e}"))
}

fn field(v: &Value, key: &str) -> Result<f64, String> {
    v[key]
        .as_f64()
        .ok_or_else(|| format!("missing number {key:?} in {v}"))
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let at = json(&aec(&["bound", "--gamma", "1.569"]))?;
    let below = json(&aec(&["bound", "--gamma", "1.5"]))?;
    let th = json(&aec(&["bound", "--threshold", "--tol", "1e-4"]))?;
    let elapsed = start.elapsed();
    let (r, r_low, t) = (
        field(&at, "rho")?,
        field(&below, "rho")?,
        field(&th, "threshold")?,
    );
    check(r < 1.0, || format!("rho(1.569) = {r} is not below 1"))?;
    check(r_low > 1.0, || format!("rho(1.5) = {r_low} is not above 1"))?;
    check(t <= GAMMA, || format!("threshold {t} exceeds 1.569"))?;
    check(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "rho(1.569) = {r:.7}, rho(1.5) = {r_low:.5}, threshold = {t:.6}, constant 2 + threshold = {:.6} <= 3.569, {elapsed:.2?}",
        2.0 + t
    ))
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let sb = SeriesBound::compute(GAMMA, 50).map_err(|e| e.to_string())?;
    let phi0 = phi_e(GAMMA, 0.0).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let bad = sb.violations(0.0);
    check(bad.is_empty(), || format!("Q_n > rho^n at n = {bad:?}"))?;
    let gap = (sb.qn[1] - phi0).abs();
    check(gap <= 1e-12, || format!("|Q_1 - phi(0)| = {gap:e}"))?;
    check(sb.qn[0] == 1.0, || "Q_0 != 1".into())?;
    check(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    let worst = (1..=50)
        .map(|n| sb.qn[n] / sb.rho.powi(n as i32))
        .fold(0.0f64, f64::max);
    Ok(format!(
        "Q_n <= rho^n for n <= 50 (max ratio {worst:.4}), |Q_1 - phi(0)| = {gap:.1e}, {elapsed:.2?}"
    ))
}

/// Up to `limit` vertices in breadth-first order from `root`.
fn bfs_ball(g: &Graph, root: usize, limit: usize) -> Vec<usize> {
    let mut seen = vec![false; g.vertex_count()];
    let mut order = Vec::new();
    let mut queue = VecDeque::from([root]);
    seen[root] = true;
    while let Some(v) = queue.pop_front() {
        if order.len() == limit {
            break;
        }
        order.push(v);
        for &e in g.incident_edges(v).unwrap() {
            let w = g.other_endpoint(e, v).unwrap();
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    order
}

fn restrict(state: &ColoringState, origin: &[EdgeId]) -> Result<ColoringState, String> {
    let colors: Vec<Color> = origin.iter().map(|&e| state.color(e)).collect();
    ColoringState::from_colors(colors, state.palette()).map_err(|e| e.to_string())
}

fn criterion_3() -> Verdict {
    let start = Instant::now();
    let mut steps = 0usize;
    let mut max_steps = 0usize;
    for i in 0..200u64 {
        let gseed = split_seed(0x3_0000, i);
        let g = generate_random_regular(50, 3, gseed).map_err(|e| e.to_string())?;
        let config = EngineConfig::for_graph(&g, GAMMA).map_err(|e| e.to_string())?;
        let (n, k) = (config.palette.num_colors(), config.palette.quota());
        check((n, k) == (9, 5), || format!("palette N = {n}, K = {k}"))?;
        let out = run_seeded(&g, GAMMA, split_seed(gseed, 0), 1_000_000)
            .map_err(|e| format!("run {i}: {e}"))?;
        check(out.record.terminated, || {
            format!("run {i} hit the step cap")
        })?;
        let ok = is_acyclic_proper(&out.state, &g).map_err(|e| e.to_string())?;
        check(ok, || format!("run {i} is not acyclic"))?;
        steps += out.stats.steps;
        max_steps = max_steps.max(out.stats.steps);
        if i < 50 {
            let ball = bfs_ball(&g, (i as usize * 7) % 50, 10);
            let (sub, origin) = g.induced_subgraph(&ball);
            let sub_state = restrict(&out.state, &origin)?;
            let ok = brute_force_acyclic(&sub_state, &sub, 12).map_err(|e| e.to_string())?;
            check(ok, || {
                format!("run {i}: brute force rejects the induced ball")
            })?;
        }
    }
    // The same pipeline on whole graphs small enough to enumerate.
    for i in 0..50u64 {
        let gseed = split_seed(0x3_1000, i);
        let g = generate_random_regular(10, 3, gseed).map_err(|e| e.to_string())?;
        let out = run_seeded(&g, GAMMA, gseed, 1_000_000).map_err(|e| e.to_string())?;
        let ok = out.record.terminated
            && brute_force_acyclic(&out.state, &g, 12).map_err(|e| e.to_string())?;
        check(ok, || format!("10-vertex run {i} fails brute force"))?;
    }
    Ok(format!(
        "200/200 runs on 3-regular n = 50 terminated acyclic (N = 9, K = 5, {steps} steps total, max {max_steps}); \
         50 induced 10-vertex balls and 50 whole 10-vertex graphs pass brute force; {:.2?}",
        start.elapsed()
    ))
}

/// Seed recomputed from stamps: earliest edge, then the earliest edge at
/// odd distance from it along the cycle.
fn seed_oracle(state: &ColoringState, cycle: &Cycle) -> (EdgeId, EdgeId) {
    let edges = cycle.edges();
    let stamp = |i: usize| state.stamp(edges[i]).expect("colored");
    let i1 = (0..edges.len()).min_by_key(|&i| stamp(i)).unwrap();
    let i2 = (0..edges.len())
        .filter(|&j| (j + edges.len() - i1) % 2 == 1)
        .min_by_key(|&j| stamp(j))
        .unwrap();
    (edges[i1], edges[i2])
}

fn bichromatic(state: &ColoringState, c: &Cycle) -> bool {
    let colors: BTreeSet<Color> = c.edges().iter().map(|&e| state.color(e)).collect();
    colors.len() == 2
}

/// Watches every step: seed exemption, phase-level monotonicity of the
/// well-colored set, and brute-force agreement of the cycle finder.
struct Auditor<'a> {
    cycles: &'a [Cycle],
    /// Colors at the start of the current phase and after the latest step.
    phase_start: Option<Vec<Color>>,
    latest: Vec<Color>,
    current_root: Option<EdgeId>,
    palette: Palette,
    seed_failures: Vec<String>,
    monotone_failures: Vec<String>,
    oracle_failures: Vec<String>,
    uniqueness_failures: Vec<String>,
    states_checked: usize,
}

impl<'a> Auditor<'a> {
    fn new(cycles: &'a [Cycle], palette: Palette) -> Self {
        Auditor {
            cycles,
            phase_start: None,
            latest: Vec::new(),
            current_root: None,
            palette,
            seed_failures: Vec::new(),
            monotone_failures: Vec::new(),
            oracle_failures: Vec::new(),
            uniqueness_failures: Vec::new(),
            states_checked: 0,
        }
    }

    fn well_colored(&self, g: &Graph, colors: &[Color]) -> BTreeSet<EdgeId> {
        let state = ColoringState::from_colors(colors.to_vec(), self.palette).unwrap();
        (0..g.edge_count())
            .filter(|&e| smallest_bichromatic_cycle(&state, g, e).unwrap().is_none())
            .collect()
    }

    fn close_phase(&mut self, g: &Graph) {
        let (Some(start), Some(root)) = (self.phase_start.take(), self.current_root.take()) else {
            return;
        };
        let before = self.well_colored(g, &start);
        let after = self.well_colored(g, &self.latest);
        if !before.is_subset(&after) {
            let lost: Vec<_> = before.difference(&after).collect();
            self.monotone_failures
                .push(format!("phase rooted at {root} lost {lost:?}"));
        }
        if !after.contains(&root) {
            self.monotone_failures
                .push(format!("phase root {root} still badly colored"));
        }
    }

    fn compare_with_brute_force(&mut self, g: &Graph, state: &ColoringState) {
        self.states_checked += 1;
        let bich: Vec<&Cycle> = self
            .cycles
            .iter()
            .filter(|c| bichromatic(state, c))
            .collect();
        for e in 0..g.edge_count() {
            let fast = smallest_bichromatic_cycle(state, g, e)
                .unwrap()
                .map(|r| r.cycle);
            let slow = bich
                .iter()
                .filter(|c| c.contains(e) && c.len() >= 4)
                .min()
                .map(|c| (*c).clone());
            if fast.as_ref().map(Cycle::len) != slow.as_ref().map(Cycle::len) {
                self.oracle_failures
                    .push(format!("edge {e}: finder {fast:?}, brute force {slow:?}"));
            }
        }
        let mut per_pair: HashMap<(EdgeId, EdgeId, usize), usize> = HashMap::new();
        for c in &bich {
            for i in 0..c.len() {
                let (a, b) = (c.edges()[i], c.edges()[(i + 1) % c.len()]);
                *per_pair.entry((a.min(b), a.max(b), c.len())).or_default() += 1;
            }
        }
        for ((a, b, len), count) in per_pair {
            if count > 1 {
                self.uniqueness_failures.push(format!(
                    "{count} bichromatic {len}-cycles through edges {a}, {b}"
                ));
            }
        }
    }
}

impl Observer for Auditor<'_> {
    fn initial_coloring(&mut self, g: &Graph, state: &ColoringState) {
        self.latest = state.colors().to_vec();
        self.compare_with_brute_force(g, state);
    }

    fn step(&mut self, g: &Graph, state: &ColoringState, step: &StepRecord) {
        if step.parent.is_none() {
            self.close_phase(g);
            self.phase_start = Some(self.latest.clone());
            self.current_root = Some(step.edge);
        }
        let seed = seed_oracle(state, &step.cycle);
        let same = seed == step.seed || seed == (step.seed.1, step.seed.0);
        if !same || step.edge == seed.0 || step.edge == seed.1 {
            self.seed_failures.push(format!(
                "edge {} on cycle {} with recorded seed {:?}, oracle {seed:?}",
                step.edge, step.cycle, step.seed
            ));
        }
        self.latest = state.colors().to_vec();
        self.compare_with_brute_force(g, state);
    }
}

fn record_checks(g: &Graph, record: &ExecutionRecord, final_clock: u64) -> Vec<String> {
    let mut out = Vec::new();
    let m = g.edge_count();
    if record.phase_count() > m {
        out.push(format!("{} phases on {m} edges", record.phase_count()));
    }
    let roots: BTreeSet<EdgeId> = record
        .phase_roots
        .iter()
        .map(|&i| record.steps[i].edge)
        .collect();
    if roots.len() != record.phase_count() {
        out.push("a phase-root edge repeats".into());
    }
    let expected = m as u64
        + record
            .steps
            .iter()
            .map(|s| s.cycle.len() as u64 - 2)
            .sum::<u64>();
    if record.total_instants != expected || final_clock != expected {
        out.push(format!(
            "instants {} (clock {final_clock}) but m + sum(|C| - 2) = {expected}",
            record.total_instants
        ));
    }
    if record.terminated {
        match build_forest(record, g) {
            Ok(forest) => {
                let v: Vec<_> = check_properties(&forest, g)
                    .into_iter()
                    .chain(check_against_record(&forest, record))
                    .collect();
                if !v.is_empty() {
                    out.push(format!("witness forest: {v:?}"));
                }
            }
            Err(e) => out.push(format!("witness forest: {e}")),
        }
    }
    out
}

struct AuditSummary {
    runs: usize,
    steps: usize,
    phases: usize,
    states: usize,
    invariant_failures: Vec<String>,
    oracle_failures: Vec<String>,
}

/// Instrumented runs on K33 and the 3-cube, with the default palette and
/// with the smallest palette (N = 6, K = 2) that still guarantees the quota, which forces many more repairs.
fn audit_runs() -> AuditSummary {
    let mut s = AuditSummary {
        runs: 0,
        steps: 0,
        phases: 0,
        states: 0,
        invariant_failures: Vec::new(),
        oracle_failures: Vec::new(),
    };
    for (name, g) in [
        ("K33", Graph::complete_bipartite(3, 3)),
        ("Q3", Graph::hypercube(3)),
    ] {
        let cycles = enumerate_cycles_upto(&g, g.vertex_count());
        let default = EngineConfig::for_graph(&g, GAMMA)
            .unwrap()
            .instrumented(true);
        let stressed = EngineConfig {
            palette: Palette::new(6, 2).unwrap(),
            step_cap: 100_000,
            instrumented: true,
        };
        for (label, config, seeds) in [
            ("default", default, 100u64),
            ("N = 6, K = 2", stressed, 1000),
        ] {
            for seed in 0..seeds {
                let mut auditor = Auditor::new(&cycles, config.palette);
                let tag = format!("{name} {label} seed {seed}");
                match run_observed(&g, config, RandomStream::new(seed), &mut auditor) {
                    Ok(out) => {
                        auditor.close_phase(&g);
                        s.runs += 1;
                        s.steps += out.record.len();
                        s.phases += out.record.phase_count();
                        for f in record_checks(&g, &out.record, out.state.clock()) {
                            s.invariant_failures.push(format!("{tag}: {f}"));
                        }
                    }
                    Err(e) => s.invariant_failures.push(format!("{tag}: {e}")),
                }
                s.states += auditor.states_checked;
                for f in auditor
                    .seed_failures
                    .into_iter()
                    .chain(auditor.monotone_failures)
                {
                    s.invariant_failures.push(format!("{tag}: {f}"));
                }
                for f in auditor
                    .oracle_failures
                    .into_iter()
                    .chain(auditor.uniqueness_failures)
                {
                    s.oracle_failures.push(format!("{tag}: {f}"));
                }
            }
        }
    }
    s
}

fn criterion_4(s: &AuditSummary) -> Verdict {
    check(s.invariant_failures.is_empty(), || {
        format!(
            "{} violations, first: {}",
            s.invariant_failures.len(),
            s.invariant_failures[0]
        )
    })?;
    Ok(format!(
        "{} instrumented runs on K33 and Q3, 100 per graph at N = 9, K = 5 and 1000 at N = 6, K = 2 ({} phases, {} steps): seeds never recolored, \
         well-colored sets monotone per phase, phases <= m with distinct roots, \
         instant identity exact, witness forests valid",
        s.runs, s.phases, s.steps
    ))
}

fn criterion_5(s: &AuditSummary) -> Verdict {
    check(s.oracle_failures.is_empty(), || {
        format!(
            "{} disagreements, first: {}",
            s.oracle_failures.len(),
            s.oracle_failures[0]
        )
    })?;
    Ok(format!(
        "{} colorings: cycle finder matches brute force on every edge; \
         no ordered pair lies on two bichromatic cycles of one length",
        s.states
    ))
}

fn criterion_6() -> Verdict {
    let start = Instant::now();
    let g = Graph::complete_bipartite(3, 3);
    let palette = Palette::from_gamma(GAMMA, 3).map_err(|e| e.to_string())?;
    let mut triples = Vec::new();
    for e in 0..g.edge_count() {
        let (_, u) = g.endpoints(e);
        for &f in g.incident_edges(u).unwrap() {
            if f != e {
                triples.push(AdmissibleTriple {
                    first: e,
                    second: f,
                    k: 3,
                });
            }
        }
    }
    let bound = success_bound(&triples[..1], GAMMA, 3).map_err(|e| e.to_string())?;
    check((bound - SINGLE_TRIPLE_BOUND).abs() < 1e-12, || {
        format!("bound {bound}")
    })?;
    let mut worst = (f64::NEG_INFINITY, 0.0, 0.0);
    for (i, t) in triples.iter().enumerate() {
        let est = monte_carlo_success(&g, &[*t], palette, 100_000, split_seed(0x6_0000, i as u64))
            .map_err(|e| e.to_string())?;
        let slack = est.estimate - (bound + 3.0 * est.stderr);
        check(slack <= 0.0, || {
            format!(
                "triple {t:?}: estimate {} > {bound} + 3 * {}",
                est.estimate, est.stderr
            )
        })?;
        if slack > worst.0 {
            worst = (slack, est.estimate, est.stderr);
        }
    }
    let mc_time = start.elapsed();
    check(mc_time < Duration::from_secs(60), || {
        format!("took {mc_time:?}")
    })?;

    let mut points = 0;
    for gi in 0..10 {
        let gamma = 0.2 + 0.5 * gi as f64;
        for di in 0..10 {
            let delta = 2 + 5 * di;
            for si in 0..10usize {
                let seq: Vec<AdmissibleTriple> = (0..si % 5)
                    .map(|j| AdmissibleTriple {
                        first: 0,
                        second: 1,
                        k: 3 + (si + j) % 4,
                    })
                    .collect();
                let exact = success_bound(&seq, gamma, delta).map_err(|e| e.to_string())?;
                let relaxed =
                    relaxed_success_bound(&seq, gamma, delta).map_err(|e| e.to_string())?;
                check(exact <= relaxed * (1.0 + 1e-12), || {
                    format!("gamma {gamma}, delta {delta}, {seq:?}: {exact} > {relaxed}")
                })?;
                points += 1;
            }
        }
    }
    Ok(format!(
        "{} single-triple sequences x 10^5 trials: max estimate {:.5} (stderr {:.5}) <= {bound:.7} + 3 stderr; \
         relaxed bound dominates on {points} grid points; {mc_time:.2?}",
        triples.len(),
        worst.1,
        worst.2
    ))
}

fn criterion_7() -> Verdict {
    let mut runs = 0;
    let mut distinct = Vec::new();
    for (name, g) in [
        ("K33", Graph::complete_bipartite(3, 3)),
        ("Q3", Graph::hypercube(3)),
    ] {
        let mut seen: HashMap<Vec<u8>, Vec<(EdgeId, Vec<EdgeId>)>> = HashMap::new();
        let configs = [
            EngineConfig::for_graph(&g, GAMMA).unwrap(),
            EngineConfig {
                palette: Palette::new(6, 2).unwrap(),
                step_cap: 100_000,
                instrumented: false,
            },
        ];
        for config in configs {
            for i in 0..10_000u64 {
                let out =
                    aec_core::engine::run(&g, config, RandomStream::new(split_seed(0x7_0000, i)))
                        .map_err(|e| e.to_string())?;
                if !out.record.terminated {
                    continue;
                }
                runs += 1;
                let forest = build_forest(&out.record, &g).map_err(|e| e.to_string())?;
                let code = encode_forest(&forest);
                let labels = out.record.labels();
                match seen.get(&code) {
                    Some(prev) if *prev != labels => {
                        return Err(format!(
                            "{name}: records {prev:?} and {labels:?} share an encoding"
                        ));
                    }
                    Some(_) => {}
                    None => {
                        seen.insert(code, labels);
                    }
                }
            }
        }
        distinct.push(format!("{name} {}", seen.len()));
    }
    Ok(format!(
        "{runs} terminated runs (10^4 per graph at N = 9, K = 5 and at N = 6, K = 2): \
         every encoding maps back to one record; distinct records: {}",
        distinct.join(", ")
    ))
}

fn criterion_8(dir: &Path) -> Verdict {
    let g = dir.join("g.txt");
    fs::write(&g, Graph::complete_bipartite(3, 3).to_edge_list()).map_err(|e| e.to_string())?;
    let gs = g.to_str().unwrap();
    let mut commands: Vec<Vec<String>> = vec![
        vec!["bound", "--gamma", "1.569", "--nmax", "50"],
        vec!["bound", "--threshold", "--tol", "1e-4"],
        vec!["gen", "--n", "50", "--d", "3", "--seed", "8"],
        vec!["color", "--graph", gs, "--seed", "8", "--instrumented"],
        vec!["forest", "--graph", gs, "--seed", "8"],
        vec![
            "colorval-mc",
            "--graph",
            gs,
            "--triple",
            "0,3,3",
            "--trials",
            "20000",
            "--seed",
            "8",
        ],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();
    for seed in ["1", "2", "3"] {
        commands.push(
            ["color", "--graph", gs, "--seed", seed, "--output"]
                .into_iter()
                .map(String::from)
                .chain([dir.join("c.txt").to_str().unwrap().to_string()])
                .collect(),
        );
    }
    for cmd in &commands {
        let args: Vec<&str> = cmd.iter().map(String::as_str).collect();
        let a = aec(&args);
        let file_a = fs::read(dir.join("c.txt")).ok();
        let b = aec(&args);
        let file_b = fs::read(dir.join("c.txt")).ok();
        check(a.status.success(), || {
            format!("{cmd:?} failed: {}", String::from_utf8_lossy(&a.stderr))
        })?;
        check(a.stdout == b.stdout && a.status == b.status, || {
            format!("{cmd:?} differs between runs")
        })?;
        check(file_a == file_b, || {
            format!("{cmd:?} wrote different colorings")
        })?;
    }
    Ok(format!(
        "{} commands reproduce byte-identical output",
        commands.len()
    ))
}

fn main() -> ExitCode {
    let dir = tempfile::TempDir::new().expect("temp dir");
    let audit = audit_runs();
    let results: Vec<(u32, &str, Verdict)> = vec![
        (1, "bound certification", criterion_1()),
        (2, "series cross-check", criterion_2()),
        (3, "end-to-end coloring", criterion_3()),
        (4, "invariant assertions", criterion_4(&audit)),
        (5, "oracle equivalence", criterion_5(&audit)),
        (6, "validation Monte Carlo", criterion_6()),
        (7, "forest injectivity", criterion_7()),
        (8, "determinism", criterion_8(dir.path())),
    ];
    let mut failed = 0;
    for (n, name, verdict) in &results {
        match verdict {
            Ok(detail) => println!("[PASS] criterion {n} ({name}): {detail}"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] criterion {n} ({name}): {why}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
