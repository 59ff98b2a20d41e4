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

//! `aec`: acyclic edge coloring from the command line.
//!
//! Exit codes: 0 success, 1 bad input or failed verification, 2 step cap
//! reached, 3 internal invariant breach.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use aec_core::bicycle::find_acyclicity_violation;
use aec_core::bounds::{gamma_threshold, rho, BoundParams, SeriesBound};
use aec_core::engine::{run, EngineConfig, DEFAULT_STEP_CAP};
use aec_core::graph::{generate_random_regular, parse_graph};
use aec_core::palette::{format_coloring, parse_coloring};
use aec_core::validator::{monte_carlo_success, relaxed_success_bound, success_bound};
use aec_core::witness::{
    build_forest, check_against_record, check_properties, encode_forest, AdmissibleTriple,
};
use aec_core::{
    BoundsError, ColoringError, ColoringState, Graph, Palette, RandomStream, DEFAULT_GAMMA,
};

#[derive(Parser)]
#[command(name = "aec", version, about = "Randomized acyclic edge coloring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Color a graph and print run statistics as JSON.
    Color(ColorArgs),
    /// Check that a coloring is proper and acyclic.
    Verify(VerifyArgs),
    /// Evaluate the numeric bound for a given gamma, or bisect the threshold.
    Bound(BoundArgs),
    /// Estimate the success probability of a validation run.
    ColorvalMc(ColorvalArgs),
    /// Run the algorithm and print the witness forest of the run.
    Forest(ForestArgs),
    /// Generate a random regular graph.
    Gen(GenArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Edge-list file: one `u v` pair per line.
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    gamma: f64,
    /// Palette size; defaults to the value derived from gamma.
    #[arg(long)]
    colors: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_STEP_CAP)]
    step_cap: usize,
    /// Check local invariants after every recoloring.
    #[arg(long)]
    instrumented: bool,
}

#[derive(Args)]
struct ColorArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Write the coloring here as `edge_id color` lines.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    coloring: PathBuf,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long, required_unless_present = "threshold")]
    gamma: Option<f64>,
    /// Maximum degree used to report N and K.
    #[arg(long, default_value_t = 3)]
    delta: usize,
    /// Also report Q_0..Q_nmax and check Q_n <= rho^n.
    #[arg(long)]
    nmax: Option<usize>,
    /// Bisect the smallest gamma with rho < 1 instead.
    #[arg(long, conflicts_with_all = ["gamma", "nmax"])]
    threshold: bool,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
}

#[derive(Args)]
struct ColorvalArgs {
    #[arg(long)]
    graph: PathBuf,
    /// `e1,e2,k`; repeat for longer sequences.
    #[arg(long = "triple", value_parser = parse_triple)]
    triples: Vec<AdmissibleTriple>,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    gamma: f64,
}

#[derive(Args)]
struct ForestArgs {
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_triple(s: &str) -> Result<AdmissibleTriple, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b, k] = parts.as_slice() else {
        return Err(format!("expected e1,e2,k, got {s:?}"));
    };
    let num = |t: &str| {
        t.parse::<usize>()
            .map_err(|_| format!("not a nonnegative integer: {t:?}"))
    };
    Ok(AdmissibleTriple {
        first: num(a)?,
        second: num(b)?,
        k: num(k)?,
    })
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn input(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: 1,
            error: error.into(),
        }
    }
}

impl From<ColoringError> for Failure {
    fn from(e: ColoringError) -> Self {
        let code = match &e {
            ColoringError::Truncated { .. } => 2,
            e if e.is_internal() => 3,
            _ => 1,
        };
        Failure {
            code,
            error: e.into(),
        }
    }
}

impl From<BoundsError> for Failure {
    fn from(e: BoundsError) -> Self {
        let code = match e {
            BoundsError::Bracket { .. } | BoundsError::Overflow { .. } => 3,
            _ => 1,
        };
        Failure {
            code,
            error: e.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure::input(error)
    }
}

type Outcome = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::input)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::input)
}

fn load_graph(path: &Path) -> Result<Graph, Failure> {
    parse_graph(&read(path)?)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(Failure::input)
}

fn print_json<T: Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("plain data serializes")
    );
}

/// Palette for `g` from `gamma`, with an optional explicit size that may
/// only enlarge it. Degrees below 2 are treated as 2 so that matchings and
/// empty graphs still get a palette.
fn palette_for(g: &Graph, gamma: f64, colors: Option<usize>) -> Result<Palette, Failure> {
    let delta = g.max_degree().max(2);
    let derived = Palette::from_gamma(gamma, delta)?;
    let Some(n) = colors else {
        return Ok(derived);
    };
    if n < derived.num_colors() {
        return Err(Failure::input(anyhow!(
            "--colors {n} is below the derived palette size {}; sampling could run out of colors",
            derived.num_colors()
        )));
    }
    Ok(Palette::new(n, derived.quota())?)
}

struct Run {
    graph: Graph,
    palette: Palette,
    outcome: aec_core::engine::RunOutcome,
}

fn execute(args: &RunArgs) -> Result<Run, Failure> {
    let graph = load_graph(&args.graph)?;
    let palette = palette_for(&graph, args.gamma, args.colors)?;
    let config = EngineConfig {
        palette,
        step_cap: args.step_cap,
        instrumented: args.instrumented,
    };
    let outcome = run(&graph, config, RandomStream::new(args.seed))?;
    Ok(Run {
        graph,
        palette,
        outcome,
    })
}

#[derive(Serialize)]
struct ColorStats {
    n_steps: usize,
    n_phases: usize,
    instants: u64,
    terminated: bool,
    verified: bool,
    seed: u64,
    gamma: f64,
    #[serde(rename = "N")]
    num_colors: usize,
    #[serde(rename = "K")]
    quota: usize,
}

fn cmd_color(args: ColorArgs) -> Outcome {
    let Run {
        palette, outcome, ..
    } = execute(&args.run)?;
    if let Some(path) = &args.output {
        write(path, &format_coloring(outcome.state.colors()))?;
    }
    let terminated = outcome.record.terminated;
    print_json(&ColorStats {
        n_steps: outcome.stats.steps,
        n_phases: outcome.stats.phases,
        instants: outcome.stats.instants,
        terminated,
        verified: outcome.stats.verified,
        seed: args.run.seed,
        gamma: args.run.gamma,
        num_colors: palette.num_colors(),
        quota: palette.quota(),
    });
    Ok(if terminated { 0 } else { 2 })
}

fn cmd_verify(args: VerifyArgs) -> Outcome {
    let graph = load_graph(&args.graph)?;
    let colors = parse_coloring(&read(&args.coloring)?, graph.edge_count())
        .with_context(|| format!("parsing {}", args.coloring.display()))?;
    let max = colors.iter().copied().max().unwrap_or(1);
    let state = ColoringState::from_colors(colors, Palette::new(max, 1)?)?;
    match find_acyclicity_violation(&state, &graph)? {
        None => {
            println!("ok: proper and acyclic");
            Ok(0)
        }
        Some(v) => {
            println!("violation: {v}");
            Ok(1)
        }
    }
}

#[derive(Serialize)]
struct BoundReport {
    gamma: f64,
    rho: f64,
    xstar: f64,
    certified: bool,
    delta: usize,
    #[serde(rename = "N")]
    num_colors: usize,
    #[serde(rename = "K")]
    quota: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    series: Option<SeriesReport>,
}

#[derive(Serialize)]
struct SeriesReport {
    nmax: usize,
    q: Vec<f64>,
    /// Indices with `Q_n > rho^n`.
    violations: Vec<usize>,
}

#[derive(Serialize)]
struct ThresholdReport {
    tol: f64,
    threshold: f64,
    rho_at_threshold: f64,
    constant: f64,
}

fn cmd_bound(args: BoundArgs) -> Outcome {
    if args.threshold {
        let threshold = gamma_threshold(args.tol)?;
        print_json(&ThresholdReport {
            tol: args.tol,
            threshold,
            rho_at_threshold: rho(threshold)?.0,
            constant: 2.0 + threshold,
        });
        return Ok(0);
    }
    let gamma = args.gamma.expect("clap requires gamma without --threshold");
    let (r, xstar) = rho(gamma)?;
    let params = BoundParams::new(gamma, args.delta)?;
    let series = match args.nmax {
        Some(nmax) => {
            let sb = SeriesBound::compute(gamma, nmax)?;
            Some(SeriesReport {
                nmax,
                violations: sb.violations(0.0),
                q: sb.qn,
            })
        }
        None => None,
    };
    print_json(&BoundReport {
        gamma,
        rho: r,
        xstar,
        certified: r < 1.0,
        delta: args.delta,
        num_colors: params.num_colors,
        quota: params.quota,
        series,
    });
    Ok(0)
}

#[derive(Serialize)]
struct ColorvalReport {
    triples: Vec<[usize; 3]>,
    trials: u64,
    seed: u64,
    gamma: f64,
    successes: u64,
    estimate: f64,
    stderr: f64,
    bound: f64,
    relaxed_bound: f64,
}

fn cmd_colorval(args: ColorvalArgs) -> Outcome {
    let graph = load_graph(&args.graph)?;
    let palette = palette_for(&graph, args.gamma, None)?;
    let delta = graph.max_degree().max(2);
    let est = monte_carlo_success(&graph, &args.triples, palette, args.trials, args.seed)?;
    print_json(&ColorvalReport {
        triples: args
            .triples
            .iter()
            .map(|t| [t.first, t.second, t.k])
            .collect(),
        trials: est.trials,
        seed: args.seed,
        gamma: args.gamma,
        successes: est.successes,
        estimate: est.estimate,
        stderr: est.stderr,
        bound: success_bound(&args.triples, args.gamma, delta)?,
        relaxed_bound: relaxed_success_bound(&args.triples, args.gamma, delta)?,
    });
    Ok(0)
}

#[derive(Serialize)]
struct ForestReport {
    seed: u64,
    terminated: bool,
    n_steps: usize,
    trees: usize,
    internal_nodes: usize,
    violations: Vec<String>,
    encoding: String,
    dump: String,
}

fn cmd_forest(args: ForestArgs) -> Outcome {
    let Run { graph, outcome, .. } = execute(&args.run)?;
    let forest = build_forest(&outcome.record, &graph)?;
    let mut violations: Vec<String> = check_properties(&forest, &graph)
        .into_iter()
        .chain(check_against_record(&forest, &outcome.record))
        .map(|v| format!("{v:?}"))
        .collect();
    violations.dedup();
    let clean = violations.is_empty();
    print_json(&ForestReport {
        seed: args.run.seed,
        terminated: outcome.record.terminated,
        n_steps: outcome.record.len(),
        trees: forest.tree_count(),
        internal_nodes: forest.internal_count(),
        violations,
        encoding: hex::encode(encode_forest(&forest)),
        dump: forest.render(),
    });
    Ok(match (clean, outcome.record.terminated) {
        (false, _) => 3,
        (true, false) => 2,
        (true, true) => 0,
    })
}

fn cmd_gen(args: GenArgs) -> Outcome {
    let g = generate_random_regular(args.n, args.d, args.seed).map_err(Failure::input)?;
    let text = g.to_edge_list();
    match &args.output {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Color(a) => cmd_color(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bound(a) => cmd_bound(a),
        Command::ColorvalMc(a) => cmd_colorval(a),
        Command::Forest(a) => cmd_forest(a),
        Command::Gen(a) => cmd_gen(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
