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

//! Soft statistical check: the probability that a coloring run produces a
//! witness forest with admissible sequence `S` should not exceed the success
//! probability of a validation run on `S`.

use std::collections::HashMap;

use aec_core::engine::{run, EngineConfig};
use aec_core::validator::monte_carlo_success;
use aec_core::witness::{admissible_sequence_of, build_forest, AdmissibleSequence};
use aec_core::{split_seed, Graph, RandomStream, DEFAULT_GAMMA};

#[test]
fn forest_frequency_stays_below_validation_success() {
    let g = Graph::complete_bipartite(3, 3);
    let config = EngineConfig::for_graph(&g, DEFAULT_GAMMA).unwrap();
    let runs = 100_000u64;
    let mut counts: HashMap<AdmissibleSequence, u64> = HashMap::new();
    for i in 0..runs {
        let out = run(&g, config, RandomStream::new(split_seed(0xF0, i))).unwrap();
        if out.record.is_empty() {
            continue;
        }
        let forest = build_forest(&out.record, &g).unwrap();
        *counts
            .entry(admissible_sequence_of(&forest, &g).unwrap())
            .or_default() += 1;
    }
    assert!(!counts.is_empty(), "no run needed a repair");

    let mut sequences: Vec<_> = counts.into_iter().collect();
    sequences.sort();
    for (i, (seq, count)) in sequences.iter().enumerate() {
        let freq = *count as f64 / runs as f64;
        let freq_err = (freq * (1.0 - freq) / runs as f64).sqrt();
        let est =
            monte_carlo_success(&g, seq, config.palette, runs, split_seed(0xF1, i as u64)).unwrap();
        let noise = 3.0 * (freq_err.powi(2) + est.stderr.powi(2)).sqrt();
        assert!(
            freq <= est.estimate + noise,
            "{seq:?}: forest frequency {freq} above validation success {} (noise {noise})",
            est.estimate
        );
    }
}
