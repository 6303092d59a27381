// Copyright 2026 The vmsched Authors.
// SPDX-License-Identifier: Apache-2.0

//! Batches of independent runs.

use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::engine;
use crate::error::Result;
use crate::metrics::RunReport;
use crate::num::Scalar;
use crate::preset::Preset;

/// Workload volume of a training-phase run, in job-hours.
pub const TRAINING_HOURS: f64 = 10_000.0;
/// Workload volume of a steady-phase run, in job-hours.
pub const STEADY_HOURS: f64 = 100_000.0;

/// One run of `preset` with the experiment seed replaced by `seed`.
pub fn run_preset<T: Scalar>(exp: &ExperimentConfig<T>, preset: Preset, seed: u64) -> Result<RunReport<T>> {
    let mut exp = exp.clone();
    exp.seed = seed;
    engine::run(&preset.sim_config(&exp))
}

/// Every `(preset, seed)` pair, possibly in parallel. The result is ordered
/// by preset, then by seed, as given.
pub fn compare<T: Scalar>(exp: &ExperimentConfig<T>, presets: &[Preset], seeds: &[u64]) -> Result<Vec<RunReport<T>>> {
    let pairs: Vec<(Preset, u64)> = presets.iter().flat_map(|&p| seeds.iter().map(move |&s| (p, s))).collect();
    pairs.par_iter().map(|&(p, s)| run_preset(exp, p, s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_is_preset_then_seed() {
        let mut exp = ExperimentConfig::<f64>::default();
        exp.workload.total_hours = 200.0;
        let reports = compare(&exp, &[Preset::Alg5, Preset::Alg1], &[3, 1]).unwrap();
        let keys: Vec<_> = reports.iter().map(|r| (r.preset.as_str(), r.seed)).collect();
        assert_eq!(keys, [("alg_5", 3), ("alg_5", 1), ("alg_1", 3), ("alg_1", 1)]);
        assert_eq!(reports[1], run_preset(&exp, Preset::Alg5, 1).unwrap());
    }
}
