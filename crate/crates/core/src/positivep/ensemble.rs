//! Parallel, reproducible trajectory ensembles.
//!
//! Trajectories are grouped into fixed-size chunks that are accumulated in
//! index order. Chunks run in parallel in fixed-size waves and are merged in
//! chunk order, so the floating-point reduction order, and therefore the
//! result, does not depend on the number of worker threads.

use std::ops::Range;

use rayon::prelude::*;

use crate::error::Result;
use crate::model::{CouplerParams, InitialConditions, TimeGrid};
use crate::scalar::Real;

use super::moments::{DiscardRecord, MomentAccumulator};
use super::{integrate_into, trajectory_seed, DEFAULT_DIVERGENCE_THRESHOLD};

const CHUNK: u64 = 256;
const WAVE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSettings<T> {
    pub n_traj: u64,
    pub master_seed: u64,
    pub divergence_threshold: T,
    /// Discard fraction above which the ensemble is flagged unreliable.
    pub max_discard_fraction: f64,
}

impl<T: Real> Default for EnsembleSettings<T> {
    fn default() -> Self {
        Self {
            n_traj: 100_000,
            master_seed: 0,
            divergence_threshold: T::lit(DEFAULT_DIVERGENCE_THRESHOLD),
            max_discard_fraction: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult<T> {
    pub moments: MomentAccumulator<T>,
    pub requested: u64,
    pub max_discard_fraction: f64,
}

impl<T: Real> EnsembleResult<T> {
    pub fn discard_fraction(&self) -> f64 {
        if self.requested == 0 {
            0.0
        } else {
            self.moments.discarded() as f64 / self.requested as f64
        }
    }

    /// More trajectories diverged than the configured fraction allows.
    pub fn unreliable(&self) -> bool {
        self.discard_fraction() > self.max_discard_fraction
    }
}

fn run_chunk<T: Real>(
    init: &InitialConditions<T>,
    params: &CouplerParams<T>,
    grid: &TimeGrid<T>,
    settings: &EnsembleSettings<T>,
    indices: Range<u64>,
) -> MomentAccumulator<T> {
    let mut acc = MomentAccumulator::new(grid.n_samples());
    let mut buf = Vec::with_capacity(grid.n_samples());
    for index in indices {
        let seed = trajectory_seed(settings.master_seed, index);
        match integrate_into(init, params, grid, seed, settings.divergence_threshold, &mut buf) {
            Ok(()) => acc.add_trajectory(&buf),
            Err(step) => acc.record_discard(DiscardRecord { index, seed, step }),
        }
    }
    acc
}

/// Integrates trajectories with indices in `range` and returns their moment
/// sums. Two adjacent ranges merged together equal the union range up to
/// floating-point association.
pub fn run_ensemble_range<T: Real>(
    init: &InitialConditions<T>,
    params: &CouplerParams<T>,
    grid: &TimeGrid<T>,
    settings: &EnsembleSettings<T>,
    range: Range<u64>,
) -> Result<MomentAccumulator<T>> {
    params.validate()?;
    init.validate()?;
    grid.validate()?;
    let chunks: Vec<Range<u64>> = (range.start..range.end)
        .step_by(CHUNK as usize)
        .map(|s| s..(s + CHUNK).min(range.end))
        .collect();
    let mut total = MomentAccumulator::new(grid.n_samples());
    for wave in chunks.chunks(WAVE) {
        let parts: Vec<MomentAccumulator<T>> = wave
            .par_iter()
            .map(|r| run_chunk(init, params, grid, settings, r.clone()))
            .collect();
        for part in &parts {
            total.merge(part);
        }
    }
    Ok(total)
}

/// Runs `settings.n_traj` trajectories and accumulates their moments.
pub fn run_ensemble<T: Real>(
    init: &InitialConditions<T>,
    params: &CouplerParams<T>,
    grid: &TimeGrid<T>,
    settings: &EnsembleSettings<T>,
) -> Result<EnsembleResult<T>> {
    let moments = run_ensemble_range(init, params, grid, settings, 0..settings.n_traj)?;
    Ok(EnsembleResult {
        moments,
        requested: settings.n_traj,
        max_discard_fraction: settings.max_discard_fraction,
    })
}
