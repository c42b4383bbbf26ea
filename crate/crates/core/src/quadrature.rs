//! Quadrature variance time series produced by every method.

use crate::scalar::Real;

/// Shot-noise level of a coherent state in the `X = (a + a†)/2` convention.
pub const SHOT_NOISE: f64 = 0.25;

/// Per-sample quadrature variances of the three fundamental modes.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSeries<T> {
    pub tau: Vec<T>,
    pub vx: [Vec<T>; 3],
    pub vy: [Vec<T>; 3],
    /// Monte Carlo standard errors, present for ensemble estimates.
    pub stderr: Option<StdErrors<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StdErrors<T> {
    pub vx: [Vec<T>; 3],
    pub vy: [Vec<T>; 3],
}

impl<T: Real> QuadratureSeries<T> {
    pub fn with_capacity(n: usize, with_stderr: bool) -> Self {
        let v = || std::array::from_fn(|_| Vec::with_capacity(n));
        Self {
            tau: Vec::with_capacity(n),
            vx: v(),
            vy: v(),
            stderr: with_stderr.then(|| StdErrors { vx: v(), vy: v() }),
        }
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    /// Smaller of the two quadrature variances of `mode` (0-based) at sample `k`.
    pub fn min_quadrature(&self, mode: usize, k: usize) -> T {
        self.vx[mode][k].min(self.vy[mode][k])
    }

    /// Indices of samples whose coordinate lies in `[lo, hi]`.
    pub fn window(&self, lo: T, hi: T) -> impl Iterator<Item = usize> + '_ {
        let eps = T::lit(1e-9);
        self.tau
            .iter()
            .enumerate()
            .filter(move |(_, &t)| t >= lo - eps && t <= hi + eps)
            .map(|(k, _)| k)
    }
}
