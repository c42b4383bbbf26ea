//! Ensemble moment accumulation and the phase-space variance formula.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::TimeGrid;
use crate::quadrature::QuadratureSeries;
use crate::scalar::Real;

use super::PhaseSpaceState;

/// Number of real features tracked per mode:
/// `Re/Im` of `beta*alpha, alpha, beta, alpha^2, beta^2`.
const NF: usize = 10;
/// Packed upper triangle of the feature cross products.
const NCROSS: usize = NF * (NF + 1) / 2;

/// Running sums for one mode at one sample.
///
/// Besides the five complex moments entering the variance formula, the
/// accumulator keeps the cross-product sums of their real and imaginary
/// parts so that standard errors follow from the per-trajectory spread.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeMoments<T> {
    sum: [T; NF],
    cross: [T; NCROSS],
}

impl<T: Real> Default for ModeMoments<T> {
    fn default() -> Self {
        Self {
            sum: [T::zero(); NF],
            cross: [T::zero(); NCROSS],
        }
    }
}

#[inline]
fn features<T: Real>(alpha: Complex<T>, beta: Complex<T>) -> [T; NF] {
    let ba = beta * alpha;
    let aa = alpha * alpha;
    let bb = beta * beta;
    [ba.re, ba.im, alpha.re, alpha.im, beta.re, beta.im, aa.re, aa.im, bb.re, bb.im]
}

impl<T: Real> ModeMoments<T> {
    #[inline]
    pub fn add(&mut self, alpha: Complex<T>, beta: Complex<T>) {
        let f = features(alpha, beta);
        let mut idx = 0;
        for i in 0..NF {
            self.sum[i] += f[i];
            for j in i..NF {
                self.cross[idx] += f[i] * f[j];
                idx += 1;
            }
        }
    }

    pub fn merge(&mut self, other: &Self) {
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += *b;
        }
        for (a, b) in self.cross.iter_mut().zip(&other.cross) {
            *a += *b;
        }
    }

    fn mean(&self, k: usize, n: T) -> Complex<T> {
        Complex::new(self.sum[2 * k] / n, self.sum[2 * k + 1] / n)
    }

    /// Ensemble means `(<beta alpha>, <alpha>, <beta>, <alpha^2>, <beta^2>)`.
    pub fn means(&self, count: u64) -> [Complex<T>; 5] {
        let n = T::from_u64(count).expect("count");
        std::array::from_fn(|k| self.mean(k, n))
    }

    /// Unbiased sample covariance of the real features.
    fn covariance(&self, count: u64) -> [[T; NF]; NF] {
        let n = T::from_u64(count).expect("count");
        let m: [T; NF] = std::array::from_fn(|i| self.sum[i] / n);
        let mut cov = [[T::zero(); NF]; NF];
        let mut idx = 0;
        for i in 0..NF {
            for j in i..NF {
                let c = (self.cross[idx] - n * m[i] * m[j]) / (n - T::one());
                cov[i][j] = c;
                cov[j][i] = c;
                idx += 1;
            }
        }
        cov
    }

    /// Sample variances of `alpha` and `beta` (real plus imaginary parts).
    pub fn spread(&self, count: u64) -> T {
        let cov = self.covariance(count);
        (2..6).map(|i| cov[i][i]).fold(T::zero(), |a, b| a + b)
    }

    /// Quadrature variances from the ensemble moments.
    pub fn variance(&self, count: u64) -> Result<PpVariance<T>> {
        if count < 2 {
            return Err(Error::InsufficientStatistics { count });
        }
        let [m_ba, m_a, m_b, m_aa, m_bb] = self.means(count);
        let quarter = T::lit(0.25);
        let half = T::lit(0.5);
        let base = Complex::new(T::one(), T::zero()) + (m_ba - m_b * m_a) * T::lit(2.0);
        let bracket = m_aa - m_a * m_a + m_bb - m_b * m_b;
        let vx = (base + bracket) * quarter;
        let vy = (base - bracket) * quarter;

        let cov = self.covariance(count);
        let n = T::from_u64(count).expect("count");
        let se = |sign: T| {
            // d V / d mean for each complex moment
            let d = [
                Complex::new(half, T::zero()),
                -(m_b + m_a * sign) * half,
                -(m_a + m_b * sign) * half,
                Complex::new(quarter * sign, T::zero()),
                Complex::new(quarter * sign, T::zero()),
            ];
            let mut grad = [T::zero(); NF];
            for k in 0..5 {
                grad[2 * k] = d[k].re;
                grad[2 * k + 1] = -d[k].im;
            }
            let mut var = T::zero();
            for i in 0..NF {
                for j in 0..NF {
                    var += grad[i] * cov[i][j] * grad[j];
                }
            }
            (var.max(T::zero()) / n).sqrt()
        };
        Ok(PpVariance {
            vx: vx.re,
            vy: vy.re,
            se_x: se(T::one()),
            se_y: se(-T::one()),
            imag_x: vx.im,
            imag_y: vy.im,
        })
    }
}

/// Variance estimate for one mode at one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpVariance<T> {
    pub vx: T,
    pub vy: T,
    pub se_x: T,
    pub se_y: T,
    /// Imaginary residue of the complex estimate, pure sampling noise.
    pub imag_x: T,
    pub imag_y: T,
}

/// A trajectory excluded from the ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct DiscardRecord {
    pub index: u64,
    pub seed: u64,
    pub step: usize,
}

/// Per-sample, per-mode moment sums over accepted trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentAccumulator<T> {
    samples: Vec<[ModeMoments<T>; 3]>,
    count: u64,
    discards: Vec<DiscardRecord>,
}

impl<T: Real> MomentAccumulator<T> {
    pub fn new(n_samples: usize) -> Self {
        Self {
            samples: vec![[ModeMoments::default(); 3]; n_samples],
            count: 0,
            discards: Vec::new(),
        }
    }

    pub fn n_samples(&self) -> usize {
        self.samples.len()
    }

    /// Accepted trajectories.
    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn discarded(&self) -> u64 {
        self.discards.len() as u64
    }

    pub fn discards(&self) -> &[DiscardRecord] {
        &self.discards
    }

    pub fn mode(&self, sample: usize, mode: usize) -> &ModeMoments<T> {
        &self.samples[sample][mode]
    }

    /// Adds one accepted trajectory, sampled on the accumulator's grid.
    pub fn add_trajectory(&mut self, states: &[PhaseSpaceState<T>]) {
        assert_eq!(states.len(), self.samples.len(), "sample count mismatch");
        for (acc, s) in self.samples.iter_mut().zip(states) {
            for j in 0..3 {
                acc[j].add(s.alpha[j], s.beta[j]);
            }
        }
        self.count += 1;
    }

    pub fn record_discard(&mut self, record: DiscardRecord) {
        self.discards.push(record);
    }

    /// Adds `other` into `self`. Pure sums, so the result does not depend
    /// on how an ensemble was partitioned beyond floating-point rounding.
    pub fn merge(&mut self, other: &Self) {
        assert_eq!(self.samples.len(), other.samples.len(), "sample count mismatch");
        for (a, b) in self.samples.iter_mut().zip(&other.samples) {
            for j in 0..3 {
                a[j].merge(&b[j]);
            }
        }
        self.count += other.count;
        self.discards.extend_from_slice(&other.discards);
        self.discards.sort_unstable();
    }
}

/// Variance series of an ensemble plus its sampling diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct PpSeries<T> {
    pub series: QuadratureSeries<T>,
    /// Largest imaginary residue seen over all samples, modes and quadratures.
    pub max_imag_residue: T,
}

/// Quadrature variances and standard errors at every sample.
pub fn variance_pp<T: Real>(moments: &MomentAccumulator<T>, grid: &TimeGrid<T>) -> Result<PpSeries<T>> {
    let n = moments.n_samples();
    let mut series = QuadratureSeries::with_capacity(n, true);
    let mut residue = T::zero();
    for k in 0..n {
        series.tau.push(grid.sample_time(k));
        for j in 0..3 {
            let v = moments.mode(k, j).variance(moments.count())?;
            series.vx[j].push(v.vx);
            series.vy[j].push(v.vy);
            let se = series.stderr.as_mut().expect("stderr allocated");
            se.vx[j].push(v.se_x);
            se.vy[j].push(v.se_y);
            residue = residue.max(v.imag_x.abs()).max(v.imag_y.abs());
        }
    }
    Ok(PpSeries {
        series,
        max_imag_residue: residue,
    })
}
