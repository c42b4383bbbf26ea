//! Positive-P stochastic trajectories for the coupler.
//!
//! Each fundamental mode is represented by an independent pair
//! `(alpha_j, beta_j)` standing for `(a_j, a_j†)`, and each second-harmonic
//! mode by `(alpha_bar_j, beta_bar_j)` standing for `(b_j, b_j†)`. The
//! stochastic system is integrated with RK4 on the drift plus a noise
//! increment evaluated at the start of the step. Ensemble averages of the
//! pair variables give normal-ordered moments, from which the quadrature
//! variances follow.

mod ensemble;
mod moments;

pub use ensemble::{run_ensemble, run_ensemble_range, EnsembleResult, EnsembleSettings};
pub use moments::{variance_pp, DiscardRecord, ModeMoments, MomentAccumulator, PpSeries, PpVariance};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{CouplerParams, InitialConditions, TimeGrid};
use crate::rk4::{rk4_step, Axpy};
use crate::scalar::{times_i, times_neg_i, Real};

/// Default modulus above which a trajectory is treated as divergent.
pub const DEFAULT_DIVERGENCE_THRESHOLD: f64 = 1e6;

/// The twelve complex phase-space variables at one point of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpaceState<T> {
    pub alpha: [Complex<T>; 3],
    pub beta: [Complex<T>; 3],
    pub alpha_bar: [Complex<T>; 3],
    pub beta_bar: [Complex<T>; 3],
}

impl<T: Real> PhaseSpaceState<T> {
    /// Coherent initialization: `beta = conj(alpha)` for the fundamentals
    /// and likewise for the second-harmonic pair.
    pub fn coherent(init: &InitialConditions<T>) -> Self {
        Self {
            alpha: init.alpha0,
            beta: init.alpha0.map(|z| z.conj()),
            alpha_bar: init.sh0,
            beta_bar: init.sh0.map(|z| z.conj()),
        }
    }

    fn iter(&self) -> impl Iterator<Item = &Complex<T>> {
        self.alpha
            .iter()
            .chain(&self.beta)
            .chain(&self.alpha_bar)
            .chain(&self.beta_bar)
    }

    pub fn max_modulus(&self) -> T {
        self.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// True if any variable is non-finite or exceeds `threshold` in modulus.
    pub fn is_divergent(&self, threshold: T) -> bool {
        self.iter()
            .any(|z| !(z.re.is_finite() && z.im.is_finite()) || z.norm_sqr() > threshold * threshold)
    }
}

impl<T: Real> Axpy<T> for PhaseSpaceState<T> {
    #[inline]
    fn axpy(&self, h: T, o: &Self) -> Self {
        let f = |a: [Complex<T>; 3], b: [Complex<T>; 3]| std::array::from_fn(|j| a[j] + b[j] * h);
        Self {
            alpha: f(self.alpha, o.alpha),
            beta: f(self.beta, o.beta),
            alpha_bar: f(self.alpha_bar, o.alpha_bar),
            beta_bar: f(self.beta_bar, o.beta_bar),
        }
    }
}

const OTHERS: [(usize, usize); 3] = [(1, 2), (0, 2), (0, 1)];

/// Deterministic part of the stochastic equations.
///
/// In the contra-directional system the mode-2 fundamental pair has every
/// term reversed, while the second-harmonic equations keep their form.
#[inline]
pub fn drift<T: Real>(s: &PhaseSpaceState<T>, p: &CouplerParams<T>) -> PhaseSpaceState<T> {
    let g = p.g;
    let half_g = g * T::lit(0.5);
    let two = T::lit(2.0);
    let mut d = *s;
    for j in 0..3 {
        let (k, l) = OTHERS[j];
        let w = p.omega[j];
        let sign = p.mode_sign(j);
        let (a, b, ab, bb) = (s.alpha[j], s.beta[j], s.alpha_bar[j], s.beta_bar[j]);

        let rot_a = a * w + (s.alpha[k] + s.alpha[l]) * p.kappa;
        d.alpha[j] = (times_neg_i(rot_a) + ab * b * g) * sign;
        let rot_b = b * w + (s.beta[k] + s.beta[l]) * p.kappa;
        d.beta[j] = (times_i(rot_b) + a * bb * g) * sign;

        d.alpha_bar[j] = times_neg_i(ab * (two * w)) - a * a * half_g;
        d.beta_bar[j] = times_i(bb * (two * w)) - b * b * half_g;
    }
    d
}

/// Noise amplitudes of the six channels, ordered
/// `(alpha_1, beta_1, alpha_2, beta_2, alpha_3, beta_3)`.
///
/// Principal complex square roots are used; the ensemble statistics do not
/// depend on the branch because the Gaussian channels are symmetric.
#[inline]
pub fn noise_amplitudes<T: Real>(s: &PhaseSpaceState<T>, p: &CouplerParams<T>) -> [Complex<T>; 6] {
    std::array::from_fn(|c| {
        let j = c / 2;
        let sh = if c % 2 == 0 { s.alpha_bar[j] } else { s.beta_bar[j] };
        (sh * p.g).sqrt() * p.mode_sign(j)
    })
}

/// Six independent standard normal draws, one per noise channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseDraw<T> {
    pub eta: [T; 6],
}

impl<T: Real> NoiseDraw<T> {
    pub fn zero() -> Self {
        Self { eta: [T::zero(); 6] }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self {
            eta: std::array::from_fn(|_| T::standard_normal(rng)),
        }
    }

    pub fn negated(&self) -> Self {
        Self {
            eta: self.eta.map(|x| -x),
        }
    }
}

/// Stochastic increment `amplitude * eta * sqrt(dt)` per channel.
#[inline]
pub fn noise_increment<T: Real>(
    amps: &[Complex<T>; 6],
    draw: &NoiseDraw<T>,
    sqrt_dt: T,
) -> [Complex<T>; 6] {
    std::array::from_fn(|c| amps[c] * (draw.eta[c] * sqrt_dt))
}

fn apply_increment<T: Real>(s: &mut PhaseSpaceState<T>, inc: &[Complex<T>; 6]) {
    for j in 0..3 {
        s.alpha[j] += inc[2 * j];
        s.beta[j] += inc[2 * j + 1];
    }
}

/// Advances one step: RK4 on the drift, plus the noise increment frozen at
/// the start-of-step state.
#[inline]
pub fn step<T: Real>(
    state: &PhaseSpaceState<T>,
    dt: T,
    draw: &NoiseDraw<T>,
    params: &CouplerParams<T>,
) -> PhaseSpaceState<T> {
    let amps = noise_amplitudes(state, params);
    let mut next = rk4_step(state, dt, |y| drift(y, params));
    apply_increment(&mut next, &noise_increment(&amps, draw, dt.sqrt()));
    next
}

/// Same as [`step`] but with caller-supplied noise amplitudes.
pub fn step_with_amplitudes<T: Real>(
    state: &PhaseSpaceState<T>,
    dt: T,
    draw: &NoiseDraw<T>,
    amps: &[Complex<T>; 6],
    params: &CouplerParams<T>,
) -> PhaseSpaceState<T> {
    let mut next = rk4_step(state, dt, |y| drift(y, params));
    apply_increment(&mut next, &noise_increment(amps, draw, dt.sqrt()));
    next
}

/// A trajectory left the stable region and was excluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Divergence {
    pub seed: u64,
    /// First step (1-based) whose state was divergent.
    pub step: usize,
}

/// Seed for trajectory `index` of an ensemble with `master_seed`.
pub fn trajectory_seed(master_seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer over a Weyl sequence
    let mut z = master_seed
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Integrates one trajectory, writing the sampled states into `out`.
/// Returns the first divergent step on failure.
pub(crate) fn integrate_into<T: Real>(
    init: &InitialConditions<T>,
    params: &CouplerParams<T>,
    grid: &TimeGrid<T>,
    seed: u64,
    threshold: T,
    out: &mut Vec<PhaseSpaceState<T>>,
) -> Result<(), usize> {
    out.clear();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = PhaseSpaceState::coherent(init);
    out.push(state);
    let n_steps = grid.n_steps();
    let stride = grid.sample_stride;
    let dt = grid.dt;
    let sqrt_dt = dt.sqrt();
    let noiseless = params.g == T::zero();
    for n in 1..=n_steps {
        let draw = NoiseDraw::sample(&mut rng);
        let mut next = rk4_step(&state, dt, |y| drift(y, params));
        if !noiseless {
            let amps = noise_amplitudes(&state, params);
            apply_increment(&mut next, &noise_increment(&amps, &draw, sqrt_dt));
        }
        state = next;
        if state.is_divergent(threshold) {
            return Err(n);
        }
        if n % stride == 0 {
            out.push(state);
        }
    }
    Ok(())
}

/// Runs a single trajectory. The output is a deterministic function of the
/// arguments; one sample is emitted every `grid.sample_stride` steps.
pub fn run_trajectory<T: Real>(
    init: &InitialConditions<T>,
    params: &CouplerParams<T>,
    grid: &TimeGrid<T>,
    seed: u64,
    divergence_threshold: T,
) -> Result<Vec<PhaseSpaceState<T>>, Divergence> {
    let mut out = Vec::with_capacity(grid.n_samples());
    integrate_into(init, params, grid, seed, divergence_threshold, &mut out)
        .map_err(|step| Divergence { seed, step })?;
    Ok(out)
}
