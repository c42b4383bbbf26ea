//! Exact reference dynamics in a truncated six-mode Fock space.
//!
//! The Hamiltonian (with ħ = 1, in units of the first mode's frequency)
//!
//! ```text
//! H = Σ_j ω_j a_j†a_j + κ (a1†a2 + a2†a3 + a3†a1 + h.c.)
//!   + (i g / 2) Σ_j (a_j†² b_j − a_j² b_j†) + Σ_j 2 ω_j b_j†b_j
//! ```
//!
//! is assembled as a sparse matrix over the product basis
//! `|n1 n2 n3 m1 m2 m3⟩` (lexicographic, `n1` most significant) and the state
//! vector is stepped with RK4. Since the model is closed and lossless, pure
//! state evolution is exact up to truncation and step error.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::{CouplerParams, Direction, InitialConditions, TimeGrid};
use crate::quadrature::QuadratureSeries;
use crate::rk4::rk4_step;
use crate::scalar::{czero, times_neg_i, Real};

/// Per-mode photon-number cutoffs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockConfig {
    /// Highest Fock level kept for each fundamental mode.
    pub n_fund: usize,
    /// Highest Fock level kept for each second-harmonic mode.
    pub n_sh: usize,
    /// Upper bound on the product-space dimension.
    pub max_dim: usize,
}

impl Default for FockConfig {
    fn default() -> Self {
        Self {
            n_fund: 4,
            n_sh: 2,
            max_dim: 100_000,
        }
    }
}

impl FockConfig {
    pub fn new(n_fund: usize, n_sh: usize) -> Self {
        Self {
            n_fund,
            n_sh,
            ..Self::default()
        }
    }

    pub fn dim(&self) -> usize {
        (self.n_fund + 1).pow(3) * (self.n_sh + 1).pow(3)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_fund == 0 || self.n_sh == 0 {
            return Err(Error::InvalidParams("Fock cutoffs must be >= 1".into()));
        }
        let dim = self.dim();
        if dim > self.max_dim {
            return Err(Error::DimensionCap {
                dim,
                cap: self.max_dim,
            });
        }
        Ok(())
    }
}

/// Product basis indexing. Modes 0..3 are the fundamentals, 3..6 the
/// second harmonics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Basis {
    cutoff: [usize; 6],
    stride: [usize; 6],
    dim: usize,
}

impl Basis {
    pub fn new(cfg: &FockConfig) -> Self {
        let cutoff = [cfg.n_fund, cfg.n_fund, cfg.n_fund, cfg.n_sh, cfg.n_sh, cfg.n_sh];
        let mut stride = [1usize; 6];
        for m in (0..5).rev() {
            stride[m] = stride[m + 1] * (cutoff[m + 1] + 1);
        }
        Self {
            cutoff,
            stride,
            dim: stride[0] * (cutoff[0] + 1),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cutoff(&self, mode: usize) -> usize {
        self.cutoff[mode]
    }

    pub fn stride(&self, mode: usize) -> usize {
        self.stride[mode]
    }

    pub fn index(&self, occ: &[usize; 6]) -> usize {
        occ.iter().zip(&self.stride).map(|(n, s)| n * s).sum()
    }

    pub fn occupations(&self, mut idx: usize) -> [usize; 6] {
        let mut occ = [0; 6];
        for m in 0..6 {
            occ[m] = idx / self.stride[m];
            idx %= self.stride[m];
        }
        occ
    }

    /// Excitation number `Σ n_j + 2 Σ m_j` of a basis state.
    pub fn excitation(&self, idx: usize) -> usize {
        let o = self.occupations(idx);
        o[0] + o[1] + o[2] + 2 * (o[3] + o[4] + o[5])
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<Complex<T>>,
}

impl<T: Real> SparseMatrix<T> {
    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, Complex<T>)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut values: Vec<Complex<T>> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().expect("previous entry") += v;
            } else {
                cols.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            n,
            row_ptr,
            cols,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex<T>)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        self.row(r).find(|&(col, _)| col == c).map_or(czero(), |(_, v)| v)
    }

    pub fn matvec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.n)
            .map(|r| self.row(r).fold(czero(), |acc, (c, v)| acc + v * x[c]))
            .collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut t = Vec::with_capacity(self.nnz());
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                t.push((c, r, v.conj()));
            }
        }
        Self::from_triplets(self.n, t)
    }

    /// `⟨x|M|x⟩`.
    pub fn expectation(&self, x: &[Complex<T>]) -> Complex<T> {
        self.matvec(x)
            .iter()
            .zip(x)
            .fold(czero(), |acc, (mx, xi)| acc + xi.conj() * mx)
    }
}

/// Hamiltonian matrix together with its basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian<T> {
    pub matrix: SparseMatrix<T>,
    pub basis: Basis,
}

/// Assembles the truncated Hamiltonian. Off-diagonal terms are inserted
/// together with their Hermitian conjugates.
pub fn build_hamiltonian<T: Real>(params: &CouplerParams<T>, cfg: &FockConfig) -> Result<Hamiltonian<T>> {
    params.validate()?;
    cfg.validate()?;
    if params.direction != Direction::Codirectional {
        return Err(Error::Unsupported(
            "the Fock oracle covers codirectional propagation only".into(),
        ));
    }
    let basis = Basis::new(cfg);
    let dim = basis.dim();
    let mut trip = Vec::with_capacity(dim * 19);
    let two = T::lit(2.0);
    let half_g = params.g * T::lit(0.5);
    let sqrt = |x: usize| T::from_usize(x).expect("small integer").sqrt();
    let push_pair = |trip: &mut Vec<(usize, usize, Complex<T>)>, to: usize, from: usize, v: Complex<T>| {
        trip.push((to, from, v));
        trip.push((from, to, v.conj()));
    };

    for idx in 0..dim {
        let occ = basis.occupations(idx);
        let mut diag = T::zero();
        for j in 0..3 {
            let w = params.omega[j];
            diag += w * T::from_usize(occ[j]).expect("occupation");
            diag += two * w * T::from_usize(occ[3 + j]).expect("occupation");
        }
        trip.push((idx, idx, Complex::new(diag, T::zero())));

        // κ a_i† a_j, plus h.c.
        if params.kappa != T::zero() {
            for (i, j) in [(0, 1), (1, 2), (2, 0)] {
                if occ[j] > 0 && occ[i] < basis.cutoff(i) {
                    let mut t = occ;
                    t[i] += 1;
                    t[j] -= 1;
                    let v = params.kappa * sqrt(occ[j] * (occ[i] + 1));
                    push_pair(&mut trip, basis.index(&t), idx, Complex::new(v, T::zero()));
                }
            }
        }

        // (i g / 2) a_j†² b_j, plus h.c.
        if params.g != T::zero() {
            for j in 0..3 {
                let (n, m) = (occ[j], occ[3 + j]);
                if m > 0 && n + 2 <= basis.cutoff(j) {
                    let mut t = occ;
                    t[j] += 2;
                    t[3 + j] -= 1;
                    let v = half_g * sqrt(m * (n + 1) * (n + 2));
                    push_pair(&mut trip, basis.index(&t), idx, Complex::new(T::zero(), v));
                }
            }
        }
    }
    Ok(Hamiltonian {
        matrix: SparseMatrix::from_triplets(dim, trip),
        basis,
    })
}

/// Diagonal of the conserved excitation number `Σ a†a + 2 Σ b†b`.
pub fn excitation_diagonal<T: Real>(basis: &Basis) -> Vec<T> {
    (0..basis.dim())
        .map(|i| T::from_usize(basis.excitation(i)).expect("excitation"))
        .collect()
}

/// Truncated single-mode coherent state.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentFock<T> {
    /// Renormalized amplitudes of `|0⟩ ..= |cutoff⟩`.
    pub amplitudes: Vec<Complex<T>>,
    /// Probability weight of the untruncated state above the cutoff.
    pub truncated_weight: T,
}

impl<T: Real> CoherentFock<T> {
    pub const WARN_WEIGHT: f64 = 1e-6;

    pub fn truncation_warning(&self) -> bool {
        self.truncated_weight > T::lit(Self::WARN_WEIGHT)
    }
}

/// Coherent state `e^{-|α|²/2} Σ α^n/√n! |n⟩` truncated at `cutoff` and
/// renormalized.
pub fn coherent_fock<T: Real>(alpha: Complex<T>, cutoff: usize) -> CoherentFock<T> {
    let x = alpha.norm_sqr();
    let pref = (-x * T::lit(0.5)).exp();
    let mut amps = Vec::with_capacity(cutoff + 1);
    let mut term = Complex::new(pref, T::zero());
    for n in 0..=cutoff {
        amps.push(term);
        term = term * alpha / T::from_usize(n + 1).expect("level").sqrt();
    }
    // tail weight, summed directly to avoid cancellation in 1 - Σ
    let mut tail = T::zero();
    let mut p = term.norm_sqr();
    let mut n = cutoff + 1;
    while p > T::min_positive_value() && (tail == T::zero() || p > tail * T::epsilon()) {
        tail += p;
        n += 1;
        p = p * x / T::from_usize(n).expect("level");
        if n > cutoff + 10_000 {
            break;
        }
    }
    let norm = amps.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b).sqrt();
    for z in &mut amps {
        *z = *z / norm;
    }
    CoherentFock {
        amplitudes: amps,
        truncated_weight: tail,
    }
}

/// State vector over the truncated product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState<T> {
    pub basis: Basis,
    pub amplitudes: Vec<Complex<T>>,
}

impl<T: Real> FockState<T> {
    pub fn vacuum(basis: Basis) -> Self {
        let mut amplitudes = vec![czero(); basis.dim()];
        amplitudes[0] = Complex::new(T::one(), T::zero());
        Self { basis, amplitudes }
    }

    /// Product of coherent states for all six modes. Also returns the
    /// largest single-mode truncated weight.
    pub fn coherent_product(init: &InitialConditions<T>, cfg: &FockConfig) -> Result<(Self, T)> {
        cfg.validate()?;
        init.validate()?;
        let basis = Basis::new(cfg);
        let modes: Vec<CoherentFock<T>> = init
            .alpha0
            .iter()
            .map(|&a| coherent_fock(a, cfg.n_fund))
            .chain(init.sh0.iter().map(|&b| coherent_fock(b, cfg.n_sh)))
            .collect();
        let worst = modes
            .iter()
            .map(|m| m.truncated_weight)
            .fold(T::zero(), |a, b| a.max(b));
        let amplitudes = (0..basis.dim())
            .map(|idx| {
                let occ = basis.occupations(idx);
                occ.iter()
                    .zip(&modes)
                    .fold(Complex::new(T::one(), T::zero()), |acc, (&n, m)| acc * m.amplitudes[n])
            })
            .collect();
        Ok((Self { basis, amplitudes }, worst))
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    fn norm_sqr(&self) -> T {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
    }

    /// Probability of finding any mode at its highest kept level.
    pub fn boundary_weight(&self) -> T {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let occ = self.basis.occupations(*i);
                (0..6).any(|m| occ[m] == self.basis.cutoff(m))
            })
            .map(|(_, z)| z.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
    }

    /// `⟨ψ|D|ψ⟩` for a diagonal operator.
    pub fn diagonal_expectation(&self, diag: &[T]) -> T {
        self.amplitudes
            .iter()
            .zip(diag)
            .map(|(z, d)| z.norm_sqr() * *d)
            .fold(T::zero(), |a, b| a + b)
    }
}

/// Allowed norm drift per unit of evolution coordinate.
pub const NORM_DRIFT_PER_UNIT: f64 = 1e-6;

/// Evolves `dψ/dτ = −iHψ` with fixed-step RK4, calling `visit` at every
/// grid sample (including the initial state).
pub fn evolve_with<T: Real, F>(psi0: &FockState<T>, h: &Hamiltonian<T>, grid: &TimeGrid<T>, mut visit: F) -> Result<()>
where
    F: FnMut(usize, &FockState<T>),
{
    grid.validate()?;
    if psi0.basis != h.basis {
        return Err(Error::InvalidParams("state and Hamiltonian bases differ".into()));
    }
    let mut psi = psi0.amplitudes.clone();
    let basis = psi0.basis;
    let rhs = |y: &Vec<Complex<T>>| -> Vec<Complex<T>> { h.matrix.matvec(y).into_iter().map(times_neg_i).collect() };
    visit(0, psi0);
    let norm0 = psi0.norm();
    let mut sample = 0;
    for n in 1..=grid.n_steps() {
        psi = rk4_step(&psi, grid.dt, rhs);
        if n % grid.sample_stride == 0 {
            sample += 1;
            let state = FockState { basis, amplitudes: psi };
            let tau = grid.sample_time(sample);
            let drift = (state.norm() - norm0).abs();
            let tol = T::lit(NORM_DRIFT_PER_UNIT) * tau.max(T::one());
            if !(drift <= tol) {
                return Err(Error::NormDrift {
                    drift: drift.to_f64_lossy(),
                    tau: tau.to_f64_lossy(),
                    tol: tol.to_f64_lossy(),
                });
            }
            visit(sample, &state);
            psi = state.amplitudes;
        }
    }
    Ok(())
}

/// Evolves and collects every sample.
pub fn evolve<T: Real>(psi0: &FockState<T>, h: &Hamiltonian<T>, grid: &TimeGrid<T>) -> Result<Vec<FockState<T>>> {
    let mut out = Vec::with_capacity(grid.n_samples());
    evolve_with(psi0, h, grid, |_, s| out.push(s.clone()))?;
    Ok(out)
}

/// Exact quadrature variances `(V_X, V_Y)` of fundamental mode `mode`
/// (1, 2 or 3).
pub fn variance_fock<T: Real>(psi: &FockState<T>, mode: usize) -> Result<(T, T)> {
    if !(1..=3).contains(&mode) {
        return Err(Error::InvalidParams(format!("mode must be 1, 2 or 3, got {mode}")));
    }
    let m = mode - 1;
    let basis = &psi.basis;
    let stride = basis.stride(m);
    let amps = &psi.amplitudes;
    let mut a1: Complex<T> = czero();
    let mut a2: Complex<T> = czero();
    let mut nn = T::zero();
    for (idx, z) in amps.iter().enumerate() {
        let n = (idx / stride) % (basis.cutoff(m) + 1);
        if n == 0 {
            continue;
        }
        let nf = T::from_usize(n).expect("level");
        nn += nf * z.norm_sqr();
        a1 += amps[idx - stride].conj() * *z * nf.sqrt();
        if n >= 2 {
            let f = (nf * (nf - T::one())).sqrt();
            a2 += amps[idx - 2 * stride].conj() * *z * f;
        }
    }
    let norm2 = psi.norm_sqr();
    let (a1, a2, nn) = (a1 / norm2, a2 / norm2, nn / norm2);
    let quarter = T::lit(0.25);
    let two = T::lit(2.0);
    let base = T::one() + two * (nn - a1.norm_sqr());
    let anomalous = two * (a2 - a1 * a1).re;
    Ok(((base + anomalous) * quarter, (base - anomalous) * quarter))
}

/// Oracle run output.
#[derive(Debug, Clone, PartialEq)]
pub struct FockRun<T> {
    pub series: QuadratureSeries<T>,
    /// Largest single-mode truncated weight of the initial coherent states.
    pub initial_truncated_weight: T,
    /// Largest boundary occupation seen over the run.
    pub max_boundary_weight: T,
    pub dim: usize,
}

pub fn run_fock<T: Real>(
    params: &CouplerParams<T>,
    init: &InitialConditions<T>,
    grid: &TimeGrid<T>,
    cfg: &FockConfig,
) -> Result<FockRun<T>> {
    let h = build_hamiltonian(params, cfg)?;
    let (psi0, initial_truncated_weight) = FockState::coherent_product(init, cfg)?;
    let mut series = QuadratureSeries::with_capacity(grid.n_samples(), false);
    let mut max_boundary = T::zero();
    let mut failure = None;
    evolve_with(&psi0, &h, grid, |k, psi| {
        series.tau.push(grid.sample_time(k));
        max_boundary = max_boundary.max(psi.boundary_weight());
        for j in 0..3 {
            match variance_fock(psi, j + 1) {
                Ok((vx, vy)) => {
                    series.vx[j].push(vx);
                    series.vy[j].push(vy);
                }
                Err(e) => failure = Some(e),
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(FockRun {
        series,
        initial_truncated_weight,
        max_boundary_weight: max_boundary,
        dim: h.basis.dim(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn params(g: f64, kappa: f64) -> CouplerParams<f64> {
        CouplerParams {
            omega: [1.0; 3],
            g,
            kappa,
            direction: Direction::Codirectional,
        }
    }

    fn small() -> FockConfig {
        FockConfig::new(3, 1)
    }

    #[test]
    fn basis_roundtrip() {
        let b = Basis::new(&FockConfig::new(4, 2));
        assert_eq!(b.dim(), 3375);
        for idx in [0, 1, 17, 1000, 3374] {
            assert_eq!(b.index(&b.occupations(idx)), idx);
        }
        assert_eq!(b.occupations(3374), [4, 4, 4, 2, 2, 2]);
        assert_eq!(b.occupations(1), [0, 0, 0, 0, 0, 1]);
    }

    #[test]
    fn dimension_cap() {
        let cfg = FockConfig {
            max_dim: 1000,
            ..FockConfig::new(4, 2)
        };
        assert!(matches!(cfg.validate(), Err(Error::DimensionCap { dim: 3375, cap: 1000 })));
        assert!(build_hamiltonian(&params(0.01, 0.1), &cfg).is_err());
    }

    #[test]
    fn hamiltonian_is_exactly_hermitian() {
        let h = build_hamiltonian(&params(0.3, 0.2), &small()).unwrap();
        assert_eq!(h.matrix.adjoint(), h.matrix);
    }

    #[test]
    fn free_hamiltonian_is_diagonal() {
        let p = CouplerParams {
            omega: [1.0, 1.5, 0.5],
            g: 0.0,
            kappa: 0.0,
            direction: Direction::Codirectional,
        };
        let h = build_hamiltonian(&p, &small()).unwrap();
        assert_eq!(h.matrix.nnz(), h.basis.dim());
        for idx in 0..h.basis.dim() {
            let o = h.basis.occupations(idx);
            let e = o[0] as f64 + 1.5 * o[1] as f64 + 0.5 * o[2] as f64
                + 2.0 * (o[3] as f64 + 1.5 * o[4] as f64 + 0.5 * o[5] as f64);
            assert_eq!(h.matrix.get(idx, idx), c(e, 0.0));
        }
    }

    #[test]
    fn hamiltonian_conserves_excitation_number() {
        let h = build_hamiltonian(&params(0.2, 0.3), &FockConfig::new(4, 2)).unwrap();
        let b = h.basis;
        for r in 0..b.dim() {
            for (col, v) in h.matrix.row(r) {
                if v.norm() != 0.0 {
                    assert_eq!(b.excitation(r), b.excitation(col));
                }
            }
        }
    }

    #[test]
    fn sh_matrix_element() {
        let h = build_hamiltonian(&params(0.02, 0.0), &small()).unwrap();
        let b = h.basis;
        // <2,0,0,0,0,0| H |0,0,0,1,0,0> = i g/2 sqrt(1*1*2)
        let to = b.index(&[2, 0, 0, 0, 0, 0]);
        let from = b.index(&[0, 0, 0, 1, 0, 0]);
        let v = h.matrix.get(to, from);
        assert_abs_diff_eq!(v.re, 0.0);
        assert_abs_diff_eq!(v.im, 0.01 * 2f64.sqrt(), epsilon = 1e-16);
        assert_eq!(h.matrix.get(from, to), v.conj());
    }

    #[test]
    fn coherent_fock_values() {
        let vac = coherent_fock(c(0.0, 0.0), 4);
        assert_eq!(vac.amplitudes[0], c(1.0, 0.0));
        assert!(vac.amplitudes[1..].iter().all(|z| z.norm() == 0.0));
        assert_eq!(vac.truncated_weight, 0.0);

        let s = coherent_fock(c(0.5, 0.0), 4);
        // 0.5^n / sqrt(n!)
        let raw = [1.0, 0.5, 0.1767766952966369, 0.05103103630798288, 0.012757759076995722];
        let pref = (-0.125f64).exp();
        let norm: f64 = raw.iter().map(|r| (r * pref).powi(2)).sum::<f64>().sqrt();
        for (z, r) in s.amplitudes.iter().zip(raw) {
            assert_abs_diff_eq!(z.re, r * pref / norm, epsilon = 1e-15);
        }
        // tail: e^{-1/4} Σ_{n>=5} 0.25^n / n!
        let tail: f64 = (5..30)
            .map(|n| 0.25f64.powi(n) / (1..=n).map(|k| k as f64).product::<f64>())
            .sum::<f64>()
            * (-0.25f64).exp();
        assert_abs_diff_eq!(s.truncated_weight, tail, epsilon = 1e-18);
        assert!(s.truncation_warning());
        assert!(!coherent_fock(c(0.5, 0.0), 8).truncation_warning());

        for a in [c(1.0, 0.0), c(0.3, -0.7), c(2.0, 1.0)] {
            let st = coherent_fock(a, 6);
            let n: f64 = st.amplitudes.iter().map(|z| z.norm_sqr()).sum();
            assert_abs_diff_eq!(n, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn vacuum_and_coherent_states_at_shot_noise() {
        let vac = FockState::<f64>::vacuum(Basis::new(&small()));
        for mode in 1..=3 {
            assert_eq!(variance_fock(&vac, mode).unwrap(), (0.25, 0.25));
        }
        let init = InitialConditions {
            alpha0: [c(0.5, 0.0), c(0.2, 0.3), c(0.0, -0.4)],
            sh0: [c(0.0, 0.0); 3],
        };
        let (psi, _) = FockState::coherent_product(&init, &FockConfig::new(10, 1)).unwrap();
        for mode in 1..=3 {
            let (vx, vy) = variance_fock(&psi, mode).unwrap();
            assert_abs_diff_eq!(vx, 0.25, epsilon = 1e-6);
            assert_abs_diff_eq!(vy, 0.25, epsilon = 1e-6);
        }
        assert!(variance_fock(&psi, 0).is_err());
    }

    #[test]
    fn diagonal_evolution_only_rotates_phases() {
        let h = build_hamiltonian(&params(0.0, 0.0), &small()).unwrap();
        let init = InitialConditions::coherent([0.5, 0.3, 0.2]);
        let (psi0, _) = FockState::coherent_product(&init, &small()).unwrap();
        let grid = TimeGrid::new(0.5, 1e-3, 500);
        let out = evolve(&psi0, &h, &grid).unwrap();
        let end = out.last().unwrap();
        for idx in 0..h.basis.dim() {
            let e = h.matrix.get(idx, idx).re;
            let expect = psi0.amplitudes[idx] * c(0.0, -e * 0.5).exp();
            assert!((end.amplitudes[idx] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn evolution_conserves_norm_energy_and_excitations() {
        let cfg = FockConfig::new(4, 2);
        let h = build_hamiltonian(&params(0.05, 0.1), &cfg).unwrap();
        let init = InitialConditions::coherent([0.5, 0.5, 0.5]);
        let (psi0, _) = FockState::coherent_product(&init, &cfg).unwrap();
        let ndiag = excitation_diagonal::<f64>(&h.basis);
        let e0 = h.matrix.expectation(&psi0.amplitudes).re;
        let n0 = psi0.diagonal_expectation(&ndiag);
        let grid = TimeGrid::new(2.0, 1e-3, 100);
        evolve_with(&psi0, &h, &grid, |_, psi| {
            assert!((psi.norm() - 1.0).abs() < 1e-6);
            assert!((h.matrix.expectation(&psi.amplitudes).re - e0).abs() < 1e-7);
            assert!((psi.diagonal_expectation(&ndiag) - n0).abs() < 1e-6);
            for mode in 1..=3 {
                let (vx, vy) = variance_fock(psi, mode).unwrap();
                assert!(vx * vy >= 1.0 / 16.0 - 1e-9);
            }
        })
        .unwrap();
    }

    #[test]
    fn coarse_step_trips_norm_check() {
        let cfg = FockConfig::new(4, 2);
        let h = build_hamiltonian(&params(20.0, 20.0), &cfg).unwrap();
        let (psi0, _) = FockState::coherent_product(&InitialConditions::coherent([1.0, 1.0, 1.0]), &cfg).unwrap();
        let grid = TimeGrid::new(3.0, 0.01, 1);
        assert!(matches!(evolve(&psi0, &h, &grid), Err(Error::NormDrift { .. })));
    }

    #[test]
    fn contra_direction_unsupported() {
        let mut p = params(0.01, 0.1);
        p.direction = Direction::ContraDirectional;
        assert!(matches!(build_hamiltonian(&p, &small()), Err(Error::Unsupported(_))));
    }
}
