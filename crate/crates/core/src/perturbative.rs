//! Heisenberg-picture perturbative method.
//!
//! Each mode operator is expanded as a fixed combination of initial-time
//! operator products with time-dependent coefficients:
//!
//! ```text
//! a1(t) = A1 a1 + A2 a2 + A3 a3 + A4 a1†b1 + A5 a2†b2 + A6 a3†b3
//!       + A7 a2†b1 + A8 a3†b1 + A9 a1 b1†b1 + A10 a1†a1²
//! a2(t) = B1 a1 + B2 a2 + B3 a3 + B4 a1†b2 + B5 a1†b1 + B6 a2†b2
//!       + B7 a3†b3 + B8 a3†b2 + B9 a2 b2†b2 + B10 a2†a2²
//! a3(t) = C1 a1 + C2 a2 + C3 a3 + C4 a1†b3 + C5 a2†b2 + C6 a1†b1
//!       + C7 a3†b3 + C8 a3 b3†b3 + C9 a2†b3 + C10 a3†a3²
//! b1(t) = D1 b1 + D2 a1² + D3 a2 a1 + D4 a3 a1 + D5 a1†a1 b1 + D6 a1 a1† b1
//! b2(t) = E1 b2 + E2 a2² + E3 a1 a2 + E4 a3 a2 + E5 a2†a2 b2 + E6 a2 a2† b2
//! b3(t) = F1 b3 + F2 a2 a3 + F3 a1 a3 + F4 a3² + F5 a3†a3 b3 + F6 a3 a3† b3
//! ```
//!
//! The 48 coefficients obey a closed set of ODEs that is integrated with
//! fixed-step RK4 on the same grid as the stochastic engine. The expansions
//! and the variance expressions are kept exactly in this form, including
//! their mode-to-mode asymmetries.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::{CouplerParams, InitialConditions, TimeGrid};
use crate::quadrature::QuadratureSeries;
use crate::rk4::{rk4_step, Axpy};
use crate::scalar::{creal, czero, times_neg_i, Real};

/// The 48 complex coefficients. Index `k` holds coefficient `k + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffState<T> {
    pub a: [Complex<T>; 10],
    pub b: [Complex<T>; 10],
    pub c: [Complex<T>; 10],
    pub d: [Complex<T>; 6],
    pub e: [Complex<T>; 6],
    pub f: [Complex<T>; 6],
}

/// Identity map at the origin: `A1 = B2 = C3 = D1 = E1 = F1 = 1`, all
/// other coefficients zero.
pub fn coeff_init<T: Real>() -> CoeffState<T> {
    let one = Complex::new(T::one(), T::zero());
    let mut s = CoeffState {
        a: [czero(); 10],
        b: [czero(); 10],
        c: [czero(); 10],
        d: [czero(); 6],
        e: [czero(); 6],
        f: [czero(); 6],
    };
    s.a[0] = one;
    s.b[1] = one;
    s.c[2] = one;
    s.d[0] = one;
    s.e[0] = one;
    s.f[0] = one;
    s
}

impl<T: Real> CoeffState<T> {
    fn all(&self) -> impl Iterator<Item = &Complex<T>> {
        self.a
            .iter()
            .chain(&self.b)
            .chain(&self.c)
            .chain(&self.d)
            .chain(&self.e)
            .chain(&self.f)
    }

    pub fn is_finite(&self) -> bool {
        self.all().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Linear block `[[A1, A2, A3], [B1, B2, B3], [C1, C2, C3]]`.
    pub fn linear_block(&self) -> [[Complex<T>; 3]; 3] {
        [
            [self.a[0], self.a[1], self.a[2]],
            [self.b[0], self.b[1], self.b[2]],
            [self.c[0], self.c[1], self.c[2]],
        ]
    }
}

impl<T: Real> Axpy<T> for CoeffState<T> {
    #[inline]
    fn axpy(&self, h: T, o: &Self) -> Self {
        fn f<T: Real, const N: usize>(x: &[Complex<T>; N], y: &[Complex<T>; N], h: T) -> [Complex<T>; N] {
            std::array::from_fn(|k| x[k] + y[k] * h)
        }
        Self {
            a: f(&self.a, &o.a, h),
            b: f(&self.b, &o.b, h),
            c: f(&self.c, &o.c, h),
            d: f(&self.d, &o.d, h),
            e: f(&self.e, &o.e, h),
            f: f(&self.f, &o.f, h),
        }
    }
}

/// Right-hand sides of the coefficient equations.
///
/// For contra-directional runs the ten mode-2 fundamental equations (the B
/// block) are negated; the second-harmonic blocks keep their form.
pub fn coeff_derivatives<T: Real>(s: &CoeffState<T>, p: &CouplerParams<T>) -> CoeffState<T> {
    let (a, b, c, d, e, f) = (&s.a, &s.b, &s.c, &s.d, &s.e, &s.f);
    let [w1, w2, w3] = p.omega;
    let g = p.g;
    let hg = g * T::lit(0.5);
    let k = p.kappa;
    let two = T::lit(2.0);
    // -i w x
    let rot = |w: T, x: Complex<T>| times_neg_i(x * w);
    // -i k (x + y)
    let hop = |x: Complex<T>, y: Complex<T>| times_neg_i((x + y) * k);

    let da = [
        rot(w1, a[0]) + hop(b[0], c[0]),
        rot(w1, a[1]) + hop(b[1], c[1]),
        rot(w1, a[2]) + hop(b[2], c[2]),
        rot(w1, a[3]) + a[0].conj() * d[0] * g + hop(b[4], c[5]),
        rot(w1, a[4]) + hop(b[5], c[4]),
        rot(w1, a[5]) + hop(b[6], c[6]),
        rot(w1, a[6]) + a[1].conj() * d[0] * g,
        rot(w1, a[7]) + a[2].conj() * d[0] * g,
        rot(w1, a[8]) + a[3].conj() * d[0] * g,
        rot(w1, a[9]) + a[0].conj() * d[1] * g,
    ];
    let sign_b = p.mode_sign(1);
    let db = [
        rot(w2, b[0]) + hop(a[0], c[0]),
        rot(w2, b[1]) + hop(a[1], c[1]),
        rot(w2, b[2]) + hop(a[2], c[2]),
        rot(w2, b[3]) + b[0].conj() * e[0] * g,
        rot(w2, b[4]) + hop(a[3], c[5]),
        rot(w2, b[5]) + b[1].conj() * e[0] * g + hop(a[4], c[4]),
        rot(w2, b[6]) + hop(a[5], c[6]),
        rot(w2, b[7]) + b[2].conj() * e[0] * g,
        rot(w2, b[8]) + b[5].conj() * e[0] * g,
        rot(w2, b[9]) + b[1].conj() * e[1] * g,
    ]
    .map(|z| z * sign_b);
    let dc = [
        rot(w3, c[0]) + hop(b[0], a[0]),
        rot(w3, c[1]) + hop(b[1], a[1]),
        rot(w3, c[2]) + hop(b[2], a[2]),
        rot(w3, c[3]) + c[0].conj() * f[0] * g,
        rot(w3, c[4]) + hop(b[5], a[4]),
        rot(w3, c[5]) + hop(b[4], a[3]),
        rot(w3, c[6]) + c[2].conj() * f[0] * g + hop(b[6], a[5]),
        rot(w3, c[7]) + c[6].conj() * f[0] * g,
        rot(w3, c[8]) + c[1].conj() * f[0] * g,
        rot(w3, c[9]) + c[2].conj() * f[3] * g,
    ];
    let (v1, v2, v3) = (two * w1, two * w2, two * w3);
    let dd = [
        rot(v1, d[0]),
        rot(v1, d[1]) - a[0] * a[0] * hg,
        rot(v1, d[2]) - a[0] * a[1] * g,
        rot(v1, d[3]) - a[0] * a[2] * g,
        rot(v1, d[4]) - a[3] * a[0] * hg,
        rot(v1, d[5]) - a[0] * a[3] * hg,
    ];
    let de = [
        rot(v2, e[0]),
        rot(v2, e[1]) - b[1] * b[1] * hg,
        rot(v2, e[2]) - b[0] * b[1] * g,
        rot(v2, e[3]) - b[1] * b[2] * g,
        rot(v2, e[4]) - b[5] * b[1] * hg,
        rot(v2, e[5]) - b[1] * b[5] * hg,
    ];
    let df = [
        rot(v3, f[0]),
        rot(v3, f[1]) - c[1] * c[2] * g,
        rot(v3, f[2]) - c[0] * c[2] * g,
        rot(v3, f[3]) - c[2] * c[2] * hg,
        rot(v3, f[4]) - c[6] * c[2] * hg,
        rot(v3, f[5]) - c[2] * c[6] * hg,
    ];
    CoeffState {
        a: da,
        b: db,
        c: dc,
        d: dd,
        e: de,
        f: df,
    }
}

/// Integrates the coefficient equations from [`coeff_init`] with fixed-step
/// RK4, returning one state per grid sample.
pub fn integrate_coeffs<T: Real>(params: &CouplerParams<T>, grid: &TimeGrid<T>) -> Result<Vec<CoeffState<T>>> {
    params.validate()?;
    grid.validate()?;
    let mut state = coeff_init();
    let mut out = Vec::with_capacity(grid.n_samples());
    out.push(state);
    for n in 1..=grid.n_steps() {
        state = rk4_step(&state, grid.dt, |y| coeff_derivatives(y, params));
        if !state.is_finite() {
            return Err(Error::NonFinite {
                what: "perturbative coefficients",
                step: n,
            });
        }
        if n % grid.sample_stride == 0 {
            out.push(state);
        }
    }
    Ok(out)
}

/// Quadrature variances `(V_X, V_Y)` of fundamental mode `mode` (1, 2 or 3)
/// from the coefficients, with `alpha_j = init.alpha0[j]` and the initial
/// second-harmonic amplitudes `beta_j = init.sh0[j]`.
pub fn variance_pert<T: Real>(coeffs: &CoeffState<T>, init: &InitialConditions<T>, mode: usize) -> Result<(T, T)> {
    let (al, be) = (&init.alpha0, &init.sh0);
    let (b1, b2, b3) = (be[0], be[1], be[2]);
    let cj = |z: Complex<T>| z.conj();
    let (normal, anomalous) = match mode {
        1 => {
            let a = &coeffs.a;
            let n = creal(a[4].norm_sqr() * b2.norm_sqr())
                + cj(b3) * b3 * a[5].norm_sqr()
                + a[6] * cj(a[4]) * cj(b2) * b1
                + a[7] * cj(a[5]) * cj(b3) * b1
                + a[4] * cj(a[6]) * cj(b1) * b2
                + a[5] * cj(a[7]) * cj(b1) * b3;
            let s = a[3] * a[0] * b1
                + a[9] * a[0] * al[0] * al[0]
                + a[4] * a[1] * b2
                + a[6] * a[1] * b1
                + a[5] * a[2] * b3
                + a[7] * a[2] * b1;
            (n, s)
        }
        2 => {
            let b = &coeffs.b;
            let n = creal(b[4].norm_sqr() * b1.norm_sqr())
                + creal(b[6].norm_sqr() * b3.norm_sqr())
                + b[4] * cj(b[3]) * cj(b2) * b1
                + b[3] * cj(b[4]) * cj(b1) * b2
                + b[7] * cj(b[6]) * cj(b3) * b2
                + b[6] * cj(b[7]) * cj(b2) * b3;
            let s = b[3] * b[0] * b2
                + b[4] * b[0] * b1
                + b[5] * b[1] * b2
                + b[9] * b[1] * al[1] * al[1]
                + b[6] * b[2] * b3
                + b[7] * b[2] * b2;
            (n, s)
        }
        3 => {
            let c = &coeffs.c;
            let n = creal(c[4].norm_sqr() * b2.norm_sqr())
                + creal(c[5].norm_sqr() * b1.norm_sqr())
                + c[5] * cj(c[3]) * cj(b3) * b1
                + c[3] * cj(c[5]) * cj(b1) * b3
                + c[4] * cj(c[8]) * cj(b3) * b2;
            let s = c[3] * c[0] * b3
                + c[5] * c[0] * b1
                + c[4] * c[1] * b2
                + c[8] * c[1] * b3
                + c[6] * c[2] * b3
                + c[9] * c[2] * al[2] * al[2];
            (n, s)
        }
        _ => return Err(Error::InvalidParams(format!("mode must be 1, 2 or 3, got {mode}"))),
    };
    let quarter = T::lit(0.25);
    let two = T::lit(2.0);
    // The normal-ordered block is real for modes 1 and 2; mode 3 carries a
    // single unpaired cross term, of which only the real part is kept.
    let base = T::one() + two * normal.re;
    let pm = two * anomalous.re; // s + c.c.
    Ok(((base + pm) * quarter, (base - pm) * quarter))
}

/// Full variance series for all three modes.
pub fn variance_series<T: Real>(
    coeffs: &[CoeffState<T>],
    init: &InitialConditions<T>,
    grid: &TimeGrid<T>,
) -> Result<QuadratureSeries<T>> {
    let mut series = QuadratureSeries::with_capacity(coeffs.len(), false);
    for (k, cs) in coeffs.iter().enumerate() {
        series.tau.push(grid.sample_time(k));
        for j in 0..3 {
            let (vx, vy) = variance_pert(cs, init, j + 1)?;
            series.vx[j].push(vx);
            series.vy[j].push(vy);
        }
    }
    Ok(series)
}

/// Integrates and evaluates in one call.
pub fn run_perturbative<T: Real>(
    params: &CouplerParams<T>,
    init: &InitialConditions<T>,
    grid: &TimeGrid<T>,
) -> Result<QuadratureSeries<T>> {
    init.validate()?;
    let coeffs = integrate_coeffs(params, grid)?;
    variance_series(&coeffs, init, grid)
}
