//! System parameters, dimensionless scaling, initial conditions and the
//! named parameter presets.
//!
//! Everything lives in dimensionless units: frequencies (or wavenumbers for
//! contra-directional runs) are measured in units of the first mode, and the
//! integration coordinate is `tau = omega_1 t` (or `z = k_1 z`).

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{czero, creal, Real};

/// Propagation geometry of the three fundamental modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// All modes propagate the same way; the coordinate is time.
    Codirectional,
    /// Mode 2 counter-propagates; the coordinate is distance along the guide.
    ContraDirectional,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Codirectional => "co",
            Direction::ContraDirectional => "contra",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "co" | "codirectional" => Ok(Direction::Codirectional),
            "contra" | "contradirectional" | "contra-directional" => {
                Ok(Direction::ContraDirectional)
            }
            other => Err(Error::Config(format!(
                "unknown direction '{other}' (expected co or contra)"
            ))),
        }
    }
}

/// Dimensionless coupler parameters.
///
/// For contra-directional runs `omega` holds the scaled wavenumbers, `g` the
/// scaled spatial nonlinear coupling and `kappa` the scaled spatial linear
/// coupling. The two systems have the same shape so one type serves both.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplerParams<T> {
    pub omega: [T; 3],
    pub g: T,
    pub kappa: T,
    pub direction: Direction,
}

impl<T: Real> CouplerParams<T> {
    pub fn validate(&self) -> Result<()> {
        if self.omega.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParams("omega must be finite".into()));
        }
        if (self.omega[0] - T::one()).abs() > T::epsilon() * T::lit(16.0) {
            return Err(Error::InvalidParams(format!(
                "omega[0] must be 1 after scaling, got {}",
                self.omega[0]
            )));
        }
        if !(self.g.is_finite() && self.g >= T::zero()) {
            return Err(Error::InvalidParams(format!("g must be >= 0, got {}", self.g)));
        }
        if !(self.kappa.is_finite() && self.kappa >= T::zero()) {
            return Err(Error::InvalidParams(format!(
                "kappa must be >= 0, got {}",
                self.kappa
            )));
        }
        Ok(())
    }

    /// Sign applied to the mode-`j` fundamental equations (0-based). Mode 2
    /// (index 1) is reversed in the contra-directional system.
    #[inline]
    pub fn mode_sign(&self, j: usize) -> T {
        match (self.direction, j) {
            (Direction::ContraDirectional, 1) => -T::one(),
            _ => T::one(),
        }
    }
}

/// Divides frequencies and couplings by the first mode's frequency (or
/// wavenumber), so that `omega[0] == 1` afterwards.
pub fn scale_dimensionless<T: Real>(
    raw_omega: [T; 3],
    raw_g: T,
    raw_kappa: T,
    direction: Direction,
) -> Result<CouplerParams<T>> {
    let w0 = raw_omega[0];
    if !(w0.is_finite() && w0 > T::zero()) {
        return Err(Error::InvalidParams(format!(
            "reference frequency must be positive, got {w0}"
        )));
    }
    let params = CouplerParams {
        omega: [T::one(), raw_omega[1] / w0, raw_omega[2] / w0],
        g: raw_g / w0,
        kappa: raw_kappa / w0,
        direction,
    };
    params.validate()?;
    Ok(params)
}

/// Initial mean fields: coherent fundamental amplitudes and second-harmonic
/// amplitudes (vacuum unless stated otherwise).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialConditions<T> {
    pub alpha0: [Complex<T>; 3],
    pub sh0: [Complex<T>; 3],
}

impl<T: Real> InitialConditions<T> {
    /// Real coherent amplitudes with vacuum second-harmonic modes.
    pub fn coherent(alpha: [T; 3]) -> Self {
        Self {
            alpha0: alpha.map(creal),
            sh0: [czero(); 3],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |z: &Complex<T>| z.re.is_finite() && z.im.is_finite();
        if self.alpha0.iter().chain(&self.sh0).all(finite) {
            Ok(())
        } else {
            Err(Error::InvalidParams("initial amplitudes must be finite".into()))
        }
    }
}

/// Uniform integration grid shared by all engines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    pub t_max: T,
    pub dt: T,
    pub sample_stride: usize,
}

impl<T: Real> Default for TimeGrid<T> {
    fn default() -> Self {
        Self {
            t_max: T::lit(20.0),
            dt: T::lit(1e-3),
            sample_stride: 100,
        }
    }
}

impl<T: Real> TimeGrid<T> {
    pub const MAX_DEFAULT_DT: f64 = 0.01;

    pub fn new(t_max: T, dt: T, sample_stride: usize) -> Self {
        Self {
            t_max,
            dt,
            sample_stride,
        }
    }

    /// Checks the grid, including the default `dt <= 0.01` limit.
    pub fn validate(&self) -> Result<()> {
        self.validate_with_max_dt(T::lit(Self::MAX_DEFAULT_DT))
    }

    pub fn validate_with_max_dt(&self, max_dt: T) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > T::zero()) {
            return Err(Error::InvalidGrid(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_max.is_finite() && self.t_max > T::zero()) {
            return Err(Error::InvalidGrid(format!(
                "t_max must be > 0, got {}",
                self.t_max
            )));
        }
        if self.dt > max_dt {
            return Err(Error::InvalidGrid(format!(
                "dt = {} exceeds the maximum step {max_dt}",
                self.dt
            )));
        }
        if self.t_max / self.dt < T::one() - T::lit(1e-9) {
            return Err(Error::InvalidGrid("t_max must be at least one step".into()));
        }
        if self.sample_stride == 0 {
            return Err(Error::InvalidGrid("sample_stride must be >= 1".into()));
        }
        Ok(())
    }

    /// Number of integration steps, `round(t_max / dt)`.
    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt)
            .round()
            .to_usize()
            .expect("validated grid")
    }

    /// Number of stored samples, including the initial point.
    pub fn n_samples(&self) -> usize {
        self.n_steps() / self.sample_stride + 1
    }

    /// Coordinate of sample `k`.
    pub fn sample_time(&self, k: usize) -> T {
        T::from_usize(k * self.sample_stride).expect("sample index") * self.dt
    }

    pub fn sample_times(&self) -> Vec<T> {
        (0..self.n_samples()).map(|k| self.sample_time(k)).collect()
    }
}

/// A named preset: parameters, initial conditions and the default grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario<T> {
    pub params: CouplerParams<T>,
    pub init: InitialConditions<T>,
    pub grid: TimeGrid<T>,
}

/// Registered preset names, in figure order.
pub const SCENARIO_NAMES: [&str; 15] = [
    "fig2", "fig3", "fig4a", "fig4b", "fig4c", "fig5a", "fig5b", "fig5c", "fig6a", "fig6b",
    "fig7a", "fig7b", "fig8a", "fig8b", "fig8c",
];

/// Looks up one of the registered presets.
pub fn preset_scenario<T: Real>(name: &str) -> Result<Scenario<T>> {
    const SYM: [f64; 3] = [1.0, 1.0, 1.0];
    const ASYM: [f64; 3] = [1.0, 0.0, 0.0];
    use Direction::{Codirectional as Co, ContraDirectional as Contra};

    // (g, kappa, alpha0, direction)
    let (g, kappa, alpha, direction) = match name {
        "fig2" => (0.01, 0.1, SYM, Co),
        "fig3" => (0.01, 0.1, ASYM, Co),
        "fig4a" => (0.01, 0.01, SYM, Co),
        "fig4b" => (0.01, 0.09, SYM, Co),
        "fig4c" => (0.01, 0.5, SYM, Co),
        "fig5a" => (0.01, 0.01, ASYM, Co),
        "fig5b" => (0.01, 0.09, ASYM, Co),
        "fig5c" => (0.01, 0.5, ASYM, Co),
        "fig6a" => (0.05, 0.1, SYM, Co),
        "fig6b" => (0.08, 0.1, SYM, Co),
        "fig7a" => (0.05, 0.1, ASYM, Co),
        "fig7b" => (0.08, 0.1, ASYM, Co),
        "fig8a" => (0.01, 0.1, SYM, Contra),
        "fig8b" => (0.01, 0.3, SYM, Contra),
        "fig8c" => (0.01, 0.5, SYM, Contra),
        _ => {
            return Err(Error::UnknownScenario {
                name: name.to_string(),
                valid: SCENARIO_NAMES.join(", "),
            })
        }
    };
    let params = CouplerParams {
        omega: [T::one(); 3],
        g: T::lit(g),
        kappa: T::lit(kappa),
        direction,
    };
    Ok(Scenario {
        params,
        init: InitialConditions::coherent(alpha.map(T::lit)),
        grid: TimeGrid::default(),
    })
}
