#![allow(dead_code)]

use nalgebra::Matrix3;
use nlcoupler::CouplerParams64;
use num_complex::Complex64;

/// Propagator of the linear coupler, `exp(-i S M tau)`, where `M` holds the
/// frequencies on the diagonal and `kappa` elsewhere and `S` carries the
/// per-mode propagation signs.
pub fn linear_propagator(p: &CouplerParams64, tau: f64) -> Matrix3<Complex64> {
    let m = Matrix3::from_fn(|j, k| {
        let v = if j == k { p.omega[j] } else { p.kappa };
        Complex64::new(0.0, -v * p.mode_sign(j) * tau)
    });
    m.exp()
}

pub fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

pub fn column(csv: &str, name: &str) -> Vec<f64> {
    let rows = data_rows(csv);
    let idx = rows[0]
        .split(',')
        .position(|c| c == name)
        .unwrap_or_else(|| panic!("missing column {name}"));
    rows[1..]
        .iter()
        .map(|r| r.split(',').nth(idx).unwrap().parse().unwrap())
        .collect()
}
