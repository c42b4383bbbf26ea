//! Statistical behaviour of the positive-P ensemble: standard-error scaling,
//! agreement of the delta-method error with replica scatter, and a census of
//! divergent trajectories over the codirectional presets.

use nlcoupler::positivep::{run_ensemble, run_ensemble_range, variance_pp, EnsembleSettings};
use nlcoupler::{preset_scenario, TimeGrid64, SCENARIO_NAMES};

fn settings(n_traj: u64, seed: u64) -> EnsembleSettings<f64> {
    EnsembleSettings {
        n_traj,
        master_seed: seed,
        ..Default::default()
    }
}

#[test]
fn standard_error_scales_as_inverse_root_n() {
    let sc = preset_scenario::<f64>("fig6b").unwrap();
    let grid = TimeGrid64::new(0.5, 1e-3, 250);
    let se_at = |n: u64| {
        let ens = run_ensemble(&sc.init, &sc.params, &grid, &settings(n, 5)).unwrap();
        let pp = variance_pp(&ens.moments, &grid).unwrap().series;
        let k = pp.len() - 1;
        let se = pp.stderr.unwrap();
        (se.vx[0][k], se.vy[0][k])
    };
    let small = se_at(1_000);
    let large = se_at(100_000);
    for (s, l) in [(small.0, large.0), (small.1, large.1)] {
        let ratio = s / l;
        assert!(
            (10.0 / 1.5..10.0 * 1.5).contains(&ratio),
            "ratio {ratio}"
        );
    }
}

#[test]
fn delta_method_error_matches_replica_scatter() {
    let sc = preset_scenario::<f64>("fig6b").unwrap();
    let grid = TimeGrid64::new(1.0, 1e-3, 1000);
    let replicas = 24u64;
    let per = 400u64;
    let s = settings(per * replicas, 8);
    let mut values = Vec::new();
    let mut errors = Vec::new();
    for r in 0..replicas {
        let acc = run_ensemble_range(&sc.init, &sc.params, &grid, &s, r * per..(r + 1) * per).unwrap();
        let pp = variance_pp(&acc, &grid).unwrap().series;
        values.push(pp.vx[0][1]);
        errors.push(pp.stderr.unwrap().vx[0][1]);
    }
    let n = replicas as f64;
    let mean = values.iter().sum::<f64>() / n;
    let scatter = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let mean_se = errors.iter().sum::<f64>() / n;
    let ratio = scatter / mean_se;
    assert!((0.6..1.5).contains(&ratio), "scatter {scatter:e} vs se {mean_se:e}");
}

#[test]
fn presets_rarely_diverge() {
    let grid = TimeGrid64::default();
    for name in SCENARIO_NAMES {
        let sc = preset_scenario::<f64>(name).unwrap();
        let ens = run_ensemble(&sc.init, &sc.params, &grid, &settings(100, 3)).unwrap();
        println!("{name}: {} of 100 discarded", ens.moments.discarded());
        assert!(!ens.unreliable(), "{name}: {} discarded", ens.moments.discarded());
    }
}
