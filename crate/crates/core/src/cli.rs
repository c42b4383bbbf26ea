//! Run orchestration: configuration parsing, method dispatch and CSV output.
//!
//! Configuration comes from an optional flat `key=value` file overlaid by
//! command-line flags. Keys match the long flag names (hyphens and
//! underscores are interchangeable).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Parser;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fockoracle::{run_fock, FockConfig};
use crate::model::{preset_scenario, scale_dimensionless, CouplerParams, Direction, InitialConditions, TimeGrid};
use crate::perturbative::run_perturbative;
use crate::positivep::{run_ensemble, variance_pp, EnsembleSettings, DEFAULT_DIVERGENCE_THRESHOLD};
use crate::quadrature::{QuadratureSeries, StdErrors};

/// Metadata note attached to contra-directional runs.
pub const CONTRA_CAVEAT: &str = "contra-directional runs integrate the spatial equations as an initial-value problem; \
     they are not expected to describe transient states faithfully";

/// Exit status for a completed run whose ensemble exceeded the discard limit.
pub const EXIT_UNRELIABLE: i32 = 2;
/// Exit status for configuration and I/O errors.
pub const EXIT_USAGE: i32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    PositiveP,
    Perturbative,
    Fock,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::PositiveP => "pp",
            Method::Perturbative => "pert",
            Method::Fock => "fock",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "pp" => Ok(Method::PositiveP),
            "pert" => Ok(Method::Perturbative),
            "fock" => Ok(Method::Fock),
            other => Err(Error::Config(format!("unknown method '{other}' (expected pp, pert or fock)"))),
        }
    }
}

/// Command-line flags. Every value is optional so that the config file can
/// supply it instead.
#[derive(Debug, Clone, Default, Parser)]
#[command(name = "nlcoupler", version, about = "Squeezing in a three-waveguide nonlinear coupler")]
pub struct CliArgs {
    /// Preset name (fig2 .. fig8c).
    #[arg(long)]
    pub scenario: Option<String>,
    /// Method to run: pp, pert or fock. Repeatable.
    #[arg(long = "method")]
    pub method: Vec<String>,
    #[arg(long)]
    pub g: Option<String>,
    #[arg(long)]
    pub kappa: Option<String>,
    /// Three comma-separated frequencies; scaled so the first is 1.
    #[arg(long)]
    pub omega: Option<String>,
    /// Three comma-separated complex amplitudes, e.g. 1+0i,0+0i,0+0i.
    #[arg(long)]
    pub alpha0: Option<String>,
    #[arg(long)]
    pub sh0: Option<String>,
    /// co or contra.
    #[arg(long)]
    pub direction: Option<String>,
    #[arg(long)]
    pub dt: Option<String>,
    #[arg(long)]
    pub tmax: Option<String>,
    /// Integration steps per stored sample.
    #[arg(long)]
    pub stride: Option<String>,
    #[arg(long)]
    pub trajectories: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Fundamental and second-harmonic cutoffs, e.g. 4,2.
    #[arg(long = "fock-cutoffs")]
    pub fock_cutoffs: Option<String>,
    #[arg(long = "divergence-threshold")]
    pub divergence_threshold: Option<String>,
    /// Output CSV path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// key=value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads for the ensemble (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

const KEYS: [&str; 16] = [
    "scenario",
    "method",
    "g",
    "kappa",
    "omega",
    "alpha0",
    "sh0",
    "direction",
    "dt",
    "tmax",
    "stride",
    "trajectories",
    "seed",
    "fock_cutoffs",
    "divergence_threshold",
    "out",
];

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Option<String>,
    pub params: CouplerParams<f64>,
    pub init: InitialConditions<f64>,
    pub grid: TimeGrid<f64>,
    /// Selected methods, deduplicated, in output order.
    pub methods: Vec<Method>,
    pub n_traj: u64,
    pub master_seed: u64,
    pub divergence_threshold: f64,
    pub fock: FockConfig,
    pub out: Option<PathBuf>,
}

/// Parses `re+imi`, `re-imi`, `re`, or `imi`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let bad = || Error::Config(format!("malformed complex literal '{s}' (expected re+imi)"));
    let t = s.trim();
    let num = |x: &str| x.parse::<f64>().map_err(|_| bad());
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Complex64::new(num(t)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (num(&body[..k])?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "+" | "" => 1.0,
        "-" => -1.0,
        x => num(x)?,
    };
    if body.is_empty() && split.is_none() {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

pub fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}i", z.re, sign, z.im.abs())
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: expected a number, got '{v}'")))
}

fn parse_int<I: std::str::FromStr>(key: &str, v: &str) -> Result<I> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: expected a non-negative integer, got '{v}'")))
}

fn parse_triple<X>(key: &str, v: &str, f: impl Fn(&str) -> Result<X>) -> Result<[X; 3]> {
    let parts: Vec<X> = v.split(',').map(f).collect::<Result<_>>()?;
    parts
        .try_into()
        .map_err(|_| Error::Config(format!("{key}: expected three comma-separated values, got '{v}'")))
}

fn normalize_key(k: &str) -> String {
    k.trim().trim_start_matches("--").replace('-', "_")
}

/// Reads a `key=value` file. Blank lines and `#` comments are ignored;
/// unknown or repeated keys are errors.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    parse_config_text(&text)
}

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value", lineno + 1)))?;
        let key = normalize_key(k);
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("line {}: unknown key '{}'", lineno + 1, k.trim())));
        }
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(Error::Config(format!("line {}: key '{key}' given twice", lineno + 1)));
        }
    }
    Ok(map)
}

fn flag_map(args: &CliArgs) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    let mut put = |k: &str, v: &Option<String>| {
        if let Some(v) = v {
            m.insert(k.to_string(), v.clone());
        }
    };
    put("scenario", &args.scenario);
    put("g", &args.g);
    put("kappa", &args.kappa);
    put("omega", &args.omega);
    put("alpha0", &args.alpha0);
    put("sh0", &args.sh0);
    put("direction", &args.direction);
    put("dt", &args.dt);
    put("tmax", &args.tmax);
    put("stride", &args.stride);
    put("trajectories", &args.trajectories);
    put("seed", &args.seed);
    put("fock_cutoffs", &args.fock_cutoffs);
    put("divergence_threshold", &args.divergence_threshold);
    put("out", &args.out.as_ref().map(|p| p.display().to_string()));
    if !args.method.is_empty() {
        m.insert("method".into(), args.method.join(","));
    }
    m
}

/// Merges the config file (if any) with the flags, flags winning, and
/// resolves the result against the chosen preset.
pub fn parse_config(args: &CliArgs) -> Result<RunConfig> {
    let mut map = match &args.config {
        Some(p) => read_config_file(p)?,
        None => BTreeMap::new(),
    };
    map.extend(flag_map(args));
    resolve(&map)
}

/// Builds a [`RunConfig`] from resolved key/value pairs.
pub fn resolve(map: &BTreeMap<String, String>) -> Result<RunConfig> {
    let get = |k: &str| map.get(k).map(String::as_str);
    let scenario = get("scenario").map(str::to_string);
    let base = scenario.as_deref().map(preset_scenario::<f64>).transpose()?;

    let omega = match get("omega") {
        Some(v) => parse_triple("omega", v, |x| parse_f64("omega", x))?,
        None => base.map_or([1.0; 3], |b| b.params.omega),
    };
    let required = |key: &str, preset: Option<f64>| -> Result<f64> {
        match (get(key), preset) {
            (Some(v), _) => parse_f64(key, v),
            (None, Some(p)) => Ok(p),
            (None, None) => Err(Error::Config(format!("{key} is required when no scenario is given"))),
        }
    };
    let g = required("g", base.map(|b| b.params.g))?;
    let kappa = required("kappa", base.map(|b| b.params.kappa))?;
    let direction = match get("direction") {
        Some(v) => v.parse()?,
        None => base.map_or(Direction::Codirectional, |b| b.params.direction),
    };
    let params = scale_dimensionless(omega, g, kappa, direction)?;

    let alpha0 = match get("alpha0") {
        Some(v) => parse_triple("alpha0", v, parse_complex)?,
        None => base
            .map(|b| b.init.alpha0)
            .ok_or_else(|| Error::Config("alpha0 is required when no scenario is given".into()))?,
    };
    let sh0 = match get("sh0") {
        Some(v) => parse_triple("sh0", v, parse_complex)?,
        None => base.map_or([Complex64::new(0.0, 0.0); 3], |b| b.init.sh0),
    };
    let init = InitialConditions { alpha0, sh0 };
    init.validate()?;

    let mut grid = base.map_or_else(TimeGrid::default, |b| b.grid);
    if let Some(v) = get("dt") {
        grid.dt = parse_f64("dt", v)?;
    }
    if let Some(v) = get("tmax") {
        grid.t_max = parse_f64("tmax", v)?;
    }
    if let Some(v) = get("stride") {
        grid.sample_stride = parse_int("stride", v)?;
    }
    grid.validate()?;

    let mut methods = Vec::new();
    if let Some(v) = get("method") {
        for m in v.split(',').filter(|s| !s.trim().is_empty()) {
            methods.push(Method::parse(m)?);
        }
    }
    methods.sort();
    methods.dedup();
    if methods.is_empty() {
        return Err(Error::Config("select at least one method (pp, pert, fock)".into()));
    }
    if methods.contains(&Method::Fock) && direction == Direction::ContraDirectional {
        return Err(Error::Config(
            "conflicting settings: the fock method requires direction=co".into(),
        ));
    }

    let defaults = EnsembleSettings::<f64>::default();
    let n_traj = get("trajectories").map_or(Ok(defaults.n_traj), |v| parse_int("trajectories", v))?;
    if methods.contains(&Method::PositiveP) && n_traj < 2 {
        return Err(Error::Config("trajectories must be at least 2".into()));
    }
    let master_seed = get("seed").map_or(Ok(0), |v| parse_int("seed", v))?;
    let divergence_threshold = get("divergence_threshold")
        .map_or(Ok(DEFAULT_DIVERGENCE_THRESHOLD), |v| parse_f64("divergence_threshold", v))?;
    if !(divergence_threshold > 0.0) {
        return Err(Error::Config("divergence_threshold must be positive".into()));
    }

    let mut fock = FockConfig::default();
    if let Some(v) = get("fock_cutoffs") {
        let parts: Vec<usize> = v
            .split(',')
            .map(|x| parse_int("fock_cutoffs", x))
            .collect::<Result<_>>()?;
        let [nf, ns]: [usize; 2] = parts
            .try_into()
            .map_err(|_| Error::Config(format!("fock_cutoffs: expected two values, got '{v}'")))?;
        fock.n_fund = nf;
        fock.n_sh = ns;
    }
    if methods.contains(&Method::Fock) {
        fock.validate()?;
    }

    Ok(RunConfig {
        scenario,
        params,
        init,
        grid,
        methods,
        n_traj,
        master_seed,
        divergence_threshold,
        fock,
        out: get("out").map(PathBuf::from),
    })
}

/// Diagnostics gathered while running the selected methods.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunDiagnostics {
    pub pp_accepted: u64,
    pub pp_discarded: u64,
    pub pp_discard_fraction: f64,
    pub pp_unreliable: bool,
    pub pp_max_imag_residue: f64,
    pub fock_dim: usize,
    pub fock_initial_truncated_weight: f64,
    pub fock_max_boundary_weight: f64,
}

/// Results of one run, ready for rendering.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub tau: Vec<f64>,
    pub series: Vec<(Method, QuadratureSeries<f64>)>,
    pub diagnostics: RunDiagnostics,
}

impl RunOutput {
    pub fn unreliable(&self) -> bool {
        self.diagnostics.pp_unreliable
    }

    pub fn get(&self, method: Method) -> Option<&QuadratureSeries<f64>> {
        self.series.iter().find(|(m, _)| *m == method).map(|(_, s)| s)
    }
}

/// Executes every selected method on the shared grid.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput> {
    let mut diag = RunDiagnostics::default();
    let mut series = Vec::new();
    for &method in &cfg.methods {
        let s = match method {
            Method::PositiveP => {
                let settings = EnsembleSettings {
                    n_traj: cfg.n_traj,
                    master_seed: cfg.master_seed,
                    divergence_threshold: cfg.divergence_threshold,
                    ..EnsembleSettings::default()
                };
                let ens = run_ensemble(&cfg.init, &cfg.params, &cfg.grid, &settings)?;
                diag.pp_accepted = ens.moments.count();
                diag.pp_discarded = ens.moments.discarded();
                diag.pp_discard_fraction = ens.discard_fraction();
                diag.pp_unreliable = ens.unreliable();
                if ens.moments.count() < 2 {
                    // nothing usable survived; emit NaN columns and let the
                    // unreliable flag carry the failure
                    diag.pp_unreliable = true;
                    diag.pp_max_imag_residue = f64::NAN;
                    nan_series(&cfg.grid)
                } else {
                    let pp = variance_pp(&ens.moments, &cfg.grid)?;
                    diag.pp_max_imag_residue = pp.max_imag_residue;
                    pp.series
                }
            }
            Method::Perturbative => run_perturbative(&cfg.params, &cfg.init, &cfg.grid)?,
            Method::Fock => {
                let run = run_fock(&cfg.params, &cfg.init, &cfg.grid, &cfg.fock)?;
                diag.fock_dim = run.dim;
                diag.fock_initial_truncated_weight = run.initial_truncated_weight;
                diag.fock_max_boundary_weight = run.max_boundary_weight;
                run.series
            }
        };
        series.push((method, s));
    }
    Ok(RunOutput {
        tau: cfg.grid.sample_times(),
        series,
        diagnostics: diag,
    })
}

fn nan_series(grid: &TimeGrid<f64>) -> QuadratureSeries<f64> {
    let n = grid.n_samples();
    let nan = || std::array::from_fn(|_| vec![f64::NAN; n]);
    QuadratureSeries {
        tau: grid.sample_times(),
        vx: nan(),
        vy: nan(),
        stderr: Some(StdErrors { vx: nan(), vy: nan() }),
    }
}

/// Column names in output order.
pub fn column_names(methods: &[Method]) -> Vec<String> {
    let mut cols = vec!["tau".to_string()];
    for &m in methods {
        for j in 1..=3 {
            cols.push(format!("{}_VX_{j}", m.tag()));
            cols.push(format!("{}_VY_{j}", m.tag()));
            if m == Method::PositiveP {
                cols.push(format!("pp_SE_VX_{j}"));
                cols.push(format!("pp_SE_VY_{j}"));
            }
        }
    }
    cols
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders the metadata block, header and data rows. `timestamp` is the
/// only field that differs between reruns of the same configuration.
pub fn render_csv(cfg: &RunConfig, out: &RunOutput, timestamp: u64) -> String {
    let mut s = String::new();
    let mut meta = |k: &str, v: String| {
        let _ = writeln!(s, "# {k}={v}");
    };
    let p = &cfg.params;
    let triple = |v: [f64; 3]| v.map(|x| x.to_string()).join(",");
    let ctriple = |v: [Complex64; 3]| v.map(format_complex).join(",");
    meta("program", format!("nlcoupler {}", env!("CARGO_PKG_VERSION")));
    meta("generated", timestamp.to_string());
    meta("scenario", cfg.scenario.clone().unwrap_or_else(|| "none".into()));
    meta("direction", p.direction.to_string());
    meta("omega", triple(p.omega));
    meta("g", p.g.to_string());
    meta("kappa", p.kappa.to_string());
    meta("alpha0", ctriple(cfg.init.alpha0));
    meta("sh0", ctriple(cfg.init.sh0));
    meta("dt", cfg.grid.dt.to_string());
    meta("tmax", cfg.grid.t_max.to_string());
    meta("stride", cfg.grid.sample_stride.to_string());
    meta("method", cfg.methods.iter().map(|m| m.tag()).collect::<Vec<_>>().join(","));
    let d = &out.diagnostics;
    if cfg.methods.contains(&Method::PositiveP) {
        meta("trajectories", cfg.n_traj.to_string());
        meta("seed", cfg.master_seed.to_string());
        meta("divergence_threshold", cfg.divergence_threshold.to_string());
        meta("pp_accepted", d.pp_accepted.to_string());
        meta("pp_discarded", d.pp_discarded.to_string());
        meta("pp_discard_fraction", d.pp_discard_fraction.to_string());
        meta("pp_unreliable", d.pp_unreliable.to_string());
        meta("pp_max_imag_residue", num(d.pp_max_imag_residue));
    }
    if cfg.methods.contains(&Method::Fock) {
        meta("fock_cutoffs", format!("{},{}", cfg.fock.n_fund, cfg.fock.n_sh));
        meta("fock_dim", d.fock_dim.to_string());
        meta("fock_initial_truncated_weight", num(d.fock_initial_truncated_weight));
        meta("fock_max_boundary_weight", num(d.fock_max_boundary_weight));
    }
    if p.direction == Direction::ContraDirectional {
        meta("caveat", CONTRA_CAVEAT.to_string());
    }

    let _ = writeln!(s, "{}", column_names(&cfg.methods).join(","));
    for (k, t) in out.tau.iter().enumerate() {
        let mut row = vec![num(*t)];
        for (m, series) in &out.series {
            for j in 0..3 {
                row.push(num(series.vx[j][k]));
                row.push(num(series.vy[j][k]));
                if *m == Method::PositiveP {
                    let se = series.stderr.as_ref().expect("ensemble series carries errors");
                    row.push(num(se.vx[j][k]));
                    row.push(num(se.vy[j][k]));
                }
            }
        }
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}

/// Outcome of [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub output: RunOutput,
    pub csv: String,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.output.unreliable() {
            EXIT_UNRELIABLE
        } else {
            0
        }
    }
}

/// Runs the configuration and writes the CSV to `cfg.out` (or standard
/// output). An unreliable ensemble still produces output; callers read the
/// flag from the report.
pub fn run(cfg: &RunConfig) -> Result<RunReport> {
    let output = execute(cfg)?;
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    let csv = render_csv(cfg, &output, timestamp);
    match &cfg.out {
        Some(path) => std::fs::write(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(RunReport { output, csv })
}

/// Entry point shared by the binary: parses flags, runs, and maps the
/// outcome to an exit status.
pub fn main_with_args(args: CliArgs) -> i32 {
    let result = parse_config(&args).and_then(|cfg| match args.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(|| run(&cfg)),
        None => run(&cfg),
    });
    match result {
        Ok(report) => {
            if report.output.unreliable() {
                eprintln!(
                    "warning: {:.2}% of trajectories diverged; ensemble flagged unreliable",
                    100.0 * report.output.diagnostics.pp_discard_fraction
                );
            }
            report.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(list: &[&str]) -> CliArgs {
        CliArgs::try_parse_from(std::iter::once("nlcoupler").chain(list.iter().copied())).unwrap()
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("1+0i").unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(parse_complex("-0.5-2i").unwrap(), Complex64::new(-0.5, -2.0));
        assert_eq!(parse_complex("1e-3+2.5e+1i").unwrap(), Complex64::new(1e-3, 25.0));
        assert_eq!(parse_complex("0.7").unwrap(), Complex64::new(0.7, 0.0));
        assert_eq!(parse_complex("3i").unwrap(), Complex64::new(0.0, 3.0));
        assert_eq!(parse_complex("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(parse_complex(" 2-i ").unwrap(), Complex64::new(2.0, -1.0));
        for bad in ["", "i", "1+", "a+bi", "1+2j", "1++2i"] {
            assert!(parse_complex(bad).is_err(), "{bad}");
        }
        for z in [Complex64::new(0.3, -0.7), Complex64::new(-1.0, 0.0), Complex64::new(1e-9, 5.0)] {
            assert_eq!(parse_complex(&format_complex(z)).unwrap(), z);
        }
    }

    #[test]
    fn scenario_with_single_method() {
        let cfg = parse_config(&args(&["--scenario", "fig2", "--method", "pp", "--trajectories", "100000"])).unwrap();
        let fig2 = preset_scenario::<f64>("fig2").unwrap();
        assert_eq!(cfg.params, fig2.params);
        assert_eq!(cfg.init, fig2.init);
        assert_eq!(cfg.methods, vec![Method::PositiveP]);
        assert_eq!(cfg.n_traj, 100_000);
    }

    #[test]
    fn overrides_apply_after_preset() {
        let cfg = parse_config(&args(&["--scenario", "fig4a", "--kappa", "0.5", "--method", "pert"])).unwrap();
        assert_eq!(cfg.params, preset_scenario::<f64>("fig4c").unwrap().params);

        let cfg = parse_config(&args(&["--scenario", "fig2", "--alpha0", "1+0i,0+0i,0+0i", "--method", "pert"])).unwrap();
        assert_eq!(cfg.init, preset_scenario::<f64>("fig3").unwrap().init);
    }

    #[test]
    fn omega_is_scaled() {
        let cfg = parse_config(&args(&[
            "--omega", "2,3,4", "--g", "0.02", "--kappa", "0.2", "--alpha0", "1,1,1", "--method", "pert",
        ]))
        .unwrap();
        assert_eq!(cfg.params.omega, [1.0, 1.5, 2.0]);
        assert_eq!(cfg.params.g, 0.01);
        assert_eq!(cfg.params.kappa, 0.1);
    }

    #[test]
    fn methods_are_ordered_and_deduplicated() {
        let cfg = parse_config(&args(&["--scenario", "fig2", "--method", "pert", "--method", "pp", "--method", "pert"])).unwrap();
        assert_eq!(cfg.methods, vec![Method::PositiveP, Method::Perturbative]);
        assert_eq!(column_names(&cfg.methods).len(), 19);
    }

    #[test]
    fn config_errors() {
        assert!(parse_config(&args(&["--scenario", "fig2"])).is_err());
        assert!(parse_config(&args(&["--scenario", "fig9", "--method", "pp"])).is_err());
        assert!(parse_config(&args(&["--scenario", "fig2", "--method", "mc"])).is_err());
        assert!(parse_config(&args(&["--scenario", "fig8a", "--method", "fock"])).is_err());
        assert!(parse_config(&args(&["--scenario", "fig2", "--method", "pp", "--alpha0", "1+0j,0,0"])).is_err());
        assert!(parse_config(&args(&["--g", "0.1", "--kappa", "0.1", "--method", "pert"])).is_err());
        assert!(parse_config(&args(&["--scenario", "fig2", "--method", "pert", "--dt", "0.1"])).is_err());
        assert!(parse_config_text("bogus=1").is_err());
        assert!(parse_config_text("g=1\ng=2").is_err());
        assert!(parse_config_text("just text").is_err());
    }

    #[test]
    fn config_text_parsing() {
        let m = parse_config_text("# comment\n\nscenario = fig2  # trailing\nfock-cutoffs=5,2\nmethod=pp,pert\n").unwrap();
        assert_eq!(m["scenario"], "fig2");
        assert_eq!(m["fock_cutoffs"], "5,2");
        let cfg = resolve(&m).unwrap();
        assert_eq!(cfg.fock.n_fund, 5);
        assert_eq!(cfg.methods.len(), 2);
    }

    #[test]
    fn csv_shape_and_shot_noise_row() {
        let cfg = parse_config(&args(&["--scenario", "fig8a", "--method", "pert", "--tmax", "1"])).unwrap();
        let out = execute(&cfg).unwrap();
        let csv = render_csv(&cfg, &out, 0);
        assert!(csv.contains("# direction=contra\n"));
        assert!(csv.contains("transient states"));
        let data: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data[0], "tau,pert_VX_1,pert_VY_1,pert_VX_2,pert_VY_2,pert_VX_3,pert_VY_3");
        assert_eq!(data.len(), 1 + 11);
        let first: Vec<f64> = data[1].split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(first[0], 0.0);
        assert!(first[1..].iter().all(|&v| v == 0.25));
    }
}
