//! Benchmark systems, seeded simulation and the estimation run loop
//! behind the `czpr` command line tool.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conzono::ConstrainedZonotope;
use crate::error::{Error, Result};
use crate::estimator::{Estimator, Limits, SystemModel};
use crate::factorgraph::{record, Real};
use crate::interval::IntervalVector;

pub const SYSTEMS: [&str; 3] = ["example1", "example2", "example3"];

/// Two-state system with a sine in the measurement.
pub fn ex1_f<T: Real>(x: &[T], w: &[T]) -> Vec<T> {
    let (x1, x2) = (x[0], x[1]);
    let d = x1 + 4.0;
    vec![
        x1 * 3.0 - x1.powi(2) / 7.0 - x1 * x2 * 4.0 / d + w[0],
        x2 * -2.0 + x1 * x2 * 3.0 / d + w[1],
    ]
}

pub fn ex1_g<T: Real>(x: &[T], v: &[T]) -> Vec<T> {
    vec![x[0] - (x[1] / 2.0).sin() + v[0], -x[0] * x[1] + x[1] + v[1]]
}

pub const EX2_K1: f64 = 0.05;
pub const EX2_K2: f64 = 0.4;
pub const EX2_TS: f64 = 0.015;

/// Stirred tank reactor, Euler discretized with step `ts`.
pub fn ex2_f<T: Real>(x: &[T], w: &[T], ts: f64) -> Vec<T> {
    let (k1, k2) = (EX2_K1, EX2_K2);
    let r12 = w[2] * x[0] * x[1];
    let r13 = x[0] * x[2] * k2;
    vec![
        x[0] + (-r12 - r13 + (w[0] - x[0] * 2.0) * k1) * ts,
        x[1] + (-r12 + (w[1] - x[1] * 2.0) * k1) * ts,
        x[2] + (r12 - r13 - x[2] * (2.0 * k1)) * ts,
        x[3] + (r13 - x[3] * (2.0 * k1)) * ts,
    ]
}

pub fn ex2_g<T: Real>(x: &[T], v: &[T]) -> Vec<T> {
    vec![
        x[0] + x[1] + x[2] + v[0],
        x[1] + x[2] + x[3] + v[1],
        x[0] + x[3] + v[2],
    ]
}

pub const EX3_L1: f64 = 3.0;
pub const EX3_L2: f64 = 2.0;
pub const EX3_M1: f64 = 2.0;
pub const EX3_M2: f64 = 1.0;
pub const EX3_C1: f64 = 10.0;
pub const EX3_C2: f64 = 1.0;
pub const EX3_K1: f64 = 7.0;
pub const EX3_K2: f64 = 5.0;
pub const EX3_TS: f64 = 0.01;

/// Two-link planar arm driven by torque `u` on the first joint. The mass
/// matrix is inverted in closed form.
pub fn ex3_f<T: Real>(x: &[T], u: T, ts: f64) -> Vec<T> {
    let (l1, l2, m1, m2) = (EX3_L1, EX3_L2, EX3_M1, EX3_M2);
    let (c1, c2, k1, k2) = (EX3_C1, EX3_C2, EX3_K1, EX3_K2);
    let h = 0.5 * m2 * l1 * l2;
    let m11 = m1 * l1 * l1 / 3.0 + m2 * l1 * l1;
    let m22 = m2 * l2 * l2 / 3.0;
    let d12 = x[0] - x[1];
    let s = d12.sin();
    let b = d12.cos() * h;
    let gamma1 = s * x[3].powi(2) * h + x[0] * (k1 + k2) - x[1] * k2 + x[2] * (c1 + c2) - x[3] * c2;
    let gamma2 = -(s * x[2].powi(2) * h) - x[0] * k2 + x[1] * k2 - x[2] * c2 + x[3] * c2;
    let r1 = u - gamma1;
    let r2 = -gamma2;
    let det = -b.powi(2) + m11 * m22;
    let acc1 = (r1 * m22 - b * r2) / det;
    let acc2 = (r2 * m11 - b * r1) / det;
    vec![
        x[0] + x[2] * ts,
        x[1] + x[3] * ts,
        x[2] + acc1 * ts,
        x[3] + acc2 * ts,
    ]
}

pub fn ex3_g<T: Real>(x: &[T], v: &[T]) -> Vec<T> {
    vec![
        x[0].cos() * EX3_L1 + x[1].cos() * EX3_L2 + v[0],
        x[0].sin() * EX3_L1 + x[1].sin() * EX3_L2 + v[1],
    ]
}

/// Known input sequence of the arm.
pub fn ex3_input(k: usize, ts: f64) -> f64 {
    20.0 * (k as f64 * ts).sin()
}

/// A registered benchmark: model, uncertainty boxes, initial data and
/// default run settings.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub name: &'static str,
    pub model: SystemModel,
    pub x0_true: Vec<f64>,
    pub x0_set: ConstrainedZonotope,
    pub w_box: IntervalVector,
    pub v_box: IntervalVector,
    pub default_steps: usize,
    pub default_limits: Limits,
    /// Sampling step, for systems that have one.
    pub ts: Option<f64>,
}

impl Benchmark {
    /// Parameters of `f` at step `k` (the input applied from `k` to `k + 1`).
    pub fn inputs(&self, k: usize) -> Vec<f64> {
        match (self.name, self.ts) {
            ("example3", Some(ts)) => vec![ex3_input(k, ts)],
            _ => Vec::new(),
        }
    }

    pub fn n_x(&self) -> usize {
        self.model.n_x
    }
}

fn boxv(lo: &[f64], hi: &[f64]) -> IntervalVector {
    IntervalVector::from_bounds(lo, hi).expect("static bounds are ordered")
}

/// Names of the registered systems.
pub fn register_systems() -> &'static [&'static str] {
    &SYSTEMS
}

/// Builds a registered system. `ts` overrides the sampling step of the
/// systems that have one.
pub fn system(name: &str, ts: Option<f64>) -> Result<Benchmark> {
    if let Some(t) = ts {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Config(format!("ts must be positive, got {t}")));
        }
    }
    match name {
        "example1" => {
            if ts.is_some() {
                return Err(Error::Config("example1 has no sampling step".into()));
            }
            let f = record(4, 0, |s, _| ex1_f(&s[..2], &s[2..]))?;
            let g = record(4, 0, |s, _| ex1_g(&s[..2], &s[2..]))?;
            let x0_set = ConstrainedZonotope::zonotope(
                DMatrix::from_row_slice(2, 3, &[0.5, 1.0, -0.5, 0.5, 0.5, 0.0]),
                DVector::from_vec(vec![5.0, 0.5]),
            )?;
            Ok(Benchmark {
                name: "example1",
                model: SystemModel::new(f, g, 2)?,
                x0_true: vec![5.2, 0.65],
                x0_set,
                w_box: boxv(&[-0.8, -0.8], &[0.8, 0.8]),
                v_box: boxv(&[-0.4, -0.4], &[0.4, 0.4]),
                default_steps: 100,
                default_limits: Limits {
                    max_gens: 20,
                    max_cons: 8,
                },
                ts: None,
            })
        }
        "example2" => {
            let ts = ts.unwrap_or(EX2_TS);
            let f = record(7, 0, |s, _| ex2_f(&s[..4], &s[4..], ts))?;
            let g = record(7, 0, |s, _| ex2_g(&s[..4], &s[4..]))?;
            let x0 = vec![0.036, 0.038, 0.36, 0.052];
            let x0_set = ConstrainedZonotope::zonotope(
                DMatrix::identity(4, 4) * 0.01,
                DVector::from_column_slice(&x0),
            )?;
            Ok(Benchmark {
                name: "example2",
                model: SystemModel::new(f, g, 4)?,
                x0_true: x0,
                x0_set,
                w_box: boxv(&[0.9, 0.8, 10.0], &[1.1, 1.0, 50.0]),
                v_box: boxv(&[-0.01, -0.01, -0.001], &[0.01, 0.01, 0.001]),
                default_steps: 600,
                default_limits: Limits {
                    max_gens: 60,
                    max_cons: 20,
                },
                ts: Some(ts),
            })
        }
        "example3" => {
            let ts = ts.unwrap_or(EX3_TS);
            let f = record(4, 1, |s, p| ex3_f(s, p[0], ts))?;
            let g = record(6, 0, |s, _| ex3_g(&s[..4], &s[4..]))?;
            let x0_set = ConstrainedZonotope::zonotope(
                DMatrix::from_diagonal(&DVector::from_vec(vec![0.1745, 0.1745, 0.0873, 0.0873])),
                DVector::zeros(4),
            )?;
            Ok(Benchmark {
                name: "example3",
                model: SystemModel::new(f, g, 4)?,
                x0_true: vec![0.0; 4],
                x0_set,
                w_box: IntervalVector(Vec::new()),
                v_box: boxv(&[-0.01, -0.01], &[0.01, 0.01]),
                default_steps: 450,
                default_limits: Limits {
                    max_gens: 60,
                    max_cons: 20,
                },
                ts: Some(ts),
            })
        }
        other => Err(Error::Config(format!(
            "unknown system '{other}' (expected one of {})",
            SYSTEMS.join(", ")
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseMode {
    Uniform,
    /// Vertices of the noise boxes.
    Extreme,
    /// Midpoints of the noise boxes.
    Zero,
}

impl FromStr for NoiseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(NoiseMode::Uniform),
            "extreme" => Ok(NoiseMode::Extreme),
            "zero" => Ok(NoiseMode::Zero),
            _ => Err(Error::Config(format!(
                "unknown noise mode '{s}' (expected uniform, extreme or zero)"
            ))),
        }
    }
}

impl NoiseMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            NoiseMode::Uniform => "uniform",
            NoiseMode::Extreme => "extreme",
            NoiseMode::Zero => "zero",
        }
    }
}

fn sample_box(rng: &mut ChaCha8Rng, b: &IntervalVector, mode: NoiseMode) -> Vec<f64> {
    b.iter()
        .map(|iv| match mode {
            NoiseMode::Uniform => {
                if iv.lo < iv.hi {
                    rng.gen_range(iv.lo..=iv.hi)
                } else {
                    iv.lo
                }
            }
            NoiseMode::Extreme => {
                if rng.gen::<bool>() {
                    iv.hi
                } else {
                    iv.lo
                }
            }
            NoiseMode::Zero => iv.mid(),
        })
        .collect()
}

/// Simulated states `x_0..=x_N` and measurements `y_0..=y_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    pub w: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

pub fn simulate_truth(
    sys: &Benchmark,
    seed: u64,
    steps: usize,
    mode: NoiseMode,
) -> Result<Trajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = &sys.model;
    let measure = |x: &[f64], v: &[f64]| -> Result<Vec<f64>> {
        let s: Vec<f64> = x.iter().chain(v).copied().collect();
        Ok(model.g_graph.eval_real(&s, &[])?.1)
    };
    let mut traj = Trajectory {
        x: vec![sys.x0_true.clone()],
        y: Vec::with_capacity(steps + 1),
        w: Vec::with_capacity(steps),
        v: Vec::with_capacity(steps + 1),
    };
    let v0 = sample_box(&mut rng, &sys.v_box, mode);
    traj.y.push(measure(&sys.x0_true, &v0)?);
    traj.v.push(v0);
    for k in 1..=steps {
        let w = sample_box(&mut rng, &sys.w_box, mode);
        let v = sample_box(&mut rng, &sys.v_box, mode);
        let s: Vec<f64> = traj.x[k - 1].iter().chain(&w).copied().collect();
        let x = model.f_graph.eval_real(&s, &sys.inputs(k - 1))?.1;
        if x.iter().any(|xi| !xi.is_finite()) {
            return Err(Error::Input(format!("simulated state diverged at k = {k}")));
        }
        traj.y.push(measure(&x, &v)?);
        traj.x.push(x);
        traj.w.push(w);
        traj.v.push(v);
    }
    Ok(traj)
}

/// Settings of one estimation run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: String,
    pub steps: usize,
    pub seed: u64,
    pub gen_limit: usize,
    pub con_limit: usize,
    pub out_path: Option<PathBuf>,
    pub noise_mode: NoiseMode,
    pub ts: Option<f64>,
    /// Record wall-clock step times; off by default so output is reproducible.
    pub timing: bool,
}

impl RunConfig {
    /// Defaults of a registered system.
    pub fn for_system(name: &str) -> Result<Self> {
        let sys = system(name, None)?;
        Ok(RunConfig {
            system: name.to_string(),
            steps: sys.default_steps,
            seed: 0,
            gen_limit: sys.default_limits.max_gens,
            con_limit: sys.default_limits.max_cons,
            out_path: None,
            noise_mode: NoiseMode::Uniform,
            ts: None,
            timing: false,
        })
    }
}

/// Partially specified settings from a config file or flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub system: Option<String>,
    pub steps: Option<usize>,
    pub seed: Option<u64>,
    pub gen_limit: Option<usize>,
    pub con_limit: Option<usize>,
    pub out_path: Option<PathBuf>,
    pub noise_mode: Option<NoiseMode>,
    pub ts: Option<f64>,
    pub timing: Option<bool>,
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("invalid value '{v}' for '{key}'")))
}

impl ConfigOverrides {
    /// Parses `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = ConfigOverrides::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "system" => c.system = Some(value.to_string()),
                "steps" => c.steps = Some(parse_value(key, value)?),
                "seed" => c.seed = Some(parse_value(key, value)?),
                "gen_limit" => c.gen_limit = Some(parse_value(key, value)?),
                "con_limit" => c.con_limit = Some(parse_value(key, value)?),
                "out" | "out_path" => c.out_path = Some(PathBuf::from(value)),
                "noise_mode" => c.noise_mode = Some(value.parse()?),
                "ts" => c.ts = Some(parse_value(key, value)?),
                "timing" => c.timing = Some(parse_value(key, value)?),
                _ => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key '{key}'",
                        i + 1
                    )))
                }
            }
        }
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Fields set in `other` win.
    pub fn merge(self, other: ConfigOverrides) -> ConfigOverrides {
        ConfigOverrides {
            system: other.system.or(self.system),
            steps: other.steps.or(self.steps),
            seed: other.seed.or(self.seed),
            gen_limit: other.gen_limit.or(self.gen_limit),
            con_limit: other.con_limit.or(self.con_limit),
            out_path: other.out_path.or(self.out_path),
            noise_mode: other.noise_mode.or(self.noise_mode),
            ts: other.ts.or(self.ts),
            timing: other.timing.or(self.timing),
        }
    }

    /// Fills unset fields from the system defaults and validates.
    pub fn resolve(self) -> Result<RunConfig> {
        let name = self
            .system
            .ok_or_else(|| Error::Config("no system given".into()))?;
        let d = RunConfig::for_system(&name)?;
        let cfg = RunConfig {
            system: name,
            steps: self.steps.unwrap_or(d.steps),
            seed: self.seed.unwrap_or(d.seed),
            gen_limit: self.gen_limit.unwrap_or(d.gen_limit),
            con_limit: self.con_limit.unwrap_or(d.con_limit),
            out_path: self.out_path,
            noise_mode: self.noise_mode.unwrap_or(d.noise_mode),
            ts: self.ts,
            timing: self.timing.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let sys = system(&self.system, self.ts)?;
        if self.steps < 1 {
            return Err(Error::Config("steps must be at least 1".into()));
        }
        if self.gen_limit < sys.n_x() {
            return Err(Error::Config(format!(
                "gen_limit {} is below the state dimension {}",
                self.gen_limit,
                sys.n_x()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub k: usize,
    pub hull_volume_root: f64,
    pub n_g: usize,
    pub n_c: usize,
    pub contains_truth: bool,
    pub step_millis: f64,
}

pub const CSV_HEADER: &str = "k,hull_volume_root,n_g,n_c,contains_truth,step_millis";

/// `x` with 12 significant digits.
pub fn fmt_sig12(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else if x.is_finite() {
        format!("{x:.11e}")
    } else {
        format!("{x}")
    }
}

pub fn to_csv(records: &[StepRecord]) -> String {
    let mut s = String::with_capacity(64 * (records.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.k,
            fmt_sig12(r.hull_volume_root),
            r.n_g,
            r.n_c,
            r.contains_truth,
            fmt_sig12(r.step_millis)
        );
    }
    s
}

/// Output of [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub records: Vec<StepRecord>,
    /// Pre-reduction sizes per step, `k = 1..=N`.
    pub pre_reduction: Vec<(usize, usize)>,
    pub trajectory: Trajectory,
}

impl RunReport {
    pub fn all_contained(&self) -> bool {
        self.records.iter().all(|r| r.contains_truth)
    }
}

/// Simulates the configured system and runs the estimator along the
/// trajectory. An empty enclosure ends the run with [`Error::EmptySet`].
pub fn run(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    let sys = system(&cfg.system, cfg.ts)?;
    let traj = simulate_truth(&sys, cfg.seed, cfg.steps, cfg.noise_mode)?;
    let est = Estimator::new(
        sys.model.clone(),
        ConstrainedZonotope::from_interval(&sys.w_box),
        ConstrainedZonotope::from_interval(&sys.v_box),
        Limits {
            max_gens: cfg.gen_limit,
            max_cons: cfg.con_limit,
        },
    )?;
    let millis = |secs: f64| if cfg.timing { secs * 1e3 } else { 0.0 };
    let mut records = Vec::with_capacity(cfg.steps + 1);
    let mut pre = Vec::with_capacity(cfg.steps);
    let mut state = est.initialize(&sys.x0_set, &[], &traj.y[0])?;
    for k in 0..=cfg.steps {
        if k > 0 {
            state = est.step(&state, &sys.inputs(k - 1), &[], &traj.y[k])?;
            pre.push((state.diagnostics.n_g_pre, state.diagnostics.n_c_pre));
        }
        records.push(StepRecord {
            k,
            hull_volume_root: state.hull.volume_root(),
            n_g: state.xhat.n_g(),
            n_c: state.xhat.n_c(),
            contains_truth: state.xhat.contains(&traj.x[k])?,
            step_millis: millis(state.diagnostics.step_seconds),
        });
    }
    Ok(RunReport {
        records,
        pre_reduction: pre,
        trajectory: traj,
    })
}

/// Writes the CSV to `cfg.out_path`, or returns it when no path is set.
pub fn write_csv(cfg: &RunConfig, records: &[StepRecord]) -> Result<Option<String>> {
    let csv = to_csv(records);
    match &cfg.out_path {
        Some(p) => {
            std::fs::write(p, csv)
                .map_err(|e| Error::Config(format!("cannot write {}: {e}", p.display())))?;
            Ok(None)
        }
        None => Ok(Some(csv)),
    }
}

/// Boundedness check on a volume series: finite everywhere and the late
/// maximum within `factor` times the early maximum.
pub fn bounded_volume(series: &[f64], factor: f64) -> bool {
    let n = series.len().saturating_sub(1);
    if n < 10 || series.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let max_of = |a: usize, b: usize| {
        series[a..=b]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    };
    max_of(n / 2, n) <= factor * max_of(n / 10, n / 5)
}

/// Count of factors per tape of a system, for audits.
pub fn tape_sizes(sys: &Benchmark) -> BTreeMap<&'static str, usize> {
    BTreeMap::from([
        ("f", sys.model.f_graph.n_z()),
        ("g", sys.model.g_graph.n_z()),
        ("ell", sys.model.ell.graph.n_z()),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example1_dynamics_value() {
        let y = ex1_f(&[5.2, 0.65], &[0.0, 0.0]);
        assert!(
            (y[0] - 10.2675).abs() < 5e-4 && (y[1] + 0.1978).abs() < 5e-4,
            "{y:?}"
        );
    }

    #[test]
    fn tapes_replay_closed_forms() {
        for name in SYSTEMS {
            let sys = system(name, None).unwrap();
            let traj = simulate_truth(&sys, 5, 20, NoiseMode::Uniform).unwrap();
            for k in 1..=20 {
                let (xp, w) = (&traj.x[k - 1], &traj.w[k - 1]);
                let direct = match name {
                    "example1" => ex1_f(xp, w),
                    "example2" => ex2_f(xp, w, EX2_TS),
                    _ => ex3_f(xp, ex3_input(k - 1, EX3_TS), EX3_TS),
                };
                assert_eq!(direct, traj.x[k]);
            }
        }
    }

    #[test]
    fn linear_measurement_detection() {
        assert!(!system("example1", None).unwrap().model.g_is_linear());
        assert!(system("example2", None).unwrap().model.g_is_linear());
        assert!(!system("example3", None).unwrap().model.g_is_linear());
    }

    #[test]
    fn noise_stays_in_bounds() {
        let sys = system("example2", None).unwrap();
        for mode in [NoiseMode::Uniform, NoiseMode::Extreme] {
            let t = simulate_truth(&sys, 9, 50, mode).unwrap();
            for w in &t.w {
                assert!(sys.w_box.contains(w));
            }
            for v in &t.v {
                assert!(sys.v_box.contains(v));
            }
            if mode == NoiseMode::Extreme {
                for (w, iv) in t.w.iter().flatten().zip(sys.w_box.iter().cycle()) {
                    assert!(*w == iv.lo || *w == iv.hi);
                }
            }
        }
    }

    #[test]
    fn zero_noise_is_deterministic_recursion() {
        let sys = system("example1", None).unwrap();
        let a = simulate_truth(&sys, 1, 10, NoiseMode::Zero).unwrap();
        let b = simulate_truth(&sys, 2, 10, NoiseMode::Zero).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn arm_zero_noise_stays_bounded() {
        let sys = system("example3", None).unwrap();
        let t = simulate_truth(&sys, 0, 450, NoiseMode::Zero).unwrap();
        let peak = t.x.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(peak < 10.0, "peak {peak}");
    }

    #[test]
    fn config_parsing_and_precedence() {
        let file = ConfigOverrides::parse(
            "# run\nsystem = example2\nsteps=5\nseed = 3\nnoise_mode=extreme\n",
        )
        .unwrap();
        let flags = ConfigOverrides {
            steps: Some(7),
            ..Default::default()
        };
        let cfg = file.merge(flags).resolve().unwrap();
        assert_eq!(cfg.system, "example2");
        assert_eq!(cfg.steps, 7);
        assert_eq!(cfg.seed, 3);
        assert_eq!((cfg.gen_limit, cfg.con_limit), (60, 20));
        assert_eq!(cfg.noise_mode, NoiseMode::Extreme);
        assert!(matches!(
            ConfigOverrides::parse("bogus=1"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ConfigOverrides::parse("steps=x"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ConfigOverrides::parse("no equals"),
            Err(Error::Config(_))
        ));
        let bad = |o: ConfigOverrides| matches!(o.resolve(), Err(Error::Config(_)));
        assert!(bad(ConfigOverrides::default()));
        assert!(bad(ConfigOverrides {
            system: Some("example9".into()),
            ..Default::default()
        }));
        assert!(bad(ConfigOverrides {
            system: Some("example1".into()),
            steps: Some(0),
            ..Default::default()
        }));
        assert!(bad(ConfigOverrides {
            system: Some("example1".into()),
            gen_limit: Some(1),
            ..Default::default()
        }));
        assert!(bad(ConfigOverrides {
            system: Some("example1".into()),
            ts: Some(0.1),
            ..Default::default()
        }));
    }

    #[test]
    fn csv_format() {
        let r = StepRecord {
            k: 3,
            hull_volume_root: 0.1234567890123456,
            n_g: 20,
            n_c: 8,
            contains_truth: true,
            step_millis: 0.0,
        };
        let csv = to_csv(&[r]);
        assert_eq!(
            csv,
            format!("{CSV_HEADER}\n3,1.23456789012e-1,20,8,true,0\n")
        );
    }

    #[test]
    fn bounded_volume_rule() {
        let flat = vec![1.0; 101];
        assert!(bounded_volume(&flat, 3.0));
        let mut grow: Vec<f64> = (0..101).map(|k| k as f64).collect();
        assert!(!bounded_volume(&grow, 3.0));
        grow[60] = f64::NAN;
        assert!(!bounded_volume(&grow, 3.0));
    }

    #[test]
    fn short_example1_run() {
        let mut cfg = RunConfig::for_system("example1").unwrap();
        cfg.steps = 10;
        let rep = run(&cfg).unwrap();
        assert_eq!(rep.records.len(), 11);
        assert!(rep.all_contained());
        for r in &rep.records {
            assert!(r.n_g <= 20 && r.n_c <= 8);
            assert!(r.hull_volume_root.is_finite() && r.hull_volume_root > 0.0);
        }
    }
}
