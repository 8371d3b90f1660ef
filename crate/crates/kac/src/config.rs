//! Flat `key = value` run configuration.
//!
//! Values are resolved in order: built-in defaults for the subcommand, the
//! config file, the `KAC_OUTPUT_DIR` environment variable (output directory
//! only), then command-line overrides. The resolved configuration is written
//! back with [`RunConfig::to_text`], which parses to the same values.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use kac_core::kacwalk::CollisionRule;

pub const OUTPUT_DIR_ENV: &str = "KAC_OUTPUT_DIR";

/// A configuration or command-line problem (exit code 1).
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Z0,
    Walk,
    MeanField,
    Chaos,
    Propagation,
    Asymptotics,
    PlanarZ0,
    PlanarSample,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Z0 => "z0",
            Command::Walk => "walk",
            Command::MeanField => "meanfield",
            Command::Chaos => "chaos",
            Command::Propagation => "propagation",
            Command::Asymptotics => "asymptotics",
            Command::PlanarZ0 => "planar-z0",
            Command::PlanarSample => "planar-sample",
        }
    }
}

/// Initial one-particle law for walks and the mean-field solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialLaw {
    /// The chaotic limit C·e^{−z₀φ}.
    Equilibrium,
    /// Uniform on [−a, a] with mean energy one.
    Uniform,
}

impl InitialLaw {
    fn label(self) -> &'static str {
        match self {
            InitialLaw::Equilibrium => "equilibrium",
            InitialLaw::Uniform => "uniform",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// `classical`, `relativistic` or `table:<path>`.
    pub energy: String,
    pub n: Vec<usize>,
    pub t_end: f64,
    /// Pair moves of the planar sampler.
    pub steps: u64,
    pub seed: u64,
    pub chains: usize,
    pub snapshot_times: Vec<f64>,
    pub output_dir: PathBuf,
    pub quad_rel_tol: f64,
    pub quad_abs_tol: f64,
    pub rate_constant: f64,
    pub collision_rule: CollisionRule,
    pub initial: InitialLaw,
    pub k: usize,
    /// Pooled samples (tuples for chaos, velocities for propagation).
    pub samples: usize,
    /// Collisions before sampling; `auto` is 100·N from equilibrium and 0
    /// from chaotic initial data.
    pub burn_in: Option<u64>,
    /// Collisions between recorded tuples; `auto` is N/2.
    pub spacing: Option<u64>,
    pub mf_particles: usize,
    pub mf_runs: usize,
    /// Mean-field step; `auto` is the largest stable step.
    pub dt: Option<f64>,
    pub ks_threshold: f64,
    pub w1_threshold: f64,
    pub p: [f64; 2],
    /// Target total momentum N·p instead of p.
    pub scaled_momentum: bool,
    pub planar: bool,
    pub svg: bool,
}

const KEYS: &[&str] = &[
    "energy",
    "N",
    "t_end",
    "steps",
    "seed",
    "chains",
    "snapshot_times",
    "output_dir",
    "quad_rel_tol",
    "quad_abs_tol",
    "rate_constant",
    "collision_rule",
    "initial",
    "k",
    "samples",
    "burn_in",
    "spacing",
    "mf_particles",
    "mf_runs",
    "dt",
    "ks_threshold",
    "w1_threshold",
    "p",
    "scaled_momentum",
    "planar",
    "svg",
];

fn defaults(cmd: Command) -> BTreeMap<String, String> {
    let n = match cmd {
        Command::Chaos | Command::Propagation => "50 200 800",
        Command::Asymptotics => "50 100 200",
        _ => "1000",
    };
    let (t_end, snaps) = match cmd {
        Command::Walk => ("10", "1 2 3 4 5 6 7 8 9 10"),
        Command::MeanField => ("5", "0 5"),
        Command::Propagation => ("1", ""),
        Command::PlanarSample => ("1000", "1000"),
        _ => ("1", ""),
    };
    let initial = if cmd == Command::Propagation { "uniform" } else { "equilibrium" };
    let samples = if cmd == Command::Propagation { "400000" } else { "100000" };
    let chains = if cmd == Command::Chaos { "20" } else { "1" };
    let k = if cmd == Command::Chaos { "2" } else { "1" };
    let mf_runs = if cmd == Command::Propagation { "4" } else { "1" };
    let dt = if cmd == Command::Propagation { "0.001" } else { "auto" };
    let ks = if cmd == Command::MeanField { "0.01" } else { "0.02" };
    [
        ("energy", "classical"),
        ("N", n),
        ("t_end", t_end),
        ("steps", "1000000"),
        ("seed", "0"),
        ("chains", chains),
        ("snapshot_times", snaps),
        ("output_dir", "out"),
        ("quad_rel_tol", "1e-10"),
        ("quad_abs_tol", "1e-14"),
        ("rate_constant", "2"),
        ("collision_rule", "microcanonical"),
        ("initial", initial),
        ("k", k),
        ("samples", samples),
        ("burn_in", "auto"),
        ("spacing", "auto"),
        ("mf_particles", "100000"),
        ("mf_runs", mf_runs),
        ("dt", dt),
        ("ks_threshold", ks),
        ("w1_threshold", "0.05"),
        ("p", "0 0"),
        ("scaled_momentum", "false"),
        ("planar", "false"),
        ("svg", "false"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_entries(text: &str) -> Result<BTreeMap<String, String>, UsageError> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| UsageError(format!("config line {}: expected key = value", no + 1)))?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(UsageError(format!("config line {}: unknown key '{k}'", no + 1)));
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>, UsageError> {
    v.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| UsageError(format!("{key}: cannot parse '{s}'"))))
        .collect()
}

fn auto<T: std::str::FromStr>(key: &str, v: &str) -> Result<Option<T>, UsageError> {
    if v == "auto" {
        Ok(None)
    } else {
        one(key, v).map(Some)
    }
}

fn show_auto<T: std::fmt::Debug>(v: Option<T>) -> String {
    v.map_or_else(|| "auto".to_string(), |x| format!("{x:?}"))
}

fn one<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, UsageError> {
    v.parse().map_err(|_| UsageError(format!("{key}: cannot parse '{v}'")))
}

impl RunConfig {
    /// Defaults for `cmd`, overlaid with `file`, the environment and
    /// `overrides`, in that order.
    pub fn resolve(
        cmd: Command,
        file: Option<&str>,
        env_output_dir: Option<String>,
        overrides: &BTreeMap<String, String>,
    ) -> Result<Self, UsageError> {
        let mut m = defaults(cmd);
        if let Some(text) = file {
            m.extend(parse_entries(text)?);
        }
        if let Some(dir) = env_output_dir {
            m.insert("output_dir".into(), dir);
        }
        for (k, v) in overrides {
            if !KEYS.contains(&k.as_str()) {
                return Err(UsageError(format!("unknown key '{k}'")));
            }
            m.insert(k.clone(), v.clone());
        }
        Self::from_entries(&m)
    }

    fn from_entries(m: &BTreeMap<String, String>) -> Result<Self, UsageError> {
        let g = |k: &str| m.get(k).map(String::as_str).unwrap_or("");
        let p: Vec<f64> = list("p", g("p"))?;
        if p.len() != 2 {
            return Err(UsageError(format!("p: expected two components, got {}", p.len())));
        }
        let initial = match g("initial") {
            "equilibrium" => InitialLaw::Equilibrium,
            "uniform" => InitialLaw::Uniform,
            other => return Err(UsageError(format!("initial: unknown law '{other}'"))),
        };
        let cfg = Self {
            energy: g("energy").to_string(),
            n: list("N", g("N"))?,
            t_end: one("t_end", g("t_end"))?,
            steps: one("steps", g("steps"))?,
            seed: one("seed", g("seed"))?,
            chains: one("chains", g("chains"))?,
            snapshot_times: list("snapshot_times", g("snapshot_times"))?,
            output_dir: PathBuf::from(g("output_dir")),
            quad_rel_tol: one("quad_rel_tol", g("quad_rel_tol"))?,
            quad_abs_tol: one("quad_abs_tol", g("quad_abs_tol"))?,
            rate_constant: one("rate_constant", g("rate_constant"))?,
            collision_rule: CollisionRule::parse(g("collision_rule")).map_err(|e| UsageError(e.to_string()))?,
            initial,
            k: one("k", g("k"))?,
            samples: one("samples", g("samples"))?,
            burn_in: auto("burn_in", g("burn_in"))?,
            spacing: auto("spacing", g("spacing"))?,
            mf_particles: one("mf_particles", g("mf_particles"))?,
            mf_runs: one("mf_runs", g("mf_runs"))?,
            dt: auto("dt", g("dt"))?,
            ks_threshold: one("ks_threshold", g("ks_threshold"))?,
            w1_threshold: one("w1_threshold", g("w1_threshold"))?,
            p: [p[0], p[1]],
            scaled_momentum: one("scaled_momentum", g("scaled_momentum"))?,
            planar: one("planar", g("planar"))?,
            svg: one("svg", g("svg"))?,
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), UsageError> {
        let bad = |msg: String| Err(UsageError(msg));
        if self.n.is_empty() {
            return bad("N: at least one value required".into());
        }
        if let Some(&n) = self.n.iter().find(|&&n| n < 2) {
            return bad(format!("N: must be at least 2, got {n}"));
        }
        if self.chains < 1 {
            return bad("chains: must be at least 1".into());
        }
        if self.t_end.is_nan() || self.t_end < 0.0 {
            return bad(format!("t_end: must be non-negative, got {}", self.t_end));
        }
        if !(self.quad_rel_tol > 0.0 && self.quad_abs_tol > 0.0) {
            return bad("quadrature tolerances must be positive".into());
        }
        if self.rate_constant.is_nan() || self.rate_constant <= 0.0 {
            return bad(format!("rate_constant: must be positive, got {}", self.rate_constant));
        }
        if let Some(dt) = self.dt.filter(|dt| dt.is_nan() || *dt <= 0.0) {
            return bad(format!("dt: must be positive, got {dt}"));
        }
        if self.spacing == Some(0) {
            return bad("spacing: must be positive".into());
        }
        if self.snapshot_times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return bad("snapshot_times: must be finite and non-negative".into());
        }
        if self.energy.is_empty() {
            return bad("energy: missing".into());
        }
        Ok(())
    }

    /// The single N of commands that simulate one system size.
    pub fn single_n(&self) -> Result<usize, UsageError> {
        match self.n[..] {
            [n] => Ok(n),
            _ => Err(UsageError(format!("N: expected one value, got {}", self.n.len()))),
        }
    }

    /// Every key in a fixed order, one per line; floats keep all digits.
    pub fn to_text(&self) -> String {
        let join = |v: &[String]| v.join(" ");
        let floats = |v: &[f64]| join(&v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>());
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("energy", self.energy.clone());
        put("N", join(&self.n.iter().map(usize::to_string).collect::<Vec<_>>()));
        put("t_end", format!("{:?}", self.t_end));
        put("steps", self.steps.to_string());
        put("seed", self.seed.to_string());
        put("chains", self.chains.to_string());
        put("snapshot_times", floats(&self.snapshot_times));
        put("output_dir", self.output_dir.display().to_string());
        put("quad_rel_tol", format!("{:?}", self.quad_rel_tol));
        put("quad_abs_tol", format!("{:?}", self.quad_abs_tol));
        put("rate_constant", format!("{:?}", self.rate_constant));
        put("collision_rule", self.collision_rule.label().to_string());
        put("initial", self.initial.label().to_string());
        put("k", self.k.to_string());
        put("samples", self.samples.to_string());
        put("burn_in", show_auto(self.burn_in));
        put("spacing", show_auto(self.spacing));
        put("mf_particles", self.mf_particles.to_string());
        put("mf_runs", self.mf_runs.to_string());
        put("dt", show_auto(self.dt));
        put("ks_threshold", format!("{:?}", self.ks_threshold));
        put("w1_threshold", format!("{:?}", self.w1_threshold));
        put("p", floats(&self.p));
        put("scaled_momentum", self.scaled_momentum.to_string());
        put("planar", self.planar.to_string());
        put("svg", self.svg.to_string());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn echo_round_trips() {
        let mut o = BTreeMap::new();
        o.insert("t_end".to_string(), "0.1".to_string());
        o.insert("snapshot_times".to_string(), "0.1,0.05".to_string());
        let a = RunConfig::resolve(Command::Walk, None, None, &o).unwrap();
        let b = RunConfig::resolve(Command::Walk, Some(&a.to_text()), None, &BTreeMap::new()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.snapshot_times, [0.1, 0.05]);
    }

    #[test]
    fn precedence() {
        let file = "seed = 5\noutput_dir = from_file\n";
        let mut o = BTreeMap::new();
        o.insert("seed".to_string(), "9".to_string());
        let c = RunConfig::resolve(Command::Z0, Some(file), Some("from_env".into()), &o).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.output_dir, PathBuf::from("from_env"));
    }

    #[test]
    fn rejects_bad_input() {
        let none = BTreeMap::new();
        assert!(RunConfig::resolve(Command::Z0, Some("bogus = 1"), None, &none).is_err());
        assert!(RunConfig::resolve(Command::Z0, Some("N = 1"), None, &none).is_err());
        assert!(RunConfig::resolve(Command::Z0, Some("chains = 0"), None, &none).is_err());
        assert!(RunConfig::resolve(Command::Z0, Some("seed"), None, &none).is_err());
        assert!(RunConfig::resolve(Command::Z0, Some("p = 1"), None, &none).is_err());
    }
}
