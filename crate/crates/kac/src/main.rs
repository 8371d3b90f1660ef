use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kac::config::OUTPUT_DIR_ENV;
use kac::{CliError, Command, RunConfig};

#[derive(Parser)]
#[command(name = "kac", version, about = "Kac walks, mean-field limits and chaos diagnostics for general particle energies")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Solve for z0 and the limit density constants
    Z0(Overrides),
    /// Run the N-particle walk and write snapshots
    Walk(Overrides),
    /// Evolve a mean-field particle ensemble
    Meanfield(Overrides),
    /// Chaoticity of equilibrated walks across N
    Chaos(Overrides),
    /// Walk versus mean-field distances across N
    Propagation(Overrides),
    /// Leading-order volume asymptotics against exact values
    Asymptotics(Overrides),
    /// Planar saddle point
    PlanarZ0(Overrides),
    /// Planar momentum-conserving sampler
    PlanarSample(Overrides),
}

/// Every option overrides the config key of the same name (dashes become
/// underscores).
#[derive(Args, Default)]
struct Overrides {
    /// Flat key = value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra KEY=VALUE override, repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// classical, relativistic or table:<path.csv>
    #[arg(long)]
    energy: Option<String>,
    #[arg(long = "N", num_args = 1..)]
    n: Option<Vec<String>>,
    #[arg(long = "t-end", visible_alias = "t")]
    t_end: Option<String>,
    #[arg(long)]
    steps: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    chains: Option<String>,
    #[arg(long, num_args = 1..)]
    snapshot_times: Option<Vec<String>>,
    #[arg(long)]
    output_dir: Option<String>,
    #[arg(long)]
    quad_rel_tol: Option<String>,
    #[arg(long)]
    quad_abs_tol: Option<String>,
    #[arg(long)]
    rate_constant: Option<String>,
    /// microcanonical or uniform
    #[arg(long)]
    collision_rule: Option<String>,
    /// equilibrium or uniform
    #[arg(long)]
    initial: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    burn_in: Option<String>,
    #[arg(long)]
    spacing: Option<String>,
    #[arg(long)]
    mf_particles: Option<String>,
    #[arg(long)]
    mf_runs: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    ks_threshold: Option<String>,
    #[arg(long)]
    w1_threshold: Option<String>,
    /// Total momentum (px py) for the planar sampler
    #[arg(long, num_args = 2, allow_negative_numbers = true)]
    p: Option<Vec<String>>,
    #[arg(long)]
    scaled_momentum: bool,
    /// With z0: solve the planar saddle instead
    #[arg(long)]
    planar: bool,
    /// Also write SVG charts
    #[arg(long)]
    svg: bool,
}

impl Overrides {
    fn entries(&self) -> Result<BTreeMap<String, String>, CliError> {
        let mut m = BTreeMap::new();
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got '{kv}'")))?;
            m.insert(k.trim().to_string(), v.trim().to_string());
        }
        let mut put = |k: &str, v: &Option<String>| {
            if let Some(v) = v {
                m.insert(k.to_string(), v.clone());
            }
        };
        put("energy", &self.energy);
        put("t_end", &self.t_end);
        put("steps", &self.steps);
        put("seed", &self.seed);
        put("chains", &self.chains);
        put("output_dir", &self.output_dir);
        put("quad_rel_tol", &self.quad_rel_tol);
        put("quad_abs_tol", &self.quad_abs_tol);
        put("rate_constant", &self.rate_constant);
        put("collision_rule", &self.collision_rule);
        put("initial", &self.initial);
        put("k", &self.k);
        put("samples", &self.samples);
        put("burn_in", &self.burn_in);
        put("spacing", &self.spacing);
        put("mf_particles", &self.mf_particles);
        put("mf_runs", &self.mf_runs);
        put("dt", &self.dt);
        put("ks_threshold", &self.ks_threshold);
        put("w1_threshold", &self.w1_threshold);
        for (k, v) in [("N", &self.n), ("snapshot_times", &self.snapshot_times), ("p", &self.p)] {
            if let Some(v) = v {
                m.insert(k.to_string(), v.join(" "));
            }
        }
        for (k, on) in [("scaled_momentum", self.scaled_momentum), ("planar", self.planar), ("svg", self.svg)] {
            if on {
                m.insert(k.to_string(), "true".to_string());
            }
        }
        Ok(m)
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (cmd, o) = match cli.command {
        Sub::Z0(o) => (Command::Z0, o),
        Sub::Walk(o) => (Command::Walk, o),
        Sub::Meanfield(o) => (Command::MeanField, o),
        Sub::Chaos(o) => (Command::Chaos, o),
        Sub::Propagation(o) => (Command::Propagation, o),
        Sub::Asymptotics(o) => (Command::Asymptotics, o),
        Sub::PlanarZ0(o) => (Command::PlanarZ0, o),
        Sub::PlanarSample(o) => (Command::PlanarSample, o),
    };
    let file = match &o.config {
        Some(p) => Some(fs::read_to_string(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?),
        None => None,
    };
    let env_dir = std::env::var(OUTPUT_DIR_ENV).ok().filter(|s| !s.is_empty());
    let mut overrides = o.entries()?;
    // an explicit --output-dir beats the environment
    let cli_dir = overrides.remove("output_dir");
    let mut cfg = RunConfig::resolve(cmd, file.as_deref(), env_dir, &overrides)?;
    if let Some(d) = cli_dir {
        cfg.output_dir = PathBuf::from(d);
    }
    kac::run(cmd, &cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kac: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
