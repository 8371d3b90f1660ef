//! One function per subcommand. Each writes its CSVs (and SVGs when asked)
//! into the output directory together with `<command>.conf`, the resolved
//! configuration.

use std::fs;
use std::path::{Path, PathBuf};

use kac_core::chaos::{chaoticity_test, propagation_test, ChaosBudget, PropagationBudget, TestReport};
use kac_core::energy::EnergyFunction;
use kac_core::equilibrium::{
    arbitrate_prefactor, classical_log_volume, solve_z0_with, z_asymptotic_from, z_bruteforce, EquilibriumLaw,
    BRUTE_FORCE_MAX_N,
};
use kac_core::kacwalk::{default_burn_in, init_chaotic, simulate, MasterVector};
use kac_core::meanfield::{mf_advance, unit_energy_uniform_width, MeanFieldEnsemble, MeanFieldOptions};
use kac_core::numerics::QuadratureSpec;
use kac_core::planar::{sample_planar_observed, solve_z0_2d_with, PlanarBudget, PlanarEnergy, PlanarLaw, Vec2};
use kac_core::rng::{derive_seed, ChainExecutor, RandomStream};
use kac_core::stats::{batch_stderr, ks_p_value, ks_sorted, sorted, wasserstein1_to_law};

use crate::config::{Command, InitialLaw, RunConfig};
use crate::exec::Rayon;
use crate::output::{float, read_table, write_text, CsvFile};
use crate::svg::{histogram_overlay, line_chart, Series};
use crate::CliError;

const REPORT_HEADER: [&str; 9] = ["test", "energy", "N", "k", "t", "metric", "value", "stderr", "pass"];

/// Walk snapshots must fit this KS p-value against the limit law.
const WALK_P_VALUE: f64 = 1e-3;

/// Runs `cmd`; statistical failures are reported after all files are written.
pub fn run(cmd: Command, cfg: &RunConfig) -> Result<(), CliError> {
    fs::create_dir_all(&cfg.output_dir)?;
    write_text(&cfg.output_dir.join(format!("{}.conf", cmd.name())), &cfg.to_text())?;
    match cmd {
        Command::Z0 if cfg.planar => planar_z0(cfg),
        Command::Z0 => z0(cfg),
        Command::Walk => walk(cfg),
        Command::MeanField => meanfield(cfg),
        Command::Chaos => chaos(cfg),
        Command::Propagation => propagation(cfg),
        Command::Asymptotics => asymptotics(cfg),
        Command::PlanarZ0 => planar_z0(cfg),
        Command::PlanarSample => planar_sample(cfg),
    }
}

fn out(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.output_dir.join(name)
}

/// `classical`, `relativistic` or `table:<csv path>`.
pub fn load_energy(spec: &str) -> Result<EnergyFunction, CliError> {
    match spec.strip_prefix("table:") {
        Some(path) => {
            let pts = read_table(Path::new(path)).map_err(|e| CliError::Usage(format!("energy table: {e}")))?;
            Ok(EnergyFunction::tabulated(spec, &pts)?)
        }
        None => EnergyFunction::by_name(spec).map_err(|e| CliError::Usage(e.to_string())),
    }
}

fn quadrature(cfg: &RunConfig) -> QuadratureSpec {
    QuadratureSpec::default().with_tolerances(cfg.quad_rel_tol, cfg.quad_abs_tol)
}

fn law(cfg: &RunConfig) -> Result<EquilibriumLaw, CliError> {
    let e = load_energy(&cfg.energy)?;
    let sol = solve_z0_with(&e, &quadrature(cfg))?;
    Ok(EquilibriumLaw::new(&e, &sol)?)
}

/// Sampler for the configured initial one-particle law.
fn initial_law<'a>(cfg: &RunConfig, law: &'a EquilibriumLaw) -> Result<impl Fn(&mut RandomStream) -> f64 + Sync + 'a, CliError> {
    let width = match cfg.initial {
        InitialLaw::Equilibrium => None,
        InitialLaw::Uniform => Some(unit_energy_uniform_width(law.energy())?),
    };
    Ok(move |r: &mut RandomStream| match width {
        Some(a) => a * (2.0 * r.uniform() - 1.0),
        None => law.sample(r),
    })
}

fn z0(cfg: &RunConfig) -> Result<(), CliError> {
    let e = load_energy(&cfg.energy)?;
    let s = solve_z0_with(&e, &quadrature(cfg))?;
    let block = format!(
        "name = {}\nz0 = {}\nC = {}\nintegral_value = {}\nPhi_z0 = {}\nSpp_z0 = {}\nS_z0 = {}\n",
        e.name(),
        float(s.z0),
        float(s.c),
        float(s.integral_value),
        float(s.phi_z0),
        float(s.spp_z0),
        float(s.s_z0)
    );
    print!("{block}");
    write_text(&out(cfg, "z0.txt"), &block)?;
    let mut csv = CsvFile::create(&out(cfg, "z0.csv"), &["name", "z0", "C", "integral_value", "Phi_z0", "Spp_z0"])?;
    csv.row([
        e.name().to_string(),
        float(s.z0),
        float(s.c),
        float(s.integral_value),
        float(s.phi_z0),
        float(s.spp_z0),
    ])?;
    csv.finish()?;
    Ok(())
}

fn planar_z0(cfg: &RunConfig) -> Result<(), CliError> {
    let pe = PlanarEnergy::new(load_energy(&cfg.energy)?);
    let s = solve_z0_2d_with(&pe, &quadrature(cfg))?;
    println!("name = {}\nz0_2d = {}\nC2 = {}\nhessian_det = {}", pe.name(), float(s.z0), float(s.c2), float(s.hessian_det));
    let mut csv = CsvFile::create(&out(cfg, "planar_z0.csv"), &["name", "z0_2d", "C2", "hessian_det"])?;
    csv.row([pe.name().to_string(), float(s.z0), float(s.c2), float(s.hessian_det)])?;
    csv.finish()?;
    Ok(())
}

struct Report {
    csv: CsvFile,
    energy: String,
}

impl Report {
    fn create(path: &Path, energy: &str) -> Result<Self, CliError> {
        Ok(Self { csv: CsvFile::create(path, &REPORT_HEADER)?, energy: energy.to_string() })
    }

    #[allow(clippy::too_many_arguments)]
    fn row(&mut self, test: &str, n: usize, k: usize, t: f64, metric: &str, value: f64, stderr: f64, pass: bool) -> Result<(), CliError> {
        let e = self.energy.clone();
        self.csv.row([
            test.to_string(),
            e,
            n.to_string(),
            k.to_string(),
            float(t),
            metric.to_string(),
            float(value),
            float(stderr),
            pass.to_string(),
        ])?;
        Ok(())
    }

    fn test_report(&mut self, r: &TestReport) -> Result<(), CliError> {
        for row in &r.rows {
            self.row(row.test, row.n, row.k, row.t, row.metric, row.value, row.stderr, row.pass)?;
        }
        Ok(())
    }

    fn finish(self) -> Result<(), CliError> {
        Ok(self.csv.finish()?)
    }
}

fn verdict(pass: bool, what: &str) -> Result<(), CliError> {
    if pass {
        Ok(())
    } else {
        Err(CliError::Statistical(what.to_string()))
    }
}

/// Snapshot times inside `[0, t_end]`, sorted and without repeats.
fn clean_times(times: &[f64], t_end: f64) -> Vec<f64> {
    let mut v: Vec<f64> = times.iter().copied().filter(|&t| t <= t_end).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

struct WalkChain {
    snapshots: Vec<(f64, Vec<f64>)>,
    summary: Vec<(f64, u64, f64)>,
    max_pair_residual: f64,
    manifold_residual: f64,
}

fn walk(cfg: &RunConfig) -> Result<(), CliError> {
    let n = cfg.single_n()?;
    let law = law(cfg)?;
    let f0 = initial_law(cfg, &law)?;
    let burn_in = cfg.burn_in.unwrap_or(match cfg.initial {
        InitialLaw::Equilibrium => default_burn_in(n),
        InitialLaw::Uniform => 0,
    });
    let snaps = clean_times(&cfg.snapshot_times, cfg.t_end);
    let mut marks = snaps.clone();
    if marks.last() != Some(&cfg.t_end) {
        marks.push(cfg.t_end);
    }
    let chains = Rayon.map_chains(cfg.chains, |c| -> Result<WalkChain, CliError> {
        let mut rng = RandomStream::for_chain(cfg.seed, c as u64);
        let mut state: MasterVector = init_chaotic(law.energy(), n, &f0, cfg.collision_rule, burn_in, &mut rng)?;
        let mut snapshots = Vec::new();
        let stats = simulate(&mut state, cfg.t_end, &marks, &mut rng, |t, s| {
            if snaps.contains(&t) {
                snapshots.push((t, s.velocities().to_vec()));
            }
        })?;
        Ok(WalkChain {
            snapshots,
            summary: stats.summary,
            max_pair_residual: stats.max_pair_residual,
            manifold_residual: state.manifold_residual(),
        })
    });
    let chains: Vec<WalkChain> = chains.into_iter().collect::<Result<_, _>>()?;

    for (c, ch) in chains.iter().enumerate() {
        let tag = if cfg.chains == 1 { String::new() } else { format!("_chain{c}") };
        let mut snap = CsvFile::create(&out(cfg, &format!("walk{tag}_snapshots.csv")), &["time", "particle_index", "velocity"])?;
        for (t, v) in &ch.snapshots {
            for (i, x) in v.iter().enumerate() {
                snap.row([float(*t), i.to_string(), float(*x)])?;
            }
        }
        snap.finish()?;
        let mut sum = CsvFile::create(&out(cfg, &format!("walk{tag}_summary.csv")), &["time", "collisions", "total_energy"])?;
        for (t, k, h) in &ch.summary {
            sum.row([float(*t), k.to_string(), float(*h)])?;
        }
        sum.finish()?;
    }

    let pooled: Vec<f64> = chains.iter().flat_map(|c| c.snapshots.iter().flat_map(|s| s.1.iter().copied())).collect();
    let pair = chains.iter().map(|c| c.max_pair_residual).fold(0.0, f64::max);
    let manifold = chains.iter().map(|c| c.manifold_residual).fold(0.0, f64::max);
    let mut rep = Report::create(&out(cfg, "walk_report.csv"), law.energy().name())?;
    rep.row("walk", n, 1, cfg.t_end, "max_pair_residual", pair, f64::NAN, pair <= 1e-10)?;
    rep.row("walk", n, 1, cfg.t_end, "manifold_residual", manifold, f64::NAN, manifold <= 1e-6)?;
    let mut pass = pair <= 1e-10 && manifold <= 1e-6;
    if !pooled.is_empty() {
        let ks_of = |v: &[f64]| ks_sorted(&sorted(v.to_vec()), |x| law.cdf(x)).unwrap_or(f64::NAN);
        let ks = ks_of(&pooled);
        let p = ks_p_value(ks, pooled.len() as f64);
        // only an equilibrium start is expected to match the limit law
        let fits = cfg.initial != InitialLaw::Equilibrium || p >= WALK_P_VALUE;
        pass &= fits;
        rep.row("walk", n, 1, cfg.t_end, "ks", ks, batch_stderr(&pooled, 20, ks_of), fits)?;
        rep.row("walk", n, 1, cfg.t_end, "ks_p_value", p, f64::NAN, fits)?;
        if cfg.svg {
            let chart = histogram_overlay("walk snapshots", &pooled, 60, |x| law.pdf(x));
            write_text(&out(cfg, "walk_histogram.svg"), &chart)?;
        }
    }
    rep.finish()?;
    verdict(pass, "walk snapshots or residuals out of tolerance")
}

fn meanfield(cfg: &RunConfig) -> Result<(), CliError> {
    let law = law(cfg)?;
    let f0 = initial_law(cfg, &law)?;
    let m = cfg.mf_particles;
    if m < 2 {
        return Err(CliError::Usage("mf_particles must be at least 2".into()));
    }
    let mut times = clean_times(&cfg.snapshot_times, cfg.t_end);
    if times.last() != Some(&cfg.t_end) {
        times.push(cfg.t_end);
    }
    let runs = Rayon.map_chains(cfg.mf_runs.max(1), |r| -> Result<Vec<(f64, Vec<f64>)>, CliError> {
        let mut rng = RandomStream::for_chain(cfg.seed, r as u64);
        let particles = (0..m).map(|_| f0(&mut rng)).collect();
        let mut ens = MeanFieldEnsemble::new(law.energy(), particles, cfg.rate_constant)?;
        ens.rule = cfg.collision_rule;
        let mut snaps = Vec::with_capacity(times.len());
        for &t in &times {
            mf_advance(&mut ens, t, cfg.dt, &mut rng)?;
            snaps.push((t, ens.particles().to_vec()));
        }
        Ok(snaps)
    });
    let runs: Vec<_> = runs.into_iter().collect::<Result<_, _>>()?;

    let mut snap = CsvFile::create(&out(cfg, "meanfield_snapshots.csv"), &["time", "particle_index", "velocity"])?;
    let mut rep = Report::create(&out(cfg, "meanfield_report.csv"), law.energy().name())?;
    let mut pass = true;
    let mut last = Vec::new();
    for (k, &t) in times.iter().enumerate() {
        // run r occupies particle indices r·M .. (r+1)·M
        let pooled: Vec<f64> = runs.iter().flat_map(|r| r[k].1.iter().copied()).collect();
        if cfg.snapshot_times.contains(&t) {
            for (i, x) in pooled.iter().enumerate() {
                snap.row([float(t), i.to_string(), float(*x)])?;
            }
        }
        let s = sorted(pooled.clone());
        let ks = ks_sorted(&s, |x| law.cdf(x))?;
        let w1 = wasserstein1_to_law(&s, |u| law.quantile(u))?;
        let fits = cfg.initial != InitialLaw::Equilibrium || ks < cfg.ks_threshold;
        pass &= fits;
        rep.row("meanfield", pooled.len(), 1, t, "ks", ks, f64::NAN, fits)?;
        rep.row("meanfield", pooled.len(), 1, t, "w1", w1, f64::NAN, true)?;
        last = pooled;
    }
    snap.finish()?;
    rep.finish()?;
    if cfg.svg {
        write_text(&out(cfg, "meanfield_histogram.svg"), &histogram_overlay("mean-field ensemble", &last, 60, |x| law.pdf(x)))?;
    }
    verdict(pass, "mean-field ensemble left the equilibrium law")
}

fn report_chart(cfg: &RunConfig, name: &str, title: &str, r: &TestReport) -> Result<(), CliError> {
    if !cfg.svg {
        return Ok(());
    }
    let mut metrics: Vec<&str> = r.rows.iter().map(|x| x.metric).collect();
    metrics.dedup();
    let series: Vec<Series> = metrics
        .iter()
        .map(|m| Series { label: m.to_string(), points: r.series(m).iter().map(|p| (p.0 as f64, p.1)).collect() })
        .collect();
    write_text(&out(cfg, name), &line_chart(title, "N", "distance", &series))?;
    Ok(())
}

fn chaos(cfg: &RunConfig) -> Result<(), CliError> {
    let law = law(cfg)?;
    let budget = ChaosBudget {
        samples: cfg.samples,
        chains: cfg.chains,
        burn_in: cfg.burn_in,
        spacing: cfg.spacing,
        batches: 20,
        ks_threshold: cfg.ks_threshold,
        rule: cfg.collision_rule,
    };
    let r = chaoticity_test(&law, &cfg.n, cfg.k, &budget, cfg.seed, &Rayon)?;
    let mut rep = Report::create(&out(cfg, "chaos_report.csv"), law.energy().name())?;
    rep.test_report(&r)?;
    rep.finish()?;
    report_chart(cfg, "chaos.svg", &format!("chaoticity, k = {}", cfg.k), &r)?;
    println!("pass = {}", r.pass);
    verdict(r.pass, "chaoticity criterion not met")
}

fn propagation(cfg: &RunConfig) -> Result<(), CliError> {
    let law = law(cfg)?;
    let f0 = initial_law(cfg, &law)?;
    let budget = PropagationBudget {
        walk_samples: cfg.samples,
        mf_particles: cfg.mf_particles,
        mf_runs: cfg.mf_runs,
        mean_field: MeanFieldOptions { rate_constant: cfg.rate_constant, dt: cfg.dt, rule: cfg.collision_rule },
        batches: 20,
        w1_threshold: cfg.w1_threshold,
    };
    let r = propagation_test(law.energy(), &f0, &cfg.n, cfg.t_end, &budget, cfg.seed, &Rayon)?;
    let mut rep = Report::create(&out(cfg, "propagation_report.csv"), law.energy().name())?;
    rep.test_report(&r)?;
    rep.finish()?;
    report_chart(cfg, "propagation.svg", &format!("walk vs mean field at t = {}", cfg.t_end), &r)?;
    println!("pass = {}", r.pass);
    verdict(r.pass, "propagation criterion not met")
}

fn asymptotics(cfg: &RunConfig) -> Result<(), CliError> {
    let e = load_energy(&cfg.energy)?;
    let sol = solve_z0_with(&e, &quadrature(cfg))?;
    let arb = arbitrate_prefactor()?;
    let mut csv = CsvFile::create(
        &out(cfg, "asymptotics.csv"),
        &["N", "log_z_asymptotic", "log_z_exact", "ratio", "prefactor"],
    )?;
    let mut points = Vec::new();
    for &n in &cfg.n {
        let a = z_asymptotic_from(&sol, n, arb.chosen)?.log_value.ln_abs;
        // exact only for the classical energy; brute force covers small N
        let exact = if e.is_classical() {
            classical_log_volume(n, n as f64)
        } else if n <= BRUTE_FORCE_MAX_N {
            z_bruteforce(&e, n, n as f64)?.log_value
        } else {
            f64::NAN
        };
        let ratio = (a - exact).exp();
        points.push((n as f64, ratio));
        csv.row([n.to_string(), float(a), float(exact), float(ratio), arb.chosen.label().to_string()])?;
    }
    csv.finish()?;
    if cfg.svg {
        let s = [Series { label: "Z asymptotic / Z exact".into(), points }];
        write_text(&out(cfg, "asymptotics.svg"), &line_chart("volume asymptotics", "N", "ratio", &s))?;
    }
    Ok(())
}

fn planar_sample(cfg: &RunConfig) -> Result<(), CliError> {
    let n = cfg.single_n()?;
    let pe = PlanarEnergy::new(load_energy(&cfg.energy)?);
    let sad = solve_z0_2d_with(&pe, &quadrature(cfg))?;
    let law = PlanarLaw::new(&pe, &sad)?;
    let p: Vec2 = if cfg.scaled_momentum { [n as f64 * cfg.p[0], n as f64 * cfg.p[1]] } else { cfg.p };
    let budget = PlanarBudget { steps: cfg.steps, samples: cfg.samples, ks_threshold: cfg.ks_threshold };
    let mut rng = RandomStream::new(derive_seed(cfg.seed, n as u64));
    let times = clean_times(&cfg.snapshot_times, f64::INFINITY);
    let mut next = 0;
    let mut snapshots: Vec<(f64, Vec<Vec2>)> = Vec::new();
    let run = sample_planar_observed(&law, &pe, n, p, &budget, &mut rng, |s| {
        while next < times.len() && s.time >= times[next] {
            snapshots.push((times[next], s.velocities().to_vec()));
            next += 1;
        }
    })?;
    let mut snap = CsvFile::create(&out(cfg, "planar_snapshots.csv"), &["time", "particle_index", "vx", "vy"])?;
    for (t, v) in &snapshots {
        for (i, w) in v.iter().enumerate() {
            snap.row([float(*t), i.to_string(), float(w[0]), float(w[1])])?;
        }
    }
    snap.finish()?;

    let t = run.state.time;
    let (re, pm) = run.state.residuals();
    let c = run.state.counts;
    let acc = c.acceptances as f64 / c.proposals.max(1) as f64;
    let mut rep = Report::create(&out(cfg, "planar_report.csv"), pe.name())?;
    rep.row("planar", n, 1, t, "component_ks", run.report.ks, f64::NAN, run.report.threshold_pass)?;
    rep.row("planar", n, 1, t, "component_w1", run.report.w1, f64::NAN, true)?;
    rep.row("planar", n, 1, t, "radial_ks", run.radial_ks, f64::NAN, true)?;
    rep.row("planar", n, 1, t, "acceptance_ratio", acc, f64::NAN, true)?;
    rep.row("planar", n, 1, t, "energy_residual", re, f64::NAN, re <= 1e-9)?;
    rep.row("planar", n, 1, t, "momentum_residual", pm, f64::NAN, pm <= 1e-9 * (1.0 + p[0].hypot(p[1])))?;
    rep.finish()?;
    if cfg.svg {
        let comps: Vec<f64> = run.samples.iter().flat_map(|v| [v[0], v[1]]).collect();
        let h = 1e-4;
        let density = |x: f64| (law.component_cdf(x + h) - law.component_cdf(x - h)) / (2.0 * h);
        write_text(&out(cfg, "planar_histogram.svg"), &histogram_overlay("planar components", &comps, 60, density))?;
    }
    verdict(run.report.threshold_pass && re <= 1e-9, "planar component marginal off the prediction")
}
