//! Empirical marginals and the chaoticity and propagation-of-chaos tests.
//!
//! Weak convergence of k-marginals is probed through one-dimensional
//! statistics: KS and W1 of single coordinates against the limit law, and for
//! pairs the W1 distance of the projections v₁ ± v₂ between the empirical
//! joint and a product surrogate that pairs coordinates of unrelated tuples.
//! Convergence in N is accepted when each distance is no larger than the
//! previous one plus twice their pooled standard error.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::energy::EnergyFunction;
use crate::equilibrium::EquilibriumLaw;
use crate::error::{Error, Result};
use crate::kacwalk::{default_burn_in, init_chaotic, init_microcanonical, simulate, step, CollisionRule};
use crate::math::sqrt;
use crate::meanfield::{mf_solve, MeanFieldOptions};
use crate::rng::{derive_seed, ChainExecutor, RandomStream};
use crate::stats::{
    batch_stderr, ks_sorted, ks_two_sample, ks_two_sample_test, sorted, wasserstein1_paired,
    wasserstein1_to_law, wasserstein1_two_sample,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalSource {
    pub n: usize,
    pub time: f64,
    pub seed: u64,
    pub chains: usize,
}

/// Pooled k-tuples, one uniformly random index subset per recorded state.
#[derive(Debug, Clone)]
pub struct EmpiricalMarginal {
    pub k: usize,
    pub source: MarginalSource,
    samples: Vec<f64>,
    order: Vec<usize>,
}

impl EmpiricalMarginal {
    pub fn new(k: usize, source: MarginalSource) -> Result<Self> {
        if k == 0 || k > source.n {
            return Err(Error::Domain(format!("marginal order k={k} must lie in 1..={}", source.n)));
        }
        Ok(Self { k, source, samples: Vec::new(), order: (0..source.n).collect() })
    }

    /// Records one tuple drawn from `state`.
    pub fn record(&mut self, state: &[f64], rng: &mut RandomStream) -> Result<()> {
        if state.len() != self.source.n {
            return Err(Error::Domain(format!("state has {} particles, expected {}", state.len(), self.source.n)));
        }
        // any permutation is a valid start for a partial Fisher–Yates pass
        rng.partial_shuffle(&mut self.order, self.k);
        self.samples.extend(self.order[..self.k].iter().map(|&i| state[i]));
        Ok(())
    }

    /// Appends the tuples of `other` (same k).
    pub fn append(&mut self, other: &EmpiricalMarginal) {
        self.samples.extend_from_slice(&other.samples);
    }

    pub fn len(&self) -> usize {
        self.samples.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn tuple(&self, i: usize) -> &[f64] {
        &self.samples[i * self.k..(i + 1) * self.k]
    }

    /// The c-th coordinate of every tuple, in recording order.
    pub fn coordinate(&self, c: usize) -> Vec<f64> {
        self.samples.iter().skip(c).step_by(self.k).copied().collect()
    }

    /// All coordinates of all tuples, in recording order.
    pub fn pooled(&self) -> &[f64] {
        &self.samples
    }
}

/// One tuple per state, each from a fresh random index subset.
pub fn extract_marginal(
    states: &[&[f64]],
    k: usize,
    source: MarginalSource,
    rng: &mut RandomStream,
) -> Result<EmpiricalMarginal> {
    let mut m = EmpiricalMarginal::new(k, source)?;
    for s in states {
        m.record(s, rng)?;
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceReport {
    pub ks: f64,
    pub w1: f64,
    pub sample_sizes: (usize, usize),
    pub threshold_pass: bool,
}

/// KS and W1 of a 1-marginal against the equilibrium law; passes if the KS
/// distance is below `ks_threshold`.
pub fn distance_to_law(m: &EmpiricalMarginal, law: &EquilibriumLaw, ks_threshold: f64) -> Result<DistanceReport> {
    if m.k != 1 {
        return Err(Error::Domain(format!("expected a 1-marginal, got k={}", m.k)));
    }
    let s = sorted(m.pooled().to_vec());
    let ks = ks_sorted(&s, |x| law.cdf(x))?;
    let w1 = wasserstein1_to_law(&s, |u| law.quantile(u))?;
    Ok(DistanceReport { ks, w1, sample_sizes: (s.len(), 0), threshold_pass: ks < ks_threshold })
}

/// sup |F_emp − cdf| of a 1-marginal.
pub fn ks_distance<F: Fn(f64) -> f64>(m: &EmpiricalMarginal, cdf: F) -> Result<f64> {
    if m.k != 1 {
        return Err(Error::Domain(format!("expected a 1-marginal, got k={}", m.k)));
    }
    ks_sorted(&sorted(m.pooled().to_vec()), cdf)
}

/// One line of a test report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub test: &'static str,
    pub energy: String,
    pub n: usize,
    pub k: usize,
    pub t: f64,
    pub metric: &'static str,
    pub value: f64,
    pub stderr: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub rows: Vec<ReportRow>,
    pub pass: bool,
}

impl TestReport {
    /// Values of `metric` in row order.
    pub fn series(&self, metric: &str) -> Vec<(usize, f64, f64)> {
        self.rows.iter().filter(|r| r.metric == metric).map(|r| (r.n, r.value, r.stderr)).collect()
    }
}

/// True if each value is at most the previous one plus `factor` pooled
/// standard errors.
pub fn non_increasing_within(values: &[(f64, f64)], factor: f64) -> bool {
    values.windows(2).all(|w| {
        let pooled = sqrt(w[0].1 * w[0].1 + w[1].1 * w[1].1);
        w[1].0 <= w[0].0 + factor * pooled
    })
}

/// Max over the projections v₁ ± v₂ of the W1 distance between tuples
/// (x₁[i], x₂[i + a]) and (x₁[i], x₂[i + b]), indices mod n.
pub fn product_w1(x1: &[f64], x2: &[f64], a: usize, b: usize) -> f64 {
    let n = x1.len();
    let proj = |shift: usize, sgn: f64| sorted((0..n).map(|i| x1[i] + sgn * x2[(i + shift) % n]).collect());
    let mut d: f64 = 0.0;
    for sgn in [1.0, -1.0] {
        let w = wasserstein1_paired(&proj(a, sgn), &proj(b, sgn)).unwrap_or(f64::NAN);
        d = d.max(w);
    }
    d
}

/// Sampling effort for [`chaoticity_test`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChaosBudget {
    /// Tuples per N.
    pub samples: usize,
    pub chains: usize,
    /// Collisions before sampling; defaults to 100·N.
    pub burn_in: Option<u64>,
    /// Collisions between recorded tuples; defaults to N/2.
    pub spacing: Option<u64>,
    pub batches: usize,
    /// KS threshold for the 1-marginal at the largest N.
    pub ks_threshold: f64,
    pub rule: CollisionRule,
}

impl Default for ChaosBudget {
    fn default() -> Self {
        Self {
            samples: 100_000,
            chains: 20,
            burn_in: None,
            spacing: None,
            batches: 20,
            ks_threshold: 0.02,
            rule: CollisionRule::default(),
        }
    }
}

/// p-value below which the stationarity pre-test refuses the run.
pub const STATIONARITY_P: f64 = 1e-6;

/// Equilibrated walks at each N, sampled k-marginals and their distances.
///
/// k = 1 passes if the KS distance to the limit law is non-increasing in N
/// within noise and below the threshold at the largest N. k = 2 passes if
/// the product-surrogate distance is non-increasing within noise and at the
/// largest N no larger than its surrogate-versus-surrogate null plus four
/// standard errors.
pub fn chaoticity_test<X: ChainExecutor>(
    law: &EquilibriumLaw,
    n_list: &[usize],
    k: usize,
    budget: &ChaosBudget,
    seed: u64,
    exec: &X,
) -> Result<TestReport> {
    if !(1..=2).contains(&k) {
        return Err(Error::Domain(format!("chaoticity test supports k = 1 or 2, got {k}")));
    }
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("N list must be non-empty and increasing".into()));
    }
    let energy = String::from(law.energy().name());
    let mut rows = Vec::new();
    let mut ks_series = Vec::new();
    let mut prod_series = Vec::new();
    let mut final_null = (f64::NAN, f64::NAN);
    let chains = budget.chains.max(1);
    let per_chain = budget.samples.div_ceil(chains);
    for &n in n_list {
        if n < k {
            return Err(Error::Domain(format!("N={n} is smaller than k={k}")));
        }
        let source = MarginalSource { n, time: 0.0, seed, chains };
        let burn_in = budget.burn_in.unwrap_or_else(|| default_burn_in(n));
        let spacing = budget.spacing.unwrap_or((n as u64 / 2).max(1));
        let nseed = derive_seed(seed, n as u64);
        let parts = exec.map_chains(chains, |c| -> Result<EmpiricalMarginal> {
            let mut rng = RandomStream::for_chain(nseed, c as u64);
            let mut state = init_microcanonical(law, n, budget.rule, burn_in, &mut rng)?;
            let mut m = EmpiricalMarginal::new(k, source)?;
            for _ in 0..per_chain {
                for _ in 0..spacing {
                    step(&mut state, &mut rng)?;
                }
                m.record(state.velocities(), &mut rng)?;
            }
            Ok(m)
        });
        let mut pooled = EmpiricalMarginal::new(k, source)?;
        for p in parts {
            pooled.append(&p?);
        }
        stationarity_pretest(&pooled, chains, per_chain)?;

        let coords = pooled.pooled();
        let ks_stat = |v: &[f64]| ks_sorted(&sorted(v.to_vec()), |x| law.cdf(x)).unwrap_or(f64::NAN);
        let w1_stat = |v: &[f64]| wasserstein1_to_law(&sorted(v.to_vec()), |u| law.quantile(u)).unwrap_or(f64::NAN);
        let ks = ks_stat(coords);
        let ks_se = batch_stderr(coords, budget.batches, ks_stat);
        let w1 = w1_stat(coords);
        let w1_se = batch_stderr(coords, budget.batches, w1_stat);
        ks_series.push((ks, ks_se));
        let row = |metric, value, stderr, pass| ReportRow {
            test: "chaoticity",
            energy: energy.clone(),
            n,
            k,
            t: 0.0,
            metric,
            value,
            stderr,
            pass,
        };
        rows.push(row("ks", ks, ks_se, true));
        rows.push(row("w1", w1, w1_se, true));

        if k == 2 {
            let (x1, x2) = (pooled.coordinate(0), pooled.coordinate(1));
            let len = x1.len();
            let value = product_w1(&x1, &x2, 0, len / 2);
            let null = product_w1(&x1, &x2, len / 4, len / 2);
            let (se, null_se) = batched_pair_stderr(&x1, &x2, budget.batches);
            prod_series.push((value, se));
            final_null = (null, null_se);
            rows.push(row("product_w1", value, se, true));
            rows.push(row("product_w1_null", null, null_se, true));
        }
    }

    let pass = if k == 1 {
        let last = ks_series.last().map(|p| p.0).unwrap_or(f64::NAN);
        non_increasing_within(&ks_series, 2.0) && last < budget.ks_threshold
    } else {
        let (last, last_se) = *prod_series.last().unwrap_or(&(f64::NAN, f64::NAN));
        non_increasing_within(&prod_series, 2.0) && last <= final_null.0 + 4.0 * last_se
    };
    let decisive = if k == 1 { "ks" } else { "product_w1" };
    if let Some(r) = rows.iter_mut().rfind(|r| r.metric == decisive) {
        r.pass = pass;
    }
    Ok(TestReport { rows, pass })
}

fn batched_pair_stderr(x1: &[f64], x2: &[f64], batches: usize) -> (f64, f64) {
    let size = x1.len() / batches.max(1);
    if batches < 2 || size < 4 {
        return (f64::NAN, f64::NAN);
    }
    let mut value = Vec::with_capacity(batches);
    let mut null = Vec::with_capacity(batches);
    for b in 0..batches {
        let r = b * size..(b + 1) * size;
        let (a1, a2) = (&x1[r.clone()], &x2[r]);
        value.push(product_w1(a1, a2, 0, size / 2));
        null.push(product_w1(a1, a2, size / 4, size / 2));
    }
    let sb = sqrt(batches as f64);
    (crate::stats::std_dev(&value) / sb, crate::stats::std_dev(&null) / sb)
}

// Compares the first and last quarter of every chain's record.
fn stationarity_pretest(m: &EmpiricalMarginal, chains: usize, per_chain: usize) -> Result<()> {
    let x = m.coordinate(0);
    let q = per_chain / 4;
    if q < 10 {
        return Ok(());
    }
    let mut early = Vec::with_capacity(chains * q);
    let mut late = Vec::with_capacity(chains * q);
    for c in 0..chains {
        let block = &x[c * per_chain..(c + 1) * per_chain];
        early.extend_from_slice(&block[..q]);
        late.extend_from_slice(&block[per_chain - q..]);
    }
    let (d, p) = ks_two_sample_test(&sorted(early), &sorted(late))?;
    if p < STATIONARITY_P {
        return Err(Error::Refused(format!(
            "walk is not stationary after burn-in: early/late KS {d:.4}, p = {p:.2e}"
        )));
    }
    Ok(())
}

/// Sampling effort for [`propagation_test`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationBudget {
    /// Pooled walk velocities per N (all particles of each replica).
    pub walk_samples: usize,
    /// Mean-field ensemble size M.
    pub mf_particles: usize,
    /// Independent mean-field runs pooled into the reference.
    pub mf_runs: usize,
    /// Rate constant, step and collision rule of the mean-field solver; the
    /// rule is shared with the walk.
    pub mean_field: MeanFieldOptions,
    pub batches: usize,
    /// W1 threshold at the largest N.
    pub w1_threshold: f64,
}

impl Default for PropagationBudget {
    fn default() -> Self {
        Self {
            walk_samples: 400_000,
            mf_particles: 100_000,
            mf_runs: 4,
            mean_field: MeanFieldOptions { dt: Some(1e-3), ..MeanFieldOptions::default() },
            batches: 20,
            w1_threshold: 0.05,
        }
    }
}

/// Walks started from f₀-chaotic states versus the mean-field solution at
/// time `t`. Passes if the two-sample W1 distance is non-increasing in N
/// within noise and below the threshold at the largest N.
#[allow(clippy::too_many_arguments)]
pub fn propagation_test<S, X>(
    e: &EnergyFunction,
    f0: &S,
    n_list: &[usize],
    t: f64,
    budget: &PropagationBudget,
    seed: u64,
    exec: &X,
) -> Result<TestReport>
where
    S: Fn(&mut RandomStream) -> f64 + Sync,
    X: ChainExecutor,
{
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("N list must be non-empty and increasing".into()));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("t must be non-negative, got {t}")));
    }
    let mf_seed = derive_seed(seed, u64::MAX);
    let runs = exec.map_chains(budget.mf_runs.max(1), |r| -> Result<Vec<f64>> {
        let mut rng = RandomStream::for_chain(mf_seed, r as u64);
        let ens = mf_solve(e, f0, budget.mf_particles, t, &budget.mean_field, &mut rng)?;
        Ok(ens.into_particles())
    });
    let mut reference = Vec::with_capacity(budget.mf_particles * budget.mf_runs);
    for r in runs {
        reference.extend(r?);
    }
    let mf_batches = batch_slices(&reference, budget.batches);
    let mf_sorted = sorted(reference.clone());

    let energy = String::from(e.name());
    let mut rows = Vec::new();
    let mut w1_series = Vec::new();
    for &n in n_list {
        let replicas = budget.walk_samples.div_ceil(n);
        let nseed = derive_seed(seed, n as u64);
        let parts = exec.map_chains(replicas, |r| -> Result<Vec<f64>> {
            let mut rng = RandomStream::for_chain(nseed, r as u64);
            let mut state = init_chaotic(e, n, f0, budget.mean_field.rule, 0, &mut rng)?;
            simulate(&mut state, t, &[], &mut rng, |_, _| {})?;
            Ok(state.velocities().to_vec())
        });
        let mut walk = Vec::with_capacity(replicas * n);
        for p in parts {
            walk.extend(p?);
        }
        let walk_sorted = sorted(walk.clone());
        let ks = ks_two_sample(&walk_sorted, &mf_sorted)?;
        let w1 = wasserstein1_two_sample(&walk_sorted, &mf_sorted)?;
        let walk_batches = batch_slices(&walk, budget.batches);
        let per_batch = |f: &dyn Fn(&[f64], &[f64]) -> f64| -> f64 {
            let v: Vec<f64> = walk_batches.iter().zip(&mf_batches).map(|(a, b)| f(a, b)).collect();
            crate::stats::std_dev(&v) / sqrt(v.len() as f64)
        };
        let ks_se = per_batch(&|a, b| ks_two_sample(a, b).unwrap_or(f64::NAN));
        let w1_se = per_batch(&|a, b| wasserstein1_two_sample(a, b).unwrap_or(f64::NAN));
        w1_series.push((w1, w1_se));
        let row = |metric, value, stderr| ReportRow {
            test: "propagation",
            energy: energy.clone(),
            n,
            k: 1,
            t,
            metric,
            value,
            stderr,
            pass: true,
        };
        rows.push(row("ks_two_sample", ks, ks_se));
        rows.push(row("w1_two_sample", w1, w1_se));
    }
    let last = w1_series.last().map(|p| p.0).unwrap_or(f64::NAN);
    let pass = non_increasing_within(&w1_series, 2.0) && last < budget.w1_threshold;
    if let Some(r) = rows.iter_mut().rfind(|r| r.metric == "w1_two_sample") {
        r.pass = pass;
    }
    Ok(TestReport { rows, pass })
}

// Sorted contiguous blocks.
fn batch_slices(v: &[f64], batches: usize) -> Vec<Vec<f64>> {
    let b = batches.max(1);
    let size = v.len() / b;
    (0..b).map(|i| sorted(v[i * size..(i + 1) * size].to_vec())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Sequential;

    fn source(n: usize) -> MarginalSource {
        MarginalSource { n, time: 0.0, seed: 0, chains: 1 }
    }

    #[test]
    fn full_order_marginal_is_the_state() {
        let state = [0.5, -1.0, 2.0];
        let mut rng = RandomStream::new(1);
        let m = extract_marginal(&[&state], 3, source(3), &mut rng).unwrap();
        let mut t = m.tuple(0).to_vec();
        crate::stats::sort(&mut t);
        assert_eq!(t, [-1.0, 0.5, 2.0]);
        assert!(extract_marginal(&[&state], 4, source(3), &mut rng).is_err());
    }

    #[test]
    fn ks_distance_needs_one_marginal() {
        let mut rng = RandomStream::new(1);
        let m = extract_marginal(&[&[0.0, 1.0]], 2, source(2), &mut rng).unwrap();
        assert!(ks_distance(&m, |x| x).is_err());
    }

    #[test]
    fn self_distance_floor() {
        let mut rng = RandomStream::new(3);
        let v = sorted((0..1000).map(|_| rng.standard_normal()).collect());
        let n = v.len() as f64;
        let emp = |x: f64| v.partition_point(|&y| y <= x) as f64 / n;
        assert!(ks_sorted(&v, emp).unwrap() <= 1.0 / n + 1e-12);
    }

    #[test]
    fn monotone_rule() {
        assert!(non_increasing_within(&[(0.1, 0.01), (0.05, 0.01), (0.06, 0.01)], 2.0));
        assert!(!non_increasing_within(&[(0.05, 0.001), (0.1, 0.001)], 2.0));
    }

    #[test]
    fn two_particle_pairs_do_not_factorize() {
        let law = EquilibriumLaw::solve(&EnergyFunction::classical()).unwrap();
        let budget = ChaosBudget { samples: 4000, chains: 4, ..ChaosBudget::default() };
        let r = chaoticity_test(&law, &[2], 2, &budget, 5, &Sequential).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn bad_arguments() {
        let law = EquilibriumLaw::solve(&EnergyFunction::classical()).unwrap();
        let b = ChaosBudget::default();
        assert!(chaoticity_test(&law, &[10], 3, &b, 0, &Sequential).is_err());
        assert!(chaoticity_test(&law, &[20, 10], 1, &b, 0, &Sequential).is_err());
    }
}
