//! Stochastic particle solver for the limiting Boltzmann–Kac equation.
//!
//! Each step draws a Poisson number of disjoint random pairs and collides
//! them with the walk's collision map, so energy is conserved pair by pair.
//! With `rate_constant = 2` every particle collides at rate 2, the same
//! per-particle rate as the N-particle walk with total collision rate N.
//! Pairs follow the same [`CollisionRule`] as the walk.

use alloc::format;
use alloc::vec::Vec;

use crate::energy::EnergyFunction;
use crate::error::{Error, Result};
use crate::kacwalk::{collide_with, CollisionRule};
use crate::math::ceil;
use crate::numerics::{find_root_increasing, integrate};
use crate::rng::RandomStream;

pub const DEFAULT_RATE_CONSTANT: f64 = 2.0;

/// Largest stable `rate_constant · dt`.
pub const MAX_RATE_DT: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct MeanFieldEnsemble {
    particles: Vec<f64>,
    pub time: f64,
    energy: EnergyFunction,
    rate_constant: f64,
    pub rule: CollisionRule,
    // persistent permutation used to draw disjoint pairs
    order: Vec<usize>,
}

impl MeanFieldEnsemble {
    pub fn new(e: &EnergyFunction, particles: Vec<f64>, rate_constant: f64) -> Result<Self> {
        if particles.len() < 2 {
            return Err(Error::Domain(format!("need M >= 2 particles, got {}", particles.len())));
        }
        if !(rate_constant > 0.0) || !rate_constant.is_finite() {
            return Err(Error::Domain(format!("rate constant must be positive, got {rate_constant}")));
        }
        let order = (0..particles.len()).collect();
        Ok(Self { particles, time: 0.0, energy: e.clone(), rate_constant, rule: CollisionRule::default(), order })
    }

    pub fn particles(&self) -> &[f64] {
        &self.particles
    }

    pub fn into_particles(self) -> Vec<f64> {
        self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn rate_constant(&self) -> f64 {
        self.rate_constant
    }

    pub fn energy(&self) -> &EnergyFunction {
        &self.energy
    }

    pub fn max_dt(&self) -> f64 {
        MAX_RATE_DT / self.rate_constant
    }

    pub fn total_energy(&self) -> f64 {
        self.particles.iter().map(|&v| self.energy.phi(v)).sum()
    }
}

/// Advances the ensemble by `dt`; returns the number of collisions.
pub fn mf_step(ens: &mut MeanFieldEnsemble, dt: f64, rng: &mut RandomStream) -> Result<u64> {
    if !(dt >= 0.0) {
        return Err(Error::Domain(format!("dt must be non-negative, got {dt}")));
    }
    let limit = ens.max_dt();
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::Stability { dt, limit });
    }
    let m = ens.particles.len();
    let pairs = rng.poisson(m as f64 * ens.rate_constant * dt / 2.0);
    let mut done = 0u64;
    while done < pairs {
        // a fresh partial shuffle per batch keeps pairs disjoint within it
        let batch = ((pairs - done) as usize).min(m / 2);
        rng.partial_shuffle(&mut ens.order, 2 * batch);
        for p in 0..batch {
            let (i, j) = (ens.order[2 * p], ens.order[2 * p + 1]);
            let theta = rng.angle();
            if let Some((a, b)) = collide_with(&ens.energy, ens.rule, ens.particles[i], ens.particles[j], theta, rng) {
                ens.particles[i] = a;
                ens.particles[j] = b;
            }
        }
        done += batch as u64;
    }
    ens.time += dt;
    Ok(pairs)
}

/// Steps an ensemble to `t_end` with the largest stable step, or `dt` if
/// given.
pub fn mf_advance(ens: &mut MeanFieldEnsemble, t_end: f64, dt: Option<f64>, rng: &mut RandomStream) -> Result<u64> {
    let h = dt.unwrap_or_else(|| ens.max_dt());
    if !(h > 0.0) {
        return Err(Error::Domain(format!("dt must be positive, got {h}")));
    }
    let mut count = 0;
    let start = ens.time;
    let steps = ceil((t_end - start) / h - 1e-9).max(0.0) as u64;
    for k in 0..steps {
        // land on t_end exactly without accumulating rounding in time
        let next = if k + 1 == steps { t_end } else { start + (k + 1) as f64 * h };
        count += mf_step(ens, next - ens.time, rng)?;
        ens.time = next;
    }
    Ok(count)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldOptions {
    pub rate_constant: f64,
    /// Step size; `None` uses the largest stable step.
    pub dt: Option<f64>,
    pub rule: CollisionRule,
}

impl Default for MeanFieldOptions {
    fn default() -> Self {
        Self { rate_constant: DEFAULT_RATE_CONSTANT, dt: None, rule: CollisionRule::default() }
    }
}

/// M i.i.d. draws from `f0` evolved to `t_end`.
pub fn mf_solve<S: FnMut(&mut RandomStream) -> f64>(
    e: &EnergyFunction,
    mut f0: S,
    m: usize,
    t_end: f64,
    opts: &MeanFieldOptions,
    rng: &mut RandomStream,
) -> Result<MeanFieldEnsemble> {
    if !(t_end >= 0.0) {
        return Err(Error::Domain(format!("t_end must be non-negative, got {t_end}")));
    }
    let particles = (0..m).map(|_| f0(rng)).collect();
    let mut ens = MeanFieldEnsemble::new(e, particles, opts.rate_constant)?;
    ens.rule = opts.rule;
    mf_advance(&mut ens, t_end, opts.dt, rng)?;
    Ok(ens)
}

/// Half-width a of the uniform law on [−a, a] with mean energy one,
/// i.e. ∫₀^a φ(v)dv = a.
pub fn unit_energy_uniform_width(e: &EnergyFunction) -> Result<f64> {
    let g = |a: f64| {
        integrate(|v| e.phi(v), 0.0, a, 1e-13, 1e-300).map(|r| r.value / a - 1.0).unwrap_or(f64::NAN)
    };
    find_root_increasing(g, (0.5, 4.0))
}
