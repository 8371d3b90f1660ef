//! The N-particle Kac walk on the energy manifold Σφ(vᵢ) = N.
//!
//! A collision maps the pair to the circle y² + y′² = h through
//! y = sign(v)·√φ(v), rotates by a uniform angle and maps back. Collisions
//! arrive as a Poisson process of total rate N, which makes the generator
//! N·(Q − I).
//!
//! In y-coordinates the microcanonical measure carries the weight Π f(yᵢ),
//! which a rotation does not preserve unless f is constant (φ = v²). The
//! default [`CollisionRule::Microcanonical`] therefore accepts a rotation
//! with probability min(1, f(yᵢ′)f(yⱼ′)/(f(yᵢ)f(yⱼ))); the plain rotation is
//! kept as [`CollisionRule::Uniform`], whose invariant law is uniform on the
//! y-sphere. Both coincide for classical energy.

use alloc::format;
use alloc::vec::Vec;

use crate::energy::EnergyFunction;
use crate::equilibrium::EquilibriumLaw;
use crate::error::{Error, Result};
use crate::math::{cos, sign, sin, sqrt};
use crate::numerics::{find_root_increasing_with, RootOptions};
use crate::rng::RandomStream;

/// Collisions between checks of the cached total energy.
pub const REPROJECT_INTERVAL: u64 = 10_000;
/// Relative drift of the cached energy that triggers a λ-rescale.
pub const REPROJECT_DRIFT: f64 = 1e-9;

/// The collision transform for a single pair.
#[inline]
pub fn collide(e: &EnergyFunction, vi: f64, vj: f64, theta: f64) -> (f64, f64) {
    let yi = sign(vi) * sqrt(e.phi(vi));
    let yj = sign(vj) * sqrt(e.phi(vj));
    let (s, c) = (sin(theta), cos(theta));
    let yi2 = yi * c + yj * s;
    let yj2 = -yi * s + yj * c;
    (from_y(e, yi2), from_y(e, yj2))
}

/// How a proposed rotation is turned into a move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CollisionRule {
    /// Every rotation is applied.
    Uniform,
    /// Rotations are accepted by a Metropolis test on Π f(yᵢ), which keeps
    /// the microcanonical measure invariant.
    #[default]
    Microcanonical,
}

impl CollisionRule {
    pub fn label(&self) -> &'static str {
        match self {
            CollisionRule::Uniform => "uniform",
            CollisionRule::Microcanonical => "microcanonical",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(CollisionRule::Uniform),
            "microcanonical" => Ok(CollisionRule::Microcanonical),
            _ => Err(Error::Domain(format!("unknown collision rule '{s}'"))),
        }
    }
}

/// Applies `rule` to the pair; `None` if the proposal is rejected.
#[inline]
pub fn collide_with(
    e: &EnergyFunction,
    rule: CollisionRule,
    vi: f64,
    vj: f64,
    theta: f64,
    rng: &mut RandomStream,
) -> Option<(f64, f64)> {
    let (wi, wj) = collide(e, vi, vj, theta);
    if rule == CollisionRule::Uniform || e.is_classical() {
        return Some((wi, wj));
    }
    let y = |v: f64| sqrt(e.phi(v));
    let ratio = e.weight_f(y(wi)) * e.weight_f(y(wj)) / (e.weight_f(y(vi)) * e.weight_f(y(vj)));
    if ratio >= 1.0 || rng.uniform() < ratio {
        Some((wi, wj))
    } else {
        None
    }
}

#[inline]
fn from_y(e: &EnergyFunction, y: f64) -> f64 {
    if e.is_classical() {
        return y;
    }
    sign(y) * e.phi_inverse_unchecked(y * y)
}

/// One collision of a walk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionEvent {
    /// Zero-based, `i < j`.
    pub i: usize,
    pub j: usize,
    pub theta: f64,
    pub wait: f64,
}

/// The state V = (v₁, …, v_N) with its cached energy and clock.
#[derive(Debug, Clone)]
pub struct MasterVector {
    velocities: Vec<f64>,
    total_energy: f64,
    target_energy: f64,
    energy: EnergyFunction,
    pub rule: CollisionRule,
    pub time: f64,
    /// Collision events, accepted or not.
    pub collision_count: u64,
    pub accepted: u64,
    pub reprojections: u64,
}

impl MasterVector {
    /// Wraps the velocities as given; the target energy is their current sum.
    pub fn from_velocities(e: &EnergyFunction, velocities: Vec<f64>) -> Result<Self> {
        if velocities.len() < 2 {
            return Err(Error::Domain(format!("need N >= 2 particles, got {}", velocities.len())));
        }
        if velocities.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite velocity".into()));
        }
        let total: f64 = velocities.iter().map(|&v| e.phi(v)).sum();
        Ok(Self {
            velocities,
            total_energy: total,
            target_energy: total,
            energy: e.clone(),
            rule: CollisionRule::default(),
            time: 0.0,
            collision_count: 0,
            accepted: 0,
            reprojections: 0,
        })
    }

    /// Rescales the velocities so that Σφ(vᵢ) equals `target`.
    pub fn on_manifold(e: &EnergyFunction, velocities: Vec<f64>, target: f64) -> Result<Self> {
        let mut state = Self::from_velocities(e, velocities)?;
        state.target_energy = target;
        state.reproject()?;
        Ok(state)
    }

    pub fn len(&self) -> usize {
        self.velocities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.velocities.is_empty()
    }

    pub fn velocities(&self) -> &[f64] {
        &self.velocities
    }

    pub fn energy(&self) -> &EnergyFunction {
        &self.energy
    }

    /// Cached H(V).
    pub fn total_energy(&self) -> f64 {
        self.total_energy
    }

    pub fn target_energy(&self) -> f64 {
        self.target_energy
    }

    /// Σφ(vᵢ) from scratch.
    pub fn recompute_energy(&self) -> f64 {
        self.velocities.iter().map(|&v| self.energy.phi(v)).sum()
    }

    /// |Σφ(vᵢ) − E| / E, recomputed.
    pub fn manifold_residual(&self) -> f64 {
        (self.recompute_energy() - self.target_energy).abs() / self.target_energy
    }

    /// Runs one collision event on the pair (i, j) under the state's rule and
    /// returns the pair residual |φ(vᵢ′)+φ(vⱼ′) − φ(vᵢ)−φ(vⱼ)|, which is 0 for a
    /// rejected proposal.
    pub fn apply(&mut self, i: usize, j: usize, theta: f64, rng: &mut RandomStream) -> f64 {
        let e = &self.energy;
        let (vi, vj) = (self.velocities[i], self.velocities[j]);
        self.collision_count += 1;
        let mut residual = 0.0;
        if let Some((wi, wj)) = collide_with(e, self.rule, vi, vj, theta, rng) {
            let h = e.phi(vi) + e.phi(vj);
            let h2 = e.phi(wi) + e.phi(wj);
            self.velocities[i] = wi;
            self.velocities[j] = wj;
            self.total_energy += h2 - h;
            self.accepted += 1;
            residual = (h2 - h).abs();
        }
        if self.collision_count.is_multiple_of(REPROJECT_INTERVAL) {
            self.check_drift();
        }
        residual
    }

    fn check_drift(&mut self) {
        self.total_energy = self.recompute_energy();
        if (self.total_energy - self.target_energy).abs() > REPROJECT_DRIFT * self.target_energy {
            // cannot fail for a state that was on the manifold once
            let _ = self.reproject();
        }
    }

    /// λ-rescales onto the target energy and refreshes the cache.
    pub fn reproject(&mut self) -> Result<f64> {
        let lambda = rescale_factor(&self.energy, &self.velocities, self.target_energy)?;
        for v in &mut self.velocities {
            *v *= lambda;
        }
        self.total_energy = self.recompute_energy();
        self.reprojections += 1;
        Ok(lambda)
    }
}

/// The λ > 0 with Σφ(λvᵢ) = target.
pub fn rescale_factor(e: &EnergyFunction, v: &[f64], target: f64) -> Result<f64> {
    if !(target > 0.0) {
        return Err(Error::Domain(format!("target energy must be positive, got {target}")));
    }
    if v.iter().all(|&x| x == 0.0) {
        return Err(Error::Domain("cannot rescale the zero vector".into()));
    }
    if e.is_classical() {
        let s: f64 = v.iter().map(|x| x * x).sum();
        return Ok(sqrt(target / s));
    }
    let g = |lambda: f64| v.iter().map(|&x| e.phi(lambda * x)).sum::<f64>() - target;
    let opts = RootOptions { x_tolerance: 1e-14, monotone_samples: 0, ..RootOptions::default() };
    find_root_increasing_with(g, (0.5, 2.0), &opts)
}

/// One collision: waiting time, uniform pair, uniform angle on (0, 2π].
pub fn step(state: &mut MasterVector, rng: &mut RandomStream) -> Result<CollisionEvent> {
    let n = state.len();
    if n < 2 {
        return Err(Error::Domain(format!("need N >= 2 particles, got {n}")));
    }
    let wait = rng.exponential(n as f64);
    let event = draw_collision(n, wait, rng);
    state.apply(event.i, event.j, event.theta, rng);
    state.time += wait;
    Ok(event)
}

#[inline]
fn draw_collision(n: usize, wait: f64, rng: &mut RandomStream) -> CollisionEvent {
    let (i, j) = rng.pair(n);
    let theta = rng.angle();
    CollisionEvent { i, j, theta, wait }
}

/// Summary of a [`simulate`] call.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryStats {
    pub start_time: f64,
    pub end_time: f64,
    pub collisions: u64,
    /// Largest per-collision pair residual divided by 1 + h.
    pub max_pair_residual: f64,
    /// `(time, collisions so far, total energy)` at each snapshot time.
    pub summary: Vec<(f64, u64, f64)>,
}

/// Runs the walk until `t_end`. `observer` sees the state at every entry of
/// `snapshot_times` that falls in `[state.time, t_end]`; the state is
/// piecewise constant, so it is reported as of the last event before.
pub fn simulate<O: FnMut(f64, &MasterVector)>(
    state: &mut MasterVector,
    t_end: f64,
    snapshot_times: &[f64],
    rng: &mut RandomStream,
    mut observer: O,
) -> Result<TrajectoryStats> {
    let n = state.len();
    if n < 2 {
        return Err(Error::Domain(format!("need N >= 2 particles, got {n}")));
    }
    if !(t_end >= state.time) {
        return Err(Error::Domain(format!("t_end {t_end} precedes the current time {}", state.time)));
    }
    let mut snaps: Vec<f64> = snapshot_times.iter().copied().filter(|&t| t >= state.time && t <= t_end).collect();
    snaps.sort_by(f64::total_cmp);
    let mut next_snap = 0;
    let start_time = state.time;
    let start_count = state.collision_count;
    let mut stats = TrajectoryStats {
        start_time,
        end_time: t_end,
        collisions: 0,
        max_pair_residual: 0.0,
        summary: Vec::with_capacity(snaps.len()),
    };
    let rate = n as f64;
    loop {
        let wait = rng.exponential(rate);
        let next = state.time + wait;
        while next_snap < snaps.len() && snaps[next_snap] < next.min(t_end) {
            let t = snaps[next_snap];
            observer(t, state);
            stats.summary.push((t, state.collision_count - start_count, state.total_energy));
            next_snap += 1;
        }
        if next > t_end {
            // the overshooting event is dropped; by memorylessness the
            // process restarted at t_end has the same law
            break;
        }
        let ev = draw_collision(n, wait, rng);
        let h = state.energy.phi(state.velocities[ev.i]) + state.energy.phi(state.velocities[ev.j]);
        let r = state.apply(ev.i, ev.j, ev.theta, rng) / (1.0 + h);
        if r > stats.max_pair_residual {
            stats.max_pair_residual = r;
        }
        state.time = next;
    }
    for &t in &snaps[next_snap..] {
        observer(t, state);
        stats.summary.push((t, state.collision_count - start_count, state.total_energy));
    }
    state.time = t_end;
    stats.collisions = state.collision_count - start_count;
    Ok(stats)
}

/// Default burn-in: 100 collisions per particle.
pub fn default_burn_in(n: usize) -> u64 {
    100 * n as u64
}

/// N i.i.d. draws from the equilibrium law, rescaled onto Σφ = N, followed by
/// `burn_in` collisions. The clock is left at 0.
pub fn init_microcanonical(
    law: &EquilibriumLaw,
    n: usize,
    rule: CollisionRule,
    burn_in: u64,
    rng: &mut RandomStream,
) -> Result<MasterVector> {
    init_chaotic(law.energy(), n, |r| law.sample(r), rule, burn_in, rng)
}

/// N i.i.d. draws from `f0`, rescaled onto Σφ = N, followed by `burn_in`
/// collisions. All-zero draws are redrawn.
pub fn init_chaotic<S: FnMut(&mut RandomStream) -> f64>(
    e: &EnergyFunction,
    n: usize,
    mut f0: S,
    rule: CollisionRule,
    burn_in: u64,
    rng: &mut RandomStream,
) -> Result<MasterVector> {
    if n < 2 {
        return Err(Error::Domain(format!("need N >= 2 particles, got {n}")));
    }
    let mut v: Vec<f64> = (0..n).map(|_| f0(rng)).collect();
    while v.iter().all(|&x| x == 0.0) {
        v.iter_mut().for_each(|x| *x = f0(rng));
    }
    let mut state = MasterVector::on_manifold(e, v, n as f64)?;
    state.rule = rule;
    state.reprojections = 0;
    for _ in 0..burn_in {
        step(&mut state, rng)?;
    }
    state.time = 0.0;
    state.collision_count = 0;
    state.accepted = 0;
    Ok(state)
}

/// One draw from C·e^{−z₀φ(v)}.
pub fn sample_equilibrium_1d(law: &EquilibriumLaw, rng: &mut RandomStream) -> f64 {
    law.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::TAU;

    #[test]
    fn classical_collision_is_a_rotation() {
        let e = EnergyFunction::classical();
        let (a, b) = collide(&e, 0.3, -1.7, 0.9);
        assert!((a - (0.3 * cos(0.9) - 1.7 * sin(0.9))).abs() < 1e-15);
        assert!((b - (-0.3 * sin(0.9) - 1.7 * cos(0.9))).abs() < 1e-15);
    }

    #[test]
    fn full_turn_is_identity() {
        for e in [EnergyFunction::classical(), EnergyFunction::relativistic()] {
            let (a, b) = collide(&e, 1.25, -0.5, TAU);
            assert!((a - 1.25).abs() < 1e-12 && (b + 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn relativistic_quarter_turn() {
        let e = EnergyFunction::relativistic();
        let (a, b) = collide(&e, sqrt(3.0), 0.0, core::f64::consts::FRAC_PI_2);
        assert!(a.abs() < 1e-12);
        assert!((b + sqrt(3.0)).abs() < 1e-12);
        assert!((e.phi(a) + e.phi(b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_particles_always_collide_together() {
        let e = EnergyFunction::classical();
        let mut s = MasterVector::on_manifold(&e, alloc::vec![1.0, 0.5], 2.0).unwrap();
        let mut rng = RandomStream::new(4);
        for _ in 0..100 {
            let ev = step(&mut s, &mut rng).unwrap();
            assert_eq!((ev.i, ev.j), (0, 1));
            assert!(ev.theta > 0.0 && ev.theta <= TAU && ev.wait > 0.0);
        }
    }

    #[test]
    fn rescale_is_identity_on_manifold() {
        let e = EnergyFunction::classical();
        let v = [1.0, -1.0, 1.0, -1.0];
        assert!((rescale_factor(&e, &v, 4.0).unwrap() - 1.0).abs() < 1e-15);
        let r = EnergyFunction::relativistic();
        let l = rescale_factor(&r, &v, 3.0).unwrap();
        let total: f64 = v.iter().map(|&x| r.phi(l * x)).sum();
        assert!((total - 3.0).abs() < 1e-13);
        assert!(rescale_factor(&e, &[0.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn zero_length_run() {
        let e = EnergyFunction::classical();
        let mut s = MasterVector::on_manifold(&e, alloc::vec![1.0, 0.5, 0.2], 3.0).unwrap();
        let before = s.velocities().to_vec();
        let mut rng = RandomStream::new(1);
        let stats = simulate(&mut s, 0.0, &[], &mut rng, |_, _| {}).unwrap();
        assert_eq!(stats.collisions, 0);
        assert_eq!(s.velocities(), &before[..]);
        assert!(simulate(&mut s, -1.0, &[], &mut rng, |_, _| {}).is_err());
    }

    #[test]
    fn snapshots_are_reported_in_order() {
        let e = EnergyFunction::relativistic();
        let law = EquilibriumLaw::solve(&e).unwrap();
        let mut rng = RandomStream::new(9);
        let mut s = init_microcanonical(&law, 50, CollisionRule::default(), 500, &mut rng).unwrap();
        let mut seen = Vec::new();
        let stats = simulate(&mut s, 2.0, &[1.5, 0.5, 2.0, 3.0], &mut rng, |t, st| {
            seen.push((t, st.collision_count))
        })
        .unwrap();
        assert_eq!(seen.iter().map(|p| p.0).collect::<Vec<_>>(), [0.5, 1.5, 2.0]);
        assert!(seen.windows(2).all(|w| w[0].1 <= w[1].1));
        assert_eq!(stats.summary.len(), 3);
        assert!(stats.max_pair_residual <= 1e-10);
        assert!(s.manifold_residual() <= 1e-9);
    }
}
