//! Two-dimensional particles with conserved energy and momentum.
//!
//! States live on Γ = {Σφ(|vᵢ|) = 2N, Σvᵢ = p}. The saddle point of the
//! three-variable Fourier representation sits at (0, 0, z̄₃) with z₀ = i·z̄₃
//! solving ∫(2 − φ(|v|))e^{−z₀φ(|v|)}dv = 0, and the one-particle law tends
//! to C₂·e^{−z₀φ(|v|)}.

use alloc::format;
use alloc::vec::Vec;
use core::cell::RefCell;

use crate::chaos::DistanceReport;
use crate::energy::{EnergyFunction, ShapeCheck};
use crate::error::{Error, Result};
use crate::math::{atan2, cos, exp, hypot, ln, ln_gamma, sin, sqrt, LogValue, PI, TAU};
use crate::numerics::{
    find_root_increasing, find_root_increasing_with, integrate, integrate_half_line, saddle_asymptotic_nd,
    QuadratureSpec, RootOptions, SaddleInput,
};
use crate::rng::RandomStream;
use crate::stats::{ks_sorted, sorted, wasserstein1_to_law};
use crate::table::HalfLineTable;

pub type Vec2 = [f64; 2];

/// A radial energy φ(|v|) built on a one-dimensional profile.
#[derive(Debug, Clone)]
pub struct PlanarEnergy {
    pub radial: EnergyFunction,
}

impl PlanarEnergy {
    pub fn new(radial: EnergyFunction) -> Self {
        Self { radial }
    }

    #[inline]
    pub fn phi(&self, v: Vec2) -> f64 {
        self.radial.phi(hypot(v[0], v[1]))
    }

    pub fn name(&self) -> &str {
        self.radial.name()
    }
}

/// Planar analogues of the one-dimensional conditions: shape of the radial
/// profile, ∫_{φ≤2}(2−φ)r dr > 0 and a window with ∫₀^R(2−φ)r dr < 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarConditions {
    pub shape: ShapeCheck,
    pub inner_moment: f64,
    pub total_moment: f64,
    pub total_moment_window: f64,
}

impl PlanarConditions {
    pub fn passed(&self) -> bool {
        self.shape.passed() && self.inner_moment > 0.0 && self.total_moment < 0.0
    }
}

pub fn validate_planar(pe: &PlanarEnergy) -> PlanarConditions {
    let e = &pe.radial;
    let shape = ShapeCheck::run(e);
    let g = |r: f64| (2.0 - e.phi(r)) * r;
    let r2 = e.phi_inverse(2.0).unwrap_or(f64::NAN);
    let inner = integrate(g, 0.0, r2, 1e-10, 1e-14).map(|r| r.value).unwrap_or(f64::NAN);
    let (mut acc, mut lo, mut window, mut total) = (inner, r2, r2, f64::NAN);
    while window < 1024.0 && acc.is_finite() {
        window *= 2.0;
        match integrate(g, lo, window, 1e-10, 1e-14) {
            Ok(r) => acc += r.value,
            Err(_) => break,
        }
        lo = window;
        total = acc;
        if acc < 0.0 {
            break;
        }
    }
    PlanarConditions { shape, inner_moment: inner, total_moment: total, total_moment_window: window }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarSaddle {
    pub z0: f64,
    /// 1/∫_{ℝ²}e^{−z₀φ(|v|)}dv.
    pub c2: f64,
    /// ∫_{ℝ²}e^{−z₀φ(|v|)}dv.
    pub integral_value: f64,
    /// Var(φ)·Var(v_x)·Var(v_y) under the limit law.
    pub hessian_det: f64,
}

/// 2π∫₀^∞ φ(r)^k e^{−zφ(r)} r dr.
pub fn radial_moment(pe: &PlanarEnergy, z: f64, k: i32) -> Result<f64> {
    radial_moment_in(pe, z, k, &QuadratureSpec::default())
}

fn radial_moment_in(pe: &PlanarEnergy, z: f64, k: i32, spec: &QuadratureSpec) -> Result<f64> {
    let e = &pe.radial;
    let g = |r: f64| {
        let p = e.phi(r);
        crate::math::powi(p, k) * exp(-z * p) * r
    };
    Ok(TAU * integrate_half_line(g, spec)?.value)
}

/// 2π∫₀^∞(2−φ)e^{−ξ(φ−2)}r dr, increasing in ξ with its root at z₀.
pub fn planar_residual(pe: &PlanarEnergy, xi: f64) -> Result<f64> {
    planar_residual_in(pe, xi, &QuadratureSpec::default())
}

fn planar_residual_in(pe: &PlanarEnergy, xi: f64, spec: &QuadratureSpec) -> Result<f64> {
    let e = &pe.radial;
    let g = |r: f64| {
        let p = e.phi(r);
        (2.0 - p) * exp(-xi * (p - 2.0)) * r
    };
    Ok(TAU * integrate_half_line(g, spec)?.value)
}

pub fn solve_z0_2d(pe: &PlanarEnergy) -> Result<PlanarSaddle> {
    solve_z0_2d_with(pe, &QuadratureSpec::default())
}

pub fn solve_z0_2d_with(pe: &PlanarEnergy, spec: &QuadratureSpec) -> Result<PlanarSaddle> {
    let cond = validate_planar(pe);
    if !cond.passed() {
        return Err(Error::Conditions(format!("planar energy '{}' fails validation: {cond:?}", pe.name())));
    }
    let failure = RefCell::new(None);
    let a = |xi: f64| match planar_residual_in(pe, xi, spec) {
        Ok(v) => v,
        Err(err) => {
            failure.borrow_mut().get_or_insert(err);
            f64::NAN
        }
    };
    let root = find_root_increasing(a, (0.1, 1.0));
    if let Some(err) = failure.into_inner() {
        return Err(err);
    }
    let z0 = root?;
    let m0 = radial_moment_in(pe, z0, 0, spec)?;
    let m1 = radial_moment_in(pe, z0, 1, spec)? / m0;
    let m2 = radial_moment_in(pe, z0, 2, spec)? / m0;
    let var_phi = m2 - m1 * m1;
    // E|v|² / 2 per component
    let e = &pe.radial;
    let r3 = |r: f64| r * r * r * exp(-z0 * e.phi(r));
    let var_comp = 0.5 * TAU * integrate_half_line(r3, spec)?.value / m0;
    let det = var_phi * var_comp * var_comp;
    if !(det > 0.0) {
        return Err(Error::DegenerateSaddle(format!("Hessian determinant {det}")));
    }
    Ok(PlanarSaddle { z0, c2: 1.0 / m0, integral_value: m0, hessian_det: det })
}

/// Leading-order ln Z(N, p) = ln[(2π)^{−3}(2π/N)^{3/2}det^{−1/2}e^{2Nz₀}W^N]
/// with W = ∫e^{−z₀φ}dv; p enters only through q = 1 at fixed p.
pub fn z_asymptotic_2d(sad: &PlanarSaddle, n: usize, _p: Vec2) -> Result<LogValue> {
    if n < 2 {
        return Err(Error::Domain(format!("N must be at least 2, got {n}")));
    }
    let input = SaddleInput {
        lambda: n as f64,
        s_at_z0: 2.0 * sad.z0 + ln(sad.integral_value),
        curvature: sad.hessian_det,
        q_at_z0: 1.0,
    };
    let v = saddle_asymptotic_nd(&input, 3)?;
    Ok(LogValue { ln_abs: v.ln_abs - 3.0 * ln(TAU), sign: v.sign })
}

/// Exact ln Z(N, p) for φ = |v|²: π^{N−1}R^{2N−4}/(N·Γ(N−1)) with
/// R² = 2N − |p|²/N.
pub fn classical_planar_log_volume(n: usize, p: Vec2) -> Result<f64> {
    if n < 3 {
        return Err(Error::Domain(format!("N must be at least 3, got {n}")));
    }
    let nf = n as f64;
    let r2 = 2.0 * nf - (p[0] * p[0] + p[1] * p[1]) / nf;
    if !(r2 > 0.0) {
        return Err(Error::Domain("momentum too large for the energy shell".into()));
    }
    Ok((nf - 1.0) * ln(PI) + (nf - 2.0) * ln(r2) - ln(nf) - ln_gamma(nf - 1.0))
}

/// Counts of a Metropolis move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MoveCounts {
    pub proposals: u64,
    pub acceptances: u64,
}

struct PairGeometry<'a> {
    e: &'a EnergyFunction,
    a: Vec2,
    h: f64,
}

impl PairGeometry<'_> {
    #[inline]
    fn f(&self, rho: f64, u: Vec2) -> f64 {
        let p = [self.a[0] + rho * u[0], self.a[1] + rho * u[1]];
        let m = [self.a[0] - rho * u[0], self.a[1] - rho * u[1]];
        self.e.phi(hypot(p[0], p[1])) + self.e.phi(hypot(m[0], m[1]))
    }

    /// ∂F/∂ρ at (ρ, u).
    #[inline]
    fn df(&self, rho: f64, u: Vec2) -> f64 {
        let term = |w: Vec2, s: f64| {
            let n = hypot(w[0], w[1]);
            if n == 0.0 {
                0.0
            } else {
                s * self.e.dphi(n) * (u[0] * w[0] + u[1] * w[1]) / n
            }
        };
        let p = [self.a[0] + rho * u[0], self.a[1] + rho * u[1]];
        let m = [self.a[0] - rho * u[0], self.a[1] - rho * u[1]];
        term(p, 1.0) + term(m, -1.0)
    }

    /// The ρ ≥ 0 with F(ρ, u) = h; F is even and convex in ρ.
    fn radius(&self, u: Vec2) -> Result<f64> {
        if self.e.is_classical() {
            let a2 = self.a[0] * self.a[0] + self.a[1] * self.a[1];
            return Ok(sqrt(((self.h - 2.0 * a2) / 2.0).max(0.0)));
        }
        let mut hi = self.e.phi_inverse(self.h)?;
        let mut lo = 0.0;
        let mut r = 0.5 * hi;
        for _ in 0..200 {
            let g = self.f(r, u) - self.h;
            if g < 0.0 {
                lo = r;
            } else {
                hi = r;
            }
            let d = self.df(r, u);
            let newton = r - g / d;
            let next = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if (next - r).abs() <= 1e-15 * (1.0 + r) || hi - lo <= 1e-15 * (1.0 + hi) {
                return Ok(next);
            }
            r = next;
        }
        Err(Error::Numeric { what: "planar collision radius", residual: (self.f(r, u) - self.h).abs() })
    }

    /// Co-area weight ρ/|∂F/∂ρ| of the constraint curve in polar coordinates.
    fn weight(&self, rho: f64, u: Vec2) -> f64 {
        rho / self.df(rho, u).abs()
    }
}

/// One energy- and momentum-conserving pair move. Returns the new pair and
/// whether the proposal was accepted.
pub fn planar_collide(pe: &PlanarEnergy, vi: Vec2, vj: Vec2, rng: &mut RandomStream) -> Result<(Vec2, Vec2, bool)> {
    if !(vi.iter().chain(vj.iter()).all(|x| x.is_finite())) {
        return Err(Error::Domain("non-finite planar velocity".into()));
    }
    let e = &pe.radial;
    let s = [vi[0] + vj[0], vi[1] + vj[1]];
    let a = [0.5 * s[0], 0.5 * s[1]];
    let h = pe.phi(vi) + pe.phi(vj);
    let floor = 2.0 * e.phi(hypot(a[0], a[1]));
    if h < floor * (1.0 - 1e-12) - 1e-300 {
        return Err(Error::Contract(format!("pair energy {h} below its minimum {floor} at this momentum")));
    }
    let geo = PairGeometry { e, a, h };
    let psi = TAU * rng.uniform();
    let u = [cos(psi), sin(psi)];
    let d0 = [vi[0] - a[0], vi[1] - a[1]];
    let rho0 = hypot(d0[0], d0[1]);
    if h - floor <= 1e-14 * (1.0 + h) || rho0 == 0.0 {
        // the constraint curve degenerates to the point s/2
        return Ok((vi, vj, true));
    }
    let rho = geo.radius(u)?;
    let accepted = if e.is_classical() {
        true
    } else {
        let u0 = [d0[0] / rho0, d0[1] / rho0];
        let ratio = geo.weight(rho, u) / geo.weight(rho0, u0);
        ratio >= 1.0 || rng.uniform() < ratio
    };
    if !accepted {
        return Ok((vi, vj, false));
    }
    let wi = [a[0] + rho * u[0], a[1] + rho * u[1]];
    let wj = [s[0] - wi[0], s[1] - wi[1]];
    Ok((wi, wj, true))
}

/// Collisions between checks of the cached energy and momentum.
pub const PLANAR_REPROJECT_INTERVAL: u64 = 10_000;

#[derive(Debug, Clone)]
pub struct PlanarState {
    velocities: Vec<Vec2>,
    energy: PlanarEnergy,
    pub target_energy: f64,
    pub target_momentum: Vec2,
    /// Moves divided by N.
    pub time: f64,
    pub collision_count: u64,
    pub counts: MoveCounts,
}

impl PlanarState {
    /// Shifts and rescales `velocities` onto Σφ = `energy`, Σv = `momentum`.
    pub fn on_manifold(pe: &PlanarEnergy, velocities: Vec<Vec2>, energy: f64, momentum: Vec2) -> Result<Self> {
        if velocities.len() < 3 {
            return Err(Error::Domain(format!("need N >= 3 particles, got {}", velocities.len())));
        }
        let mut s = Self {
            velocities,
            energy: pe.clone(),
            target_energy: energy,
            target_momentum: momentum,
            time: 0.0,
            collision_count: 0,
            counts: MoveCounts::default(),
        };
        s.project()?;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.velocities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.velocities.is_empty()
    }

    pub fn velocities(&self) -> &[Vec2] {
        &self.velocities
    }

    pub fn total_energy(&self) -> f64 {
        self.velocities.iter().map(|&v| self.energy.phi(v)).sum()
    }

    pub fn total_momentum(&self) -> Vec2 {
        self.velocities.iter().fold([0.0, 0.0], |m, v| [m[0] + v[0], m[1] + v[1]])
    }

    /// Relative energy residual and componentwise momentum residual.
    pub fn residuals(&self) -> (f64, f64) {
        let m = self.total_momentum();
        let pm = (m[0] - self.target_momentum[0]).abs().max((m[1] - self.target_momentum[1]).abs());
        ((self.total_energy() - self.target_energy).abs() / self.target_energy, pm)
    }

    /// Alternating momentum shift and energy rescale about p/N, at most 50
    /// rounds, to a joint tolerance of 1e−10.
    pub fn project(&mut self) -> Result<()> {
        let n = self.len() as f64;
        let c = [self.target_momentum[0] / n, self.target_momentum[1] / n];
        let e = &self.energy.radial;
        for _ in 0..50 {
            let m = self.total_momentum();
            let shift = [(self.target_momentum[0] - m[0]) / n, (self.target_momentum[1] - m[1]) / n];
            for v in &mut self.velocities {
                v[0] += shift[0];
                v[1] += shift[1];
            }
            let w: Vec<Vec2> = self.velocities.iter().map(|v| [v[0] - c[0], v[1] - c[1]]).collect();
            let target = self.target_energy;
            let g = |l: f64| w.iter().map(|d| e.phi(hypot(c[0] + l * d[0], c[1] + l * d[1]))).sum::<f64>() - target;
            let opts = RootOptions { x_tolerance: 1e-14, monotone_samples: 0, ..RootOptions::default() };
            let l = find_root_increasing_with(g, (0.5, 2.0), &opts)?;
            for (v, d) in self.velocities.iter_mut().zip(&w) {
                *v = [c[0] + l * d[0], c[1] + l * d[1]];
            }
            let (re, pm) = self.residuals();
            if re <= 1e-10 && pm <= 1e-10 * (1.0 + hypot(self.target_momentum[0], self.target_momentum[1])) {
                return Ok(());
            }
        }
        Err(Error::Numeric { what: "planar joint projection", residual: self.residuals().0 })
    }

    /// One pair move on a uniformly random pair.
    pub fn step(&mut self, rng: &mut RandomStream) -> Result<bool> {
        let n = self.len();
        let (i, j) = rng.pair(n);
        let (wi, wj, acc) = planar_collide(&self.energy, self.velocities[i], self.velocities[j], rng)?;
        self.velocities[i] = wi;
        self.velocities[j] = wj;
        self.counts.proposals += 1;
        if acc {
            self.counts.acceptances += 1;
        }
        self.collision_count += 1;
        self.time = self.collision_count as f64 / n as f64;
        if self.collision_count.is_multiple_of(PLANAR_REPROJECT_INTERVAL) {
            let (re, pm) = self.residuals();
            if re > 1e-9 || pm > 1e-12 * (1.0 + hypot(self.target_momentum[0], self.target_momentum[1])) * n as f64 {
                self.project()?;
            }
        }
        Ok(acc)
    }
}

/// The predicted one-particle law C₂e^{−z₀φ(|v|)} through its radial and
/// single-component distributions.
#[derive(Debug, Clone)]
pub struct PlanarLaw {
    pub saddle: PlanarSaddle,
    radial: HalfLineTable,
    component: HalfLineTable,
}

impl PlanarLaw {
    pub fn new(pe: &PlanarEnergy, sad: &PlanarSaddle) -> Result<Self> {
        let e = pe.radial.clone();
        let z0 = sad.z0;
        let upper = e.phi_inverse(70.0 / z0)?;
        let radial = HalfLineTable::new(|r| r * exp(-z0 * e.phi(r)), upper, 8192);
        // component density ∫ e^{−z₀φ(√(x²+y²))} dy, up to normalization
        let density = |x: f64| {
            let g = |y: f64| exp(-z0 * e.phi(hypot(x, y)));
            integrate(g, 0.0, upper, 1e-11, 1e-300).map(|r| r.value).unwrap_or(f64::NAN)
        };
        let component = HalfLineTable::new(density, upper, 2048);
        if !component.total_mass().is_finite() {
            return Err(Error::Numeric { what: "planar component law", residual: component.total_mass() });
        }
        Ok(Self { saddle: *sad, radial, component })
    }

    pub fn radial_cdf(&self, r: f64) -> f64 {
        self.radial.cdf(r)
    }

    pub fn component_cdf(&self, x: f64) -> f64 {
        let half = 0.5 * self.component.cdf(x.abs());
        if x >= 0.0 {
            0.5 + half
        } else {
            0.5 - half
        }
    }

    pub fn component_quantile(&self, p: f64) -> f64 {
        let w = p - 0.5;
        let r = self.component.quantile(2.0 * w.abs());
        if w < 0.0 {
            -r
        } else {
            r
        }
    }

    pub fn sample(&self, rng: &mut RandomStream) -> Vec2 {
        let r = self.radial.quantile(rng.uniform());
        let t = TAU * rng.uniform();
        [r * cos(t), r * sin(t)]
    }
}

#[derive(Debug, Clone)]
pub struct PlanarRun {
    pub state: PlanarState,
    /// Component marginal (both components pooled) against the prediction.
    pub report: DistanceReport,
    /// KS distance of |v| against the predicted radial law.
    pub radial_ks: f64,
    pub samples: Vec<Vec2>,
}

/// Length of a [`sample_planar`] run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarBudget {
    /// Pair moves.
    pub steps: u64,
    /// Random particles recorded, evenly spread over the run.
    pub samples: usize,
    /// KS threshold for the component marginal.
    pub ks_threshold: f64,
}

/// Starts from i.i.d. draws projected onto Γ and runs the pair moves.
pub fn sample_planar(
    law: &PlanarLaw,
    pe: &PlanarEnergy,
    n: usize,
    p: Vec2,
    budget: &PlanarBudget,
    rng: &mut RandomStream,
) -> Result<PlanarRun> {
    sample_planar_observed(law, pe, n, p, budget, rng, |_| {})
}

/// [`sample_planar`] with `observer` called on the state after every move.
pub fn sample_planar_observed<O: FnMut(&PlanarState)>(
    law: &PlanarLaw,
    pe: &PlanarEnergy,
    n: usize,
    p: Vec2,
    budget: &PlanarBudget,
    rng: &mut RandomStream,
    mut observer: O,
) -> Result<PlanarRun> {
    let PlanarBudget { steps, samples, ks_threshold } = *budget;
    let v: Vec<Vec2> = (0..n).map(|_| law.sample(rng)).collect();
    let mut state = PlanarState::on_manifold(pe, v, 2.0 * n as f64, p)?;
    let every = (steps / samples.max(1) as u64).max(1);
    let mut rec = Vec::with_capacity(samples);
    for k in 1..=steps {
        state.step(rng)?;
        observer(&state);
        if k % every == 0 && rec.len() < samples {
            rec.push(state.velocities[rng.index(n)]);
        }
    }
    let comps = sorted(rec.iter().flat_map(|v| [v[0], v[1]]).collect());
    let ks = ks_sorted(&comps, |x| law.component_cdf(x))?;
    let w1 = wasserstein1_to_law(&comps, |u| law.component_quantile(u))?;
    let radii = sorted(rec.iter().map(|v| hypot(v[0], v[1])).collect());
    let radial_ks = ks_sorted(&radii, |r| law.radial_cdf(r))?;
    Ok(PlanarRun {
        state,
        report: DistanceReport { ks, w1, sample_sizes: (comps.len(), 0), threshold_pass: ks < ks_threshold },
        radial_ks,
        samples: rec,
    })
}

/// Angle of a planar vector, for diagnostics.
pub fn direction(v: Vec2) -> f64 {
    atan2(v[1], v[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classical() -> PlanarEnergy {
        PlanarEnergy::new(EnergyFunction::classical())
    }

    fn relativistic() -> PlanarEnergy {
        PlanarEnergy::new(EnergyFunction::relativistic())
    }

    #[test]
    fn classical_saddle() {
        let s = solve_z0_2d(&classical()).unwrap();
        assert!((s.z0 - 0.5).abs() < 1e-8);
        assert!((s.c2 - 1.0 / TAU).abs() < 1e-10);
        assert!((s.hessian_det - 4.0).abs() < 1e-7);
    }

    #[test]
    fn relativistic_saddle_matches_closed_form() {
        let s = solve_z0_2d(&relativistic()).unwrap();
        let z = (sqrt(17.0) - 1.0) / 4.0;
        assert!((s.z0 - z).abs() < 1e-9, "{}", s.z0);
        assert!((s.integral_value - TAU * (1.0 / z + 1.0 / (z * z))).abs() < 1e-8);
        let pe = relativistic();
        let mean = s.c2 * radial_moment(&pe, s.z0, 1).unwrap();
        assert!((mean - 2.0).abs() < 1e-8);
    }

    #[test]
    fn asymptotics_against_exact_classical() {
        let s = solve_z0_2d(&classical()).unwrap();
        let err = |n: usize| {
            let exact = LogValue::positive(classical_planar_log_volume(n, [0.0, 0.0]).unwrap());
            (z_asymptotic_2d(&s, n, [0.0, 0.0]).unwrap().ratio(&exact) - 1.0).abs()
        };
        assert!(err(100) < 0.05, "{}", err(100));
        assert!(err(100) < err(25));
    }

    #[test]
    fn collisions_conserve_both_quantities() {
        for pe in [classical(), relativistic()] {
            let mut rng = RandomStream::new(12);
            for _ in 0..10_000 {
                let vi = [3.0 * rng.standard_normal(), rng.standard_normal()];
                let vj = [rng.standard_normal(), -2.0 * rng.standard_normal()];
                let h = pe.phi(vi) + pe.phi(vj);
                let (wi, wj, _) = planar_collide(&pe, vi, vj, &mut rng).unwrap();
                assert!((pe.phi(wi) + pe.phi(wj) - h).abs() <= 1e-10 * (1.0 + h));
                let s = [vi[0] + vj[0], vi[1] + vj[1]];
                let ds = (wi[0] + wj[0] - s[0]).abs().max((wi[1] + wj[1] - s[1]).abs());
                assert!(ds <= 1e-12 * (1.0 + hypot(s[0], s[1])));
            }
        }
    }

    #[test]
    fn equal_velocities_are_fixed() {
        let mut rng = RandomStream::new(1);
        let v = [0.3, -0.4];
        let (a, b, _) = planar_collide(&relativistic(), v, v, &mut rng).unwrap();
        assert_eq!((a, b), (v, v));
    }

    #[test]
    fn classical_moves_are_always_accepted() {
        let pe = classical();
        let sad = solve_z0_2d(&pe).unwrap();
        let law = PlanarLaw::new(&pe, &sad).unwrap();
        let mut rng = RandomStream::new(4);
        let budget = PlanarBudget { steps: 5000, samples: 500, ks_threshold: 1.0 };
        let run = sample_planar(&law, &pe, 50, [0.0, 0.0], &budget, &mut rng).unwrap();
        assert_eq!(run.state.counts.proposals, run.state.counts.acceptances);
        let (re, pm) = run.state.residuals();
        assert!(re <= 1e-9 && pm <= 1e-12 * 50.0);
    }

    #[test]
    fn component_law_is_standard_normal_for_classical() {
        let pe = classical();
        let law = PlanarLaw::new(&pe, &solve_z0_2d(&pe).unwrap()).unwrap();
        let normal = |x: f64| 0.5 * crate::math::erfc(-x / core::f64::consts::SQRT_2);
        for &x in &[-2.5, -1.0, 0.0, 0.3, 1.7] {
            assert!((law.component_cdf(x) - normal(x)).abs() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn projection_hits_both_targets() {
        let pe = relativistic();
        let mut rng = RandomStream::new(2);
        let v: Vec<Vec2> = (0..100).map(|_| [rng.standard_normal(), rng.standard_normal()]).collect();
        let s = PlanarState::on_manifold(&pe, v, 200.0, [3.0, -1.0]).unwrap();
        let (re, pm) = s.residuals();
        assert!(re <= 1e-10 && pm <= 1e-10 * 5.0);
    }
}
