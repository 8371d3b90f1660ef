//! The chaotic limit density C·e^{−z₀φ(v)} and the asymptotics of the
//! microcanonical volume Z_φ(√N).
//!
//! z₀ solves ∫(1−φ(v))e^{−z₀φ(v)}dv = 0. It is found as the root of the
//! increasing map A(ξ) = ∫e^{−ξ(φ(v)−1)}(1−φ(v))dv, integrated in velocity
//! space. The transform Φ(z) = ∫e^{−zy²}f(y)dy and its moments, which give
//! S(z) = z + ln Φ(z) and S″(z₀), are integrated in the sphere variable y.
//! The two routes are tied together by dv = 2f(y)dy, so ∫e^{−z₀φ}dv = 2Φ(z₀).

use alloc::format;
use core::cell::RefCell;
use alloc::vec::Vec;

use crate::energy::EnergyFunction;
use crate::error::{Error, Result};
use crate::math::{cos, exp, ln, ln_gamma, sin, sqrt, LogValue, PI};
use crate::numerics::{
    find_root_increasing, integrate, integrate_half_line, saddle_asymptotic_1d, QuadratureSpec,
    SaddleInput, Truncation,
};
use crate::rng::RandomStream;
use crate::table::HalfLineTable;

/// Seed bracket for z₀; widened ×4 on either side until A changes sign.
pub const Z0_SEED_BRACKET: (f64, f64) = (1e-3, 1.0);

/// Equilibrium fingerprint of an energy function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleSolution {
    pub z0: f64,
    /// Normalization 1/∫e^{−z₀φ(v)}dv.
    pub c: f64,
    /// ∫e^{−z₀φ(v)}dv.
    pub integral_value: f64,
    /// Φ(z₀) = ∫e^{−z₀y²}f(y)dy.
    pub phi_z0: f64,
    /// S″(z₀), the variance of y² under e^{−z₀y²}f(y).
    pub spp_z0: f64,
    /// S(z₀) = z₀ + ln Φ(z₀).
    pub s_z0: f64,
}

/// A(ξ) = ∫e^{−ξ(φ(v)−1)}(1−φ(v))dv; strictly increasing, zero at z₀.
pub fn saddle_residual(e: &EnergyFunction, xi: f64) -> Result<f64> {
    residual_in(e, xi, &QuadratureSpec::default())
}

fn residual_in(e: &EnergyFunction, xi: f64, spec: &QuadratureSpec) -> Result<f64> {
    let g = |v: f64| {
        let p = e.phi(v);
        (1.0 - p) * exp(-xi * (p - 1.0))
    };
    Ok(2.0 * integrate_half_line(g, spec)?.value)
}

/// ∫φ(v)^k e^{−zφ(v)}dv over ℝ.
pub fn energy_moment(e: &EnergyFunction, z: f64, k: i32) -> Result<f64> {
    energy_moment_in(e, z, k, &QuadratureSpec::default())
}

fn energy_moment_in(e: &EnergyFunction, z: f64, k: i32, spec: &QuadratureSpec) -> Result<f64> {
    let g = |v: f64| {
        let p = e.phi(v);
        crate::math::powi(p, k) * exp(-z * p)
    };
    Ok(2.0 * integrate_half_line(g, spec)?.value)
}

/// ∫y^{2k}e^{−zy²}f(y)dy over ℝ (the k-th derivative of Φ up to sign),
/// truncated with the fitted bound f ≤ K·e^{by²}.
pub fn weight_moment(e: &EnergyFunction, z: f64, k: i32, growth_k: f64, growth_b: f64) -> Result<f64> {
    weight_moment_in(e, z, k, growth_k, growth_b, &QuadratureSpec::default())
}

fn weight_moment_in(e: &EnergyFunction, z: f64, k: i32, growth_k: f64, growth_b: f64, spec: &QuadratureSpec) -> Result<f64> {
    let b = growth_b.max(0.0);
    let c = z - b;
    if !(c > 0.0) {
        return Err(Error::Truncation(format!("z = {z} does not exceed growth rate {b}")));
    }
    // y^{2k}e^{−c y²} ≤ (2k/(e c))^k e^{−c y²/2}
    let poly = if k == 0 { 1.0 } else { crate::math::powi(2.0 * k as f64 / (core::f64::consts::E * c), k) };
    let spec = spec.with_truncation(Truncation::GaussianEnvelope {
        k: growth_k * poly,
        b: b + 0.5 * c,
        z,
    });
    let g = |y: f64| {
        let y2 = y * y;
        crate::math::powi(y2, k) * exp(-z * y2) * e.weight_f(y)
    };
    Ok(2.0 * integrate_half_line(g, &spec)?.value)
}

/// Solves for z₀ and assembles the [`SaddleSolution`]. Refuses energies that
/// fail [`EnergyFunction::validate_conditions`].
pub fn solve_z0(e: &EnergyFunction) -> Result<SaddleSolution> {
    solve_z0_with(e, &QuadratureSpec::default())
}

/// [`solve_z0`] with caller-chosen quadrature tolerances; the tail policy
/// of `spec` is ignored.
pub fn solve_z0_with(e: &EnergyFunction, spec: &QuadratureSpec) -> Result<SaddleSolution> {
    let spec = &spec.with_truncation(Truncation::Probe);
    let report = e.validate_conditions();
    report.require()?;

    let failure = RefCell::new(None);
    let a = |xi: f64| match residual_in(e, xi, spec) {
        Ok(v) => v,
        Err(err) => {
            failure.borrow_mut().get_or_insert(err);
            f64::NAN
        }
    };
    let root = find_root_increasing(a, Z0_SEED_BRACKET);
    if let Some(err) = failure.into_inner() {
        return Err(err);
    }
    let z0 = root?;

    let m0 = energy_moment_in(e, z0, 0, spec)?;
    let (gk, gb) = (report.growth.k, report.growth.b);
    let w0 = weight_moment_in(e, z0, 0, gk, gb, spec)?;
    let w1 = weight_moment_in(e, z0, 1, gk, gb, spec)?;
    let w2 = weight_moment_in(e, z0, 2, gk, gb, spec)?;
    let spp = w2 / w0 - (w1 / w0) * (w1 / w0);
    if !(spp > 0.0) {
        return Err(Error::Numeric { what: "S''(z0) not positive", residual: spp });
    }
    Ok(SaddleSolution {
        z0,
        c: 1.0 / m0,
        integral_value: m0,
        phi_z0: w0,
        spp_z0: spp,
        s_z0: z0 + ln(w0),
    })
}

/// C·e^{−z₀φ(v)}.
pub fn equilibrium_pdf(sol: &SaddleSolution, e: &EnergyFunction, v: f64) -> f64 {
    sol.c * exp(-sol.z0 * e.phi(v))
}

/// The equilibrium law with a cached CDF table for evaluation and sampling.
#[derive(Debug, Clone)]
pub struct EquilibriumLaw {
    energy: EnergyFunction,
    solution: SaddleSolution,
    table: HalfLineTable,
}

impl EquilibriumLaw {
    pub const CELLS: usize = 16_384;

    pub fn new(e: &EnergyFunction, sol: &SaddleSolution) -> Result<Self> {
        // e^{−z₀φ} < 1e−30 past the cut.
        let upper = e.phi_inverse(70.0 / sol.z0)?;
        let energy = e.clone();
        let z0 = sol.z0;
        let table = HalfLineTable::new(|v| exp(-z0 * energy.phi(v)), upper, Self::CELLS);
        Ok(Self { energy, solution: *sol, table })
    }

    pub fn solve(e: &EnergyFunction) -> Result<Self> {
        Self::new(e, &solve_z0(e)?)
    }

    pub fn solution(&self) -> &SaddleSolution {
        &self.solution
    }

    pub fn energy(&self) -> &EnergyFunction {
        &self.energy
    }

    pub fn pdf(&self, v: f64) -> f64 {
        equilibrium_pdf(&self.solution, &self.energy, v)
    }

    pub fn cdf(&self, v: f64) -> f64 {
        let half = 0.5 * self.table.cdf(v.abs());
        if v >= 0.0 {
            0.5 + half
        } else {
            0.5 - half
        }
    }

    /// Inverse CDF.
    pub fn quantile(&self, p: f64) -> f64 {
        let w = p - 0.5;
        let r = self.table.quantile(2.0 * w.abs());
        if w < 0.0 {
            -r
        } else {
            r
        }
    }

    /// One draw from C·e^{−z₀φ(v)}.
    pub fn sample(&self, rng: &mut RandomStream) -> f64 {
        self.quantile(rng.uniform())
    }
}

/// Convenience form of [`EquilibriumLaw::cdf`].
pub fn equilibrium_cdf(law: &EquilibriumLaw, v: f64) -> f64 {
    law.cdf(v)
}

/// Which power of two multiplies the contour integral of e^{NS(z)}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prefactor {
    /// Z ≈ (2^{N−1}/π)·∫e^{NS(z₀+iη)}dη, i.e. 2^N·e^{NS(z₀)}/√(2πN·S″(z₀)).
    PowNMinus1,
    /// Twice the above.
    PowN,
}

impl Prefactor {
    pub fn label(&self) -> &'static str {
        match self {
            Prefactor::PowNMinus1 => "2^(N-1)",
            Prefactor::PowN => "2^N",
        }
    }

    fn ln_factor(&self, n: usize) -> f64 {
        let p = match self {
            Prefactor::PowNMinus1 => n as f64 - 1.0,
            Prefactor::PowN => n as f64,
        };
        p * core::f64::consts::LN_2 - ln(PI)
    }
}

/// Leading-order log Z_φ(√N) with the prefactor it was assembled with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZAsymptotic {
    pub n: usize,
    pub log_value: LogValue,
    pub prefactor: Prefactor,
}

/// Exact ln Z for φ = v²: ln(|S^{N−1}(√E)| / (2√E)).
pub fn classical_log_volume(n: usize, energy: f64) -> f64 {
    let nf = n as f64;
    0.5 * nf * ln(PI) + (0.5 * nf - 1.0) * ln(energy) - ln_gamma(0.5 * nf)
}

/// Leading term of Z_φ(√N) from a solved saddle point.
pub fn z_asymptotic_from(sol: &SaddleSolution, n: usize, prefactor: Prefactor) -> Result<ZAsymptotic> {
    if n < 2 {
        return Err(Error::Domain(format!("N must be at least 2, got {n}")));
    }
    let input = SaddleInput { lambda: n as f64, s_at_z0: sol.s_z0, curvature: sol.spp_z0, q_at_z0: 1.0 };
    let contour = saddle_asymptotic_1d(&input)?;
    Ok(ZAsymptotic {
        n,
        log_value: LogValue { ln_abs: contour.ln_abs + prefactor.ln_factor(n), sign: contour.sign },
        prefactor,
    })
}

/// Outcome of comparing the two candidate prefactors against the exact
/// classical volume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrefactorArbitration {
    pub n: usize,
    pub chosen: Prefactor,
    /// |Z_asym/Z_exact − 1| for 2^{N−1} and 2^N respectively.
    pub error_pow_n_minus_1: f64,
    pub error_pow_n: f64,
}

/// Relative error allowed for a prefactor to be accepted at N = 50.
pub const ARBITRATION_TOLERANCE: f64 = 0.03;
pub const ARBITRATION_N: usize = 50;

/// Picks the prefactor that reproduces the exact classical volume at N = 50.
/// Fails unless exactly one candidate is within tolerance.
pub fn arbitrate_prefactor() -> Result<PrefactorArbitration> {
    let sol = solve_z0(&EnergyFunction::classical())?;
    let n = ARBITRATION_N;
    let exact = LogValue::positive(classical_log_volume(n, n as f64));
    let err = |p: Prefactor| -> Result<f64> {
        Ok((z_asymptotic_from(&sol, n, p)?.log_value.ratio(&exact) - 1.0).abs())
    };
    let e1 = err(Prefactor::PowNMinus1)?;
    let e2 = err(Prefactor::PowN)?;
    let chosen = match (e1 <= ARBITRATION_TOLERANCE, e2 <= ARBITRATION_TOLERANCE) {
        (true, false) => Prefactor::PowNMinus1,
        (false, true) => Prefactor::PowN,
        _ => {
            return Err(Error::Numeric { what: "prefactor arbitration is not unique", residual: e1.min(e2) })
        }
    };
    Ok(PrefactorArbitration { n, chosen, error_pow_n_minus_1: e1, error_pow_n: e2 })
}

/// ln Z_φ(√N) to leading order, with the prefactor fixed by
/// [`arbitrate_prefactor`].
pub fn z_asymptotic(e: &EnergyFunction, n: usize) -> Result<ZAsymptotic> {
    if n < 2 {
        return Err(Error::Domain(format!("N must be at least 2, got {n}")));
    }
    let arb = arbitrate_prefactor()?;
    let sol = solve_z0(e)?;
    z_asymptotic_from(&sol, n, arb.chosen)
}

/// Brute-force ln Z_φ(√E) and its refinement diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForceZ {
    pub log_value: f64,
    /// Relative change between the last two refinement levels.
    pub refinement_change: f64,
    /// Chebyshev degree of the final level.
    pub degree: usize,
}

pub const BRUTE_FORCE_MAX_N: usize = 8;

/// ln Z_φ(√E) by repeated convolution, for 2 ≤ N ≤ 8.
///
/// Z_φ(√E) is 2^N times the N-fold convolution of g(u) = f(√u)/√u. Writing
/// Z_k(E) = E^{k/2−1}·h_k(E) and substituting u = E·sin²θ removes the u^{−1/2}
/// endpoint singularities:
///
/// h₁(E) = 2f(√E),  h_k(E) = 4∫₀^{π/2} cos^{k−2}θ · h_{k−1}(E cos²θ) · f(√E sinθ) dθ.
///
/// Each h_k is tabulated on [0, E] by Chebyshev interpolation; the degree is
/// doubled until the result changes by less than 1e−11 (relative).
pub fn z_bruteforce(e: &EnergyFunction, n: usize, energy: f64) -> Result<BruteForceZ> {
    z_bruteforce_with(e, n, energy, 8, 256)
}

/// [`z_bruteforce`] with an explicit refinement sequence: degrees
/// `start, 2·start, …` up to `max_degree`.
pub fn z_bruteforce_with(
    e: &EnergyFunction,
    n: usize,
    energy: f64,
    start: usize,
    max_degree: usize,
) -> Result<BruteForceZ> {
    if !(2..=BRUTE_FORCE_MAX_N).contains(&n) {
        return Err(Error::Refused(format!("brute-force oracle supports 2 <= N <= 8, got {n}")));
    }
    if !(energy > 0.0) {
        return Err(Error::Domain(format!("energy must be positive, got {energy}")));
    }
    let mut degree = start.max(2);
    let mut prev = convolve_h(e, n, energy, degree)?;
    let mut change = f64::INFINITY;
    while degree < max_degree {
        degree *= 2;
        let next = convolve_h(e, n, energy, degree)?;
        change = ((next - prev) / next).abs();
        prev = next;
        if change < 1e-11 {
            break;
        }
    }
    if !(prev > 0.0) {
        return Err(Error::Numeric { what: "brute-force Z not positive", residual: prev });
    }
    let log_value = (0.5 * n as f64 - 1.0) * ln(energy) + ln(prev);
    Ok(BruteForceZ { log_value, refinement_change: change, degree })
}

struct Chebyshev {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<f64>,
}

impl Chebyshev {
    fn nodes(upper: f64, degree: usize) -> Vec<f64> {
        (0..degree)
            .map(|j| 0.5 * upper * (1.0 + cos(PI * (j as f64 + 0.5) / degree as f64)))
            .collect()
    }

    fn new(upper: f64, values: Vec<f64>) -> Self {
        let degree = values.len();
        let nodes = Self::nodes(upper, degree);
        let weights = (0..degree)
            .map(|j| {
                let s = sin(PI * (j as f64 + 0.5) / degree as f64);
                if j % 2 == 0 {
                    s
                } else {
                    -s
                }
            })
            .collect();
        Self { nodes, weights, values }
    }

    fn eval(&self, x: f64) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for ((&xj, &wj), &fj) in self.nodes.iter().zip(&self.weights).zip(&self.values) {
            let d = x - xj;
            if d == 0.0 {
                return fj;
            }
            let t = wj / d;
            num += t * fj;
            den += t;
        }
        num / den
    }
}

fn convolve_h(e: &EnergyFunction, n: usize, energy: f64, degree: usize) -> Result<f64> {
    let gamma = |u: f64| e.weight_f(sqrt(u.max(0.0)));
    let step = |prev: &dyn Fn(f64) -> f64, k: usize, x: f64| -> Result<f64> {
        let integrand = |theta: f64| {
            let (c, s) = (cos(theta), sin(theta));
            crate::math::powi(c, k as i32 - 2) * prev(x * c * c) * gamma(x * s * s)
        };
        Ok(4.0 * integrate(integrand, 0.0, 0.5 * PI, 1e-13, 1e-300)?.value)
    };
    let h1 = |x: f64| 2.0 * gamma(x);
    if n == 2 {
        return step(&h1, 2, energy);
    }
    let nodes = Chebyshev::nodes(energy, degree);
    let mut table = Chebyshev::new(energy, nodes.iter().map(|&x| step(&h1, 2, x)).collect::<Result<_>>()?);
    for k in 3..n {
        let prev = |x: f64| table.eval(x);
        let values = nodes.iter().map(|&x| step(&prev, k, x)).collect::<Result<Vec<_>>>()?;
        table = Chebyshev::new(energy, values);
    }
    let prev = |x: f64| table.eval(x);
    step(&prev, n, energy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_solution() {
        let sol = solve_z0(&EnergyFunction::classical()).unwrap();
        assert!((sol.z0 - 0.5).abs() < 1e-10, "{}", sol.z0);
        assert!((sol.c - 1.0 / sqrt(2.0 * PI)).abs() < 1e-12);
        assert!((sol.spp_z0 - 2.0).abs() < 1e-9);
        assert!((sol.phi_z0 - 0.5 * sqrt(2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn relativistic_solution() {
        let e = EnergyFunction::relativistic();
        let sol = solve_z0(&e).unwrap();
        assert!((sol.z0 - 0.734_641).abs() < 5e-6, "{}", sol.z0);
        assert!((sol.integral_value - 4.082).abs() < 5e-3);
        assert!((sol.c - 0.2450).abs() < 1e-4);
    }

    #[test]
    fn invariants() {
        for e in [EnergyFunction::classical(), EnergyFunction::relativistic()] {
            let sol = solve_z0(&e).unwrap();
            assert!(sol.z0 > 0.0 && sol.spp_z0 > 0.0);
            assert!((sol.c * sol.integral_value - 1.0).abs() < 1e-12);
            let residual = energy_moment(&e, sol.z0, 0).unwrap() - energy_moment(&e, sol.z0, 1).unwrap();
            assert!(residual.abs() <= 1e-10 * sol.integral_value, "{residual:e}");
            let mean = sol.c * energy_moment(&e, sol.z0, 1).unwrap();
            assert!((mean - 1.0).abs() < 1e-8);
            // dv = 2 f(y) dy ties the two integration routes together
            assert!((2.0 * sol.phi_z0 / sol.integral_value - 1.0).abs() < 1e-9);
            // S'' equals the variance of φ under the limit density
            let m2 = sol.c * energy_moment(&e, sol.z0, 2).unwrap();
            assert!((sol.spp_z0 - (m2 - 1.0)).abs() < 1e-8);
        }
    }

    #[test]
    fn residual_map_is_increasing() {
        for e in [EnergyFunction::classical(), EnergyFunction::relativistic()] {
            let z0 = solve_z0(&e).unwrap().z0;
            let xs: Vec<f64> = (0..=40).map(|k| z0 / 4.0 * libm::pow(16.0, k as f64 / 40.0)).collect();
            let a: Vec<f64> = xs.iter().map(|&x| saddle_residual(&e, x).unwrap()).collect();
            assert!(a.windows(2).all(|w| w[1] > w[0]));
            assert!(a[0] < 0.0 && a[40] > 0.0);
        }
    }

    #[test]
    fn pdf_examples() {
        let e = EnergyFunction::classical();
        let sol = solve_z0(&e).unwrap();
        assert!((equilibrium_pdf(&sol, &e, 0.0) - 0.398_942_28).abs() < 1e-8);
        assert!((equilibrium_pdf(&sol, &e, 1.0) - 0.241_970_72).abs() < 1e-8);
        let r = EnergyFunction::relativistic();
        let rs = solve_z0(&r).unwrap();
        assert_eq!(equilibrium_pdf(&rs, &r, 0.0), rs.c);
    }

    #[test]
    fn cdf_examples() {
        let e = EnergyFunction::classical();
        let law = EquilibriumLaw::solve(&e).unwrap();
        assert_eq!(law.cdf(0.0), 0.5);
        // Φ(1.959964) from the complementary error function
        let normal = |x: f64| 0.5 * crate::math::erfc(-x / core::f64::consts::SQRT_2);
        assert!((law.cdf(1.959_964) - normal(1.959_964)).abs() < 1e-9);
        assert!((law.cdf(1.959_964) - 0.975).abs() < 1e-6);
        assert!((law.cdf(1e6) - 1.0).abs() < 1e-9);
        assert!(law.cdf(-1e6).abs() < 1e-9);
        let r = EquilibriumLaw::solve(&EnergyFunction::relativistic()).unwrap();
        assert_eq!(r.cdf(0.0), 0.5);
        // table mass agrees with adaptive quadrature
        let half = 0.5 * r.solution().integral_value;
        assert!((r.table.total_mass() / half - 1.0).abs() < 1e-10);
    }

    #[test]
    fn quantile_inverts_cdf() {
        let law = EquilibriumLaw::solve(&EnergyFunction::relativistic()).unwrap();
        for &p in &[1e-7, 0.01, 0.3, 0.5, 0.77, 0.999_99] {
            assert!((law.cdf(law.quantile(p)) - p).abs() < 1e-12, "p={p}");
        }
    }

    #[test]
    fn unvalidated_energy_is_refused() {
        let bad = EnergyFunction::custom("concave", sqrt);
        assert!(matches!(solve_z0(&bad), Err(Error::Conditions(_))));
    }

    #[test]
    fn classical_volume_small_cases() {
        // N = 2: circle of radius √E, |∇H| = 2√E → π
        assert!((classical_log_volume(2, 2.0) - ln(PI)).abs() < 1e-14);
        // N = 3: 4πE / (2√E) = 2π√E
        assert!((classical_log_volume(3, 3.0) - ln(2.0 * PI * sqrt(3.0))).abs() < 1e-13);
    }

    #[test]
    fn bruteforce_classical_small() {
        let e = EnergyFunction::classical();
        let z2 = z_bruteforce(&e, 2, 2.0).unwrap();
        assert!((z2.log_value - classical_log_volume(2, 2.0)).abs() < 1e-3);
        let z3 = z_bruteforce(&e, 3, 3.0).unwrap();
        assert!((z3.log_value - classical_log_volume(3, 3.0)).abs() < 5e-3);
        assert!(matches!(z_bruteforce(&e, 9, 9.0), Err(Error::Refused(_))));
        assert!(matches!(z_bruteforce(&e, 1, 9.0), Err(Error::Refused(_))));
    }

    #[test]
    fn prefactor_is_unique() {
        let arb = arbitrate_prefactor().unwrap();
        assert_eq!(arb.chosen, Prefactor::PowNMinus1);
        assert!(arb.error_pow_n_minus_1 < 0.03);
        assert!(arb.error_pow_n > 0.5);
    }

    #[test]
    fn z_asymptotic_domain() {
        let e = EnergyFunction::classical();
        assert!(matches!(z_asymptotic(&e, 1), Err(Error::Domain(_))));
    }
}
