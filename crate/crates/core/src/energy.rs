//! Particle energy functions φ(v) and the induced sphere weight f(y).
//!
//! An energy is even, convex, C¹, with φ(0) = 0. Two energies are built in
//! with closed-form maps: `classical` (φ = v²) and `relativistic`
//! (φ = √(1+v²) − 1). User energies supply φ only, either as a closure or as a
//! table of (v, φ(v)) pairs on v ≥ 0; their derivative comes from central
//! differences (closures) or the interpolant (tables), and their inverse from
//! safeguarded Newton iteration.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::math::{exp, ln, sqrt};
use crate::numerics::{integrate, QuadratureSpec};

/// Below this |y| a numeric weight is extrapolated from |y| = guard and 2·guard.
pub const WEIGHT_GUARD: f64 = 1e-3;

#[derive(Clone)]
enum Kind {
    Classical,
    Relativistic,
    Tabulated(Arc<EnergyTable>),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// A particle energy φ with its derivative, inverse and sphere weight.
#[derive(Clone)]
pub struct EnergyFunction {
    name: String,
    kind: Kind,
}

impl fmt::Debug for EnergyFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            Kind::Classical => "classical",
            Kind::Relativistic => "relativistic",
            Kind::Tabulated(_) => "tabulated",
            Kind::Custom(_) => "custom",
        };
        f.debug_struct("EnergyFunction").field("name", &self.name).field("kind", &kind).finish()
    }
}

impl EnergyFunction {
    pub fn classical() -> Self {
        Self { name: "classical".to_string(), kind: Kind::Classical }
    }

    pub fn relativistic() -> Self {
        Self { name: "relativistic".to_string(), kind: Kind::Relativistic }
    }

    /// Built-in energy by name.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "classical" => Ok(Self::classical()),
            "relativistic" => Ok(Self::relativistic()),
            other => Err(Error::Domain(format!("unknown energy '{other}'"))),
        }
    }

    /// User energy given by φ on the whole line (only |v| is ever passed).
    pub fn custom<F>(name: impl Into<String>, phi: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self { name: name.into(), kind: Kind::Custom(Arc::new(phi)) }
    }

    /// User energy tabulated on a strictly increasing grid `0 = v₀ < v₁ < …`,
    /// mirrored to v < 0 by evenness.
    pub fn tabulated(name: impl Into<String>, points: &[(f64, f64)]) -> Result<Self> {
        let table = EnergyTable::new(points)?;
        Ok(Self { name: name.into(), kind: Kind::Tabulated(Arc::new(table)) })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// True when φ⁻¹ is closed form.
    pub fn analytic_inverse(&self) -> bool {
        matches!(self.kind, Kind::Classical | Kind::Relativistic)
    }

    pub fn is_classical(&self) -> bool {
        matches!(self.kind, Kind::Classical)
    }

    /// φ(v). Non-finite input propagates; see [`try_phi`](Self::try_phi).
    #[inline]
    pub fn phi(&self, v: f64) -> f64 {
        let a = v.abs();
        match &self.kind {
            Kind::Classical => a * a,
            // √(1+v²) − 1 without cancellation
            Kind::Relativistic => a * a / (sqrt(1.0 + a * a) + 1.0),
            Kind::Tabulated(t) => t.eval(a),
            Kind::Custom(f) => f(a),
        }
    }

    pub fn try_phi(&self, v: f64) -> Result<f64> {
        if !v.is_finite() {
            return Err(Error::Domain(format!("phi: non-finite argument {v}")));
        }
        Ok(self.phi(v))
    }

    /// φ′(v).
    #[inline]
    pub fn dphi(&self, v: f64) -> f64 {
        match &self.kind {
            Kind::Classical => 2.0 * v,
            Kind::Relativistic => v / sqrt(1.0 + v * v),
            Kind::Tabulated(t) => {
                let d = t.slope(v.abs());
                if v < 0.0 {
                    -d
                } else {
                    d
                }
            }
            Kind::Custom(_) => {
                let h = (1e-6 * v.abs()).max(1e-6);
                (self.phi(v + h) - self.phi(v - h)) / (2.0 * h)
            }
        }
    }

    /// The v ≥ 0 with φ(v) = u.
    pub fn phi_inverse(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0) || !u.is_finite() {
            return Err(Error::Domain(format!("phi_inverse: argument must be finite and >= 0, got {u}")));
        }
        match &self.kind {
            Kind::Classical => Ok(sqrt(u)),
            Kind::Relativistic => Ok(sqrt(u * (u + 2.0))),
            _ => self.numeric_inverse(u),
        }
    }

    /// [`phi_inverse`](Self::phi_inverse) for callers that guarantee `u ≥ 0`;
    /// falls back to NaN if the numeric inverse fails.
    #[inline]
    pub(crate) fn phi_inverse_unchecked(&self, u: f64) -> f64 {
        match &self.kind {
            Kind::Classical => sqrt(u),
            Kind::Relativistic => sqrt(u * (u + 2.0)),
            _ => self.numeric_inverse(u.max(0.0)).unwrap_or(f64::NAN),
        }
    }

    fn numeric_inverse(&self, u: f64) -> Result<f64> {
        if u == 0.0 {
            return Ok(0.0);
        }
        let mut hi = 1.0;
        while self.phi(hi) < u {
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::Numeric { what: "phi_inverse bracket", residual: u });
            }
        }
        let mut lo = 0.0;
        let mut x = 0.5 * hi;
        for _ in 0..300 {
            let fx = self.phi(x) - u;
            if fx == 0.0 {
                return Ok(x);
            }
            if fx < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let d = self.dphi(x);
            let newton = x - fx / d;
            let next = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            let step = (next - x).abs();
            x = next;
            if step <= 1e-14 * x || hi - lo <= 4.0 * f64::EPSILON * hi {
                return Ok(x);
            }
        }
        Err(Error::Numeric { what: "phi_inverse", residual: (self.phi(x) - u).abs() })
    }

    /// f(y) = |y| / |φ′(φ⁻¹(y²))|.
    pub fn weight_f(&self, y: f64) -> f64 {
        match &self.kind {
            Kind::Classical => 0.5,
            Kind::Relativistic => {
                let u = y * y;
                (u + 1.0) / sqrt(u + 2.0)
            }
            _ => {
                let a = y.abs();
                if a >= WEIGHT_GUARD {
                    return self.weight_numeric(a);
                }
                // f is even and smooth at 0; extrapolate in y² rather than
                // differentiate φ where it cancels catastrophically.
                let g = WEIGHT_GUARD;
                let (f1, f2) = (self.weight_numeric(g), self.weight_numeric(2.0 * g));
                f1 + (f2 - f1) / (3.0 * g * g) * (a * a - g * g)
            }
        }
    }

    fn weight_numeric(&self, a: f64) -> f64 {
        let v = self.phi_inverse_unchecked(a * a);
        a / self.dphi(v).abs()
    }

    /// Checks the structural conditions on φ and the three conditions on f
    /// that the saddle-point analysis relies on. Failures are reported, not
    /// thrown.
    pub fn validate_conditions(&self) -> ConditionReport {
        let shape = ShapeCheck::run(self);
        let weight = |y: f64| self.weight_f(y);
        let mut report = validate_weight(&weight);
        report.shape = shape;
        report
    }
}

/// Piecewise cubic Hermite interpolant of a tabulated energy, extended
/// linearly past the last node.
#[derive(Debug, Clone)]
struct EnergyTable {
    v: Vec<f64>,
    phi: Vec<f64>,
    slope: Vec<f64>,
}

impl EnergyTable {
    fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::Conditions("energy table needs at least 3 rows".into()));
        }
        if points[0].0 != 0.0 {
            return Err(Error::Conditions(format!(
                "energy table must start at v = 0, got {}",
                points[0].0
            )));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Conditions(format!(
                    "energy table grid not strictly increasing at v = {}",
                    w[1].0
                )));
            }
        }
        if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(Error::Conditions("energy table has non-finite entries".into()));
        }
        let v: Vec<f64> = points.iter().map(|p| p.0).collect();
        let phi: Vec<f64> = points.iter().map(|p| p.1).collect();
        let n = v.len();
        let secant: Vec<f64> = (0..n - 1).map(|k| (phi[k + 1] - phi[k]) / (v[k + 1] - v[k])).collect();
        let mut slope = Vec::with_capacity(n);
        slope.push(0.0);
        for k in 1..n - 1 {
            let (h0, h1) = (v[k] - v[k - 1], v[k + 1] - v[k]);
            slope.push((h1 * secant[k - 1] + h0 * secant[k]) / (h0 + h1));
        }
        let last = 2.0 * secant[n - 2] - slope[n - 2];
        slope.push(last.max(secant[n - 2]));
        Ok(Self { v, phi, slope })
    }

    fn locate(&self, a: f64) -> usize {
        match self.v.binary_search_by(|x| x.partial_cmp(&a).unwrap_or(core::cmp::Ordering::Less)) {
            Ok(i) => i.min(self.v.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.v.len() - 2),
        }
    }

    fn eval(&self, a: f64) -> f64 {
        let n = self.v.len();
        if a >= self.v[n - 1] {
            return self.phi[n - 1] + self.slope[n - 1] * (a - self.v[n - 1]);
        }
        let k = self.locate(a);
        let h = self.v[k + 1] - self.v[k];
        let t = (a - self.v[k]) / h;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.phi[k]
            + (t3 - 2.0 * t2 + t) * h * self.slope[k]
            + (-2.0 * t3 + 3.0 * t2) * self.phi[k + 1]
            + (t3 - t2) * h * self.slope[k + 1]
    }

    fn slope(&self, a: f64) -> f64 {
        let n = self.v.len();
        if a >= self.v[n - 1] {
            return self.slope[n - 1];
        }
        let k = self.locate(a);
        let h = self.v[k + 1] - self.v[k];
        let t = (a - self.v[k]) / h;
        let t2 = t * t;
        (6.0 * t2 - 6.0 * t) / h * self.phi[k]
            + (3.0 * t2 - 4.0 * t + 1.0) * self.slope[k]
            + (-6.0 * t2 + 6.0 * t) / h * self.phi[k + 1]
            + (3.0 * t2 - 2.0 * t) * self.slope[k + 1]
    }
}

/// Structural checks on φ itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeCheck {
    pub zero_at_origin: bool,
    pub even: bool,
    pub increasing: bool,
    pub convex: bool,
}

impl ShapeCheck {
    pub fn run(e: &EnergyFunction) -> Self {
        let grid: Vec<f64> = (1..=400).map(|k| 0.05 * k as f64).collect();
        let zero_at_origin = e.phi(0.0).abs() <= 1e-12;
        let even = grid.iter().all(|&v| {
            let (a, b) = (e.phi(v), e.phi(-v));
            (a - b).abs() <= 1e-12 * (1.0 + a.abs())
        });
        let increasing = grid.iter().all(|&v| e.dphi(v) > 0.0)
            && grid.windows(2).all(|w| e.phi(w[1]) > e.phi(w[0]));
        let h = 0.025;
        let convex = grid.iter().all(|&v| {
            let second = e.phi(v + h) - 2.0 * e.phi(v) + e.phi(v - h);
            second >= -1e-9 * (1.0 + e.phi(v).abs())
        });
        Self { zero_at_origin, even, increasing, convex }
    }

    pub fn passed(&self) -> bool {
        self.zero_at_origin && self.even && self.increasing && self.convex
    }
}

/// Least-squares fit of `ln f(y) ≈ ln K + b·y²` on [0, 10].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthBound {
    /// Fitted exponential rate.
    pub b: f64,
    /// Smallest K with `f(y) ≤ K·e^{max(b,0)·y²}` on the fit grid.
    pub k: f64,
    pub ok: bool,
}

impl GrowthBound {
    pub const Y_MAX: f64 = 10.0;

    fn fit<W: Fn(f64) -> f64>(weight: &W) -> Self {
        let pts: Vec<(f64, f64)> = (0..=200)
            .map(|i| Self::Y_MAX * i as f64 / 200.0)
            .map(|y| (y, weight(y)))
            .filter(|(_, f)| *f > 0.0 && f.is_finite())
            .collect();
        if pts.len() < 10 {
            return Self { b: f64::INFINITY, k: f64::INFINITY, ok: false };
        }
        let n = pts.len() as f64;
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for &(y, f) in &pts {
            let (x, l) = (y * y, ln(f));
            sx += x;
            sy += l;
            sxx += x * x;
            sxy += x * l;
        }
        let b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let b_pos = b.max(0.0);
        let k = pts.iter().map(|&(y, f)| f * exp(-b_pos * y * y)).fold(0.0, f64::max);
        let ok = b.is_finite() && k.is_finite() && k > 0.0;
        Self { b, k, ok }
    }

    /// Whether `f ≤ K·e^{b y²}` is consistent with the fitted growth rate.
    pub fn holds_for(&self, b: f64) -> bool {
        self.ok && b >= self.b - 1e-6 * (1.0 + self.b.abs())
    }
}

/// Outcome of [`EnergyFunction::validate_conditions`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionReport {
    pub shape: ShapeCheck,
    pub growth: GrowthBound,
    /// Upper bound on ∫(1−y²)f(y)dy from a finite window; must be < 0.
    pub total_moment: f64,
    pub total_moment_window: f64,
    /// ∫_{|y|≤1}(1−y²)f(y)dy; must be > 0.
    pub inner_moment: f64,
}

impl ConditionReport {
    pub fn total_moment_ok(&self) -> bool {
        self.total_moment < 0.0
    }

    pub fn inner_moment_ok(&self) -> bool {
        self.inner_moment > 0.0
    }

    pub fn passed(&self) -> bool {
        self.shape.passed() && self.growth.ok && self.total_moment_ok() && self.inner_moment_ok()
    }

    /// Human-readable list of failed checks.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.shape.zero_at_origin {
            out.push("phi(0) != 0");
        }
        if !self.shape.even {
            out.push("phi is not even");
        }
        if !self.shape.increasing {
            out.push("phi is not increasing on v > 0");
        }
        if !self.shape.convex {
            out.push("phi is not convex");
        }
        if !self.growth.ok {
            out.push("weight does not admit an exponential bound");
        }
        if !self.total_moment_ok() {
            out.push("integral of (1-y^2) f(y) is not negative");
        }
        if !self.inner_moment_ok() {
            out.push("integral of (1-y^2) f(y) over |y|<=1 is not positive");
        }
        out
    }

    pub(crate) fn require(&self) -> Result<()> {
        if self.passed() {
            Ok(())
        } else {
            Err(Error::Conditions(self.failures().join("; ")))
        }
    }
}

/// Growth and moment conditions for an arbitrary even weight f. Shape checks
/// are left at `true`; [`EnergyFunction::validate_conditions`] fills them in.
pub fn validate_weight<W: Fn(f64) -> f64>(weight: &W) -> ConditionReport {
    let spec = QuadratureSpec::default();
    let growth = GrowthBound::fit(weight);
    let moment = |y: f64| (1.0 - y * y) * weight(y);
    let inner = integrate(moment, 0.0, 1.0, spec.relative_tolerance, spec.absolute_tolerance)
        .map(|r| 2.0 * r.value)
        .unwrap_or(f64::NAN);
    // For Y > 1 the window integral only decreases, so any negative window
    // value bounds the full integral from above.
    let mut total = f64::NAN;
    let mut window = 1.0;
    let mut acc = inner;
    let mut lo = 1.0;
    while window < 1024.0 && acc.is_finite() {
        window *= 2.0;
        match integrate(moment, lo, window, spec.relative_tolerance, spec.absolute_tolerance) {
            Ok(r) => acc += 2.0 * r.value,
            Err(_) => {
                total = f64::NAN;
                break;
            }
        }
        lo = window;
        total = acc;
        if acc < 0.0 {
            break;
        }
    }
    ConditionReport {
        shape: ShapeCheck { zero_at_origin: true, even: true, increasing: true, convex: true },
        growth,
        total_moment: total,
        total_moment_window: window,
        inner_moment: inner,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_grid() -> Vec<f64> {
        (0..=120).map(|k| libm::pow(10.0, -6.0 + 0.1 * k as f64)).collect()
    }

    #[test]
    fn phi_examples() {
        let c = EnergyFunction::classical();
        let r = EnergyFunction::relativistic();
        assert_eq!(c.phi(2.0), 4.0);
        assert_eq!(r.phi(0.0), 0.0);
        assert!((r.phi(sqrt(3.0)) - 1.0).abs() < 1e-15);
        assert!(c.try_phi(f64::NAN).is_err());
        assert!(r.try_phi(f64::INFINITY).is_err());
    }

    #[test]
    fn inverse_examples() {
        let c = EnergyFunction::classical();
        let r = EnergyFunction::relativistic();
        assert_eq!(c.phi_inverse(9.0).unwrap(), 3.0);
        assert!((r.phi_inverse(1.0).unwrap() - sqrt(3.0)).abs() < 1e-15);
        assert_eq!(r.phi_inverse(0.0).unwrap(), 0.0);
        assert!(matches!(c.phi_inverse(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn weight_examples() {
        let c = EnergyFunction::classical();
        let r = EnergyFunction::relativistic();
        for y in [-3.0, 0.0, 1e-8, 2.5] {
            assert_eq!(c.weight_f(y), 0.5);
        }
        assert!((r.weight_f(1.0) - 2.0 / sqrt(3.0)).abs() < 1e-15);
        // closed form (y²+1)|y|/√((y²+1)²−1) at y = 1
        let raw = |y: f64| (y * y + 1.0) * y.abs() / sqrt((y * y + 1.0) * (y * y + 1.0) - 1.0);
        assert!((r.weight_f(1.0) - raw(1.0)).abs() < 1e-15);
        // removable singularity: limit 1/√2, raw formula at 1e-4 agrees
        assert!((r.weight_f(0.0) - 1.0 / sqrt(2.0)).abs() < 1e-15);
        assert!((raw(1e-4) - 1.0 / sqrt(2.0)).abs() < 1e-7);
    }

    #[test]
    fn invariants_for_builtins() {
        for e in [EnergyFunction::classical(), EnergyFunction::relativistic()] {
            for &v in &log_grid() {
                assert_eq!(e.phi(v), e.phi(-v));
                let u = e.phi(v);
                let back = e.phi_inverse(u).unwrap();
                assert!((back - v).abs() <= 1e-10 * v, "{} v={v} back={back}", e.name());
                let y = sqrt(u);
                let lhs = e.weight_f(y) * e.dphi(v).abs();
                assert!((lhs - y).abs() <= 1e-9 * y, "{} v={v}", e.name());
                assert_eq!(e.weight_f(y), e.weight_f(-y));
            }
            for k in 0..=120 {
                let u = libm::pow(10.0, -8.0 + 0.1 * k as f64);
                let w = e.phi(e.phi_inverse(u).unwrap());
                assert!((w - u).abs() <= 1e-10 * u);
            }
        }
    }

    #[test]
    fn custom_energy_numeric_paths() {
        let e = EnergyFunction::custom("rel-custom", |v| v * v / (sqrt(1.0 + v * v) + 1.0));
        let r = EnergyFunction::relativistic();
        assert!(!e.analytic_inverse());
        for &v in &[1e-3, 0.1, 1.0, 7.0, 300.0] {
            assert!((e.dphi(v) - r.dphi(v)).abs() < 1e-8 * (1.0 + r.dphi(v)));
            let u = r.phi(v);
            let inv = e.phi_inverse(u).unwrap();
            assert!((inv - v).abs() <= 1e-9 * v, "v={v} inv={inv}");
        }
        for &y in &[0.0, 1e-7, 0.3, 1.0, 4.0] {
            assert!((e.weight_f(y) - r.weight_f(y)).abs() < 1e-6, "y={y}");
        }
        for k in 0..=120 {
            let u = libm::pow(10.0, -8.0 + 0.1 * k as f64);
            let w = e.phi(e.phi_inverse(u).unwrap());
            assert!((w - u).abs() <= 1e-10 * u, "u={u}");
        }
    }

    #[test]
    fn conditions_hold_for_builtins() {
        for e in [EnergyFunction::classical(), EnergyFunction::relativistic()] {
            let rep = e.validate_conditions();
            assert!(rep.passed(), "{}: {:?}", e.name(), rep.failures());
            assert!(rep.total_moment < 0.0);
            assert!(rep.inner_moment > 0.0);
        }
        let c = EnergyFunction::classical().validate_conditions();
        assert!((c.inner_moment - 2.0 / 3.0).abs() < 1e-12);
        assert!(c.growth.b.abs() < 1e-12);
    }

    #[test]
    fn heavy_weight_violates_growth_for_small_b() {
        let rep = validate_weight(&|y: f64| exp(2.0 * y * y));
        assert!((rep.growth.b - 2.0).abs() < 1e-9);
        assert!(!rep.growth.holds_for(1.9));
        assert!(!rep.growth.holds_for(1.0));
        assert!(rep.growth.holds_for(2.0));
        let rel = EnergyFunction::relativistic().validate_conditions();
        assert!(rel.growth.holds_for(0.5));
    }

    #[test]
    fn tabulated_classical_is_exact() {
        let pts: Vec<(f64, f64)> = (0..=200).map(|k| 0.1 * k as f64).map(|v| (v, v * v)).collect();
        let t = EnergyFunction::tabulated("table", &pts).unwrap();
        for &v in &[0.0, 0.05, 1.234, 19.99, -3.3] {
            assert!((t.phi(v) - v * v).abs() < 1e-12, "v={v}");
            assert!((t.dphi(v) - 2.0 * v).abs() < 1e-10, "v={v}");
        }
        assert!(t.validate_conditions().passed());
    }

    #[test]
    fn non_convex_table_fails_shape() {
        let pts: Vec<(f64, f64)> =
            (0..=100).map(|k| 0.1 * k as f64).map(|v| (v, v * v + 3.0 * libm::sin(v) * v)).collect();
        let t = EnergyFunction::tabulated("bad", &pts).unwrap();
        let rep = t.validate_conditions();
        assert!(!rep.passed());
        assert!(!rep.shape.convex || !rep.shape.increasing);
    }

    #[test]
    fn malformed_tables() {
        assert!(EnergyFunction::tabulated("t", &[(0.0, 0.0), (1.0, 1.0)]).is_err());
        assert!(EnergyFunction::tabulated("t", &[(0.5, 0.0), (1.0, 1.0), (2.0, 4.0)]).is_err());
        assert!(EnergyFunction::tabulated("t", &[(0.0, 0.0), (1.0, 1.0), (1.0, 4.0)]).is_err());
    }

    #[test]
    fn by_name() {
        assert!(EnergyFunction::by_name("classical").unwrap().is_classical());
        assert_eq!(EnergyFunction::by_name("relativistic").unwrap().name(), "relativistic");
        assert!(EnergyFunction::by_name("quantum").is_err());
    }
}
