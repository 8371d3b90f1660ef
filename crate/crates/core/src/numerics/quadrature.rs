use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{exp, ln};

/// Tolerances and tail policy for integrals over unbounded domains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub relative_tolerance: f64,
    pub absolute_tolerance: f64,
    pub truncation: Truncation,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            relative_tolerance: 1e-10,
            absolute_tolerance: 1e-14,
            truncation: Truncation::Probe,
            max_subdivisions: 20_000,
        }
    }
}

impl QuadratureSpec {
    pub fn with_truncation(mut self, truncation: Truncation) -> Self {
        self.truncation = truncation;
        self
    }

    pub fn with_tolerances(mut self, relative: f64, absolute: f64) -> Self {
        self.relative_tolerance = relative;
        self.absolute_tolerance = absolute;
        self
    }

    fn check(&self) -> Result<()> {
        if !(self.relative_tolerance > 0.0 && self.absolute_tolerance > 0.0) {
            return Err(Error::Domain(format!(
                "quadrature tolerances must be positive (rel {}, abs {})",
                self.relative_tolerance, self.absolute_tolerance
            )));
        }
        Ok(())
    }
}

/// Where to cut an integral over [0, ∞).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// Integrate up to the given point.
    Fixed(f64),
    /// The integrand is bounded by `k·e^{−(z−b)y²}`; cut where the Gaussian
    /// tail bound `k·e^{−(z−b)Y²}/(2(z−b)Y)` drops below the absolute tolerance.
    GaussianEnvelope { k: f64, b: f64, z: f64 },
    /// Walk outwards geometrically and estimate the local exponential decay
    /// rate; cut once the extrapolated tail is below the absolute tolerance.
    Probe,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

// 15-point Kronrod nodes / weights with the embedded 7-point Gauss rule,
// kept at their published digits.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    res_abs: f64,
}

fn gk15<F: Fn(f64) -> f64>(g: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = g(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut f1 = [0.0; 7];
    let mut f2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let y1 = g(center - dx);
        let y2 = g(center + dx);
        f1[j] = y1;
        f2[j] = y2;
        res_k += WGK[j] * (y1 + y2);
        res_abs += WGK[j] * (y1.abs() + y2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (y1 + y2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((f1[j] - mean).abs() + (f2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = libm::pow(200.0 * err / res_asc, 1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Segment { a, b, value, error: err, res_abs }
}

/// Adaptive 15-point Gauss–Kronrod quadrature on a finite interval. Stops when
/// the summed error estimate is at most `max(rel·|I|, abs)`.
pub fn integrate<F: Fn(f64) -> f64>(g: F, a: f64, b: f64, rel: f64, abs: f64) -> Result<Integral> {
    integrate_impl(&g, a, b, rel, abs, QuadratureSpec::default().max_subdivisions)
}

/// [`integrate`] with tolerances and subdivision budget taken from `spec`.
pub fn integrate_with<F: Fn(f64) -> f64>(g: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Integral> {
    spec.check()?;
    integrate_impl(
        &g,
        a,
        b,
        spec.relative_tolerance,
        spec.absolute_tolerance,
        spec.max_subdivisions,
    )
}

fn integrate_impl<F: Fn(f64) -> f64>(
    g: &F,
    a: f64,
    b: f64,
    rel: f64,
    abs: f64,
    max_subdivisions: usize,
) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("integration limits must be finite: [{a}, {b}]")));
    }
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let mut segs: Vec<Segment> = Vec::with_capacity(64);
    segs.push(gk15(g, a, b));
    let mut evaluations = 15;
    loop {
        let (value, error, res_abs) = segs
            .iter()
            .fold((0.0, 0.0, 0.0), |(v, e, r), s| (v + s.value, e + s.error, r + s.res_abs));
        if !value.is_finite() {
            return Err(Error::Numeric { what: "quadrature (non-finite integrand)", residual: value });
        }
        let target = (rel * value.abs()).max(abs);
        // The per-segment estimate never drops below 50·eps·∫|g|, so a target
        // under that floor is roundoff-limited and accepted.
        if error <= target || error <= 100.0 * f64::EPSILON * res_abs {
            return Ok(Integral { value, error, evaluations });
        }
        if segs.len() >= max_subdivisions {
            return Err(Error::Accuracy { estimate: error, target });
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .fold((0usize, -1.0), |acc, (i, s)| if s.error > acc.1 { (i, s.error) } else { acc });
        let s = segs[worst];
        let mid = 0.5 * (s.a + s.b);
        if !(mid > s.a.min(s.b) && mid < s.a.max(s.b)) {
            // Interval exhausted at machine precision; accept what we have.
            return Ok(Integral { value, error, evaluations });
        }
        segs[worst] = gk15(g, s.a, mid);
        segs.push(gk15(g, mid, s.b));
        evaluations += 30;
    }
}

fn truncation_point<F: Fn(f64) -> f64>(g: &F, spec: &QuadratureSpec, sign: f64) -> Result<f64> {
    let tol = spec.absolute_tolerance;
    match spec.truncation {
        Truncation::Fixed(y) => {
            if y > 0.0 && y.is_finite() {
                Ok(y)
            } else {
                Err(Error::Truncation(format!("fixed cut-off must be positive, got {y}")))
            }
        }
        Truncation::GaussianEnvelope { k, b, z } => {
            let c = z - b;
            if !(c > 0.0) {
                return Err(Error::Truncation(format!(
                    "exponent {z} does not exceed growth rate {b}"
                )));
            }
            let bound = |y: f64| k * exp(-c * y * y) / (2.0 * c * y);
            let mut y = 1.0;
            while bound(y) >= tol {
                y *= 1.25;
                if y > 1e8 {
                    return Err(Error::Truncation(format!("Gaussian bound never below {tol:e}")));
                }
            }
            Ok(y)
        }
        Truncation::Probe => {
            let mut y = 1.0;
            while y < 1e9 {
                let g1 = g(sign * y).abs();
                let g2 = g(sign * 1.5 * y).abs();
                let g3 = g(sign * 2.0 * y).abs();
                if g1.is_finite() && g2 <= g1 && g3 <= g2 {
                    let tail = if g3 == 0.0 || g1 == 0.0 {
                        g1 * y
                    } else {
                        let rate = ln(g1 / g3) / y;
                        if rate > 0.0 {
                            g1 / rate
                        } else {
                            f64::INFINITY
                        }
                    };
                    if tail < 0.01 * tol {
                        return Ok(y);
                    }
                }
                y *= 2.0;
            }
            Err(Error::Truncation("integrand does not decay within 1e9".into()))
        }
    }
}

/// ∫₀^∞ g, truncated according to `spec.truncation`.
pub fn integrate_half_line<F: Fn(f64) -> f64>(g: F, spec: &QuadratureSpec) -> Result<Integral> {
    spec.check()?;
    let y = truncation_point(&g, spec, 1.0)?;
    integrate_impl(
        &g,
        0.0,
        y,
        spec.relative_tolerance,
        spec.absolute_tolerance,
        spec.max_subdivisions,
    )
}

/// ∫_ℝ g, integrated as given on each half-line (0 is always a breakpoint).
pub fn integrate_even_line<F: Fn(f64) -> f64>(g: F, spec: &QuadratureSpec) -> Result<Integral> {
    spec.check()?;
    let yp = truncation_point(&g, spec, 1.0)?;
    let yn = truncation_point(&g, spec, -1.0)?;
    let half_spec = spec.relative_tolerance;
    let abs = 0.5 * spec.absolute_tolerance;
    let right = integrate_impl(&g, 0.0, yp, half_spec, abs, spec.max_subdivisions)?;
    let left = integrate_impl(&g, -yn, 0.0, half_spec, abs, spec.max_subdivisions)?;
    Ok(Integral {
        value: left.value + right.value,
        error: left.error + right.error,
        evaluations: left.evaluations + right.evaluations,
    })
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let nf = n as f64;
    for i in 0..n {
        let mut x = libm::cos(crate::math::PI * (i as f64 + 0.75) / (nf + 0.5));
        let mut dp = 1.0;
        for _ in 0..100 {
            // p = P_n(x), prev = P_{n-1}(x)
            let (mut prev, mut p) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * prev) / kf;
                prev = p;
                p = next;
            }
            dp = nf * (x * p - prev) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}
