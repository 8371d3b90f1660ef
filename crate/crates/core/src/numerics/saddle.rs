use alloc::format;

use crate::error::{Error, Result};
use crate::math::{ln, LogValue, PI};

/// Data at a simple real saddle point of `q(z)·e^{λS(z)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleInput {
    /// The large parameter (N or λ).
    pub lambda: f64,
    pub s_at_z0: f64,
    /// S″(z₀) in one dimension, or the oriented Hessian determinant in n
    /// dimensions (positive after orientation normalization).
    pub curvature: f64,
    pub q_at_z0: f64,
}

/// Leading-order value `q(z₀)·√(2π/(λS″(z₀)))·e^{λS(z₀)}` of a one-dimensional
/// Laplace / steepest-descent integral, taken on the positive real branch.
pub fn saddle_asymptotic_1d(s: &SaddleInput) -> Result<LogValue> {
    if !(s.lambda > 0.0) {
        return Err(Error::Domain(format!("lambda must be positive, got {}", s.lambda)));
    }
    if !(s.curvature > 0.0) {
        return Err(Error::Contract(format!("S''(z0) must be positive, got {}", s.curvature)));
    }
    let q = LogValue::from_value(s.q_at_z0);
    let ln_abs = 0.5 * ln(2.0 * PI / (s.lambda * s.curvature)) + s.lambda * s.s_at_z0 + q.ln_abs;
    Ok(LogValue { ln_abs, sign: q.sign })
}

/// Leading-order value `(2π/λ)^{n/2}·det(S″)^{−1/2}·e^{λS(z₀)}·q(z₀)` in `n`
/// dimensions.
pub fn saddle_asymptotic_nd(s: &SaddleInput, n: usize) -> Result<LogValue> {
    if n == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    if !(s.lambda > 0.0) {
        return Err(Error::Domain(format!("lambda must be positive, got {}", s.lambda)));
    }
    if s.curvature == 0.0 {
        return Err(Error::DegenerateSaddle("Hessian determinant vanishes".into()));
    }
    if !(s.curvature > 0.0) {
        return Err(Error::Contract(format!(
            "oriented Hessian determinant must be positive, got {}",
            s.curvature
        )));
    }
    let q = LogValue::from_value(s.q_at_z0);
    let ln_abs = 0.5 * n as f64 * ln(2.0 * PI / s.lambda) - 0.5 * ln(s.curvature)
        + s.lambda * s.s_at_z0
        + q.ln_abs;
    Ok(LogValue { ln_abs, sign: q.sign })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{exp, sqrt};
    use crate::numerics::{integrate_even_line, QuadratureSpec};

    #[test]
    fn gaussian_is_exact() {
        // ∫ e^{-λ y²/2} dy with S = -y²/2 written as a maximum: the Laplace
        // form uses -S'' = 1.
        let s = SaddleInput { lambda: 10.0, s_at_z0: 0.0, curvature: 1.0, q_at_z0: 1.0 };
        let v = saddle_asymptotic_1d(&s).unwrap().value();
        assert!((v - 0.792_665_459_5).abs() < 1e-9);
        assert!((v - sqrt(2.0 * PI / 10.0)).abs() < 1e-15);
    }

    #[test]
    fn exact_for_all_lambda_on_gaussian_family() {
        let spec = QuadratureSpec::default();
        for &lambda in &[0.5, 1.0, 3.0, 17.0, 250.0] {
            let exact = integrate_even_line(|y| exp(-lambda * y * y), &spec).unwrap().value;
            let s = SaddleInput { lambda, s_at_z0: 0.0, curvature: 2.0, q_at_z0: 1.0 };
            let v = saddle_asymptotic_1d(&s).unwrap().value();
            assert!((v / exact - 1.0).abs() < 1e-12, "lambda={lambda}");
        }
    }

    #[test]
    fn nd_reduces_to_1d() {
        let s = SaddleInput { lambda: 7.0, s_at_z0: 0.3, curvature: 1.7, q_at_z0: 2.5 };
        let a = saddle_asymptotic_1d(&s).unwrap();
        let b = saddle_asymptotic_nd(&s, 1).unwrap();
        assert!((a.ln_abs - b.ln_abs).abs() < 1e-15);
    }

    #[test]
    fn nd_product_of_gaussians() {
        let s = SaddleInput { lambda: 4.0, s_at_z0: 0.0, curvature: 1.0, q_at_z0: 1.0 };
        let v = saddle_asymptotic_nd(&s, 2).unwrap().value();
        assert!((v - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn large_lambda_stays_finite_in_log_domain() {
        let s = SaddleInput { lambda: 1e4, s_at_z0: 1.5, curvature: 2.0, q_at_z0: 1.0 };
        let v = saddle_asymptotic_1d(&s).unwrap();
        assert!(v.ln_abs.is_finite() && v.ln_abs > 1e4);
    }

    #[test]
    fn contract_errors() {
        let s = SaddleInput { lambda: 1.0, s_at_z0: 0.0, curvature: -1.0, q_at_z0: 1.0 };
        assert!(matches!(saddle_asymptotic_1d(&s), Err(Error::Contract(_))));
        let s = SaddleInput { lambda: 1.0, s_at_z0: 0.0, curvature: 0.0, q_at_z0: 1.0 };
        assert!(matches!(saddle_asymptotic_nd(&s, 3), Err(Error::DegenerateSaddle(_))));
    }
}
