use alloc::format;

use crate::error::{Error, Result};

/// Tuning for [`find_root_increasing`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions {
    /// Geometric expansion factor applied to the seed bracket.
    pub expansion: f64,
    pub max_expansions: usize,
    /// Interval width target, relative to `1 + |root|`.
    pub x_tolerance: f64,
    pub max_iterations: usize,
    /// Interior points sampled to detect a non-monotone function.
    pub monotone_samples: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            expansion: 4.0,
            max_expansions: 60,
            x_tolerance: 1e-12,
            max_iterations: 400,
            monotone_samples: 8,
        }
    }
}

/// Root of a continuous, strictly increasing `g`.
///
/// The seed bracket is widened until `g` changes sign. A bracket with a
/// positive lower end is widened geometrically (`lo/4`, `4·hi`) and never
/// crosses zero, which keeps rate-like unknowns positive. The root is then
/// located by bisection with secant steps.
pub fn find_root_increasing<F: Fn(f64) -> f64>(g: F, seed: (f64, f64)) -> Result<f64> {
    find_root_increasing_with(g, seed, &RootOptions::default())
}

pub fn find_root_increasing_with<F: Fn(f64) -> f64>(
    g: F,
    seed: (f64, f64),
    opts: &RootOptions,
) -> Result<f64> {
    let (mut lo, mut hi) = seed;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Domain(format!("invalid seed bracket ({lo}, {hi})")));
    }
    let positive = lo > 0.0;
    let mut flo = eval(&g, lo)?;
    let mut fhi = eval(&g, hi)?;
    if flo > fhi {
        return Err(Error::Contract(format!(
            "function decreases across the bracket: g({lo})={flo:e} > g({hi})={fhi:e}"
        )));
    }
    let mut expansions = 0;
    while flo > 0.0 || fhi < 0.0 {
        if expansions >= opts.max_expansions {
            return Err(Error::Bracket(format!(
                "g({lo:e})={flo:e}, g({hi:e})={fhi:e} after {expansions} expansions"
            )));
        }
        expansions += 1;
        if fhi < 0.0 {
            let new_hi = if positive { hi * opts.expansion } else { hi + (hi - lo) * opts.expansion };
            let f = eval(&g, new_hi)?;
            if f < fhi {
                return Err(Error::Contract(format!("g decreases between {hi} and {new_hi}")));
            }
            lo = hi;
            flo = fhi;
            hi = new_hi;
            fhi = f;
        } else {
            let new_lo = if positive { lo / opts.expansion } else { lo - (hi - lo) * opts.expansion };
            let f = eval(&g, new_lo)?;
            if f > flo {
                return Err(Error::Contract(format!("g decreases between {new_lo} and {lo}")));
            }
            hi = lo;
            fhi = flo;
            lo = new_lo;
            flo = f;
        }
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }

    // Sampled monotonicity check on the final bracket.
    let scale = flo.abs().max(fhi.abs());
    let mut prev = flo;
    for k in 1..=opts.monotone_samples {
        let x = lo + (hi - lo) * k as f64 / (opts.monotone_samples + 1) as f64;
        let f = eval(&g, x)?;
        if f < prev - 1e-9 * scale {
            return Err(Error::Contract(format!("g is not increasing near {x}")));
        }
        prev = f;
    }

    let (mut a, mut fa, mut b, mut fb) = (lo, flo, hi, fhi);
    let mut last_width = b - a;
    let mut force_bisect = false;
    for _ in 0..opts.max_iterations {
        let width = b - a;
        let mid = 0.5 * (a + b);
        if width <= opts.x_tolerance * (1.0 + mid.abs()) {
            break;
        }
        let secant = a - fa * (b - a) / (fb - fa);
        let x = if force_bisect || !(secant > a && secant < b) { mid } else { secant };
        let fx = eval(&g, x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        if !force_bisect {
            // Try to pin the root from the other side of a secant estimate.
            let delta = 0.4 * opts.x_tolerance * (1.0 + x.abs());
            let probe = if fx < 0.0 { x + delta } else { x - delta };
            if probe > a && probe < b {
                let fp = eval(&g, probe)?;
                if fp == 0.0 {
                    return Ok(probe);
                }
                if fp < 0.0 {
                    a = probe;
                    fa = fp;
                } else {
                    b = probe;
                    fb = fp;
                }
            }
        }
        let w = b - a;
        force_bisect = w > 0.5 * last_width;
        last_width = w;
    }
    let width = b - a;
    let root = if fa.abs() <= fb.abs() { a } else { b };
    if width > opts.x_tolerance * (1.0 + root.abs()) * 2.0 {
        return Err(Error::Numeric { what: "root refinement", residual: fa.abs().min(fb.abs()) });
    }
    Ok(root)
}

fn eval<F: Fn(f64) -> f64>(g: &F, x: f64) -> Result<f64> {
    let v = g(x);
    if v.is_nan() {
        Err(Error::Numeric { what: "root function evaluation", residual: v })
    } else {
        Ok(v)
    }
}
