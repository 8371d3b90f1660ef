//! Cumulative distribution tables on a half-line with cubic Hermite
//! interpolation (the density supplies exact node derivatives).

use alloc::vec::Vec;

use crate::numerics::gauss_legendre;

#[derive(Debug, Clone)]
pub struct HalfLineTable {
    x: Vec<f64>,
    cum: Vec<f64>,
    dens: Vec<f64>,
    total: f64,
}

impl HalfLineTable {
    /// Tabulates ∫₀^x density on `cells` uniform cells of [0, upper]. Mass
    /// beyond `upper` is treated as zero.
    pub fn new<D: Fn(f64) -> f64>(density: D, upper: f64, cells: usize) -> Self {
        let (gx, gw) = gauss_legendre(8);
        let h = upper / cells as f64;
        let mut x = Vec::with_capacity(cells + 1);
        let mut cum = Vec::with_capacity(cells + 1);
        let mut dens = Vec::with_capacity(cells + 1);
        let mut acc = 0.0;
        for k in 0..=cells {
            let xk = h * k as f64;
            if k > 0 {
                let a = xk - h;
                let mass: f64 = gx
                    .iter()
                    .zip(&gw)
                    .map(|(t, w)| w * density(a + 0.5 * h * (t + 1.0)))
                    .sum::<f64>()
                    * 0.5
                    * h;
                acc += mass;
            }
            x.push(xk);
            cum.push(acc);
            dens.push(density(xk));
        }
        Self { x, cum, dens, total: acc }
    }

    pub fn total_mass(&self) -> f64 {
        self.total
    }

    pub fn upper(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    fn cell_of(&self, x: f64) -> usize {
        let h = self.x[1];
        ((x / h) as usize).min(self.x.len() - 2)
    }

    fn hermite(&self, k: usize, t: f64) -> f64 {
        let h = self.x[k + 1] - self.x[k];
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.cum[k]
            + (t3 - 2.0 * t2 + t) * h * self.dens[k]
            + (-2.0 * t3 + 3.0 * t2) * self.cum[k + 1]
            + (t3 - t2) * h * self.dens[k + 1]
    }

    fn hermite_slope(&self, k: usize, t: f64) -> f64 {
        let h = self.x[k + 1] - self.x[k];
        let t2 = t * t;
        (6.0 * t2 - 6.0 * t) / h * self.cum[k]
            + (3.0 * t2 - 4.0 * t + 1.0) * self.dens[k]
            + (-6.0 * t2 + 6.0 * t) / h * self.cum[k + 1]
            + (3.0 * t2 - 2.0 * t) * self.dens[k + 1]
    }

    /// Unnormalized ∫₀^x density.
    pub fn mass_below(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= self.upper() {
            return self.total;
        }
        let k = self.cell_of(x);
        let h = self.x[k + 1] - self.x[k];
        self.hermite(k, (x - self.x[k]) / h).clamp(self.cum[k], self.cum[k + 1])
    }

    /// Normalized CDF on [0, ∞).
    pub fn cdf(&self, x: f64) -> f64 {
        self.mass_below(x) / self.total
    }

    /// Inverse of [`cdf`](Self::cdf) for `p ∈ [0, 1]`.
    pub fn quantile(&self, p: f64) -> f64 {
        let target = p.clamp(0.0, 1.0) * self.total;
        if target <= 0.0 {
            return 0.0;
        }
        if target >= self.total {
            return self.upper();
        }
        let k = match self.cum.binary_search_by(|c| c.partial_cmp(&target).unwrap()) {
            Ok(i) => return self.x[i],
            Err(i) => i - 1,
        };
        let h = self.x[k + 1] - self.x[k];
        let (mut lo, mut hi) = (0.0, 1.0);
        let span = self.cum[k + 1] - self.cum[k];
        let mut t = if span > 0.0 { (target - self.cum[k]) / span } else { 0.5 };
        for _ in 0..60 {
            let f = self.hermite(k, t) - target;
            if f < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let d = self.hermite_slope(k, t) * h;
            let newton = t - f / d;
            let next = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if (next - t).abs() < 1e-15 {
                t = next;
                break;
            }
            t = next;
        }
        self.x[k] + t * h
    }
}
