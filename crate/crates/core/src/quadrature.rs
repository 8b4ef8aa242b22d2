//! Composite Gauss-Legendre quadrature.
//!
//! The integrands in this crate are piecewise analytic with kinks at known
//! locations, so every integral is split at those points and each piece is
//! handled by a fixed-order rule.

use std::f64::consts::PI;

/// Default number of nodes per subinterval.
pub const DEFAULT_NODES: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule on `[-1, 1]` by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integral of `f` over `[lo, hi]` with a single application of the rule.
    pub fn integrate<F: Fn(f64) -> f64>(&self, lo: f64, hi: f64, f: F) -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum();
        half * sum
    }

    /// Integral over `[lo, hi]` split at `breaks` (which need not be sorted or
    /// lie inside the interval), each piece further cut into `pieces` equal
    /// parts.
    pub fn integrate_split<F: Fn(f64) -> f64>(
        &self,
        lo: f64,
        hi: f64,
        breaks: &[f64],
        pieces: usize,
        f: F,
    ) -> f64 {
        let mut pts: Vec<f64> = breaks
            .iter()
            .copied()
            .filter(|b| *b > lo && *b < hi)
            .collect();
        pts.push(lo);
        pts.push(hi);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let pieces = pieces.max(1);
        let mut total = 0.0;
        for w in pts.windows(2) {
            let step = (w[1] - w[0]) / pieces as f64;
            for k in 0..pieces {
                let a = w[0] + k as f64 * step;
                let b = if k + 1 == pieces { w[1] } else { a + step };
                total += self.integrate(a, b, &f);
            }
        }
        total
    }
}

impl Default for GaussLegendre {
    fn default() -> Self {
        Self::new(DEFAULT_NODES)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
