//! One-dimensional rules and reproducible summation.

use std::f64::consts::PI;
use std::ops::Add;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule by Newton iteration on `P_n`.
    ///
    /// Nodes are returned in ascending order. Panics if `n == 0`.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi's initial guess, accurate to O(n^-4).
            let theta = PI * (i as f64 + 0.75) / (nf + 0.5);
            let mut x = theta.cos() * (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf));
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[n - 1 - i] = x;
            nodes[i] = -x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped affinely onto `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| (mid + half * x, half * w))
            .collect()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let terms: Vec<f64> = self
            .on_interval(a, b)
            .into_iter()
            .map(|(x, w)| w * f(x))
            .collect();
        pairwise_sum(&terms, 0.0)
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
    let p = if n == 0 { 1.0 } else { p1 };
    let nf = n as f64;
    let d = nf * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Uniform periodic nodes `2πj/n`, `j = 0..n`.
pub fn periodic_nodes(n: usize) -> Vec<f64> {
    (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect()
}

const PAIRWISE_BLOCK: usize = 16;
const PARALLEL_GRAIN: usize = 512;

/// Pairwise summation with a fixed split tree.
pub fn pairwise_sum<T: Copy + Add<Output = T>>(items: &[T], zero: T) -> T {
    if items.len() <= PAIRWISE_BLOCK {
        items.iter().fold(zero, |acc, &x| acc + x)
    } else {
        let mid = items.len() / 2;
        pairwise_sum(&items[..mid], zero) + pairwise_sum(&items[mid..], zero)
    }
}

/// Parallel map-reduce over `0..n` whose result does not depend on the
/// number of worker threads: the split tree is a function of `n` alone.
pub fn par_pairwise_sum<T, F>(n: usize, zero: T, f: &F) -> T
where
    T: Copy + Add<Output = T> + Send + Sync,
    F: Fn(usize) -> T + Sync,
{
    fn go<T, F>(lo: usize, hi: usize, zero: T, f: &F) -> T
    where
        T: Copy + Add<Output = T> + Send + Sync,
        F: Fn(usize) -> T + Sync,
    {
        let len = hi - lo;
        if len <= PAIRWISE_BLOCK {
            (lo..hi).fold(zero, |acc, i| acc + f(i))
        } else {
            let mid = lo + len / 2;
            if len > PARALLEL_GRAIN {
                let (a, b) = rayon::join(|| go(lo, mid, zero, f), || go(mid, hi, zero, f));
                a + b
            } else {
                go(lo, mid, zero, f) + go(mid, hi, zero, f)
            }
        }
    }
    go(0, n, zero, f)
}

/// Shortest round-trip decimal form, switching to exponent notation for
/// very large or very small magnitudes.
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let gl = GaussLegendre::new(5);
        // Degree 9 is the exactness limit for five nodes.
        let got = gl.integrate(0.0, 2.0, |x| x.powi(9) + 3.0 * x.powi(4));
        assert_relative_eq!(got, 1024.0 / 10.0 + 3.0 * 32.0 / 5.0, max_relative = 1e-14);
    }

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        for n in [1, 2, 7, 64, 128, 257] {
            let gl = GaussLegendre::new(n);
            let s: f64 = pairwise_sum(gl.weights(), 0.0);
            assert!((s - 2.0).abs() < 1e-13, "n={n}: {s}");
            assert!(gl.nodes().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn gauss_legendre_matches_known_three_point_rule() {
        let gl = GaussLegendre::new(3);
        assert_relative_eq!(gl.nodes()[2], (0.6f64).sqrt(), max_relative = 1e-15);
        assert_relative_eq!(gl.weights()[1], 8.0 / 9.0, max_relative = 1e-15);
    }

    #[test]
    fn par_sum_matches_serial_pairwise_bitwise() {
        let xs: Vec<f64> = (0..10_000).map(|i| ((i as f64) * 0.37).sin()).collect();
        let serial = pairwise_sum(&xs, 0.0);
        let parallel = par_pairwise_sum(xs.len(), 0.0, &|i| xs[i]);
        assert_eq!(serial.to_bits(), parallel.to_bits());
    }

    #[test]
    fn format_round_trips() {
        for x in [0.0, 1.0, -2.5, 1e-20, 3.0e17, 0.1 + 0.2, f64::MIN_POSITIVE] {
            let s = format_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }
}
