//! Radial scalar profiles `r ↦ f(r)` with derivative access.

use std::fmt;
use std::sync::Arc;

use crate::error::{input, Result};
use crate::quadrature::format_f64;

/// Relative tolerance for the endpoint-vanishing check, scaled by `max|f|`.
pub const BOUNDARY_ZERO_RTOL: f64 = 1e-10;

/// Samples used to estimate `max|f|` on `[R1, R2]`.
const SUP_SAMPLES: usize = 257;

#[derive(Clone)]
pub enum ScalarProfile {
    /// `Σ c_k r^k`.
    Polynomial(Vec<f64>),
    /// Natural cubic spline through tabulated samples.
    Tabulated(CubicSpline),
    /// Arbitrary closure; derivatives by 4th-order central differences.
    Function {
        label: String,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for ScalarProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarProfile({})", self.describe())
    }
}

impl ScalarProfile {
    pub fn zero() -> Self {
        Self::Polynomial(Vec::new())
    }

    pub fn constant(c: f64) -> Self {
        Self::Polynomial(vec![c])
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        Self::Polynomial(coeffs)
    }

    pub fn tabulated(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        Ok(Self::Tabulated(CubicSpline::natural(xs, ys)?))
    }

    pub fn function(
        label: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::Function {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    /// `(r - R1)(R2 - r) / ((R2 - R1)/2)^2`, peaking at 1 mid-gap.
    pub fn normalized_bump(r1: f64, r2: f64) -> Self {
        let s = 4.0 / ((r2 - r1) * (r2 - r1));
        Self::Polynomial(vec![-r1 * r2 * s, (r1 + r2) * s, -s])
    }

    /// Parses `poly:c0,c1,...` (coefficients of ascending powers of r).
    pub fn parse(spec: &str) -> Result<Self> {
        let body = spec
            .strip_prefix("poly:")
            .ok_or_else(|| input(format!("profile '{spec}' must start with 'poly:'")))?;
        let coeffs = body
            .split(',')
            .map(|t| {
                let t = t.trim();
                t.parse::<f64>()
                    .ok()
                    .filter(|c| c.is_finite())
                    .ok_or_else(|| input(format!("bad coefficient '{t}' in profile '{spec}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::Polynomial(coeffs))
    }

    pub fn describe(&self) -> String {
        match self {
            Self::Polynomial(c) if c.is_empty() => "poly:0".to_string(),
            Self::Polynomial(c) => {
                let parts: Vec<String> = c.iter().map(|&x| format_f64(x)).collect();
                format!("poly:{}", parts.join(","))
            }
            Self::Tabulated(s) => format!("table:{}", s.xs.len()),
            Self::Function { label, .. } => format!("fn:{label}"),
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        match self {
            Self::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &a| acc * r + a),
            Self::Tabulated(s) => s.eval(r).0,
            Self::Function { f, .. } => f(r),
        }
    }

    pub fn derivative(&self, r: f64) -> f64 {
        match self {
            Self::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, &a)| acc * r + k as f64 * a),
            Self::Tabulated(s) => s.eval(r).1,
            Self::Function { f, .. } => {
                let h = fd_step(r);
                (f(r - 2.0 * h) - 8.0 * f(r - h) + 8.0 * f(r + h) - f(r + 2.0 * h)) / (12.0 * h)
            }
        }
    }

    pub fn second_derivative(&self, r: f64) -> f64 {
        match self {
            Self::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(2)
                .rev()
                .fold(0.0, |acc, (k, &a)| acc * r + (k * (k - 1)) as f64 * a),
            Self::Tabulated(s) => s.eval(r).2,
            Self::Function { f, .. } => {
                let h = fd_step(r).sqrt() * 1e-1;
                (-f(r - 2.0 * h) + 16.0 * f(r - h) - 30.0 * f(r) + 16.0 * f(r + h) - f(r + 2.0 * h))
                    / (12.0 * h * h)
            }
        }
    }

    /// Largest `|f|` over a uniform sample of `[r1, r2]`.
    pub fn sup_norm(&self, r1: f64, r2: f64) -> f64 {
        (0..SUP_SAMPLES)
            .map(|k| r1 + (r2 - r1) * k as f64 / (SUP_SAMPLES - 1) as f64)
            .map(|r| self.value(r).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_identically_zero(&self, r1: f64, r2: f64) -> bool {
        self.sup_norm(r1, r2) == 0.0
    }

    /// Requires `f(R1) = f(R2) = 0` up to `1e-10 · max|f|`.
    pub fn check_vanishes_at(&self, r1: f64, r2: f64) -> Result<()> {
        let scale = self.sup_norm(r1, r2);
        let tol = BOUNDARY_ZERO_RTOL * scale;
        let (a, b) = (self.value(r1), self.value(r2));
        if a.abs() > tol || b.abs() > tol {
            return Err(input(format!(
                "profile {} must vanish at both radii: f({r1})={a}, f({r2})={b}",
                self.describe()
            )));
        }
        Ok(())
    }
}

fn fd_step(r: f64) -> f64 {
    1e-3 * r.abs().max(1.0)
}

/// Natural cubic spline; extrapolates with the end cubic pieces.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn natural(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n < 3 || ys.len() != n {
            return Err(input(
                "a tabulated profile needs at least 3 (r, f) pairs of equal length",
            ));
        }
        if xs
            .windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
            || xs.iter().chain(&ys).any(|v| !v.is_finite())
        {
            return Err(input(
                "tabulated radii must be finite and strictly increasing",
            ));
        }
        // Thomas algorithm for the second-derivative system.
        let mut m = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            let a = h0;
            let b = 2.0 * (h0 + h1);
            let cc = h1;
            let rhs = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
            let denom = b - a * c[i - 1];
            c[i] = cc / denom;
            d[i] = (rhs - a * d[i - 1]) / denom;
        }
        for i in (1..n - 1).rev() {
            m[i] = d[i] - c[i] * m[i + 1];
        }
        Ok(Self { xs, ys, m })
    }

    /// Value, first and second derivative.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let n = self.xs.len();
        let i = match self.xs.partition_point(|&t| t <= x) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        let v = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let dv = (y1 - y0) / h + ((1.0 - 3.0 * a * a) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        let d2v = a * m0 + b * m1;
        (v, dv, d2v)
    }
}
