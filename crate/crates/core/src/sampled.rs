//! Cartesian field samples on structured polar/spherical grids.
//!
//! Text format: a header `polar-grid R1 R2 Nr Ntheta` or
//! `spherical-grid R1 R2 Nr Nchi Ntheta`, then one line per node holding the
//! node's curvilinear coordinates (`r θ` or `r χ θ`) followed by the
//! Cartesian components. Nodes are ordered with `r` outermost and `θ`
//! innermost. Radii are uniform including both endpoints, `θ_j = 2πj/Nθ`,
//! and `χ_k = π(k + ½)/Nχ` (cell-centred, so no node sits on the axis).

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use nalgebra::{Vector2, Vector3};

use crate::coords::{polar_frame, polar_point, spherical_frame, spherical_point};
use crate::error::{input, Error, Result};
use crate::fields::Field;
use crate::quadrature::format_f64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampledGrid {
    Polar {
        r1: f64,
        r2: f64,
        n_r: usize,
        n_theta: usize,
    },
    Spherical {
        r1: f64,
        r2: f64,
        n_r: usize,
        n_chi: usize,
        n_theta: usize,
    },
}

impl SampledGrid {
    pub fn polar(r1: f64, r2: f64, n_r: usize, n_theta: usize) -> Result<Self> {
        let g = Self::Polar {
            r1,
            r2,
            n_r,
            n_theta,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn spherical(r1: f64, r2: f64, n_r: usize, n_chi: usize, n_theta: usize) -> Result<Self> {
        let g = Self::Spherical {
            r1,
            r2,
            n_r,
            n_chi,
            n_theta,
        };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<()> {
        let (r1, r2) = self.radii();
        if !(r1.is_finite() && r2.is_finite() && 0.0 < r1 && r1 < r2) {
            return Err(input(format!(
                "grid radii must satisfy 0 < R1 < R2, got ({r1}, {r2})"
            )));
        }
        match *self {
            Self::Polar { n_r, n_theta, .. } => {
                if n_r < 5 || n_theta < 4 {
                    return Err(input("polar grid needs Nr >= 5 and Ntheta >= 4"));
                }
            }
            Self::Spherical {
                n_r,
                n_chi,
                n_theta,
                ..
            } => {
                if n_r < 5 || n_chi < 4 || n_theta < 4 || n_theta % 2 != 0 {
                    return Err(input(
                        "spherical grid needs Nr >= 5, Nchi >= 4 and an even Ntheta >= 4",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Polar { .. } => 2,
            Self::Spherical { .. } => 3,
        }
    }

    pub fn radii(&self) -> (f64, f64) {
        match *self {
            Self::Polar { r1, r2, .. } | Self::Spherical { r1, r2, .. } => (r1, r2),
        }
    }

    pub fn n_r(&self) -> usize {
        match *self {
            Self::Polar { n_r, .. } | Self::Spherical { n_r, .. } => n_r,
        }
    }

    pub fn n_theta(&self) -> usize {
        match *self {
            Self::Polar { n_theta, .. } | Self::Spherical { n_theta, .. } => n_theta,
        }
    }

    /// 1 for polar grids.
    pub fn n_chi(&self) -> usize {
        match *self {
            Self::Polar { .. } => 1,
            Self::Spherical { n_chi, .. } => n_chi,
        }
    }

    pub fn node_count(&self) -> usize {
        self.n_r() * self.n_chi() * self.n_theta()
    }

    pub fn dr(&self) -> f64 {
        let (r1, r2) = self.radii();
        (r2 - r1) / (self.n_r() - 1) as f64
    }

    pub fn radius(&self, i: usize) -> f64 {
        let (r1, r2) = self.radii();
        if i + 1 == self.n_r() {
            r2
        } else {
            r1 + i as f64 * self.dr()
        }
    }

    pub fn theta(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_theta() as f64
    }

    pub fn chi(&self, k: usize) -> f64 {
        PI * (k as f64 + 0.5) / self.n_chi() as f64
    }

    /// Flat index of node `(i, k, j)`; `k` is ignored (use 0) on polar grids.
    pub fn index(&self, i: usize, k: usize, j: usize) -> usize {
        (i * self.n_chi() + k) * self.n_theta() + j
    }

    /// `(i, k, j)` of a flat index.
    pub fn unflatten(&self, idx: usize) -> (usize, usize, usize) {
        let nt = self.n_theta();
        let nc = self.n_chi();
        (idx / (nt * nc), (idx / nt) % nc, idx % nt)
    }

    pub fn coords(&self, idx: usize) -> Vec<f64> {
        let (i, k, j) = self.unflatten(idx);
        match self {
            Self::Polar { .. } => vec![self.radius(i), self.theta(j)],
            Self::Spherical { .. } => vec![self.radius(i), self.chi(k), self.theta(j)],
        }
    }

    fn header(&self) -> String {
        match *self {
            Self::Polar {
                r1,
                r2,
                n_r,
                n_theta,
            } => {
                format!(
                    "polar-grid {} {} {n_r} {n_theta}",
                    format_f64(r1),
                    format_f64(r2)
                )
            }
            Self::Spherical {
                r1,
                r2,
                n_r,
                n_chi,
                n_theta,
            } => format!(
                "spherical-grid {} {} {n_r} {n_chi} {n_theta}",
                format_f64(r1),
                format_f64(r2)
            ),
        }
    }
}

/// Cartesian components sampled at every grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCartesianField {
    grid: SampledGrid,
    values: Vec<f64>,
}

impl SampledCartesianField {
    pub fn new(grid: SampledGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() * grid.dim() {
            return Err(input(format!(
                "expected {} component values, got {}",
                grid.node_count() * grid.dim(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(input("sampled components must be finite"));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &SampledGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// Cartesian components at node `idx`.
    pub fn node_value(&self, idx: usize) -> &[f64] {
        let d = self.dim();
        &self.values[idx * d..(idx + 1) * d]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.grid.header())?;
        for idx in 0..self.grid.node_count() {
            let mut parts: Vec<String> =
                self.grid.coords(idx).into_iter().map(format_f64).collect();
            parts.extend(self.node_value(idx).iter().map(|&v| format_f64(v)));
            writeln!(w, "{}", parts.join(" "))?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("formatter emits ASCII")
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader
            .lines()
            .enumerate()
            .map(|(n, l)| (n + 1, l))
            .filter(|(_, l)| l.as_ref().map(|s| !s.trim().is_empty()).unwrap_or(true));
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty file".into(),
        })?;
        let header = header?;
        let grid = parse_header(&header).map_err(|message| Error::Parse {
            line: hline,
            message,
        })?;
        let d = grid.dim();
        let mut values = Vec::with_capacity(grid.node_count() * d);
        for idx in 0..grid.node_count() {
            let (line, text) = lines.next().ok_or(Error::Parse {
                line: hline + idx + 1,
                message: format!("expected {} node lines, found {idx}", grid.node_count()),
            })?;
            let text = text?;
            let nums = text
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| format!("bad number '{t}'")))
                .collect::<std::result::Result<Vec<f64>, String>>()
                .map_err(|message| Error::Parse { line, message })?;
            if nums.len() != 2 * d {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} numbers, got {}", 2 * d, nums.len()),
                });
            }
            for (a, b) in grid.coords(idx).iter().zip(&nums[..d]) {
                if (a - b).abs() > 1e-9 * a.abs().max(1.0) {
                    return Err(Error::Parse {
                        line,
                        message: format!("coordinate {b} does not match grid node {a}"),
                    });
                }
            }
            if nums[d..].iter().any(|v| !v.is_finite()) {
                return Err(Error::Parse {
                    line,
                    message: "non-finite component".into(),
                });
            }
            values.extend_from_slice(&nums[d..]);
        }
        if let Some((line, _)) = lines.next() {
            return Err(Error::Parse {
                line,
                message: "trailing data after the last node".into(),
            });
        }
        Self::new(grid, values)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::read_from(text.as_bytes())
    }

    /// Interpolated Cartesian components at a Cartesian point.
    pub fn interpolator(&self) -> Interpolator<'_> {
        Interpolator::new(self)
    }

    /// Divergence at node `(i, k, j)` from 4th-order central differences in
    /// `r` (and `χ`) and spectral differentiation in `θ`. Requires
    /// `2 <= i <= Nr - 3`.
    pub fn divergence_at_node(&self, i: usize, k: usize, j: usize) -> Result<f64> {
        let g = &self.grid;
        if i < 2 || i + 3 > g.n_r() || k >= g.n_chi() || j >= g.n_theta() {
            return Err(Error::Domain(format!(
                "node ({i}, {k}, {j}) is not a grid-interior node"
            )));
        }
        let d = self.dim();
        let h = g.dr();
        let r = g.radius(i);
        let comp = |i: usize, k: usize, j: usize, c: usize| self.values[g.index(i, k, j) * d + c];
        let fd = |f: &dyn Fn(isize) -> f64, h: f64| {
            (f(-2) - 8.0 * f(-1) + 8.0 * f(1) - f(2)) / (12.0 * h)
        };
        let ring_deriv = |i: usize, k: usize, c: usize| {
            let samples: Vec<f64> = (0..g.n_theta()).map(|jj| comp(i, k, jj, c)).collect();
            TrigSeries::fit(&samples).derivative(g.theta(j))
        };
        match g {
            SampledGrid::Polar { .. } => {
                let q = polar_frame(g.theta(j));
                let dr =
                    Vector2::from_fn(|c, _| fd(&|o| comp((i as isize + o) as usize, 0, j, c), h));
                let dt = Vector2::from_fn(|c, _| ring_deriv(i, 0, c));
                Ok(q.column(0).dot(&dr) + q.column(1).dot(&dt) / r)
            }
            SampledGrid::Spherical { n_chi, n_theta, .. } => {
                let chi = g.chi(k);
                let q = spherical_frame(chi, g.theta(j));
                let dchi_step = PI / *n_chi as f64;
                let meridian = |o: isize, c: usize| {
                    let kk = k as isize + o;
                    let n = *n_chi as isize;
                    if kk < 0 {
                        comp(i, (-kk - 1) as usize, (j + n_theta / 2) % n_theta, c)
                    } else if kk >= n {
                        comp(i, (2 * n - 1 - kk) as usize, (j + n_theta / 2) % n_theta, c)
                    } else {
                        comp(i, kk as usize, j, c)
                    }
                };
                let dr =
                    Vector3::from_fn(|c, _| fd(&|o| comp((i as isize + o) as usize, k, j, c), h));
                let dchi = Vector3::from_fn(|c, _| fd(&|o| meridian(o, c), dchi_step));
                let dt = Vector3::from_fn(|c, _| ring_deriv(i, k, c));
                Ok(q.column(0).dot(&dr)
                    + q.column(1).dot(&dchi) / r
                    + q.column(2).dot(&dt) / (r * chi.sin()))
            }
        }
    }

    /// Largest `|div|` over grid-interior nodes.
    pub fn max_interior_divergence(&self) -> Result<f64> {
        let g = &self.grid;
        let mut worst: f64 = 0.0;
        for i in 2..g.n_r() - 2 {
            for k in 0..g.n_chi() {
                for j in 0..g.n_theta() {
                    worst = worst.max(self.divergence_at_node(i, k, j)?.abs());
                }
            }
        }
        Ok(worst)
    }
}

fn parse_header(line: &str) -> std::result::Result<SampledGrid, String> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| format!("bad radius '{t}'"));
    let count = |t: &str| {
        t.parse::<usize>()
            .map_err(|_| format!("bad node count '{t}'"))
    };
    let grid = match toks.as_slice() {
        ["polar-grid", r1, r2, nr, nt] => {
            SampledGrid::polar(num(r1)?, num(r2)?, count(nr)?, count(nt)?)
        }
        ["spherical-grid", r1, r2, nr, nc, nt] => {
            SampledGrid::spherical(num(r1)?, num(r2)?, count(nr)?, count(nc)?, count(nt)?)
        }
        _ => return Err(format!("unrecognised header '{line}'")),
    };
    grid.map_err(|e| e.to_string())
}

impl Field<2> {
    pub fn sample_polar(&self, n_r: usize, n_theta: usize) -> Result<SampledCartesianField> {
        let g = self.geometry();
        self.sample(SampledGrid::polar(g.r1(), g.r2(), n_r, n_theta)?)
    }

    pub fn sample(&self, grid: SampledGrid) -> Result<SampledCartesianField> {
        let SampledGrid::Polar { .. } = grid else {
            return Err(input("a planar field needs a polar grid"));
        };
        let mut values = Vec::with_capacity(2 * grid.node_count());
        for idx in 0..grid.node_count() {
            let (i, _, j) = grid.unflatten(idx);
            let v = self.value(&polar_point(grid.radius(i), grid.theta(j)));
            values.extend_from_slice(v.as_slice());
        }
        SampledCartesianField::new(grid, values)
    }
}

impl Field<3> {
    pub fn sample_spherical(
        &self,
        n_r: usize,
        n_chi: usize,
        n_theta: usize,
    ) -> Result<SampledCartesianField> {
        let g = self.geometry();
        self.sample(SampledGrid::spherical(g.r1(), g.r2(), n_r, n_chi, n_theta)?)
    }

    pub fn sample(&self, grid: SampledGrid) -> Result<SampledCartesianField> {
        let SampledGrid::Spherical { .. } = grid else {
            return Err(input("a spatial field needs a spherical grid"));
        };
        let mut values = Vec::with_capacity(3 * grid.node_count());
        for idx in 0..grid.node_count() {
            let (i, k, j) = grid.unflatten(idx);
            let v = self.value(&spherical_point(grid.radius(i), grid.chi(k), grid.theta(j)));
            values.extend_from_slice(v.as_slice());
        }
        SampledCartesianField::new(grid, values)
    }
}

/// Real trigonometric interpolant of equispaced periodic samples.
#[derive(Debug, Clone)]
pub(crate) struct TrigSeries {
    a: Vec<f64>,
    b: Vec<f64>,
    nyquist: f64,
    n: usize,
}

impl TrigSeries {
    pub(crate) fn fit(samples: &[f64]) -> Self {
        let n = samples.len();
        let kmax = (n - 1) / 2;
        let nf = n as f64;
        let mut a = vec![0.0; kmax + 1];
        let mut b = vec![0.0; kmax + 1];
        for (k, (ak, bk)) in a.iter_mut().zip(b.iter_mut()).enumerate() {
            let (mut sa, mut sb) = (0.0, 0.0);
            for (j, &f) in samples.iter().enumerate() {
                // Index arithmetic keeps the phase exact for large k·j.
                let ph = 2.0 * PI * ((k * j) % n) as f64 / nf;
                sa += f * ph.cos();
                sb += f * ph.sin();
            }
            let scale = if k == 0 { 1.0 / nf } else { 2.0 / nf };
            *ak = sa * scale;
            *bk = sb * scale;
        }
        let nyquist = if n.is_multiple_of(2) {
            samples
                .iter()
                .enumerate()
                .map(|(j, &f)| if j % 2 == 0 { f } else { -f })
                .sum::<f64>()
                / nf
        } else {
            0.0
        };
        Self { a, b, nyquist, n }
    }

    pub(crate) fn eval(&self, theta: f64) -> f64 {
        let (s1, c1) = theta.sin_cos();
        let (mut s, mut c) = (0.0, 1.0);
        let mut acc = self.a[0];
        for k in 1..self.a.len() {
            (s, c) = (s * c1 + c * s1, c * c1 - s * s1);
            acc += self.a[k] * c + self.b[k] * s;
        }
        if self.nyquist != 0.0 {
            acc += self.nyquist * (0.5 * self.n as f64 * theta).cos();
        }
        acc
    }

    pub(crate) fn derivative(&self, theta: f64) -> f64 {
        let mut acc = 0.0;
        for k in 1..self.a.len() {
            let (s, c) = (k as f64 * theta).sin_cos();
            acc += k as f64 * (self.b[k] * c - self.a[k] * s);
        }
        if self.nyquist != 0.0 {
            let h = 0.5 * self.n as f64;
            acc -= self.nyquist * h * (h * theta).sin();
        }
        acc
    }
}

/// Lagrange weights for the 4-point stencil starting at integer `s` and
/// evaluated at fractional index `t`.
fn cubic_weights(t: f64, s: isize) -> [f64; 4] {
    let x = t - s as f64;
    [
        -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0,
        x * (x - 2.0) * (x - 3.0) / 2.0,
        -x * (x - 1.0) * (x - 3.0) / 2.0,
        x * (x - 1.0) * (x - 2.0) / 6.0,
    ]
}

fn radial_stencil(grid: &SampledGrid, r: f64) -> (usize, [f64; 4]) {
    let (r1, _) = grid.radii();
    let t = (r - r1) / grid.dr();
    let s = (t.floor() as isize - 1).clamp(0, grid.n_r() as isize - 4);
    (s as usize, cubic_weights(t, s))
}

/// Continuous interpolant of a sampled field: cubic in `r`; trigonometric in
/// `θ` on polar grids; cubic in `χ` (reflected across the poles) and
/// periodic cubic in `θ` on spherical grids.
pub struct Interpolator<'a> {
    field: &'a SampledCartesianField,
    rings: Vec<TrigSeries>,
}

impl<'a> Interpolator<'a> {
    fn new(field: &'a SampledCartesianField) -> Self {
        let g = &field.grid;
        let rings = match g {
            SampledGrid::Polar { n_r, n_theta, .. } => (0..*n_r)
                .flat_map(|i| {
                    (0..2).map(move |c| {
                        let samples: Vec<f64> = (0..*n_theta)
                            .map(|j| field.values[g.index(i, 0, j) * 2 + c])
                            .collect();
                        TrigSeries::fit(&samples)
                    })
                })
                .collect(),
            SampledGrid::Spherical { .. } => Vec::new(),
        };
        Self { field, rings }
    }

    pub fn eval_2d(&self, x: &Vector2<f64>) -> Vector2<f64> {
        let g = &self.field.grid;
        let (r, theta) = (x.norm(), x.y.atan2(x.x));
        let (s, w) = radial_stencil(g, r);
        let mut out = Vector2::zeros();
        for (o, wi) in w.iter().enumerate() {
            for c in 0..2 {
                out[c] += wi * self.rings[(s + o) * 2 + c].eval(theta);
            }
        }
        out
    }

    pub fn eval_3d(&self, x: &Vector3<f64>) -> Vector3<f64> {
        let g = &self.field.grid;
        let (n_chi, n_theta) = (g.n_chi() as isize, g.n_theta() as isize);
        let r = x.norm();
        let chi = x.x.hypot(x.y).atan2(x.z);
        let theta = x.y.atan2(x.x).rem_euclid(2.0 * PI);
        let (s, wr) = radial_stencil(g, r);
        let tc = chi / (PI / n_chi as f64) - 0.5;
        let sc = tc.floor() as isize - 1;
        let wc = cubic_weights(tc, sc);
        let tt = theta / (2.0 * PI / n_theta as f64);
        let st = tt.floor() as isize - 1;
        let wt = cubic_weights(tt, st);
        let mut out = Vector3::zeros();
        for (oc, wck) in wc.iter().enumerate() {
            let kk = sc + oc as isize;
            let (k, shift) = if kk < 0 {
                (-kk - 1, n_theta / 2)
            } else if kk >= n_chi {
                (2 * n_chi - 1 - kk, n_theta / 2)
            } else {
                (kk, 0)
            };
            for (ot, wtj) in wt.iter().enumerate() {
                let j = (st + ot as isize + shift).rem_euclid(n_theta) as usize;
                for (or, wri) in wr.iter().enumerate() {
                    let idx = g.index(s + or, k as usize, j);
                    let wgt = wri * wck * wtj;
                    let v = self.field.node_value(idx);
                    out += Vector3::new(v[0], v[1], v[2]) * wgt;
                }
            }
        }
        out
    }
}
