//! Vector fields on annuli and shells.
//!
//! Every field is stored as a Cartesian evaluator returning a [`Jet`] (value
//! plus Jacobian). Fields defined through polar or spherical components are
//! converted on evaluation, so rotation and averaging act uniformly.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul};
use std::sync::Arc;

use nalgebra::{Matrix3, SMatrix, SVector, Vector2, Vector3};

use crate::coords::{
    eval_polar, eval_spherical, polar_frame, polar_point, radial_frame_2d, radial_frame_3d,
    spherical_frame, spherical_point, PolarJet, SphericalJet,
};
use crate::error::{input, Result};
use crate::geometry::{AnnulusGeometry, RadialShell, ShellGeometry};
use crate::profile::ScalarProfile;

/// Cartesian value and Jacobian, `jacobian[(i, j)] = ∂u_i/∂x_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<const D: usize> {
    pub value: SVector<f64, D>,
    pub jacobian: SMatrix<f64, D, D>,
}

impl<const D: usize> Jet<D> {
    pub fn zero() -> Self {
        Self {
            value: SVector::zeros(),
            jacobian: SMatrix::zeros(),
        }
    }

    /// Pushes the jet forward under `y = R x`: value `R u`, Jacobian `R J Rᵀ`.
    pub fn rotated(&self, rot: &SMatrix<f64, D, D>) -> Self {
        Self {
            value: rot * self.value,
            jacobian: rot * self.jacobian * rot.transpose(),
        }
    }

    pub fn divergence(&self) -> f64 {
        self.jacobian.trace()
    }
}

impl<const D: usize> Add for Jet<D> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            value: self.value + rhs.value,
            jacobian: self.jacobian + rhs.jacobian,
        }
    }
}

impl<const D: usize> Mul<f64> for Jet<D> {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self {
            value: self.value * s,
            jacobian: self.jacobian * s,
        }
    }
}

type Evaluator<const D: usize> = Arc<dyn Fn(&SVector<f64, D>) -> Jet<D> + Send + Sync>;

/// A vector field on a radial shell with derivative access.
#[derive(Clone)]
pub struct Field<const D: usize> {
    geometry: RadialShell<D>,
    label: String,
    analytic: bool,
    eval: Evaluator<D>,
}

/// Field on an annulus, described in the text by polar components.
pub type PolarField = Field<2>;
/// Field on a spherical shell, described by `(u_r, u_χ, u_θ)`.
pub type SphericalField = Field<3>;

impl<const D: usize> fmt::Debug for Field<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("dim", &D)
            .field("geometry", &self.geometry)
            .field("label", &self.label)
            .field("analytic", &self.analytic)
            .finish()
    }
}

impl<const D: usize> Field<D> {
    pub fn from_fn(
        geometry: RadialShell<D>,
        label: impl Into<String>,
        analytic: bool,
        eval: impl Fn(&SVector<f64, D>) -> Jet<D> + Send + Sync + 'static,
    ) -> Self {
        Self {
            geometry,
            label: label.into(),
            analytic,
            eval: Arc::new(eval),
        }
    }

    pub fn geometry(&self) -> &RadialShell<D> {
        &self.geometry
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// True when derivatives are hand-differentiated closed forms (or exact
    /// finite sums of such).
    pub fn is_analytic(&self) -> bool {
        self.analytic
    }

    pub fn jet(&self, x: &SVector<f64, D>) -> Jet<D> {
        (self.eval)(x)
    }

    pub fn value(&self, x: &SVector<f64, D>) -> SVector<f64, D> {
        (self.eval)(x).value
    }

    /// `a·self + b·other`, on `self`'s geometry.
    pub fn combine(&self, a: f64, other: &Field<D>, b: f64) -> Field<D> {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        Field {
            geometry: self.geometry,
            label: format!("{a}*({})+{b}*({})", self.label, other.label),
            analytic: self.analytic && other.analytic,
            eval: Arc::new(move |x| f(x) * a + g(x) * b),
        }
    }

    pub fn scaled(&self, a: f64) -> Field<D> {
        let f = self.eval.clone();
        Field {
            geometry: self.geometry,
            label: format!("{a}*({})", self.label),
            analytic: self.analytic,
            eval: Arc::new(move |x| f(x) * a),
        }
    }
}

impl Field<2> {
    pub fn from_polar(
        geometry: AnnulusGeometry,
        label: impl Into<String>,
        f: impl Fn(f64, f64) -> PolarJet + Send + Sync + 'static,
    ) -> Self {
        Self::from_fn(geometry, label, true, move |x| eval_polar(x, &f))
    }

    pub fn at_polar(&self, r: f64, theta: f64) -> Jet<2> {
        self.jet(&polar_point(r, theta))
    }

    /// `(u_r, u_θ)` at polar coordinates `(r, θ)`.
    pub fn polar_components(&self, r: f64, theta: f64) -> (f64, f64) {
        let c = polar_frame(theta).transpose() * self.jet(&polar_point(r, theta)).value;
        (c.x, c.y)
    }

    /// Frame components at a Cartesian point.
    pub fn polar_components_at(&self, x: &Vector2<f64>) -> (f64, f64) {
        let c = radial_frame_2d(x).transpose() * self.value(x);
        (c.x, c.y)
    }
}

impl Field<3> {
    pub fn from_spherical(
        geometry: ShellGeometry,
        label: impl Into<String>,
        f: impl Fn(f64, f64, f64) -> SphericalJet + Send + Sync + 'static,
    ) -> Self {
        Self::from_fn(geometry, label, true, move |x| eval_spherical(x, &f))
    }

    pub fn at_spherical(&self, r: f64, chi: f64, theta: f64) -> Jet<3> {
        self.jet(&spherical_point(r, chi, theta))
    }

    /// `[u_r, u_χ, u_θ]` at spherical coordinates.
    pub fn spherical_components(&self, r: f64, chi: f64, theta: f64) -> [f64; 3] {
        let c = spherical_frame(chi, theta).transpose() * self.at_spherical(r, chi, theta).value;
        [c.x, c.y, c.z]
    }

    pub fn spherical_components_at(&self, x: &Vector3<f64>) -> [f64; 3] {
        let c = radial_frame_3d(x).transpose() * self.value(x);
        [c.x, c.y, c.z]
    }
}

/// Radial factors of the mode-`m` test fields on `[R1, R2]`:
/// `U(r) = (L/2πr)(cos(2π(r−R1)/L) − 1)`, `W(r) = sin(2π(r−R1)/L)`,
/// `L = R2 − R1`. They satisfy `(rU)' = −W`.
#[derive(Debug, Clone, Copy)]
pub struct TestProfiles {
    r1: f64,
    width: f64,
}

impl TestProfiles {
    pub fn new<const D: usize>(geom: &RadialShell<D>) -> Self {
        Self {
            r1: geom.r1(),
            width: geom.width(),
        }
    }

    fn phase(&self, r: f64) -> f64 {
        2.0 * PI * (r - self.r1) / self.width
    }

    pub fn u(&self, r: f64) -> f64 {
        self.width / (2.0 * PI * r) * (self.phase(r).cos() - 1.0)
    }

    pub fn du(&self, r: f64) -> f64 {
        -(self.u(r) + self.w(r)) / r
    }

    pub fn w(&self, r: f64) -> f64 {
        self.phase(r).sin()
    }

    pub fn dw(&self, r: f64) -> f64 {
        2.0 * PI / self.width * self.phase(r).cos()
    }
}

fn check_mode(m: u32) -> Result<f64> {
    if m < 1 {
        return Err(input("mode m must be at least 1"));
    }
    Ok(m as f64)
}

/// `u_r = U(r)·m cos mθ`, `u_θ = W(r)·sin mθ`: solenoidal, vanishing on
/// both circles.
pub fn test_field_2d(geom: &AnnulusGeometry, m: u32) -> Result<PolarField> {
    let mf = check_mode(m)?;
    let p = TestProfiles::new(geom);
    Ok(Field::from_polar(
        *geom,
        format!("test2d(m={m})"),
        move |r, t| {
            let (s, c) = (mf * t).sin_cos();
            let (u, w) = (p.u(r), p.w(r));
            PolarJet {
                ur: u * mf * c,
                ut: w * s,
                dr_ur: p.du(r) * mf * c,
                dt_ur: -u * mf * mf * s,
                dr_ut: p.dw(r) * s,
                dt_ut: w * mf * c,
            }
        },
    ))
}

/// `u_r = m (U/r) cos mθ sin χ`, `u_χ = 0`, `u_θ = (W/r) sin mθ sin²χ`.
pub fn test_field_3d(geom: &ShellGeometry, m: u32) -> Result<SphericalField> {
    let mf = check_mode(m)?;
    let p = TestProfiles::new(geom);
    Ok(Field::from_spherical(
        *geom,
        format!("test3d(m={m})"),
        move |r, chi, t| {
            let (s, c) = (mf * t).sin_cos();
            let (sc, cc) = chi.sin_cos();
            let (u, w) = (p.u(r), p.w(r));
            let ut = u / r;
            let dut = -(2.0 * u + w) / (r * r);
            let wr = w / r;
            let dwr = (p.dw(r) * r - w) / (r * r);
            SphericalJet {
                c: [mf * ut * c * sc, 0.0, wr * s * sc * sc],
                dr: [mf * dut * c * sc, 0.0, dwr * s * sc * sc],
                dchi: [mf * ut * c * cc, 0.0, wr * s * 2.0 * sc * cc],
                dth: [-mf * mf * ut * s * sc, 0.0, wr * mf * c * sc * sc],
            }
        },
    ))
}

/// Purely azimuthal `u_θ = f(r)`; requires `f(R1) = f(R2) = 0`.
pub fn inflow_field_2d(geom: &AnnulusGeometry, f: &ScalarProfile) -> Result<PolarField> {
    f.check_vanishes_at(geom.r1(), geom.r2())?;
    let f = f.clone();
    let label = format!("inflow2d({})", f.describe());
    Ok(Field::from_polar(*geom, label, move |r, _| PolarJet {
        ut: f.value(r),
        dr_ut: f.derivative(r),
        ..Default::default()
    }))
}

/// `u = f(r) sin χ e_θ` with `e_θ` the azimuthal unit vector.
pub fn inflow_field_3d(geom: &ShellGeometry, f: &ScalarProfile) -> Result<SphericalField> {
    f.check_vanishes_at(geom.r1(), geom.r2())?;
    let f = f.clone();
    let label = format!("inflow3d({})", f.describe());
    Ok(Field::from_spherical(*geom, label, move |r, chi, _| {
        let (sc, cc) = chi.sin_cos();
        let (fv, df) = (f.value(r), f.derivative(r));
        SphericalJet {
            c: [0.0, 0.0, fv * sc],
            dr: [0.0, 0.0, df * sc],
            dchi: [0.0, 0.0, fv * cc],
            dth: [0.0; 3],
        }
    }))
}

/// Rotation-invariant extension `(Φ/2πr) e_r + v(r) e_θ`.
pub fn averaged_extension_2d(geom: &AnnulusGeometry, phi: f64, v: &ScalarProfile) -> PolarField {
    let v = v.clone();
    let a = phi / (2.0 * PI);
    let label = format!("avgext2d(phi={phi},v={})", v.describe());
    Field::from_polar(*geom, label, move |r, _| PolarJet {
        ur: a / r,
        ut: v.value(r),
        dr_ur: -a / (r * r),
        dr_ut: v.derivative(r),
        ..Default::default()
    })
}

/// Radial extension `Φ/(4πr²) e_r`.
pub fn averaged_extension_3d(geom: &ShellGeometry, phi: f64) -> SphericalField {
    let a = phi / (4.0 * PI);
    Field::from_spherical(*geom, format!("avgext3d(phi={phi})"), move |r, _, _| {
        SphericalJet {
            c: [a / (r * r), 0.0, 0.0],
            dr: [-2.0 * a / (r * r * r), 0.0, 0.0],
            ..Default::default()
        }
    })
}

/// One angular mode of a stream function, `a(r) cos kθ + b(r) sin kθ`.
#[derive(Debug, Clone)]
pub struct StreamMode {
    pub k: u32,
    pub cos_part: ScalarProfile,
    pub sin_part: ScalarProfile,
}

/// Single-valued stream function `ψ(r, θ)`; its perturbation velocity is
/// `u_r = ψ_θ / r`, `u_θ = −ψ_r`.
#[derive(Debug, Clone, Default)]
pub struct StreamPerturbation {
    pub modes: Vec<StreamMode>,
}

impl StreamPerturbation {
    pub fn none() -> Self {
        Self::default()
    }

    /// Swirl plus modes 1 and 3; not rotationally symmetric.
    pub fn sample_non_symmetric() -> Self {
        let p = ScalarProfile::polynomial;
        Self {
            modes: vec![
                StreamMode {
                    k: 0,
                    cos_part: p(vec![0.0, 0.0, 0.2]),
                    sin_part: ScalarProfile::zero(),
                },
                StreamMode {
                    k: 1,
                    cos_part: p(vec![0.3, -0.1, 0.05]),
                    sin_part: p(vec![0.0, 0.4]),
                },
                StreamMode {
                    k: 3,
                    cos_part: p(vec![0.1, 0.0, 0.0, 0.02]),
                    sin_part: p(vec![-0.2, 0.1]),
                },
            ],
        }
    }

    /// The `k = 0` part contributes the swirl `−a₀'(r) e_θ`, the only piece
    /// that survives rotational averaging.
    pub fn swirl(&self) -> ScalarProfile {
        let mut coeffs: Vec<f64> = Vec::new();
        let mut other: Vec<ScalarProfile> = Vec::new();
        for mode in self.modes.iter().filter(|m| m.k == 0) {
            match &mode.cos_part {
                ScalarProfile::Polynomial(c) => {
                    for (j, &cj) in c.iter().enumerate().skip(1) {
                        if coeffs.len() < j {
                            coeffs.resize(j, 0.0);
                        }
                        coeffs[j - 1] -= j as f64 * cj;
                    }
                }
                p => other.push(p.clone()),
            }
        }
        if other.is_empty() {
            return ScalarProfile::polynomial(coeffs);
        }
        let poly = ScalarProfile::polynomial(coeffs);
        ScalarProfile::function("stream-swirl", move |r| {
            poly.value(r) - other.iter().map(|p| p.derivative(r)).sum::<f64>()
        })
    }

    /// `(ψ_r, ψ_θ, ψ_rr, ψ_rθ, ψ_θθ)`.
    fn derivatives(&self, r: f64, theta: f64) -> [f64; 5] {
        let mut d = [0.0; 5];
        for mode in &self.modes {
            let k = mode.k as f64;
            let (s, c) = (k * theta).sin_cos();
            let (a, a1, a2) = (
                mode.cos_part.value(r),
                mode.cos_part.derivative(r),
                mode.cos_part.second_derivative(r),
            );
            let (b, b1, b2) = (
                mode.sin_part.value(r),
                mode.sin_part.derivative(r),
                mode.sin_part.second_derivative(r),
            );
            d[0] += a1 * c + b1 * s;
            d[1] += k * (-a * s + b * c);
            d[2] += a2 * c + b2 * s;
            d[3] += k * (-a1 * s + b1 * c);
            d[4] += -k * k * (a * c + b * s);
        }
        d
    }
}

/// `(Φ/2πr) e_r` plus the curl of a stream function: exactly solenoidal,
/// flux `Φ` through every concentric circle, generally not symmetric.
pub fn synthetic_field_2d(
    geom: &AnnulusGeometry,
    phi: f64,
    perturbation: &StreamPerturbation,
) -> PolarField {
    let pert = perturbation.clone();
    let a = phi / (2.0 * PI);
    Field::from_polar(*geom, format!("synthetic2d(phi={phi})"), move |r, t| {
        let [pr, pt, prr, prt, ptt] = pert.derivatives(r, t);
        PolarJet {
            ur: a / r + pt / r,
            ut: -pr,
            dr_ur: -a / (r * r) - pt / (r * r) + prt / r,
            dt_ur: ptt / r,
            dr_ut: -prr,
            dt_ut: -prt,
        }
    })
}

/// Sampled form of [`synthetic_field_2d`] on a polar grid.
pub fn synthetic_extension_2d(
    geom: &AnnulusGeometry,
    phi: f64,
    perturbation: &StreamPerturbation,
    n_r: usize,
    n_theta: usize,
) -> Result<crate::sampled::SampledCartesianField> {
    synthetic_field_2d(geom, phi, perturbation).sample_polar(n_r, n_theta)
}

/// `Φ/(4πr²) e_r + amplitude · curl A` with the fixed potential
/// `A = (z sin y, 0, x²y + y z²/2)`, i.e. the perturbation
/// `(x² + z²/2, sin y − 2xy, −z cos y)`.
pub fn synthetic_field_3d(geom: &ShellGeometry, phi: f64, amplitude: f64) -> SphericalField {
    let radial = averaged_extension_3d(geom, phi);
    let pert = move |x: &Vector3<f64>| {
        let (sy, cy) = x.y.sin_cos();
        Jet {
            value: Vector3::new(x.x * x.x + 0.5 * x.z * x.z, sy - 2.0 * x.x * x.y, -x.z * cy)
                * amplitude,
            jacobian: Matrix3::new(
                2.0 * x.x,
                0.0,
                x.z, //
                -2.0 * x.y,
                cy - 2.0 * x.x,
                0.0, //
                0.0,
                x.z * sy,
                -cy,
            ) * amplitude,
        }
    };
    Field::from_fn(
        *geom,
        format!("synthetic3d(phi={phi},amp={amplitude})"),
        true,
        move |x| radial.jet(x) + pert(x),
    )
}
