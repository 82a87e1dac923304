//! Polar and spherical coordinates, their orthonormal frames, and conversion
//! of curvilinear component jets to Cartesian jets.
//!
//! Spherical coordinates are `(r, χ, θ)` with `χ ∈ [0, π]` the polar angle
//! from the `z` axis and `θ ∈ [0, 2π)` the azimuth.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use crate::fields::Jet;

/// Polar components and their partial derivatives at `(r, θ)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PolarJet {
    pub ur: f64,
    pub ut: f64,
    pub dr_ur: f64,
    pub dt_ur: f64,
    pub dr_ut: f64,
    pub dt_ut: f64,
}

/// Spherical components `[u_r, u_χ, u_θ]` and partials along `r`, `χ`, `θ`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SphericalJet {
    pub c: [f64; 3],
    pub dr: [f64; 3],
    pub dchi: [f64; 3],
    pub dth: [f64; 3],
}

pub fn polar_coords(x: &Vector2<f64>) -> (f64, f64) {
    (x.norm(), x.y.atan2(x.x))
}

pub fn polar_point(r: f64, theta: f64) -> Vector2<f64> {
    Vector2::new(r * theta.cos(), r * theta.sin())
}

/// Columns `e_r`, `e_θ`.
pub fn polar_frame(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

pub fn spherical_coords(x: &Vector3<f64>) -> (f64, f64, f64) {
    let r = x.norm();
    let rho = x.x.hypot(x.y);
    (r, rho.atan2(x.z), x.y.atan2(x.x))
}

pub fn spherical_point(r: f64, chi: f64, theta: f64) -> Vector3<f64> {
    let (sc, cc) = chi.sin_cos();
    let (st, ct) = theta.sin_cos();
    Vector3::new(r * sc * ct, r * sc * st, r * cc)
}

/// Columns `e_r`, `e_χ`, `e_θ`.
pub fn spherical_frame(chi: f64, theta: f64) -> Matrix3<f64> {
    let (sc, cc) = chi.sin_cos();
    let (st, ct) = theta.sin_cos();
    Matrix3::new(
        sc * ct,
        cc * ct,
        -st, //
        sc * st,
        cc * st,
        ct, //
        cc,
        -sc,
        0.0,
    )
}

/// Frame at a Cartesian point (radial direction first).
pub fn radial_frame_2d(x: &Vector2<f64>) -> Matrix2<f64> {
    polar_frame(x.y.atan2(x.x))
}

pub fn radial_frame_3d(x: &Vector3<f64>) -> Matrix3<f64> {
    let (_, chi, theta) = spherical_coords(x);
    spherical_frame(chi, theta)
}

pub fn polar_to_cartesian(r: f64, theta: f64, p: &PolarJet) -> Jet<2> {
    let q = polar_frame(theta);
    // g[(a, b)] = e_a · ∇ (component b), derivative direction first.
    let g = Matrix2::new(p.dr_ur, p.dr_ut, (p.dt_ur - p.ut) / r, (p.dt_ut + p.ur) / r);
    Jet {
        value: q * Vector2::new(p.ur, p.ut),
        jacobian: q * g.transpose() * q.transpose(),
    }
}

/// Below this `sin χ` a point is treated as lying on the polar axis.
const AXIS_TOL: f64 = 1e-12;
const AXIS_NUDGE: f64 = 1e-8;

pub fn spherical_to_cartesian(r: f64, chi: f64, theta: f64, s: &SphericalJet) -> Jet<3> {
    let q = spherical_frame(chi, theta);
    let (sc, cc) = chi.sin_cos();
    let [ur, uc, ut] = s.c;
    let cot = cc / sc;
    let g = Matrix3::new(
        s.dr[0],
        s.dr[1],
        s.dr[2],
        (s.dchi[0] - uc) / r,
        (s.dchi[1] + ur) / r,
        s.dchi[2] / r,
        (s.dth[0] / sc - ut) / r,
        (s.dth[1] / sc - ut * cot) / r,
        (s.dth[2] / sc + ur + uc * cot) / r,
    );
    Jet {
        value: q * Vector3::new(ur, uc, ut),
        jacobian: q * g.transpose() * q.transpose(),
    }
}

/// Builds a Cartesian evaluator from a spherical-component evaluator.
///
/// On the polar axis the angular components are returned as exact zeros and
/// the Jacobian is the limit taken from `θ = 0` just off the axis.
pub fn eval_spherical<F>(x: &Vector3<f64>, f: &F) -> Jet<3>
where
    F: Fn(f64, f64, f64) -> SphericalJet,
{
    let (r, chi, theta) = spherical_coords(x);
    if chi.sin() < AXIS_TOL {
        let on_axis = f(r, chi, theta);
        let nudged = if chi < 1.0 {
            AXIS_NUDGE
        } else {
            std::f64::consts::PI - AXIS_NUDGE
        };
        let mut jet = spherical_to_cartesian(r, nudged, 0.0, &f(r, nudged, 0.0));
        jet.value = Vector3::new(0.0, 0.0, on_axis.c[0] * chi.cos().signum());
        jet
    } else {
        spherical_to_cartesian(r, chi, theta, &f(r, chi, theta))
    }
}

pub fn eval_polar<F>(x: &Vector2<f64>, f: &F) -> Jet<2>
where
    F: Fn(f64, f64) -> PolarJet,
{
    let (r, theta) = polar_coords(x);
    polar_to_cartesian(r, theta, &f(r, theta))
}
