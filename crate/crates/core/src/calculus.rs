//! Vector calculus on radial shells and the domain integrals entering the
//! extension inequality.
//!
//! Domain integrals use Gauss–Legendre in `r` (and in `cos χ`) times the
//! trapezoid rule in periodic angles. Reductions run through
//! [`par_pairwise_sum`], so results are bit-reproducible for any thread
//! count.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix3, SMatrix, SVector, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::coords::{polar_point, radial_frame_2d, radial_frame_3d, spherical_point};
use crate::error::{input, Error, Result};
use crate::fields::{Field, PolarField, SphericalField};
use crate::geometry::RadialShell;
use crate::profile::ScalarProfile;
use crate::quadrature::{par_pairwise_sum, periodic_nodes, GaussLegendre};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub nodes_r: usize,
    pub nodes_theta: usize,
    pub nodes_chi: usize,
    /// Boundary traces must stay below `boundary_rtol · max|u|`.
    pub boundary_rtol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes_r: 64,
            nodes_theta: 128,
            nodes_chi: 64,
            boundary_rtol: 1e-8,
        }
    }
}

/// Probe points per boundary component for the vanishing-trace check.
pub const BOUNDARY_PROBES: usize = 64;

impl QuadratureSpec {
    pub fn new(nodes_r: usize, nodes_theta: usize, nodes_chi: usize) -> Result<Self> {
        let q = Self {
            nodes_r,
            nodes_theta,
            nodes_chi,
            ..Self::default()
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes_r < 8 || self.nodes_theta < 8 || self.nodes_chi < 8 {
            return Err(input("quadrature node counts must all be at least 8"));
        }
        if !(self.boundary_rtol.is_finite() && self.boundary_rtol >= 0.0) {
            return Err(input(
                "boundary tolerance must be a finite non-negative number",
            ));
        }
        Ok(())
    }

    /// Half the nodes in every direction (floored at 8), for error estimates.
    pub fn coarsened(&self) -> Self {
        Self {
            nodes_r: (self.nodes_r / 2).max(8),
            nodes_theta: (self.nodes_theta / 2).max(8),
            nodes_chi: (self.nodes_chi / 2).max(8),
            boundary_rtol: self.boundary_rtol,
        }
    }
}

/// Quadrature nodes, frames and boundary probes for a radial shell.
pub trait RadialDomain<const D: usize> {
    /// Points and weights for `∫_Ω f`.
    fn volume_nodes(&self, q: &QuadratureSpec) -> Vec<(SVector<f64, D>, f64)>;
    /// Points and weights for `∫_{|x| = r0} f dS`.
    fn sphere_nodes(&self, r0: f64, q: &QuadratureSpec) -> Vec<(SVector<f64, D>, f64)>;
    /// Deterministic probe points on both boundary components.
    fn boundary_probes(&self, per_component: usize) -> Vec<SVector<f64, D>>;
    /// Orthonormal curvilinear frame (radial direction first) at `x`.
    fn frame_at(x: &SVector<f64, D>) -> SMatrix<f64, D, D>;
}

impl RadialDomain<2> for RadialShell<2> {
    fn volume_nodes(&self, q: &QuadratureSpec) -> Vec<(Vector2<f64>, f64)> {
        let radial = GaussLegendre::new(q.nodes_r).on_interval(self.r1(), self.r2());
        let angles = periodic_nodes(q.nodes_theta);
        let dt = 2.0 * PI / q.nodes_theta as f64;
        radial
            .iter()
            .flat_map(|&(r, wr)| {
                angles
                    .iter()
                    .map(move |&t| (polar_point(r, t), wr * r * dt))
            })
            .collect()
    }

    fn sphere_nodes(&self, r0: f64, q: &QuadratureSpec) -> Vec<(Vector2<f64>, f64)> {
        let dt = 2.0 * PI / q.nodes_theta as f64;
        periodic_nodes(q.nodes_theta)
            .into_iter()
            .map(|t| (polar_point(r0, t), r0 * dt))
            .collect()
    }

    fn boundary_probes(&self, per_component: usize) -> Vec<Vector2<f64>> {
        let offset = 0.5 / per_component as f64;
        [self.r1(), self.r2()]
            .into_iter()
            .flat_map(|r| {
                (0..per_component).map(move |k| {
                    polar_point(r, 2.0 * PI * (k as f64 / per_component as f64 + offset))
                })
            })
            .collect()
    }

    fn frame_at(x: &Vector2<f64>) -> Matrix2<f64> {
        radial_frame_2d(x)
    }
}

impl RadialDomain<3> for RadialShell<3> {
    fn volume_nodes(&self, q: &QuadratureSpec) -> Vec<(Vector3<f64>, f64)> {
        let radial = GaussLegendre::new(q.nodes_r).on_interval(self.r1(), self.r2());
        let polar = GaussLegendre::new(q.nodes_chi);
        let angles = periodic_nodes(q.nodes_theta);
        let dt = 2.0 * PI / q.nodes_theta as f64;
        let mut out = Vec::with_capacity(q.nodes_r * q.nodes_chi * q.nodes_theta);
        for &(r, wr) in &radial {
            for (&c, &wc) in polar.nodes().iter().zip(polar.weights()) {
                let chi = c.acos();
                for &t in &angles {
                    out.push((spherical_point(r, chi, t), wr * r * r * wc * dt));
                }
            }
        }
        out
    }

    fn sphere_nodes(&self, r0: f64, q: &QuadratureSpec) -> Vec<(Vector3<f64>, f64)> {
        let polar = GaussLegendre::new(q.nodes_chi);
        let angles = periodic_nodes(q.nodes_theta);
        let dt = 2.0 * PI / q.nodes_theta as f64;
        let mut out = Vec::with_capacity(q.nodes_chi * q.nodes_theta);
        for (&c, &wc) in polar.nodes().iter().zip(polar.weights()) {
            let chi = c.acos();
            for &t in &angles {
                out.push((spherical_point(r0, chi, t), r0 * r0 * wc * dt));
            }
        }
        out
    }

    fn boundary_probes(&self, per_component: usize) -> Vec<Vector3<f64>> {
        // Fibonacci lattice on each sphere.
        let golden = PI * (3.0 - 5f64.sqrt());
        let n = per_component as f64;
        [self.r1(), self.r2()]
            .into_iter()
            .flat_map(|r| {
                (0..per_component).map(move |k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / n;
                    spherical_point(r, z.acos(), golden * k as f64)
                })
            })
            .collect()
    }

    fn frame_at(x: &Vector3<f64>) -> Matrix3<f64> {
        radial_frame_3d(x)
    }
}

/// `∫_Ω f` over the field's shell.
pub fn integrate<const D: usize, F>(geom: &RadialShell<D>, q: &QuadratureSpec, f: F) -> f64
where
    RadialShell<D>: RadialDomain<D>,
    F: Fn(&SVector<f64, D>) -> f64 + Sync,
{
    let nodes = geom.volume_nodes(q);
    par_pairwise_sum(nodes.len(), 0.0, &|i| {
        let (x, w) = &nodes[i];
        w * f(x)
    })
}

fn require_interior<const D: usize>(geom: &RadialShell<D>, x: &SVector<f64, D>) -> Result<()> {
    if geom.contains_interior(x) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "|x| = {} is not strictly between {} and {}",
            x.norm(),
            geom.r1(),
            geom.r2()
        )))
    }
}

/// `∇·u` from the field's analytic Jacobian.
pub fn divergence<const D: usize>(field: &Field<D>, x: &SVector<f64, D>) -> Result<f64> {
    require_interior(field.geometry(), x)?;
    Ok(field.jet(x).divergence())
}

/// Jacobian by 4th-order central differences of field values with step `h`.
pub fn jacobian_fd<const D: usize>(
    field: &Field<D>,
    x: &SVector<f64, D>,
    h: f64,
) -> SMatrix<f64, D, D> {
    let mut jac = SMatrix::<f64, D, D>::zeros();
    for j in 0..D {
        let e = SVector::<f64, D>::from_fn(|i, _| if i == j { h } else { 0.0 });
        let d = (field.value(&(x - 2.0 * e)) - 8.0 * field.value(&(x - e))
            + 8.0 * field.value(&(x + e))
            - field.value(&(x + 2.0 * e)))
            / (12.0 * h);
        jac.set_column(j, &d);
    }
    jac
}

/// `∇·u` by finite differences of values only.
pub fn divergence_fd<const D: usize>(field: &Field<D>, x: &SVector<f64, D>, h: f64) -> Result<f64> {
    require_interior(field.geometry(), x)?;
    Ok(jacobian_fd(field, x, h).trace())
}

/// Rate of strain `½(∇V + ∇Vᵀ)` in Cartesian components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricGradient<const D: usize> {
    pub cartesian: SMatrix<f64, D, D>,
}

impl<const D: usize> SymmetricGradient<D> {
    pub fn from_jacobian(j: &SMatrix<f64, D, D>) -> Self {
        Self {
            cartesian: (j + j.transpose()) * 0.5,
        }
    }

    pub fn trace(&self) -> f64 {
        self.cartesian.trace()
    }

    /// Components in the orthonormal frame whose columns are `frame`.
    pub fn in_frame(&self, frame: &SMatrix<f64, D, D>) -> SMatrix<f64, D, D> {
        frame.transpose() * self.cartesian * frame
    }
}

pub fn symmetric_gradient<const D: usize>(
    field: &Field<D>,
    x: &SVector<f64, D>,
) -> Result<SymmetricGradient<D>> {
    require_interior(field.geometry(), x)?;
    Ok(SymmetricGradient::from_jacobian(&field.jet(x).jacobian))
}

/// Rough `max|u|` from a coarse interior sample.
fn sup_estimate<const D: usize>(u: &Field<D>) -> f64
where
    RadialShell<D>: RadialDomain<D>,
{
    let coarse = QuadratureSpec {
        nodes_r: 16,
        nodes_theta: 32,
        nodes_chi: 16,
        boundary_rtol: 0.0,
    };
    u.geometry()
        .volume_nodes(&coarse)
        .iter()
        .map(|(x, _)| u.value(x).norm())
        .fold(0.0, f64::max)
}

/// Largest boundary trace `|u|` over the probe set, and the allowed bound.
pub fn boundary_trace<const D: usize>(u: &Field<D>, q: &QuadratureSpec) -> (f64, f64)
where
    RadialShell<D>: RadialDomain<D>,
{
    let trace = u
        .geometry()
        .boundary_probes(BOUNDARY_PROBES)
        .iter()
        .map(|x| u.value(x).norm())
        .fold(0.0, f64::max);
    (trace, q.boundary_rtol * sup_estimate(u))
}

pub fn check_boundary_vanishing<const D: usize>(u: &Field<D>, q: &QuadratureSpec) -> Result<()>
where
    RadialShell<D>: RadialDomain<D>,
{
    let (trace, bound) = boundary_trace(u, q);
    if trace > bound {
        return Err(input(format!(
            "test field {} does not vanish on the boundary: trace {trace:e} exceeds {bound:e}",
            u.label()
        )));
    }
    Ok(())
}

/// `−∫_Ω u·∇V·u`, the left side of the extension inequality.
pub fn quadratic_form<const D: usize>(v: &Field<D>, u: &Field<D>, q: &QuadratureSpec) -> Result<f64>
where
    RadialShell<D>: RadialDomain<D>,
{
    check_boundary_vanishing(u, q)?;
    Ok(-integrate(u.geometry(), q, |x| {
        let uu = u.value(x);
        uu.dot(&(v.jet(x).jacobian * uu))
    }))
}

/// `−∫_Ω u·𝒟[V]·u`; equals [`quadratic_form`] since the antisymmetric part
/// of `∇V` drops out of the quadratic form pointwise.
pub fn quadratic_form_strain<const D: usize>(
    v: &Field<D>,
    u: &Field<D>,
    q: &QuadratureSpec,
) -> Result<f64>
where
    RadialShell<D>: RadialDomain<D>,
{
    check_boundary_vanishing(u, q)?;
    Ok(-integrate(u.geometry(), q, |x| {
        let uu = u.value(x);
        let s = SymmetricGradient::from_jacobian(&v.jet(x).jacobian);
        uu.dot(&(s.cartesian * uu))
    }))
}

/// `‖∇u‖₂² = ∫_Ω |∇u|²`.
pub fn dirichlet_norm_sq<const D: usize>(u: &Field<D>, q: &QuadratureSpec) -> f64
where
    RadialShell<D>: RadialDomain<D>,
{
    integrate(u.geometry(), q, |x| u.jet(x).jacobian.norm_squared())
}

/// Flux `∫ u·e_r` through the concentric circle/sphere of radius `r0`.
pub fn flux<const D: usize>(field: &Field<D>, r0: f64, q: &QuadratureSpec) -> Result<f64>
where
    RadialShell<D>: RadialDomain<D>,
{
    let g = field.geometry();
    if !(g.r1() <= r0 && r0 <= g.r2()) {
        return Err(input(format!(
            "flux radius {r0} outside [{}, {}]",
            g.r1(),
            g.r2()
        )));
    }
    let nodes = g.sphere_nodes(r0, q);
    Ok(par_pairwise_sum(nodes.len(), 0.0, &|i| {
        let (x, w) = &nodes[i];
        w * field.value(x).dot(x) / r0
    }))
}

/// `∫_Ω (u_r² − u_θ²)/r²`.
pub fn reduced_integral_2d(u: &PolarField, q: &QuadratureSpec) -> f64 {
    integrate(u.geometry(), q, |x| {
        let (ur, ut) = u.polar_components_at(x);
        (ur * ur - ut * ut) / x.norm_squared()
    })
}

/// `∫_Ω (v′ − v/r) u_r u_θ`, the swirl contribution.
pub fn cross_term_2d(v: &ScalarProfile, u: &PolarField, q: &QuadratureSpec) -> f64 {
    integrate(u.geometry(), q, |x| cross_integrand(v, u, x))
}

fn cross_integrand(v: &ScalarProfile, u: &PolarField, x: &Vector2<f64>) -> f64 {
    let r = x.norm();
    let (ur, ut) = u.polar_components_at(x);
    (v.derivative(r) - v.value(r) / r) * ur * ut
}

/// `∫_Ω |(v′ − v/r) u_r u_θ|`, the natural scale of the swirl contribution.
pub fn cross_term_scale_2d(v: &ScalarProfile, u: &PolarField, q: &QuadratureSpec) -> f64 {
    integrate(u.geometry(), q, |x| cross_integrand(v, u, x).abs())
}

/// Extension-inequality left side for `V = (Φ/2πr) e_r + v e_θ`:
/// `(Φ/2π) ∫(u_r² − u_θ²)/r² − ∫(v′ − v/r) u_r u_θ`.
///
/// The strain of the radial part is `∓Φ/(2πr²)` on the polar diagonal and
/// the swirl gives `½(v′ − v/r)` off the diagonal.
pub fn lhs_13(phi: f64, v: &ScalarProfile, u: &PolarField, q: &QuadratureSpec) -> Result<f64> {
    check_boundary_vanishing(u, q)?;
    let radial = integrate(u.geometry(), q, |x| {
        let (ur, ut) = u.polar_components_at(x);
        (ur * ur - ut * ut) / x.norm_squared()
    });
    let swirl = cross_term_2d(v, u, q);
    Ok(phi / (2.0 * PI) * radial - swirl)
}

/// `∫_Ω (2u_r² − u_χ² − u_θ²)/r³`.
pub fn reduced_integral_3d(u: &SphericalField, q: &QuadratureSpec) -> f64 {
    integrate(u.geometry(), q, |x| {
        let [ur, uc, ut] = u.spherical_components_at(x);
        let r = x.norm();
        (2.0 * ur * ur - uc * uc - ut * ut) / (r * r * r)
    })
}

/// Extension-inequality left side for `V = Φ/(4πr²) e_r`:
/// `(Φ/4π) ∫(2u_r² − u_χ² − u_θ²)/r³`.
pub fn lhs_17(phi: f64, u: &SphericalField, q: &QuadratureSpec) -> Result<f64> {
    check_boundary_vanishing(u, q)?;
    Ok(phi / (4.0 * PI) * reduced_integral_3d(u, q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coords::{eval_polar, PolarJet};
    use crate::fields::{
        averaged_extension_2d, averaged_extension_3d, test_field_2d, test_field_3d,
    };
    use crate::geometry::{AnnulusGeometry, ShellGeometry};

    fn annulus() -> AnnulusGeometry {
        AnnulusGeometry::new(1.0, 2.0).unwrap()
    }

    #[test]
    fn divergence_rejects_boundary_and_exterior() {
        let u = test_field_2d(&annulus(), 2).unwrap();
        assert!(divergence(&u, &Vector2::new(1.0, 0.0)).is_err());
        assert!(divergence(&u, &Vector2::new(0.0, 3.0)).is_err());
        assert!(divergence(&u, &Vector2::new(1.5, 0.0)).is_ok());
    }

    #[test]
    fn one_over_r_field_is_solenoidal() {
        let g = annulus();
        let f = Field::from_fn(g, "1/r", true, |x| {
            eval_polar(x, &|r: f64, _| PolarJet {
                ur: 1.0 / r,
                dr_ur: -1.0 / (r * r),
                ..Default::default()
            })
        });
        assert!(divergence(&f, &Vector2::new(1.2, 0.7)).unwrap().abs() < 1e-15);
    }

    #[test]
    fn rigid_rotation_has_zero_strain() {
        let g = annulus();
        let f = Field::from_fn(g, "omega x", true, |x| crate::fields::Jet {
            value: Vector2::new(-x.y, x.x),
            jacobian: Matrix2::new(0.0, -1.0, 1.0, 0.0),
        });
        let s = symmetric_gradient(&f, &Vector2::new(1.1, 0.9)).unwrap();
        assert_eq!(s.cartesian, Matrix2::zeros());
    }

    #[test]
    fn flux_examples() {
        let g = annulus();
        let q = QuadratureSpec::default();
        let v = averaged_extension_2d(&g, 3.7, &ScalarProfile::parse("poly:0,0,1").unwrap());
        for r0 in [1.0, 1.3, 2.0] {
            assert!((flux(&v, r0, &q).unwrap() - 3.7).abs() < 1e-10);
        }
        assert!(flux(&v, 2.5, &q).is_err());
        let u = test_field_2d(&g, 4).unwrap();
        assert!(flux(&u, 1.7, &q).unwrap().abs() < 1e-12);
        let s = ShellGeometry::new(1.0, 2.0).unwrap();
        let w = averaged_extension_3d(&s, -2.0);
        assert!((flux(&w, 1.25, &q).unwrap() + 2.0).abs() < 1e-10);
    }

    #[test]
    fn quadratic_form_rejects_non_vanishing_u() {
        let g = annulus();
        let v = averaged_extension_2d(&g, 1.0, &ScalarProfile::zero());
        assert!(matches!(
            quadratic_form(&v, &v, &QuadratureSpec::default()),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn quadratic_form_homogeneity_and_zero() {
        let g = annulus();
        let q = QuadratureSpec::default();
        let v = averaged_extension_2d(&g, 1.0, &ScalarProfile::parse("poly:0.5,-1,0.25").unwrap());
        let u = test_field_2d(&g, 3).unwrap();
        let base = quadratic_form(&v, &u, &q).unwrap();
        let doubled = quadratic_form(&v, &u.scaled(2.0), &q).unwrap();
        assert!((doubled - 4.0 * base).abs() <= 1e-12 * base.abs().max(1.0));
        assert_eq!(quadratic_form(&v, &u.scaled(0.0), &q).unwrap(), 0.0);
        assert_eq!(dirichlet_norm_sq(&u.scaled(0.0), &q), 0.0);
        let n = dirichlet_norm_sq(&u, &q);
        assert!((dirichlet_norm_sq(&u.scaled(-3.0), &q) - 9.0 * n).abs() < 1e-12 * n);
    }

    #[test]
    fn lhs_vanishes_without_flux_or_swirl() {
        let g = annulus();
        let q = QuadratureSpec::default();
        let u = test_field_2d(&g, 2).unwrap();
        assert_eq!(lhs_13(0.0, &ScalarProfile::zero(), &u, &q).unwrap(), 0.0);
        let s = ShellGeometry::new(1.0, 2.0).unwrap();
        assert_eq!(
            lhs_17(0.0, &test_field_3d(&s, 2).unwrap(), &q).unwrap(),
            0.0
        );
    }

    #[test]
    fn coarsened_spec_keeps_minimums() {
        let q = QuadratureSpec::new(8, 12, 8).unwrap().coarsened();
        assert_eq!((q.nodes_r, q.nodes_theta, q.nodes_chi), (8, 8, 8));
        assert!(QuadratureSpec::new(4, 8, 8).is_err());
    }
}
