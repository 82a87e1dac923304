//! Rotational averaging over SO(2) and SO(3).
//!
//! The average of `V` is `𝒜(V)(y) = ∫ ℛ·V(ℛᵀ·y) dℛ` against normalized Haar
//! measure, discretized as a weighted sum over a fixed list of rotations.
//! SO(2) uses the trapezoid rule in the angle; SO(3) uses Euler angles
//! `(α₁, α₂, α₃) ∈ [0,2π)×[0,2π)×[0,π]` with density `sin α₃ / 8π²`,
//! trapezoid in `α₁, α₂` and Gauss–Legendre in `cos α₃`.

use std::f64::consts::PI;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{Matrix2, Matrix3, SMatrix, Vector2, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::fields::{Field, Jet, PolarField, SphericalField};
use crate::quadrature::{pairwise_sum, periodic_nodes, GaussLegendre};
use crate::sampled::{SampledCartesianField, SampledGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RotationSpec2D {
    pub n_angles: usize,
}

impl Default for RotationSpec2D {
    fn default() -> Self {
        Self { n_angles: 256 }
    }
}

impl RotationSpec2D {
    pub fn new(n_angles: usize) -> Result<Self> {
        if n_angles < 4 {
            return Err(input("SO(2) quadrature needs at least 4 angles"));
        }
        Ok(Self { n_angles })
    }

    pub fn quadrature(&self) -> RotationQuadrature<2> {
        let w = 1.0 / self.n_angles as f64;
        RotationQuadrature {
            rotations: periodic_nodes(self.n_angles)
                .into_iter()
                .map(|a| (rotation_2d(a), w))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EulerConvention {
    /// `ℛ = R_z(α₁) R_y(α₃) R_z(α₂)`.
    #[default]
    Zyz,
    /// `ℛ = R_z(α₁) R_x(α₃) R_z(α₂)`.
    Zxz,
}

impl FromStr for EulerConvention {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zyz" => Ok(Self::Zyz),
            "zxz" => Ok(Self::Zxz),
            other => Err(input(format!(
                "unknown Euler convention '{other}' (expected zyz or zxz)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RotationSpec3D {
    pub n_alpha1: usize,
    pub n_alpha2: usize,
    pub n_alpha3: usize,
    pub convention: EulerConvention,
}

impl Default for RotationSpec3D {
    fn default() -> Self {
        Self {
            n_alpha1: 64,
            n_alpha2: 64,
            n_alpha3: 32,
            convention: EulerConvention::Zyz,
        }
    }
}

impl RotationSpec3D {
    pub fn new(
        n_alpha1: usize,
        n_alpha2: usize,
        n_alpha3: usize,
        convention: EulerConvention,
    ) -> Result<Self> {
        if n_alpha1 < 4 || n_alpha2 < 4 || n_alpha3 < 4 {
            return Err(input("every Euler-angle node count must be at least 4"));
        }
        Ok(Self {
            n_alpha1,
            n_alpha2,
            n_alpha3,
            convention,
        })
    }

    pub fn rotation_count(&self) -> usize {
        self.n_alpha1 * self.n_alpha2 * self.n_alpha3
    }

    pub fn quadrature(&self) -> RotationQuadrature<3> {
        let a1 = periodic_nodes(self.n_alpha1);
        let a2 = periodic_nodes(self.n_alpha2);
        let gl = GaussLegendre::new(self.n_alpha3);
        let base = 1.0 / (self.n_alpha1 * self.n_alpha2) as f64;
        let mut rotations = Vec::with_capacity(self.rotation_count());
        for &x1 in &a1 {
            for (&c3, &w3) in gl.nodes().iter().zip(gl.weights()) {
                // ∫₀^π g sin α₃ dα₃ = ∫₋₁¹ g d(cos α₃); the 1/2 normalizes.
                let x3 = c3.clamp(-1.0, 1.0).acos();
                for &x2 in &a2 {
                    rotations.push((euler_rotation(self.convention, x1, x2, x3), base * 0.5 * w3));
                }
            }
        }
        RotationQuadrature { rotations }
    }
}

pub fn rotation_2d(angle: f64) -> Matrix2<f64> {
    let (s, c) = angle.sin_cos();
    Matrix2::new(c, -s, s, c)
}

fn rot_z(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn rot_y(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

fn rot_x(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub fn euler_rotation(
    convention: EulerConvention,
    alpha1: f64,
    alpha2: f64,
    alpha3: f64,
) -> Matrix3<f64> {
    let middle = match convention {
        EulerConvention::Zyz => rot_y(alpha3),
        EulerConvention::Zxz => rot_x(alpha3),
    };
    rot_z(alpha1) * middle * rot_z(alpha2)
}

/// Weighted rotations whose weights sum to one.
#[derive(Debug, Clone)]
pub struct RotationQuadrature<const D: usize> {
    pub rotations: Vec<(SMatrix<f64, D, D>, f64)>,
}

impl<const D: usize> RotationQuadrature<D> {
    pub fn len(&self) -> usize {
        self.rotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rotations.is_empty()
    }

    /// `Σ w ℛ·jet(ℛᵀ y)`, summed pairwise in the fixed rotation order.
    pub fn average_jet(
        &self,
        y: &nalgebra::SVector<f64, D>,
        jet: impl Fn(&nalgebra::SVector<f64, D>) -> Jet<D>,
    ) -> Jet<D> {
        let terms: Vec<Jet<D>> = self
            .rotations
            .iter()
            .map(|(rot, w)| jet(&(rot.transpose() * y)).rotated(rot) * *w)
            .collect();
        pairwise_sum(&terms, Jet::zero())
    }
}

const ROTATION_TOL: f64 = 1e-12;

fn check_rotation<const D: usize>(rot: &SMatrix<f64, D, D>) -> Result<()> {
    let orth = (rot.transpose() * rot - SMatrix::<f64, D, D>::identity()).amax();
    let det = nalgebra::DMatrix::from_column_slice(D, D, rot.as_slice()).determinant();
    if !(orth <= ROTATION_TOL && (det - 1.0).abs() <= ROTATION_TOL) {
        return Err(input(format!(
            "not a proper rotation: |RᵀR − I|∞ = {orth:e}, det = {det}"
        )));
    }
    Ok(())
}

/// `y ↦ ℛ·V(ℛᵀ·y)`.
pub fn rotate_field<const D: usize>(
    field: &Field<D>,
    rotation: &SMatrix<f64, D, D>,
) -> Result<Field<D>> {
    check_rotation(rotation)?;
    let rot = *rotation;
    let inner = field.clone();
    let label = format!("rot({})", field.label());
    Ok(Field::from_fn(
        *field.geometry(),
        label,
        field.is_analytic(),
        move |y| inner.jet(&(rot.transpose() * y)).rotated(&rot),
    ))
}

fn average_with<const D: usize>(
    field: &Field<D>,
    quad: RotationQuadrature<D>,
    tag: &str,
) -> Field<D> {
    let quad = Arc::new(quad);
    let inner = field.clone();
    let label = format!("{tag}({})", field.label());
    Field::from_fn(*field.geometry(), label, field.is_analytic(), move |y| {
        quad.average_jet(y, |x| inner.jet(x))
    })
}

/// SO(2) average, evaluated on demand at any point.
pub fn average_2d(field: &PolarField, spec: &RotationSpec2D) -> PolarField {
    average_with(field, spec.quadrature(), "avg2d")
}

/// SO(3) average, evaluated on demand at any point.
pub fn average_3d(field: &SphericalField, spec: &RotationSpec3D) -> SphericalField {
    average_with(field, spec.quadrature(), "avg3d")
}

/// Averages sampled data, writing the result on the input grid. Off-grid
/// values come from the sampled field's interpolant; nodes are processed in
/// parallel but each node's rotation sum has a fixed order.
pub fn average_sampled(
    field: &SampledCartesianField,
    spec2: &RotationSpec2D,
    spec3: &RotationSpec3D,
) -> Result<SampledCartesianField> {
    let grid = *field.grid();
    let interp = field.interpolator();
    let values: Vec<f64> = match grid {
        SampledGrid::Polar { .. } => {
            let quad = spec2.quadrature();
            (0..grid.node_count())
                .into_par_iter()
                .flat_map_iter(|idx| {
                    let (i, _, j) = grid.unflatten(idx);
                    let y = crate::coords::polar_point(grid.radius(i), grid.theta(j));
                    let terms: Vec<Vector2<f64>> = quad
                        .rotations
                        .iter()
                        .map(|(rot, w)| rot * interp.eval_2d(&(rot.transpose() * y)) * *w)
                        .collect();
                    let v = pairwise_sum(&terms, Vector2::zeros());
                    [v.x, v.y]
                })
                .collect()
        }
        SampledGrid::Spherical { .. } => {
            let quad = spec3.quadrature();
            (0..grid.node_count())
                .into_par_iter()
                .flat_map_iter(|idx| {
                    let (i, k, j) = grid.unflatten(idx);
                    let y =
                        crate::coords::spherical_point(grid.radius(i), grid.chi(k), grid.theta(j));
                    let terms: Vec<Vector3<f64>> = quad
                        .rotations
                        .iter()
                        .map(|(rot, w)| rot * interp.eval_3d(&(rot.transpose() * y)) * *w)
                        .collect();
                    let v = pairwise_sum(&terms, Vector3::zeros());
                    [v.x, v.y, v.z]
                })
                .collect()
        }
    };
    SampledCartesianField::new(grid, values)
}

/// Angle of a planar rotation, for diagnostics.
pub fn rotation_angle_2d(rot: &Matrix2<f64>) -> f64 {
    rot[(1, 0)].atan2(rot[(0, 0)]).rem_euclid(2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{averaged_extension_2d, test_field_2d};
    use crate::geometry::AnnulusGeometry;
    use crate::profile::ScalarProfile;

    #[test]
    fn weights_sum_to_one() {
        let q2 = RotationSpec2D::new(7).unwrap().quadrature();
        assert!((q2.rotations.iter().map(|r| r.1).sum::<f64>() - 1.0).abs() < 1e-15);
        let q3 = RotationSpec3D::new(6, 5, 8, EulerConvention::Zxz)
            .unwrap()
            .quadrature();
        assert_eq!(q3.len(), 240);
        assert!((q3.rotations.iter().map(|r| r.1).sum::<f64>() - 1.0).abs() < 1e-14);
        for (r, _) in &q3.rotations {
            assert!(check_rotation(r).is_ok());
        }
    }

    #[test]
    fn node_count_validation() {
        assert!(RotationSpec2D::new(3).is_err());
        assert!(RotationSpec3D::new(4, 4, 3, EulerConvention::Zyz).is_err());
        assert!("zzz".parse::<EulerConvention>().is_err());
        assert_eq!(
            "zxz".parse::<EulerConvention>().unwrap(),
            EulerConvention::Zxz
        );
    }

    #[test]
    fn rejects_improper_rotation() {
        let g = AnnulusGeometry::new(1.0, 2.0).unwrap();
        let u = test_field_2d(&g, 2).unwrap();
        let reflection = Matrix2::new(1.0, 0.0, 0.0, -1.0);
        assert!(rotate_field(&u, &reflection).is_err());
        assert!(rotate_field(&u, &(Matrix2::identity() * 2.0)).is_err());
    }

    #[test]
    fn rotation_round_trip() {
        let g = AnnulusGeometry::new(1.0, 2.0).unwrap();
        let u = test_field_2d(&g, 3).unwrap();
        let there = rotate_field(&u, &rotation_2d(0.83)).unwrap();
        let back = rotate_field(&there, &rotation_2d(-0.83)).unwrap();
        for k in 0..50 {
            let x = crate::coords::polar_point(1.0 + k as f64 / 50.0, 0.37 * k as f64);
            assert!((back.value(&x) - u.value(&x)).norm() < 1e-14);
            let id = rotate_field(&u, &Matrix2::identity()).unwrap();
            assert_eq!(id.value(&x), u.value(&x));
        }
        assert!((rotation_angle_2d(&rotation_2d(0.83)) - 0.83).abs() < 1e-15);
    }

    #[test]
    fn symmetric_field_is_rotation_invariant() {
        let g = AnnulusGeometry::new(1.0, 2.0).unwrap();
        let v = averaged_extension_2d(&g, 1.3, &ScalarProfile::parse("poly:0,1,-0.5").unwrap());
        let rv = rotate_field(&v, &rotation_2d(2.1)).unwrap();
        let x = crate::coords::polar_point(1.4, 0.6);
        assert!((rv.value(&x) - v.value(&x)).norm() < 1e-14);
        assert!((rv.jet(&x).jacobian - v.jet(&x).jacobian).norm() < 1e-13);
    }
}
