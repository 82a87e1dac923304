//! Numerical machinery showing that the Leray–Hopf extension condition fails
//! on annuli and spherical shells carrying a nonzero boundary flow-rate.
//!
//! The crate builds the explicit test fields, averages candidate extensions
//! over SO(2)/SO(3), evaluates the relevant quadratic forms and Dirichlet
//! norms by tensor quadrature, and packages the outcome as a [`Certificate`]
//! holding the critical `epsilon_star` below which the condition is
//! contradicted.
//!
//! Module map:
//!
//! - [`geometry`]: annulus, shell and planar multiply-connected domains.
//! - [`profile`]: radial scalar profiles (polynomial, spline, closure).
//! - [`fields`]: analytic vector fields in Cartesian jet form.
//! - [`sampled`]: gridded Cartesian samples and their text format.
//! - [`averaging`]: rotation quadratures and the averaging operator.
//! - [`calculus`]: divergence, strain, flux and domain integrals.
//! - [`special`]: reduced one-dimensional integrals and mode criteria.
//! - [`certifier`]: certificates and the identity report.

pub mod averaging;
pub mod calculus;
pub mod certifier;
pub mod coords;
mod error;
pub mod fields;
pub mod geometry;
pub mod profile;
pub mod quadrature;
pub mod sampled;
pub mod special;

pub use averaging::{
    average_2d, average_3d, average_sampled, rotate_field, EulerConvention, RotationSpec2D,
    RotationSpec3D,
};
pub use calculus::QuadratureSpec;
pub use certifier::{Certificate, IdentityReport, Verdict};
pub use error::{Error, Result};
pub use fields::{Field, Jet, PolarField, SphericalField};
pub use geometry::{AnnulusGeometry, Circle, PlanarMultiDomain, RadialShell, ShellGeometry};
pub use profile::ScalarProfile;
pub use sampled::{SampledCartesianField, SampledGrid};
pub use special::SpecialIntegrals;

/// Version string embedded in certificates.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
