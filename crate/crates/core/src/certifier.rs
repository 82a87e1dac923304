//! Violation certificates for the extension condition and the identity
//! report that cross-checks the numerical pipeline.
//!
//! A certificate records a witness `u` (solenoidal, vanishing on the
//! boundary), the left side `lhs = −∫u·∇V·u` for the rotation-averaged
//! extension `V`, the Dirichlet norm `‖∇u‖²`, and `epsilon_star = lhs/‖∇u‖²`.
//! When `epsilon_star` is safely positive the inequality
//! `lhs ≤ ε‖∇u‖²` fails for every `ε < epsilon_star`.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::averaging::{average_2d, average_3d, RotationSpec2D, RotationSpec3D};
use crate::calculus::{
    boundary_trace, cross_term_2d, cross_term_scale_2d, dirichlet_norm_sq, flux, lhs_13, lhs_17,
    reduced_integral_2d, reduced_integral_3d, symmetric_gradient, QuadratureSpec,
};
use crate::coords::{polar_point, radial_frame_2d, spherical_point};
use crate::error::{input, Result};
use crate::fields::{
    averaged_extension_2d, averaged_extension_3d, inflow_field_2d, inflow_field_3d,
    synthetic_field_2d, synthetic_field_3d, test_field_2d, test_field_3d, Field,
    StreamPerturbation,
};
use crate::geometry::{AnnulusGeometry, RadialShell, ShellGeometry};
use crate::profile::ScalarProfile;
use crate::special::SpecialIntegrals;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Annulus,
    Shell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Violated,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Outflow,
    Inflow,
}

/// The witness family member: a test-field mode or an inflow profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Witness {
    Mode(u32),
    Profile(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub error_floor: f64,
    pub safety_factor: f64,
    pub boundary_rtol: f64,
    /// Combined error bound on `epsilon_star` actually used for the verdict.
    pub error_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureMeta {
    pub nodes_r: usize,
    pub nodes_theta: usize,
    pub nodes_chi: usize,
    pub special_nodes: usize,
    pub error_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub domain: DomainKind,
    pub r1: f64,
    pub r2: f64,
    pub rho: f64,
    pub phi: f64,
    pub mode_or_profile: Witness,
    pub kappa: f64,
    pub lhs: f64,
    pub grad_norm_sq: f64,
    pub epsilon_star: f64,
    pub verdict: Verdict,
    pub tolerances: Tolerances,
    pub quadrature: QuadratureMeta,
    pub version: String,
}

impl Certificate {
    pub fn direction(&self) -> Direction {
        if self.phi > 0.0 {
            Direction::Outflow
        } else {
            Direction::Inflow
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("certificate serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    pub quadrature: QuadratureSpec,
    pub error_floor: f64,
    pub safety_factor: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            quadrature: QuadratureSpec::default(),
            error_floor: 1e-12,
            safety_factor: 10.0,
        }
    }
}

impl CertifyOptions {
    fn validate(&self) -> Result<()> {
        self.quadrature.validate()?;
        if !(self.error_floor.is_finite() && self.error_floor >= 0.0) {
            return Err(input("error floor must be a finite non-negative number"));
        }
        if !(self.safety_factor.is_finite() && self.safety_factor >= 1.0) {
            return Err(input("safety factor must be at least 1"));
        }
        Ok(())
    }
}

fn check_phi(phi: f64) -> Result<()> {
    if phi.is_finite() && phi != 0.0 {
        Ok(())
    } else {
        Err(input(format!("flux must be finite and nonzero, got {phi}")))
    }
}

struct Evaluation {
    lhs: f64,
    grad: f64,
    error: f64,
}

/// Runs `eval` at the requested and the coarsened quadrature; the error
/// estimate on `epsilon_star` is the larger of their difference and the
/// mismatch against `reference`, if any.
fn evaluate(
    opts: &CertifyOptions,
    reference_lhs: Option<f64>,
    eval: impl Fn(&QuadratureSpec) -> Result<(f64, f64)>,
) -> Result<Evaluation> {
    let (lhs, grad) = eval(&opts.quadrature)?;
    let (lhs_c, grad_c) = eval(&opts.quadrature.coarsened())?;
    let eps = lhs / grad;
    let mut error = (eps - lhs_c / grad_c).abs();
    if let Some(r) = reference_lhs {
        error = error.max((eps - r / grad).abs());
    }
    Ok(Evaluation { lhs, grad, error })
}

#[allow(clippy::too_many_arguments)]
fn assemble<const D: usize>(
    domain: DomainKind,
    geom: &RadialShell<D>,
    phi: f64,
    witness: Witness,
    kappa: f64,
    e: Evaluation,
    opts: &CertifyOptions,
    special_nodes: usize,
) -> Certificate {
    let epsilon_star = e.lhs / e.grad;
    let error_bound = e.error + opts.error_floor;
    let verdict = if e.lhs > 0.0 && epsilon_star > opts.safety_factor * error_bound {
        Verdict::Violated
    } else {
        Verdict::Inconclusive
    };
    let q = &opts.quadrature;
    Certificate {
        domain,
        r1: geom.r1(),
        r2: geom.r2(),
        rho: geom.aspect_ratio(),
        phi,
        mode_or_profile: witness,
        kappa,
        lhs: e.lhs,
        grad_norm_sq: e.grad,
        epsilon_star,
        verdict,
        tolerances: Tolerances {
            error_floor: opts.error_floor,
            safety_factor: opts.safety_factor,
            boundary_rtol: q.boundary_rtol,
            error_bound,
        },
        quadrature: QuadratureMeta {
            nodes_r: q.nodes_r,
            nodes_theta: q.nodes_theta,
            nodes_chi: q.nodes_chi,
            special_nodes,
            error_estimate: e.error,
        },
        version: crate::VERSION.to_string(),
    }
}

/// Outflow certificate on an annulus with mode-`m` test field; `m`
/// defaults to the minimal mode with positive `κ = m²F1 − F2`. The swirl
/// `v` of the averaged extension must not change the outcome.
pub fn certify_outflow_2d(
    geom: &AnnulusGeometry,
    phi: f64,
    swirl: Option<&ScalarProfile>,
    mode: Option<u32>,
    opts: &CertifyOptions,
) -> Result<Certificate> {
    check_phi(phi)?;
    if phi < 0.0 {
        return Err(input("outflow certification needs a positive flux"));
    }
    opts.validate()?;
    let si = SpecialIntegrals::new(geom.aspect_ratio())?;
    let m = mode.unwrap_or_else(|| si.minimal_m());
    let u = test_field_2d(geom, m)?;
    let zero = ScalarProfile::zero();
    let v = swirl.unwrap_or(&zero);
    let kappa = si.kappa(m);
    let e = evaluate(opts, Some(phi / (2.0 * PI) * kappa), |q| {
        Ok((lhs_13(phi, v, &u, q)?, dirichlet_norm_sq(&u, q)))
    })?;
    Ok(assemble(
        DomainKind::Annulus,
        geom,
        phi,
        Witness::Mode(m),
        kappa,
        e,
        opts,
        si.nodes,
    ))
}

/// Outflow certificate on a spherical shell; `κ = m²G1 − G2`.
pub fn certify_outflow_3d(
    geom: &ShellGeometry,
    phi: f64,
    mode: Option<u32>,
    opts: &CertifyOptions,
) -> Result<Certificate> {
    check_phi(phi)?;
    if phi < 0.0 {
        return Err(input("outflow certification needs a positive flux"));
    }
    opts.validate()?;
    let si = SpecialIntegrals::new(geom.aspect_ratio())?;
    let m = mode.unwrap_or_else(|| si.minimal_m3());
    let u = test_field_3d(geom, m)?;
    let kappa = si.kappa3(m);
    let reference = phi / (4.0 * PI) * kappa / (geom.r1() * geom.r1());
    let e = evaluate(opts, Some(reference), |q| {
        Ok((lhs_17(phi, &u, q)?, dirichlet_norm_sq(&u, q)))
    })?;
    Ok(assemble(
        DomainKind::Shell,
        geom,
        phi,
        Witness::Mode(m),
        kappa,
        e,
        opts,
        si.nodes,
    ))
}

fn inflow_profile(geom_r1: f64, geom_r2: f64, f: Option<&ScalarProfile>) -> Result<ScalarProfile> {
    let f = f
        .cloned()
        .unwrap_or_else(|| ScalarProfile::normalized_bump(geom_r1, geom_r2));
    if f.is_identically_zero(geom_r1, geom_r2) {
        return Err(input("inflow profile is identically zero"));
    }
    Ok(f)
}

/// Inflow certificate on an annulus with the azimuthal witness `f(r) e_θ`.
/// A positive flux is accepted and yields an inconclusive certificate.
/// `kappa` holds the reduced integral `∫(u_r² − u_θ²)/r²`.
pub fn certify_inflow_2d(
    geom: &AnnulusGeometry,
    phi: f64,
    f: Option<&ScalarProfile>,
    opts: &CertifyOptions,
) -> Result<Certificate> {
    check_phi(phi)?;
    opts.validate()?;
    let f = inflow_profile(geom.r1(), geom.r2(), f)?;
    let u = inflow_field_2d(geom, &f)?;
    let zero = ScalarProfile::zero();
    let e = evaluate(opts, None, |q| {
        Ok((lhs_13(phi, &zero, &u, q)?, dirichlet_norm_sq(&u, q)))
    })?;
    let kappa = e.lhs * 2.0 * PI / phi;
    Ok(assemble(
        DomainKind::Annulus,
        geom,
        phi,
        Witness::Profile(f.describe()),
        kappa,
        e,
        opts,
        0,
    ))
}

/// Inflow certificate on a shell with `u = f(r) sin χ e_θ`. `kappa` holds
/// `R1² ∫(2u_r² − u_χ² − u_θ²)/r³`, matching the mode normalization.
pub fn certify_inflow_3d(
    geom: &ShellGeometry,
    phi: f64,
    f: Option<&ScalarProfile>,
    opts: &CertifyOptions,
) -> Result<Certificate> {
    check_phi(phi)?;
    opts.validate()?;
    let f = inflow_profile(geom.r1(), geom.r2(), f)?;
    let u = inflow_field_3d(geom, &f)?;
    let e = evaluate(opts, None, |q| {
        Ok((lhs_17(phi, &u, q)?, dirichlet_norm_sq(&u, q)))
    })?;
    let kappa = e.lhs * 4.0 * PI * geom.r1() * geom.r1() / phi;
    Ok(assemble(
        DomainKind::Shell,
        geom,
        phi,
        Witness::Profile(f.describe()),
        kappa,
        e,
        opts,
        0,
    ))
}

/// Mode in `modes` maximizing `epsilon_star` among those with `κ > 0`,
/// ties going to the smaller mode. With no such mode the certificate of
/// the first mode (inconclusive) is returned.
pub fn best_mode(
    geom: &AnnulusGeometry,
    phi: f64,
    modes: &[u32],
    swirl: Option<&ScalarProfile>,
    opts: &CertifyOptions,
) -> Result<(u32, Certificate)> {
    let mut sorted = modes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let first = *sorted.first().ok_or_else(|| input("mode range is empty"))?;
    let mut best: Option<(u32, Certificate)> = None;
    for &m in &sorted {
        let cert = certify_outflow_2d(geom, phi, swirl, Some(m), opts)?;
        if cert.kappa <= 0.0 {
            continue;
        }
        if best
            .as_ref()
            .is_none_or(|(_, b)| cert.epsilon_star > b.epsilon_star)
        {
            best = Some((m, cert));
        }
    }
    match best {
        Some(b) => Ok(b),
        None => Ok((
            first,
            certify_outflow_2d(geom, phi, swirl, Some(first), opts)?,
        )),
    }
}

pub const CHECK_NAMES: [&str; 7] = [
    "divergence_free",
    "boundary_vanishing",
    "reduced_integral_equivalence",
    "cross_term_vanishing",
    "averaging_fixed_point",
    "flux_preservation",
    "strain_formula",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckTolerances {
    pub divergence_free: f64,
    pub boundary_vanishing: f64,
    pub reduced_integral_equivalence: f64,
    pub cross_term_vanishing: f64,
    pub averaging_fixed_point: f64,
    pub flux_preservation: f64,
    pub strain_formula: f64,
}

impl Default for CheckTolerances {
    fn default() -> Self {
        Self {
            divergence_free: 1e-10,
            boundary_vanishing: 1e-8,
            reduced_integral_equivalence: 1e-8,
            cross_term_vanishing: 1e-10,
            averaging_fixed_point: 1e-6,
            flux_preservation: 1e-8,
            strain_formula: 1e-10,
        }
    }
}

impl CheckTolerances {
    pub fn uniform(tol: f64) -> Self {
        Self {
            divergence_free: tol,
            boundary_vanishing: tol,
            reduced_integral_equivalence: tol,
            cross_term_vanishing: tol,
            averaging_fixed_point: tol,
            flux_preservation: tol,
            strain_formula: tol,
        }
    }

    fn get(&self, name: &str) -> f64 {
        match name {
            "divergence_free" => self.divergence_free,
            "boundary_vanishing" => self.boundary_vanishing,
            "reduced_integral_equivalence" => self.reduced_integral_equivalence,
            "cross_term_vanishing" => self.cross_term_vanishing,
            "averaging_fixed_point" => self.averaging_fixed_point,
            "flux_preservation" => self.flux_preservation,
            _ => self.strain_formula,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IdentityOptions {
    pub tolerances: CheckTolerances,
    pub quadrature: QuadratureSpec,
    pub rotations_2d: RotationSpec2D,
    pub rotations_3d: RotationSpec3D,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub r1: f64,
    pub r2: f64,
    pub modes: Vec<u32>,
    pub checks: Vec<IdentityCheck>,
    pub version: String,
}

impl IdentityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn probes_2d(geom: &AnnulusGeometry) -> Vec<Vector2<f64>> {
    let mut out = Vec::new();
    for i in 1..8 {
        let r = geom.r1() + geom.width() * i as f64 / 8.0;
        for j in 0..16 {
            out.push(polar_point(r, 2.0 * PI * (j as f64 + 0.3) / 16.0));
        }
    }
    out
}

fn probes_3d(geom: &ShellGeometry) -> Vec<Vector3<f64>> {
    let mut out = Vec::new();
    for i in 1..6 {
        let r = geom.r1() + geom.width() * i as f64 / 6.0;
        for k in 0..6 {
            let chi = PI * (k as f64 + 0.5) / 6.0;
            for j in 0..12 {
                out.push(spherical_point(r, chi, 2.0 * PI * (j as f64 + 0.3) / 12.0));
            }
        }
    }
    out
}

fn max_divergence<const D: usize>(u: &Field<D>, points: &[nalgebra::SVector<f64, D>]) -> f64 {
    points
        .iter()
        .map(|x| {
            let j = u.jet(x);
            j.divergence().abs() / j.jacobian.norm().max(1.0)
        })
        .fold(0.0, f64::max)
}

fn relative_trace<const D: usize>(u: &Field<D>, q: &QuadratureSpec) -> f64
where
    RadialShell<D>: crate::calculus::RadialDomain<D>,
{
    let (trace, _) = boundary_trace(u, q);
    let scale =
        crate::calculus::integrate(u.geometry(), &QuadratureSpec::new(8, 16, 8).unwrap(), |x| {
            u.value(x).norm_squared()
        })
        .sqrt()
            / u.geometry().width();
    trace / scale.max(f64::MIN_POSITIVE)
}

fn swirl_samples() -> [ScalarProfile; 3] {
    [
        ScalarProfile::polynomial(vec![0.0, 1.0]),
        ScalarProfile::polynomial(vec![0.5, -1.0, 0.25, 0.1]),
        ScalarProfile::polynomial(vec![-0.3, 0.0, 0.0, 0.0, 0.05]),
    ]
}

/// Runs every named check on the annulus and on the shell with the same
/// radii. Failures are recorded, never raised.
pub fn identity_report(
    geom: &AnnulusGeometry,
    modes: &[u32],
    opts: &IdentityOptions,
) -> Result<IdentityReport> {
    if modes.is_empty() || modes.contains(&0) {
        return Err(input(
            "mode list must be nonempty with every mode at least 1",
        ));
    }
    let shell = ShellGeometry::new(geom.r1(), geom.r2())?;
    let q = &opts.quadrature;
    let si = SpecialIntegrals::new(geom.aspect_ratio())?;
    let p2 = probes_2d(geom);
    let p3 = probes_3d(&shell);
    let r1sq = geom.r1() * geom.r1();

    let mut divergence = 0.0f64;
    let mut boundary = 0.0f64;
    let mut reduced = 0.0f64;
    let mut cross = 0.0f64;
    for &m in modes {
        let u2 = test_field_2d(geom, m)?;
        let u3 = test_field_3d(&shell, m)?;
        divergence = divergence
            .max(max_divergence(&u2, &p2))
            .max(max_divergence(&u3, &p3));
        boundary = boundary
            .max(relative_trace(&u2, q))
            .max(relative_trace(&u3, q));
        let k2 = si.kappa(m);
        let k3 = si.kappa3(m);
        reduced = reduced
            .max((reduced_integral_2d(&u2, q) - k2).abs() / (1.0 + k2.abs()))
            .max((reduced_integral_3d(&u3, q) * r1sq - k3).abs() / (1.0 + k3.abs()));
        for v in swirl_samples() {
            let c = cross_term_2d(&v, &u2, q);
            cross = cross.max(c.abs() / (1.0 + cross_term_scale_2d(&v, &u2, q)));
        }
    }

    let phi = 1.0;
    let pert = StreamPerturbation::sample_non_symmetric();
    let synth2 = synthetic_field_2d(geom, phi, &pert);
    let target2 = averaged_extension_2d(geom, phi, &pert.swirl());
    let avg2 = average_2d(&synth2, &opts.rotations_2d);
    let avg2_twice = average_2d(&avg2, &opts.rotations_2d);
    let synth3 = synthetic_field_3d(&shell, phi, 0.3);
    let target3 = averaged_extension_3d(&shell, phi);
    let avg3 = average_3d(&synth3, &opts.rotations_3d);
    let mut averaging = 0.0f64;
    for x in p2.iter().step_by(7) {
        let t = target2.value(x);
        let scale = 1.0 + t.norm();
        averaging = averaging
            .max((avg2.value(x) - t).norm() / scale)
            .max((avg2_twice.value(x) - avg2.value(x)).norm() / scale);
    }
    for x in p3.iter().step_by(97).take(3) {
        let t = target3.value(x);
        averaging = averaging.max((avg3.value(x) - t).norm() / (1.0 + t.norm()));
    }

    let mut flux_err = 0.0f64;
    let mid = 0.5 * (geom.r1() + geom.r2());
    let coarse_sphere = QuadratureSpec::new(8, 8, 8)?;
    for r0 in [geom.r1(), mid, geom.r2()] {
        flux_err = flux_err
            .max((flux(&synth2, r0, q)? - phi).abs())
            .max((flux(&avg2, r0, q)? - phi).abs())
            .max((flux(&synth3, r0, q)? - phi).abs());
    }
    flux_err = flux_err.max((flux(&avg3, mid, &coarse_sphere)? - phi).abs());

    let mut strain = 0.0f64;
    let v = &swirl_samples()[1];
    let ext2 = averaged_extension_2d(geom, phi, v);
    for x in &p2 {
        let r = x.norm();
        let a = phi / (2.0 * PI * r * r);
        let off = 0.5 * (v.derivative(r) - v.value(r) / r);
        let expected = Matrix2::new(-a, off, off, a);
        let s = symmetric_gradient(&ext2, x)?;
        let got = s.in_frame(&radial_frame_2d(x));
        strain = strain.max((got - expected).abs().max() / (1.0 + expected.abs().max()));
    }
    for x in &p3 {
        let r = x.norm();
        let expected = (Matrix3::identity() - x * x.transpose() * (3.0 / (r * r)))
            * (phi / (4.0 * PI * r * r * r));
        let s = symmetric_gradient(&target3, x)?;
        strain = strain
            .max((s.cartesian - expected).abs().max() / (1.0 + expected.abs().max()))
            .max(s.trace().abs());
    }

    let residuals = [
        divergence, boundary, reduced, cross, averaging, flux_err, strain,
    ];
    let checks = CHECK_NAMES
        .iter()
        .zip(residuals)
        .map(|(&name, residual)| {
            let tolerance = opts.tolerances.get(name);
            IdentityCheck {
                name: name.to_string(),
                residual,
                tolerance,
                passed: residual <= tolerance,
            }
        })
        .collect();
    Ok(IdentityReport {
        r1: geom.r1(),
        r2: geom.r2(),
        modes: modes.to_vec(),
        checks,
        version: crate::VERSION.to_string(),
    })
}
