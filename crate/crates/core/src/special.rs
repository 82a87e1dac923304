//! Reduced one-dimensional integrals of the test-field family.
//!
//! With `s = (ρ−1)z + 1`:
//!
//! - `F1 = ((ρ−1)³/4π) ∫₀¹ (cos 2πz − 1)²/s³ dz`
//! - `F2 = π(ρ−1) ∫₀¹ sin²(2πz)/s dz`
//! - `G1 = (2(ρ−1)³/3π) ∫₀¹ (cos 2πz − 1)²/s⁵ dz`
//! - `G2 = (16π/15)(ρ−1) ∫₀¹ sin²(2πz)/s³ dz`
//!
//! On an annulus, `∫(u_r² − u_θ²)/r² = m²F1 − F2` for the mode-`m` test
//! field. On a shell, `∫(2u_r² − u_χ² − u_θ²)/r³ = (m²G1 − G2)/R1²`; the
//! G values are therefore those of the shell with unit inner radius.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{input, Result};
use crate::quadrature::GaussLegendre;

pub const DEFAULT_NODES: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpecialIntegrals {
    pub rho: f64,
    pub f1: f64,
    pub f2: f64,
    pub g1: f64,
    pub g2: f64,
    pub nodes: usize,
    /// Largest relative change against the rule with half the nodes.
    pub error_estimate: f64,
}

fn check_rho(rho: f64) -> Result<()> {
    if rho.is_finite() && rho > 1.0 {
        Ok(())
    } else {
        Err(input(format!(
            "aspect ratio must be a finite number above 1, got {rho}"
        )))
    }
}

fn raw(rho: f64, rule: &GaussLegendre) -> [f64; 4] {
    let h = rho - 1.0;
    let mut acc = [0.0; 4];
    for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
        let z = 0.5 * (x + 1.0);
        let w = 0.5 * w;
        let s = h * z + 1.0;
        let c = (2.0 * PI * z).cos() - 1.0;
        let sn = (2.0 * PI * z).sin();
        let (c2, s2) = (c * c, sn * sn);
        acc[0] += w * c2 / (s * s * s);
        acc[1] += w * s2 / s;
        acc[2] += w * c2 / (s * s * s * s * s);
        acc[3] += w * s2 / (s * s * s);
    }
    [
        h * h * h / (4.0 * PI) * acc[0],
        PI * h * acc[1],
        2.0 * h * h * h / (3.0 * PI) * acc[2],
        16.0 * PI / 15.0 * h * acc[3],
    ]
}

impl SpecialIntegrals {
    pub fn new(rho: f64) -> Result<Self> {
        Self::with_nodes(rho, DEFAULT_NODES)
    }

    pub fn with_nodes(rho: f64, nodes: usize) -> Result<Self> {
        check_rho(rho)?;
        if nodes < 8 {
            return Err(input("special integrals need at least 8 nodes"));
        }
        let fine = raw(rho, &GaussLegendre::new(nodes));
        let coarse = raw(rho, &GaussLegendre::new(nodes / 2));
        let error_estimate = fine
            .iter()
            .zip(&coarse)
            .map(|(a, b)| (a - b).abs() / a.abs())
            .fold(0.0, f64::max);
        let [f1, f2, g1, g2] = fine;
        Ok(Self {
            rho,
            f1,
            f2,
            g1,
            g2,
            nodes,
            error_estimate,
        })
    }

    pub fn kappa(&self, m: u32) -> f64 {
        let m = m as f64;
        m * m * self.f1 - self.f2
    }

    pub fn kappa3(&self, m: u32) -> f64 {
        let m = m as f64;
        m * m * self.g1 - self.g2
    }

    /// Smallest `m ≥ 1` with `m²F1 > F2`.
    pub fn minimal_m(&self) -> u32 {
        scan(self.f1, self.f2)
    }

    /// Smallest `m ≥ 1` with `m²G1 > G2`.
    pub fn minimal_m3(&self) -> u32 {
        scan(self.g1, self.g2)
    }
}

fn scan(a: f64, b: f64) -> u32 {
    let cap = (b / a).sqrt().ceil() as u32 + 1;
    (1..=cap)
        .find(|&m| (m as f64).powi(2) * a - b > 0.0)
        .unwrap_or(cap)
}

pub fn f1(rho: f64) -> Result<f64> {
    Ok(SpecialIntegrals::new(rho)?.f1)
}

pub fn f2(rho: f64) -> Result<f64> {
    Ok(SpecialIntegrals::new(rho)?.f2)
}

pub fn g1(rho: f64) -> Result<f64> {
    Ok(SpecialIntegrals::new(rho)?.g1)
}

pub fn g2(rho: f64) -> Result<f64> {
    Ok(SpecialIntegrals::new(rho)?.g2)
}

pub fn kappa(rho: f64, m: u32) -> Result<f64> {
    Ok(SpecialIntegrals::new(rho)?.kappa(m))
}

pub fn kappa3(rho: f64, m: u32) -> Result<f64> {
    Ok(SpecialIntegrals::new(rho)?.kappa3(m))
}

pub fn minimal_m(rho: f64) -> Result<u32> {
    Ok(SpecialIntegrals::new(rho)?.minimal_m())
}

pub fn minimal_m3(rho: f64) -> Result<u32> {
    Ok(SpecialIntegrals::new(rho)?.minimal_m3())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_bad_aspect_ratio() {
        for rho in [1.0, 0.5, -2.0, f64::NAN, f64::INFINITY] {
            assert!(SpecialIntegrals::new(rho).is_err());
        }
    }

    #[test]
    fn thin_annulus_limits() {
        let h = 1e-3;
        let s = SpecialIntegrals::new(1.0 + h).unwrap();
        let l1 = 3.0 / (8.0 * PI);
        let l2 = PI / 2.0;
        assert!(((s.f1 / h.powi(3)) - l1).abs() / l1 < 5e-3);
        assert!(((s.f2 / h) - l2).abs() / l2 < 5e-3);
    }

    #[test]
    fn minimal_mode_defining_property_and_bound() {
        for rho in [1.1, 1.5, 2.0, 4.0, 8.0] {
            let s = SpecialIntegrals::new(rho).unwrap();
            let m = s.minimal_m();
            assert!(s.kappa(m) > 0.0);
            assert!(m == 1 || s.kappa(m - 1) <= 0.0);
            assert!(m <= (s.f2 / s.f1).sqrt().ceil() as u32 + 1);
            let m3 = s.minimal_m3();
            assert!(s.kappa3(m3) > 0.0);
            assert!(m3 == 1 || s.kappa3(m3 - 1) <= 0.0);
            assert!(m3 <= (s.g2 / s.g1).sqrt().ceil() as u32 + 1);
        }
    }

    #[test]
    fn thin_annuli_need_higher_modes() {
        assert!(minimal_m(1.1).unwrap() >= minimal_m(2.0).unwrap());
        assert!(kappa(1.1, 1).unwrap() < 0.0);
    }

    #[test]
    fn node_doubling_plateau() {
        for rho in [1.5, 2.0, 4.0, 8.0] {
            let a = SpecialIntegrals::with_nodes(rho, 128).unwrap();
            let b = SpecialIntegrals::with_nodes(rho, 256).unwrap();
            for (x, y) in [(a.f1, b.f1), (a.f2, b.f2), (a.g1, b.g1), (a.g2, b.g2)] {
                assert!((x - y).abs() <= 1e-10 * y.abs());
            }
            assert!(a.error_estimate < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn integrals_positive(rho in 1.0001f64..50.0) {
            let s = SpecialIntegrals::new(rho).unwrap();
            prop_assert!(s.f1 > 0.0 && s.f2 > 0.0 && s.g1 > 0.0 && s.g2 > 0.0);
        }

        #[test]
        fn kappa_increment_identity(rho in 1.01f64..20.0, m in 2u32..40) {
            let s = SpecialIntegrals::new(rho).unwrap();
            let d = s.kappa(m) - s.kappa(m - 1);
            let expected = (2 * m - 1) as f64 * s.f1;
            prop_assert!((d - expected).abs() <= 1e-12 * (s.kappa(m).abs() + s.f2));
            prop_assert!(s.kappa(m) > s.kappa(m - 1));
        }
    }
}
