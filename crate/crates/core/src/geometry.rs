//! Admissible domains: annuli, spherical shells and planar circle domains.

use nalgebra::SVector;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};

/// The region `R1 < |x| < R2` in `D` dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialShell<const D: usize> {
    r1: f64,
    r2: f64,
}

/// Planar annulus.
pub type AnnulusGeometry = RadialShell<2>;
/// Spherical shell.
pub type ShellGeometry = RadialShell<3>;

impl<const D: usize> RadialShell<D> {
    pub fn new(r1: f64, r2: f64) -> Result<Self> {
        if !(r1.is_finite() && r2.is_finite()) {
            return Err(input(format!("radii must be finite, got ({r1}, {r2})")));
        }
        if !(0.0 < r1 && r1 < r2) {
            return Err(input(format!("need 0 < R1 < R2, got R1={r1}, R2={r2}")));
        }
        Ok(Self { r1, r2 })
    }

    pub fn r1(&self) -> f64 {
        self.r1
    }

    pub fn r2(&self) -> f64 {
        self.r2
    }

    pub fn width(&self) -> f64 {
        self.r2 - self.r1
    }

    /// `R2 / R1`, always `> 1`.
    pub fn aspect_ratio(&self) -> f64 {
        self.r2 / self.r1
    }

    /// Uniform rescaling by `lambda > 0`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Self::new(lambda * self.r1, lambda * self.r2)
    }

    pub fn contains_interior(&self, x: &SVector<f64, D>) -> bool {
        let r = x.norm();
        self.r1 < r && r < self.r2
    }

    pub fn contains_closure(&self, x: &SVector<f64, D>) -> bool {
        let r = x.norm();
        self.r1 <= r && r <= self.r2
    }
}

pub fn aspect_ratio<const D: usize>(geom: &RadialShell<D>) -> f64 {
    geom.aspect_ratio()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
}

impl Circle {
    pub fn new(cx: f64, cy: f64, r: f64) -> Result<Self> {
        let c = Self { cx, cy, r };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        if !(self.cx.is_finite() && self.cy.is_finite() && self.r.is_finite() && self.r > 0.0) {
            return Err(input(format!("invalid circle {self:?}")));
        }
        Ok(())
    }

    pub fn center_distance(&self, other: &Circle) -> f64 {
        (self.cx - other.cx).hypot(self.cy - other.cy)
    }

    /// Closed disk of `self` lies in the open disk of `outer`.
    pub fn strictly_inside(&self, outer: &Circle) -> bool {
        self.center_distance(outer) + self.r < outer.r
    }

    /// Closed disks do not meet.
    pub fn disjoint_from(&self, other: &Circle) -> bool {
        self.center_distance(other) > self.r + other.r
    }
}

/// Outer circle `Γ_N` enclosing inner circles `Γ_1 .. Γ_{N-1}` that lie
/// outside each other.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanarMultiDomain {
    outer: Circle,
    inner: Vec<Circle>,
}

#[derive(Deserialize)]
struct PlanarMultiDomainDoc {
    outer: Circle,
    inner: Vec<Circle>,
}

/// Grid size for the concentric witness scan.
pub const WITNESS_SCAN_POINTS: usize = 1024;

impl PlanarMultiDomain {
    pub fn new(outer: Circle, inner: Vec<Circle>) -> Result<Self> {
        outer.validate()?;
        if inner.is_empty() {
            return Err(input(
                "a multiply-connected domain needs at least one inner circle",
            ));
        }
        for (k, c) in inner.iter().enumerate() {
            c.validate()?;
            if !c.strictly_inside(&outer) {
                return Err(input(format!(
                    "inner circle {} is not strictly inside the outer circle",
                    k + 1
                )));
            }
            for (l, d) in inner.iter().enumerate().skip(k + 1) {
                if !c.disjoint_from(d) {
                    return Err(input(format!(
                        "inner circles {} and {} overlap",
                        k + 1,
                        l + 1
                    )));
                }
            }
        }
        Ok(Self { outer, inner })
    }

    /// Parses `{"outer":{"cx","cy","r"},"inner":[{"cx","cy","r"},...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PlanarMultiDomainDoc = serde_json::from_str(text)?;
        Self::new(doc.outer, doc.inner)
    }

    pub fn outer(&self) -> &Circle {
        &self.outer
    }

    pub fn inner(&self) -> &[Circle] {
        &self.inner
    }

    /// Number of boundary components `N`, outer circle included.
    pub fn component_count(&self) -> usize {
        self.inner.len() + 1
    }

    /// Looks for a circle concentric with inner component `i` (1-based) that
    /// surrounds it, stays inside the outer circle and leaves every other
    /// inner circle outside.
    ///
    /// This is a sufficient check only: candidate radii are scanned on a
    /// [`WITNESS_SCAN_POINTS`]-point grid between the component radius and
    /// the distance to the outer boundary, and non-concentric circles are
    /// never tried. The returned witness is centred in the feasible band
    /// found by the scan.
    pub fn separating_circle(&self, i: usize) -> Result<Option<Circle>> {
        if i == 0 || i > self.inner.len() {
            return Err(input(format!(
                "boundary index {i} out of range 1..={}",
                self.inner.len()
            )));
        }
        let target = self.inner[i - 1];
        let upper = self.outer.r - target.center_distance(&self.outer);
        let lo = target.r;
        if upper <= lo {
            return Ok(None);
        }
        let step = (upper - lo) / WITNESS_SCAN_POINTS as f64;
        let mut feasible: Option<(f64, f64)> = None;
        for k in 0..WITNESS_SCAN_POINTS {
            let s = lo + (k as f64 + 0.5) * step;
            if self.is_witness(i, s) {
                feasible = Some(match feasible {
                    None => (s, s),
                    Some((a, _)) => (a, s),
                });
            }
        }
        Ok(feasible.and_then(|(a, b)| {
            let s = 0.5 * (a + b);
            // The feasible set is an interval, so its midpoint qualifies.
            self.is_witness(i, s).then_some(Circle {
                cx: target.cx,
                cy: target.cy,
                r: s,
            })
        }))
    }

    fn is_witness(&self, i: usize, s: f64) -> bool {
        let target = self.inner[i - 1];
        let c = Circle {
            cx: target.cx,
            cy: target.cy,
            r: s,
        };
        s > target.r
            && c.strictly_inside(&self.outer)
            && self
                .inner
                .iter()
                .enumerate()
                .filter(|(k, _)| k + 1 != i)
                .all(|(_, other)| c.disjoint_from(other))
    }

    /// Checks conditions (surrounds, inside outer, excludes others) on an
    /// arbitrary circle by direct distance computation.
    pub fn separates(&self, i: usize, w: &Circle) -> bool {
        if i == 0 || i > self.inner.len() {
            return false;
        }
        let target = self.inner[i - 1];
        let surrounds = w.center_distance(&target) + target.r < w.r;
        surrounds
            && w.strictly_inside(&self.outer)
            && self
                .inner
                .iter()
                .enumerate()
                .filter(|(k, _)| k + 1 != i)
                .all(|(_, other)| w.disjoint_from(other))
    }
}

pub fn separating_circle_exists(domain: &PlanarMultiDomain, i: usize) -> Result<Option<Circle>> {
    domain.separating_circle(i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn circle(cx: f64, cy: f64, r: f64) -> Circle {
        Circle::new(cx, cy, r).unwrap()
    }

    #[test]
    fn aspect_ratio_examples() {
        assert_eq!(AnnulusGeometry::new(1.0, 2.0).unwrap().aspect_ratio(), 2.0);
        assert_eq!(ShellGeometry::new(3.0, 4.5).unwrap().aspect_ratio(), 1.5);
        let rho0 = 3.7;
        let g = AnnulusGeometry::new(0.5, 0.5 * rho0).unwrap();
        assert!((g.aspect_ratio() - rho0).abs() < 1e-15);
    }

    #[test]
    fn rejects_degenerate_radii() {
        assert!(AnnulusGeometry::new(0.0, 1.0).is_err());
        assert!(AnnulusGeometry::new(2.0, 2.0).is_err());
        assert!(ShellGeometry::new(2.0, 1.0).is_err());
        assert!(ShellGeometry::new(1.0, f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn aspect_ratio_is_scale_invariant(r1 in 0.01f64..10.0, rho in 1.0001f64..50.0, lambda in 0.01f64..100.0) {
            let g = AnnulusGeometry::new(r1, r1 * rho).unwrap();
            let h = g.scaled(lambda).unwrap();
            prop_assert!((g.aspect_ratio() - h.aspect_ratio()).abs() <= 1e-12 * rho);
        }

        #[test]
        fn concentric_single_inner_always_has_witness(r_in in 0.1f64..5.0, gap in 0.05f64..5.0) {
            let d = PlanarMultiDomain::new(circle(0.0, 0.0, r_in + gap), vec![circle(0.0, 0.0, r_in)]).unwrap();
            let w = d.separating_circle(1).unwrap().expect("annulus admits a witness");
            prop_assert!(d.separates(1, &w));
        }

        #[test]
        fn returned_witness_passes_direct_check(x0 in -6.0f64..-2.5, x1 in 2.5f64..6.0, y1 in -2.0f64..2.0) {
            let d = PlanarMultiDomain::new(
                circle(0.0, 0.0, 10.0),
                vec![circle(x0, 0.0, 1.0), circle(x1, y1, 1.2)],
            ).unwrap();
            for i in 1..=2 {
                if let Some(w) = d.separating_circle(i).unwrap() {
                    prop_assert!(d.separates(i, &w));
                }
            }
        }
    }

    #[test]
    fn annulus_witness_is_midpoint() {
        let d =
            PlanarMultiDomain::new(circle(0.0, 0.0, 10.0), vec![circle(0.0, 0.0, 1.0)]).unwrap();
        let w = d.separating_circle(1).unwrap().unwrap();
        assert!((w.r - 5.5).abs() < 1e-12, "{}", w.r);
    }

    #[test]
    fn well_separated_pair_has_witnesses() {
        let d = PlanarMultiDomain::new(
            circle(0.0, 0.0, 10.0),
            vec![circle(-5.0, 0.0, 1.0), circle(5.0, 0.0, 1.0)],
        )
        .unwrap();
        // Outer boundary is 5 away from (-5,0); the other circle starts 9 away.
        let w = d.separating_circle(1).unwrap().unwrap();
        assert_eq!((w.cx, w.cy), (-5.0, 0.0));
        assert!(w.r > 1.0 && w.r < 5.0);
        assert!((w.r - 3.0).abs() < 1e-2);
        assert!(d.separates(1, &w));
        assert!(d.separating_circle(2).unwrap().is_some());
    }

    #[test]
    fn nearly_touching_circles_defeat_the_scan() {
        // Gap of 0.002 is below the scan spacing (~0.0078).
        let d = PlanarMultiDomain::new(
            circle(0.0, 0.0, 10.0),
            vec![circle(-1.001, 0.0, 1.0), circle(1.001, 0.0, 1.0)],
        )
        .unwrap();
        assert_eq!(d.separating_circle(1).unwrap(), None);
        assert_eq!(d.separating_circle(2).unwrap(), None);
    }

    #[test]
    fn gap_wider_than_scan_spacing_is_found() {
        let d = PlanarMultiDomain::new(
            circle(0.0, 0.0, 10.0),
            vec![circle(-1.05, 0.0, 1.0), circle(1.05, 0.0, 1.0)],
        )
        .unwrap();
        let w = d.separating_circle(1).unwrap().unwrap();
        assert!(w.r > 1.0 && w.r < 1.1);
        assert!(d.separates(1, &w));
    }

    #[test]
    fn index_out_of_range_is_an_error() {
        let d =
            PlanarMultiDomain::new(circle(0.0, 0.0, 10.0), vec![circle(0.0, 0.0, 1.0)]).unwrap();
        assert!(d.separating_circle(0).is_err());
        assert!(d.separating_circle(2).is_err());
    }

    #[test]
    fn parses_json_and_validates() {
        let d = PlanarMultiDomain::from_json(
            r#"{"outer":{"cx":0,"cy":0,"r":10},"inner":[{"cx":-5,"cy":0,"r":1},{"cx":5,"cy":0,"r":1}]}"#,
        )
        .unwrap();
        assert_eq!(d.component_count(), 3);
        let overlapping = r#"{"outer":{"cx":0,"cy":0,"r":10},"inner":[{"cx":0,"cy":0,"r":1},{"cx":1,"cy":0,"r":1}]}"#;
        assert!(PlanarMultiDomain::from_json(overlapping).is_err());
        let outside = r#"{"outer":{"cx":0,"cy":0,"r":2},"inner":[{"cx":1.5,"cy":0,"r":1}]}"#;
        assert!(PlanarMultiDomain::from_json(outside).is_err());
    }
}
