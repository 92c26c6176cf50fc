//! Force-closure decision and grasp-wrench-space quality.
//!
//! Each contact's Coulomb friction cone is discretised into `m` unit force
//! edges; every edge contributes the 6-D wrench `(f, ((p - c) x f) / rho)`
//! with `c` the object centroid and `rho` the object's circumscribed radius
//! about `c`, making torques dimensionless and epsilon comparable across
//! object sizes. A grasp is force closure iff the origin lies strictly
//! inside the convex hull of its wrench set; epsilon is the radius of the
//! largest origin-centred ball inside the hull.
//!
//! Two independent routes decide containment: the 6-D hull
//! ([`evaluate`]) and a linear-program certificate
//! ([`force_closure_oracle_lp`]); tests cross-validate them.

mod hull;
mod lp;

use nalgebra::{Point3, SVector};

use crate::error::{Error, Result};
use crate::geometry::plane_basis;
use crate::mesh::Contact;

pub use hull::Vec6 as Wrench;

/// Force-closure threshold on epsilon; absorbs hull roundoff so that
/// `force_closure <=> epsilon > EPSILON_TOL` holds exactly in results.
pub const EPSILON_TOL: f64 = 1e-6;

/// Default Coulomb friction coefficient.
pub const DEFAULT_MU: f64 = 0.3;

/// Default friction cone discretisation.
pub const DEFAULT_CONE_EDGES: usize = 8;

/// Discretised contact wrenches of one grasp.
#[derive(Debug, Clone)]
pub struct WrenchSet {
    wrenches: Vec<Wrench>,
    mu: f64,
    cone_edges: usize,
    reference: Point3<f64>,
}

impl WrenchSet {
    pub fn wrenches(&self) -> &[Wrench] {
        &self.wrenches
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn cone_edges(&self) -> usize {
        self.cone_edges
    }

    /// Torque reference point (the object centroid the set was built with).
    pub fn reference(&self) -> Point3<f64> {
        self.reference
    }
}

/// Outcome of a force-closure evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityResult {
    pub force_closure: bool,
    /// Largest origin-centred ball radius inside the wrench hull; 0 when
    /// the grasp is not force closure.
    pub epsilon: f64,
}

/// Builds the wrench set for `contacts`: per contact, `m` friction cone
/// edges about the contact normal, each yielding the wrench
/// `(f, ((p - centroid) x f) / rho)`.
///
/// The stored contact normal is used as the cone axis; flipping every
/// normal negates the whole set, which changes neither containment nor
/// epsilon, so either the pressing-force or the outward convention works as
/// long as it is consistent.
pub fn build_wrenches(
    contacts: &[Contact],
    mu: f64,
    m: usize,
    centroid: Point3<f64>,
    rho: f64,
) -> Result<WrenchSet> {
    if contacts.is_empty() {
        return Err(Error::QualityInput("no contacts".into()));
    }
    if mu.is_nan() || mu <= 0.0 {
        return Err(Error::QualityInput(format!("friction mu = {mu}, need > 0")));
    }
    if m < 3 {
        return Err(Error::QualityInput(format!("cone edges m = {m}, need >= 3")));
    }
    if rho.is_nan() || rho <= 0.0 {
        return Err(Error::QualityInput(format!("torque scale rho = {rho}, need > 0")));
    }
    let inv_len = 1.0 / (1.0 + mu * mu).sqrt();
    let mut wrenches = Vec::with_capacity(contacts.len() * m);
    for (i, contact) in contacts.iter().enumerate() {
        let n = contact.normal;
        if n.norm() < 1e-9 {
            return Err(Error::QualityInput(format!("contact {i} has zero normal")));
        }
        let axis = n.normalize();
        let (t1, t2) = plane_basis(&axis);
        let arm = contact.position - centroid;
        for k in 0..m {
            let phi = std::f64::consts::TAU * k as f64 / m as f64;
            let f = (axis + mu * (phi.cos() * t1 + phi.sin() * t2)) * inv_len;
            let tau = arm.cross(&f) / rho;
            wrenches.push(SVector::<f64, 6>::new(
                f.x, f.y, f.z, tau.x, tau.y, tau.z,
            ));
        }
    }
    Ok(WrenchSet {
        wrenches,
        mu,
        cone_edges: m,
        reference: centroid,
    })
}

/// Hull-route quality: force closure iff the origin is strictly inside the
/// wrench hull with inscribed radius above [`EPSILON_TOL`].
#[must_use]
pub fn evaluate(set: &WrenchSet) -> QualityResult {
    evaluate_wrenches(&set.wrenches)
}

/// [`evaluate`] on a raw wrench list, for callers that assemble or
/// transform wrench sets themselves.
#[must_use]
pub fn evaluate_wrenches(wrenches: &[Wrench]) -> QualityResult {
    match hull::inscribed_radius(wrenches) {
        Some(r) if r > EPSILON_TOL => QualityResult {
            force_closure: true,
            epsilon: r,
        },
        _ => QualityResult {
            force_closure: false,
            epsilon: 0.0,
        },
    }
}

/// LP-route force closure, sharing no geometry code with [`evaluate`]:
/// the origin is interior iff every signed axis direction admits a convex
/// combination reaching strictly past it.
#[must_use]
pub fn force_closure_oracle_lp(set: &WrenchSet) -> bool {
    matches!(lp::min_axis_delta(&set.wrenches), Some(d) if d > EPSILON_TOL)
}

/// Smallest axis-direction reach of the wrench hull; brackets epsilon via
/// `delta/sqrt(6) <= epsilon <= delta`. Exposed for cross-validation.
#[must_use]
pub fn lp_min_axis_delta(set: &WrenchSet) -> Option<f64> {
    lp::min_axis_delta(&set.wrenches)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    fn contact(p: [f64; 3], n: [f64; 3]) -> Contact {
        Contact {
            position: Point3::new(p[0], p[1], p[2]),
            normal: Vector3::new(n[0], n[1], n[2]),
            link: String::from("test"),
            distance: 0.0,
        }
    }

    #[test]
    fn cone_edges_have_unit_force_and_fixed_axis_component() {
        let c = contact([0.0, 0.0, 20.0], [0.0, 0.0, 1.0]);
        let mu = 0.3;
        let ws = build_wrenches(&[c], mu, 4, Point3::origin(), 20.0).unwrap();
        assert_eq!(ws.wrenches().len(), 4);
        let expect_z = 1.0 / (1.0 + mu * mu).sqrt();
        for w in ws.wrenches() {
            let f = Vector3::new(w[0], w[1], w[2]);
            assert!((f.norm() - 1.0).abs() < 1e-9);
            assert!((f.z - expect_z).abs() < 1e-12, "f.z = {}", f.z);
        }
    }

    #[test]
    fn contact_at_centroid_has_zero_torque() {
        let c = contact([5.0, -3.0, 2.0], [1.0, 0.0, 0.0]);
        let ws = build_wrenches(&[c], 0.5, 8, Point3::new(5.0, -3.0, 2.0), 10.0).unwrap();
        for w in ws.wrenches() {
            assert_eq!(w.fixed_rows::<3>(3).norm(), 0.0);
        }
    }

    #[test]
    fn set_size_is_m_times_contacts() {
        let cs = vec![
            contact([1.0, 0.0, 0.0], [1.0, 0.0, 0.0]),
            contact([0.0, 1.0, 0.0], [0.0, 1.0, 0.0]),
            contact([0.0, 0.0, 1.0], [0.0, 0.0, 1.0]),
        ];
        let ws = build_wrenches(&cs, 0.3, 3, Point3::origin(), 1.0).unwrap();
        assert_eq!(ws.wrenches().len(), 9, "m = 3 floor");
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let c = contact([0.0, 0.0, 0.0], [0.0, 0.0, 1.0]);
        assert!(build_wrenches(&[], 0.3, 8, Point3::origin(), 1.0).is_err());
        assert!(build_wrenches(std::slice::from_ref(&c), 0.0, 8, Point3::origin(), 1.0).is_err());
        assert!(build_wrenches(std::slice::from_ref(&c), 0.3, 2, Point3::origin(), 1.0).is_err());
        let zero_n = contact([0.0, 0.0, 0.0], [0.0, 0.0, 0.0]);
        let err = build_wrenches(&[zero_n], 0.3, 8, Point3::origin(), 1.0).unwrap_err();
        assert!(err.is_input_error());
        assert!(build_wrenches(&[c], 0.3, 8, Point3::origin(), 0.0).is_err());
    }

    #[test]
    fn single_contact_is_never_force_closure() {
        let c = contact([10.0, 0.0, 0.0], [-1.0, 0.0, 0.0]);
        let ws = build_wrenches(&[c], 0.5, 8, Point3::origin(), 10.0).unwrap();
        let q = evaluate(&ws);
        assert!(!q.force_closure);
        assert_eq!(q.epsilon, 0.0);
        assert!(!force_closure_oracle_lp(&ws));
    }

    #[test]
    fn exactly_antipodal_point_pair_is_rank_deficient() {
        // Two collinear hard-finger contacts leave the twist about their
        // common axis unresisted: every wrench has zero torque-x, so the
        // set spans at most 5-D and both routes must reject it.
        let cs = vec![
            contact([10.0, 0.0, 0.0], [-1.0, 0.0, 0.0]),
            contact([-10.0, 0.0, 0.0], [1.0, 0.0, 0.0]),
        ];
        let ws = build_wrenches(&cs, 0.3, 8, Point3::origin(), 10.0).unwrap();
        for w in ws.wrenches() {
            assert!(w[3].abs() < 1e-12, "torque-x must vanish, got {}", w[3]);
        }
        let q = evaluate(&ws);
        assert!(!q.force_closure);
        assert!(!force_closure_oracle_lp(&ws));
    }

    #[test]
    fn padded_antipodal_sphere_grasp_is_force_closure() {
        // Two finger pads on opposite sides of a 20 mm sphere, each pad
        // resting on a 4-point square cluster: the realistic version of the
        // classical antipodal grasp, full rank in wrench space.
        let r = 10.0_f64;
        let mut cs = Vec::new();
        for sx in [1.0, -1.0] {
            for (dy, dz) in [(2.0, 2.0), (2.0, -2.0), (-2.0, 2.0), (-2.0, -2.0)] {
                let x = sx * (r * r - dy * dy - dz * dz).sqrt();
                let p = Point3::new(x, dy, dz);
                cs.push(Contact {
                    position: p,
                    normal: -p.coords / r,
                    link: String::from("pad"),
                    distance: 0.0,
                });
            }
        }
        let ws = build_wrenches(&cs, 0.3, 8, Point3::origin(), r).unwrap();
        let q = evaluate(&ws);
        assert!(q.force_closure, "epsilon = {}", q.epsilon);
        assert!(q.epsilon > EPSILON_TOL);
        assert!(force_closure_oracle_lp(&ws));
        // Epsilon sits inside the LP sandwich.
        let d = lp_min_axis_delta(&ws).unwrap();
        assert!(q.epsilon <= d + 1e-6 && q.epsilon >= d / 6.0_f64.sqrt() - 1e-6);
    }
}
