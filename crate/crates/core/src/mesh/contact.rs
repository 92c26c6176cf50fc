//! Contact extraction between a posed hand link and an object at identity.
//!
//! Every triangle pair within the contact tolerance yields a candidate
//! contact at the object-side witness point with the object triangle's
//! outward normal. Candidates are then clustered greedily (closest pair
//! first) so that no two reported contacts of the same link are closer than
//! the cluster radius; each cluster is represented by its closest pair.

use nalgebra::{Point3, Vector3};

use crate::geometry::RigidPose;
use crate::mesh::{bvh, Mesh, CONTACT_CLUSTER_RADIUS_MM, CONTACT_TOLERANCE_MM};

/// A single contact between a hand link and the object.
#[derive(Debug, Clone, PartialEq)]
pub struct Contact {
    /// Contact point on the object surface (object/world frame, mm).
    pub position: Point3<f64>,
    /// Unit normal at the contact, pointing out of the object.
    pub normal: Vector3<f64>,
    /// Name of the hand link that produced the contact.
    pub link: String,
    /// Witness distance between the surfaces at extraction time (mm).
    pub distance: f64,
}

/// Contacts between `link` posed at `link_pose` and `object` at identity,
/// using the default tolerance and cluster radius. An empty result is not an
/// error: the link simply is not touching.
#[must_use]
pub fn extract_contacts(
    link: &Mesh,
    link_pose: &RigidPose,
    object: &Mesh,
    link_name: &str,
) -> Vec<Contact> {
    extract_contacts_with(
        link,
        link_pose,
        object,
        link_name,
        CONTACT_TOLERANCE_MM,
        CONTACT_CLUSTER_RADIUS_MM,
    )
}

/// [`extract_contacts`] with explicit tolerance and cluster radius (mm).
#[must_use]
pub fn extract_contacts_with(
    link: &Mesh,
    link_pose: &RigidPose,
    object: &Mesh,
    link_name: &str,
    tolerance: f64,
    cluster_radius: f64,
) -> Vec<Contact> {
    let identity = RigidPose::identity();
    // Witness points come back in the world frame because the object pose is
    // the first argument.
    let mut pairs = bvh::close_pairs(object, &identity, link, link_pose, tolerance);
    // Closest pairs become cluster representatives, so sort by distance;
    // ties keep (tri_a, tri_b) order for determinism.
    pairs.sort_by(|x, y| {
        x.distance
            .partial_cmp(&y.distance)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then((x.tri_a, x.tri_b).cmp(&(y.tri_a, y.tri_b)))
    });

    let r2 = cluster_radius * cluster_radius;
    let mut contacts: Vec<Contact> = Vec::new();
    for pair in &pairs {
        let pos = pair.point_a;
        if contacts.iter().any(|c| (c.position - pos).norm_squared() < r2) {
            continue;
        }
        contacts.push(Contact {
            position: pos,
            normal: object.triangle_normal(pair.tri_a),
            link: link_name.to_string(),
            distance: pair.distance,
        });
    }
    contacts
}
