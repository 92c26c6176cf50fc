//! Cross-validation of the two independent force-closure routes (6-D wrench
//! hull vs LP reach certificate) on randomized grasps, plus the geometric
//! invariances the quality measure must satisfy.

use nalgebra::{Point3, Rotation3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skelgrasp_core::mesh::Contact;
use skelgrasp_core::quality::{
    evaluate, evaluate_wrenches, force_closure_oracle_lp, lp_min_axis_delta, Wrench, EPSILON_TOL,
};
use skelgrasp_core::{build_wrenches, WrenchSet};

fn contact(position: Point3<f64>, normal: Vector3<f64>) -> Contact {
    Contact {
        position,
        normal,
        link: String::from("t"),
        distance: 0.0,
    }
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n < 1.0 {
            return v / n;
        }
    }
}

/// Random grasp on a sphere of radius `r`: contacts on the surface with
/// inward (pressing) normals, so that spread-out contact sets tend to be
/// force closure and clumped ones tend not to be.
fn random_sphere_grasp(rng: &mut ChaCha8Rng) -> (WrenchSet, f64) {
    let r = rng.gen_range(5.0..50.0);
    let n_contacts = rng.gen_range(2..=5);
    let mu = [0.2, 0.3, 0.5][rng.gen_range(0..3)];
    let m = [4, 8][rng.gen_range(0..2)];
    // Clump some grasps onto a cap to generate non-closure cases.
    let cap = rng.gen_bool(0.35);
    let cap_axis = random_unit(rng);
    let contacts: Vec<Contact> = (0..n_contacts)
        .map(|_| {
            let dir = if cap {
                (cap_axis + 0.3 * random_unit(rng)).normalize()
            } else {
                random_unit(rng)
            };
            contact(Point3::from(dir * r), -dir)
        })
        .collect();
    let ws = build_wrenches(&contacts, mu, m, Point3::origin(), r).unwrap();
    (ws, r)
}

#[test]
fn hull_and_lp_routes_agree_on_1000_random_grasps() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9a11_0001);
    let mut closure = 0usize;
    let mut open = 0usize;
    let mut ambiguous = 0usize;
    for case in 0..1000 {
        let (ws, _) = random_sphere_grasp(&mut rng);
        let hull = evaluate(&ws);
        let delta = lp_min_axis_delta(&ws);
        let lp = force_closure_oracle_lp(&ws);

        // Within this band of the closure threshold the two routes may
        // legitimately round a boundary case differently.
        let near_boundary = match delta {
            Some(d) => d.abs() < 10.0 * EPSILON_TOL || hull.epsilon.abs() < 10.0 * EPSILON_TOL,
            None => false,
        };
        if near_boundary && hull.force_closure != lp {
            ambiguous += 1;
            continue;
        }
        assert_eq!(
            hull.force_closure, lp,
            "case {case}: hull says {} (eps {}), LP says {} (delta {:?})",
            hull.force_closure, hull.epsilon, lp, delta
        );
        if hull.force_closure {
            closure += 1;
            // The 12 axis reaches bracket the inscribed radius.
            let d = delta.expect("closure implies feasible LP");
            assert!(
                hull.epsilon <= d + 1e-7 && hull.epsilon >= d / 6.0_f64.sqrt() - 1e-7,
                "case {case}: eps {} outside [{}, {}]",
                hull.epsilon,
                d / 6.0_f64.sqrt(),
                d
            );
        } else {
            open += 1;
        }
    }
    // The generator must exercise both verdicts heavily for the agreement
    // check to mean anything.
    assert!(closure > 200, "only {closure} closure cases");
    assert!(open > 200, "only {open} open cases");
    assert!(ambiguous < 20, "{ambiguous} boundary cases is suspicious");
}

#[test]
fn epsilon_never_drops_when_contacts_are_added() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9a11_0002);
    let mut checked = 0usize;
    for _ in 0..100 {
        let r = rng.gen_range(5.0..40.0);
        let base: Vec<Contact> = (0..4)
            .map(|_| {
                let dir = random_unit(&mut rng);
                contact(Point3::from(dir * r), -dir)
            })
            .collect();
        let mut extended = base.clone();
        for _ in 0..rng.gen_range(1..=2) {
            let dir = random_unit(&mut rng);
            extended.push(contact(Point3::from(dir * r), -dir));
        }
        let eps_base = evaluate(&build_wrenches(&base, 0.3, 8, Point3::origin(), r).unwrap());
        let eps_ext = evaluate(&build_wrenches(&extended, 0.3, 8, Point3::origin(), r).unwrap());
        if !eps_base.force_closure {
            continue;
        }
        checked += 1;
        // The extended wrench set is a superset: its hull contains the base
        // hull, so the inscribed ball cannot shrink (beyond jitter noise).
        assert!(
            eps_ext.epsilon >= eps_base.epsilon - 1e-7,
            "base eps {} dropped to {}",
            eps_base.epsilon,
            eps_ext.epsilon
        );
    }
    assert!(checked > 30, "only {checked} closure bases");
}

#[test]
fn epsilon_is_invariant_under_wrench_space_rotation() {
    // A rigid rotation R of the whole scene maps each wrench (f, tau) to
    // (Rf, Rtau), an isometry of wrench space: epsilon must not move.
    let mut rng = ChaCha8Rng::seed_from_u64(0x9a11_0003);
    let mut checked = 0usize;
    for case in 0..120 {
        let (ws, _) = random_sphere_grasp(&mut rng);
        let base = evaluate(&ws);
        // Jitter moves epsilon by ~1e-10 absolute, so the relative bound
        // is only meaningful away from the closure boundary.
        if !base.force_closure || base.epsilon < 1e-3 {
            continue;
        }
        checked += 1;
        let rot = Rotation3::from_axis_angle(
            &nalgebra::Unit::new_normalize(random_unit(&mut rng)),
            rng.gen_range(0.1..std::f64::consts::PI),
        );
        let rotated: Vec<Wrench> = ws
            .wrenches()
            .iter()
            .map(|w| {
                let f = rot * Vector3::new(w[0], w[1], w[2]);
                let t = rot * Vector3::new(w[3], w[4], w[5]);
                Wrench::new(f.x, f.y, f.z, t.x, t.y, t.z)
            })
            .collect();
        let turned = evaluate_wrenches(&rotated);
        assert!(turned.force_closure, "case {case} lost closure");
        let rel = (turned.epsilon - base.epsilon).abs() / base.epsilon;
        assert!(
            rel < 1e-6,
            "case {case}: eps {} vs {} (rel {rel})",
            base.epsilon,
            turned.epsilon
        );
    }
    assert!(checked > 15, "only {checked} closure cases");
}

#[test]
fn physical_rotation_preserves_the_verdict() {
    // Rotating the contacts themselves re-derives each cone's tangent
    // frame, so the discretised edge set shifts phase; the verdict must
    // survive and epsilon stay in the same neighbourhood.
    let mut rng = ChaCha8Rng::seed_from_u64(0x9a11_0004);
    let mut checked = 0usize;
    let tetra = [
        Vector3::new(1.0, 1.0, 1.0),
        Vector3::new(1.0, -1.0, -1.0),
        Vector3::new(-1.0, 1.0, -1.0),
        Vector3::new(-1.0, -1.0, 1.0),
    ];
    for case in 0..50 {
        let r = rng.gen_range(5.0..40.0);
        // Perturbed tetrahedral placements give solidly-closure grasps,
        // away from the boundary where discretisation phase dominates.
        let contacts: Vec<Contact> = tetra
            .iter()
            .map(|d| {
                let dir = (d.normalize() + 0.25 * random_unit(&mut rng)).normalize();
                contact(Point3::from(dir * r), -dir)
            })
            .collect();
        let base = evaluate(&build_wrenches(&contacts, 0.4, 8, Point3::origin(), r).unwrap());
        if !base.force_closure || base.epsilon < 0.01 {
            continue;
        }
        checked += 1;
        let rot = Rotation3::from_axis_angle(
            &nalgebra::Unit::new_normalize(random_unit(&mut rng)),
            rng.gen_range(0.1..std::f64::consts::PI),
        );
        let moved: Vec<Contact> = contacts
            .iter()
            .map(|c| contact(rot * c.position, rot * c.normal))
            .collect();
        let turned = evaluate(&build_wrenches(&moved, 0.4, 8, Point3::origin(), r).unwrap());
        assert!(turned.force_closure, "case {case} lost closure");
        let rel = (turned.epsilon - base.epsilon).abs() / base.epsilon;
        assert!(
            rel < 0.5,
            "case {case}: eps {} vs {} (rel {rel})",
            base.epsilon,
            turned.epsilon
        );
    }
    assert!(checked > 25, "only {checked} solid closure cases");
}

#[test]
fn epsilon_is_scale_invariant_to_the_bit() {
    // Scaling every length by a power of two is exact in binary floating
    // point; with rho scaled alongside, the wrench sets are bit-identical
    // and so is epsilon (the hull jitter is seeded on the same values).
    let mut rng = ChaCha8Rng::seed_from_u64(0x9a11_0005);
    for _ in 0..20 {
        let r = rng.gen_range(5.0..40.0);
        let contacts: Vec<Contact> = (0..4)
            .map(|_| {
                let dir = random_unit(&mut rng);
                contact(Point3::from(dir * r), -dir)
            })
            .collect();
        let scaled: Vec<Contact> = contacts
            .iter()
            .map(|c| contact(c.position * 4.0, c.normal))
            .collect();
        let a = evaluate(&build_wrenches(&contacts, 0.3, 8, Point3::origin(), r).unwrap());
        let b = evaluate(&build_wrenches(&scaled, 0.3, 8, Point3::origin(), 4.0 * r).unwrap());
        assert_eq!(a.epsilon.to_bits(), b.epsilon.to_bits());
        assert_eq!(a.force_closure, b.force_closure);
    }
}

#[test]
fn evaluation_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9a11_0006);
    for _ in 0..10 {
        let (ws, _) = random_sphere_grasp(&mut rng);
        let a = evaluate(&ws);
        let b = evaluate(&ws);
        assert_eq!(a.epsilon.to_bits(), b.epsilon.to_bits());
    }
}

#[test]
fn in_plane_contact_forces_cap_epsilon_at_mu() {
    // Contacts in the xy-plane with in-plane normals: any force along z
    // comes only from the friction cone flanks, whose z-component is below
    // mu. Epsilon is at most the +z reach of the hull, hence at most mu,
    // no matter how many contacts conspire.
    let mut rng = ChaCha8Rng::seed_from_u64(0x9a11_0007);
    let mu = 1e-4;
    for _ in 0..20 {
        let contacts: Vec<Contact> = (0..5)
            .map(|_| {
                let ang = rng.gen_range(0.0..std::f64::consts::TAU);
                let p = Point3::new(10.0 * ang.cos(), 10.0 * ang.sin(), 0.0);
                contact(p, Vector3::new(-ang.cos(), -ang.sin(), 0.0))
            })
            .collect();
        let ws = build_wrenches(&contacts, mu, 8, Point3::origin(), 10.0).unwrap();
        assert!(evaluate(&ws).epsilon <= 1.5 * mu);
        if let Some(d) = lp_min_axis_delta(&ws) {
            assert!(d <= 1.5 * mu, "axis reach {d} above the mu cap");
        }
    }
}
