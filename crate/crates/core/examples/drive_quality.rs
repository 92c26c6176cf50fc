//! Manual drive of the grasp-quality pipeline on analytically known cases.

use nalgebra::{Point3, Vector3};
use skelgrasp_core::mesh::Contact;
use skelgrasp_core::quality::{force_closure_oracle_lp, lp_min_axis_delta};
use skelgrasp_core::{build_wrenches, evaluate};

fn contact(p: Point3<f64>, n: Vector3<f64>) -> Contact {
    Contact {
        position: p,
        normal: n,
        link: String::from("drive"),
        distance: 0.0,
    }
}

fn main() {
    let r = 10.0;

    // Exactly antipodal point pair on a sphere: torque about the contact
    // axis is unresisted, so this must NOT be force closure.
    let pair = [
        contact(Point3::new(r, 0.0, 0.0), Vector3::new(-1.0, 0.0, 0.0)),
        contact(Point3::new(-r, 0.0, 0.0), Vector3::new(1.0, 0.0, 0.0)),
    ];
    let ws = build_wrenches(&pair, 0.3, 8, Point3::origin(), r).unwrap();
    let q = evaluate(&ws);
    println!(
        "antipodal point pair: closure={} eps={:.3e} lp={}",
        q.force_closure,
        q.epsilon,
        force_closure_oracle_lp(&ws)
    );
    assert!(!q.force_closure && !force_closure_oracle_lp(&ws));

    // Two square four-point pads at the same poles: the pad spread restores
    // the missing torque direction, so this IS force closure.
    let mut pads = Vec::new();
    for sx in [1.0f64, -1.0] {
        for (dy, dz) in [(2.0f64, 2.0f64), (2.0, -2.0), (-2.0, 2.0), (-2.0, -2.0)] {
            let x = sx * (r * r - dy * dy - dz * dz).sqrt();
            let p = Point3::new(x, dy, dz);
            pads.push(contact(p, -p.coords / r));
        }
    }
    let ws = build_wrenches(&pads, 0.3, 8, Point3::origin(), r).unwrap();
    let q = evaluate(&ws);
    let delta = lp_min_axis_delta(&ws).unwrap();
    println!(
        "padded antipodal grasp: closure={} eps={:.6} lp_delta={:.6}",
        q.force_closure, q.epsilon, delta
    );
    assert!(q.force_closure && force_closure_oracle_lp(&ws));
    assert!(q.epsilon <= delta + 1e-9 && q.epsilon >= delta / 6.0f64.sqrt() - 1e-9);

    // Regular tetrahedral grasp: solid closure with epsilon well above
    // the pair cases; also check the LP bracket.
    let dirs = [
        Vector3::new(1.0, 1.0, 1.0),
        Vector3::new(1.0, -1.0, -1.0),
        Vector3::new(-1.0, 1.0, -1.0),
        Vector3::new(-1.0, -1.0, 1.0),
    ];
    let tetra: Vec<Contact> = dirs
        .iter()
        .map(|d| {
            let dir = d.normalize();
            contact(Point3::from(dir * r), -dir)
        })
        .collect();
    let ws = build_wrenches(&tetra, 0.5, 8, Point3::origin(), r).unwrap();
    let q = evaluate(&ws);
    let delta = lp_min_axis_delta(&ws).unwrap();
    println!(
        "tetrahedral grasp:      closure={} eps={:.6} lp_delta={:.6}",
        q.force_closure, q.epsilon, delta
    );
    assert!(q.force_closure);
    assert!(q.epsilon > 0.1, "tetrahedral grasp should be solid");
    assert!(q.epsilon <= delta + 1e-9 && q.epsilon >= delta / 6.0f64.sqrt() - 1e-9);

    println!("quality drive ok");
}
