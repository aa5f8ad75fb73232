//! Rotation sets of torus maps homotopic to the identity, and the lattice
//! they must lie on when the map is part of a BS(1,n) action.

use bsdl::catalog::standard_torus;
use bsdl::experiments::rotation_set_persistence;
use bsdl::perturb::{BumpField, Support};
use bsdl::torus::{conjugate_rotation_set_check, rotation_set, RotationSetParams, TorusLift};

fn main() -> bsdl::Result<()> {
    let params = RotationSetParams::default();

    let t = TorusLift::translation([0.25, -0.125]);
    let r = rotation_set(&t, &params)?;
    println!("translation (1/4, −1/8): point {:?}, diameter {:.1e}", r.point, r.diameter);

    let act = standard_torus(3)?;
    let f0 = act.f.as_torus().unwrap();
    let r = rotation_set(f0, &params)?;
    println!("f₀: point {:?}, error bound {:.1e}", r.point, r.error_bound);

    // conjugating by a near-identity map keeps the rotation set
    let phi = BumpField::random(7, 1e-2, Support::Global)?.to_lift();
    let c = conjugate_rotation_set_check(&t, &phi, &params)?;
    println!("conjugated translation: distance {:.2e} (tolerance {:.2e}) pass = {}", c.distance, c.tolerance, c.pass);

    // a perturbed f₀ must still snap to (0,0) in (1/(n−1))ℤ²
    let bent = BumpField::random(11, 1e-2, Support::Global)?;
    let f = bsdl::perturb::perturb_after(f0, &bent)?;
    let p = rotation_set_persistence(&f, 3, &params)?;
    println!(
        "perturbed f₀: estimate {:?}, snapped {:?}, window {:.3}, pass = {}",
        p.estimate.point,
        p.constraint.snapped.map(|s| s.map(|q| q.0.to_string())),
        p.window,
        p.pass
    );
    Ok(())
}
