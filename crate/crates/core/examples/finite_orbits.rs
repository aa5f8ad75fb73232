//! Finite BS-orbits: enumerated closures under the four generators.

use bsdl::bsgroup::{finite_bs_orbit, OrbitResult};
use bsdl::catalog::{morse_smale_example, nonfaithful_circle, standard_torus, KSpec};

fn describe(r: &OrbitResult) -> String {
    match r {
        OrbitResult::Finite { points, closure_residual } => format!("finite, {} points, residual {closure_residual:.1e}", points.len()),
        OrbitResult::Unconfirmed { points, .. } => format!("unconfirmed, {} points", points.len()),
        OrbitResult::ExceedsBound { explored } => format!("more than {explored} points"),
    }
}

fn main() -> bsdl::Result<()> {
    let ms = morse_smale_example(2)?;
    println!("Morse–Smale, (∞,∞): {}", describe(&finite_bs_orbit(&ms, [0.0, 0.0], 1e-6, 1000)));
    let st = standard_torus(2)?;
    println!("standard torus, (∞,0.1): {}", describe(&finite_bs_orbit(&st, [0.0, 0.1], 1e-6, 1000)));
    let rot = nonfaithful_circle(2, &KSpec::rotation(2.0 / 5.0))?;
    println!("rotation by 2/5: {}", describe(&finite_bs_orbit(&rot, [0.1, 0.0], 1e-6, 1000)));
    Ok(())
}
