//! A global fixed point survives conjugation of the whole action.

use bsdl::catalog::morse_smale_example;
use bsdl::experiments::persistent_fixed_point;
use bsdl::perturb::{conjugate_action, BumpField, Support};

fn main() -> bsdl::Result<()> {
    let base = morse_smale_example(2)?;
    for seed in 0..4 {
        let phi = BumpField::random(seed, 1e-3, Support::Global)?;
        let act = conjugate_action(&base, &phi)?;
        match persistent_fixed_point(&act, 64) {
            Some(r) => println!(
                "seed {seed}: ({:.5}, {:.5}), |f(x)−x| = {:.1e}, |h(x)−x| = {:.1e}",
                r.point[0], r.point[1], r.f_residual, r.h_residual
            ),
            None => println!("seed {seed}: no common fixed point found"),
        }
    }
    Ok(())
}
