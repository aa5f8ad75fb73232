//! Graph transform for the normally hyperbolic circles of a perturbed h₀.

use bsdl::catalog::standard_torus;
use bsdl::experiments::{find_invariant_circle, flat_graph, restricted_lift, Direction};
use bsdl::perturb::{perturb_after, BumpField, Support};
use bsdl::circle::rotation_number;

fn main() -> bsdl::Result<()> {
    let act = standard_torus(2)?;
    let h0 = act.h.as_torus().unwrap();
    // perturb away from u = 1/2 so C₂ stays put
    let phi = BumpField::random(3, 1e-2, Support::Band { center: 0.0, radius: 0.3 })?;
    let h = perturb_after(h0, &phi)?;

    let attracting = find_invariant_circle(&h, &flat_graph(0.0), Direction::Forward, 200, 1e-10)?;
    println!(
        "attracting: residual {:.1e} after {} steps, distance to C₁ {:.2e}",
        attracting.residual,
        attracting.iterations,
        attracting.distance_to(0.0)
    );
    let repelling = find_invariant_circle(&h, &flat_graph(0.5), Direction::Backward, 200, 1e-10)?;
    println!(
        "repelling:  residual {:.1e} after {} steps, distance to C₂ {:.2e}",
        repelling.residual,
        repelling.iterations,
        repelling.distance_to(0.5)
    );
    let r = rotation_number(&restricted_lift(&h, &attracting), 100_000, 64, 1e-8);
    println!("rotation number of h on the attracting circle: {:.8}", r.value);
    Ok(())
}
