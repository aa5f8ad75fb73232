//! A Denjoy counterexample: irrational rotation number, but orbits never
//! enter the blown-up intervals.

use bsdl::circle::rotation_number;
use bsdl::denjoy::{golden, Denjoy};

fn main() -> bsdl::Result<()> {
    let d = Denjoy::new(golden(), 12, 0.5)?;
    let f = d.lift();
    let r = rotation_number(&f, 100_000, 64, 1e-8);
    println!("alpha = {:.10}, estimated rotation number = {:.10}", golden(), r.value);
    let ivs = d.intervals();
    println!("{} inserted intervals of total length {:.6}", ivs.len(), d.inserted_mass());
    for iv in ivs.iter().take(5) {
        println!("  k = {:>3}: [{:.6}, {:.6})", iv.k, iv.start, iv.start + iv.len);
    }

    let mut x = 0.3;
    let mut inside = 0;
    for _ in 0..20_000 {
        x = f.eval(x);
        inside += d.in_gap_interior(x.rem_euclid(1.0)) as usize;
    }
    println!("orbit points inside a gap after the first step: {inside}");
    Ok(())
}
