//! Rotation numbers with rational certificates.

use bsdl::catalog::periodic_circle_pair;
use bsdl::circle::{rotation_number, CircleLift};

fn show(name: &str, f: &CircleLift) {
    let r = rotation_number(f, 100_000, 64, 1e-8);
    match r.rational_witness {
        Some(w) => println!("{name:<24} {}/{} (certified at x = {:.6}, residual {:.1e})", w.p, w.q, w.point, w.residual),
        None => println!("{name:<24} {:.8} ± {:.1e}", r.value, r.error_bound),
    }
}

fn main() -> bsdl::Result<()> {
    show("rotation by ln 2", &CircleLift::rotation(std::f64::consts::LN_2));
    show("rotation by 3/7", &CircleLift::rotation(3.0 / 7.0));
    for n in 3..=5 {
        let (f, h) = periodic_circle_pair(n)?;
        show(&format!("glued f, n = {n}"), &f);
        show(&format!("glued h, n = {n}"), &h);
    }
    Ok(())
}
