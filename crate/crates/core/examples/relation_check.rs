//! Builds every catalog action and prints its relation residuals.

use bsdl::catalog::{build, representatives};

fn main() -> bsdl::Result<()> {
    println!("{:<48} {:>12} {:>12}", "action", "h f h⁻¹ f⁻ⁿ", "second power");
    for (id, params) in representatives() {
        let act = build(&id, &params)?;
        println!("{:<48} {:>12.3e} {:>12.3e}", act.label, act.relation.residual, act.relation.iterated_residual);
    }
    Ok(())
}
