//! Minimal sets of the group inside fix(f): a finite orbit, the whole circle
//! C₁, or a Cantor set coming from a Denjoy map.

use bsdl::catalog::{build, CatalogParams};
use bsdl::estimators::bs_minimal_set;

fn main() -> bsdl::Result<()> {
    for k in ["rot:2/5", "rot:ln2", "denjoy:golden,10,0.5"] {
        let params = CatalogParams { n: 2, eps: 0.0, k: Some(k.into()) };
        let act = build("product", &params)?;
        let est = bs_minimal_set(&act, 256, 4);
        let d = &est.diagnostics;
        println!("k = {k:<22} {:?}: {} points in {} cells, period {:?}", est.label, est.points_count, est.cells.len(), d.period);
        for g in &d.gaps {
            println!("    N = {:>6}: largest gap {:.4}", g.n, g.largest_gap);
        }
    }
    Ok(())
}
