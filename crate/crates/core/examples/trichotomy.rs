//! Perturbed standard torus actions: the attracting invariant circle carries
//! finite orbits, is itself minimal, or contains a Cantor minimal set.

use bsdl::catalog::{build, perturbed_torus, CatalogParams};
use bsdl::experiments::{trichotomy, TrichotomyParams};

fn main() -> bsdl::Result<()> {
    let params = TrichotomyParams::default();
    let mut cases = vec![];
    for eps in [0.5 - std::f64::consts::LN_2, 1e-3] {
        cases.push((format!("h_ε, ε = {eps:.6}"), perturbed_torus(2, eps)?));
    }
    let p = CatalogParams { n: 2, eps: 0.0, k: Some("denjoy:golden,10,0.5".into()) };
    cases.push(("product with a Denjoy map".into(), build("product", &p)?));

    for (name, act) in cases {
        let r = trichotomy(&act, &params)?;
        let rn = match r.rotation_number.rational_witness {
            Some(w) => format!("{}/{}", w.p, w.q),
            None => format!("{:.6}", r.rotation_number.value),
        };
        println!("{name:<28} rotation {rn:<10} → {:?}", r.outcome);
        if let Some(note) = r.evidence.note {
            println!("    {note}");
        }
    }
    Ok(())
}
