//! Normal forms of words in BS(1,n) and their action on the projective line.

use bsdl::bsgroup::{normalize, Word};
use bsdl::catalog::standard_line;
use bsdl::chart::{from_u, to_u};

fn main() -> bsdl::Result<()> {
    let n = 2;
    let act = standard_line(n)?;
    for s in ["a^-1 b a", "a b a^-1", "b^3 a^2", "a^-2 b^4 a^2", "a b^-1 a^-1 b a b a^-1"] {
        let w: Word = s.parse()?;
        let nf = normalize(&w, n)?.to_string();
        let x = act.evaluate(&w, [to_u(1.0), 0.0]);
        println!("{s:<26} → {nf:<16} 1 ↦ {:.6}", from_u(x[0]));
    }
    Ok(())
}
