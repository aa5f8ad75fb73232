//! Orders and conjugacy in GL(2,ℤ), and linear parts compatible with the
//! Baumslag–Solitar relation.

use bsdl::gl2z::{bs_linear_compatible, conjugate_in_gl2z, finite_order, IntMatrix2, DEFAULT_CONJUGACY_BOUND};

fn main() -> bsdl::Result<()> {
    let ms = [[[0, -1], [1, 1]], [[0, 1], [-1, 0]], [[-1, 0], [0, -1]], [[1, 1], [0, 1]], [[2, 1], [1, 1]]];
    for rows in ms {
        let a = IntMatrix2::from_rows(rows);
        println!("{rows:?}: det {}, trace {}, order {:?}", a.det(), a.trace(), finite_order(&a)?);
    }

    let a = IntMatrix2::from_rows([[0, 1], [-1, 0]]);
    let b = IntMatrix2::from_rows([[0, -1], [1, 0]]);
    println!("X B X⁻¹ = A: {:?}", conjugate_in_gl2z(&a, &b, DEFAULT_CONJUGACY_BOUND)?);
    // a unipotent matrix is never conjugate to its square
    let u = IntMatrix2::from_rows([[1, 1], [0, 1]]);
    println!("[[1,1],[0,1]] vs its square: {:?}", conjugate_in_gl2z(&u.pow(2)?, &u, DEFAULT_CONJUGACY_BOUND)?);

    let id = IntMatrix2::from_rows([[1, 0], [0, 1]]);
    let minus = IntMatrix2::from_rows([[-1, 0], [0, -1]]);
    for n in 2..=4 {
        println!("A_f = −I, A_h = I, n = {n}: compatible = {}", bs_linear_compatible(&minus, &id, n)?);
    }
    Ok(())
}
