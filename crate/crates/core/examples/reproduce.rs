//! Runs a few acceptance criteria from the library and prints the table.

use bsdl::reproduce::{format_table, reproduce, DEFAULT_SEED};

fn main() -> bsdl::Result<()> {
    let ids: Vec<String> = std::env::args().skip(1).collect();
    let ids = if ids.is_empty() { vec!["1".into(), "2".into(), "5".into()] } else { ids };
    let (summary, timings) = reproduce(Some(&ids), DEFAULT_SEED);
    print!("{}", format_table(&summary, &timings));
    println!("hash {}", summary.hash()?);
    Ok(())
}
