//! One line per acceptance criterion; exits non-zero if any fails. Runs
//! without the libtest harness so the lines are always printed.

use std::time::Instant;

use bsdl::reproduce::{criteria, DEFAULT_SEED};

fn main() {
    let mut failed = Vec::new();
    for c in criteria() {
        let start = Instant::now();
        let (ok, detail) = match c.run(DEFAULT_SEED) {
            Ok(check) => (check.pass, check.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        println!(
            "criterion {:>2} {:<38} {} ({:.1} s) {}",
            c.id,
            c.name,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            detail
        );
        if !ok {
            failed.push(c.id);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria().len());
}
