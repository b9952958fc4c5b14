//! Find an explicit simultaneous representation of 26 ⊗ 26 by the pairs
//! (5n+1) ⊗ (5n-1), n > 10, and check it in exact arithmetic.

use std::time::Instant;

use qdual::finder::{bounded_search, build_basis, certificate_product, verify, SearchOptions, DEFAULT_NMAX, DEFAULT_PRIME_BOUND};
use qdual::{FractionFamily, Mode, PositiveRational, Target};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let family = FractionFamily::new(5, 1, 5, -1)?.with_n0(10)?;
    let target = Target::Pair(PositiveRational::integer(26), PositiveRational::integer(26));

    let start = Instant::now();
    let basis = build_basis(&family, Mode::Simultaneous, DEFAULT_NMAX, DEFAULT_PRIME_BOUND)?;
    println!("basis: {} rows, {} columns, {} dropped ({:.2?})", basis.rows.len(), basis.columns.len(), basis.dropped, start.elapsed());

    let (cert, stats) = bounded_search(&basis, &target, SearchOptions::default())?;
    println!("found {} terms after {} nodes ({:.2?})", cert.terms.len(), stats.nodes, start.elapsed());
    for (n, e) in &cert.terms {
        println!("  n = {n:>5}  ε = {e:+}  ({}, {})", family.numerator(*n), family.denominator(*n));
    }
    let (first, second) = certificate_product(&cert);
    println!("product: {first} ⊗ {second}");
    println!("verified: {}", verify(&cert, &family, &target));
    Ok(())
}
