//! Assemble the dual group of (Q*)²/Γ for Γ generated by (5n+1) ⊗ (5n-1)
//! and describe its structure.

use qdual::dual::{assemble_dual, group_structure};
use qdual::{FractionFamily, Mode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<i64> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let (a, b, big_a, big_b) = match args[..] {
        [a, b, c, d] => (a, b, c, d),
        _ => (5, 1, 5, -1),
    };
    let family = FractionFamily::new(a, b, big_a, big_b)?;
    let dual = assemble_dual(&family, Mode::Simultaneous)?;
    println!("{family}: moduli {:?}, {} combinations, {} rejected by pinning", dual.moduli, dual.combinations, dual.rejected_by_pinning);
    for e in &dual.elements {
        let second = e.character(2).primitive();
        println!(
            "  {:?} ⊗ {:?}  second coordinate order {} parity {:+}",
            e.chi_g1.primitive(),
            second,
            second.order(),
            second.parity()
        );
    }
    let s = group_structure(&dual);
    println!("order {}, invariant factors {:?}, closed {}", s.order, s.invariant_factors, s.closed);
    Ok(())
}
