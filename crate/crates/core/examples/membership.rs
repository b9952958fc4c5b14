//! Decide membership of pairs in the principal class and print the
//! resulting congruence criterion.

use qdual::dual::assemble_dual;
use qdual::membership::{classify, criterion_table, Verdict};
use qdual::{FractionFamily, Mode, PositiveRational, Target};

fn pair(a: u64, b: u64) -> Target {
    Target::Pair(PositiveRational::integer(a), PositiveRational::integer(b))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (a, b, big_a, big_b) in [(5, 1, 5, -1), (3, 1, 5, 2)] {
        let family = FractionFamily::new(a, b, big_a, big_b)?;
        let dual = assemble_dual(&family, Mode::Simultaneous)?;
        println!("{family}: dual order {}", dual.order);
        for t in [pair(26, 26), pair(2, 2), pair(7, 3), pair(4, 1), pair(11, 9)] {
            let v = classify(&t, &dual)?;
            println!("  {t}: {}", v.verdict);
        }
        let table = criterion_table(&dual, 10_000)?;
        let members = table.rows.iter().filter(|r| r.verdict == Verdict::Member).count();
        println!("  criterion modulo {:?}: {members} of {} unit classes are members", table.moduli, table.rows.len());
        println!("  forbidden (coordinate, prime): {:?}", table.forbidden_primes);
    }
    Ok(())
}
