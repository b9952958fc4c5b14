//! Local character sums for (5n+1)/(5n-1): the strata at 2², 3 and 5², and
//! which character pairs survive at each.

use qdual::eta::{enumerate_strata, eta_table, local_candidates};
use qdual::{FractionFamily, Mode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let family = FractionFamily::new(5, 1, 5, -1)?;
    let c = family.constraints();
    for (p, alpha) in [(2u64, 2u32), (3, 1), (5, 2)] {
        let strata = enumerate_strata(&c, p, alpha, None);
        let set = local_candidates(&c, p, alpha, Mode::Simultaneous);
        println!("{p}^{alpha}: {} strata, {} surviving pairs", strata.len(), set.survivors.len());
        for s in &strata {
            println!("  stratum beta {} gamma {} (u modulo {})", s.beta, s.gamma, s.range());
        }
        for cand in set.survivors.iter().take(4) {
            println!("  survivor {:?} ⊗ {:?}", cand.chi1, cand.chi2);
        }
    }
    // At 5 the pair (w^u, w^v) survives exactly when 5 | u - v.
    let rows = eta_table(&c, 5, 2, Mode::Simultaneous, None);
    let constant = rows.iter().filter(|r| r.all_equal).count();
    println!("5^2 table: {} rows, {} with constant nonzero summands", rows.len(), constant);
    Ok(())
}
