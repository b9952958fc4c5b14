//! Random quadruples (u1, v1, u2, v2): every non-principal primitive
//! character of prime-power modulus D making χ(u1 n + v1)·χ̄(u2 n + v2)
//! constant should have D dividing 6|Δ|.

use qdual::eta::{lemma6_property_scan, lemma6_scan};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for report in lemma6_scan((5, 1, 5, -1), 3)? {
        println!("(5,1,5,-1) mod 3: {:?} constant from k = {:?}", report.character, report.k0);
    }
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let witnesses = lemma6_property_scan(seed, 300, 12, 200);
    let bad = witnesses.iter().filter(|w| !w.divides_six_delta || !w.local_form_holds).count();
    println!("seed {seed}: {} witnesses, {bad} violations", witnesses.len());
    for w in witnesses.iter().take(5) {
        println!("  {:?} D = {} {:?}", w.quadruple, w.modulus, w.character);
    }
    Ok(())
}
