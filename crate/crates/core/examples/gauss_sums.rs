//! Characters modulo q: structure of the unit group, conductors, parities and
//! the magnitude of Gauss sums of the primitive ones.

use qdual::arith::unit_group;
use qdual::characters::{enumerate_characters, primitive_characters};

fn main() {
    let q: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let g = unit_group(q);
    println!("(Z/{q})*: generators {:?}, orders {:?}, order {}", g.generators(), g.orders(), g.order());
    for chi in enumerate_characters(q) {
        let f = chi.conductor();
        let line = format!("{chi:?}  order {:>2}  conductor {:>3}  parity {:+}", chi.order(), f, chi.parity());
        if chi.is_primitive() {
            let t = chi.gauss_sum();
            println!("{line}  |θ|² = {:.12}", t.norm_sqr());
        } else {
            println!("{line}  induced from {:?}", chi.primitive());
        }
    }
    let worst = (1..=100u64)
        .flat_map(|m| primitive_characters(m).into_iter().map(move |c| (c.gauss_sum().norm_sqr() - m as f64).abs()))
        .fold(0.0f64, f64::max);
    println!("largest ||θ|² - q| over primitive characters with q <= 100: {worst:.3e}");
}
