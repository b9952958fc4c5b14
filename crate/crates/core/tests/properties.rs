//! Property tests for the invariants the pipeline relies on.

use num_integer::Integer;
use proptest::prelude::*;

use qdual::arith::{crt_combine, euler_phi, exact_sum, factorize, RootOfUnity};
use qdual::characters::{enumerate_characters, CharacterValue, DirichletCharacter};
use qdual::dual::{assemble_dual, group_structure};
use qdual::family::{modulus_bounds, refine_prime_support};
use qdual::finder::{bounded_search, build_basis, hnf_solve, verify, SearchOptions};
use qdual::membership::{classify, Verdict};
use qdual::{FractionFamily, Mode, PositiveRational, Target};

fn family_strategy() -> impl Strategy<Value = FractionFamily> {
    (1i64..=7, -7i64..=7, 1i64..=7, -7i64..=7).prop_filter_map("degenerate", |(a, b, c, d)| FractionFamily::new(a, b, c, d).ok())
}

fn mode_strategy() -> impl Strategy<Value = Mode> {
    prop_oneof![Just(Mode::Single), Just(Mode::Simultaneous)]
}

fn generator_target(f: &FractionFamily, mode: Mode, n: i64) -> Target {
    let (x, y) = (f.numerator(n), f.denominator(n));
    match mode {
        Mode::Single => {
            let g = x.gcd(&y);
            Target::Single(PositiveRational::new(x / g, y / g).unwrap())
        }
        Mode::Simultaneous => Target::Pair(PositiveRational::new(x, 1).unwrap(), PositiveRational::new(y, 1).unwrap()),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn roots_of_unity_form_a_group(a in -500i128..500, b in -500i128..500, m in 1u64..120, k in -20i128..20) {
        let (x, y) = (RootOfUnity::new(a, m), RootOfUnity::new(b, m));
        prop_assert_eq!(x * y, RootOfUnity::new(a + b, m));
        prop_assert_eq!(x.pow(k), RootOfUnity::new(a * k, m));
        prop_assert!((x * x.conj()).is_one());
        prop_assert_eq!(m % x.order(), 0);
        prop_assert!(x.pow(x.order() as i128).is_one());
    }

    #[test]
    fn factorization_reconstructs(n in 1u64..10_000_000) {
        let f = factorize(n).unwrap();
        prop_assert_eq!(f.reconstruct(), Some(n));
        prop_assert!(f.primes().all(qdual::arith::is_prime));
    }

    #[test]
    fn crt_agrees_with_each_congruence(r1 in 0u64..1000, r2 in 0u64..1000, m1 in 1u64..200, m2 in 1u64..200) {
        prop_assume!(m1.gcd(&m2) == 1);
        let (x, m) = crt_combine(&[(r1, m1), (r2, m2)]).unwrap();
        prop_assert_eq!(m, m1 * m2);
        prop_assert_eq!(x % m1, r1 % m1);
        prop_assert_eq!(x % m2, r2 % m2);
    }

    #[test]
    fn characters_are_multiplicative(q in 1u64..300, index in 0u64..10_000, a in -5000i128..5000, b in -5000i128..5000) {
        let chi = DirichletCharacter::from_index(q, index % euler_phi(q)).unwrap();
        prop_assert_eq!(chi.evaluate(a * b), chi.evaluate(a) * chi.evaluate(b));
        prop_assert_eq!(chi.evaluate(a), chi.evaluate(a + q as i128));
        prop_assert_eq!(chi.evaluate(a).is_zero(), a.gcd(&(q as i128)) != 1);
        // The primitive character induces chi back.
        prop_assert_eq!(chi.primitive().induce(q).unwrap(), chi.clone());
        prop_assert_eq!(q % chi.conductor(), 0);
    }

    #[test]
    fn orthogonality_over_the_character_group(q in 1u64..120, a in 1i128..2000) {
        let values: Vec<RootOfUnity> = enumerate_characters(q).iter().filter_map(|c| c.evaluate(a).root()).collect();
        prop_assume!(!values.is_empty());
        let expected = if a.rem_euclid(q as i128) == 1 % q as i128 { euler_phi(q) as i64 } else { 0 };
        prop_assert!(exact_sum(&values).equals_integer(expected));
    }

    #[test]
    fn discriminant_factors(f in family_strategy()) {
        let c = f.constraints();
        prop_assert_eq!(c.delta, c.alpha * c.beta * c.delta1);
        prop_assert_eq!(c.delta1, c.a1 * c.big_b1 - c.big_a1 * c.b1);
    }

    #[test]
    fn refinement_is_idempotent_and_divides(f in family_strategy()) {
        let c = f.constraints();
        let raw = modulus_bounds(&c);
        let once = refine_prime_support(&c, &raw);
        let twice = refine_prime_support(&c, &once);
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(raw.sharp % once.sharp, 0);
        prop_assert_eq!(raw.simultaneous_g1 % once.simultaneous_g1, 0);
        prop_assert_eq!(raw.simultaneous_g2 % once.simultaneous_g2, 0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dual_elements_are_trivial_on_generators(f in family_strategy(), mode in mode_strategy(), seed in any::<u64>()) {
        prop_assume!(f.check_mode(mode).is_ok());
        let dual = assemble_dual(&f, mode).unwrap();
        let s = group_structure(&dual);
        prop_assert!(s.closed);
        prop_assert_eq!(s.order, dual.order);
        prop_assert_eq!(s.invariant_factors.iter().product::<u64>(), dual.order as u64);
        for e in &dual.elements {
            prop_assert_eq!(dual.moduli.0 % e.character(1).conductor(), 0);
            prop_assert_eq!(dual.moduli.1 % e.character(2).conductor(), 0);
        }
        // 500 generators from a seeded spread of indices.
        let mut n = f.n0 + 1 + (seed % 1000) as i64;
        for _ in 0..500 {
            let t = generator_target(&f, mode, n);
            prop_assert_eq!(classify(&t, &dual).unwrap().verdict, Verdict::Member, "generator n = {}", n);
            n += 1 + (n * 7 + seed as i64 % 13).rem_euclid(17);
        }
    }

    #[test]
    fn members_form_a_subgroup(f in family_strategy(), a in 1u64..500, b in 1u64..500, c in 1u64..500, d in 1u64..500) {
        let dual = assemble_dual(&f, Mode::Simultaneous).unwrap();
        let verdict = |x: u64, y: u64| classify(&Target::Pair(PositiveRational::integer(x), PositiveRational::integer(y)), &dual).unwrap().verdict;
        let (s, t, st) = (verdict(a, b), verdict(c, d), verdict(a * c, b * d));
        if s == Verdict::Member && t == Verdict::Member {
            prop_assert_eq!(st, Verdict::Member);
        }
        if s == Verdict::Member && t == Verdict::NonMember {
            prop_assert_ne!(st, Verdict::Member);
        }
        prop_assert_eq!(verdict(1, 1), Verdict::Member);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn finder_oracles_agree(which in 0usize..2, terms in prop::collection::btree_map(11i64..150, prop::bool::ANY, 1..4)) {
        let f = [(5, 1, 5, -1), (3, 1, 5, 2)].map(|(a, b, c, d)| FractionFamily::new(a, b, c, d).unwrap().with_n0(10).unwrap())[which];
        let (mut x, mut y) = (num_rational::Ratio::from_integer(1i128), num_rational::Ratio::from_integer(1i128));
        for (&n, &up) in &terms {
            let (u, v) = (num_rational::Ratio::from_integer(f.numerator(n)), num_rational::Ratio::from_integer(f.denominator(n)));
            if up { x *= u; y *= v } else { x /= u; y /= v }
        }
        let target = Target::Pair(PositiveRational::new(*x.numer(), *x.denom()).unwrap(), PositiveRational::new(*y.numer(), *y.denom()).unwrap());
        let dual = assemble_dual(&f, Mode::Simultaneous).unwrap();
        prop_assert_eq!(classify(&target, &dual).unwrap().verdict, Verdict::Member);
        let basis = build_basis(&f, Mode::Simultaneous, 300, 2000).unwrap();
        prop_assert!(hnf_solve(&basis, &target).unwrap().is_some());
        let (cert, _) = bounded_search(&basis, &target, SearchOptions { max_terms: terms.len(), node_budget: 5_000_000 }).unwrap();
        prop_assert!(verify(&cert, &f, &target));
        prop_assert!(cert.terms.len() <= terms.len());
    }

    #[test]
    fn values_are_zero_or_roots(q in 1u64..200, index in 0u64..1000, a in -1000i128..1000) {
        let chi = DirichletCharacter::from_index(q, index % euler_phi(q)).unwrap();
        match chi.evaluate(a) {
            CharacterValue::Zero => prop_assert!(a.gcd(&(q as i128)) != 1),
            CharacterValue::Unit(z) => prop_assert_eq!(chi.order() % z.order(), 0),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    /// Pairs with a ≢ 1 mod 5 are outside Γ for (5n+1) ⊗ (5n-1): the lattice
    /// test rejects them at any scale and the search never witnesses them.
    #[test]
    fn non_members_are_never_witnessed(a in 2u64..2000, b in 1u64..2000) {
        prop_assume!(a % 5 != 1);
        let f = FractionFamily::new(5, 1, 5, -1).unwrap().with_n0(10).unwrap();
        let basis = nonmember_basis(&f);
        let target = Target::Pair(PositiveRational::integer(a), PositiveRational::integer(b));
        prop_assert_eq!(hnf_solve(basis, &target).unwrap(), None);
        let r = bounded_search(basis, &target, SearchOptions { max_terms: 64, node_budget: 100_000 });
        let exhausted = matches!(r, Err(qdual::finder::FinderError::SearchExhausted { .. }));
        prop_assert!(exhausted, "non-member {} ⊗ {} was witnessed", a, b);
    }
}

fn nonmember_basis(f: &FractionFamily) -> &'static qdual::GeneratorBasis {
    static BASIS: std::sync::OnceLock<qdual::GeneratorBasis> = std::sync::OnceLock::new();
    BASIS.get_or_init(|| {
        build_basis(f, Mode::Simultaneous, qdual::finder::DEFAULT_NMAX, qdual::finder::DEFAULT_PRIME_BOUND).unwrap()
    })
}
