use bcfdim::systems::{
    make_system, make_system_with_k, parse_alphabet, parse_rational, star_generators, AlphabetSpec,
    Family,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use std::collections::BTreeSet;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[test]
fn star_norms_match_closed_form() {
    // phi_{2^n j} has D(1) = (n+1)(j-2)+1 and D(0) = (n+1)(j-1)+1
    let a = parse_alphabet("2,3,4,5,6,7").unwrap();
    let gens = star_generators(&a, 50, 50).unwrap();
    assert!(!gens.is_empty());
    for g in &gens {
        let n = g.n as i64;
        let j = g.j as i64;
        let d1 = (n + 1) * (j - 2) + 1;
        let d0 = (n + 1) * (j - 1) + 1;
        assert_eq!(g.word.sup_norm_exact(), rat(1, d1 * d1), "n={n} j={j}");
        assert_eq!(g.word.inf_norm_exact(), rat(1, d0 * d0), "n={n} j={j}");
        assert!(g.word.is_unimodular());
    }
}

#[test]
fn star_enumeration_shape() {
    let a = parse_alphabet("2,5").unwrap();
    let gens = star_generators(&a, 3, 10).unwrap();
    // single hyperbolic letter, prefixes n = 0..=3
    assert_eq!(gens.len(), 4);
    assert!(gens.iter().all(|g| g.j == 5));
    assert_eq!(gens[2].word.letters(), &[2, 2, 5]);

    // without the parabolic letter only n = 0 survives
    let b = parse_alphabet("3,4").unwrap();
    let plain = star_generators(&b, 9, 10).unwrap();
    assert_eq!(plain.len(), 2);
    assert!(plain.iter().all(|g| g.n == 0));

    // parabolic-only alphabet degenerates to the fixed point
    assert!(star_generators(&parse_alphabet("2").unwrap(), 5, 5).is_err());
}

#[test]
fn alphabet_parse_and_display_roundtrip() {
    for text in ["4,5,6", "2..", "3..7", "2,5..9,40.."] {
        let a = parse_alphabet(text).unwrap();
        let shown = a.to_string();
        assert_eq!(parse_alphabet(&shown).unwrap(), a, "{text} -> {shown}");
    }
    assert!(parse_alphabet("").is_err());
    assert!(parse_alphabet("7..3").is_err());
    assert!(parse_alphabet("1,two").is_err());
}

#[test]
fn alphabet_membership_and_truncation() {
    let a = parse_alphabet("3,5..7,11..").unwrap();
    assert!(a.contains(3) && a.contains(6) && a.contains(11) && a.contains(400));
    assert!(!a.contains(4) && !a.contains(8) && !a.contains(10));
    assert_eq!(a.min_letter(), Some(3));
    assert_eq!(a.tracked_letters(13), vec![3, 5, 6, 7, 11, 12, 13]);
    assert!(a.is_cofinite());

    let removed = a.without(12);
    assert!(removed.contains(11) && !removed.contains(12) && removed.contains(13));
}

#[test]
fn distortion_defaults_per_family() {
    assert_eq!(make_system(Family::Bcf).unwrap().distortion_k, 9.0);
    assert_eq!(make_system(Family::BcfStar).unwrap().distortion_k, 4.0);
    assert_eq!(make_system(Family::Gauss).unwrap().distortion_k, 4.0);
    assert_eq!(make_system(Family::Counterexample { n2: 48 }).unwrap().distortion_k, 4.0);
    let sys = make_system_with_k(Family::Bcf, Some(4.0)).unwrap();
    assert_eq!(sys.distortion_k, 4.0);
    assert!(make_system_with_k(Family::Bcf, Some(0.5)).is_err());
}

#[test]
fn alphabet_validation_respects_family_minimum() {
    let bcf = make_system(Family::Bcf).unwrap();
    let gauss = make_system(Family::Gauss).unwrap();
    let ones = AlphabetSpec::finite([1, 2]);
    assert!(ones.validate_for(&bcf).is_err());
    assert!(ones.validate_for(&gauss).is_ok());
    assert!(AlphabetSpec::finite([2, 3]).validate_for(&bcf).is_ok());
    assert!(AlphabetSpec::new(BTreeSet::new(), None).validate_for(&bcf).is_err());
}

#[test]
fn similarity_ratio_validation() {
    let good = make_system(Family::Similarity { ratios: vec![rat(1, 3), rat(1, 3)] });
    assert!(good.is_ok());
    assert!(make_system(Family::Similarity { ratios: vec![rat(2, 3), rat(2, 3)] }).is_err());
    assert!(make_system(Family::Similarity { ratios: vec![rat(0, 1)] }).is_err());
    assert!(make_system(Family::Similarity { ratios: vec![] }).is_err());
}

#[test]
fn rational_parsing_forms() {
    assert_eq!(parse_rational("2/7").unwrap(), rat(2, 7));
    assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
    assert_eq!(parse_rational("3").unwrap(), rat(3, 1));
    assert!(parse_rational("1/0").is_err());
    assert!(parse_rational("x").is_err());
}

proptest! {
    #[test]
    fn parsed_alphabets_roundtrip(finite in prop::collection::btree_set(2u64..200, 0..12), from in prop::option::of(2u64..200)) {
        let a = AlphabetSpec::new(finite, from);
        prop_assume!(!a.is_empty());
        let text = a.to_string();
        prop_assert_eq!(parse_alphabet(&text).unwrap(), a);
    }

    #[test]
    fn tracked_letters_sorted_and_bounded(finite in prop::collection::btree_set(2u64..100, 1..10), cutoff in 2u64..120) {
        let a = AlphabetSpec::new(finite, None);
        let tracked = a.tracked_letters(cutoff);
        prop_assert!(tracked.windows(2).all(|w| w[0] < w[1]));
        // finite members are always tracked; only the cofinite range is cut off
        prop_assert!(tracked.iter().all(|&b| a.contains(b)));
        prop_assert!(tracked.iter().all(|&b| b <= cutoff || a.finite_part.contains(&b)));
    }
}
