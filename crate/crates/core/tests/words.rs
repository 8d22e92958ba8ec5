use num_rational::BigRational;
use num_traits::{One, Zero};
use patricia_bridges::rng::derive_seed;
use patricia_bridges::words::{lex_compare, meet, parse_rational, SourceMeasure, Word, DEFAULT_DEPTH_CAP};
use proptest::prelude::*;
use std::cmp::Ordering;

fn word() -> impl Strategy<Value = Word> {
    prop::collection::vec(0u8..2, 0..12).prop_map(Word::from_bits)
}

fn measures() -> Vec<SourceMeasure> {
    vec![
        SourceMeasure::fair(),
        SourceMeasure::harmonic(),
        SourceMeasure::bernoulli(parse_rational("1/3").unwrap()).unwrap(),
        SourceMeasure::prefixed("01".parse().unwrap(), SourceMeasure::harmonic()),
    ]
}

#[test]
fn cylinders_sum_to_one_exactly() {
    for nu in measures() {
        for k in 0..=8 {
            let total = Word::all_of_length(k)
                .iter()
                .fold(BigRational::zero(), |acc, y| acc + nu.cylinder_prob(y));
            assert!(total.is_one(), "{nu} at k = {k}");
        }
    }
}

#[test]
fn harmonic_first_one_probabilities() {
    let nu = SourceMeasure::harmonic();
    for l in 1..=50usize {
        let expected = BigRational::new(1.into(), ((l * (l + 1)) as u64).into());
        assert_eq!(nu.cylinder_prob(&Word::zeros_then_one(l)), expected, "ℓ = {l}");
    }
}

#[test]
fn prefix_frequencies_within_three_sigma() {
    let trials = 100_000u64;
    for nu in measures() {
        let mut counts = std::collections::BTreeMap::<Word, u64>::new();
        for i in 0..trials {
            let mut z = nu.sample(derive_seed(99, i));
            *counts.entry(z.prefix(3)).or_default() += 1;
        }
        for y in Word::all_of_length(3) {
            let p = nu.cylinder_prob_f64(&y);
            let sigma = (p * (1.0 - p) / trials as f64).sqrt();
            let f = counts.get(&y).copied().unwrap_or(0) as f64 / trials as f64;
            assert!((f - p).abs() <= 3.0 * sigma + 1e-12, "{nu} {y}: {f} vs {p}");
        }
    }
}

#[test]
fn streams_are_reproducible_and_prefix_stable() {
    let nu = SourceMeasure::harmonic();
    let mut a = nu.sample(5);
    let mut b = nu.sample(5);
    let long = a.prefix(200);
    assert_eq!(b.prefix(50), long.prefix(50));
    assert_eq!(b.prefix(200), long);
}

#[test]
fn conditioned_stream_starts_with_leaf() {
    let nu = SourceMeasure::fair();
    let y: Word = "01".parse().unwrap();
    let mut z = nu.sample_conditioned(&y, 3).unwrap();
    assert_eq!(z.prefix(2), y);
    let dirac = SourceMeasure::prefixed("1".parse().unwrap(), SourceMeasure::fair());
    assert!(dirac.sample_conditioned(&"0".parse().unwrap(), 0).is_err());
}

#[test]
fn measure_spec_round_trip() {
    for nu in measures() {
        let back: SourceMeasure = nu.to_string().parse().unwrap();
        assert_eq!(back, nu);
    }
    assert!("bernoulli:1".parse::<SourceMeasure>().is_err());
    assert!("nope".parse::<SourceMeasure>().is_err());
}

#[test]
fn meet_of_equal_streams_hits_cap() {
    let nu = SourceMeasure::fair();
    let a = nu.sample(11);
    let b = nu.sample(11);
    assert!(meet(a, b, 64).is_err());
}

proptest! {
    #[test]
    fn shortlex_is_total_and_length_first(u in word(), v in word()) {
        let o = u.cmp(&v);
        if u.len() != v.len() {
            prop_assert_eq!(o, u.len().cmp(&v.len()));
        }
        prop_assert_eq!(o == Ordering::Equal, u == v);
    }

    #[test]
    fn meet_is_common_prefix(u in word(), v in word()) {
        let m = u.meet(&v);
        prop_assert!(m.is_prefix_of(&u) && m.is_prefix_of(&v));
        if m.len() < u.len() && m.len() < v.len() {
            prop_assert_ne!(u.bit(m.len()), v.bit(m.len()));
        }
        prop_assert_eq!(meet(&u, &v, DEFAULT_DEPTH_CAP).ok().map(|w| w.len()).unwrap_or(m.len()), m.len());
    }

    #[test]
    fn lex_compare_defined_iff_incomparable(u in word(), v in word()) {
        let comparable = u.is_strict_prefix_of(&v) || v.is_strict_prefix_of(&u);
        let r = lex_compare(&u, &v);
        prop_assert_eq!(r.is_err(), comparable);
        if u == v {
            prop_assert_eq!(r.unwrap(), Ordering::Equal);
        } else if let Ok(o) = r {
            let m = u.meet(&v).len();
            prop_assert_eq!(o, u.bit(m).cmp(&v.bit(m)));
        }
    }

    #[test]
    fn word_display_round_trip(u in word()) {
        let s = u.to_cli_string();
        prop_assert_eq!(s.parse::<Word>().unwrap(), u);
    }

    #[test]
    fn sibling_and_parent(u in word()) {
        if let Some(p) = u.parent() {
            let s = u.sibling().unwrap();
            prop_assert_eq!(s.parent().unwrap(), p.clone());
            prop_assert_ne!(s, u.clone());
            prop_assert_eq!(p.child(u.last().unwrap()), u);
        } else {
            prop_assert!(u.is_empty());
        }
    }
}
