use std::collections::BTreeMap;

use proptest::prelude::*;
use revprob::automata::words_up_to;
use revprob::constructions::{
    boolean_combine, boost, complement, inverse_hom, left_quotient, ln_family, normalize_probability, strip_dollar,
    BooleanOp, BoostPlan, HomomorphismSpec,
};
use revprob::dsmat::{int, random_doubly_stochastic};
use revprob::{rat, EndmarkerMode, Machine, PraC, Rational, Validate};

fn random_prac(states: usize, seed: u64, accepting_mask: u8, mode: EndmarkerMode) -> PraC {
    let alphabet = vec!['a', 'b'];
    let mut transitions = BTreeMap::new();
    for (i, c) in alphabet.iter().chain(mode.markers().iter()).enumerate() {
        transitions.insert(*c, random_doubly_stochastic(states, 1 + i % 3, seed.wrapping_add(i as u64)));
    }
    let names = (0..states).map(|i| format!("q{i}")).collect();
    let machine = Machine::new(names, alphabet, 0, mode, transitions).unwrap();
    let accepting = (0..states).map(|i| accepting_mask >> i & 1 == 1).collect();
    PraC::new(machine, accepting).unwrap()
}

fn arb_prac() -> impl Strategy<Value = PraC> {
    (1usize..=4, any::<u64>(), any::<u8>(), 0usize..3).prop_map(|(n, seed, mask, mode)| {
        let mode = [EndmarkerMode::Both, EndmarkerMode::HashOnly, EndmarkerMode::None][mode];
        random_prac(n, seed, mask, mode)
    })
}

fn p(a: &PraC, w: &[char]) -> Rational {
    a.accept_prob(w).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn complement_flips_probabilities(a in arb_prac()) {
        let c = complement(&a);
        prop_assert!(c.validate().is_valid());
        for w in words_up_to(a.alphabet(), 4) {
            prop_assert_eq!(p(&c, &w), int(1) - p(&a, &w));
        }
    }

    #[test]
    fn inverse_hom_reads_images(a in arb_prac(), images in proptest::collection::vec("[ab]{0,3}", 3)) {
        let map: BTreeMap<char, Vec<char>> =
            ['x', 'y', 'z'].into_iter().zip(images.iter().map(|s| s.chars().collect())).collect();
        let h = HomomorphismSpec::new(map, vec!['a', 'b']).unwrap();
        let inv = inverse_hom(&a, &h).unwrap();
        prop_assert!(inv.validate().is_valid());
        for w in words_up_to(&['x', 'y', 'z'], 3) {
            prop_assert_eq!(p(&inv, &w), p(&a, &h.apply(&w).unwrap()));
        }
    }

    #[test]
    fn quotient_prepends_the_word(a in arb_prac(), u in "[ab]{0,4}") {
        prop_assume!(a.endmarkers().has_hash());
        let u: Vec<char> = u.chars().collect();
        let q = left_quotient(&a, &u).unwrap();
        prop_assert!(q.validate().is_valid());
        for w in words_up_to(a.alphabet(), 3) {
            let uw: Vec<char> = u.iter().chain(&w).copied().collect();
            prop_assert_eq!(p(&q, &w), p(&a, &uw));
        }
    }

    #[test]
    fn combination_is_the_even_mixture(a in arb_prac(), b in arb_prac()) {
        prop_assume!(a.endmarkers().has_hash() && b.endmarkers().has_hash());
        let m = boolean_combine(&a, &b, BooleanOp::Union).unwrap();
        prop_assert!(m.validate().is_valid());
        for w in words_up_to(a.alphabet(), 3) {
            prop_assert_eq!(p(&m, &w), (p(&a, &w) + p(&b, &w)) / int(2));
        }
    }

    #[test]
    fn boost_and_dollar_stripping_stay_doubly_stochastic(a in arb_prac(), copies in 1usize..=2, m in 1usize..=3) {
        let plan = BoostPlan::with_threshold(copies, rat(1, 2));
        let boosted = boost(&a, &plan).unwrap();
        prop_assert!(boosted.validate().is_valid());
        prop_assert_eq!(boosted.size(), a.size().pow(copies as u32));
        if a.endmarkers().has_dollar() {
            let s = strip_dollar(&a, m).unwrap();
            prop_assert!(s.validate().is_valid());
            prop_assert!(!s.endmarkers().has_dollar());
        }
    }
}

#[test]
fn normalized_ln_family_has_symmetric_interval() {
    for n in 2..=4 {
        let a = ln_family(n).unwrap();
        let lower = revprob::constructions::ln_interval_lower(n);
        let norm = normalize_probability(&a, &lower, &int(1)).unwrap();
        let dfa = revprob::regclass::dfa_from_regex(&revprob::constructions::ln_regex(n), Some(a.alphabet())).unwrap();
        let iv = revprob::recognition_interval_dfa(&norm, &dfa, n + 2).unwrap();
        let (p1, p2) = (iv.p1.clone().unwrap(), iv.p2.clone().unwrap());
        assert_eq!(&p1 + &p2, int(1), "n={n}: {iv}");
        assert!(p1 < rat(1, 2));
    }
}
