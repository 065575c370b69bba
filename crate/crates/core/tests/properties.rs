mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use subsums::bounds::{bound_at, multiplicity_lower_bound};
use subsums::structure::{
    decompose, greedy_connected_order, is_connected, is_strongly_connected, sort_strongly_connected,
    verify_certificate, IntegerSequence,
};
use subsums::sums::{is_zero_sum_free, prefix_sumset_sizes, sumset};
use subsums::{parse_group_spec, ElementOrder, GroupElement, GroupSequence, GroupSpec};

use common::{brute_integer_sums, brute_sumset, brute_zero_sum_free};

const GROUPS: &[&str] = &["Z5", "Z7", "Z12", "Z16", "Z2xZ4", "Z3xZ3", "Z2xZ2xZ2", "Z", "ZxZ3", "Z2xZ6"];

fn group() -> impl Strategy<Value = GroupSpec> {
    prop::sample::select(GROUPS).prop_map(|g| parse_group_spec(g).unwrap())
}

fn element(spec: &GroupSpec) -> impl Strategy<Value = GroupElement> {
    let spec = spec.clone();
    prop::collection::vec(-5i64..=5, spec.rank()).prop_map(move |c| spec.element(&c).unwrap())
}

fn sequence(max_len: usize) -> impl Strategy<Value = GroupSequence> {
    group().prop_flat_map(move |spec| {
        prop::collection::vec(element(&spec), 0..=max_len)
            .prop_map(move |terms| GroupSequence::new(spec.clone(), terms).unwrap())
    })
}

fn triple() -> impl Strategy<Value = (GroupSpec, GroupElement, GroupElement, GroupElement)> {
    group().prop_flat_map(|spec| {
        (Just(spec.clone()), element(&spec), element(&spec), element(&spec))
    })
}

proptest! {
    #[test]
    fn addition_is_an_abelian_group_law((spec, a, b, c) in triple()) {
        prop_assert_eq!(spec.add(&a, &b).unwrap(), spec.add(&b, &a).unwrap());
        let ab_c = spec.add(&spec.add(&a, &b).unwrap(), &c).unwrap();
        let a_bc = spec.add(&a, &spec.add(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(ab_c, a_bc);
        prop_assert!(spec.add(&a, &spec.neg(&a).unwrap()).unwrap().is_zero());
        prop_assert_eq!(spec.add(&a, &spec.zero()).unwrap(), a.clone());
        prop_assert_eq!(spec.sub(&a, &b).unwrap(), spec.add(&a, &spec.neg(&b).unwrap()).unwrap());
    }

    #[test]
    fn scalar_multiple_is_repeated_addition((spec, a, _, _) in triple(), k in -6i64..=6) {
        let mut acc = spec.zero();
        for _ in 0..k.unsigned_abs() {
            acc = spec.add(&acc, &a).unwrap();
        }
        if k < 0 {
            acc = spec.neg(&acc).unwrap();
        }
        prop_assert_eq!(spec.scalar_mul(k, &a).unwrap(), acc);
    }

    #[test]
    fn order_matches_cyclic_subgroup((spec, a, _, _) in triple()) {
        match spec.order_of(&a).unwrap() {
            ElementOrder::Finite(d) => {
                let sub = spec.cyclic_subgroup(&a).unwrap();
                prop_assert_eq!(sub.len() as u64, d);
                prop_assert!(spec.scalar_mul(d as i64, &a).unwrap().is_zero());
                if let Some(order) = spec.order() {
                    prop_assert_eq!(order % d, 0);
                }
            }
            ElementOrder::Infinite => {
                prop_assert!(!spec.is_finite());
                prop_assert!(!a.is_zero());
            }
        }
    }

    #[test]
    fn element_text_round_trips((spec, a, _, _) in triple()) {
        let text = spec.format_element(&a);
        prop_assert_eq!(spec.parse_element(&text).unwrap(), a.clone());
        if let Some(i) = spec.index_of(&a) {
            prop_assert_eq!(spec.element_at(i).unwrap(), a);
        }
    }

    #[test]
    fn sequence_text_round_trips(seq in sequence(8)) {
        let text = seq.to_string();
        prop_assert_eq!(GroupSequence::parse(seq.spec(), &text).unwrap(), seq);
    }

    #[test]
    fn sumset_matches_brute_force(seq in sequence(12)) {
        let dp: BTreeSet<GroupElement> = sumset(&seq).unwrap().members().into_iter().collect();
        prop_assert_eq!(dp, brute_sumset(&seq));
        prop_assert_eq!(is_zero_sum_free(&seq).unwrap(), brute_zero_sum_free(&seq));
    }

    #[test]
    fn sumset_ignores_order(seq in sequence(9), seed in any::<u64>()) {
        let n = seq.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut state = seed;
        for i in (1..n).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (state >> 33) as usize % (i + 1));
        }
        let shuffled = seq.permuted(&perm);
        prop_assert_eq!(sumset(&seq).unwrap(), sumset(&shuffled).unwrap());
    }

    #[test]
    fn zero_sum_freeness_is_hereditary(seq in sequence(9)) {
        if is_zero_sum_free(&seq).unwrap() {
            for i in 0..seq.len() {
                prop_assert!(is_zero_sum_free(&seq.without(i)).unwrap());
            }
        }
    }

    #[test]
    fn sums_grow_strictly_when_zero_sum_free(seq in sequence(10)) {
        let sizes = prefix_sumset_sizes(&seq).unwrap();
        prop_assert_eq!(sizes[0], 1);
        prop_assert!(sizes.windows(2).all(|w| w[0] <= w[1]));
        if is_zero_sum_free(&seq).unwrap() {
            prop_assert!(sizes.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(*sizes.last().unwrap() > seq.len());
        }
    }

    #[test]
    fn greedy_prefix_is_connected(seq in sequence(8)) {
        for first in 0..seq.len() {
            let (order, k) = greedy_connected_order(&seq, first).unwrap();
            let mut sorted = order.clone();
            sorted.sort_unstable();
            prop_assert_eq!(sorted, (0..seq.len()).collect::<Vec<_>>());
            prop_assert!(is_connected(&seq.permuted(&order).prefix(k)).unwrap());
        }
    }

    #[test]
    fn decompositions_verify(seq in sequence(9)) {
        let n = seq.len();
        if n > 0 && is_zero_sum_free(&seq).unwrap() && sumset(&seq).unwrap().len() < 2 * n {
            let cert = decompose(&seq).unwrap();
            prop_assert_eq!(verify_certificate(&seq, &cert), Ok(()));
        }
    }

    #[test]
    fn strongly_connected_sums_form_an_interval(raw in prop::collection::vec(1i64..=8, 1..=8)) {
        // force strong connectivity by capping each term at the prefix sum
        let mut xs = vec![1];
        let mut total = 1;
        for &x in &raw[1..] {
            let x = x.min(total);
            xs.push(x);
            total += x;
        }
        let xi = IntegerSequence(xs.clone());
        prop_assert!(is_strongly_connected(&xi));
        prop_assert_eq!(xi.subset_sums(), (0..=total).collect::<BTreeSet<_>>());
        prop_assert_eq!(brute_integer_sums(&xs), xi.subset_sums());
        let sorted = sort_strongly_connected(&xi).unwrap();
        prop_assert!(is_strongly_connected(&sorted));
        prop_assert!(sorted.terms().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn first_bound_term_is_linear(n in 1u64..200, m in 1u64..400) {
        prop_assume!(m < 2 * n);
        let r1 = bound_at(n, m, 1);
        prop_assert_eq!(r1, num_rational::Rational64::from_integer(2 * n as i64 - m as i64 + 1));
        let (r, best) = multiplicity_lower_bound(n, m).unwrap();
        prop_assert!(best >= r1);
        prop_assert_eq!(bound_at(n, m, r), best);
    }
}
