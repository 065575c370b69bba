//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use subsums::{GroupElement, GroupSequence, GroupSpec};

/// All subset sums by walking every subset.
pub fn brute_sumset(seq: &GroupSequence) -> BTreeSet<GroupElement> {
    let spec = seq.spec();
    let terms = seq.terms();
    let mut out = BTreeSet::new();
    for mask in 0u32..(1 << terms.len()) {
        let mut s = spec.zero();
        for (i, t) in terms.iter().enumerate() {
            if mask >> i & 1 == 1 {
                s = spec.add(&s, t).unwrap();
            }
        }
        out.insert(s);
    }
    out
}

/// True iff no nonempty subset sums to zero.
pub fn brute_zero_sum_free(seq: &GroupSequence) -> bool {
    let spec = seq.spec();
    let terms = seq.terms();
    (1u32..(1 << terms.len())).all(|mask| {
        let mut s = spec.zero();
        for (i, t) in terms.iter().enumerate() {
            if mask >> i & 1 == 1 {
                s = spec.add(&s, t).unwrap();
            }
        }
        !s.is_zero()
    })
}

/// Every nondecreasing tuple of nonzero element indices of length `n`.
pub fn nondecreasing_tuples(order: usize, n: usize) -> Vec<Vec<usize>> {
    fn go(order: usize, n: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in start..order {
            cur.push(i);
            go(order, n, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(order, n, 1, &mut Vec::new(), &mut out);
    out
}

pub fn sequence_from_indices(spec: &GroupSpec, indices: &[usize]) -> GroupSequence {
    let terms = indices.iter().map(|&i| spec.element_at(i).unwrap()).collect();
    GroupSequence::new(spec.clone(), terms).unwrap()
}

/// Distinct permutations of `0..n` up to equal terms, in lexicographic
/// order of the term indices they produce.
pub fn distinct_orders(seq: &GroupSequence) -> Vec<Vec<usize>> {
    fn go(
        seq: &GroupSequence,
        used: &mut Vec<bool>,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let n = used.len();
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        let mut seen: BTreeSet<&GroupElement> = BTreeSet::new();
        for i in 0..n {
            if !used[i] && seen.insert(&seq.terms()[i]) {
                used[i] = true;
                cur.push(i);
                go(seq, used, cur, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(seq, &mut vec![false; seq.len()], &mut Vec::new(), &mut out);
    out
}

/// Integer subset sums by walking every subset.
pub fn brute_integer_sums(xs: &[i64]) -> BTreeSet<i64> {
    (0u32..(1 << xs.len()))
        .map(|mask| (0..xs.len()).filter(|&i| mask >> i & 1 == 1).map(|i| xs[i]).sum())
        .collect()
}
