//! Lower bounds on the largest term multiplicity of a zero-sum-free
//! sequence with few subsequence sums.
//!
//! Two quantities both called "m" in the literature are kept apart here:
//! `group_order` is `|G|` for the classical cyclic-group bounds, and
//! `m_sums` is an upper bound on `|Σ(α)|`.

use std::collections::BTreeMap;

use num_rational::Rational64;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::group::GroupElement;
use crate::structure::{decompose, StructureError};
use crate::sums::{GroupSequence, SumAccumulator};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("sequence is empty")]
    EmptySequence,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// A term value of maximal multiplicity (first appearance wins ties) and
/// that multiplicity.
pub fn max_multiplicity(seq: &GroupSequence) -> Result<(GroupElement, usize), BoundsError> {
    let terms = seq.terms();
    if terms.is_empty() {
        return Err(BoundsError::EmptySequence);
    }
    let mut counts: BTreeMap<&GroupElement, usize> = BTreeMap::new();
    for t in terms {
        *counts.entry(t).or_default() += 1;
    }
    let mut best: Option<(&GroupElement, usize)> = None;
    for t in terms {
        let c = counts[t];
        if best.is_none_or(|(_, b)| c > b) {
            best = Some((t, c));
        }
    }
    let (g, c) = best.expect("nonempty");
    Ok((g.clone(), c))
}

/// `(2/r)(n − (m_sums − 1)/(r + 1))`.
pub fn bound_at(n: u64, m_sums: u64, r: u64) -> Rational64 {
    let n = Rational64::from_integer(n as i64);
    let m = Rational64::from_integer(m_sums as i64);
    let r = r as i64;
    Rational64::new(2, r) * (n - (m - 1) / Rational64::from_integer(r + 1))
}

/// Maximizes [`bound_at`] over `r = 1..=n`, returning the smallest maximizing
/// `r` and the bound.
pub fn multiplicity_lower_bound(n: u64, m_sums: u64) -> Result<(u64, Rational64), BoundsError> {
    if m_sums < 1 || m_sums >= 2 * n {
        return Err(BoundsError::PreconditionViolated(format!(
            "need 1 <= m_sums < 2n, got m_sums = {m_sums}, n = {n}"
        )));
    }
    let mut best = (1, bound_at(n, m_sums, 1));
    for r in 2..=n {
        let v = bound_at(n, m_sums, r);
        if v > best.1 {
            best = (r, v);
        }
    }
    Ok(best)
}

/// `2n − |G| + 1`, for `n > |G|/2`.
pub fn bovey_erdos_niven_bound(n: u64, group_order: u64) -> Result<i64, BoundsError> {
    if 2 * n <= group_order {
        return Err(BoundsError::PreconditionViolated(format!(
            "need n > |G|/2, got n = {n}, |G| = {group_order}"
        )));
    }
    Ok(2 * n as i64 - group_order as i64 + 1)
}

/// Piecewise bound for `|G|/2 < n < |G|`: `n − ⌊(|G| − 1)/3⌋` up to
/// `n = 2(|G| − 1)/3`, then `2n − |G| + 1`.
pub fn savchev_chen_bound(n: u64, group_order: u64) -> Result<i64, BoundsError> {
    let m = group_order as i64;
    let n = n as i64;
    if 2 * n <= m || n >= m {
        return Err(BoundsError::PreconditionViolated(format!(
            "need |G|/2 < n < |G|, got n = {n}, |G| = {m}"
        )));
    }
    let low = n - (m - 1) / 3;
    let high = 2 * n - m + 1;
    if 3 * n == 2 * (m - 1) {
        assert_eq!(low, high, "branches disagree at the knee n = 2(m-1)/3");
    }
    Ok(if 3 * n <= 2 * (m - 1) { low } else { high })
}

fn ratio_string<S: Serializer>(r: &Rational64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

/// Outcome of checking the multiplicity bound on one sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MultiplicityReport {
    pub n: usize,
    pub m_sums: usize,
    pub mu: usize,
    pub best_r: u64,
    #[serde(serialize_with = "ratio_string")]
    pub bound: Rational64,
    pub bound_ceil: i64,
    /// `j -> ν_j`, the number of certificate multipliers equal to `j`.
    pub nu: BTreeMap<i64, usize>,
    pub total: i64,
    pub nu_consistent: bool,
    pub passed: bool,
}

/// Computes `μ`, the bound at `m_sums = |Σ(α)|`, and the `ν_j` histogram of
/// the certificate multipliers, and records whether `μ >= ⌈bound⌉`.
pub fn check_multiplicity_theorem(seq: &GroupSequence) -> Result<MultiplicityReport, BoundsError> {
    let n = seq.len();
    if n == 0 {
        return Err(BoundsError::PreconditionViolated("sequence is empty".into()));
    }
    let acc = SumAccumulator::from_sequence(seq).map_err(StructureError::from)?;
    if !acc.zero_sum_free() {
        return Err(BoundsError::PreconditionViolated("sequence is not zero-sum-free".into()));
    }
    let m_sums = acc.size();
    if m_sums >= 2 * n {
        return Err(BoundsError::PreconditionViolated(format!(
            "|Σ| = {m_sums} is not below 2n = {}",
            2 * n
        )));
    }
    let cert = decompose(seq)?;
    let (_, mu) = max_multiplicity(seq)?;
    let (best_r, bound) = multiplicity_lower_bound(n as u64, m_sums as u64)?;
    let bound_ceil = bound.ceil().to_integer();

    let mut nu: BTreeMap<i64, usize> = BTreeMap::new();
    for &x in &cert.xs {
        *nu.entry(x).or_default() += 1;
    }
    let count: usize = nu.values().sum();
    let weighted: i64 = nu.iter().map(|(&j, &v)| j * v as i64).sum();
    let max_nu = nu.values().copied().max().unwrap_or(0);
    let nu_consistent = count == n
        && weighted == cert.total
        && weighted < m_sums as i64
        && max_nu == mu;

    Ok(MultiplicityReport {
        n,
        m_sums,
        mu,
        best_r,
        bound,
        bound_ceil,
        nu,
        total: cert.total,
        nu_consistent,
        passed: nu_consistent && mu as i64 >= bound_ceil,
    })
}
