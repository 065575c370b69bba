//! Sharp and connected sequences, the rearrangement procedures built on
//! them, and the arithmetic-progression certificate for zero-sum-free
//! sequences with fewer than `2n` subsequence sums.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::group::{ElementOrder, GroupElement, GroupError, GroupSpec};
use crate::sums::{sigma, GroupSequence, SumAccumulator, SumSet, SumsError};

/// A reproducible record of a failed theorem-level check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub group: String,
    pub seq: String,
    pub stage: String,
    pub detail: String,
}

impl Counterexample {
    pub fn new(seq: &GroupSequence, stage: &str, detail: impl Into<String>) -> Self {
        Counterexample {
            group: seq.spec().to_string(),
            seq: seq.to_string(),
            stage: stage.to_string(),
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} at {} for --group {} --seq \"{}\"",
            self.detail, self.stage, self.group, self.seq
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("sequence is empty")]
    EmptySequence,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("index {index} out of range for a sequence of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("sequence is not sharp")]
    NotSharp,
    #[error("sequence is not zero-sum-free")]
    NotZeroSumFree,
    #[error("sequence is not connected")]
    NotConnected,
    #[error("term {index} is not a multiple of the first term")]
    NotInCyclicSubgroup { index: usize },
    #[error("last term has infinite order")]
    InfiniteOrder,
    #[error("structure mismatch: {0}")]
    StructureMismatch(String),
    #[error("theorem violation: {0}")]
    TheoremViolation(Counterexample),
    #[error(transparent)]
    Sums(#[from] SumsError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// An integer sequence, e.g. the multipliers associated with a connected
/// sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntegerSequence(pub Vec<i64>);

impl IntegerSequence {
    pub fn terms(&self) -> &[i64] {
        &self.0
    }

    pub fn sum(&self) -> i64 {
        self.0.iter().sum()
    }

    /// All subset sums, including 0.
    pub fn subset_sums(&self) -> BTreeSet<i64> {
        let mut sums = BTreeSet::from([0]);
        for &x in &self.0 {
            let shifted: Vec<i64> = sums.iter().map(|s| s + x).collect();
            sums.extend(shifted);
        }
        sums
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharpDecomposition {
    /// Length of the progression `{0, c, ..., s·c}` where `c` is the last term.
    pub s: u64,
    pub last: GroupElement,
    /// One representative (smallest index) per nonzero `<c>`-coset contained
    /// in `Σ(α_{n-1})`.
    pub coset_reps: Vec<GroupElement>,
}

/// Witness that `Σ(α) = {0, a, 2a, ..., total·a}`: the term at certificate
/// position `k` is `α[perm[k]] = xs[k]·a`. `perm` is 0-based here; the
/// serialized record is 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureCertificate {
    pub a: GroupElement,
    pub perm: Vec<usize>,
    pub xs: Vec<i64>,
    pub total: i64,
}

/// Serialized form of a certificate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateRecord {
    pub group: String,
    pub a: serde_json::Value,
    pub perm: Vec<usize>,
    pub xs: Vec<i64>,
    pub total: i64,
}

/// Element as JSON: a number for rank-1 groups, an array otherwise.
pub fn element_json(spec: &GroupSpec, g: &GroupElement) -> serde_json::Value {
    if spec.rank() == 1 {
        serde_json::Value::from(g.coords()[0])
    } else {
        serde_json::Value::from(g.coords().to_vec())
    }
}

impl StructureCertificate {
    pub fn to_record(&self, spec: &GroupSpec) -> CertificateRecord {
        CertificateRecord {
            group: spec.to_string(),
            a: element_json(spec, &self.a),
            perm: self.perm.iter().map(|i| i + 1).collect(),
            xs: self.xs.clone(),
            total: self.total,
        }
    }
}

/// First failed clause of [`verify_certificate`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertificateFailure {
    #[error("certificate for an empty sequence")]
    Empty,
    #[error("certificate has {got} multipliers for {expected} terms")]
    LengthMismatch { expected: usize, got: usize },
    #[error("x_1 is {0}, not 1")]
    FirstNotOne(i64),
    #[error("multipliers decrease at position {0}")]
    NotNondecreasing(usize),
    #[error("multiplier at position {0} exceeds the sum of its predecessors")]
    ExceedsPrefixSum(usize),
    #[error("total {got} differs from the multiplier sum {expected}")]
    TotalMismatch { expected: i64, got: i64 },
    #[error("base element is not in the group")]
    ForeignBase,
    #[error("perm is not a permutation of the term indices")]
    NotAPermutation,
    #[error("term {0} is not x_k·a")]
    TermMismatch(usize),
    #[error("total {total} is not below ord(a) = {order}")]
    TotalNotBelowOrder { total: i64, order: u64 },
    #[error("sum set differs from the progression [0, total]·a")]
    SumSetMismatch,
    #[error("progression [0, total]·a has repeated members")]
    ProgressionNotDistinct,
    #[error("could not compute the sum set: {0}")]
    SumSet(String),
}

impl CertificateFailure {
    pub fn code(&self) -> &'static str {
        match self {
            CertificateFailure::Empty => "empty",
            CertificateFailure::LengthMismatch { .. } => "length_mismatch",
            CertificateFailure::FirstNotOne(_) => "first_not_one",
            CertificateFailure::NotNondecreasing(_) => "not_nondecreasing",
            CertificateFailure::ExceedsPrefixSum(_) => "exceeds_prefix_sum",
            CertificateFailure::TotalMismatch { .. } => "total_mismatch",
            CertificateFailure::ForeignBase => "foreign_base",
            CertificateFailure::NotAPermutation => "not_a_permutation",
            CertificateFailure::TermMismatch(_) => "term_mismatch",
            CertificateFailure::TotalNotBelowOrder { .. } => "total_not_below_order",
            CertificateFailure::SumSetMismatch => "sumset_mismatch",
            CertificateFailure::ProgressionNotDistinct => "progression_not_distinct",
            CertificateFailure::SumSet(_) => "sumset_error",
        }
    }
}

fn require_nonempty(seq: &GroupSequence) -> Result<(), StructureError> {
    if seq.is_empty() {
        Err(StructureError::EmptySequence)
    } else {
        Ok(())
    }
}

/// `|Σ(α)| = |Σ(α_{n-1})| + 1`.
pub fn is_sharp(seq: &GroupSequence) -> Result<bool, StructureError> {
    require_nonempty(seq)?;
    let n = seq.len();
    let mut acc = SumAccumulator::from_sequence(&seq.prefix(n - 1))?;
    let before = acc.size();
    acc.push(&seq.terms()[n - 1])?;
    Ok(acc.size() == before + 1)
}

/// Every term after the first lies in `Σ(prefix) − Σ(prefix)`.
pub fn is_connected(seq: &GroupSequence) -> Result<bool, StructureError> {
    let mut acc = SumAccumulator::new(seq.spec());
    for (k, t) in seq.terms().iter().enumerate() {
        if k > 0 && !acc.difference_contains(t) {
            return Ok(false);
        }
        acc.push(t)?;
    }
    Ok(true)
}

/// Every term after the first lies in `Σ(prefix)`.
pub fn is_strongly_connected(xi: &IntegerSequence) -> bool {
    let mut sums = BTreeSet::from([0i64]);
    for (k, &x) in xi.terms().iter().enumerate() {
        if k > 0 && !sums.contains(&x) {
            return false;
        }
        let shifted: Vec<i64> = sums.iter().map(|s| s + x).collect();
        sums.extend(shifted);
    }
    true
}

/// Starts with term `first` and keeps appending the lowest-indexed remaining
/// term that lies in `Σ(prefix) − Σ(prefix)`. Returns the full order
/// (connected prefix, then the leftover terms by index) and the prefix length.
///
/// Eligibility is monotone in the prefix, so the prefix length is the
/// longest achievable by any connected order starting with `first`.
pub fn greedy_connected_order(
    seq: &GroupSequence,
    first: usize,
) -> Result<(Vec<usize>, usize), StructureError> {
    let n = seq.len();
    if first >= n {
        return Err(StructureError::IndexOutOfRange { index: first, len: n });
    }
    let terms = seq.terms();
    let mut used = vec![false; n];
    let mut order = vec![first];
    used[first] = true;
    let mut acc = SumAccumulator::new(seq.spec());
    acc.push(&terms[first])?;
    while let Some(i) = (0..n).find(|&i| !used[i] && acc.difference_contains(&terms[i])) {
        used[i] = true;
        order.push(i);
        acc.push(&terms[i])?;
    }
    let prefix_len = order.len();
    order.extend((0..n).filter(|&i| !used[i]));
    Ok((order, prefix_len))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Arrangement {
    Connected(Vec<usize>),
    Sharp(Vec<usize>),
}

impl Arrangement {
    pub fn perm(&self) -> &[usize] {
        match self {
            Arrangement::Connected(p) | Arrangement::Sharp(p) => p,
        }
    }
}

/// Zero-sum-free with `|Σ| < 2n`. A single term (where `|Σ| = 2 = 2n`) is
/// accepted too: it is trivially connected and its certificate is `(1)`.
fn few_sums_zero_sum_free(seq: &GroupSequence) -> Result<SumAccumulator, StructureError> {
    let acc = SumAccumulator::from_sequence(seq)?;
    if !acc.zero_sum_free() {
        return Err(StructureError::PreconditionViolated(
            "sequence is not zero-sum-free".into(),
        ));
    }
    if acc.size() >= 2 * seq.len() && seq.len() != 1 {
        return Err(StructureError::PreconditionViolated(format!(
            "|Σ| = {} is not below 2n = {}",
            acc.size(),
            2 * seq.len()
        )));
    }
    Ok(acc)
}

/// Indices of the first occurrence of each distinct term value.
fn first_occurrences(seq: &GroupSequence) -> Vec<usize> {
    let mut seen = BTreeSet::new();
    (0..seq.len())
        .filter(|&i| seen.insert(&seq.terms()[i]))
        .collect()
}

/// Rearranges a zero-sum-free `α` with `|Σ(α)| < 2n` into a connected
/// order if one exists, and otherwise into a sharp one.
pub fn rearrange_connected_or_sharp(seq: &GroupSequence) -> Result<Arrangement, StructureError> {
    require_nonempty(seq)?;
    few_sums_zero_sum_free(seq)?;
    let n = seq.len();
    let mut best: Option<(Vec<usize>, usize)> = None;
    for first in first_occurrences(seq) {
        let (order, len) = greedy_connected_order(seq, first)?;
        if len == n {
            return Ok(Arrangement::Connected(order));
        }
        if best.as_ref().is_none_or(|(_, l)| len > *l) {
            best = Some((order, len));
        }
    }
    let (order, m) = best.expect("nonempty sequence");
    // the term after the connected prefix doubles the sum set
    if m + 1 >= n {
        return Err(StructureError::TheoremViolation(Counterexample::new(
            seq,
            "rearrange_connected_or_sharp",
            format!("connected prefix of length {m} leaves no room for a sharp tail"),
        )));
    }
    let reordered = seq.permuted(&order);
    let tail = rearrange_to_sharp(&reordered, m + 1).map_err(|e| match e {
        StructureError::PreconditionViolated(msg) => {
            StructureError::TheoremViolation(Counterexample::new(seq, "rearrange_connected_or_sharp", msg))
        }
        other => other,
    })?;
    Ok(Arrangement::Sharp(tail.iter().map(|&i| order[i]).collect()))
}

/// Permutes the terms after position `m` (1-based length of the fixed
/// prefix) so that the whole sequence becomes sharp.
///
/// Requires `α` zero-sum-free, `|Σ(α)| < 2n` and `|Σ(α_m)| >= 2m`. The prefix
/// is first extended by tail terms for as long as `|Σ(α_k)| >= 2k` can be
/// kept; past that point every remaining term yields a sharp extension, and
/// the remaining terms go in index order.
pub fn rearrange_to_sharp(seq: &GroupSequence, m: usize) -> Result<Vec<usize>, StructureError> {
    require_nonempty(seq)?;
    few_sums_zero_sum_free(seq)?;
    let n = seq.len();
    if m == 0 || m >= n {
        return Err(StructureError::PreconditionViolated(format!(
            "m = {m} is outside [1, {}]",
            n - 1
        )));
    }
    let terms = seq.terms();
    let mut acc = SumAccumulator::from_sequence(&seq.prefix(m))?;
    if acc.size() < 2 * m {
        return Err(StructureError::PreconditionViolated(format!(
            "|Σ(α_{m})| = {} is below 2m = {}",
            acc.size(),
            2 * m
        )));
    }
    let mut perm: Vec<usize> = (0..m).collect();
    let mut rest: Vec<usize> = (m..n).collect();
    loop {
        let k = perm.len() + 1;
        let pick = rest.iter().position(|&i| {
            let mut trial = acc.clone();
            trial.push(&terms[i]).is_ok() && trial.size() >= 2 * k
        });
        match pick {
            Some(p) => {
                let i = rest.remove(p);
                acc.push(&terms[i])?;
                perm.push(i);
            }
            None => break,
        }
    }
    perm.extend(rest);
    if !is_sharp(&seq.permuted(&perm))? {
        return Err(StructureError::TheoremViolation(Counterexample::new(
            seq,
            "rearrange_to_sharp",
            format!("tail after a maximal prefix is not sharp (perm {perm:?})"),
        )));
    }
    Ok(perm)
}

fn element_key(spec: &GroupSpec, g: &GroupElement) -> (usize, GroupElement) {
    (spec.index_of(g).unwrap_or(0), g.clone())
}

/// Splits `Σ(α_{n-1})` of a sharp zero-sum-free `α` into the progression
/// `{0, c, ..., s·c}` (`c = a_n`) and whole nonzero `<c>`-cosets, and checks
/// `σ(α_{n-1}) = s·c`.
///
/// Zero is counted in the progression. For `n = 1`, `s = 0`.
pub fn sharp_decomposition(seq: &GroupSequence) -> Result<SharpDecomposition, StructureError> {
    require_nonempty(seq)?;
    let spec = seq.spec();
    let n = seq.len();
    let full = SumAccumulator::from_sequence(seq)?;
    if !full.zero_sum_free() {
        return Err(StructureError::NotZeroSumFree);
    }
    if !is_sharp(seq)? {
        return Err(StructureError::NotSharp);
    }
    let last = seq.terms()[n - 1].clone();
    let d = match spec.order_of(&last)? {
        ElementOrder::Finite(d) => d,
        ElementOrder::Infinite => return Err(StructureError::InfiniteOrder),
    };
    let head = seq.prefix(n - 1);
    let sums = SumAccumulator::from_sequence(&head)?.sumset();
    let multiples = spec.cyclic_subgroup(&last)?;
    let mut s = 0u64;
    while s + 1 < d && sums.contains(&multiples[s as usize + 1]) {
        s += 1;
    }
    let in_subgroup = multiples.iter().filter(|g| sums.contains(g)).count() as u64;
    if in_subgroup != s + 1 {
        return Err(StructureError::StructureMismatch(format!(
            "Σ(α_{{n-1}}) meets <a_n> in {in_subgroup} elements, not the progression [0, {s}]·a_n"
        )));
    }
    if n >= 2 && s < 1 {
        return Err(StructureError::StructureMismatch("progression length s = 0".into()));
    }
    if s + 1 >= d {
        return Err(StructureError::StructureMismatch(format!(
            "s = {s} is not below ord(a_n) - 1 = {}",
            d - 1
        )));
    }
    let subgroup: BTreeSet<&GroupElement> = multiples.iter().collect();
    let mut reps: BTreeSet<(usize, GroupElement)> = BTreeSet::new();
    let mut covered: BTreeSet<GroupElement> = BTreeSet::new();
    for g in sums.members() {
        if subgroup.contains(&g) || covered.contains(&g) {
            continue;
        }
        let coset: Vec<GroupElement> = multiples
            .iter()
            .map(|h| spec.add_unchecked(&g, h))
            .collect::<Result<_, _>>()?;
        if let Some(missing) = coset.iter().find(|x| !sums.contains(x)) {
            return Err(StructureError::StructureMismatch(format!(
                "coset of {} is only partly contained (missing {})",
                spec.format_element(&g),
                spec.format_element(missing)
            )));
        }
        let rep = coset
            .iter()
            .map(|x| element_key(spec, x))
            .min()
            .expect("nonempty coset");
        reps.insert(rep);
        covered.extend(coset);
    }
    let expected = (s + 1) as usize + reps.len() * d as usize;
    if sums.len() != expected {
        return Err(StructureError::StructureMismatch(format!(
            "|Σ(α_{{n-1}})| = {} but the decomposition covers {expected}",
            sums.len()
        )));
    }
    let tail_sum = sigma(&head)?;
    if tail_sum != multiples[s as usize] {
        return Err(StructureError::StructureMismatch(format!(
            "σ(α_{{n-1}}) = {} is not s·a_n = {}",
            spec.format_element(&tail_sum),
            spec.format_element(&multiples[s as usize])
        )));
    }
    Ok(SharpDecomposition {
        s,
        last,
        coset_reps: reps.into_iter().map(|(_, g)| g).collect(),
    })
}

/// Multipliers `x_k` with `a_k = x_k·a_1` for a connected sequence. For a
/// first term of finite order `d`, `x_k` is taken in `[0, d)` (and `x_1 = 1`).
pub fn associated_sequence(seq: &GroupSequence) -> Result<IntegerSequence, StructureError> {
    if seq.is_empty() {
        return Ok(IntegerSequence(Vec::new()));
    }
    if !is_connected(seq)? {
        return Err(StructureError::NotConnected);
    }
    let spec = seq.spec();
    let terms = seq.terms();
    let base = &terms[0];
    let mut xs = Vec::with_capacity(terms.len());
    xs.push(1);
    match spec.order_of(base)? {
        ElementOrder::Finite(_) => {
            let logs: HashMap<&GroupElement, i64> = HashMap::new();
            let multiples = spec.cyclic_subgroup(base)?;
            let logs = multiples.iter().enumerate().fold(logs, |mut m, (j, g)| {
                m.insert(g, j as i64);
                m
            });
            for (k, t) in terms.iter().enumerate().skip(1) {
                xs.push(*logs.get(t).ok_or(StructureError::NotInCyclicSubgroup { index: k })?);
            }
        }
        ElementOrder::Infinite => {
            let axis = base
                .coords()
                .iter()
                .zip(spec.factors())
                .position(|(&c, f)| c != 0 && *f == crate::group::Factor::Free)
                .expect("infinite order has a nonzero free coordinate");
            let b = base.coords()[axis];
            for (k, t) in terms.iter().enumerate().skip(1) {
                let c = t.coords()[axis];
                let err = StructureError::NotInCyclicSubgroup { index: k };
                if c % b != 0 {
                    return Err(err);
                }
                let x = c / b;
                if spec.scalar_mul_unchecked(x, base)? != *t {
                    return Err(err);
                }
                xs.push(x);
            }
        }
    }
    Ok(IntegerSequence(xs))
}

/// The nondecreasing rearrangement of a strongly connected positive sequence.
pub fn sort_strongly_connected(xi: &IntegerSequence) -> Result<IntegerSequence, StructureError> {
    if xi.terms().iter().any(|&x| x < 1) {
        return Err(StructureError::PreconditionViolated(
            "terms must be positive".into(),
        ));
    }
    if !is_strongly_connected(xi) {
        return Err(StructureError::PreconditionViolated(
            "sequence is not strongly connected".into(),
        ));
    }
    let mut xs = xi.0.clone();
    xs.sort_unstable();
    Ok(IntegerSequence(xs))
}

/// Finds `a`, a renumbering and multipliers `1 = x_1 <= ... <= x_n` with
/// `x_{k+1} <= x_1 + ... + x_k`, `a_{perm[k]} = x_k·a`, and
/// `Σ(α) = [0, x_1 + ... + x_n]·a`, for a zero-sum-free `α` with
/// `|Σ(α)| < 2n`.
///
/// Candidate bases are tried in order of first appearance; the first term
/// value that starts a full connected order wins. The returned certificate
/// has passed [`verify_certificate`].
pub fn decompose(seq: &GroupSequence) -> Result<StructureCertificate, StructureError> {
    require_nonempty(seq).map_err(|_| StructureError::PreconditionViolated("sequence is empty".into()))?;
    few_sums_zero_sum_free(seq)?;
    let spec = seq.spec();
    let n = seq.len();
    let violation = |stage: &str, detail: String| {
        StructureError::TheoremViolation(Counterexample::new(seq, stage, detail))
    };

    for first in first_occurrences(seq) {
        let (order, len) = greedy_connected_order(seq, first)?;
        if len < n {
            continue;
        }
        let connected = seq.permuted(&order);
        let assoc = associated_sequence(&connected)
            .map_err(|e| violation("associated_sequence", e.to_string()))?;
        let sorted = sort_strongly_connected(&assoc)
            .map_err(|e| violation("sort_strongly_connected", e.to_string()))?;
        let a = seq.terms()[first].clone();

        let mut used = vec![false; n];
        let mut perm = Vec::with_capacity(n);
        for &x in sorted.terms() {
            let target = spec.scalar_mul_unchecked(x, &a)?;
            let i = (0..n)
                .find(|&i| !used[i] && seq.terms()[i] == target)
                .ok_or_else(|| violation("match_terms", format!("no term equals {x}·a")))?;
            used[i] = true;
            perm.push(i);
        }
        let cert = StructureCertificate {
            a,
            perm,
            total: sorted.sum(),
            xs: sorted.0,
        };
        verify_certificate(seq, &cert).map_err(|f| violation("verify_certificate", f.to_string()))?;
        return Ok(cert);
    }
    Err(violation(
        "connected_order",
        "no term value starts a connected rearrangement".into(),
    ))
}

/// Checks every certificate clause; the error names the first one that fails.
pub fn verify_certificate(
    seq: &GroupSequence,
    cert: &StructureCertificate,
) -> Result<(), CertificateFailure> {
    let spec = seq.spec();
    let n = seq.len();
    let xs = &cert.xs;
    if n == 0 {
        return Err(CertificateFailure::Empty);
    }
    if xs.len() != n {
        return Err(CertificateFailure::LengthMismatch {
            expected: n,
            got: xs.len(),
        });
    }
    if xs[0] != 1 {
        return Err(CertificateFailure::FirstNotOne(xs[0]));
    }
    if let Some(k) = (1..n).find(|&k| xs[k] < xs[k - 1]) {
        return Err(CertificateFailure::NotNondecreasing(k + 1));
    }
    let mut prefix: i128 = 0;
    for (k, &x) in xs.iter().enumerate() {
        if k > 0 && x as i128 > prefix {
            return Err(CertificateFailure::ExceedsPrefixSum(k + 1));
        }
        prefix += x as i128;
    }
    if prefix != cert.total as i128 {
        return Err(CertificateFailure::TotalMismatch {
            expected: prefix.clamp(i64::MIN as i128, i64::MAX as i128) as i64,
            got: cert.total,
        });
    }
    if !spec.contains(&cert.a) {
        return Err(CertificateFailure::ForeignBase);
    }
    let mut seen = vec![false; n];
    if cert.perm.len() != n || cert.perm.iter().any(|&i| i >= n || std::mem::replace(&mut seen[i], true)) {
        return Err(CertificateFailure::NotAPermutation);
    }
    for (k, (&i, &x)) in cert.perm.iter().zip(xs).enumerate() {
        match spec.scalar_mul_unchecked(x, &cert.a) {
            Ok(g) if g == seq.terms()[i] => {}
            _ => return Err(CertificateFailure::TermMismatch(k + 1)),
        }
    }
    let order = spec.order_of(&cert.a).map_err(|e| CertificateFailure::SumSet(e.to_string()))?;
    if let ElementOrder::Finite(d) = order {
        if cert.total < 0 || cert.total as u64 >= d {
            return Err(CertificateFailure::TotalNotBelowOrder {
                total: cert.total,
                order: d,
            });
        }
    }
    let sums = SumAccumulator::from_sequence(seq)
        .map_err(|e| CertificateFailure::SumSet(e.to_string()))?
        .sumset();
    // a progression with more than |Σ| distinct terms cannot equal Σ
    if order == ElementOrder::Infinite && cert.total as i128 + 1 > sums.len() as i128 {
        return Err(CertificateFailure::SumSetMismatch);
    }
    let progression: Vec<GroupElement> = (0..=cert.total)
        .map(|j| spec.scalar_mul_unchecked(j, &cert.a))
        .collect::<Result<_, _>>()
        .map_err(|e| CertificateFailure::SumSet(e.to_string()))?;
    let prog_set = SumSet::from_elements(spec, &progression)
        .map_err(|e| CertificateFailure::SumSet(e.to_string()))?;
    if prog_set != sums {
        return Err(CertificateFailure::SumSetMismatch);
    }
    if prog_set.len() as i128 != cert.total as i128 + 1 {
        return Err(CertificateFailure::ProgressionNotDistinct);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::parse_group_spec;
    use crate::sums::sumset;

    fn seq(group: &str, text: &str) -> GroupSequence {
        GroupSequence::parse(&parse_group_spec(group).unwrap(), text).unwrap()
    }

    fn ints(v: &[i64]) -> IntegerSequence {
        IntegerSequence(v.to_vec())
    }

    #[test]
    fn sharpness() {
        assert!(is_sharp(&seq("Z5", "1,1")).unwrap());
        assert!(!is_sharp(&seq("Z", "1,2")).unwrap());
        assert!(!is_sharp(&seq("Z12", "5,5,10")).unwrap());
        assert_eq!(is_sharp(&seq("Z5", "")), Err(StructureError::EmptySequence));
    }

    #[test]
    fn connectivity() {
        assert!(is_connected(&seq("Z", "1,1")).unwrap());
        assert!(!is_connected(&seq("Z", "1,3")).unwrap());
        assert!(is_connected(&seq("Z12", "5,5,10")).unwrap());
        assert!(is_connected(&seq("Z12", "")).unwrap());
        assert!(is_connected(&seq("Z12", "7")).unwrap());
        // negative differences count
        assert!(is_connected(&seq("Z", "2,-2")).unwrap());
    }

    #[test]
    fn strong_connectivity() {
        assert!(is_strongly_connected(&ints(&[1, 1, 2, 4])));
        assert!(!is_strongly_connected(&ints(&[1, 3])));
        assert!(is_strongly_connected(&ints(&[1, 1, 2, 3, 7])));
        assert_eq!(ints(&[1, 1, 2, 3]).subset_sums(), (0..=7).collect());
        assert!(is_strongly_connected(&ints(&[])));
    }

    #[test]
    fn greedy_orders() {
        let (order, len) = greedy_connected_order(&seq("Z12", "10,5,5"), 1).unwrap();
        assert_eq!((order, len), (vec![1, 2, 0], 3));
        let (_, len) = greedy_connected_order(&seq("Z", "1,3"), 0).unwrap();
        assert_eq!(len, 1);
        assert_eq!(greedy_connected_order(&seq("Z7", "3"), 0).unwrap(), (vec![0], 1));
        assert_eq!(
            greedy_connected_order(&seq("Z7", "3"), 1),
            Err(StructureError::IndexOutOfRange { index: 1, len: 1 })
        );
    }

    #[test]
    fn connected_or_sharp() {
        let s = seq("Z12", "10,5,5");
        match rearrange_connected_or_sharp(&s).unwrap() {
            Arrangement::Connected(p) => assert!(is_connected(&s.permuted(&p)).unwrap()),
            other => panic!("expected connected, got {other:?}"),
        }
        assert_eq!(
            rearrange_connected_or_sharp(&seq("Z5", "1,1,1")).unwrap(),
            Arrangement::Connected(vec![0, 1, 2])
        );
        assert_eq!(
            rearrange_connected_or_sharp(&seq("Z7", "1,1,1,1")).unwrap(),
            Arrangement::Connected(vec![0, 1, 2, 3])
        );
        assert!(matches!(
            rearrange_connected_or_sharp(&seq("Z5", "2,3")),
            Err(StructureError::PreconditionViolated(_))
        ));
        assert!(matches!(
            rearrange_connected_or_sharp(&seq("Z", "1,2")),
            Err(StructureError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn to_sharp() {
        // |Σ(1,2)| = 4 in Z5 and |Σ(1,2,1)| = 5 < 6
        let s = seq("Z5", "1,2,1");
        let p = rearrange_to_sharp(&s, 2).unwrap();
        assert_eq!(&p[..2], &[0, 1]);
        assert!(is_sharp(&s.permuted(&p)).unwrap());

        // |Σ(1,2,3)| = 7 >= 2n in Z7
        assert!(matches!(
            rearrange_to_sharp(&seq("Z7", "1,2,3"), 2),
            Err(StructureError::PreconditionViolated(_))
        ));
        // (1,2,1,1) in Z7 has sizes [1,2,4,5,6]
        let s = seq("Z7", "1,2,1,1");
        let p = rearrange_to_sharp(&s, 2).unwrap();
        assert!(is_sharp(&s.permuted(&p)).unwrap());

        assert!(matches!(
            rearrange_to_sharp(&seq("Z5", "1,1,1"), 2),
            Err(StructureError::PreconditionViolated(_))
        ));
        assert!(matches!(
            rearrange_to_sharp(&seq("Z5", "1,2,1"), 3),
            Err(StructureError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn sharp_decompositions() {
        let d = sharp_decomposition(&seq("Z5", "1,1,1")).unwrap();
        assert_eq!((d.s, d.coset_reps.len()), (2, 0));
        let d = sharp_decomposition(&seq("Z12", "5,5")).unwrap();
        assert_eq!((d.s, d.coset_reps.len()), (1, 0));
        let d = sharp_decomposition(&seq("Z7", "3")).unwrap();
        assert_eq!(d.s, 0);
        assert_eq!(sharp_decomposition(&seq("Z", "1,2")), Err(StructureError::NotSharp));
        assert_eq!(sharp_decomposition(&seq("Z5", "2,3")), Err(StructureError::NotZeroSumFree));
        assert_eq!(sharp_decomposition(&seq("Z", "1,1")), Err(StructureError::InfiniteOrder));
    }

    #[test]
    fn sharp_decomposition_with_a_coset() {
        // found by an independent brute-force search over Z2xZ6, n <= 5
        let d = sharp_decomposition(&seq("Z2xZ6", "(1,2),(0,1),(0,1),(1,5),(0,1)")).unwrap();
        assert_eq!(d.s, 3);
        assert_eq!(d.last.coords(), &[0, 1]);
        let reps: Vec<&[i64]> = d.coset_reps.iter().map(|g| g.coords()).collect();
        assert_eq!(reps, vec![&[1, 0][..]]);
    }

    #[test]
    fn associated_sequences() {
        assert_eq!(associated_sequence(&seq("Z12", "5,5,10")).unwrap(), ints(&[1, 1, 2]));
        assert_eq!(associated_sequence(&seq("Z5", "1,1,1")).unwrap(), ints(&[1, 1, 1]));
        assert_eq!(associated_sequence(&seq("Z", "-2,-2,-4")).unwrap(), ints(&[1, 1, 2]));
        assert_eq!(associated_sequence(&seq("Z", "1,3")), Err(StructureError::NotConnected));
        assert_eq!(
            associated_sequence(&seq("ZxZ2", "(1,0),(1,1),(2,1)")).unwrap_err(),
            StructureError::NotConnected
        );
        assert_eq!(
            associated_sequence(&seq("ZxZ2", "(2,1),(2,1),(4,0)")).unwrap(),
            ints(&[1, 1, 2])
        );
    }

    #[test]
    fn sorting() {
        assert_eq!(sort_strongly_connected(&ints(&[1, 1, 2, 4])).unwrap(), ints(&[1, 1, 2, 4]));
        assert_eq!(sort_strongly_connected(&ints(&[1, 1])).unwrap(), ints(&[1, 1]));
        let sorted = sort_strongly_connected(&ints(&[1, 1, 2, 4, 3])).unwrap();
        assert_eq!(sorted, ints(&[1, 1, 2, 3, 4]));
        assert!(is_strongly_connected(&sorted));
        assert!(sort_strongly_connected(&ints(&[1, 2, 1, 4])).is_err());
        assert!(sort_strongly_connected(&ints(&[1, 0])).is_err());
    }

    #[test]
    fn decompose_examples() {
        let s = seq("Z12", "5,5,10");
        let cert = decompose(&s).unwrap();
        assert_eq!(cert.a.coords(), &[5]);
        assert_eq!(cert.xs, vec![1, 1, 2]);
        assert_eq!(cert.total, 4);
        assert_eq!(cert.perm, vec![0, 1, 2]);
        let members: BTreeSet<i64> = sumset(&s).unwrap().members().iter().map(|g| g.coords()[0]).collect();
        assert_eq!(members, BTreeSet::from([0, 5, 10, 3, 8]));

        let cert = decompose(&seq("Z", "1")).unwrap();
        assert_eq!((cert.a.coords()[0], cert.xs.clone(), cert.total), (1, vec![1], 1));

        assert!(matches!(
            decompose(&seq("Z2xZ2", "(1,0),(0,1)")),
            Err(StructureError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn decompose_stable_matching() {
        // 10 appears first, but only 5 starts a connected order
        let s = seq("Z12", "10,5,5");
        let cert = decompose(&s).unwrap();
        assert_eq!(cert.a.coords(), &[5]);
        assert_eq!(cert.perm, vec![1, 2, 0]);
        let rec = cert.to_record(s.spec());
        assert_eq!(rec.perm, vec![2, 3, 1]);
        assert_eq!(
            serde_json::to_string(&rec).unwrap(),
            r#"{"group":"Z12","a":5,"perm":[2,3,1],"xs":[1,1,2],"total":4}"#
        );
    }

    #[test]
    fn decompose_over_the_integers_with_negatives() {
        let s = seq("Z", "-2,-1,-1,-1");
        let cert = decompose(&s).unwrap();
        assert_eq!(cert.a.coords(), &[-1]);
        assert_eq!(cert.xs, vec![1, 1, 1, 2]);
        assert_eq!(cert.perm, vec![1, 2, 3, 0]);
    }

    #[test]
    fn certificate_verification() {
        let s = seq("Z12", "5,5,10");
        let a = s.terms()[0].clone();
        let good = StructureCertificate {
            a: a.clone(),
            perm: vec![0, 1, 2],
            xs: vec![1, 1, 2],
            total: 4,
        };
        assert_eq!(verify_certificate(&s, &good), Ok(()));
        let bad = StructureCertificate {
            xs: vec![1, 2, 1],
            perm: vec![0, 2, 1],
            ..good.clone()
        };
        assert_eq!(verify_certificate(&s, &bad), Err(CertificateFailure::NotNondecreasing(3)));
        let bad = StructureCertificate { total: 5, ..good.clone() };
        assert!(matches!(verify_certificate(&s, &bad), Err(CertificateFailure::TotalMismatch { .. })));
        let bad = StructureCertificate { perm: vec![0, 0, 2], ..good.clone() };
        assert_eq!(verify_certificate(&s, &bad), Err(CertificateFailure::NotAPermutation));
        let bad = StructureCertificate { perm: vec![2, 1, 0], ..good.clone() };
        assert_eq!(verify_certificate(&s, &bad), Err(CertificateFailure::TermMismatch(1)));
        let bad = StructureCertificate { xs: vec![2, 2, 2], ..good.clone() };
        assert_eq!(verify_certificate(&s, &bad), Err(CertificateFailure::FirstNotOne(2)));

        let s = seq("Z5", "1,1,1");
        let cert = StructureCertificate {
            a: s.terms()[0].clone(),
            perm: vec![0, 1, 2],
            xs: vec![1, 1, 1],
            total: 3,
        };
        assert_eq!(verify_certificate(&s, &cert), Ok(()));

        // right shape, but total reaches the order of a
        let s = seq("Z4", "1,1,1,1");
        let cert = StructureCertificate {
            a: s.terms()[0].clone(),
            perm: vec![0, 1, 2, 3],
            xs: vec![1, 1, 1, 1],
            total: 4,
        };
        assert!(matches!(
            verify_certificate(&s, &cert),
            Err(CertificateFailure::TotalNotBelowOrder { total: 4, order: 4 })
        ));

        // not zero-sum-free over Z: sum set is not the progression
        let s = seq("Z", "1,-1");
        let cert = StructureCertificate {
            a: s.terms()[0].clone(),
            perm: vec![0, 1],
            xs: vec![1, 1],
            total: 2,
        };
        assert_eq!(verify_certificate(&s, &cert), Err(CertificateFailure::TermMismatch(2)));
    }
}
