//! Exhaustive search over zero-sum-free multisets of a small finite group,
//! with batch checks of the structural results on every multiset found.
//!
//! Multisets are visited as index tuples `1 <= e_1 <= ... <= e_n < |G|`
//! (mixed-radix indices, zero excluded) in lexicographic order. Each search
//! frame owns the nonempty-sum bitset of its prefix, so backtracking is a
//! stack pop.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bounds::check_multiplicity_theorem;
use crate::group::{ElementOrder, GroupSpec};
use crate::structure::{
    decompose, is_connected, is_sharp, rearrange_connected_or_sharp, sharp_decomposition, Arrangement,
    StructureError,
};
use crate::sums::{prefix_sumset_sizes, Bitset, GroupSequence, IndexArith};

/// Permutation-based checks only run up to this length.
pub const MAX_PERMUTATION_LEN: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumError {
    #[error("enumeration needs a finite group, got {0}")]
    InfiniteGroup(String),
    #[error("sequence length must be at least 1")]
    ZeroLength,
    #[error("invalid search prefix {0:?}")]
    BadPrefix(Vec<usize>),
    #[error("unknown check {0:?}")]
    UnknownCheck(String),
    #[error("could not build a thread pool: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Check {
    MainTheorem,
    Multiplicity,
    OlsonWhite,
    SharpLastTerm,
    Claim21,
    SumsetLowerBound,
}

impl Check {
    pub const ALL: [Check; 6] = [
        Check::MainTheorem,
        Check::Multiplicity,
        Check::OlsonWhite,
        Check::SharpLastTerm,
        Check::Claim21,
        Check::SumsetLowerBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::MainTheorem => "main_theorem",
            Check::Multiplicity => "multiplicity",
            Check::OlsonWhite => "olson_white",
            Check::SharpLastTerm => "sharp_last_term",
            Check::Claim21 => "claim_2_1",
            Check::SumsetLowerBound => "sumset_lower_bound",
        }
    }

    /// Parses a comma list of check names, or `all`.
    pub fn parse_list(text: &str) -> Result<BTreeSet<Check>, EnumError> {
        let mut out = BTreeSet::new();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part == "all" {
                out.extend(Check::ALL);
            } else {
                out.insert(part.parse()?);
            }
        }
        Ok(out)
    }
}

impl FromStr for Check {
    type Err = EnumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| EnumError::UnknownCheck(s.to_string()))
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Caps {
    pub max_seqs: Option<u64>,
    pub time_budget: Option<Duration>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumerationTask {
    pub spec: GroupSpec,
    pub len: usize,
    pub checks: BTreeSet<Check>,
    pub caps: Caps,
    /// Fixed leading indices; the task covers only multisets extending it.
    pub prefix: Vec<usize>,
}

impl EnumerationTask {
    pub fn new(spec: GroupSpec, len: usize) -> Result<Self, EnumError> {
        let task = EnumerationTask {
            spec,
            len,
            checks: Check::ALL.into_iter().collect(),
            caps: Caps::default(),
            prefix: Vec::new(),
        };
        task.validate()?;
        Ok(task)
    }

    pub fn with_checks(mut self, checks: BTreeSet<Check>) -> Self {
        self.checks = checks;
        self
    }

    pub fn with_caps(mut self, caps: Caps) -> Self {
        self.caps = caps;
        self
    }

    pub fn validate(&self) -> Result<(), EnumError> {
        let order = self
            .spec
            .order()
            .ok_or_else(|| EnumError::InfiniteGroup(self.spec.to_string()))? as usize;
        if self.len == 0 {
            return Err(EnumError::ZeroLength);
        }
        let p = &self.prefix;
        if p.len() > self.len
            || p.iter().any(|&e| e == 0 || e >= order)
            || p.windows(2).any(|w| w[0] > w[1])
        {
            return Err(EnumError::BadPrefix(p.clone()));
        }
        Ok(())
    }
}

/// One zero-sum-free multiset with the nonempty sums of its terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZsfMultiset {
    pub indices: Vec<usize>,
    pub nonempty: Bitset,
}

impl ZsfMultiset {
    /// `|Σ|`: the nonempty sums plus zero.
    pub fn sumset_size(&self) -> usize {
        self.nonempty.count_ones() + 1
    }

    pub fn to_sequence(&self, spec: &GroupSpec) -> GroupSequence {
        sequence_of(spec, &self.indices)
    }
}

struct Frame {
    next: usize,
    nonempty: Bitset,
}

/// Depth-first stream of zero-sum-free multisets.
pub struct ZeroSumFreeIter {
    arith: Arc<IndexArith>,
    len: usize,
    path: Vec<usize>,
    stack: Vec<Frame>,
    pending: Option<ZsfMultiset>,
}

impl ZeroSumFreeIter {
    fn new(task: &EnumerationTask) -> Result<Self, EnumError> {
        task.validate()?;
        let arith = Arc::new(IndexArith::new(&task.spec).expect("finite group"));
        let mut nonempty = Bitset::new(arith.order());
        for &e in &task.prefix {
            nonempty = arith.extend_nonempty(&nonempty, e);
        }
        let mut it = ZeroSumFreeIter {
            arith,
            len: task.len,
            path: task.prefix.clone(),
            stack: Vec::new(),
            pending: None,
        };
        if nonempty.get(0) {
            return Ok(it);
        }
        if task.prefix.len() == task.len {
            it.pending = Some(ZsfMultiset {
                indices: task.prefix.clone(),
                nonempty,
            });
        } else {
            let next = task.prefix.last().copied().unwrap_or(1);
            it.stack.push(Frame { next, nonempty });
        }
        Ok(it)
    }
}

impl Iterator for ZeroSumFreeIter {
    type Item = ZsfMultiset;

    fn next(&mut self) -> Option<ZsfMultiset> {
        if let Some(m) = self.pending.take() {
            return Some(m);
        }
        let order = self.arith.order();
        loop {
            let top = self.stack.last_mut()?;
            if top.next >= order {
                self.stack.pop();
                if self.stack.is_empty() {
                    return None;
                }
                self.path.pop();
                continue;
            }
            let e = top.next;
            top.next += 1;
            let nonempty = self.arith.extend_nonempty(&top.nonempty, e);
            if nonempty.get(0) {
                continue;
            }
            if self.path.len() + 1 == self.len {
                let mut indices = self.path.clone();
                indices.push(e);
                return Some(ZsfMultiset { indices, nonempty });
            }
            self.path.push(e);
            self.stack.push(Frame { next: e, nonempty });
        }
    }
}

/// Every zero-sum-free multiset of the task's length (and prefix), one
/// nondecreasing representative each.
pub fn enumerate_zero_sum_free(task: &EnumerationTask) -> Result<ZeroSumFreeIter, EnumError> {
    ZeroSumFreeIter::new(task)
}

/// A failed check, with enough context to rerun it from the command line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub group: String,
    pub seq: String,
    pub check: String,
    pub stage: String,
    pub detail: String,
    /// `|Σ(α_k)|` for `k = 0..=n`.
    pub prefix_sizes: Vec<usize>,
    pub repro: String,
    #[serde(skip)]
    key: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EnumerationReport {
    pub group: String,
    pub len: usize,
    pub checks: Vec<String>,
    pub complete: bool,
    pub total_zsf: u64,
    pub few_sums: u64,
    /// `|Σ| -> number of multisets`.
    pub histogram: BTreeMap<usize, u64>,
    pub violations: Vec<Violation>,
    /// Wall time; not serialized so that reports compare byte for byte.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl EnumerationReport {
    fn empty(task: &EnumerationTask) -> Self {
        EnumerationReport {
            group: task.spec.to_string(),
            len: task.len,
            checks: task.checks.iter().map(|c| c.name().to_string()).collect(),
            complete: true,
            total_zsf: 0,
            few_sums: 0,
            histogram: BTreeMap::new(),
            violations: Vec::new(),
            elapsed: Duration::ZERO,
        }
    }

    /// Combines reports of disjoint subtasks of one task. Violations are
    /// ordered by multiset, so the result does not depend on merge order.
    pub fn merge(mut self, other: EnumerationReport) -> EnumerationReport {
        self.complete &= other.complete;
        self.total_zsf += other.total_zsf;
        self.few_sums += other.few_sums;
        for (k, v) in other.histogram {
            *self.histogram.entry(k).or_default() += v;
        }
        self.violations.extend(other.violations);
        self.violations.sort_by(|a, b| a.key.cmp(&b.key));
        self.elapsed = self.elapsed.max(other.elapsed);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct Checker<'a> {
    task: &'a EnumerationTask,
    spec: &'a GroupSpec,
}

impl Checker<'_> {
    fn violation(&self, seq: &GroupSequence, key: &[usize], check: Check, stage: &str, detail: String) -> Violation {
        let text = seq.to_string();
        Violation {
            group: self.spec.to_string(),
            repro: format!("analyze --group {} --seq \"{}\"", self.spec, text),
            seq: text,
            check: check.name().to_string(),
            stage: stage.to_string(),
            detail,
            prefix_sizes: prefix_sumset_sizes(seq).unwrap_or_default(),
            key: key.to_vec(),
        }
    }

    fn run(&self, m: &ZsfMultiset, out: &mut Vec<Violation>) {
        let seq = m.to_sequence(self.spec);
        let n = seq.len();
        let size = m.sumset_size();
        let key = &m.indices;
        let checks = &self.task.checks;
        let mut fail = |check: Check, stage: &str, detail: String| {
            out.push(self.violation(&seq, key, check, stage, detail));
        };

        if checks.contains(&Check::SumsetLowerBound) && size < n + 1 {
            fail(Check::SumsetLowerBound, "sumset_size", format!("|Σ| = {size} < n + 1 = {}", n + 1));
        }

        // a single term always has |Σ| = 2n but still decomposes as (1)
        if (size < 2 * n || n == 1) && checks.contains(&Check::MainTheorem) {
            if let Some((stage, detail)) = self.main_theorem(&seq) {
                fail(Check::MainTheorem, &stage, detail);
            }
        }
        if size < 2 * n && checks.contains(&Check::Multiplicity) {
            match check_multiplicity_theorem(&seq) {
                Ok(r) if r.passed => {}
                Ok(r) => fail(
                    Check::Multiplicity,
                    "bound",
                    format!("mu = {} against bound {} (nu consistent: {})", r.mu, r.bound, r.nu_consistent),
                ),
                Err(e) => fail(Check::Multiplicity, "check_multiplicity_theorem", e.to_string()),
            }
        }

        if checks.contains(&Check::OlsonWhite) {
            match self.spec.generated_subgroup(seq.terms()) {
                Ok((_, false)) if size < 2 * n => fail(
                    Check::OlsonWhite,
                    "noncyclic_subgroup",
                    format!("noncyclic subgroup but |Σ| = {size} < 2n = {}", 2 * n),
                ),
                Ok(_) => {}
                Err(e) => fail(Check::OlsonWhite, "generated_subgroup", e.to_string()),
            }
        }

        let want_last = checks.contains(&Check::SharpLastTerm);
        let want_claim = checks.contains(&Check::Claim21);
        if (want_last || want_claim) && n <= MAX_PERMUTATION_LEN {
            let mut last_terms = BTreeSet::new();
            let mut order = m.indices.clone();
            loop {
                let perm_seq = sequence_of(self.spec, &order);
                match is_sharp(&perm_seq) {
                    Ok(true) => {
                        last_terms.insert(*order.last().expect("n >= 1"));
                        if want_claim {
                            if let Err(e) = sharp_decomposition(&perm_seq) {
                                fail(
                                    Check::Claim21,
                                    "sharp_decomposition",
                                    format!("order {}: {e}", perm_seq),
                                );
                            }
                        }
                    }
                    Ok(false) => {}
                    Err(e) => fail(Check::SharpLastTerm, "is_sharp", e.to_string()),
                }
                if !next_permutation(&mut order) {
                    break;
                }
            }
            if want_last && last_terms.len() > 1 {
                let names: Vec<String> = last_terms
                    .iter()
                    .map(|&i| self.spec.format_element(&self.spec.element_at(i).expect("in range")))
                    .collect();
                fail(
                    Check::SharpLastTerm,
                    "sharp_rearrangements",
                    format!("sharp orders end in distinct terms {}", names.join(", ")),
                );
            }
        }
    }

    /// Runs the decomposer and the connected-or-sharp rearrangement; returns
    /// the failing stage, if any.
    fn main_theorem(&self, seq: &GroupSequence) -> Option<(String, String)> {
        let n = seq.len();
        let cert = match decompose(seq) {
            Ok(c) => c,
            Err(StructureError::TheoremViolation(c)) => return Some((c.stage, c.detail)),
            Err(e) => return Some(("decompose".into(), e.to_string())),
        };
        if let Some(m) = self.spec.order().filter(|_| self.spec.is_finite_cyclic()) {
            if 2 * n as u64 > m {
                match self.spec.order_of(&cert.a) {
                    Ok(ElementOrder::Finite(d)) if d == m => {}
                    other => {
                        return Some((
                            "base_order".into(),
                            format!("n > m/2 but ord(a) is {other:?}, not {m}"),
                        ))
                    }
                }
            }
        }
        match rearrange_connected_or_sharp(seq) {
            Ok(Arrangement::Connected(p)) if is_connected(&seq.permuted(&p)).unwrap_or(false) => None,
            Ok(Arrangement::Sharp(p)) if is_sharp(&seq.permuted(&p)).unwrap_or(false) => None,
            Ok(a) => Some(("rearrange_connected_or_sharp".into(), format!("arrangement {a:?} does not hold"))),
            Err(e) => Some(("rearrange_connected_or_sharp".into(), e.to_string())),
        }
    }
}

fn sequence_of(spec: &GroupSpec, indices: &[usize]) -> GroupSequence {
    let terms = indices
        .iter()
        .map(|&i| spec.element_at(i).expect("index in range"))
        .collect();
    GroupSequence::new(spec.clone(), terms).expect("members of spec")
}

/// Advances to the next lexicographic permutation; false after the last.
fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Runs the task's checks on every multiset it covers.
pub fn run_checks(task: &EnumerationTask) -> Result<EnumerationReport, EnumError> {
    let start = Instant::now();
    let mut report = EnumerationReport::empty(task);
    let checker = Checker {
        task,
        spec: &task.spec,
    };
    for m in enumerate_zero_sum_free(task)? {
        if task.caps.max_seqs.is_some_and(|cap| report.total_zsf >= cap)
            || task.caps.time_budget.is_some_and(|b| start.elapsed() > b)
        {
            report.complete = false;
            break;
        }
        let size = m.sumset_size();
        report.total_zsf += 1;
        *report.histogram.entry(size).or_default() += 1;
        if size < 2 * task.len {
            report.few_sums += 1;
        }
        checker.run(&m, &mut report.violations);
    }
    report.elapsed = start.elapsed();
    Ok(report)
}

/// Splits the search forest into subtasks by fixed leading indices,
/// deepening until there are at least `parts` subtasks or the prefixes reach
/// full length. Prefixes that are already not zero-sum-free are dropped.
/// Subtasks come out in lexicographic prefix order.
pub fn split_work(task: &EnumerationTask, parts: usize) -> Vec<EnumerationTask> {
    if parts <= 1 || task.validate().is_err() {
        return vec![task.clone()];
    }
    let arith = IndexArith::new(&task.spec).expect("finite group");
    let order = arith.order();
    let nonempty_of = |p: &[usize]| {
        p.iter()
            .fold(Bitset::new(order), |acc, &e| arith.extend_nonempty(&acc, e))
    };
    let mut prefixes = vec![task.prefix.clone()];
    while prefixes.len() < parts {
        let mut deepened = false;
        let mut next = Vec::new();
        for p in prefixes {
            if p.len() >= task.len {
                next.push(p);
                continue;
            }
            deepened = true;
            let base = nonempty_of(&p);
            let start = p.last().copied().unwrap_or(1);
            for e in start..order {
                if !arith.extend_nonempty(&base, e).get(0) {
                    let mut child = p.clone();
                    child.push(e);
                    next.push(child);
                }
            }
        }
        prefixes = next;
        if !deepened {
            break;
        }
    }
    prefixes
        .into_iter()
        .map(|prefix| EnumerationTask {
            prefix,
            ..task.clone()
        })
        .collect()
}

/// Splits the task across `jobs` worker threads and merges the reports in
/// subtask order.
pub fn run_parallel(task: &EnumerationTask, jobs: usize) -> Result<EnumerationReport, EnumError> {
    if jobs <= 1 {
        return run_checks(task);
    }
    let start = Instant::now();
    let subtasks = split_work(task, jobs);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| EnumError::ThreadPool(e.to_string()))?;
    let reports: Vec<EnumerationReport> =
        pool.install(|| subtasks.par_iter().map(run_checks).collect::<Result<_, _>>())?;
    let mut merged = reports
        .into_iter()
        .fold(EnumerationReport::empty(task), EnumerationReport::merge);
    merged.elapsed = start.elapsed();
    Ok(merged)
}
