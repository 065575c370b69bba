//! Subsequence sums `Σ(α)`, the total `σ(α)`, and zero-sum-freeness.
//!
//! Finite groups keep sum sets as bitsets over the mixed-radix element
//! index; infinite groups use an ordered set bounded by the coordinate box
//! of the sequence. Both paths track the *nonempty* subsequence sums, so a
//! single pass answers zero-sum-freeness as well (`0` is a nonempty sum iff
//! the sequence is not zero-sum-free).

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::group::{Factor, GroupElement, GroupError, GroupSpec};

/// Default cap on the coordinate-box volume of an infinite-group sum set.
pub const DEFAULT_BOX_CAP: u128 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SumsError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("sum-set box volume {volume} exceeds the cap of {cap}")]
    BoxTooLarge { volume: u128, cap: u128 },
}

/// Fixed-width bitset; bits past `len` are always zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bitset {
    words: Vec<u64>,
    len: usize,
}

impl Bitset {
    pub fn new(len: usize) -> Self {
        Bitset {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn set(&mut self, i: usize) {
        assert!(i < self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }

    pub fn union_with(&mut self, other: &Bitset) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersects(&self, other: &Bitset) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn is_subset(&self, other: &Bitset) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    fn mask_tail(&mut self) {
        let r = self.len % 64;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }

    /// `dst |= self << k`, dropping bits shifted past `len`.
    fn shl_into(&self, k: usize, dst: &mut Bitset) {
        let (ws, bs) = (k / 64, k % 64);
        let n = self.words.len();
        for i in (ws..n).rev() {
            let j = i - ws;
            let mut v = self.words[j] << bs;
            if bs > 0 && j > 0 {
                v |= self.words[j - 1] >> (64 - bs);
            }
            dst.words[i] |= v;
        }
        dst.mask_tail();
    }

    /// `dst |= self >> k`.
    fn shr_into(&self, k: usize, dst: &mut Bitset) {
        let (ws, bs) = (k / 64, k % 64);
        let n = self.words.len();
        for i in 0..n.saturating_sub(ws) {
            let j = i + ws;
            let mut v = self.words[j] >> bs;
            if bs > 0 && j + 1 < n {
                v |= self.words[j + 1] << (64 - bs);
            }
            dst.words[i] |= v;
        }
    }

    /// `dst |= rotate(self, k)`: bit `i` lands on `(i + k) mod len`.
    pub fn rotate_or_into(&self, k: usize, dst: &mut Bitset) {
        let k = k % self.len.max(1);
        if k == 0 {
            dst.union_with(self);
            return;
        }
        self.shl_into(k, dst);
        self.shr_into(self.len - k, dst);
    }
}

/// Index arithmetic for a finite group in mixed radix.
#[derive(Debug)]
pub(crate) struct IndexArith {
    radices: Vec<usize>,
    order: usize,
    /// Cayley table `table[a * order + i] = i + a`, for small noncyclic groups.
    table: Option<Vec<u32>>,
}

const TABLE_LIMIT: usize = 64;

impl IndexArith {
    pub(crate) fn new(spec: &GroupSpec) -> Option<Self> {
        let order = spec.order()? as usize;
        let radices: Vec<usize> = spec
            .factors()
            .iter()
            .filter_map(|f| match f {
                Factor::Cyclic(m) => Some(*m as usize),
                Factor::Free => None,
            })
            .collect();
        let mut arith = IndexArith {
            radices,
            order,
            table: None,
        };
        if arith.radices.len() > 1 && order <= TABLE_LIMIT {
            let mut table = Vec::with_capacity(order * order);
            for a in 0..order {
                for i in 0..order {
                    table.push(arith.add_digits(i, a) as u32);
                }
            }
            arith.table = Some(table);
        }
        Some(arith)
    }

    pub(crate) fn order(&self) -> usize {
        self.order
    }

    fn add_digits(&self, mut i: usize, mut a: usize) -> usize {
        let mut out = 0;
        let mut weight = 1;
        for &m in &self.radices {
            let d = (i % m + a % m) % m;
            out += d * weight;
            weight *= m;
            i /= m;
            a /= m;
        }
        out
    }

    #[cfg(test)]
    fn add(&self, i: usize, a: usize) -> usize {
        match &self.table {
            Some(t) => t[a * self.order + i] as usize,
            None => self.add_digits(i, a),
        }
    }

    /// `dst |= src + a`.
    pub(crate) fn translate_or_into(&self, src: &Bitset, a: usize, dst: &mut Bitset) {
        if self.radices.len() <= 1 {
            src.rotate_or_into(a, dst);
        } else if let Some(t) = &self.table {
            let row = &t[a * self.order..(a + 1) * self.order];
            for i in src.iter_ones() {
                dst.set(row[i] as usize);
            }
        } else {
            for i in src.iter_ones() {
                dst.set(self.add_digits(i, a));
            }
        }
    }

    /// Appends `a` to a set of nonempty sums: `N ∪ (N + a) ∪ {a}`.
    pub(crate) fn extend_nonempty(&self, nonempty: &Bitset, a: usize) -> Bitset {
        let mut next = nonempty.clone();
        self.translate_or_into(nonempty, a, &mut next);
        next.set(a);
        next
    }
}

/// The set `Σ(α)`; always contains zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumSet {
    spec: GroupSpec,
    repr: Repr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Repr {
    Bits(Bitset),
    Tree(BTreeSet<GroupElement>),
}

impl SumSet {
    /// Builds a set from arbitrary members of `spec` (zero is not added).
    pub fn from_elements<'a, I>(spec: &GroupSpec, elems: I) -> Result<Self, SumsError>
    where
        I: IntoIterator<Item = &'a GroupElement>,
    {
        let repr = match spec.order() {
            Some(order) => {
                let mut bits = Bitset::new(order as usize);
                for g in elems {
                    spec.check(g)?;
                    bits.set(spec.index_of(g).expect("finite member"));
                }
                Repr::Bits(bits)
            }
            None => {
                let mut tree = BTreeSet::new();
                for g in elems {
                    spec.check(g)?;
                    tree.insert(g.clone());
                }
                Repr::Tree(tree)
            }
        };
        Ok(SumSet {
            spec: spec.clone(),
            repr,
        })
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        match &self.repr {
            Repr::Bits(b) => b.count_ones(),
            Repr::Tree(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        match &self.repr {
            Repr::Bits(b) => self.spec.index_of(g).is_some_and(|i| b.get(i)),
            Repr::Tree(t) => t.contains(g),
        }
    }

    /// Members in mixed-radix index order (finite groups) or coordinate
    /// order (infinite groups).
    pub fn members(&self) -> Vec<GroupElement> {
        match &self.repr {
            Repr::Bits(b) => b
                .iter_ones()
                .map(|i| self.spec.element_at(i).expect("index in range"))
                .collect(),
            Repr::Tree(t) => t.iter().cloned().collect(),
        }
    }

    pub fn is_subset(&self, other: &SumSet) -> bool {
        match (&self.repr, &other.repr) {
            (Repr::Bits(a), Repr::Bits(b)) => a.is_subset(b),
            (Repr::Tree(a), Repr::Tree(b)) => a.is_subset(b),
            _ => false,
        }
    }

    /// The bitset view, for finite groups.
    pub fn bits(&self) -> Option<&Bitset> {
        match &self.repr {
            Repr::Bits(b) => Some(b),
            Repr::Tree(_) => None,
        }
    }

    pub fn display(&self) -> String {
        format!("{{{}}}", self.spec.format_elements(&self.members()))
    }
}

/// A finite ordered sequence of elements of one group.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupSequence {
    spec: GroupSpec,
    terms: Vec<GroupElement>,
}

impl GroupSequence {
    pub fn new(spec: GroupSpec, terms: Vec<GroupElement>) -> Result<Self, GroupError> {
        for t in &terms {
            spec.check(t)?;
        }
        Ok(GroupSequence { spec, terms })
    }

    /// Parses the `--seq` syntax: `5,5,10` or `(1,0),(0,1)`.
    pub fn parse(spec: &GroupSpec, text: &str) -> Result<Self, GroupError> {
        let terms = spec.parse_elements(text)?;
        Ok(GroupSequence {
            spec: spec.clone(),
            terms,
        })
    }

    /// Sequence from integer coordinates, one slice per term.
    pub fn from_coords(spec: &GroupSpec, coords: &[&[i64]]) -> Result<Self, GroupError> {
        let terms = coords
            .iter()
            .map(|c| spec.element(c))
            .collect::<Result<_, _>>()?;
        Ok(GroupSequence {
            spec: spec.clone(),
            terms,
        })
    }

    /// Sequence over `Z_m` or `Z` from scalars.
    pub fn from_scalars(spec: &GroupSpec, values: &[i64]) -> Result<Self, GroupError> {
        let terms = values
            .iter()
            .map(|&v| spec.element(&[v]))
            .collect::<Result<_, _>>()?;
        Ok(GroupSequence {
            spec: spec.clone(),
            terms,
        })
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn terms(&self) -> &[GroupElement] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The truncation `α_k` (first `k` terms).
    pub fn prefix(&self, k: usize) -> GroupSequence {
        GroupSequence {
            spec: self.spec.clone(),
            terms: self.terms[..k].to_vec(),
        }
    }

    /// The sequence `(a_{perm[0]}, a_{perm[1]}, ...)`.
    pub fn permuted(&self, perm: &[usize]) -> GroupSequence {
        GroupSequence {
            spec: self.spec.clone(),
            terms: perm.iter().map(|&i| self.terms[i].clone()).collect(),
        }
    }

    pub fn without(&self, index: usize) -> GroupSequence {
        let mut terms = self.terms.clone();
        terms.remove(index);
        GroupSequence {
            spec: self.spec.clone(),
            terms,
        }
    }
}

impl fmt::Display for GroupSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec.format_elements(&self.terms))
    }
}

#[derive(Debug, Clone)]
enum AccState {
    Finite {
        arith: Arc<IndexArith>,
        nonempty: Bitset,
    },
    Infinite {
        nonempty: BTreeSet<GroupElement>,
        lo: Vec<i64>,
        hi: Vec<i64>,
        cap: u128,
    },
}

/// Running subsequence sums of a growing sequence.
#[derive(Debug, Clone)]
pub struct SumAccumulator {
    spec: GroupSpec,
    state: AccState,
    terms: usize,
}

impl SumAccumulator {
    pub fn new(spec: &GroupSpec) -> Self {
        Self::with_cap(spec, DEFAULT_BOX_CAP)
    }

    /// `cap` bounds the box volume for infinite groups; ignored otherwise.
    pub fn with_cap(spec: &GroupSpec, cap: u128) -> Self {
        let state = match IndexArith::new(spec) {
            Some(arith) => AccState::Finite {
                nonempty: Bitset::new(arith.order()),
                arith: Arc::new(arith),
            },
            None => AccState::Infinite {
                nonempty: BTreeSet::new(),
                lo: vec![0; spec.rank()],
                hi: vec![0; spec.rank()],
                cap,
            },
        };
        SumAccumulator {
            spec: spec.clone(),
            state,
            terms: 0,
        }
    }

    pub fn from_sequence(seq: &GroupSequence) -> Result<Self, SumsError> {
        let mut acc = Self::new(seq.spec());
        for t in seq.terms() {
            acc.push(t)?;
        }
        Ok(acc)
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    /// Number of terms pushed so far.
    pub fn terms(&self) -> usize {
        self.terms
    }

    pub fn push(&mut self, a: &GroupElement) -> Result<(), SumsError> {
        self.spec.check(a)?;
        match &mut self.state {
            AccState::Finite { arith, nonempty } => {
                let ai = self.spec.index_of(a).expect("finite member");
                *nonempty = arith.extend_nonempty(nonempty, ai);
            }
            AccState::Infinite {
                nonempty,
                lo,
                hi,
                cap,
            } => {
                let mut volume: u128 = 1;
                for (i, (f, &c)) in self.spec.factors().iter().zip(a.coords()).enumerate() {
                    match f {
                        Factor::Free => {
                            if c < 0 {
                                lo[i] = lo[i].checked_add(c).ok_or(GroupError::Overflow)?;
                            } else {
                                hi[i] = hi[i].checked_add(c).ok_or(GroupError::Overflow)?;
                            }
                            volume = volume.saturating_mul((hi[i] as i128 - lo[i] as i128 + 1) as u128);
                        }
                        Factor::Cyclic(m) => volume = volume.saturating_mul(*m as u128),
                    }
                }
                if volume > *cap {
                    return Err(SumsError::BoxTooLarge { volume, cap: *cap });
                }
                let mut shifted = Vec::with_capacity(nonempty.len() + 1);
                for s in nonempty.iter() {
                    shifted.push(self.spec.add_unchecked(s, a)?);
                }
                nonempty.extend(shifted);
                nonempty.insert(a.clone());
            }
        }
        self.terms += 1;
        Ok(())
    }

    /// True iff no nonempty subsequence pushed so far sums to zero.
    pub fn zero_sum_free(&self) -> bool {
        match &self.state {
            AccState::Finite { nonempty, .. } => !nonempty.get(0),
            AccState::Infinite { nonempty, .. } => !nonempty.contains(&self.spec.zero()),
        }
    }

    /// `|Σ|` of the terms pushed so far.
    pub fn size(&self) -> usize {
        let zsf = self.zero_sum_free() as usize;
        match &self.state {
            AccState::Finite { nonempty, .. } => nonempty.count_ones() + zsf,
            AccState::Infinite { nonempty, .. } => nonempty.len() + zsf,
        }
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        if g.is_zero() && self.spec.contains(g) {
            return true;
        }
        match &self.state {
            AccState::Finite { nonempty, .. } => self.spec.index_of(g).is_some_and(|i| nonempty.get(i)),
            AccState::Infinite { nonempty, .. } => nonempty.contains(g),
        }
    }

    /// Whether `a ∈ Σ − Σ`, i.e. `(Σ + a) ∩ Σ` is nonempty.
    pub fn difference_contains(&self, a: &GroupElement) -> bool {
        if !self.spec.contains(a) {
            return false;
        }
        match &self.state {
            AccState::Finite { arith, nonempty } => {
                let mut full = nonempty.clone();
                full.set(0);
                let mut shifted = Bitset::new(full.len());
                arith.translate_or_into(&full, self.spec.index_of(a).expect("finite member"), &mut shifted);
                shifted.intersects(&full)
            }
            AccState::Infinite { nonempty, .. } => {
                let zero = self.spec.zero();
                std::iter::once(&zero).chain(nonempty.iter()).any(|s| {
                    self.spec
                        .add_unchecked(s, a)
                        .is_ok_and(|t| t.is_zero() || nonempty.contains(&t))
                })
            }
        }
    }

    /// Snapshot of `Σ` for the terms pushed so far.
    pub fn sumset(&self) -> SumSet {
        let repr = match &self.state {
            AccState::Finite { nonempty, .. } => {
                let mut bits = nonempty.clone();
                bits.set(0);
                Repr::Bits(bits)
            }
            AccState::Infinite { nonempty, .. } => {
                let mut tree = nonempty.clone();
                tree.insert(self.spec.zero());
                Repr::Tree(tree)
            }
        };
        SumSet {
            spec: self.spec.clone(),
            repr,
        }
    }
}

/// `Σ(α)`, including the empty subsequence.
pub fn sumset(seq: &GroupSequence) -> Result<SumSet, SumsError> {
    Ok(SumAccumulator::from_sequence(seq)?.sumset())
}

/// `Σ(α)` and zero-sum-freeness from one pass.
pub fn sumset_and_zero_sum_free(seq: &GroupSequence) -> Result<(SumSet, bool), SumsError> {
    let acc = SumAccumulator::from_sequence(seq)?;
    Ok((acc.sumset(), acc.zero_sum_free()))
}

/// `|Σ(α_k)|` for `k = 0..=n`.
pub fn prefix_sumset_sizes(seq: &GroupSequence) -> Result<Vec<usize>, SumsError> {
    let mut acc = SumAccumulator::new(seq.spec());
    let mut sizes = Vec::with_capacity(seq.len() + 1);
    sizes.push(acc.size());
    for t in seq.terms() {
        acc.push(t)?;
        sizes.push(acc.size());
    }
    Ok(sizes)
}

/// `σ(α)`, the sum of all terms.
pub fn sigma(seq: &GroupSequence) -> Result<GroupElement, GroupError> {
    let spec = seq.spec();
    seq.terms()
        .iter()
        .try_fold(spec.zero(), |acc, t| spec.add_unchecked(&acc, t))
}

pub fn is_zero_sum_free(seq: &GroupSequence) -> Result<bool, SumsError> {
    Ok(SumAccumulator::from_sequence(seq)?.zero_sum_free())
}

/// `S·a = {s·a : s ∈ S}`.
pub fn scalar_set<I>(spec: &GroupSpec, scalars: I, a: &GroupElement) -> Result<BTreeSet<GroupElement>, GroupError>
where
    I: IntoIterator<Item = i64>,
{
    scalars
        .into_iter()
        .map(|s| spec.scalar_mul(s, a))
        .collect()
}
