//! Finitely generated abelian groups `Z^r x Z_m1 x ... x Z_mk`.
//!
//! A [`GroupSpec`] keeps its factors in the order they were written, so
//! `Z3xZ` has coordinates `(torsion, free)`. Elements are plain coordinate
//! vectors; torsion coordinates are always stored reduced.
//!
//! Finite groups index their elements in mixed radix,
//! `index = c_0 + m_0 * (c_1 + m_1 * (c_2 + ...))`, i.e. the first factor is
//! the least significant digit. Bitset dumps and the enumeration order both
//! use this encoding.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("invalid group spec {text:?}: {reason}")]
    Parse { text: String, reason: String },
    #[error("invalid element {text:?} for group {group}: {reason}")]
    ParseElement {
        text: String,
        group: String,
        reason: String,
    },
    #[error("cyclic factor order must be at least 2, got {0}")]
    BadFactor(u64),
    #[error("group order does not fit in 64 bits")]
    TooLarge,
    #[error("element {element:?} does not belong to {group}")]
    Mismatch { element: Vec<i64>, group: String },
    #[error("element has infinite order")]
    InfiniteOrder,
    #[error("group {0} is infinite")]
    InfiniteGroup(String),
    #[error("integer overflow in group arithmetic")]
    Overflow,
}

/// One direct factor: `Z` or `Z_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Factor {
    Free,
    Cyclic(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupSpec {
    factors: Vec<Factor>,
    order: Option<u64>,
}

/// A group element as a coordinate vector, one entry per factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement(Vec<i64>);

impl GroupElement {
    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementOrder {
    Finite(u64),
    Infinite,
}

impl ElementOrder {
    pub fn finite(self) -> Option<u64> {
        match self {
            ElementOrder::Finite(d) => Some(d),
            ElementOrder::Infinite => None,
        }
    }
}

impl fmt::Display for ElementOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementOrder::Finite(d) => write!(f, "{d}"),
            ElementOrder::Infinite => f.write_str("inf"),
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

impl GroupSpec {
    pub fn new(factors: Vec<Factor>) -> Result<Self, GroupError> {
        let mut order = Some(1u64);
        for f in &factors {
            match *f {
                Factor::Cyclic(m) if m < 2 => return Err(GroupError::BadFactor(m)),
                Factor::Cyclic(m) => {
                    if let Some(o) = order {
                        order = Some(o.checked_mul(m).ok_or(GroupError::TooLarge)?);
                    }
                }
                Factor::Free => order = None,
            }
        }
        Ok(GroupSpec { factors, order })
    }

    /// The cyclic group `Z_m`.
    pub fn cyclic(m: u64) -> Result<Self, GroupError> {
        Self::new(vec![Factor::Cyclic(m)])
    }

    /// The infinite cyclic group `Z^rank`.
    pub fn free(rank: usize) -> Self {
        GroupSpec {
            factors: vec![Factor::Free; rank],
            order: if rank == 0 { Some(1) } else { None },
        }
    }

    pub fn trivial() -> Self {
        GroupSpec {
            factors: Vec::new(),
            order: Some(1),
        }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Number of coordinates, `r + k`.
    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn free_rank(&self) -> usize {
        self.factors.iter().filter(|f| **f == Factor::Free).count()
    }

    pub fn torsion_orders(&self) -> Vec<u64> {
        self.factors
            .iter()
            .filter_map(|f| match f {
                Factor::Cyclic(m) => Some(*m),
                Factor::Free => None,
            })
            .collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.order.is_some()
    }

    /// `|G|`, or `None` for infinite groups.
    pub fn order(&self) -> Option<u64> {
        self.order
    }

    /// True for `Z_m` (a single finite cyclic factor).
    pub fn is_finite_cyclic(&self) -> bool {
        matches!(self.factors.as_slice(), [Factor::Cyclic(_)])
    }

    fn mismatch(&self, g: &GroupElement) -> GroupError {
        GroupError::Mismatch {
            element: g.0.clone(),
            group: self.to_string(),
        }
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        g.0.len() == self.factors.len()
            && self.factors.iter().zip(&g.0).all(|(f, &c)| match f {
                Factor::Free => true,
                Factor::Cyclic(m) => c >= 0 && (c as u64) < *m,
            })
    }

    pub(crate) fn check(&self, g: &GroupElement) -> Result<(), GroupError> {
        if self.contains(g) {
            Ok(())
        } else {
            Err(self.mismatch(g))
        }
    }

    /// Builds an element, reducing torsion coordinates into `[0, m)`.
    pub fn element(&self, coords: &[i64]) -> Result<GroupElement, GroupError> {
        if coords.len() != self.factors.len() {
            return Err(GroupError::Mismatch {
                element: coords.to_vec(),
                group: self.to_string(),
            });
        }
        Ok(GroupElement(
            self.factors
                .iter()
                .zip(coords)
                .map(|(f, &c)| match f {
                    Factor::Free => c,
                    Factor::Cyclic(m) => c.rem_euclid(*m as i64),
                })
                .collect(),
        ))
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement(vec![0; self.factors.len()])
    }

    pub fn add(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check(g)?;
        self.check(h)?;
        self.add_unchecked(g, h)
    }

    pub fn sub(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement, GroupError> {
        let nh = self.neg(h)?;
        self.add(g, &nh)
    }

    pub fn neg(&self, g: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check(g)?;
        Ok(GroupElement(
            self.factors
                .iter()
                .zip(&g.0)
                .map(|(f, &c)| match f {
                    Factor::Free => -c,
                    Factor::Cyclic(m) => (*m as i64 - c) % *m as i64,
                })
                .collect(),
        ))
    }

    pub fn scalar_mul(&self, k: i64, g: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check(g)?;
        self.scalar_mul_unchecked(k, g)
    }

    pub(crate) fn add_unchecked(
        &self,
        g: &GroupElement,
        h: &GroupElement,
    ) -> Result<GroupElement, GroupError> {
        self.factors
            .iter()
            .zip(g.0.iter().zip(&h.0))
            .map(|(f, (&a, &b))| match f {
                Factor::Free => a.checked_add(b).ok_or(GroupError::Overflow),
                Factor::Cyclic(m) => Ok(((a as i128 + b as i128) % *m as i128) as i64),
            })
            .collect::<Result<_, _>>()
            .map(GroupElement)
    }

    pub(crate) fn scalar_mul_unchecked(
        &self,
        k: i64,
        g: &GroupElement,
    ) -> Result<GroupElement, GroupError> {
        self.factors
            .iter()
            .zip(&g.0)
            .map(|(f, &c)| match f {
                Factor::Free => k.checked_mul(c).ok_or(GroupError::Overflow),
                Factor::Cyclic(m) => {
                    Ok(((k as i128 * c as i128).rem_euclid(*m as i128)) as i64)
                }
            })
            .collect::<Result<_, _>>()
            .map(GroupElement)
    }

    /// `lcm_i m_i / gcd(m_i, c_i)` over torsion coordinates, or `Infinite` if
    /// any free coordinate is nonzero.
    pub fn order_of(&self, g: &GroupElement) -> Result<ElementOrder, GroupError> {
        self.check(g)?;
        let mut d = 1u64;
        for (f, &c) in self.factors.iter().zip(&g.0) {
            match f {
                Factor::Free if c != 0 => return Ok(ElementOrder::Infinite),
                Factor::Free => {}
                Factor::Cyclic(m) => d = lcm(d, m / gcd(*m, c as u64)),
            }
        }
        Ok(ElementOrder::Finite(d))
    }

    /// `[0, g, 2g, ..., (d-1)g]`, in that order.
    pub fn cyclic_subgroup(&self, g: &GroupElement) -> Result<Vec<GroupElement>, GroupError> {
        let d = self
            .order_of(g)?
            .finite()
            .ok_or(GroupError::InfiniteOrder)?;
        let mut out = Vec::with_capacity(d as usize);
        let mut cur = self.zero();
        for _ in 0..d {
            let next = self.add_unchecked(&cur, g)?;
            out.push(cur);
            cur = next;
        }
        Ok(out)
    }

    /// Closure of `elements` under addition, sorted by mixed-radix index,
    /// together with whether that subgroup is cyclic.
    pub fn generated_subgroup(
        &self,
        elements: &[GroupElement],
    ) -> Result<(Vec<GroupElement>, bool), GroupError> {
        if !self.is_finite() {
            return Err(GroupError::InfiniteGroup(self.to_string()));
        }
        for g in elements {
            self.check(g)?;
        }
        let mut seen: BTreeSet<GroupElement> = BTreeSet::new();
        seen.insert(self.zero());
        let mut frontier = vec![self.zero()];
        while let Some(x) = frontier.pop() {
            for g in elements {
                let y = self.add_unchecked(&x, g)?;
                if seen.insert(y.clone()) {
                    frontier.push(y);
                }
            }
        }
        let size = seen.len() as u64;
        let mut cyclic = false;
        for x in &seen {
            if self.order_of(x)? == ElementOrder::Finite(size) {
                cyclic = true;
                break;
            }
        }
        let mut members: Vec<GroupElement> = seen.into_iter().collect();
        members.sort_by_key(|x| self.index_of(x).unwrap_or(usize::MAX));
        Ok((members, cyclic))
    }

    /// Mixed-radix index of an element of a finite group.
    pub fn index_of(&self, g: &GroupElement) -> Option<usize> {
        if !self.is_finite() || !self.contains(g) {
            return None;
        }
        let mut idx = 0usize;
        let mut weight = 1usize;
        for (f, &c) in self.factors.iter().zip(&g.0) {
            if let Factor::Cyclic(m) = f {
                idx += c as usize * weight;
                weight *= *m as usize;
            }
        }
        Some(idx)
    }

    /// Inverse of [`GroupSpec::index_of`].
    pub fn element_at(&self, mut idx: usize) -> Option<GroupElement> {
        let order = self.order? as usize;
        if idx >= order {
            return None;
        }
        let coords = self
            .factors
            .iter()
            .map(|f| match f {
                Factor::Cyclic(m) => {
                    let c = idx % *m as usize;
                    idx /= *m as usize;
                    c as i64
                }
                Factor::Free => 0,
            })
            .collect();
        Some(GroupElement(coords))
    }

    /// Element syntax: a bare integer for rank-1 groups, `(c1,c2,...)`
    /// otherwise.
    pub fn format_element(&self, g: &GroupElement) -> String {
        if g.0.len() == 1 {
            g.0[0].to_string()
        } else {
            let inner: Vec<String> = g.0.iter().map(|c| c.to_string()).collect();
            format!("({})", inner.join(","))
        }
    }

    pub fn parse_element(&self, text: &str) -> Result<GroupElement, GroupError> {
        let err = |reason: &str| GroupError::ParseElement {
            text: text.to_string(),
            group: self.to_string(),
            reason: reason.to_string(),
        };
        let t = text.trim();
        let body = match t.strip_prefix('(') {
            Some(rest) => rest.strip_suffix(')').ok_or_else(|| err("unbalanced parenthesis"))?,
            None if self.rank() == 1 => t,
            None => return Err(err("expected a parenthesized tuple")),
        };
        let coords: Vec<i64> = if body.trim().is_empty() {
            Vec::new()
        } else {
            body.split(',')
                .map(|c| c.trim().parse::<i64>().map_err(|_| err("bad integer")))
                .collect::<Result<_, _>>()?
        };
        if coords.len() != self.rank() {
            return Err(err(&format!(
                "expected {} coordinates, got {}",
                self.rank(),
                coords.len()
            )));
        }
        self.element(&coords)
    }

    /// Parses a comma-separated list of elements: scalars for rank-1 groups,
    /// parenthesized tuples otherwise. The empty string is the empty list.
    pub fn parse_elements(&self, text: &str) -> Result<Vec<GroupElement>, GroupError> {
        let t = text.trim();
        if t.is_empty() {
            return Ok(Vec::new());
        }
        if !t.contains('(') {
            if self.rank() != 1 {
                return Err(GroupError::ParseElement {
                    text: text.to_string(),
                    group: self.to_string(),
                    reason: "expected parenthesized tuples".into(),
                });
            }
            return t.split(',').map(|s| self.parse_element(s)).collect();
        }
        let mut out = Vec::new();
        let mut rest = t;
        loop {
            rest = rest.trim_start();
            let close = match (rest.starts_with('('), rest.find(')')) {
                (true, Some(i)) => i,
                _ => {
                    return Err(GroupError::ParseElement {
                        text: text.to_string(),
                        group: self.to_string(),
                        reason: "expected '(' ... ')'".into(),
                    })
                }
            };
            out.push(self.parse_element(&rest[..=close])?);
            rest = rest[close + 1..].trim_start();
            if rest.is_empty() {
                break;
            }
            rest = rest.strip_prefix(',').ok_or_else(|| GroupError::ParseElement {
                text: text.to_string(),
                group: self.to_string(),
                reason: "expected ',' between tuples".into(),
            })?;
        }
        Ok(out)
    }

    pub fn format_elements(&self, elems: &[GroupElement]) -> String {
        elems
            .iter()
            .map(|g| self.format_element(g))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Parses `factor ("x" factor)*` with `factor := "Z" | "Z"<m>`, `m >= 2`.
pub fn parse_group_spec(text: &str) -> Result<GroupSpec, GroupError> {
    let err = |reason: String| GroupError::Parse {
        text: text.to_string(),
        reason,
    };
    let t = text.trim();
    if t.is_empty() {
        return Err(err("empty".into()));
    }
    let mut factors = Vec::new();
    for part in t.split('x') {
        let digits = part
            .strip_prefix('Z')
            .ok_or_else(|| err(format!("factor {part:?} must start with 'Z'")))?;
        if digits.is_empty() {
            factors.push(Factor::Free);
            continue;
        }
        if !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err(format!("bad factor {part:?}")));
        }
        let m: u64 = digits
            .parse()
            .map_err(|_| err(format!("factor {part:?} out of range")))?;
        if m < 2 {
            return Err(err(format!("factor {part:?} must have order at least 2")));
        }
        factors.push(Factor::Cyclic(m));
    }
    GroupSpec::new(factors).map_err(|e| err(e.to_string()))
}

impl FromStr for GroupSpec {
    type Err = GroupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_group_spec(s)
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, factor) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str("x")?;
            }
            match factor {
                Factor::Free => f.write_str("Z")?,
                Factor::Cyclic(m) => write!(f, "Z{m}")?,
            }
        }
        Ok(())
    }
}
