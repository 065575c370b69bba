//! Subsequence sums of zero-sum-free sequences over finitely generated
//! abelian groups.
//!
//! A zero-sum-free sequence of length `n` with fewer than `2n` subsequence
//! sums has a rigid shape: after renumbering, its terms are `x_k·a` for one
//! element `a` and integers `1 = x_1 <= ... <= x_n` with
//! `x_{k+1} <= x_1 + ... + x_k`, and its sum set is `{0, a, ..., (Σx)·a}`.
//! This crate computes sum sets, extracts and validates that certificate,
//! checks the multiplicity bound it implies, and verifies all of it
//! exhaustively over small groups.

pub mod bounds;
pub mod cli;
pub mod enumerate;
pub mod group;
pub mod structure;
pub mod sums;

pub use group::{parse_group_spec, ElementOrder, Factor, GroupElement, GroupError, GroupSpec};
pub use sums::{GroupSequence, SumSet};
