//! Exact computation of order-n Massey products and nilpotent lifting
//! obstructions for twisted group cocycles, over coefficient rings Z/m with
//! gcd(m, n!) = 1.
//!
//! The library models the free group on two generators x, y through its Magnus
//! embedding into truncated noncommutative power series (x ↦ 1 + X, y ↦ 1 + Y),
//! so the quotients by the lower central series become finite, exactly
//! computable groups. A finite group G acts on these quotients through a
//! character χ and a conjugating 1-cocycle 𝔣 valued in commutators; cocycles
//! for that action are pushed into unipotent upper-triangular matrix groups,
//! where an order-n Massey product of the resulting weight-one classes and the
//! step-n lifting obstruction of a cocycle can both be evaluated and compared.
//!
//! Everything is exact: no floats, no Gröbner bases, no general Smith normal
//! form. Linear questions (is this 2-cochain a coboundary?) reduce to linear
//! systems over Z/p^a solved by elimination with valuation pivoting.
//!
//! Module map:
//! - [`coeffs`]: Z/m arithmetic, CRT, linear solving, canonical coset forms.
//! - [`magnus`]: words, truncated series, grouplike elements, exp/log,
//!   the Dynkin criterion, sections between nilpotency levels.
//! - [`unipotent`]: the matrix groups U_{n+1} and their central quotients,
//!   the distinguished matrices A and B, and the evaluation maps φ, φ′.
//! - [`action`]: finite groups, characters, twisted actions, cyclic builders.
//! - [`cohomology`]: inhomogeneous cochains with character weights, cup
//!   products, coboundary decisions, nonabelian 1-cocycles.
//! - [`massey`]: defining systems and Massey values.
//! - [`obstruction`]: lifting obstructions δ_k, the pushforward comparison,
//!   and the end-to-end verification pipeline.
//! - [`scenario`]: scenario files, cocycle recipes, random suite generation.

pub mod action;
pub mod cohomology;
pub mod coeffs;
pub mod magnus;
pub mod massey;
pub mod obstruction;
pub mod scenario;
pub mod unipotent;

use thiserror::Error;

/// Crate-wide error type.
///
/// Validation failures carry enough of a witness (which axiom, which
/// elements) for a caller to pinpoint the offending input; the fault-injection
/// suite relies on that.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("bad modulus {m}: {reason}")]
    BadModulus { m: u64, reason: String },

    #[error("{value} is not a unit mod {modulus}")]
    NotAUnit { value: u64, modulus: u64 },

    #[error("modulus {m} shares a factor with {n}!; truncation degree {n} needs gcd(m, n!) = 1")]
    NotCoprime { m: u64, n: u32 },

    #[error("mixed moduli: {left} vs {right}")]
    ModulusMismatch { left: u64, right: u64 },

    #[error("mixed truncation degrees: {left} vs {right}")]
    TruncationMismatch { left: usize, right: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("series is not grouplike: {0}")]
    NotGrouplike(String),

    #[error("series is not a Lie element: {0}")]
    NotLie(String),

    #[error("series has no logarithm: {0}")]
    NoLogarithm(String),

    #[error("matrix is not in the subgroup V: nonzero entry at ({i}, {j})")]
    NotInV { i: usize, j: usize },

    #[error("matrix is not upper unitriangular: entry at ({i}, {j})")]
    NotUnitriangular { i: usize, j: usize },

    #[error("bad group table: {0}")]
    BadGroup(String),

    #[error("bad character: {0}")]
    BadCharacter(String),

    #[error("action invalid ({axiom}): {witness}")]
    ActionInvalid { axiom: String, witness: String },

    #[error("map is not a cocycle at pair ({g}, {h})")]
    NotACocycle { g: usize, h: usize },

    #[error("defining system invalid at entry ({i}, {j}): {witness}")]
    DefiningSystemInvalid { i: usize, j: usize, witness: String },

    #[error("weight mismatch: expected {expected}, got {got}")]
    WeightMismatch { expected: u32, got: u32 },

    #[error("cocycle does not lift from level {level}: obstruction class is nonzero")]
    NotLiftable { level: usize },

    #[error("bad input: {0}")]
    BadInput(String),
}

impl Error {
    /// Usage-style errors (malformed input) versus mathematical failures.
    /// The CLI maps the former to exit code 2 and the latter to exit code 1.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::BadModulus { .. }
                | Error::NotCoprime { .. }
                | Error::ModulusMismatch { .. }
                | Error::TruncationMismatch { .. }
                | Error::DimensionMismatch(_)
                | Error::BadInput(_)
        )
    }
}
