//! Exact computation of crystal bases and global bases for quantum
//! generalized Kac-Moody (Borcherds) algebras.
//!
//! Everything is computed over the field of rational functions in `q` with
//! exact rational coefficients; no floating point enters any mathematical
//! statement. The main layers are:
//!
//! * [`qarith`] — Laurent polynomials, rational functions in `q`, exact
//!   linear algebra, and lattice reduction over the local ring
//!   `A0 = { f/g : g(0) != 0 }`.
//! * [`cartan`] — Borcherds-Cartan data (real and imaginary simple roots),
//!   weights, and pairings.
//! * [`freealg`] — the negative half `U_q^-` presented on free words modulo
//!   the radical of the Kashiwara form, with the primed derivations, the
//!   star involution, and string decompositions.
//! * [`vrep`] — irreducible highest-weight modules `V(λ)` with the
//!   contravariant form and Kashiwara operators.
//! * [`crystal`] — crystal graphs, the tensor-product rule (combinatorial
//!   and algebraic), isomorphism checking, and serialization.
//! * [`global`] — bar-invariant global (canonical) bases solved exactly from
//!   the balanced-triple characterization.
//! * [`harness`] — executable verification of the structural theorems
//!   (the inductive statements A–O, congruence lemmas, orthogonality).

pub mod cartan;
pub mod crystal;
pub mod freealg;
pub mod global;
pub mod harness;
pub mod modrep;
pub mod qarith;
pub mod vrep;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A rational function has a pole at `q = 0` where regularity is needed.
    #[error("not regular at q=0: {0}")]
    NotRegularAtZero(String),
    /// A vector is not in the given `A0`-lattice.
    #[error("vector is not in the lattice: {0}")]
    NotInLattice(String),
    /// Spanning vectors fail to span the ambient space over `Q(q)`.
    #[error("spanning vectors do not span the space: {0}")]
    SpanDeficient(String),
    /// A Borcherds-Cartan datum failed validation.
    #[error("invalid Cartan datum: {0:?}")]
    InvalidDatum(Vec<cartan::Violation>),
    /// A highest weight is not dominant.
    #[error("weight is not dominant: {0}")]
    NotDominant(String),
    /// A string decomposition failed to reconstruct its input.
    #[error("string decomposition failed to reconstruct the input: {0}")]
    ReconstructionFailed(String),
    /// Bar involution applied to a vector with non-Laurent coefficients.
    #[error("bar involution needs Laurent-polynomial coefficients: {0}")]
    BarDomain(String),
    /// The global-basis solver exhausted its degree budget.
    #[error("global-basis degree budget exceeded: {0}")]
    DegreeBudgetExceeded(String),
    /// The global-basis solver found two distinct solutions (theory violation).
    #[error("global-basis solution is not unique: {0}")]
    NonUniqueSolution(String),
    /// A tensor-rule consultation needed factor data beyond computed depth.
    #[error("computed depth is insufficient: {0}")]
    DepthInsufficient(String),
    /// A map failed to vanish on the radical it must factor through.
    #[error("map is not well defined on the quotient: {0}")]
    WellDefinednessViolation(String),
    /// A structural invariant guaranteed by the theory failed (bug guard).
    #[error("internal invariant violated: {0}")]
    Internal(String),
    /// Malformed configuration or input file.
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
