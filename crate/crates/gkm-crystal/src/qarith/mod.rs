//! Exact arithmetic in the rational-function field `Q(q)` and linear algebra
//! over it, over the rationals, over the local ring `A0` (functions regular
//! at `q = 0`), and over the Laurent ring `A = Q[q, q^{-1}]`.

pub mod amod;
pub mod dvr;
pub mod linalg;
pub mod poly;
pub mod scalar;

pub use amod::in_a_span;
pub use dvr::{dvr_lattice_basis, DvrLattice};
pub use linalg::{rat_kernel, rat_rank, rat_rref, rat_solve, QMatrix};
pub use poly::{rat, rat_frac, LaurentPoly, Rat};
pub use scalar::{qbinom_base, qfact_base, qint_base, ScalarQ};
