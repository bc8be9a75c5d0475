//! Lattices over the discrete valuation ring `A0` of rational functions
//! regular at `q = 0`.
//!
//! A finitely generated `A0`-submodule of `Q(q)^d` that spans over `Q(q)` is
//! free of rank `d`; `dvr_lattice_basis` computes a basis by valuation-aware
//! elimination. The pivot is the entry of minimal valuation at `q = 0`, with
//! ties broken by lowest coordinate index and then by generator order, so the
//! output is deterministic.

use super::linalg::QMatrix;
use super::poly::Rat;
use super::scalar::ScalarQ;
use crate::{Error, Result};

/// An `A0`-lattice in `Q(q)^d`, stored as an ordered basis together with the
/// inverse of the basis matrix for coordinate computations.
#[derive(Debug, Clone)]
pub struct DvrLattice {
    dim: usize,
    basis: Vec<Vec<ScalarQ>>,
    inv: QMatrix,
}

impl DvrLattice {
    /// Lattice from a basis known to be `Q(q)`-independent and spanning.
    pub fn from_basis(basis: Vec<Vec<ScalarQ>>) -> Result<Self> {
        let dim = basis.len();
        if dim == 0 {
            return Ok(Self { dim, basis, inv: QMatrix::zeros(0, 0) });
        }
        if basis.iter().any(|v| v.len() != dim) {
            return Err(Error::Internal("lattice basis must be square".into()));
        }
        let mat = QMatrix::from_cols(basis.clone(), dim);
        let inv = mat
            .inverse()
            .map_err(|_| Error::SpanDeficient("proposed lattice basis is singular".into()))?;
        Ok(Self { dim, basis, inv })
    }

    /// Trivial lattice of an `0`-dimensional space.
    pub fn trivial() -> Self {
        Self { dim: 0, basis: Vec::new(), inv: QMatrix::zeros(0, 0) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &[Vec<ScalarQ>] {
        &self.basis
    }

    /// Coordinates of a vector with respect to the lattice basis.
    pub fn coords(&self, v: &[ScalarQ]) -> Vec<ScalarQ> {
        assert_eq!(v.len(), self.dim, "coordinate dimension mismatch");
        self.inv.apply(v)
    }

    /// Whether the vector lies in the lattice (all coordinates in `A0`).
    pub fn contains(&self, v: &[ScalarQ]) -> bool {
        self.coords(v).iter().all(ScalarQ::in_a0)
    }

    /// Whether the vector lies in `q^k` times the lattice.
    pub fn contains_scaled(&self, v: &[ScalarQ], k: i64) -> bool {
        self.coords(v).iter().all(|c| c.val0_at_least(k))
    }

    /// Residue of a lattice vector in `L/qL`, expressed in the residue
    /// classes of the basis vectors.
    pub fn residue(&self, v: &[ScalarQ]) -> Result<Vec<Rat>> {
        self.coords(v)
            .iter()
            .map(|c| c.eval0().map_err(|_| Error::NotInLattice(format!("coordinate {c} has a pole at q=0"))))
            .collect()
    }

    /// The change-of-basis matrix sending ambient coordinates to lattice
    /// coordinates.
    pub fn inv_matrix(&self) -> &QMatrix {
        &self.inv
    }

    /// Whether another lattice in the same ambient space equals this one as
    /// an `A0`-module (mutual containment of bases).
    pub fn same_module(&self, other: &DvrLattice) -> bool {
        self.dim == other.dim
            && other.basis.iter().all(|v| self.contains(v))
            && self.basis.iter().all(|v| other.contains(v))
    }
}

/// Compute an `A0`-basis of the lattice generated by `gens` inside `Q(q)^dim`.
///
/// Errors with `SpanDeficient` when the generators do not span `Q(q)^dim`.
pub fn dvr_lattice_basis(gens: &[Vec<ScalarQ>], dim: usize) -> Result<DvrLattice> {
    for g in gens {
        assert_eq!(g.len(), dim, "generator dimension mismatch");
    }
    if dim == 0 {
        return Ok(DvrLattice::trivial());
    }
    let mut work: Vec<Vec<ScalarQ>> = gens
        .iter()
        .filter(|g| g.iter().any(|c| !c.is_zero()))
        .cloned()
        .collect();
    let mut basis: Vec<Vec<ScalarQ>> = Vec::new();
    while !work.is_empty() && basis.len() < dim {
        // Pivot: minimal valuation at q=0, ties by lowest coordinate index,
        // then lowest generator position.
        let mut best: Option<(i64, usize, usize)> = None;
        for (gi, g) in work.iter().enumerate() {
            for (ci, entry) in g.iter().enumerate() {
                let Some(v) = entry.val0() else { continue };
                let cand = (v, ci, gi);
                if best.is_none_or(|b| cand < b) {
                    best = Some(cand);
                }
            }
        }
        let (_, pivot_col, pivot_idx) = best.expect("nonzero vector has a nonzero entry");
        let pivot = work.swap_remove(pivot_idx);
        let pivot_entry = pivot[pivot_col].clone();
        for g in &mut work {
            if g[pivot_col].is_zero() {
                continue;
            }
            // The multiplier lies in A0 because the pivot has minimal
            // valuation, so this is an allowed lattice operation.
            let mult = g[pivot_col].div(&pivot_entry);
            debug_assert!(mult.in_a0(), "pivot was not valuation-minimal");
            for (gc, pc) in g.iter_mut().zip(&pivot) {
                *gc = gc.sub(&mult.mul(pc));
            }
        }
        work.retain(|g| g.iter().any(|c| !c.is_zero()));
        basis.push(pivot);
    }
    if basis.len() < dim {
        return Err(Error::SpanDeficient(format!(
            "generators span a {}-dimensional subspace of a {}-dimensional space",
            basis.len(),
            dim
        )));
    }
    DvrLattice::from_basis(basis)
}
