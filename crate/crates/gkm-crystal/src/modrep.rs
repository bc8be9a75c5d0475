//! Shared machinery for integrable modules: a weight-graded module trait,
//! generic i-string decompositions and Kashiwara operators from the `e_i`
//! kernels, and the crystal pipeline (breadth-first lattice generation,
//! residue extraction, and the graph combinatorics), parameterized over any
//! module that exposes Kashiwara operators as exact matrices.
//!
//! Levels are indexed by the root-lattice offset `α`: level `α` of a module
//! with highest weight `λ` is the weight space of weight `λ − α` (with
//! `λ = 0` for the negative half).

use crate::cartan::{BorcherdsCartanDatum, RootVec};
use crate::crystal::{CrystalEdge, CrystalGraph, CrystalMeta, CrystalNode, ExtInt, CRYSTAL_SCHEMA};
use crate::freealg::UmAlgebra;
use crate::qarith::{dvr_lattice_basis, DvrLattice, QMatrix, Rat, ScalarQ};
use crate::{Error, Result};
use num_traits::Zero;
use std::collections::BTreeMap;

/// A module graded by `Q+` levels with exact `f_i` / `e_i` matrices.
pub trait HwModule {
    fn datum(&self) -> &BorcherdsCartanDatum;
    fn depth(&self) -> i64;
    /// Dimension of level `α`; errors past the computed depth.
    fn dim(&self, alpha: &RootVec) -> Result<usize>;
    /// `⟨h_i, weight of level α⟩`.
    fn pairing(&self, i: usize, alpha: &RootVec) -> i64;
    /// `f_i :` level `α` → level `α + α_i`.
    fn f_mat(&self, i: usize, alpha: &RootVec) -> Result<QMatrix>;
    /// `e_i :` level `α` → level `α − α_i`; a `0 × dim` matrix when the
    /// target weight lies outside the module.
    fn e_mat(&self, i: usize, alpha: &RootVec) -> Result<QMatrix>;
}

/// Left multiplication by `f_i^{(n)}` out of level `α`, with the
/// divided-power normalization for real indices.
pub fn f_div_mat<M: HwModule + ?Sized>(
    m: &M,
    i: usize,
    n: i64,
    alpha: &RootVec,
) -> Result<QMatrix> {
    assert!(n >= 0);
    let mut acc = QMatrix::identity(m.dim(alpha)?);
    let mut at = alpha.clone();
    for _ in 0..n {
        acc = m.f_mat(i, &at)?.mul(&acc);
        at = at.plus(i);
    }
    if m.datum().is_real(i) {
        acc = acc.scale(&m.datum().qfact(n, i).inv());
    }
    Ok(acc)
}

/// A basis of `ker e_i` at level `α`.
pub fn e_kernel<M: HwModule + ?Sized>(
    m: &M,
    i: usize,
    alpha: &RootVec,
) -> Result<Vec<Vec<ScalarQ>>> {
    Ok(m.e_mat(i, alpha)?.kernel_basis())
}

/// The i-string decomposition of a coordinate vector `u` at level `α`: the
/// unique list of `(n, u_n)` with `u = Σ f_i^{(n)} u_n`, `e_i u_n = 0`, and
/// the vanishing conventions (real `i`: the component at `n` may be nonzero
/// only when `⟨h_i, wt⟩ ≥ n` at its level; imaginary `i`: only when `n = 0`
/// or the pairing is positive).
pub fn istring<M: HwModule + ?Sized>(
    m: &M,
    i: usize,
    alpha: &RootVec,
    u: &[ScalarQ],
) -> Result<Vec<(i64, Vec<ScalarQ>)>> {
    let dim = m.dim(alpha)?;
    assert_eq!(u.len(), dim);
    if u.iter().all(ScalarQ::is_zero) {
        return Ok(Vec::new());
    }
    let real = m.datum().is_real(i);
    let mut cols: Vec<Vec<ScalarQ>> = Vec::new();
    let mut groups: Vec<(i64, Vec<Vec<ScalarQ>>)> = Vec::new();
    for n in 0..=alpha.0[i] {
        let down = alpha.minus_n(i, n).expect("bounded by multiplicity");
        if m.dim(&down)? == 0 {
            continue;
        }
        let pair = m.pairing(i, &down);
        let admissible = if real { pair >= n } else { n == 0 || pair > 0 };
        if !admissible {
            continue;
        }
        let kernel = e_kernel(m, i, &down)?;
        if kernel.is_empty() {
            continue;
        }
        let lift = f_div_mat(m, i, n, &down)?;
        for k in &kernel {
            cols.push(lift.apply(k));
        }
        groups.push((n, kernel));
    }
    let block = QMatrix::from_cols(cols, dim);
    if block.rank() < block.cols() {
        return Err(Error::Internal(format!(
            "string summands at level {alpha} are linearly dependent"
        )));
    }
    let x = block.solve(u).ok_or_else(|| {
        Error::ReconstructionFailed(format!(
            "vector at level {alpha} is not a sum of admissible string components"
        ))
    })?;
    let mut out = Vec::new();
    let mut offset = 0;
    for (n, kernel) in groups {
        let kdim = kernel[0].len();
        let mut un = vec![ScalarQ::zero(); kdim];
        for k in &kernel {
            let c = &x[offset];
            offset += 1;
            if !c.is_zero() {
                for (acc, e) in un.iter_mut().zip(k) {
                    *acc = acc.add(&e.mul(c));
                }
            }
        }
        if !un.iter().all(ScalarQ::is_zero) {
            out.push((n, un));
        }
    }
    Ok(out)
}

/// `f̃_i u` at level `α`, landing at level `α + α_i`.
pub fn tilde_f_vec<M: HwModule + ?Sized>(
    m: &M,
    i: usize,
    alpha: &RootVec,
    u: &[ScalarQ],
) -> Result<Vec<ScalarQ>> {
    let up = alpha.plus(i);
    let tdim = m.dim(&up)?;
    let mut out = vec![ScalarQ::zero(); tdim];
    for (n, un) in istring(m, i, alpha, u)? {
        let down = alpha.minus_n(i, n).expect("bounded");
        let lifted = f_div_mat(m, i, n + 1, &down)?.apply(&un);
        for (acc, x) in out.iter_mut().zip(&lifted) {
            *acc = acc.add(x);
        }
    }
    Ok(out)
}

/// `ẽ_i u` at level `α`, landing at level `α − α_i` (empty when that level
/// does not exist).
pub fn tilde_e_vec<M: HwModule + ?Sized>(
    m: &M,
    i: usize,
    alpha: &RootVec,
    u: &[ScalarQ],
) -> Result<Vec<ScalarQ>> {
    let Some(up_target) = alpha.minus(i) else {
        return Ok(Vec::new());
    };
    let tdim = m.dim(&up_target)?;
    let mut out = vec![ScalarQ::zero(); tdim];
    for (n, un) in istring(m, i, alpha, u)? {
        if n == 0 {
            continue;
        }
        let down = alpha.minus_n(i, n).expect("bounded");
        let lifted = f_div_mat(m, i, n - 1, &down)?.apply(&un);
        for (acc, x) in out.iter_mut().zip(&lifted) {
            *acc = acc.add(x);
        }
    }
    Ok(out)
}

/// `dim (f_i^n M)` at level `α`: the rank of the span of the subspaces
/// `f_i^{(m)}(ker e_i)` for `m ≥ n` (components where the divided power acts
/// as zero drop out on their own).
pub fn f_power_dim<M: HwModule + ?Sized>(
    m: &M,
    i: usize,
    n: i64,
    alpha: &RootVec,
) -> Result<usize> {
    let dim = m.dim(alpha)?;
    let mut cols = Vec::new();
    for step in n..=alpha.0[i] {
        let down = alpha.minus_n(i, step).expect("bounded by multiplicity");
        if m.dim(&down)? == 0 {
            continue;
        }
        let lift = f_div_mat(m, i, step, &down)?;
        for k in e_kernel(m, i, &down)? {
            cols.push(lift.apply(&k));
        }
    }
    Ok(QMatrix::from_cols(cols, dim).rank())
}

/// Matrix of `f̃_i` on level `α` (columns = images of the basis vectors).
pub fn tilde_f_mat<M: HwModule + ?Sized>(m: &M, i: usize, alpha: &RootVec) -> Result<QMatrix> {
    let dim = m.dim(alpha)?;
    let tdim = m.dim(&alpha.plus(i))?;
    let mut cols = Vec::with_capacity(dim);
    for k in 0..dim {
        let mut u = vec![ScalarQ::zero(); dim];
        u[k] = ScalarQ::one();
        cols.push(tilde_f_vec(m, i, alpha, &u)?);
    }
    Ok(QMatrix::from_cols(cols, tdim))
}

/// Matrix of `ẽ_i` on level `α` (a `0 × dim` matrix when `α − α_i` does not
/// exist).
pub fn tilde_e_mat<M: HwModule + ?Sized>(m: &M, i: usize, alpha: &RootVec) -> Result<QMatrix> {
    let dim = m.dim(alpha)?;
    let tdim = match alpha.minus(i) {
        Some(t) => m.dim(&t)?,
        None => 0,
    };
    let mut cols = Vec::with_capacity(dim);
    for k in 0..dim {
        let mut u = vec![ScalarQ::zero(); dim];
        u[k] = ScalarQ::one();
        let v = tilde_e_vec(m, i, alpha, &u)?;
        cols.push(if v.is_empty() { vec![ScalarQ::zero(); tdim] } else { v });
    }
    Ok(QMatrix::from_cols(cols, tdim))
}

/// What a crystal is computed for, carried into graph metadata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModuleLabel {
    /// `V(λ)` with the pairings `λ(h_i)`.
    HighestWeight(Vec<i64>),
    /// The negative half (crystal `B(∞)`).
    NegativeHalf,
    /// `V(λ) ⊗ V(μ)`.
    Tensor(Vec<i64>, Vec<i64>),
}

impl ModuleLabel {
    /// The highest-weight pairing vector (zero for the negative half).
    pub fn lam(&self, n: usize) -> Vec<i64> {
        match self {
            ModuleLabel::HighestWeight(l) => l.clone(),
            ModuleLabel::NegativeHalf => vec![0; n],
            ModuleLabel::Tensor(l, m) => l.iter().zip(m).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ModuleLabel::HighestWeight(l) => format!("V({l:?})"),
            ModuleLabel::NegativeHalf => "B(inf)".to_string(),
            ModuleLabel::Tensor(l, m) => format!("V({l:?})(x)V({m:?})"),
        }
    }
}

/// Everything a module must expose for the crystal pipeline.
pub trait CrystalModule {
    fn datum(&self) -> &BorcherdsCartanDatum;
    fn depth(&self) -> i64;
    fn label(&self) -> ModuleLabel;
    fn dim(&self, alpha: &RootVec) -> Result<usize>;
    /// `⟨h_i, weight of level α⟩`.
    fn pairing(&self, i: usize, alpha: &RootVec) -> i64;
    fn tilde_f(&self, i: usize, alpha: &RootVec) -> Result<QMatrix>;
    fn tilde_e(&self, i: usize, alpha: &RootVec) -> Result<QMatrix>;
}

impl CrystalModule for UmAlgebra {
    fn datum(&self) -> &BorcherdsCartanDatum {
        UmAlgebra::datum(self)
    }

    fn depth(&self) -> i64 {
        UmAlgebra::depth(self)
    }

    fn label(&self) -> ModuleLabel {
        ModuleLabel::NegativeHalf
    }

    fn dim(&self, alpha: &RootVec) -> Result<usize> {
        UmAlgebra::dim(self, alpha)
    }

    fn pairing(&self, i: usize, alpha: &RootVec) -> i64 {
        // wt = −α.
        let zero = vec![0; UmAlgebra::datum(self).n()];
        UmAlgebra::datum(self).pairing(i, &zero, alpha)
    }

    fn tilde_f(&self, i: usize, alpha: &RootVec) -> Result<QMatrix> {
        self.tilde_f_mat(i, alpha)
    }

    fn tilde_e(&self, i: usize, alpha: &RootVec) -> Result<QMatrix> {
        self.tilde_e_mat(i, alpha)
    }
}

/// Crystal lattices, node residues, and the crystal graph for one module.
pub struct CrystalData {
    pub label: ModuleLabel,
    pub depth: i64,
    /// Per level: the `A0`-lattice generated by the Kashiwara-operator orbit
    /// of the seed vector (levels with zero dimension are absent).
    pub lattices: BTreeMap<RootVec, DvrLattice>,
    /// Per level: the residue vectors of the crystal elements in lattice
    /// coordinates, sorted, deduplicated.
    pub nodes: BTreeMap<RootVec, Vec<Vec<Rat>>>,
    pub graph: CrystalGraph,
}

impl CrystalData {
    /// Number of crystal elements at a level.
    pub fn node_count(&self, alpha: &RootVec) -> usize {
        self.nodes.get(alpha).map_or(0, Vec::len)
    }

    /// Global graph id of a node given its level and position.
    pub fn node_id(&self, alpha: &RootVec, index: usize) -> Option<usize> {
        self.graph
            .nodes
            .iter()
            .position(|n| n.alpha == alpha.0 && n.index == index)
    }
}

/// The residue (mod `q`) of the map `tilde : level α → level β` in lattice
/// coordinates: `eval0( L_β^{-1} · M · L_α )`. Errors when the map does not
/// stabilize the lattices.
pub fn residue_map(
    mat: &QMatrix,
    src: &DvrLattice,
    dst: &DvrLattice,
) -> Result<Vec<Vec<Rat>>> {
    let src_basis = QMatrix::from_cols(src.basis().to_vec(), mat.cols());
    let coords = dst.inv_matrix().mul(&mat.mul(&src_basis));
    coords.eval0().map_err(|_| {
        Error::NotInLattice("Kashiwara operator does not preserve the crystal lattice".into())
    })
}

fn rat_vec_is_zero(v: &[Rat]) -> bool {
    v.iter().all(Rat::is_zero)
}

fn apply_rat(m: &[Vec<Rat>], v: &[Rat]) -> Vec<Rat> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).fold(Rat::zero(), |s, t| s + t))
        .collect()
}

/// Generate lattices and crystal-element residues by the breadth-first
/// `f̃`-closure of the seed vector at level zero.
pub fn generate_lattice_and_nodes<M: CrystalModule + ?Sized>(
    module: &M,
) -> Result<(BTreeMap<RootVec, DvrLattice>, BTreeMap<RootVec, Vec<Vec<Rat>>>)> {
    let n = module.datum().n();
    let depth = module.depth();
    let zero = RootVec::zero(n);
    if module.dim(&zero)? != 1 {
        return Err(Error::Internal(
            "crystal generation expects a one-dimensional top level".into(),
        ));
    }

    let mut lattices: BTreeMap<RootVec, DvrLattice> = BTreeMap::new();
    lattices.insert(zero.clone(), DvrLattice::from_basis(vec![vec![ScalarQ::one()]])?);
    let mut nodes: BTreeMap<RootVec, Vec<Vec<Rat>>> = BTreeMap::new();
    nodes.insert(zero.clone(), vec![vec![Rat::from_integer(1.into())]]);

    let mut frontier = vec![zero];
    for _ in 0..depth {
        // Collect lattice generators one level down.
        let mut gens: BTreeMap<RootVec, Vec<Vec<ScalarQ>>> = BTreeMap::new();
        for alpha in &frontier {
            for i in 0..n {
                let up = alpha.plus(i);
                if module.dim(&up)? == 0 {
                    continue;
                }
                let f = module.tilde_f(i, alpha)?;
                for b in lattices[alpha].basis() {
                    let v = f.apply(b);
                    if !v.iter().all(ScalarQ::is_zero) {
                        gens.entry(up.clone()).or_default().push(v);
                    }
                }
            }
        }
        let mut next = Vec::new();
        for (alpha, g) in gens {
            let dim = module.dim(&alpha)?;
            let lattice = dvr_lattice_basis(&g, dim)?;
            lattices.insert(alpha.clone(), lattice);
            next.push(alpha);
        }
        if next.is_empty() {
            break;
        }
        // Push node residues along the residue-level maps.
        for alpha in &next {
            let mut found: Vec<Vec<Rat>> = Vec::new();
            for i in 0..n {
                let Some(down) = alpha.minus(i) else { continue };
                let (Some(src_lat), Some(src_nodes)) =
                    (lattices.get(&down), nodes.get(&down))
                else {
                    continue;
                };
                let f = module.tilde_f(i, &down)?;
                let fbar = residue_map(&f, src_lat, &lattices[alpha])?;
                for r in src_nodes {
                    let image = apply_rat(&fbar, r);
                    if !rat_vec_is_zero(&image) && !found.contains(&image) {
                        found.push(image);
                    }
                }
            }
            found.sort();
            if found.is_empty() {
                return Err(Error::Internal(format!(
                    "no crystal elements generated at level {alpha} despite a nonzero lattice"
                )));
            }
            nodes.insert(alpha.clone(), found);
        }
        frontier = next;
    }
    Ok((lattices, nodes))
}

/// Assemble the crystal graph (edges, ε, φ) from lattices and node residues.
pub fn crystal_combinatorics<M: CrystalModule + ?Sized>(
    module: &M,
    lattices: &BTreeMap<RootVec, DvrLattice>,
    nodes: &BTreeMap<RootVec, Vec<Vec<Rat>>>,
) -> Result<CrystalGraph> {
    let d = module.datum();
    let n = d.n();
    let lam = module.label().lam(n);

    // Global ids in (level, index) order.
    let mut ids: BTreeMap<(RootVec, usize), usize> = BTreeMap::new();
    for (alpha, rs) in nodes {
        for k in 0..rs.len() {
            let id = ids.len();
            ids.insert((alpha.clone(), k), id);
        }
    }

    // Residue maps for both operators wherever both levels are present.
    let mut fbar: BTreeMap<(usize, RootVec), Vec<Vec<Rat>>> = BTreeMap::new();
    let mut ebar: BTreeMap<(usize, RootVec), Vec<Vec<Rat>>> = BTreeMap::new();
    for alpha in nodes.keys() {
        for i in 0..n {
            let up = alpha.plus(i);
            if lattices.contains_key(&up) {
                let m = module.tilde_f(i, alpha)?;
                fbar.insert(
                    (i, alpha.clone()),
                    residue_map(&m, &lattices[alpha], &lattices[&up])?,
                );
            }
            if let Some(down) = alpha.minus(i) {
                if lattices.contains_key(&down) {
                    let m = module.tilde_e(i, alpha)?;
                    ebar.insert(
                        (i, alpha.clone()),
                        residue_map(&m, &lattices[alpha], &lattices[&down])?,
                    );
                }
            }
        }
    }

    let locate = |alpha: &RootVec, r: &[Rat]| -> Option<usize> {
        nodes.get(alpha)?.iter().position(|x| x == r)
    };

    let mut edges = Vec::new();
    let mut graph_nodes = Vec::new();
    for (alpha, rs) in nodes {
        for (k, r) in rs.iter().enumerate() {
            let id = ids[&(alpha.clone(), k)];
            // Outgoing f̃ edges.
            for i in 0..n {
                let Some(map) = fbar.get(&(i, alpha.clone())) else { continue };
                let image = apply_rat(map, r);
                if rat_vec_is_zero(&image) {
                    continue;
                }
                let up = alpha.plus(i);
                let j = locate(&up, &image).ok_or_else(|| {
                    Error::Internal(format!(
                        "f̃_{i} of a crystal element at level {alpha} is not a crystal element"
                    ))
                })?;
                edges.push(CrystalEdge { src: id, dst: ids[&(up, j)], i });
            }
            // ε by iterating the residue-level raising operator.
            let mut eps = Vec::with_capacity(n);
            for i in 0..n {
                let mut count = 0i64;
                let mut at = alpha.clone();
                let mut cur = r.clone();
                loop {
                    let Some(map) = ebar.get(&(i, at.clone())) else { break };
                    let image = apply_rat(map, &cur);
                    if rat_vec_is_zero(&image) {
                        break;
                    }
                    let down = at.minus(i).expect("ebar exists only with a lower level");
                    if locate(&down, &image).is_none() {
                        return Err(Error::Internal(format!(
                            "ẽ_{i} of a crystal element at level {at} is not a crystal element"
                        )));
                    }
                    count += 1;
                    cur = image;
                    at = down;
                }
                eps.push(count);
            }
            // φ by the convention split.
            let mut phi = Vec::with_capacity(n);
            for i in 0..n {
                let pair = module.pairing(i, alpha);
                if d.is_real(i) {
                    phi.push(ExtInt::Fin(eps[i] + pair));
                } else if pair > 0 {
                    phi.push(ExtInt::Inf);
                } else if pair == 0 {
                    phi.push(ExtInt::Fin(0));
                } else {
                    return Err(Error::Internal(format!(
                        "negative imaginary pairing at level {alpha}"
                    )));
                }
            }
            let wt: Vec<i64> = (0..n).map(|i| module.pairing(i, alpha)).collect();
            graph_nodes.push(CrystalNode {
                id,
                alpha: alpha.0.clone(),
                index: k,
                lam: lam.clone(),
                wt,
                eps,
                phi,
                residue: r.iter().map(|x| x.to_string()).collect(),
                pair: None,
            });
        }
    }
    edges.sort_by_key(|e| (e.src, e.i, e.dst));
    Ok(CrystalGraph {
        schema: CRYSTAL_SCHEMA.to_string(),
        meta: CrystalMeta {
            module: module.label().describe(),
            datum: d.content_hash(),
            lam,
            mu: match module.label() {
                ModuleLabel::Tensor(_, m) => Some(m),
                _ => None,
            },
            depth: module.depth(),
            labels: d.labels().to_vec(),
        },
        nodes: graph_nodes,
        edges,
    })
}

/// Full crystal pipeline: breadth-first lattice generation, residues, graph.
pub fn build_crystal<M: CrystalModule + ?Sized>(module: &M) -> Result<CrystalData> {
    let (lattices, nodes) = generate_lattice_and_nodes(module)?;
    let graph = crystal_combinatorics(module, &lattices, &nodes)?;
    Ok(CrystalData { label: module.label(), depth: module.depth(), lattices, nodes, graph })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::builtin;

    #[test]
    fn binf_rank_one_real_is_a_chain() {
        let um = UmAlgebra::new(builtin("sl2").unwrap(), 3).unwrap();
        let data = build_crystal(&um).unwrap();
        assert_eq!(data.graph.nodes.len(), 4);
        assert_eq!(data.graph.edges.len(), 3);
        for node in &data.graph.nodes {
            let l = node.alpha[0];
            assert_eq!(node.eps, vec![l]);
            assert_eq!(node.phi, vec![ExtInt::Fin(-l)]);
        }
    }

    #[test]
    fn binf_rank_one_imaginary_is_a_chain() {
        let um = UmAlgebra::new(builtin("imag2").unwrap(), 3).unwrap();
        let data = build_crystal(&um).unwrap();
        assert_eq!(data.graph.nodes.len(), 4);
        assert_eq!(data.graph.edges.len(), 3);
        for node in &data.graph.nodes {
            let l = node.alpha[0];
            assert_eq!(node.eps, vec![l], "ε at word length {l}");
            // ⟨h, −lα⟩ = 2l > 0 for l ≥ 1.
            let expect = if l == 0 { ExtInt::Fin(0) } else { ExtInt::Inf };
            assert_eq!(node.phi, vec![expect]);
        }
    }

    #[test]
    fn binf_node_counts_match_dimensions() {
        let um = UmAlgebra::new(builtin("gkm2").unwrap(), 3).unwrap();
        let data = build_crystal(&um).unwrap();
        for alpha in um.datum().alphas_to_depth(3) {
            let dim = UmAlgebra::dim(&um, &alpha).unwrap();
            assert_eq!(
                data.node_count(&alpha),
                dim,
                "node count vs dimension at {alpha}"
            );
        }
    }
}
