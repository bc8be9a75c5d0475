//! Crystal graphs as data: serialization (JSON and DOT), validation,
//! label-preserving isomorphism with witness, and the tensor-product rule in
//! both its combinatorial form (on graphs) and its algebraic form (on the
//! tensor module, via the comultiplication).

use crate::cartan::{BorcherdsCartanDatum, RootVec};
use crate::modrep::{
    self, crystal_combinatorics, CrystalData, CrystalModule, HwModule, ModuleLabel,
};
use crate::qarith::{DvrLattice, QMatrix, Rat, ScalarQ};
use crate::vrep::VModule;
use crate::{Error, Result};
use num_traits::Zero;
use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fmt;

/// `Z ∪ {∞}`, as needed for `φ_i` at imaginary indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtInt {
    Fin(i64),
    Inf,
}

impl ExtInt {
    pub fn gt_int(&self, k: i64) -> bool {
        match self {
            ExtInt::Inf => true,
            ExtInt::Fin(n) => *n > k,
        }
    }

    pub fn ge_int(&self, k: i64) -> bool {
        match self {
            ExtInt::Inf => true,
            ExtInt::Fin(n) => *n >= k,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExtInt::Fin(0))
    }
}

impl fmt::Display for ExtInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtInt::Fin(n) => write!(f, "{n}"),
            ExtInt::Inf => write!(f, "inf"),
        }
    }
}

impl Serialize for ExtInt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtInt::Fin(n) => s.serialize_i64(*n),
            ExtInt::Inf => s.serialize_str("inf"),
        }
    }
}

struct ExtIntVisitor;

impl Visitor<'_> for ExtIntVisitor {
    type Value = ExtInt;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "an integer or the string \"inf\"")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<ExtInt, E> {
        Ok(ExtInt::Fin(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<ExtInt, E> {
        Ok(ExtInt::Fin(v as i64))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<ExtInt, E> {
        if v == "inf" {
            Ok(ExtInt::Inf)
        } else {
            Err(E::custom(format!("unexpected string {v:?} for an extended integer")))
        }
    }
}

impl<'de> Deserialize<'de> for ExtInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<ExtInt, D::Error> {
        d.deserialize_any(ExtIntVisitor)
    }
}

/// One crystal element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrystalNode {
    pub id: usize,
    /// Root-lattice offset from the highest weight.
    pub alpha: Vec<i64>,
    /// Position within the weight level (levels are residue-sorted).
    pub index: usize,
    /// Highest-weight pairings `λ(h_i)` (zero vector for `B(∞)`).
    pub lam: Vec<i64>,
    /// `⟨h_i, λ − α⟩` per index.
    pub wt: Vec<i64>,
    pub eps: Vec<i64>,
    pub phi: Vec<ExtInt>,
    /// Residue vector in crystal-lattice coordinates (rendered exactly);
    /// empty for purely combinatorial graphs.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub residue: Vec<String>,
    /// Factor node ids for tensor-product nodes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<(usize, usize)>,
}

/// One `f̃_i` arrow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrystalEdge {
    pub src: usize,
    pub dst: usize,
    pub i: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrystalMeta {
    /// Human-readable module tag, e.g. `V([1, 0])` or `B(inf)`.
    pub module: String,
    /// Content hash of the Borcherds-Cartan datum.
    pub datum: String,
    pub lam: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<i64>>,
    pub depth: i64,
    pub labels: Vec<String>,
}

/// A depth-truncated crystal graph. Nodes are listed level by level
/// (root-lattice offsets ordered by height, then lexicographically) and
/// edges are sorted by `(src, i, dst)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrystalGraph {
    pub schema: String,
    pub meta: CrystalMeta,
    pub nodes: Vec<CrystalNode>,
    pub edges: Vec<CrystalEdge>,
}

pub const CRYSTAL_SCHEMA: &str = "crystal/1";

impl CrystalGraph {
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("graph serialization");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: CrystalGraph =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("bad crystal JSON: {e}")))?;
        if g.schema != CRYSTAL_SCHEMA {
            return Err(Error::Config(format!(
                "unsupported crystal schema {:?} (expected {CRYSTAL_SCHEMA:?})",
                g.schema
            )));
        }
        Ok(g)
    }

    /// Deterministic Graphviz rendering: nodes labeled by `α`, ε, φ; edges
    /// labeled by the index label.
    pub fn to_dot(&self) -> String {
        let mut s = String::new();
        s.push_str("digraph crystal {\n");
        s.push_str("  rankdir=TB;\n");
        s.push_str(&format!("  label=\"{} depth {}\";\n", self.meta.module, self.meta.depth));
        for node in &self.nodes {
            let eps: Vec<String> = node.eps.iter().map(i64::to_string).collect();
            let phi: Vec<String> = node.phi.iter().map(ExtInt::to_string).collect();
            let alpha: Vec<String> = node.alpha.iter().map(i64::to_string).collect();
            s.push_str(&format!(
                "  n{} [label=\"a=[{}] #{}\\ne=[{}] p=[{}]\"];\n",
                node.id,
                alpha.join(","),
                node.index,
                eps.join(","),
                phi.join(",")
            ));
        }
        for e in &self.edges {
            let label = self
                .meta
                .labels
                .get(e.i)
                .cloned()
                .unwrap_or_else(|| e.i.to_string());
            s.push_str(&format!("  n{} -> n{} [label=\"{}\"];\n", e.src, e.dst, label));
        }
        s.push_str("}\n");
        s
    }

    /// Nodes with `ẽ_i = 0` for every `i` (no incoming edges and ε ≡ 0).
    pub fn highest_weight_nodes(&self) -> Vec<usize> {
        self.nodes
            .iter()
            .filter(|n| n.eps.iter().all(|&e| e == 0))
            .map(|n| n.id)
            .collect()
    }

    fn out_map(&self) -> HashMap<(usize, usize), usize> {
        self.edges.iter().map(|e| ((e.src, e.i), e.dst)).collect()
    }

    fn in_map(&self) -> HashMap<(usize, usize), usize> {
        self.edges.iter().map(|e| ((e.dst, e.i), e.src)).collect()
    }

    fn node_by_id(&self, id: usize) -> &CrystalNode {
        &self.nodes[id]
    }
}

/// Structural sanity of a graph: ids consecutive, at most one in/out edge
/// per `(node, i)`, and every edge shifts `α` by exactly one `α_i`.
pub fn validate_graph(g: &CrystalGraph) -> Result<()> {
    for (k, node) in g.nodes.iter().enumerate() {
        if node.id != k {
            return Err(Error::Internal(format!("node id {} at position {k}", node.id)));
        }
    }
    let mut seen_out = HashMap::new();
    let mut seen_in = HashMap::new();
    for e in &g.edges {
        if e.src >= g.nodes.len() || e.dst >= g.nodes.len() {
            return Err(Error::Internal(format!("edge {e:?} out of range")));
        }
        if seen_out.insert((e.src, e.i), e.dst).is_some() {
            return Err(Error::Internal(format!("two outgoing {}-edges at node {}", e.i, e.src)));
        }
        if seen_in.insert((e.dst, e.i), e.src).is_some() {
            return Err(Error::Internal(format!("two incoming {}-edges at node {}", e.i, e.dst)));
        }
        let src = &g.nodes[e.src];
        let dst = &g.nodes[e.dst];
        for j in 0..src.alpha.len() {
            let want = src.alpha[j] + i64::from(j == e.i);
            if dst.alpha[j] != want {
                return Err(Error::Internal(format!(
                    "edge {e:?} does not shift alpha by one step of index {}",
                    e.i
                )));
            }
        }
    }
    // ε_i > 0 exactly when an incoming i-edge exists, except at the
    // truncation boundary there is nothing to check for f̃ (edges only).
    for node in &g.nodes {
        for i in 0..node.eps.len() {
            let has_in = seen_in.contains_key(&(node.id, i));
            if has_in && node.eps[i] == 0 {
                return Err(Error::Internal(format!(
                    "node {} has an incoming {}-edge but eps = 0",
                    node.id, i
                )));
            }
        }
    }
    Ok(())
}

/// Outcome of an isomorphism test: either a node bijection or a reason.
#[derive(Debug, Clone)]
pub struct IsoOutcome {
    pub witness: Option<Vec<(usize, usize)>>,
    pub discrepancy: Option<String>,
}

impl IsoOutcome {
    pub fn isomorphic(&self) -> bool {
        self.witness.is_some()
    }

    fn no(reason: String) -> Self {
        IsoOutcome { witness: None, discrepancy: Some(reason) }
    }
}

fn node_signature(n: &CrystalNode) -> String {
    let phi: Vec<String> = n.phi.iter().map(ExtInt::to_string).collect();
    format!("a={:?} wt={:?} e={:?} p={:?}", n.alpha, n.wt, n.eps, phi)
}

/// Label-preserving isomorphism (matching `α`, weights, ε, φ, and `i`-edges),
/// anchored at the highest-weight nodes and propagated along `f̃`-edges.
pub fn graph_isomorphic(a: &CrystalGraph, b: &CrystalGraph) -> IsoOutcome {
    if a.nodes.len() != b.nodes.len() {
        return IsoOutcome::no(format!(
            "node counts differ: {} vs {}",
            a.nodes.len(),
            b.nodes.len()
        ));
    }
    if a.edges.len() != b.edges.len() {
        return IsoOutcome::no(format!(
            "edge counts differ: {} vs {}",
            a.edges.len(),
            b.edges.len()
        ));
    }
    let mut sig_a: Vec<String> = a.nodes.iter().map(node_signature).collect();
    let mut sig_b: Vec<String> = b.nodes.iter().map(node_signature).collect();
    sig_a.sort();
    sig_b.sort();
    if sig_a != sig_b {
        let diff = sig_a
            .iter()
            .zip(&sig_b)
            .find(|(x, y)| x != y)
            .map(|(x, y)| format!("{x} vs {y}"))
            .unwrap_or_default();
        return IsoOutcome::no(format!("node label multisets differ: {diff}"));
    }

    let in_a = a.in_map();
    let in_b = b.in_map();
    // Candidates per node of `a`, by identical signature.
    let sigs_b: Vec<String> = b.nodes.iter().map(node_signature).collect();
    let candidates: Vec<Vec<usize>> = a
        .nodes
        .iter()
        .map(|u| {
            let s = node_signature(u);
            (0..b.nodes.len()).filter(|&v| sigs_b[v] == s).collect()
        })
        .collect();

    // Nodes of `a` are level-ordered, so every in-edge source of node k has
    // id < k and is already assigned during the search.
    let n_idx = a.nodes.first().map_or(0, |n| n.alpha.len());
    let mut assign: Vec<Option<usize>> = vec![None; a.nodes.len()];
    let mut used = vec![false; b.nodes.len()];

    fn search(
        k: usize,
        a: &CrystalGraph,
        n_idx: usize,
        candidates: &[Vec<usize>],
        in_a: &HashMap<(usize, usize), usize>,
        in_b: &HashMap<(usize, usize), usize>,
        assign: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
    ) -> bool {
        if k == a.nodes.len() {
            return true;
        }
        'cand: for &v in &candidates[k] {
            if used[v] {
                continue;
            }
            for i in 0..n_idx {
                match (in_a.get(&(k, i)), in_b.get(&(v, i))) {
                    (Some(&src), Some(&bsrc)) => {
                        if assign[src] != Some(bsrc) {
                            continue 'cand;
                        }
                    }
                    (None, None) => {}
                    _ => continue 'cand,
                }
            }
            assign[k] = Some(v);
            used[v] = true;
            if search(k + 1, a, n_idx, candidates, in_a, in_b, assign, used) {
                return true;
            }
            assign[k] = None;
            used[v] = false;
        }
        false
    }

    if search(0, a, n_idx, &candidates, &in_a, &in_b, &mut assign, &mut used) {
        IsoOutcome {
            witness: Some(
                assign
                    .iter()
                    .enumerate()
                    .map(|(k, v)| (k, v.expect("complete assignment")))
                    .collect(),
            ),
            discrepancy: None,
        }
    } else {
        IsoOutcome::no(
            "node labels match but no edge-preserving bijection extends the highest-weight matching"
                .to_string(),
        )
    }
}

fn height(alpha: &[i64]) -> i64 {
    alpha.iter().sum()
}

/// The signpost decision of the tensor-product rule at one `(b₁, b₂, i)`:
/// returns the `(ẽ target, f̃ target)` as factor-node pairs, `None` when the
/// operator vanishes.
///
/// Rule: `f̃(b₁⊗b₂) = f̃b₁⊗b₂` when `φ_i(b₁) > ε_i(b₂)`, else `b₁⊗f̃b₂`;
/// `ẽ(b₁⊗b₂) = ẽb₁⊗b₂` when `φ_i(b₁) ≥ ε_i(b₂)`, else `b₁⊗ẽb₂`.
#[allow(clippy::type_complexity)]
pub fn tensor_rule_edges(
    g1: &CrystalGraph,
    g2: &CrystalGraph,
    b1: usize,
    b2: usize,
    i: usize,
) -> Result<(Option<(usize, usize)>, Option<(usize, usize)>)> {
    let out1 = g1.out_map();
    let out2 = g2.out_map();
    let in1 = g1.in_map();
    let in2 = g2.in_map();
    let e = rule_e_with_maps(g1, g2, &in1, &in2, b1, b2, i)?;
    let f = rule_f_with_maps(g1, g2, &out1, &out2, b1, b2, i)?;
    Ok((e, f))
}

/// A vanished factor f̃ is only trustworthy when φ pins it down; for `B(∞)`
/// factors f̃ never vanishes, so a missing edge means truncation.
fn factor_f_target(
    g: &CrystalGraph,
    out: &HashMap<(usize, usize), usize>,
    id: usize,
    i: usize,
) -> Result<Option<usize>> {
    if let Some(&t) = out.get(&(id, i)) {
        return Ok(Some(t));
    }
    let node = g.node_by_id(id);
    if node.phi[i].is_zero() && g.meta.module != "B(inf)" {
        Ok(None)
    } else {
        Err(Error::DepthInsufficient(format!(
            "f̃_{i} of factor node {id} ({}) lies beyond the factor graph depth {}",
            g.meta.module, g.meta.depth
        )))
    }
}

fn factor_e_target(
    g: &CrystalGraph,
    inm: &HashMap<(usize, usize), usize>,
    id: usize,
    i: usize,
) -> Result<Option<usize>> {
    if let Some(&s) = inm.get(&(id, i)) {
        return Ok(Some(s));
    }
    let node = g.node_by_id(id);
    if node.eps[i] == 0 {
        Ok(None)
    } else {
        Err(Error::Internal(format!(
            "node {id} has eps_{i} = {} but no incoming {i}-edge",
            node.eps[i]
        )))
    }
}

/// Only the branch selected by the signpost comparison is ever evaluated, so
/// a factor's missing edges on the other branch cannot raise spurious errors.
#[allow(clippy::too_many_arguments)]
fn rule_f_with_maps(
    g1: &CrystalGraph,
    g2: &CrystalGraph,
    out1: &HashMap<(usize, usize), usize>,
    out2: &HashMap<(usize, usize), usize>,
    b1: usize,
    b2: usize,
    i: usize,
) -> Result<Option<(usize, usize)>> {
    let phi1 = g1.node_by_id(b1).phi[i];
    let eps2 = g2.node_by_id(b2).eps[i];
    if phi1.gt_int(eps2) {
        Ok(factor_f_target(g1, out1, b1, i)?.map(|t| (t, b2)))
    } else {
        Ok(factor_f_target(g2, out2, b2, i)?.map(|t| (b1, t)))
    }
}

#[allow(clippy::too_many_arguments)]
fn rule_e_with_maps(
    g1: &CrystalGraph,
    g2: &CrystalGraph,
    in1: &HashMap<(usize, usize), usize>,
    in2: &HashMap<(usize, usize), usize>,
    b1: usize,
    b2: usize,
    i: usize,
) -> Result<Option<(usize, usize)>> {
    let phi1 = g1.node_by_id(b1).phi[i];
    let eps2 = g2.node_by_id(b2).eps[i];
    if phi1.ge_int(eps2) {
        Ok(factor_e_target(g1, in1, b1, i)?.map(|t| (t, b2)))
    } else {
        Ok(factor_e_target(g2, in2, b2, i)?.map(|t| (b1, t)))
    }
}

/// The crystal of `B₁ ⊗ B₂` out to total height `depth`, built purely from
/// the factor graphs by the tensor-product rule. ε is recomputed by walking
/// the rule's raising operator inside the product; φ from ε and the weight.
pub fn tensor_crystal_combinatorial(
    datum: &BorcherdsCartanDatum,
    g1: &CrystalGraph,
    g2: &CrystalGraph,
    depth: i64,
) -> Result<CrystalGraph> {
    let n = datum.n();
    if g1.meta.labels.len() != n || g2.meta.labels.len() != n {
        return Err(Error::Config("factor graphs disagree with the datum rank".into()));
    }
    if g1.meta.depth < depth || g2.meta.depth < depth {
        return Err(Error::DepthInsufficient(format!(
            "factor graphs have depths {} and {}; the product needs at least {depth}",
            g1.meta.depth, g2.meta.depth
        )));
    }
    let lam: Vec<i64> = g1.meta.lam.iter().zip(&g2.meta.lam).map(|(x, y)| x + y).collect();

    let out1 = g1.out_map();
    let out2 = g2.out_map();
    let in1 = g1.in_map();
    let in2 = g2.in_map();

    // Product node set, level-ordered.
    let mut pairs: Vec<(RootVec, usize, usize)> = Vec::new();
    for u in &g1.nodes {
        for v in &g2.nodes {
            if height(&u.alpha) + height(&v.alpha) > depth {
                continue;
            }
            let alpha =
                RootVec(u.alpha.iter().zip(&v.alpha).map(|(x, y)| x + y).collect::<Vec<_>>());
            pairs.push((alpha, u.id, v.id));
        }
    }
    pairs.sort();
    let ids: HashMap<(usize, usize), usize> =
        pairs.iter().enumerate().map(|(k, (_, u, v))| ((*u, *v), k)).collect();

    let mut nodes = Vec::with_capacity(pairs.len());
    let mut edges = Vec::new();
    for (id, (alpha, u, v)) in pairs.iter().enumerate() {
        let nu = g1.node_by_id(*u);
        let nv = g2.node_by_id(*v);
        let wt: Vec<i64> = nu.wt.iter().zip(&nv.wt).map(|(x, y)| x + y).collect();

        let mut eps = Vec::with_capacity(n);
        let mut phi = Vec::with_capacity(n);
        for i in 0..n {
            // f̃ edge, only when the target level is still within depth.
            if alpha.height() < depth {
                let f_target = rule_f_with_maps(g1, g2, &out1, &out2, *u, *v, i)?;
                if let Some(t) = f_target {
                    edges.push(CrystalEdge { src: id, dst: ids[&t], i });
                }
            }
            // ε by walking the raising rule inside the product.
            let mut count = 0i64;
            let mut cur = (*u, *v);
            loop {
                let e_target = rule_e_with_maps(g1, g2, &in1, &in2, cur.0, cur.1, i)?;
                match e_target {
                    Some(t) => {
                        count += 1;
                        cur = t;
                    }
                    None => break,
                }
            }
            eps.push(count);
            if datum.is_real(i) {
                phi.push(ExtInt::Fin(count + wt[i]));
            } else if wt[i] > 0 {
                phi.push(ExtInt::Inf);
            } else if wt[i] == 0 {
                phi.push(ExtInt::Fin(0));
            } else {
                return Err(Error::Internal(format!(
                    "negative imaginary pairing {} in a tensor of integrable crystals",
                    wt[i]
                )));
            }
        }
        let index = nodes
            .iter()
            .rev()
            .take_while(|m: &&CrystalNode| m.alpha == alpha.0)
            .count();
        nodes.push(CrystalNode {
            id,
            alpha: alpha.0.clone(),
            index,
            lam: lam.clone(),
            wt,
            eps,
            phi,
            residue: Vec::new(),
            pair: Some((*u, *v)),
        });
    }
    edges.sort_by_key(|e| (e.src, e.i, e.dst));
    Ok(CrystalGraph {
        schema: CRYSTAL_SCHEMA.to_string(),
        meta: CrystalMeta {
            module: format!("{}(x){}", g1.meta.module, g2.meta.module),
            datum: datum.content_hash(),
            lam,
            mu: Some(g2.meta.lam.clone()),
            depth,
            labels: datum.labels().to_vec(),
        },
        nodes,
        edges,
    })
}

// ---------------------------------------------------------------------------
// Algebraic tensor product of two highest-weight modules.
// ---------------------------------------------------------------------------

/// One summand `(α₁, α₂)` of a tensor weight space, with the block offset of
/// its Kronecker basis `x_a ⊗ y_b ↦ offset + a·dim2 + b`.
#[derive(Debug, Clone)]
pub struct TensorSplit {
    pub alpha1: RootVec,
    pub alpha2: RootVec,
    pub dim1: usize,
    pub dim2: usize,
    pub offset: usize,
}

/// One weight space of `V(λ) ⊗ V(μ)`: the splits `α = α₁ + α₂` with nonzero
/// factor dimensions, in increasing `α₁` order.
#[derive(Debug, Clone)]
struct TensorLevel {
    splits: Vec<TensorSplit>,
    dim: usize,
}

impl TensorLevel {
    fn split(&self, alpha1: &RootVec) -> Option<&TensorSplit> {
        self.splits.iter().find(|s| &s.alpha1 == alpha1)
    }
}

/// All decompositions `α₁ ≤ α` (componentwise), ascending.
fn subweights(alpha: &RootVec) -> Vec<RootVec> {
    let mut parts: Vec<Vec<i64>> = vec![Vec::new()];
    for &c in &alpha.0 {
        parts = parts
            .into_iter()
            .flat_map(|p| {
                (0..=c).map(move |k| {
                    let mut v = p.clone();
                    v.push(k);
                    v
                })
            })
            .collect();
    }
    let mut out: Vec<RootVec> = parts.into_iter().map(RootVec).collect();
    out.sort();
    out
}

fn vec_diff(a: &RootVec, b: &RootVec) -> RootVec {
    RootVec(a.0.iter().zip(&b.0).map(|(x, y)| x - y).collect())
}

fn vec_sum(a: &RootVec, b: &RootVec) -> RootVec {
    RootVec(a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect())
}

/// `V(λ) ⊗ V(μ)` carrying the comultiplication actions
///
/// `f_i(x ⊗ y) = f_i x ⊗ y + q_i^{⟨h_i, λ−α₁⟩} x ⊗ f_i y`,
/// `e_i(x ⊗ y) = q_i^{−⟨h_i, μ−α₂⟩} e_i x ⊗ y + x ⊗ e_i y`,
///
/// on the concatenated Kronecker bases of the weight splits. The crystal
/// pipeline then runs on the tensor lattice spanned by products of the two
/// factor lattices, with the products `b₁ ⊗ b₂` as candidate residues.
pub struct TensorModule {
    datum: BorcherdsCartanDatum,
    depth: i64,
    lam_sum: Vec<i64>,
    left: VModule,
    right: VModule,
    left_data: CrystalData,
    right_data: CrystalData,
    levels: BTreeMap<RootVec, TensorLevel>,
    f_mats: HashMap<(usize, RootVec), QMatrix>,
    e_mats: HashMap<(usize, RootVec), QMatrix>,
}

impl TensorModule {
    pub fn new(
        datum: &BorcherdsCartanDatum,
        lam: &[i64],
        mu: &[i64],
        depth: i64,
    ) -> Result<Self> {
        let left = VModule::new(datum.clone(), lam.to_vec(), depth)?;
        let right = VModule::new(datum.clone(), mu.to_vec(), depth)?;
        let left_data = left.crystal()?;
        let right_data = right.crystal()?;
        let mut levels = BTreeMap::new();
        for alpha in datum.alphas_to_depth(depth) {
            let mut splits = Vec::new();
            let mut offset = 0usize;
            for alpha1 in subweights(&alpha) {
                let alpha2 = vec_diff(&alpha, &alpha1);
                let dim1 = HwModule::dim(&left, &alpha1)?;
                let dim2 = HwModule::dim(&right, &alpha2)?;
                if dim1 == 0 || dim2 == 0 {
                    continue;
                }
                splits.push(TensorSplit { alpha1, alpha2, dim1, dim2, offset });
                offset += dim1 * dim2;
            }
            levels.insert(alpha, TensorLevel { splits, dim: offset });
        }
        let lam_sum = lam.iter().zip(mu).map(|(a, b)| a + b).collect();
        let mut module = TensorModule {
            datum: datum.clone(),
            depth,
            lam_sum,
            left,
            right,
            left_data,
            right_data,
            levels,
            f_mats: HashMap::new(),
            e_mats: HashMap::new(),
        };
        module.precompute_maps()?;
        Ok(module)
    }

    fn level(&self, alpha: &RootVec) -> Result<&TensorLevel> {
        self.levels.get(alpha).ok_or_else(|| {
            Error::DepthInsufficient(format!(
                "weight {alpha} exceeds the computed depth {}",
                self.depth
            ))
        })
    }

    /// The two Δ terms land in distinct splits of the target level, and each
    /// source split owns its own column block, so every entry is written at
    /// most once.
    fn precompute_maps(&mut self) -> Result<()> {
        let n = self.datum.n();
        let alphas: Vec<RootVec> = self.levels.keys().cloned().collect();
        for alpha in &alphas {
            let src = &self.levels[alpha];
            for i in 0..n {
                let up = alpha.plus(i);
                if let Some(dst) = self.levels.get(&up) {
                    let mut m = QMatrix::zeros(dst.dim, src.dim);
                    for sp in &src.splits {
                        if let Some(t) = dst.split(&sp.alpha1.plus(i)) {
                            let f1 = HwModule::f_mat(&self.left, i, &sp.alpha1)?;
                            for a in 0..sp.dim1 {
                                for r in 0..t.dim1 {
                                    let v = f1.get(r, a);
                                    if v.is_zero() {
                                        continue;
                                    }
                                    for b in 0..sp.dim2 {
                                        m.set(
                                            t.offset + r * t.dim2 + b,
                                            sp.offset + a * sp.dim2 + b,
                                            v.clone(),
                                        );
                                    }
                                }
                            }
                        }
                        if let Some(t) = dst.split(&sp.alpha1) {
                            let f2 = HwModule::f_mat(&self.right, i, &sp.alpha2)?;
                            let k = self
                                .datum
                                .qi_pow(i, self.datum.pairing(i, self.left.lam(), &sp.alpha1));
                            for b in 0..sp.dim2 {
                                for r in 0..t.dim2 {
                                    let v = f2.get(r, b);
                                    if v.is_zero() {
                                        continue;
                                    }
                                    let scaled = v.mul(&k);
                                    for a in 0..sp.dim1 {
                                        m.set(
                                            t.offset + a * t.dim2 + r,
                                            sp.offset + a * sp.dim2 + b,
                                            scaled.clone(),
                                        );
                                    }
                                }
                            }
                        }
                    }
                    self.f_mats.insert((i, alpha.clone()), m);
                }
                if let Some(down) = alpha.minus(i) {
                    let dst = &self.levels[&down];
                    let mut m = QMatrix::zeros(dst.dim, src.dim);
                    for sp in &src.splits {
                        if let Some(a1d) = sp.alpha1.minus(i) {
                            if let Some(t) = dst.split(&a1d) {
                                let e1 = HwModule::e_mat(&self.left, i, &sp.alpha1)?;
                                let k = self.datum.qi_pow(
                                    i,
                                    -self.datum.pairing(i, self.right.lam(), &sp.alpha2),
                                );
                                for a in 0..sp.dim1 {
                                    for r in 0..t.dim1 {
                                        let v = e1.get(r, a);
                                        if v.is_zero() {
                                            continue;
                                        }
                                        let scaled = v.mul(&k);
                                        for b in 0..sp.dim2 {
                                            m.set(
                                                t.offset + r * t.dim2 + b,
                                                sp.offset + a * sp.dim2 + b,
                                                scaled.clone(),
                                            );
                                        }
                                    }
                                }
                            }
                        }
                        if sp.alpha2.minus(i).is_some() {
                            if let Some(t) = dst.split(&sp.alpha1) {
                                let e2 = HwModule::e_mat(&self.right, i, &sp.alpha2)?;
                                for b in 0..sp.dim2 {
                                    for r in 0..t.dim2 {
                                        let v = e2.get(r, b);
                                        if v.is_zero() {
                                            continue;
                                        }
                                        for a in 0..sp.dim1 {
                                            m.set(
                                                t.offset + a * t.dim2 + r,
                                                sp.offset + a * sp.dim2 + b,
                                                v.clone(),
                                            );
                                        }
                                    }
                                }
                            }
                        }
                    }
                    self.e_mats.insert((i, alpha.clone()), m);
                }
            }
        }
        Ok(())
    }

    pub fn factors(&self) -> (&VModule, &VModule) {
        (&self.left, &self.right)
    }

    pub fn factor_data(&self) -> (&CrystalData, &CrystalData) {
        (&self.left_data, &self.right_data)
    }

    pub fn splits(&self, alpha: &RootVec) -> Result<&[TensorSplit]> {
        Ok(&self.level(alpha)?.splits)
    }

    /// Coordinates of `x ⊗ y` for `x` at left level `α₁`, `y` at right `α₂`.
    pub fn embed(
        &self,
        alpha1: &RootVec,
        x: &[ScalarQ],
        alpha2: &RootVec,
        y: &[ScalarQ],
    ) -> Result<Vec<ScalarQ>> {
        let alpha = vec_sum(alpha1, alpha2);
        let level = self.level(&alpha)?;
        let sp = level.split(alpha1).ok_or_else(|| {
            Error::Internal(format!("weight {alpha} has no split starting at {alpha1}"))
        })?;
        assert_eq!(x.len(), sp.dim1);
        assert_eq!(y.len(), sp.dim2);
        let mut out = vec![ScalarQ::zero(); level.dim];
        for (a, xv) in x.iter().enumerate() {
            if xv.is_zero() {
                continue;
            }
            for (b, yv) in y.iter().enumerate() {
                out[sp.offset + a * sp.dim2 + b] = xv.mul(yv);
            }
        }
        Ok(out)
    }

    /// The coordinate block of `v` in the split `(α₁, α − α₁)`, flattened as
    /// `dim₁ × dim₂`; empty if the split is absent.
    pub fn block(&self, alpha: &RootVec, alpha1: &RootVec, v: &[ScalarQ]) -> Result<Vec<ScalarQ>> {
        let level = self.level(alpha)?;
        assert_eq!(v.len(), level.dim);
        Ok(level
            .split(alpha1)
            .map(|sp| v[sp.offset..sp.offset + sp.dim1 * sp.dim2].to_vec())
            .unwrap_or_default())
    }

    /// Gram matrix of the product form `(x₁ ⊗ y₁, x₂ ⊗ y₂) = (x₁,x₂)(y₁,y₂)`
    /// on a level basis; block diagonal since the factor forms pair weight
    /// spaces orthogonally.
    pub fn gram(&self, alpha: &RootVec) -> Result<QMatrix> {
        let level = self.level(alpha)?;
        let mut g = QMatrix::zeros(level.dim, level.dim);
        for sp in &level.splits {
            let g1 = &self.left.v_basis(&sp.alpha1)?.gram_basis;
            let g2 = &self.right.v_basis(&sp.alpha2)?.gram_basis;
            for a in 0..sp.dim1 {
                for c in 0..sp.dim1 {
                    if g1.get(a, c).is_zero() {
                        continue;
                    }
                    for b in 0..sp.dim2 {
                        for e in 0..sp.dim2 {
                            let v = g1.get(a, c).mul(g2.get(b, e));
                            if !v.is_zero() {
                                g.set(sp.offset + a * sp.dim2 + b, sp.offset + c * sp.dim2 + e, v);
                            }
                        }
                    }
                }
            }
        }
        Ok(g)
    }

    /// The tensor lattice `L(λ) ⊗ L(μ)` and the product residues `b₁ ⊗ b₂`
    /// per level, plus the factor-id provenance of each sorted residue.
    #[allow(clippy::type_complexity)]
    pub fn tensor_lattice_and_nodes(
        &self,
    ) -> Result<(
        BTreeMap<RootVec, DvrLattice>,
        BTreeMap<RootVec, Vec<Vec<Rat>>>,
        HashMap<(RootVec, usize), (usize, usize)>,
    )> {
        let mut lattices = BTreeMap::new();
        let mut nodes = BTreeMap::new();
        let mut pairs = HashMap::new();
        for (alpha, level) in &self.levels {
            if level.dim == 0 {
                continue;
            }
            let mut basis = Vec::with_capacity(level.dim);
            let mut residues: Vec<(Vec<Rat>, (usize, usize))> = Vec::new();
            for sp in &level.splits {
                let l1 = self.left_data.lattices.get(&sp.alpha1).ok_or_else(|| {
                    Error::Internal(format!("missing left factor lattice at {}", sp.alpha1))
                })?;
                let l2 = self.right_data.lattices.get(&sp.alpha2).ok_or_else(|| {
                    Error::Internal(format!("missing right factor lattice at {}", sp.alpha2))
                })?;
                for v1 in l1.basis() {
                    for v2 in l2.basis() {
                        let mut vec = vec![ScalarQ::zero(); level.dim];
                        for (a, x) in v1.iter().enumerate() {
                            if x.is_zero() {
                                continue;
                            }
                            for (b, y) in v2.iter().enumerate() {
                                vec[sp.offset + a * sp.dim2 + b] = x.mul(y);
                            }
                        }
                        basis.push(vec);
                    }
                }
                // The lattice vectors above sit at the same block offsets, so
                // in lattice coordinates a product residue is the Kronecker
                // product of the factor residues placed at this block.
                let r1s = &self.left_data.nodes[&sp.alpha1];
                let r2s = &self.right_data.nodes[&sp.alpha2];
                for (k1, r1) in r1s.iter().enumerate() {
                    let id1 = self.left_data.node_id(&sp.alpha1, k1).ok_or_else(|| {
                        Error::Internal("left factor node without a graph id".into())
                    })?;
                    for (k2, r2) in r2s.iter().enumerate() {
                        let id2 = self.right_data.node_id(&sp.alpha2, k2).ok_or_else(|| {
                            Error::Internal("right factor node without a graph id".into())
                        })?;
                        let mut rv = vec![Rat::zero(); level.dim];
                        for (c, x) in r1.iter().enumerate() {
                            for (d, y) in r2.iter().enumerate() {
                                rv[sp.offset + c * sp.dim2 + d] = x * y;
                            }
                        }
                        residues.push((rv, (id1, id2)));
                    }
                }
            }
            let lattice = DvrLattice::from_basis(basis)?;
            residues.sort_by(|a, b| a.0.cmp(&b.0));
            for w in residues.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(Error::Internal(format!(
                        "distinct factor pairs share a residue at weight {alpha}"
                    )));
                }
            }
            for (k, (_, pr)) in residues.iter().enumerate() {
                pairs.insert((alpha.clone(), k), *pr);
            }
            nodes.insert(alpha.clone(), residues.into_iter().map(|p| p.0).collect());
            lattices.insert(alpha.clone(), lattice);
        }
        Ok((lattices, nodes, pairs))
    }

    /// Crystal of the tensor module: lattices and candidate residues from the
    /// factor crystals, edges and string data from the Kashiwara operators of
    /// this module. Every node records its factor pair.
    pub fn crystal(&self) -> Result<CrystalData> {
        let (lattices, nodes, pairs) = self.tensor_lattice_and_nodes()?;
        let mut graph = crystal_combinatorics(self, &lattices, &nodes)?;
        for node in &mut graph.nodes {
            let key = (RootVec(node.alpha.clone()), node.index);
            node.pair = Some(*pairs.get(&key).ok_or_else(|| {
                Error::Internal("tensor node without factor provenance".into())
            })?);
        }
        Ok(CrystalData {
            label: CrystalModule::label(self),
            depth: self.depth,
            lattices,
            nodes,
            graph,
        })
    }
}

impl HwModule for TensorModule {
    fn datum(&self) -> &BorcherdsCartanDatum {
        &self.datum
    }

    fn depth(&self) -> i64 {
        self.depth
    }

    fn dim(&self, alpha: &RootVec) -> Result<usize> {
        Ok(self.level(alpha)?.dim)
    }

    fn pairing(&self, i: usize, alpha: &RootVec) -> i64 {
        self.datum.pairing(i, &self.lam_sum, alpha)
    }

    fn f_mat(&self, i: usize, alpha: &RootVec) -> Result<QMatrix> {
        self.f_mats.get(&(i, alpha.clone())).cloned().ok_or_else(|| {
            Error::DepthInsufficient(format!(
                "f_{i} out of weight {alpha} exceeds the computed depth {}",
                self.depth
            ))
        })
    }

    fn e_mat(&self, i: usize, alpha: &RootVec) -> Result<QMatrix> {
        match self.e_mats.get(&(i, alpha.clone())) {
            Some(m) => Ok(m.clone()),
            None => Ok(QMatrix::zeros(0, HwModule::dim(self, alpha)?)),
        }
    }
}

impl CrystalModule for TensorModule {
    fn datum(&self) -> &BorcherdsCartanDatum {
        &self.datum
    }

    fn depth(&self) -> i64 {
        self.depth
    }

    fn label(&self) -> ModuleLabel {
        ModuleLabel::Tensor(self.left.lam().to_vec(), self.right.lam().to_vec())
    }

    fn dim(&self, alpha: &RootVec) -> Result<usize> {
        HwModule::dim(self, alpha)
    }

    fn pairing(&self, i: usize, alpha: &RootVec) -> i64 {
        HwModule::pairing(self, i, alpha)
    }

    fn tilde_f(&self, i: usize, alpha: &RootVec) -> Result<QMatrix> {
        modrep::tilde_f_mat(self, i, alpha)
    }

    fn tilde_e(&self, i: usize, alpha: &RootVec) -> Result<QMatrix> {
        modrep::tilde_e_mat(self, i, alpha)
    }
}

/// Crystal graph of `V(λ) ⊗ V(μ)` computed on the algebraic side.
pub fn tensor_crystal_algebraic(
    datum: &BorcherdsCartanDatum,
    lam: &[i64],
    mu: &[i64],
    depth: i64,
) -> Result<CrystalGraph> {
    Ok(TensorModule::new(datum, lam, mu, depth)?.crystal()?.graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::builtin;
    use crate::freealg::UmAlgebra;
    use crate::modrep::build_crystal;

    /// Hand-built `B(λ)` chain for rank-1 `sl₂`, highest weight `m`,
    /// truncated at `depth`: nodes `f^(l) v` for `l = 0..min(m, depth)`.
    fn sl2_chain(m: i64, depth: i64) -> CrystalGraph {
        let datum = builtin("sl2").unwrap();
        let len = m.min(depth);
        let nodes = (0..=len)
            .map(|l| CrystalNode {
                id: l as usize,
                alpha: vec![l],
                index: 0,
                lam: vec![m],
                wt: vec![m - 2 * l],
                eps: vec![l],
                phi: vec![ExtInt::Fin(m - l)],
                residue: vec!["1".to_string()],
                pair: None,
            })
            .collect();
        let edges = (0..len)
            .map(|l| CrystalEdge { src: l as usize, dst: (l + 1) as usize, i: 0 })
            .collect();
        CrystalGraph {
            schema: CRYSTAL_SCHEMA.to_string(),
            meta: CrystalMeta {
                module: format!("V([{m}])"),
                datum: datum.content_hash(),
                lam: vec![m],
                mu: None,
                depth,
                labels: datum.labels().to_vec(),
            },
            nodes,
            edges,
        }
    }

    #[test]
    fn json_round_trip_of_a_generated_graph() {
        let um = UmAlgebra::new(builtin("gkm2").unwrap(), 3).unwrap();
        let g = build_crystal(&um).unwrap().graph;
        validate_graph(&g).unwrap();
        let text = g.to_json();
        let back = CrystalGraph::from_json(&text).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn inf_phi_serializes_as_string() {
        let um = UmAlgebra::new(builtin("imag2").unwrap(), 2).unwrap();
        let g = build_crystal(&um).unwrap().graph;
        let text = g.to_json();
        assert!(text.contains("\"inf\""), "imaginary φ must appear as \"inf\" in:\n{text}");
        let back = CrystalGraph::from_json(&text).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn dot_contains_nodes_and_labeled_edges() {
        let g = sl2_chain(1, 3);
        let dot = g.to_dot();
        assert!(dot.contains("digraph crystal"));
        assert!(dot.contains("n0 -> n1 [label=\"0\"]"), "edge labeled by the index label, got:\n{dot}");
    }

    #[test]
    fn isomorphism_accepts_itself_and_rejects_shorter_chain() {
        let g3 = sl2_chain(3, 5);
        let g2 = sl2_chain(2, 5);
        let same = graph_isomorphic(&g3, &g3);
        assert!(same.isomorphic());
        assert_eq!(
            same.witness.unwrap(),
            (0..4).map(|k| (k, k)).collect::<Vec<_>>(),
            "self-isomorphism should be the identity on a rigid chain"
        );
        let diff = graph_isomorphic(&g3, &g2);
        assert!(!diff.isomorphic());
        assert!(diff.discrepancy.unwrap().contains("node counts differ"));
    }

    #[test]
    fn tensor_rule_on_sl2_fundamental_squares() {
        // f̃(v⊗v): φ(v)=1 > ε(v)=0, so the left factor moves.
        let g = sl2_chain(1, 3);
        let (e, f) = tensor_rule_edges(&g, &g, 0, 0, 0).unwrap();
        assert_eq!(e, None);
        assert_eq!(f, Some((1, 0)));
        // f̃(f̃v⊗v): φ(f̃v)=0 ≤ ε(v)=0, so the right factor moves.
        let (_, f) = tensor_rule_edges(&g, &g, 1, 0, 0).unwrap();
        assert_eq!(f, Some((1, 1)));
    }

    #[test]
    fn sl2_square_is_three_chain_plus_singleton() {
        let datum = builtin("sl2").unwrap();
        let g = sl2_chain(1, 3);
        let prod = tensor_crystal_combinatorial(&datum, &g, &g, 2).unwrap();
        validate_graph(&prod).unwrap();
        assert_eq!(prod.nodes.len(), 4);
        assert_eq!(prod.edges.len(), 2);
        // Two highest-weight nodes: v⊗v and the singleton f̃v⊗v − ... at ε=0.
        let hw = prod.highest_weight_nodes();
        assert_eq!(hw.len(), 2);
        // The singleton: ε = φ = 0.
        let singleton = prod
            .nodes
            .iter()
            .filter(|n| n.eps == vec![0] && n.phi == vec![ExtInt::Fin(0)])
            .count();
        assert_eq!(singleton, 1);
    }

    #[test]
    fn tensor_with_trivial_factor_is_identity() {
        let datum = builtin("sl2").unwrap();
        let g = sl2_chain(3, 3);
        let trivial = sl2_chain(0, 3);
        let prod = tensor_crystal_combinatorial(&datum, &g, &trivial, 3).unwrap();
        let iso = graph_isomorphic(&prod, &g);
        assert!(iso.isomorphic(), "{:?}", iso.discrepancy);
    }

    /// `e_i f_j − f_j e_i = δ_ij (K_i − K_i⁻¹)/(q_i − q_i⁻¹)` must hold on
    /// every computed level of the tensor module; this pins down both
    /// comultiplication actions against each other.
    #[test]
    fn tensor_module_satisfies_the_commutator_relation() {
        let datum = builtin("gkm2").unwrap();
        let tm = TensorModule::new(&datum, &[1, 1], &[0, 1], 2).unwrap();
        let n = datum.n();
        for alpha in datum.alphas_to_depth(1) {
            let dim = HwModule::dim(&tm, &alpha).unwrap();
            if dim == 0 {
                continue;
            }
            for i in 0..n {
                for j in 0..n {
                    if i != j && alpha.0[i] == 0 {
                        continue; // both sides are structurally zero maps
                    }
                    let f = HwModule::f_mat(&tm, j, &alpha).unwrap();
                    let ef = HwModule::e_mat(&tm, i, &alpha.plus(j)).unwrap().mul(&f);
                    let fe = match alpha.minus(i) {
                        Some(down) => {
                            let e = HwModule::e_mat(&tm, i, &alpha).unwrap();
                            HwModule::f_mat(&tm, j, &down).unwrap().mul(&e)
                        }
                        None => QMatrix::zeros(ef.rows(), dim),
                    };
                    let mut expect = QMatrix::zeros(ef.rows(), dim);
                    if i == j {
                        let p = HwModule::pairing(&tm, i, &alpha);
                        expect = QMatrix::identity(dim).scale(&datum.qint(p, i));
                    }
                    for r in 0..ef.rows() {
                        for c in 0..dim {
                            let got = ef.get(r, c).sub(fe.get(r, c));
                            assert_eq!(
                                &got,
                                expect.get(r, c),
                                "commutator defect at level {alpha}, i={i}, j={j}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn algebraic_and_combinatorial_tensor_crystals_agree_for_sl2() {
        let datum = builtin("sl2").unwrap();
        let alg = tensor_crystal_algebraic(&datum, &[1], &[1], 2).unwrap();
        validate_graph(&alg).unwrap();
        assert_eq!(alg.nodes.len(), 4);
        assert_eq!(alg.edges.len(), 2);
        assert!(alg.nodes.iter().all(|n| n.pair.is_some()));

        let v1 = VModule::new(datum.clone(), vec![1], 2).unwrap();
        let g1 = v1.crystal().unwrap().graph;
        let comb = tensor_crystal_combinatorial(&datum, &g1, &g1, 2).unwrap();
        let iso = graph_isomorphic(&alg, &comb);
        assert!(iso.isomorphic(), "{:?}", iso.discrepancy);
    }

    #[test]
    fn algebraic_and_combinatorial_tensor_crystals_agree_for_gkm2() {
        let datum = builtin("gkm2").unwrap();
        let depth = 3;
        let alg = tensor_crystal_algebraic(&datum, &[1, 1], &[0, 1], depth).unwrap();
        validate_graph(&alg).unwrap();

        let g1 = VModule::new(datum.clone(), vec![1, 1], depth).unwrap().crystal().unwrap().graph;
        let g2 = VModule::new(datum.clone(), vec![0, 1], depth).unwrap().crystal().unwrap().graph;
        let comb = tensor_crystal_combinatorial(&datum, &g1, &g2, depth).unwrap();
        validate_graph(&comb).unwrap();
        let iso = graph_isomorphic(&alg, &comb);
        assert!(iso.isomorphic(), "{:?}", iso.discrepancy);
    }

    /// Rank-one imaginary datum, `λ(h) = μ(h) = 1`: `φ(f^{l₁} v_λ) = ∞`
    /// dominates every `ε`, so both Kashiwara operators always move the left
    /// factor — `f̃(f^{l₁} v_λ ⊗ f^{l₂} v_μ) = f^{l₁+1} v_λ ⊗ f^{l₂} v_μ` —
    /// and the product splits into one chain per right-factor element.
    #[test]
    fn imaginary_rank_one_tensor_moves_the_left_factor() {
        let datum = builtin("imag2").unwrap();
        let depth = 3;
        let tm = TensorModule::new(&datum, &[1], &[1], depth).unwrap();
        let data = tm.crystal().unwrap();
        let alg = &data.graph;
        validate_graph(alg).unwrap();
        // All pairs (l₁, l₂) with l₁ + l₂ ≤ 3, chained along l₁.
        assert_eq!(alg.nodes.len(), 10);
        assert_eq!(alg.edges.len(), 6);
        assert_eq!(alg.highest_weight_nodes().len(), 4);
        let by_id: Vec<(usize, usize)> =
            alg.nodes.iter().map(|n| n.pair.expect("tensor provenance")).collect();
        for node in &alg.nodes {
            let (l1, l2) = by_id[node.id];
            assert_eq!((l1 + l2) as i64, node.alpha[0]);
            assert_eq!(node.eps, vec![l1 as i64], "ε counts left-factor moves only");
            assert_eq!(node.phi, vec![ExtInt::Inf]);
        }
        for e in &alg.edges {
            let (a1, a2) = by_id[e.src];
            let (b1, b2) = by_id[e.dst];
            assert_eq!((b1, b2), (a1 + 1, a2), "an edge must raise the left exponent");
        }

        let g = VModule::new(datum.clone(), vec![1], depth).unwrap().crystal().unwrap().graph;
        let comb = tensor_crystal_combinatorial(&datum, &g, &g, depth).unwrap();
        let iso = graph_isomorphic(alg, &comb);
        assert!(iso.isomorphic(), "{:?}", iso.discrepancy);
    }

    #[test]
    fn tensor_products_associate_combinatorially() {
        let datum = builtin("gkm2").unwrap();
        let depth = 3;
        let b1 = VModule::new(datum.clone(), vec![1, 0], depth).unwrap().crystal().unwrap().graph;
        let b2 = VModule::new(datum.clone(), vec![0, 1], depth).unwrap().crystal().unwrap().graph;
        let b3 = VModule::new(datum.clone(), vec![1, 1], depth).unwrap().crystal().unwrap().graph;
        let left = tensor_crystal_combinatorial(
            &datum,
            &tensor_crystal_combinatorial(&datum, &b1, &b2, depth).unwrap(),
            &b3,
            depth,
        )
        .unwrap();
        let right = tensor_crystal_combinatorial(
            &datum,
            &b1,
            &tensor_crystal_combinatorial(&datum, &b2, &b3, depth).unwrap(),
            depth,
        )
        .unwrap();
        let iso = graph_isomorphic(&left, &right);
        assert!(iso.isomorphic(), "{:?}", iso.discrepancy);
    }
}
