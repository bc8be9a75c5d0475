//! Executable verification of the structural theorems on computed data.
//!
//! The centerpiece is [`Workspace`]: for one Borcherds-Cartan datum and a
//! pair of dominant weights `λ, μ` it computes, to a common depth, the
//! negative half with its crystal `B(∞)`, the three highest-weight modules
//! `V(λ)`, `V(μ)`, `V(λ+μ)` with their crystals, the tensor module
//! `V(λ)⊗V(μ)` with its lattice `L(λ)⊗L(μ)` and crystal `B(λ)⊗B(μ)`, and
//! the comparison maps
//!
//! * `Φ : V(λ+μ) → V(λ)⊗V(μ)`, the module map with `Φ(v_{λ+μ}) = v_λ⊗v_μ`,
//!   realized by expanding each word letterwise through the comultiplication
//!   action (well-definedness on the quotient is checked on every word);
//! * `Ψ : V(λ)⊗V(μ) → V(λ+μ)`, the adjoint of `Φ` with respect to the
//!   contravariant form on `V(λ+μ)` and the product form
//!   `(u₁⊗u₂, v₁⊗v₂) = (u₁,v₁)(u₂,v₂)` on the tensor;
//! * `S : V(λ)⊗V(μ) → V(λ)`, the projection with `S(u⊗v_μ) = u` that kills
//!   `V(λ) ⊗ Σ_i f_i V(μ)`.
//!
//! On top of these, [`Workspace::check_statement`] evaluates the fifteen
//! interlocking statements `A`–`O` (lattice stability, crystal closure,
//! `f̃`/`ẽ` pairing, basis-of-quotient, `Φ`/`Ψ` containments, and the
//! compatibilities between `B(∞)` and `B(λ)` through `P ↦ P v_λ`) as
//! concrete matrix and set identities over all weights of height at most
//! `r`, reporting instance counts and failure witnesses. The statements are
//! verified on the computed objects, not re-proved: a failure indicates an
//! implementation bug, never new mathematics.
//!
//! Free functions check the two auxiliary congruences — the form comparison
//! `(P,Q) ≡ Π_k (1−q_{i_k}²) · (Pv_λ, Qv_λ) mod q^m A₀` for large `λ`, and
//! the factorization of a `f̃`-word on `v_λ ⊗ v_μ` into a pure tensor mod
//! `q·L(λ)⊗L(μ)` when `λ` is the fundamental weight at the distinguished
//! position — and [`run_suite`] drives a configured matrix of cases,
//! emitting JSON and human-readable reports.

use crate::cartan::{builtin, BorcherdsCartanDatum, DatumConfig, RootVec};
use crate::crystal::{validate_graph, TensorModule};
use crate::freealg::{kform, FVector, UmAlgebra, Word};
use crate::modrep::{self, build_crystal, CrystalData, CrystalModule, HwModule};
use crate::qarith::{dvr_lattice_basis, rat_rank, DvrLattice, QMatrix, Rat, ScalarQ};
use crate::vrep::VModule;
use crate::{Error, Result};
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Cap on stored failure witnesses per report; the total count is kept.
const MAX_WITNESSES: usize = 12;

/// The fifteen interlocking statements, identified by letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StatementId {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
    I,
    J,
    K,
    L,
    M,
    N,
    O,
}

impl StatementId {
    pub const ALL: [StatementId; 15] = [
        StatementId::A,
        StatementId::B,
        StatementId::C,
        StatementId::D,
        StatementId::E,
        StatementId::F,
        StatementId::G,
        StatementId::H,
        StatementId::I,
        StatementId::J,
        StatementId::K,
        StatementId::L,
        StatementId::M,
        StatementId::N,
        StatementId::O,
    ];

    pub fn letter(self) -> char {
        (b'A' + self as u8) as char
    }

    pub fn parse(text: &str) -> Option<StatementId> {
        let t = text.trim();
        if t.len() != 1 {
            return None;
        }
        let c = t.chars().next()?.to_ascii_uppercase();
        Self::ALL.into_iter().find(|id| id.letter() == c)
    }

    /// One-line description of what the statement asserts.
    pub fn describe(self) -> &'static str {
        match self {
            StatementId::A => "ẽ_i maps each highest-weight crystal lattice into itself",
            StatementId::B => "ẽ_i maps crystal elements of B(λ) into B(λ) ∪ {0}",
            StatementId::C => "f̃_i b = b′ exactly when b = ẽ_i b′ on B(λ)",
            StatementId::D => "B(λ) residues form a ℚ-basis of L(λ)/qL(λ)",
            StatementId::E => "Φ maps L(λ+μ) into L(λ)⊗L(μ)",
            StatementId::F => "Ψ maps L(λ)⊗L(μ) into L(λ+μ)",
            StatementId::G => "Ψ maps B(λ)⊗B(μ) into B(λ+μ) ∪ {0}",
            StatementId::H => "ẽ_i maps L(∞) into itself",
            StatementId::I => "ẽ_i maps B(∞) into B(∞) ∪ {0}",
            StatementId::J => "b = f̃_i ẽ_i b whenever ẽ_i b ≠ 0 on B(∞)",
            StatementId::K => "B(∞) residues form a ℚ-basis of L(∞)/qL(∞)",
            StatementId::L => "P ↦ P v_λ maps L(∞) onto L(λ)",
            StatementId::M => "f̃_i commutes with P ↦ P v_λ modulo qL(λ)",
            StatementId::N => "P ↦ P v_λ mod q restricts to a bijection from its support in B(∞) onto B(λ)",
            StatementId::O => "ẽ_i commutes with P ↦ P v_λ mod q on the support in B(∞)",
        }
    }
}

/// Outcome of one statement (or auxiliary) check: instance count plus
/// failure witnesses. A report with zero instances is vacuous and never
/// counts as a pass.
#[derive(Debug, Clone, Serialize)]
pub struct StatementReport {
    pub id: String,
    pub description: String,
    /// Content hash of the datum the check ran on.
    pub datum: String,
    pub lam: Vec<i64>,
    pub mu: Option<Vec<i64>>,
    /// Height bound: weights `α` with `|α| ≤ r` were examined.
    pub r: i64,
    /// Number of atomic assertions evaluated.
    pub instances: usize,
    /// Witnesses for the first few failures.
    pub failures: Vec<String>,
    /// Total number of failures (witnesses above are capped).
    pub failure_count: usize,
}

impl StatementReport {
    fn new(
        id: impl Into<String>,
        description: impl Into<String>,
        datum: &BorcherdsCartanDatum,
        lam: Vec<i64>,
        mu: Option<Vec<i64>>,
        r: i64,
    ) -> Self {
        Self {
            id: id.into(),
            description: description.into(),
            datum: datum.content_hash(),
            lam,
            mu,
            r,
            instances: 0,
            failures: Vec::new(),
            failure_count: 0,
        }
    }

    fn fail(&mut self, witness: String) {
        if self.failures.len() < MAX_WITNESSES {
            self.failures.push(witness);
        }
        self.failure_count += 1;
    }

    /// Never exercised at the configured depth.
    pub fn vacuous(&self) -> bool {
        self.instances == 0
    }

    /// Exercised and failure-free.
    pub fn passed(&self) -> bool {
        !self.vacuous() && self.failure_count == 0
    }
}

fn apply_rat(m: &[Vec<Rat>], v: &[Rat]) -> Vec<Rat> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).fold(Rat::zero(), |s, t| s + t))
        .collect()
}

fn rat_vec_zero(v: &[Rat]) -> bool {
    v.iter().all(Rat::is_zero)
}

fn scalar_vec_zero(v: &[ScalarQ]) -> bool {
    v.iter().all(ScalarQ::is_zero)
}

fn scalar_vec_eq(a: &[ScalarQ], b: &[ScalarQ]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.sub(y).is_zero())
}

fn scalar_vec_sub(a: &[ScalarQ], b: &[ScalarQ]) -> Vec<ScalarQ> {
    a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()
}

fn fmt_rats(v: &[Rat]) -> String {
    let parts: Vec<String> = v.iter().map(Rat::to_string).collect();
    format!("[{}]", parts.join(", "))
}

fn fmt_scalars(v: &[ScalarQ]) -> String {
    let parts: Vec<String> = v.iter().map(ScalarQ::to_string).collect();
    format!("[{}]", parts.join(", "))
}

/// A₀-linear combination of lattice basis vectors with rational residue
/// coordinates: the canonical lift of a residue class.
fn lift_residue(lattice: &DvrLattice, coords: &[Rat]) -> Vec<ScalarQ> {
    let dim = lattice.dim();
    let mut out = vec![ScalarQ::zero(); dim];
    for (c, b) in coords.iter().zip(lattice.basis()) {
        if c.is_zero() {
            continue;
        }
        let s = ScalarQ::from_rat(c.clone());
        for (acc, x) in out.iter_mut().zip(b) {
            *acc = acc.add(&x.mul(&s));
        }
    }
    out
}

/// All computed objects for one `(datum, λ, μ, depth)` verification case.
pub struct Workspace {
    datum: BorcherdsCartanDatum,
    lam: Vec<i64>,
    mu: Vec<i64>,
    depth: i64,
    um: UmAlgebra,
    binf: CrystalData,
    v_sum: VModule,
    c_sum: CrystalData,
    tensor: TensorModule,
    c_tensor: CrystalData,
    /// Per level: matrix of `Φ` from `V(λ+μ)` basis coordinates to tensor
    /// coordinates (levels where `V(λ+μ)` vanishes are absent).
    phi: BTreeMap<RootVec, QMatrix>,
    /// Per level: matrix of `Ψ` from tensor coordinates to `V(λ+μ)` basis
    /// coordinates (levels where the tensor vanishes are absent).
    psi: BTreeMap<RootVec, QMatrix>,
}

impl Workspace {
    pub fn new(
        datum: BorcherdsCartanDatum,
        lam: Vec<i64>,
        mu: Vec<i64>,
        depth: i64,
    ) -> Result<Self> {
        let um = UmAlgebra::new(datum.clone(), depth)?;
        let binf = build_crystal(&um)?;
        let sum: Vec<i64> = lam.iter().zip(&mu).map(|(a, b)| a + b).collect();
        let v_sum = VModule::new(datum.clone(), sum, depth)?;
        let c_sum = v_sum.crystal()?;
        let tensor = TensorModule::new(&datum, &lam, &mu, depth)?;
        let c_tensor = tensor.crystal()?;
        let mut ws = Self {
            datum,
            lam,
            mu,
            depth,
            um,
            binf,
            v_sum,
            c_sum,
            tensor,
            c_tensor,
            phi: BTreeMap::new(),
            psi: BTreeMap::new(),
        };
        ws.phi = ws.build_phi()?;
        ws.psi = ws.build_psi()?;
        Ok(ws)
    }

    pub fn datum(&self) -> &BorcherdsCartanDatum {
        &self.datum
    }

    pub fn lam(&self) -> &[i64] {
        &self.lam
    }

    pub fn mu(&self) -> &[i64] {
        &self.mu
    }

    pub fn sum_lam(&self) -> &[i64] {
        self.v_sum.lam()
    }

    pub fn depth(&self) -> i64 {
        self.depth
    }

    pub fn um(&self) -> &UmAlgebra {
        &self.um
    }

    pub fn binf(&self) -> &CrystalData {
        &self.binf
    }

    pub fn v_lam(&self) -> &VModule {
        self.tensor.factors().0
    }

    pub fn v_mu(&self) -> &VModule {
        self.tensor.factors().1
    }

    pub fn c_lam(&self) -> &CrystalData {
        self.tensor.factor_data().0
    }

    pub fn c_mu(&self) -> &CrystalData {
        self.tensor.factor_data().1
    }

    pub fn v_sum(&self) -> &VModule {
        &self.v_sum
    }

    pub fn c_sum(&self) -> &CrystalData {
        &self.c_sum
    }

    pub fn tensor(&self) -> &TensorModule {
        &self.tensor
    }

    pub fn c_tensor(&self) -> &CrystalData {
        &self.c_tensor
    }

    /// Apply the comultiplication action of the word `w` to `v_λ ⊗ v_μ`,
    /// letter by letter, returning the final level and tensor coordinates.
    pub fn tensor_word_action(&self, w: &Word) -> Result<(RootVec, Vec<ScalarQ>)> {
        let mut alpha = RootVec::zero(self.datum.n());
        let mut v = vec![ScalarQ::one()];
        for (pos, &i) in w.0.iter().rev().enumerate() {
            let up = alpha.plus(i);
            if HwModule::dim(&self.tensor, &up)? == 0 {
                // The action passes through a vanishing weight space, so the
                // result is zero at the full weight of the word.
                let mut full = up;
                for &j in w.0.iter().rev().skip(pos + 1) {
                    full = full.plus(j);
                }
                let dim = HwModule::dim(&self.tensor, &full)?;
                return Ok((full, vec![ScalarQ::zero(); dim]));
            }
            v = self.tensor.f_mat(i, &alpha)?.apply(&v);
            alpha = up;
        }
        Ok((alpha, v))
    }

    fn build_phi(&self) -> Result<BTreeMap<RootVec, QMatrix>> {
        let mut out = BTreeMap::new();
        for alpha in self.datum.alphas_to_depth(self.depth) {
            let level = self.v_sum.v_basis(&alpha)?;
            if level.dim() == 0 {
                continue;
            }
            let tdim = HwModule::dim(&self.tensor, &alpha)?;
            let mut cols = Vec::with_capacity(level.dim());
            for w in level.basis_words() {
                cols.push(self.tensor_word_action(&w)?.1);
            }
            let mat = QMatrix::from_cols(cols, tdim);
            // The letterwise expansion must factor through the quotient
            // presentation of V(λ+μ): every word of the level, not only the
            // chosen basis words, must land on the image of its coordinates.
            for w in &level.words {
                let direct = self.tensor_word_action(w)?.1;
                let via = mat.apply(&level.reduce(&FVector::from_word(w.clone()))?);
                if !scalar_vec_eq(&direct, &via) {
                    return Err(Error::WellDefinednessViolation(format!(
                        "expansion of {w} on v_λ⊗v_μ does not factor through V({:?}) at level {alpha}",
                        self.sum_lam()
                    )));
                }
            }
            out.insert(alpha, mat);
        }
        Ok(out)
    }

    fn build_psi(&self) -> Result<BTreeMap<RootVec, QMatrix>> {
        let mut out = BTreeMap::new();
        for alpha in self.datum.alphas_to_depth(self.depth) {
            let tdim = HwModule::dim(&self.tensor, &alpha)?;
            if tdim == 0 {
                continue;
            }
            let level = self.v_sum.v_basis(&alpha)?;
            if level.dim() == 0 {
                out.insert(alpha, QMatrix::zeros(0, tdim));
                continue;
            }
            let phi = &self.phi[&alpha];
            // (Ψu, v)_{λ+μ} = (u, Φv)_⊗ for all v forces Ψ = G⁻¹ Φᵀ G_⊗.
            let g_inv = level.gram_basis.inverse().map_err(|_| {
                Error::Internal(format!(
                    "contravariant form degenerates on the V({:?}) basis at level {alpha}",
                    self.sum_lam()
                ))
            })?;
            let psi = g_inv.mul(&phi.transpose().mul(&self.tensor.gram(&alpha)?));
            out.insert(alpha, psi);
        }
        Ok(out)
    }

    /// `Φ` of a homogeneous element `P · v_{λ+μ}` given as a word vector:
    /// the level and the tensor coordinates of the image.
    pub fn phi(&self, p: &FVector) -> Result<(RootVec, Vec<ScalarQ>)> {
        let alpha = p.weight(&self.datum).ok_or_else(|| {
            Error::Config("Φ expects a homogeneous nonzero word vector".into())
        })?;
        let tdim = HwModule::dim(&self.tensor, &alpha)?;
        match self.phi.get(&alpha) {
            Some(mat) => {
                let coords = self.v_sum.v_basis(&alpha)?.reduce(p)?;
                Ok((alpha, mat.apply(&coords)))
            }
            None => Ok((alpha, vec![ScalarQ::zero(); tdim])),
        }
    }

    /// `Ψ` of tensor coordinates at a level: `V(λ+μ)` basis coordinates.
    pub fn psi(&self, alpha: &RootVec, u: &[ScalarQ]) -> Result<Vec<ScalarQ>> {
        let tdim = HwModule::dim(&self.tensor, alpha)?;
        if u.len() != tdim {
            return Err(Error::Config(format!(
                "Ψ input has {} coordinates at level {alpha} of dimension {tdim}",
                u.len()
            )));
        }
        match self.psi.get(alpha) {
            Some(mat) => Ok(mat.apply(u)),
            None => Ok(Vec::new()),
        }
    }

    /// `Ψ` of tensor coordinates as a word vector in `V(λ+μ)`.
    pub fn psi_vector(&self, alpha: &RootVec, u: &[ScalarQ]) -> Result<FVector> {
        let coords = self.psi(alpha, u)?;
        if coords.is_empty() {
            return Ok(FVector::zero());
        }
        Ok(self.v_sum.v_basis(alpha)?.vector(&coords))
    }

    /// Matrix of the projection `S` at a level: `V(λ)_  {λ−α}` coordinates
    /// from tensor coordinates, the identity on the `(α, 0)` block and zero
    /// on every block with a lowered right factor.
    pub fn s_mat(&self, alpha: &RootVec) -> Result<QMatrix> {
        let d1 = HwModule::dim(self.v_lam(), alpha)?;
        let tdim = HwModule::dim(&self.tensor, alpha)?;
        let mut mat = QMatrix::zeros(d1, tdim);
        if d1 > 0 && tdim > 0 {
            if let Some(sp) =
                self.tensor.splits(alpha)?.iter().find(|sp| sp.alpha2.height() == 0)
            {
                for r in 0..d1 {
                    mat.set(r, sp.offset + r, ScalarQ::one());
                }
            }
        }
        Ok(mat)
    }

    /// `S` applied to tensor coordinates at a level.
    pub fn s_apply(&self, alpha: &RootVec, w: &[ScalarQ]) -> Result<Vec<ScalarQ>> {
        Ok(self.s_mat(alpha)?.apply(w))
    }

    fn new_report(&self, id: impl Into<String>, desc: impl Into<String>, r: i64) -> StatementReport {
        StatementReport::new(id, desc, &self.datum, self.lam.clone(), Some(self.mu.clone()), r)
    }

    /// Evaluate one statement over all weights of height at most `r`.
    pub fn check_statement(&self, id: StatementId, r: i64) -> Result<StatementReport> {
        if r > self.depth {
            return Err(Error::Config(format!(
                "statement checked to height {r} but the workspace depth is {}",
                self.depth
            )));
        }
        let mut rep = self.new_report(id.letter().to_string(), id.describe(), r);
        let hw: [(&str, &VModule, &CrystalData); 3] = [
            ("V(λ)", self.v_lam(), self.c_lam()),
            ("V(μ)", self.v_mu(), self.c_mu()),
            ("V(λ+μ)", &self.v_sum, &self.c_sum),
        ];
        match id {
            StatementId::A => {
                for (tag, m, data) in hw {
                    stability_under_e(m, data, r, tag, &mut rep)?;
                }
            }
            StatementId::B => {
                for (tag, m, data) in hw {
                    nodes_under_e(m, data, r, tag, &mut rep)?;
                }
            }
            StatementId::C => {
                for (tag, m, data) in hw {
                    ef_pairing(m, data, r, tag, &mut rep)?;
                }
            }
            StatementId::D => {
                for (tag, _, data) in hw {
                    basis_of_quotient(data, r, tag, &mut rep);
                }
            }
            StatementId::E => self.check_e(r, &mut rep),
            StatementId::F => self.check_f(r, &mut rep),
            StatementId::G => self.check_g(r, &mut rep),
            StatementId::H => stability_under_e(&self.um, &self.binf, r, "U_q^-", &mut rep)?,
            StatementId::I => nodes_under_e(&self.um, &self.binf, r, "U_q^-", &mut rep)?,
            StatementId::J => ef_closure(&self.um, &self.binf, r, &mut rep)?,
            StatementId::K => basis_of_quotient(&self.binf, r, "U_q^-", &mut rep),
            StatementId::L => self.check_l(r, &mut rep)?,
            StatementId::M => self.check_m(r, &mut rep)?,
            StatementId::N => self.check_n(r, &mut rep)?,
            StatementId::O => self.check_o(r, &mut rep)?,
        }
        Ok(rep)
    }

    fn check_e(&self, r: i64, rep: &mut StatementReport) {
        for (alpha, lat) in &self.c_sum.lattices {
            if alpha.height() > r {
                continue;
            }
            let phi = &self.phi[alpha];
            let t_lat = self.c_tensor.lattices.get(alpha);
            for (k, b) in lat.basis().iter().enumerate() {
                rep.instances += 1;
                let img = phi.apply(b);
                let ok = match t_lat {
                    Some(l) => l.contains(&img),
                    None => scalar_vec_zero(&img),
                };
                if !ok {
                    rep.fail(format!(
                        "Φ of lattice vector {k} at level {alpha} leaves L(λ)⊗L(μ): {}",
                        fmt_scalars(&img)
                    ));
                }
            }
        }
    }

    fn check_f(&self, r: i64, rep: &mut StatementReport) {
        for (alpha, t_lat) in &self.c_tensor.lattices {
            if alpha.height() > r {
                continue;
            }
            let psi = &self.psi[alpha];
            let s_lat = self.c_sum.lattices.get(alpha);
            for (k, b) in t_lat.basis().iter().enumerate() {
                rep.instances += 1;
                let img = psi.apply(b);
                let ok = match s_lat {
                    Some(l) => l.contains(&img),
                    None => scalar_vec_zero(&img),
                };
                if !ok {
                    rep.fail(format!(
                        "Ψ of tensor lattice vector {k} at level {alpha} leaves L(λ+μ): {}",
                        fmt_scalars(&img)
                    ));
                }
            }
        }
    }

    fn check_g(&self, r: i64, rep: &mut StatementReport) {
        static EMPTY: Vec<Vec<Rat>> = Vec::new();
        for (alpha, t_nodes) in &self.c_tensor.nodes {
            if alpha.height() > r {
                continue;
            }
            let t_lat = &self.c_tensor.lattices[alpha];
            let psi = &self.psi[alpha];
            let s_lat = self.c_sum.lattices.get(alpha);
            let s_nodes = self.c_sum.nodes.get(alpha).unwrap_or(&EMPTY);
            for (k, rvec) in t_nodes.iter().enumerate() {
                rep.instances += 1;
                let img = psi.apply(&lift_residue(t_lat, rvec));
                match s_lat {
                    None => {
                        if !scalar_vec_zero(&img) {
                            rep.fail(format!(
                                "Ψ of element {k}⊗ at vanishing level {alpha} is nonzero"
                            ));
                        }
                    }
                    Some(l) => match l.residue(&img) {
                        Err(_) => rep.fail(format!(
                            "Ψ of tensor element {k} at level {alpha} leaves L(λ+μ): {}",
                            fmt_scalars(&img)
                        )),
                        Ok(res) => {
                            if !rat_vec_zero(&res) && !s_nodes.contains(&res) {
                                rep.fail(format!(
                                    "Ψ of tensor element {k} at level {alpha} has residue {}, \
                                     which is neither zero nor in B(λ+μ)",
                                    fmt_rats(&res)
                                ));
                            }
                        }
                    },
                }
            }
        }
    }

    fn check_l(&self, r: i64, rep: &mut StatementReport) -> Result<()> {
        for alpha in self.datum.alphas_to_depth(r) {
            if alpha.height() == 0 {
                continue;
            }
            let Some(l_inf) = self.binf.lattices.get(&alpha) else { continue };
            let pi = self.v_lam().pi_mat(&self.um, &alpha)?;
            rep.instances += 1;
            let images: Vec<Vec<ScalarQ>> = l_inf.basis().iter().map(|b| pi.apply(b)).collect();
            match self.c_lam().lattices.get(&alpha) {
                None => {
                    if let Some(k) = images.iter().position(|u| !scalar_vec_zero(u)) {
                        rep.fail(format!(
                            "P ↦ Pv_λ of lattice vector {k} at level {alpha} is nonzero \
                             although V(λ) vanishes there"
                        ));
                    }
                }
                Some(l_lam) => {
                    for (k, u) in images.iter().enumerate() {
                        if !l_lam.contains(u) {
                            rep.fail(format!(
                                "image of L(∞) vector {k} at level {alpha} leaves L(λ): {}",
                                fmt_scalars(u)
                            ));
                        }
                    }
                    match dvr_lattice_basis(&images, l_lam.dim()) {
                        Err(e) => rep.fail(format!(
                            "images of L(∞) at level {alpha} do not span V(λ): {e}"
                        )),
                        Ok(span) => {
                            for (k, c) in l_lam.basis().iter().enumerate() {
                                if !span.contains(c) {
                                    rep.fail(format!(
                                        "L(λ) vector {k} at level {alpha} is not reached \
                                         by L(∞): {}",
                                        fmt_scalars(c)
                                    ));
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn check_m(&self, r: i64, rep: &mut StatementReport) -> Result<()> {
        let n = self.datum.n();
        for alpha in self.datum.alphas_to_depth(r) {
            if alpha.height() == 0 {
                continue;
            }
            for i in 0..n {
                let Some(down) = alpha.minus(i) else { continue };
                let Some(src) = self.binf.lattices.get(&down) else { continue };
                let f_v = CrystalModule::tilde_f(self.v_lam(), i, &down)?;
                let pi_down = self.v_lam().pi_mat(&self.um, &down)?;
                let pi_up = self.v_lam().pi_mat(&self.um, &alpha)?;
                let f_um = self.um.tilde_f_mat(i, &down)?;
                let dst_lat = self.c_lam().lattices.get(&alpha);
                for (k, b) in src.basis().iter().enumerate() {
                    rep.instances += 1;
                    let lhs = f_v.apply(&pi_down.apply(b));
                    let rhs = pi_up.apply(&f_um.apply(b));
                    let diff = scalar_vec_sub(&lhs, &rhs);
                    let ok = match dst_lat {
                        Some(l) => l.contains_scaled(&diff, 1),
                        None => scalar_vec_zero(&diff),
                    };
                    if !ok {
                        rep.fail(format!(
                            "f̃_{i}(P v_λ) − (f̃_{i} P) v_λ for lattice vector {k} at level \
                             {down} is {} ∉ qL(λ)",
                            fmt_scalars(&diff)
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_n(&self, r: i64, rep: &mut StatementReport) -> Result<()> {
        static EMPTY: Vec<Vec<Rat>> = Vec::new();
        for alpha in self.datum.alphas_to_depth(r) {
            let (Some(l_inf), Some(b_inf)) =
                (self.binf.lattices.get(&alpha), self.binf.nodes.get(&alpha))
            else {
                continue;
            };
            let Some(l_lam) = self.c_lam().lattices.get(&alpha) else {
                // V(λ) vanishes here: the support of the residue map is
                // empty and there is nothing on the B(λ) side to reach.
                rep.instances += b_inf.len();
                continue;
            };
            let pi = self.v_lam().pi_mat(&self.um, &alpha)?;
            let pibar = match modrep::residue_map(&pi, l_inf, l_lam) {
                Ok(m) => m,
                Err(e) => {
                    rep.instances += b_inf.len();
                    rep.fail(format!("residue of P ↦ Pv_λ undefined at level {alpha}: {e}"));
                    continue;
                }
            };
            let lam_nodes = self.c_lam().nodes.get(&alpha).unwrap_or(&EMPTY);
            let mut hits: Vec<(usize, Vec<Rat>)> = Vec::new();
            for (k, b) in b_inf.iter().enumerate() {
                rep.instances += 1;
                let img = apply_rat(&pibar, b);
                if rat_vec_zero(&img) {
                    continue;
                }
                if !lam_nodes.contains(&img) {
                    rep.fail(format!(
                        "image of B(∞) element {k} at level {alpha} is {}, not in B(λ) ∪ {{0}}",
                        fmt_rats(&img)
                    ));
                    continue;
                }
                if let Some((k0, _)) = hits.iter().find(|(_, u)| *u == img) {
                    rep.fail(format!(
                        "B(∞) elements {k0} and {k} at level {alpha} collide on {}",
                        fmt_rats(&img)
                    ));
                } else {
                    hits.push((k, img));
                }
            }
            for (j, c) in lam_nodes.iter().enumerate() {
                if !hits.iter().any(|(_, u)| u == c) {
                    rep.fail(format!(
                        "B(λ) element {j} at level {alpha} is not reached from B(∞): {}",
                        fmt_rats(c)
                    ));
                }
            }
        }
        Ok(())
    }

    fn check_o(&self, r: i64, rep: &mut StatementReport) -> Result<()> {
        let n = self.datum.n();
        for alpha in self.datum.alphas_to_depth(r) {
            if alpha.height() == 0 {
                continue;
            }
            let (Some(l_inf), Some(b_inf)) =
                (self.binf.lattices.get(&alpha), self.binf.nodes.get(&alpha))
            else {
                continue;
            };
            let Some(l_lam) = self.c_lam().lattices.get(&alpha) else { continue };
            let pi = self.v_lam().pi_mat(&self.um, &alpha)?;
            let pibar = match modrep::residue_map(&pi, l_inf, l_lam) {
                Ok(m) => m,
                Err(e) => {
                    rep.instances += 1;
                    rep.fail(format!("residue of P ↦ Pv_λ undefined at level {alpha}: {e}"));
                    continue;
                }
            };
            for i in 0..n {
                let Some(down) = alpha.minus(i) else { continue };
                // Residues of ẽ_i on both sides, zero maps into vanishing levels.
                let e_inf = self.um.tilde_e_mat(i, &alpha)?;
                let ebar_inf = match self.binf.lattices.get(&down) {
                    Some(dst) => Some(modrep::residue_map(&e_inf, l_inf, dst)?),
                    None => None,
                };
                let (ebar_v, pibar_down) = match self.c_lam().lattices.get(&down) {
                    Some(dst) => {
                        let e_v = CrystalModule::tilde_e(self.v_lam(), i, &alpha)?;
                        let ev = modrep::residue_map(&e_v, l_lam, dst)?;
                        let pd = match self.binf.lattices.get(&down) {
                            Some(src_d) => Some(modrep::residue_map(
                                &self.v_lam().pi_mat(&self.um, &down)?,
                                src_d,
                                dst,
                            )?),
                            None => None,
                        };
                        (Some(ev), pd)
                    }
                    None => (None, None),
                };
                for (k, b) in b_inf.iter().enumerate() {
                    let pb = apply_rat(&pibar, b);
                    if rat_vec_zero(&pb) {
                        continue;
                    }
                    rep.instances += 1;
                    let lhs = match &ebar_v {
                        Some(m) => apply_rat(m, &pb),
                        None => Vec::new(),
                    };
                    let rhs = match (&ebar_inf, &pibar_down) {
                        (Some(e), Some(p)) => apply_rat(p, &apply_rat(e, b)),
                        _ => Vec::new(),
                    };
                    let equal = (rat_vec_zero(&lhs) && rat_vec_zero(&rhs)) || lhs == rhs;
                    if !equal {
                        rep.fail(format!(
                            "ẽ_{i} and P ↦ Pv_λ disagree mod q on B(∞) element {k} at level \
                             {alpha}: {} vs {}",
                            fmt_rats(&lhs),
                            fmt_rats(&rhs)
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// `Ψ ∘ Φ` must be the identity of `V(λ+μ)` at every level.
    pub fn check_psi_phi_identity(&self, r: i64) -> Result<StatementReport> {
        let mut rep = self.new_report("ΨΦ", "Ψ ∘ Φ is the identity of V(λ+μ)", r);
        for (alpha, phi) in &self.phi {
            if alpha.height() > r {
                continue;
            }
            rep.instances += 1;
            let Some(psi) = self.psi.get(alpha) else {
                rep.fail(format!("Ψ missing at level {alpha} although Φ is defined"));
                continue;
            };
            let prod = psi.mul(phi);
            if !prod.sub(&QMatrix::identity(prod.rows())).is_zero() {
                rep.fail(format!("Ψ∘Φ differs from the identity at level {alpha}"));
            }
        }
        Ok(rep)
    }

    /// `(Ψ(u), v) = (u, Φ(v))` for every tensor coordinate vector `u` and
    /// every word `v` of `V(λ+μ)`, with the left side evaluated through the
    /// contravariant form on word vectors and the right side through the
    /// blockwise product form on the tensor.
    pub fn check_adjointness(&self, r: i64) -> Result<StatementReport> {
        let mut rep =
            self.new_report("ADJ", "(Ψ(u), v) = (u, Φ(v)) for the product form", r);
        for (alpha, psi) in &self.psi {
            if alpha.height() > r {
                continue;
            }
            let tdim = psi.cols();
            let level = self.v_sum.v_basis(alpha)?;
            let gram_t = self.tensor.gram(alpha)?;
            for j in 0..tdim {
                let mut u = vec![ScalarQ::zero(); tdim];
                u[j] = ScalarQ::one();
                let psi_u = self.psi_vector(alpha, &u)?;
                for w in &level.words {
                    rep.instances += 1;
                    let v = FVector::from_word(w.clone());
                    let lhs = self.v_sum.cform(&psi_u, &v)?;
                    let phi_v = self.phi.get(alpha).map_or_else(
                        || Ok(vec![ScalarQ::zero(); tdim]),
                        |m| level.reduce(&v).map(|c| m.apply(&c)),
                    )?;
                    let rhs = gram_t.apply(&phi_v)[j].clone();
                    if !lhs.sub(&rhs).is_zero() {
                        rep.fail(format!(
                            "adjointness fails at level {alpha} on tensor unit {j} and \
                             word {w}: {lhs} vs {rhs}"
                        ));
                    }
                }
            }
        }
        Ok(rep)
    }

    /// `S(f̃_i w) ≡ f̃_i S(w) mod qL(λ)` for every tensor lattice vector.
    pub fn check_s_projection(&self, r: i64) -> Result<StatementReport> {
        let mut rep =
            self.new_report("S", "S ∘ f̃_i ≡ f̃_i ∘ S modulo qL(λ) on L(λ)⊗L(μ)", r);
        let n = self.datum.n();
        for (alpha, t_lat) in &self.c_tensor.lattices {
            if alpha.height() >= r {
                continue;
            }
            let s_here = self.s_mat(alpha)?;
            for i in 0..n {
                let up = alpha.plus(i);
                if HwModule::dim(&self.tensor, &up)? == 0 {
                    continue;
                }
                let f_t = CrystalModule::tilde_f(&self.tensor, i, alpha)?;
                let f_v = CrystalModule::tilde_f(self.v_lam(), i, alpha)?;
                let s_up = self.s_mat(&up)?;
                let dst_lat = self.c_lam().lattices.get(&up);
                for (k, w) in t_lat.basis().iter().enumerate() {
                    rep.instances += 1;
                    let lhs = s_up.apply(&f_t.apply(w));
                    let rhs = f_v.apply(&s_here.apply(w));
                    let diff = scalar_vec_sub(&lhs, &rhs);
                    let ok = match dst_lat {
                        Some(l) => l.contains_scaled(&diff, 1),
                        None => scalar_vec_zero(&diff),
                    };
                    if !ok {
                        rep.fail(format!(
                            "S∘f̃_{i} − f̃_{i}∘S on tensor lattice vector {k} at level \
                             {alpha} is {} ∉ qL(λ)",
                            fmt_scalars(&diff)
                        ));
                    }
                }
            }
        }
        Ok(rep)
    }

    /// Structural sanity of the five computed graphs plus the weight-space
    /// constraints of the three highest-weight modules.
    pub fn check_graph_sanity(&self) -> StatementReport {
        let mut rep = self.new_report(
            "GRAPH",
            "computed crystal graphs validate and weight constraints hold",
            self.depth,
        );
        let graphs = [
            ("B(∞)", &self.binf.graph),
            ("B(λ)", &self.c_lam().graph),
            ("B(μ)", &self.c_mu().graph),
            ("B(λ+μ)", &self.c_sum.graph),
            ("B(λ)⊗B(μ)", &self.c_tensor.graph),
        ];
        for (tag, g) in graphs {
            rep.instances += 1;
            if let Err(e) = validate_graph(g) {
                rep.fail(format!("{tag} graph fails validation: {e}"));
            }
        }
        let modules = [("V(λ)", self.v_lam()), ("V(μ)", self.v_mu()), ("V(λ+μ)", &self.v_sum)];
        for (tag, m) in modules {
            rep.instances += 1;
            for v in m.weight_constraint_violations() {
                rep.fail(format!("{tag}: {v}"));
            }
        }
        rep
    }

    /// Negative control: rescale one stored lattice basis vector of
    /// `L(λ+μ)` at a height-one level by `q`, so that downstream statement
    /// checks must produce failure witnesses. Returns a description of the
    /// corruption.
    pub fn corrupt_sum_lattice(&mut self) -> Result<String> {
        let alpha = self
            .c_sum
            .lattices
            .keys()
            .find(|a| a.height() == 1)
            .cloned()
            .ok_or_else(|| Error::Config("no height-one level available to corrupt".into()))?;
        let mut basis = self.c_sum.lattices[&alpha].basis().to_vec();
        basis[0] = basis[0].iter().map(|c| c.mul(&ScalarQ::q_pow(1))).collect();
        self.c_sum.lattices.insert(alpha.clone(), DvrLattice::from_basis(basis)?);
        Ok(format!(
            "rescaled lattice basis vector 0 of L({:?}) at level {alpha} by q",
            self.sum_lam()
        ))
    }
}

/// Statement A/H: `ẽ_i` maps every lattice basis vector back into the
/// lattice one level up (or to zero where the module vanishes).
fn stability_under_e(
    m: &dyn CrystalModule,
    data: &CrystalData,
    r: i64,
    tag: &str,
    rep: &mut StatementReport,
) -> Result<()> {
    let n = m.datum().n();
    for (alpha, lat) in &data.lattices {
        let h = alpha.height();
        if h == 0 || h > r {
            continue;
        }
        for i in 0..n {
            let Some(down) = alpha.minus(i) else { continue };
            let e = m.tilde_e(i, alpha)?;
            let dst = data.lattices.get(&down);
            for (k, b) in lat.basis().iter().enumerate() {
                rep.instances += 1;
                let img = e.apply(b);
                let ok = match dst {
                    Some(d) => d.contains(&img),
                    None => scalar_vec_zero(&img),
                };
                if !ok {
                    rep.fail(format!(
                        "{tag}: ẽ_{i} of lattice vector {k} at level {alpha} leaves the \
                         lattice: {}",
                        fmt_scalars(&img)
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Statement B/I: the residue of `ẽ_i` sends every crystal element to a
/// crystal element or to zero.
fn nodes_under_e(
    m: &dyn CrystalModule,
    data: &CrystalData,
    r: i64,
    tag: &str,
    rep: &mut StatementReport,
) -> Result<()> {
    static EMPTY: Vec<Vec<Rat>> = Vec::new();
    let n = m.datum().n();
    for (alpha, nodes) in &data.nodes {
        let h = alpha.height();
        if h == 0 || h > r {
            continue;
        }
        let src_lat = &data.lattices[alpha];
        for i in 0..n {
            let Some(down) = alpha.minus(i) else { continue };
            match data.lattices.get(&down) {
                Some(dst_lat) => {
                    let e = m.tilde_e(i, alpha)?;
                    let ebar = match modrep::residue_map(&e, src_lat, dst_lat) {
                        Ok(x) => x,
                        Err(err) => {
                            rep.instances += nodes.len();
                            rep.fail(format!(
                                "{tag}: residue of ẽ_{i} undefined at level {alpha}: {err}"
                            ));
                            continue;
                        }
                    };
                    let down_nodes = data.nodes.get(&down).unwrap_or(&EMPTY);
                    for (k, b) in nodes.iter().enumerate() {
                        rep.instances += 1;
                        let img = apply_rat(&ebar, b);
                        if !rat_vec_zero(&img) && !down_nodes.contains(&img) {
                            rep.fail(format!(
                                "{tag}: ẽ_{i} of element {k} at level {alpha} has residue \
                                 {}, neither zero nor a crystal element",
                                fmt_rats(&img)
                            ));
                        }
                    }
                }
                // ẽ_i lands in a vanishing level, so it is zero on the nose.
                None => rep.instances += nodes.len(),
            }
        }
    }
    Ok(())
}

/// Statement C: for all element pairs one level apart,
/// `f̃_i b = b′ ⟺ b = ẽ_i b′`.
fn ef_pairing(
    m: &dyn CrystalModule,
    data: &CrystalData,
    r: i64,
    tag: &str,
    rep: &mut StatementReport,
) -> Result<()> {
    let n = m.datum().n();
    for (alpha, up_nodes) in &data.nodes {
        let h = alpha.height();
        if h == 0 || h > r {
            continue;
        }
        for i in 0..n {
            let Some(down) = alpha.minus(i) else { continue };
            let (Some(down_nodes), Some(down_lat)) =
                (data.nodes.get(&down), data.lattices.get(&down))
            else {
                continue;
            };
            let up_lat = &data.lattices[alpha];
            let fbar = match modrep::residue_map(&m.tilde_f(i, &down)?, down_lat, up_lat) {
                Ok(x) => x,
                Err(err) => {
                    rep.instances += down_nodes.len() * up_nodes.len();
                    rep.fail(format!(
                        "{tag}: residue of f̃_{i} undefined at level {down}: {err}"
                    ));
                    continue;
                }
            };
            let ebar = match modrep::residue_map(&m.tilde_e(i, alpha)?, up_lat, down_lat) {
                Ok(x) => x,
                Err(err) => {
                    rep.instances += down_nodes.len() * up_nodes.len();
                    rep.fail(format!(
                        "{tag}: residue of ẽ_{i} undefined at level {alpha}: {err}"
                    ));
                    continue;
                }
            };
            for (kb, b) in down_nodes.iter().enumerate() {
                let fb = apply_rat(&fbar, b);
                for (kc, c) in up_nodes.iter().enumerate() {
                    rep.instances += 1;
                    let forward = fb == *c;
                    let backward = apply_rat(&ebar, c) == *b;
                    if forward != backward {
                        rep.fail(format!(
                            "{tag}: f̃_{i}/ẽ_{i} pairing broken between element {kb} at \
                             {down} and element {kc} at {alpha}: f̃b={} e͂b′={}",
                            fmt_rats(&fb),
                            fmt_rats(&apply_rat(&ebar, c))
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Statement J: on `B(∞)`, `b = f̃_i ẽ_i b` whenever `ẽ_i b ≠ 0`.
fn ef_closure(
    m: &dyn CrystalModule,
    data: &CrystalData,
    r: i64,
    rep: &mut StatementReport,
) -> Result<()> {
    let n = m.datum().n();
    for (alpha, nodes) in &data.nodes {
        let h = alpha.height();
        if h == 0 || h > r {
            continue;
        }
        for i in 0..n {
            let Some(down) = alpha.minus(i) else { continue };
            let Some(down_lat) = data.lattices.get(&down) else { continue };
            let up_lat = &data.lattices[alpha];
            let ebar = modrep::residue_map(&m.tilde_e(i, alpha)?, up_lat, down_lat)?;
            let fbar = modrep::residue_map(&m.tilde_f(i, &down)?, down_lat, up_lat)?;
            for (k, b) in nodes.iter().enumerate() {
                let eb = apply_rat(&ebar, b);
                if rat_vec_zero(&eb) {
                    continue;
                }
                rep.instances += 1;
                let back = apply_rat(&fbar, &eb);
                if back != *b {
                    rep.fail(format!(
                        "f̃_{i} ẽ_{i} of element {k} at level {alpha} returns {}, not the \
                         element {}",
                        fmt_rats(&back),
                        fmt_rats(b)
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Statement D/K: at every level the stored crystal residues are exactly a
/// ℚ-basis of lattice-modulo-q.
fn basis_of_quotient(data: &CrystalData, r: i64, tag: &str, rep: &mut StatementReport) {
    for (alpha, nodes) in &data.nodes {
        if alpha.height() > r {
            continue;
        }
        let dim = data.lattices[alpha].dim();
        rep.instances += 1;
        if nodes.len() != dim {
            rep.fail(format!(
                "{tag}: level {alpha} has {} crystal elements for a rank-{dim} lattice",
                nodes.len()
            ));
            continue;
        }
        if rat_rank(nodes.clone()) != dim {
            rep.fail(format!(
                "{tag}: crystal residues at level {alpha} are linearly dependent over ℚ"
            ));
        }
    }
}

/// Congruence between the form on the negative half and the contravariant
/// form on a large-weight module: for all words `P, Q` of weight `α`,
/// `(P,Q) − Π_k (1−q_{i_k}²) · (Pv_λ, Qv_λ)` must vanish to order `m` at
/// `q = 0`, where the product runs over the letters of `α` with
/// multiplicity. The weight must be taken large (every pairing at least
/// `lambda_bound` recorded in the report) for the congruence to hold.
pub fn check_pq_congruence(
    datum: &BorcherdsCartanDatum,
    height: i64,
    m: i64,
    lam: &[i64],
) -> Result<StatementReport> {
    let um = UmAlgebra::new(datum.clone(), height)?;
    let vm = VModule::new(datum.clone(), lam.to_vec(), height)?;
    let mut rep = StatementReport::new(
        "PQ",
        format!("(P,Q) ≡ Π(1−q_i²)·(Pv_λ, Qv_λ) mod q^{m} for large λ"),
        datum,
        lam.to_vec(),
        None,
        height,
    );
    for alpha in datum.alphas_to_depth(height) {
        if alpha.height() == 0 {
            continue;
        }
        let words = &um.level(&alpha)?.words;
        let mut factor = ScalarQ::one();
        for (i, &k) in alpha.0.iter().enumerate() {
            let unit = ScalarQ::one().sub(&ScalarQ::q_pow(2 * datum.s(i)));
            factor = factor.mul(&unit.pow(k));
        }
        for (a, wa) in words.iter().enumerate() {
            let p = FVector::from_word(wa.clone());
            for wb in words.iter().skip(a) {
                let qv = FVector::from_word(wb.clone());
                let c_inf = kform(datum, &p, &qv);
                let c_lam = vm.cform(&p, &qv)?;
                let diff = c_inf.sub(&factor.mul(&c_lam));
                rep.instances += 1;
                if !diff.val0_at_least(m) {
                    rep.fail(format!(
                        "congruence fails at level {alpha} for P={wa}, Q={wb}: \
                         difference {diff}"
                    ));
                }
            }
        }
    }
    Ok(rep)
}

/// Factorization of a Kashiwara-operator word into a pure tensor: with the
/// sequence ending in a constant run `i_{t+1} = ⋯ = i_r` and `λ` the
/// fundamental weight at the last position `t` before that run,
/// `f̃_{i_1} ⋯ f̃_{i_r}(v_λ ⊗ v_μ)` must be congruent mod `qL(λ)⊗L(μ)` to a
/// crystal element of the product (a pure tensor) or to zero.
pub fn check_key_factorization(
    datum: &BorcherdsCartanDatum,
    seq: &[usize],
    mu: &[i64],
) -> Result<StatementReport> {
    let r = seq.len();
    let last = *seq.last().ok_or_else(|| Error::Config("empty operator sequence".into()))?;
    let t = seq
        .iter()
        .rposition(|&i| i != last)
        .ok_or_else(|| Error::Config("constant operator sequence has no admissible split".into()))?;
    let n = datum.n();
    let mut lam = vec![0; n];
    lam[seq[t]] = 1;
    let tensor = TensorModule::new(datum, &lam, mu, r as i64)?;
    let data = tensor.crystal()?;
    let mut rep = StatementReport::new(
        "KEY",
        "f̃-words on v_λ ⊗ v_μ factor into pure tensors mod qL⊗L for fundamental λ",
        datum,
        lam.clone(),
        Some(mu.to_vec()),
        r as i64,
    );
    rep.instances += 1;
    let mut alpha = RootVec::zero(n);
    let mut v = vec![ScalarQ::one()];
    for &i in seq.iter().rev() {
        let up = alpha.plus(i);
        if HwModule::dim(&tensor, &up)? == 0 {
            // The word annihilates the tensor vector, which the statement
            // allows (the pure tensor may be zero).
            return Ok(rep);
        }
        v = CrystalModule::tilde_f(&tensor, i, &alpha)?.apply(&v);
        alpha = up;
    }
    if scalar_vec_zero(&v) {
        return Ok(rep);
    }
    static EMPTY: Vec<Vec<Rat>> = Vec::new();
    let Some(lat) = data.lattices.get(&alpha) else {
        rep.fail(format!("no lattice at level {alpha} despite a nonzero image"));
        return Ok(rep);
    };
    match lat.residue(&v) {
        Err(_) => rep.fail(format!(
            "f̃-word image at level {alpha} leaves L(λ)⊗L(μ): {}",
            fmt_scalars(&v)
        )),
        Ok(res) => {
            let nodes = data.nodes.get(&alpha).unwrap_or(&EMPTY);
            if !rat_vec_zero(&res) && !nodes.contains(&res) {
                rep.fail(format!(
                    "f̃-word image at level {alpha} has residue {}, not a pure tensor",
                    fmt_rats(&res)
                ));
            }
        }
    }
    Ok(rep)
}

/// All rank-two factorization sequences `[i, j, j]` with `i ≠ j`, folded
/// into one report.
pub fn check_key_factorizations(
    datum: &BorcherdsCartanDatum,
    mu: &[i64],
) -> Result<StatementReport> {
    let n = datum.n();
    let mut total = StatementReport::new(
        "KEY",
        "f̃-words on v_λ ⊗ v_μ factor into pure tensors mod qL⊗L for fundamental λ",
        datum,
        vec![],
        Some(mu.to_vec()),
        3,
    );
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let rep = check_key_factorization(datum, &[i, j, j], mu)?;
            total.instances += rep.instances;
            let suppressed = rep.failure_count - rep.failures.len();
            for f in rep.failures {
                total.fail(format!("sequence [{i}, {j}, {j}]: {f}"));
            }
            total.failure_count += suppressed;
        }
    }
    Ok(total)
}

/// One verification case: a datum with a pair of dominant weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteCase {
    /// Built-in datum name or path to a datum file (JSON/TOML).
    pub datum: String,
    pub lambda: Vec<i64>,
    pub mu: Vec<i64>,
    /// Negative control: corrupt a stored lattice before checking, and
    /// expect failure witnesses.
    #[serde(default)]
    pub corrupt_lattice: bool,
}

/// Suite configuration, loadable from JSON or TOML.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteConfig {
    #[serde(default = "default_depth")]
    pub depth: i64,
    /// Statement letters to check; absent means all fifteen.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statements: Option<Vec<String>>,
    /// Pairing bound used for the large weight in the form congruence;
    /// absent means `depth + 2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_bound: Option<i64>,
    /// Congruence order `m` for the form comparison.
    #[serde(default = "default_pq_order")]
    pub pq_order: i64,
    #[serde(default)]
    pub case: Vec<SuiteCase>,
}

fn default_depth() -> i64 {
    3
}

fn default_pq_order() -> i64 {
    2
}

impl SuiteConfig {
    /// The default matrix: four built-in data at depth 3.
    pub fn default_config() -> Self {
        let case = |datum: &str, lambda: Vec<i64>, mu: Vec<i64>| SuiteCase {
            datum: datum.into(),
            lambda,
            mu,
            corrupt_lattice: false,
        };
        Self {
            depth: 3,
            statements: None,
            lambda_bound: None,
            pq_order: 2,
            case: vec![
                case("sl2", vec![2], vec![1]),
                case("imag2", vec![1], vec![1]),
                case("gkm2", vec![1, 1], vec![0, 1]),
                case("monster3", vec![1, 1, 0], vec![0, 0, 1]),
            ],
        }
    }

    /// Load from a file; `.json` is parsed as JSON, anything else as TOML.
    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("bad suite config {}: {e}", path.display())))
        } else {
            toml::from_str(&text)
                .map_err(|e| Error::Config(format!("bad suite config {}: {e}", path.display())))
        }
    }
}

/// Load a datum by built-in name or from a JSON/TOML file.
pub fn resolve_datum(source: &str) -> Result<BorcherdsCartanDatum> {
    if let Some(d) = builtin(source) {
        return Ok(d);
    }
    let path = std::path::Path::new(source);
    if !path.exists() {
        return Err(Error::Config(format!(
            "`{source}` is neither a built-in datum name nor an existing file"
        )));
    }
    let text = std::fs::read_to_string(path)?;
    let cfg: DatumConfig = if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text)
            .map_err(|e| Error::Config(format!("bad datum file {source}: {e}")))?
    } else {
        serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("bad datum file {source}: {e}")))?
    };
    BorcherdsCartanDatum::from_config(cfg)
}

/// Results for one suite case.
#[derive(Debug, Clone, Serialize)]
pub struct CaseReport {
    pub datum: String,
    pub datum_hash: String,
    pub lambda: Vec<i64>,
    pub mu: Vec<i64>,
    pub negative_control: bool,
    /// What was corrupted, for negative controls.
    pub corruption: Option<String>,
    pub reports: Vec<StatementReport>,
    /// For a regular case: every report passed. For a negative control:
    /// the corruption produced at least one failure witness.
    pub passed: bool,
}

/// Aggregate results for a suite run.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub depth: i64,
    pub lambda_bound: i64,
    pub pq_order: i64,
    pub statements: Vec<String>,
    pub notes: Vec<String>,
    pub cases: Vec<CaseReport>,
    pub passed: bool,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("suite report serializes");
        s.push('\n');
        s
    }

    /// Human-readable rendering, one line per check plus witnesses.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "verification suite: depth {}, λ-bound {}, congruence order {}",
            self.depth, self.lambda_bound, self.pq_order
        );
        for note in &self.notes {
            let _ = writeln!(out, "note: {note}");
        }
        for case in &self.cases {
            let _ = writeln!(
                out,
                "case {} λ={:?} μ={:?}{}",
                case.datum,
                case.lambda,
                case.mu,
                if case.negative_control { " (negative control)" } else { "" }
            );
            if let Some(c) = &case.corruption {
                let _ = writeln!(out, "  corruption: {c}");
            }
            for rep in &case.reports {
                let status = if rep.vacuous() {
                    "VACUOUS"
                } else if rep.failure_count == 0 {
                    "ok"
                } else {
                    "FAIL"
                };
                let _ = writeln!(
                    out,
                    "  {:<6} {:<72} {:>6} instances  {status}",
                    rep.id, rep.description, rep.instances
                );
                for f in &rep.failures {
                    let _ = writeln!(out, "         witness: {f}");
                }
                if rep.failure_count > rep.failures.len() {
                    let _ = writeln!(
                        out,
                        "         ({} further failures suppressed)",
                        rep.failure_count - rep.failures.len()
                    );
                }
            }
            let _ = writeln!(out, "  case result: {}", if case.passed { "pass" } else { "FAIL" });
        }
        let _ = writeln!(out, "suite result: {}", if self.passed { "PASS" } else { "FAIL" });
        if !self.passed {
            let _ = writeln!(
                out,
                "statement failures witness implementation bugs in the computed objects, \
                 not mathematical counterexamples"
            );
        }
        out
    }
}

fn resolve_statements(config: &SuiteConfig) -> Result<Vec<StatementId>> {
    match &config.statements {
        None => Ok(StatementId::ALL.to_vec()),
        Some(list) => list
            .iter()
            .map(|s| {
                StatementId::parse(s)
                    .ok_or_else(|| Error::Config(format!("unknown statement id `{s}`")))
            })
            .collect(),
    }
}

fn run_case(
    case: &SuiteCase,
    depth: i64,
    ids: &[StatementId],
    lambda_bound: i64,
    pq_order: i64,
) -> Result<CaseReport> {
    let datum = resolve_datum(&case.datum)?;
    let mut ws = Workspace::new(datum.clone(), case.lambda.clone(), case.mu.clone(), depth)?;
    let corruption =
        if case.corrupt_lattice { Some(ws.corrupt_sum_lattice()?) } else { None };
    // Statement checks are independent jobs over the shared read-only
    // workspace.
    let mut reports: Vec<StatementReport> = ids
        .par_iter()
        .map(|id| ws.check_statement(*id, depth))
        .collect::<Result<Vec<_>>>()?;
    reports.push(ws.check_psi_phi_identity(depth)?);
    reports.push(ws.check_adjointness(depth)?);
    reports.push(ws.check_s_projection(depth)?);
    reports.push(ws.check_graph_sanity());
    let big = vec![lambda_bound; datum.n()];
    reports.push(check_pq_congruence(&datum, depth.min(2), pq_order, &big)?);
    if datum.n() >= 2 {
        reports.push(check_key_factorizations(&datum, &case.mu)?);
    }
    let clean = reports.iter().all(StatementReport::passed);
    let witnessed = reports.iter().any(|r| r.failure_count > 0);
    Ok(CaseReport {
        datum: case.datum.clone(),
        datum_hash: datum.content_hash(),
        lambda: case.lambda.clone(),
        mu: case.mu.clone(),
        negative_control: case.corrupt_lattice,
        corruption,
        reports,
        passed: if case.corrupt_lattice { witnessed } else { clean },
    })
}

/// Run a configured matrix of verification cases. The aggregate passes
/// when every regular case is failure-free and nonvacuous and every
/// negative control produces a witness.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    let ids = resolve_statements(config)?;
    let lambda_bound = config.lambda_bound.unwrap_or(config.depth + 2);
    let mut notes = Vec::new();
    if ids.is_empty() {
        notes.push("no statements selected; the suite is vacuous".to_string());
    }
    if config.case.is_empty() {
        notes.push("no cases configured; the suite is vacuous".to_string());
    }
    let cases: Vec<CaseReport> = config
        .case
        .iter()
        .map(|c| run_case(c, config.depth, &ids, lambda_bound, config.pq_order))
        .collect::<Result<Vec<_>>>()?;
    let passed = !ids.is_empty() && !cases.is_empty() && cases.iter().all(|c| c.passed);
    Ok(SuiteReport {
        depth: config.depth,
        lambda_bound,
        pq_order: config.pq_order,
        statements: ids.iter().map(|i| i.letter().to_string()).collect(),
        notes,
        cases,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::builtin;

    fn ws(name: &str, lam: Vec<i64>, mu: Vec<i64>, depth: i64) -> Workspace {
        Workspace::new(builtin(name).unwrap(), lam, mu, depth).unwrap()
    }

    #[test]
    fn phi_sends_the_highest_weight_vector_to_the_pure_tensor() {
        let w = ws("sl2", vec![1], vec![1], 2);
        let (alpha, img) = w.phi(&FVector::one()).unwrap();
        assert_eq!(alpha, RootVec::zero(1));
        assert_eq!(img.len(), 1);
        assert!(img[0].is_one());
    }

    #[test]
    fn phi_expands_one_letter_by_the_comultiplication() {
        // f(v_λ ⊗ v_μ) = fv_λ ⊗ v_μ + q^{λ(h)} v_λ ⊗ fv_μ with λ(h) = 1.
        let w = ws("sl2", vec![1], vec![1], 2);
        let (alpha, img) = w.phi(&FVector::from_word(Word::single(0))).unwrap();
        assert_eq!(alpha, RootVec(vec![1]));
        // Splits are ordered by the left weight, so (0, α_0) comes first.
        assert_eq!(img.len(), 2);
        assert!(img[0].sub(&ScalarQ::q_pow(1)).is_zero());
        assert!(img[1].is_one());
    }

    #[test]
    fn psi_inverts_phi_levelwise() {
        let w = ws("gkm2", vec![1, 1], vec![0, 1], 2);
        let mut checked = 0;
        for (alpha, phi) in &w.phi {
            let psi = &w.psi[alpha];
            let prod = psi.mul(phi);
            assert!(prod.sub(&QMatrix::identity(prod.rows())).is_zero(), "level {alpha}");
            checked += 1;
        }
        assert!(checked >= 4);
        assert!(w.check_psi_phi_identity(2).unwrap().passed());
    }

    #[test]
    fn psi_sends_the_pure_tensor_to_the_highest_weight_vector() {
        let w = ws("gkm2", vec![1, 1], vec![0, 1], 2);
        let out = w.psi(&RootVec::zero(2), &[ScalarQ::one()]).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out[0].is_one());
    }

    #[test]
    fn adjointness_holds_against_the_contravariant_form() {
        let w = ws("gkm2", vec![1, 1], vec![0, 1], 2);
        let rep = w.check_adjointness(2).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures);
        assert!(rep.instances > 10);
    }

    #[test]
    fn s_projects_onto_the_first_factor() {
        let w = ws("gkm2", vec![1, 1], vec![0, 1], 2);
        let alpha = RootVec(vec![1, 0]);
        // u ⊗ v_μ ↦ u for the basis vector u of V(λ) at level α_0.
        let u = vec![ScalarQ::one()];
        let emb = w.tensor().embed(&alpha, &u, &RootVec::zero(2), &[ScalarQ::one()]).unwrap();
        assert_eq!(w.s_apply(&alpha, &emb).unwrap(), u);
        // v_λ ⊗ f_0 v_μ ↦ 0: the split with a lowered right factor dies.
        let emb2 = w.tensor().embed(&RootVec::zero(2), &[ScalarQ::one()], &alpha, &u);
        if let Ok(e2) = emb2 {
            assert!(scalar_vec_zero(&w.s_apply(&alpha, &e2).unwrap()));
        }
        // And f_1 v_μ, which is nonzero for μ = (0,1).
        let alpha1 = RootVec(vec![0, 1]);
        let emb3 = w
            .tensor()
            .embed(&RootVec::zero(2), &[ScalarQ::one()], &alpha1, &[ScalarQ::one()])
            .unwrap();
        assert!(scalar_vec_zero(&w.s_apply(&alpha1, &emb3).unwrap()));
    }

    #[test]
    fn s_commutes_with_tilde_f_modulo_q() {
        let w = ws("gkm2", vec![1, 1], vec![0, 1], 2);
        let rep = w.check_s_projection(2).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures);
        assert!(rep.instances > 0);
    }

    #[test]
    fn all_statements_hold_for_sl2() {
        let w = ws("sl2", vec![2], vec![1], 3);
        for id in StatementId::ALL {
            let rep = w.check_statement(id, 3).unwrap();
            assert!(
                rep.passed(),
                "statement {} failed: vacuous={} failures={:?}",
                rep.id,
                rep.vacuous(),
                rep.failures
            );
        }
    }

    #[test]
    fn all_statements_hold_for_the_rank_two_datum() {
        let w = ws("gkm2", vec![1, 1], vec![0, 1], 3);
        for id in StatementId::ALL {
            let rep = w.check_statement(id, 3).unwrap();
            assert!(
                rep.passed(),
                "statement {} failed: vacuous={} failures={:?}",
                rep.id,
                rep.vacuous(),
                rep.failures
            );
        }
    }

    #[test]
    fn statement_l_counts_one_instance_per_weight_in_rank_one() {
        let w = ws("sl2", vec![3], vec![0], 3);
        let rep = w.check_statement(StatementId::L, 3).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.instances, 3);
    }

    #[test]
    fn statement_n_keeps_only_the_identity_for_a_trivial_module() {
        // For a_11 = 0 and λ(h) = 0 the module V(λ) is trivial, so only the
        // empty word survives P ↦ P v_λ mod q and B(λ) is a singleton.
        let w = ws("heis", vec![0], vec![0], 3);
        let rep = w.check_statement(StatementId::N, 3).unwrap();
        assert!(rep.failure_count == 0, "{:?}", rep.failures);
        // One instance per B(∞) element: the empty word plus one per level.
        assert_eq!(rep.instances, 4);
    }

    #[test]
    fn statement_o_holds_on_the_rank_two_datum() {
        let w = ws("gkm2", vec![1, 1], vec![0, 1], 3);
        let rep = w.check_statement(StatementId::O, 3).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures);
        assert!(rep.instances > 0);
    }

    #[test]
    fn pq_congruence_holds_for_large_weights() {
        for name in ["sl2", "gkm2"] {
            let datum = builtin(name).unwrap();
            let lam = vec![6; datum.n()];
            for m in [2, 3] {
                let rep = check_pq_congruence(&datum, 2, m, &lam).unwrap();
                assert!(rep.passed(), "{name} m={m}: {:?}", rep.failures);
                assert!(rep.instances > 0);
            }
        }
    }

    #[test]
    fn pq_congruence_detects_small_weights() {
        // With λ(h) = 1 the error term q^{2⟨h,λ⟩} is visible mod q^3.
        let datum = builtin("sl2").unwrap();
        let rep = check_pq_congruence(&datum, 1, 3, &[1]).unwrap();
        assert!(rep.failure_count > 0);
    }

    #[test]
    fn key_factorization_produces_pure_tensors() {
        let gkm2 = builtin("gkm2").unwrap();
        let rep = check_key_factorizations(&gkm2, &[1, 1]).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures);
        assert_eq!(rep.instances, 2);
        let rep = check_key_factorization(&gkm2, &[1, 0, 0], &[0, 1]).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures);
    }

    #[test]
    fn key_factorization_rejects_constant_sequences() {
        let gkm2 = builtin("gkm2").unwrap();
        assert!(check_key_factorization(&gkm2, &[0, 0, 0], &[1, 1]).is_err());
    }

    #[test]
    fn suite_passes_on_a_small_matrix() {
        let config = SuiteConfig {
            depth: 2,
            statements: None,
            lambda_bound: None,
            pq_order: 2,
            case: vec![
                SuiteCase {
                    datum: "sl2".into(),
                    lambda: vec![2],
                    mu: vec![1],
                    corrupt_lattice: false,
                },
                SuiteCase {
                    datum: "gkm2".into(),
                    lambda: vec![1, 1],
                    mu: vec![0, 1],
                    corrupt_lattice: false,
                },
            ],
        };
        let report = run_suite(&config).unwrap();
        assert!(report.passed, "{}", report.render_text());
        let text = report.render_text();
        assert!(text.contains("suite result: PASS"));
        let json = report.to_json();
        assert!(json.contains("\"passed\": true"));
    }

    #[test]
    fn corrupted_lattice_yields_failure_witnesses() {
        let config = SuiteConfig {
            depth: 2,
            statements: None,
            lambda_bound: None,
            pq_order: 2,
            case: vec![SuiteCase {
                datum: "sl2".into(),
                lambda: vec![1],
                mu: vec![1],
                corrupt_lattice: true,
            }],
        };
        let report = run_suite(&config).unwrap();
        // The control must produce witnesses, which counts as the expected
        // outcome for the suite.
        assert!(report.passed, "{}", report.render_text());
        let case = &report.cases[0];
        assert!(case.negative_control);
        let witnessed: usize = case.reports.iter().map(|r| r.failure_count).sum();
        assert!(witnessed > 0);
        assert!(case.reports.iter().any(|r| !r.failures.is_empty()));
    }

    #[test]
    fn empty_statement_selection_is_flagged() {
        let config = SuiteConfig {
            depth: 2,
            statements: Some(vec![]),
            lambda_bound: None,
            pq_order: 2,
            case: vec![SuiteCase {
                datum: "sl2".into(),
                lambda: vec![1],
                mu: vec![0],
                corrupt_lattice: false,
            }],
        };
        let report = run_suite(&config).unwrap();
        assert!(!report.passed);
        assert!(report.notes.iter().any(|n| n.contains("vacuous")));
    }

    #[test]
    fn suite_config_round_trips_through_toml() {
        let config = SuiteConfig::default_config();
        let text = toml::to_string(&config).unwrap();
        let back: SuiteConfig = toml::from_str(&text).unwrap();
        assert_eq!(back.depth, 3);
        assert_eq!(back.case.len(), 4);
        assert_eq!(back.case[2].datum, "gkm2");
    }

    #[test]
    fn statement_ids_parse_and_describe() {
        assert_eq!(StatementId::parse("a"), Some(StatementId::A));
        assert_eq!(StatementId::parse("O"), Some(StatementId::O));
        assert_eq!(StatementId::parse("x"), None);
        assert_eq!(StatementId::parse("AB"), None);
        for id in StatementId::ALL {
            assert!(!id.describe().is_empty());
        }
    }
}
