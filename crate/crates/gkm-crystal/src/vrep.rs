//! The irreducible highest-weight module `V(λ)`: weight spaces as word spans
//! modulo the radical of the contravariant form, the actions of `e_i` and
//! `f_i`, i-string decompositions and Kashiwara operators, the crystal
//! `(L(λ), B(λ))`, and the projection `π_λ` from the negative half.

use crate::cartan::{BorcherdsCartanDatum, RootVec};
use crate::freealg::{enumerate_words_by_weight, FVector, UmAlgebra, Word, WordLevel};
use crate::modrep::{
    self, build_crystal, CrystalData, CrystalModule, HwModule, ModuleLabel,
};
use crate::qarith::{DvrLattice, QMatrix, Rat, ScalarQ};
use crate::{Error, Result};
use std::collections::{BTreeMap, HashMap};

/// `e_i` applied to a word acting on the highest-weight vector, by commuting
/// `e_i` through the letters (`e_i f_j − f_j e_i = δ_ij (K_i − K_i^{-1})/(q_i − q_i^{-1})`,
/// with `K_i` evaluated as `q_i^{⟨h_i, μ⟩}` on each intermediate weight) and
/// killing `e_i v_λ`.
pub fn apply_e_word(
    datum: &BorcherdsCartanDatum,
    lam: &[i64],
    i: usize,
    w: &Word,
) -> FVector {
    if w.is_empty() {
        return FVector::zero();
    }
    let j = w.0[0];
    let rest = Word(w.0[1..].to_vec());
    let mut out = apply_e_word(datum, lam, i, &rest).left_mul(j);
    if i == j {
        let alpha_rest = datum.weight_of_word(&rest.0);
        let p = datum.pairing(i, lam, &alpha_rest);
        out.add_term(rest, datum.qint(p, i));
    }
    out
}

/// `e_i` extended linearly to word vectors.
pub fn apply_e_vector(
    datum: &BorcherdsCartanDatum,
    lam: &[i64],
    i: usize,
    v: &FVector,
) -> FVector {
    let mut out = FVector::zero();
    for (w, c) in v.iter() {
        let image = apply_e_word(datum, lam, i, w);
        out = out.add(&image.scale(c));
    }
    out
}

/// Memoized contravariant form on words acting on `v_λ`:
/// `(v_λ, v_λ) = 1` and `(f_i u, v) = (u, q_i^{-1} K_i e_i v)`.
struct CformCache {
    map: HashMap<(Word, Word), ScalarQ>,
}

impl CformCache {
    fn new() -> Self {
        Self { map: HashMap::new() }
    }

    fn word_pair(
        &mut self,
        datum: &BorcherdsCartanDatum,
        lam: &[i64],
        w: &Word,
        v: &Word,
    ) -> ScalarQ {
        if datum.weight_of_word(&w.0) != datum.weight_of_word(&v.0) {
            return ScalarQ::zero();
        }
        if w.is_empty() {
            return ScalarQ::one();
        }
        let key = if w <= v { (w.clone(), v.clone()) } else { (v.clone(), w.clone()) };
        if let Some(hit) = self.map.get(&key) {
            return hit.clone();
        }
        let i = w.0[0];
        let rest = Word(w.0[1..].to_vec());
        // (f_i rest, v) = q_i^{⟨h_i, λ−α(v)+α_i⟩−1} (rest, e_i v).
        let alpha_down = datum
            .weight_of_word(&v.0)
            .minus(i)
            .expect("matching weights contain the letter");
        let p = datum.pairing(i, lam, &alpha_down);
        let ev = apply_e_word(datum, lam, i, v);
        let mut acc = ScalarQ::zero();
        for (word, c) in ev.iter() {
            if c.is_zero() {
                continue;
            }
            acc = acc.add(&c.mul(&self.word_pair(datum, lam, &rest, word)));
        }
        let val = datum.qi_pow(i, p - 1).mul(&acc);
        self.map.insert(key, val.clone());
        val
    }
}

/// The module `V(λ)` computed through a fixed depth: weight spaces modulo
/// the contravariant-form radical, `e_i`/`f_i` matrices, strings, Kashiwara
/// operators, and the crystal.
pub struct VModule {
    datum: BorcherdsCartanDatum,
    lam: Vec<i64>,
    depth: i64,
    levels: BTreeMap<RootVec, WordLevel>,
    f_mats: HashMap<(usize, RootVec), QMatrix>,
    e_mats: HashMap<(usize, RootVec), QMatrix>,
}

impl VModule {
    pub fn new(datum: BorcherdsCartanDatum, lam: Vec<i64>, depth: i64) -> Result<Self> {
        assert!(depth >= 0);
        let n = datum.n();
        if lam.len() != n {
            return Err(Error::Config(format!(
                "highest weight has {} entries for a rank-{n} datum",
                lam.len()
            )));
        }
        if let Some(i) = (0..n).find(|&i| lam[i] < 0) {
            return Err(Error::NotDominant(format!(
                "λ(h_{i}) = {} is negative",
                lam[i]
            )));
        }

        let mut words_by_alpha = enumerate_words_by_weight(&datum, depth);
        let mut cache = CformCache::new();
        let mut levels = BTreeMap::new();
        for alpha in datum.alphas_to_depth(depth) {
            let words = words_by_alpha.remove(&alpha).expect("enumerated");
            let level = WordLevel::from_words(alpha.clone(), words, |w, v| {
                cache.word_pair(&datum, &lam, w, v)
            })?;
            levels.insert(alpha, level);
        }

        let mut module =
            Self { datum, lam, depth, levels, f_mats: HashMap::new(), e_mats: HashMap::new() };
        module.precompute_maps()?;
        module.assert_weight_constraints()?;
        Ok(module)
    }

    fn precompute_maps(&mut self) -> Result<()> {
        let n = self.datum.n();
        let mut f_mats = HashMap::new();
        let mut e_mats = HashMap::new();
        for (alpha, level) in &self.levels {
            let dim = level.dim();
            for i in 0..n {
                let up = alpha.plus(i);
                if let Some(target) = self.levels.get(&up) {
                    let mut cols = Vec::with_capacity(dim);
                    for w in level.basis_words() {
                        cols.push(target.reduce(&FVector::from_word(w.prepend(i)))?);
                    }
                    f_mats.insert((i, alpha.clone()), QMatrix::from_cols(cols, target.dim()));
                }
                if let Some(down) = alpha.minus(i) {
                    let target = &self.levels[&down];
                    let mut cols = Vec::with_capacity(dim);
                    for w in level.basis_words() {
                        let image = apply_e_word(&self.datum, &self.lam, i, &w);
                        cols.push(target.reduce(&image)?);
                    }
                    e_mats.insert((i, alpha.clone()), QMatrix::from_cols(cols, target.dim()));
                }
            }
        }
        self.f_mats = f_mats;
        self.e_mats = e_mats;
        Ok(())
    }

    /// Category-O integrability constraints on every computed weight space,
    /// for imaginary `i` with `μ = λ − α`:
    /// `μ(h_i) ≥ 0` when the space is nonzero; `μ(h_i) = 0 ⟹ f_i V_μ = 0`
    /// (and `V_{μ−α_i} = 0`); `μ(h_i) ≤ 2c_i ⟹ e_i V_μ = 0`.
    fn assert_weight_constraints(&self) -> Result<()> {
        let issues = self.weight_constraint_violations();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Internal(format!(
                "integrability constraints violated: {}",
                issues.join("; ")
            )))
        }
    }

    pub fn weight_constraint_violations(&self) -> Vec<String> {
        let mut issues = Vec::new();
        for (alpha, level) in &self.levels {
            if level.dim() == 0 {
                continue;
            }
            for i in 0..self.datum.n() {
                if self.datum.is_real(i) {
                    continue;
                }
                let p = self.datum.pairing(i, &self.lam, alpha);
                if p < 0 {
                    issues.push(format!("weight at {alpha} has negative pairing {p} at {i}"));
                }
                if p == 0 {
                    if let Some(f) = self.f_mats.get(&(i, alpha.clone())) {
                        if !f.is_zero() {
                            issues.push(format!("f_{i} nonzero at {alpha} despite pairing 0"));
                        }
                    }
                    if let Some(next) = self.levels.get(&alpha.plus(i)) {
                        if next.dim() != 0 {
                            issues.push(format!(
                                "nonzero space below {alpha} in direction {i} despite pairing 0"
                            ));
                        }
                    }
                }
                if p <= 2 * self.datum.c(i) {
                    if let Some(e) = self.e_mats.get(&(i, alpha.clone())) {
                        if !e.is_zero() {
                            issues.push(format!(
                                "e_{i} nonzero at {alpha} despite pairing {p} ≤ 2c_{i}"
                            ));
                        }
                    }
                }
            }
        }
        issues
    }

    pub fn datum(&self) -> &BorcherdsCartanDatum {
        &self.datum
    }

    pub fn lam(&self) -> &[i64] {
        &self.lam
    }

    pub fn depth(&self) -> i64 {
        self.depth
    }

    /// The weight space at level `α` (weight `λ − α`).
    pub fn v_basis(&self, alpha: &RootVec) -> Result<&WordLevel> {
        self.levels.get(alpha).ok_or_else(|| {
            Error::DepthInsufficient(format!(
                "weight {alpha} exceeds the computed depth {}",
                self.depth
            ))
        })
    }

    pub fn alphas(&self) -> impl Iterator<Item = &RootVec> {
        self.levels.keys()
    }

    /// `e_i` on a word vector, reduced into the target weight-space basis;
    /// returns the target level and coordinates.
    pub fn apply_e(&self, i: usize, v: &FVector) -> Result<(RootVec, Vec<ScalarQ>)> {
        let alpha = v
            .weight(&self.datum)
            .ok_or_else(|| Error::Internal("apply_e needs a homogeneous vector".into()))?;
        let down = alpha.minus(i).ok_or_else(|| {
            Error::Internal(format!("weight {alpha} has no letter {i} to raise"))
        })?;
        let image = apply_e_vector(&self.datum, &self.lam, i, v);
        let coords = self.v_basis(&down)?.reduce(&image)?;
        Ok((down, coords))
    }

    /// The contravariant form on arbitrary word vectors (sum over matching
    /// weight components).
    pub fn cform(&self, u: &FVector, v: &FVector) -> Result<ScalarQ> {
        let mut by_weight_u: BTreeMap<RootVec, Vec<(&Word, &ScalarQ)>> = BTreeMap::new();
        for (w, c) in u.iter() {
            by_weight_u.entry(self.datum.weight_of_word(&w.0)).or_default().push((w, c));
        }
        let mut acc = ScalarQ::zero();
        for (w, c) in v.iter() {
            let alpha = self.datum.weight_of_word(&w.0);
            let Some(terms) = by_weight_u.get(&alpha) else { continue };
            let level = self.v_basis(&alpha)?;
            let col = level
                .word_position(w)
                .ok_or_else(|| Error::Internal(format!("word {w} missing at {alpha}")))?;
            for (wu, cu) in terms {
                let row = level
                    .word_position(wu)
                    .ok_or_else(|| Error::Internal(format!("word {wu} missing at {alpha}")))?;
                acc = acc.add(&cu.mul(c).mul(level.gram_full.get(row, col)));
            }
        }
        Ok(acc)
    }

    /// The i-string decomposition of a word vector, as `(n, u_n)` pairs of
    /// word-vector representatives.
    pub fn istring_v(&self, i: usize, v: &FVector) -> Result<Vec<(i64, FVector)>> {
        let alpha = v
            .weight(&self.datum)
            .ok_or_else(|| Error::Internal("istring needs a homogeneous vector".into()))?;
        let coords = self.v_basis(&alpha)?.reduce(v)?;
        let parts = modrep::istring(self, i, &alpha, &coords)?;
        parts
            .into_iter()
            .map(|(n, un)| {
                let down = alpha.minus_n(i, n).expect("bounded");
                Ok((n, self.v_basis(&down)?.vector(&un)))
            })
            .collect()
    }

    /// Kashiwara operators on a word vector: `(ẽ_i u, f̃_i u)`.
    pub fn tilde_ops_v(&self, i: usize, v: &FVector) -> Result<(FVector, FVector)> {
        let alpha = v
            .weight(&self.datum)
            .ok_or_else(|| Error::Internal("tilde operators need a homogeneous vector".into()))?;
        let coords = self.v_basis(&alpha)?.reduce(v)?;
        let ev = modrep::tilde_e_vec(self, i, &alpha, &coords)?;
        let e_out = match alpha.minus(i) {
            Some(down) if !ev.is_empty() => self.v_basis(&down)?.vector(&ev),
            _ => FVector::zero(),
        };
        let fv = modrep::tilde_f_vec(self, i, &alpha, &coords)?;
        let f_out = self.v_basis(&alpha.plus(i))?.vector(&fv);
        Ok((e_out, f_out))
    }

    /// The crystal `(L(λ), B(λ))` with its graph, to the computed depth.
    pub fn crystal(&self) -> Result<CrystalData> {
        build_crystal(self)
    }

    /// `π_λ(P) = P v_λ`, reduced; returns a word-vector representative.
    pub fn pi_lambda(&self, p: &FVector) -> Result<FVector> {
        if p.is_zero() {
            return Ok(FVector::zero());
        }
        let alpha = p
            .weight(&self.datum)
            .ok_or_else(|| Error::Internal("π_λ needs a homogeneous vector".into()))?;
        let level = self.v_basis(&alpha)?;
        let coords = level.reduce(p)?;
        Ok(level.vector(&coords))
    }

    /// Matrix of `π_λ` from the `U_q^-` quotient basis at level `α` to the
    /// `V(λ)` basis.
    pub fn pi_mat(&self, um: &UmAlgebra, alpha: &RootVec) -> Result<QMatrix> {
        let target = self.v_basis(alpha)?;
        let mut cols = Vec::new();
        for w in um.level(alpha)?.basis_words() {
            cols.push(target.reduce(&FVector::from_word(w))?);
        }
        Ok(QMatrix::from_cols(cols, target.dim()))
    }

    /// The string-rescaling operator `Q_i` at level `α`:
    /// `Q_i(f_i^{(n)}u) = (n+1) f_i^{(n)}u` when `a_ii = 0`, identity
    /// otherwise.
    pub fn qi_mat(&self, i: usize, alpha: &RootVec) -> Result<QMatrix> {
        let dim = self.v_basis(alpha)?.dim();
        if self.datum.a(i, i) != 0 {
            return Ok(QMatrix::identity(dim));
        }
        let mut cols = Vec::with_capacity(dim);
        for k in 0..dim {
            let mut u = vec![ScalarQ::zero(); dim];
            u[k] = ScalarQ::one();
            let mut out = vec![ScalarQ::zero(); dim];
            for (n, un) in modrep::istring(self, i, alpha, &u)? {
                let down = alpha.minus_n(i, n).expect("bounded");
                let lifted = modrep::f_div_mat(self, i, n, &down)?.apply(&un);
                let factor = ScalarQ::from_int(n + 1);
                for (acc, x) in out.iter_mut().zip(&lifted) {
                    *acc = acc.add(&x.mul(&factor));
                }
            }
            cols.push(out);
        }
        Ok(QMatrix::from_cols(cols, dim))
    }

    /// `Q_i` applied to a word vector.
    pub fn qi_op(&self, i: usize, v: &FVector) -> Result<FVector> {
        let alpha = v
            .weight(&self.datum)
            .ok_or_else(|| Error::Internal("Q_i needs a homogeneous vector".into()))?;
        let level = self.v_basis(&alpha)?;
        let coords = self.qi_mat(i, &alpha)?.apply(&level.reduce(v)?);
        Ok(level.vector(&coords))
    }

    /// The contravariant form evaluated at `q = 0` on a lattice: the matrix
    /// `(B^T G B)(0)` over the lattice basis `B` at level `α`.
    pub fn lattice_form_at_zero(
        &self,
        lattice: &DvrLattice,
        alpha: &RootVec,
    ) -> Result<Vec<Vec<Rat>>> {
        let level = self.v_basis(alpha)?;
        let b = QMatrix::from_cols(lattice.basis().to_vec(), level.dim());
        let gram = b.transpose().mul(&level.gram_basis.mul(&b));
        gram.eval0()
    }
}

impl HwModule for VModule {
    fn datum(&self) -> &BorcherdsCartanDatum {
        &self.datum
    }

    fn depth(&self) -> i64 {
        self.depth
    }

    fn dim(&self, alpha: &RootVec) -> Result<usize> {
        Ok(self.v_basis(alpha)?.dim())
    }

    fn pairing(&self, i: usize, alpha: &RootVec) -> i64 {
        self.datum.pairing(i, &self.lam, alpha)
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

impl CrystalModule for VModule {
    fn datum(&self) -> &BorcherdsCartanDatum {
        &self.datum
    }

    fn depth(&self) -> i64 {
        self.depth
    }

    fn label(&self) -> ModuleLabel {
        ModuleLabel::HighestWeight(self.lam.clone())
    }

    fn dim(&self, alpha: &RootVec) -> Result<usize> {
        Ok(self.v_basis(alpha)?.dim())
    }

    fn pairing(&self, i: usize, alpha: &RootVec) -> i64 {
        self.datum.pairing(i, &self.lam, alpha)
    }

    fn tilde_f(&self, i: usize, alpha: &RootVec) -> Result<QMatrix> {
        modrep::tilde_f_mat(self, i, alpha)
    }

    fn tilde_e(&self, i: usize, alpha: &RootVec) -> Result<QMatrix> {
        modrep::tilde_e_mat(self, i, alpha)
    }
}

/// The scalar multiplying `f_i^{(n-1)} u` in the closed form for
/// `q_i^{-1} K_i e_i (f_i^{(n)} u)` on `u ∈ ker e_i` of weight pairing `a`:
///
/// * real `i`: `q_i^{1−n} (1 − q_i^{2(a+1−n)}) / (1 − q_i^2)`
/// * `a_ii < 0`: `(1 − q_i^{2nc_i})(1 − q_i^{2(a+(n−1)c_i)}) / ((1 − q_i^2)(1 − q_i^{2c_i}))`
/// * `a_ii = 0`: `n (1 − q_i^{2a}) / (1 − q_i^2)`
pub fn qke_scalar(datum: &BorcherdsCartanDatum, i: usize, a: i64, n: i64) -> ScalarQ {
    assert!(n >= 1);
    let one = ScalarQ::one();
    let qi = |k: i64| datum.qi_pow(i, k);
    let frac = |num: ScalarQ, den: ScalarQ| num.mul(&den.inv());
    let one_minus = |k: i64| one.add(&qi(k).neg());
    if datum.is_real(i) {
        qi(1 - n).mul(&frac(one_minus(2 * (a + 1 - n)), one_minus(2)))
    } else if datum.a(i, i) < 0 {
        let c = datum.c(i);
        frac(
            one_minus(2 * n * c).mul(&one_minus(2 * (a + (n - 1) * c))),
            one_minus(2).mul(&one_minus(2 * c)),
        )
    } else {
        ScalarQ::from_int(n).mul(&frac(one_minus(2 * a), one_minus(2)))
    }
}
