//! Borcherds-Cartan data: generalized Cartan matrices with real and imaginary
//! simple roots, symmetrizers, weights, and pairings.
//!
//! The index set is finite and all imaginary root multiplicities are one. A
//! weight is represented by its integer pairings with the simple coroots
//! together with a root-lattice offset, which determines every quantity the
//! computations need (pairings, the symmetric bilinear form, `q`-exponents).

use crate::qarith::{qbinom_base, qfact_base, qint_base, ScalarQ};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// One validation failure for a proposed Borcherds-Cartan datum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub row: Option<usize>,
    pub col: Option<usize>,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?},{:?}): {}", self.row, self.col, self.rule)
    }
}

/// An element of the positive root lattice `Q+`, stored as the multiset of
/// simple-root multiplicities. Ordered by height first, then lexicographically,
/// so sorted iteration enumerates weight spaces level by level.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RootVec(pub Vec<i64>);

impl RootVec {
    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        Self(v)
    }

    /// Total height `Σ k_i`.
    pub fn height(&self) -> i64 {
        self.0.iter().sum()
    }

    /// Add one `α_i`.
    pub fn plus(&self, i: usize) -> Self {
        let mut v = self.0.clone();
        v[i] += 1;
        Self(v)
    }

    /// Add `n` copies of `α_i`.
    pub fn plus_n(&self, i: usize, n: i64) -> Self {
        let mut v = self.0.clone();
        v[i] += n;
        Self(v)
    }

    /// Subtract one `α_i` when possible.
    pub fn minus(&self, i: usize) -> Option<Self> {
        if self.0[i] == 0 {
            return None;
        }
        let mut v = self.0.clone();
        v[i] -= 1;
        Some(Self(v))
    }

    /// Subtract `n` copies of `α_i` when possible.
    pub fn minus_n(&self, i: usize, n: i64) -> Option<Self> {
        if self.0[i] < n {
            return None;
        }
        let mut v = self.0.clone();
        v[i] -= n;
        Some(Self(v))
    }

    pub fn sum(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }
}

impl PartialOrd for RootVec {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RootVec {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.height().cmp(&other.height()).then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for RootVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|k| k.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// A weight of the form `λ - Σ k_i α_i`, with `λ` given by its coroot
/// pairings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightPoint {
    pub lam: Vec<i64>,
    pub alpha: RootVec,
}

/// A validated Borcherds-Cartan datum with symmetrizers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BorcherdsCartanDatum {
    n: usize,
    a: Vec<Vec<i64>>,
    s: Vec<i64>,
    labels: Vec<String>,
}

/// On-disk form of a datum (JSON or TOML).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatumConfig {
    pub matrix: Vec<Vec<i64>>,
    pub symmetrizers: Vec<i64>,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
}

impl BorcherdsCartanDatum {
    /// Validate and build a datum.
    pub fn new(a: Vec<Vec<i64>>, s: Vec<i64>, labels: Option<Vec<String>>) -> Result<Self> {
        let violations = validate(&a, &s, labels.as_deref());
        if !violations.is_empty() {
            return Err(Error::InvalidDatum(violations));
        }
        let n = a.len();
        let labels = labels.unwrap_or_else(|| (0..n).map(|i| i.to_string()).collect());
        Ok(Self { n, a, s, labels })
    }

    pub fn from_config(cfg: DatumConfig) -> Result<Self> {
        Self::new(cfg.matrix, cfg.symmetrizers, cfg.labels)
    }

    /// Number of simple roots.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Cartan matrix entry `a_ij`.
    pub fn a(&self, i: usize, j: usize) -> i64 {
        self.a[i][j]
    }

    /// Symmetrizer `s_i`.
    pub fn s(&self, i: usize) -> i64 {
        self.s[i]
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Whether `i` is a real index (`a_ii = 2`).
    pub fn is_real(&self, i: usize) -> bool {
        self.a[i][i] == 2
    }

    /// A short content hash of the datum (matrix, symmetrizers, labels),
    /// used to stamp serialized artifacts.
    pub fn content_hash(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(format!("n={};", self.n).as_bytes());
        for row in &self.a {
            eat(format!("a={row:?};").as_bytes());
        }
        eat(format!("s={:?};", self.s).as_bytes());
        eat(format!("l={:?};", self.labels).as_bytes());
        format!("{h:016x}")
    }

    /// Whether `i` is imaginary (`a_ii <= 0`).
    pub fn is_imaginary(&self, i: usize) -> bool {
        self.a[i][i] <= 0
    }

    /// `c_i = -a_ii / 2` for an imaginary index (`0` when `a_ii = 0`).
    pub fn c(&self, i: usize) -> i64 {
        assert!(self.is_imaginary(i), "c_i is defined for imaginary indices");
        -self.a[i][i] / 2
    }

    /// The signed value `-a_ii / 2` for any index (`-1` for real indices),
    /// used in the projector and string-component normalizations.
    pub fn c_signed(&self, i: usize) -> i64 {
        -self.a[i][i] / 2
    }

    /// `q_i^k = q^{s_i k}`.
    pub fn qi_pow(&self, i: usize, k: i64) -> ScalarQ {
        ScalarQ::q_pow(self.s[i] * k)
    }

    /// The quantum integer `[n]_i` in base `q_i = q^{s_i}`.
    pub fn qint(&self, n: i64, i: usize) -> ScalarQ {
        qint_base(n, self.s[i])
    }

    /// `[n]_i!`.
    pub fn qfact(&self, n: i64, i: usize) -> ScalarQ {
        qfact_base(n, self.s[i])
    }

    /// `[m choose n]_i`.
    pub fn qbinom(&self, m: i64, n: i64, i: usize) -> ScalarQ {
        qbinom_base(m, n, self.s[i])
    }

    /// The brace quantum integer `{n}_i`, defined for imaginary `i`:
    /// the ordinary integer `n` when `a_ii = 0`, and the balanced quantum
    /// integer in base `q_i^{c_i}` when `a_ii < 0`.
    pub fn qbrace(&self, n: i64, i: usize) -> Result<ScalarQ> {
        if self.is_real(i) {
            return Err(Error::Internal(format!(
                "brace integers are defined for imaginary indices; index {i} is real"
            )));
        }
        let c = self.c(i);
        if c == 0 {
            Ok(ScalarQ::from_int(n))
        } else {
            Ok(qint_base(n, self.s[i] * c))
        }
    }

    /// `{n}_i!`.
    pub fn qbrace_fact(&self, n: i64, i: usize) -> Result<ScalarQ> {
        assert!(n >= 0);
        let mut acc = ScalarQ::one();
        for k in 1..=n {
            acc = acc.mul(&self.qbrace(k, i)?);
        }
        Ok(acc)
    }

    /// Brace binomial `{m choose n}_i`.
    pub fn qbrace_binom(&self, m: i64, n: i64, i: usize) -> Result<ScalarQ> {
        assert!((0..=m).contains(&n));
        Ok(self
            .qbrace_fact(m, i)?
            .div(&self.qbrace_fact(n, i)?.mul(&self.qbrace_fact(m - n, i)?)))
    }

    /// `⟨h_i, λ - Σ k_j α_j⟩`.
    pub fn pairing(&self, i: usize, lam: &[i64], alpha: &RootVec) -> i64 {
        lam[i] - alpha.0.iter().zip(&self.a[i]).map(|(k, a)| k * a).sum::<i64>()
    }

    /// Symmetric form value `(α_i | λ - Σ k_j α_j) = s_i ⟨h_i, ·⟩`.
    pub fn sym_bilinear(&self, i: usize, lam: &[i64], alpha: &RootVec) -> i64 {
        self.s[i] * self.pairing(i, lam, alpha)
    }

    /// Root-lattice weight of a word in the generators.
    pub fn weight_of_word(&self, word: &[usize]) -> RootVec {
        let mut v = RootVec::zero(self.n);
        for &i in word {
            v.0[i] += 1;
        }
        v
    }

    /// Check that `λ` is dominant (all pairings nonnegative).
    pub fn check_dominant(&self, lam: &[i64]) -> Result<()> {
        if lam.len() != self.n {
            return Err(Error::NotDominant(format!(
                "weight has {} entries but the datum has {} indices",
                lam.len(),
                self.n
            )));
        }
        match lam.iter().position(|&x| x < 0) {
            Some(i) => Err(Error::NotDominant(format!(
                "pairing with coroot {} is negative ({})",
                self.labels[i], lam[i]
            ))),
            None => Ok(()),
        }
    }

    /// All elements of `Q+` of height at most `depth`, in (height, lex) order.
    pub fn alphas_to_depth(&self, depth: i64) -> Vec<RootVec> {
        let mut out = vec![RootVec::zero(self.n)];
        let mut frontier = vec![RootVec::zero(self.n)];
        for _ in 0..depth {
            let mut next = Vec::new();
            for a in &frontier {
                for i in 0..self.n {
                    let b = a.plus(i);
                    if !next.contains(&b) {
                        next.push(b);
                    }
                }
            }
            next.sort();
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }
}

fn validate(a: &[Vec<i64>], s: &[i64], labels: Option<&[String]>) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = a.len();
    let mut push = |row: Option<usize>, col: Option<usize>, rule: &str| {
        out.push(Violation { row, col, rule: rule.to_string() });
    };
    if n == 0 {
        push(None, None, "matrix must be nonempty");
        return out;
    }
    for (i, row) in a.iter().enumerate() {
        if row.len() != n {
            push(Some(i), None, "matrix must be square");
            return out;
        }
    }
    if s.len() != n {
        push(None, None, "symmetrizer list length must match the matrix size");
        return out;
    }
    if let Some(labels) = labels {
        if labels.len() != n {
            push(None, None, "label list length must match the matrix size");
        }
    }
    for (i, &si) in s.iter().enumerate() {
        if si <= 0 {
            push(Some(i), None, "symmetrizers must be positive integers");
        }
    }
    for i in 0..n {
        let aii = a[i][i];
        if aii != 2 && (aii > 0 || aii % 2 != 0) {
            push(Some(i), Some(i), "diagonal entries must be 2 or nonpositive even integers");
        }
        for j in 0..n {
            if i != j && a[i][j] > 0 {
                push(Some(i), Some(j), "off-diagonal entries must be nonpositive");
            }
            if (a[i][j] == 0) != (a[j][i] == 0) {
                push(Some(i), Some(j), "a_ij = 0 must imply a_ji = 0");
            }
            if s[i] * a[i][j] != s[j] * a[j][i] {
                push(Some(i), Some(j), "symmetrizability s_i a_ij = s_j a_ji fails");
            }
        }
    }
    out
}

/// Built-in example data.
pub fn builtin(name: &str) -> Option<BorcherdsCartanDatum> {
    let (a, s, labels): (Vec<Vec<i64>>, Vec<i64>, Option<Vec<String>>) = match name {
        "sl2" => (vec![vec![2]], vec![1], None),
        "heis" => (vec![vec![0]], vec![1], None),
        "imag2" => (vec![vec![-2]], vec![1], None),
        "gkm2" => (vec![vec![2, -1], vec![-1, 0]], vec![1, 1], None),
        "monster3" => (
            vec![vec![2, 0, -1], vec![0, -2, -3], vec![-1, -3, -4]],
            vec![1, 1, 1],
            Some(vec!["-1".into(), "1".into(), "2".into()]),
        ),
        _ => return None,
    };
    Some(BorcherdsCartanDatum::new(a, s, labels).expect("built-in datum is valid"))
}

/// Names of the built-in example data.
pub const BUILTIN_NAMES: [&str; 5] = ["sl2", "heis", "imag2", "gkm2", "monster3"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qarith::LaurentPoly;

    #[test]
    fn builtins_validate() {
        for name in BUILTIN_NAMES {
            let d = builtin(name).unwrap();
            assert!(d.n() >= 1);
        }
        assert!(builtin("nope").is_none());
    }

    #[test]
    fn monster_truncation_matrix() {
        // Indices {-1, 1, 2} of the matrix a_ij = -(i+j): the -1 index is
        // real and the symmetric matrix admits unit symmetrizers.
        let d = builtin("monster3").unwrap();
        assert!(d.is_real(0));
        assert!(d.is_imaginary(1));
        assert!(d.is_imaginary(2));
        assert_eq!(d.a(0, 2), -1);
        assert_eq!(d.a(1, 2), -3);
        assert_eq!(d.c(1), 1);
        assert_eq!(d.c(2), 2);
        assert_eq!(d.label(0), "-1");
    }

    #[test]
    fn validation_reports_structured_violations() {
        // Positive off-diagonal entry and broken zero-symmetry.
        let err = BorcherdsCartanDatum::new(vec![vec![2, 1], vec![0, 2]], vec![1, 1], None);
        let Err(Error::InvalidDatum(violations)) = err else {
            panic!("expected InvalidDatum");
        };
        assert!(violations.iter().any(|v| v.row == Some(0) && v.col == Some(1)));
        // Odd diagonal.
        let err = BorcherdsCartanDatum::new(vec![vec![-3]], vec![1], None);
        assert!(matches!(err, Err(Error::InvalidDatum(_))));
        // Non-symmetrizable.
        let err = BorcherdsCartanDatum::new(vec![vec![2, -2], vec![-1, 2]], vec![1, 1], None);
        assert!(matches!(err, Err(Error::InvalidDatum(_))));
        // The same matrix with symmetrizers (1, 2) validates.
        assert!(BorcherdsCartanDatum::new(vec![vec![2, -2], vec![-1, 2]], vec![1, 2], None).is_ok());
    }

    #[test]
    fn pairing_and_weights() {
        let d = builtin("gkm2").unwrap();
        let lam = vec![1, 1];
        let alpha = RootVec(vec![2, 1]);
        // ⟨h_0, λ - 2α_0 - α_1⟩ = 1 - (2*2 + 1*(-1)) = -2.
        assert_eq!(d.pairing(0, &lam, &alpha), -2);
        // ⟨h_1, λ - 2α_0 - α_1⟩ = 1 - (2*(-1) + 0) = 3.
        assert_eq!(d.pairing(1, &lam, &alpha), 3);
        assert_eq!(d.sym_bilinear(1, &lam, &alpha), 3);
        assert_eq!(d.weight_of_word(&[0, 1, 0]), alpha);
        assert!(d.check_dominant(&[0, 3]).is_ok());
        assert!(matches!(d.check_dominant(&[-1, 0]), Err(Error::NotDominant(_))));
    }

    #[test]
    fn brace_integers() {
        let d = builtin("gkm2").unwrap();
        // Index 1 has a_11 = 0: {n} = n.
        assert_eq!(d.qbrace(4, 1).unwrap(), ScalarQ::from_int(4));
        assert_eq!(d.qbrace_fact(3, 1).unwrap(), ScalarQ::from_int(6));
        assert_eq!(d.qbrace_binom(4, 2, 1).unwrap(), ScalarQ::from_int(6));
        assert!(d.qbrace(2, 0).is_err());
        // imag2 has c = 1 so {2} = q + q^-1.
        let im = builtin("imag2").unwrap();
        let expect = ScalarQ::from_laurent(&LaurentPoly::q_pow(1).add(&LaurentPoly::q_pow(-1)));
        assert_eq!(im.qbrace(2, 0).unwrap(), expect);
        // monster3 index 2 has c = 2: {2} = q^2 + q^-2.
        let m = builtin("monster3").unwrap();
        let expect2 = ScalarQ::from_laurent(&LaurentPoly::q_pow(2).add(&LaurentPoly::q_pow(-2)));
        assert_eq!(m.qbrace(2, 2).unwrap(), expect2);
    }

    #[test]
    fn alpha_enumeration_is_graded_and_sorted() {
        let d = builtin("gkm2").unwrap();
        let alphas = d.alphas_to_depth(2);
        let expect: Vec<RootVec> = vec![
            RootVec(vec![0, 0]),
            RootVec(vec![0, 1]),
            RootVec(vec![1, 0]),
            RootVec(vec![0, 2]),
            RootVec(vec![1, 1]),
            RootVec(vec![2, 0]),
        ];
        assert_eq!(alphas, expect);
    }
}
