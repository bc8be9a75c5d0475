//! Laurent polynomials in `q` with exact rational coefficients, plus the
//! dense-polynomial helpers shared by the rational-function type.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Exact rational scalar.
pub type Rat = BigRational;

/// Convenience constructor for integer rationals.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Convenience constructor for fractions.
pub fn rat_frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// A Laurent polynomial in `q` over the rationals.
///
/// Invariant: the coefficient map stores no zero coefficients, so equality of
/// maps is equality of polynomials.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LaurentPoly {
    coeffs: BTreeMap<i64, Rat>,
}

impl LaurentPoly {
    /// The zero polynomial.
    pub fn zero() -> Self {
        Self::default()
    }

    /// The constant polynomial one.
    pub fn one() -> Self {
        Self::monomial(0, rat(1))
    }

    /// The single monomial `c * q^e` (zero polynomial when `c = 0`).
    pub fn monomial(exp: i64, coeff: Rat) -> Self {
        let mut coeffs = BTreeMap::new();
        if !coeff.is_zero() {
            coeffs.insert(exp, coeff);
        }
        Self { coeffs }
    }

    /// The monomial `q^e`.
    pub fn q_pow(exp: i64) -> Self {
        Self::monomial(exp, rat(1))
    }

    /// The constant polynomial `n`.
    pub fn from_int(n: i64) -> Self {
        Self::monomial(0, rat(n))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `q^e`.
    pub fn coeff(&self, exp: i64) -> Rat {
        self.coeffs.get(&exp).cloned().unwrap_or_else(Rat::zero)
    }

    /// Iterate `(exponent, coefficient)` pairs in increasing exponent order.
    pub fn iter(&self) -> impl Iterator<Item = (&i64, &Rat)> {
        self.coeffs.iter()
    }

    /// Lowest exponent with nonzero coefficient (`None` for zero).
    pub fn val0(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    /// Highest exponent with nonzero coefficient (`None` for zero).
    pub fn degree(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn add_assign_term(&mut self, exp: i64, coeff: &Rat) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(exp).or_insert_with(Rat::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.coeffs.remove(&exp);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in other.iter() {
            out.add_assign_term(*e, c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(e, c)| (*e, -c.clone())).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (e1, c1) in self.iter() {
            for (e2, c2) in other.iter() {
                out.add_assign_term(e1 + e2, &(c1 * c2));
            }
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            coeffs: self.coeffs.iter().map(|(e, k)| (*e, k * c)).collect(),
        }
    }

    /// Multiply by the monomial `q^e`.
    pub fn shift(&self, exp: i64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(e, c)| (*e + exp, c.clone())).collect(),
        }
    }

    /// The bar involution `q -> q^{-1}`.
    pub fn bar(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(e, c)| (-*e, c.clone())).collect(),
        }
    }

    /// Evaluate at a nonzero rational point (or at 0 when regular there).
    pub fn eval_rat(&self, x: &Rat) -> Option<Rat> {
        let mut acc = Rat::zero();
        for (e, c) in self.iter() {
            if *e < 0 && x.is_zero() {
                return None;
            }
            acc += c * pow_rat(x, *e)?;
        }
        Some(acc)
    }
}

fn pow_rat(x: &Rat, e: i64) -> Option<Rat> {
    if e == 0 {
        return Some(Rat::one());
    }
    if x.is_zero() {
        return if e > 0 { Some(Rat::zero()) } else { None };
    }
    let mut base = if e > 0 { x.clone() } else { x.recip() };
    let mut n = e.unsigned_abs();
    let mut acc = Rat::one();
    while n > 0 {
        if n & 1 == 1 {
            acc *= base.clone();
        }
        base = base.clone() * base;
        n >>= 1;
    }
    Some(acc)
}

/// Render one monomial `c * q^e` without any leading sign.
pub(crate) fn render_term(coeff: &Rat, exp: i64) -> String {
    let mag = coeff.abs();
    if exp == 0 {
        return format!("{mag}");
    }
    let qpart = if exp == 1 { "q".to_string() } else { format!("q^{exp}") };
    if mag.is_one() {
        qpart
    } else {
        format!("{mag}*{qpart}")
    }
}

/// Render a term sequence (increasing exponents) as a sum expression.
pub(crate) fn render_terms<'a>(terms: impl Iterator<Item = (i64, &'a Rat)>) -> String {
    let mut out = String::new();
    for (exp, coeff) in terms {
        if coeff.is_zero() {
            continue;
        }
        if out.is_empty() {
            if coeff.is_negative() {
                out.push('-');
            }
        } else if coeff.is_negative() {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        out.push_str(&render_term(coeff, exp));
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", render_terms(self.iter().map(|(e, c)| (*e, c))))
    }
}

// ---------------------------------------------------------------------------
// Dense polynomial helpers over the rationals (used by the fraction type).
// A polynomial is a coefficient vector `p[0] + p[1] q + ...`; the zero
// polynomial is the empty vector, and otherwise the last entry is nonzero.
// ---------------------------------------------------------------------------

pub(crate) type QPoly = Vec<Rat>;

pub(crate) fn qp_trim(p: &mut QPoly) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

pub(crate) fn qp_is_zero(p: &QPoly) -> bool {
    p.is_empty()
}

pub(crate) fn qp_one() -> QPoly {
    vec![rat(1)]
}

pub(crate) fn qp_mul(a: &QPoly, b: &QPoly) -> QPoly {
    if qp_is_zero(a) || qp_is_zero(b) {
        return Vec::new();
    }
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, ca) in a.iter().enumerate() {
        if ca.is_zero() {
            continue;
        }
        for (j, cb) in b.iter().enumerate() {
            out[i + j] += ca * cb;
        }
    }
    qp_trim(&mut out);
    out
}

pub(crate) fn qp_add(a: &QPoly, b: &QPoly) -> QPoly {
    let mut out = vec![Rat::zero(); a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] += c;
    }
    qp_trim(&mut out);
    out
}

pub(crate) fn qp_scale(a: &QPoly, c: &Rat) -> QPoly {
    if c.is_zero() {
        return Vec::new();
    }
    a.iter().map(|k| k * c).collect()
}

/// Polynomial division with remainder over the rationals.
pub(crate) fn qp_divrem(a: &QPoly, b: &QPoly) -> (QPoly, QPoly) {
    assert!(!qp_is_zero(b), "division by the zero polynomial");
    let mut rem = a.clone();
    let mut quo = vec![Rat::zero(); a.len().saturating_sub(b.len() - 1)];
    let lead = b.last().unwrap().clone();
    while rem.len() >= b.len() {
        let shift = rem.len() - b.len();
        let factor = rem.last().unwrap() / &lead;
        quo[shift] = factor.clone();
        for (i, c) in b.iter().enumerate() {
            let t = c * &factor;
            rem[shift + i] -= t;
        }
        qp_trim(&mut rem);
        if rem.len() < b.len() {
            break;
        }
    }
    qp_trim(&mut quo);
    (quo, rem)
}

/// Monic greatest common divisor via the Euclidean algorithm.
pub(crate) fn qp_gcd(a: &QPoly, b: &QPoly) -> QPoly {
    let mut x = a.clone();
    let mut y = b.clone();
    while !qp_is_zero(&y) {
        let (_, r) = qp_divrem(&x, &y);
        x = y;
        y = r;
    }
    if qp_is_zero(&x) {
        return x;
    }
    let lead = x.last().unwrap().clone();
    qp_scale(&x, &lead.recip())
}

/// Split a nonzero rational polynomial as `content * primitive` where the
/// primitive part has coprime integer coefficients and positive constant term.
pub(crate) fn qp_primitive(p: &QPoly) -> (Rat, Vec<BigInt>) {
    assert!(!qp_is_zero(p));
    let mut denom = BigInt::one();
    for c in p {
        denom = num_integer::lcm(denom, c.denom().clone());
    }
    let ints: Vec<BigInt> = p.iter().map(|c| c.numer() * (&denom / c.denom())).collect();
    let mut g = BigInt::zero();
    for c in &ints {
        g = num_integer::gcd(g, c.clone());
    }
    let first_nonzero = ints.iter().find(|c| !c.is_zero()).unwrap();
    if first_nonzero.is_negative() {
        g = -g;
    }
    let prim: Vec<BigInt> = ints.iter().map(|c| c / &g).collect();
    (Rat::new(g, denom), prim)
}

pub(crate) fn zp_to_qp(p: &[BigInt]) -> QPoly {
    p.iter().map(|c| Rat::from_integer(c.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laurent_arithmetic_basics() {
        let p = LaurentPoly::q_pow(2).add(&LaurentPoly::from_int(-1));
        let q = LaurentPoly::q_pow(1).add(&LaurentPoly::from_int(1));
        let prod = p.mul(&q);
        // (q^2 - 1)(q + 1) = q^3 + q^2 - q - 1
        assert_eq!(prod.coeff(3), rat(1));
        assert_eq!(prod.coeff(2), rat(1));
        assert_eq!(prod.coeff(1), rat(-1));
        assert_eq!(prod.coeff(0), rat(-1));
        assert_eq!(prod.val0(), Some(0));
        assert_eq!(prod.degree(), Some(3));
    }

    #[test]
    fn laurent_bar_flips_exponents() {
        let p = LaurentPoly::q_pow(2).add(&LaurentPoly::q_pow(-1).scale(&rat(3)));
        let b = p.bar();
        assert_eq!(b.coeff(-2), rat(1));
        assert_eq!(b.coeff(1), rat(3));
        assert_eq!(b.bar(), p);
    }

    #[test]
    fn display_orders_exponents_increasing() {
        let p = LaurentPoly::q_pow(2).add(&LaurentPoly::from_int(-1));
        assert_eq!(p.to_string(), "-1 + q^2");
        let m = LaurentPoly::monomial(-1, rat(-2));
        assert_eq!(m.to_string(), "-2*q^-1");
        assert_eq!(LaurentPoly::zero().to_string(), "0");
    }

    #[test]
    fn dense_division_and_gcd() {
        // (q^2 - 1) / (q + 1) = q - 1 exactly.
        let a = vec![rat(-1), rat(0), rat(1)];
        let b = vec![rat(1), rat(1)];
        let (q, r) = qp_divrem(&a, &b);
        assert_eq!(q, vec![rat(-1), rat(1)]);
        assert!(qp_is_zero(&r));
        let g = qp_gcd(&a, &b);
        assert_eq!(g, vec![rat(1), rat(1)]);
    }

    #[test]
    fn primitive_part_normalizes_sign_and_content() {
        let p = vec![rat_frac(-2, 3), rat_frac(4, 3)];
        let (content, prim) = qp_primitive(&p);
        // The sign is folded into the content so the first nonzero integer
        // coefficient of the primitive part is positive.
        assert_eq!(prim, vec![BigInt::from(1), BigInt::from(-2)]);
        assert_eq!(content, rat_frac(-2, 3));
    }
}
