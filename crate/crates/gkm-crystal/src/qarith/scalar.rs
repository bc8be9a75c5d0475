//! Exact rational functions in `q`: the scalar field for every computation.
//!
//! A scalar is kept in the canonical form `content * q^val * num / den` where
//! `content` is a rational number (zero exactly for the zero scalar), `num`
//! and `den` are coprime primitive integer polynomials with nonzero, positive
//! constant terms. This makes equality structural, the valuation at `q = 0`
//! (`val0`) free, and the bar involution `q -> q^{-1}` exact.

use super::poly::{
    qp_add, qp_divrem, qp_gcd, qp_is_zero, qp_mul, qp_one, qp_primitive, qp_scale, qp_trim, rat,
    zp_to_qp, LaurentPoly, QPoly, Rat,
};
use crate::{Error, Result};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::fmt;

/// An exact rational function in `q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalarQ {
    content: Rat,
    val: i64,
    num: Vec<BigInt>,
    den: Vec<BigInt>,
}

impl Default for ScalarQ {
    fn default() -> Self {
        Self::zero()
    }
}

impl ScalarQ {
    pub fn zero() -> Self {
        Self { content: Rat::zero(), val: 0, num: vec![BigInt::one()], den: vec![BigInt::one()] }
    }

    pub fn one() -> Self {
        Self::from_rat(rat(1))
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rat(rat(n))
    }

    pub fn from_rat(c: Rat) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self { content: c, val: 0, num: vec![BigInt::one()], den: vec![BigInt::one()] }
    }

    /// The monomial `q^e`.
    pub fn q_pow(e: i64) -> Self {
        Self { content: Rat::one(), val: e, num: vec![BigInt::one()], den: vec![BigInt::one()] }
    }

    /// The monomial `c * q^e`.
    pub fn monomial(e: i64, c: Rat) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self { content: c, val: e, num: vec![BigInt::one()], den: vec![BigInt::one()] }
    }

    /// Build from numerator/denominator Laurent polynomials.
    pub fn from_laurent_frac(num: &LaurentPoly, den: &LaurentPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Internal("division by zero rational function".into()));
        }
        let n = Self::from_laurent(num);
        let d = Self::from_laurent(den);
        Ok(n.div(&d))
    }

    pub fn from_laurent(p: &LaurentPoly) -> Self {
        if p.is_zero() {
            return Self::zero();
        }
        let val = p.val0().unwrap();
        let deg = p.degree().unwrap();
        let mut coeffs: QPoly = vec![Rat::zero(); (deg - val + 1) as usize];
        for (e, c) in p.iter() {
            coeffs[(*e - val) as usize] = c.clone();
        }
        Self::normalized(Rat::one(), val, coeffs, qp_one())
    }

    /// Canonicalize `content * q^val * num / den` with `num`, `den` rational
    /// polynomials (not necessarily reduced; `den` nonzero).
    fn normalized(content: Rat, mut val: i64, mut num: QPoly, mut den: QPoly) -> Self {
        qp_trim(&mut num);
        qp_trim(&mut den);
        assert!(!qp_is_zero(&den), "zero denominator");
        if content.is_zero() || qp_is_zero(&num) {
            return Self::zero();
        }
        // Extract powers of q so both parts have nonzero constant term.
        let nz = num.iter().position(|c| !c.is_zero()).unwrap();
        if nz > 0 {
            num.drain(..nz);
            val += nz as i64;
        }
        let dz = den.iter().position(|c| !c.is_zero()).unwrap();
        if dz > 0 {
            den.drain(..dz);
            val -= dz as i64;
        }
        // Cancel the polynomial gcd.
        let g = qp_gcd(&num, &den);
        if g.len() > 1 {
            let (num_q, r1) = qp_divrem(&num, &g);
            debug_assert!(qp_is_zero(&r1));
            let (den_q, r2) = qp_divrem(&den, &g);
            debug_assert!(qp_is_zero(&r2));
            num = num_q;
            den = den_q;
        }
        let (cn, num_z) = qp_primitive(&num);
        let (cd, den_z) = qp_primitive(&den);
        Self { content: content * cn / cd, val, num: num_z, den: den_z }
    }

    pub fn is_zero(&self) -> bool {
        self.content.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self == &Self::one()
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let v = self.val.min(other.val);
        let na = qp_scale(&zp_to_qp(&self.num), &self.content);
        let nb = qp_scale(&zp_to_qp(&other.num), &other.content);
        let da = zp_to_qp(&self.den);
        let db = zp_to_qp(&other.den);
        let mut ta = qp_mul(&na, &db);
        let mut tb = qp_mul(&nb, &da);
        // Shift each numerator by its q-power excess over the common valuation.
        ta = shift_poly(ta, (self.val - v) as usize);
        tb = shift_poly(tb, (other.val - v) as usize);
        let num = qp_add(&ta, &tb);
        let den = qp_mul(&da, &db);
        Self::normalized(Rat::one(), v, num, den)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        out.content = -out.content;
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let num = qp_mul(&zp_to_qp(&self.num), &zp_to_qp(&other.num));
        let den = qp_mul(&zp_to_qp(&self.den), &zp_to_qp(&other.den));
        Self::normalized(&self.content * &other.content, self.val + other.val, num, den)
    }

    pub fn inv(&self) -> Self {
        assert!(!self.is_zero(), "inverse of zero");
        // num and den both have positive constant terms, so swapping them
        // keeps the canonical sign convention.
        Self {
            content: self.content.recip(),
            val: -self.val,
            num: self.den.clone(),
            den: self.num.clone(),
        }
    }

    pub fn div(&self, other: &Self) -> Self {
        self.mul(&other.inv())
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() || self.is_zero() {
            return Self::zero();
        }
        let mut out = self.clone();
        out.content *= c;
        out
    }

    pub fn pow(&self, e: i64) -> Self {
        if e == 0 {
            return Self::one();
        }
        let base = if e > 0 { self.clone() } else { self.inv() };
        let mut acc = Self::one();
        let mut b = base;
        let mut n = e.unsigned_abs();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.mul(&b);
            n >>= 1;
        }
        acc
    }

    /// The bar involution `q -> q^{-1}`.
    pub fn bar(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let dn = (self.num.len() - 1) as i64;
        let dd = (self.den.len() - 1) as i64;
        let mut num: Vec<BigInt> = self.num.iter().rev().cloned().collect();
        let mut den: Vec<BigInt> = self.den.iter().rev().cloned().collect();
        let mut content = self.content.clone();
        if num[0].is_negative() {
            num = num.iter().map(|c| -c).collect();
            content = -content;
        }
        if den[0].is_negative() {
            den = den.iter().map(|c| -c).collect();
            content = -content;
        }
        Self { content, val: -self.val - dn + dd, num, den }
    }

    /// Whether the scalar is fixed by the bar involution.
    pub fn is_bar_symmetric(&self) -> bool {
        self == &self.bar()
    }

    /// Valuation at `q = 0` (`None` for the zero scalar, which lies in
    /// `q^k A0` for every `k`).
    pub fn val0(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.val)
        }
    }

    /// Whether the scalar is regular at `q = 0` (lies in `A0`).
    pub fn in_a0(&self) -> bool {
        self.val0().is_none_or(|v| v >= 0)
    }

    /// Whether the scalar lies in `q^k A0`.
    pub fn val0_at_least(&self, k: i64) -> bool {
        self.val0().is_none_or(|v| v >= k)
    }

    /// Evaluate at `q = 0`; errors when there is a pole there.
    pub fn eval0(&self) -> Result<Rat> {
        if self.is_zero() {
            return Ok(Rat::zero());
        }
        if self.val > 0 {
            return Ok(Rat::zero());
        }
        if self.val < 0 {
            return Err(Error::NotRegularAtZero(self.to_string()));
        }
        let n0 = Rat::from_integer(self.num[0].clone());
        let d0 = Rat::from_integer(self.den[0].clone());
        Ok(&self.content * n0 / d0)
    }

    /// Evaluate at a rational point; errors on poles.
    pub fn eval_rat(&self, x: &Rat) -> Result<Rat> {
        if self.is_zero() {
            return Ok(Rat::zero());
        }
        if x.is_zero() {
            return self.eval0();
        }
        let ev = |p: &[BigInt]| -> Rat {
            let mut acc = Rat::zero();
            for c in p.iter().rev() {
                acc = acc * x + Rat::from_integer(c.clone());
            }
            acc
        };
        let dv = ev(&self.den);
        if dv.is_zero() {
            return Err(Error::Internal(format!("pole at q = {x} in {self}")));
        }
        let mut out = &self.content * ev(&self.num) / dv;
        let mut p = Rat::one();
        let mut e = self.val.unsigned_abs();
        let base = if self.val >= 0 { x.clone() } else { x.recip() };
        while e > 0 {
            p *= base.clone();
            e -= 1;
        }
        out *= p;
        Ok(out)
    }

    /// Whether the scalar is a Laurent polynomial.
    pub fn is_laurent(&self) -> bool {
        self.is_zero() || self.den == vec![BigInt::one()]
    }

    /// Convert to a Laurent polynomial when possible.
    pub fn to_laurent(&self) -> Option<LaurentPoly> {
        if self.is_zero() {
            return Some(LaurentPoly::zero());
        }
        if !self.is_laurent() {
            return None;
        }
        let mut out = LaurentPoly::zero();
        for (j, c) in self.num.iter().enumerate() {
            out.add_assign_term(self.val + j as i64, &(&self.content * Rat::from_integer(c.clone())));
        }
        Some(out)
    }

    /// Coefficients of the power-series expansion at `q = 0`, from the
    /// valuation up to and including exponent `upto`.
    pub fn series(&self, upto: i64) -> Vec<(i64, Rat)> {
        if self.is_zero() || self.val > upto {
            return Vec::new();
        }
        let len = (upto - self.val + 1) as usize;
        // Invert den as a power series: den[0] != 0 by the invariant.
        let d0 = Rat::from_integer(self.den[0].clone());
        let mut inv = vec![Rat::zero(); len];
        inv[0] = d0.recip();
        for k in 1..len {
            let mut acc = Rat::zero();
            for j in 1..=k.min(self.den.len() - 1) {
                acc += Rat::from_integer(self.den[j].clone()) * &inv[k - j];
            }
            inv[k] = -acc / &d0;
        }
        let mut out = Vec::with_capacity(len);
        for k in 0..len {
            let mut acc = Rat::zero();
            for j in 0..=k.min(self.num.len() - 1) {
                acc += Rat::from_integer(self.num[j].clone()) * &inv[k - j];
            }
            out.push((self.val + k as i64, acc * &self.content));
        }
        out
    }

    /// Sum of scalars.
    pub fn sum<'a>(items: impl Iterator<Item = &'a ScalarQ>) -> ScalarQ {
        items.fold(ScalarQ::zero(), |acc, x| acc.add(x))
    }

    /// The denominator polynomial as a scalar (1 for Laurent values); the
    /// product of a scalar with its denominator is always Laurent.
    pub fn den_scalar(&self) -> ScalarQ {
        if self.is_zero() {
            return ScalarQ::one();
        }
        Self {
            content: Rat::one(),
            val: 0,
            num: self.den.clone(),
            den: vec![BigInt::one()],
        }
    }
}

fn shift_poly(mut p: QPoly, by: usize) -> QPoly {
    if by == 0 || qp_is_zero(&p) {
        return p;
    }
    let mut out = vec![Rat::zero(); by];
    out.append(&mut p);
    out
}

impl fmt::Display for ScalarQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let num = self
            .to_num_laurent()
            .expect("numerator is a Laurent polynomial by construction");
        if self.den == vec![BigInt::one()] {
            return write!(f, "{num}");
        }
        let den_terms: Vec<(i64, Rat)> = self
            .den
            .iter()
            .enumerate()
            .map(|(j, c)| (j as i64, Rat::from_integer(c.clone())))
            .collect();
        let den = super::poly::render_terms(den_terms.iter().map(|(e, c)| (*e, c)));
        write!(f, "({num})/({den})")
    }
}

impl ScalarQ {
    fn to_num_laurent(&self) -> Option<LaurentPoly> {
        let mut out = LaurentPoly::zero();
        for (j, c) in self.num.iter().enumerate() {
            out.add_assign_term(self.val + j as i64, &(&self.content * Rat::from_integer(c.clone())));
        }
        Some(out)
    }
}

// ---------------------------------------------------------------------------
// Quantum integers.
// ---------------------------------------------------------------------------

/// The balanced quantum integer `[n]` in base `q^b`:
/// `(q^{bn} - q^{-bn}) / (q^b - q^{-b})`, extended by `[0] = 0` and
/// `[-n] = -[n]`. `b` must be positive.
pub fn qint_base(n: i64, b: i64) -> ScalarQ {
    assert!(b > 0, "quantum-integer base exponent must be positive");
    if n == 0 {
        return ScalarQ::zero();
    }
    let m = n.abs();
    let mut p = LaurentPoly::zero();
    for k in 0..m {
        p.add_assign_term(b * (m - 1 - 2 * k), &rat(1));
    }
    let s = ScalarQ::from_laurent(&p);
    if n < 0 {
        s.neg()
    } else {
        s
    }
}

/// `[n]! = [n][n-1]...[1]` in base `q^b`; `[0]! = 1`. Requires `n >= 0`.
pub fn qfact_base(n: i64, b: i64) -> ScalarQ {
    assert!(n >= 0, "quantum factorial needs a nonnegative argument");
    let mut acc = ScalarQ::one();
    for k in 1..=n {
        acc = acc.mul(&qint_base(k, b));
    }
    acc
}

/// Quantum binomial `[m choose n]` in base `q^b` for `0 <= n <= m`.
pub fn qbinom_base(m: i64, n: i64, b: i64) -> ScalarQ {
    assert!((0..=m).contains(&n), "binomial arguments out of range");
    qfact_base(m, b).div(&qfact_base(n, b).mul(&qfact_base(m - n, b)))
}
