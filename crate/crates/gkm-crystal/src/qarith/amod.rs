//! Membership in finitely generated modules over the Laurent-polynomial ring
//! `A = Q[q, q^{-1}]` inside `Q(q)^d`.
//!
//! Generators with rational-function entries are first scaled by a common
//! polynomial denominator (scaling module and target together preserves the
//! membership question), then reduced to a column echelon form over `A` by
//! Euclidean column operations with the Laurent width `deg - val` as the
//! Euclidean function. Membership is decided by back-substitution with exact
//! divisibility checks; powers of `q` are units and never obstruct
//! divisibility.

use super::poly::{qp_divrem, LaurentPoly, QPoly, Rat};
use super::scalar::ScalarQ;
use num_traits::Zero;

/// Decide whether `target` lies in the `A`-span of `gens` inside `Q(q)^d`.
pub fn in_a_span(gens: &[Vec<ScalarQ>], target: &[ScalarQ]) -> bool {
    let dim = target.len();
    for g in gens {
        assert_eq!(g.len(), dim, "generator dimension mismatch");
    }
    if target.iter().all(ScalarQ::is_zero) {
        return true;
    }
    // Clear denominators incrementally: multiply the running clearing factor
    // by the denominator of any entry that is still non-Laurent after the
    // factors collected so far.
    let mut clear = ScalarQ::one();
    let all_entries = || gens.iter().flatten().chain(target.iter());
    for e in all_entries() {
        if !e.mul(&clear).is_laurent() {
            clear = clear.mul(&e.den_scalar());
        }
    }
    let mut cols: Vec<Vec<ScalarQ>> = gens
        .iter()
        .map(|g| g.iter().map(|x| x.mul(&clear)).collect::<Vec<_>>())
        .filter(|g: &Vec<ScalarQ>| g.iter().any(|x| !x.is_zero()))
        .collect();
    let mut t: Vec<ScalarQ> = target.iter().map(|x| x.mul(&clear)).collect();
    debug_assert!(cols.iter().flatten().all(ScalarQ::is_laurent));
    debug_assert!(t.iter().all(ScalarQ::is_laurent));

    // Column echelon form over A, processing rows top to bottom.
    let mut fixed: Vec<(usize, Vec<ScalarQ>)> = Vec::new();
    for row in 0..dim {
        loop {
            let nonzero: Vec<usize> = (0..cols.len()).filter(|&j| !cols[j][row].is_zero()).collect();
            if nonzero.len() <= 1 {
                if let Some(&j) = nonzero.first() {
                    let col = cols.swap_remove(j);
                    fixed.push((row, col));
                }
                break;
            }
            let jmin = *nonzero
                .iter()
                .min_by_key(|&&j| laurent_width(&cols[j][row]))
                .unwrap();
            let pivot_entry = cols[jmin][row].clone();
            let pivot_col = cols[jmin].clone();
            for &j in &nonzero {
                if j == jmin {
                    continue;
                }
                let (quot, _) = laurent_divrem(&cols[j][row], &pivot_entry);
                for (c, p) in cols[j].iter_mut().zip(&pivot_col) {
                    *c = c.sub(&quot.mul(p));
                }
            }
            cols.retain(|c| c.iter().any(|x| !x.is_zero()));
        }
    }

    // Back-substitution with exact divisibility in A.
    for (row, col) in &fixed {
        if t[*row].is_zero() {
            continue;
        }
        let quot = t[*row].div(&col[*row]);
        if !quot.is_laurent() {
            return false;
        }
        for (tc, cc) in t.iter_mut().zip(col) {
            *tc = tc.sub(&quot.mul(cc));
        }
    }
    t.iter().all(ScalarQ::is_zero)
}

/// Width of a nonzero Laurent polynomial: degree minus valuation.
fn laurent_width(x: &ScalarQ) -> i64 {
    let lp = x.to_laurent().expect("echelon entries are Laurent");
    lp.degree().unwrap() - lp.val0().unwrap()
}

/// Division with remainder in `A`: `a = quot * b + rem` with
/// `width(rem) < width(b)` (or `rem = 0`).
fn laurent_divrem(a: &ScalarQ, b: &ScalarQ) -> (ScalarQ, ScalarQ) {
    assert!(!b.is_zero(), "division by zero");
    if a.is_zero() {
        return (ScalarQ::zero(), ScalarQ::zero());
    }
    let la = a.to_laurent().expect("dividend must be Laurent");
    let lb = b.to_laurent().expect("divisor must be Laurent");
    let va = la.val0().unwrap();
    let vb = lb.val0().unwrap();
    let pa = to_qpoly(&la, va);
    let pb = to_qpoly(&lb, vb);
    let (q, r) = qp_divrem(&pa, &pb);
    let quot = ScalarQ::from_laurent(&from_qpoly(&q, va - vb));
    let rem = ScalarQ::from_laurent(&from_qpoly(&r, va));
    debug_assert_eq!(quot.mul(b).add(&rem), *a);
    (quot, rem)
}

fn to_qpoly(p: &LaurentPoly, val: i64) -> QPoly {
    let deg = p.degree().unwrap();
    let mut out = vec![Rat::zero(); (deg - val + 1) as usize];
    for (e, c) in p.iter() {
        out[(*e - val) as usize] = c.clone();
    }
    out
}

fn from_qpoly(p: &QPoly, val: i64) -> LaurentPoly {
    let mut out = LaurentPoly::zero();
    for (j, c) in p.iter().enumerate() {
        out.add_assign_term(val + j as i64, c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qarith::scalar::qint_base;

    fn s(n: i64) -> ScalarQ {
        ScalarQ::from_int(n)
    }

    fn q(e: i64) -> ScalarQ {
        ScalarQ::q_pow(e)
    }

    #[test]
    fn divrem_in_a() {
        let a = qint_base(4, 1); // q^-3 + q^-1 + q + q^3
        let b = qint_base(2, 1); // q^-1 + q
        let (quot, rem) = laurent_divrem(&a, &b);
        assert!(rem.is_zero());
        assert_eq!(quot.mul(&b), a);
    }

    #[test]
    fn span_membership_basics() {
        // A-span of {(1, q)} contains (q^3, q^4) but not (1, 0) or ([2]^{-1}, ...).
        let gens = vec![vec![s(1), q(1)]];
        assert!(in_a_span(&gens, &[q(3), q(4)]));
        assert!(!in_a_span(&gens, &[s(1), s(0)]));
        assert!(in_a_span(&gens, &[s(0), s(0)]));

        // Divisibility matters: (q+q^-1, 0) is in A.(q+q^-1, 0) but (1, 0)
        // is not, since 1/[2] is not Laurent.
        let gens2 = vec![vec![qint_base(2, 1), s(0)]];
        assert!(in_a_span(&gens2, &[qint_base(2, 1).mul(&q(5)), s(0)]));
        assert!(!in_a_span(&gens2, &[s(1), s(0)]));
    }

    #[test]
    fn span_membership_with_elimination() {
        // gens: (1, 1), (0, [2]). Target (1, 1 + q[2]) = g1 + q g2 is in;
        // (1, 2) = g1 + [2]^{-1} g2 requires a non-Laurent coefficient.
        let gens = vec![vec![s(1), s(1)], vec![s(0), qint_base(2, 1)]];
        let t_in = vec![s(1), s(1).add(&q(1).mul(&qint_base(2, 1)))];
        assert!(in_a_span(&gens, &t_in));
        assert!(!in_a_span(&gens, &[s(1), s(2)]));
    }

    #[test]
    fn span_membership_handles_rational_function_generators() {
        // Over A, (1/(1-q), 1) and (0, 1) span the same module as
        // ((1-q)^{-1}, 0)-scaled columns; membership of (1/(1-q), 0):
        // t = g1 - g2 works.
        let one_minus_q = s(1).sub(&q(1));
        let g1 = vec![one_minus_q.inv(), s(1)];
        let g2 = vec![s(0), s(1)];
        let t = vec![one_minus_q.inv(), s(0)];
        assert!(in_a_span(&[g1.clone(), g2.clone()], &t));
        // (1, 0) = (1-q) * g1 - (1-q) * g2 also lies in the span.
        assert!(in_a_span(&[g1.clone(), g2.clone()], &[s(1), s(0)]));
        // But (1/(1-q)^2, 0) does not.
        let t2 = vec![one_minus_q.inv().pow(2), s(0)];
        assert!(!in_a_span(&[g1, g2], &t2));
    }
}
