//! Exact arithmetic on finite sums `r_0 + Σ r_j √s_j` with rational `r_j`
//! and distinct squarefree `s_j > 1`.
//!
//! Square roots of distinct squarefree integers are linearly independent
//! over the rationals, so such a sum is zero iff every coefficient is zero.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::interval::{ceil_div, floor_div, IntervalValue};

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SurdSum {
    // radicand 1 holds the rational part
    terms: BTreeMap<BigUint, BigRational>,
}

/// Splits `d` as `f^2 * s` with `s` squarefree.
pub fn squarefree_split(d: u64) -> (u64, u64) {
    if d == 0 {
        return (0, 1);
    }
    let mut rest = d;
    let mut f = 1u64;
    let mut s = 1u64;
    let mut p = 2u64;
    // after removing primes up to cbrt(d), what remains has at most two prime factors
    let limit = (d as f64).cbrt() as u64 + 2;
    while p <= limit && p * p <= rest {
        let mut e = 0;
        while rest % p == 0 {
            rest /= p;
            e += 1;
        }
        for _ in 0..e / 2 {
            f *= p;
        }
        if e % 2 == 1 {
            s *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        let r = rest.sqrt();
        if r * r == rest {
            f *= r;
        } else {
            s *= rest;
        }
    }
    (f, s)
}

impl SurdSum {
    pub fn zero() -> Self {
        SurdSum::default()
    }

    pub fn rational(r: BigRational) -> Self {
        let mut s = SurdSum::zero();
        s.add_term(BigUint::one(), r);
        s
    }

    pub fn int(n: i64) -> Self {
        Self::rational(BigRational::from_integer(n.into()))
    }

    /// `coeff * √k` for any non-negative integer `k`.
    pub fn sqrt_term(coeff: BigRational, k: &BigUint) -> Self {
        if k.is_zero() {
            return SurdSum::zero();
        }
        let (f, s) = squarefree_big(k);
        let mut out = SurdSum::zero();
        out.add_term(s, coeff * BigRational::from_integer(f.into()));
        out
    }

    fn add_term(&mut self, radicand: BigUint, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(radicand.clone()).or_insert_with(BigRational::zero);
        *slot += coeff;
        if slot.is_zero() {
            self.terms.remove(&radicand);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Rational value when no surd terms remain.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&BigUint::one()).cloned(),
            _ => None,
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BigUint, &BigRational)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &SurdSum) -> SurdSum {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> SurdSum {
        SurdSum {
            terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &SurdSum) -> SurdSum {
        self.add(&other.neg())
    }

    pub fn scale(&self, r: &BigRational) -> SurdSum {
        if r.is_zero() {
            return SurdSum::zero();
        }
        SurdSum {
            terms: self.terms.iter().map(|(k, c)| (k.clone(), c * r)).collect(),
        }
    }

    pub fn mul(&self, other: &SurdSum) -> SurdSum {
        let mut out = SurdSum::zero();
        for (s, a) in &self.terms {
            for (t, b) in &other.terms {
                // √s √t = g √((s/g)(t/g)) for squarefree s, t with g = gcd(s, t)
                let g = s.gcd(t);
                let k = (s / &g) * (t / &g);
                out.add_term(k, a * b * BigRational::from_integer(BigInt::from(g)));
            }
        }
        out
    }

    /// Outward-rounded enclosure with width at most `2^(1 - bits)` per unit of
    /// magnitude, exact when the sum is a dyadic rational.
    pub fn eval(&self, bits: u32) -> IntervalValue {
        if let Some(r) = self.as_rational() {
            return IntervalValue::from_rational(&r, bits);
        }
        let nterms = self.terms.len() as u64;
        let coeff_bits = self
            .terms
            .values()
            .map(|c| c.numer().bits() as i64 - c.denom().bits() as i64 + 2)
            .max()
            .unwrap_or(0)
            .max(0) as u32;
        let guard = coeff_bits + (64 - nterms.leading_zeros()) + 3;
        let s = bits + guard;
        let mut lo = BigInt::zero();
        let mut hi = BigInt::zero();
        for (k, c) in &self.terms {
            let (a, b) = (c.numer(), c.denom());
            if k.is_one() {
                let num = a << s;
                lo += floor_div(&num, b);
                hi += ceil_div(&num, b);
                continue;
            }
            // √k · 2^s ∈ (r, r + 1) since k is not a square
            let r = BigInt::from((k << (2 * s as usize)).sqrt());
            let (x0, x1) = if a.is_negative() {
                (a * (&r + 1u32), a * &r)
            } else {
                (a * &r, a * (&r + 1u32))
            };
            lo += floor_div(&x0, b);
            hi += ceil_div(&x1, b);
        }
        IntervalValue::from_bounds(lo, hi, s, bits)
    }
}

fn squarefree_big(k: &BigUint) -> (BigUint, BigUint) {
    match u64::try_from(k) {
        Ok(v) => {
            let (f, s) = squarefree_split(v);
            (f.into(), s.into())
        }
        Err(_) => {
            // products of squarefree radicands: peel small primes, keep the rest
            let mut rest = k.clone();
            let mut f = BigUint::one();
            let mut s = BigUint::one();
            let mut p = 2u32;
            while p < 100_000 {
                let bp = BigUint::from(p);
                let mut e = 0;
                while (&rest % &bp).is_zero() {
                    rest /= &bp;
                    e += 1;
                }
                for _ in 0..e / 2 {
                    f *= &bp;
                }
                if e % 2 == 1 {
                    s *= &bp;
                }
                p += if p == 2 { 1 } else { 2 };
            }
            let r = rest.sqrt();
            if &r * &r == rest {
                f *= r;
            } else {
                s *= rest;
            }
            (f, s)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn squarefree_decomposition() {
        assert_eq!(squarefree_split(12), (2, 3));
        assert_eq!(squarefree_split(5), (1, 5));
        assert_eq!(squarefree_split(49), (7, 1));
        assert_eq!(squarefree_split(2 * 9 * 25), (15, 2));
        // large prime squared
        let p = 1_000_003u64;
        assert_eq!(squarefree_split(p * p), (p, 1));
        assert_eq!(squarefree_split(p * 1_000_033), (1, p * 1_000_033));
    }

    #[test]
    fn golden_ratio_identity() {
        // phi^2 = phi + 1
        let phi = SurdSum::rational(q(1, 2)).add(&SurdSum::sqrt_term(q(1, 2), &5u32.into()));
        let lhs = phi.mul(&phi);
        let rhs = phi.add(&SurdSum::int(1));
        assert!(lhs.sub(&rhs).is_zero());
    }

    #[test]
    fn sqrt_products_reduce() {
        let s2 = SurdSum::sqrt_term(q(1, 1), &2u32.into());
        let s6 = SurdSum::sqrt_term(q(1, 1), &6u32.into());
        let s3 = SurdSum::sqrt_term(q(1, 1), &3u32.into());
        assert_eq!(s2.mul(&s3), s6);
        assert_eq!(s6.mul(&s2), SurdSum::sqrt_term(q(2, 1), &3u32.into()));
        assert_eq!(s2.mul(&s2).as_rational(), Some(q(2, 1)));
    }

    #[test]
    fn eval_encloses_sqrt2_plus_sqrt3() {
        let v = SurdSum::sqrt_term(q(1, 1), &2u32.into()).add(&SurdSum::sqrt_term(q(1, 1), &3u32.into()));
        let iv = v.eval(64);
        let lo = iv.lower_f64();
        let hi = iv.upper_f64();
        assert!(lo <= 3.146_264_369_941_972 && 3.146_264_369_941_972 <= hi);
        assert!(iv.rad_f64() <= 2f64.powi(-63));
    }
}
