use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::interval::IntervalValue;
use super::spec::{eval_real, RealSpec};
use super::surd::SurdSum;
use crate::alpha::AlphaVector;
use crate::error::Result;

/// Small arithmetic expression over real specs, evaluated either as an
/// enclosure at a given precision or exactly when every leaf is exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Rat(BigRational),
    Real(RealSpec),
    SqrtInt(BigUint),
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
}

impl Expr {
    pub fn rational(r: BigRational) -> Self {
        Expr::Rat(r)
    }

    pub fn int(n: impl Into<BigInt>) -> Self {
        Expr::Rat(BigRational::from_integer(n.into()))
    }

    pub fn real(spec: RealSpec) -> Self {
        Expr::Real(spec)
    }

    pub fn sqrt_int(k: BigUint) -> Self {
        Expr::SqrtInt(k)
    }

    /// `alpha · q` as a sum of scaled coordinates.
    pub fn dot(alpha: &AlphaVector, q: &[i64]) -> Self {
        let mut acc = Expr::int(0);
        for (c, &k) in alpha.components().iter().zip(q) {
            if k != 0 {
                acc = acc.add(Expr::int(k).mul(Expr::Real(c.clone())));
            }
        }
        acc
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: Expr) -> Self {
        match (&self, &other) {
            (Expr::Rat(a), _) if a.is_zero() => other,
            (_, Expr::Rat(b)) if b.is_zero() => self,
            _ => Expr::Add(Box::new(self), Box::new(other)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(self, other: Expr) -> Self {
        self.add(other.neg())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, other: Expr) -> Self {
        match (&self, &other) {
            (Expr::Rat(a), _) if a.is_one() => other,
            (_, Expr::Rat(b)) if b.is_one() => self,
            _ => Expr::Mul(Box::new(self), Box::new(other)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Self {
        match self {
            Expr::Rat(r) => Expr::Rat(-r),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    /// Exact value, `None` if any leaf is a decimal literal.
    pub fn exact(&self) -> Option<SurdSum> {
        Some(match self {
            Expr::Rat(r) => SurdSum::rational(r.clone()),
            Expr::Real(spec) => spec.to_surd()?,
            Expr::SqrtInt(k) => SurdSum::sqrt_term(BigRational::one(), k),
            Expr::Add(a, b) => a.exact()?.add(&b.exact()?),
            Expr::Mul(a, b) => a.exact()?.mul(&b.exact()?),
            Expr::Neg(a) => a.exact()?.neg(),
        })
    }

    /// Structural enclosure. Exact expressions should go through
    /// [`SurdSum::eval`] instead, which is tighter.
    pub fn eval(&self, bits: u32) -> Result<IntervalValue> {
        Ok(match self {
            Expr::Rat(r) => IntervalValue::from_rational(r, bits),
            Expr::Real(spec) => eval_real(spec, bits)?,
            Expr::SqrtInt(k) => {
                let s = bits + 1;
                let r = BigInt::from((k << (2 * s as usize)).sqrt());
                let sq = &r * &r;
                let scaled = BigInt::from(k.clone()) << (2 * s as usize);
                if sq == scaled {
                    IntervalValue::from_bounds(r.clone(), r, s, bits)
                } else {
                    IntervalValue::from_bounds(r.clone(), r + 1u32, s, bits)
                }
            }
            Expr::Add(a, b) => a.eval(bits + 2)?.add(&b.eval(bits + 2)?),
            Expr::Neg(a) => a.eval(bits)?.neg(),
            Expr::Mul(a, b) => {
                // guard bits for the magnitude of the other factor
                let ga = magnitude_bits(b)?;
                let gb = magnitude_bits(a)?;
                let x = a.eval(bits + ga + 2)?;
                let y = b.eval(bits + gb + 2)?;
                x.mul(&y, bits + 2)
            }
        })
    }
}

fn magnitude_bits(e: &Expr) -> Result<u32> {
    let v = e.eval(16)?;
    let m = v.upper_f64().abs().max(v.lower_f64().abs()).max(1.0);
    Ok(m.log2().ceil() as u32 + 1)
}
