//! Error-controlled real arithmetic.
//!
//! Every quantity compared by the counting code is either decided from a
//! dyadic enclosure, or (for exact inputs) symbolically when it might sit
//! exactly on the threshold.

pub mod directed;
mod expr;
pub(crate) mod fast;
mod interval;
mod spec;
mod surd;

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub use expr::Expr;
pub use interval::IntervalValue;
pub(crate) use interval::scaled_to_f64;
pub use spec::{eval_real, parse_components, RealSpec};
pub use surd::{squarefree_split, SurdSum};

use crate::alpha::AlphaVector;
use crate::error::{Error, Result};

/// Precision ladder used when a comparison is not separated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionBudget {
    pub start_bits: u32,
    pub max_bits: u32,
    pub escalation_factor: u32,
}

impl Default for PrecisionBudget {
    fn default() -> Self {
        PrecisionBudget {
            start_bits: 128,
            max_bits: 4096,
            escalation_factor: 2,
        }
    }
}

impl PrecisionBudget {
    pub fn new(start_bits: u32, max_bits: u32, escalation_factor: u32) -> Result<Self> {
        if start_bits < 8 || start_bits > max_bits || escalation_factor < 2 {
            return Err(Error::InvalidArgument(format!(
                "invalid precision budget {start_bits}..{max_bits} x{escalation_factor}"
            )));
        }
        Ok(PrecisionBudget {
            start_bits,
            max_bits,
            escalation_factor,
        })
    }

    /// Successive working precisions, ending at `max_bits`.
    pub fn ladder(&self) -> impl Iterator<Item = u32> {
        let (max, factor) = (self.max_bits, self.escalation_factor);
        let mut next = Some(self.start_bits);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur >= max {
                None
            } else {
                Some(cur.saturating_mul(factor).min(max))
            };
            Some(cur)
        })
    }
}

/// Comparison operators accepted by [`decide`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Comparison {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
}

impl Comparison {
    pub fn holds(self, ord: Ordering) -> bool {
        match self {
            Comparison::Lt => ord == Ordering::Less,
            Comparison::Le => ord != Ordering::Greater,
            Comparison::Gt => ord == Ordering::Greater,
            Comparison::Ge => ord != Ordering::Less,
            Comparison::Eq => ord == Ordering::Equal,
        }
    }
}

/// Rigorous ordering of `expr` against a rational threshold.
///
/// Escalates precision along the budget ladder. Exact expressions that sit on
/// the threshold are detected symbolically, so they always terminate.
pub fn compare(expr: &Expr, threshold: &BigRational, budget: &PrecisionBudget) -> Result<Ordering> {
    let exact = expr.exact();
    if let Some(s) = &exact {
        if let Some(r) = s.as_rational() {
            return Ok(r.cmp(threshold));
        }
    }
    let mut checked_equal = false;
    for bits in budget.ladder() {
        let iv = match &exact {
            Some(s) => s.eval(bits),
            None => expr.eval(bits)?,
        };
        if let Some(ord) = iv.cmp_rational(threshold) {
            return Ok(ord);
        }
        if !checked_equal {
            checked_equal = true;
            if let Some(s) = &exact {
                if s.sub(&SurdSum::rational(threshold.clone())).is_zero() {
                    return Ok(Ordering::Equal);
                }
            }
        }
    }
    Err(Error::PrecisionExhausted {
        max_bits: budget.max_bits,
    })
}

/// Decides `expr <cmp> threshold`.
pub fn decide(expr: &Expr, cmp: Comparison, threshold: &BigRational, budget: &PrecisionBudget) -> Result<bool> {
    compare(expr, threshold, budget).map(|o| cmp.holds(o))
}

/// `‖x‖` with the nearest integer and the half-integer tie flag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NearestDistance {
    pub dist: IntervalValue,
    /// `None` when the enclosure does not single out one nearest integer.
    pub nearest_int: Option<BigInt>,
    pub tie: bool,
}

/// Encloses the distance from `x` to the nearest integer.
pub fn dist_nearest_int(x: &IntervalValue) -> NearestDistance {
    let s = x.scale().max(1);
    let (lo, hi) = x.bounds_at_scale(s);
    let one = BigInt::one() << s;
    let half = BigInt::one() << (s - 1);
    let exists_between = |a: &BigInt, b: &BigInt| interval::floor_shr(b, s) >= interval::ceil_shr(a, s);
    let contains_half = exists_between(&(&lo - &half), &(&hi - &half));
    let frac_dist = |v: &BigInt| -> BigInt {
        let r = ((v % &one) + &one) % &one;
        let other = &one - &r;
        r.min(other)
    };
    if !contains_half {
        let n = interval::floor_shr(&(&lo + &half), s);
        let n_scaled = &n << s;
        let (dlo, dhi) = if lo >= n_scaled {
            (&lo - &n_scaled, &hi - &n_scaled)
        } else if hi <= n_scaled {
            (&n_scaled - &hi, &n_scaled - &lo)
        } else {
            (BigInt::zero(), (&n_scaled - &lo).max(&hi - &n_scaled))
        };
        return NearestDistance {
            dist: IntervalValue::from_bounds(dlo, dhi, s, x.precision_bits()).shrink(),
            nearest_int: Some(n),
            tie: false,
        };
    }
    let dlo = if exists_between(&lo, &hi) {
        BigInt::zero()
    } else {
        frac_dist(&lo).min(frac_dist(&hi))
    };
    NearestDistance {
        dist: IntervalValue::from_bounds(dlo, half, s, x.precision_bits()).shrink(),
        nearest_int: None,
        tie: true,
    }
}

impl IntervalValue {
    // point intervals produced by from_bounds carry a redundant scale bit
    fn shrink(self) -> Self {
        if self.is_exact() {
            let v = self.midpoint();
            let bits = self.precision_bits();
            return IntervalValue::from_rational(&v, self.scale()).with_precision_bits(bits);
        }
        self
    }
}

/// Enclosure of `alpha · q`. Exact coordinates are combined symbolically
/// first, so rational cancellations come out with radius zero.
pub fn inner_product(alpha: &AlphaVector, q: &[i64], bits: u32) -> Result<IntervalValue> {
    if q.len() != alpha.dim() {
        return Err(Error::DimensionMismatch {
            expected: alpha.dim(),
            got: q.len(),
        });
    }
    if q.iter().all(|&c| c == 0) {
        return Ok(IntervalValue::zero().with_precision_bits(bits));
    }
    if let Some(s) = alpha.dot_exact(q) {
        return Ok(s.eval(bits));
    }
    let mut acc = IntervalValue::zero().with_precision_bits(bits);
    for (c, &k) in alpha.components().iter().zip(q) {
        if k != 0 {
            acc = acc.add(&eval_real(c, bits)?.mul_int(&BigInt::from(k)));
        }
    }
    Ok(acc)
}

/// Distance to the nearest integer expressed as an exact-capable expression.
#[derive(Clone, Debug)]
pub struct DistanceForm {
    /// Non-negative expression equal to `‖x‖`.
    pub expr: Expr,
    /// Integer `n` with `‖x‖ = |x - n|`.
    pub nearest: BigInt,
    /// `x` is exactly a half-integer.
    pub half_tie: bool,
    /// `x` is exactly an integer.
    pub zero: bool,
}

/// Resolves which integer is nearest to `x` and the sign of `x - n`,
/// escalating precision as needed.
pub fn distance_form(x: &Expr, budget: &PrecisionBudget) -> Result<DistanceForm> {
    for bits in budget.ladder() {
        let iv = x.eval(bits)?;
        let nd = dist_nearest_int(&iv);
        if let Some(n) = nd.nearest_int {
            let diff = x.clone().sub(Expr::int(n.clone()));
            return finish_form(diff, n, false, budget);
        }
        // width below one: a unique half-integer candidate decides the side
        if iv.upper() - iv.lower() < BigRational::one() {
            let h = (iv.midpoint() - BigRational::new(1.into(), 2.into())).round() + BigRational::new(1.into(), 2.into());
            if iv.contains(&h) {
                match compare(x, &h, budget)? {
                    Ordering::Equal => {
                        let n = h.floor().to_integer();
                        let diff = x.clone().sub(Expr::int(n.clone()));
                        return Ok(DistanceForm {
                            expr: diff,
                            nearest: n,
                            half_tie: true,
                            zero: false,
                        });
                    }
                    Ordering::Less => {
                        let n = h.floor().to_integer();
                        return finish_form(x.clone().sub(Expr::int(n.clone())), n, false, budget);
                    }
                    Ordering::Greater => {
                        let n = h.ceil().to_integer();
                        return finish_form(x.clone().sub(Expr::int(n.clone())), n, false, budget);
                    }
                }
            }
        }
    }
    Err(Error::PrecisionExhausted {
        max_bits: budget.max_bits,
    })
}

fn finish_form(diff: Expr, n: BigInt, half_tie: bool, budget: &PrecisionBudget) -> Result<DistanceForm> {
    let (expr, zero) = match compare(&diff, &BigRational::zero(), budget)? {
        Ordering::Equal => (Expr::int(BigInt::zero()), true),
        Ordering::Greater => (diff, false),
        Ordering::Less => (diff.neg(), false),
    };
    Ok(DistanceForm {
        expr,
        nearest: n,
        half_tie,
        zero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn exact(v: BigRational) -> IntervalValue {
        IntervalValue::from_rational(&v, 64)
    }

    #[test]
    fn ladder_escalates_to_ceiling() {
        let b = PrecisionBudget::default();
        assert_eq!(b.ladder().collect::<Vec<_>>(), vec![128, 256, 512, 1024, 2048, 4096]);
        let b = PrecisionBudget::new(100, 300, 3).unwrap();
        assert_eq!(b.ladder().collect::<Vec<_>>(), vec![100, 300]);
        assert!(PrecisionBudget::new(64, 32, 2).is_err());
    }

    #[test]
    fn distance_examples() {
        let d = dist_nearest_int(&exact(r(9, 4)));
        assert_eq!(d.dist.midpoint(), r(1, 4));
        assert!(d.dist.is_exact());
        assert_eq!(d.nearest_int, Some(BigInt::from(2)));
        assert!(!d.tie);

        let d = dist_nearest_int(&exact(r(-3, 10)));
        assert!(d.dist.contains(&r(3, 10)));
        assert_eq!(d.nearest_int, Some(BigInt::from(0)));
        assert!(!d.tie);

        let d = dist_nearest_int(&exact(r(1, 2)));
        assert!(d.tie);
        assert_eq!(d.dist.upper(), r(1, 2));
        assert!(d.dist.contains(&r(1, 2)));
    }

    #[test]
    fn exact_integer_distance_is_zero() {
        let d = dist_nearest_int(&IntervalValue::exact_int(BigInt::from(-7)));
        assert_eq!(d.dist.midpoint(), r(0, 1));
        assert_eq!(d.nearest_int, Some(BigInt::from(-7)));
    }

    #[test]
    fn golden_ratio_distance_decides_against_quarter() {
        let g = RealSpec::quadratic(1, 1, 5, 2).unwrap();
        let alpha = AlphaVector::new(vec![g]).unwrap();
        let x = Expr::dot(&alpha, &[1]);
        let form = distance_form(&x, &PrecisionBudget::default()).unwrap();
        assert_eq!(form.nearest, BigInt::from(2));
        let le = decide(&form.expr, Comparison::Le, &r(1, 4), &PrecisionBudget::default()).unwrap();
        assert!(!le);
    }

    #[test]
    fn zero_compares_equal_to_zero() {
        let e = Expr::int(BigInt::zero());
        assert!(decide(&e, Comparison::Le, &r(0, 1), &PrecisionBudget::default()).unwrap());
    }

    #[test]
    fn decimal_on_threshold_exhausts_precision() {
        let d = RealSpec::decimal("0.5", 8).unwrap();
        let e = Expr::real(d);
        let err = decide(&e, Comparison::Le, &r(1, 2), &PrecisionBudget::default()).unwrap_err();
        assert_eq!(err, Error::PrecisionExhausted { max_bits: 4096 });
    }

    #[test]
    fn exact_equality_terminates() {
        // (1+√5)/2 - √5/2 == 1/2 exactly
        let e = Expr::real(RealSpec::quadratic(1, 1, 5, 2).unwrap())
            .sub(Expr::sqrt_int(5u32.into()).mul(Expr::rational(r(1, 2))));
        assert_eq!(compare(&e, &r(1, 2), &PrecisionBudget::default()).unwrap(), Ordering::Equal);
    }

    #[test]
    fn inner_product_examples() {
        let s2 = RealSpec::quadratic(0, 1, 2, 1).unwrap();
        let s3 = RealSpec::quadratic(0, 1, 3, 1).unwrap();
        let a = AlphaVector::new(vec![s2, s3]).unwrap();
        let v = inner_product(&a, &[1, 1], 64).unwrap();
        assert!(v.lower_f64() <= 3.146_264_369_941_972 && v.upper_f64() >= 3.146_264_369_941_972);
        assert!(v.rad_f64() <= 2.0 * 2f64.powi(-63));
        let z = inner_product(&a, &[0, 0], 64).unwrap();
        assert!(z.is_exact() && z.midpoint().is_zero());
        assert!(matches!(inner_product(&a, &[1], 64), Err(Error::DimensionMismatch { .. })));

        let third = AlphaVector::new(vec![RealSpec::rational(3, 7).unwrap()]).unwrap();
        let v = inner_product(&third, &[7], 64).unwrap();
        assert!(v.is_exact());
        assert_eq!(v.midpoint(), r(3, 1));
    }

    #[test]
    fn half_integer_tie_is_resolved_exactly() {
        let half = AlphaVector::new(vec![RealSpec::rational(1, 2).unwrap()]).unwrap();
        let form = distance_form(&Expr::dot(&half, &[3]), &PrecisionBudget::default()).unwrap();
        assert!(form.half_tie);
    }
}
