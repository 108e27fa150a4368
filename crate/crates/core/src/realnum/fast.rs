//! Fixed-point evaluation of `alpha · q mod 1` at 128 fractional bits.
//!
//! Only the fractional parts of the coordinates matter for `‖alpha · q‖`, so
//! the dot product is computed with wrapping `u128` arithmetic. Callers fall
//! back to the escalating path whenever an enclosure is not decisive.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use super::directed::{u128_down, u128_up, TWO_POW_M128};
use super::{eval_real, PrecisionBudget};
use crate::alpha::AlphaVector;
use crate::error::Result;

pub(crate) const SCALE: u32 = 128;
const HALF: u128 = 1 << 127;
const RADIUS_LIMIT: u128 = 1 << 126;

#[derive(Clone, Debug)]
pub(crate) struct FastDot {
    frac: Vec<u128>,
    rad: Vec<u128>,
    full: Vec<BigInt>,
}

/// `alpha · q` is within `r` of `f` modulo 2^128, in units of 2^-128.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct FracEnclosure {
    pub f: u128,
    pub r: u128,
}

impl FastDot {
    /// `None` when the budget asks for more than 128 starting bits.
    pub fn new(alpha: &AlphaVector, budget: &PrecisionBudget) -> Result<Option<Self>> {
        if budget.start_bits > SCALE {
            return Ok(None);
        }
        let modulus = BigInt::one() << SCALE;
        let mut frac = Vec::with_capacity(alpha.dim());
        let mut rad = Vec::with_capacity(alpha.dim());
        let mut full = Vec::with_capacity(alpha.dim());
        for c in alpha.components() {
            let (lo, hi) = eval_real(c, SCALE + 4)?.bounds_at_scale(SCALE);
            let width = (&hi - &lo).to_u128();
            let Some(width) = width.filter(|w| *w < RADIUS_LIMIT) else {
                return Ok(None);
            };
            frac.push(lo.mod_floor(&modulus).to_u128().expect("reduced"));
            rad.push(width);
            full.push(lo);
        }
        Ok(Some(FastDot { frac, rad, full }))
    }

    pub fn enclose(&self, q: &[i64]) -> Option<FracEnclosure> {
        let mut f = 0u128;
        let mut r = 0u128;
        for ((&k, &a), &w) in q.iter().zip(&self.frac).zip(&self.rad) {
            f = f.wrapping_add((k as i128 as u128).wrapping_mul(a));
            r = r.checked_add((k.unsigned_abs() as u128).checked_mul(w)?)?;
        }
        (r < RADIUS_LIMIT).then_some(FracEnclosure { f, r })
    }

    /// Nearest integer to `alpha · q`, valid when the enclosure is clear of
    /// half-integers.
    pub fn nearest_int(&self, q: &[i64]) -> BigInt {
        let mut x = BigInt::from(0);
        for (&k, lo) in q.iter().zip(&self.full) {
            x += lo * k;
        }
        (x + (BigInt::one() << (SCALE - 1))) >> SCALE
    }
}

impl FracEnclosure {
    /// Bounds on `‖alpha · q‖` in units of 2^-128.
    pub fn dist_units(&self) -> (u128, u128) {
        let d = self.f.min(self.f.wrapping_neg());
        (d.saturating_sub(self.r), (d + self.r).min(HALF))
    }

    /// Outward f64 bounds on `‖alpha · q‖`.
    pub fn dist_f64(&self) -> (f64, f64) {
        let (lo, hi) = self.dist_units();
        (u128_down(lo) * TWO_POW_M128, u128_up(hi) * TWO_POW_M128)
    }

    /// The enclosure reaches a half-integer, so the nearest integer is not
    /// pinned down.
    pub fn may_touch_half(&self) -> bool {
        let d = self.f.min(self.f.wrapping_neg());
        d + self.r >= HALF
    }
}
