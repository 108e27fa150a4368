use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::directed;

/// A closed dyadic interval `[(mid - rad) / 2^scale, (mid + rad) / 2^scale]`.
///
/// The represented real is guaranteed to lie inside. `precision_bits` records
/// the working precision the interval was produced at.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalValue {
    mid: BigInt,
    rad: BigInt,
    scale: u32,
    precision_bits: u32,
}

pub(crate) fn floor_shr(x: &BigInt, k: u32) -> BigInt {
    // BigInt >> rounds toward negative infinity
    x >> k
}

pub(crate) fn ceil_shr(x: &BigInt, k: u32) -> BigInt {
    -((-x) >> k)
}

pub(crate) fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

pub(crate) fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

impl IntervalValue {
    /// Interval with the given integer endpoints at `scale` fractional bits.
    ///
    /// Stored at `scale + 1` so that the endpoints are reproduced exactly.
    pub fn from_bounds(lo: BigInt, hi: BigInt, scale: u32, precision_bits: u32) -> Self {
        debug_assert!(lo <= hi);
        IntervalValue {
            mid: &lo + &hi,
            rad: hi - lo,
            scale: scale + 1,
            precision_bits,
        }
    }

    pub fn exact_int(n: BigInt) -> Self {
        IntervalValue {
            mid: n,
            rad: BigInt::zero(),
            scale: 0,
            precision_bits: u32::MAX,
        }
    }

    pub fn zero() -> Self {
        Self::exact_int(BigInt::zero())
    }

    /// Outward-rounded enclosure of a rational at `bits` fractional bits.
    pub fn from_rational(r: &BigRational, bits: u32) -> Self {
        let num = r.numer() << bits;
        let lo = floor_div(&num, r.denom());
        let hi = ceil_div(&num, r.denom());
        if lo == hi {
            let mut v = IntervalValue {
                mid: lo,
                rad: BigInt::zero(),
                scale: bits,
                precision_bits: bits,
            };
            v.normalize_exact();
            v.precision_bits = bits;
            return v;
        }
        Self::from_bounds(lo, hi, bits, bits)
    }

    /// Strip trailing zero bits of an exact value so exact integers compare cleanly.
    fn normalize_exact(&mut self) {
        if !self.rad.is_zero() {
            return;
        }
        if self.mid.is_zero() {
            self.scale = 0;
            return;
        }
        let tz = self.mid.trailing_zeros().unwrap_or(0) as u32;
        let k = tz.min(self.scale);
        if k > 0 {
            self.mid >>= k;
            self.scale -= k;
        }
    }

    pub fn mid_raw(&self) -> &BigInt {
        &self.mid
    }

    pub fn rad_raw(&self) -> &BigInt {
        &self.rad
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub(crate) fn with_precision_bits(mut self, bits: u32) -> Self {
        self.precision_bits = bits;
        self
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    /// Integer endpoints at this interval's own scale.
    pub fn raw_bounds(&self) -> (BigInt, BigInt) {
        (&self.mid - &self.rad, &self.mid + &self.rad)
    }

    /// Integer endpoints `(lo, hi)` at `scale` fractional bits, rounded outward.
    pub fn bounds_at_scale(&self, scale: u32) -> (BigInt, BigInt) {
        let (lo, hi) = self.raw_bounds();
        if scale >= self.scale {
            let k = scale - self.scale;
            (lo << k, hi << k)
        } else {
            let k = self.scale - scale;
            (floor_shr(&lo, k), ceil_shr(&hi, k))
        }
    }

    pub fn lower(&self) -> BigRational {
        let (lo, _) = self.raw_bounds();
        BigRational::new(lo, BigInt::one() << self.scale)
    }

    pub fn upper(&self) -> BigRational {
        let (_, hi) = self.raw_bounds();
        BigRational::new(hi, BigInt::one() << self.scale)
    }

    pub fn midpoint(&self) -> BigRational {
        BigRational::new(self.mid.clone(), BigInt::one() << self.scale)
    }

    pub fn radius(&self) -> BigRational {
        BigRational::new(self.rad.clone(), BigInt::one() << self.scale)
    }

    pub fn contains(&self, r: &BigRational) -> bool {
        &self.lower() <= r && r <= &self.upper()
    }

    /// `true` when `self` is a subset of `other`.
    pub fn is_within(&self, other: &IntervalValue) -> bool {
        other.lower() <= self.lower() && self.upper() <= other.upper()
    }

    pub fn lower_f64(&self) -> f64 {
        let (lo, _) = self.raw_bounds();
        scaled_to_f64(&lo, self.scale, false)
    }

    pub fn upper_f64(&self) -> f64 {
        let (_, hi) = self.raw_bounds();
        scaled_to_f64(&hi, self.scale, true)
    }

    pub fn mid_f64(&self) -> f64 {
        self.midpoint().to_f64().unwrap_or(f64::NAN)
    }

    /// Radius rounded up to f64.
    pub fn rad_f64(&self) -> f64 {
        scaled_to_f64(&self.rad, self.scale, true)
    }

    /// Sign-aware ordering against a rational, when the interval decides it.
    ///
    /// `Some(Equal)` only for a point interval equal to `t`.
    pub fn cmp_rational(&self, t: &BigRational) -> Option<Ordering> {
        let (lo, hi) = self.raw_bounds();
        // compare lo/2^s and hi/2^s against n/d  <=>  lo*d vs n*2^s
        let d = t.denom();
        let n_scaled = t.numer() << self.scale;
        let lo_d = &lo * d;
        let hi_d = &hi * d;
        if hi_d < n_scaled {
            Some(Ordering::Less)
        } else if lo_d > n_scaled {
            Some(Ordering::Greater)
        } else if lo_d == n_scaled && hi_d == n_scaled {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn neg(&self) -> Self {
        IntervalValue {
            mid: -&self.mid,
            rad: self.rad.clone(),
            scale: self.scale,
            precision_bits: self.precision_bits,
        }
    }

    pub fn add(&self, other: &IntervalValue) -> Self {
        let s = self.scale.max(other.scale);
        let (m1, r1) = self.lift(s);
        let (m2, r2) = other.lift(s);
        let mut v = IntervalValue {
            mid: m1 + m2,
            rad: r1 + r2,
            scale: s,
            precision_bits: self.precision_bits.min(other.precision_bits),
        };
        v.normalize_exact();
        v
    }

    pub fn sub(&self, other: &IntervalValue) -> Self {
        self.add(&other.neg())
    }

    pub fn add_int(&self, n: &BigInt) -> Self {
        let mut v = self.clone();
        v.mid += n << self.scale;
        v
    }

    pub fn mul_int(&self, k: &BigInt) -> Self {
        let mut v = IntervalValue {
            mid: &self.mid * k,
            rad: &self.rad * k.abs(),
            scale: self.scale,
            precision_bits: self.precision_bits,
        };
        v.normalize_exact();
        v
    }

    /// Interval product, rounded outward to at most `scale` fractional bits.
    pub fn mul(&self, other: &IntervalValue, scale: u32) -> Self {
        let mid = &self.mid * &other.mid;
        let rad = self.mid.abs() * &other.rad + other.mid.abs() * &self.rad + &self.rad * &other.rad;
        let s = self.scale + other.scale;
        let prec = self.precision_bits.min(other.precision_bits);
        if s <= scale {
            let mut v = IntervalValue {
                mid,
                rad,
                scale: s,
                precision_bits: prec,
            };
            v.normalize_exact();
            return v;
        }
        let k = s - scale;
        let lo = floor_shr(&(&mid - &rad), k);
        let hi = ceil_shr(&(&mid + &rad), k);
        if lo == hi {
            let mut v = IntervalValue {
                mid: lo,
                rad: BigInt::zero(),
                scale,
                precision_bits: prec,
            };
            v.normalize_exact();
            return v;
        }
        Self::from_bounds(lo, hi, scale, prec)
    }

    /// Hull of |x|.
    pub fn abs(&self) -> Self {
        let (lo, hi) = self.raw_bounds();
        if lo.sign() != Sign::Minus {
            return self.clone();
        }
        if hi.sign() != Sign::Plus {
            return self.neg();
        }
        let top = (-lo).max(hi);
        IntervalValue {
            mid: top.clone(),
            rad: top,
            scale: self.scale + 1,
            precision_bits: self.precision_bits,
        }
    }

    fn lift(&self, s: u32) -> (BigInt, BigInt) {
        let k = s - self.scale;
        (&self.mid << k, &self.rad << k)
    }
}

/// `x / 2^scale` rounded to f64 in the requested direction.
pub(crate) fn scaled_to_f64(x: &BigInt, scale: u32, up: bool) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let neg = x.sign() == Sign::Minus;
    let mag = x.magnitude();
    let bits = mag.bits() as i64;
    // keep 64 significant bits; track whether anything was discarded
    let shift = (bits - 64).max(0);
    let top: u128 = (mag >> shift as usize).to_u128().unwrap();
    let inexact = shift > 0 && mag.trailing_zeros().unwrap_or(0) < shift as u64;
    // magnitude bounds in units of 2^(shift - scale)
    let round_mag_up = up != neg;
    let mut m = if round_mag_up {
        let t = top + inexact as u128;
        directed::u128_up(t)
    } else {
        directed::u128_down(top)
    };
    let exp = shift - scale as i64;
    m = ldexp(m, exp, round_mag_up);
    if neg {
        -m
    } else {
        m
    }
}

// m * 2^e for m >= 0, with outward handling of underflow.
fn ldexp(mut m: f64, mut e: i64, up: bool) -> f64 {
    while e > 0 {
        let step = e.min(1000);
        m *= 2f64.powi(step as i32);
        e -= step;
    }
    while e < 0 {
        let step = (-e).min(1000);
        let f = 2f64.powi(-(step as i32));
        let r = m * f;
        // scaling by a power of two is exact unless the result is subnormal
        if r != 0.0 && r.is_normal() {
            m = r;
        } else if up {
            m = if m > 0.0 { r.max(f64::from_bits(1)).next_up() } else { 0.0 };
        } else {
            m = if r > 0.0 { r.next_down().max(0.0) } else { 0.0 };
        }
        e += step;
    }
    m
}

impl fmt::Display for IntervalValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ± {:e}", self.mid_f64(), self.rad_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn rational_enclosure_is_tight() {
        let v = IntervalValue::from_rational(&rat(3, 7), 64);
        assert!(v.contains(&rat(3, 7)));
        let width = v.upper() - v.lower();
        assert!(width <= BigRational::new(1.into(), BigInt::one() << 63));
    }

    #[test]
    fn dyadic_rational_is_exact() {
        let v = IntervalValue::from_rational(&rat(-5, 4), 64);
        assert!(v.is_exact());
        assert_eq!(v.midpoint(), rat(-5, 4));
        assert_eq!(v.cmp_rational(&rat(-5, 4)), Some(Ordering::Equal));
    }

    #[test]
    fn comparison_against_rational() {
        let v = IntervalValue::from_rational(&rat(1, 3), 40);
        assert_eq!(v.cmp_rational(&rat(1, 2)), Some(Ordering::Less));
        assert_eq!(v.cmp_rational(&rat(1, 4)), Some(Ordering::Greater));
        assert_eq!(v.cmp_rational(&rat(1, 3)), None);
    }

    #[test]
    fn f64_views_bracket() {
        let v = IntervalValue::from_rational(&rat(1, 3), 200);
        assert!(v.lower_f64() <= 1.0 / 3.0 + 1e-17);
        assert!(v.lower_f64() < v.upper_f64());
        assert!((v.mid_f64() - 1.0 / 3.0).abs() < 1e-16);
        let n = IntervalValue::from_rational(&rat(-1, 3), 200);
        assert!(n.lower_f64() < -0.333333 && n.upper_f64() > -0.3333334);
        assert!(n.lower_f64() <= n.upper_f64());
    }

    #[test]
    fn arithmetic_encloses() {
        let a = IntervalValue::from_rational(&rat(1, 3), 80);
        let b = IntervalValue::from_rational(&rat(2, 7), 80);
        assert!(a.add(&b).contains(&rat(13, 21)));
        assert!(a.sub(&b).contains(&rat(1, 21)));
        assert!(a.mul(&b, 80).contains(&rat(2, 21)));
        assert!(a.mul_int(&BigInt::from(-9)).contains(&rat(-3, 1)));
        assert!(a.neg().abs().contains(&rat(1, 3)));
    }

    #[test]
    fn abs_of_straddling_interval() {
        let v = IntervalValue::from_bounds(BigInt::from(-3), BigInt::from(5), 0, 8);
        let a = v.abs();
        assert_eq!(a.lower(), rat(0, 1));
        assert_eq!(a.upper(), rat(5, 1));
    }
}
