use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::interval::{ceil_div, floor_div, IntervalValue};
use super::surd::{squarefree_split, SurdSum};
use crate::error::{Error, Result};

/// A real number given exactly, or as a decimal with declared uncertainty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RealSpec {
    Rational(BigRational),
    /// `(a + b·√d) / c`
    QuadraticSurd {
        a: BigInt,
        b: BigInt,
        d: u64,
        c: BigInt,
    },
    /// A finite decimal. Its uncertainty is half a unit in the last written
    /// digit, or `2^-precision_bits`, whichever is wider.
    DecimalLiteral { digits: String, precision_bits: u32 },
}

impl RealSpec {
    pub fn rational(n: impl Into<BigInt>, d: impl Into<BigInt>) -> Result<Self> {
        let d = d.into();
        if d.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(RealSpec::Rational(BigRational::new(n.into(), d)))
    }

    /// `(a + b√d)/c`, normalized so that `c > 0` and `gcd(a, b, c) = 1`.
    ///
    /// A zero `b` collapses to a rational.
    pub fn quadratic(a: impl Into<BigInt>, b: impl Into<BigInt>, d: u64, c: impl Into<BigInt>) -> Result<Self> {
        let (mut a, mut b, mut c) = (a.into(), b.into(), c.into());
        if c.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let r = d.sqrt();
        if r * r == d {
            return Err(Error::NonsquareViolation(d.to_string()));
        }
        if b.is_zero() {
            return Ok(RealSpec::Rational(BigRational::new(a, c)));
        }
        if c.is_negative() {
            a = -a;
            b = -b;
            c = -c;
        }
        let g = a.gcd(&b).gcd(&c);
        if !g.is_one() {
            a /= &g;
            b /= &g;
            c /= &g;
        }
        Ok(RealSpec::QuadraticSurd { a, b, d, c })
    }

    pub fn decimal(digits: &str, precision_bits: u32) -> Result<Self> {
        if precision_bits < 8 {
            return Err(Error::InvalidArgument(format!(
                "decimal precision must be at least 8 bits, got {precision_bits}"
            )));
        }
        parse_decimal(digits).map_err(|m| Error::Parse {
            position: 0,
            message: m,
        })?;
        Ok(RealSpec::DecimalLiteral {
            digits: digits.to_string(),
            precision_bits,
        })
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, RealSpec::DecimalLiteral { .. })
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, RealSpec::Rational(_))
    }

    /// Exact representation, `None` for decimals.
    pub fn to_surd(&self) -> Option<SurdSum> {
        match self {
            RealSpec::Rational(r) => Some(SurdSum::rational(r.clone())),
            RealSpec::QuadraticSurd { a, b, d, c } => {
                let (f, s) = squarefree_split(*d);
                let rat = SurdSum::rational(BigRational::new(a.clone(), c.clone()));
                let coeff = BigRational::new(b * BigInt::from(f), c.clone());
                Some(rat.add(&SurdSum::sqrt_term(coeff, &BigUint::from(s))))
            }
            RealSpec::DecimalLiteral { .. } => None,
        }
    }

    /// Decimal value and declared half-width.
    fn decimal_parts(&self) -> Option<(BigRational, BigRational)> {
        match self {
            RealSpec::DecimalLiteral { digits, precision_bits } => {
                let (v, frac) = parse_decimal(digits).ok()?;
                let half_ulp = BigRational::new(BigInt::from(5), BigInt::from(10u32).pow(frac as u32 + 1));
                let bin = BigRational::new(BigInt::one(), BigInt::one() << *precision_bits);
                Some((v, half_ulp.max(bin)))
            }
            _ => None,
        }
    }

    pub fn approx_f64(&self) -> f64 {
        eval_real(self, 64).map(|v| v.mid_f64()).unwrap_or(f64::NAN)
    }
}

/// Parses `[-]digits[.digits]` into its exact value and fractional digit count.
pub(crate) fn parse_decimal(s: &str) -> std::result::Result<(BigRational, usize), String> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part.bytes().all(|c| c.is_ascii_digit())
        || !frac_part.bytes().all(|c| c.is_ascii_digit())
    {
        return Err(format!("not a finite decimal: {s:?}"));
    }
    let all = format!("{int_part}{frac_part}");
    let mut n: BigInt = if all.is_empty() {
        BigInt::zero()
    } else {
        all.parse().map_err(|_| format!("not a finite decimal: {s:?}"))?
    };
    if neg {
        n = -n;
    }
    let den = BigInt::from(10u32).pow(frac_part.len() as u32);
    Ok((BigRational::new(n, den), frac_part.len()))
}

/// Guaranteed enclosure of `spec` with width at most `2^(1-bits)·max(1, |value|)`
/// for exact variants. Decimals never get tighter than their declared uncertainty.
pub fn eval_real(spec: &RealSpec, bits: u32) -> Result<IntervalValue> {
    match spec {
        RealSpec::Rational(r) => {
            if r.denom().is_zero() {
                return Err(Error::ZeroDenominator);
            }
            Ok(IntervalValue::from_rational(r, bits))
        }
        RealSpec::QuadraticSurd { d, c, .. } => {
            if c.is_zero() {
                return Err(Error::ZeroDenominator);
            }
            let r = d.sqrt();
            if r * r == *d {
                return Err(Error::NonsquareViolation(d.to_string()));
            }
            Ok(spec.to_surd().expect("exact").eval(bits))
        }
        RealSpec::DecimalLiteral { .. } => {
            let (v, u) = spec
                .decimal_parts()
                .ok_or_else(|| Error::Parse {
                    position: 0,
                    message: "bad decimal".into(),
                })?;
            let s = bits + 2;
            let lo_r = (&v - &u) * BigRational::from_integer(BigInt::one() << s);
            let hi_r = (&v + &u) * BigRational::from_integer(BigInt::one() << s);
            let lo = floor_div(lo_r.numer(), lo_r.denom());
            let hi = ceil_div(hi_r.numer(), hi_r.denom());
            let rad_bits = (&hi - &lo).bits() as i64;
            let mag_bits = (lo.abs().max(hi.abs()) >> s).bits() as i64;
            let effective = (s as i64 + mag_bits - rad_bits).clamp(1, bits as i64) as u32;
            Ok(IntervalValue::from_bounds(lo, hi, s, effective))
        }
    }
}

impl fmt::Display for RealSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealSpec::Rational(r) => write!(f, "rat:{}/{}", r.numer(), r.denom()),
            RealSpec::QuadraticSurd { a, b, d, c } => write!(f, "quad:({a}+{b}*sqrt({d}))/{c}"),
            RealSpec::DecimalLiteral { digits, precision_bits } => write!(f, "dec:{digits}@{precision_bits}"),
        }
    }
}

/// Recursive-descent parser for one component of the alpha grammar.
struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            position: self.pos,
            message: message.into(),
        })
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn expect(&mut self, tok: &str) -> Result<()> {
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            Ok(())
        } else {
            self.err(format!("expected {tok:?}"))
        }
    }

    fn int(&mut self) -> Result<BigInt> {
        let rest = self.rest();
        let mut end = 0;
        let bytes = rest.as_bytes();
        if end < bytes.len() && (bytes[end] == b'-' || bytes[end] == b'+') {
            end += 1;
        }
        let digits_start = end;
        while end < bytes.len() && bytes[end].is_ascii_digit() {
            end += 1;
        }
        if end == digits_start {
            return self.err("expected an integer");
        }
        let v: BigInt = rest[..end].parse().map_err(|_| Error::Parse {
            position: self.pos,
            message: "bad integer".into(),
        })?;
        self.pos += end;
        Ok(v)
    }

    fn posint(&mut self) -> Result<BigInt> {
        let at = self.pos;
        let v = self.int()?;
        if !v.is_positive() || self.src[at..].starts_with('+') {
            self.pos = at;
            return self.err("expected a positive integer");
        }
        Ok(v)
    }

    fn component(&mut self) -> Result<RealSpec> {
        let start = self.pos;
        if self.rest().starts_with("rat:") {
            self.pos += 4;
            let n = self.int()?;
            self.expect("/")?;
            let d = self.posint()?;
            return RealSpec::rational(n, d);
        }
        if self.rest().starts_with("quad:") {
            self.pos += 5;
            self.expect("(")?;
            let a = self.int()?;
            self.expect("+")?;
            let b = self.int()?;
            self.expect("*sqrt(")?;
            let d_at = self.pos;
            let d = self.posint()?;
            self.expect("))/")?;
            let c = self.posint()?;
            let d = u64::try_from(&d).map_err(|_| Error::Parse {
                position: d_at,
                message: "radicand must fit in 64 bits".into(),
            })?;
            return RealSpec::quadratic(a, b, d, c).map_err(|e| match e {
                Error::NonsquareViolation(d) => Error::Parse {
                    position: d_at,
                    message: format!("radicand {d} is a perfect square"),
                },
                other => other,
            });
        }
        if self.rest().starts_with("dec:") {
            self.pos += 4;
            let body = self.rest();
            let end = body.find(['@', ',']).unwrap_or(body.len());
            let digits = &body[..end];
            if let Err(m) = parse_decimal(digits) {
                return self.err(m);
            }
            self.pos += end;
            self.expect("@")?;
            let bits_at = self.pos;
            let bits = self.posint()?;
            let bits = u32::try_from(&bits).map_err(|_| Error::Parse {
                position: bits_at,
                message: "precision out of range".into(),
            })?;
            return RealSpec::decimal(digits, bits).map_err(|e| Error::Parse {
                position: bits_at,
                message: e.to_string(),
            });
        }
        self.pos = start;
        self.err("expected one of rat:, quad:, dec:")
    }
}

/// Parses a comma-separated list of components.
pub fn parse_components(src: &str) -> Result<Vec<RealSpec>> {
    let mut cur = Cursor { src, pos: 0 };
    let mut out = vec![cur.component()?];
    while cur.pos < src.len() {
        cur.expect(",")?;
        out.push(cur.component()?);
    }
    Ok(out)
}

impl FromStr for RealSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut v = parse_components(s)?;
        if v.len() != 1 {
            return Err(Error::Parse {
                position: 0,
                message: "expected a single component".into(),
            });
        }
        Ok(v.remove(0))
    }
}
