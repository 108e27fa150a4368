//! Exact parsing of scalar and grid arguments.

use std::str::FromStr;

use fracparts::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

const MAX_GRID: usize = 10_000;

fn bad(what: &str, src: &str) -> Error {
    Error::InvalidArgument(format!("cannot parse {what} from {src:?}"))
}

/// An exact rational from `a/b` or a plain decimal like `0.25`.
pub fn parse_rational(src: &str) -> Result<BigRational> {
    let s = src.trim();
    if s.contains('/') {
        let r = BigRational::from_str(s).map_err(|_| bad("a rational", src))?;
        return Ok(r);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty()
        || !int.bytes().all(|b| b.is_ascii_digit())
        || !frac.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(bad("a number", src));
    }
    let digits = format!("{int}{frac}");
    let num = BigInt::from_str(&digits).map_err(|_| bad("a number", src))?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(num, den);
    Ok(if neg { -r } else { r })
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `start:stop:factor` (geometric, inclusive of `stop` when hit), a comma list,
/// or a single value. Factors below one give decreasing grids.
pub fn parse_grid(src: &str) -> Result<Vec<BigRational>> {
    let parts: Vec<&str> = src.split(':').collect();
    match parts.len() {
        1 => src.split(',').map(parse_rational).collect(),
        3 => {
            let start = parse_rational(parts[0])?;
            let stop = parse_rational(parts[1])?;
            let factor = parse_rational(parts[2])?;
            if !start.is_positive() || !stop.is_positive() || !factor.is_positive() || factor.is_one() {
                return Err(Error::InvalidArgument(format!(
                    "grid {src:?} needs positive start, stop and a factor other than 1"
                )));
            }
            let up = factor > BigRational::one();
            let mut out = Vec::new();
            let mut x = start;
            while if up { x <= stop } else { x >= stop } {
                if out.len() == MAX_GRID {
                    return Err(Error::InvalidArgument(format!("grid {src:?} exceeds {MAX_GRID} points")));
                }
                out.push(x.clone());
                x *= &factor;
            }
            if out.is_empty() {
                return Err(Error::InvalidArgument(format!("grid {src:?} is empty")));
            }
            Ok(out)
        }
        _ => Err(bad("a grid", src)),
    }
}

pub fn parse_f64_grid(src: &str) -> Result<Vec<f64>> {
    Ok(parse_grid(src)?.iter().map(rational_to_f64).collect())
}

pub fn parse_positive(src: &str) -> Result<f64> {
    let x = rational_to_f64(&parse_rational(src)?);
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(Error::InvalidArgument(format!("expected a positive number, got {src:?}")))
    }
}

/// Rendering used in summaries: `a/b` or the integer.
pub fn render_rational(r: &BigRational) -> String {
    if r.denom().is_one() || r.numer().is_zero() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
