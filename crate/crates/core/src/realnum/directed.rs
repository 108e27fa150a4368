//! Outward-rounded f64 helpers.
//!
//! Every function returns a bound on the exact real result in the requested
//! direction. Exact results are returned unchanged, so dyadic inputs stay
//! exact through the reciprocal pipeline.

/// 2^-128 as an f64 (exact).
pub const TWO_POW_M128: f64 = 2.938_735_877_055_718_8e-39;

/// Largest f64 that is <= `v`.
pub fn u128_down(v: u128) -> f64 {
    let f = v as f64;
    if f > 0.0 && (f >= 3.402_823_669_209_384_6e38 || f as u128 > v) {
        f.next_down()
    } else {
        f
    }
}

/// Smallest f64 that is >= `v`.
pub fn u128_up(v: u128) -> f64 {
    let f = v as f64;
    if f >= 3.402_823_669_209_384_6e38 {
        // 2^128 itself, which no u128 reaches
        return f;
    }
    if (f as u128) < v {
        f.next_up()
    } else {
        f
    }
}

/// Lower bound of `a / b` for positive finite operands.
pub fn div_down(a: f64, b: f64) -> f64 {
    let q = a / b;
    // residual a - q*b is exact under fma
    if (-q).mul_add(b, a) < 0.0 {
        q.next_down()
    } else {
        q
    }
}

/// Upper bound of `a / b` for positive finite operands.
pub fn div_up(a: f64, b: f64) -> f64 {
    let q = a / b;
    if (-q).mul_add(b, a) > 0.0 {
        q.next_up()
    } else {
        q
    }
}

/// Lower bound of `a * b` for non-negative finite operands.
pub fn mul_down(a: f64, b: f64) -> f64 {
    let p = a * b;
    if a.mul_add(b, -p) < 0.0 {
        p.next_down()
    } else {
        p
    }
}

/// Upper bound of `a * b` for non-negative finite operands.
pub fn mul_up(a: f64, b: f64) -> f64 {
    let p = a * b;
    if a.mul_add(b, -p) > 0.0 {
        p.next_up()
    } else {
        p
    }
}

/// Lower bound of `a - b`.
pub fn sub_down(a: f64, b: f64) -> f64 {
    let s = a - b;
    let (err, _) = two_sum_err(a, -b, s);
    if err < 0.0 {
        s.next_down()
    } else {
        s
    }
}

/// Upper bound of `a + b`.
pub fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    let (err, _) = two_sum_err(a, b, s);
    if err > 0.0 {
        s.next_up()
    } else {
        s
    }
}

/// Lower bound of `a + b`.
pub fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    let (err, _) = two_sum_err(a, b, s);
    if err < 0.0 {
        s.next_down()
    } else {
        s
    }
}

// Knuth's TwoSum: a + b = s + err exactly.
fn two_sum_err(a: f64, b: f64, s: f64) -> (f64, f64) {
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (err, bb)
}

/// f64 enclosure of `n` (exact when n < 2^53).
pub fn u64_bounds(n: u64) -> (f64, f64) {
    (u128_down(n as u128), u128_up(n as u128))
}
