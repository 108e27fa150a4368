//! Chunked box enumeration and the per-q distance kernels every routine shares.

use std::cmp::Ordering;
use std::ops::Range;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::alpha::AlphaVector;
use crate::error::{Error, Result};
use crate::realnum::directed::{mul_down, mul_up};
use crate::realnum::fast::FastDot;
use crate::realnum::{compare, dist_nearest_int, distance_form, inner_product, DistanceForm, Expr, PrecisionBudget};

/// Knobs shared by every enumeration. Results never depend on `chunks`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub budget: PrecisionBudget,
    pub chunks: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            budget: PrecisionBudget::default(),
            chunks: 8,
        }
    }
}

impl RunConfig {
    pub fn with_chunks(mut self, chunks: usize) -> Self {
        self.chunks = chunks.max(1);
        self
    }

    pub fn with_budget(mut self, budget: PrecisionBudget) -> Self {
        self.budget = budget;
        self
    }
}

/// The integer box `[-r_1, r_1] x ... x [-r_N, r_N]`, flattened in
/// lexicographic order (last coordinate fastest).
#[derive(Clone, Debug)]
pub(crate) struct IntBox {
    radii: Vec<i64>,
    total: u64,
}

impl IntBox {
    pub fn new(radii: Vec<i64>) -> Result<Self> {
        let mut total: u64 = 1;
        for &r in &radii {
            let side = u64::try_from(2 * r + 1).map_err(|_| Error::InvalidArgument("negative box radius".into()))?;
            total = total
                .checked_mul(side)
                .ok_or_else(|| Error::InvalidArgument("box too large to enumerate".into()))?;
        }
        Ok(IntBox { radii, total })
    }

    pub fn cube(n: usize, r: i64) -> Result<Self> {
        Self::new(vec![r; n])
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Index of the origin. Indices above it are exactly the q whose first
    /// nonzero coordinate is positive.
    pub fn center(&self) -> u64 {
        (self.total - 1) / 2
    }

    pub fn full(&self) -> Range<u64> {
        0..self.total
    }

    pub fn half(&self) -> Range<u64> {
        self.center() + 1..self.total
    }

    fn point(&self, mut idx: u64, out: &mut [i64]) {
        for i in (0..self.radii.len()).rev() {
            let side = (2 * self.radii[i] + 1) as u64;
            out[i] = (idx % side) as i64 - self.radii[i];
            idx /= side;
        }
    }

    /// Calls `f` on every point of `range`, in index order.
    pub fn for_each<F>(&self, range: Range<u64>, mut f: F) -> Result<()>
    where
        F: FnMut(&[i64]) -> Result<()>,
    {
        if range.is_empty() {
            return Ok(());
        }
        let n = self.radii.len();
        let mut q = vec![0i64; n];
        self.point(range.start, &mut q);
        for _ in range {
            f(&q)?;
            for i in (0..n).rev() {
                if q[i] < self.radii[i] {
                    q[i] += 1;
                    break;
                }
                q[i] = -self.radii[i];
            }
        }
        Ok(())
    }
}

/// Splits `range` into `chunks` contiguous pieces, runs `f` on each in
/// parallel and returns the results in range order. The first error in range
/// order wins.
pub(crate) fn chunked<T, F>(range: Range<u64>, chunks: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(Range<u64>) -> Result<T> + Sync,
{
    let chunks = chunks.max(1) as u128;
    let len = (range.end - range.start) as u128;
    let bounds: Vec<Range<u64>> = (0..chunks)
        .map(|i| {
            let a = range.start + (len * i / chunks) as u64;
            let b = range.start + (len * (i + 1) / chunks) as u64;
            a..b
        })
        .collect();
    bounds.into_par_iter().map(&f).collect::<Vec<_>>().into_iter().collect()
}

pub(crate) fn floor_radius(q: f64) -> Result<i64> {
    if !q.is_finite() || q < 0.0 {
        return Err(Error::InvalidArgument(format!("box radius must be finite and non-negative, got {q}")));
    }
    if q >= 1e15 {
        return Err(Error::InvalidArgument(format!("box radius {q} is too large")));
    }
    Ok(q.floor() as i64)
}

/// f64 enclosure of `‖alpha · q‖`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct DistBounds {
    pub lo: f64,
    pub hi: f64,
    /// The enclosure reaches 1/2, so the nearest integer is undetermined.
    pub may_half: bool,
}

/// Per-vector evaluation of `‖alpha · q‖`: a fixed-point path first, then
/// escalating enclosures and exact forms.
pub(crate) struct Evaluator<'a> {
    pub alpha: &'a AlphaVector,
    pub budget: PrecisionBudget,
    fast: Option<FastDot>,
}

impl<'a> Evaluator<'a> {
    pub fn new(alpha: &'a AlphaVector, budget: PrecisionBudget) -> Result<Self> {
        Ok(Evaluator {
            alpha,
            budget,
            fast: FastDot::new(alpha, &budget)?,
        })
    }

    pub fn quick(&self, q: &[i64]) -> Option<DistBounds> {
        let e = self.fast.as_ref()?.enclose(q)?;
        let (lo, hi) = e.dist_f64();
        Some(DistBounds {
            lo,
            hi,
            may_half: e.may_touch_half(),
        })
    }

    pub fn bounds(&self, q: &[i64]) -> Result<DistBounds> {
        if let Some(b) = self.quick(q) {
            return Ok(b);
        }
        let x = inner_product(self.alpha, q, self.budget.start_bits)?;
        let nd = dist_nearest_int(&x);
        Ok(DistBounds {
            lo: nd.dist.lower_f64().max(0.0),
            hi: nd.dist.upper_f64().min(0.5),
            may_half: nd.tie,
        })
    }

    pub fn dot(&self, q: &[i64]) -> Expr {
        Expr::dot(self.alpha, q)
    }

    /// Exact or escalated description of `‖alpha · q‖`.
    pub fn form(&self, q: &[i64]) -> Result<DistanceForm> {
        distance_form(&self.dot(q), &self.budget)
    }

    /// Nearest integer to `alpha · q` when the enclosure is clear of 1/2.
    pub fn nearest(&self, q: &[i64]) -> Result<BigInt> {
        if let (Some(f), Some(b)) = (self.fast.as_ref(), self.quick(q)) {
            if !b.may_half {
                return Ok(f.nearest_int(q));
            }
        }
        Ok(self.form(q)?.nearest)
    }

    /// Enclosure with a positive lower bound, or `Resonance`.
    pub fn positive_bounds(&self, q: &[i64]) -> Result<DistBounds> {
        let b = self.bounds(q)?;
        if b.lo > 0.0 {
            return Ok(b);
        }
        let form = self.form(q)?;
        if form.zero {
            return Err(Error::Resonance(q.to_vec()));
        }
        for bits in self.budget.ladder() {
            let iv = match form.expr.exact() {
                Some(s) => s.eval(bits),
                None => form.expr.eval(bits)?,
            };
            let lo = iv.lower_f64();
            if lo > 0.0 {
                return Ok(DistBounds {
                    lo,
                    hi: iv.upper_f64().min(0.5),
                    may_half: b.may_half,
                });
            }
        }
        Err(Error::PrecisionExhausted {
            max_bits: self.budget.max_bits,
        })
    }

    /// Number of integers p with `|alpha · q + p| <= eps`, and whether a
    /// boundary case (equality or a half-integer) was met.
    pub fn count_p(&self, q: &[i64], eps: &Threshold) -> Result<(u32, bool)> {
        let b = self.bounds(q)?;
        if b.hi < eps.lo {
            // strictly inside, and below 1/2
            return Ok((1, false));
        }
        if b.lo > eps.hi {
            return Ok((0, false));
        }
        let form = self.form(q)?;
        if form.half_tie {
            return Ok(if eps.is_half { (2, true) } else { (0, false) });
        }
        Ok(match compare(&form.expr, &eps.exact, &self.budget)? {
            Ordering::Less => (1, false),
            Ordering::Equal => (1, true),
            Ordering::Greater => (0, false),
        })
    }

    /// Weighted candidate `weight · ‖alpha · q‖` for minimum tracking.
    pub fn candidate(&self, q: &[i64], weight: u64) -> Result<Candidate> {
        let b = self.positive_bounds(q)?;
        let w = weight as f64;
        Ok(Candidate {
            q: q.to_vec(),
            weight,
            lo: mul_down(b.lo, w),
            hi: mul_up(b.hi, w),
        })
    }

    /// Rigorous ordering of two weighted candidates.
    pub fn cmp_candidates(&self, a: &Candidate, b: &Candidate) -> Result<Ordering> {
        if a.hi < b.lo {
            return Ok(Ordering::Less);
        }
        if a.lo > b.hi {
            return Ok(Ordering::Greater);
        }
        let ea = self.form(&a.q)?.expr.mul(Expr::int(a.weight));
        let eb = self.form(&b.q)?.expr.mul(Expr::int(b.weight));
        compare(&ea.sub(eb), &BigRational::zero(), &self.budget)
    }

    /// Keeps the smaller of `best` and `cand`; ties keep `best`.
    pub fn keep_min(&self, best: &mut Option<Candidate>, cand: Candidate) -> Result<()> {
        match best {
            None => *best = Some(cand),
            Some(cur) => {
                if cand.lo > cur.hi {
                    return Ok(());
                }
                if self.cmp_candidates(&cand, cur)? == Ordering::Less {
                    *best = Some(cand);
                }
            }
        }
        Ok(())
    }
}

/// `weight · ‖alpha · q‖` with an f64 enclosure.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Candidate {
    pub q: Vec<i64>,
    pub weight: u64,
    pub lo: f64,
    pub hi: f64,
}

impl Candidate {
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// A rational threshold with outward f64 bounds.
#[derive(Clone, Debug)]
pub(crate) struct Threshold {
    pub exact: BigRational,
    pub lo: f64,
    pub hi: f64,
    pub is_half: bool,
}

impl Threshold {
    pub fn new(exact: BigRational) -> Self {
        let iv = crate::realnum::IntervalValue::from_rational(&exact, 80);
        let is_half = exact == BigRational::new(1.into(), 2.into());
        Threshold {
            lo: iv.lower_f64(),
            hi: iv.upper_f64(),
            exact,
            is_half,
        }
    }
}

/// Exact rational value of a finite f64.
pub(crate) fn rational_of(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::InvalidArgument(format!("{x} is not finite")))
}

pub(crate) fn bigint_to_i64(n: &BigInt) -> Result<i64> {
    n.to_i64()
        .ok_or_else(|| Error::InvalidArgument(format!("integer {n} does not fit in 64 bits")))
}

/// `s^n`, or an error when it does not fit comfortably in an f64 mantissa.
pub(crate) fn weight(s: i64, n: usize) -> Result<u64> {
    let mut w: u64 = 1;
    for _ in 0..n {
        w = w
            .checked_mul(s as u64)
            .filter(|&v| v < 1 << 53)
            .ok_or_else(|| Error::InvalidArgument(format!("|q|^N overflows at shell {s}")))?;
    }
    Ok(w)
}
