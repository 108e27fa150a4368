//! `S(alpha, X) = Σ_{q ∈ X ∩ Z^N \ {0}} ‖alpha · q‖^{-1}`, dyadic shell profiles,
//! and the sandwich and gap-principle checks built on them.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Zero};
use serde::Serialize;

use crate::alpha::AlphaVector;
use crate::enumerate::{chunked, floor_radius, rational_of, Candidate, DistBounds, Evaluator, IntBox, RunConfig};
use crate::error::{Error, Result};
use crate::phi::PhiTable;
use crate::realnum::directed::{div_down, div_up, sub_down};
use crate::realnum::{compare, scaled_to_f64, Expr};
use crate::report::{fmt15, fmt_vec, rows_to_csv, to_json};

/// Fractional bits of the reciprocal accumulator.
const FIXED_BITS: u32 = 64;

/// `[-Q_1, Q_1] x ... x [-Q_N, Q_N]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxSpec {
    pub radii: Vec<f64>,
}

impl BoxSpec {
    pub fn new(radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() || radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::InvalidArgument("box radii must be positive and finite".into()));
        }
        Ok(BoxSpec { radii })
    }

    pub fn cube(n: usize, q: f64) -> Result<Self> {
        Self::new(vec![q; n])
    }

    /// `(Q_1 ... Q_N)^{1/N}`.
    pub fn geometric_mean(&self) -> f64 {
        let n = self.radii.len() as f64;
        (self.radii.iter().map(|r| r.ln()).sum::<f64>() / n).exp()
    }

    pub fn is_cube(&self) -> bool {
        self.radii.windows(2).all(|w| w[0] == w[1])
    }

    fn int_box(&self) -> Result<IntBox> {
        IntBox::new(self.radii.iter().map(|&r| floor_radius(r)).collect::<Result<_>>()?)
    }
}

// Exact sum of reciprocal bounds in units of 2^-64. Reciprocals are >= 2, so
// every f64 bound is an integer multiple of 2^-64.
#[derive(Clone, Debug, Default)]
struct FixedAcc {
    lo: i128,
    hi: i128,
    spill_lo: BigInt,
    spill_hi: BigInt,
}

fn push(small: &mut i128, spill: &mut BigInt, v: f64) {
    let scaled = v * 2f64.powi(FIXED_BITS as i32);
    if scaled < 1.7e38 {
        let k = scaled as i128;
        debug_assert_eq!(k as f64, scaled);
        match small.checked_add(k) {
            Some(s) => *small = s,
            None => {
                *spill += BigInt::from(*small) + k;
                *small = 0;
            }
        }
    } else {
        *spill += BigInt::from_f64(scaled).expect("finite");
    }
}

impl FixedAcc {
    fn add(&mut self, lo: f64, hi: f64) {
        push(&mut self.lo, &mut self.spill_lo, lo);
        push(&mut self.hi, &mut self.spill_hi, hi);
    }

    fn totals(&self) -> (BigInt, BigInt) {
        (&self.spill_lo + self.lo, &self.spill_hi + self.hi)
    }
}

/// Rigorous enclosure of the reciprocal sum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SumResult {
    pub radii: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
    pub terms: u64,
    pub min_fractional_part: Option<f64>,
    pub witness: Option<Vec<i64>>,
    #[serde(skip)]
    lower_raw: BigInt,
    #[serde(skip)]
    upper_raw: BigInt,
}

impl SumResult {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn radius(&self) -> f64 {
        0.5 * (self.upper - self.lower)
    }

    /// Exact bounds as rationals.
    pub fn exact_bounds(&self) -> (BigRational, BigRational) {
        let den = BigInt::one() << FIXED_BITS;
        (
            BigRational::new(self.lower_raw.clone(), den.clone()),
            BigRational::new(self.upper_raw.clone(), den),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        to_json(self)
    }

    pub fn to_csv(&self) -> Result<String> {
        let radii: Vec<String> = self.radii.iter().map(|r| fmt15(*r)).collect();
        rows_to_csv(
            &["radii", "lower", "upper", "midpoint", "radius", "terms", "min_fractional_part", "witness"],
            &[vec![
                radii.join(";"),
                fmt15(self.lower),
                fmt15(self.upper),
                fmt15(self.midpoint()),
                fmt15(self.radius()),
                self.terms.to_string(),
                self.min_fractional_part.map(fmt15).unwrap_or_default(),
                self.witness.as_deref().map(fmt_vec).unwrap_or_default(),
            ]],
        )
    }
}

/// Sums over the half box `q > 0` and doubles, since `‖-x‖ = ‖x‖`.
pub fn sum_reciprocals(alpha: &AlphaVector, bx: &BoxSpec, cfg: &RunConfig) -> Result<SumResult> {
    if bx.radii.len() != alpha.dim() {
        return Err(Error::DimensionMismatch {
            expected: alpha.dim(),
            got: bx.radii.len(),
        });
    }
    let ib = bx.int_box()?;
    let ev = Evaluator::new(alpha, cfg.budget)?;
    let parts = chunked(ib.half(), cfg.chunks, |range| {
        let mut acc = FixedAcc::default();
        let mut best: Option<Candidate> = None;
        ib.for_each(range, |q| {
            let b = ev.positive_bounds(q)?;
            acc.add(div_down(1.0, b.hi), div_up(1.0, b.lo));
            if best.as_ref().is_none_or(|c| b.lo <= c.hi) {
                let cand = Candidate {
                    q: q.to_vec(),
                    weight: 1,
                    lo: b.lo,
                    hi: b.hi,
                };
                ev.keep_min(&mut best, cand)?;
            }
            Ok(())
        })?;
        Ok((acc, best))
    })?;
    let mut lo = BigInt::zero();
    let mut hi = BigInt::zero();
    let mut best: Option<Candidate> = None;
    for (acc, b) in parts {
        let (l, h) = acc.totals();
        lo += l;
        hi += h;
        if let Some(c) = b {
            ev.keep_min(&mut best, c)?;
        }
    }
    lo <<= 1;
    hi <<= 1;
    Ok(SumResult {
        radii: bx.radii.clone(),
        lower: scaled_to_f64(&lo, FIXED_BITS, false),
        upper: scaled_to_f64(&hi, FIXED_BITS, true),
        terms: ib.total() - 1,
        min_fractional_part: best.as_ref().map(Candidate::mid),
        witness: best.map(|c| c.q),
        lower_raw: lo,
        upper_raw: hi,
    })
}

/// Counts of `(p, q) != 0` with `2^{-k-1} < |alpha · q + p| <= 2^{-k}` and
/// `|q|_∞ <= Q`, for `k >= 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DyadicProfile {
    pub q: f64,
    pub shells: BTreeMap<u32, u64>,
    #[serde(skip)]
    pub k_max: u32,
    /// Some value sat exactly on a power of two (kept in the shell below it).
    #[serde(skip)]
    pub ties: bool,
    /// Pairs beyond the first for q with `alpha · q` a half-integer.
    #[serde(skip)]
    pub half_ties: u64,
}

impl DyadicProfile {
    pub fn to_json(&self) -> Result<String> {
        to_json(self)
    }

    pub fn to_csv(&self) -> Result<String> {
        let rows: Vec<Vec<String>> = self
            .shells
            .iter()
            .map(|(k, c)| vec![fmt15(self.q), k.to_string(), c.to_string()])
            .collect();
        rows_to_csv(&["q", "k", "count"], &rows)
    }

    /// `Σ_{j >= k} shells[j]`.
    pub fn tail(&self, k: u32) -> u64 {
        self.shells.range(k..).map(|(_, c)| c).sum()
    }
}

// floor(-log2 v) for 0 < v, read off the binary representation.
fn shell_of(v: f64) -> u32 {
    debug_assert!(v > 0.0);
    let (m, e) = frexp(v);
    // v = m 2^e with m in [1/2, 1)
    let k = if m == 0.5 { 1 - e } else { -e };
    k.max(0) as u32
}

fn frexp(v: f64) -> (f64, i32) {
    let bits = v.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    if exp == 0 {
        let (m, e) = frexp(v * 2f64.powi(64));
        return (m, e - 64);
    }
    let m = f64::from_bits((bits & !(0x7ff << 52)) | (1022 << 52));
    (m, exp - 1022)
}

fn pow2_neg(k: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << k)
}

pub fn dyadic_profile(alpha: &AlphaVector, q: f64, cfg: &RunConfig) -> Result<DyadicProfile> {
    let r = floor_radius(q)?;
    let ib = IntBox::cube(alpha.dim(), r)?;
    let ev = Evaluator::new(alpha, cfg.budget)?;
    let parts = chunked(ib.half(), cfg.chunks, |range| {
        let mut shells: BTreeMap<u32, u64> = BTreeMap::new();
        let mut ties = false;
        let mut half_ties = 0u64;
        ib.for_each(range, |qv| {
            let b: DistBounds = ev.positive_bounds(qv)?;
            let (k_lo, k_hi) = (shell_of(b.hi), shell_of(b.lo));
            let (k, mult) = if k_lo == k_hi && !b.may_half {
                (k_lo, 1)
            } else {
                let form = ev.form(qv)?;
                if form.half_tie {
                    ties = true;
                    half_ties += 2;
                    (1, 2)
                } else {
                    // largest j with d <= 2^-j
                    let mut k = k_lo.max(1);
                    for j in k_lo.max(1) + 1..=k_hi {
                        match compare(&form.expr, &pow2_neg(j), &ev.budget)? {
                            Ordering::Greater => break,
                            Ordering::Equal => {
                                ties = true;
                                k = j;
                                break;
                            }
                            Ordering::Less => k = j,
                        }
                    }
                    if compare(&form.expr, &pow2_neg(k), &ev.budget)? == Ordering::Equal {
                        ties = true;
                    }
                    (k, 1)
                }
            };
            *shells.entry(k).or_insert(0) += 2 * mult;
            Ok(())
        })?;
        Ok((shells, ties, half_ties))
    })?;
    let mut shells = BTreeMap::new();
    let mut ties = false;
    let mut half_ties = 0;
    for (s, t, h) in parts {
        for (k, c) in s {
            *shells.entry(k).or_insert(0) += c;
        }
        ties |= t;
        half_ties += h;
    }
    Ok(DyadicProfile {
        q,
        k_max: shells.keys().next_back().copied().unwrap_or(0),
        shells,
        ties,
        half_ties,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichReport {
    pub lower_sum: f64,
    pub upper_sum: f64,
    pub sum_lower: f64,
    pub sum_upper: f64,
    pub holds: bool,
}

/// `Σ_k 2^k c_k <= S <= Σ_k 2^{k+1} c_k`, compared exactly against the sum's
/// enclosure. A q with `alpha · q` a half-integer contributes two pairs to
/// shell 1 but one summand, so the duplicate is discounted.
pub fn sandwich_check(profile: &DyadicProfile, sum: &SumResult) -> Result<SandwichReport> {
    let r = floor_radius(profile.q)?;
    if !sum.radii.iter().all(|&x| floor_radius(x).ok() == Some(r)) {
        return Err(Error::InvalidArgument("profile and sum must use the same cube".into()));
    }
    let mut lower = BigInt::zero();
    let mut upper = BigInt::zero();
    for (&k, &c) in &profile.shells {
        let c = if k == 1 { c - profile.half_ties } else { c };
        lower += BigInt::from(c) << k;
        upper += BigInt::from(c) << (k + 1);
    }
    let (s_lo, s_hi) = sum.exact_bounds();
    let holds = BigRational::from_integer(lower.clone()) <= s_lo && s_hi <= BigRational::from_integer(upper.clone());
    Ok(SandwichReport {
        lower_sum: scaled_to_f64(&lower, 0, false),
        upper_sum: scaled_to_f64(&upper, 0, true),
        sum_lower: sum.lower,
        sum_upper: sum.upper,
        holds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapReport {
    pub q: f64,
    pub points: u64,
    /// `None` when fewer than two values exist.
    pub min_pairwise_separation: Option<f64>,
    pub min_value: f64,
    pub floor: f64,
    pub holds: bool,
}

impl GapReport {
    pub fn to_csv(&self) -> Result<String> {
        rows_to_csv(
            &["q", "points", "min_pairwise_separation", "min_value", "floor", "holds"],
            &[vec![
                fmt15(self.q),
                self.points.to_string(),
                self.min_pairwise_separation.map(fmt15).unwrap_or_else(|| "inf".into()),
                fmt15(self.min_value),
                fmt15(self.floor),
                self.holds.to_string(),
            ]],
        )
    }
}

/// Distinct values `‖alpha · q‖` over the cube (modulo `±q`) are separated by
/// at least `φ(2Q) / (2Q)^N`, and each is at least that large.
pub fn verify_gap_principle(alpha: &AlphaVector, q: f64, table: &PhiTable, cap: u64, cfg: &RunConfig) -> Result<GapReport> {
    let r = floor_radius(q)?;
    let ib = IntBox::cube(alpha.dim(), r)?;
    if ib.total() > cap {
        return Err(Error::PairCapExceeded {
            cap,
            points: ib.total(),
        });
    }
    let ev = Evaluator::new(alpha, cfg.budget)?;
    let two_q = 2.0 * q;
    let (phi_lo, phi_hi) = table.bounds_at(two_q)?;
    let scale = two_q.powi(alpha.dim() as i32);
    let scale_exact = rational_of(two_q)?.pow(alpha.dim() as i32);
    let f_lo = div_down(phi_lo, scale * (1.0 + 1e-15));
    let f_hi = div_up(phi_hi, scale * (1.0 - 1e-15));
    let f_expr = table
        .value_expr(two_q, &cfg.budget)?
        .mul(Expr::rational(BigRational::one() / scale_exact));
    let zero = BigRational::zero();

    let mut vals: Vec<Candidate> = Vec::new();
    ib.for_each(ib.half(), |qv| {
        let b = ev.positive_bounds(qv)?;
        vals.push(Candidate {
            q: qv.to_vec(),
            weight: 1,
            lo: b.lo,
            hi: b.hi,
        });
        Ok(())
    })?;
    vals.sort_by(|a, b| a.lo.total_cmp(&b.lo).then_with(|| a.q.cmp(&b.q)));

    let mut holds = true;
    for v in &vals {
        let ok = if v.lo >= f_hi {
            true
        } else if v.hi < f_lo {
            false
        } else {
            let e = ev.form(&v.q)?.expr.sub(f_expr.clone());
            compare(&e, &zero, &cfg.budget)? != Ordering::Less
        };
        holds &= ok;
    }
    for i in 0..vals.len() {
        for j in i + 1..vals.len() {
            if sub_down(vals[j].lo, vals[i].hi) >= f_hi {
                break;
            }
            let d = ev.form(&vals[j].q)?.expr.sub(ev.form(&vals[i].q)?.expr);
            let above = compare(&d.clone().sub(f_expr.clone()), &zero, &cfg.budget)? != Ordering::Less;
            let below = compare(&d.add(f_expr.clone()), &zero, &cfg.budget)? != Ordering::Greater;
            holds &= above || below;
        }
    }

    let mut mids: Vec<f64> = vals.iter().map(Candidate::mid).collect();
    mids.sort_by(f64::total_cmp);
    let sep = mids.windows(2).map(|w| w[1] - w[0]).reduce(f64::min);
    Ok(GapReport {
        q,
        points: ib.total(),
        min_pairwise_separation: sep,
        min_value: mids.first().copied().unwrap_or(f64::INFINITY),
        floor: 0.5 * (f_lo + f_hi),
        holds,
    })
}
