//! The empirical maximal φ: `φ(x) = min { |q|_∞^N ‖alpha · q‖ : 0 < |q|_∞ <= x }`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::alpha::AlphaVector;
use crate::enumerate::{chunked, floor_radius, weight, Candidate, Evaluator, IntBox, RunConfig};
use crate::error::{Error, Result};
use crate::realnum::directed::{div_down, div_up};
use crate::realnum::{compare, Expr, IntervalValue, PrecisionBudget};
use crate::report::{fmt15, fmt_vec, rows_to_csv, to_json};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Breakpoint {
    pub x: i64,
    pub value: f64,
    pub witness: Vec<i64>,
    #[serde(skip)]
    pub lo: f64,
    #[serde(skip)]
    pub hi: f64,
}

/// Non-increasing step function with one breakpoint per strict drop.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiTable {
    pub alpha: AlphaVector,
    pub q_max: f64,
    pub breakpoints: Vec<Breakpoint>,
}

#[derive(Serialize)]
struct PhiTableJson<'a> {
    alpha: String,
    q_max: f64,
    breakpoints: &'a [Breakpoint],
}

impl PhiTable {
    fn index_at(&self, x: f64) -> Result<Option<usize>> {
        if x > self.q_max || x.is_nan() {
            return Err(Error::OutOfRange { x, q_max: self.q_max });
        }
        if x < 1.0 {
            return Ok(None);
        }
        let k = self.breakpoints.partition_point(|b| b.x as f64 <= x);
        Ok(k.checked_sub(1))
    }

    /// Enclosure of `φ(x)`.
    pub fn bounds_at(&self, x: f64) -> Result<(f64, f64)> {
        Ok(match self.index_at(x)? {
            None => (1.0, 1.0),
            Some(i) => (self.breakpoints[i].lo, self.breakpoints[i].hi),
        })
    }

    /// `φ(x)` as an expression that can be compared exactly.
    pub fn value_expr(&self, x: f64, budget: &PrecisionBudget) -> Result<Expr> {
        match self.index_at(x)? {
            None => Ok(Expr::int(1)),
            Some(i) => {
                let b = &self.breakpoints[i];
                let ev = Evaluator::new(&self.alpha, *budget)?;
                let w = weight(b.x, self.alpha.dim())?;
                Ok(ev.form(&b.witness)?.expr.mul(Expr::int(w)))
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        to_json(&PhiTableJson {
            alpha: self.alpha.to_string(),
            q_max: self.q_max,
            breakpoints: &self.breakpoints,
        })
    }

    pub fn to_csv(&self) -> Result<String> {
        let rows: Vec<Vec<String>> = self
            .breakpoints
            .iter()
            .map(|b| {
                vec![
                    b.x.to_string(),
                    fmt15(b.value),
                    fmt15(0.5 * (b.hi - b.lo)),
                    fmt_vec(&b.witness),
                ]
            })
            .collect();
        rows_to_csv(&["x", "value", "radius", "witness"], &rows)
    }
}

/// Step-function evaluation of the table; `φ(x) = 1` below 1.
pub fn phi_at(table: &PhiTable, x: f64) -> Result<f64> {
    Ok(match table.index_at(x)? {
        None => 1.0,
        Some(i) => table.breakpoints[i].value,
    })
}

/// Minimum of `s^N ‖alpha · q‖` over the half shell `|q|_∞ = s`, for each
/// `s = 1..=s_max`. Ties keep the lexicographically first vector.
pub(crate) fn shell_minima(alpha: &AlphaVector, s_max: i64, cfg: &RunConfig) -> Result<Vec<Candidate>> {
    let ev = Evaluator::new(alpha, cfg.budget)?;
    let n = alpha.dim();
    let weights: Vec<u64> = (0..=s_max).map(|s| weight(s, n)).collect::<Result<_>>()?;
    let bx = IntBox::cube(n, s_max)?;
    let parts = chunked(bx.half(), cfg.chunks, |range| {
        let mut best: Vec<Option<Candidate>> = vec![None; s_max as usize + 1];
        bx.for_each(range, |q| {
            let s = q.iter().map(|c| c.abs()).max().unwrap_or(0);
            let w = weights[s as usize];
            if let Some(cur) = &best[s as usize] {
                // cheap rejection before building the candidate
                if let Some(b) = ev.quick(q) {
                    if b.lo * (w as f64) > cur.hi * (1.0 + 1e-12) {
                        return Ok(());
                    }
                }
            }
            let c = ev.candidate(q, w)?;
            ev.keep_min(&mut best[s as usize], c)
        })?;
        Ok(best)
    })?;
    let mut merged: Vec<Option<Candidate>> = vec![None; s_max as usize + 1];
    for part in parts {
        for (slot, c) in merged.iter_mut().zip(part) {
            if let Some(c) = c {
                ev.keep_min(slot, c)?;
            }
        }
    }
    merged
        .into_iter()
        .skip(1)
        .map(|c| c.ok_or_else(|| Error::Invariant("empty shell".into())))
        .collect()
}

fn resonance_witness(alpha: &AlphaVector) -> Vec<i64> {
    let mut q = vec![0i64; alpha.dim()];
    if let Some(r) = alpha.components()[0].to_surd().and_then(|s| s.as_rational()) {
        q[0] = r.denom().try_into().unwrap_or(i64::MAX);
    }
    q
}

pub fn compute_phi_table(alpha: &AlphaVector, q_max: f64, cfg: &RunConfig) -> Result<PhiTable> {
    if q_max.is_nan() || q_max < 1.0 {
        return Err(Error::InvalidArgument(format!("q_max must be >= 1, got {q_max}")));
    }
    let s_max = floor_radius(q_max)?;
    let minima = shell_minima(alpha, s_max, cfg)?;
    if alpha.is_resonant() {
        return Err(Error::Resonance(resonance_witness(alpha)));
    }
    let ev = Evaluator::new(alpha, cfg.budget)?;
    let mut breakpoints = Vec::new();
    let mut cur: Option<Candidate> = None;
    for (i, c) in minima.into_iter().enumerate() {
        let drop = match &cur {
            None => true,
            Some(cur) => ev.cmp_candidates(&c, cur)? == Ordering::Less,
        };
        if drop {
            breakpoints.push(Breakpoint {
                x: i as i64 + 1,
                value: c.mid(),
                witness: c.q.clone(),
                lo: c.lo,
                hi: c.hi,
            });
            cur = Some(c);
        }
    }
    Ok(PhiTable {
        alpha: alpha.clone(),
        q_max,
        breakpoints,
    })
}

/// One term of the sequence realizing the sharpness lower bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SharpnessPoint {
    pub q_i: i64,
    pub witness: Vec<i64>,
    pub reciprocal: f64,
}

/// The breakpoint witnesses `q_i` with `‖alpha · q_i‖^{-1} = Q_i^N / φ(Q_i)`.
pub fn sharpness_sequence(table: &PhiTable, cfg: &RunConfig) -> Result<Vec<SharpnessPoint>> {
    let ev = Evaluator::new(&table.alpha, cfg.budget)?;
    let n = table.alpha.dim();
    let mut out = Vec::with_capacity(table.breakpoints.len());
    for b in &table.breakpoints {
        let w = weight(b.x, n)? as f64;
        let d = ev.positive_bounds(&b.witness)?;
        let (r_lo, r_hi) = (div_down(1.0, d.hi), div_up(1.0, d.lo));
        let (s_lo, s_hi) = (div_down(w, b.hi), div_up(w, b.lo));
        if r_hi < s_lo || s_hi < r_lo {
            return Err(Error::Invariant(format!(
                "sharpness identity fails at q = {}",
                fmt_vec(&b.witness)
            )));
        }
        out.push(SharpnessPoint {
            q_i: b.x,
            witness: b.witness.clone(),
            reciprocal: 0.5 * (r_lo + r_hi),
        });
    }
    Ok(out)
}

pub fn sharpness_to_csv(seq: &[SharpnessPoint]) -> Result<String> {
    let rows: Vec<Vec<String>> = seq
        .iter()
        .map(|p| vec![p.q_i.to_string(), fmt_vec(&p.witness), fmt15(p.reciprocal)])
        .collect();
    rows_to_csv(&["q_i", "witness", "reciprocal"], &rows)
}

/// A non-increasing step function `φ` into (0, 1]: `steps[i] = (x_i, v_i)`
/// means `φ(x) = v_i` on `[x_i, x_{i+1})`, and `φ(x) = 1` before `x_0`.
#[derive(Clone, Debug)]
pub struct StepPhi {
    steps: Vec<(i64, Expr, f64, f64)>,
}

impl StepPhi {
    pub fn constant(value: BigRational) -> Result<Self> {
        Self::from_steps(vec![(1, value)])
    }

    pub fn from_steps(steps: Vec<(i64, BigRational)>) -> Result<Self> {
        let mut out = Vec::with_capacity(steps.len());
        let mut prev: Option<&BigRational> = None;
        let one = BigRational::one();
        for (x, v) in &steps {
            if *v <= BigRational::zero() || *v > one {
                return Err(Error::InvalidArgument("phi values must lie in (0, 1]".into()));
            }
            if prev.is_some_and(|p| v > p) {
                return Err(Error::InvalidArgument("phi must be non-increasing".into()));
            }
            prev = Some(v);
            let iv = IntervalValue::from_rational(v, 80);
            out.push((*x, Expr::rational(v.clone()), iv.lower_f64(), iv.upper_f64()));
        }
        if out.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidArgument("step positions must increase".into()));
        }
        Ok(StepPhi { steps: out })
    }

    /// The empirical table itself as a candidate.
    pub fn from_table(table: &PhiTable, budget: &PrecisionBudget) -> Result<Self> {
        let mut steps = Vec::with_capacity(table.breakpoints.len());
        for b in &table.breakpoints {
            steps.push((b.x, table.value_expr(b.x as f64, budget)?, b.lo, b.hi));
        }
        Ok(StepPhi { steps })
    }

    fn at(&self, s: i64) -> (Expr, f64, f64) {
        let k = self.steps.partition_point(|st| st.0 <= s);
        match k.checked_sub(1) {
            None => (Expr::int(1), 1.0, 1.0),
            Some(i) => {
                let st = &self.steps[i];
                (st.1.clone(), st.2, st.3)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhiCheck {
    pub holds: bool,
    pub violation: Option<Vec<i64>>,
}

/// Checks `|q|_∞^N ‖alpha · q‖ >= φ(|q|_∞)` for all `0 < |q|_∞ <= q_max`.
/// The reported violation is the shell minimizer of the first failing shell.
pub fn verify_phi_badly_approximable(
    alpha: &AlphaVector,
    candidate: &StepPhi,
    q_max: f64,
    cfg: &RunConfig,
) -> Result<PhiCheck> {
    let s_max = floor_radius(q_max)?;
    let minima = shell_minima(alpha, s_max, cfg)?;
    let ev = Evaluator::new(alpha, cfg.budget)?;
    for (i, c) in minima.iter().enumerate() {
        let (phi, lo, hi) = candidate.at(i as i64 + 1);
        let ok = if c.lo >= hi {
            true
        } else if c.hi < lo {
            false
        } else {
            let e = ev.form(&c.q)?.expr.mul(Expr::int(c.weight)).sub(phi);
            compare(&e, &BigRational::zero(), &cfg.budget)? != Ordering::Less
        };
        if !ok {
            return Ok(PhiCheck {
                holds: false,
                violation: Some(c.q.clone()),
            });
        }
    }
    Ok(PhiCheck {
        holds: true,
        violation: None,
    })
}

/// `φ(x)` from an explicit rational, e.g. for the constant candidates.
pub fn rational_phi(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}
