//! Closed-form bounds for the reciprocal sum and the empirical checks behind
//! their constants.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::alpha::AlphaVector;
use crate::enumerate::RunConfig;
use crate::error::{Error, Result};
use crate::lattice::{count_m, PropReport};
use crate::phi::{compute_phi_table, phi_at, PhiTable};
use crate::report::{fmt15, least_squares, rows_to_csv};
use crate::sums::{sum_reciprocals, BoxSpec};

pub const BOUND_NAMES: [&str; 6] = ["lv_lower", "thm_upper", "thm_lower", "gap_upper", "lang_1d", "trivial_floor"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundEntry {
    pub name: &'static str,
    pub value: f64,
    pub n: usize,
    pub q: f64,
    pub phi_q: f64,
    /// False when a logarithm argument left the bound vacuous.
    pub nontrivial: bool,
}

fn check_inputs(n: usize, q: f64, phi_q: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be positive".into()));
    }
    if q.is_nan() || q < 1.0 {
        return Err(Error::InvalidArgument(format!("Q must be >= 1, got {q}")));
    }
    if !(phi_q > 0.0 && phi_q <= 1.0) {
        return Err(Error::InvalidArgument(format!("phi(Q) must lie in (0, 1], got {phi_q}")));
    }
    Ok(())
}

/// One catalog entry by name. Natural logarithms throughout.
pub fn evaluate_bound(name: &str, n: usize, q: f64, phi_q: f64, phi_2q: Option<f64>) -> Result<BoundEntry> {
    check_inputs(n, q, phi_q)?;
    let qn = q.powi(n as i32);
    let lq = q.ln();
    let lqphi = (q * phi_q).ln();
    let (name, value, nontrivial) = match name {
        "lv_lower" => ("lv_lower", qn * lq, lqphi >= 1.0),
        "thm_upper" => ("thm_upper", qn * lq + qn / phi_q, true),
        "thm_lower" => ("thm_lower", (qn * lqphi).max(0.0), lqphi >= 1.0),
        "gap_upper" => {
            let p2 = phi_2q.ok_or(Error::MissingPhi2Q)?;
            if !(p2 > 0.0 && p2 <= 1.0) {
                return Err(Error::InvalidArgument(format!("phi(2Q) must lie in (0, 1], got {p2}")));
            }
            ("gap_upper", qn * lq / p2, true)
        }
        "lang_1d" => {
            if n != 1 {
                return Err(Error::InvalidArgument("lang_1d is defined for N = 1 only".into()));
            }
            ("lang_1d", q * lq + q / phi_q, true)
        }
        "trivial_floor" => {
            let side = 2.0 * q.floor() + 1.0;
            ("trivial_floor", 2.0 * (side.powi(n as i32) - 1.0), true)
        }
        other => return Err(Error::InvalidArgument(format!("unknown bound {other}"))),
    };
    Ok(BoundEntry {
        name,
        value: value.max(0.0),
        n,
        q,
        phi_q,
        nontrivial,
    })
}

/// Every entry whose inputs are available.
pub fn evaluate_bounds(n: usize, q: f64, phi_q: f64, phi_2q: Option<f64>) -> Result<Vec<BoundEntry>> {
    BOUND_NAMES
        .iter()
        .filter(|&&name| !(name == "gap_upper" && phi_2q.is_none()) && !(name == "lang_1d" && n != 1))
        .map(|name| evaluate_bound(name, n, q, phi_q, phi_2q))
        .collect()
}

pub fn bounds_to_csv(entries: &[BoundEntry]) -> Result<String> {
    let rows: Vec<Vec<String>> = entries
        .iter()
        .map(|e| {
            vec![
                e.name.to_string(),
                fmt15(e.value),
                e.n.to_string(),
                fmt15(e.q),
                fmt15(e.phi_q),
                e.nontrivial.to_string(),
            ]
        })
        .collect();
    rows_to_csv(&["name", "value", "n", "q", "phi_q", "nontrivial"], &rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitPoint {
    pub q: f64,
    pub phi_q: f64,
    pub sum_lower: f64,
    pub sum_upper: f64,
    pub thm_upper: f64,
    pub thm_lower: f64,
    /// `S / thm_upper`
    pub r: f64,
    /// `S / max(thm_lower, Q^N)`
    pub l: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitReport {
    pub grid: Vec<f64>,
    pub points: Vec<FitPoint>,
    pub fitted_constant_low: f64,
    pub fitted_constant_high: f64,
    /// `max r / min r` over the grid.
    pub stability_ratio: f64,
    /// Least-squares slope of `ln S` against `ln thm_upper`.
    pub slope: f64,
    pub residual: f64,
}

impl FitReport {
    pub fn to_csv(&self) -> Result<String> {
        let rows: Vec<Vec<String>> = self
            .points
            .iter()
            .map(|p| {
                vec![
                    fmt15(p.q),
                    fmt15(p.phi_q),
                    fmt15(p.sum_lower),
                    fmt15(p.sum_upper),
                    fmt15(p.thm_upper),
                    fmt15(p.thm_lower),
                    fmt15(p.r),
                    fmt15(p.l),
                ]
            })
            .collect();
        rows_to_csv(&["q", "phi_q", "sum_lower", "sum_upper", "thm_upper", "thm_lower", "r", "l"], &rows)
    }
}

/// Ratios of the cube sums to both sides of the two-sided estimate.
pub fn fit_theorem_constants(alpha: &AlphaVector, q_grid: &[f64], cfg: &RunConfig) -> Result<FitReport> {
    if q_grid.is_empty() {
        return Err(Error::InvalidArgument("empty Q grid".into()));
    }
    if q_grid.iter().any(|&q| q.is_nan() || q < 2.0) || q_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("Q grid must be increasing with every Q >= 2".into()));
    }
    let n = alpha.dim();
    let table = compute_phi_table(alpha, *q_grid.last().unwrap(), cfg)?;
    let mut points = Vec::with_capacity(q_grid.len());
    for &q in q_grid {
        let phi_q = phi_at(&table, q)?;
        let s = sum_reciprocals(alpha, &BoxSpec::cube(n, q)?, cfg)?;
        let up = evaluate_bound("thm_upper", n, q, phi_q, None)?.value;
        let low = evaluate_bound("thm_lower", n, q, phi_q, None)?.value;
        let mid = s.midpoint();
        points.push(FitPoint {
            q,
            phi_q,
            sum_lower: s.lower,
            sum_upper: s.upper,
            thm_upper: up,
            thm_lower: low,
            r: mid / up,
            l: mid / low.max(q.powi(n as i32)),
        });
    }
    let r_max = points.iter().map(|p| p.r).fold(f64::NEG_INFINITY, f64::max);
    let r_min = points.iter().map(|p| p.r).fold(f64::INFINITY, f64::min);
    let l_min = points.iter().map(|p| p.l).filter(|&l| l > 0.0).fold(f64::INFINITY, f64::min);
    let xs: Vec<f64> = points.iter().map(|p| p.thm_upper.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.sum_lower.max(f64::MIN_POSITIVE).ln()).collect();
    let (slope, residual) = least_squares(&xs, &ys).map_or((f64::NAN, 0.0), |f| (f.0, f.2));
    Ok(FitReport {
        grid: q_grid.to_vec(),
        points,
        fitted_constant_low: l_min,
        fitted_constant_high: r_max,
        stability_ratio: r_max / r_min,
        slope,
        residual,
    })
}

/// The constant used for the lower-bound machinery: twice the largest
/// observed ratio of counting error to its predicted size.
pub fn default_c_n(prop: &PropReport) -> f64 {
    2.0 * prop.max_ratio
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShellRow {
    pub k: u32,
    pub m_k: u64,
    pub m_k1: u64,
    pub difference: i64,
    pub required: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShellReport {
    pub q: f64,
    pub c_n: f64,
    pub phi_q: f64,
    /// `K = log2(Q^N φ(Q)^N / c_N^{N+1})`
    pub k_threshold: f64,
    pub rows: Vec<ShellRow>,
    pub holds: bool,
    pub min_margin: Option<f64>,
    /// `⌊K - 1⌋ Q^N`
    pub lower_bound: f64,
}

impl ShellReport {
    pub fn to_csv(&self) -> Result<String> {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.k.to_string(),
                    r.m_k.to_string(),
                    r.m_k1.to_string(),
                    r.difference.to_string(),
                    fmt15(r.required),
                    fmt15(r.margin),
                ]
            })
            .collect();
        rows_to_csv(&["k", "m_k", "m_k1", "difference", "required", "margin"], &rows)
    }
}

/// Checks `|M(2^-k)| - |M(2^-k-1)| >= 2^-k Q^N` for every integer
/// `k ∈ [1, K - 1]`.
pub fn shell_difference_check(
    alpha: &AlphaVector,
    q: f64,
    c_n: f64,
    table: &PhiTable,
    cfg: &RunConfig,
) -> Result<ShellReport> {
    if !(c_n > 0.0 && c_n.is_finite()) {
        return Err(Error::InvalidArgument(format!("c_N must be positive, got {c_n}")));
    }
    if q.is_nan() || q < 1.0 {
        return Err(Error::InvalidArgument(format!("Q must be >= 1, got {q}")));
    }
    let n = alpha.dim() as i32;
    let phi_q = phi_at(table, q)?;
    let qn = q.powi(n);
    let k_threshold = (qn * phi_q.powi(n) / c_n.powi(n + 1)).log2();
    let k_last = if k_threshold - 1.0 >= 1.0 { (k_threshold - 1.0).floor() as u32 } else { 0 };
    let mut counts = Vec::with_capacity(k_last as usize + 1);
    for k in 1..=k_last + 1 {
        if k_last == 0 {
            break;
        }
        let eps = BigRational::new(BigInt::one(), BigInt::one() << k);
        counts.push(count_m(alpha, &eps, q, cfg)?.count);
    }
    let mut rows = Vec::with_capacity(k_last as usize);
    for k in 1..=k_last {
        let (m_k, m_k1) = (counts[k as usize - 1], counts[k as usize]);
        let difference = m_k as i64 - m_k1 as i64;
        let required = qn / 2f64.powi(k as i32);
        rows.push(ShellRow {
            k,
            m_k,
            m_k1,
            difference,
            required,
            margin: difference as f64 - required,
        });
    }
    let holds = rows.iter().all(|r| r.difference as f64 >= r.required);
    let min_margin = rows.iter().map(|r| r.margin).reduce(f64::min);
    Ok(ShellReport {
        q,
        c_n,
        phi_q,
        k_threshold,
        rows,
        holds,
        min_margin,
        lower_bound: if k_threshold >= 1.0 { (k_threshold - 1.0).floor() * qn } else { 0.0 },
    })
}
