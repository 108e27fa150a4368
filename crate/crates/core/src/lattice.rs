//! Counting `|M(alpha, eps, Q)|` through the lattice `Λ_alpha = A_alpha Z^{N+1}`
//! whose points are `(alpha · q + p, q)`, plus its weak-admissibility quantities.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

pub use crate::alpha::AlphaVector;
use crate::enumerate::{bigint_to_i64, chunked, floor_radius, Evaluator, IntBox, RunConfig, Threshold};
use crate::error::{Error, Result};
use crate::phi::PhiTable;
use crate::realnum::directed::{mul_down, mul_up};
use crate::realnum::{compare, inner_product, Expr, IntervalValue, PrecisionBudget};
use crate::report::{fmt15, least_squares, rows_to_csv, to_json};

/// The instance `n = 2`, `m = beta = (1, N)`, `t = N + 1`, with `C` the
/// subspace where the second block vanishes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeInstance {
    pub alpha: AlphaVector,
    pub n: usize,
    pub m: (usize, usize),
    pub beta: (usize, usize),
    pub t: usize,
    /// Blocks that vanish on `C`.
    pub subspace: Vec<usize>,
}

impl LatticeInstance {
    pub fn new(alpha: AlphaVector) -> Self {
        let big_n = alpha.dim();
        LatticeInstance {
            alpha,
            n: 2,
            m: (1, big_n),
            beta: (1, big_n),
            t: 1 + big_n,
            subspace: vec![2],
        }
    }

    pub fn dim(&self) -> usize {
        self.alpha.dim()
    }

    /// `A_alpha` with coordinates rounded to f64; row 0 is `(1, alpha)`.
    pub fn basis_approx(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut rows = vec![vec![0.0; n + 1]; n + 1];
        rows[0][0] = 1.0;
        for (j, a) in self.alpha.approx().into_iter().enumerate() {
            rows[0][j + 1] = a;
        }
        for i in 1..=n {
            rows[i][i] = 1.0;
        }
        rows
    }

    /// Determinant of `A_alpha`: upper triangular with unit diagonal.
    pub fn det(&self) -> i64 {
        let b = self.basis_approx();
        let triangular = (0..b.len()).all(|i| (0..i).all(|j| b[i][j] == 0.0));
        assert!(triangular);
        (0..b.len()).map(|i| b[i][i] as i64).product()
    }

    /// Lattice point `(alpha · q + p, q)` with its first coordinate enclosed.
    pub fn point(&self, p: i64, q: &[i64], bits: u32) -> Result<(IntervalValue, Vec<i64>)> {
        let x = inner_product(&self.alpha, q, bits)?.add_int(&BigInt::from(p));
        Ok((x, q.to_vec()))
    }
}

/// One evaluation of `|M(alpha, eps, Q)|`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountRecord {
    pub n: usize,
    pub q: f64,
    pub eps: f64,
    pub count: u64,
    pub main_term: f64,
    pub error: f64,
    pub prop_bound_base: Option<f64>,
    #[serde(rename = "ties")]
    pub ties_present: bool,
}

impl CountRecord {
    /// Fills in `(eps Q^N / φ(Q))^{N/(N+1)}`.
    pub fn with_phi(mut self, table: &PhiTable) -> Result<Self> {
        let (_, phi_hi) = table.bounds_at(self.q)?;
        let phi = crate::phi::phi_at(table, self.q)?.min(phi_hi);
        let n = self.n as f64;
        self.prop_bound_base = Some((self.eps * self.q.powf(n) / phi).powf(n / (n + 1.0)));
        Ok(self)
    }

    /// `error / prop_bound_base`, zero when the error is.
    pub fn ratio(&self) -> Option<f64> {
        let base = self.prop_bound_base?;
        Some(if self.error == 0.0 { 0.0 } else { self.error / base })
    }

    pub const CSV_HEADER: [&'static str; 8] = ["n", "q", "eps", "count", "main_term", "error", "prop_bound_base", "ties"];

    pub fn csv_row(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            fmt15(self.q),
            fmt15(self.eps),
            self.count.to_string(),
            fmt15(self.main_term),
            fmt15(self.error),
            self.prop_bound_base.map(fmt15).unwrap_or_default(),
            self.ties_present.to_string(),
        ]
    }

    pub fn to_json(&self) -> Result<String> {
        to_json(self)
    }

    pub fn to_csv(records: &[CountRecord]) -> Result<String> {
        let rows: Vec<Vec<String>> = records.iter().map(CountRecord::csv_row).collect();
        rows_to_csv(&Self::CSV_HEADER, &rows)
    }
}

fn check_count_args(eps: &BigRational, q: f64) -> Result<()> {
    if !eps.is_positive() || *eps > BigRational::new(1.into(), 2.into()) {
        return Err(Error::InvalidArgument(format!("eps must lie in (0, 1/2], got {eps}")));
    }
    if q.is_nan() || q < 1.0 {
        return Err(Error::InvalidArgument(format!("Q must be >= 1, got {q}")));
    }
    Ok(())
}

fn main_term(n: usize, eps: f64, q: f64) -> f64 {
    2f64.powi(n as i32 + 1) * eps * q.powi(n as i32)
}

/// `|{(p, q) != 0 : |alpha · q + p| <= eps, |q|_∞ <= Q}|`, one nearest-integer
/// test per q.
pub fn count_m(alpha: &AlphaVector, eps: &BigRational, q: f64, cfg: &RunConfig) -> Result<CountRecord> {
    check_count_args(eps, q)?;
    let r = floor_radius(q)?;
    let bx = IntBox::cube(alpha.dim(), r)?;
    let ev = Evaluator::new(alpha, cfg.budget)?;
    let th = Threshold::new(eps.clone());
    let center = bx.center();
    let parts = chunked(bx.full(), cfg.chunks, |range| {
        let mut count = 0u64;
        let mut ties = false;
        let skip = range.contains(&center).then(|| center - range.start);
        let mut i = 0u64;
        bx.for_each(range, |qv| {
            if Some(i) != skip {
                let (c, t) = ev.count_p(qv, &th)?;
                count += c as u64;
                ties |= t;
            }
            i += 1;
            Ok(())
        })?;
        Ok((count, ties))
    })?;
    let count: u64 = parts.iter().map(|p| p.0).sum();
    let ties = parts.iter().any(|p| p.1);
    let epsf = eps.to_f64().unwrap_or(f64::NAN);
    let mt = main_term(alpha.dim(), epsf, q);
    Ok(CountRecord {
        n: alpha.dim(),
        q,
        eps: epsf,
        count,
        main_term: mt,
        error: (count as f64 - mt).abs(),
        prop_bound_base: None,
        ties_present: ties,
    })
}

/// The elements of `M(alpha, eps, Q)` as `(p, q)`, sorted by `(q, p)`.
pub fn enumerate_m(
    alpha: &AlphaVector,
    eps: &BigRational,
    q: f64,
    cap: usize,
    cfg: &RunConfig,
) -> Result<Vec<(i64, Vec<i64>)>> {
    check_count_args(eps, q)?;
    let r = floor_radius(q)?;
    let bx = IntBox::cube(alpha.dim(), r)?;
    let ev = Evaluator::new(alpha, cfg.budget)?;
    let th = Threshold::new(eps.clone());
    let center = bx.center();
    let parts = chunked(bx.full(), cfg.chunks, |range| {
        let mut out: Vec<(i64, Vec<i64>)> = Vec::new();
        let skip = range.contains(&center).then(|| center - range.start);
        let mut i = 0u64;
        bx.for_each(range, |qv| {
            let idx = i;
            i += 1;
            if Some(idx) == skip {
                return Ok(());
            }
            match ev.count_p(qv, &th)?.0 {
                0 => {}
                1 => out.push((-bigint_to_i64(&ev.nearest(qv)?)?, qv.to_vec())),
                _ => {
                    // alpha · q = n + 1/2 with n the stored nearest integer
                    let n = bigint_to_i64(&ev.form(qv)?.nearest)?;
                    out.push((-n - 1, qv.to_vec()));
                    out.push((-n, qv.to_vec()));
                }
            }
            if out.len() > cap {
                return Err(Error::OutputCapExceeded { cap });
            }
            Ok(())
        })?;
        Ok(out)
    })?;
    let all: Vec<(i64, Vec<i64>)> = parts.concat();
    if all.len() > cap {
        return Err(Error::OutputCapExceeded { cap });
    }
    Ok(all)
}

// Number of p in `ps` with |x + p| <= eps, where x = alpha · q is enclosed by
// [x_lo, x_hi]. Undecided candidates are settled exactly.
fn scan_p(
    ev: &Evaluator<'_>,
    qv: &[i64],
    x: &IntervalValue,
    ps: std::ops::RangeInclusive<i64>,
    th: &Threshold,
    skip_origin: bool,
) -> Result<u64> {
    let (x_lo, x_hi) = (x.lower_f64(), x.upper_f64());
    let zero_q = qv.iter().all(|&c| c == 0);
    let mut n = 0u64;
    for p in ps {
        if skip_origin && zero_q && p == 0 {
            continue;
        }
        let margin = 1e-9 * (1.0 + (p as f64).abs() + x_hi.abs().max(x_lo.abs()));
        let lo = x_lo + p as f64 - margin;
        let hi = x_hi + p as f64 + margin;
        if lo > th.hi || hi < -th.hi {
            continue;
        }
        if lo >= -th.lo && hi <= th.lo {
            n += 1;
            continue;
        }
        let e = ev.dot(qv).add(Expr::int(p));
        let above = compare(&e, &-th.exact.clone(), &ev.budget)? != Ordering::Less;
        let below = compare(&e, &th.exact, &ev.budget)? != Ordering::Greater;
        n += (above && below) as u64;
    }
    Ok(n)
}

/// Brute-force double loop over `(p, q)`, independent of the per-q counting
/// path. The p range `|p| <= ceil(Σ|alpha_i| ⌊Q⌋) + 2` contains every
/// candidate.
pub fn naive_count_m(alpha: &AlphaVector, eps: &BigRational, q: f64, cfg: &RunConfig) -> Result<u64> {
    check_count_args(eps, q)?;
    let r = floor_radius(q)?;
    let bx = IntBox::cube(alpha.dim(), r)?;
    let p_max = (alpha.l1_upper()? * r as f64).ceil() as i64 + 2;
    let ev = Evaluator::new(alpha, cfg.budget)?;
    let th = Threshold::new(eps.clone());
    let parts = chunked(bx.full(), cfg.chunks, |range| {
        let mut n = 0u64;
        bx.for_each(range, |qv| {
            let x = inner_product(alpha, qv, cfg.budget.start_bits)?;
            n += scan_p(&ev, qv, &x, -p_max..=p_max, &th, true)?;
            Ok(())
        })?;
        Ok(n)
    })?;
    Ok(parts.iter().sum())
}

/// `(|Λ_alpha ∩ Z_{eps,Q}|, |M(alpha, eps, Q)|)`, the first counted directly over
/// lattice vectors including the origin.
pub fn cardinality_bridge(alpha: &AlphaVector, eps: &BigRational, q: f64, cfg: &RunConfig) -> Result<(u64, u64)> {
    check_count_args(eps, q)?;
    let r = floor_radius(q)?;
    let bx = IntBox::cube(alpha.dim(), r)?;
    let ev = Evaluator::new(alpha, cfg.budget)?;
    let th = Threshold::new(eps.clone());
    let parts = chunked(bx.full(), cfg.chunks, |range| {
        let mut n = 0u64;
        bx.for_each(range, |qv| {
            let x = inner_product(alpha, qv, cfg.budget.start_bits)?;
            let lo = (-x.upper_f64() - th.hi).floor() as i64 - 1;
            let hi = (-x.lower_f64() + th.hi).ceil() as i64 + 1;
            n += scan_p(&ev, qv, &x, lo..=hi, &th, false)?;
            Ok(())
        })?;
        Ok(n)
    })?;
    let lattice_box_count = parts.iter().sum();
    let m_count = count_m(alpha, eps, q, cfg)?.count;
    Ok((lattice_box_count, m_count))
}

/// Shortest nonzero vector of `Λ_alpha ∩ C`, found among `(p, 0)`.
pub fn lambda1_in_c(instance: &LatticeInstance, budget: &PrecisionBudget) -> Result<f64> {
    let zero = vec![0i64; instance.dim()];
    let mut best: Option<BigRational> = None;
    for p in [-2i64, -1, 1, 2] {
        let (x, q) = instance.point(p, &zero, budget.start_bits)?;
        debug_assert!(q.iter().all(|&c| c == 0));
        if !x.is_exact() {
            return Err(Error::Invariant("lattice point on C is not exact".into()));
        }
        let len = x.midpoint().abs();
        if best.as_ref().is_none_or(|b| len < *b) {
            best = Some(len);
        }
    }
    Ok(best.and_then(|b| b.to_f64()).unwrap_or(f64::NAN))
}

/// `ν(Λ_alpha, rho)`: the minimum of `(|alpha · q + p| |q|_2^N)^{1/(N+1)}` over
/// lattice vectors with `q != 0` and `|v|_2 < rho`.
#[derive(Clone, Debug)]
pub enum Nu {
    Infinite,
    Finite {
        value: f64,
        /// Enclosure of the multiplicative norm `ν^{N+1}`.
        nm_lo: f64,
        nm_hi: f64,
        p: i64,
        q: Vec<i64>,
        nm: Expr,
    },
}

impl Nu {
    pub fn value(&self) -> Option<f64> {
        match self {
            Nu::Infinite => None,
            Nu::Finite { value, .. } => Some(*value),
        }
    }

    pub fn witness(&self) -> Option<(i64, Vec<i64>)> {
        match self {
            Nu::Infinite => None,
            Nu::Finite { p, q, .. } => Some((*p, q.clone())),
        }
    }
}

struct NuCand {
    q: Vec<i64>,
    norm2: u64,
    lo: f64,
    hi: f64,
}

fn norm_weight_bounds(norm2: u64, n: usize) -> (f64, f64) {
    let (mut lo, mut hi) = (1.0f64, 1.0f64);
    let f = norm2 as f64;
    for _ in 0..n / 2 {
        lo = mul_down(lo, f);
        hi = mul_up(hi, f);
    }
    if n % 2 == 1 {
        let s = f.sqrt();
        lo = mul_down(lo, s.next_down());
        hi = mul_up(hi, s.next_up());
    }
    (lo, hi)
}

fn nm_expr(ev: &Evaluator<'_>, q: &[i64], norm2: u64) -> Result<Expr> {
    let n = q.len();
    let mut e = ev.form(q)?.expr;
    let mut w = BigInt::one();
    for _ in 0..n / 2 {
        w *= norm2;
    }
    e = e.mul(Expr::int(w));
    if n % 2 == 1 {
        e = e.mul(Expr::sqrt_int(norm2.into()));
    }
    Ok(e)
}

pub fn nu(instance: &LatticeInstance, rho: &BigRational, cfg: &RunConfig) -> Result<Nu> {
    if !rho.is_positive() {
        return Err(Error::InvalidArgument("rho must be positive".into()));
    }
    let alpha = &instance.alpha;
    let n = alpha.dim();
    let rho2 = rho * rho;
    let r = rho.floor().to_integer().to_i64().ok_or_else(|| Error::InvalidArgument("rho too large".into()))?;
    let bx = IntBox::cube(n, r)?;
    let ev = Evaluator::new(alpha, cfg.budget)?;
    let cmp_cands = |a: &NuCand, b: &NuCand| -> Result<Ordering> {
        if a.hi < b.lo {
            return Ok(Ordering::Less);
        }
        if a.lo > b.hi {
            return Ok(Ordering::Greater);
        }
        let d = nm_expr(&ev, &a.q, a.norm2)?.sub(nm_expr(&ev, &b.q, b.norm2)?);
        compare(&d, &BigRational::zero(), &cfg.budget)
    };
    let parts = chunked(bx.half(), cfg.chunks, |range| {
        let mut best: Option<NuCand> = None;
        bx.for_each(range, |qv| {
            let norm2: u64 = qv.iter().map(|c| (c * c) as u64).sum();
            let slack = &rho2 - BigRational::from_integer(norm2.into());
            if !slack.is_positive() {
                return Ok(());
            }
            // the nearest p qualifies iff ‖alpha · q‖^2 < rho^2 - |q|^2
            let b = ev.positive_bounds(qv)?;
            let th = Threshold::new(slack.clone());
            let inside = if mul_up(b.hi, b.hi) < th.lo {
                true
            } else if mul_down(b.lo, b.lo) > th.hi {
                false
            } else {
                let d = ev.form(qv)?.expr;
                compare(&d.clone().mul(d), &slack, &cfg.budget)? == Ordering::Less
            };
            if !inside {
                return Ok(());
            }
            let (wl, wh) = norm_weight_bounds(norm2, n);
            let cand = NuCand {
                q: qv.to_vec(),
                norm2,
                lo: mul_down(b.lo, wl),
                hi: mul_up(b.hi, wh),
            };
            let replace = match &best {
                None => true,
                Some(cur) => cand.lo <= cur.hi && cmp_cands(&cand, cur)? == Ordering::Less,
            };
            if replace {
                best = Some(cand);
            }
            Ok(())
        })?;
        Ok(best)
    })?;
    let mut best: Option<NuCand> = None;
    for c in parts.into_iter().flatten() {
        let replace = match &best {
            None => true,
            Some(cur) => cmp_cands(&c, cur)? == Ordering::Less,
        };
        if replace {
            best = Some(c);
        }
    }
    let Some(c) = best else {
        return Ok(Nu::Infinite);
    };
    let p = -bigint_to_i64(&ev.form(&c.q)?.nearest)?;
    let nm = nm_expr(&ev, &c.q, c.norm2)?;
    let t = (n + 1) as f64;
    Ok(Nu::Finite {
        value: (0.5 * (c.lo + c.hi)).powf(1.0 / t),
        nm_lo: c.lo,
        nm_hi: c.hi,
        p,
        q: c.q,
        nm,
    })
}

/// `ν(Λ_alpha, rho)^{N+1} >= φ(rho)`, decided rigorously. Vacuous for infinite ν.
pub fn weak_admissibility_holds(nu: &Nu, table: &PhiTable, rho: f64, budget: &PrecisionBudget) -> Result<bool> {
    let Nu::Finite { nm_lo, nm_hi, nm, .. } = nu else {
        return Ok(true);
    };
    let (phi_lo, phi_hi) = table.bounds_at(rho)?;
    if *nm_lo >= phi_hi {
        return Ok(true);
    }
    if *nm_hi < phi_lo {
        return Ok(false);
    }
    let d = nm.clone().sub(table.value_expr(rho, budget)?);
    Ok(compare(&d, &BigRational::zero(), budget)? != Ordering::Less)
}

fn ser_nu<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_f64(*x),
        None => s.serialize_str("Infinite"),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub rho: f64,
    #[serde(serialize_with = "ser_nu")]
    pub nu_value: Option<f64>,
    pub mu_value: f64,
    pub lambda1_c: f64,
    pub phi_floor: f64,
    pub witness: Option<(i64, Vec<i64>)>,
}

/// `μ(Λ_alpha, rho) = min(λ_1(Λ_alpha ∩ C), ν(Λ_alpha, rho))`, checked against
/// the floor `min(1, φ(rho)^{1/(N+1)})`.
pub fn mu(instance: &LatticeInstance, rho: &BigRational, table: &PhiTable, cfg: &RunConfig) -> Result<AdmissibilityReport> {
    let rho_f = rho.to_f64().unwrap_or(f64::NAN);
    let lambda1 = lambda1_in_c(instance, &cfg.budget)?;
    let v = nu(instance, rho, cfg)?;
    if !weak_admissibility_holds(&v, table, rho_f, &cfg.budget)? {
        return Err(Error::Invariant(format!("nu^(N+1) < phi(rho) at rho = {rho_f}")));
    }
    let t = (instance.dim() + 1) as f64;
    let phi_floor = crate::phi::phi_at(table, rho_f)?.powf(1.0 / t);
    let nu_value = v.value();
    Ok(AdmissibilityReport {
        rho: rho_f,
        nu_value,
        mu_value: nu_value.map_or(lambda1, |x| x.min(lambda1)),
        lambda1_c: lambda1,
        phi_floor,
        witness: v.witness(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WidmerRow {
    pub b: f64,
    pub mu: f64,
    pub term: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WidmerReport {
    pub n: usize,
    pub q: f64,
    pub eps: f64,
    pub q_bar: f64,
    pub rows: Vec<WidmerRow>,
    pub min_term: f64,
    pub actual_error: f64,
    pub ratio: f64,
}

impl WidmerReport {
    pub fn to_csv(&self) -> Result<String> {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    fmt15(r.b),
                    fmt15(r.mu),
                    fmt15(r.term),
                    fmt15(self.q_bar),
                    fmt15(self.actual_error),
                    fmt15(self.actual_error / r.term),
                ]
            })
            .collect();
        rows_to_csv(&["b", "mu", "term", "q_bar", "actual_error", "ratio"], &rows)
    }
}

/// The error term `(Q̄ / μ(Λ, B) + Q / B)^N` over a grid of `B`, against the
/// observed counting error. Reports ratios only.
pub fn widmer_instance_check(
    instance: &LatticeInstance,
    eps: &BigRational,
    q: f64,
    b_grid: &[f64],
    cfg: &RunConfig,
) -> Result<WidmerReport> {
    let b_grid: Vec<f64> = if b_grid.is_empty() { vec![q] } else { b_grid.to_vec() };
    if let Some(b) = b_grid.iter().find(|&&b| !(b > 0.0 && b <= q)) {
        return Err(Error::InvalidArgument(format!("B = {b} must lie in (0, Q]")));
    }
    let rec = count_m(&instance.alpha, eps, q, cfg)?;
    let n = instance.dim() as i32;
    let q_bar = (rec.eps * q.powi(n)).powf(1.0 / (n as f64 + 1.0));
    let lambda1 = lambda1_in_c(instance, &cfg.budget)?;
    let mut rows = Vec::with_capacity(b_grid.len());
    for &b in &b_grid {
        let rho = crate::enumerate::rational_of(b)?;
        let m = nu(instance, &rho, cfg)?.value().map_or(lambda1, |v| v.min(lambda1));
        rows.push(WidmerRow {
            b,
            mu: m,
            term: (q_bar / m + q / b).powi(n),
        });
    }
    let min_term = rows.iter().map(|r| r.term).fold(f64::INFINITY, f64::min);
    Ok(WidmerReport {
        n: instance.dim(),
        q,
        eps: rec.eps,
        q_bar,
        rows,
        min_term,
        actual_error: rec.error,
        ratio: rec.error / min_term,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropReport {
    pub records: Vec<CountRecord>,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    /// Least-squares slope of `ln(error + 1)` against `ln(eps Q^N / φ(Q))`.
    pub slope: Option<f64>,
}

impl PropReport {
    pub fn to_csv(&self) -> Result<String> {
        let mut header: Vec<&str> = CountRecord::CSV_HEADER.to_vec();
        header.push("ratio");
        let rows: Vec<Vec<String>> = self
            .records
            .iter()
            .zip(&self.ratios)
            .map(|(r, x)| {
                let mut row = r.csv_row();
                row.push(fmt15(*x));
                row
            })
            .collect();
        rows_to_csv(&header, &rows)
    }
}

/// Counting error against `(eps Q^N / φ(Q))^{N/(N+1)}` over a grid of
/// `(eps, Q)` points.
pub fn verify_prop_bound(
    alpha: &AlphaVector,
    grid: &[(BigRational, f64)],
    table: &PhiTable,
    cfg: &RunConfig,
) -> Result<PropReport> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty (eps, Q) grid".into()));
    }
    let mut records = Vec::with_capacity(grid.len());
    for (eps, q) in grid {
        records.push(count_m(alpha, eps, *q, cfg)?.with_phi(table)?);
    }
    let ratios: Vec<f64> = records.iter().map(|r| r.ratio().unwrap_or(0.0)).collect();
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let n = alpha.dim() as f64;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for r in &records {
        let phi = crate::phi::phi_at(table, r.q)?;
        xs.push((r.eps * r.q.powf(n) / phi).ln());
        ys.push((r.error + 1.0).ln());
    }
    Ok(PropReport {
        records,
        ratios,
        max_ratio,
        slope: least_squares(&xs, &ys).map(|f| f.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phi::compute_phi_table;

    fn golden() -> AlphaVector {
        AlphaVector::parse("quad:(1+1*sqrt(5))/2").unwrap()
    }

    fn root23() -> AlphaVector {
        AlphaVector::parse("quad:(0+1*sqrt(2))/1,quad:(0+1*sqrt(3))/1").unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn golden_ratio_count() {
        let r = count_m(&golden(), &rat(1, 4), 5.0, &RunConfig::default()).unwrap();
        assert_eq!(r.count, 6);
        assert_eq!(r.main_term, 5.0);
        assert_eq!(r.error, 1.0);
        assert!(!r.ties_present);
        let els = enumerate_m(&golden(), &rat(1, 4), 5.0, 100, &RunConfig::default()).unwrap();
        assert_eq!(
            els,
            vec![
                (8, vec![-5]),
                (5, vec![-3]),
                (3, vec![-2]),
                (-3, vec![2]),
                (-5, vec![3]),
                (-8, vec![5])
            ]
        );
        assert_eq!(
            enumerate_m(&golden(), &rat(1, 4), 5.0, 5, &RunConfig::default()).unwrap_err(),
            Error::OutputCapExceeded { cap: 5 }
        );
    }

    #[test]
    fn two_dimensional_count() {
        let r = count_m(&root23(), &rat(1, 2), 1.0, &RunConfig::default()).unwrap();
        assert_eq!((r.count, r.main_term, r.error), (8, 4.0, 4.0));
        assert_eq!(cardinality_bridge(&root23(), &rat(1, 2), 1.0, &RunConfig::default()).unwrap(), (9, 8));
    }

    #[test]
    fn rational_half_ties_count_both() {
        let a = AlphaVector::parse("rat:1/2").unwrap();
        let r = count_m(&a, &rat(1, 2), 1.0, &RunConfig::default()).unwrap();
        assert_eq!(r.count, 4);
        assert!(r.ties_present);
        let els = enumerate_m(&a, &rat(1, 2), 1.0, 10, &RunConfig::default()).unwrap();
        assert_eq!(els, vec![(0, vec![-1]), (1, vec![-1]), (-1, vec![1]), (0, vec![1])]);
        assert_eq!(naive_count_m(&a, &rat(1, 2), 1.0, &RunConfig::default()).unwrap(), 4);
    }

    #[test]
    fn bridge_and_naive_agree() {
        let cfg = RunConfig::default();
        assert_eq!(cardinality_bridge(&golden(), &rat(1, 4), 5.0, &cfg).unwrap(), (7, 6));
        assert_eq!(naive_count_m(&golden(), &rat(1, 4), 5.0, &cfg).unwrap(), 6);
        // empty when eps Q^N < φ(Q)
        assert_eq!(cardinality_bridge(&golden(), &rat(1, 16), 5.0, &cfg).unwrap(), (1, 0));
    }

    #[test]
    fn rejects_bad_arguments() {
        let cfg = RunConfig::default();
        assert!(count_m(&golden(), &rat(3, 4), 5.0, &cfg).is_err());
        assert!(count_m(&golden(), &rat(0, 1), 5.0, &cfg).is_err());
        assert!(count_m(&golden(), &rat(1, 4), 0.5, &cfg).is_err());
    }

    #[test]
    fn lambda1_is_one() {
        for a in [golden(), root23(), AlphaVector::parse("rat:1/3,rat:1/5,quad:(0+1*sqrt(7))/1").unwrap()] {
            let inst = LatticeInstance::new(a);
            assert_eq!(lambda1_in_c(&inst, &PrecisionBudget::default()).unwrap(), 1.0);
            assert_eq!(inst.det(), 1);
        }
    }

    #[test]
    fn nu_examples() {
        let cfg = RunConfig::default();
        let g = LatticeInstance::new(golden());
        let v = nu(&g, &rat(2, 1), &cfg).unwrap();
        assert!((v.value().unwrap() - 0.618_033_988_749_895).abs() < 1e-9);
        assert_eq!(v.witness(), Some((-2, vec![1])));
        assert!(matches!(nu(&g, &rat(1, 2), &cfg).unwrap(), Nu::Infinite));
        let t = LatticeInstance::new(root23());
        let v = nu(&t, &rat(2, 1), &cfg).unwrap();
        assert!((v.value().unwrap() - 0.644_689_827_4).abs() < 1e-9);
        assert_eq!(v.witness(), Some((-2, vec![0, 1])));
        let v = nu(&t, &rat(10, 1), &cfg).unwrap();
        assert!((v.value().unwrap() - 0.310_333_571_6).abs() < 1e-9);
    }

    #[test]
    fn mu_and_floor() {
        let cfg = RunConfig::default();
        let table = compute_phi_table(&golden(), 10.0, &cfg).unwrap();
        let g = LatticeInstance::new(golden());
        let m = mu(&g, &rat(2, 1), &table, &cfg).unwrap();
        assert!((m.mu_value - 0.618_033_988_749_895).abs() < 1e-9);
        assert!(m.mu_value >= m.phi_floor.min(1.0));
        let m = mu(&g, &rat(1, 2), &table, &cfg).unwrap();
        assert_eq!((m.nu_value, m.mu_value, m.phi_floor), (None, 1.0, 1.0));
        let json = serde_json::to_value(&m).unwrap();
        assert_eq!(json["nu_value"], "Infinite");
    }

    #[test]
    fn widmer_and_prop_examples() {
        let cfg = RunConfig::default();
        let g = LatticeInstance::new(golden());
        let w = widmer_instance_check(&g, &rat(1, 4), 5.0, &[], &cfg).unwrap();
        assert!((w.q_bar - 1.118_033_988_749_895).abs() < 1e-12);
        assert_eq!(w.actual_error, 1.0);
        let expect = 1.118_033_988_749_895 / 0.618_033_988_749_895 + 1.0;
        assert!((w.min_term - expect).abs() < 1e-9);

        let table = compute_phi_table(&golden(), 5.0, &cfg).unwrap();
        let rep = verify_prop_bound(&golden(), &[(rat(1, 4), 5.0)], &table, &cfg).unwrap();
        assert!((rep.max_ratio - 0.552_786_404_5).abs() < 1e-9);
        assert!(rep.slope.is_none());
    }

    #[test]
    fn csv_columns_follow_json_keys() {
        let r = count_m(&golden(), &rat(1, 4), 5.0, &RunConfig::default()).unwrap();
        let csv = CountRecord::to_csv(&[r.clone()]).unwrap();
        assert_eq!(csv, "n,q,eps,count,main_term,error,prop_bound_base,ties\n1,5,0.25,6,5,1,,false\n");
        let json: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        let keys: Vec<&str> = json.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        assert_eq!(keys.len(), 8);
        assert_eq!(json["count"], 6);
    }
}
