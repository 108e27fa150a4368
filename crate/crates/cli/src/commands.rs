use std::io::Write;

use fracparts::bounds::{bounds_to_csv, default_c_n, evaluate_bounds, fit_theorem_constants, shell_difference_check};
use fracparts::lattice::{naive_count_m, verify_prop_bound, widmer_instance_check};
use fracparts::phi::{sharpness_sequence, sharpness_to_csv};
use fracparts::report::{fmt15, rows_to_csv, to_json};
use fracparts::sums::{sandwich_check, verify_gap_principle, SandwichReport};
use fracparts::{
    compute_phi_table, count_m, dyadic_profile, sum_reciprocals, AlphaVector, BoxSpec, DyadicProfile, Error,
    LatticeInstance, PrecisionBudget, Result, RunConfig,
};
use num_rational::BigRational;
use serde::Serialize;

use crate::grid::{parse_f64_grid, parse_grid, parse_positive, parse_rational, rational_to_f64, render_rational};
use crate::{Cli, Command, Format, Global, Verify};

pub const DEFAULT_EPS_GRID: &str = "1/2:1/256:1/2";

pub fn default_q_grid(n: usize) -> &'static str {
    if n == 1 {
        "16:1024:2"
    } else {
        "16:256:2"
    }
}

struct Artifact {
    body: String,
    summary: String,
    /// Raised after the artifact is written, so failing checks still leave
    /// their evidence behind.
    failure: Option<Error>,
}

impl Artifact {
    fn ok(body: String, summary: String) -> Self {
        Artifact { body, summary, failure: None }
    }
}

fn config(g: &Global) -> Result<RunConfig> {
    let budget = PrecisionBudget::new(g.start_bits, g.max_bits, 2)?;
    Ok(RunConfig::default().with_chunks(g.chunks).with_budget(budget))
}

fn pick(fmt: Format, json: impl FnOnce() -> Result<String>, csv: impl FnOnce() -> Result<String>) -> Result<String> {
    match fmt {
        Format::Json => json(),
        Format::Csv => csv(),
    }
}

fn parse_eps(src: &str) -> Result<BigRational> {
    parse_rational(src)
}

pub fn run(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    if let Some(t) = g.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    }
    let cfg = config(g)?;
    let art = dispatch(&cli.command, g.format, &cfg)?;
    let mut body = art.body;
    if !body.ends_with('\n') {
        body.push('\n');
    }
    match &g.out {
        Some(path) => std::fs::write(path, body.as_bytes())
            .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))?,
        None => std::io::stdout()
            .lock()
            .write_all(body.as_bytes())
            .map_err(|e| Error::InvalidArgument(format!("stdout: {e}")))?,
    }
    eprintln!("{}", art.summary);
    match art.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct OracleRecord {
    n: usize,
    q: f64,
    eps: f64,
    count: u64,
}

#[derive(Serialize)]
struct ProfileOutput<'a> {
    profile: &'a DyadicProfile,
    sandwich: &'a SandwichReport,
    ties: bool,
}

fn dispatch(cmd: &Command, fmt: Format, cfg: &RunConfig) -> Result<Artifact> {
    match cmd {
        Command::Sum { alpha, q, radii } => {
            let a = AlphaVector::parse(alpha)?;
            let bx = match (q, radii) {
                (Some(q), _) => BoxSpec::cube(a.dim(), parse_positive(q)?)?,
                (None, Some(r)) => BoxSpec::new(r.split(',').map(parse_positive).collect::<Result<_>>()?)?,
                (None, None) => return Err(Error::InvalidArgument("one of --q or --radii is required".into())),
            };
            let s = sum_reciprocals(&a, &bx, cfg)?;
            let summary = format!(
                "sum: N={} terms={} S in [{}, {}]",
                a.dim(),
                s.terms,
                fmt15(s.lower),
                fmt15(s.upper)
            );
            Ok(Artifact::ok(pick(fmt, || s.to_json(), || s.to_csv())?, summary))
        }
        Command::Count { alpha, eps, q } => {
            let a = AlphaVector::parse(alpha)?;
            let e = parse_eps(eps)?;
            let r = count_m(&a, &e, parse_positive(q)?, cfg)?;
            let summary = format!(
                "count: N={} Q={} eps={} count={} error={}",
                r.n,
                fmt15(r.q),
                render_rational(&e),
                r.count,
                fmt15(r.error)
            );
            let one = [r];
            Ok(Artifact::ok(
                pick(fmt, || one[0].to_json(), || fracparts::CountRecord::to_csv(&one))?,
                summary,
            ))
        }
        Command::Oracle { alpha, eps, q } => {
            let a = AlphaVector::parse(alpha)?;
            let e = parse_eps(eps)?;
            let qv = parse_positive(q)?;
            let rec = OracleRecord {
                n: a.dim(),
                q: qv,
                eps: rational_to_f64(&e),
                count: naive_count_m(&a, &e, qv, cfg)?,
            };
            let summary = format!(
                "oracle: N={} Q={} eps={} count={}",
                rec.n,
                fmt15(qv),
                render_rational(&e),
                rec.count
            );
            let csv = || {
                rows_to_csv(
                    &["n", "q", "eps", "count"],
                    &[vec![rec.n.to_string(), fmt15(rec.q), fmt15(rec.eps), rec.count.to_string()]],
                )
            };
            Ok(Artifact::ok(pick(fmt, || to_json(&rec), csv)?, summary))
        }
        Command::Phi { alpha, qmax } => {
            let a = AlphaVector::parse(alpha)?;
            let t = compute_phi_table(&a, parse_positive(qmax)?, cfg)?;
            let last = t.breakpoints.last().map_or(1.0, |b| b.value);
            let summary = format!(
                "phi: N={} q_max={} breakpoints={} phi(q_max)={}",
                a.dim(),
                fmt15(t.q_max),
                t.breakpoints.len(),
                fmt15(last)
            );
            Ok(Artifact::ok(pick(fmt, || t.to_json(), || t.to_csv())?, summary))
        }
        Command::Profile { alpha, q } => {
            let a = AlphaVector::parse(alpha)?;
            let qv = parse_positive(q)?;
            let p = dyadic_profile(&a, qv, cfg)?;
            let s = sum_reciprocals(&a, &BoxSpec::cube(a.dim(), qv)?, cfg)?;
            let sw = sandwich_check(&p, &s)?;
            let summary = format!(
                "profile: N={} Q={} shells={} sandwich [{}, {}] holds={} ties={}",
                a.dim(),
                fmt15(qv),
                p.shells.len(),
                fmt15(sw.lower_sum),
                fmt15(sw.upper_sum),
                sw.holds,
                p.ties
            );
            let body = pick(
                fmt,
                || {
                    to_json(&ProfileOutput {
                        profile: &p,
                        sandwich: &sw,
                        ties: p.ties,
                    })
                },
                || p.to_csv(),
            )?;
            let failure = (!sw.holds).then(|| Error::Invariant("dyadic sandwich fails".into()));
            Ok(Artifact { body, summary, failure })
        }
        Command::Sharpness { alpha, qmax } => {
            let a = AlphaVector::parse(alpha)?;
            let t = compute_phi_table(&a, parse_positive(qmax)?, cfg)?;
            let seq = sharpness_sequence(&t, cfg)?;
            let summary = format!("sharpness: N={} points={}", a.dim(), seq.len());
            Ok(Artifact::ok(pick(fmt, || to_json(&seq), || sharpness_to_csv(&seq))?, summary))
        }
        Command::Bounds { n, q, phi, phi_2q } => {
            let p2 = phi_2q.as_deref().map(parse_positive).transpose()?;
            let entries = evaluate_bounds(*n, parse_positive(q)?, parse_positive(phi)?, p2)?;
            let summary = format!("bounds: N={n} entries={}", entries.len());
            Ok(Artifact::ok(pick(fmt, || to_json(&entries), || bounds_to_csv(&entries))?, summary))
        }
        Command::Verify(v) => verify(v, fmt, cfg),
    }
}

fn prop_grid(eps_grid: &str, q_grid: &str) -> Result<Vec<(BigRational, f64)>> {
    let eps = parse_grid(eps_grid)?;
    let qs = parse_f64_grid(q_grid)?;
    Ok(eps.iter().flat_map(|e| qs.iter().map(move |&q| (e.clone(), q))).collect())
}

fn max_q(grid: &[(BigRational, f64)]) -> f64 {
    grid.iter().map(|g| g.1).fold(1.0, f64::max)
}

fn verify(v: &Verify, fmt: Format, cfg: &RunConfig) -> Result<Artifact> {
    match v {
        Verify::Prop { alpha, eps_grid, q_grid } => {
            let a = AlphaVector::parse(alpha)?;
            let grid = prop_grid(eps_grid, q_grid.as_deref().unwrap_or(default_q_grid(a.dim())))?;
            let table = compute_phi_table(&a, max_q(&grid), cfg)?;
            let r = verify_prop_bound(&a, &grid, &table, cfg)?;
            let summary = format!(
                "verify prop: N={} points={} max_ratio={} slope={}",
                a.dim(),
                r.records.len(),
                fmt15(r.max_ratio),
                r.slope.map_or("n/a".into(), fmt15)
            );
            Ok(Artifact::ok(pick(fmt, || to_json(&r), || r.to_csv())?, summary))
        }
        Verify::Theorem { alpha, q_grid } => {
            let a = AlphaVector::parse(alpha)?;
            let r = fit_theorem_constants(&a, &parse_f64_grid(q_grid)?, cfg)?;
            let summary = format!(
                "verify theorem: N={} points={} high={} low={} stability={}",
                a.dim(),
                r.points.len(),
                fmt15(r.fitted_constant_high),
                fmt15(r.fitted_constant_low),
                fmt15(r.stability_ratio)
            );
            Ok(Artifact::ok(pick(fmt, || to_json(&r), || r.to_csv())?, summary))
        }
        Verify::Gap { alpha, q_grid, cap } => {
            let a = AlphaVector::parse(alpha)?;
            let qs = parse_f64_grid(q_grid)?;
            let top = qs.iter().copied().fold(1.0, f64::max);
            let table = compute_phi_table(&a, 2.0 * top, cfg)?;
            let reports = qs
                .iter()
                .map(|&q| verify_gap_principle(&a, q, &table, *cap, cfg))
                .collect::<Result<Vec<_>>>()?;
            let holds = reports.iter().all(|r| r.holds);
            let summary = format!("verify gap: N={} points={} holds={holds}", a.dim(), reports.len());
            let csv = || {
                let rows: Vec<Vec<String>> = reports
                    .iter()
                    .map(|r| {
                        vec![
                            fmt15(r.q),
                            r.points.to_string(),
                            r.min_pairwise_separation.map(fmt15).unwrap_or_else(|| "inf".into()),
                            fmt15(r.min_value),
                            fmt15(r.floor),
                            r.holds.to_string(),
                        ]
                    })
                    .collect();
                rows_to_csv(&["q", "points", "min_pairwise_separation", "min_value", "floor", "holds"], &rows)
            };
            let body = pick(fmt, || to_json(&reports), csv)?;
            let failure = (!holds).then(|| Error::Invariant("gap principle floor violated".into()));
            Ok(Artifact { body, summary, failure })
        }
        Verify::Shells { alpha, q, c_n } => {
            let a = AlphaVector::parse(alpha)?;
            let qv = parse_positive(q)?;
            let c = match c_n {
                Some(c) => parse_positive(c)?,
                None => {
                    let grid = prop_grid(DEFAULT_EPS_GRID, default_q_grid(a.dim()))?;
                    let table = compute_phi_table(&a, max_q(&grid), cfg)?;
                    default_c_n(&verify_prop_bound(&a, &grid, &table, cfg)?)
                }
            };
            let table = compute_phi_table(&a, qv, cfg)?;
            let r = shell_difference_check(&a, qv, c, &table, cfg)?;
            let summary = format!(
                "verify shells: N={} Q={} c_N={} K={} checked={} holds={} lower_bound={}",
                a.dim(),
                fmt15(qv),
                fmt15(c),
                fmt15(r.k_threshold),
                r.rows.len(),
                r.holds,
                fmt15(r.lower_bound)
            );
            Ok(Artifact::ok(pick(fmt, || to_json(&r), || r.to_csv())?, summary))
        }
        Verify::Widmer { alpha, eps, q, b_grid } => {
            let a = AlphaVector::parse(alpha)?;
            let e = parse_eps(eps)?;
            let qv = parse_positive(q)?;
            let bs = match b_grid {
                Some(b) => parse_f64_grid(b)?,
                None => Vec::new(),
            };
            let r = widmer_instance_check(&LatticeInstance::new(a), &e, qv, &bs, cfg)?;
            let summary = format!(
                "verify widmer: N={} Q={} q_bar={} min_term={} actual_error={} ratio={}",
                r.n,
                fmt15(qv),
                fmt15(r.q_bar),
                fmt15(r.min_term),
                fmt15(r.actual_error),
                fmt15(r.ratio)
            );
            Ok(Artifact::ok(pick(fmt, || to_json(&r), || r.to_csv())?, summary))
        }
    }
}
