//! Command-line front end: argument parsing, report assembly and rendering.
//!
//! [`run`] is the whole program minus process I/O, so it can be driven from
//! tests. Every report echoes its parameters and the crate version.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_rational::Ratio;
use num_traits::ToPrimitive;
use permcycles::{
    argmax_p, buchstab, dilog, estimate_window_pmf, ewens_lambda, exact_falling_moment, exact_pmf, exact_pmf_rational,
    gamma_star, limit_moments, normalized_window_exact, p_limit, q_limit, qp_pmf, Error, IntWindow, Interval,
    QuadratureConfig,
};
use serde::{Deserialize, Serialize};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(
    name = "permcycles",
    version,
    about = "Cycle counts of random permutations in a length window"
)]
struct Cli {
    /// Print the report as JSON.
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// Print the report as CSV.
    #[arg(long, global = true)]
    csv: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Window {
    /// Lower normalized bound, as a decimal or a fraction such as 1/3.
    #[arg(long, value_parser = parse_ratio)]
    gamma: Ratio<i64>,
    /// Upper normalized bound, as a decimal or a fraction.
    #[arg(long, value_parser = parse_ratio)]
    delta: Ratio<i64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Limiting distribution of the window count.
    LimitPmf {
        #[command(flatten)]
        window: Window,
        /// Absolute quadrature tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Limiting falling moment of order r.
    LimitMoment {
        #[arg(long)]
        r: usize,
        #[command(flatten)]
        window: Window,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Exact distribution for permutations of [n], window [⌈γn⌉, ⌊δn⌋].
    ExactPmf {
        #[arg(long)]
        n: u64,
        #[command(flatten)]
        window: Window,
        /// Print probabilities as reduced fractions.
        #[arg(long)]
        exact_rational: bool,
    },
    /// Exact falling moment for the integer window [a, b].
    ExactMoment {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        a: u64,
        #[arg(long)]
        b: u64,
        #[arg(long)]
        r: u32,
    },
    /// Quasi-Poisson distribution of order r.
    Qp {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        lambda: f64,
    },
    /// Monte Carlo estimate of the window-count distribution.
    Sample {
        #[arg(long)]
        n: u64,
        #[command(flatten)]
        window: Window,
        /// Ewens parameter; 1 is the uniform measure.
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long)]
        draws: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Maximizer of P1 over the tail windows (γ, 1) and the pmf there.
    GammaStar,
    /// Maximizer of P_i over tail windows (γ, 1) with γ in [lo, hi].
    Argmax {
        #[arg(long)]
        i: usize,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Curves P0, P1, P2 over tail windows (γ, 1), as CSV by default.
    Figure {
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long)]
        points: usize,
    },
    Buchstab {
        #[arg(long)]
        u: f64,
    },
    Dilog {
        #[arg(long)]
        x: f64,
    },
    /// Conjectured limiting mean under the Ewens measure.
    EwensLambda {
        #[command(flatten)]
        window: Window,
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        tol: Option<f64>,
    },
}

/// Parses `"0.25"`, `"1/3"` or `"1"` exactly.
pub fn parse_ratio(s: &str) -> Result<Ratio<i64>, String> {
    let bad = || format!("'{s}' is not a decimal or a fraction like 1/3");
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: i64 = num.trim().parse().map_err(|_| bad())?;
        let den: i64 = den.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(format!("'{s}' has a zero denominator"));
        }
        return Ok(Ratio::new(num, den));
    }
    let (negative, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if (int_part.is_empty() && frac_part.is_empty())
        || !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let scale = 10i64.checked_pow(frac_part.len() as u32).ok_or_else(bad)?;
    let whole: i64 = if int_part.is_empty() {
        0
    } else {
        int_part.parse().map_err(|_| bad())?
    };
    let frac: i64 = if frac_part.is_empty() {
        0
    } else {
        frac_part.parse().map_err(|_| bad())?
    };
    let num = whole
        .checked_mul(scale)
        .and_then(|w| w.checked_add(frac))
        .ok_or_else(bad)?;
    Ok(Ratio::new(if negative { -num } else { num }, scale))
}

/// One table cell; integers, floats and exact fractions keep their type
/// through JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Num(v) => write!(f, "{v}"),
            Cell::Text(v) => f.write_str(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Results {
    /// Named scalar results.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, f64>,
    /// Exact results as reduced fractions.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub exact: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    /// Parsed arguments; normalized bounds appear as reduced fractions.
    pub params: BTreeMap<String, String>,
    pub results: Results,
    /// Error estimates keyed like `results.values`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub errors: BTreeMap<String, f64>,
    pub elapsed_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub version: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Human,
    Json,
    Csv,
}

/// Exit status and the text destined for stdout and stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Usage(String),
    Tolerance(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ToleranceNotMet { .. } => Failure::Tolerance(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

/// Runs the command line `argv` (program name first).
///
/// Exit status 0 on success, 2 on argument or domain errors, 3 when a
/// numerical tolerance could not be met.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome {
                    code: 0,
                    stdout: err.to_string(),
                    stderr: String::new(),
                },
                _ => {
                    let rendered = err.to_string();
                    let line = rendered
                        .lines()
                        .find(|l| !l.trim().is_empty())
                        .unwrap_or("error: invalid arguments");
                    Outcome {
                        code: 2,
                        stdout: String::new(),
                        stderr: format!("{line}\n"),
                    }
                }
            };
        }
    };
    let format = if cli.json {
        Format::Json
    } else if cli.csv || matches!(cli.command, Command::Figure { .. }) {
        Format::Csv
    } else {
        Format::Human
    };
    let start = Instant::now();
    match execute(&cli.command) {
        Ok(mut report) => {
            report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
            Outcome {
                code: 0,
                stdout: render(&report, format),
                stderr: String::new(),
            }
        }
        Err(Failure::Usage(msg)) => Outcome {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
        Err(Failure::Tolerance(msg)) => Outcome {
            code: 3,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
    }
}

fn quad_config(tol: Option<f64>) -> Result<QuadratureConfig, Failure> {
    let mut cfg = QuadratureConfig::default();
    if let Some(t) = tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Failure::Usage(format!("--tol must be a positive number, got {t}")));
        }
        cfg = cfg.with_abs_tol(t);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn interval(w: &Window) -> Result<Interval, Failure> {
    let g = w.gamma.to_f64().unwrap_or(f64::NAN);
    let d = w.delta.to_f64().unwrap_or(f64::NAN);
    Ok(Interval::new(g, d)?)
}

/// `[⌈γn⌉, ⌊δn⌋]` computed on the exact fractions as typed.
fn int_window(n: u64, w: &Window) -> Result<Option<IntWindow>, Failure> {
    interval(w)?;
    let frac = |r: &Ratio<i64>| (*r.numer(), *r.denom());
    Ok(normalized_window_exact(n, frac(&w.gamma), frac(&w.delta))?)
}

fn fraction(r: &num_rational::BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn pmf_table(probs: &[f64]) -> Table {
    Table {
        columns: vec!["i".into(), "p".into()],
        rows: probs
            .iter()
            .enumerate()
            .map(|(i, &p)| vec![Cell::Int(i as i64), Cell::Num(p)])
            .collect(),
    }
}

fn report(command: &str, params: &[(&str, String)]) -> Report {
    Report {
        command: command.into(),
        params: params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
        results: Results::default(),
        errors: BTreeMap::new(),
        elapsed_ms: 0.0,
        seed: None,
        version: VERSION.into(),
    }
}

fn window_params(w: &Window) -> [(&'static str, String); 2] {
    [("gamma", w.gamma.to_string()), ("delta", w.delta.to_string())]
}

fn execute(command: &Command) -> Result<Report, Failure> {
    Ok(match command {
        Command::LimitPmf { window, tol } => {
            let cfg = quad_config(*tol)?;
            let iv = interval(window)?;
            let mut params = window_params(window).to_vec();
            params.push(("tol", format!("{:e}", cfg.abs_tol)));
            let mut rep = report("limit-pmf", &params);
            let pmf = p_limit(&iv, &cfg)?;
            for (k, est) in limit_moments(iv.support_bound(), &iv, &cfg)?.iter().enumerate().skip(1) {
                rep.errors.insert(format!("q{k}"), est.error);
                rep.results.values.insert(format!("q{k}"), est.value);
            }
            rep.results.values.insert("mean".into(), pmf.mean());
            rep.results.table = Some(pmf_table(pmf.probs()));
            rep
        }
        Command::LimitMoment { r, window, tol } => {
            let cfg = quad_config(*tol)?;
            let iv = interval(window)?;
            let mut params = vec![("r", r.to_string())];
            params.extend(window_params(window));
            params.push(("tol", format!("{:e}", cfg.abs_tol)));
            let mut rep = report("limit-moment", &params);
            let est = q_limit(*r, &iv, &cfg)?;
            rep.results.values.insert("q".into(), est.value);
            rep.errors.insert("q".into(), est.error);
            rep
        }
        Command::ExactPmf {
            n,
            window,
            exact_rational,
        } => {
            let mut params = vec![("n", n.to_string())];
            params.extend(window_params(window));
            params.push(("exact_rational", exact_rational.to_string()));
            let mut rep = report("exact-pmf", &params);
            match int_window(*n, window)? {
                None => {
                    // No admissible length: the count is identically 0.
                    rep.results.exact.insert("window".into(), "empty".into());
                    rep.results.table = Some(pmf_table(&[1.0]));
                }
                Some(w) => {
                    rep.results.values.insert("a".into(), w.a() as f64);
                    rep.results.values.insert("b".into(), w.b() as f64);
                    rep.results
                        .exact
                        .insert("window".into(), format!("[{}, {}]", w.a(), w.b()));
                    if *exact_rational {
                        let pmf = exact_pmf_rational(*n, w)?;
                        let rows = pmf
                            .probs()
                            .iter()
                            .enumerate()
                            .map(|(i, p)| {
                                vec![
                                    Cell::Int(i as i64),
                                    Cell::Text(fraction(p)),
                                    Cell::Num(p.to_f64().unwrap_or(f64::NAN)),
                                ]
                            })
                            .collect();
                        rep.results.table = Some(Table {
                            columns: vec!["i".into(), "p".into(), "p_float".into()],
                            rows,
                        });
                    } else {
                        rep.results.table = Some(pmf_table(exact_pmf(*n, w)?.probs()));
                    }
                }
            }
            rep
        }
        Command::ExactMoment { n, a, b, r } => {
            let w = IntWindow::new(*a, *b)?;
            if *n < 1 {
                return Err(Failure::Usage("n must be ≥ 1".into()));
            }
            let mut rep = report(
                "exact-moment",
                &[
                    ("n", n.to_string()),
                    ("a", a.to_string()),
                    ("b", b.to_string()),
                    ("r", r.to_string()),
                ],
            );
            let m = exact_falling_moment(*n, w, *r);
            rep.results
                .values
                .insert("moment".into(), m.to_f64().unwrap_or(f64::NAN));
            rep.results.exact.insert("moment".into(), fraction(&m));
            rep
        }
        Command::Qp { r, lambda } => {
            let mut rep = report("qp", &[("r", r.to_string()), ("lambda", lambda.to_string())]);
            rep.results.table = Some(pmf_table(qp_pmf(*r, *lambda)?.probs()));
            rep
        }
        Command::Sample {
            n,
            window,
            sigma,
            draws,
            seed,
            workers,
        } => {
            let mut params = vec![("n", n.to_string())];
            params.extend(window_params(window));
            params.extend([
                ("sigma", sigma.to_string()),
                ("draws", draws.to_string()),
                ("seed", seed.to_string()),
                ("workers", workers.to_string()),
            ]);
            let mut rep = report("sample", &params);
            let w = int_window(*n, window)?;
            let est = estimate_window_pmf(*n, w, *sigma, *draws, *seed, *workers)?;
            rep.seed = Some(*seed);
            rep.results.values.insert("mean".into(), est.mean);
            rep.errors.insert("mean".into(), est.mean_stderr);
            rep.results.exact.insert(
                "window".into(),
                w.map_or_else(|| "empty".into(), |w| format!("[{}, {}]", w.a(), w.b())),
            );
            let rows = est
                .counts
                .iter()
                .zip(&est.pmf_hat)
                .zip(&est.stderr)
                .enumerate()
                .map(|(i, ((&c, &p), &se))| vec![Cell::Int(i as i64), Cell::Int(c as i64), Cell::Num(p), Cell::Num(se)])
                .collect();
            rep.results.table = Some(Table {
                columns: vec!["i".into(), "count".into(), "p_hat".into(), "stderr".into()],
                rows,
            });
            rep
        }
        Command::GammaStar => {
            let mut rep = report("gamma-star", &[]);
            let g = gamma_star();
            let pmf = p_limit(&Interval::tail(g)?, &QuadratureConfig::default())?;
            rep.results.values.insert("gamma_star".into(), g);
            for (i, &p) in pmf.probs().iter().enumerate() {
                rep.results.values.insert(format!("P{i}"), p);
            }
            rep
        }
        Command::Argmax { i, lo, hi, tol } => {
            let cfg = quad_config(*tol)?;
            let mut rep = report(
                "argmax",
                &[
                    ("i", i.to_string()),
                    ("lo", lo.to_string()),
                    ("hi", hi.to_string()),
                    ("tol", format!("{:e}", cfg.abs_tol)),
                ],
            );
            let g = argmax_p(*i, *lo, *hi, &cfg)?;
            rep.results.values.insert("argmax".into(), g);
            rep.errors.insert("argmax".into(), permcycles::limit::ARGMAX_TOL);
            let p = if g < 1.0 {
                p_limit(&Interval::tail(g)?, &cfg)?.prob(*i)
            } else {
                f64::from(u8::from(*i == 0))
            };
            rep.results.values.insert(format!("P{i}"), p);
            rep
        }
        Command::Figure { lo, hi, points } => {
            let mut rep = report(
                "figure",
                &[
                    ("lo", lo.to_string()),
                    ("hi", hi.to_string()),
                    ("points", points.to_string()),
                ],
            );
            let rows = emit_figure_data(*lo, *hi, *points, &QuadratureConfig::default())?;
            rep.results.table = Some(Table {
                columns: ["gamma", "P0", "P1", "P2"].map(String::from).to_vec(),
                rows: rows.iter().map(|r| r.iter().map(|&v| Cell::Num(v)).collect()).collect(),
            });
            rep
        }
        Command::Buchstab { u } => {
            let mut rep = report("buchstab", &[("u", u.to_string())]);
            rep.results.values.insert("omega".into(), buchstab(*u)?);
            rep
        }
        Command::Dilog { x } => {
            let mut rep = report("dilog", &[("x", x.to_string())]);
            rep.results.values.insert("dilog".into(), dilog(*x)?);
            rep
        }
        Command::EwensLambda { window, sigma, tol } => {
            let cfg = quad_config(*tol)?;
            let iv = interval(window)?;
            let mut params = window_params(window).to_vec();
            params.extend([("sigma", sigma.to_string()), ("tol", format!("{:e}", cfg.abs_tol))]);
            let mut rep = report("ewens-lambda", &params);
            let est = ewens_lambda(&iv, *sigma, &cfg)?;
            rep.results.values.insert("lambda".into(), est.value);
            rep.errors.insert("lambda".into(), est.error);
            rep
        }
    })
}

/// Rows `[γ, P0, P1, P2]` of the limiting probabilities over tail windows
/// `(γ, 1)` at `points` equally spaced γ in `[lo, hi]`.
///
/// For γ ≥ 1/2 the closed forms `P0 = 1 + ln γ`, `P1 = −ln γ`, `P2 = 0` are
/// used, below that the full limiting pmf. Requires `1/4 < lo < hi ≤ 1` so
/// that at most a negligible P3 is dropped (it vanishes from γ = 1/3 on);
/// this admits a rounded left end such as 0.3333.
pub fn emit_figure_data(lo: f64, hi: f64, points: usize, cfg: &QuadratureConfig) -> permcycles::Result<Vec<[f64; 4]>> {
    if !(lo > 0.25 && lo < hi && hi <= 1.0) {
        return Err(Error::Domain(format!(
            "figure range needs 1/4 < lo < hi ≤ 1, got [{lo}, {hi}]"
        )));
    }
    if points < 2 {
        return Err(Error::Domain(format!("figure needs at least 2 points, got {points}")));
    }
    (0..points)
        .map(|j| {
            let g = if j + 1 == points {
                hi
            } else {
                lo + (hi - lo) * j as f64 / (points - 1) as f64
            };
            if g >= 0.5 {
                Ok([g, 1.0 + g.ln(), 0.0 - g.ln(), 0.0])
            } else {
                let pmf = p_limit(&Interval::tail(g)?, cfg)?;
                Ok([g, pmf.prob(0), pmf.prob(1), pmf.prob(2)])
            }
        })
        .collect()
}

fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("reports contain only finite numbers and strings");
            s.push('\n');
            s
        }
        Format::Csv => render_csv(report),
        Format::Human => render_human(report),
    }
}

fn render_csv(report: &Report) -> String {
    let mut out = String::new();
    if let Some(table) = &report.results.table {
        writeln!(out, "{}", table.columns.join(",")).unwrap();
        for row in &table.rows {
            let cells: Vec<String> = row.iter().map(Cell::to_string).collect();
            writeln!(out, "{}", cells.join(",")).unwrap();
        }
    } else {
        writeln!(out, "name,value,error").unwrap();
        for (name, v) in &report.results.values {
            let err = report.errors.get(name).map_or(String::new(), f64::to_string);
            writeln!(out, "{name},{v},{err}").unwrap();
        }
        for (name, v) in &report.results.exact {
            writeln!(out, "{name},{v},").unwrap();
        }
    }
    out
}

fn render_human(report: &Report) -> String {
    let mut out = String::new();
    let params: Vec<String> = report.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
    writeln!(
        out,
        "permcycles {} {} {}",
        report.version,
        report.command,
        params.join(" ")
    )
    .unwrap();
    for (name, v) in &report.results.values {
        match report.errors.get(name) {
            Some(err) => writeln!(out, "{name} = {v}  (± {err:.1e})").unwrap(),
            None => writeln!(out, "{name} = {v}").unwrap(),
        }
    }
    for (name, v) in &report.results.exact {
        writeln!(out, "{name} = {v}").unwrap();
    }
    if let Some(table) = &report.results.table {
        let cells: Vec<Vec<String>> = table
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::to_string).collect())
            .collect();
        let widths: Vec<usize> = (0..table.columns.len())
            .map(|c| {
                cells
                    .iter()
                    .map(|r| r[c].len())
                    .chain([table.columns[c].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |row: &[String]| {
            row.iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s:<w$}"))
                .collect::<Vec<_>>()
                .join("  ")
        };
        writeln!(out, "{}", line(&table.columns).trim_end()).unwrap();
        for row in &cells {
            writeln!(out, "{}", line(row).trim_end()).unwrap();
        }
    }
    if let Some(seed) = report.seed {
        writeln!(out, "seed = {seed}").unwrap();
    }
    writeln!(out, "elapsed {:.3} ms", report.elapsed_ms).unwrap();
    out
}
