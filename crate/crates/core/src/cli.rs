//! `rrcheck`: command-line front end.
//!
//! Exit codes: 0 when every report passes, 1 on a verification failure, 2
//! on a usage error. Reports go to `out`, diagnostics to `err`.

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::classes::Transformation;
use crate::coeff::Coefficient;
use crate::model::{MorphismDesc, Space};
use crate::report::VerificationReport;
use crate::rr::{
    associated_series, euler_characteristic, euler_characteristic_grr, verify_cube, verify_unique_k_morphism, Verifier,
};
use crate::series::{builtin_series, check_group_law, BivariateSeries, BuiltinSeries, UnivariateSeries};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "rrcheck", version, about = "Exact Riemann-Roch checks on products of projective spaces")]
pub struct CliConfig {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Check only the first N basis elements instead of the full basis.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Formal group laws.
    #[command(subcommand)]
    Fgl(FglCommand),
    /// Named power series.
    #[command(subcommand)]
    Series(SeriesCommand),
    /// Associated series of a transformation.
    Assoc(AssocArgs),
    /// Riemann-Roch verifiers.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Tables of invariants.
    #[command(subcommand)]
    Table(TableCommand),
}

#[derive(Debug, Subcommand)]
pub enum FglCommand {
    /// Check the group-law axioms.
    Check {
        /// additive, multiplicative, or custom:FILE with lines "m n coeff".
        #[arg(long)]
        law: String,
        #[arg(long)]
        order: usize,
        /// Coefficient order of a custom law.
        #[arg(long, default_value_t = 1)]
        p: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum SeriesCommand {
    /// Print the coefficients of a named series.
    Show {
        /// bj, t, sj, one-minus-t-pow, exp, exp-eps, monomial, twisted, todd.
        #[arg(long)]
        name: String,
        #[arg(long)]
        j: Option<i64>,
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long)]
        order: usize,
    },
}

#[derive(Debug, Args)]
pub struct AssocArgs {
    /// psi:J, ch, ch-eps:P, id, id@ch, phi:J, add-ext:NAME[@ch|@k], mult-ext:NAME[@ch|@k].
    #[arg(long)]
    pub phi: String,
    /// Probe dimension D; the series is returned to order D-1.
    #[arg(long)]
    pub order: usize,
    /// Coefficient order for series extensions.
    #[arg(long, default_value_t = 1)]
    pub p: usize,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// phi(i_* a) = i_*(S_x(N) phi(a)) for a linear immersion.
    Immersion {
        #[arg(long)]
        phi: String,
        /// Target space, e.g. 2 or 2,1.
        #[arg(long)]
        space: String,
        /// 1-based factor containing the linear subspace.
        #[arg(long)]
        factor: usize,
        #[arg(long)]
        codim: u32,
        #[arg(long, default_value_t = 1)]
        p: usize,
    },
    /// phi(f_* a) = f_*(S_x(-T_f) phi(a)) for a projection.
    Projective {
        #[arg(long)]
        phi: String,
        /// Source space.
        #[arg(long)]
        space: String,
        /// 1-based factors to forget, e.g. 1 or 1,3.
        #[arg(long)]
        drop: String,
        #[arg(long, default_value_t = 1)]
        p: usize,
    },
    /// The five faces of the cube for psi^j, ch and Phi^j.
    Cube {
        #[arg(long)]
        space: String,
        #[arg(long, allow_hyphen_values = true)]
        j: i64,
    },
    /// The additive extension of 1/(1-t) is the identity of K.
    UniqueK {
        #[arg(long)]
        space: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum TableCommand {
    /// chi(P^d, O(n)) by K pushforward, through GRR, and by counting.
    Chi {
        #[arg(long)]
        d: u32,
        #[arg(long, allow_hyphen_values = true)]
        n_min: i64,
        #[arg(long, allow_hyphen_values = true)]
        n_max: i64,
    },
}

/// A violated precondition, reported verbatim with exit code 2.
struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

fn parse_space(s: &str) -> Result<Space, Usage> {
    let s = s.trim();
    if s.is_empty() || s == "pt" {
        return Ok(Space::point());
    }
    let dims = s
        .split(',')
        .map(|d| d.trim().parse::<u32>().map_err(|_| Usage(format!("bad space {s:?}: expected d1,d2,..."))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Space::new(dims))
}

fn parse_factors(s: &str, space: &Space) -> Result<Vec<usize>, Usage> {
    s.split(',')
        .map(|i| {
            let i: usize = i.trim().parse().map_err(|_| Usage(format!("bad factor list {s:?}")))?;
            if i == 0 || i > space.factors() {
                return Err(Usage(format!("factor {i} out of range 1..={} for {space}", space.factors())));
            }
            Ok(i - 1)
        })
        .collect()
}

fn parse_custom_law(text: &str, order: usize, p: usize) -> Result<BivariateSeries, Usage> {
    let mut terms = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.splitn(3, char::is_whitespace).collect();
        let bad = || Usage(format!("line {}: expected \"m n coeff\", got {line:?}", n + 1));
        if fields.len() != 3 {
            return Err(bad());
        }
        let m: u32 = fields[0].parse().map_err(|_| bad())?;
        let k: u32 = fields[1].parse().map_err(|_| bad())?;
        terms.push(((m, k), Coefficient::parse(fields[2].trim(), p)?));
    }
    Ok(BivariateSeries::from_terms(order, p, terms))
}

fn builtin_name(name: &str, j: Option<i64>) -> Result<BuiltinSeries, Usage> {
    let lower = name.to_ascii_lowercase();
    let takes_j = matches!(lower.as_str(), "bj" | "sj" | "one-minus-t-pow" | "monomial");
    let full = match (takes_j, j) {
        (true, Some(j)) => format!("{lower}:{j}"),
        (true, None) if !lower.contains(':') => return Err(Usage(format!("series {name} needs --j"))),
        _ => lower,
    };
    Ok(full.parse()?)
}

#[derive(Serialize)]
struct SeriesJson<'a> {
    name: String,
    order: usize,
    p: usize,
    coeffs: Vec<String>,
    text: &'a str,
}

fn series_json(name: String, s: &UnivariateSeries) -> String {
    let text = s.to_string();
    let doc = SeriesJson {
        name,
        order: s.order(),
        p: s.nilpotency(),
        coeffs: s.coeffs().iter().map(Coefficient::to_string).collect(),
        text: &text,
    };
    serde_json::to_string_pretty(&doc).expect("series serializes")
}

#[derive(Serialize)]
struct ChiRow {
    n: i64,
    chi: String,
    grr: String,
    oracle: String,
    pass: bool,
}

#[derive(Serialize)]
struct ChiTable {
    d: u32,
    rows: Vec<ChiRow>,
    pass: bool,
}

/// `chi(P^d, O(n))` by counting: `C(n+d, d)` for `n >= 0`, zero for
/// `-d <= n < 0`, `(-1)^d C(-n-1, d)` below, by Serre duality.
fn chi_by_counting(d: u32, n: i64) -> num_bigint::BigInt {
    let binom = |top: i64, k: u32| -> num_bigint::BigInt {
        let mut acc = num_bigint::BigInt::from(1);
        for i in 0..k as i64 {
            acc = acc * (top - i) / (i + 1);
        }
        acc
    };
    let d64 = d as i64;
    if n >= 0 {
        binom(n + d64, d)
    } else if n >= -d64 {
        0.into()
    } else if d.is_multiple_of(2) {
        binom(-n - 1, d)
    } else {
        -binom(-n - 1, d)
    }
}

fn emit_report(report: &VerificationReport, format: Format, out: &mut dyn Write) -> std::io::Result<i32> {
    match format {
        Format::Text => write!(out, "{}", report.render_text())?,
        Format::Json => writeln!(out, "{}", report.to_json())?,
    }
    Ok(if report.pass { 0 } else { 1 })
}

fn dispatch(cfg: &CliConfig, out: &mut dyn Write) -> Result<i32, Usage> {
    let format = cfg.format;
    let samples = cfg.samples;
    match &cfg.command {
        Command::Fgl(FglCommand::Check { law, order, p }) => {
            if *p == 0 {
                return Err(Usage("--p must be at least 1".into()));
            }
            let series = match law.as_str() {
                "additive" => BivariateSeries::additive(*order, 1),
                "multiplicative" => BivariateSeries::multiplicative(*order, 1),
                other => match other.strip_prefix("custom:") {
                    Some(path) => {
                        let text = std::fs::read_to_string(path).map_err(|e| Usage(format!("{path}: {e}")))?;
                        parse_custom_law(&text, *order, *p)?
                    }
                    None => {
                        return Err(Usage(format!(
                            "unknown law {other:?}: use additive, multiplicative or custom:FILE"
                        )))
                    }
                },
            };
            Ok(emit_report(&check_group_law(&series), format, out)?)
        }
        Command::Series(SeriesCommand::Show { name, j, p, order }) => {
            let named = builtin_name(name, *j)?;
            let s = builtin_series(named, *order, *p)?;
            match format {
                Format::Text => writeln!(out, "{s}")?,
                Format::Json => writeln!(out, "{}", series_json(named.to_string(), &s))?,
            }
            Ok(0)
        }
        Command::Assoc(AssocArgs { phi, order, p }) => {
            let phi = Transformation::parse(phi, *p)?;
            let s = associated_series(&phi, *order)?;
            match format {
                Format::Text => writeln!(out, "{s}")?,
                Format::Json => writeln!(out, "{}", series_json(phi.to_string(), &s))?,
            }
            Ok(0)
        }
        Command::Verify(VerifyCommand::Immersion { phi, space, factor, codim, p }) => {
            let space = parse_space(space)?;
            let factor = parse_factors(&factor.to_string(), &space)?[0];
            let i = MorphismDesc::linear_immersion(space, factor, *codim)?;
            let report = Verifier::new(Transformation::parse(phi, *p)?).immersion(&i, samples)?;
            Ok(emit_report(&report, format, out)?)
        }
        Command::Verify(VerifyCommand::Projective { phi, space, drop, p }) => {
            let space = parse_space(space)?;
            let drop = parse_factors(drop, &space)?;
            let f = MorphismDesc::projection(space, &drop)?;
            let report = Verifier::new(Transformation::parse(phi, *p)?).projective(&f, samples)?;
            Ok(emit_report(&report, format, out)?)
        }
        Command::Verify(VerifyCommand::Cube { space, j }) => {
            let report = verify_cube(&parse_space(space)?, *j, samples)?;
            Ok(emit_report(&report, format, out)?)
        }
        Command::Verify(VerifyCommand::UniqueK { space }) => {
            let report = verify_unique_k_morphism(&parse_space(space)?)?;
            Ok(emit_report(&report, format, out)?)
        }
        Command::Table(TableCommand::Chi { d, n_min, n_max }) => {
            if n_min > n_max {
                return Err(Usage(format!("--n-min {n_min} exceeds --n-max {n_max}")));
            }
            let mut rows = Vec::new();
            for n in *n_min..=*n_max {
                let chi = euler_characteristic(*d, n)?;
                let grr = euler_characteristic_grr(*d, n)?;
                let oracle = Coefficient::from_rational(chi_by_counting(*d, n).into(), 1);
                let pass = chi == oracle && grr == oracle;
                rows.push(ChiRow { n, chi: chi.to_string(), grr: grr.to_string(), oracle: oracle.to_string(), pass });
            }
            let table = ChiTable { d: *d, pass: rows.iter().all(|r| r.pass), rows };
            match format {
                Format::Text => {
                    writeln!(out, "n\tchi(P{d}, O(n))")?;
                    for r in &table.rows {
                        if r.pass {
                            writeln!(out, "{}\t{}", r.n, r.chi)?;
                        } else {
                            writeln!(out, "{}\t{}\tFAIL grr={} oracle={}", r.n, r.chi, r.grr, r.oracle)?;
                        }
                    }
                }
                Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&table).expect("table serializes"))?,
            }
            Ok(if table.pass { 0 } else { 1 })
        }
    }
}

/// Runs the command line `args` (including the program name).
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match CliConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match dispatch(&cfg, out) {
        Ok(code) => code,
        Err(Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}
