//! Command-line front end for the cbmw kernel.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use cbmw::algebra::{self, GramReport, RelationReport};
use cbmw::cache::{StructureCache, CACHE_DIR_ENV};
use cbmw::diagram::{basis_enumerate, bmw_dimension};
use cbmw::engine::mul_basis_with;
use cbmw::hecke::{self, HeckeParams, HeckeWord};
use cbmw::invariants::{invariant_values, markov_move_suite, BraidWord};
use cbmw::ring::parse_rational;
use cbmw::{AlgElem, Error, GenWord, Params, RhoBranch, RingElem};

#[derive(Parser)]
#[command(name = "cbmw", version, about = "Exact computations in cyclotomic BMW and Hecke algebras")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value = "json")]
    format: Format,
    /// Directory for the persistent structure-constant cache.
    #[arg(long, global = true, env = CACHE_DIR_ENV)]
    cache_dir: Option<PathBuf>,
    /// Suppress progress messages on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Universal,
    Numeric,
}

#[derive(Args, Clone)]
struct ParamArgs {
    /// Degree of the cyclotomic relation.
    #[arg(long, default_value_t = 2)]
    r: usize,
    #[arg(long, value_enum, default_value = "universal")]
    mode: ModeArg,
    /// Branch of the rho equation: a or b for even r, + or - for odd r.
    #[arg(long)]
    branch: Option<String>,
    /// Rational value of q (numeric mode).
    #[arg(long, allow_hyphen_values = true)]
    q: Option<String>,
    /// Comma-separated rational values of u_1..u_r (numeric mode).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    u: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the solved admissible parameters.
    Params {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Reduce a sum of generator words to the basis.
    Reduce {
        #[arg(long)]
        n: usize,
        /// A term `[coeff:]word`, e.g. `e1 y e1` or `-3/2: g1^-1`; repeatable.
        #[arg(long = "word", required = true, allow_hyphen_values = true)]
        words: Vec<String>,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Multiply two elements given as words or as JSON files.
    Multiply {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        left: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        right: Option<String>,
        #[arg(long)]
        left_json: Option<PathBuf>,
        #[arg(long)]
        right_json: Option<PathBuf>,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Basis counts against r^n (2n-1)!! and r^n n!.
    Dim {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        r: usize,
    },
    /// Reduce every defining relation and report residuals.
    Relations {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Markov trace of a sum of words.
    Trace {
        #[arg(long)]
        n: usize,
        #[arg(long = "word", required = true, allow_hyphen_values = true)]
        words: Vec<String>,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Gram matrix of the trace form and its rank.
    Gram {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Solid-torus link invariant of an affine braid closure.
    Invariant {
        #[arg(long)]
        n: usize,
        /// Tokens s<i>, s<i>^-1, t, t^-1.
        #[arg(long, allow_hyphen_values = true)]
        braid: String,
        /// Also verify invariance under conjugation and stabilization.
        #[arg(long)]
        moves: bool,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Cyclotomic Hecke algebra operations.
    Hecke {
        #[command(subcommand)]
        command: HeckeCommand,
    },
    /// Check the admissibility equations and weak admissibility.
    AdmissibleCheck {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Inspect or clear the structure-constant cache.
    Cache {
        #[command(subcommand)]
        command: CacheCommand,
    },
}

#[derive(Subcommand)]
enum HeckeCommand {
    /// Reduce a sum of words in g_i^{+-1}, x^{+-1}, xp<j>^k.
    Reduce {
        #[arg(long)]
        n: usize,
        #[arg(long = "word", required = true, allow_hyphen_values = true)]
        words: Vec<String>,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Normal-word count of the completed presentation against r^n n!.
    Dim {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        r: usize,
    },
    /// Hecke relation suite.
    Relations {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Check that the quotient map from the BMW algebra is multiplicative.
    Check {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        params: ParamArgs,
    },
}

#[derive(Subcommand)]
enum CacheCommand {
    Stats,
    Clear,
}

/// Failure modes, each with its own exit code.
#[derive(Debug)]
enum Failure {
    /// A check ran and reported a failure; the report was printed.
    Check,
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn kind_and_code(&self) -> (&'static str, u8) {
        match self {
            Failure::Check => ("check-failed", 1),
            Failure::Usage(_) => ("parse", 2),
            Failure::Lib(e) => match e {
                Error::Parse(_) => ("parse", 2),
                Error::InvalidInput(_) | Error::DeltaWindow { .. } | Error::MissingVariable(_) => ("invalid-input", 3),
                Error::Io(_) => ("cache-io", 5),
                Error::Unsupported(_) => ("unsupported", 6),
                _ => ("invariant-violation", 4),
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Check => "check failed".into(),
            Failure::Usage(m) => m.clone(),
            Failure::Lib(e) => e.to_string(),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

struct Ctx {
    format: Format,
    quiet: bool,
    cache: StructureCache,
}

impl Ctx {
    fn progress(&self, msg: &str) {
        if !self.quiet {
            eprintln!("[cbmw] {msg}");
        }
    }

    fn emit<T: Serialize>(&self, value: &T, pretty: impl FnOnce() -> String, csv: Option<String>) -> Outcome {
        let text = match self.format {
            Format::Json => serde_json::to_string_pretty(value).map_err(|e| Failure::Lib(e.into()))?,
            Format::Pretty => pretty(),
            Format::Csv => csv.ok_or_else(|| Failure::Usage("csv output is not available for this command".into()))?,
        };
        let mut out = std::io::stdout().lock();
        writeln!(out, "{}", text.trim_end()).map_err(|e| Failure::Lib(e.into()))
    }
}

fn build_params(a: &ParamArgs) -> Result<Params, Failure> {
    let branch = match &a.branch {
        Some(b) => RhoBranch::parse(b)?,
        None => RhoBranch::default_for(a.r),
    };
    match a.mode {
        ModeArg::Universal => {
            if a.q.is_some() || !a.u.is_empty() {
                return Err(Failure::Usage("--q and --u need --mode numeric".into()));
            }
            Ok(Params::universal(a.r, branch)?)
        }
        ModeArg::Numeric => {
            let (q, u) = numeric_values(a)?;
            Ok(Params::numeric(a.r, branch, q, u)?)
        }
    }
}

fn numeric_values(a: &ParamArgs) -> Result<(num_rational::BigRational, Vec<num_rational::BigRational>), Failure> {
    let q = a.q.as_deref().ok_or_else(|| Failure::Usage("numeric mode needs --q".into()))?;
    if a.u.len() != a.r {
        return Err(Failure::Usage(format!("numeric mode needs {} values in --u", a.r)));
    }
    let u = a.u.iter().map(|s| parse_rational(s.trim())).collect::<cbmw::Result<Vec<_>>>()?;
    Ok((parse_rational(q.trim())?, u))
}

fn build_hecke_params(a: &ParamArgs) -> Result<HeckeParams, Failure> {
    match a.mode {
        ModeArg::Universal => Ok(HeckeParams::universal(a.r)?),
        ModeArg::Numeric => {
            let (q, u) = numeric_values(a)?;
            Ok(HeckeParams::numeric(a.r, q, u)?)
        }
    }
}

/// Split `[coeff:]word`.
fn split_term(text: &str) -> Result<(RingElem, &str), Failure> {
    match text.split_once(':') {
        Some((c, w)) => Ok((RingElem::from_rational(&parse_rational(c.trim())?), w)),
        None => Ok((RingElem::one(), text)),
    }
}

fn parse_terms(n: usize, words: &[String]) -> Result<Vec<(RingElem, GenWord)>, Failure> {
    words
        .iter()
        .map(|t| {
            let (c, w) = split_term(t)?;
            Ok((c, GenWord::parse(n, w)?))
        })
        .collect()
}

fn load_elem(n: usize, word: &Option<String>, file: &Option<PathBuf>, p: &Params, side: &str) -> Result<AlgElem, Failure> {
    match (word, file) {
        (Some(w), None) => Ok(cbmw::reduce(&parse_terms(n, std::slice::from_ref(w))?, p)?),
        (None, Some(f)) => {
            let text = std::fs::read_to_string(f).map_err(|e| Failure::Usage(format!("{}: {e}", f.display())))?;
            let x: AlgElem = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
            if x.n != n || x.r != p.r() || x.mode != p.mode() {
                return Err(Failure::Lib(Error::InvalidInput(format!("{side} element does not match --n, --r and --mode"))));
            }
            Ok(x)
        }
        _ => Err(Failure::Usage(format!("give exactly one of --{side} and --{side}-json"))),
    }
}

fn relations_csv(r: &RelationReport) -> String {
    let mut s = String::from("label,pass\n");
    for c in &r.checks {
        s.push_str(&format!("\"{}\",{}\n", c.label, c.pass));
    }
    s
}

fn check(pass: bool) -> Outcome {
    if pass {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn run(cli: Cli) -> Outcome {
    let cache = match &cli.cache_dir {
        Some(d) => StructureCache::persistent(d)?,
        None => StructureCache::in_memory(),
    };
    let ctx = Ctx { format: cli.format, quiet: cli.quiet, cache };
    match cli.command {
        Command::Params { params } => {
            let p = build_params(&params)?;
            ctx.emit(&p, || format!("{p:?}"), None)
        }
        Command::Reduce { n, words, params } => {
            let p = build_params(&params)?;
            ctx.progress(&format!("reducing in W(n = {n}, r = {})", p.r()));
            let x = cbmw::reduce(&parse_terms(n, &words)?, &p)?;
            ctx.emit(&x, || x.to_string(), None)
        }
        Command::Multiply { n, left, right, left_json, right_json, params } => {
            let p = build_params(&params)?;
            let x = load_elem(n, &left, &left_json, &p, "left")?;
            let y = load_elem(n, &right, &right_json, &p, "right")?;
            ctx.progress(&format!("multiplying {} x {} basis terms", x.len(), y.len()));
            let mut out = AlgElem::zero(n, p.r(), p.mode());
            for (bx, cx) in x.terms() {
                for (by, cy) in y.terms() {
                    let prod = mul_basis_with(bx, by, &p, &ctx.cache)?;
                    out = out.add(&prod.scale(&cx.mul(cy)))?;
                }
            }
            ctx.cache.flush()?;
            ctx.emit(&out, || out.to_string(), None)
        }
        Command::Dim { n, r } => {
            if r == 0 {
                return Err(Failure::Lib(Error::InvalidInput("r must be at least 1".into())));
            }
            let bmw = basis_enumerate(n, r).len() as u128;
            let bmw_formula = bmw_dimension(n, r);
            let hecke = hecke::hecke_basis(n, r).len() as u128;
            let hecke_formula = hecke::hecke_dimension(n, r);
            let pass = bmw == bmw_formula && hecke == hecke_formula;
            let report = json!({
                "n": n, "r": r,
                "bmw": {"enumerated": bmw.to_string(), "formula": bmw_formula.to_string(), "pass": bmw == bmw_formula},
                "hecke": {"enumerated": hecke.to_string(), "formula": hecke_formula.to_string(), "pass": hecke == hecke_formula},
                "pass": pass,
            });
            let verdict = if pass { "PASS" } else { "FAIL" };
            ctx.emit(
                &report,
                || format!("bmw {bmw} (expected {bmw_formula})\nhecke {hecke} (expected {hecke_formula})\n{verdict}"),
                Some(format!("n,r,bmw,bmw_formula,hecke,hecke_formula,pass\n{n},{r},{bmw},{bmw_formula},{hecke},{hecke_formula},{pass}")),
            )?;
            check(pass)
        }
        Command::Relations { n, params } => {
            let p = build_params(&params)?;
            ctx.progress(&format!("relation suite for W(n = {n}, r = {})", p.r()));
            let rep = algebra::relation_suite(n, &p)?;
            let pretty = || {
                rep.checks
                    .iter()
                    .map(|c| format!("{} {}", if c.pass { "PASS" } else { "FAIL" }, c.label))
                    .collect::<Vec<_>>()
                    .join("\n")
            };
            let all = rep.all_pass();
            ctx.emit(&json!({"report": rep, "pass": all}), pretty, Some(relations_csv(&rep)))?;
            check(all)
        }
        Command::Trace { n, words, params } => {
            let p = build_params(&params)?;
            let x = cbmw::reduce(&parse_terms(n, &words)?, &p)?;
            ctx.progress("closing strands");
            let rep = algebra::markov_trace(&x, &p)?;
            ctx.emit(&rep, || rep.value.to_string(), None)
        }
        Command::Gram { n, params } => {
            let p = build_params(&params)?;
            ctx.progress(&format!("Gram matrix for W(n = {n}, r = {})", p.r()));
            let rep: GramReport = algebra::gram(n, &p)?;
            let full = rep.full_rank();
            ctx.emit(
                &json!({"n": rep.n, "r": rep.r, "size": rep.size, "rank": rep.rank, "full_rank": full, "matrix": rep.matrix}),
                || format!("size {} rank {}{}", rep.size, rep.rank, if full { " (full)" } else { "" }),
                Some(rep.to_csv()),
            )
        }
        Command::Invariant { n, braid, moves, params } => {
            let p = build_params(&params)?;
            let beta = BraidWord::parse(n, &braid)?;
            let v = invariant_values(&beta, &p)?;
            if !moves {
                return ctx.emit(&v, || format!("raw {}\nnormalized {}", v.raw, v.normalized), None);
            }
            ctx.progress("checking Markov moves");
            let rep = markov_move_suite(&beta, &p)?;
            let all = rep.all_pass();
            ctx.emit(
                &json!({"values": v, "moves": rep, "pass": all}),
                || {
                    let mut s = format!("normalized {}\n", v.normalized);
                    for c in &rep.checks {
                        s.push_str(&format!("{} {}\n", if c.pass { "PASS" } else { "FAIL" }, c.label));
                    }
                    s
                },
                None,
            )?;
            check(all)
        }
        Command::Hecke { command } => run_hecke(&ctx, command),
        Command::AdmissibleCheck { params } => {
            let p = build_params(&params)?;
            let rep = p.check_admissible()?;
            let weak = (-5..=5i64)
                .map(|a| Ok(json!({"shift": a, "residual": p.weak_admissibility_residual(a)?})))
                .collect::<cbmw::Result<Vec<_>>>()?;
            let weak_pass = (-5..=5i64).all(|a| p.weak_admissibility_residual(a).map(|x| x.is_zero()).unwrap_or(false));
            let pass = rep.pass && weak_pass;
            ctx.emit(
                &json!({"admissibility": rep, "weak": weak, "pass": pass}),
                || format!("admissible {}\nweakly admissible on [-5, 5] {}", rep.pass, weak_pass),
                None,
            )?;
            check(pass)
        }
        Command::Cache { command } => match command {
            CacheCommand::Stats => {
                let s = ctx.cache.stats()?;
                ctx.emit(&s, || format!("{s:?}"), None)
            }
            CacheCommand::Clear => {
                let removed = ctx.cache.clear()?;
                ctx.emit(&json!({"removed": removed}), || format!("removed {removed} files"), None)
            }
        },
    }
}

fn run_hecke(ctx: &Ctx, command: HeckeCommand) -> Outcome {
    match command {
        HeckeCommand::Reduce { n, words, params } => {
            let hp = build_hecke_params(&params)?;
            let terms = words
                .iter()
                .map(|t| {
                    let (c, w) = split_term(t)?;
                    Ok((c, HeckeWord::parse(n, w)?))
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            let x = hecke::hecke_reduce(&terms, &hp)?;
            ctx.emit(&x, || x.to_string(), None)
        }
        HeckeCommand::Dim { n, r } => {
            ctx.progress(&format!("completing the Hecke presentation for n = {n}, r = {r}"));
            let d = hecke::hecke_dim(n, r)?;
            let formula = hecke::hecke_dimension(n, r);
            let pass = d as u128 == formula;
            ctx.emit(
                &json!({"n": n, "r": r, "normal_words": d, "formula": formula.to_string(), "pass": pass}),
                || format!("{d} (expected {formula}) {}", if pass { "PASS" } else { "FAIL" }),
                Some(format!("n,r,normal_words,formula,pass\n{n},{r},{d},{formula},{pass}")),
            )?;
            check(pass)
        }
        HeckeCommand::Relations { n, params } => {
            let hp = build_hecke_params(&params)?;
            let rep = hecke::hecke_relation_suite(n, &hp)?;
            let all = rep.all_pass();
            ctx.emit(
                &json!({"report": rep, "pass": all}),
                || {
                    rep.checks
                        .iter()
                        .map(|c| format!("{} {}", if c.pass { "PASS" } else { "FAIL" }, c.label))
                        .collect::<Vec<_>>()
                        .join("\n")
                },
                None,
            )?;
            check(all)
        }
        HeckeCommand::Check { n, params } => {
            let p = build_params(&params)?;
            ctx.progress(&format!("comparing products of W(n = {n}, r = {}) with the Hecke quotient", p.r()));
            let rep = hecke::bmw_to_hecke_check(n, &p)?;
            let pass = rep.pass();
            ctx.emit(
                &rep,
                || format!("{} pairs checked, {}", rep.pairs_checked, if pass { "PASS" } else { "FAIL" }),
                None,
            )?;
            check(pass)
        }
    }
}

fn main() -> ExitCode {
    let result = match Cli::try_parse() {
        Ok(cli) => run(cli),
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => Err(Failure::Usage(e.to_string())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (kind, code) = f.kind_and_code();
            if !matches!(f, Failure::Check) {
                let body = json!({"error": {"kind": kind, "message": f.message(), "exit_code": code}});
                eprintln!("{body}");
            }
            ExitCode::from(code)
        }
    }
}
