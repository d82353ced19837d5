//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a check failed (stdout carries JSON naming the
//! invariant), 2 bad input. Every JSON document carries `"schema": 1`.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::bratteli::{diagram_closed, diagram_numeric};
use crate::checks::{Suite, MAX_N};
use crate::error::{Error, Result};
use crate::fock::GramBlock;
use crate::gicar::decompose;
use crate::ideal::verify_ideal;
use crate::linalg::CMatrix;
use crate::rep::{relation_report, TruncatedFock, RELATION_TOL};
use crate::rewrite::{reduce, IsomQ, QMatrix, Strategy};
use crate::symmetry::{group_axiom_sample, lemma1_test, UnitaryCandidate};
use crate::words::{fmt_complex, OccVector, Word};

#[derive(Parser, Debug)]
#[command(name = "qisom", version, about = "Computations in q-deformed isometry algebras")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Leftmost,
    Rightmost,
}

/// Options shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// JSON file `{"n": .., "q": [[[re, im], ..], ..]}`.
    #[arg(long, value_name = "FILE", conflicts_with = "preset")]
    q: Option<PathBuf>,
    /// `zero`, `random`, `random:SEED` or `random:SEED:MAXMOD` (default when no file: zero).
    #[arg(long, value_name = "PRESET")]
    preset: Option<String>,
    /// Number of generators for presets.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Seed for every random choice (also the preset seed unless the preset names one).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Overrides the pass/fail tolerance of the subcommand.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normal form of a word such as "a1* a2 a1".
    Rewrite {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        word: String,
        #[arg(long, value_enum, default_value = "leftmost")]
        strategy: StrategyArg,
    },
    /// Gram blocks of the deformed Fock inner product.
    Gram {
        #[command(flatten)]
        common: Common,
        /// A single block, e.g. `1,1`; otherwise every block up to --max-level.
        #[arg(long)]
        v: Option<String>,
        #[arg(long, default_value_t = 3)]
        max_level: usize,
    },
    /// Truncated Fock representation.
    Rep {
        #[command(flatten)]
        common: Common,
        #[arg(long = "L", default_value_t = 3)]
        level: usize,
        /// Check the defining relations below the top level.
        #[arg(long)]
        verify: bool,
    },
    /// Block decomposition of the fixed-point filtration level W_k.
    Gicar {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Include every per-block check value.
        #[arg(long)]
        report: bool,
    },
    /// Bratteli diagram of W_1 ⊆ W_2 ⊆ … up to level k_max + 1.
    Bratteli {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        k_max: usize,
    },
    /// Membership of a unitary in the symmetry group, or sampled group axioms.
    Symmetry {
        #[command(flatten)]
        common: Common,
        /// JSON file `{"u": [[[re, im], ..], ..]}`.
        #[arg(long, value_name = "FILE")]
        u: Option<PathBuf>,
        #[arg(long)]
        sample: Option<usize>,
    },
    /// The projection p = 1 - 1_B and its matrix units.
    Ideal {
        #[command(flatten)]
        common: Common,
        #[arg(long = "L", default_value_t = 4)]
        level: usize,
        #[arg(long, default_value_t = 2)]
        max_len: usize,
    },
    /// Runs all ten acceptance checks for the given parameters.
    Verify {
        #[command(flatten)]
        common: Common,
    },
}

/// What a subcommand produced: the document and whether its checks passed.
struct Output {
    json: Value,
    text: String,
    dot: Option<String>,
    passed: bool,
}

impl Output {
    fn ok(json: Value, text: String) -> Self {
        Output { json, text, dot: None, passed: true }
    }

    /// Marks the document as failed, naming the violated invariant(s).
    fn checked(mut json: Value, text: String, passed: bool, invariant: Value) -> Self {
        json["passed"] = json!(passed);
        if !passed {
            json["status"] = json!("fail");
            json["invariant"] = invariant;
        }
        Output { json, text, dot: None, passed }
    }

    fn failure_doc(&self) -> Value {
        json!({ "schema": 1, "status": "fail", "invariant": self.json["invariant"] })
    }
}

enum Failure {
    BadInput(String),
    Check { invariant: &'static str, message: String },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e.failed_invariant() {
            Some(invariant) => Failure::Check { invariant, message: e.to_string() },
            None => Failure::BadInput(e.to_string()),
        }
    }
}

fn bad(msg: impl Into<String>) -> Failure {
    Failure::BadInput(msg.into())
}

/// Parses `argv`, runs the subcommand and returns the process exit code.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    run(cli)
}

pub fn run(cli: Cli) -> ExitCode {
    let format = common(&cli.command).format;
    match execute(&cli.command) {
        Ok(out) => {
            match format {
                Format::Json => emit(&format!("{}\n", pretty(&out.json))),
                Format::Dot => match &out.dot {
                    Some(d) => emit(d),
                    None => {
                        eprintln!("error: --format dot is only available for `bratteli`");
                        return ExitCode::from(2);
                    }
                },
                Format::Text => emit(&out.text),
            }
            if !out.passed {
                // the JSON document already names the invariant; other formats get a trailer
                match format {
                    Format::Json => {}
                    Format::Text => emit(&format!("{}\n", out.failure_doc())),
                    Format::Dot => eprintln!("{}", out.failure_doc()),
                }
            }
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::BadInput(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Check { invariant, message }) => {
            let doc = json!({ "schema": 1, "status": "fail", "invariant": invariant, "message": message });
            emit(&format!("{}\n", pretty(&doc)));
            ExitCode::from(1)
        }
    }
}

/// Writes to stdout, tolerating a closed pipe (e.g. `qisom ... | head`).
fn emit(s: &str) {
    use std::io::Write;
    let _ = std::io::stdout().lock().write_all(s.as_bytes());
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize")
}

fn common(c: &Command) -> &Common {
    match c {
        Command::Rewrite { common, .. }
        | Command::Gram { common, .. }
        | Command::Rep { common, .. }
        | Command::Gicar { common, .. }
        | Command::Bratteli { common, .. }
        | Command::Symmetry { common, .. }
        | Command::Ideal { common, .. }
        | Command::Verify { common } => common,
    }
}

/// Resolves `--q` / `--preset` into a validated parameter matrix.
pub fn load_q(c: &Common) -> Result<QMatrix> {
    if let Some(path) = &c.q {
        return QMatrix::load(path);
    }
    let preset = c.preset.as_deref().unwrap_or("zero");
    let mut parts = preset.split(':');
    match parts.next() {
        Some("zero") if parts.next().is_none() => Ok(QMatrix::zero(c.n)),
        Some("random") => {
            let seed = match parts.next() {
                Some(s) => s.parse().map_err(|_| Error::Config(format!("bad preset seed `{s}`")))?,
                None => c.seed,
            };
            let max_mod = match parts.next() {
                Some(s) => s.parse().map_err(|_| Error::Config(format!("bad preset modulus `{s}`")))?,
                None => 0.9,
            };
            if parts.next().is_some() {
                return Err(Error::Config(format!("bad preset `{preset}`")));
            }
            QMatrix::random_isom(c.n, max_mod, seed)
        }
        _ => Err(Error::Config(format!(
            "unknown preset `{preset}`; expected zero, random, random:SEED or random:SEED:MAXMOD"
        ))),
    }
}

fn isom(c: &Common) -> std::result::Result<IsomQ, Failure> {
    Ok(IsomQ::new(load_q(c)?)?)
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn matrix_json(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|r| Value::Array((0..m.ncols()).map(|c| complex_json(m[(r, c)])).collect()))
            .collect(),
    )
}

fn execute(cmd: &Command) -> std::result::Result<Output, Failure> {
    match cmd {
        Command::Rewrite { common, word, strategy } => cmd_rewrite(common, word, *strategy),
        Command::Gram { common, v, max_level } => cmd_gram(common, v.as_deref(), *max_level),
        Command::Rep { common, level, verify } => cmd_rep(common, *level, *verify),
        Command::Gicar { common, k, report } => cmd_gicar(common, *k, *report),
        Command::Bratteli { common, k_max } => cmd_bratteli(common, *k_max),
        Command::Symmetry { common, u, sample } => cmd_symmetry(common, u.as_ref(), *sample),
        Command::Ideal { common, level, max_len } => cmd_ideal(common, *level, *max_len),
        Command::Verify { common } => cmd_verify(common),
    }
}

fn cmd_rewrite(c: &Common, word: &str, strategy: StrategyArg) -> std::result::Result<Output, Failure> {
    let q = isom(c)?;
    let w: Word = word.parse()?;
    let strategy = match strategy {
        StrategyArg::Leftmost => Strategy::Leftmost,
        StrategyArg::Rightmost => Strategy::Rightmost,
    };
    let r = reduce(&w, &q, strategy)?;
    let m = &r.monomial;
    let json = json!({
        "schema": 1,
        "word": w.to_string(),
        "normal_form": {
            "coeff": complex_json(m.coeff),
            "mu": m.mu.labels(),
            "sigma": m.sigma.labels(),
            "text": m.to_string(),
        },
        "steps": r.steps,
        "swaps": r.swaps,
    });
    let text = format!("{} = {}\n  steps {}, swaps {}\n", w, m, r.steps, r.swaps);
    Ok(Output::ok(json, text))
}

fn cmd_gram(c: &Common, v: Option<&str>, max_level: usize) -> std::result::Result<Output, Failure> {
    let q = load_q(c)?;
    if let Some(v) = v {
        let v: OccVector = v.parse()?;
        if v.n() != q.n() {
            return Err(bad(format!("block {v} has {} entries but n = {}", v.n(), q.n())));
        }
        let g = GramBlock::compute(&v, &q);
        let basis: Vec<Vec<usize>> = g.basis.iter().map(|b| b.labels()).collect();
        let json = json!({
            "schema": 1,
            "v": v,
            "dim": g.dim(),
            "basis": basis,
            "gram": matrix_json(&g.gram),
            "positive": g.is_positive(),
            "min_pivot": g.min_pivot,
            "determinant": complex_json(g.determinant()),
        });
        let mut text = format!("block {v}: dim {}, min pivot {:.6e}\n", g.dim(), g.min_pivot);
        for (r, b) in g.basis.iter().enumerate() {
            let row: Vec<String> = (0..g.dim()).map(|col| fmt_complex(g.gram[(r, col)])).collect();
            let _ = writeln!(text, "  {:<12} {}", b.to_string(), row.join("  "));
        }
        let _ = writeln!(text, "  det = {}", fmt_complex(g.determinant()));
        if !g.is_positive() {
            return Err(Error::NotPositive { v, min_pivot: g.min_pivot }.into());
        }
        return Ok(Output::ok(json, text));
    }
    let mut rows = Vec::new();
    let mut text = String::new();
    let mut failed = None;
    for v in OccVector::up_to_level(q.n(), max_level) {
        let g = GramBlock::compute(&v, &q);
        let _ = writeln!(text, "{:<12} dim {:>4}  min pivot {:.6e}", v.to_string(), g.dim(), g.min_pivot);
        if !g.is_positive() && failed.is_none() {
            failed = Some(Error::NotPositive { v: v.clone(), min_pivot: g.min_pivot });
        }
        rows.push(json!({ "v": v, "dim": g.dim(), "min_pivot": g.min_pivot, "positive": g.is_positive() }));
    }
    if let Some(e) = failed {
        return Err(e.into());
    }
    Ok(Output::ok(json!({ "schema": 1, "n": q.n(), "max_level": max_level, "blocks": rows }), text))
}

fn cmd_rep(c: &Common, level: usize, verify: bool) -> std::result::Result<Output, Failure> {
    let q = load_q(c)?;
    let t = TruncatedFock::new(&q, level)?;
    let blocks: Vec<Value> = t.block_keys().map(|v| json!({ "v": v, "dim": t.dim(v) })).collect();
    let mut json = json!({ "schema": 1, "n": q.n(), "L": level, "total_dim": t.total_dim(), "blocks": blocks });
    let mut text = format!("truncated Fock space: n = {}, L = {level}, dim {}\n", q.n(), t.total_dim());
    let mut passed = true;
    if verify {
        let tol = c.tol.unwrap_or(RELATION_TOL);
        let report = relation_report(&t);
        passed = report.passed(tol);
        for r in &report.residuals {
            let _ = writeln!(text, "  a{}* a{} relation residual {:.3e}", r.i, r.j, r.residual);
        }
        let _ = writeln!(text, "  {}", report.note);
        let _ = writeln!(text, "  max residual {:.3e} (tol {tol:e}): {}", report.max_residual, verdict(passed));
        json["relations"] = serde_json::to_value(&report).expect("report serializes");
        json["tol"] = json!(tol);
    }
    Ok(Output::checked(json, text, passed, json!("fock_relations")))
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

fn cmd_gicar(c: &Common, k: usize, report: bool) -> std::result::Result<Output, Failure> {
    let q = isom(c)?;
    if k == 0 {
        return Err(bad("--k must be at least 1"));
    }
    let t = TruncatedFock::for_filtration(q.q(), k)?;
    let d = decompose(k, &t)?;
    let blocks: Vec<Value> = d
        .blocks
        .iter()
        .map(|b| {
            let mut entry = json!({ "v": b.v, "dim": b.dim, "unit_rank": b.unit_rank });
            if report {
                entry["checks"] = serde_json::to_value(&b.checks).expect("checks serialize");
            }
            entry
        })
        .collect();
    let json = json!({
        "schema": 1,
        "n": d.n,
        "k": d.k,
        "blocks": blocks,
        "total_dim": d.total_dim,
        "represented_dim": d.represented_dim,
        "orthogonality": d.orthogonality,
        "partition": d.partition,
    });
    let mut text = format!("W_{k} for n = {}: ", d.n);
    let sizes: Vec<String> = d.blocks.iter().map(|b| format!("M_{}", b.dim)).collect();
    let _ = writeln!(text, "{}", sizes.join(" + "));
    let _ = writeln!(text, "  total dim {} (represented {})", d.total_dim, d.represented_dim);
    if report {
        for b in &d.blocks {
            let ch = &b.checks;
            let _ = writeln!(
                text,
                "  {:<10} dim {:>3}  idem {:.1e}  adj {:.1e}  central {:.1e}",
                b.v.to_string(),
                b.dim,
                ch.idempotent,
                ch.self_adjoint,
                ch.central
            );
        }
    }
    Ok(Output::ok(json, text))
}

fn cmd_bratteli(c: &Common, k_max: usize) -> std::result::Result<Output, Failure> {
    let q = isom(c)?;
    if k_max == 0 {
        return Err(bad("--k-max must be at least 1"));
    }
    let numeric = diagram_numeric(q.q(), k_max)?;
    let closed = diagram_closed(q.n(), k_max);
    let passed = numeric == closed;
    let mut json = numeric.to_json();
    json["agrees_with_closed_form"] = json!(passed);
    let mut text = format!("Bratteli diagram, n = {}, levels 1..={}\n", q.n(), k_max + 1);
    for e in &numeric.edges {
        let _ = writeln!(text, "  k={} {} -> {}  x{}", e.k, e.v, e.u, e.m);
    }
    for r in numeric.unital.iter().filter(|r| !r.unital) {
        let _ = writeln!(text, "  non-unital: k={} block {} covered {}/{}", r.k, r.u, r.covered, r.dim);
    }
    let _ = writeln!(text, "  closed form agreement: {}", verdict(passed));
    let mut out = Output::checked(json, text, passed, json!("bratteli_closed_form"));
    out.dot = Some(numeric.to_dot());
    Ok(out)
}

#[derive(Deserialize)]
struct UnitaryJson {
    u: Vec<Vec<[f64; 2]>>,
}

fn load_unitary(path: &PathBuf) -> Result<UnitaryCandidate> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let raw: UnitaryJson =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("malformed unitary JSON: {e}")))?;
    let n = raw.u.len();
    if raw.u.iter().any(|row| row.len() != n) {
        return Err(Error::Config("unitary must be square".into()));
    }
    UnitaryCandidate::new(CMatrix::from_fn(n, n, |r, col| {
        Complex64::new(raw.u[r][col][0], raw.u[r][col][1])
    }))
}

fn cmd_symmetry(c: &Common, u: Option<&PathBuf>, sample: Option<usize>) -> std::result::Result<Output, Failure> {
    let q = load_q(c)?;
    let mut json = json!({ "schema": 1, "n": q.n() });
    let mut text = String::new();
    let mut passed = true;
    if u.is_none() && sample.is_none() {
        return Err(bad("symmetry needs --u FILE or --sample COUNT"));
    }
    if let Some(path) = u {
        let u = load_unitary(path)?;
        if u.n() != q.n() {
            return Err(bad(format!("unitary is {}x{} but n = {}", u.n(), u.n(), q.n())));
        }
        let out = lemma1_test(&u, &q);
        passed &= out.passed;
        let _ = writeln!(text, "membership: {} (worst term {:.3e})", verdict(out.passed), out.worst);
        if let Some([i, j, k, l]) = out.witness {
            let _ = writeln!(text, "  witness (i, j, k, l) = ({i}, {j}, {k}, {l})");
        }
        json["membership"] = serde_json::to_value(&out).expect("outcome serializes");
    }
    if let Some(trials) = sample {
        if trials == 0 {
            return Err(bad("--sample must be at least 1"));
        }
        let report = group_axiom_sample(&q, trials, c.seed);
        passed &= report.ok;
        let _ = writeln!(
            text,
            "group axioms over {trials} trials: {} (closure {}/{} ok, random passing {})",
            verdict(report.ok),
            report.closure_checked - report.closure_failed,
            report.closure_checked,
            report.random_passed
        );
        json["axioms"] = serde_json::to_value(&report).expect("report serializes");
    }
    Ok(Output::checked(json, text, passed, json!("symmetry_membership")))
}

fn cmd_ideal(c: &Common, level: usize, max_len: usize) -> std::result::Result<Output, Failure> {
    let q = isom(c)?;
    let t = TruncatedFock::new(q.q(), level)?;
    let (r, _) = verify_ideal(&t, max_len)?;
    let structural = r.rank_p > 0 && r.rank_p < r.dim && r.diagonal_rank_one && r.span_rank == r.unit_count;
    let passed = match c.tol {
        Some(tol) => {
            structural
                && [r.p_projection, r.p_kills_creation, r.product_residual, r.adjoint_residual, r.orthogonality_residual]
                    .iter()
                    .all(|&x| x < tol)
        }
        None => r.passed,
    };
    let json = json!({
        "schema": 1,
        "n": r.n,
        "L": r.level,
        "max_len": r.max_len,
        "rank_p": r.rank_p,
        "spectral_gap": r.spectral_gap,
        "worst_residuals": {
            "p_projection": r.p_projection,
            "p_kills_creation": r.p_kills_creation,
            "product": r.product_residual,
            "adjoint": r.adjoint_residual,
            "orthogonality": r.orthogonality_residual,
        },
        "diagonal_rank_one": r.diagonal_rank_one,
        "unit_count": r.unit_count,
        "span_rank": r.span_rank,
    });
    let text = format!(
        "p: rank {} of {}, spectral gap {:.4}\n  {} matrix units (span rank {})\n  worst product {:.2e}, adjoint {:.2e}, orthogonality {:.2e}\n  {}\n",
        r.rank_p,
        r.dim,
        r.spectral_gap,
        r.unit_count,
        r.span_rank,
        r.product_residual,
        r.adjoint_residual,
        r.orthogonality_residual,
        verdict(passed)
    );
    Ok(Output::checked(json, text, passed, json!("matrix_units")))
}

fn cmd_verify(c: &Common) -> std::result::Result<Output, Failure> {
    let q = isom(c)?;
    if q.n() > MAX_N {
        return Err(bad(format!("verify is sized for n <= {MAX_N}, got n = {}", q.n())));
    }
    let outcomes = Suite::single(q, c.seed).run_all();
    let passed = outcomes.iter().all(|o| o.ok());
    let mut text = String::new();
    for o in &outcomes {
        let _ = writeln!(text, "{}", o.line());
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.ok()).map(|o| o.name).collect();
    let json = json!({
        "schema": 1,
        // timings vary between runs, so the JSON keeps only the verdicts
        "checks": outcomes.iter().map(|o| json!({ "id": o.id, "name": o.name, "passed": o.ok(), "detail": o.detail })).collect::<Vec<_>>(),
    });
    Ok(Output::checked(json, text, passed, json!(failed)))
}
