//! `topvertex`: amplitudes, generating functions and verification suites
//! from the command line.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error,
//! 3 uncertifiable truncation.

use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use topvertex::ctv::{
    ctv_bruteforce, ctv_closed, size3_spot_pairs, square_grid, verify_grid, AmplitudeResult, Identity,
};
use topvertex::fock::{evaluate_word, EvalOptions, Report, Token};
use topvertex::genfun::{
    build_operators, classical_curves, newton_polygon, psi_series, push_residual, shift_margin, Leg, QDiffOp,
};
use topvertex::strip::{strip_closed, strip_fermionic, strip_glued, StripSpec};
use topvertex::vertex::topological_vertex;
use topvertex::{CoeffPoly, Error, Grading, Partition, USeries, Var};

#[derive(Parser)]
#[command(name = "topvertex", version, about = "Topological vertex amplitudes and their verification")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// The topological vertex C_{λμν}.
    #[command(subcommand)]
    Vertex(VertexCmd),
    /// On-strip amplitudes.
    #[command(subcommand)]
    Strip(StripCmd),
    /// The two-leg amplitude of the double-P1 geometry and its flop.
    #[command(subcommand)]
    Ctv(CtvCmd),
    /// Vacuum expectation values of operator words.
    #[command(subcommand)]
    Fock(FockCmd),
    /// One-leg generating functions and their q-difference operators.
    #[command(subcommand)]
    Genfun(GenfunCmd),
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum VertexCmd {
    Eval {
        #[arg(long, default_value = "")]
        lam: Partition,
        #[arg(long, default_value = "")]
        mu: Partition,
        #[arg(long, default_value = "")]
        nu: Partition,
        #[arg(long, default_value_t = 16)]
        trunc: i64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum StripRoute {
    Closed,
    Fermionic,
    Glued,
    /// All three, exit 1 on disagreement.
    All,
}

#[derive(Subcommand)]
enum StripCmd {
    Eval {
        /// Vertex signs, e.g. "-+,+".
        #[arg(long, allow_hyphen_values = true)]
        signs: String,
        /// External legs separated by ';', e.g. "1;;2".
        #[arg(long, default_value = "")]
        betas: String,
        /// Kähler parameters between consecutive vertices, e.g. "Q1,Q2".
        #[arg(long, default_value = "")]
        q: String,
        #[arg(long, default_value = "")]
        alpha0: Partition,
        #[arg(long, default_value = "")]
        alpha_n: Partition,
        #[arg(long, default_value_t = 3)]
        qdeg: u32,
        #[arg(long, default_value_t = 16)]
        trunc: i64,
        #[arg(long, value_enum, default_value_t = StripRoute::Closed)]
        route: StripRoute,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum CtvRoute {
    Bruteforce,
    Closed,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum CtvIdentity {
    Theorem1,
    Theorem5,
    FlopMatch,
}

#[derive(Subcommand)]
enum CtvCmd {
    Amplitude {
        #[arg(long, default_value = "")]
        beta1: Partition,
        #[arg(long, default_value = "")]
        beta2: Partition,
        #[arg(long, value_enum, default_value_t = CtvRoute::Closed)]
        route: CtvRoute,
        #[arg(long, default_value_t = 3)]
        qdeg: u32,
        #[arg(long, default_value_t = 16)]
        trunc: i64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Checks an identity on all pairs with |β₁|, |β₂| ≤ max-size.
    Verify {
        #[arg(value_enum)]
        identity: CtvIdentity,
        #[arg(long, default_value_t = 2)]
        max_size: usize,
        /// Also check five pairs involving a partition of size three.
        #[arg(long)]
        spot: bool,
        #[arg(long, default_value_t = 3)]
        qdeg: u32,
        #[arg(long, default_value_t = 16)]
        trunc: i64,
    },
}

#[derive(Subcommand)]
enum FockCmd {
    Word {
        /// JSON file holding a token array.
        #[arg(long)]
        spec: std::path::PathBuf,
        #[arg(long, default_value = "")]
        bra: Partition,
        #[arg(long, default_value = "")]
        ket: Partition,
        #[arg(long, default_value_t = 3)]
        qdeg: u32,
        #[arg(long, default_value_t = 16)]
        trunc: i64,
        /// Per-variable grading weights, e.g. "P1=0"; unlisted variables weigh 1.
        #[arg(long, default_value = "")]
        weights: String,
        /// Cap on uncertified intermediate sizes; the window is then the caller's responsibility.
        #[arg(long)]
        max_intermediate: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq, Debug)]
enum OpName {
    #[value(name = "K")]
    K,
    #[value(name = "Ktilde")]
    Ktilde,
    #[value(name = "H")]
    H,
    #[value(name = "Htilde")]
    Htilde,
}

impl OpName {
    fn label(self) -> &'static str {
        match self {
            OpName::K => "K",
            OpName::Ktilde => "Ktilde",
            OpName::H => "H",
            OpName::Htilde => "Htilde",
        }
    }

    fn tilde(self) -> bool {
        matches!(self, OpName::Ktilde | OpName::Htilde)
    }
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Emit {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum CurveEmit {
    Polygon,
    Curve,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenfunCheck {
    Qdiff,
}

#[derive(Subcommand)]
enum GenfunCmd {
    /// Ψ(x) (or Ψ̃(x) with --tilde) as a series in x.
    Psi {
        #[arg(long, default_value_t = 6)]
        xdeg: usize,
        #[arg(long, default_value_t = 3)]
        qdeg: u32,
        #[arg(long, default_value_t = 16)]
        trunc: i64,
        #[arg(long)]
        tilde: bool,
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
    },
    /// Checks that the operators annihilate their generating functions.
    Verify {
        #[arg(value_enum)]
        check: GenfunCheck,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "K,Ktilde,H,Htilde")]
        which: Vec<OpName>,
        #[arg(long, default_value_t = 6)]
        xdeg: usize,
        #[arg(long, default_value_t = 3)]
        qdeg: u32,
        #[arg(long, default_value_t = 8)]
        trunc: i64,
    },
    /// Classical limit u → 1 of an operator and its Newton polygon.
    MirrorCurve {
        #[arg(long, value_enum, default_value_t = OpName::K)]
        which: OpName,
        #[arg(long, value_enum, default_value_t = CurveEmit::Polygon)]
        emit: CurveEmit,
    },
}

enum Outcome {
    Ok(String),
    Failed(String),
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Uncertifiable { .. } | Error::WindowTooSmall { .. } => 3,
        Error::InvalidPartition(_) | Error::InvalidArgument(_) | Error::Parse(_) | Error::NotInvertible(_) => 2,
    }
}

/// `c₀ + (c₁)*u^1 + … + O(u^N)` with the coefficient of `u^0` unadorned.
fn series_text(s: &USeries) -> String {
    let mut out = String::new();
    for (e, c) in s.iter() {
        if !out.is_empty() {
            out.push_str(" + ");
        }
        let body = c.to_string();
        let body = if body.contains(' ') { format!("({body})") } else { body };
        if e == 0 {
            out.push_str(&body);
        } else if body == "1" {
            let _ = write!(out, "u^{e}");
        } else if body == "-1" {
            let _ = write!(out, "-u^{e}");
        } else {
            let _ = write!(out, "{body}*u^{e}");
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    if !s.is_exact() {
        let _ = write!(out, " + O(u^{})", s.trunc() + 1);
    }
    out
}

fn json_line(v: Value) -> String {
    serde_json::to_string(&v).expect("JSON values serialize")
}

fn emit_series(format: Format, command: &str, args: Value, s: &USeries) -> String {
    match format {
        Format::Text => series_text(s),
        Format::Json => json_line(json!({"schema": 1, "command": command, "args": args, "series": s.to_json()})),
    }
}

fn report_outcome(name: &str, r: &Report, extra: &str) -> Outcome {
    match r.first_failure() {
        None => Outcome::Ok(format!("PASS {name}: {} checks{extra}", r.checks.len())),
        Some((check, m)) => Outcome::Failed(format!("FAIL {name}: {check}: {m}")),
    }
}

fn vertex(cmd: VertexCmd) -> Result<Outcome, Error> {
    let VertexCmd::Eval { lam, mu, nu, trunc, format } = cmd;
    let c = topological_vertex(&lam, &mu, &nu, Grading::total(0), trunc);
    let args = json!({"lam": lam, "mu": mu, "nu": nu, "trunc": trunc});
    Ok(Outcome::Ok(emit_series(format, "vertex eval", args, &c)))
}

fn strip(cmd: StripCmd) -> Result<Outcome, Error> {
    let StripCmd::Eval { signs, betas, q, alpha0, alpha_n, qdeg, trunc, route, format } = cmd;
    let spec =
        StripSpec::new(StripSpec::parse_signs(&signs)?, StripSpec::parse_betas(&betas)?, StripSpec::parse_kahler(&q)?)?
            .with_ends(alpha0, alpha_n);
    let g = Grading::total(qdeg);
    let args = json!({"signs": signs, "betas": betas, "q": q, "qdeg": qdeg, "trunc": trunc});
    let value = match route {
        StripRoute::Closed => strip_closed(&spec, g, trunc)?,
        StripRoute::Fermionic => strip_fermionic(&spec, g, trunc)?,
        StripRoute::Glued => strip_glued(&spec, g, trunc)?,
        StripRoute::All => {
            let closed = strip_closed(&spec, g, trunc)?;
            let mut r = Report::default();
            r.push("fermionic = closed", &strip_fermionic(&spec, g, trunc)?, &closed);
            r.push("glued = closed", &strip_glued(&spec, g, trunc)?, &closed);
            if let Outcome::Failed(msg) = report_outcome("strip routes", &r, "") {
                return Ok(Outcome::Failed(msg));
            }
            closed
        }
    };
    Ok(Outcome::Ok(emit_series(format, "strip eval", args, &value)))
}

fn amplitude_json(a: &AmplitudeResult) -> Value {
    json!({"route": a.route, "qdeg": a.qdeg, "trunc": a.trunc, "window": [a.window.0, a.window.1], "series": a.value.to_json()})
}

fn ctv(cmd: CtvCmd) -> Result<Outcome, Error> {
    match cmd {
        CtvCmd::Amplitude { beta1, beta2, route, qdeg, trunc, format } => {
            let g = Grading::total(qdeg);
            let mut results = Vec::new();
            if route != CtvRoute::Closed {
                results.push(ctv_bruteforce(&beta1, &beta2, g, trunc)?);
            }
            if route != CtvRoute::Bruteforce {
                results.push(ctv_closed(&beta1, &beta2, g, trunc)?);
            }
            let agreement = if let [a, b] = &results[..] { Some(a.agree(b)) } else { None };
            let text = match format {
                Format::Json => json_line(json!({
                    "schema": 1,
                    "command": "ctv amplitude",
                    "args": {"beta1": beta1, "beta2": beta2, "qdeg": qdeg, "trunc": trunc},
                    "results": results.iter().map(amplitude_json).collect::<Vec<_>>(),
                    "agree": agreement.as_ref().map(|r| r.is_ok()),
                })),
                Format::Text => results
                    .iter()
                    .map(|a| format!("{}: {}", json!(a.route).as_str().unwrap_or_default(), series_text(&a.value)))
                    .collect::<Vec<_>>()
                    .join("\n"),
            };
            match agreement {
                Some(Err(m)) => Ok(Outcome::Failed(format!("{text}\nFAIL bruteforce = closed: {m}"))),
                _ => Ok(Outcome::Ok(text)),
            }
        }
        CtvCmd::Verify { identity, max_size, spot, qdeg, trunc } => {
            let (id, name) = match identity {
                CtvIdentity::Theorem1 => (Identity::Gluing, "theorem1"),
                CtvIdentity::Theorem5 => (Identity::FlopGluing, "theorem5"),
                CtvIdentity::FlopMatch => (Identity::FlopMatch, "flop-match"),
            };
            let mut pairs = square_grid(max_size);
            if spot {
                pairs.extend(size3_spot_pairs());
            }
            let r = verify_grid(id, &pairs, qdeg, trunc)?;
            Ok(report_outcome(name, &r, &format!(" over {} pairs (Q-degree {qdeg}, u^{trunc})", pairs.len())))
        }
    }
}

fn fock(cmd: FockCmd) -> Result<Outcome, Error> {
    let FockCmd::Word { spec, bra, ket, qdeg, trunc, weights, max_intermediate, format } = cmd;
    let g = parse_weights(&weights, Grading::total(qdeg))?;
    let raw = std::fs::read_to_string(&spec)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", spec.display())))?;
    let word: Vec<Token> = serde_json::from_str(&raw).map_err(|e| Error::Parse(format!("{}: {e}", spec.display())))?;
    let opts = EvalOptions { max_intermediate };
    let value = evaluate_word(&word, &bra, &ket, g, trunc, &opts)?;
    let args = json!({"bra": bra, "ket": ket, "qdeg": qdeg, "trunc": trunc, "weights": weights, "max_intermediate": max_intermediate});
    Ok(Outcome::Ok(emit_series(format, "fock word", args, &value)))
}

fn parse_weights(s: &str, mut g: Grading) -> Result<Grading, Error> {
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (v, w) = item.split_once('=').ok_or_else(|| Error::Parse(format!("expected VAR=WEIGHT, got {item:?}")))?;
        let w: i32 = w.trim().parse().map_err(|_| Error::Parse(format!("bad weight in {item:?}")))?;
        g = g.with_weight(Var::parse(v.trim())?, w);
    }
    Ok(g)
}

fn curve_json(c: &std::collections::BTreeMap<(i64, i64), CoeffPoly>) -> Value {
    Value::Array(c.iter().map(|((a, b), p)| json!({"x": a, "y": b, "coeff": p.to_string()})).collect())
}

fn genfun(cmd: GenfunCmd) -> Result<Outcome, Error> {
    match cmd {
        GenfunCmd::Psi { xdeg, qdeg, trunc, tilde, emit } => {
            let leg = if tilde { Leg::Row } else { Leg::Column };
            let psi = psi_series(leg, xdeg, Grading::total(qdeg), trunc)?;
            let text = match emit {
                Emit::Json => json_line(json!({
                    "schema": 1,
                    "command": "genfun psi",
                    "args": {"xdeg": xdeg, "qdeg": qdeg, "trunc": trunc, "tilde": tilde},
                    "psi": psi.to_json(),
                })),
                Emit::Text => psi
                    .coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| format!("x^{k}: {}", series_text(c)))
                    .collect::<Vec<_>>()
                    .join("\n"),
            };
            Ok(Outcome::Ok(text))
        }
        GenfunCmd::Verify { check: GenfunCheck::Qdiff, which, xdeg, qdeg, trunc } => {
            let g = Grading::total(qdeg);
            let wide = trunc + shift_margin(xdeg);
            let ops = build_operators();
            let needs = |t: bool| which.iter().any(|w| w.tilde() == t);
            let psi = if needs(false) { Some(psi_series(Leg::Column, xdeg, g, wide)?) } else { None };
            let psit = if needs(true) { Some(psi_series(Leg::Row, xdeg, g, wide)?) } else { None };
            let mut lines = Vec::new();
            for w in &which {
                let (op, f): (&QDiffOp, _) = match w {
                    OpName::K => (&ops.k, &psi),
                    OpName::H => (&ops.h, &psi),
                    OpName::Ktilde => (&ops.k_tilde, &psit),
                    OpName::Htilde => (&ops.h_tilde, &psit),
                };
                let f = f.as_ref().expect("series computed for every requested leg");
                let mut r = Report::default();
                push_residual(op, f, &format!("{}·Ψ", w.label()), &mut r);
                match report_outcome(w.label(), &r, "") {
                    Outcome::Ok(line) => lines.push(line),
                    Outcome::Failed(line) => {
                        lines.push(line);
                        return Ok(Outcome::Failed(lines.join("\n")));
                    }
                }
            }
            Ok(Outcome::Ok(lines.join("\n")))
        }
        GenfunCmd::MirrorCurve { which, emit } => {
            let ops = build_operators();
            let (k, kt) = classical_curves();
            let curve = match which {
                OpName::K => k,
                OpName::Ktilde => kt,
                OpName::H => ops.h.classical_limit(),
                OpName::Htilde => ops.h_tilde.classical_limit(),
            };
            let pts: Vec<(i64, i64)> = curve.keys().copied().collect();
            let polygon = newton_polygon(&pts);
            let text = match emit {
                CurveEmit::Polygon => json_line(json!(polygon)),
                CurveEmit::Curve => {
                    curve.iter().map(|((a, b), p)| format!("x^{a} y^{b}: {p}")).collect::<Vec<_>>().join("\n")
                }
                CurveEmit::Json => json_line(json!({
                    "schema": 1,
                    "command": "genfun mirror-curve",
                    "which": which.label(),
                    "terms": curve_json(&curve),
                    "polygon": polygon,
                })),
            };
            Ok(Outcome::Ok(text))
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("TOPVERTEX_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| format!("TOPVERTEX_THREADS must be a positive integer, got {v:?}"))?;
    if n == 0 {
        return Err("TOPVERTEX_THREADS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let result = match cli.cmd {
        Cmd::Vertex(c) => vertex(c),
        Cmd::Strip(c) => strip(c),
        Cmd::Ctv(c) => ctv(c),
        Cmd::Fock(c) => fock(c),
        Cmd::Genfun(c) => genfun(c),
    };
    match result {
        Ok(Outcome::Ok(out)) => {
            println!("{out}");
            ExitCode::SUCCESS
        }
        Ok(Outcome::Failed(out)) => {
            println!("{out}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
