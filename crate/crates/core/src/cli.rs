//! Command-line front end.
//!
//! Every subcommand writes either JSON lines (one object per row) or CSV with a
//! header row. Exit codes: 0 when everything checked passes, 1 when at least
//! one identity or congruence is refuted, 2 on usage or hypothesis errors.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::congruences::{scan_primes, CongruenceId, CongruenceParams, PrimeOutcome};
use crate::exact::Rational;
use crate::identities::{scan_identity, IdentityId, IdentityParams, ParamRange};
use crate::sequences::SequenceHandle;
use crate::transforms::{classify, Sign};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "parityseq", version, about = "Exact even/odd sequence calculus under the alternating binomial transform")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the first terms of a sequence.
    Gen(GenArgs),
    /// Classify a sequence as even, odd or neither on a finite prefix.
    Classify(ClassifyArgs),
    /// Verify an identity over a range of parameters.
    Verify(VerifyArgs),
    /// Check a congruence at every odd prime in a range.
    Congruence(CongruenceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Sequence kind, optionally with inline parameters (`lucas_u:b=3,c=2`).
    #[arg(long)]
    pub kind: String,
    /// Extra `key=value` parameters for the kind.
    #[arg(long, num_args = 1..)]
    pub param: Vec<String>,
    #[arg(long)]
    pub upto: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub kind: String,
    #[arg(long, num_args = 1..)]
    pub param: Vec<String>,
    #[arg(long, default_value_t = 64)]
    pub upto: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Identity key, e.g. `T2.1` or `C3.2`.
    #[arg(long)]
    pub id: String,
    #[arg(long)]
    pub seq: Option<String>,
    /// Second sequence for the two-sequence identities.
    #[arg(long)]
    pub seq2: Option<String>,
    /// `name=a..b` (inclusive, optional `:step`) or `name=v`; repeatable.
    /// The first range varies slowest.
    #[arg(long)]
    pub range: Vec<String>,
    #[arg(long, value_parser = parse_sign)]
    pub sign: Option<Sign>,
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<Rational>,
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<Rational>,
    /// Fixed lambda; without it lambda identities are checked as polynomials.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<Rational>,
    #[arg(long)]
    pub r: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<Rational>,
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<Rational>,
    /// Values `F(0);F(1);...` for the function-table identities.
    #[arg(long, allow_hyphen_values = true)]
    pub table: Option<String>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CongruenceArgs {
    /// Congruence key, e.g. `T4.1`, `C4.2` (both parts) or `WOLST`.
    #[arg(long)]
    pub id: String,
    /// Inclusive prime range `a..b`.
    #[arg(long)]
    pub primes: String,
    #[arg(long)]
    pub seq: Option<String>,
    /// Lucas parameters as `b=.. c=..`.
    #[arg(long, num_args = 1.., allow_hyphen_values = true)]
    pub param: Vec<String>,
    #[command(flatten)]
    pub out: OutputArgs,
}

fn parse_sign(s: &str) -> Result<Sign, String> {
    s.parse::<Sign>().map_err(|_| format!("expected + or -, got {s:?}"))
}

/// A failure that maps to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl From<io::Error> for UsageError {
    fn from(e: io::Error) -> Self {
        UsageError(format!("output: {e}"))
    }
}

fn usage(flag: &str, msg: impl std::fmt::Display) -> UsageError {
    UsageError(format!("{flag}: {msg}"))
}

fn sequence_spec(kind: &str, params: &[String]) -> Result<SequenceHandle, UsageError> {
    let spec = if params.is_empty() {
        kind.to_string()
    } else {
        let sep = if kind.contains(':') { "," } else { ":" };
        format!("{kind}{sep}{}", params.join(","))
    };
    spec.parse().map_err(|e| usage("--kind", e))
}

/// Parses `name=a..b`, `name=a..b:step` or `name=v`.
pub fn parse_range(s: &str) -> Result<ParamRange, String> {
    let (name, spec) = s.split_once('=').ok_or_else(|| format!("expected name=a..b, got {s:?}"))?;
    let name = name.trim();
    if !matches!(name, "n" | "m" | "p" | "r") {
        return Err(format!("unknown range parameter {name:?}"));
    }
    let (span, step) = match spec.split_once(':') {
        Some((span, step)) => (span, step.trim().parse::<u64>().map_err(|e| format!("step: {e}"))?),
        None => (spec, 1),
    };
    if step == 0 {
        return Err("step must be positive".into());
    }
    let num = |t: &str| t.trim().parse::<u64>().map_err(|e| format!("{t:?}: {e}"));
    let (lo, hi) = match span.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.trim_start_matches('='))?),
        None => {
            let v = num(span)?;
            (v, v)
        }
    };
    Ok(ParamRange::new(name, (lo..=hi).step_by(step as usize)))
}

fn parse_span(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected a..b, got {s:?}"))?;
    let a = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b = b.trim().trim_start_matches('=').parse().map_err(|e| format!("{b:?}: {e}"))?;
    Ok((a, b))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_row(out: &mut dyn Write, fields: &[String]) -> io::Result<()> {
    let row: Vec<String> = fields.iter().map(|f| csv_field(f)).collect();
    writeln!(out, "{}", row.join(","))
}

fn json_line(out: &mut dyn Write, value: &impl Serialize) -> io::Result<()> {
    serde_json::to_writer(&mut *out, value).map_err(io::Error::other)?;
    writeln!(out)
}

fn params_text(params: &std::collections::BTreeMap<String, String>) -> String {
    params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

fn gen(args: &GenArgs, out: &mut dyn Write) -> Result<i32, UsageError> {
    let seq = sequence_spec(&args.kind, &args.param)?;
    let terms = seq.prefix(args.upto).map_err(|e| usage("--upto", e))?;
    if args.out.format == Format::Csv {
        writeln!(out, "n,value")?;
    }
    for (n, t) in terms.iter().enumerate() {
        match args.out.format {
            Format::Json => json_line(out, &json!({ "n": n, "value": t }))?,
            Format::Csv => csv_row(out, &[n.to_string(), t.to_string()])?,
        }
    }
    Ok(EXIT_OK)
}

fn classify_cmd(args: &ClassifyArgs, out: &mut dyn Write) -> Result<i32, UsageError> {
    let seq = sequence_spec(&args.kind, &args.param)?;
    let report = classify(&seq, args.upto).map_err(|e| usage("--upto", e))?;
    json_line(out, &report)?;
    Ok(EXIT_OK)
}

fn verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<i32, UsageError> {
    let id = IdentityId::resolve(&args.id, args.sign).map_err(|e| usage("--id", e))?;
    let ranges = args
        .range
        .iter()
        .map(|r| parse_range(r).map_err(|e| usage("--range", e)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut params = IdentityParams::new(0);
    if let Some(s) = &args.seq {
        params.seq = Some(s.parse().map_err(|e| usage("--seq", e))?);
    }
    if let Some(s) = &args.seq2 {
        params.seq2 = Some(s.parse().map_err(|e| usage("--seq2", e))?);
    }
    params.m = args.m.clone();
    params.p = args.p.clone();
    params.lambda = args.lambda.clone();
    params.r = args.r;
    params.sign = args.sign;
    match (&args.b, &args.c) {
        (Some(b), Some(c)) => params.bc = Some((b.clone(), c.clone())),
        (None, None) => {}
        _ => return Err(usage("--b/--c", "both b and c are required")),
    }
    if let Some(t) = &args.table {
        let values = t
            .split([';', ','])
            .map(|v| v.trim().parse::<Rational>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| usage("--table", e))?;
        params.table = Some(values);
    }

    let entries = scan_identity(id, &params, &ranges);
    let mut refuted = false;
    let mut errored = false;
    if args.out.format == Format::Csv {
        writeln!(out, "id,params,lhs,rhs,residual,status,error")?;
    }
    for entry in &entries {
        match &entry.outcome {
            Ok(report) => {
                refuted |= !report.pass;
                match args.out.format {
                    Format::Json => json_line(out, report)?,
                    Format::Csv => csv_row(
                        out,
                        &[
                            report.id.clone(),
                            params_text(&report.params),
                            report.lhs.to_string(),
                            report.rhs.to_string(),
                            report.residual.to_string(),
                            if report.pass { "pass" } else { "fail" }.into(),
                            String::new(),
                        ],
                    )?,
                }
            }
            Err(e) => {
                errored = true;
                match args.out.format {
                    Format::Json => json_line(
                        out,
                        &json!({ "id": id.key(), "params": entry.params, "error": e.to_string() }),
                    )?,
                    Format::Csv => csv_row(
                        out,
                        &[
                            id.key().into(),
                            params_text(&entry.params),
                            String::new(),
                            String::new(),
                            String::new(),
                            "error".into(),
                            e.to_string(),
                        ],
                    )?,
                }
            }
        }
    }
    Ok(exit_code(refuted, errored))
}

fn exit_code(refuted: bool, errored: bool) -> i32 {
    if refuted {
        EXIT_REFUTED
    } else if errored {
        EXIT_ERROR
    } else {
        EXIT_OK
    }
}

fn congruence(args: &CongruenceArgs, out: &mut dyn Write) -> Result<i32, UsageError> {
    let ids = CongruenceId::expand(&args.id).map_err(|e| usage("--id", e))?;
    let (lo, hi) = parse_span(&args.primes).map_err(|e| usage("--primes", e))?;
    let mut params = CongruenceParams::none();
    if let Some(s) = &args.seq {
        params.seq = Some(s.parse().map_err(|e| usage("--seq", e))?);
    }
    let mut b = None;
    let mut c = None;
    for item in args.param.iter().flat_map(|p| p.split(',')) {
        let (k, v) = item.split_once('=').ok_or_else(|| usage("--param", format!("expected key=value, got {item:?}")))?;
        let v: Rational = v.trim().parse().map_err(|e| usage("--param", e))?;
        match k.trim() {
            "b" => b = Some(v),
            "c" => c = Some(v),
            other => return Err(usage("--param", format!("unknown parameter {other:?}"))),
        }
    }
    match (b, c) {
        (Some(b), Some(c)) => params.bc = Some((b, c)),
        (None, None) => {}
        _ => return Err(usage("--param", "both b and c are required")),
    }

    let mut refuted = false;
    let mut errored = false;
    if args.out.format == Format::Csv {
        writeln!(out, "id,p,modulus,lhs,rhs,status,detail")?;
    }
    for id in ids {
        for entry in scan_primes(id, lo, hi, &params) {
            let (row, fields): (Value, [String; 5]) = match &entry.outcome {
                PrimeOutcome::Checked(r) => {
                    refuted |= !r.pass;
                    (
                        json!({
                            "id": r.id,
                            "p": r.p,
                            "modulus": r.modulus.to_string(),
                            "lhs": r.lhs,
                            "rhs": r.rhs,
                            "pass": r.pass,
                        }),
                        [
                            r.modulus.to_string(),
                            r.lhs.value.to_string(),
                            r.rhs.value.to_string(),
                            if r.pass { "pass" } else { "fail" }.into(),
                            String::new(),
                        ],
                    )
                }
                PrimeOutcome::Skipped(reason) => (
                    json!({ "id": id.key(), "p": entry.p, "skip": reason }),
                    [String::new(), String::new(), String::new(), "skip".into(), reason.clone()],
                ),
                PrimeOutcome::Failed(e) => {
                    errored = true;
                    (
                        json!({ "id": id.key(), "p": entry.p, "error": e.to_string() }),
                        [String::new(), String::new(), String::new(), "error".into(), e.to_string()],
                    )
                }
            };
            match args.out.format {
                Format::Json => json_line(out, &row)?,
                Format::Csv => {
                    let mut all = vec![id.key().to_string(), entry.p.to_string()];
                    all.extend(fields);
                    csv_row(out, &all)?
                }
            }
        }
    }
    Ok(exit_code(refuted, errored))
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> Result<i32, UsageError> {
    let path = match &cli.command {
        Command::Gen(a) => a.out.output.as_ref(),
        Command::Classify(a) => a.output.as_ref(),
        Command::Verify(a) => a.out.output.as_ref(),
        Command::Congruence(a) => a.out.output.as_ref(),
    };
    let mut file;
    let out: &mut dyn Write = match path {
        Some(p) => {
            file = BufWriter::new(File::create(p).map_err(|e| usage("--output", e))?);
            &mut file
        }
        None => stdout,
    };
    let code = match &cli.command {
        Command::Gen(a) => gen(a, out)?,
        Command::Classify(a) => classify_cmd(a, out)?,
        Command::Verify(a) => verify(a, out)?,
        Command::Congruence(a) => congruence(a, out)?,
    };
    out.flush()?;
    Ok(code)
}

/// Parses `args` (including the program name) and runs the command, writing
/// results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    let threads = std::env::var("PARITYSEQ_THREADS").ok().and_then(|v| v.parse::<usize>().ok());
    let mut buf = Vec::new();
    let result = match threads {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli, &mut buf)),
            Err(e) => Err(UsageError(format!("PARITYSEQ_THREADS: {e}"))),
        },
        _ => dispatch(&cli, &mut buf),
    };
    let result = result.and_then(|code| {
        out.write_all(&buf)?;
        out.flush()?;
        Ok(code)
    });
    match result {
        Ok(code) => code,
        Err(UsageError(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_ERROR
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["parityseq"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn ranges() {
        let r = parse_range("n=1..9:2").unwrap();
        assert_eq!(r.name, "n");
        assert_eq!(r.values, vec![1, 3, 5, 7, 9]);
        assert_eq!(parse_range("m=4").unwrap().values, vec![4]);
        assert!(parse_range("n=5..1").unwrap().values.is_empty());
        assert!(parse_range("q=1..2").is_err());
        assert!(parse_range("n=1..2:0").is_err());
    }

    #[test]
    fn s_table_csv() {
        let (code, out, _) = run_capture(&["gen", "--kind", "s_seq", "--upto", "11", "--format", "csv"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 13);
        assert_eq!(lines[0], "n,value");
        assert_eq!(*lines.last().unwrap(), "11,-691/4");
    }

    #[test]
    fn kind_params() {
        let (code, out, _) = run_capture(&["gen", "--kind", "lucas_u", "--param", "b=3", "c=2", "--upto", "4"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().last().unwrap(), r#"{"n":4,"value":"15"}"#);
        let (code, _, err) = run_capture(&["gen", "--kind", "nope", "--upto", "4"]);
        assert_eq!(code, 2);
        assert!(err.contains("--kind"), "{err}");
    }

    #[test]
    fn verify_exit_codes() {
        let (code, out, _) = run_capture(&["verify", "--id", "C2.2", "--range", "n=0..50"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), 51);
        let (code, _, _) = run_capture(&["verify", "--id", "T2.1", "--seq", "fibonacci", "--range", "n=1..9"]);
        assert_eq!(code, 2);
        let (code, _, _) = run_capture(&["verify", "--id", "C2.8", "--sign", "+", "--seq", "half_pow", "--range", "n=0..6"]);
        assert_eq!(code, 0);
        let (code, _, err) = run_capture(&["verify", "--id", "X9", "--range", "n=0..1"]);
        assert_eq!(code, 2);
        assert!(err.contains("--id"));
    }

    #[test]
    fn congruence_lines() {
        let (code, out, _) = run_capture(&["congruence", "--id", "C4.9", "--primes", "3..50"]);
        assert_eq!(code, 0);
        let checked = out.lines().filter(|l| l.contains("\"pass\":true")).count();
        assert_eq!(checked, 7);
        assert!(out.lines().any(|l| l.contains("\"skip\"")));
        let (code, _, _) = run_capture(&["congruence", "--id", "C4.3", "--primes", "3..30", "--param", "b=1", "c=-1"]);
        assert_eq!(code, 0);
    }
}
