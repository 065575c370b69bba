//! Command-line front end.
//!
//! Exit codes: 0 success, 1 selftest failure, 2 invalid input, 3 unmet
//! precondition, 4 theorem violation, 5 enumeration incomplete (caps hit),
//! 6 enumeration found violations.

use std::ffi::OsString;
use std::io::Write;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bounds::{check_multiplicity_theorem, BoundsError};
use crate::enumerate::{run_parallel, Caps, Check, EnumerationTask};
use crate::group::{parse_group_spec, GroupSpec};
use crate::structure::{decompose, is_connected, is_sharp, StructureError};
use crate::sums::{sigma, GroupSequence, SumAccumulator};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SELFTEST: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_THEOREM: i32 = 4;
pub const EXIT_INCOMPLETE: i32 = 5;
pub const EXIT_VIOLATIONS: i32 = 6;

#[derive(Debug, Parser)]
#[command(name = "subsums", version, about = "Subsequence sums of zero-sum-free sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
struct SeqArgs {
    /// Group, e.g. `Z12`, `Z`, `Z2xZ4`
    #[arg(long)]
    group: String,
    /// Terms, e.g. `5,5,10` or `(1,0),(0,1)`
    #[arg(long, allow_hyphen_values = true)]
    seq: String,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sum-set size, zero-sum-freeness, sharpness and connectivity
    Analyze(SeqArgs),
    /// Arithmetic-progression certificate for |Σ| < 2n
    Decompose(SeqArgs),
    /// Multiplicity lower bound check
    Bounds(SeqArgs),
    /// Exhaustive checks over all zero-sum-free multisets of one length
    Enumerate {
        #[arg(long)]
        group: String,
        #[arg(long)]
        len: usize,
        /// Comma list of checks, or `all`
        #[arg(long, default_value = "all")]
        checks: String,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        max_seqs: Option<u64>,
        /// Seconds
        #[arg(long)]
        time_budget: Option<f64>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Smoke-test the library on small known cases
    Selftest,
}

/// Parses `args` (including the program name) and runs the command,
/// printing to stdout/stderr. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// Like [`run`], writing to the given sinks.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = if e.use_stderr() { e.render().to_string() } else { e.to_string() };
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => analyze(&a, out),
        Command::Decompose(a) => decompose_cmd(&a, out),
        Command::Bounds(a) => bounds_cmd(&a, out),
        Command::Enumerate {
            group,
            len,
            checks,
            jobs,
            max_seqs,
            time_budget,
            format,
        } => enumerate_cmd(&group, len, &checks, jobs, max_seqs, time_budget, format, out, err),
        Command::Selftest => Ok(selftest(out)),
    };
    match result {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

struct Failure(i32, String);

fn input_error(e: impl std::fmt::Display) -> Failure {
    Failure(EXIT_INPUT, e.to_string())
}

fn parse_inputs(a: &SeqArgs) -> Result<GroupSequence, Failure> {
    let spec = parse_group_spec(&a.group).map_err(input_error)?;
    GroupSequence::parse(&spec, &a.seq).map_err(input_error)
}

fn emit(out: &mut dyn Write, format: Format, value: &serde_json::Value) {
    match format {
        Format::Json => {
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(value).expect("json"));
        }
        Format::Text => {
            if let Some(obj) = value.as_object() {
                for (k, v) in obj {
                    let shown = match v {
                        serde_json::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    let _ = writeln!(out, "{k}: {shown}");
                }
            }
        }
    }
}

fn analyze(a: &SeqArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let seq = parse_inputs(a)?;
    let spec = seq.spec();
    let acc = SumAccumulator::from_sequence(&seq).map_err(input_error)?;
    let n = seq.len();
    let sharp = if n == 0 {
        serde_json::Value::Null
    } else {
        is_sharp(&seq).map_err(input_error)?.into()
    };
    let connected = is_connected(&seq).map_err(input_error)?;
    let total = sigma(&seq).map_err(input_error)?;
    let value = json!({
        "group": spec.to_string(),
        "seq": seq.to_string(),
        "n": n,
        "sumset_size": acc.size(),
        "zero_sum_free": acc.zero_sum_free(),
        "sharp": sharp,
        "connected": connected,
        "sigma": spec.format_element(&total),
        "few_sums": acc.size() < 2 * n,
    });
    emit(out, a.format, &value);
    Ok(EXIT_OK)
}

fn structure_failure(e: StructureError) -> Failure {
    match e {
        StructureError::TheoremViolation(c) => Failure(EXIT_THEOREM, format!("theorem violation: {c}")),
        StructureError::PreconditionViolated(m) => Failure(EXIT_PRECONDITION, m),
        StructureError::Sums(e) => Failure(EXIT_INPUT, e.to_string()),
        other => Failure(EXIT_PRECONDITION, other.to_string()),
    }
}

fn decompose_cmd(a: &SeqArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let seq = parse_inputs(a)?;
    let cert = decompose(&seq).map_err(structure_failure)?;
    let record = cert.to_record(seq.spec());
    match a.format {
        Format::Json => emit(out, Format::Json, &serde_json::to_value(&record).expect("json")),
        Format::Text => {
            let spec = seq.spec();
            let join = |v: &[i64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
            let perm: Vec<i64> = record.perm.iter().map(|&p| p as i64).collect();
            let _ = writeln!(out, "group: {}", record.group);
            let _ = writeln!(out, "a: {}", spec.format_element(&cert.a));
            let _ = writeln!(out, "perm: {}", join(&perm));
            let _ = writeln!(out, "xs: {}", join(&record.xs));
            let _ = writeln!(out, "total: {}", record.total);
            let _ = writeln!(
                out,
                "sumset: [0,{}]*{} (verified)",
                record.total,
                spec.format_element(&cert.a)
            );
        }
    }
    Ok(EXIT_OK)
}

fn bounds_cmd(a: &SeqArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let seq = parse_inputs(a)?;
    let report = check_multiplicity_theorem(&seq).map_err(|e| match e {
        BoundsError::Structure(s) => structure_failure(s),
        other => Failure(EXIT_PRECONDITION, other.to_string()),
    })?;
    let mut value = serde_json::to_value(&report).expect("json");
    value["group"] = json!(seq.spec().to_string());
    value["seq"] = json!(seq.to_string());
    emit(out, a.format, &value);
    Ok(if report.passed { EXIT_OK } else { EXIT_THEOREM })
}

#[allow(clippy::too_many_arguments)]
fn enumerate_cmd(
    group: &str,
    len: usize,
    checks: &str,
    jobs: usize,
    max_seqs: Option<u64>,
    time_budget: Option<f64>,
    format: Format,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Failure> {
    let spec: GroupSpec = parse_group_spec(group).map_err(input_error)?;
    let checks = Check::parse_list(checks).map_err(input_error)?;
    let time_budget = match time_budget {
        Some(t) if !(t.is_finite() && t >= 0.0) => return Err(input_error("--time-budget must be a nonnegative number")),
        t => t.map(Duration::from_secs_f64),
    };
    let task = EnumerationTask::new(spec, len)
        .map_err(input_error)?
        .with_checks(checks)
        .with_caps(Caps { max_seqs, time_budget });
    let report = run_parallel(&task, jobs.max(1)).map_err(input_error)?;
    match format {
        Format::Json => {
            let _ = writeln!(out, "{}", report.to_json());
        }
        Format::Text => {
            let _ = writeln!(out, "group: {}", report.group);
            let _ = writeln!(out, "len: {}", report.len);
            let _ = writeln!(out, "checks: {}", report.checks.join(","));
            let _ = writeln!(out, "complete: {}", report.complete);
            let _ = writeln!(out, "total_zsf: {}", report.total_zsf);
            let _ = writeln!(out, "few_sums: {}", report.few_sums);
            let hist: Vec<String> = report.histogram.iter().map(|(k, v)| format!("{k}:{v}")).collect();
            let _ = writeln!(out, "histogram: {}", hist.join(" "));
            let _ = writeln!(out, "violations: {}", report.violations.len());
            for v in &report.violations {
                let _ = writeln!(out, "  [{}] {}: {} -- {}", v.check, v.stage, v.detail, v.repro);
            }
        }
    }
    let _ = writeln!(err, "elapsed: {:.3}s", report.elapsed.as_secs_f64());
    Ok(if !report.violations.is_empty() {
        EXIT_VIOLATIONS
    } else if !report.complete {
        EXIT_INCOMPLETE
    } else {
        EXIT_OK
    })
}

type SelftestCase = (&'static str, Box<dyn Fn() -> bool>);

/// Small known cases; each entry is a name and a closure returning success.
fn selftest_cases() -> Vec<SelftestCase> {
    fn seq(group: &str, text: &str) -> GroupSequence {
        GroupSequence::parse(&parse_group_spec(group).expect("spec"), text).expect("seq")
    }
    fn sums(group: &str, text: &str) -> usize {
        SumAccumulator::from_sequence(&seq(group, text)).expect("sums").size()
    }
    fn zsf(group: &str, text: &str) -> bool {
        SumAccumulator::from_sequence(&seq(group, text)).expect("sums").zero_sum_free()
    }
    vec![
        ("parse Z12", Box::new(|| parse_group_spec("Z12").is_ok_and(|s| s.torsion_orders() == [12]))),
        ("parse Z", Box::new(|| parse_group_spec("Z").is_ok_and(|s| s.free_rank() == 1))),
        ("parse Z2xZ4", Box::new(|| parse_group_spec("Z2xZ4").is_ok_and(|s| s.torsion_orders() == [2, 4]))),
        ("reject Z1", Box::new(|| parse_group_spec("Z1").is_err())),
        ("Z5: 2 + 4 = 1", Box::new(|| sigma(&seq("Z5", "2,4")).is_ok_and(|g| g.coords() == [1]))),
        ("Z: |Σ(1,2)| = 4", Box::new(|| sums("Z", "1,2") == 4)),
        ("empty sequence: Σ = {0}", Box::new(|| sums("Z7", "") == 1)),
        ("Z5: (2,3) not zero-sum-free", Box::new(|| !zsf("Z5", "2,3"))),
        ("(0) not zero-sum-free", Box::new(|| !zsf("Z5", "0"))),
        ("Z5: (1,1) sharp", Box::new(|| is_sharp(&seq("Z5", "1,1")).unwrap_or(false))),
        ("Z: (1,2) not sharp", Box::new(|| is_sharp(&seq("Z", "1,2")).is_ok_and(|s| !s))),
        ("Z: (1,1) connected", Box::new(|| is_connected(&seq("Z", "1,1")).unwrap_or(false))),
        ("Z: (1,3) not connected", Box::new(|| is_connected(&seq("Z", "1,3")).is_ok_and(|c| !c))),
        ("Z: decompose (1)", Box::new(|| {
            decompose(&seq("Z", "1")).is_ok_and(|c| c.xs == [1] && c.total == 1)
        })),
        ("Z2xZ2: decompose rejects |Σ| = 2n", Box::new(|| {
            matches!(decompose(&seq("Z2xZ2", "(1,0),(0,1)")), Err(StructureError::PreconditionViolated(_)))
        })),
        ("Z7: multiplicity of (1,1,1,1)", Box::new(|| {
            check_multiplicity_theorem(&seq("Z7", "1,1,1,1")).is_ok_and(|r| r.mu == 4 && r.passed)
        })),
        ("Z2: no zero-sum-free pairs", Box::new(|| {
            EnumerationTask::new(GroupSpec::cyclic(2).expect("Z2"), 2)
                .and_then(|t| run_parallel(&t, 1))
                .is_ok_and(|r| r.total_zsf == 0)
        })),
    ]
}

fn selftest(out: &mut dyn Write) -> i32 {
    let mut failed = 0;
    for (name, case) in selftest_cases() {
        let ok = case();
        failed += !ok as usize;
        let _ = writeln!(out, "{} {name}", if ok { "ok  " } else { "FAIL" });
    }
    let _ = writeln!(out, "{failed} failed");
    if failed == 0 {
        EXIT_OK
    } else {
        EXIT_SELFTEST
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["subsums"];
        full.extend_from_slice(args);
        let code = run_with(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn analyze_text() {
        let (code, out, _) = run_capture(&["analyze", "--group", "Z12", "--seq", "5,5,10"]);
        assert_eq!(code, 0);
        assert!(out.contains("zero_sum_free: true"));
        assert!(out.contains("sumset_size: 5"));
        assert!(out.contains("connected: true"));
        assert!(out.contains("sharp: false"));
    }

    #[test]
    fn bad_input_exits_2() {
        assert_eq!(run_capture(&["analyze", "--group", "Z1", "--seq", "1"]).0, 2);
        assert_eq!(run_capture(&["analyze", "--group", "Z2xZ2", "--seq", "1,0"]).0, 2);
        assert_eq!(run_capture(&["analyze", "--group", "Z5"]).0, 2);
        assert_eq!(run_capture(&["enumerate", "--group", "Z", "--len", "2"]).0, 2);
    }

    #[test]
    fn negative_terms_parse() {
        let (code, out, _) = run_capture(&["analyze", "--group", "Z", "--seq", "-2,-2,-4", "--format", "json"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["zero_sum_free"], json!(true));
        assert_eq!(v["sumset_size"], json!(5));
    }

    #[test]
    fn selftest_passes() {
        let (code, out, _) = run_capture(&["selftest"]);
        assert_eq!(code, 0, "{out}");
        assert!(out.ends_with("0 failed\n"));
    }
}
