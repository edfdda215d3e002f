//! Command-line front end. Every subcommand is a pure function of its flags
//! producing stdout, stderr and an exit code, so the binary is a thin shim
//! over [`execute`].
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 usage or input
//! error, 3 a resource guard was hit.

use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;

use crate::bounds::{
    build_pp_fooling_set, lower_bound_bits, ossi_bound_report, transcript_distinctness,
    verify_fooling_set, CSV_HEADER,
};
use crate::combinatorics::{enumerate_multisets, multiset_rank, multiset_unrank, Multiset};
use crate::engine::{
    check_against_oracle, check_against_oracle_over, run, InputDomain, InputShape, PartyInput,
    SWEEP_GUARD,
};
use crate::error::Error;
use crate::oracles::{
    is_permutation, max_surplus, max_surplus_bruteforce, ossi_predicate, OssiInstance,
    BRUTE_FORCE_MAX_N,
};
use crate::protocols::{
    by_name, canonical_ossi, canonical_pp, reduction_pp_via_ossi, OSSI_CANONICAL, PROTOCOL_NAMES,
};
use crate::seqcore::{Params, Sequence};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_GUARD: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "commlab",
    version,
    about = "Two-party protocols for PP and OSSI"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one protocol on a single input pair.
    Run {
        /// pp-canonical, ossi-canonical or pp-via-ossi
        protocol: String,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n: usize,
        /// Website / Alice sequence, e.g. 3,0,2 (slot rates for OSSI)
        #[arg(long)]
        x: String,
        /// Bidders / Bob sequence
        #[arg(long)]
        y: String,
        /// Surplus threshold, ossi-canonical only
        #[arg(long)]
        c: Option<u128>,
        #[arg(long)]
        show_transcript: bool,
    },
    /// Bound table over ranges of m and n, e.g. --m 1..3 --n 2.
    Bounds {
        #[arg(long, value_parser = parse_range)]
        m: RangeInclusive<u32>,
        #[arg(long, value_parser = parse_range)]
        n: RangeInclusive<u32>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Exhaustive verification sweeps at one (m, n).
    Verify {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n: usize,
    },
    /// Build and verify the diagonal fooling set for PP.
    Foolset {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n: usize,
        /// List every pair.
        #[arg(long)]
        emit: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn parse_range(s: &str) -> Result<RangeInclusive<u32>, String> {
    let parse = |t: &str| t.trim().parse::<u32>().map_err(|e| format!("{t:?}: {e}"));
    let range = match s.split_once("..") {
        Some((lo, hi)) => parse(lo)?..=parse(hi.trim_start_matches('='))?,
        None => {
            let v = parse(s)?;
            v..=v
        }
    };
    if range.is_empty() {
        return Err(format!("empty range {s:?}"));
    }
    Ok(range)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(code: i32, stdout: String, stderr: String) -> Self {
        Self {
            code,
            stdout,
            stderr,
        }
    }
}

fn code_for(err: &Error) -> i32 {
    match err {
        Error::TooLarge { .. } => EXIT_GUARD,
        _ => EXIT_USAGE,
    }
}

fn error_outcome(stdout: String, err: &Error) -> Outcome {
    Outcome::fail(code_for(err), stdout, format!("error: {err}\n"))
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn execute<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                Outcome::fail(EXIT_USAGE, String::new(), rendered)
            } else {
                Outcome::ok(rendered)
            };
        }
    };
    match cli.command {
        Command::Run {
            protocol,
            m,
            n,
            x,
            y,
            c,
            show_transcript,
        } => cmd_run(&protocol, m, n, &x, &y, c, show_transcript),
        Command::Bounds { m, n, format } => cmd_bounds(m, n, format),
        Command::Verify { m, n } => cmd_verify(m, n),
        Command::Foolset { m, n, emit } => cmd_foolset(m, n, emit),
    }
}

pub fn cmd_run(
    protocol: &str,
    m: u32,
    n: usize,
    x: &str,
    y: &str,
    c: Option<u128>,
    show_transcript: bool,
) -> Outcome {
    let result = (|| {
        if !PROTOCOL_NAMES.contains(&protocol) {
            return Err(Error::Parse {
                input: protocol.to_string(),
                reason: format!("unknown protocol, expected one of {PROTOCOL_NAMES:?}"),
            });
        }
        let p = Params::new(m, n)?;
        let xs = Sequence::parse(p, x)?;
        let ys = Sequence::parse(p, y)?;
        let website = match (protocol == OSSI_CANONICAL, c) {
            (true, Some(c)) => PartyInput::Ossi(OssiInstance::new(xs, c)?),
            (true, None) => {
                return Err(Error::InvalidParams(format!(
                    "{OSSI_CANONICAL} requires --c"
                )))
            }
            (false, Some(_)) => {
                return Err(Error::InvalidParams(format!(
                    "--c only applies to {OSSI_CANONICAL}"
                )))
            }
            (false, None) => PartyInput::Sequence(xs),
        };
        let proto = by_name(protocol, p)?;
        run(proto.as_ref(), &website, &PartyInput::Sequence(ys))
    })();
    match result {
        Ok(r) => {
            let mut out = format!("OUTPUT {}\nBITS {}\n", u8::from(r.output), r.total_bits());
            if show_transcript {
                out.push_str(&r.dump());
            }
            Outcome::ok(out)
        }
        Err(e) => error_outcome(String::new(), &e),
    }
}

pub fn cmd_bounds(m: RangeInclusive<u32>, n: RangeInclusive<u32>, format: Format) -> Outcome {
    let mut reports = Vec::new();
    for mi in m {
        for ni in n.clone() {
            match Params::new(mi, ni as usize).and_then(ossi_bound_report) {
                Ok(r) => reports.push(r),
                Err(e) => return error_outcome(String::new(), &e),
            }
        }
    }
    let out = match format {
        Format::Csv => {
            let mut out = format!("{CSV_HEADER}\n");
            for r in &reports {
                out.push_str(&r.csv_row());
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let rows: Vec<_> = reports.iter().map(|r| r.to_json()).collect();
            let mut out = serde_json::to_string_pretty(&rows).expect("json values serialize");
            out.push('\n');
            out
        }
    };
    Outcome::ok(out)
}

type CheckFn = fn(Params) -> Result<Result<String, String>, Error>;

/// Verification checks in output order.
pub const VERIFY_CHECKS: [(&str, CheckFn); 7] = [
    ("rank-unrank-bijection", check_bijection),
    ("pp-canonical-vs-oracle", check_pp_canonical),
    ("ossi-canonical-vs-oracle", check_ossi_canonical),
    ("pp-via-ossi-vs-oracle", check_reduction),
    ("fooling-set", check_fooling_set),
    ("transcript-distinctness", check_distinctness),
    ("rearrangement", check_rearrangement),
];

fn require_exhaustive(p: Params) -> Result<InputDomain, Error> {
    InputDomain::exhaustive(p, InputShape::Sequence)
}

fn verdict(ok: bool, detail: String) -> Result<String, String> {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn check_bijection(p: Params) -> Result<Result<String, String>, Error> {
    require_exhaustive(p)?;
    let all = enumerate_multisets(p)?;
    for (i, ms) in all.iter().enumerate() {
        let r = multiset_rank(&ms.to_sequence());
        if r.rank().to_u64() != Some(i as u64) {
            return Ok(Err(format!(
                "multiset {ms} at position {i} ranks {}",
                r.rank()
            )));
        }
        if &multiset_unrank(p, r.rank())? != ms {
            return Ok(Err(format!("rank {i} does not unrank to {ms}")));
        }
    }
    let s = p.sequence_count().expect("guarded");
    for idx in 0..s {
        let seq = Sequence::from_index(p, idx)?;
        let back = multiset_unrank(p, multiset_rank(&seq).rank())?;
        if back != Multiset::of(&seq) {
            return Ok(Err(format!("sequence {seq} does not round-trip")));
        }
    }
    Ok(Ok(format!("{} multisets, {s} sequences", all.len())))
}

fn pp_oracle(w: &PartyInput, b: &PartyInput) -> crate::Result<bool> {
    match (w.as_sequence(), b.as_sequence()) {
        (Some(x), Some(y)) => is_permutation(x, y),
        _ => Err(Error::InstanceMismatch(
            "PP oracle needs two sequences".into(),
        )),
    }
}

fn ossi_oracle(w: &PartyInput, b: &PartyInput) -> crate::Result<bool> {
    match (w.as_ossi(), b.as_sequence()) {
        (Some(inst), Some(bids)) => ossi_predicate(bids, inst),
        _ => Err(Error::InstanceMismatch(
            "OSSI oracle needs an instance and bids".into(),
        )),
    }
}

fn summarize(report: &crate::engine::OracleReport) -> Result<String, String> {
    verdict(
        report.is_certified(),
        format!(
            "{} pairs, {} disagreements",
            report.checked, report.disagreements
        ),
    )
}

fn check_pp_canonical(p: Params) -> Result<Result<String, String>, Error> {
    Ok(summarize(&check_against_oracle(
        &canonical_pp(p),
        &pp_oracle,
        p,
    )?))
}

/// Thresholds at each pair's optimum and one either side, plus both ends of
/// the threshold range.
fn ossi_step_domain(p: Params) -> Result<InputDomain, Error> {
    let domain = require_exhaustive(p)?;
    let limit = p.surplus_bound();
    let mut pairs = Vec::new();
    for i in 0..domain.len() {
        let (w, b) = domain.get(i)?;
        let (rates, bids) = (w.as_sequence().unwrap(), b.as_sequence().unwrap());
        let s = max_surplus(bids, rates)?;
        let mut cs = vec![0, s.saturating_sub(1), s, s + 1];
        cs.push(u128::try_from(&limit - BigUint::from(1u8)).unwrap_or(u128::MAX));
        cs.sort_unstable();
        cs.dedup();
        for c in cs {
            if BigUint::from(c) < limit {
                let inst = OssiInstance::new(rates.clone(), c)?;
                pairs.push((PartyInput::Ossi(inst), b.clone()));
            }
        }
    }
    Ok(InputDomain::Explicit(pairs))
}

fn check_ossi_canonical(p: Params) -> Result<Result<String, String>, Error> {
    let domain = ossi_step_domain(p)?;
    Ok(summarize(&check_against_oracle_over(
        &canonical_ossi(p),
        &ossi_oracle,
        &domain,
    )?))
}

fn check_reduction(p: Params) -> Result<Result<String, String>, Error> {
    let proto = reduction_pp_via_ossi(p, Arc::new(canonical_ossi(p)))?;
    Ok(summarize(&check_against_oracle(&proto, &pp_oracle, p)?))
}

fn check_fooling_set(p: Params) -> Result<Result<String, String>, Error> {
    let mut fs = build_pp_fooling_set(p)?;
    let report = verify_fooling_set(&mut fs, is_permutation)?;
    let detail = match report.counterexample {
        None => format!("k={}", report.size),
        Some(v) => format!("k={}, violation {v:?}", report.size),
    };
    Ok(verdict(report.passed, detail))
}

fn check_distinctness(p: Params) -> Result<Result<String, String>, Error> {
    let fs = build_pp_fooling_set(p)?;
    let reduction = reduction_pp_via_ossi(p, Arc::new(canonical_ossi(p)))?;
    let a = transcript_distinctness(&canonical_pp(p), &fs)?;
    let b = transcript_distinctness(&reduction, &fs)?;
    let k = fs.len();
    Ok(verdict(
        a.passed() && b.passed(),
        format!(
            "{}/{k} distinct (pp-canonical), {}/{k} distinct (pp-via-ossi)",
            a.distinct, b.distinct
        ),
    ))
}

fn check_rearrangement(p: Params) -> Result<Result<String, String>, Error> {
    if p.n() > BRUTE_FORCE_MAX_N {
        return Err(Error::too_large(
            "brute-force assignment search",
            p.n(),
            BRUTE_FORCE_MAX_N,
        ));
    }
    let domain = require_exhaustive(p)?;
    for i in 0..domain.len() {
        let (w, b) = domain.get(i)?;
        let (x, y) = (w.as_sequence().unwrap(), b.as_sequence().unwrap());
        let fast = max_surplus(x, y)?;
        let slow = max_surplus_bruteforce(x, y)?;
        if fast != slow {
            return Ok(Err(format!("{x} / {y}: sorted {fast}, brute force {slow}")));
        }
    }
    Ok(Ok(format!("{} pairs", domain.len())))
}

pub fn cmd_verify(m: u32, n: usize) -> Outcome {
    let p = match Params::new(m, n) {
        Ok(p) => p,
        Err(e) => return error_outcome(String::new(), &e),
    };
    let mut out = format!("verify {p}, sweep guard {SWEEP_GUARD} pairs\n");
    let mut failures = 0;
    for (name, check) in VERIFY_CHECKS {
        match check(p) {
            Ok(Ok(detail)) => {
                let _ = writeln!(out, "PASS {name}: {detail}");
            }
            Ok(Err(detail)) => {
                failures += 1;
                let _ = writeln!(out, "FAIL {name}: {detail}");
            }
            Err(e @ Error::TooLarge { .. }) => {
                return Outcome::fail(EXIT_GUARD, out, format!("guard exceeded in {name}: {e}\n"));
            }
            Err(e) => {
                failures += 1;
                let _ = writeln!(out, "FAIL {name}: {e}");
            }
        }
    }
    if failures == 0 {
        let _ = writeln!(out, "ALL {} CHECKS PASSED", VERIFY_CHECKS.len());
        Outcome::ok(out)
    } else {
        let _ = writeln!(out, "{failures} CHECK(S) FAILED");
        Outcome::fail(EXIT_CHECK_FAILED, out, String::new())
    }
}

pub fn cmd_foolset(m: u32, n: usize, emit: bool) -> Outcome {
    let result = (|| {
        let p = Params::new(m, n)?;
        let mut fs = build_pp_fooling_set(p)?;
        let report = verify_fooling_set(&mut fs, is_permutation)?;
        let mut out = String::new();
        let _ = writeln!(out, "k={}", fs.len());
        if report.passed {
            let lb = lower_bound_bits(&fs)?;
            let _ = writeln!(out, "log2k={:.6}", lb.bits);
            let _ = writeln!(out, "ceil_log2k={}", lb.ceil_bits);
        }
        if emit {
            for (x, y) in fs.pairs() {
                let _ = writeln!(out, "x={x} y={y}");
            }
        }
        match report.counterexample {
            None => out.push_str("PASS\n"),
            Some(v) => {
                let _ = writeln!(out, "FAIL {v:?}");
            }
        }
        Ok::<_, Error>((report.passed, out))
    })();
    match result {
        Ok((true, out)) => Outcome::ok(out),
        Ok((false, out)) => Outcome::fail(EXIT_CHECK_FAILED, out, String::new()),
        Err(e) => error_outcome(String::new(), &e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exec(args: &str) -> Outcome {
        execute(std::iter::once("commlab").chain(args.split_whitespace()))
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("1..3").unwrap(), 1..=3);
        assert_eq!(parse_range("1..=3").unwrap(), 1..=3);
        assert_eq!(parse_range("4").unwrap(), 4..=4);
        assert!(parse_range("3..1").is_err());
        assert!(parse_range("a..2").is_err());
    }

    #[test]
    fn run_examples() {
        let o = exec("run pp-canonical --m 2 --n 2 --x 1,2 --y 2,1");
        assert_eq!((o.code, o.stdout.as_str()), (0, "OUTPUT 1\nBITS 4\n"));
        let o = exec("run ossi-canonical --m 1 --n 2 --x 1,1 --y 1,0 --c 2");
        assert_eq!((o.code, o.stdout.as_str()), (0, "OUTPUT 0\nBITS 2\n"));
        let o = exec("run pp-canonical --m 2 --n 2 --x 5,0 --y 0,1");
        assert_eq!(o.code, EXIT_USAGE);
        assert!(o.stdout.is_empty());
    }

    #[test]
    fn run_usage_errors() {
        assert_eq!(
            exec("run ossi-canonical --m 1 --n 2 --x 1,1 --y 1,0").code,
            EXIT_USAGE
        );
        assert_eq!(
            exec("run ossi-canonical --m 1 --n 2 --x 1,1 --y 1,0 --c 8").code,
            EXIT_USAGE
        );
        assert_eq!(
            exec("run pp-canonical --m 1 --n 2 --x 1,1 --y 1,0 --c 1").code,
            EXIT_USAGE
        );
        assert_eq!(
            exec("run pp-fast --m 1 --n 2 --x 1,1 --y 1,0").code,
            EXIT_USAGE
        );
        assert_eq!(
            exec("run pp-canonical --m 1 --n 2 --x 1 --y 1,0").code,
            EXIT_USAGE
        );
        assert_eq!(
            exec("run pp-canonical --m 1 --n 2 --x 1,q --y 1,0").code,
            EXIT_USAGE
        );
        assert_eq!(exec("frobnicate").code, EXIT_USAGE);
    }

    #[test]
    fn run_with_transcript() {
        let o = exec("run pp-via-ossi --m 2 --n 2 --x 1,2 --y 2,2 --show-transcript");
        assert_eq!(
            o.stdout,
            "OUTPUT 0\nBITS 9\nBidders 5 01000\nBidders 4 0101\nTOTAL 9 OUTPUT 0 BY Website\n"
        );
    }

    #[test]
    fn bounds_table() {
        let o = exec("bounds --m 1..3 --n 1..3 --format csv");
        assert_eq!(o.code, 0);
        let lines: Vec<&str> = o.stdout.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 10);
        assert!(lines.contains(&"2,2,10,3.321928,0.000000,4,5,4.000000"));

        let o = exec("bounds --m 8 --n 4");
        assert!(o
            .stdout
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("8,4,183181376,27.448698,"));

        let o = exec("bounds --m 2 --n 2 --format json");
        let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
        assert_eq!(v[0]["multiset_count"], "10");
        assert_eq!(v[0]["upper_bits"], 4);

        assert_eq!(exec("bounds --m 3..1 --n 1").code, EXIT_USAGE);
    }

    #[test]
    fn verify_small() {
        let o = exec("verify --m 2 --n 2");
        assert_eq!(o.code, 0, "{}{}", o.stdout, o.stderr);
        assert_eq!(
            o.stdout.lines().filter(|l| l.starts_with("PASS ")).count(),
            7
        );
        let o = exec("verify --m 1 --n 3");
        assert_eq!(o.code, 0);
    }

    #[test]
    fn verify_guard() {
        let o = exec("verify --m 8 --n 8");
        assert_eq!(o.code, EXIT_GUARD);
        assert!(o.stderr.contains("rank-unrank-bijection"));
    }

    #[test]
    fn foolset_examples() {
        let o = exec("foolset --m 1 --n 2");
        assert_eq!(o.stdout, "k=3\nlog2k=1.584963\nceil_log2k=2\nPASS\n");
        let o = exec("foolset --m 2 --n 2 --emit");
        assert_eq!(o.stdout.lines().filter(|l| l.starts_with("x=")).count(), 10);
        let o = exec("foolset --m 1 --n 1");
        assert!(o.stdout.starts_with("k=2\n"));
        assert!(o.stdout.ends_with("PASS\n"));
        assert_eq!(exec("foolset --m 12 --n 4").code, EXIT_GUARD);
    }
}
