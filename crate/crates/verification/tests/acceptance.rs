//! Acceptance criteria 1–10, one PASS/FAIL line each.

use std::env::consts::EXE_SUFFIX;
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use friedrichs::verify::{run_with, Check, Status, VerifyConfig};

const TITLES: [&str; 10] = [
    "band endpoints",
    "quadrature sanity",
    "threshold finiteness and symmetry",
    "virtual-level constants",
    "regimes at both thresholds",
    "no eigenvalues at the common coupling",
    "threshold expansion",
    "resonance function",
    "quadratic model",
    "determinism",
];

/// Runtime limits per criterion, where one is stated.
fn limit(c: u8) -> Option<Duration> {
    let s = match c {
        1 => 1,
        2 => 5,
        3 => 60,
        5 => 300,
        6 => 600,
        7 => 120,
        8 => 60,
        _ => return None,
    };
    Some(Duration::from_secs(s))
}

fn line(c: u8, ok: bool, elapsed: Duration, note: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("criterion {c:>2} {verdict}  {:<40} {:>8.2?}  {note}", TITLES[c as usize - 1], elapsed);
}

fn summarize(c: u8, checks: &[Check], elapsed: Duration) -> bool {
    let bad: Vec<String> = checks
        .iter()
        .filter(|x| x.status != Status::Pass)
        .map(|x| match (&x.measured, &x.detail) {
            (_, Some(d)) => format!("{} ({d})", x.check_name),
            (Some(m), None) => format!("{} (measured {m:e})", x.check_name),
            _ => x.check_name.clone(),
        })
        .collect();
    let slow = limit(c).is_some_and(|l| elapsed > l);
    let mut note = format!("{}/{} checks", checks.len() - bad.len(), checks.len());
    if slow {
        note.push_str(&format!(", over the {:?} budget", limit(c).unwrap()));
    }
    if !bad.is_empty() {
        note.push_str(&format!(", failing: {}", bad.join("; ")));
    }
    let ok = bad.is_empty() && !slow && !checks.is_empty();
    line(c, ok, elapsed, &note);
    ok
}

/// The `friedrichs` binary next to this test's profile directory, built on
/// demand when the workspace was not built as a whole.
fn cli_binary() -> Result<PathBuf, String> {
    if let Some(p) = std::env::var_os("FRIEDRICHS_BIN") {
        return Ok(p.into());
    }
    let exe = std::env::current_exe().map_err(|e| e.to_string())?;
    let profile_dir = exe.parent().and_then(|d| d.parent()).ok_or("unexpected test binary location")?;
    let bin = profile_dir.join(format!("friedrichs{EXE_SUFFIX}"));
    if !bin.exists() {
        let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
        let mut cmd = Command::new(cargo);
        cmd.args(["build", "--quiet", "-p", "friedrichs-cli", "--bin", "friedrichs"]);
        if profile_dir.file_name().is_some_and(|n| n == "release") {
            cmd.arg("--release");
        }
        let status = cmd.status().map_err(|e| e.to_string())?;
        if !status.success() || !bin.exists() {
            return Err(format!("could not build {}", bin.display()));
        }
    }
    Ok(bin)
}

fn determinism() -> bool {
    let started = Instant::now();
    let binary = match cli_binary() {
        Ok(b) => b,
        Err(e) => {
            line(10, false, started.elapsed(), &e);
            return false;
        }
    };
    let dir = tempfile::tempdir().expect("temp dir");
    let run = |name: &str| -> Option<Vec<u8>> {
        let path = dir.path().join(name);
        let status = Command::new(&binary)
            .args(["verify-all", "--out", path.to_str()?])
            .stderr(std::process::Stdio::null())
            .status()
            .ok()?;
        // Exit 1 only says some check failed; the report is still written.
        matches!(status.code(), Some(0 | 1)).then(|| std::fs::read(path).ok()).flatten()
    };
    let (a, b) = (run("first.json"), run("second.json"));
    let ok = matches!((&a, &b), (Some(x), Some(y)) if x == y && !x.is_empty());
    let note = match (&a, &b) {
        (Some(x), Some(y)) if x == y => format!("{} identical bytes", x.len()),
        (Some(_), Some(_)) => "reports differ".into(),
        _ => "verify-all did not produce a report".into(),
    };
    line(10, ok, started.elapsed(), &note);
    ok
}

fn main() -> ExitCode {
    // `cargo test -- --list` and filters from other targets land here too.
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let cfg = VerifyConfig::default();
    let mut all = true;
    let mut last = Instant::now();
    let result = run_with(&cfg, |c, checks| {
        all &= summarize(c, checks, last.elapsed());
        last = Instant::now();
    });
    if let Err(e) = result {
        println!("verification could not run: {e}");
        return ExitCode::FAILURE;
    }
    all &= determinism();
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
