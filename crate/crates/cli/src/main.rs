use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use friedrichs::asymptotics::{expansion_fit, resonance_norms};
use friedrichs::determinant::{Fiber, Side};
use friedrichs::lattice::{band_edges, wrap, SpectralParams, TorusPoint};
use friedrichs::scan::{scan, write_csv, Range, ScanOptions};
use friedrichs::spectral::{
    classify_regime, find_eigenvalue_with, sweep_no_eigenvalues, threshold_integral, BandEnd, CriticalCouplings,
    RootOptions,
};
use friedrichs::verify::{self, VerifyConfig};

mod parse;

use parse::{parse_k, parse_list, parse_range, Coupling};

/// Spectral laboratory for a lattice two-channel operator family on T³.
#[derive(Parser, Debug)]
#[command(name = "friedrichs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Band edges m(k), M(k)
    Band {
        #[arg(long, env = "FSPEC_K", allow_hyphen_values = true)]
        k: String,
    },
    /// The integral I(k; z)
    Integral {
        #[arg(long, env = "FSPEC_K", allow_hyphen_values = true)]
        k: String,
        #[arg(long, env = "FSPEC_Z", allow_hyphen_values = true)]
        z: f64,
        #[arg(long, env = "FSPEC_TOL", default_value_t = 1e-7)]
        tol: f64,
    },
    /// The determinant Δ_μ(k; z)
    Det {
        #[arg(long, env = "FSPEC_K", allow_hyphen_values = true)]
        k: String,
        #[arg(long, env = "FSPEC_Z", allow_hyphen_values = true)]
        z: f64,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, env = "FSPEC_TOL", default_value_t = 1e-7)]
        tol: f64,
    },
    /// Eigenvalue below or above the band at k
    Eigen {
        #[arg(long, env = "FSPEC_K", allow_hyphen_values = true)]
        k: String,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value_t = SideArg::Below)]
        side: SideArg,
        #[arg(long, env = "FSPEC_TOL", default_value_t = 1e-7)]
        tol: f64,
    },
    /// Regime at both thresholds
    Classify {
        #[command(flatten)]
        params: ParamArgs,
        /// Relative width of the virtual-level band
        #[arg(long, env = "FSPEC_TOL", default_value_t = 1e-6)]
        tol: f64,
    },
    /// Sign of Δ on a k-grid outside [0, 18]
    Sweep {
        #[arg(long, env = "FSPEC_GRID", default_value_t = 5)]
        grid: usize,
        /// Comma separated energies
        #[arg(long, env = "FSPEC_Z", default_value = "-1,-0.01,18.01,19", allow_hyphen_values = true)]
        z: String,
        #[arg(long, env = "FSPEC_GAMMA", default_value_t = 6.0, allow_hyphen_values = true)]
        gamma: f64,
        #[arg(long, env = "FSPEC_MU", default_value = "mu0")]
        mu: Coupling,
        #[arg(long, env = "FSPEC_TOL", default_value_t = 1e-7)]
        tol: f64,
    },
    /// Square-root expansion fit at a threshold
    Expansion {
        #[arg(long, value_enum, default_value_t = EndArg::Lower)]
        end: EndArg,
        #[arg(long, env = "FSPEC_TOL", default_value_t = 1e-9)]
        tol: f64,
    },
    /// L1 and truncated L2 norms of the threshold resonance
    Resonance {
        #[arg(long, value_enum, default_value_t = EndArg::Lower)]
        end: EndArg,
        #[arg(long, env = "FSPEC_TOL", default_value_t = 1e-9)]
        tol: f64,
    },
    /// Phase diagram over (γ, μ) as CSV
    Scan {
        /// `v` or `start:end`
        #[arg(long, env = "FSPEC_GAMMA", allow_hyphen_values = true)]
        gamma: String,
        /// `v` or `start:end`; values may be written as multiples of mu0
        #[arg(long, env = "FSPEC_MU")]
        mu: String,
        /// Points per axis
        #[arg(long, env = "FSPEC_GRID", default_value_t = 1)]
        grid: usize,
        #[arg(long, env = "FSPEC_TOL", default_value_t = 1e-7)]
        tol: f64,
        #[arg(long, env = "FSPEC_OUT")]
        out: Option<PathBuf>,
    },
    /// Run every check and emit a JSON report
    VerifyAll {
        #[arg(long, env = "FSPEC_CONFIG")]
        config: Option<PathBuf>,
        #[arg(long, env = "FSPEC_SEED")]
        seed: Option<u64>,
        #[arg(long, env = "FSPEC_TOL")]
        tol: Option<f64>,
        #[arg(long, env = "FSPEC_GRID")]
        grid: Option<usize>,
        #[arg(long, env = "FSPEC_OUT")]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct ParamArgs {
    #[arg(long, env = "FSPEC_GAMMA", allow_hyphen_values = true)]
    gamma: f64,
    #[arg(long, env = "FSPEC_MU")]
    mu: Coupling,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SideArg {
    Below,
    Above,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EndArg {
    Lower,
    Upper,
}

impl From<EndArg> for BandEnd {
    fn from(e: EndArg) -> Self {
        match e {
            EndArg::Lower => BandEnd::Lower,
            EndArg::Upper => BandEnd::Upper,
        }
    }
}

#[derive(Debug)]
enum Failure {
    /// Bad input, I/O, or a computation that could not be carried out.
    Usage(String),
    /// A check ran and did not hold.
    Verification(String),
}

impl From<friedrichs::Error> for Failure {
    fn from(e: friedrichs::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(format!("i/o error: {e}"))
    }
}

type Outcome = Result<(), Failure>;

/// Prints a float with at most 12 significant decimals, dropping trailing
/// zeros, so exact edges read as `9.375` and `18`.
fn short(x: f64) -> String {
    let s = format!("{:.12}", x);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn mu0(tol: f64) -> Result<f64, Failure> {
    let j0 = threshold_integral(tol)?;
    Ok(CriticalCouplings::from_threshold_integral(6.0, j0)?.mu_zero)
}

fn params(p: &ParamArgs, tol: f64) -> Result<SpectralParams, Failure> {
    let mu = p.mu.resolve(|| mu0(tol))?;
    Ok(SpectralParams::new(p.gamma, mu)?)
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Band { k } => {
            let e = band_edges(&parse_k(&k)?);
            println!("m={} M={}", short(e.bottom), short(e.top));
        }
        Command::Integral { k, z, tol } => {
            let r = Fiber::new(&parse_k(&k)?).integral(z, tol)?;
            println!("value={:e} error_estimate={:e} evaluations={}", r.value, r.error_estimate, r.evaluations);
        }
        Command::Det { k, z, params: p, tol } => {
            let sp = params(&p, tol)?;
            let (d, err) = Fiber::new(&parse_k(&k)?).determinant(z, &sp, tol)?;
            println!("value={d:e} error_estimate={err:e}");
        }
        Command::Eigen { k, params: p, side, tol } => {
            let sp = params(&p, tol)?;
            let side = match side {
                SideArg::Below => Side::Below,
                SideArg::Above => Side::Above,
            };
            let opts = RootOptions { quad_tol: tol, ..RootOptions::default() };
            let r = find_eigenvalue_with(&parse_k(&k)?, &sp, side, &opts)?;
            println!("{}", json(&r));
        }
        Command::Classify { params: p, tol } => {
            let sp = params(&p, 1e-9)?;
            let c = classify_regime(&sp, tol)?;
            println!("lower={} upper={}", c.lower.label(), c.upper.label());
        }
        Command::Sweep { grid, z, gamma, mu, tol } => {
            let mu = mu.resolve(|| mu0(tol))?;
            let sp = SpectralParams::new(gamma, mu)?;
            let r = sweep_no_eigenvalues(grid, &parse_list(&z)?, &sp, tol)?;
            println!("{}", json(&r));
            if !r.violations.is_empty() {
                return Err(Failure::Verification(format!("{} sign violations", r.violations.len())));
            }
        }
        Command::Expansion { end, tol } => {
            let end = BandEnd::from(end);
            let dir = 1.0 / 3f64.sqrt();
            let radii = [1e-3, 3e-3, 1e-2, 3e-2, 1e-1];
            let mut ks: Vec<TorusPoint> = radii.iter().map(|r| wrap([r * dir; 3])).collect::<Result<_, _>>()?;
            let mut zs = vec![-1e-3, -1e-4, -1e-5, -1e-6];
            if end == BandEnd::Upper {
                ks = ks.iter().map(TorusPoint::shift_by_pi).collect();
                zs = zs.iter().map(|z| 18.0 - z).collect();
            }
            println!("{}", json(&expansion_fit(end, &zs, &ks, tol)?));
        }
        Command::Resonance { end, tol } => {
            let deltas: Vec<f64> = (3..=9).map(|j| 2f64.powi(-j)).collect();
            println!("{}", json(&resonance_norms(end.into(), &deltas, tol)?));
        }
        Command::Scan { gamma, mu, grid, tol, out } => {
            let (g0, g1) = parse_range(&gamma, |s| s.trim().parse::<f64>().ok())?;
            let (m0, m1) = parse_range(&mu, Coupling::parse)?;
            let steps = |a: &str| if a.contains(':') { grid } else { 1 };
            let base = m0.needs_mu0() || m1.needs_mu0();
            let mu_zero = if base { Some(mu0(tol)?) } else { None };
            let fix = |c: Coupling| c.resolve(|| Ok::<f64, Failure>(mu_zero.expect("resolved above")));
            let gr = Range::new(g0, g1, steps(&gamma))?;
            let mr = Range::new(fix(m0)?, fix(m1)?, steps(&mu))?;
            let opts = ScanOptions { root: RootOptions { quad_tol: tol, ..RootOptions::default() }, ..Default::default() };
            let records = scan(&gr, &mr, &opts)?;
            let w = open_out(out.as_deref())?;
            write_csv(&records, w)?;
        }
        Command::VerifyAll { config, seed, tol, grid, out } => {
            let mut cfg = match &config {
                Some(p) => {
                    let text = std::fs::read_to_string(p)
                        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", p.display())))?;
                    VerifyConfig::from_json(&text)?
                }
                None => VerifyConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = tol {
                cfg.quad_tol = t;
            }
            if let Some(g) = grid {
                cfg.sweep_grid = g;
            }
            let started = Instant::now();
            let mut last = started;
            let report = verify::run_with(&cfg, |c, checks| {
                let bad = checks.iter().filter(|x| x.status != verify::Status::Pass).count();
                eprintln!("criterion {c}: {} checks, {bad} not passing, {:.2?}", checks.len(), last.elapsed());
                last = Instant::now();
            })?;
            let mut w = open_out(out.as_deref())?;
            writeln!(w, "{}", report.to_json())?;
            w.flush()?;
            eprintln!("{} passed, {} failed in {:.2?}", report.passed, report.failed, started.elapsed());
            if !report.all_passed() {
                let names: Vec<&str> = report.failures().map(|c| c.check_name.as_str()).collect();
                return Err(Failure::Verification(format!("failing checks: {}", names.join(", "))));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
