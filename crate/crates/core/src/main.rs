use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use dpfourier::analytic::{InnerAnalytic, Polynomial, DEFAULT_NODES};
use dpfourier::catalog::{self, CatalogEntry};
use dpfourier::coeffs::{read_table_csv, write_table_csv, CoefficientSource, FcPair};
use dpfourier::convergence::{self, ClassifyOptions, LacunaryPolicy};
use dpfourier::kernels::{self, DeltaKernel};
use dpfourier::recovery::{self, Ladder, RecoveryOptions};
use dpfourier::series::{eval_sz, KPolicy, PolarPoint, TruncatedSeries, Truncation};
use dpfourier::Error;

#[derive(Parser)]
#[command(
    name = "dpfourier",
    version,
    about = "Definite-parity Fourier series through inner analytic functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print coefficients a_1..a_K as `k,a_k` CSV.
    Coeffs {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        k_max: usize,
    },
    /// Evaluate the truncated power series on a circle; CSV `theta,re,im`.
    Eval {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        rho: f64,
        /// Number of equispaced angles starting at -pi.
        #[arg(long)]
        theta_grid: usize,
        #[arg(long)]
        k_trunc: usize,
    },
    /// Radial limits over an open grid; CSV `theta,estimate_re,estimate_im,status`.
    Recover {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        grid: usize,
        /// Radii 1 - 2^-j for j in `j0..j1` (inclusive).
        #[arg(long, default_value = "4..20")]
        ladder: String,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Run all convergence classifiers; JSON report.
    Classify {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.75,0.9,0.95,0.99")]
        rho_in: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1.01,1.05,1.1,1.5,2.0")]
        rho_out: Vec<f64>,
        /// Largest truncation order for the sampling tests.
        #[arg(long, default_value_t = convergence::DEFAULT_K)]
        k: usize,
        /// Number of coefficient ratios in the ratio-test window.
        #[arg(long, default_value_t = 64)]
        window: usize,
        /// Refuse the ratio test on sequences with zero coefficients.
        #[arg(long)]
        reject_lacunary: bool,
    },
    /// Classify the boundary point at angle theta; JSON report.
    Probe {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
        #[arg(long, default_value = "4..20")]
        ladder: String,
    },
    /// Numerical checks with a pass/fail report.
    Verify {
        #[command(subcommand)]
        check: Check,
    },
}

#[derive(Subcommand)]
enum Check {
    /// Orthogonality of the circle modes.
    Orthogonality {
        #[arg(long)]
        k_max: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1.0")]
        rho: Vec<f64>,
        /// Quadrature nodes; defaults to max(4096, 8 k_max).
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Properties of the delta kernel centred on theta1.
    Delta {
        #[arg(long, allow_negative_numbers = true)]
        theta1: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.9,0.99")]
        rho: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_NODES)]
        nodes: usize,
    },
    /// Integration formulas of a catalog entry for k = 1..k_max.
    Identities {
        #[arg(long)]
        entry: String,
        #[arg(long, default_value_t = 8)]
        k_max: usize,
        #[arg(long, default_value_t = DEFAULT_NODES)]
        nodes: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

#[derive(Args)]
struct SourceArgs {
    /// Catalog entry: sawtooth-1, square, sawtooth-2, triangular, riemann, delta.
    #[arg(required_unless_present = "table", conflicts_with = "table")]
    name: Option<String>,
    /// Coefficient table with header `k,a_k`.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Centre of the delta entry.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    theta1: f64,
}

enum Source {
    Entry(CatalogEntry),
    Table(Arc<CoefficientSource>),
}

impl Source {
    fn load(args: &SourceArgs) -> Result<Self, Failure> {
        match (&args.name, &args.table) {
            (_, Some(path)) => {
                let file = File::open(path)
                    .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                Ok(Source::Table(Arc::new(read_table_csv(file)?)))
            }
            (Some(name), None) if name == "delta" => {
                Ok(Source::Entry(catalog::delta_entry(args.theta1)))
            }
            (Some(name), None) => Ok(Source::Entry(catalog::entry(name)?)),
            (None, None) => Err(Failure::Usage(
                "a catalog name or --table is required".into(),
            )),
        }
    }

    fn coeffs(&self) -> &Arc<CoefficientSource> {
        match self {
            Source::Entry(e) => &e.coeffs,
            Source::Table(t) => t,
        }
    }

    fn pair(&self) -> FcPair {
        FcPair::new(Arc::clone(self.coeffs()))
    }

    /// The coefficient series with the default truncation policy.
    fn series(&self) -> TruncatedSeries {
        match self {
            Source::Entry(e) => e.series(KPolicy::default()),
            Source::Table(_) => {
                TruncatedSeries::new(self.pair(), Truncation::Policy(KPolicy::default()))
            }
        }
    }

    /// Closed form where one exists, the series otherwise.
    fn inner(&self) -> Box<dyn InnerAnalytic> {
        match self {
            Source::Entry(e) => e.inner(),
            Source::Table(_) => Box::new(self.series()),
        }
    }
}

enum Failure {
    Usage(String),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn f(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_ladder(spec: &str) -> Result<Ladder, Failure> {
    let bad = || Failure::Usage(format!("ladder `{spec}` is not of the form j0..j1"));
    let (a, b) = spec.split_once("..").ok_or_else(bad)?;
    let j0 = a.trim().parse().map_err(|_| bad())?;
    let j1 = b.trim().parse().map_err(|_| bad())?;
    Ok(Ladder::geometric(j0, j1)?)
}

fn pass_fail(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn run(cli: Cli, out: &mut impl Write) -> Result<(), Failure> {
    match cli.command {
        Command::Coeffs { source, k_max } => {
            let src = Source::load(&source)?;
            write_table_csv(&mut *out, src.coeffs(), k_max)?;
        }
        Command::Eval {
            source,
            rho,
            theta_grid,
            k_trunc,
        } => {
            if !(rho >= 0.0 && rho.is_finite()) {
                return Err(Error::RadiusOutOfRange {
                    rho,
                    range: "[0, inf)",
                }
                .into());
            }
            let pair = Source::load(&source)?.pair();
            let step = 2.0 * PI / theta_grid.max(1) as f64;
            let rows: Vec<(f64, num_complex::Complex64)> = (0..theta_grid)
                .into_par_iter()
                .map(|j| {
                    let theta = -PI + j as f64 * step;
                    (
                        theta,
                        eval_sz(&pair, PolarPoint::new(rho, theta), k_trunc).value,
                    )
                })
                .collect();
            writeln!(out, "theta,re,im")?;
            for (theta, v) in rows {
                writeln!(out, "{},{},{}", f(theta), f(v.re), f(v.im))?;
            }
        }
        Command::Recover {
            source,
            grid,
            ladder,
            tol,
        } => {
            let ladder = parse_ladder(&ladder)?;
            let w = Source::load(&source)?.series();
            let opts = RecoveryOptions {
                tol,
                ..RecoveryOptions::default()
            };
            let results =
                recovery::recover_function(&w, &recovery::open_grid(grid), &ladder, &opts)?;
            writeln!(out, "theta,estimate_re,estimate_im,status")?;
            for r in results {
                writeln!(
                    out,
                    "{},{},{},{}",
                    f(r.theta),
                    f(r.estimate.re),
                    f(r.estimate.im),
                    r.status
                )?;
            }
        }
        Command::Classify {
            source,
            rho_in,
            rho_out,
            k,
            window,
            reject_lacunary,
        } => {
            let pair = Source::load(&source)?.pair();
            let opts = ClassifyOptions {
                rho_in,
                rho_out,
                k,
                window,
                lacunary: if reject_lacunary {
                    LacunaryPolicy::Reject
                } else {
                    LacunaryPolicy::Subsequence
                },
                ..ClassifyOptions::default()
            };
            let report = convergence::classify(&pair, &opts)?;
            serde_json::to_writer_pretty(&mut *out, &report)?;
            writeln!(out)?;
        }
        Command::Probe {
            source,
            theta,
            ladder,
        } => {
            let ladder = parse_ladder(&ladder)?;
            let w = Source::load(&source)?.inner();
            let probe = recovery::probe_singularity(&*w, theta, &ladder)?;
            serde_json::to_writer_pretty(&mut *out, &probe)?;
            writeln!(out)?;
        }
        Command::Verify { check } => {
            if !verify(check, out)? {
                return Err(Failure::Verification);
            }
        }
    }
    Ok(())
}

fn verify(check: Check, out: &mut impl Write) -> Result<bool, Failure> {
    let mut all = true;
    match check {
        Check::Orthogonality {
            k_max,
            rho,
            nodes,
            tol,
        } => {
            let nodes = nodes.unwrap_or_else(|| DEFAULT_NODES.max(8 * k_max));
            for r in rho {
                let report = kernels::orthogonality_matrix(k_max, r, nodes)?;
                let dev = report.max_deviation();
                let ok = dev <= tol;
                all &= ok;
                writeln!(
                    out,
                    "orthogonality rho={} k_max={k_max} max_residual={} {}",
                    f(r),
                    f(dev),
                    pass_fail(ok)
                )?;
            }
        }
        Check::Delta { theta1, rho, nodes } => {
            let kern = DeltaKernel::new(theta1);
            for n in 1..=3 {
                let report =
                    kernels::delta_property_suite(&kern, &rho, &Polynomial::monomial(n), nodes)?;
                let checks = [
                    ("vanishing", report.vanishing),
                    ("divergence", report.divergence),
                    ("normalization", report.normalization),
                    ("sifting", report.sifting),
                ];
                for (label, c) in checks {
                    all &= c.passed;
                    writeln!(
                        out,
                        "delta gamma=z^{n} {label} max_residual={} {}",
                        f(c.max_residual),
                        pass_fail(c.passed)
                    )?;
                }
            }
        }
        Check::Identities {
            entry,
            k_max,
            nodes,
            tol,
        } => {
            for k in 1..=k_max {
                let c = catalog::integration_identity_check(&entry, k, nodes)?;
                let ok = c.residual <= tol;
                all &= ok;
                writeln!(
                    out,
                    "identity {entry} k={k} numerical={} expected={} residual={} {}",
                    f(c.numerical),
                    f(c.expected),
                    f(c.residual),
                    pass_fail(ok)
                )?;
            }
        }
    }
    Ok(all)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = run(cli, &mut out);
    let flushed = out.flush();
    match (result, flushed) {
        (Ok(()), Ok(())) => ExitCode::SUCCESS,
        (Err(Failure::Verification), _) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        (Err(Failure::Usage(msg)), _) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        (Ok(()), Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
