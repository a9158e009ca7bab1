//! `lattice-theta`: theta series and invariant forms of integral lattices.
//!
//! Exit codes: 0 success (or a compare that distinguished), 1 usage,
//! 2 inconclusive compare, 3 input validation, 4 tolerance failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use lattice_theta::heat::run_identity_checks;
use lattice_theta::lattice::embed;
use lattice_theta::theta::{theta11, theta_nn, theta_series};
use lattice_theta::{BigRational, GramLattice, HeatContext, QExpansion};
use thiserror::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_TOLERANCE: u8 = 4;

/// Largest dimension accepted by `heat-check`.
const HEAT_MAX_DIM: usize = 4;

#[derive(Debug, Parser)]
#[command(
    name = "lattice-theta",
    version,
    about = "Theta series and invariant forms of integral lattices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Theta series Σ q^{‖γ‖²}
    Theta {
        #[arg(long, default_value_t = 20)]
        qprec: u64,
        #[arg(long)]
        output: Option<PathBuf>,
        gram: PathBuf,
    },
    /// Exact invariant form with weight and level header
    Invariant {
        /// theta, theta11 or thetann:<n>
        #[arg(long)]
        kind: Kind,
        #[arg(long, default_value_t = 20)]
        qprec: u64,
        #[arg(long)]
        output: Option<PathBuf>,
        gram: PathBuf,
    },
    /// Compare two lattices invariant by invariant
    Compare {
        #[arg(long, default_value_t = 20)]
        qprec: u64,
        #[arg(long)]
        output: Option<PathBuf>,
        first: PathBuf,
        second: PathBuf,
    },
    /// Nonzero vectors with ‖v‖² ≤ bound
    Shortvec {
        #[arg(long)]
        bound: BigRational,
        #[arg(long)]
        output: Option<PathBuf>,
        gram: PathBuf,
    },
    /// Heat-kernel identity report
    HeatCheck {
        #[arg(long = "t")]
        t: f64,
        #[arg(long, default_value_t = 1e-12)]
        epsilon: f64,
        #[arg(long)]
        output: Option<PathBuf>,
        gram: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Theta,
    Theta11,
    ThetaNn(u32),
}

impl FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "theta" => Ok(Self::Theta),
            "theta11" => Ok(Self::Theta11),
            _ => {
                let order = s.strip_prefix("thetann:").ok_or_else(|| {
                    format!("unknown kind {s:?}; expected theta, theta11 or thetann:<n>")
                })?;
                match order.parse::<u32>() {
                    Ok(n) if n >= 1 => Ok(Self::ThetaNn(n)),
                    _ => Err(format!(
                        "thetann order must be a positive integer, got {order:?}"
                    )),
                }
            }
        }
    }
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Theta => write!(f, "theta"),
            Self::Theta11 => write!(f, "theta11"),
            Self::ThetaNn(n) => write!(f, "thetann:{n}"),
        }
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Tolerance(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Validation(_) => EXIT_VALIDATION,
            Self::Tolerance(_) => EXIT_TOLERANCE,
        }
    }
}

fn validation(context: impl std::fmt::Display) -> impl FnOnce(String) -> CliError {
    move |e| CliError::Validation(format!("{context}: {e}"))
}

fn load(path: &Path) -> Result<GramLattice, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    text.parse::<GramLattice>()
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn compute(lattice: &GramLattice, kind: Kind, qprec: u64) -> Result<QExpansion, String> {
    match kind {
        Kind::Theta => theta_series(lattice, qprec),
        Kind::Theta11 => theta11(lattice, qprec),
        Kind::ThetaNn(n) => theta_nn(lattice, n, qprec),
    }
    .map_err(|e| e.to_string())
}

/// Rendered output and the exit code to report after it is written.
struct Report {
    text: String,
    code: u8,
}

impl Report {
    fn ok(text: String) -> Self {
        Self { text, code: 0 }
    }
}

fn cmd_theta(gram: &Path, qprec: u64) -> Result<Report, CliError> {
    let l = load(gram)?;
    let s = theta_series(&l, qprec).map_err(|e| validation(gram.display())(e.to_string()))?;
    Ok(Report::ok(s.to_string()))
}

fn cmd_invariant(gram: &Path, kind: Kind, qprec: u64) -> Result<Report, CliError> {
    let l = load(gram)?;
    let s = compute(&l, kind, qprec).map_err(validation(gram.display()))?;
    Ok(Report::ok(s.to_text_with_metadata()))
}

fn cmd_compare(first: &Path, second: &Path, qprec: u64) -> Result<Report, CliError> {
    let a = load(first)?;
    let b = load(second)?;
    if a.dim() != b.dim() {
        return Err(CliError::Validation(format!(
            "dimension mismatch: {} has dimension {}, {} has dimension {}",
            first.display(),
            a.dim(),
            second.display(),
            b.dim()
        )));
    }
    for (l, p) in [(&a, first), (&b, second)] {
        l.require_integral()
            .map_err(|e| validation(p.display())(e.to_string()))?;
    }
    let mut kinds = vec![Kind::Theta, Kind::Theta11];
    if a.dim() == 2 {
        kinds.extend((1..=4).map(Kind::ThetaNn));
    }
    let mut text = String::new();
    let mut distinguished = false;
    for kind in kinds {
        let sa = compute(&a, kind, qprec).map_err(validation(first.display()))?;
        let sb = compute(&b, kind, qprec).map_err(validation(second.display()))?;
        match sa.first_difference(&sb) {
            None => writeln!(text, "{kind} EQUAL").unwrap(),
            Some(m) => {
                distinguished = true;
                writeln!(
                    text,
                    "{kind} DIFFERS at q^{m}: {} vs {}",
                    sa.coefficient(m),
                    sb.coefficient(m)
                )
                .unwrap();
            }
        }
    }
    let code = if distinguished {
        writeln!(text, "verdict DISTINGUISHED").unwrap();
        0
    } else {
        writeln!(text, "verdict INCONCLUSIVE through q^{qprec}").unwrap();
        EXIT_INCONCLUSIVE
    };
    Ok(Report { text, code })
}

fn cmd_shortvec(gram: &Path, bound: &BigRational) -> Result<Report, CliError> {
    let l = load(gram)?;
    let mut text = String::new();
    for (v, norm) in l.short_vectors(bound) {
        writeln!(text, "{norm} ({v})").unwrap();
    }
    Ok(Report::ok(text))
}

fn cmd_heat_check(gram: &Path, t: f64, epsilon: f64) -> Result<Report, CliError> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(CliError::Usage(format!(
            "--t must be a positive real, got {t}"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(CliError::Usage(format!(
            "--epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let l = load(gram)?;
    if l.dim() > HEAT_MAX_DIM {
        return Err(CliError::Validation(format!(
            "heat-check supports dimension at most {HEAT_MAX_DIM}, got {}",
            l.dim()
        )));
    }
    let e = embed(&l).map_err(|e| validation(gram.display())(e.to_string()))?;
    let ctx = HeatContext::new(l, e, t, epsilon).map_err(|e| CliError::Usage(e.to_string()))?;
    let checks =
        run_identity_checks(&ctx).map_err(|e| validation(gram.display())(e.to_string()))?;
    let width = checks
        .iter()
        .map(|c| c.name.len())
        .max()
        .unwrap_or(8)
        .max(8);
    let mut text = String::new();
    writeln!(
        text,
        "# t = {t}, epsilon = {epsilon:e}, cutoff B = {:.6}, {} lattice vectors",
        ctx.truncation_bound(),
        ctx.point_count()
    )
    .unwrap();
    writeln!(
        text,
        "{:<width$}  {:>24}  {:>24}  {:>9}  {:>9}  status",
        "identity", "lhs", "rhs", "rel_err", "tol"
    )
    .unwrap();
    let mut failures = 0;
    for c in &checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        failures += usize::from(!c.passed());
        writeln!(
            text,
            "{:<width$}  {:>24.16e}  {:>24.16e}  {:>9.2e}  {:>9.0e}  {status}",
            c.name, c.lhs, c.rhs, c.rel_error, c.tolerance
        )
        .unwrap();
    }
    writeln!(
        text,
        "{} of {} identities passed",
        checks.len() - failures,
        checks.len()
    )
    .unwrap();
    let code = if failures == 0 { 0 } else { EXIT_TOLERANCE };
    Ok(Report { text, code })
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let (report, output) = match &cli.command {
        Command::Theta {
            qprec,
            output,
            gram,
        } => (cmd_theta(gram, *qprec)?, output),
        Command::Invariant {
            kind,
            qprec,
            output,
            gram,
        } => (cmd_invariant(gram, *kind, *qprec)?, output),
        Command::Compare {
            qprec,
            output,
            first,
            second,
        } => (cmd_compare(first, second, *qprec)?, output),
        Command::Shortvec {
            bound,
            output,
            gram,
        } => (cmd_shortvec(gram, bound)?, output),
        Command::HeatCheck {
            t,
            epsilon,
            output,
            gram,
        } => (cmd_heat_check(gram, *t, *epsilon)?, output),
    };
    match output {
        Some(path) => std::fs::write(path, &report.text)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?,
        None => print!("{}", report.text),
    }
    if report.code == EXIT_TOLERANCE {
        let err = CliError::Tolerance("identity check outside tolerance".into());
        eprintln!("error: {err}");
        return Ok(err.exit_code());
    }
    Ok(report.code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
