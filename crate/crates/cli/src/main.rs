//! maxhelix: solvers, exact maximum laws, helix sweeps and self-tests for
//! lattice i.i.d. sums, as a thin adapter over the library — every printed
//! number comes from a core operation.
//!
//! Exit codes: 0 success, 2 domain error, 3 input/parse error.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use maxhelix::bernoulli;
use maxhelix::check;
use maxhelix::cumulant::{self, CumulantProfile};
use maxhelix::exactmax;
use maxhelix::helix;
use maxhelix::largedev;
use maxhelix::lattice::{self, LatticePMF};

#[derive(Parser)]
#[command(
    name = "maxhelix",
    version,
    about = "Exact and asymptotic laws of the maximum of b^n independent sums of n i.i.d. integer variables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct InputArgs {
    /// PMF text file: one "<integer value> <probability>" per line,
    /// '#' comments and blank lines ignored, duplicates summed
    #[arg(long, value_name = "PATH")]
    pmf: Option<PathBuf>,
    /// {0,1}-valued Bernoulli law with this success probability
    #[arg(long, value_name = "P")]
    p: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the gap equation and print the tilt constants
    Profile {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 2.0)]
        base: f64,
        /// Solver tolerance on |g(γ*) + ln b|
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Large-deviation estimate of P(S_n >= m), with the exact tail when
    /// the convolution is affordable
    Tail {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m: i64,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Exact law of the maximum: log-CDF table over its mass window
    Maxlaw {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 2.0)]
        base: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// One helix point F^a: CDF/pmf table over its essential window
    Helix {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        a: f64,
        #[arg(long, default_value_t = 2.0)]
        base: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Cyclic-convergence sweep over a range of n, as CSV
    Sweep {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_name = "N")]
        n_min: u32,
        #[arg(long, value_name = "N")]
        n_max: u32,
        #[arg(long, default_value_t = 2.0)]
        base: f64,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Closed-form Bernoulli constants and the generic-solver cross-check
    Bernoulli {
        /// Success probability, 0 < p < 1/2
        #[arg(long)]
        p: f64,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Run the invariant self-test suite on the given law
    Check {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 2.0)]
        base: f64,
        /// Seed for the Monte Carlo cross-check
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

enum CliError {
    Domain(String),
    Input(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 2,
            CliError::Input(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Domain(m) | CliError::Input(m) => m,
        }
    }
}

macro_rules! domain {
    ($e:expr) => {
        $e.map_err(|err| CliError::Domain(err.to_string()))
    };
}

fn load_pmf(input: &InputArgs) -> Result<LatticePMF, CliError> {
    if let Some(p) = input.p {
        return domain!(LatticePMF::bernoulli(p));
    }
    let path = input.pmf.as_ref().expect("clap enforces the input group");
    let text = fs::read_to_string(path)
        .map_err(|err| CliError::Input(format!("{}: {err}", path.display())))?;
    let pairs = lattice::parse_pmf_pairs(&text)
        .map_err(|err| CliError::Input(format!("{}: {err}", path.display())))?;
    domain!(LatticePMF::from_pairs(pairs))
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|err| CliError::Input(format!("{}: {err}", path.display()))),
        None => {
            print!("{content}");
            std::io::stdout()
                .flush()
                .map_err(|err| CliError::Input(err.to_string()))
        }
    }
}

/// 15 significant digits, fixed scientific format.
fn num(x: f64) -> String {
    format!("{x:.14e}")
}

fn profile_block(profile: &CumulantProfile) -> String {
    let mut s = String::new();
    s.push_str(&format!("gamma_star = {}\n", num(profile.gamma_star)));
    s.push_str(&format!("rho_star   = {}\n", num(profile.rho_star)));
    s.push_str(&format!("sigma_star = {}\n", num(profile.sigma_star)));
    s.push_str(&format!("omega      = {}\n", profile.omega));
    s.push_str(&format!("p_omega    = {}\n", num(profile.p_omega)));
    s.push_str(&format!("base       = {}\n", num(profile.base)));
    s.push_str(&format!("target     = {}\n", num(profile.target)));
    s.push_str(&format!("residual   = {}\n", num(profile.residual)));
    s
}

fn cmd_profile(
    input: &InputArgs,
    base: f64,
    tol: f64,
    out: &Option<PathBuf>,
) -> Result<(), CliError> {
    let pmf = load_pmf(input)?;
    let profile = domain!(cumulant::solve_profile(&pmf, base, tol))?;
    emit(out, &profile_block(&profile))
}

fn cmd_tail(input: &InputArgs, n: u32, m: i64, out: &Option<PathBuf>) -> Result<(), CliError> {
    let pmf = load_pmf(input)?;
    let est = domain!(largedev::tail_approx(&pmf, n, m))?;
    let mut s = String::new();
    s.push_str(&format!("n            = {n}\n"));
    s.push_str(&format!("m            = {m}\n"));
    s.push_str(&format!("x            = {}\n", num(est.x)));
    s.push_str(&format!("gamma        = {}\n", num(est.gamma)));
    s.push_str(&format!("rate         = {}\n", num(est.rate)));
    s.push_str(&format!("log_estimate = {}\n", num(est.log_estimate)));
    s.push_str(&format!("estimate     = {}\n", num(est.estimate)));
    if !est.in_asymptotic_regime() {
        eprintln!(
            "warning: rate {} below 2: outside the large-deviation regime",
            est.rate
        );
    }
    if n <= 256 {
        let exact = domain!(largedev::exact_tail(&pmf, n, m))?;
        s.push_str(&format!("exact        = {}\n", num(exact)));
        s.push_str(&format!("ratio        = {}\n", num(est.ratio_to(exact))));
    }
    emit(out, &s)
}

fn cmd_maxlaw(
    input: &InputArgs,
    n: u32,
    base: f64,
    tol: f64,
    out: &Option<PathBuf>,
) -> Result<(), CliError> {
    let pmf = load_pmf(input)?;
    let profile = domain!(cumulant::solve_profile(&pmf, base, tol))?;
    let law = domain!(exactmax::max_law_with_profile(&pmf, n, &profile))?;
    let mut s = String::new();
    s.push_str(&format!(
        "n = {n}  base = {}  copies_log = {}\n",
        num(law.base()),
        num(law.copies_log())
    ));
    s.push_str(&format!("a_n = {}\n", num(helix::centering(&profile, n))));
    s.push_str("m log_cdf cdf\n");
    let (lo, hi) = law.window();
    for m in lo..=hi {
        s.push_str(&format!(
            "{m} {} {}\n",
            num(law.log_cdf(m)),
            num(law.cdf_strict(m))
        ));
    }
    emit(out, &s)
}

fn cmd_helix(
    input: &InputArgs,
    a: f64,
    base: f64,
    tol: f64,
    out: &Option<PathBuf>,
) -> Result<(), CliError> {
    let pmf = load_pmf(input)?;
    let profile = domain!(cumulant::solve_profile(&pmf, base, tol))?;
    let hp = helix::helix_point(&profile, a);
    let mut s = String::new();
    s.push_str(&format!(
        "gamma_star = {}  a = {}\n",
        num(hp.gamma_star()),
        num(hp.a())
    ));
    s.push_str("m cdf pmf\n");
    let (lo, hi) = hp.window_for_mass(1e-12);
    for m in lo..=hi {
        s.push_str(&format!(
            "{m} {} {}\n",
            num(hp.cdf_strict(m)),
            num(hp.pmf(m))
        ));
    }
    emit(out, &s)
}

fn cmd_sweep(
    input: &InputArgs,
    n_min: u32,
    n_max: u32,
    base: f64,
    out: &Option<PathBuf>,
) -> Result<(), CliError> {
    if n_min > n_max || n_min == 0 {
        return Err(CliError::Input(format!(
            "invalid range: --n-min {n_min} --n-max {n_max}"
        )));
    }
    let pmf = load_pmf(input)?;
    let ns: Vec<u32> = (n_min..=n_max).collect();
    let rows = domain!(helix::cyclic_report(&pmf, base, &ns))?;
    for row in &rows {
        if row.d_raw.is_none() {
            eprintln!(
                "warning: n={}: exact law unavailable (underflow or support guard), distances NA",
                row.n
            );
        }
    }
    let mut buf = Vec::new();
    helix::write_cyclic_csv(&rows, &mut buf).map_err(|err| CliError::Input(err.to_string()))?;
    emit(out, &String::from_utf8(buf).expect("CSV is UTF-8"))
}

fn cmd_bernoulli(p: f64, out: &Option<PathBuf>) -> Result<(), CliError> {
    let prof = domain!(bernoulli::solve_bernoulli(p))?;
    let mut s = String::new();
    s.push_str(&format!("p          = {}\n", num(prof.p)));
    s.push_str(&format!("q          = {}\n", num(prof.q)));
    s.push_str(&format!("rho_star   = {}\n", num(prof.rho_star)));
    s.push_str(&format!("kappa      = {}\n", num(prof.kappa)));
    s.push_str(&format!("beta       = {}\n", num(prof.beta)));
    s.push_str(&format!("gamma_star = {}\n", num(prof.gamma_star)));
    s.push_str(&format!("sigma_star = {}\n", num(prof.sigma_star)));
    let (d_rho, d_gamma, d_sigma) = domain!(bernoulli::generic_deltas(&prof))?;
    s.push_str(&format!("delta_rho_star_vs_generic   = {}\n", num(d_rho)));
    s.push_str(&format!("delta_gamma_star_vs_generic = {}\n", num(d_gamma)));
    s.push_str(&format!("delta_sigma_star_vs_generic = {}\n", num(d_sigma)));
    emit(out, &s)
}

fn cmd_check(
    input: &InputArgs,
    base: f64,
    seed: u64,
    out: &Option<PathBuf>,
) -> Result<(), CliError> {
    let pmf = load_pmf(input)?;
    let outcomes = check::run_all(&pmf, base, seed);
    let mut s = String::new();
    let mut failed = 0usize;
    for o in &outcomes {
        let status = if o.passed { "PASS" } else { "FAIL" };
        s.push_str(&format!("{status} {}: {}\n", o.name, o.detail));
        if !o.passed {
            failed += 1;
        }
    }
    if failed == 0 {
        s.push_str("all invariants passed\n");
        emit(out, &s)
    } else {
        emit(out, &s)?;
        Err(CliError::Domain(format!(
            "{failed} invariant check(s) failed"
        )))
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Profile {
            input,
            base,
            tol,
            out,
        } => cmd_profile(input, *base, *tol, out),
        Command::Tail { input, n, m, out } => cmd_tail(input, *n, *m, out),
        Command::Maxlaw {
            input,
            n,
            base,
            tol,
            out,
        } => cmd_maxlaw(input, *n, *base, *tol, out),
        Command::Helix {
            input,
            a,
            base,
            tol,
            out,
        } => cmd_helix(input, *a, *base, *tol, out),
        Command::Sweep {
            input,
            n_min,
            n_max,
            base,
            out,
        } => cmd_sweep(input, *n_min, *n_max, *base, out),
        Command::Bernoulli { p, out } => cmd_bernoulli(*p, out),
        Command::Check {
            input,
            base,
            seed,
            out,
        } => cmd_check(input, *base, *seed, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) if err.use_stderr() => {
            // Flag/usage problems are input errors: exit 3.
            let _ = err.print();
            return ExitCode::from(3);
        }
        Err(help_or_version) => {
            let _ = help_or_version.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}
