use std::path::PathBuf;
use std::process::ExitCode;

use blowup_lab::commands::{self, Report};
use blowup_lab::config::RunConfig;
use blowup_lab::{init_threads, CliError, EXIT_ERROR, EXIT_FAIL, EXIT_PASS};
use clap::{Args, Parser, Subcommand};

/// Verification driver for the cross-shaped blow-up construction.
///
/// Exit codes: 0 all checks pass, 1 a check failed, 2 configuration or
/// domain error. BLOWUP_LAB_THREADS caps the worker threads.
#[derive(Parser)]
#[command(name = "blowup-lab", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

/// Overrides applied on top of the defaults and the config file.
#[derive(Args)]
struct Common {
    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Nonlinearity exponent, > 1.
    #[arg(long, global = true)]
    p: Option<String>,
    /// Sextic weight.
    #[arg(long, global = true)]
    delta: Option<String>,
    /// Shrinking-set amplitude.
    #[arg(long = "A", global = true)]
    amp: Option<String>,
    /// Initial similarity time.
    #[arg(long, global = true)]
    s0: Option<String>,
    /// Five comma-separated reals `d00,d20,d40,d42,d60` (`0` for all zero).
    #[arg(long, global = true, allow_hyphen_values = true)]
    d: Option<String>,
    /// Integration window in s.
    #[arg(long, global = true)]
    window: Option<String>,
    /// Gauss-Hermite nodes per direction.
    #[arg(long = "quad-order", global = true)]
    quad_order: Option<String>,
    /// Total Hermite degree kept.
    #[arg(long, global = true)]
    nmax: Option<String>,
    /// Time step.
    #[arg(long, global = true)]
    ds: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact series certificate of the profile and remainder coefficients.
    Expand {
        #[arg(long, default_value_t = 2)]
        order: usize,
        /// Replace gamma by gamma + 1 (the certificate must then fail).
        #[arg(long)]
        tamper_gamma: bool,
    },
    /// Scan of the profile: E, sup phi, gradient, axis decay, phi against Phi.
    ProfileCheck,
    /// Mehler kernel against the eigen-decay and semigroup composition.
    KernelCheck,
    /// One trajectory with the configured d, checked against V_A(s).
    Evolve,
    /// Deterministic search over d for a trapped trajectory.
    Shoot {
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Region map over a polar sweep of a with per-region size certificates.
    Regions {
        #[arg(long, default_value_t = blowup_core::scenarios::DEFAULT_M_SMALL)]
        m: f64,
        #[arg(long = "M", default_value_t = blowup_core::scenarios::DEFAULT_M_BIG)]
        big_m: f64,
    },
    /// u' = u^p from t* to T against the closed form.
    FinalProfile {
        #[arg(long = "K0", default_value_t = 1.0)]
        k0: f64,
        /// T - t*.
        #[arg(long = "Tmt", default_value_t = 0.1)]
        tmt: f64,
    },
    /// All twelve acceptance criteria at the reference parameters.
    ReproduceAll,
}

fn config(c: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &c.config {
        cfg.load(path)?;
    }
    let flags = [
        ("p", &c.p),
        ("delta", &c.delta),
        ("A", &c.amp),
        ("s0", &c.s0),
        ("d", &c.d),
        ("window", &c.window),
        ("quad_order", &c.quad_order),
        ("nmax", &c.nmax),
        ("ds", &c.ds),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            cfg.set(k, v)?;
        }
    }
    if let Some(out) = &c.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<Report, CliError> {
    init_threads()?;
    let mut cfg = config(&cli.common)?;
    match cli.cmd {
        Cmd::Expand { order, tamper_gamma } => commands::expand(&cfg, order, tamper_gamma),
        Cmd::ProfileCheck => commands::profile_check(&cfg),
        Cmd::KernelCheck => commands::kernel_check(&cfg),
        Cmd::Evolve => commands::evolve_cmd(&cfg),
        Cmd::Shoot { budget } => {
            if let Some(b) = budget {
                cfg.budget = b;
            }
            commands::shoot_cmd(&cfg)
        }
        Cmd::Regions { m, big_m } => commands::regions(&cfg, m, big_m),
        Cmd::FinalProfile { k0, tmt } => commands::final_profile(&cfg, k0, tmt),
        Cmd::ReproduceAll => commands::reproduce_all(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(rep) => {
            for l in &rep.lines {
                println!("{l}");
            }
            if rep.pass {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    };
    ExitCode::from(code as u8)
}
