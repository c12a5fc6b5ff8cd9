use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::config::RunConfig;
use super::runs::{self, Outcome};
use super::HarnessError;
use crate::dynamics::KineticParams;

#[derive(Parser, Debug)]
#[command(name = "kll", version, about = "Band-limited kinetic simulator and hydrodynamic-limit harness")]
struct Cli {
    /// Worker threads for sweeps; falls back to KLL_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// TOML run configuration. Without it, the overrides must supply
    /// at least params.epsilon and params.nu_star.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `key.path=value`, applied in order before validation.
    #[arg(long = "override", value_name = "K=V")]
    overrides: Vec<String>,
    /// Output directory; replaces outputs.dir.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Basis and closure constants of one velocity band against their limits.
    Constants {
        #[arg(long, default_value_t = 2)]
        n_v: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact-arithmetic check of every closure and forcing coefficient.
    VerifyClosure {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One kinetic trajectory with energy and moment diagnostics.
    Simulate(RunArgs),
    /// ε sweep with the hydrodynamic-limit trends.
    LimitStudy {
        #[command(flatten)]
        run: RunArgs,
        /// Strictly decreasing ε values; replaces limit.eps_list.
        #[arg(long, value_delimiter = ',')]
        eps_list: Option<Vec<f64>>,
    },
    /// Reference solver of the limit system.
    Nsf {
        #[command(flatten)]
        run: RunArgs,
        /// Forcing in the long CSV format; replaces nsf.forcing.
        #[arg(long)]
        forcing: Option<PathBuf>,
    },
    /// Re-analyse the energy margin of a series.csv.
    EnergyReport {
        #[arg(long)]
        series: PathBuf,
        /// Supplies ε and ν* when the flags below are absent.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        nu_star: Option<f64>,
        #[arg(long)]
        tol_energy: Option<f64>,
    },
}

fn load_config(args: &RunArgs) -> Result<RunConfig, HarnessError> {
    match &args.config {
        Some(p) => RunConfig::load(p, &args.overrides),
        None => RunConfig::from_toml("", &args.overrides),
    }
}

fn out_dir(args: &RunArgs, cfg: &RunConfig) -> PathBuf {
    args.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.outputs.dir))
}

fn init_threads(requested: Option<usize>) -> Result<(), HarnessError> {
    let n = match requested {
        Some(n) => Some(n),
        None => match std::env::var("KLL_THREADS") {
            Ok(s) => Some(s.trim().parse().map_err(|_| HarnessError::Config(format!("KLL_THREADS={s:?} is not a count")))?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(HarnessError::Config("thread count must be positive".into()));
        }
        // A second call in the same process keeps the first pool.
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            log::debug!("global thread pool already initialised");
        }
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<Outcome, HarnessError> {
    init_threads(cli.threads)?;
    match cli.command {
        Command::Constants { n_v, out } => runs::run_constants(n_v, out.as_deref()),
        Command::VerifyClosure { out } => runs::run_verify_closure(out.as_deref()).map(|(_, o)| o),
        Command::Simulate(args) => {
            let cfg = load_config(&args)?;
            let dir = out_dir(&args, &cfg);
            let out = runs::simulate(&cfg, Some(&dir))?;
            println!("{}", serde_json::to_string_pretty(&out.report)?);
            Ok(out.report.outcome)
        }
        Command::LimitStudy { run, eps_list } => {
            let cfg = load_config(&run)?;
            let eps = eps_list.unwrap_or_else(|| cfg.limit.eps_list.clone());
            let dir = out_dir(&run, &cfg);
            let (report, outcome) = runs::run_limit_study(&cfg, &eps, Some(&dir))?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(outcome)
        }
        Command::Nsf { run, forcing } => {
            let cfg = load_config(&run)?;
            let dir = out_dir(&run, &cfg);
            let (report, _) = runs::run_nsf(&cfg, forcing.as_deref(), Some(&dir))?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(report.outcome)
        }
        Command::EnergyReport { series, config, epsilon, nu_star, tol_energy } => {
            let from_cfg = config.as_deref().map(|p: &Path| RunConfig::load(p, &[])).transpose()?;
            let pick = |flag: Option<f64>, get: fn(&RunConfig) -> f64, name: &str| {
                flag.or_else(|| from_cfg.as_ref().map(get))
                    .ok_or_else(|| HarnessError::Config(format!("energy-report needs --{name} or --config")))
            };
            let eps = pick(epsilon, |c| c.params.epsilon, "epsilon")?;
            let nu_star = pick(nu_star, |c| c.params.nu_star, "nu-star")?;
            let params = KineticParams::with_default_kappa(eps, nu_star).map_err(|e| HarnessError::Config(e.to_string()))?;
            let tol = tol_energy.or_else(|| from_cfg.as_ref().and_then(|c| c.tolerances.tol_energy));
            let report = runs::energy_report_from_series(&series, &params, tol)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(Outcome { pass: report.pass, failures: if report.pass { vec![] } else { vec!["energy-inequality".into()] } })
        }
    }
}

/// Parse `argv` (including the program name), run the subcommand and return
/// the process exit code: 0 on pass, 1 when a hard invariant fails, 2 on a
/// usage or configuration error.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(o) if o.pass => 0,
        Ok(o) => {
            for f in &o.failures {
                eprintln!("invariant failed: {f}");
            }
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
