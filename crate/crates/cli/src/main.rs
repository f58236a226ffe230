use clap::{Parser, Subcommand};
use frame_pbo_cli::config::{Overrides, RunConfig, DATA_ENV};
use frame_pbo_cli::{output, CliError, Setup};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::SystemTime;

/// Performance-based sizing optimization of RC frames with shear walls.
///
/// Exit codes: 0 success, 1 infeasible result or analysis failure,
/// 2 invalid input, 3 divergence with the abort policy set, 4 I/O failure.
#[derive(Parser)]
#[command(name = "frame-pbo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides `output_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for candidate evaluation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Named settings applied below the config file: desk, paper-io, paper-ls, paper-cp.
    #[arg(long, global = true)]
    preset: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Check catalogs, section capacities, allowables and (optionally) a config.
    Validate {
        /// Fixture directory; defaults to the config's, then $FRAME_PBO_DATA, then the built-in set.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Evaluate one design at the configured levels.
    Analyze {
        /// `max`, `min`, or comma-separated catalog ids (beams, columns, walls).
        #[arg(long, default_value = "max")]
        design: String,
    },
    /// Search for the lightest feasible design at each configured level.
    Optimize,
    /// Re-render plots from the CSV files in the output directory.
    Report,
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let overrides = Overrides { preset: cli.preset.clone(), seed: cli.seed, output_dir: cli.out.clone() };
    RunConfig::load(path, &overrides)
}

fn run(cli: &Cli) -> Result<i32, CliError> {
    let started = SystemTime::now();
    let threads = rayon::current_num_threads();
    match &cli.command {
        Command::Validate { data } => {
            let config = cli.config.as_ref().map(|_| load(cli)).transpose()?;
            let dir = data.clone().or_else(|| config.as_ref().and_then(RunConfig::data_dir)).or_else(|| {
                std::env::var_os(DATA_ENV).map(PathBuf::from)
            });
            let (warnings, summary) = frame_pbo_cli::validate(dir.as_deref(), config.as_ref())?;
            for w in &warnings {
                println!("warning: {w}");
            }
            println!("ok: {summary}");
            Ok(0)
        }
        Command::Analyze { design } => {
            let setup = Setup::new(load(cli)?)?;
            for w in &setup.warnings {
                log::warn!("{w}");
            }
            let design = setup.parse_design(design)?;
            let (report, mut bundle) = frame_pbo_cli::analyze(&setup, &design)?;
            bundle.add("run_meta.json", frame_pbo_cli::metadata("analyze", started, threads));
            bundle.write(&setup.output_dir())?;
            print!("{}", output::summary_text(&report));
            Ok(0)
        }
        Command::Optimize => {
            let setup = Setup::new(load(cli)?)?;
            for w in &setup.warnings {
                log::warn!("{w}");
            }
            let (report, mut bundle, runs) = frame_pbo_cli::optimize(&setup)?;
            bundle.add("run_meta.json", frame_pbo_cli::metadata("optimize", started, threads));
            bundle.write(&setup.output_dir())?;
            print!("{}", output::summary_text(&report));
            let aborted: Vec<String> = runs
                .iter()
                .filter(|r| r.runs.runs.iter().any(|x| x.aborted))
                .map(|r| r.levels.iter().map(|l| l.tag()).collect::<Vec<_>>().join("+"))
                .collect();
            if !aborted.is_empty() {
                return Err(CliError::Diverged(format!("no feasible design found early enough at {}", aborted.join(", "))));
            }
            Ok(if report.all_feasible() { 0 } else { 1 })
        }
        Command::Report => {
            let dir = match (&cli.out, &cli.config) {
                (Some(d), _) => d.clone(),
                (None, Some(_)) => Setup::new(load(cli)?)?.output_dir(),
                (None, None) => return Err(CliError::Config("report needs --out or --config".into())),
            };
            let n = output::render_plots_in(&dir)?;
            if n == 0 {
                return Err(CliError::Io(format!("no result CSV files in {}", dir.display())));
            }
            println!("rendered {n} plot(s) in {}", dir.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
