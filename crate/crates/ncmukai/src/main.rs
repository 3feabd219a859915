use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ncmukai::{configure_threads, instance, refine, run_suites, AppError, Config, Suite};

#[derive(Parser)]
#[command(name = "ncmukai", version, about = "Numerical checks of the noncommutative Mukai identities")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// Suite name or `all`
    suite: String,
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here
    #[arg(long)]
    json: Option<PathBuf>,
    /// Override the genus-one grid spacing
    #[arg(long = "grid-h")]
    grid_h: Option<f64>,
    /// Override the genus-one grid half-width
    #[arg(long = "grid-R")]
    grid_r: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one suite or all of them
    Run(Common),
    /// Rerun at h and h/2 and report convergence ratios
    Refine(Common),
    /// Write the shipped DG instance files into a directory
    Instances {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn suites(name: &str) -> Result<Vec<Suite>, AppError> {
    if name == "all" {
        return Ok(Suite::ALL.to_vec());
    }
    name.parse::<Suite>().map(|s| vec![s]).map_err(|m| AppError::Config { pointer: "<suite>".into(), message: m })
}

fn write(path: &Path, text: &str) -> Result<(), AppError> {
    std::fs::write(path, text).map_err(|e| AppError::Output { path: path.display().to_string(), message: e.to_string() })
}

fn load(c: &Common) -> Result<(Vec<Suite>, Config), AppError> {
    let suites = suites(&c.suite)?;
    let cfg = Config::load(&c.config)?.with_grid(c.grid_h, c.grid_r)?;
    Ok((suites, cfg))
}

fn main_inner() -> Result<bool, AppError> {
    let cli = Cli::parse();
    configure_threads()?;
    match cli.cmd {
        Cmd::Run(c) => {
            let (suites, cfg) = load(&c)?;
            let report = run_suites(&suites, &cfg, c.seed)?;
            print!("{}", report.render());
            if let Some(p) = &c.json {
                write(p, &report.to_json())?;
            }
            Ok(report.pass)
        }
        Cmd::Refine(c) => {
            let (suites, cfg) = load(&c)?;
            let report = refine::refine(&suites, &cfg, c.seed)?;
            print!("{}", report.render());
            if let Some(p) = &c.json {
                write(p, &report.to_json())?;
            }
            Ok(report.flagged == 0)
        }
        Cmd::Instances { config, out } => {
            let cfg = Config::load_unchecked(&config)?;
            std::fs::create_dir_all(&out).map_err(|e| AppError::Output { path: out.display().to_string(), message: e.to_string() })?;
            for file in ncmukai::suites::default_instances(&cfg.torus(2)?)? {
                let path = out.join(format!("{}.json", file.name));
                instance::save(&path, &file)?;
                println!("wrote {}", path.display());
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
