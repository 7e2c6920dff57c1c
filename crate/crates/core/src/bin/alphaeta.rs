use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use alphaeta::harness::{self, ConfigFile, ExperimentReport, OutputFormat};

#[derive(Parser)]
#[command(
    name = "alphaeta",
    version,
    about = "Seeded experiments on the alpha-eta stream cipher"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    opts: RunOpts,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run { config: PathBuf },
    /// Run a built-in experiment.
    Preset {
        name: String,
        /// Print the preset's TOML instead of running it.
        #[arg(long)]
        print_config: bool,
    },
    /// List built-in experiments.
    ListPresets,
    /// Check a config without running it.
    Validate { config: PathBuf },
}

#[derive(Args)]
struct RunOpts {
    /// Master seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Trial or symbol count (overrides the config).
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Report path. Without it, reports go to $ALPHAETA_OUTPUT_DIR or stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Suppress progress messages on stderr.
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::ListPresets => {
            for p in harness::PRESETS {
                println!("{:<20} {}", p.name, p.summary);
            }
            Ok(())
        }
        Command::Validate { config } => {
            let raw = ConfigFile::load(&config).map_err(|e| e.to_string())?;
            let cfg = raw.validate().map_err(|e| e.to_string())?;
            println!(
                "{}: valid `{}` config (sigma = {:.6}, alpha = {:.6})",
                config.display(),
                cfg.scenario().name(),
                cfg.channel.sigma(),
                cfg.channel.alpha()
            );
            if let Some(w) = cfg.channel.regime_warning() {
                println!("warning: {w}");
            }
            Ok(())
        }
        Command::Run { config } => {
            let raw = ConfigFile::load(&config).map_err(|e| e.to_string())?;
            execute(raw, &cli.opts)
        }
        Command::Preset { name, print_config } => {
            let raw = harness::preset(&name).ok_or_else(|| {
                let known: Vec<_> = harness::preset_names().collect();
                format!("unknown preset `{name}` (known: {})", known.join(", "))
            })?;
            if print_config {
                print!("{}", raw.to_toml());
                return Ok(());
            }
            execute(raw, &cli.opts)
        }
    }
}

fn execute(mut raw: ConfigFile, opts: &RunOpts) -> Result<(), String> {
    if let Some(seed) = opts.seed {
        raw.seed = seed;
    }
    if let Some(trials) = opts.trials {
        raw.trials = trials;
    }
    let format = opts
        .format
        .map(OutputFormat::from)
        .or(raw.output.format)
        .or_else(|| opts.output.as_deref().and_then(format_from_extension))
        .unwrap_or_default();
    let output = opts
        .output
        .clone()
        .or_else(|| raw.output.path.clone())
        .or_else(|| harness::default_output_path(raw.scenario, format));

    let cfg = raw.validate().map_err(|e| e.to_string())?;
    let quiet = opts.quiet;
    let mut progress = |msg: &str| {
        if !quiet {
            eprintln!("{msg}");
        }
    };
    let report = harness::run(&cfg, &mut progress).map_err(|e| e.to_string())?;
    let body = report.render(format);
    match output {
        Some(path) => {
            write_file(&path, &body)?;
            write_trajectories(&path, &report)?;
            progress(&format!("wrote {}", path.display()));
        }
        None => {
            print!("{body}");
            if !body.ends_with('\n') {
                println!();
            }
        }
    }
    Ok(())
}

fn format_from_extension(path: &Path) -> Option<OutputFormat> {
    match path.extension()?.to_str()? {
        "csv" => Some(OutputFormat::Csv),
        "json" => Some(OutputFormat::Json),
        _ => None,
    }
}

fn write_file(path: &Path, body: &str) -> Result<(), String> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    }
    std::fs::write(path, body).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// Writes `<stem>.entropy-g<g>.csv` next to the report for each attack run.
fn write_trajectories(path: &Path, report: &ExperimentReport) -> Result<(), String> {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("report");
    for attack in report.attack_reports() {
        let target = path.with_file_name(format!("{stem}.entropy-g{}.csv", attack.g));
        let mut buf = Vec::new();
        harness::write_entropy_trajectory_csv(&mut buf, attack).map_err(|e| e.to_string())?;
        std::fs::write(&target, buf)
            .map_err(|e| format!("cannot write {}: {e}", target.display()))?;
    }
    Ok(())
}
