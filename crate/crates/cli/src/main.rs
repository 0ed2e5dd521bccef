mod commands;
mod config;
mod source;

use clap::{Parser, Subcommand};
use commands::Outcome;
use config::AppConfig;
use std::path::PathBuf;
use std::process::ExitCode;
use svgrefine_core::prefdata::PairMode;

#[derive(Debug, Parser)]
#[command(name = "svgrefine", version, about = "SVG canonicalization, rendering and refinement-data tooling")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for batch commands (default: logical CPUs).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, default_value = "info")]
    log_level: tracing::Level,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Canonicalize every SVG in a directory.
    Normalize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
        /// JSONL report path (default: OUT/report.jsonl).
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        token_limit: Option<usize>,
    },
    /// Rasterize one SVG to PNG, or PPM when the output ends in `.ppm`.
    Render {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
        #[arg(long, default_value_t = 512)]
        size: u32,
    },
    /// Run the generate-critique-correct loop for each prompt.
    Loop {
        #[arg(long)]
        prompt_file: Option<PathBuf>,
        /// mock:SCRIPT.json or http[:CONFIG.toml]
        #[arg(long)]
        backend: String,
        #[arg(long = "out")]
        output: Option<PathBuf>,
        #[arg(long)]
        n_max: Option<u32>,
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Sample and score candidates, then write preference and SFT datasets.
    BuildPref {
        #[arg(long)]
        prompts: Option<PathBuf>,
        #[arg(long)]
        backend: String,
        #[arg(long = "out")]
        output: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        temperature: Option<f64>,
        #[arg(long, value_parser = parse_mode)]
        mode: Option<PairMode>,
        /// Loop output directory to mine for critique/correction/direct records.
        #[arg(long)]
        transcripts: Option<PathBuf>,
    },
    /// Corpus statistics as JSON, optionally as a text table on stdout.
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        table: bool,
        /// Row label (default: input directory name).
        #[arg(long)]
        method: Option<String>,
    },
    /// Render every SVG in a directory to PNG for external evaluators.
    ExportRenders {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
        #[arg(long, default_value_t = 224)]
        size: u32,
    },
    /// Write a seeded synthetic SVG corpus.
    Synth {
        #[arg(long = "out")]
        output: PathBuf,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also write N prompts to this file.
        #[arg(long)]
        prompts: Option<PathBuf>,
    },
}

fn parse_mode(s: &str) -> Result<PairMode, String> {
    match s {
        "all-pairs" => Ok(PairMode::AllPairs),
        "best-vs-rest" => Ok(PairMode::BestVsRest),
        _ => Err("expected all-pairs or best-vs-rest".into()),
    }
}

fn required(flag: Option<PathBuf>, fallback: &Option<PathBuf>, name: &str) -> anyhow::Result<PathBuf> {
    flag.or_else(|| fallback.clone()).ok_or_else(|| anyhow::anyhow!("--{name} is required (or set it under [paths])"))
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let app = match &cli.config {
        Some(path) => AppConfig::load(path)?,
        None => AppConfig::default(),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.workers {
        if n == 0 {
            anyhow::bail!("--workers must be at least 1");
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build()?;

    pool.install(|| match cli.command {
        Command::Normalize { input, output, report, token_limit } => {
            commands::normalize(commands::NormalizeArgs { input, output, report, token_limit }, &app)
        }
        Command::Render { input, output, size } => commands::render_one(&input, &output, size),
        Command::Loop { prompt_file, backend, output, n_max, tau } => {
            let mut loop_cfg = app.loop_.clone();
            loop_cfg.n_max = n_max.unwrap_or(loop_cfg.n_max);
            loop_cfg.tau = tau.unwrap_or(loop_cfg.tau);
            let args = commands::LoopArgs {
                prompts: required(prompt_file, &app.paths.prompts, "prompt-file")?,
                output: required(output, &app.paths.out, "out")?,
                backend,
                loop_cfg,
            };
            commands::run_loops(args, &app)
        }
        Command::BuildPref { prompts, backend, output, n, delta, temperature, mode, transcripts } => {
            let args = commands::PrefArgs {
                prompts: required(prompts, &app.paths.prompts, "prompts")?,
                output: required(output, &app.paths.out, "out")?,
                backend,
                transcripts,
                n: n.unwrap_or(app.pref.n),
                temperature: temperature.unwrap_or(app.pref.temperature),
                delta: delta.unwrap_or(app.pref.delta),
                mode: mode.unwrap_or(app.pref.mode),
            };
            commands::build_pref(args, &app)
        }
        Command::Stats { input, report, table, method } => commands::stats(&input, &report, table, method, &app),
        Command::ExportRenders { input, output, size } => commands::export_renders(&input, &output, size),
        Command::Synth { output, n, seed, prompts } => commands::synth(&output, n, seed, prompts.as_deref()),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    tracing_subscriber::fmt()
        .json()
        .with_max_level(cli.log_level)
        .with_writer(std::io::stderr)
        .with_current_span(false)
        .init();

    match run(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Partial) => ExitCode::from(1),
        Err(e) => {
            tracing::error!(error = %format!("{e:#}"), "fatal");
            ExitCode::from(2)
        }
    }
}
