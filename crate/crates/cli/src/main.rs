use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use jsonoracle::backends::{execute, resolve_backend, ExecutionLimits};
use jsonoracle::classify::{evaluate_accuracy, load_cases, ClassifyParams, Mode};
use jsonoracle::corpus::{mine_seeds, Manifest};
use jsonoracle::llm::MutationMode;
use jsonoracle::pipeline::{
    build_client, run_from_config, LlmConfig, Overrides, PipelineConfig, PipelineError,
};
use jsonoracle::tdsl::parse_script;

const EXIT_USAGE: u8 = 1;
const EXIT_ABORTED: u8 = 2;
const EXIT_BUGS: u8 = 3;

#[derive(Parser)]
#[command(
    name = "jsonoracle",
    version,
    about = "Differential testing of JSON libraries with LLM-generated tests"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MutationArg {
    None,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Fs,
    FsCot,
}

#[derive(Subcommand)]
enum Command {
    /// Generate, execute and compare tests for every seed.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Replay or scripted scenario to use instead of the network.
        #[arg(long)]
        mock: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        mutation: Option<MutationArg>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        rounds: Option<usize>,
    },
    /// Collect seed tests under a directory into a manifest.
    Mine {
        #[arg(long)]
        root: PathBuf,
        #[arg(long, default_value = "issue")]
        keyword: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Label failing tests as good or bad and print per-category accuracy.
    Classify {
        #[arg(long)]
        cases: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        mock: Option<PathBuf>,
        /// Pipeline config supplying llm and classify settings.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Print the table as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Execute one script on one backend.
    Exec {
        #[arg(long)]
        script: PathBuf,
        #[arg(long)]
        backend: String,
    },
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn dispatch(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Run {
            config,
            mock,
            seed,
            mutation,
            out,
            rounds,
        } => cmd_run(&config, mock, seed, mutation, out, rounds),
        Command::Mine { root, keyword, out } => cmd_mine(&root, &keyword, &out),
        Command::Classify {
            cases,
            mode,
            mock,
            config,
            json,
        } => cmd_classify(&cases, mode, mock, config, json),
        Command::Exec { script, backend } => cmd_exec(&script, &backend),
    }
}

fn cmd_run(
    config: &Path,
    mock: Option<PathBuf>,
    seed: Option<u64>,
    mutation: Option<MutationArg>,
    out: Option<PathBuf>,
    rounds: Option<usize>,
) -> Result<u8> {
    let mut cfg = PipelineConfig::load(config)?;
    cfg.apply(&Overrides {
        mock_scenario: mock,
        seed,
        mutation: mutation.map(|m| match m {
            MutationArg::None => MutationMode::None,
            MutationArg::Random => MutationMode::RandomOne,
        }),
        output_dir: out,
        rounds,
    });
    let artifacts = match run_from_config(&cfg) {
        Ok(a) => a,
        Err(PipelineError::Io(e)) => {
            eprintln!("error: cannot write artifacts: {e}");
            return Ok(EXIT_ABORTED);
        }
        Err(e) => return Err(e.into()),
    };
    let report = &artifacts.report;
    print!("{}", jsonoracle::pipeline::render_text(report));
    println!("artifacts in {}", cfg.output_dir.display());
    Ok(if !report.complete {
        EXIT_ABORTED
    } else if !report.bugs.is_empty() {
        EXIT_BUGS
    } else {
        0
    })
}

fn cmd_mine(root: &Path, keyword: &str, out: &Path) -> Result<u8> {
    let root = root
        .canonicalize()
        .with_context(|| format!("cannot open {}", root.display()))?;
    let mined = mine_seeds(&root, keyword)?;
    for e in &mined.load_errors {
        eprintln!("skipped {}: {}", e.path.display(), e.message);
    }
    let out_dir = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => {
            fs::create_dir_all(p)?;
            p.canonicalize()?
        }
        _ => std::env::current_dir()?,
    };
    let manifest = Manifest::from_corpus(&mined.corpus, &out_dir);
    fs::write(out, serde_json::to_string_pretty(&manifest)? + "\n")
        .with_context(|| format!("cannot write {}", out.display()))?;
    println!(
        "{} seeds, manifest hash {}",
        mined.corpus.len(),
        mined.corpus.manifest_hash
    );
    Ok(0)
}

fn cmd_classify(
    cases: &Path,
    mode: ModeArg,
    mock: Option<PathBuf>,
    config: Option<PathBuf>,
    json: bool,
) -> Result<u8> {
    let mode = match mode {
        ModeArg::Fs => Mode::Fs,
        ModeArg::FsCot => Mode::FsCot,
    };
    let cfg = match &config {
        Some(p) => Some(PipelineConfig::load(p)?),
        None => None,
    };
    let (params, mut llm) = match cfg {
        Some(c) => (c.classify, c.llm),
        None => (ClassifyParams::default(), LlmConfig::default()),
    };
    if mock.is_some() {
        llm.mock_scenario = mock;
    }
    let client = build_client(&llm)?;
    let cases = load_cases(cases)?;
    let table = evaluate_accuracy(&cases, mode, &params, client.as_ref())?;
    if json {
        println!("{}", serde_json::to_string_pretty(&table.to_json())?);
    } else {
        print!("{}", table.render_text());
    }
    Ok(0)
}

fn cmd_exec(script: &Path, backend: &str) -> Result<u8> {
    let text =
        fs::read_to_string(script).with_context(|| format!("cannot read {}", script.display()))?;
    let parsed = parse_script(&text).with_context(|| format!("in {}", script.display()))?;
    let b = resolve_backend(backend)?;
    let outcome = execute(&parsed, b.as_ref(), ExecutionLimits::default());
    println!("{}", serde_json::to_string_pretty(&outcome)?);
    Ok(0)
}
