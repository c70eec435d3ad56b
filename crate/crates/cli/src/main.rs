use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use heisenberg::archive::{load_spec, save_spec};
use heisenberg::factorizer::{check_relations, factorize};
use heisenberg::HomomorphismSpec64;
use heisenberg_cli::config::{Overrides, RunConfig, Suite, Tolerances};
use heisenberg_cli::report::VerificationReport;
use heisenberg_cli::{checks, export, suites, Setup};
use serde_json::json;

/// Numerical verification of harmonic analysis on the Heisenberg group.
#[derive(Parser)]
#[command(name = "heisenberg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and write a report.
    Verify {
        suite: SuiteArg,
        #[command(flatten)]
        common: Common,
    },
    /// Synthesize a hidden homomorphism and recover its blocks.
    Demo {
        #[command(subcommand)]
        what: Demo,
    },
    /// Write plot-ready data.
    Export {
        #[command(subcommand)]
        what: Export,
    },
    /// Write or read a homomorphism-spec archive.
    Spec {
        #[command(subcommand)]
        what: SpecCmd,
    },
}

#[derive(Subcommand)]
enum Demo {
    Factorize {
        #[arg(long, default_value_t = 2)]
        blocks: usize,
        #[arg(long, default_value_t = 3)]
        dim_residual: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum Export {
    Convergence {
        /// Comma-separated truncation degrees; empty writes the header only.
        #[arg(long, value_delimiter = ',', num_args = 0.., default_value = "2,4,6,10")]
        sweep: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum SpecCmd {
    /// Synthesize a spec and save it as `spec.bin` (or `--file`).
    Dump {
        #[arg(long, default_value_t = 2)]
        blocks: usize,
        #[arg(long, default_value_t = 3)]
        dim_residual: usize,
        #[arg(long)]
        file: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Load a spec, check its relations and factorize it.
    Load {
        path: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Basis,
    Representation,
    Twisted,
    Weyl,
    Fourier,
    Factorizer,
    All,
}

#[derive(Clone, Copy, Default, PartialEq, ValueEnum)]
enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated nonzero values.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    lambda: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    max_degree: Option<i64>,
    #[arg(long)]
    quad_points: Option<usize>,
    /// Half-width of the phase-space box.
    #[arg(long = "box")]
    box_half_width: Option<f64>,
    #[arg(long)]
    tol_basis: Option<f64>,
    #[arg(long)]
    tol_representation: Option<f64>,
    #[arg(long)]
    tol_twisted: Option<f64>,
    #[arg(long)]
    tol_weyl: Option<f64>,
    #[arg(long)]
    tol_fourier: Option<f64>,
    #[arg(long)]
    tol_factorizer: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default `$HEISENBERG_OUT`, else `.`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Include the slow Plancherel checks.
    #[arg(long)]
    slow: bool,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, Failure> {
        let flags = Overrides {
            n: self.n,
            lambdas: self.lambda.clone(),
            max_degree: self.max_degree,
            quad_points: self.quad_points,
            box_half_width: self.box_half_width,
            tolerances: Tolerances {
                basis: self.tol_basis,
                representation: self.tol_representation,
                twisted: self.tol_twisted,
                weyl: self.tol_weyl,
                fourier: self.tol_fourier,
                factorizer: self.tol_factorizer,
            },
            seed: self.seed,
            slow: self.slow,
            out: self.out.clone(),
        };
        RunConfig::resolve(self.config.as_deref(), &flags).map_err(|e| Failure::Usage(e.to_string()))
    }

    fn csv(&self) -> bool {
        self.format == Some(Format::Csv)
    }
}

enum Failure {
    Usage(String),
    Verification(String),
    Runtime(String),
}

impl From<heisenberg::Error> for Failure {
    fn from(e: heisenberg::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Verify { suite, common } => verify(suite, &common),
        Command::Demo {
            what: Demo::Factorize {
                blocks,
                dim_residual,
                common,
            },
        } => demo(blocks, dim_residual, &common),
        Command::Export {
            what: Export::Convergence { sweep, common },
        } => convergence(&sweep, &common),
        Command::Spec {
            what:
                SpecCmd::Dump {
                    blocks,
                    dim_residual,
                    file,
                    common,
                },
        } => dump(blocks, dim_residual, file, &common),
        Command::Spec {
            what: SpecCmd::Load { path, common },
        } => load(&path, &common),
    }
}

fn verify(suite: SuiteArg, common: &Common) -> Result<(), Failure> {
    let config = common.resolve()?;
    let selected: Vec<Suite> = match suite {
        SuiteArg::All => Suite::ALL.to_vec(),
        SuiteArg::Basis => vec![Suite::Basis],
        SuiteArg::Representation => vec![Suite::Representation],
        SuiteArg::Twisted => vec![Suite::Twisted],
        SuiteArg::Weyl => vec![Suite::Weyl],
        SuiteArg::Fourier => vec![Suite::Fourier],
        SuiteArg::Factorizer => vec![Suite::Factorizer],
    };
    let records = suites::run_all(&selected, &config);
    let names = selected.iter().map(|s| s.name().to_string()).collect();
    let report = VerificationReport::new(names, records, &config);
    let path = report.write(&config.output_dir(), common.csv())?;
    print!("{}", report.summary(true));
    println!("report: {}", path.display());
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Verification("verification failed".into()))
    }
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Result<PathBuf, Failure> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(value).expect("value serializes") + "\n";
    std::fs::write(&path, &text)?;
    print!("{text}");
    Ok(path)
}

fn demo(blocks: usize, residual: usize, common: &Common) -> Result<(), Failure> {
    let config = common.resolve()?;
    let setup = Setup::from(&config);
    let (spec, dec) = checks::demo_factorize(&setup, blocks, residual)?;
    let ok = dec.block_count() == blocks && dec.residual_dim() == residual;
    let value = json!({
        "lambda": spec.lambda(),
        "n": spec.n(),
        "max_degree": spec.scheme().max_degree(),
        "target_dim": spec.target_dim(),
        "seed": config.seed,
        "expected": { "blocks": blocks, "residual_dim": residual },
        "recovered": { "blocks": dec.block_count(), "residual_dim": dec.residual_dim() },
        "diagnostics": dec.diagnostics,
        "pass": ok,
    });
    write_json(&config.output_dir(), "demo_factorize.json", &value)?;
    if ok {
        Ok(())
    } else {
        Err(Failure::Verification("recovered structure differs from the synthesized one".into()))
    }
}

fn convergence(sweep: &[String], common: &Common) -> Result<(), Failure> {
    let config = common.resolve()?;
    let degrees = sweep
        .iter()
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|_| Failure::Usage(format!("invalid value for `sweep`: {s:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = export::convergence(&Setup::from(&config), &degrees)?;
    let dir = config.output_dir();
    std::fs::create_dir_all(&dir)?;
    let (name, text) = if common.format == Some(Format::Json) {
        ("convergence.json", export::to_json(&rows))
    } else {
        ("convergence.csv", export::to_csv(&rows))
    };
    std::fs::write(dir.join(name), &text)?;
    print!("{text}");
    Ok(())
}

fn dump(blocks: usize, residual: usize, file: Option<PathBuf>, common: &Common) -> Result<(), Failure> {
    let config = common.resolve()?;
    let (spec, _) = checks::demo_factorize(&Setup::from(&config), blocks, residual)?;
    let path = match file {
        Some(p) => p,
        None => {
            let dir = config.output_dir();
            std::fs::create_dir_all(&dir)?;
            dir.join("spec.bin")
        }
    };
    save_spec(&spec, &path)?;
    println!("wrote {} (D = {}, d = {})", path.display(), spec.source_dim(), spec.target_dim());
    Ok(())
}

fn load(path: &Path, common: &Common) -> Result<(), Failure> {
    let config = common.resolve()?;
    let spec: HomomorphismSpec64 = load_spec(path)?;
    let relations = check_relations(&spec, 1e-8);
    let dec = if relations.passes() { Some(factorize(&spec, 1e-8)?) } else { None };
    let value = json!({
        "lambda": spec.lambda(),
        "n": spec.n(),
        "max_degree": spec.scheme().max_degree(),
        "target_dim": spec.target_dim(),
        "relations": relations,
        "recovered": dec.as_ref().map(|d| json!({ "blocks": d.block_count(), "residual_dim": d.residual_dim() })),
    });
    write_json(&config.output_dir(), "spec_load.json", &value)?;
    if dec.is_some() {
        Ok(())
    } else {
        Err(Failure::Verification("relations fail".into()))
    }
}
