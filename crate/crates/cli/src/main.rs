use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qfisher_cli::commands::{
    analyze_file, analyze_files, crb, landscape_rows, load_spec, parse_direction, parse_measurement, write_csv,
    LandscapeFamily, LandscapeRequest,
};
use qfisher_cli::report::DepthDocument;
use qfisher_cli::{AnalysisConfig, CliError, CliResult};

/// Entanglement detection from the quantum Fisher information landscape.
#[derive(Parser)]
#[command(name = "qfisher", version, about)]
struct Cli {
    /// JSON file with numerical settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the violation tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Largest register size accepted.
    #[arg(long, global = true)]
    max_qubits: Option<u32>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full criteria report for one or more state files.
    Analyze {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Point cloud of Fisher triples as CSV.
    Landscape {
        /// landmarks, d_plane, s_fill, d_fill or noise_line.
        family: String,
        #[arg(short = 'n', long = "qubits")]
        n_qubits: usize,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Base state for noise_line.
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Classical versus quantum Fisher information for a phase rotation.
    Crb {
        file: PathBuf,
        /// x, y, z or three components a,b,c.
        #[arg(long, default_value = "z")]
        direction: String,
        /// parity-AXIS, local-AXIS, spin, random or random:SEED.
        #[arg(long, default_value = "parity-x")]
        measurement: String,
        #[arg(long)]
        theta: Option<f64>,
    },
    /// Entanglement depth certificate.
    Depth { file: PathBuf },
}

fn config(cli: &Cli) -> CliResult<AnalysisConfig> {
    let mut cfg = match &cli.config {
        Some(p) => AnalysisConfig::load(p)?,
        None => AnalysisConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.tol {
        cfg.tol_violation = t;
    }
    if let Some(n) = cli.max_qubits {
        cfg.set_max_qubits(n)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn sink(out: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::io(p, e))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_json<T: serde::Serialize>(value: &T, out: Option<&Path>) -> CliResult<()> {
    let mut w = sink(out)?;
    let text = serde_json::to_string_pretty(value).expect("documents serialize");
    match writeln!(w, "{text}").and_then(|_| w.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(CliError::validation(e.to_string())),
        _ => Ok(()),
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let cfg = config(cli)?;
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Analyze { files } => {
            let docs = analyze_files(files, &cfg).into_iter().collect::<CliResult<Vec<_>>>()?;
            if docs.len() == 1 {
                emit_json(&docs[0], out)
            } else {
                emit_json(&docs, out)
            }
        }
        Command::Landscape { family, n_qubits, count, state } => {
            let base = state.as_deref().map(load_spec).transpose()?;
            let req = LandscapeRequest {
                family: family.parse::<LandscapeFamily>()?,
                n_qubits: *n_qubits,
                count: *count,
                seed: cfg.seed,
                base,
            };
            let rows = landscape_rows(&req, &cfg)?;
            write_csv(&rows, sink(out)?)
        }
        Command::Crb { file, direction, measurement, theta } => {
            let spec = load_spec(file)?;
            let dir = parse_direction(direction)?;
            let meas = parse_measurement(measurement, dir, cfg.seed)?;
            let doc = crb(spec, dir, meas, *theta, &cfg).map_err(|e| e.at(file))?;
            emit_json(&doc, out)
        }
        Command::Depth { file } => {
            let doc = analyze_file(file, &cfg)?;
            emit_json(&DepthDocument::from(&doc), out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::new(qfisher_cli::ErrorKind::Parse, e.to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
