//! Command-line front end: solving, classification, certification, witness
//! generation and Monte Carlo experiments.
//!
//! Structured records are JSON, experiment tables are CSV. Errors go to
//! stderr as one JSON object with the error name and message. Exit codes:
//! 0 success, 1 invalid input, 2 degenerate or inconclusive numerical
//! condition.

use clap::{Parser, Subcommand};
use lateration::experiments::{region_map, ExperimentError, MonteCarloParams};
use lateration::model::{synthesize_times, GroundTruth, ModelError, Scenario};
use lateration::numkernel::{KernelError, Tolerance};
use lateration::solver::{solve, SolveError};
use lateration::uniqueness::{
    certify_uniqueness, classify_uniqueness, sample_hyperboloid_witness, Certificate,
    UniquenessError,
};
use serde::Deserialize;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "lateration", version, about = "Exact multilateration and uniqueness analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Relative singular-value cutoff for rank decisions.
    #[arg(long, global = true, default_value_t = 1e-9)]
    rank_tol: f64,
    /// Absolute threshold for scale-normalized classification decisions.
    #[arg(long, global = true, default_value_t = 1e-9)]
    class_tol: f64,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario file for all (bias, position) pairs.
    Solve {
        /// Scenario JSON: {"dimension", "satellites", "times"}.
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Synthesize arrival times for a known user position and bias.
    Synth {
        /// Satellite set JSON: {"dimension", "satellites"}.
        #[arg(long)]
        satellites: PathBuf,
        /// Ground truth JSON: {"user", "bias"}.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Inline user position (comma-separated), bias 0.
        #[arg(long, allow_hyphen_values = true)]
        user: Option<String>,
    },
    /// Classify uniqueness at a user position.
    Classify {
        #[arg(long)]
        satellites: PathBuf,
        /// User position, comma-separated.
        #[arg(long, allow_hyphen_values = true)]
        user: String,
    },
    /// Certify uniqueness for all user positions from the geometry alone.
    Certify {
        #[arg(long)]
        satellites: PathBuf,
    },
    /// Generate a configuration with two solutions.
    Witness {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Monte Carlo histogram of per-configuration uniqueness fractions.
    Montecarlo {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        configs: u64,
        #[arg(long)]
        users: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sampling box "lo,hi", shared by satellites and users.
        #[arg(long = "box", default_value = "-1,1", allow_hyphen_values = true)]
        sampling_box: String,
    },
    /// Case-label map over a planar grid of user positions.
    Regionmap {
        #[arg(long)]
        satellites: PathBuf,
        /// Bounding box "x_lo,x_hi,y_lo,y_hi".
        #[arg(long, allow_hyphen_values = true)]
        bbox: String,
        /// Grid points per axis.
        #[arg(long)]
        resolution: usize,
    },
}

struct Failure {
    name: String,
    message: String,
    code: u8,
}

impl Failure {
    fn invalid(name: &str, message: String) -> Self {
        Self { name: name.into(), message, code: 1 }
    }

    fn degenerate(name: &str, message: String) -> Self {
        Self { name: name.into(), message, code: 2 }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::invalid(e.name(), e.to_string())
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Model(m) => m.into(),
            SolveError::NoSolution { .. } | SolveError::DegenerateQuadratic { .. } => {
                Failure::degenerate(e.name(), e.to_string())
            }
        }
    }
}

impl From<UniquenessError> for Failure {
    fn from(e: UniquenessError) -> Self {
        match e {
            UniquenessError::Model(m) => m.into(),
            UniquenessError::WrongSatelliteCount { .. } => {
                Failure::invalid(e.name(), e.to_string())
            }
            _ => Failure::degenerate(e.name(), e.to_string()),
        }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Model(m) => m.into(),
            ExperimentError::Uniqueness(u) => u.into(),
            ExperimentError::BadParams(_) => Failure::invalid(e.name(), e.to_string()),
            ExperimentError::DegenerateSampling { .. } => {
                Failure::degenerate(e.name(), e.to_string())
            }
        }
    }
}

impl From<KernelError> for Failure {
    fn from(e: KernelError) -> Self {
        Failure::invalid("BadTolerance", e.to_string())
    }
}

/// Satellite-set document; ignores extra fields so witness output can be fed
/// back in directly.
#[derive(Deserialize)]
struct SatelliteDoc {
    dimension: usize,
    satellites: Vec<Vec<f64>>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::invalid("Io", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::invalid("Json", format!("{}: {e}", path.display())))
}

fn parse_vector(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|e| Failure::invalid("BadVector", format!("{part:?}: {e}")))
        })
        .collect()
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable output");
    text.push('\n');
    text
}

fn read_satellites(path: &PathBuf, tol: &Tolerance) -> Result<SatelliteDoc, Failure> {
    let doc: SatelliteDoc = read_json(path)?;
    // Structural validation up front; geometric checks happen per command.
    Scenario::new(doc.dimension, doc.satellites.clone(), vec![0.0; doc.satellites.len()])?
        .validate(tol)?;
    Ok(doc)
}

fn run(cli: Cli) -> Result<(String, u8), Failure> {
    let tol = Tolerance::new(cli.rank_tol, cli.class_tol)?;
    match cli.command {
        Command::Solve { input } => {
            let scenario: Scenario = read_json(&input)?;
            let report = solve(&scenario, &tol)?;
            Ok((to_json(&report), 0))
        }
        Command::Synth { satellites, input, user } => {
            let doc = read_satellites(&satellites, &tol)?;
            let ground = match (input, user) {
                (Some(path), _) => read_json::<GroundTruth>(&path)?,
                (None, Some(text)) => GroundTruth { user: parse_vector(&text)?, bias: 0.0 },
                (None, None) => {
                    return Err(Failure::invalid(
                        "BadArguments",
                        "synth needs --in (ground truth JSON) or --user".into(),
                    ))
                }
            };
            let scenario = synthesize_times(&doc.satellites, &ground, &tol)?;
            Ok((to_json(&scenario), 0))
        }
        Command::Classify { satellites, user } => {
            let doc = read_satellites(&satellites, &tol)?;
            let x = parse_vector(&user)?;
            if x.len() != doc.dimension {
                return Err(Failure::invalid(
                    "ShapeMismatch",
                    format!("user has {} coordinates, expected {}", x.len(), doc.dimension),
                ));
            }
            let report = classify_uniqueness(&doc.satellites, &x, &tol)?;
            Ok((to_json(&report), 0))
        }
        Command::Certify { satellites } => {
            let doc = read_satellites(&satellites, &tol)?;
            let cert = certify_uniqueness(&doc.satellites, &tol)?;
            let code = match &cert {
                Certificate::Inconclusive { .. } => 2,
                _ => 0,
            };
            Ok((to_json(&cert), code))
        }
        Command::Witness { n, m, seed } => {
            let (user, satellites) = sample_hyperboloid_witness(n, m, seed)?;
            let doc = serde_json::json!({
                "dimension": n,
                "user": user,
                "satellites": satellites,
            });
            Ok((to_json(&doc), 0))
        }
        Command::Montecarlo { n, m, configs, users, seed, sampling_box } => {
            let bounds = parse_vector(&sampling_box)?;
            if bounds.len() != 2 {
                return Err(Failure::invalid("BadArguments", "--box expects \"lo,hi\"".into()));
            }
            let mut params = MonteCarloParams::new(n, m, configs, users, seed);
            params.box_lo = bounds[0];
            params.box_hi = bounds[1];
            let histogram = lateration::monte_carlo(&params, &tol)?;
            Ok((histogram.to_csv(), 0))
        }
        Command::Regionmap { satellites, bbox, resolution } => {
            let doc = read_satellites(&satellites, &tol)?;
            let bounds = parse_vector(&bbox)?;
            if bounds.len() != 4 {
                return Err(Failure::invalid(
                    "BadArguments",
                    "--bbox expects \"x_lo,x_hi,y_lo,y_hi\"".into(),
                ));
            }
            let map = region_map(
                &doc.satellites,
                [bounds[0], bounds[1], bounds[2], bounds[3]],
                resolution,
                &tol,
            )?;
            Ok((map.to_csv(), 0))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.clone();
    match run(cli) {
        Ok((text, code)) => {
            match out {
                Some(path) => {
                    if let Err(e) = fs::write(&path, &text) {
                        eprintln!(
                            "{}",
                            serde_json::json!({"error": "Io", "message": e.to_string()})
                        );
                        return ExitCode::from(1);
                    }
                }
                None => print!("{text}"),
            }
            ExitCode::from(code)
        }
        Err(failure) => {
            eprintln!(
                "{}",
                serde_json::json!({"error": failure.name, "message": failure.message})
            );
            ExitCode::from(failure.code)
        }
    }
}
