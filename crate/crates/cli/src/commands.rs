//! Subcommand implementations shared by the binary and its tests.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Subcommand, ValueEnum};

use nrcg_battery::scan::{
    cnot_comparison, convergence_study, scan_theta_iterations, scan_theta_phi_max, thermal_comparison,
};
use nrcg_battery::{protocol, CircuitCase, Metric, ScanResult};

use crate::config::{Overrides, RunConfig};
use crate::heatmap::ascii_heatmap;
use crate::output::{
    csv_string, emit_csv, emit_json, emit_manifest, emit_thermal_csv, gate_table, manifest_path, scan_rows,
    thermal_csv_string, thermal_rows, trajectory_rows, JsonData, JsonDocument, Row, RunManifest, SCHEMA_VERSION,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, Default, Args)]
pub struct CommonArgs {
    /// TOML configuration file; missing keys take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Circuit case.
    #[arg(long, global = true, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub case: Option<u8>,
    /// Register size.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(2..=3))]
    pub qubits: Option<u64>,
    /// Gate root N.
    #[arg(long, global = true)]
    pub root: Option<usize>,
    /// Iterations M.
    #[arg(long, global = true)]
    pub iterations: Option<usize>,
    /// Polar angle of qubit B (makes B pure).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Phase of qubit B (makes B pure).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    /// ergotropy, delta_w, ratio, fom, power_work or power_ergotropy.
    #[arg(long, global = true)]
    pub metric: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Print an ASCII heatmap of two-axis results.
    #[arg(long, global = true)]
    pub preview: bool,
    /// Worker threads for scans; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// One trajectory.
    Run,
    /// Metric over theta x iteration at one phi.
    Scan,
    /// Per (theta, phi) maximum of the metric over iterations.
    Scan2d,
    /// Nth-root and full-CNOT trajectories at the best theta.
    CompareCnot,
    /// Pure versus thermal qubit B maxima for every size and case.
    CompareThermal,
    /// Two-cycle trajectories for each root in scan.roots.
    Converge,
    /// Print the effective configuration as TOML.
    Config,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::Scan => "scan",
            Command::Scan2d => "scan2d",
            Command::CompareCnot => "compare-cnot",
            Command::CompareThermal => "compare-thermal",
            Command::Converge => "converge",
            Command::Config => "config",
        }
    }
}

/// Failure tagged with the stage it happened in.
#[derive(Debug)]
pub struct StageError {
    pub stage: &'static str,
    pub error: anyhow::Error,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} failed: {:#}", self.stage, self.error)
    }
}

impl std::error::Error for StageError {}

trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T, StageError>;
}

impl<T, E: Into<anyhow::Error>> Stage<T> for Result<T, E> {
    fn stage(self, stage: &'static str) -> Result<T, StageError> {
        self.map_err(|e| StageError { stage, error: e.into() })
    }
}

pub fn load_config(args: &CommonArgs) -> anyhow::Result<RunConfig> {
    let mut config = match &args.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    Overrides {
        case: args.case,
        qubits: args.qubits.map(|n| n as usize),
        root: args.root,
        iterations: args.iterations,
        theta: args.theta,
        phi: args.phi,
        metric: args.metric.clone(),
    }
    .apply(&mut config)?;
    Ok(config)
}

/// What a subcommand produced, before serialization.
enum Product {
    Rows(Vec<Row>),
    Scan(ScanResult<f64>),
    Thermal(Vec<crate::output::ThermalRow>),
}

pub fn execute(
    command: &Command,
    args: &CommonArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), StageError> {
    let config = load_config(args).stage("config")?;
    if let Command::Config = command {
        return stdout.write_all(config.to_toml_string().as_bytes()).stage("write");
    }
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = args.threads {
            if n == 0 {
                return Err(anyhow::anyhow!("--threads must be at least 1")).stage("threads");
            }
            b = b.num_threads(n);
        }
        b.build().stage("threads")?
    };
    let protocol_config = config.protocol().stage("config")?;
    let grid = config.grid();
    let metric = config.metric();
    let (n, case) = (config.system.n_qubits, config.case());
    let mut manifest = RunManifest::new(command.name(), &config, gate_table(n, case, &[config.gates.root]));

    // Summary lines are collected here and printed once the pool is done.
    let mut notes: Vec<String> = Vec::new();
    let product = pool
        .install(|| -> anyhow::Result<Product> {
            Ok(match command {
                Command::Run => Product::Rows(trajectory_rows(&protocol::run(&protocol_config)?)),
                Command::Scan => Product::Scan(scan_theta_iterations(&protocol_config, &grid, metric)?),
                Command::Scan2d => Product::Scan(scan_theta_phi_max(&protocol_config, &grid, metric)?),
                Command::CompareCnot => {
                    let c = cnot_comparison(&protocol_config, &grid)?;
                    manifest.provenance = gate_table(n, case, &[config.gates.root, 1]);
                    manifest.derived.insert("theta_star".into(), c.theta_star);
                    manifest.derived.insert("phi".into(), c.phi);
                    notes.push(format!("theta* = {:.6} at phi = {:.6}", c.theta_star, c.phi));
                    let mut rows = trajectory_rows(&c.pair.nrcg);
                    rows.extend(trajectory_rows(&c.pair.cnot));
                    Product::Rows(rows)
                }
                Command::CompareThermal => {
                    let t = thermal_comparison(&protocol_config, &grid)?;
                    manifest.provenance = [2, 3]
                        .iter()
                        .flat_map(|&n| CircuitCase::ALL.map(|c| gate_table(n, c, &[config.gates.root])))
                        .flatten()
                        .collect();
                    for n in [2, 3] {
                        for c in CircuitCase::ALL {
                            if let Some(adv) = t.advantage(n, c, Metric::Ergotropy) {
                                notes.push(format!("{n} qubits {c}: pure/thermal W_max = {adv:.3}"));
                            }
                        }
                    }
                    Product::Thermal(thermal_rows(&t))
                }
                Command::Converge => {
                    let s = convergence_study(&protocol_config, &config.scan.roots)?;
                    manifest.provenance = gate_table(n, case, &config.scan.roots);
                    for (root, jump) in s.roots().iter().zip(s.max_jumps()) {
                        notes.push(format!("N = {root:>3}: max ergotropy step {jump:.6}"));
                    }
                    Product::Rows(s.runs.iter().flat_map(trajectory_rows).collect())
                }
                Command::Config => unreachable!("handled above"),
            })
        })
        .stage("simulate")?;
    for note in notes {
        let _ = writeln!(stderr, "{note}");
    }

    if let Product::Scan(s) = &product {
        if let Some(m) = s.maximum() {
            let _ = writeln!(
                stderr,
                "max {} = {:.6} at theta = {:.4}, phi = {:.4}, iteration {}",
                s.metric,
                m.value,
                m.theta().unwrap_or(f64::NAN),
                m.phi().unwrap_or(f64::NAN),
                m.iteration
            );
        }
    }

    match &args.out {
        Some(path) => write_outputs(&product, path, args.format, &mut manifest).stage("write")?,
        None => write_stdout(&product, args.format, &manifest, stdout).stage("write")?,
    }

    if args.preview {
        match &product {
            Product::Scan(s) => {
                let text = ascii_heatmap(s).stage("preview")?;
                stdout.write_all(text.as_bytes()).stage("preview")?;
            }
            _ => {
                let _ = writeln!(stderr, "preview skipped: {} has no two-axis result", command.name());
            }
        }
    }
    Ok(())
}

fn json_data(product: &Product) -> JsonData {
    match product {
        Product::Rows(rows) => JsonData::Trajectories { rows: rows.clone() },
        Product::Scan(s) => JsonData::scan(s),
        Product::Thermal(rows) => JsonData::ThermalComparison { rows: rows.clone() },
    }
}

fn write_outputs(product: &Product, path: &Path, format: Format, manifest: &mut RunManifest) -> anyhow::Result<()> {
    let display = path.display().to_string();
    match format {
        Format::Csv => {
            match product {
                Product::Rows(rows) => emit_csv(rows, path),
                Product::Scan(s) => emit_csv(&scan_rows(s), path),
                Product::Thermal(rows) => emit_thermal_csv(rows, path),
            }
            .with_context(|| format!("writing {display}"))?;
            let mpath = manifest_path(path);
            manifest.outputs = vec![display, mpath.display().to_string()];
            emit_manifest(manifest, &mpath).with_context(|| format!("writing {}", mpath.display()))?;
        }
        Format::Json => {
            manifest.outputs = vec![display.clone()];
            let doc = JsonDocument {
                schema_version: SCHEMA_VERSION,
                manifest: manifest.clone(),
                data: json_data(product),
            };
            emit_json(&doc, path).with_context(|| format!("writing {display}"))?;
        }
    }
    Ok(())
}

fn write_stdout(product: &Product, format: Format, manifest: &RunManifest, out: &mut dyn Write) -> anyhow::Result<()> {
    match (format, product) {
        (Format::Csv, Product::Rows(rows)) => out.write_all(csv_string(rows).as_bytes())?,
        (Format::Csv, Product::Scan(s)) => out.write_all(csv_string(&scan_rows(s)).as_bytes())?,
        (Format::Csv, Product::Thermal(rows)) => out.write_all(thermal_csv_string(rows).as_bytes())?,
        (Format::Json, _) => {
            let doc = JsonDocument {
                schema_version: SCHEMA_VERSION,
                manifest: manifest.clone(),
                data: json_data(product),
            };
            serde_json::to_writer_pretty(&mut *out, &doc)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}
