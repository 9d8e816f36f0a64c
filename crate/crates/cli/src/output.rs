//! CSV and JSON emitters and the run manifest written next to every data file.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use nrcg_battery::protocol::gate_sequence;
use nrcg_battery::scan::{ThermalComparison, ThermalComparisonRow};
use nrcg_battery::{CircuitCase, MetricsRecord, ProtocolConfig, QubitInit, ScanResult, Trajectory};

use crate::config::RunConfig;

/// Column contract for trajectories and scans.
pub const CSV_HEADER: &str =
    "case,n_qubits,root_n,theta,phi,iteration,energy,ergotropy,delta_w,ratio,fom,power_work,power_ergotropy";

/// Column contract for `compare-thermal`.
pub const THERMAL_CSV_HEADER: &str = "n_qubits,case,b_preparation,metric,maximum,theta,phi,p_excited,iteration";

pub const SCHEMA_VERSION: u32 = 1;

/// `x` with 12 significant digits, trailing zeros dropped.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        trim_zeros(&format!("{:.*}", (11 - exp) as usize, x)).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_sig).unwrap_or_default()
}

/// One output row: the run it came from, B's preparation and the metrics record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub case: u8,
    pub n_qubits: usize,
    pub root_n: usize,
    pub theta: Option<f64>,
    pub phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_excited: Option<f64>,
    pub iteration: usize,
    pub energy: f64,
    pub ergotropy: f64,
    pub delta_w: f64,
    pub ratio: f64,
    pub fom: f64,
    pub power_work: Option<f64>,
    pub power_ergotropy: Option<f64>,
}

impl Row {
    pub fn new(config: &ProtocolConfig<f64>, b: QubitInit<f64>, r: &MetricsRecord<f64>) -> Self {
        let (theta, phi, p_excited) = match b {
            QubitInit::Pure { theta, phi } => (Some(theta), Some(phi), None),
            QubitInit::ExcitedPopulation { p } => (None, None, Some(p)),
            QubitInit::Thermal { .. } => (None, None, None),
        };
        Self {
            case: config.case.number(),
            n_qubits: config.spec.n_qubits(),
            root_n: config.root,
            theta,
            phi,
            p_excited,
            iteration: r.iteration,
            energy: r.energy,
            ergotropy: r.ergotropy,
            delta_w: r.ergotropy_variation,
            ratio: r.ergotropy_ratio,
            fom: r.figure_of_merit,
            power_work: r.power_work,
            power_ergotropy: r.power_ergotropy,
        }
    }

    fn csv_fields(&self) -> Vec<String> {
        vec![
            self.case.to_string(),
            self.n_qubits.to_string(),
            self.root_n.to_string(),
            opt(self.theta),
            opt(self.phi),
            self.iteration.to_string(),
            format_sig(self.energy),
            format_sig(self.ergotropy),
            format_sig(self.delta_w),
            format_sig(self.ratio),
            format_sig(self.fom),
            opt(self.power_work),
            opt(self.power_ergotropy),
        ]
    }
}

pub fn trajectory_rows(t: &Trajectory<f64>) -> Vec<Row> {
    let b = t.config.spec.qubits()[1].1;
    t.records.iter().map(|r| Row::new(&t.config, b, r)).collect()
}

pub fn scan_rows(s: &ScanResult<f64>) -> Vec<Row> {
    s.rows.iter().map(|r| Row::new(&s.config, r.b, &r.record)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalRow {
    pub n_qubits: usize,
    pub case: u8,
    pub b_preparation: String,
    pub metric: String,
    pub maximum: f64,
    pub theta: Option<f64>,
    pub phi: Option<f64>,
    pub p_excited: Option<f64>,
    pub iteration: usize,
}

impl From<&ThermalComparisonRow<f64>> for ThermalRow {
    fn from(r: &ThermalComparisonRow<f64>) -> Self {
        Self {
            n_qubits: r.n_qubits,
            case: r.case.number(),
            b_preparation: r.preparation.name().into(),
            metric: r.metric.name().into(),
            maximum: r.maximum.value,
            theta: r.maximum.theta(),
            phi: r.maximum.phi(),
            p_excited: r.maximum.p_excited(),
            iteration: r.maximum.iteration,
        }
    }
}

pub fn thermal_rows(t: &ThermalComparison<f64>) -> Vec<ThermalRow> {
    t.rows.iter().map(ThermalRow::from).collect()
}

fn csv_text(header: &str, records: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(header.split(',')).expect("in-memory write");
    for r in records {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

pub fn csv_string(rows: &[Row]) -> String {
    csv_text(CSV_HEADER, rows.iter().map(Row::csv_fields))
}

pub fn thermal_csv_string(rows: &[ThermalRow]) -> String {
    csv_text(
        THERMAL_CSV_HEADER,
        rows.iter().map(|r| {
            vec![
                r.n_qubits.to_string(),
                r.case.to_string(),
                r.b_preparation.clone(),
                r.metric.clone(),
                format_sig(r.maximum),
                opt(r.theta),
                opt(r.phi),
                opt(r.p_excited),
                r.iteration.to_string(),
            ]
        }),
    )
}

pub fn emit_csv(rows: &[Row], path: &Path) -> std::io::Result<()> {
    fs::write(path, csv_string(rows))
}

pub fn emit_thermal_csv(rows: &[ThermalRow], path: &Path) -> std::io::Result<()> {
    fs::write(path, thermal_csv_string(rows))
}

/// One gate of the sequence a run actually used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateEntry {
    pub n_qubits: usize,
    pub case: u8,
    pub root_n: usize,
    /// Position within one iteration; 0 acts first.
    pub order: usize,
    pub gate: String,
}

pub fn gate_table(n_qubits: usize, case: CircuitCase, roots: &[usize]) -> Vec<GateEntry> {
    roots
        .iter()
        .flat_map(|&root| {
            gate_sequence(case, n_qubits, root)
                .unwrap_or_default()
                .into_iter()
                .enumerate()
                .map(move |(order, g)| GateEntry {
                    n_qubits,
                    case: case.number(),
                    root_n: root,
                    order,
                    gate: g.to_string(),
                })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub command: String,
    pub timestamp: String,
    pub config: RunConfig,
    pub provenance: Vec<GateEntry>,
    /// Quantities chosen during the run, such as the selected `theta_star`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub derived: BTreeMap<String, f64>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config: &RunConfig, provenance: Vec<GateEntry>) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            config: config.clone(),
            provenance,
            derived: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }
}

/// `<data path>.manifest.json`.
pub fn manifest_path(data: &Path) -> PathBuf {
    let mut name = data.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JsonAxis {
    pub name: String,
    pub coords: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JsonData {
    Scan {
        metric: String,
        axes: Vec<JsonAxis>,
        values: Vec<Option<f64>>,
        rows: Vec<Row>,
    },
    Trajectories {
        rows: Vec<Row>,
    },
    ThermalComparison {
        rows: Vec<ThermalRow>,
    },
}

impl JsonData {
    pub fn scan(s: &ScanResult<f64>) -> Self {
        JsonData::Scan {
            metric: s.metric.name().into(),
            axes: s
                .axes
                .iter()
                .map(|a| JsonAxis {
                    name: a.kind.name().into(),
                    coords: a.coords.clone(),
                })
                .collect(),
            values: s.values.clone(),
            rows: scan_rows(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JsonDocument {
    pub schema_version: u32,
    pub manifest: RunManifest,
    #[serde(flatten)]
    pub data: JsonData,
}

pub fn emit_json(doc: &JsonDocument, path: &Path) -> std::io::Result<()> {
    let mut f = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, doc)?;
    f.write_all(b"\n")
}

pub fn emit_manifest(manifest: &RunManifest, path: &Path) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    fs::write(path, text)
}
