//! TOML run configuration: parsing, validation and conversion to the core types.
//!
//! Every section and key is optional; absent values take the defaults shown by
//! `nrcg-battery config`. Unknown keys are rejected and all of them are listed.

use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use nrcg_battery::scan::DEFAULT_ROOTS;
use nrcg_battery::{CircuitCase, Metric, ProtocolConfig, QubitHamiltonian, QubitInit, ScanGrid, SystemSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed TOML: {0}")]
    Syntax(String),
    #[error("unknown keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),
    #[error("{field} = {value} is outside {range}")]
    Range {
        field: String,
        value: String,
        range: &'static str,
    },
    #[error("missing required field {0}")]
    Missing(String),
    #[error("{field}: {reason}")]
    Invalid { field: String, reason: String },
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QubitKind {
    Thermal,
    Pure,
    Excited,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitSection {
    pub kind: QubitKind,
    pub eps1: f64,
    pub eps2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_excited: Option<f64>,
}

impl QubitSection {
    fn thermal(kt: f64) -> Self {
        Self {
            kind: QubitKind::Thermal,
            eps1: 0.0,
            eps2: 1.0,
            kt: Some(kt),
            theta: None,
            phi: None,
            p_excited: None,
        }
    }

    fn pure(theta: f64, phi: f64) -> Self {
        Self {
            kind: QubitKind::Pure,
            theta: Some(theta),
            phi: Some(phi),
            kt: None,
            ..Self::thermal(0.0)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSection {
    pub n_qubits: usize,
    pub case: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GatesSection {
    pub root: usize,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitsSection {
    pub a: QubitSection,
    pub b: QubitSection,
    pub c: QubitSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSection {
    pub metric: String,
    pub theta_points: usize,
    pub phi_points: usize,
    pub p_points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_fixed: Option<f64>,
    pub roots: Vec<usize>,
}

/// Everything a subcommand needs, as written in (or defaulted from) a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub system: SystemSection,
    pub gates: GatesSection,
    pub qubit: QubitsSection,
    pub scan: ScanSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            system: SystemSection { n_qubits: 3, case: 1 },
            gates: GatesSection {
                root: 15,
                iterations: 30,
            },
            qubit: QubitsSection {
                a: QubitSection::thermal(4.0),
                b: QubitSection::pure(PI / 2.0, PI),
                c: QubitSection::thermal(0.4),
            },
            scan: ScanSection {
                metric: Metric::Ergotropy.name().to_string(),
                theta_points: 101,
                phi_points: 101,
                p_points: 51,
                phi_fixed: None,
                roots: DEFAULT_ROOTS.to_vec(),
            },
        }
    }
}

const SECTION_KEYS: &[(&str, &[&str])] = &[
    ("system", &["n_qubits", "case"]),
    ("gates", &["root", "iterations"]),
    (
        "scan",
        &["metric", "theta_points", "phi_points", "p_points", "phi_fixed", "roots"],
    ),
];
const QUBITS: &[&str] = &["a", "b", "c"];
const QUBIT_KEYS: &[&str] = &["kind", "eps1", "eps2", "kt", "theta", "phi", "p_excited"];

fn check_keys(prefix: &str, value: &toml::Value, allowed: &[&str], unknown: &mut Vec<String>) {
    match value.as_table() {
        Some(t) => unknown.extend(
            t.keys()
                .filter(|k| !allowed.contains(&k.as_str()))
                .map(|k| format!("{prefix}.{k}")),
        ),
        None => unknown.push(format!("{prefix} (expected a table)")),
    }
}

fn unknown_keys(table: &toml::Table) -> Vec<String> {
    let mut unknown = Vec::new();
    for (key, value) in table {
        if key == "qubit" {
            check_keys("qubit", value, QUBITS, &mut unknown);
            if let Some(qubits) = value.as_table() {
                for (name, q) in qubits.iter().filter(|(n, _)| QUBITS.contains(&n.as_str())) {
                    check_keys(&format!("qubit.{name}"), q, QUBIT_KEYS, &mut unknown);
                }
            }
        } else if let Some((_, keys)) = SECTION_KEYS.iter().find(|(s, _)| s == key) {
            check_keys(key, value, keys, &mut unknown);
        } else {
            unknown.push(key.clone());
        }
    }
    unknown
}

/// Overlays the keys present in `src` onto `dst`, section by section.
fn merge(dst: &mut toml::Table, src: &toml::Table) {
    for (key, value) in src {
        match (dst.get_mut(key), value) {
            (Some(toml::Value::Table(d)), toml::Value::Table(s)) => merge(d, s),
            _ => {
                dst.insert(key.clone(), value.clone());
            }
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
        let unknown = unknown_keys(&table);
        if !unknown.is_empty() {
            return Err(ConfigError::UnknownKeys(unknown));
        }
        let mut merged = toml::Table::try_from(RunConfig::default()).expect("defaults serialize");
        // A qubit whose kind is given starts from an empty section, so its parameters must be given too.
        if let Some(qubits) = table.get("qubit").and_then(|q| q.as_table()) {
            for (name, q) in qubits {
                if q.get("kind").is_some() {
                    let section = merged["qubit"][name.as_str()].as_table_mut().expect("qubit table");
                    section.retain(|k, _| k == "eps1" || k == "eps2");
                }
            }
        }
        merge(&mut merged, &table);
        let config: RunConfig = toml::Value::Table(merged)
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Syntax(e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=3).contains(&self.system.n_qubits) {
            return Err(range("system.n_qubits", self.system.n_qubits, "{2, 3}"));
        }
        if CircuitCase::from_number(self.system.case).is_none() {
            return Err(range("system.case", self.system.case, "{1, 2, 3}"));
        }
        if self.gates.root == 0 {
            return Err(range("gates.root", 0, "[1, inf)"));
        }
        for (name, q) in [("a", &self.qubit.a), ("b", &self.qubit.b), ("c", &self.qubit.c)] {
            validate_qubit(&format!("qubit.{name}"), q)?;
        }
        let s = &self.scan;
        s.metric.parse::<Metric>().map_err(|e| ConfigError::Invalid {
            field: "scan.metric".into(),
            reason: e.to_string(),
        })?;
        for (field, n) in [
            ("scan.theta_points", s.theta_points),
            ("scan.phi_points", s.phi_points),
            ("scan.p_points", s.p_points),
        ] {
            if n == 0 {
                return Err(range(field, n, "[1, inf)"));
            }
        }
        if let Some(phi) = s.phi_fixed {
            if !(0.0..TAU).contains(&phi) {
                return Err(range("scan.phi_fixed", phi, "[0, 2pi)"));
            }
        }
        if s.roots.is_empty() {
            return Err(ConfigError::Invalid {
                field: "scan.roots".into(),
                reason: "needs at least one root".into(),
            });
        }
        if s.roots.contains(&0) {
            return Err(range("scan.roots", 0, "[1, inf)"));
        }
        Ok(())
    }

    pub fn case(&self) -> CircuitCase {
        CircuitCase::from_number(self.system.case).expect("validated case")
    }

    pub fn metric(&self) -> Metric {
        self.scan.metric.parse().expect("validated metric")
    }

    pub fn protocol(&self) -> Result<ProtocolConfig<f64>> {
        self.validate()?;
        let sections = [&self.qubit.a, &self.qubit.b, &self.qubit.c];
        let qubits = sections[..self.system.n_qubits]
            .iter()
            .map(|q| {
                (
                    QubitHamiltonian {
                        eps1: q.eps1,
                        eps2: q.eps2,
                    },
                    qubit_init(q),
                )
            })
            .collect();
        let spec = SystemSpec::new(qubits).map_err(|e| ConfigError::Invalid {
            field: "qubit".into(),
            reason: e.to_string(),
        })?;
        ProtocolConfig::new(spec, self.case(), self.gates.root, self.gates.iterations).map_err(|e| {
            ConfigError::Invalid {
                field: "gates.root".into(),
                reason: e.to_string(),
            }
        })
    }

    pub fn grid(&self) -> ScanGrid<f64> {
        ScanGrid {
            theta_points: self.scan.theta_points,
            phi_points: self.scan.phi_points,
            phi_fixed: self.scan.phi_fixed,
            p_points: self.scan.p_points,
        }
    }
}

fn range(field: &str, value: impl ToString, range: &'static str) -> ConfigError {
    ConfigError::Range {
        field: field.to_string(),
        value: value.to_string(),
        range,
    }
}

fn validate_qubit(prefix: &str, q: &QubitSection) -> Result<()> {
    let field = |k: &str| format!("{prefix}.{k}");
    if !(q.eps1.is_finite() && q.eps2.is_finite()) || q.eps1 > q.eps2 {
        return Err(range(&field("eps1"), q.eps1, "(-inf, eps2]"));
    }
    let (needed, kind): (&[&str], &str) = match q.kind {
        QubitKind::Thermal => (&["kt"], "thermal"),
        QubitKind::Pure => (&["theta", "phi"], "pure"),
        QubitKind::Excited => (&["p_excited"], "excited"),
    };
    let given: BTreeSet<&str> = [
        ("kt", q.kt),
        ("theta", q.theta),
        ("phi", q.phi),
        ("p_excited", q.p_excited),
    ]
    .into_iter()
    .filter(|(_, v)| v.is_some())
    .map(|(k, _)| k)
    .collect();
    if let Some(missing) = needed.iter().find(|k| !given.contains(**k)) {
        return Err(ConfigError::Missing(field(missing)));
    }
    if let Some(extra) = given.iter().find(|k| !needed.contains(k)) {
        return Err(ConfigError::Invalid {
            field: field(extra),
            reason: format!("does not apply to kind '{kind}'"),
        });
    }
    let check = |k: &str, v: f64, ok: bool, r: &'static str| if ok { Ok(()) } else { Err(range(&field(k), v, r)) };
    match q.kind {
        QubitKind::Thermal => {
            let kt = q.kt.unwrap_or_default();
            check("kt", kt, kt >= 0.0, "[0, inf]")
        }
        QubitKind::Pure => {
            let (theta, phi) = (q.theta.unwrap_or_default(), q.phi.unwrap_or_default());
            check("theta", theta, (0.0..=PI).contains(&theta), "[0, pi]")?;
            check("phi", phi, (0.0..TAU).contains(&phi), "[0, 2pi)")
        }
        QubitKind::Excited => {
            let p = q.p_excited.unwrap_or_default();
            check("p_excited", p, (0.0..=0.5).contains(&p), "[0, 1/2]")
        }
    }
}

fn qubit_init(q: &QubitSection) -> QubitInit<f64> {
    match q.kind {
        QubitKind::Thermal => QubitInit::Thermal {
            kt: q.kt.unwrap_or_default(),
        },
        QubitKind::Pure => QubitInit::Pure {
            theta: q.theta.unwrap_or_default(),
            phi: q.phi.unwrap_or_default(),
        },
        QubitKind::Excited => QubitInit::ExcitedPopulation {
            p: q.p_excited.unwrap_or_default(),
        },
    }
}

/// Command-line values that override the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub case: Option<u8>,
    pub qubits: Option<usize>,
    pub root: Option<usize>,
    pub iterations: Option<usize>,
    pub theta: Option<f64>,
    pub phi: Option<f64>,
    pub metric: Option<String>,
}

impl Overrides {
    /// Applies the overrides and re-validates, so errors still name the config field.
    ///
    /// `--theta` or `--phi` makes qubit B pure, keeping whichever angle was not given.
    pub fn apply(&self, config: &mut RunConfig) -> Result<()> {
        if let Some(case) = self.case {
            config.system.case = case;
        }
        if let Some(n) = self.qubits {
            config.system.n_qubits = n;
        }
        if let Some(root) = self.root {
            config.gates.root = root;
        }
        if let Some(m) = self.iterations {
            config.gates.iterations = m;
        }
        if self.theta.is_some() || self.phi.is_some() {
            let b = &mut config.qubit.b;
            let (theta, phi) = match b.kind {
                QubitKind::Pure => (b.theta, b.phi),
                _ => (None, None),
            };
            *b = QubitSection {
                eps1: b.eps1,
                eps2: b.eps2,
                ..QubitSection::pure(self.theta.or(theta).unwrap_or(PI / 2.0), self.phi.or(phi).unwrap_or(PI))
            };
        }
        if let Some(metric) = &self.metric {
            config.scan.metric = metric.clone();
        }
        config.validate()
    }
}
