//! Circuit cases and the iterated evolution `ρ -> U ρ U†`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gates::{iteration_unitary, GateSpec};
use crate::matcore::Matrix;
use crate::metrics::{evaluate_state, MetricsRecord};
use crate::scalar::Real;
use crate::states::{system_energies, system_state, SystemSpec};

/// Which controlled-gate blocks make up one iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CircuitCase {
    /// Gates point away from A: A never acts as a target.
    Case1,
    /// Case 1 with control and target swapped.
    Case2,
    /// Both orientations on every neighbouring pair.
    Case3,
}

impl CircuitCase {
    pub const ALL: [CircuitCase; 3] = [CircuitCase::Case1, CircuitCase::Case2, CircuitCase::Case3];

    pub fn number(self) -> u8 {
        match self {
            CircuitCase::Case1 => 1,
            CircuitCase::Case2 => 2,
            CircuitCase::Case3 => 3,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(CircuitCase::Case1),
            2 => Some(CircuitCase::Case2),
            3 => Some(CircuitCase::Case3),
            _ => None,
        }
    }
}

impl fmt::Display for CircuitCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "case{}", self.number())
    }
}

impl FromStr for CircuitCase {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let digits = s.trim().trim_start_matches("case");
        digits
            .parse::<u8>()
            .ok()
            .and_then(CircuitCase::from_number)
            .ok_or_else(|| format!("unknown circuit case '{s}' (expected 1, 2 or 3)"))
    }
}

/// Ordered gate list for one iteration; the first gate acts first.
///
/// | qubits | case 1       | case 2       | case 3                   |
/// |--------|--------------|--------------|--------------------------|
/// | 2      | A→B          | B→A          | A→B, B→A                 |
/// | 3      | A→B, B→C     | B→A, C→B     | A→B, B→A, B→C, C→B       |
pub fn gate_sequence(case: CircuitCase, n_qubits: usize, root: usize) -> Result<Vec<GateSpec>> {
    const A: usize = 0;
    const B: usize = 1;
    const C: usize = 2;
    let pairs: &[(usize, usize)] = match (n_qubits, case) {
        (2, CircuitCase::Case1) => &[(A, B)],
        (2, CircuitCase::Case2) => &[(B, A)],
        (2, CircuitCase::Case3) => &[(A, B), (B, A)],
        (3, CircuitCase::Case1) => &[(A, B), (B, C)],
        (3, CircuitCase::Case2) => &[(B, A), (C, B)],
        (3, CircuitCase::Case3) => &[(A, B), (B, A), (B, C), (C, B)],
        _ => {
            return Err(Error::InvalidSystem(format!(
                "register must hold 2 or 3 qubits, got {n_qubits}"
            )))
        }
    };
    if root == 0 {
        return Err(Error::InvalidGate("root N must be at least 1".into()));
    }
    Ok(pairs
        .iter()
        .map(|&(control, target)| GateSpec::new(control, target, root))
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolConfig<T> {
    pub spec: SystemSpec<T>,
    pub case: CircuitCase,
    /// Gate root N; N iterations of a single-pair circuit compose to one full CNOT.
    pub root: usize,
    /// Number of iterations M.
    pub iterations: usize,
}

impl<T: Real> ProtocolConfig<T> {
    pub fn new(spec: SystemSpec<T>, case: CircuitCase, root: usize, iterations: usize) -> Result<Self> {
        if root == 0 {
            return Err(Error::InvalidGate("root N must be at least 1".into()));
        }
        Ok(Self {
            spec,
            case,
            root,
            iterations,
        })
    }

    pub fn gates(&self) -> Result<Vec<GateSpec>> {
        gate_sequence(self.case, self.spec.n_qubits(), self.root)
    }

    pub fn with_root(&self, root: usize, iterations: usize) -> Self {
        Self {
            root,
            iterations,
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    /// `records[α]` describes the state after `α` iterations.
    pub records: Vec<MetricsRecord<T>>,
    pub final_state: Matrix<T>,
    pub config: ProtocolConfig<T>,
    pub gates: Vec<GateSpec>,
}

impl<T: Real> Trajectory<T> {
    pub fn ergotropies(&self) -> Vec<T> {
        self.records.iter().map(|r| r.ergotropy).collect()
    }
}

/// Runs the protocol, handing each iteration's state and record to `observe`.
pub fn run_observed<T, F>(config: &ProtocolConfig<T>, mut observe: F) -> Result<Trajectory<T>>
where
    T: Real,
    F: FnMut(usize, &Matrix<T>, &MetricsRecord<T>),
{
    let gates = config.gates()?;
    let n = config.spec.n_qubits();
    let unitary = iteration_unitary::<T>(&gates, n)?;
    let unitary_dag = unitary.adjoint();
    let energies = system_energies(&config.spec);
    let tol = T::lit(T::DRIFT_TOL);

    let mut rho = system_state(&config.spec)?;
    let mut records = Vec::with_capacity(config.iterations + 1);

    let first = checked_evaluation(&rho, &energies, tol, 0)?;
    let initial = MetricsRecord::initial(first.0, first.1);
    observe(0, &rho, &initial);
    records.push(initial);

    for alpha in 1..=config.iterations {
        rho = unitary.matmul(&rho)?.matmul(&unitary_dag)?;
        let (energy, ergotropy) = checked_evaluation(&rho, &energies, tol, alpha)?;
        let record = MetricsRecord::after(alpha, config.iterations, energy, ergotropy, &initial)?;
        observe(alpha, &rho, &record);
        records.push(record);
    }

    Ok(Trajectory {
        records,
        final_state: rho,
        config: config.clone(),
        gates,
    })
}

pub fn run<T: Real>(config: &ProtocolConfig<T>) -> Result<Trajectory<T>> {
    run_observed(config, |_, _, _| {})
}

/// Energy and ergotropy of `rho`, after confirming it is still a density matrix.
fn checked_evaluation<T: Real>(rho: &Matrix<T>, energies: &[T], tol: T, iteration: usize) -> Result<(T, T)> {
    let drift = |reason: String| Error::StateDrift { iteration, reason };
    if !rho.is_finite() {
        return Err(drift("non-finite entry".into()));
    }
    let tr_err = (rho.trace().re - T::one()).abs().max(rho.trace().im.abs());
    if tr_err > tol {
        return Err(drift(format!("trace deviates from 1 by {tr_err:e}")));
    }
    let eval = evaluate_state(rho, energies, tol).map_err(|e| drift(e.to_string()))?;
    let min = eval.eigenvalues[0];
    if min < -tol {
        return Err(drift(format!("negative eigenvalue {min:e}")));
    }
    Ok((eval.energy, eval.ergotropy))
}

/// The same circuit run with Nth-root gates and with full CNOTs.
#[derive(Clone, Debug)]
pub struct PairComparison<T> {
    pub root: usize,
    /// `M` iterations at root `N`.
    pub nrcg: Trajectory<T>,
    /// `M / N` iterations at root 1; record `k` sits at iteration `k N` of the shared axis.
    pub cnot: Trajectory<T>,
}

impl<T: Real> PairComparison<T> {
    /// Full-CNOT curve sampled on the Nth-root iteration axis.
    ///
    /// Drawn as a step curve: iteration `i` in `((k-1)N, kN]` shows the value after the
    /// `k`-th full application, so each step is reached exactly at a multiple of `N`.
    pub fn cnot_at(&self, iteration: usize) -> &MetricsRecord<T> {
        let k = iteration.div_ceil(self.root);
        &self.cnot.records[k.min(self.cnot.records.len() - 1)]
    }
}

pub fn run_pair_comparison<T: Real>(config: &ProtocolConfig<T>) -> Result<PairComparison<T>> {
    if !config.iterations.is_multiple_of(config.root) {
        return Err(Error::NotWholeCycles {
            iterations: config.iterations,
            root: config.root,
        });
    }
    let nrcg = run(config)?;
    let cnot = run(&config.with_root(1, config.iterations / config.root))?;
    Ok(PairComparison {
        root: config.root,
        nrcg,
        cnot,
    })
}
