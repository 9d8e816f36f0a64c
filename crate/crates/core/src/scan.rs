//! Grid sweeps over qubit B's preparation and the comparisons built on them.
//!
//! Cells are evaluated in parallel with rayon; every result is assembled in grid
//! order, so output never depends on the worker count.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::{Metric, MetricsRecord};
use crate::protocol::{run, run_pair_comparison, CircuitCase, PairComparison, ProtocolConfig, Trajectory};
use crate::scalar::Real;
use crate::states::{QubitInit, SystemSpec};

/// Resolution of the preparation grids.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanGrid<T> {
    /// Points on the closed interval `[0, π]`.
    pub theta_points: usize,
    /// Points on the half-open interval `[0, 2π)`.
    pub phi_points: usize,
    /// Overrides B's `φ` in single-`φ` scans.
    pub phi_fixed: Option<T>,
    /// Points on the closed interval `[0, 1/2]` for the thermal-B scan.
    pub p_points: usize,
}

impl<T: Real> Default for ScanGrid<T> {
    fn default() -> Self {
        Self {
            theta_points: 101,
            phi_points: 101,
            phi_fixed: None,
            p_points: 51,
        }
    }
}

fn closed_range<T: Real>(points: usize, hi: T) -> Vec<T> {
    if points == 1 {
        return vec![T::zero()];
    }
    let step = hi / T::lit((points - 1) as f64);
    (0..points)
        .map(|i| if i + 1 == points { hi } else { step * T::lit(i as f64) })
        .collect()
}

impl<T: Real> ScanGrid<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, n) in [
            ("theta_points", self.theta_points),
            ("phi_points", self.phi_points),
            ("p_points", self.p_points),
        ] {
            if n == 0 {
                return Err(Error::OutOfRange {
                    name,
                    value: 0.0,
                    range: "[1, inf)",
                });
            }
        }
        if let Some(phi) = self.phi_fixed {
            QubitInit::pure(T::zero(), phi)?;
        }
        Ok(())
    }

    pub fn thetas(&self) -> Vec<T> {
        closed_range(self.theta_points, T::PI())
    }

    pub fn phis(&self) -> Vec<T> {
        let step = T::TAU() / T::lit(self.phi_points as f64);
        (0..self.phi_points).map(|i| step * T::lit(i as f64)).collect()
    }

    pub fn populations(&self) -> Vec<T> {
        closed_range(self.p_points, T::lit(0.5))
    }
}

/// Coordinate axis of a [`ScanResult`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AxisKind {
    Theta,
    Phi,
    Population,
    Iteration,
}

impl AxisKind {
    pub fn name(self) -> &'static str {
        match self {
            AxisKind::Theta => "theta",
            AxisKind::Phi => "phi",
            AxisKind::Population => "p_excited",
            AxisKind::Iteration => "iteration",
        }
    }
}

impl fmt::Display for AxisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Axis<T> {
    pub kind: AxisKind,
    pub coords: Vec<T>,
}

/// One cell of a scan: B's preparation and the record reported for it.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow<T> {
    pub b: QubitInit<T>,
    pub record: MetricsRecord<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanKind {
    /// A single trajectory along the iteration axis.
    Trajectory,
    /// Every iteration of every `θ` at one `φ`.
    ThetaIterations,
    /// Per `(θ, φ)` cell, the iteration at which the metric peaks.
    ThetaPhiMax,
    /// Every iteration of every excited population of a thermal B.
    PopulationIterations,
}

/// Largest metric value in a result and where it sits.
#[derive(Clone, Debug, PartialEq)]
pub struct Extremum<T> {
    pub value: T,
    pub b: QubitInit<T>,
    pub iteration: usize,
}

impl<T: Real> Extremum<T> {
    pub fn theta(&self) -> Option<T> {
        match self.b {
            QubitInit::Pure { theta, .. } => Some(theta),
            _ => None,
        }
    }

    pub fn phi(&self) -> Option<T> {
        match self.b {
            QubitInit::Pure { phi, .. } => Some(phi),
            _ => None,
        }
    }

    pub fn p_excited(&self) -> Option<T> {
        match self.b {
            QubitInit::ExcitedPopulation { p } => Some(p),
            _ => None,
        }
    }
}

/// Values of one metric over a grid, plus the full record behind every cell.
///
/// `values` and `rows` are laid out row-major over `axes`; a value is `None`
/// where the metric is undefined (the powers at iteration 0).
#[derive(Clone, Debug)]
pub struct ScanResult<T> {
    pub kind: ScanKind,
    pub metric: Metric,
    pub config: ProtocolConfig<T>,
    pub grid: ScanGrid<T>,
    pub axes: Vec<Axis<T>>,
    pub values: Vec<Option<T>>,
    pub rows: Vec<ScanRow<T>>,
}

impl<T: Real> ScanResult<T> {
    /// A single run viewed as a one-axis result.
    pub fn from_trajectory(trajectory: &Trajectory<T>, metric: Metric) -> Self {
        let b = trajectory.config.spec.qubits()[1].1;
        let rows: Vec<ScanRow<T>> = trajectory.records.iter().map(|r| ScanRow { b, record: *r }).collect();
        Self {
            kind: ScanKind::Trajectory,
            metric,
            config: trajectory.config.clone(),
            grid: ScanGrid::default(),
            axes: vec![iteration_axis(trajectory.config.iterations)],
            values: rows.iter().map(|r| r.record.get(metric)).collect(),
            rows,
        }
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.coords.len()).collect()
    }

    /// First cell (in grid order) holding the largest defined value.
    pub fn maximum(&self) -> Option<Extremum<T>> {
        let mut best: Option<(usize, T)> = None;
        for (i, v) in self.values.iter().enumerate() {
            if let Some(v) = *v {
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((i, v));
                }
            }
        }
        best.map(|(i, value)| Extremum {
            value,
            b: self.rows[i].b,
            iteration: self.rows[i].record.iteration,
        })
    }

    /// Value at a 2D index `(i, j)` of a two-axis result.
    pub fn value_2d(&self, i: usize, j: usize) -> Option<T> {
        let cols = self.axes.get(1).map_or(1, |a| a.coords.len());
        self.values[i * cols + j]
    }
}

fn iteration_axis<T: Real>(iterations: usize) -> Axis<T> {
    Axis {
        kind: AxisKind::Iteration,
        coords: (0..=iterations).map(|i| T::lit(i as f64)).collect(),
    }
}

fn pure_b<T: Real>(theta: T, phi: T) -> Result<QubitInit<T>> {
    QubitInit::pure(theta, phi)
}

/// `φ` used by single-`φ` scans: the grid override, else B's own, else 0.
fn scan_phi<T: Real>(config: &ProtocolConfig<T>, grid: &ScanGrid<T>) -> T {
    grid.phi_fixed.unwrap_or(match config.spec.qubits()[1].1 {
        QubitInit::Pure { phi, .. } => phi,
        _ => T::zero(),
    })
}

fn run_with_b<T: Real>(config: &ProtocolConfig<T>, b: QubitInit<T>) -> Result<Trajectory<T>> {
    let spec = config.spec.with_b(b)?;
    run(&ProtocolConfig { spec, ..config.clone() })
}

/// Runs one trajectory per B preparation, in parallel, keeping input order.
fn run_cells<T: Real>(config: &ProtocolConfig<T>, bs: &[QubitInit<T>]) -> Result<Vec<Trajectory<T>>> {
    bs.par_iter().map(|&b| run_with_b(config, b)).collect()
}

fn cells_by_iteration<T: Real>(
    kind: ScanKind,
    config: &ProtocolConfig<T>,
    grid: &ScanGrid<T>,
    metric: Metric,
    first_axis: Axis<T>,
    bs: Vec<QubitInit<T>>,
) -> Result<ScanResult<T>> {
    let trajectories = run_cells(config, &bs)?;
    let mut rows = Vec::with_capacity(bs.len() * (config.iterations + 1));
    for (b, t) in bs.iter().zip(trajectories) {
        rows.extend(t.records.into_iter().map(|record| ScanRow { b: *b, record }));
    }
    Ok(ScanResult {
        kind,
        metric,
        config: config.clone(),
        grid: grid.clone(),
        axes: vec![first_axis, iteration_axis(config.iterations)],
        values: rows.iter().map(|r| r.record.get(metric)).collect(),
        rows,
    })
}

/// Metric over `θ × iteration` at a single `φ`.
pub fn scan_theta_iterations<T: Real>(
    config: &ProtocolConfig<T>,
    grid: &ScanGrid<T>,
    metric: Metric,
) -> Result<ScanResult<T>> {
    grid.validate()?;
    let phi = scan_phi(config, grid);
    let thetas = grid.thetas();
    let bs = thetas.iter().map(|&t| pure_b(t, phi)).collect::<Result<Vec<_>>>()?;
    let axis = Axis {
        kind: AxisKind::Theta,
        coords: thetas,
    };
    cells_by_iteration(ScanKind::ThetaIterations, config, grid, metric, axis, bs)
}

/// Metric over `p × iteration` with B prepared as `diag(1 - p, p)`.
pub fn scan_population_iterations<T: Real>(
    config: &ProtocolConfig<T>,
    grid: &ScanGrid<T>,
    metric: Metric,
) -> Result<ScanResult<T>> {
    grid.validate()?;
    let ps = grid.populations();
    let bs = ps
        .iter()
        .map(|&p| QubitInit::excited_population(p))
        .collect::<Result<Vec<_>>>()?;
    let axis = Axis {
        kind: AxisKind::Population,
        coords: ps,
    };
    cells_by_iteration(ScanKind::PopulationIterations, config, grid, metric, axis, bs)
}

/// Iteration and value of the largest defined metric along a trajectory; ties go to the earlier one.
fn peak<T: Real>(records: &[MetricsRecord<T>], metric: Metric) -> Option<(usize, T)> {
    let mut best: Option<(usize, T)> = None;
    for (i, r) in records.iter().enumerate() {
        if let Some(v) = r.get(metric) {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
    }
    best
}

/// Per `(θ, φ)` cell, the maximum of the metric over iterations `0..=M`.
///
/// Each row carries the full record at the peak iteration.
pub fn scan_theta_phi_max<T: Real>(
    config: &ProtocolConfig<T>,
    grid: &ScanGrid<T>,
    metric: Metric,
) -> Result<ScanResult<T>> {
    grid.validate()?;
    let thetas = grid.thetas();
    let phis = grid.phis();
    let bs = thetas
        .iter()
        .flat_map(|&t| phis.iter().map(move |&p| pure_b(t, p)))
        .collect::<Result<Vec<_>>>()?;
    let peaks: Vec<(QubitInit<T>, MetricsRecord<T>, Option<T>)> = bs
        .par_iter()
        .map(|&b| {
            let t = run_with_b(config, b)?;
            let (i, v) = match peak(&t.records, metric) {
                Some((i, v)) => (i, Some(v)),
                None => (0, None),
            };
            Ok((b, t.records[i], v))
        })
        .collect::<Result<_>>()?;
    let (rows, values) = peaks
        .into_iter()
        .map(|(b, record, v)| (ScanRow { b, record }, v))
        .unzip();
    Ok(ScanResult {
        kind: ScanKind::ThetaPhiMax,
        metric,
        config: config.clone(),
        grid: grid.clone(),
        axes: vec![
            Axis {
                kind: AxisKind::Theta,
                coords: thetas,
            },
            Axis {
                kind: AxisKind::Phi,
                coords: phis,
            },
        ],
        values,
        rows,
    })
}

/// Nth-root and full-CNOT runs at the `θ` where the Nth-root ergotropy peaks highest.
#[derive(Clone, Debug)]
pub struct CnotComparison<T> {
    pub theta_star: T,
    pub phi: T,
    pub pair: PairComparison<T>,
}

pub fn cnot_comparison<T: Real>(config: &ProtocolConfig<T>, grid: &ScanGrid<T>) -> Result<CnotComparison<T>> {
    let scan = scan_theta_iterations(config, grid, Metric::Ergotropy)?;
    let best = scan.maximum().expect("ergotropy is defined at every iteration");
    let theta_star = best.theta().expect("theta scan cells are pure");
    let phi = scan_phi(config, grid);
    let spec = config.spec.with_b(pure_b(theta_star, phi)?)?;
    let pair = run_pair_comparison(&ProtocolConfig { spec, ..config.clone() })?;
    Ok(CnotComparison { theta_star, phi, pair })
}

/// How qubit B is prepared in a thermal-comparison variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BPreparation {
    /// Pure B, scanned over `θ × φ`.
    Pure,
    /// Diagonal B, scanned over its excited population.
    Thermal,
}

impl BPreparation {
    pub fn name(self) -> &'static str {
        match self {
            BPreparation::Pure => "pure",
            BPreparation::Thermal => "thermal",
        }
    }
}

/// Metrics compared across B preparations.
pub const THERMAL_METRICS: [Metric; 4] = [Metric::Ergotropy, Metric::DeltaW, Metric::Ratio, Metric::Fom];

#[derive(Clone, Debug, PartialEq)]
pub struct ThermalComparisonRow<T> {
    pub n_qubits: usize,
    pub case: CircuitCase,
    pub preparation: BPreparation,
    pub metric: Metric,
    pub maximum: Extremum<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThermalComparison<T> {
    pub rows: Vec<ThermalComparisonRow<T>>,
}

impl<T: Real> ThermalComparison<T> {
    pub fn get(
        &self,
        n_qubits: usize,
        case: CircuitCase,
        preparation: BPreparation,
        metric: Metric,
    ) -> Option<&ThermalComparisonRow<T>> {
        self.rows
            .iter()
            .find(|r| r.n_qubits == n_qubits && r.case == case && r.preparation == preparation && r.metric == metric)
    }

    /// Pure-B maximum over thermal-B maximum.
    pub fn advantage(&self, n_qubits: usize, case: CircuitCase, metric: Metric) -> Option<T> {
        let pure = self.get(n_qubits, case, BPreparation::Pure, metric)?;
        let thermal = self.get(n_qubits, case, BPreparation::Thermal, metric)?;
        Some(pure.maximum.value / thermal.maximum.value)
    }
}

/// Maxima of [`THERMAL_METRICS`] for every register size, case and B preparation.
///
/// A and C keep the preparations of `base`; its size, case and B are overridden.
pub fn thermal_comparison<T: Real>(base: &ProtocolConfig<T>, grid: &ScanGrid<T>) -> Result<ThermalComparison<T>> {
    grid.validate()?;
    let thetas = grid.thetas();
    let phis = grid.phis();
    let pure: Vec<QubitInit<T>> = thetas
        .iter()
        .flat_map(|&t| phis.iter().map(move |&p| pure_b(t, p)))
        .collect::<Result<_>>()?;
    let thermal: Vec<QubitInit<T>> = grid
        .populations()
        .iter()
        .map(|&p| QubitInit::excited_population(p))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for n_qubits in [2, 3] {
        let spec = resize(&base.spec, n_qubits)?;
        for case in CircuitCase::ALL {
            let config = ProtocolConfig {
                spec: spec.clone(),
                case,
                ..base.clone()
            };
            for (preparation, bs) in [(BPreparation::Pure, &pure), (BPreparation::Thermal, &thermal)] {
                let peaks: Vec<Vec<Option<Extremum<T>>>> = bs
                    .par_iter()
                    .map(|&b| {
                        let t = run_with_b(&config, b)?;
                        Ok(THERMAL_METRICS
                            .iter()
                            .map(|&m| peak(&t.records, m).map(|(iteration, value)| Extremum { value, b, iteration }))
                            .collect())
                    })
                    .collect::<Result<_>>()?;
                for (k, &metric) in THERMAL_METRICS.iter().enumerate() {
                    let mut best: Option<&Extremum<T>> = None;
                    for cell in peaks.iter().filter_map(|p| p[k].as_ref()) {
                        if best.is_none_or(|b| cell.value > b.value) {
                            best = Some(cell);
                        }
                    }
                    if let Some(best) = best {
                        rows.push(ThermalComparisonRow {
                            n_qubits,
                            case,
                            preparation,
                            metric,
                            maximum: best.clone(),
                        });
                    }
                }
            }
        }
    }
    Ok(ThermalComparison { rows })
}

/// Register with A and B from `spec`, plus C (taken from `spec` or the standard one) when three qubits are asked for.
fn resize<T: Real>(spec: &SystemSpec<T>, n_qubits: usize) -> Result<SystemSpec<T>> {
    let mut qubits = spec.qubits().to_vec();
    match n_qubits {
        2 => qubits.truncate(2),
        3 if qubits.len() == 2 => {
            let standard = SystemSpec::standard(3, qubits[1].1)?;
            qubits.push(standard.qubits()[2]);
        }
        _ => {}
    }
    SystemSpec::new(qubits)
}

/// Roots used by [`convergence_study`] when none are given.
pub const DEFAULT_ROOTS: [usize; 7] = [1, 2, 3, 5, 10, 15, 20];

/// One two-cycle run per root.
#[derive(Clone, Debug)]
pub struct ConvergenceStudy<T> {
    pub runs: Vec<Trajectory<T>>,
}

impl<T: Real> ConvergenceStudy<T> {
    pub fn roots(&self) -> Vec<usize> {
        self.runs.iter().map(|t| t.config.root).collect()
    }

    /// Largest `|W(α+1) - W(α)|` for each root.
    pub fn max_jumps(&self) -> Vec<T> {
        self.runs
            .iter()
            .map(|t| {
                t.records
                    .windows(2)
                    .map(|w| (w[1].ergotropy - w[0].ergotropy).abs())
                    .fold(T::zero(), T::max)
            })
            .collect()
    }

    /// Largest pointwise ergotropy gap between two runs on the cycle-fraction axis.
    ///
    /// The coarser run is linearly interpolated onto the finer run's points.
    pub fn cycle_fraction_gap(&self, root_a: usize, root_b: usize) -> Option<T> {
        let a = self.runs.iter().find(|t| t.config.root == root_a)?;
        let b = self.runs.iter().find(|t| t.config.root == root_b)?;
        let (fine, coarse) = if a.config.root >= b.config.root { (a, b) } else { (b, a) };
        let nf = T::lit(fine.config.root as f64);
        let nc = T::lit(coarse.config.root as f64);
        let cw = coarse.ergotropies();
        let gap = fine
            .records
            .iter()
            .map(|r| {
                let x = T::lit(r.iteration as f64) / nf * nc;
                let lo = x.floor().to_usize().unwrap_or(0).min(cw.len() - 1);
                let hi = (lo + 1).min(cw.len() - 1);
                let frac = x - T::lit(lo as f64);
                let w = cw[lo] + (cw[hi] - cw[lo]) * frac;
                (r.ergotropy - w).abs()
            })
            .fold(T::zero(), T::max);
        Some(gap)
    }
}

/// Runs `config` for two full cycles (`M = 2N`) at each root.
pub fn convergence_study<T: Real>(config: &ProtocolConfig<T>, roots: &[usize]) -> Result<ConvergenceStudy<T>> {
    let runs = roots
        .par_iter()
        .map(|&root| {
            if root == 0 {
                return Err(Error::InvalidGate("root N must be at least 1".into()));
            }
            run(&config.with_root(root, 2 * root))
        })
        .collect::<Result<_>>()?;
    Ok(ConvergenceStudy { runs })
}
