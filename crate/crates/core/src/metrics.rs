//! Ergotropy via the passive state and the battery performance measures built on it.
//!
//! The measurement Hamiltonian is always the non-interacting, diagonal system
//! Hamiltonian, so its eigenstates are computational basis states and the passive
//! state is obtained by pairing sorted populations with sorted basis energies.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matcore::Matrix;
use crate::scalar::Real;

/// Passive counterpart of a state: populations descending paired with energies ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct PassiveState<T> {
    pub populations: Vec<T>,
    pub energies: Vec<T>,
    pub passive_energy: T,
}

impl<T: Real> PassiveState<T> {
    /// Builds the passive state from the spectrum of `ρ` and the diagonal of `H`.
    ///
    /// Eigenvalues are clamped at zero here only; callers keep the raw spectrum.
    pub fn from_spectrum(eigenvalues: &[T], energies: &[T]) -> Self {
        let mut populations: Vec<T> = eigenvalues.iter().map(|&l| l.max(T::zero())).collect();
        populations.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        let mut energies = energies.to_vec();
        // Stable sort: degenerate levels keep their basis order.
        energies.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let passive_energy = populations
            .iter()
            .zip(&energies)
            .fold(T::zero(), |acc, (&s, &e)| acc + s * e);
        Self {
            populations,
            energies,
            passive_energy,
        }
    }
}

fn diagonal_energies<T: Real>(h: &Matrix<T>) -> Result<Vec<T>> {
    let n = h.dim();
    let mut deviation = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                deviation = deviation.max(h[(i, j)].norm());
            }
        }
        deviation = deviation.max(h[(i, i)].im.abs());
    }
    if deviation > T::zero() {
        return Err(Error::NotDiagonal {
            deviation: deviation.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(h.real_diagonal())
}

/// `Tr[ρH]` for diagonal `H` given by its energies.
pub fn energy<T: Real>(rho: &Matrix<T>, energies: &[T]) -> T {
    energies
        .iter()
        .enumerate()
        .fold(T::zero(), |acc, (i, &e)| acc + rho[(i, i)].re * e)
}

fn clip_ergotropy<T: Real>(w: T) -> T {
    if w < T::zero() && w >= -T::lit(T::ERGOTROPY_CLIP) {
        T::zero()
    } else {
        w
    }
}

/// Energy, ergotropy and spectrum of a state.
#[derive(Clone, Debug)]
pub struct StateEvaluation<T> {
    pub energy: T,
    pub ergotropy: T,
    pub passive: PassiveState<T>,
    /// Ascending eigenvalues of the state.
    pub eigenvalues: Vec<T>,
}

/// Evaluates `ρ` against a diagonal Hamiltonian given as its energies.
///
/// `tol` is the Hermiticity tolerance handed to the eigensolver.
pub fn evaluate_state<T: Real>(rho: &Matrix<T>, energies: &[T], tol: T) -> Result<StateEvaluation<T>> {
    if rho.dim() != energies.len() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: energies.len(),
        });
    }
    let eigenvalues = rho.hermitian_eigenvalues(tol)?;
    let passive = PassiveState::from_spectrum(&eigenvalues, energies);
    let e = energy(rho, energies);
    Ok(StateEvaluation {
        energy: e,
        ergotropy: clip_ergotropy(e - passive.passive_energy),
        passive,
        eigenvalues,
    })
}

fn require_density<T: Real>(rho: &Matrix<T>) -> Result<()> {
    let check = rho.is_density_matrix(T::lit(T::DRIFT_TOL));
    if check.valid {
        Ok(())
    } else {
        Err(Error::InvalidState(check.diagnostic.unwrap_or_default()))
    }
}

pub fn passive_state<T: Real>(rho: &Matrix<T>, h: &Matrix<T>) -> Result<PassiveState<T>> {
    require_density(rho)?;
    let energies = diagonal_energies(h)?;
    Ok(evaluate_state(rho, &energies, T::lit(T::DRIFT_TOL))?.passive)
}

/// `W_max = Tr[ρH] - Tr[σ_ρ H]`.
pub fn ergotropy<T: Real>(rho: &Matrix<T>, h: &Matrix<T>) -> Result<T> {
    require_density(rho)?;
    let energies = diagonal_energies(h)?;
    Ok(evaluate_state(rho, &energies, T::lit(T::DRIFT_TOL))?.ergotropy)
}

/// `W_max / Tr[ρH]`, taken as 0 when the energy is at most 1e-12.
pub fn ratio_from<T: Real>(ergotropy: T, energy: T) -> T {
    if energy <= T::lit(1e-12) {
        T::zero()
    } else {
        ergotropy / energy
    }
}

pub fn ergotropy_ratio<T: Real>(rho_final: &Matrix<T>, h: &Matrix<T>) -> Result<T> {
    require_density(rho_final)?;
    let energies = diagonal_energies(h)?;
    let eval = evaluate_state(rho_final, &energies, T::lit(T::DRIFT_TOL))?;
    Ok(ratio_from(eval.ergotropy, eval.energy))
}

/// Signed change in ergotropy since the initial record; positive means charging.
pub fn ergotropy_variation<T: Real>(record: &MetricsRecord<T>, initial: &MetricsRecord<T>) -> T {
    record.ergotropy - initial.ergotropy
}

pub fn figure_of_merit<T: Real>(delta_w: T, ratio: T) -> T {
    delta_w * ratio
}

fn duration<T: Real>(alpha: usize, total: usize) -> Result<T> {
    if alpha == 0 || alpha > total {
        return Err(Error::OutOfRange {
            name: "alpha",
            value: alpha as f64,
            range: "[1, M]",
        });
    }
    Ok(T::lit(alpha as f64) / T::lit(total as f64))
}

/// Average work per unit duration up to iteration `alpha`, with duration `alpha / M`.
pub fn power_work<T: Real>(alpha: usize, total: usize, e_alpha: T, e_initial: T) -> Result<T> {
    Ok((e_alpha - e_initial) / duration::<T>(alpha, total)?)
}

/// Ergotropy variation per unit duration up to iteration `alpha`.
pub fn power_ergotropy<T: Real>(alpha: usize, total: usize, delta_w: T) -> Result<T> {
    Ok(delta_w / duration::<T>(alpha, total)?)
}

/// All performance measures at one iteration of a protocol run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricsRecord<T> {
    pub iteration: usize,
    pub energy: T,
    pub ergotropy: T,
    pub ergotropy_variation: T,
    pub ergotropy_ratio: T,
    pub figure_of_merit: T,
    /// Undefined at iteration 0.
    pub power_work: Option<T>,
    /// Undefined at iteration 0.
    pub power_ergotropy: Option<T>,
}

impl<T: Real> MetricsRecord<T> {
    /// Record for the initial state; variation is zero and powers are absent.
    pub fn initial(energy: T, ergotropy: T) -> Self {
        let ratio = ratio_from(ergotropy, energy);
        Self {
            iteration: 0,
            energy,
            ergotropy,
            ergotropy_variation: T::zero(),
            ergotropy_ratio: ratio,
            figure_of_merit: T::zero(),
            power_work: None,
            power_ergotropy: None,
        }
    }

    /// Record at iteration `alpha >= 1` of a run with `total` iterations.
    pub fn after(alpha: usize, total: usize, energy: T, ergotropy: T, initial: &MetricsRecord<T>) -> Result<Self> {
        let delta_w = ergotropy - initial.ergotropy;
        let ratio = ratio_from(ergotropy, energy);
        Ok(Self {
            iteration: alpha,
            energy,
            ergotropy,
            ergotropy_variation: delta_w,
            ergotropy_ratio: ratio,
            figure_of_merit: figure_of_merit(delta_w, ratio),
            power_work: Some(power_work(alpha, total, energy, initial.energy)?),
            power_ergotropy: Some(power_ergotropy(alpha, total, delta_w)?),
        })
    }

    pub fn get(&self, metric: Metric) -> Option<T> {
        match metric {
            Metric::Ergotropy => Some(self.ergotropy),
            Metric::DeltaW => Some(self.ergotropy_variation),
            Metric::Ratio => Some(self.ergotropy_ratio),
            Metric::Fom => Some(self.figure_of_merit),
            Metric::PowerWork => self.power_work,
            Metric::PowerErgotropy => self.power_ergotropy,
        }
    }
}

/// Scalar performance measure selectable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Metric {
    Ergotropy,
    DeltaW,
    Ratio,
    Fom,
    PowerWork,
    PowerErgotropy,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::Ergotropy,
        Metric::DeltaW,
        Metric::Ratio,
        Metric::Fom,
        Metric::PowerWork,
        Metric::PowerErgotropy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Ergotropy => "ergotropy",
            Metric::DeltaW => "delta_w",
            Metric::Ratio => "ratio",
            Metric::Fom => "fom",
            Metric::PowerWork => "power_work",
            Metric::PowerErgotropy => "power_ergotropy",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMetric(s.to_string()))
    }
}
