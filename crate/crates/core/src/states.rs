//! Single-qubit Hamiltonians, initial states and their tensor-product system state.
//!
//! Basis ordering is big-endian: qubit 0 (A) is the most significant bit of a
//! basis index, so `|b_A b_B b_C>` maps to `4 b_A + 2 b_B + b_C`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::matcore::Matrix;
use crate::scalar::Real;

/// Two-level Hamiltonian `diag(eps1, eps2)` with energies in units of the B-qubit gap.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitHamiltonian<T> {
    pub eps1: T,
    pub eps2: T,
}

impl<T: Real> QubitHamiltonian<T> {
    pub fn new(eps1: T, eps2: T) -> Result<Self> {
        if !(eps1.is_finite() && eps2.is_finite()) || eps1 > eps2 {
            return Err(Error::OutOfRange {
                name: "eps1",
                value: eps1.to_f64().unwrap_or(f64::NAN),
                range: "(-inf, eps2]",
            });
        }
        Ok(Self { eps1, eps2 })
    }

    pub fn matrix(&self) -> Matrix<T> {
        Matrix::from_real_diag(&[self.eps1, self.eps2])
    }
}

impl<T: Real> Default for QubitHamiltonian<T> {
    fn default() -> Self {
        Self {
            eps1: T::zero(),
            eps2: T::one(),
        }
    }
}

/// How one qubit is prepared before the first gate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QubitInit<T> {
    /// Gibbs state at `kt` (may be `0` for the ground state or `+inf` for the maximally mixed state).
    Thermal { kt: T },
    /// `cos(θ/2)|0> + e^{iφ} sin(θ/2)|1>`.
    Pure { theta: T, phi: T },
    /// `diag(1 - p, p)`, used to scan thermal-like B preparations by population.
    ExcitedPopulation { p: T },
}

impl<T: Real> QubitInit<T> {
    pub fn thermal(kt: T) -> Result<Self> {
        if kt.is_nan() || kt < T::zero() {
            return Err(out_of_range("kT", kt, "[0, inf]"));
        }
        Ok(Self::Thermal { kt })
    }

    pub fn pure(theta: T, phi: T) -> Result<Self> {
        check_angles(theta, phi)?;
        Ok(Self::Pure { theta, phi })
    }

    pub fn excited_population(p: T) -> Result<Self> {
        check_population(p)?;
        Ok(Self::ExcitedPopulation { p })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Thermal { kt } => Self::thermal(kt).map(|_| ()),
            Self::Pure { theta, phi } => check_angles(theta, phi),
            Self::ExcitedPopulation { p } => check_population(p),
        }
    }

    pub fn density_matrix(&self, h: &QubitHamiltonian<T>) -> Result<Matrix<T>> {
        match *self {
            Self::Thermal { kt } => gibbs_state(h, kt),
            Self::Pure { theta, phi } => pure_state(theta, phi),
            Self::ExcitedPopulation { p } => excited_population_state(p),
        }
    }
}

fn out_of_range<T: Real>(name: &'static str, value: T, range: &'static str) -> Error {
    Error::OutOfRange {
        name,
        value: value.to_f64().unwrap_or(f64::NAN),
        range,
    }
}

fn check_angles<T: Real>(theta: T, phi: T) -> Result<()> {
    if !(theta >= T::zero() && theta <= T::PI()) {
        return Err(out_of_range("theta", theta, "[0, pi]"));
    }
    if !(phi >= T::zero() && phi < T::TAU()) {
        return Err(out_of_range("phi", phi, "[0, 2pi)"));
    }
    Ok(())
}

fn check_population<T: Real>(p: T) -> Result<()> {
    if !(p >= T::zero() && p <= T::lit(0.5)) {
        return Err(out_of_range("p_excited", p, "[0, 1/2]"));
    }
    Ok(())
}

/// Gibbs state `diag(e^{-ε1/kT}, e^{-ε2/kT}) / Z`.
///
/// `kT = 0` gives the ground-state projector and `kT = +inf` the maximally mixed state.
pub fn gibbs_state<T: Real>(h: &QubitHamiltonian<T>, kt: T) -> Result<Matrix<T>> {
    if kt.is_nan() || kt < T::zero() {
        return Err(out_of_range("kT", kt, "[0, inf]"));
    }
    if kt == T::zero() {
        return Ok(Matrix::from_real_diag(&[T::one(), T::zero()]));
    }
    // Boltzmann weights relative to the ground level keep exp() in range.
    let w_excited = (-(h.eps2 - h.eps1) / kt).exp();
    let z = T::one() + w_excited;
    Ok(Matrix::from_real_diag(&[T::one() / z, w_excited / z]))
}

/// Projector onto `cos(θ/2)|0> + e^{iφ} sin(θ/2)|1>`.
pub fn pure_state<T: Real>(theta: T, phi: T) -> Result<Matrix<T>> {
    check_angles(theta, phi)?;
    let half = theta / T::lit(2.0);
    let (sin, cos) = half.sin_cos();
    let amps = [Complex::new(cos, T::zero()), Complex::from_polar(sin, phi)];
    let mut rho = Matrix::zeros(2);
    for i in 0..2 {
        for j in 0..2 {
            rho[(i, j)] = amps[i] * amps[j].conj();
        }
    }
    Ok(rho)
}

pub fn excited_population_state<T: Real>(p: T) -> Result<Matrix<T>> {
    check_population(p)?;
    Ok(Matrix::from_real_diag(&[T::one() - p, p]))
}

/// Ordered qubit register A, B[, C] with per-qubit Hamiltonian and preparation.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec<T> {
    qubits: Vec<(QubitHamiltonian<T>, QubitInit<T>)>,
}

impl<T: Real> SystemSpec<T> {
    pub fn new(qubits: Vec<(QubitHamiltonian<T>, QubitInit<T>)>) -> Result<Self> {
        if !(2..=3).contains(&qubits.len()) {
            return Err(Error::InvalidSystem(format!(
                "register must hold 2 or 3 qubits, got {}",
                qubits.len()
            )));
        }
        for (h, init) in &qubits {
            QubitHamiltonian::new(h.eps1, h.eps2)?;
            init.validate()?;
        }
        Ok(Self { qubits })
    }

    /// Thermal A at `kT = 4`, B as given, and (for three qubits) thermal C at `kT = 0.4`,
    /// all with the default `(0, 1)` level structure.
    pub fn standard(n_qubits: usize, b: QubitInit<T>) -> Result<Self> {
        let h = QubitHamiltonian::default();
        let mut qubits = vec![(h, QubitInit::thermal(T::lit(4.0))?), (h, b)];
        if n_qubits == 3 {
            qubits.push((h, QubitInit::thermal(T::lit(0.4))?));
        } else if n_qubits != 2 {
            return Err(Error::InvalidSystem(format!(
                "register must hold 2 or 3 qubits, got {n_qubits}"
            )));
        }
        Self::new(qubits)
    }

    pub fn n_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits.len()
    }

    pub fn qubits(&self) -> &[(QubitHamiltonian<T>, QubitInit<T>)] {
        &self.qubits
    }

    /// Same register with qubit B's preparation replaced.
    pub fn with_b(&self, b: QubitInit<T>) -> Result<Self> {
        let mut qubits = self.qubits.clone();
        qubits[1].1 = b;
        Self::new(qubits)
    }
}

/// `ρ_A ⊗ ρ_B [⊗ ρ_C]`.
pub fn system_state<T: Real>(spec: &SystemSpec<T>) -> Result<Matrix<T>> {
    let mut iter = spec.qubits.iter();
    let (h0, i0) = iter.next().expect("non-empty register");
    let mut rho = i0.density_matrix(h0)?;
    for (h, init) in iter {
        rho = rho.kron(&init.density_matrix(h)?);
    }
    Ok(rho)
}

/// Diagonal energies of the non-interacting `Σ_j H_j`, in basis-index order.
pub fn system_energies<T: Real>(spec: &SystemSpec<T>) -> Vec<T> {
    let n = spec.n_qubits();
    (0..spec.dim())
        .map(|basis| {
            spec.qubits.iter().enumerate().fold(T::zero(), |acc, (q, (h, _))| {
                let bit = (basis >> (n - 1 - q)) & 1;
                acc + if bit == 1 { h.eps2 } else { h.eps1 }
            })
        })
        .collect()
}

pub fn system_hamiltonian<T: Real>(spec: &SystemSpec<T>) -> Matrix<T> {
    Matrix::from_real_diag(&system_energies(spec))
}
