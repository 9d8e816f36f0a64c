//! Full and Nth-root CNOT unitaries on 2- and 3-qubit registers.

use std::fmt;

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::matcore::Matrix;
use crate::scalar::Real;

/// Controlled gate on `(control, target)` whose `root`-th power is a full CNOT.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GateSpec {
    pub control: usize,
    pub target: usize,
    pub root: usize,
}

impl GateSpec {
    pub fn new(control: usize, target: usize, root: usize) -> Self {
        Self { control, target, root }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.root == 0 {
            return Err(Error::InvalidGate("root N must be at least 1".into()));
        }
        if self.control == self.target {
            return Err(Error::InvalidGate(format!(
                "control and target are both qubit {}",
                self.control
            )));
        }
        if self.control >= n_qubits || self.target >= n_qubits {
            return Err(Error::InvalidGate(format!(
                "{self} does not fit a {n_qubits}-qubit register"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for GateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = |q: usize| (b'A' + q as u8) as char;
        write!(f, "{}->{}", label(self.control), label(self.target))?;
        if self.root != 1 {
            write!(f, "^(1/{})", self.root)?;
        }
        Ok(())
    }
}

/// The `(s, p)` pair of the Nth-root CNOT: `s = (1 + e^{iπ/N})/2`, `p = (1 - e^{iπ/N})/2`.
pub fn root_coefficients<T: Real>(root: usize) -> Result<(Complex<T>, Complex<T>)> {
    if root == 0 {
        return Err(Error::InvalidGate("root N must be at least 1".into()));
    }
    if root == 1 {
        // e^{iπ} rounds to -1 + 1.2e-16 i; the full CNOT is exactly a permutation.
        return Ok((Complex::zero(), Complex::one()));
    }
    let half = T::lit(0.5);
    let phase = Complex::from_polar(T::one(), T::PI() / T::lit(root as f64));
    let one = Complex::<T>::one();
    Ok(((one + phase).scale(half), (one - phase).scale(half)))
}

/// 4x4 Nth-root CNOT on a two-qubit register.
///
/// `control_first = true` is the A-controls-B layout, `false` is B-controls-A.
pub fn nrcg_2q<T: Real>(control_first: bool, root: usize) -> Result<Matrix<T>> {
    let spec = if control_first {
        GateSpec::new(0, 1, root)
    } else {
        GateSpec::new(1, 0, root)
    };
    embed_gate(&spec, 2)
}

/// Embeds a (possibly fractional) CNOT into an `n_qubits` register by basis enumeration.
///
/// Basis states with the control bit clear are fixed; with it set, the block
/// `[[s, p], [p, s]]` mixes the two values of the target bit.
pub fn embed_gate<T: Real>(spec: &GateSpec, n_qubits: usize) -> Result<Matrix<T>> {
    spec.validate(n_qubits)?;
    let (s, p) = root_coefficients::<T>(spec.root)?;
    let dim = 1usize << n_qubits;
    let control_mask = 1usize << (n_qubits - 1 - spec.control);
    let target_mask = 1usize << (n_qubits - 1 - spec.target);
    let mut u = Matrix::zeros(dim);
    for basis in 0..dim {
        if basis & control_mask == 0 {
            u[(basis, basis)] = Complex::one();
        } else {
            u[(basis, basis)] = s;
            u[(basis ^ target_mask, basis)] = p;
        }
    }
    Ok(u)
}

/// Product of the embedded gates with the first listed gate acting first.
pub fn iteration_unitary<T: Real>(gates: &[GateSpec], n_qubits: usize) -> Result<Matrix<T>> {
    let (first, rest) = gates
        .split_first()
        .ok_or_else(|| Error::InvalidGate("empty gate list".into()))?;
    let mut u = embed_gate(first, n_qubits)?;
    for g in rest {
        u = embed_gate::<T>(g, n_qubits)?.matmul(&u)?;
    }
    Ok(u)
}
