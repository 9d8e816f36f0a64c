//! Density-matrix simulation of quantum-battery charging protocols built from
//! Nth-root CNOT gates on two- and three-qubit registers.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the double-precision types used by the scans and the command-line tool.

pub mod error;
pub mod gates;
pub mod matcore;
pub mod metrics;
pub mod protocol;
pub mod scalar;
pub mod scan;
pub mod states;

pub use error::{Error, Result};
pub use gates::GateSpec;
pub use matcore::{DensityCheck, EigenDecomposition, Matrix};
pub use metrics::{Metric, MetricsRecord, PassiveState};
pub use protocol::{CircuitCase, PairComparison, ProtocolConfig, Trajectory};
pub use scalar::Real;
pub use scan::{Extremum, ScanGrid, ScanResult};
pub use states::{QubitHamiltonian, QubitInit, SystemSpec};

pub type Complex = num_complex::Complex<f64>;
pub type ComplexMatrix = Matrix<f64>;
pub type ComplexMatrixF32 = Matrix<f32>;
pub type HermitianEigenDecomposition = EigenDecomposition<f64>;
