//! Finite-dimensional state machinery: registers, pure states, operators,
//! measurement bases, Born probabilities and seeded sampling.
//!
//! Everything is dense. Basis indices are row-major over the register's
//! declared subsystem order (first subsystem slowest-varying).

mod basis;
pub mod linalg;
mod operator;
mod register;
mod state;

pub use basis::{
    computational_label, MeasurementBasis, Outcome, MAX_SPIN_QUBITS, MAX_TOTAL_SPIN_QUBITS,
};
pub use operator::{Operator, OperatorKind};
pub use register::{Register, Subsystem};
pub use state::{
    apply_unitary, born_distribution, from_amplitudes, sample_outcome, tensor_product, PureState,
};

pub(crate) use state::apply_controlled;

pub type C64 = num_complex::Complex64;

/// Tolerance for normalization, unitarity and hermiticity checks.
pub const EPS_NORM: f64 = 1e-9;

/// Largest joint dimension handled by the dense representation.
pub const MAX_TOTAL_DIM: usize = 1 << 14;

/// `make_register` under its usual name.
pub fn make_register<I, S>(specs: I) -> crate::Result<Register>
where
    I: IntoIterator<Item = (S, usize)>,
    S: Into<String>,
{
    Register::new(specs)
}
