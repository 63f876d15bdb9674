//! Laboratory for coupled quasilinear wave systems `□u = N(u, u)` with
//! distinct propagation speeds.
//!
//! The crate is split along the lines of the computation:
//!
//! * [`tensor`] holds the exact coefficient algebra of the quadratic
//!   nonlinearity: symmetry and null-condition checks, commutators with the
//!   vector fields `∂, Ω, S`.
//! * [`grid`] holds uniform 3D grids, 4th-order stencils and the action of
//!   the vector fields on grid functions.
//! * [`solver`] integrates the system explicitly (RK4) with a pointwise
//!   acceleration solve.
//! * [`diagnostics`] measures generalized energies, weighted norms and the
//!   pointwise monitors on grid states.
//! * [`scenario`] wires configuration, presets, runs and reports together.

pub mod diagnostics;
pub mod grid;
pub mod scenario;
pub mod solver;
pub mod tensor;

pub use diagnostics::{DiagnosticsRecord, DiagnosticsSeries, GrowthFit};
pub use grid::{Field, GammaSequence, GridSpec, GridState};
pub use solver::{InitialData, SolverConfig, WaveSystem};
pub use tensor::{CoeffTensor, CubicForm, NullWitness, Rational, SpeedVector, VectorField};
