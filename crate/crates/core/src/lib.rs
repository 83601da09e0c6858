//! Strong-field photoionization of atoms in a two-color field whose weak
//! component carries nonclassical photon statistics.
//!
//! The weak ω mode is described by a Husimi distribution over coherent
//! amplitudes `α`; each amplitude defines a classical two-color field, the
//! saddle-point yield is computed per field, and the photoelectron momentum
//! distribution is the Husimi-weighted average.

pub mod diagnostics;
pub mod ensemble;
pub mod error;
pub mod field;
pub mod phase_space;
pub mod psf;
pub mod quad;
pub mod sfa;

pub use error::{AtiError, Result};
pub use field::{AtomSpec, ComplexTime, FieldConfig, FieldRealization};
pub use num_complex::Complex64;
pub use phase_space::{ComplexAmplitude, DistKind, NodeScheme, NodeSet, PhaseSpaceDist};
pub use sfa::{Event, Momentum, Orbit, SaddleSolution, TimeWindow};
