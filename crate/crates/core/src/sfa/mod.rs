//! Per-realization strong-field approximation: action, dipole, complex-time
//! saddles, saddle-point yields and a brute-force quadrature oracle.

pub mod action;
pub mod amplitude;
pub mod dipole;
pub mod oracle;
pub mod saddle;

use serde::{Deserialize, Serialize};

pub use action::{action, ActionSeries};
pub use amplitude::{differential_yield, pmd_single, saddle_terms, AmplitudeContext, BranchRule, SaddleTerm, YieldEval};
pub use dipole::{dipole_element, DipoleValue};
pub use oracle::{oracle_amplitude, ring_radii, OracleOptions};
pub use saddle::{find_cell_saddles, find_saddles, Event, Orbit, SaddleSearch, SaddleSolution, TimeWindow};

/// Final electron momentum; `px` along the laser polarization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Momentum {
    pub px: f64,
    pub py: f64,
}

impl Momentum {
    pub const fn new(px: f64, py: f64) -> Self {
        Momentum { px, py }
    }
}
