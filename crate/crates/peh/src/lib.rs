//! Bimorph piezoelectric cantilever plate harvester.
//!
//! Cubic B-spline Kirchhoff–Love discretization of a clamped three-layer
//! plate with series-connected piezo layers near the root, followed by
//! modal reduction, a closed-form voltage FRF, adaptive time integration
//! under base acceleration, and energy accounting across a resistive load.

pub mod assembly;
pub mod bspline;
pub mod design;
pub mod error;
pub mod freqmap;
pub mod frf;
pub mod modal;
pub mod simulate;

pub use assembly::{assemble_peh, Mesh, PehSystem};
pub use bspline::{bspline_basis, BasisEval, KnotVector};
pub use design::{PehDesign, Piezo, Substrate};
pub use error::{PehError, Result};
pub use freqmap::{fundamental_frequency_map, FrequencyMap};
pub use frf::{full_voltage_frf, power_at_first_mode, select_load_resistance, voltage_frf};
pub use modal::{build_reduced, reduce_model, solve_modes, Modes, ReducedPeh};
pub use simulate::{
    harvested_energy, simulate_states, simulate_voltage, simulate_voltage_samples, total_energy,
    write_voltage, VoltageTrace,
};
