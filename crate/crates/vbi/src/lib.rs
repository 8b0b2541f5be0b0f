//! Vehicle–bridge interaction simulation.
//!
//! A simply supported Euler–Bernoulli beam (Hermite elements, consistent
//! mass, Rayleigh damping) carries a four-degree-of-freedom half-car whose
//! tires ride on an ISO 8608 random profile. A single crack is modelled as
//! a linear flexural-stiffness taper over ±1.5 section heights. Each
//! simulated crossing yields the vertical bridge acceleration at a sensor
//! location.

pub mod beam;
pub mod error;
pub mod io;
pub mod newmark;
pub mod passage;
pub mod road;
pub mod vehicle;

pub use beam::{assemble_beam, BeamModel, BeamSystem, CrackSpec};
pub use error::{Result, VbiError};
pub use passage::{simulate_passage, BridgeState, ContactHistory, PassageRecord, SimOptions};
pub use road::{generate_road_profile, RoadClass, RoadProfile};
pub use vehicle::{sample_vehicle_params, VehicleModel, VehicleRanges};

/// Standard gravity [m/s²].
pub const GRAVITY: f64 = 9.81;
