//! Surrogate modelling and bi-objective search for harvester design.

mod error;
pub mod kriging;
pub mod nsga2;

pub use error::{OptimError, Result};
pub use kriging::{kriging_fit, KrigingModel, KrigingOptions, Prediction};
pub use nsga2::{
    crowding_distance, dominates, fast_nondominated_sort, hypervolume, nsga2, Nsga2Config, Objectives, ParetoPoint,
    ParetoSet,
};
