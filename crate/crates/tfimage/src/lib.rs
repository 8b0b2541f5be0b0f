//! Time-frequency imaging of vibration and voltage traces.
//!
//! An analytic-Morlet CWT on log-spaced scales is synchrosqueezed onto
//! linear frequency bins, log-compressed, normalized and resampled into a
//! fixed-size grayscale image.

pub mod config;
pub mod cwt;
pub mod error;
pub mod image;
pub mod io;
pub mod wsst;

pub use config::{Normalization, WsstConfig};
pub use cwt::{cwt, cwt_with_derivative, Cwt};
pub use error::{Result, TfError};
pub use image::{signal_to_image, to_image, TfImage};
pub use io::{read_image, write_image, write_png};
pub use wsst::{wsst, TfMatrix};
