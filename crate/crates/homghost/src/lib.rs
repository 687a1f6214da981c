//! Discrete-position simulator of ghost imaging with symmetry-engineered
//! biphoton states: an SPDC source feeds a Dove-prism rotation, an optional
//! Hong-Ou-Mandel filter, object projection, and coincidence-based
//! reconstruction, alongside an OAM spiral-bandwidth model and an
//! exchange-symmetry verification kernel.
//!
//! The crate is organized as a small pipeline library plus a CLI runner:
//! [`state`] holds the two-photon amplitude table and the optical elements,
//! [`imaging`] the mask protocols and reconstructions, [`oam`] the
//! angular-momentum picture of the same filter, [`symmetry`] the dense
//! exchange-operator checks, and [`runner`]/[`config`] the batch entry points
//! used by the `homghost` binary.

pub mod config;
pub mod detect;
pub mod error;
pub mod grid;
pub mod imaging;
pub mod oam;
pub mod objects;
pub mod pgm;
pub mod rng;
pub mod runner;
pub mod state;
pub mod symmetry;

pub use config::{ExperimentConfig, Pipeline, ScanConfig, SpiralConfig};
pub use error::{Error, Result};
pub use grid::{Image, PixelCoord, PixelGrid, RotationOp};
pub use imaging::{MeasureMask, ObjectMask, ProjectionMode};
pub use state::{BiphotonState, SinglePhotonState, SpdcProfile};
