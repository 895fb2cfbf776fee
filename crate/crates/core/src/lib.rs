//! Spatio-temporal radial basis function networks for one-step-ahead
//! prediction of chaotic time series.
//!
//! The crate generates Mackey-Glass data ([`series`]), places Gaussian or
//! multiquadric kernels with K-means ([`kernels`]), trains conventional and
//! spatio-temporal RBF networks online ([`network`]) and runs Monte-Carlo
//! comparisons of the two ([`experiment`]).
//!
//! ```
//! use strbf::series::{generate_mackey_glass, MackeyGlassParams};
//!
//! let series = generate_mackey_glass(&MackeyGlassParams::default()).unwrap();
//! assert_eq!(series.len(), 3001);
//! assert_eq!(series.values()[0], 1.2);
//! ```

pub mod csvfmt;
pub mod error;
pub mod experiment;
pub mod kernels;
pub mod network;
pub mod series;

pub use error::{Error, Result};
pub use experiment::{run_monte_carlo, ExperimentConfig, MonteCarlo, RunStats};
pub use kernels::{KernelKind, KernelSpec};
pub use network::{BranchInput, ModelKind, NetworkState, Topology};
pub use series::{generate_mackey_glass, IndexRange, MackeyGlassParams, TimeSeries};
