//! Hybrid dead-beat observers for systems of the form
//!
//! ```text
//! x' = A(y,u) x + b(y,u)
//! y' = f(y,u) + C(y)^T x
//! ```
//!
//! where only `y` (and the input `u`) is measured. Every `r` seconds the
//! observer replaces its estimate with the least-squares reconstruction from
//! the last window of output, which is exact on noiseless data.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod apps;
pub mod cli;
pub mod error;
pub mod numerics;
pub mod observer;
pub mod plant;
pub mod system;
pub mod window;

pub use error::{Error, Result};
pub use numerics::{Grid, Matrix, Vector};
pub use observer::{
    observer_init, observer_step, run_observer, DegeneratePolicy, EstimateTrace, ObserverConfig, ObserverMode,
    ObserverSnapshot,
};
pub use plant::{corrupt, simulate_plant, SensorModel, SimConfig, Trace};
pub use system::{make_lti, InputSignal, PlantState, SystemSpec};
pub use window::{
    compute_window, estimate_window, gram, observability_certificate, reconstruct_final_state, Certificate,
    GramSummary, IoWindow,
};
