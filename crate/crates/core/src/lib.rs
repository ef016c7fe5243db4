//! Finite-volume solvers and experiment harness for a triangular
//! cross-diffusion competition system and its fast-reaction approximation.
//!
//! * [`grid`]: cell-centered grids, fields, Neumann Laplacian, norms.
//! * [`model`]: parameters, reactions, cross-diffusion functions and the
//!   construction of fast-reaction exchange rates.
//! * [`xdiff`] and [`fast`]: the two time integrators.
//! * [`diagnostics`]: entropy, defects, weak residuals, stability gaps.
//! * [`harness`]: ε-sweeps, refinement and stability experiments.
//! * [`config`] and [`io`]: TOML configs, CSV snapshots, JSON reports.

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod fast;
pub mod grid;
pub mod harness;
pub mod io;
mod linsolve;
pub mod model;
pub mod solver;
pub mod xdiff;

pub use config::{parse_config, parse_config_with, serialize, ConfigError, Mode, RunConfig};
pub use error::{Error, Result};
pub use fast::{exchange_exact, initial_fast_state, partition_initial, run_fast, step_fast, FastState};
pub use grid::{integrate, laplacian_neumann, lp_norm, Field, Grid};
pub use harness::{eps_sweep, refine_study, stability_experiment, Problem, Profile};
pub use model::{build_fast_reaction, CrossFunction, FastReactionConfig, ModelParams, Regime};
pub use solver::{History, NoObserver, Observer, SolverConfig};
pub use xdiff::{run_cross, step_cross, CrossDiffState};
