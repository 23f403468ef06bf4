//! Deterministic closed-loop exploration simulator and planning library.
//!
//! The crate is organised along the decision pipeline that runs every tick:
//!
//! 1. [`sensors`] samples a local traversability grid and three oracle camera
//!    frames from the ground-truth [`world`].
//! 2. [`navgraph`] folds the local grid into a sparse navigation graph that
//!    remembers explored space and tracks geometric frontiers.
//! 3. [`triangulation`] turns multi-view object masks into a coarse goal.
//! 4. [`scoring`] projects frontier nodes into the camera frames and stores a
//!    per-heading score vector on each of them.
//! 5. [`planner`] searches the scored graph through an auxiliary goal node and
//!    hands a local goal to the kinematic stepper.
//!
//! [`baselines`] holds the two comparison policies and [`harness`] runs
//! episodes, suites, exports and renders.

pub mod baselines;
pub mod error;
pub mod geom;
pub mod grid;
pub mod harness;
pub mod navgraph;
pub mod planner;
pub mod scoring;
pub mod sensors;
pub mod triangulation;
pub mod world;

pub use error::{Error, Result};
