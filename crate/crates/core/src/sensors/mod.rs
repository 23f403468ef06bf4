//! Simulated observation: a depth-limited geometric grid and three oracle
//! cameras standing in for the learned perception model.

mod camera;
mod geometric;
mod vision;

pub use camera::{ground_pixel_to_range, CameraRig, GroundPoint};
pub use geometric::{sense_geometric, CellState, TraversabilityGrid};
pub use vision::{render_vision, VisionFrame};
