use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{CameraPose, Intrinsics, Pose};

/// Three level cameras (left, front, right) on a common mast.
///
/// Pixel convention: pixel `(u, v)` covers `[u, u+1) x [v, v+1)` and its
/// representative ray passes through image coordinate `(u, v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraRig {
    pub intrinsics: Intrinsics,
    /// Mount yaw of each camera relative to the robot heading, radians.
    pub yaw_offsets: Vec<f64>,
    pub mount_height: f64,
    /// Visual horizon `H_v`, metres.
    pub visual_horizon: f64,
    /// Minimum opening width treated as a visual frontier, metres.
    pub robot_diameter: f64,
    /// Unseen ground behind an opening must cover at least this area, in
    /// square metres, for the opening to count as a frontier.
    pub continuation_area: f64,
}

impl Default for CameraRig {
    fn default() -> Self {
        Self {
            // 90 deg horizontal field of view per camera. The tall focal
            // length keeps far ground rows distinguishable in a 96-row image.
            intrinsics: Intrinsics {
                fx: 80.0,
                fy: 240.0,
                cx: 80.0,
                cy: 12.0,
                width: 160,
                height: 96,
            },
            yaw_offsets: vec![
                std::f64::consts::FRAC_PI_2,
                0.0,
                -std::f64::consts::FRAC_PI_2,
            ],
            mount_height: 0.5,
            visual_horizon: 40.0,
            robot_diameter: 1.0,
            continuation_area: 16.0,
        }
    }
}

impl CameraRig {
    pub fn validate(&self, r_max: f64) -> Result<()> {
        let k = &self.intrinsics;
        if k.width == 0 || k.height == 0 {
            return Err(Error::invalid("image", "image size must be positive"));
        }
        if !(k.fx > 0.0 && k.fy > 0.0) {
            return Err(Error::invalid("focal", "focal lengths must be positive"));
        }
        if !(k.cy < k.height as f64) || k.cy < 0.0 {
            return Err(Error::invalid("cy", "horizon row must lie inside the image"));
        }
        if !(self.mount_height > 0.0) {
            return Err(Error::invalid("h_cam", "mount height must be positive"));
        }
        if !(self.visual_horizon > r_max) {
            return Err(Error::invalid("H_v", "visual horizon must exceed r_max"));
        }
        if self.yaw_offsets.is_empty() {
            return Err(Error::invalid("cameras", "rig needs at least one camera"));
        }
        Ok(())
    }

    pub fn camera_poses(&self, pose: &Pose) -> Vec<CameraPose> {
        self.yaw_offsets
            .iter()
            .map(|off| CameraPose::level(pose.position, self.mount_height, pose.heading + off))
            .collect()
    }
}

/// Flat-ground back-projection of a pixel: forward depth and lateral offset
/// in the camera frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundPoint {
    pub forward: f64,
    pub lateral: f64,
}

impl GroundPoint {
    pub fn horizontal_range(&self) -> f64 {
        self.forward.hypot(self.lateral)
    }
}

/// `None` for rows at or above the horizon.
pub fn ground_pixel_to_range(u: f64, v: f64, k: &Intrinsics, mount_height: f64) -> Option<GroundPoint> {
    if v <= k.cy {
        return None;
    }
    let forward = k.fy * mount_height / (v - k.cy);
    Some(GroundPoint {
        forward,
        lateral: forward * (u - k.cx) / k.fx,
    })
}
