//! Planar poses, pinhole intrinsics and camera extrinsics.
//!
//! World frame is right-handed with `z` up; the ground is the `z = 0` plane.
//! Camera frames follow the usual optical convention (`x` right, `y` down,
//! `z` forward).

use nalgebra::{Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

pub type Vec2 = Vector2<f64>;
pub type Vec3 = Vector3<f64>;

/// Planar robot pose; `heading` in radians, counter-clockwise from `+x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec2,
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            position: Vec2::new(x, y),
            heading,
        }
    }

    pub fn direction(&self) -> Vec2 {
        Vec2::new(self.heading.cos(), self.heading.sin())
    }
}

pub fn unit_from_angle(angle: f64) -> Vec2 {
    Vec2::new(angle.cos(), angle.sin())
}

/// Wraps an angle into `[-pi, pi)`.
pub fn wrap_angle(angle: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut a = (angle + std::f64::consts::PI) % two_pi;
    if a < 0.0 {
        a += two_pi;
    }
    a - std::f64::consts::PI
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

impl Intrinsics {
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(self.fx, 0.0, self.cx, 0.0, self.fy, self.cy, 0.0, 0.0, 1.0)
    }

    /// `K^-1 [u, v, 1]^T`, i.e. the camera-frame ray with unit depth.
    pub fn unproject(&self, u: f64, v: f64) -> Vec3 {
        Vec3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0)
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }
}

/// Camera-to-world rigid transform `p_world = R p_cam + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
}

impl CameraPose {
    /// Level camera at `height` above `position`, optical axis along `yaw`.
    pub fn level(position: Vec2, height: f64, yaw: f64) -> Self {
        let (s, c) = yaw.sin_cos();
        let forward = Vec3::new(c, s, 0.0);
        let right = Vec3::new(s, -c, 0.0);
        let down = Vec3::new(0.0, 0.0, -1.0);
        Self {
            rotation: Matrix3::from_columns(&[right, down, forward]),
            translation: Vec3::new(position.x, position.y, height),
        }
    }

    pub fn center(&self) -> Vec3 {
        self.translation
    }

    pub fn forward(&self) -> Vec3 {
        self.rotation.column(2).into_owned()
    }

    pub fn right(&self) -> Vec3 {
        self.rotation.column(0).into_owned()
    }

    pub fn to_world(&self, p_cam: &Vec3) -> Vec3 {
        self.rotation * p_cam + self.translation
    }

    pub fn to_camera(&self, p_world: &Vec3) -> Vec3 {
        self.rotation.transpose() * (p_world - self.translation)
    }

    /// Continuous pixel coordinates of a world point, `None` when the point
    /// is not strictly in front of the camera.
    pub fn project(&self, k: &Intrinsics, p_world: &Vec3) -> Option<(f64, f64)> {
        let p = self.to_camera(p_world);
        if p.z <= 1e-9 {
            return None;
        }
        Some((k.fx * p.x / p.z + k.cx, k.fy * p.y / p.z + k.cy))
    }

    /// Horizontal yaw of the optical axis.
    pub fn yaw(&self) -> f64 {
        let f = self.forward();
        f.y.atan2(f.x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn level_camera_is_a_rotation() {
        let cam = CameraPose::level(Vec2::new(1.0, 2.0), 0.5, 0.7);
        assert_relative_eq!(cam.rotation.determinant(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(cam.yaw(), 0.7, epsilon = 1e-12);
    }

    #[test]
    fn projects_point_on_axis_to_principal_column() {
        let k = Intrinsics {
            fx: 80.0,
            fy: 80.0,
            cx: 80.0,
            cy: 24.0,
            width: 160,
            height: 96,
        };
        let cam = CameraPose::level(Vec2::zeros(), 0.5, 0.0);
        let (u, v) = cam.project(&k, &Vec3::new(5.0, 0.0, 0.0)).unwrap();
        assert_relative_eq!(u, 80.0, epsilon = 1e-9);
        assert_relative_eq!(v, 24.0 + 80.0 * 0.5 / 5.0, epsilon = 1e-9);
        assert!(cam.project(&k, &Vec3::new(-5.0, 0.0, 0.0)).is_none());
    }

    #[test]
    fn wrap_angle_range() {
        for a in [-10.0, -3.2, 0.0, 3.2, 10.0] {
            let w = wrap_angle(a);
            assert!((-std::f64::consts::PI..std::f64::consts::PI).contains(&w));
            assert_relative_eq!(w.sin(), f64::sin(a), epsilon = 1e-12);
        }
    }
}
