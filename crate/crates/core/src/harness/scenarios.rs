//! Built-in scenario library. Each builder returns a validated [`Scenario`];
//! [`write_library`] saves them as text files for the CLI.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::world::{Region, Scenario, TargetObject, Terrain, WorldGrid};

const RES: f64 = 0.25;

fn world(w_m: f64, h_m: f64) -> WorldGrid {
    WorldGrid::new((w_m / RES).round() as usize, (h_m / RES).round() as usize, RES)
        .expect("library sizes are positive")
}

fn seg_dist(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Clears a trail of the given width along a polyline.
fn carve(w: &mut WorldGrid, pts: &[Vec2], width: f64) {
    let half = width / 2.0;
    let pts = pts.to_vec();
    w.paint(Terrain::Ground, move |p| {
        pts.windows(2).any(|s| seg_dist(p, s[0], s[1]) <= half)
    });
}

fn ring(w: &mut WorldGrid, center: Vec2, r: f64, thickness: f64, gap: Option<(f64, f64)>) {
    w.paint(Terrain::Obstacle, move |p| {
        let d = p - center;
        if (d.norm() - r).abs() > thickness / 2.0 {
            return false;
        }
        match gap {
            Some((dir, half)) => {
                let a = d.y.atan2(d.x) - dir.to_radians();
                let a = a.sin().atan2(a.cos());
                a.abs() * r > half
            }
            None => true,
        }
    });
}

fn rect(w: &mut WorldGrid, t: Terrain, min: Vec2, max: Vec2) {
    w.paint(t, move |p| p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y);
}

fn region(name: &str, x0: f64, y0: f64, x1: f64, y1: f64) -> Region {
    Region {
        name: name.into(),
        min: Vec2::new(x0, y0),
        max: Vec2::new(x1, y1),
    }
}

fn finish(s: Scenario) -> Scenario {
    s.validate().expect("library scenario is valid");
    s
}

/// Empty 30 x 30 m field; the goal is 20 m straight ahead.
pub fn open_field() -> Scenario {
    finish(Scenario {
        name: "open_field".into(),
        world: world(30.0, 30.0),
        start: Vec2::new(15.0, 5.0),
        start_heading_deg: 90.0,
        goal: Vec2::new(15.0, 25.0),
        query: None,
        budget: 80,
        seed: 1,
        regions: Vec::new(),
    })
}

/// Two circular fences side by side with a 4 m corridor between them, in a
/// walled field. Hedges tie both fences to the side walls, so the corridor
/// is the only way to the goal behind the right fence.
pub fn corridor() -> Scenario {
    let mut w = world(80.0, 70.0);
    rect(&mut w, Terrain::Obstacle, Vec2::new(0.0, 0.0), Vec2::new(80.0, 70.0));
    rect(&mut w, Terrain::Ground, Vec2::new(1.0, 1.0), Vec2::new(79.0, 69.0));
    ring(&mut w, Vec2::new(55.0, 45.0), 8.0, 0.5, None);
    ring(&mut w, Vec2::new(35.0, 45.0), 8.0, 0.5, None);
    rect(&mut w, Terrain::Obstacle, Vec2::new(55.0, 36.75), Vec2::new(80.0, 37.25));
    rect(&mut w, Terrain::Obstacle, Vec2::new(0.0, 36.75), Vec2::new(35.0, 37.25));
    finish(Scenario {
        name: "corridor".into(),
        world: w,
        start: Vec2::new(62.0, 15.0),
        start_heading_deg: 90.0,
        goal: Vec2::new(62.0, 62.0),
        query: None,
        budget: 300,
        seed: 2,
        regions: vec![region("corridor", 43.0, 40.0, 47.0, 50.0)],
    })
}

/// Dense scrub with a trail fork. The left arm bends out of sight and ends
/// at a parked car; the right arm is longer but reaches the goal clearing.
pub fn dead_end() -> Scenario {
    let mut w = world(50.0, 70.0);
    rect(&mut w, Terrain::Obstacle, Vec2::new(0.0, 0.0), Vec2::new(50.0, 70.0));
    let trail = 3.0;
    carve(&mut w, &[Vec2::new(25.0, 3.0), Vec2::new(25.0, 20.0)], trail);
    carve(
        &mut w,
        &[
            Vec2::new(25.0, 20.0),
            Vec2::new(14.0, 30.0),
            Vec2::new(14.0, 52.0),
        ],
        trail,
    );
    carve(
        &mut w,
        &[
            Vec2::new(25.0, 20.0),
            Vec2::new(38.0, 28.0),
            Vec2::new(38.0, 52.0),
            Vec2::new(26.0, 58.0),
        ],
        trail,
    );
    w.paint(Terrain::Ground, |p| (p - Vec2::new(22.0, 60.0)).norm() <= 6.0);
    // Parked car across the left arm, past the bend.
    rect(&mut w, Terrain::Obstacle, Vec2::new(11.5, 40.0), Vec2::new(16.5, 42.0));
    finish(Scenario {
        name: "dead_end".into(),
        world: w,
        start: Vec2::new(25.0, 4.0),
        start_heading_deg: 90.0,
        goal: Vec2::new(20.0, 61.0),
        query: None,
        budget: 300,
        seed: 3,
        regions: vec![region("blocked_arm", 11.0, 31.0, 17.0, 53.0)],
    })
}

/// A cluster of buildings between the start and a goal tucked behind them.
pub fn buildings() -> Scenario {
    let mut w = world(60.0, 60.0);
    let blocks = [
        (12.0, 24.0, 26.0, 34.0),
        (28.0, 24.0, 40.0, 38.0),
        (42.0, 22.0, 50.0, 30.0),
        (20.0, 38.0, 34.0, 44.0),
    ];
    for (x0, y0, x1, y1) in blocks {
        rect(&mut w, Terrain::Obstacle, Vec2::new(x0, y0), Vec2::new(x1, y1));
    }
    rect(&mut w, Terrain::Hazard, Vec2::new(50.0, 36.0), Vec2::new(60.0, 42.0));
    finish(Scenario {
        name: "buildings".into(),
        world: w,
        start: Vec2::new(30.0, 6.0),
        start_heading_deg: 90.0,
        goal: Vec2::new(30.0, 52.0),
        query: None,
        budget: 250,
        seed: 4,
        regions: vec![region("cluster", 12.0, 22.0, 50.0, 44.0)],
    })
}

/// Sparse trees and a tall water tank about 50 m from the start. The prior
/// goal is off by several metres; the tank must be found visually.
pub fn object_search() -> Scenario {
    let mut w = world(70.0, 80.0);
    let trees = [
        (20.0, 20.0),
        (40.0, 18.0),
        (28.0, 32.0),
        (46.0, 36.0),
        (18.0, 44.0),
        (36.0, 48.0),
        (52.0, 52.0),
        (26.0, 58.0),
    ];
    for (x, y) in trees {
        let c = Vec2::new(x, y);
        w.paint(Terrain::Obstacle, move |p| (p - c).norm() <= 1.2);
    }
    w.targets.push(TargetObject {
        label: "water_tank".into(),
        position: Vec2::new(38.125, 62.125),
        height: 8.0,
        radius: 1.5,
        anchor: 'A',
    });
    finish(Scenario {
        name: "object_search".into(),
        world: w,
        start: Vec2::new(57.0, 12.0),
        start_heading_deg: 90.0,
        goal: Vec2::new(30.0, 66.0),
        query: Some("water_tank".into()),
        budget: 200,
        seed: 5,
        regions: Vec::new(),
    })
}

pub fn library() -> Vec<Scenario> {
    vec![open_field(), corridor(), dead_end(), buildings(), object_search()]
}

pub fn by_name(name: &str) -> Option<Scenario> {
    library().into_iter().find(|s| s.name == name)
}

/// Saves every library scenario as `<name>.txt` under `dir`.
pub fn write_library(dir: impl AsRef<Path>) -> Result<Vec<std::path::PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    library()
        .into_iter()
        .map(|s| {
            let p = dir.join(format!("{}.txt", s.name));
            s.save(&p)?;
            Ok(p)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::parse_scenario;

    #[test]
    fn library_round_trips() {
        for s in library() {
            let back = parse_scenario(&s.to_text()).unwrap();
            assert_eq!(back.world, s.world, "{}", s.name);
            assert_eq!(back.regions, s.regions);
        }
    }

    #[test]
    fn corridor_gap_is_open_and_fences_closed() {
        let s = corridor();
        assert_eq!(s.world.terrain_at(&Vec2::new(45.0, 45.0)), Terrain::Ground);
        assert_eq!(s.world.terrain_at(&Vec2::new(55.0, 37.0)), Terrain::Obstacle);
        assert_eq!(s.world.terrain_at(&Vec2::new(70.0, 37.0)), Terrain::Obstacle);
    }

    #[test]
    fn dead_end_arms() {
        let s = dead_end();
        assert_eq!(s.world.terrain_at(&Vec2::new(14.0, 41.0)), Terrain::Obstacle);
        assert_eq!(s.world.terrain_at(&Vec2::new(38.0, 41.0)), Terrain::Ground);
        assert_eq!(s.world.terrain_at(&s.goal), Terrain::Ground);
    }
}
