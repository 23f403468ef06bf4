//! Top-down SVG drawings of an episode, one per tick.

use std::fmt::Write;
use std::path::Path;

use super::episode::{EpisodeLog, GraphFrame};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::world::{Scenario, Terrain};

const SCALE: f64 = 8.0;

struct Canvas {
    height_m: f64,
}

impl Canvas {
    fn x(&self, v: f64) -> f64 {
        v * SCALE
    }

    fn y(&self, v: f64) -> f64 {
        (self.height_m - v) * SCALE
    }

    fn pt(&self, p: &Vec2) -> (f64, f64) {
        (self.x(p.x), self.y(p.y))
    }

    fn polyline(&self, pts: &[Vec2], style: &str) -> String {
        let mut s = String::from("<polyline points=\"");
        for p in pts {
            let (x, y) = self.pt(p);
            let _ = write!(s, "{x:.1},{y:.1} ");
        }
        let _ = write!(s, "\" fill=\"none\" {style}/>");
        s
    }
}

fn score_color(s: f64) -> String {
    let s = s.clamp(0.0, 1.0);
    let r = (255.0 * (1.0 - s)) as u8;
    let g = (200.0 * s) as u8;
    format!("rgb({r},{g},60)")
}

/// Static layer: terrain runs, targets and regions.
fn world_layer(scenario: &Scenario, c: &Canvas) -> String {
    let w = &scenario.world;
    let res = w.resolution;
    let mut s = String::new();
    for y in 0..w.height as i32 {
        let mut x = 0;
        while x < w.width as i32 {
            let t = w.terrain(crate::grid::Cell::new(x, y));
            if t == Terrain::Ground {
                x += 1;
                continue;
            }
            let start = x;
            while x < w.width as i32 && w.terrain(crate::grid::Cell::new(x, y)) == t {
                x += 1;
            }
            let fill = if t == Terrain::Obstacle { "#444" } else { "#6ab0de" };
            let _ = write!(
                s,
                "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"{fill}\"/>",
                c.x(start as f64 * res),
                c.y((y + 1) as f64 * res),
                (x - start) as f64 * res * SCALE,
                res * SCALE
            );
        }
    }
    for r in &scenario.regions {
        let _ = write!(
            s,
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"#c0392b\" stroke-dasharray=\"4 3\"/>",
            c.x(r.min.x),
            c.y(r.max.y),
            (r.max.x - r.min.x) * SCALE,
            (r.max.y - r.min.y) * SCALE
        );
    }
    for t in &w.targets {
        let (x, y) = c.pt(&t.position);
        let _ = write!(
            s,
            "<circle cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"{:.1}\" fill=\"#8e44ad\"/>",
            (t.radius * SCALE).max(2.0)
        );
    }
    s
}

fn graph_layer(frame: &GraphFrame, c: &Canvas) -> String {
    let mut s = String::new();
    for n in &frame.nodes {
        let (x, y) = c.pt(&n.position);
        let _ = write!(
            s,
            "<circle cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"{:.1}\" fill=\"#2e86c1\" fill-opacity=\"0.06\"/>",
            n.explored_radius * SCALE
        );
    }
    for (a, b) in &frame.edges {
        let (x1, y1) = c.pt(a);
        let (x2, y2) = c.pt(b);
        let _ = write!(
            s,
            "<line x1=\"{x1:.1}\" y1=\"{y1:.1}\" x2=\"{x2:.1}\" y2=\"{y2:.1}\" stroke=\"#999\" stroke-width=\"0.6\"/>"
        );
    }
    for n in &frame.nodes {
        let (x, y) = c.pt(&n.position);
        if n.frontier {
            let k = n.scores.len().max(1) as f64;
            for (i, sc) in n.scores.iter().enumerate() {
                let a = i as f64 * std::f64::consts::TAU / k;
                let (px, py) = (x + 6.0 * a.cos(), y - 6.0 * a.sin());
                let _ = write!(
                    s,
                    "<circle cx=\"{px:.1}\" cy=\"{py:.1}\" r=\"1.4\" fill=\"{}\"/>",
                    score_color(*sc)
                );
            }
        }
        let _ = write!(
            s,
            "<circle cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"1.8\" fill=\"{}\"/>",
            if n.frontier { "#e67e22" } else { "#2e86c1" }
        );
    }
    if frame.plan.len() > 1 {
        s.push_str(&c.polyline(&frame.plan, "stroke=\"#27ae60\" stroke-width=\"1.5\" stroke-dasharray=\"3 2\""));
    }
    s
}

/// One SVG document per logged tick. Graph layers appear for ticks recorded
/// with graph capture enabled.
pub fn render_episode(scenario: &Scenario, log: &EpisodeLog) -> Vec<String> {
    if log.ticks.is_empty() {
        return Vec::new();
    }
    let ext = scenario.world.extent();
    let c = Canvas { height_m: ext.y };
    let header = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"0 0 {:.0} {:.0}\">",
        ext.x * SCALE,
        ext.y * SCALE,
        ext.x * SCALE,
        ext.y * SCALE
    );
    let world = world_layer(scenario, &c);
    let true_goal = scenario.true_goal();
    log.ticks
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let mut s = header.clone();
            s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"#f4f1e8\"/>");
            s.push_str(&world);
            if let Some(f) = log.graph_frames.iter().find(|f| f.tick == t.tick) {
                s.push_str(&graph_layer(f, &c));
            }
            let traj = &log.trajectory[..(i + 2).min(log.trajectory.len())];
            s.push_str(&c.polyline(traj, "stroke=\"#c0392b\" stroke-width=\"1.8\""));
            let (sx, sy) = c.pt(&log.trajectory[0]);
            let _ = write!(s, "<circle id=\"start\" cx=\"{sx:.1}\" cy=\"{sy:.1}\" r=\"4\" fill=\"none\" stroke=\"#000\" stroke-width=\"1.5\"/>");
            let (gx, gy) = c.pt(&scenario.goal);
            let _ = write!(s, "<path id=\"prior-goal\" d=\"M{:.1},{:.1} l8,8 m0,-8 l-8,8\" stroke=\"#000\" stroke-width=\"1.5\"/>", gx - 4.0, gy - 4.0);
            let (tx, ty) = c.pt(&true_goal);
            let _ = write!(s, "<circle id=\"goal\" cx=\"{tx:.1}\" cy=\"{ty:.1}\" r=\"{:.1}\" fill=\"none\" stroke=\"#8e44ad\"/>", 0.5 * SCALE);
            let (ax, ay) = c.pt(&Vec2::new(t.goal_x, t.goal_y));
            let _ = write!(s, "<rect id=\"active-goal\" x=\"{:.1}\" y=\"{:.1}\" width=\"6\" height=\"6\" fill=\"#f1c40f\" stroke=\"#000\"/>", ax - 3.0, ay - 3.0);
            let (lx, ly) = c.pt(&Vec2::new(t.local_x, t.local_y));
            let _ = write!(s, "<circle id=\"local-goal\" cx=\"{lx:.1}\" cy=\"{ly:.1}\" r=\"2.5\" fill=\"#27ae60\"/>");
            let (rx, ry) = c.pt(&Vec2::new(t.x, t.y));
            let _ = write!(s, "<circle id=\"robot\" cx=\"{rx:.1}\" cy=\"{ry:.1}\" r=\"3\" fill=\"#c0392b\"/>");
            let _ = write!(
                s,
                "<text x=\"6\" y=\"16\" font-family=\"monospace\" font-size=\"12\">{} {} seed {} tick {}</text></svg>",
                log.scenario, log.policy, log.seed, t.tick
            );
            s
        })
        .collect()
}

/// Writes `frame_00000.svg`, ... into `dir`, creating it if needed.
pub fn write_svgs(dir: impl AsRef<Path>, svgs: &[String]) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (i, svg) in svgs.iter().enumerate() {
        let p = dir.join(format!("frame_{i:05}.svg"));
        std::fs::write(&p, svg).map_err(|e| Error::io(&p, e))?;
    }
    Ok(())
}
