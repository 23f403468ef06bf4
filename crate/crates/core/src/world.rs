//! Ground-truth environment and the plain-text scenario format.
//!
//! A scenario file is a block of header lines, one blank line, then the
//! character grid. The first grid line is the northern edge (largest `y`).
//!
//! ```text
//! name: fence_gap
//! resolution: 0.1
//! start: 2.5 1.0 90
//! goal: 2.5 8.0
//! query: water_tank
//! budget: 200
//! seed: 7
//! target A water_tank 2.0 0.3
//! region left_arm 1.0 4.0 2.0 6.0
//!
//! ..........
//! ....A.....
//! ..######..
//! ..........
//! ```
//!
//! Header keys: `name`, `resolution` (m/cell), `start` (`x y [heading_deg]`
//! in metres), `goal` (`x y`), `query` (label), `budget` (ticks), `seed`.
//! `target <letter> <label> <height> <radius>` binds a grid anchor letter to
//! a cylinder. `region <name> <x0> <y0> <x1> <y1>` declares an axis-aligned
//! box used only by episode metrics. Grid characters: `.` ground, `#`
//! obstacle, `~` hazard, `A`-`Z` target anchors (ground underneath).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Pose, Vec2};
use crate::grid::Cell;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Terrain {
    Ground,
    Obstacle,
    /// Geometrically flat, visually non-traversable (water, mud).
    Hazard,
}

impl Terrain {
    pub fn from_char(c: char) -> Option<Terrain> {
        match c {
            '.' => Some(Terrain::Ground),
            '#' => Some(Terrain::Obstacle),
            '~' => Some(Terrain::Hazard),
            'A'..='Z' => Some(Terrain::Ground),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Terrain::Ground => '.',
            Terrain::Obstacle => '#',
            Terrain::Hazard => '~',
        }
    }
}

/// Upright cylinder standing on the ground. Targets do not block motion or
/// the geometric sensor; they only appear in the object masks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetObject {
    pub label: String,
    pub position: Vec2,
    pub height: f64,
    pub radius: f64,
    /// Anchor letter in the scenario grid.
    pub anchor: char,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldGrid {
    pub width: usize,
    pub height: usize,
    pub resolution: f64,
    cells: Vec<Terrain>,
    pub targets: Vec<TargetObject>,
}

impl WorldGrid {
    pub fn new(width: usize, height: usize, resolution: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("size", "width and height must be positive"));
        }
        if !(resolution > 0.0) || !resolution.is_finite() {
            return Err(Error::invalid("resolution", "must be a positive number"));
        }
        Ok(Self {
            width,
            height,
            resolution,
            cells: vec![Terrain::Ground; width * height],
            targets: Vec::new(),
        })
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x >= 0 && c.y >= 0 && (c.x as usize) < self.width && (c.y as usize) < self.height
    }

    pub fn contains_point(&self, p: &Vec2) -> bool {
        p.x >= 0.0
            && p.y >= 0.0
            && p.x < self.width as f64 * self.resolution
            && p.y < self.height as f64 * self.resolution
    }

    /// Terrain of a cell; everything outside the map is an obstacle.
    pub fn terrain(&self, c: Cell) -> Terrain {
        if self.in_bounds(c) {
            self.cells[c.y as usize * self.width + c.x as usize]
        } else {
            Terrain::Obstacle
        }
    }

    pub fn terrain_at(&self, p: &Vec2) -> Terrain {
        self.terrain(self.cell_of(p))
    }

    pub fn set(&mut self, c: Cell, t: Terrain) {
        if self.in_bounds(c) {
            let w = self.width;
            self.cells[c.y as usize * w + c.x as usize] = t;
        }
    }

    pub fn cell_of(&self, p: &Vec2) -> Cell {
        Cell::from_point(p, self.resolution)
    }

    pub fn extent(&self) -> Vec2 {
        Vec2::new(
            self.width as f64 * self.resolution,
            self.height as f64 * self.resolution,
        )
    }

    pub fn cells(&self) -> &[Terrain] {
        &self.cells
    }

    pub fn target(&self, label: &str) -> Option<&TargetObject> {
        self.targets.iter().find(|t| t.label == label)
    }

    /// Fill every cell whose center satisfies `pred`.
    pub fn paint(&mut self, t: Terrain, pred: impl Fn(Vec2) -> bool) {
        for y in 0..self.height as i32 {
            for x in 0..self.width as i32 {
                let c = Cell::new(x, y);
                if pred(c.center(self.resolution)) {
                    self.set(c, t);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub name: String,
    pub min: Vec2,
    pub max: Vec2,
}

impl Region {
    pub fn contains(&self, p: &Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub world: WorldGrid,
    pub start: Vec2,
    pub start_heading_deg: f64,
    /// Approximate prior goal.
    pub goal: Vec2,
    pub query: Option<String>,
    pub budget: usize,
    pub seed: u64,
    pub regions: Vec<Region>,
}

impl Scenario {
    pub fn start_pose(&self) -> Pose {
        Pose {
            position: self.start,
            heading: self.start_heading_deg.to_radians(),
        }
    }

    /// The queried target, when the query names an object in the world.
    pub fn target(&self) -> Option<&TargetObject> {
        self.query.as_deref().and_then(|q| self.world.target(q))
    }

    /// Where the episode must end: the queried object if it exists, else the
    /// prior goal.
    pub fn true_goal(&self) -> Vec2 {
        self.target().map(|t| t.position).unwrap_or(self.goal)
    }

    /// Distance from `p` to the true goal. A target counts from its
    /// footprint edge, since its centre lies inside the object.
    pub fn reach_distance(&self, p: &Vec2) -> f64 {
        match self.target() {
            Some(t) => ((p - t.position).norm() - t.radius).max(0.0),
            None => (p - self.goal).norm(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let w = &self.world;
        if !w.contains_point(&self.start) {
            return Err(Error::invalid("start", "outside the grid"));
        }
        if w.terrain_at(&self.start) != Terrain::Ground {
            return Err(Error::invalid("start", "start not on Ground"));
        }
        if !w.contains_point(&self.goal) {
            return Err(Error::invalid("goal", "outside the grid"));
        }
        if !self.start_heading_deg.is_finite() {
            return Err(Error::invalid("start", "heading must be finite"));
        }
        for t in &w.targets {
            if !w.contains_point(&t.position) {
                return Err(Error::invalid("target", format!("{} outside the grid", t.label)));
            }
            if !(t.height > 0.0) {
                return Err(Error::invalid("target", format!("{} height must be > 0", t.label)));
            }
            if !(t.radius > 0.0) {
                return Err(Error::invalid("target", format!("{} radius must be > 0", t.label)));
            }
        }
        for r in &self.regions {
            if r.min.x > r.max.x || r.min.y > r.max.y {
                return Err(Error::invalid("region", format!("{} has inverted bounds", r.name)));
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let w = &self.world;
        let mut s = String::new();
        let _ = writeln!(s, "name: {}", self.name);
        let _ = writeln!(s, "resolution: {}", w.resolution);
        let _ = writeln!(
            s,
            "start: {} {} {}",
            self.start.x, self.start.y, self.start_heading_deg
        );
        let _ = writeln!(s, "goal: {} {}", self.goal.x, self.goal.y);
        if let Some(q) = &self.query {
            let _ = writeln!(s, "query: {q}");
        }
        let _ = writeln!(s, "budget: {}", self.budget);
        let _ = writeln!(s, "seed: {}", self.seed);
        for t in &w.targets {
            let _ = writeln!(s, "target {} {} {} {}", t.anchor, t.label, t.height, t.radius);
        }
        for r in &self.regions {
            let _ = writeln!(
                s,
                "region {} {} {} {} {}",
                r.name, r.min.x, r.min.y, r.max.x, r.max.y
            );
        }
        s.push('\n');
        let mut anchors = BTreeMap::new();
        for t in &w.targets {
            anchors.insert(w.cell_of(&t.position), t.anchor);
        }
        for y in (0..w.height as i32).rev() {
            for x in 0..w.width as i32 {
                let c = Cell::new(x, y);
                s.push(anchors.get(&c).copied().unwrap_or_else(|| w.terrain(c).to_char()));
            }
            s.push('\n');
        }
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut scenario = parse_scenario(&text)?;
    if scenario.name.is_empty() {
        scenario.name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
    }
    Ok(scenario)
}

struct TargetSpec {
    line: usize,
    label: String,
    height: f64,
    radius: f64,
}

fn parse_f64(line: usize, field: &str, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse(line, format!("{field}: expected a number, got `{s}`")))
}

fn parse_numbers(line: usize, field: &str, value: &str, min: usize, max: usize) -> Result<Vec<f64>> {
    let parts: Vec<&str> = value.split_whitespace().collect();
    if parts.len() < min || parts.len() > max {
        return Err(Error::parse(
            line,
            format!("{field}: expected {min}..={max} numbers, got {}", parts.len()),
        ));
    }
    parts.iter().map(|p| parse_f64(line, field, p)).collect()
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let lines: Vec<&str> = text.lines().collect();
    let mut i = 0;
    let mut name = String::new();
    let mut resolution = 0.1;
    let mut start = None;
    let mut goal = None;
    let mut query = None;
    let mut budget = 500usize;
    let mut seed = 0u64;
    let mut targets: BTreeMap<char, TargetSpec> = BTreeMap::new();
    let mut regions = Vec::new();

    while i < lines.len() && !lines[i].trim().is_empty() {
        let lineno = i + 1;
        let line = lines[i].trim();
        i += 1;
        if line.starts_with("//") {
            continue;
        }
        let mut words = line.split_whitespace();
        match words.next() {
            Some("target") => {
                let rest: Vec<&str> = words.collect();
                if rest.len() != 4 {
                    return Err(Error::parse(
                        lineno,
                        "target: expected `target <letter> <label> <height> <radius>`",
                    ));
                }
                let mut letter = rest[0].chars();
                let anchor = match (letter.next(), letter.next()) {
                    (Some(c @ 'A'..='Z'), None) => c,
                    _ => return Err(Error::parse(lineno, "target: anchor must be one letter A-Z")),
                };
                let spec = TargetSpec {
                    line: lineno,
                    label: rest[1].to_string(),
                    height: parse_f64(lineno, "target height", rest[2])?,
                    radius: parse_f64(lineno, "target radius", rest[3])?,
                };
                if targets.insert(anchor, spec).is_some() {
                    return Err(Error::parse(lineno, format!("target {anchor} declared twice")));
                }
                continue;
            }
            Some("region") => {
                let rest: Vec<&str> = words.collect();
                if rest.len() != 5 {
                    return Err(Error::parse(
                        lineno,
                        "region: expected `region <name> <x0> <y0> <x1> <y1>`",
                    ));
                }
                let v = rest[1..]
                    .iter()
                    .map(|s| parse_f64(lineno, "region", s))
                    .collect::<Result<Vec<_>>>()?;
                regions.push(Region {
                    name: rest[0].to_string(),
                    min: Vec2::new(v[0], v[1]),
                    max: Vec2::new(v[2], v[3]),
                });
                continue;
            }
            _ => {}
        }
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| Error::parse(lineno, format!("expected `key: value`, got `{line}`")))?;
        let value = value.trim();
        match key.trim() {
            "name" => name = value.to_string(),
            "resolution" => resolution = parse_f64(lineno, "resolution", value)?,
            "start" => {
                let v = parse_numbers(lineno, "start", value, 2, 3)?;
                start = Some((Vec2::new(v[0], v[1]), v.get(2).copied().unwrap_or(0.0)));
            }
            "goal" => {
                let v = parse_numbers(lineno, "goal", value, 2, 2)?;
                goal = Some(Vec2::new(v[0], v[1]));
            }
            "query" => query = (!value.is_empty()).then(|| value.to_string()),
            "budget" => {
                budget = value
                    .parse()
                    .map_err(|_| Error::parse(lineno, format!("budget: expected an integer, got `{value}`")))?
            }
            "seed" => {
                seed = value
                    .parse()
                    .map_err(|_| Error::parse(lineno, format!("seed: expected an integer, got `{value}`")))?
            }
            other => return Err(Error::parse(lineno, format!("unknown header key `{other}`"))),
        }
    }
    // Blank separator.
    while i < lines.len() && lines[i].trim().is_empty() {
        i += 1;
    }
    let grid_start = i;
    let rows: Vec<&str> = lines[grid_start..]
        .iter()
        .map(|l| l.trim_end_matches('\r'))
        .collect::<Vec<_>>();
    let rows: Vec<&str> = {
        let mut r = rows;
        while r.last().is_some_and(|l| l.is_empty()) {
            r.pop();
        }
        r
    };
    if rows.is_empty() {
        return Err(Error::parse(grid_start + 1, "missing character grid"));
    }
    let width = rows[0].chars().count();
    let height = rows.len();
    if !(resolution > 0.0) {
        return Err(Error::invalid("resolution", "must be > 0"));
    }
    let mut world = WorldGrid::new(width, height, resolution)?;
    let mut anchors: BTreeMap<char, Cell> = BTreeMap::new();
    for (r, row) in rows.iter().enumerate() {
        let lineno = grid_start + r + 1;
        if row.chars().count() != width {
            return Err(Error::parse(
                lineno,
                format!("grid row has {} columns, expected {width}", row.chars().count()),
            ));
        }
        let y = (height - 1 - r) as i32;
        for (x, ch) in row.chars().enumerate() {
            let terrain = Terrain::from_char(ch)
                .ok_or_else(|| Error::parse(lineno, format!("unknown grid character `{ch}`")))?;
            let cell = Cell::new(x as i32, y);
            world.set(cell, terrain);
            if ch.is_ascii_uppercase() && anchors.insert(ch, cell).is_some() {
                return Err(Error::parse(lineno, format!("anchor {ch} appears more than once")));
            }
        }
    }
    for (letter, cell) in &anchors {
        let spec = targets
            .remove(letter)
            .ok_or_else(|| Error::invalid("target", format!("anchor {letter} has no target line")))?;
        world.targets.push(TargetObject {
            label: spec.label,
            position: cell.center(resolution),
            height: spec.height,
            radius: spec.radius,
            anchor: *letter,
        });
    }
    if let Some((letter, spec)) = targets.into_iter().next() {
        return Err(Error::parse(
            spec.line,
            format!("target {letter} has no anchor cell in the grid"),
        ));
    }
    let (start, start_heading_deg) =
        start.ok_or_else(|| Error::invalid("start", "missing `start:` header"))?;
    let goal = goal.ok_or_else(|| Error::invalid("goal", "missing `goal:` header"))?;
    let scenario = Scenario {
        name,
        world,
        start,
        start_heading_deg,
        goal,
        query,
        budget,
        seed,
        regions,
    };
    scenario.validate()?;
    Ok(scenario)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn open_10x10() -> String {
        let mut s = String::from("resolution: 1.0\nstart: 1 1\ngoal: 8 8\n\n");
        for _ in 0..10 {
            s.push_str("..........\n");
        }
        s
    }

    #[test]
    fn minimal_open_map() {
        let sc = parse_scenario(&open_10x10()).unwrap();
        assert_eq!(sc.world.width, 10);
        assert_eq!(sc.world.height, 10);
        assert!(sc.world.targets.is_empty());
        assert_eq!(sc.goal, Vec2::new(8.0, 8.0));
    }

    #[test]
    fn ring_with_one_target() {
        let mut s = String::from(
            "resolution: 1.0\nstart: 2.5 2.5\ngoal: 5 5\nquery: water_tank\ntarget T water_tank 2.0 0.3\n\n",
        );
        s.push_str("######\n#....#\n#..T.#\n#....#\n#....#\n######\n");
        let sc = parse_scenario(&s).unwrap();
        assert_eq!(sc.world.targets.len(), 1);
        assert_eq!(sc.world.targets[0].label, "water_tank");
        // Row "#..T.#" is the third line from the top of a 6-row grid.
        assert_eq!(sc.world.targets[0].position, Vec2::new(3.5, 3.5));
        assert_eq!(sc.world.terrain(Cell::new(3, 3)), Terrain::Ground);
        assert_eq!(sc.world.terrain(Cell::new(0, 0)), Terrain::Obstacle);
    }

    #[test]
    fn start_on_obstacle_is_rejected() {
        let s = "resolution: 1.0\nstart: 0.5 0.5\ngoal: 2 2\n\n....\n....\n....\n#...\n";
        let err = parse_scenario(s).unwrap_err().to_string();
        assert!(err.contains("start not on Ground"), "{err}");
    }

    #[test]
    fn unknown_character_reports_line() {
        let s = "resolution: 1.0\nstart: 0.5 0.5\ngoal: 2 2\n\n....\n..x.\n";
        match parse_scenario(s).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 6),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn ragged_rows_and_orphan_targets_fail() {
        assert!(parse_scenario("start: 0.5 0.5\ngoal: 1 1\n\n...\n..\n").is_err());
        assert!(parse_scenario("start: 0.05 0.05\ngoal: 0.1 0.1\ntarget B x 1 1\n\n...\n").is_err());
        assert!(parse_scenario("start: 0.05 0.05\ngoal: 0.1 0.1\n\n.C.\n").is_err());
    }

    #[test]
    fn text_round_trip() {
        let mut s = String::from(
            "name: t\nresolution: 0.5\nstart: 0.25 0.25 37.5\ngoal: 1.75 1.25\nquery: tank\nbudget: 12\nseed: 9\ntarget T tank 2.5 0.3\nregion arm 0 0 1.5 2\n\n",
        );
        s.push_str("~~..\n.T#.\n....\n....\n");
        let a = parse_scenario(&s).unwrap();
        let b = parse_scenario(&a.to_text()).unwrap();
        assert_eq!(a, b);
    }
}
