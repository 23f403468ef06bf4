mod common;

use common::CASES;

fn check(r: Result<(), String>) {
    if let Err(e) = r {
        panic!("{e}");
    }
}

#[test]
fn score_bounds() {
    check(common::score_bounds(CASES));
}

#[test]
fn explored_radius_never_shrinks() {
    check(common::explored_radius_monotone(CASES));
}

#[test]
fn frontier_points_are_never_known() {
    check(common::frontier_soundness(CASES));
}

#[test]
fn edges_avoid_true_obstacles() {
    check(common::edge_safety(CASES));
}

#[test]
fn estimate_stays_in_particle_hull() {
    check(common::estimate_in_hull(CASES));
}

#[test]
fn safe_distance_is_at_least_euclidean() {
    check(common::safe_distance_bound(CASES));
}

#[test]
fn runs_are_deterministic() {
    check(common::determinism(CASES));
}
