//! Route-safety metrics.
//!
//! A route is scored by integrating the field potential along it: the
//! *route area* `R_A = ∫ σ ds` (accumulated exposure), the route distance
//! `R_d`, their ratio (mean exposure per meter), and the highest potential
//! touched. Integration uses a composite trapezoid rule with a bounded
//! sample step so the numbers are reproducible.

use serde::{Deserialize, Serialize};

use crate::field::Field;
use crate::geom::Vec2;

/// Default quadrature step in meters.
pub const DEFAULT_MAX_STEP: f64 = 0.05;

/// A route reaches the goal when its last point is within this *squared*
/// distance of the goal.
pub const GOAL_RADIUS_SQUARED: f64 = 2.5;

/// An ordered polyline of positions. Always contains at least one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub points: Vec<Vec2>,
}

impl Route {
    pub fn new(points: Vec<Vec2>) -> Self {
        assert!(!points.is_empty(), "a route contains at least one point");
        Route { points }
    }

    pub fn last(&self) -> Vec2 {
        *self.points.last().expect("non-empty")
    }
}

/// Summary of one route against one field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteMetrics {
    pub route_distance: f64,
    pub route_area: f64,
    pub average_potential: f64,
    pub highest_potential: f64,
    pub goal_found: bool,
}

/// Sum of segment lengths `R_d`.
pub fn route_distance(route: &Route) -> f64 {
    route
        .points
        .windows(2)
        .map(|w| (w[1] - w[0]).norm())
        .sum()
}

/// Line integral `R_A = ∫ σ ds` by composite trapezoid quadrature.
///
/// Each segment is split into `⌈length/max_step⌉` slices; zero-length
/// segments contribute nothing.
pub fn route_area(route: &Route, field: &Field, max_step: f64) -> f64 {
    assert!(max_step > 0.0, "quadrature step must be positive");
    let mut total = 0.0;
    for w in route.points.windows(2) {
        total += segment_area(w[0], w[1], field, max_step);
    }
    total
}

fn segment_area(a: Vec2, b: Vec2, field: &Field, max_step: f64) -> f64 {
    let length = (b - a).norm();
    if length == 0.0 {
        return 0.0;
    }
    let slices = (length / max_step).ceil() as usize;
    let h = length / slices as f64;
    let mut sum = 0.5 * (field.potential(a) + field.potential(b));
    for i in 1..slices {
        let t = i as f64 / slices as f64;
        sum += field.potential(a + (b - a) * t);
    }
    sum * h
}

/// Mean exposure `R_A / R_d`, defined as 0 for zero-length routes.
pub fn route_average(route: &Route, field: &Field, max_step: f64) -> f64 {
    let distance = route_distance(route);
    if distance == 0.0 {
        0.0
    } else {
        route_area(route, field, max_step) / distance
    }
}

/// Maximum potential over the quadrature sample points (route vertices
/// included, so single-point routes are still defined).
pub fn highest_potential(route: &Route, field: &Field, max_step: f64) -> f64 {
    let mut highest = route
        .points
        .iter()
        .map(|p| field.potential(*p))
        .fold(0.0, f64::max);
    for w in route.points.windows(2) {
        let length = (w[1] - w[0]).norm();
        if length == 0.0 {
            continue;
        }
        let slices = (length / max_step).ceil() as usize;
        for i in 1..slices {
            let t = i as f64 / slices as f64;
            highest = highest.max(field.potential(w[0] + (w[1] - w[0]) * t));
        }
    }
    highest
}

/// Whether the route's endpoint lies within the goal acceptance radius.
pub fn goal_found(route: &Route, goal: Vec2) -> bool {
    (route.last() - goal).norm_squared() <= GOAL_RADIUS_SQUARED
}

/// All metrics in one pass configuration.
pub fn evaluate(route: &Route, field: &Field, goal: Vec2, max_step: f64) -> RouteMetrics {
    let route_distance = route_distance(route);
    let route_area = route_area(route, field, max_step);
    RouteMetrics {
        route_distance,
        route_area,
        average_potential: if route_distance == 0.0 {
            0.0
        } else {
            route_area / route_distance
        },
        highest_potential: highest_potential(route, field, max_step),
        goal_found: goal_found(route, goal),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{FieldUnit, RepulsionMatrix};

    fn empty_field() -> Field {
        Field::default()
    }

    fn route(points: &[(f64, f64)]) -> Route {
        Route::new(points.iter().map(|&(x, y)| Vec2::new(x, y)).collect())
    }

    #[test]
    fn distance_of_a_3_4_5_segment() {
        assert_eq!(route_distance(&route(&[(0.0, 0.0), (3.0, 4.0)])), 5.0);
    }

    #[test]
    fn area_is_zero_in_an_empty_field() {
        let r = route(&[(0.0, 0.0), (10.0, 0.0)]);
        assert_eq!(route_area(&r, &empty_field(), DEFAULT_MAX_STEP), 0.0);
        assert_eq!(route_average(&r, &empty_field(), DEFAULT_MAX_STEP), 0.0);
    }

    #[test]
    fn constant_potential_region_integrates_exactly() {
        // Inside a large rectangle σ is exactly 1, so R_A = R_d.
        let field = Field::new(vec![FieldUnit::rectangle(
            Vec2::new(-50.0, -50.0),
            Vec2::new(50.0, 50.0),
            RepulsionMatrix::identity(),
        )
        .unwrap()]);
        let r = route(&[(-10.0, 0.0), (10.0, 3.0)]);
        let expected = route_distance(&r);
        assert!((route_area(&r, &field, DEFAULT_MAX_STEP) - expected).abs() < 1e-9);
        assert!((route_average(&r, &field, DEFAULT_MAX_STEP) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn concatenation_is_additive() {
        let field = Field::new(vec![FieldUnit::point(
            Vec2::new(2.0, 1.0),
            RepulsionMatrix::identity(),
        )]);
        let whole = route(&[(0.0, 0.0), (4.0, 0.0), (4.0, 5.0)]);
        let first = route(&[(0.0, 0.0), (4.0, 0.0)]);
        let second = route(&[(4.0, 0.0), (4.0, 5.0)]);
        let lhs = route_area(&whole, &field, DEFAULT_MAX_STEP);
        let rhs = route_area(&first, &field, DEFAULT_MAX_STEP)
            + route_area(&second, &field, DEFAULT_MAX_STEP);
        assert!((lhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn reversal_preserves_area_and_distance() {
        let field = Field::new(vec![FieldUnit::point(
            Vec2::new(2.0, 1.0),
            RepulsionMatrix::identity(),
        )]);
        let fwd = route(&[(0.0, 0.0), (4.0, 0.0), (4.0, 5.0)]);
        let rev = route(&[(4.0, 5.0), (4.0, 0.0), (0.0, 0.0)]);
        assert!(
            (route_area(&fwd, &field, DEFAULT_MAX_STEP)
                - route_area(&rev, &field, DEFAULT_MAX_STEP))
            .abs()
                < 1e-9
        );
        assert_eq!(route_distance(&fwd), route_distance(&rev));
    }

    #[test]
    fn refinement_changes_area_only_slightly() {
        let field = Field::new(vec![FieldUnit::point(
            Vec2::new(5.0, 1.0),
            RepulsionMatrix::identity(),
        )]);
        let r = route(&[(0.0, 0.0), (10.0, 0.0)]);
        let coarse = route_area(&r, &field, DEFAULT_MAX_STEP);
        let fine = route_area(&r, &field, DEFAULT_MAX_STEP / 2.0);
        assert!((coarse - fine).abs() / fine.abs() < 1e-3);
    }

    #[test]
    fn touching_a_unit_yields_highest_potential_one() {
        let field = Field::new(vec![FieldUnit::point(
            Vec2::new(5.0, 0.0),
            RepulsionMatrix::identity(),
        )]);
        let r = route(&[(0.0, 0.0), (10.0, 0.0)]);
        assert_eq!(highest_potential(&r, &field, DEFAULT_MAX_STEP), 1.0);
    }

    #[test]
    fn degenerate_routes_are_well_defined() {
        let field = Field::new(vec![FieldUnit::point(Vec2::ZERO, RepulsionMatrix::identity())]);
        let single = route(&[(1.0, 0.0)]);
        assert_eq!(route_distance(&single), 0.0);
        assert_eq!(route_area(&single, &field, DEFAULT_MAX_STEP), 0.0);
        assert_eq!(route_average(&single, &field, DEFAULT_MAX_STEP), 0.0);
        assert_eq!(
            highest_potential(&single, &field, DEFAULT_MAX_STEP),
            (-1.0f64).exp()
        );

        let stuttering = route(&[(1.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        let open = route(&[(1.0, 0.0), (2.0, 0.0)]);
        let a = route_area(&stuttering, &field, DEFAULT_MAX_STEP);
        let b = route_area(&open, &field, DEFAULT_MAX_STEP);
        assert!(a.is_finite() && (a - b).abs() < 1e-12);
    }

    #[test]
    fn goal_acceptance_is_inclusive_squared_distance() {
        let goal = Vec2::ZERO;
        assert!(goal_found(&route(&[(1.5, 0.5)]), goal), "1.5² + 0.5² = 2.5 exactly");
        assert!(!goal_found(&route(&[(1.5, 0.50001)]), goal));
        assert!(goal_found(&route(&[(0.0, 0.0)]), goal));
    }

    #[test]
    fn evaluate_bundles_all_metrics() {
        let field = empty_field();
        let r = route(&[(0.0, 0.0), (3.0, 4.0)]);
        let m = evaluate(&r, &field, Vec2::new(3.0, 4.0), DEFAULT_MAX_STEP);
        assert_eq!(m.route_distance, 5.0);
        assert_eq!(m.route_area, 0.0);
        assert_eq!(m.average_potential, 0.0);
        assert_eq!(m.highest_potential, 0.0);
        assert!(m.goal_found);
    }
}
