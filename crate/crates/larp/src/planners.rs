//! Force-following baseline planners: PM, APF, APF*, and M-APF.
//!
//! All four share the same integrator: from the current position, evaluate
//! a force, take a step of fixed length `γ` along it, repeat. They differ
//! only in the force law. PM descends a penalty on the field potential;
//! APF combines a quadratic-capped attraction with a nearest-restriction
//! repulsion keyed to plain distance; APF* substitutes the scaled
//! distance; M-APF rescales repulsion by powers of the goal distance so
//! the force field near the goal cannot trap the walker.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, DEFAULT_GRADIENT_STEP};
use crate::geom::Vec2;
use crate::metrics::{Route, GOAL_RADIUS_SQUARED};

/// Force magnitudes below this stop the walk.
pub const STALL_FORCE: f64 = 1e-9;
/// Net displacement window for oscillation detection.
pub const STALL_WINDOW: usize = 50;

/// The four force-following planners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Planner {
    Pm,
    Apf,
    /// APF with the scaled distance in the repulsion law.
    ApfStar,
    MApf,
}

impl Planner {
    pub const ALL: [Planner; 4] = [Planner::Pm, Planner::Apf, Planner::ApfStar, Planner::MApf];

    pub fn label(self) -> &'static str {
        match self {
            Planner::Pm => "PM",
            Planner::Apf => "APF",
            Planner::ApfStar => "APF*",
            Planner::MApf => "M-APF",
        }
    }
}

/// Shared gains and integrator knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerParams {
    /// Attraction gain ζ.
    pub zeta: f64,
    /// Repulsion gain η.
    pub eta: f64,
    /// Step size γ in meters.
    pub gamma: f64,
    /// Repulsion activation distance.
    pub d_o: f64,
    /// Attraction transition distance (conic to quadratic).
    pub d_g: f64,
    /// M-APF goal-distance exponent.
    pub m: f64,
    pub max_iters: usize,
    /// PM appends a direct goal segment when it terminates this close.
    pub goal_snap_radius: f64,
}

impl Default for PlannerParams {
    fn default() -> Self {
        PlannerParams {
            zeta: 1.0,
            eta: 1.0,
            gamma: 0.1,
            d_o: 5.0,
            d_g: 5.0,
            m: 2.0,
            max_iters: 5000,
            goal_snap_radius: GOAL_RADIUS_SQUARED.sqrt(),
        }
    }
}

impl PlannerParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gamma", self.gamma),
            ("d_o", self.d_o),
            ("d_g", self.d_g),
            ("m", self.m),
            ("goal_snap_radius", self.goal_snap_radius),
        ];
        for (name, value) in positive {
            if value.is_nan() || value <= 0.0 {
                return Err(Error::InvalidScenario(format!(
                    "planner parameter {name} must be positive, got {value}"
                )));
            }
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidScenario(
                "planner parameter max_iters must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Why a walk ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    GoalReached,
    MaxIters,
    Stalled,
}

/// A finished walk: the visited points plus bookkeeping.
#[derive(Debug, Clone)]
pub struct TraceResult {
    pub route: Route,
    pub terminated_by: Termination,
    /// Number of integration steps taken (excludes the PM goal segment).
    pub iterations: usize,
}

/// Capped attraction toward the goal: linear pull inside `d_g`, constant
/// magnitude `ζ·d_g` beyond it.
fn attraction(x: Vec2, goal: Vec2, params: &PlannerParams) -> Vec2 {
    let offset = goal - x;
    let distance = offset.norm();
    if distance <= params.d_g {
        offset * params.zeta
    } else {
        offset * (params.zeta * params.d_g / distance)
    }
}

/// PM force: attraction plus descent of the penalty `½σ²`, whose gradient
/// is `σ·∇σ`.
pub fn pm_step_force(x: Vec2, goal: Vec2, field: &Field, params: &PlannerParams) -> Vec2 {
    let sigma = field.potential(x);
    let gradient = field.potential_gradient(x, DEFAULT_GRADIENT_STEP);
    attraction(x, goal, params) - gradient * (params.eta * sigma)
}

/// APF force; `scaled` switches the repulsion distance to the scaled form.
pub fn apf_forces(
    x: Vec2,
    goal: Vec2,
    field: &Field,
    params: &PlannerParams,
    scaled: bool,
) -> Result<Vec2> {
    let mut force = attraction(x, goal, params);
    if let Some((index, squared)) = field.nearest_unit(x, scaled) {
        let d = squared.sqrt();
        if d == 0.0 {
            return Err(Error::OnRestriction);
        }
        if d <= params.d_o {
            let repulsion = field.units()[index].repulsion_vector(x);
            force = force + repulsion * (params.eta * (1.0 / d - 1.0 / params.d_o) / (d * d));
        }
    }
    Ok(force)
}

/// M-APF repulsion: the classical falloff rescaled by powers of the goal
/// distance so it dies out at the goal instead of overpowering attraction.
pub fn mapf_repulsion(x: Vec2, goal: Vec2, field: &Field, params: &PlannerParams) -> Result<Vec2> {
    let Some((index, squared)) = field.nearest_unit(x, false) else {
        return Ok(Vec2::ZERO);
    };
    let d = squared.sqrt();
    if d == 0.0 {
        return Err(Error::OnRestriction);
    }
    if d > params.d_o {
        return Ok(Vec2::ZERO);
    }
    let goal_distance = (x - goal).norm();
    if goal_distance == 0.0 {
        // The goal-distance powers are singular here for m < 3; the walk
        // has long since terminated by the goal test, so define zero.
        return Ok(Vec2::ZERO);
    }
    let gap = 1.0 / d - 1.0 / params.d_o;
    let f1 = params.eta * gap * goal_distance.powf(params.m - 3.0);
    let f2 = params.eta * params.m * gap * gap * goal_distance.powf(params.m);
    let repulsion = field.units()[index].repulsion_vector(x);
    Ok(repulsion * ((f1 + f2) / repulsion.norm()))
}

fn force(
    planner: Planner,
    x: Vec2,
    goal: Vec2,
    field: &Field,
    params: &PlannerParams,
) -> Result<Vec2> {
    match planner {
        Planner::Pm => Ok(pm_step_force(x, goal, field, params)),
        Planner::Apf => apf_forces(x, goal, field, params, false),
        Planner::ApfStar => apf_forces(x, goal, field, params, true),
        Planner::MApf => Ok(attraction(x, goal, params) + mapf_repulsion(x, goal, field, params)?),
    }
}

/// Walk from `start` toward `goal` under the chosen force law.
pub fn follow(
    planner: Planner,
    start: Vec2,
    goal: Vec2,
    field: &Field,
    params: &PlannerParams,
) -> Result<TraceResult> {
    let mut points = vec![start];
    let mut x = start;
    let terminated_by = loop {
        if (x - goal).norm_squared() <= GOAL_RADIUS_SQUARED {
            break Termination::GoalReached;
        }
        if points.len() > params.max_iters {
            break Termination::MaxIters;
        }
        let f = force(planner, x, goal, field, params)?;
        let magnitude = f.norm();
        if magnitude < STALL_FORCE {
            break Termination::Stalled;
        }
        x = x + f * (params.gamma / magnitude);
        points.push(x);
        if points.len() > STALL_WINDOW {
            let window_start = points[points.len() - 1 - STALL_WINDOW];
            if (x - window_start).norm() < params.gamma / 10.0 {
                break Termination::Stalled;
            }
        }
    };
    let iterations = points.len() - 1;
    if planner == Planner::Pm {
        let last = *points.last().expect("trace is non-empty");
        let snap_squared = params.goal_snap_radius * params.goal_snap_radius;
        if (last - goal).norm_squared() <= snap_squared && last != goal {
            points.push(goal);
        }
    }
    Ok(TraceResult {
        route: Route::new(points),
        terminated_by,
        iterations,
    })
}
