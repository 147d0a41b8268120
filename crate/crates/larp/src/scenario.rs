//! Scenario files and the planner-comparison harness.
//!
//! A scenario bundles the field geometry (units), the endpoints, and every
//! tunable knob into one JSON document. Loading fills defaults for absent
//! sections and validates the result, so a minimal file needs nothing but
//! units. The harness runs any subset of the five planners on a scenario
//! and meters all routes identically.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::decomposition::{build, DecompositionParams, QuadNode, ZoneConfig};
use crate::error::{Error, Result};
use crate::field::{Field, FieldUnit};
use crate::geom::Vec2;
use crate::metrics::{self, Route, RouteMetrics, DEFAULT_MAX_STEP};
use crate::network::{build_network, SearchConfig};
use crate::planners::{follow, Planner, PlannerParams, Termination};

/// Per-planner parameter overrides; absent planners keep the defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerSettings {
    pub pm: PlannerParams,
    pub apf: PlannerParams,
    pub apf_star: PlannerParams,
    pub m_apf: PlannerParams,
}

impl PlannerSettings {
    pub fn for_planner(&self, planner: Planner) -> &PlannerParams {
        match planner {
            Planner::Pm => &self.pm,
            Planner::Apf => &self.apf,
            Planner::ApfStar => &self.apf_star,
            Planner::MApf => &self.m_apf,
        }
    }
}

/// Decomposition knobs with concrete values (defaults resolved at load).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionSettings {
    pub n_min: f64,
    pub n_max: f64,
    pub zone_boundaries: ZoneConfig,
}

/// A complete planning problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "raw::ScenarioDoc")]
pub struct Scenario {
    pub name: String,
    pub field_center: Vec2,
    pub field_size: f64,
    pub units: Vec<FieldUnit>,
    pub start: Vec2,
    pub goal: Vec2,
    pub decomposition: DecompositionSettings,
    pub search: SearchConfig,
    pub planner_params: PlannerSettings,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        let text =
            std::fs::read_to_string(path).map_err(|e| crate::error::io_context(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("scenario serializes");
        text.push('\n');
        text
    }

    pub fn validate(&self) -> Result<()> {
        self.decomposition_params().validate()?;
        let half = self.field_size / 2.0;
        for (label, p) in [("start", self.start), ("goal", self.goal)] {
            let offset = p - self.field_center;
            if !p.is_finite() || offset.x.abs() > half || offset.y.abs() > half {
                return Err(Error::InvalidScenario(format!(
                    "{label} {:?} lies outside the field bounding box",
                    <[f64; 2]>::from(p)
                )));
            }
        }
        if !(self.search.beta >= 0.0 && self.search.beta.is_finite()) {
            return Err(Error::InvalidScenario(format!(
                "search.beta must be finite and non-negative, got {}",
                self.search.beta
            )));
        }
        for planner in Planner::ALL {
            self.planner_params.for_planner(planner).validate()?;
        }
        Ok(())
    }

    pub fn field(&self) -> Field {
        Field::new(self.units.clone())
    }

    pub fn decomposition_params(&self) -> DecompositionParams {
        DecompositionParams {
            field_center: self.field_center,
            field_size: self.field_size,
            n_min: self.decomposition.n_min,
            n_max: self.decomposition.n_max,
        }
    }

    pub fn build_tree(&self) -> Result<QuadNode> {
        build(
            &self.units,
            &self.decomposition_params(),
            &self.decomposition.zone_boundaries,
        )
    }

    /// The three scenarios shipped with the binary.
    pub fn bundled() -> Vec<Scenario> {
        BUNDLED
            .iter()
            .map(|(name, text)| {
                Scenario::from_json(text)
                    .unwrap_or_else(|e| panic!("bundled scenario {name} is valid: {e}"))
            })
            .collect()
    }
}

/// Name/content pairs of the scenarios shipped in the crate.
pub const BUNDLED: [(&str, &str); 3] = [
    ("open_field", include_str!("../scenarios/open_field.json")),
    (
        "obstructed_goal",
        include_str!("../scenarios/obstructed_goal.json"),
    ),
    ("walled_room", include_str!("../scenarios/walled_room.json")),
];

mod raw {
    use super::*;

    #[derive(Deserialize)]
    #[serde(default, deny_unknown_fields)]
    pub struct ScenarioDoc {
        pub name: String,
        pub field_center: Vec2,
        pub field_size: f64,
        pub units: Vec<FieldUnit>,
        pub start: Vec2,
        pub goal: Vec2,
        pub decomposition: DecompositionDoc,
        pub search: SearchConfig,
        pub planner_params: PlannerSettings,
    }

    impl Default for ScenarioDoc {
        fn default() -> Self {
            ScenarioDoc {
                name: "scenario".into(),
                field_center: Vec2::new(32.0, 32.0),
                field_size: 64.0,
                units: Vec::new(),
                start: Vec2::new(2.0, 2.0),
                goal: Vec2::new(62.0, 62.0),
                decomposition: DecompositionDoc::default(),
                search: SearchConfig::default(),
                planner_params: PlannerSettings::default(),
            }
        }
    }

    #[derive(Default, Deserialize)]
    #[serde(default, deny_unknown_fields)]
    pub struct DecompositionDoc {
        pub n_min: Option<f64>,
        pub n_max: Option<f64>,
        pub zone_boundaries: Option<ZoneConfig>,
    }

    impl TryFrom<ScenarioDoc> for Scenario {
        type Error = Error;
        fn try_from(doc: ScenarioDoc) -> Result<Scenario> {
            let defaults = DecompositionParams::for_field(doc.field_center, doc.field_size);
            let scenario = Scenario {
                name: doc.name,
                field_center: doc.field_center,
                field_size: doc.field_size,
                units: doc.units,
                start: doc.start,
                goal: doc.goal,
                decomposition: DecompositionSettings {
                    n_min: doc.decomposition.n_min.unwrap_or(defaults.n_min),
                    n_max: doc.decomposition.n_max.unwrap_or(defaults.n_max),
                    zone_boundaries: doc.decomposition.zone_boundaries.unwrap_or_default(),
                },
                search: doc.search,
                planner_params: doc.planner_params,
            };
            scenario.validate()?;
            Ok(scenario)
        }
    }
}

/// One of the five planners the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlannerChoice {
    Baseline(Planner),
    Larp,
}

impl PlannerChoice {
    pub const ALL: [PlannerChoice; 5] = [
        PlannerChoice::Baseline(Planner::Pm),
        PlannerChoice::Baseline(Planner::Apf),
        PlannerChoice::Baseline(Planner::ApfStar),
        PlannerChoice::Baseline(Planner::MApf),
        PlannerChoice::Larp,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PlannerChoice::Baseline(p) => p.label(),
            PlannerChoice::Larp => "Larp",
        }
    }

    pub fn parse(name: &str) -> Option<PlannerChoice> {
        match name.to_ascii_lowercase().as_str() {
            "pm" => Some(PlannerChoice::Baseline(Planner::Pm)),
            "apf" => Some(PlannerChoice::Baseline(Planner::Apf)),
            "apf*" | "apf_star" | "apfstar" => Some(PlannerChoice::Baseline(Planner::ApfStar)),
            "m-apf" | "m_apf" | "mapf" => Some(PlannerChoice::Baseline(Planner::MApf)),
            "larp" => Some(PlannerChoice::Larp),
            _ => None,
        }
    }
}

/// Run one planner on a scenario. Baselines walk the shared field; Larp
/// builds the decomposition and network and searches it.
pub fn plan_route(
    scenario: &Scenario,
    field: &Field,
    choice: PlannerChoice,
) -> Result<(Route, Option<Termination>)> {
    match choice {
        PlannerChoice::Baseline(planner) => {
            let params = scenario.planner_params.for_planner(planner);
            let trace = follow(planner, scenario.start, scenario.goal, field, params)?;
            Ok((trace.route, Some(trace.terminated_by)))
        }
        PlannerChoice::Larp => {
            let tree = scenario.build_tree()?;
            let network = build_network(&tree, &scenario.search);
            let route = network.find_route(scenario.start, scenario.goal, &scenario.search)?;
            Ok((route, None))
        }
    }
}

/// One report row: the planner's route and its metrics.
#[derive(Debug, Clone)]
pub struct PlannerRun {
    pub planner: &'static str,
    pub route: Route,
    pub metrics: RouteMetrics,
    pub runtime_ms: f64,
    /// How a baseline walk ended; `None` for Larp or failed runs.
    pub terminated_by: Option<Termination>,
}

/// Rows for every requested planner, in request order.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub rows: Vec<PlannerRun>,
}

/// Run the requested planners and meter every route identically. A planner
/// failure (no path, blocked, standing on a restriction) becomes a row
/// with the stub route `[start]` instead of aborting the report.
pub fn run_comparison(scenario: &Scenario, choices: &[PlannerChoice]) -> Result<ComparisonReport> {
    if choices.is_empty() {
        return Err(Error::InvalidScenario("no planners requested".into()));
    }
    scenario.validate()?;
    let field = scenario.field();
    let mut rows = Vec::with_capacity(choices.len());
    for &choice in choices {
        let clock = Instant::now();
        let outcome = plan_route(scenario, &field, choice);
        let runtime_ms = clock.elapsed().as_secs_f64() * 1e3;
        let (route, terminated_by) =
            outcome.unwrap_or_else(|_| (Route::new(vec![scenario.start]), None));
        let metrics = metrics::evaluate(&route, &field, scenario.goal, DEFAULT_MAX_STEP);
        rows.push(PlannerRun {
            planner: choice.label(),
            route,
            metrics,
            runtime_ms,
            terminated_by,
        });
    }
    Ok(ComparisonReport { rows })
}

impl ComparisonReport {
    /// CSV with the fixed column order; floats carry four decimals.
    pub fn to_csv(&self, include_timing: bool) -> String {
        let mut out = String::from(
            "planner,goal_found,route_distance,route_area,average_potential,highest_potential",
        );
        if include_timing {
            out.push_str(",runtime_ms");
        }
        out.push('\n');
        for row in &self.rows {
            let m = &row.metrics;
            out.push_str(&format!(
                "{},{},{:.4},{:.4},{:.4},{:.4}",
                row.planner,
                m.goal_found,
                m.route_distance,
                m.route_area,
                m.average_potential,
                m.highest_potential
            ));
            if include_timing {
                out.push_str(&format!(",{:.4}", row.runtime_ms));
            }
            out.push('\n');
        }
        out
    }
}

/// The `plan` output document: the route plus its metrics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RouteReport {
    pub points: Vec<Vec2>,
    pub metrics: RouteMetrics,
}

impl RouteReport {
    pub fn new(route: &Route, metrics: RouteMetrics) -> Self {
        RouteReport {
            points: route.points.clone(),
            metrics,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_fills_every_default() {
        let text = r#"{"units": [{"kind": "point", "location": [10.0, 10.0],
                       "repulsion": [[1.0, 0.0], [0.0, 1.0]]}]}"#;
        let s = Scenario::from_json(text).unwrap();
        assert_eq!(s.name, "scenario");
        assert_eq!(s.field_size, 64.0);
        assert_eq!(s.field_center, Vec2::new(32.0, 32.0));
        assert_eq!(s.decomposition.n_min, 1.0);
        assert_eq!(s.decomposition.n_max, 8.0);
        assert_eq!(s.decomposition.zone_boundaries, ZoneConfig::default());
        assert_eq!(s.search, SearchConfig::default());
        assert_eq!(s.planner_params, PlannerSettings::default());
        assert_eq!(s.units.len(), 1);
    }

    #[test]
    fn invalid_units_are_rejected_by_name() {
        let degenerate = r#"{"units": [{"kind": "rectangle",
            "corner1": [3.0, 3.0], "corner2": [3.0, 3.0],
            "repulsion": [[1.0, 0.0], [0.0, 1.0]]}]}"#;
        let err = Scenario::from_json(degenerate).unwrap_err().to_string();
        assert!(err.contains("degenerate rectangle"), "got: {err}");

        let indefinite = r#"{"units": [{"kind": "point", "location": [1.0, 1.0],
            "repulsion": [[1.0, 2.0], [2.0, 1.0]]}]}"#;
        let err = Scenario::from_json(indefinite).unwrap_err().to_string();
        assert!(err.contains("not positive definite"), "got: {err}");
    }

    #[test]
    fn endpoints_must_lie_inside_the_field() {
        let text = r#"{"start": [99.0, 0.0]}"#;
        let err = Scenario::from_json(text).unwrap_err().to_string();
        assert!(err.contains("outside the field"), "got: {err}");
    }

    #[test]
    fn bundled_scenarios_round_trip_exactly() {
        let scenarios = Scenario::bundled();
        assert_eq!(scenarios.len(), 3);
        for s in scenarios {
            let reloaded = Scenario::from_json(&s.to_json()).unwrap();
            assert_eq!(reloaded, s, "round trip of {}", s.name);
        }
    }

    #[test]
    fn planner_names_parse_case_insensitively() {
        assert_eq!(PlannerChoice::parse("PM"), Some(PlannerChoice::Baseline(Planner::Pm)));
        assert_eq!(
            PlannerChoice::parse("APF*"),
            Some(PlannerChoice::Baseline(Planner::ApfStar))
        );
        assert_eq!(
            PlannerChoice::parse("m-apf"),
            Some(PlannerChoice::Baseline(Planner::MApf))
        );
        assert_eq!(PlannerChoice::parse("Larp"), Some(PlannerChoice::Larp));
        assert_eq!(PlannerChoice::parse("rrt"), None);
    }

    #[test]
    fn comparison_csv_has_fixed_header_and_four_decimals() {
        let scenario = Scenario::from_json(r#"{"start": [2.0, 2.0], "goal": [12.0, 2.0]}"#).unwrap();
        let report = run_comparison(&scenario, &PlannerChoice::ALL).unwrap();
        let csv = report.to_csv(true);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 6, "header plus one row per planner");
        assert_eq!(
            lines[0],
            "planner,goal_found,route_distance,route_area,average_potential,highest_potential,runtime_ms"
        );
        assert!(lines[1].starts_with("PM,true,"));
        assert!(lines[5].starts_with("Larp,true,"));
        for line in &lines[1..] {
            for cell in line.split(',').skip(2) {
                let decimals = cell.split('.').nth(1).expect("float cell");
                assert_eq!(decimals.len(), 4, "cell {cell} in {line}");
            }
        }
        let untimed = report.to_csv(false);
        assert!(!untimed.contains("runtime_ms"));
        assert_eq!(untimed.lines().next().unwrap().split(',').count(), 6);
    }

    #[test]
    fn empty_planner_list_is_a_usage_error() {
        let scenario = Scenario::from_json("{}").unwrap();
        assert!(run_comparison(&scenario, &[]).is_err());
    }

    #[test]
    fn failed_planner_becomes_a_stub_row() {
        // Start directly on a restriction: APF cannot evaluate a force.
        let text = r#"{"units": [{"kind": "point", "location": [2.0, 2.0],
                       "repulsion": [[1.0, 0.0], [0.0, 1.0]]}],
                       "start": [2.0, 2.0], "goal": [40.0, 40.0]}"#;
        let scenario = Scenario::from_json(text).unwrap();
        let report =
            run_comparison(&scenario, &[PlannerChoice::Baseline(Planner::Apf)]).unwrap();
        let row = &report.rows[0];
        assert!(!row.metrics.goal_found);
        assert_eq!(row.route.points, vec![scenario.start]);
        assert_eq!(row.metrics.route_distance, 0.0);
    }
}
