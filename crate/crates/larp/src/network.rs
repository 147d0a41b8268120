//! Routing network over the decomposition leaves and safety-weighted A*.
//!
//! Every leaf cell becomes a node; adjacent leaves (sharing an edge
//! segment, optionally a corner) are connected. Traversing an edge costs
//! the center-to-center distance stretched by `exp(β·σ_ub)` of the cell
//! being entered, so routes trade length against exposure: `β = 0` is the
//! plain shortest center path, larger `β` pushes routes away from
//! restrictions. The stretch factor never drops below 1, which keeps the
//! straight-line heuristic admissible.

use std::collections::{BTreeSet, BinaryHeap};

use serde::{Deserialize, Serialize};

use crate::decomposition::{QuadNode, NE, NW, SE, SW};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::metrics::Route;

/// Knobs for network construction and search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Safety-weight exponent in the edge cost stretch `exp(β·σ_ub)`.
    pub beta: f64,
    /// Also connect leaves that touch at exactly one corner point.
    pub corner_adjacency: bool,
    /// When set, nodes with a zone index below this are untraversable.
    pub zone_block_threshold: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            beta: 5.0,
            corner_adjacency: false,
            zone_block_threshold: None,
        }
    }
}

/// One routing node: a copy of the leaf cell's routing-relevant state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetNode {
    pub center: Vec2,
    pub side: f64,
    pub zone: usize,
    pub sigma_ub: f64,
}

/// Cost of stepping from `from` into `to`.
pub fn edge_cost(from: &NetNode, to: &NetNode, beta: f64) -> f64 {
    (beta * to.sigma_ub).exp() * (to.center - from.center).norm()
}

/// The leaf-adjacency graph plus a point-location index into the cells.
#[derive(Debug, Clone)]
pub struct RoutingNetwork {
    nodes: Vec<NetNode>,
    /// Undirected edges, each stored once with ascending node ids.
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    cells: Vec<FlatCell>,
}

/// Flattened tree cell used for point location.
#[derive(Debug, Clone, Copy)]
struct FlatCell {
    center: Vec2,
    half: f64,
    children: Option<[usize; 4]>,
    leaf_id: Option<usize>,
}

/// Build the network for a decomposition. Node ids follow the depth-first
/// leaf order of the tree.
pub fn build_network(root: &QuadNode, cfg: &SearchConfig) -> RoutingNetwork {
    let mut nodes = Vec::new();
    let mut cells = Vec::new();
    flatten(root, &mut cells, &mut nodes);

    let mut pairs = BTreeSet::new();
    let walker = Walker {
        cells: &cells,
        corner: cfg.corner_adjacency,
    };
    walker.collect(0, &mut pairs);

    let edges: Vec<(usize, usize)> = pairs.into_iter().collect();
    let mut adjacency = vec![Vec::new(); nodes.len()];
    for &(a, b) in &edges {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }

    RoutingNetwork {
        nodes,
        edges,
        adjacency,
        cells,
    }
}

fn flatten(node: &QuadNode, cells: &mut Vec<FlatCell>, nodes: &mut Vec<NetNode>) -> usize {
    let idx = cells.len();
    cells.push(FlatCell {
        center: node.center(),
        half: node.side() / 2.0,
        children: None,
        leaf_id: None,
    });
    match node.children() {
        None => {
            cells[idx].leaf_id = Some(nodes.len());
            nodes.push(NetNode {
                center: node.center(),
                side: node.side(),
                zone: node.zone(),
                sigma_ub: node.zone_upper_potential(),
            });
        }
        Some(children) => {
            let mut slots = [0usize; 4];
            for (slot, child) in slots.iter_mut().zip(children.iter()) {
                *slot = flatten(child, cells, nodes);
            }
            cells[idx].children = Some(slots);
        }
    }
    idx
}

/// Divide-and-conquer adjacency: recurse into every internal cell and merge
/// the leaves along each internal boundary of its four children.
struct Walker<'a> {
    cells: &'a [FlatCell],
    corner: bool,
}

impl Walker<'_> {
    fn kids(&self, i: usize) -> Option<[usize; 4]> {
        self.cells[i].children
    }

    fn emit(&self, a: usize, b: usize, out: &mut BTreeSet<(usize, usize)>) {
        let ia = self.cells[a].leaf_id.expect("emit on leaves only");
        let ib = self.cells[b].leaf_id.expect("emit on leaves only");
        out.insert((ia.min(ib), ia.max(ib)));
    }

    fn collect(&self, i: usize, out: &mut BTreeSet<(usize, usize)>) {
        if let Some(c) = self.kids(i) {
            for child in c {
                self.collect(child, out);
            }
            self.pair_h(c[NW], c[NE], out);
            self.pair_h(c[SW], c[SE], out);
            self.pair_v(c[NW], c[SW], out);
            self.pair_v(c[NE], c[SE], out);
            if self.corner {
                self.diag_nw_se(c[NW], c[SE], out);
                self.diag_ne_sw(c[NE], c[SW], out);
            }
        }
    }

    /// `a` west of `b`, sharing a vertical boundary segment.
    fn pair_h(&self, a: usize, b: usize, out: &mut BTreeSet<(usize, usize)>) {
        match (self.kids(a), self.kids(b)) {
            (None, None) => self.emit(a, b, out),
            (None, Some(cb)) => {
                self.pair_h(a, cb[NW], out);
                self.pair_h(a, cb[SW], out);
            }
            (Some(ca), None) => {
                self.pair_h(ca[NE], b, out);
                self.pair_h(ca[SE], b, out);
            }
            (Some(ca), Some(cb)) => {
                self.pair_h(ca[NE], cb[NW], out);
                self.pair_h(ca[SE], cb[SW], out);
                if self.corner {
                    // Cells meeting only at the midpoint of the shared edge.
                    self.diag_nw_se(ca[NE], cb[SW], out);
                    self.diag_ne_sw(cb[NW], ca[SE], out);
                }
            }
        }
    }

    /// `a` north of `b`, sharing a horizontal boundary segment.
    fn pair_v(&self, a: usize, b: usize, out: &mut BTreeSet<(usize, usize)>) {
        match (self.kids(a), self.kids(b)) {
            (None, None) => self.emit(a, b, out),
            (None, Some(cb)) => {
                self.pair_v(a, cb[NW], out);
                self.pair_v(a, cb[NE], out);
            }
            (Some(ca), None) => {
                self.pair_v(ca[SW], b, out);
                self.pair_v(ca[SE], b, out);
            }
            (Some(ca), Some(cb)) => {
                self.pair_v(ca[SW], cb[NW], out);
                self.pair_v(ca[SE], cb[NE], out);
                if self.corner {
                    self.diag_nw_se(ca[SW], cb[NE], out);
                    self.diag_ne_sw(ca[SE], cb[NW], out);
                }
            }
        }
    }

    /// `a`'s south-east corner coincides with `b`'s north-west corner.
    fn diag_nw_se(&self, a: usize, b: usize, out: &mut BTreeSet<(usize, usize)>) {
        match (self.kids(a), self.kids(b)) {
            (None, None) => self.emit(a, b, out),
            (None, Some(cb)) => self.diag_nw_se(a, cb[NW], out),
            (Some(ca), None) => self.diag_nw_se(ca[SE], b, out),
            (Some(ca), Some(cb)) => self.diag_nw_se(ca[SE], cb[NW], out),
        }
    }

    /// `a`'s south-west corner coincides with `b`'s north-east corner.
    fn diag_ne_sw(&self, a: usize, b: usize, out: &mut BTreeSet<(usize, usize)>) {
        match (self.kids(a), self.kids(b)) {
            (None, None) => self.emit(a, b, out),
            (None, Some(cb)) => self.diag_ne_sw(a, cb[NE], out),
            (Some(ca), None) => self.diag_ne_sw(ca[SW], b, out),
            (Some(ca), Some(cb)) => self.diag_ne_sw(ca[SW], cb[NE], out),
        }
    }
}

/// Serializable graph dump: `{nodes: [{id, center, sigma_ub}], edges: [[i, j]]}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct GraphExport {
    pub nodes: Vec<GraphExportNode>,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GraphExportNode {
    pub id: usize,
    pub center: [f64; 2],
    pub sigma_ub: f64,
}

impl RoutingNetwork {
    pub fn nodes(&self) -> &[NetNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    /// Node id of the leaf containing `p` (boundary points descend
    /// east/north), or `None` outside the field.
    pub fn locate(&self, p: Vec2) -> Option<usize> {
        let mut idx = 0;
        let root = &self.cells[idx];
        if (p.x - root.center.x).abs() > root.half || (p.y - root.center.y).abs() > root.half {
            return None;
        }
        loop {
            let cell = &self.cells[idx];
            match cell.children {
                None => return cell.leaf_id,
                Some(children) => {
                    let east = p.x >= cell.center.x;
                    let north = p.y >= cell.center.y;
                    idx = children[match (north, east) {
                        (true, false) => NW,
                        (true, true) => NE,
                        (false, false) => SW,
                        (false, true) => SE,
                    }];
                }
            }
        }
    }

    pub fn export(&self) -> GraphExport {
        GraphExport {
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(id, n)| GraphExportNode {
                    id,
                    center: n.center.into(),
                    sigma_ub: n.sigma_ub,
                })
                .collect(),
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }

    fn blocked(&self, node: usize, cfg: &SearchConfig) -> bool {
        cfg.zone_block_threshold
            .is_some_and(|t| self.nodes[node].zone < t)
    }

    /// A* between two nodes; the heuristic aims at `goal_point`. Returns
    /// the node sequence and its accumulated cost.
    fn astar(
        &self,
        start: usize,
        goal: usize,
        goal_point: Vec2,
        cfg: &SearchConfig,
    ) -> Result<(Vec<usize>, f64)> {
        if self.blocked(start, cfg) || self.blocked(goal, cfg) {
            return Err(Error::BlockedEndpoint);
        }

        #[derive(PartialEq)]
        struct Entry {
            f: f64,
            node: usize,
        }
        impl Eq for Entry {}
        impl Ord for Entry {
            fn cmp(&self, other: &Self) -> std::cmp::Ordering {
                // Reversed so the max-heap pops the smallest f, then the
                // smallest node id.
                other
                    .f
                    .total_cmp(&self.f)
                    .then_with(|| other.node.cmp(&self.node))
            }
        }
        impl PartialOrd for Entry {
            fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
                Some(self.cmp(other))
            }
        }

        let h = |node: usize| (self.nodes[node].center - goal_point).norm();
        let mut dist = vec![f64::INFINITY; self.nodes.len()];
        let mut parent = vec![usize::MAX; self.nodes.len()];
        let mut settled = vec![false; self.nodes.len()];
        let mut open = BinaryHeap::new();
        dist[start] = 0.0;
        open.push(Entry {
            f: h(start),
            node: start,
        });

        while let Some(Entry { node, .. }) = open.pop() {
            if settled[node] {
                continue;
            }
            settled[node] = true;
            if node == goal {
                let mut path = vec![node];
                let mut at = node;
                while at != start {
                    at = parent[at];
                    path.push(at);
                }
                path.reverse();
                return Ok((path, dist[goal]));
            }
            for &next in &self.adjacency[node] {
                if settled[next] || self.blocked(next, cfg) {
                    continue;
                }
                let candidate =
                    dist[node] + edge_cost(&self.nodes[node], &self.nodes[next], cfg.beta);
                if candidate < dist[next] {
                    dist[next] = candidate;
                    parent[next] = node;
                    open.push(Entry {
                        f: candidate + h(next),
                        node: next,
                    });
                }
            }
        }
        Err(Error::NoPath)
    }

    /// Least-cost node path between two nodes (the heuristic aims at the
    /// goal node's center).
    pub fn shortest_node_path(
        &self,
        start: usize,
        goal: usize,
        cfg: &SearchConfig,
    ) -> Result<(Vec<usize>, f64)> {
        self.astar(start, goal, self.nodes[goal].center, cfg)
    }

    /// Full point-to-point query: attach `start` and `goal` to their
    /// containing leaves and thread the route through the visited cell
    /// centers. Start and goal in the same leaf connect directly.
    pub fn find_route(&self, start: Vec2, goal: Vec2, cfg: &SearchConfig) -> Result<Route> {
        let from = self
            .locate(start)
            .ok_or(Error::OutOfField(start.x, start.y))?;
        let to = self.locate(goal).ok_or(Error::OutOfField(goal.x, goal.y))?;
        if from == to {
            if self.blocked(from, cfg) {
                return Err(Error::BlockedEndpoint);
            }
            return Ok(Route::new(vec![start, goal]));
        }
        let (path, _) = self.astar(from, to, goal, cfg)?;
        let mut points = Vec::with_capacity(path.len() + 2);
        points.push(start);
        points.extend(path.iter().map(|&n| self.nodes[n].center));
        points.push(goal);
        Ok(Route::new(points))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::{build, DecompositionParams, ZoneConfig};
    use crate::field::{FieldUnit, RepulsionMatrix};
    use crate::metrics;

    fn empty_grid(field_size: f64, cell: f64) -> RoutingNetwork {
        let params = DecompositionParams {
            field_center: Vec2::new(field_size / 2.0, field_size / 2.0),
            field_size,
            n_min: cell,
            n_max: cell,
        };
        let root = build(&[], &params, &ZoneConfig::default()).unwrap();
        build_network(&root, &SearchConfig::default())
    }

    #[test]
    fn single_subdivision_yields_four_side_edges() {
        let net = empty_grid(4.0, 2.0);
        assert_eq!(net.nodes().len(), 4);
        assert_eq!(net.edges(), &[(0, 1), (0, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn corner_adjacency_adds_the_diagonals() {
        let params = DecompositionParams {
            field_center: Vec2::new(2.0, 2.0),
            field_size: 4.0,
            n_min: 2.0,
            n_max: 2.0,
        };
        let root = build(&[], &params, &ZoneConfig::default()).unwrap();
        let cfg = SearchConfig {
            corner_adjacency: true,
            ..SearchConfig::default()
        };
        let net = build_network(&root, &cfg);
        assert_eq!(net.edges(), &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn mixed_depth_adjacency_matches_hand_enumeration() {
        // Point unit in the NW quadrant center forces one extra level there.
        let params = DecompositionParams {
            field_center: Vec2::new(32.0, 32.0),
            field_size: 64.0,
            n_min: 16.0,
            n_max: 32.0,
        };
        let units = vec![FieldUnit::point(
            Vec2::new(16.0, 48.0),
            RepulsionMatrix::identity(),
        )];
        let root = build(&units, &params, &ZoneConfig::default()).unwrap();
        let net = build_network(&root, &SearchConfig::default());
        // Leaves in DFS order: NW.{NW,NE,SW,SE} = 0..4, NE = 4, SW = 5, SE = 6.
        assert_eq!(net.nodes().len(), 7);
        assert_eq!(
            net.edges(),
            &[
                (0, 1),
                (0, 2),
                (1, 3),
                (1, 4),
                (2, 3),
                (2, 5),
                (3, 4),
                (3, 5),
                (4, 6),
                (5, 6)
            ]
        );
    }

    #[test]
    fn edge_cost_stretches_by_target_upper_potential() {
        let a = NetNode {
            center: Vec2::new(0.0, 0.0),
            side: 4.0,
            zone: 3,
            sigma_ub: 0.9,
        };
        let b = NetNode {
            center: Vec2::new(4.0, 0.0),
            side: 4.0,
            zone: 3,
            sigma_ub: 0.5,
        };
        let cost = edge_cost(&a, &b, 5.0);
        assert!((cost - 48.72997584281389).abs() < 1e-9, "4·e^2.5, got {cost}");
        assert_eq!(edge_cost(&a, &b, 0.0), 4.0, "β = 0 is the plain distance");
    }

    #[test]
    fn routes_attach_endpoints_to_cell_centers() {
        let net = empty_grid(64.0, 8.0);
        let start = Vec2::new(2.0, 30.0);
        let goal = Vec2::new(62.0, 30.0);
        let route = net.find_route(start, goal, &SearchConfig::default()).unwrap();
        assert_eq!(route.points.first(), Some(&start));
        assert_eq!(route.points.last(), Some(&goal));
        assert_eq!(route.points[1], Vec2::new(4.0, 28.0), "start cell center");
        let d = metrics::route_distance(&route);
        assert!(d <= 1.15 * 60.0, "open-field route is near-straight, got {d}");
    }

    #[test]
    fn same_cell_and_identical_endpoints_connect_directly() {
        let net = empty_grid(64.0, 8.0);
        let cfg = SearchConfig::default();
        let a = Vec2::new(1.0, 1.0);
        let b = Vec2::new(2.5, 3.0);
        assert_eq!(net.find_route(a, b, &cfg).unwrap().points, vec![a, b]);
        let r = net.find_route(a, a, &cfg).unwrap();
        assert_eq!(r.points, vec![a, a]);
        assert_eq!(metrics::route_distance(&r), 0.0);
    }

    #[test]
    fn out_of_field_points_are_rejected() {
        let net = empty_grid(64.0, 8.0);
        let err = net
            .find_route(Vec2::new(-1.0, 5.0), Vec2::new(5.0, 5.0), &SearchConfig::default())
            .unwrap_err();
        assert!(matches!(err, Error::OutOfField(_, _)));
    }

    #[test]
    fn zone_blocking_can_sever_and_reject() {
        let params = DecompositionParams::for_field(Vec2::new(32.0, 32.0), 64.0);
        let wall = FieldUnit::rectangle(
            Vec2::new(0.0, 30.0),
            Vec2::new(64.0, 34.0),
            RepulsionMatrix::identity(),
        )
        .unwrap();
        let root = build(&[wall], &params, &ZoneConfig::default()).unwrap();
        let cfg = SearchConfig {
            zone_block_threshold: Some(1),
            ..SearchConfig::default()
        };
        let net = build_network(&root, &cfg);

        let crossing = net.find_route(Vec2::new(32.0, 4.0), Vec2::new(32.0, 60.0), &cfg);
        assert!(matches!(crossing, Err(Error::NoPath)), "wall severs the field");

        let from_wall = net.find_route(Vec2::new(32.0, 32.0), Vec2::new(32.0, 60.0), &cfg);
        assert!(matches!(from_wall, Err(Error::BlockedEndpoint)));

        // Without blocking, the crossing is allowed (zone-0 cells are
        // merely expensive).
        let open_cfg = SearchConfig::default();
        let net = build_network(&root, &open_cfg);
        assert!(net
            .find_route(Vec2::new(32.0, 4.0), Vec2::new(32.0, 60.0), &open_cfg)
            .is_ok());
    }

    #[test]
    fn heuristic_never_exceeds_realized_cost_to_go() {
        let params = DecompositionParams::for_field(Vec2::new(32.0, 32.0), 64.0);
        let units = vec![
            FieldUnit::point(Vec2::new(30.0, 30.0), RepulsionMatrix::identity()),
            FieldUnit::rectangle(
                Vec2::new(40.0, 10.0),
                Vec2::new(48.0, 30.0),
                RepulsionMatrix::identity(),
            )
            .unwrap(),
        ];
        let root = build(&units, &params, &ZoneConfig::default()).unwrap();
        let cfg = SearchConfig::default();
        let net = build_network(&root, &cfg);
        let start = Vec2::new(4.0, 4.0);
        let goal = Vec2::new(60.0, 56.0);
        let from = net.locate(start).unwrap();
        let to = net.locate(goal).unwrap();
        let (path, cost) = net.astar(from, to, goal, &cfg).unwrap();
        assert!(cost.is_finite());

        let mut to_go = (net.nodes()[*path.last().unwrap()].center - goal).norm();
        for pair in path.windows(2).rev() {
            to_go += edge_cost(&net.nodes()[pair[0]], &net.nodes()[pair[1]], cfg.beta);
            let h = (net.nodes()[pair[0]].center - goal).norm();
            assert!(
                h <= to_go + 1e-9,
                "heuristic {h} exceeds realized cost-to-go {to_go}"
            );
        }
    }
}
