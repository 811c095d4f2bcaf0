//! Inter-location distances, exact and greedy tours, and decomposition of a
//! tour into axis-parallel driving legs.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use minilp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem};
use nalgebra::Point2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{CorridorGrid, FieldLayout};
use crate::geometry::normalize_angle;

/// Largest instance (including the origin) the exact solvers accept.
pub const MAX_EXACT_NODES: usize = 18;

const SAME_LINE_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// Between-rows: any corridor may be used, so distance is Manhattan.
    Br,
    /// Alley-headland-alley: row gaps are closed; alley changes go through
    /// the nearer side headland.
    Aha,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Br => "br",
            Metric::Aha => "aha",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "br" => Ok(Metric::Br),
            "aha" => Ok(Metric::Aha),
            _ => Err(Error::validation(
                "metric",
                format!("expected `br` or `aha`, got {s:?}"),
            )),
        }
    }
}

pub fn manhattan(a: &Point2<f64>, b: &Point2<f64>) -> f64 {
    (a.x - b.x).abs() + (a.y - b.y).abs()
}

/// Alley-headland-alley distance: along the alley of `a` to a headland at
/// `y = h`, along the headland, then up the alley of `b`. Minimizes over the
/// given headlands; points sharing an alley use the direct alley distance.
pub fn aha_distance(a: &Point2<f64>, b: &Point2<f64>, headlands: &[f64]) -> f64 {
    if (a.x - b.x).abs() <= SAME_LINE_TOL {
        return (a.y - b.y).abs();
    }
    headlands
        .iter()
        .map(|&h| (a.y - h).abs() + (a.x - b.x).abs() + (h - b.y).abs())
        .fold(f64::INFINITY, f64::min)
}

fn best_headland(a: &Point2<f64>, b: &Point2<f64>, grid: &CorridorGrid) -> f64 {
    let (south, north) = grid.side_headlands();
    let via = |h: f64| (a.y - h).abs() + (h - b.y).abs();
    if via(north) < via(south) {
        north
    } else {
        south
    }
}

pub fn pairwise_distance(
    a: &Point2<f64>,
    b: &Point2<f64>,
    metric: Metric,
    layout: &FieldLayout,
) -> f64 {
    distance_on_grid(a, b, metric, &layout.corridor_grid())
}

pub(crate) fn distance_on_grid(
    a: &Point2<f64>,
    b: &Point2<f64>,
    metric: Metric,
    grid: &CorridorGrid,
) -> f64 {
    match metric {
        Metric::Br => manhattan(a, b),
        Metric::Aha => {
            let (s, n) = grid.side_headlands();
            aha_distance(a, b, &[s, n])
        }
    }
}

/// Default route origin: the south-east headland intersection.
pub fn default_origin(layout: &FieldLayout) -> Point2<f64> {
    let g = layout.corridor_grid();
    Point2::new(*g.xs.last().unwrap(), g.ys[0])
}

/// Complete weighted graph over the origin (node id 0) and scan locations.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceGraph {
    pub node_ids: Vec<usize>,
    pub positions: Vec<Point2<f64>>,
    pub metric: Metric,
    weights: Vec<f64>,
}

impl DistanceGraph {
    /// `nodes` are (id, position) pairs; the first is the origin.
    pub fn build(nodes: &[(usize, Point2<f64>)], metric: Metric, layout: &FieldLayout) -> Self {
        let grid = layout.corridor_grid();
        let n = nodes.len();
        let mut weights = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = distance_on_grid(&nodes[i].1, &nodes[j].1, metric, &grid);
                weights[i * n + j] = d;
                weights[j * n + i] = d;
            }
        }
        DistanceGraph {
            node_ids: nodes.iter().map(|n| n.0).collect(),
            positions: nodes.iter().map(|n| n.1).collect(),
            metric,
            weights,
        }
    }

    /// Graph from an explicit symmetric weight matrix (row-major). Positions
    /// are left at the origin.
    pub fn from_matrix(node_ids: Vec<usize>, weights: Vec<f64>, metric: Metric) -> Result<Self> {
        let n = node_ids.len();
        if weights.len() != n * n {
            return Err(Error::validation(
                "weights",
                format!("expected {n}x{n} entries"),
            ));
        }
        for i in 0..n {
            if weights[i * n + i] != 0.0 {
                return Err(Error::validation("weights", "diagonal must be zero"));
            }
            for j in 0..n {
                let w = weights[i * n + j];
                if w.is_nan() || w < 0.0 {
                    return Err(Error::validation(
                        "weights",
                        format!("invalid weight {w} at ({i},{j})"),
                    ));
                }
                if w != weights[j * n + i] {
                    return Err(Error::validation("weights", "matrix must be symmetric"));
                }
            }
        }
        Ok(DistanceGraph {
            positions: vec![Point2::origin(); n],
            node_ids,
            metric,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    /// Weight between node positions `i` and `j` (indices, not ids).
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.len() + j]
    }

    fn index_of(&self, id: usize) -> Option<usize> {
        self.node_ids.iter().position(|&n| n == id)
    }

    pub fn position_of(&self, id: usize) -> Option<Point2<f64>> {
        self.index_of(id).map(|i| self.positions[i])
    }

    fn check_finite(&self) -> Result<()> {
        if let Some(i) = self.weights.iter().position(|w| !w.is_finite()) {
            let n = self.len();
            return Err(Error::Infeasible(format!(
                "no finite path between nodes {} and {}",
                self.node_ids[i / n],
                self.node_ids[i % n]
            )));
        }
        Ok(())
    }

    fn tour_from_indices(&self, order: &[usize]) -> Tour {
        let mut sequence: Vec<usize> = order.iter().map(|&i| self.node_ids[i]).collect();
        sequence.push(self.node_ids[0]);
        let mut closed: Vec<usize> = order.to_vec();
        closed.push(0);
        let total_length = closed.windows(2).map(|w| self.weight(w[0], w[1])).sum();
        Tour {
            sequence,
            total_length,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tour {
    /// Node ids, starting and ending at the origin.
    pub sequence: Vec<usize>,
    pub total_length: f64,
}

impl Tour {
    pub fn to_csv(&self, graph: &DistanceGraph) -> String {
        let mut out = String::from("order,node_id,x,y,cumulative_m\n");
        let mut cum = 0.0;
        let mut prev: Option<usize> = None;
        for (k, id) in self.sequence.iter().enumerate() {
            let i = graph.index_of(*id).expect("tour node in graph");
            if let Some(p) = prev {
                cum += graph.weight(p, i);
            }
            let p = graph.positions[i];
            let _ = writeln!(out, "{k},{id},{:.6},{:.6},{cum:.6}", p.x, p.y);
            prev = Some(i);
        }
        out
    }
}

/// Exact minimum-length closed tour from node 0 by dynamic programming over
/// subsets. Among optimal tours (within 1e-9 m) the lexicographically
/// smallest index sequence is returned.
pub fn solve_tsp(graph: &DistanceGraph) -> Result<Tour> {
    let n = graph.len();
    if n > MAX_EXACT_NODES {
        return Err(Error::TooLarge {
            nodes: n,
            max: MAX_EXACT_NODES,
        });
    }
    graph.check_finite()?;
    if n <= 1 {
        return Ok(graph.tour_from_indices(&[0]));
    }

    // cost_to_go[mask][j]: shortest path from j through every node outside
    // `mask` and back to 0; `mask` holds the visited nodes including j and 0.
    let full = (1usize << n) - 1;
    let mut cost = vec![f64::INFINITY; (1 << n) * n];
    for j in 0..n {
        cost[full * n + j] = graph.weight(j, 0);
    }
    for mask in (1..full).rev() {
        if mask & 1 == 0 {
            continue;
        }
        for j in 0..n {
            if mask & (1 << j) == 0 {
                continue;
            }
            let mut best = f64::INFINITY;
            for k in 0..n {
                if mask & (1 << k) == 0 {
                    let c = graph.weight(j, k) + cost[(mask | 1 << k) * n + k];
                    if c < best {
                        best = c;
                    }
                }
            }
            cost[mask * n + j] = best;
        }
    }

    let optimum = cost[n]; // mask = {0}, j = 0
    let mut order = vec![0];
    let mut mask = 1usize;
    let mut cur = 0;
    let mut spent = 0.0;
    while mask != full {
        let next = (0..n)
            .filter(|&k| mask & (1 << k) == 0)
            .find(|&k| {
                spent + graph.weight(cur, k) + cost[(mask | 1 << k) * n + k] <= optimum + 1e-9
            })
            .expect("an optimal continuation exists");
        spent += graph.weight(cur, next);
        mask |= 1 << next;
        order.push(next);
        cur = next;
    }
    Ok(graph.tour_from_indices(&order))
}

/// Exact tour from the integer program: degree-2 constraints on undirected
/// edge variables, subtour-elimination cuts added lazily for every
/// disconnected component of the LP support, and depth-first branching on
/// fractional edges.
pub fn solve_tsp_dfj(graph: &DistanceGraph) -> Result<Tour> {
    let n = graph.len();
    if n > MAX_EXACT_NODES {
        return Err(Error::TooLarge {
            nodes: n,
            max: MAX_EXACT_NODES,
        });
    }
    graph.check_finite()?;
    if n <= 3 {
        let order: Vec<usize> = (0..n).collect();
        return Ok(graph.tour_from_indices(&order));
    }
    let mut solver = Dfj::new(graph);
    solver.branch(&mut vec![None; solver.edges.len()])?;
    let edges = solver
        .best
        .ok_or_else(|| Error::Infeasible("integer program has no tour".into()))?
        .1;
    Ok(graph.tour_from_indices(&cycle_from_edges(n, &edges)))
}

struct Dfj<'a> {
    graph: &'a DistanceGraph,
    edges: Vec<(usize, usize)>,
    cuts: Vec<Vec<usize>>,
    best: Option<(f64, Vec<(usize, usize)>)>,
}

impl<'a> Dfj<'a> {
    fn new(graph: &'a DistanceGraph) -> Self {
        let n = graph.len();
        let edges = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        Dfj {
            graph,
            edges,
            cuts: Vec::new(),
            best: None,
        }
    }

    /// LP relaxation under the current fixings; `None` when infeasible.
    fn relax(&self, fixed: &[Option<bool>]) -> Option<(f64, Vec<f64>)> {
        let n = self.graph.len();
        let mut lp = Problem::new(OptimizationDirection::Minimize);
        let vars: Vec<_> = self
            .edges
            .iter()
            .zip(fixed)
            .map(|(&(i, j), f)| {
                let bounds = match f {
                    Some(true) => (1.0, 1.0),
                    Some(false) => (0.0, 0.0),
                    None => (0.0, 1.0),
                };
                lp.add_var(self.graph.weight(i, j), bounds)
            })
            .collect();
        for v in 0..n {
            let mut e = LinearExpr::empty();
            for (k, &(i, j)) in self.edges.iter().enumerate() {
                if i == v || j == v {
                    e.add(vars[k], 1.0);
                }
            }
            lp.add_constraint(e, ComparisonOp::Eq, 2.0);
        }
        for set in &self.cuts {
            let mut e = LinearExpr::empty();
            for (k, &(i, j)) in self.edges.iter().enumerate() {
                if set.contains(&i) && set.contains(&j) {
                    e.add(vars[k], 1.0);
                }
            }
            lp.add_constraint(e, ComparisonOp::Le, set.len() as f64 - 1.0);
        }
        let sol = lp.solve().ok()?;
        let x = vars.iter().map(|v| sol[*v]).collect();
        Some((sol.objective(), x))
    }

    fn components(&self, x: &[f64]) -> Vec<Vec<usize>> {
        let n = self.graph.len();
        let mut label: Vec<usize> = (0..n).collect();
        fn find(l: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while l[r] != r {
                r = l[r];
            }
            l[i] = r;
            r
        }
        for (k, &(i, j)) in self.edges.iter().enumerate() {
            if x[k] > 1e-6 {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                label[a.max(b)] = a.min(b);
            }
        }
        let mut comps: Vec<Vec<usize>> = Vec::new();
        let mut root_of = vec![usize::MAX; n];
        for v in 0..n {
            let r = find(&mut label, v);
            if root_of[r] == usize::MAX {
                root_of[r] = comps.len();
                comps.push(Vec::new());
            }
            comps[root_of[r]].push(v);
        }
        comps
    }

    fn branch(&mut self, fixed: &mut Vec<Option<bool>>) -> Result<()> {
        loop {
            let Some((obj, x)) = self.relax(fixed) else {
                return Ok(());
            };
            if let Some((best, _)) = &self.best {
                if obj >= best - 1e-9 {
                    return Ok(());
                }
            }
            let comps = self.components(&x);
            if comps.len() > 1 {
                let before = self.cuts.len();
                for c in comps {
                    if !self.cuts.contains(&c) {
                        self.cuts.push(c);
                    }
                }
                if self.cuts.len() > before {
                    continue;
                }
            }
            let frac = x
                .iter()
                .enumerate()
                .filter(|(_, v)| (**v - v.round()).abs() > 1e-6)
                .min_by(|a, b| (a.1 - 0.5).abs().total_cmp(&(b.1 - 0.5).abs()))
                .map(|(k, _)| k);
            match frac {
                None => {
                    let chosen = self
                        .edges
                        .iter()
                        .zip(&x)
                        .filter(|(_, v)| **v > 0.5)
                        .map(|(e, _)| *e)
                        .collect();
                    self.best = Some((obj, chosen));
                    return Ok(());
                }
                Some(k) => {
                    for value in [true, false] {
                        fixed[k] = Some(value);
                        self.branch(fixed)?;
                    }
                    fixed[k] = None;
                    return Ok(());
                }
            }
        }
    }
}

fn cycle_from_edges(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut adj = vec![Vec::new(); n];
    for &(i, j) in edges {
        adj[i].push(j);
        adj[j].push(i);
    }
    let mut order = vec![0];
    let mut prev = usize::MAX;
    let mut cur = 0;
    for _ in 1..n {
        let next = adj[cur]
            .iter()
            .copied()
            .filter(|&v| v != prev && !order.contains(&v))
            .min()
            .expect("edges form a Hamiltonian cycle");
        order.push(next);
        prev = cur;
        cur = next;
    }
    // orient like the DP solver: smaller second node first
    if n > 2 && order[n - 1] < order[1] {
        order[1..].reverse();
    }
    order
}

/// Greedy tour from `start` (a node id): always move to the nearest
/// unvisited node, ties to the lowest id, then return to the start.
pub fn nearest_neighbor_route(graph: &DistanceGraph, start: usize) -> Result<Tour> {
    let s = graph
        .index_of(start)
        .ok_or_else(|| Error::validation("start", format!("node {start} not in graph")))?;
    let n = graph.len();
    let mut visited = vec![false; n];
    visited[s] = true;
    let mut order = vec![s];
    let mut cur = s;
    for _ in 1..n {
        let mut best: Option<usize> = None;
        for k in (0..n).filter(|&k| !visited[k]) {
            best = match best {
                None => Some(k),
                Some(b) => {
                    let (wk, wb) = (graph.weight(cur, k), graph.weight(cur, b));
                    if wk < wb || (wk == wb && graph.node_ids[k] < graph.node_ids[b]) {
                        Some(k)
                    } else {
                        Some(b)
                    }
                }
            };
        }
        let k = best.unwrap();
        visited[k] = true;
        order.push(k);
        cur = k;
    }
    let mut sequence: Vec<usize> = order.iter().map(|&i| graph.node_ids[i]).collect();
    sequence.push(start);
    let mut closed = order.clone();
    closed.push(s);
    Ok(Tour {
        sequence,
        total_length: closed.windows(2).map(|w| graph.weight(w[0], w[1])).sum(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    Alley,
    RowGap,
    Headland,
}

impl SegmentKind {
    fn as_str(self) -> &'static str {
        match self {
            SegmentKind::Alley => "alley",
            SegmentKind::RowGap => "row_gap",
            SegmentKind::Headland => "headland",
        }
    }
}

impl FromStr for SegmentKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "alley" => Ok(SegmentKind::Alley),
            "row_gap" => Ok(SegmentKind::RowGap),
            "headland" => Ok(SegmentKind::Headland),
            _ => Err(format!("unknown segment kind {s:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Waypoint {
    pub position: Point2<f64>,
    /// Heading to face on arrival, pointing at the following waypoint.
    pub heading: f64,
    /// Scan location (or origin, id 0) reached at this waypoint.
    pub location_id: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WaypointPlan {
    pub waypoints: Vec<Waypoint>,
    /// Kind of the segment leaving each waypoint (one fewer than waypoints).
    pub segment_kinds: Vec<SegmentKind>,
}

impl WaypointPlan {
    pub fn segment_lengths(&self) -> Vec<f64> {
        self.waypoints
            .windows(2)
            .map(|w| (w[1].position - w[0].position).norm())
            .collect()
    }

    pub fn length(&self) -> f64 {
        self.segment_lengths().iter().sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,x,y,heading,location_id,next_segment\n");
        for (i, w) in self.waypoints.iter().enumerate() {
            let loc = w.location_id.map(|l| l.to_string()).unwrap_or_default();
            let kind = self.segment_kinds.get(i).map(|k| k.as_str()).unwrap_or("");
            let _ = writeln!(
                out,
                "{i},{:.6},{:.6},{:.9},{loc},{kind}",
                w.position.x, w.position.y, w.heading
            );
        }
        out
    }

    /// Parses [`WaypointPlan::to_csv`] output; errors name the offending line.
    pub fn from_csv(text: &str, path: &std::path::Path) -> Result<Self> {
        let err = |line: usize, reason: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            reason,
        };
        let mut waypoints = Vec::new();
        let mut segment_kinds = Vec::new();
        let mut lines = crate::data_lines(text);
        match lines.next() {
            Some((_, h)) if h.trim() == "index,x,y,heading,location_id,next_segment" => {}
            other => {
                return Err(err(
                    other.map_or(1, |(n, _)| n),
                    "missing plan header".into(),
                ))
            }
        }
        for (ln, line) in lines {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 6 {
                return Err(err(ln, format!("expected 6 fields, found {}", f.len())));
            }
            let num = |s: &str, what: &str| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(ln, format!("bad {what} {s:?}")))
            };
            let location_id = if f[4].is_empty() {
                None
            } else {
                Some(
                    f[4].parse()
                        .map_err(|_| err(ln, format!("bad location id {:?}", f[4])))?,
                )
            };
            waypoints.push(Waypoint {
                position: Point2::new(num(f[1], "x")?, num(f[2], "y")?),
                heading: num(f[3], "heading")?,
                location_id,
            });
            if !f[5].is_empty() {
                segment_kinds.push(f[5].parse().map_err(|e| err(ln, e))?);
            }
        }
        if !waypoints.is_empty() && segment_kinds.len() + 1 != waypoints.len() {
            return Err(err(
                text.lines().count(),
                "segment kinds do not match waypoint count".into(),
            ));
        }
        Ok(WaypointPlan {
            waypoints,
            segment_kinds,
        })
    }
}

/// Splits every tour leg into straight axis-parallel segments on the
/// corridor grid: one segment inside a shared corridor, otherwise a corridor
/// change through the row gap nearest the leg midpoint (BR) or through the
/// nearer side headland (AHA). Segment lengths of each leg sum to the graph
/// edge weight.
pub fn decompose_route(
    tour: &Tour,
    graph: &DistanceGraph,
    layout: &FieldLayout,
) -> Result<WaypointPlan> {
    let grid = layout.corridor_grid();
    let mut points: Vec<(Point2<f64>, Option<usize>)> = Vec::new();
    for (k, id) in tour.sequence.iter().enumerate() {
        let b = graph
            .position_of(*id)
            .ok_or_else(|| Error::validation("tour", format!("node {id} not in graph")))?;
        if k == 0 {
            points.push((b, Some(*id)));
            continue;
        }
        let a = points.last().unwrap().0;
        for p in leg_corners(&a, &b, graph.metric, &grid) {
            push_distinct(&mut points, p, None);
        }
        push_distinct(&mut points, b, Some(*id));
    }

    let (south, north) = grid.side_headlands();
    let mut segment_kinds = Vec::new();
    for w in points.windows(2) {
        let (a, b) = (w[0].0, w[1].0);
        let dx = (a.x - b.x).abs();
        let dy = (a.y - b.y).abs();
        if dx > SAME_LINE_TOL && dy > SAME_LINE_TOL {
            return Err(Error::OffGrid { x: b.x, y: b.y });
        }
        let kind = if dx <= SAME_LINE_TOL {
            SegmentKind::Alley
        } else if (a.y - south).abs() <= SAME_LINE_TOL || (a.y - north).abs() <= SAME_LINE_TOL {
            SegmentKind::Headland
        } else {
            SegmentKind::RowGap
        };
        segment_kinds.push(kind);
    }
    for (p, _) in &points {
        if !(grid.on_x_line(p.x, SAME_LINE_TOL) || grid.on_y_line(p.y, SAME_LINE_TOL)) {
            return Err(Error::OffGrid { x: p.x, y: p.y });
        }
    }

    let mut waypoints: Vec<Waypoint> = Vec::with_capacity(points.len());
    for (i, (p, loc)) in points.iter().enumerate() {
        let heading = if let Some((next, _)) = points.get(i + 1) {
            (next.y - p.y).atan2(next.x - p.x)
        } else if i > 0 {
            waypoints[i - 1].heading
        } else {
            0.0
        };
        waypoints.push(Waypoint {
            position: *p,
            heading: normalize_angle(heading),
            location_id: *loc,
        });
    }
    Ok(WaypointPlan {
        waypoints,
        segment_kinds,
    })
}

/// Marks `loc` on the last point when `p` coincides with it.
fn push_distinct(
    points: &mut Vec<(Point2<f64>, Option<usize>)>,
    p: Point2<f64>,
    loc: Option<usize>,
) {
    if let Some(last) = points.last_mut() {
        if (last.0 - p).norm() <= SAME_LINE_TOL {
            if loc.is_some() {
                last.1 = loc;
            }
            return;
        }
    }
    points.push((p, loc));
}

/// Intermediate corners between `a` and `b`, excluding both endpoints.
fn leg_corners(
    a: &Point2<f64>,
    b: &Point2<f64>,
    metric: Metric,
    grid: &CorridorGrid,
) -> Vec<Point2<f64>> {
    if (a.x - b.x).abs() <= SAME_LINE_TOL {
        return Vec::new();
    }
    let via_y = match metric {
        Metric::Br => {
            if (a.y - b.y).abs() <= SAME_LINE_TOL {
                return Vec::new();
            }
            grid.nearest_y(0.5 * (a.y + b.y)).0
        }
        Metric::Aha => {
            let h = best_headland(a, b, grid);
            grid.nearest_y(h).0
        }
    };
    let y = grid.ys[via_y];
    vec![Point2::new(a.x, y), Point2::new(b.x, y)]
}
