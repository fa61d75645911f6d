//! Survey-grid discretisation, greedy multi-agent coverage routing and
//! ground-vehicle path planning over the terrain cost map.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{self, EnuPoint, GeoError, GeoPoint};
use crate::scene::{Cell, TerrainGrid};
use crate::Real;

/// Relative tolerance on opposite sides and diagonals of a survey rectangle.
pub const RECTANGLE_TOLERANCE: f64 = 0.01;

/// Size limits for [`optimal_routes_bruteforce`].
pub const BRUTEFORCE_MAX_POINTS: usize = 8;
pub const BRUTEFORCE_MAX_AGENTS: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("a survey region needs exactly 4 corners, got {0}")]
    CornerCount(usize),
    #[error("corners do not form a rectangle: {0}")]
    NotRectangle(String),
    #[error("`{field}` must be {requirement}")]
    InvalidParameter { field: &'static str, requirement: &'static str },
    #[error("at least one agent is required")]
    NoAgents,
    #[error("grid index ({row}, {col}) appears more than once")]
    DuplicateIndex { row: u32, col: u32 },
    #[error("instance too large for exhaustive search: {points} points, {agents} agents")]
    TooLarge { points: usize, agents: usize },
    #[error("{which} cell ({row}, {col}) is {reason}")]
    BadEndpoint { which: &'static str, row: usize, col: usize, reason: &'static str },
    #[error("no path from ({}, {}) to ({}, {})", .start.row, .start.col, .goal.row, .goal.col)]
    NoPath { start: Cell, goal: Cell },
    #[error(transparent)]
    Geo(#[from] GeoError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyRegion<T> {
    /// Corners in order around the rectangle; corner 0 anchors the grid and
    /// the 0→1 edge sets its column direction.
    pub corners: [GeoPoint<T>; 4],
    pub spacing_m: T,
    /// Survey altitude above the scene datum.
    pub altitude_m: T,
}

impl<T: Real> SurveyRegion<T> {
    pub fn new(corners: Vec<GeoPoint<T>>, spacing_m: T, altitude_m: T) -> Result<Self, PlanError> {
        let corners: [GeoPoint<T>; 4] = corners.try_into().map_err(|v: Vec<_>| PlanError::CornerCount(v.len()))?;
        for c in &corners {
            c.validate()?;
        }
        if !(spacing_m > T::zero()) || !spacing_m.is_finite() {
            return Err(PlanError::InvalidParameter { field: "spacing_m", requirement: "positive" });
        }
        if !(altitude_m >= T::zero()) || !altitude_m.is_finite() {
            return Err(PlanError::InvalidParameter { field: "altitude_m", requirement: "non-negative" });
        }
        Ok(Self { corners, spacing_m, altitude_m })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GridIndex {
    pub row: u32,
    pub col: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint<T> {
    pub index: GridIndex,
    pub position: EnuPoint<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentRoute<T> {
    pub start: EnuPoint<T>,
    pub points: Vec<GridPoint<T>>,
    pub length_m: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutePlan<T> {
    /// One route per agent, in the order the starts were given.
    pub routes: Vec<AgentRoute<T>>,
    pub makespan_m: T,
}

impl<T: Real> RoutePlan<T> {
    fn from_routes(starts: &[EnuPoint<T>], routes: Vec<Vec<GridPoint<T>>>) -> Self {
        let routes: Vec<AgentRoute<T>> = starts
            .iter()
            .zip(routes)
            .map(|(start, points)| AgentRoute { start: *start, length_m: route_length(start, &points), points })
            .collect();
        let makespan_m = routes.iter().map(|r| r.length_m).fold(T::zero(), T::max);
        Self { routes, makespan_m }
    }

    pub fn point_count(&self) -> usize {
        self.routes.iter().map(|r| r.points.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundPath<T> {
    pub cells: Vec<Cell>,
    pub cost: T,
}

fn close<T: Real>(a: T, b: T) -> bool {
    (a - b).abs() <= T::lit(RECTANGLE_TOLERANCE) * a.max(b)
}

/// Lays a square lattice over the survey rectangle, row-major from corner 0.
pub fn discretize_region<T: Real>(region: &SurveyRegion<T>, origin: &GeoPoint<T>) -> Result<Vec<GridPoint<T>>, PlanError> {
    let mut c = [EnuPoint::origin(); 4];
    for (dst, corner) in c.iter_mut().zip(&region.corners) {
        *dst = geo::to_enu(origin, corner)?.on_ground();
    }
    let altitude = region.altitude_m;
    let u = c[1].sub(&c[0]);
    let v = c[3].sub(&c[0]);
    let width = u.norm_squared().sqrt();
    let height = v.norm_squared().sqrt();
    let area = (u.east_m * v.north_m - u.north_m * v.east_m).abs();

    let anchor = EnuPoint::new(c[0].east_m, c[0].north_m, altitude);
    if area <= T::epsilon() * (width * height).max(T::one()) {
        return Ok(vec![GridPoint { index: GridIndex { row: 0, col: 0 }, position: anchor }]);
    }

    let side = |i: usize, j: usize| c[i].distance(&c[j]);
    if !close(side(0, 1), side(2, 3)) {
        return Err(PlanError::NotRectangle("edges 0-1 and 2-3 differ by more than 1%".into()));
    }
    if !close(side(1, 2), side(3, 0)) {
        return Err(PlanError::NotRectangle("edges 1-2 and 3-0 differ by more than 1%".into()));
    }
    if !close(side(0, 2), side(1, 3)) {
        return Err(PlanError::NotRectangle("diagonals differ by more than 1%".into()));
    }

    // Corners arrive as degrees, so an exact multiple of the spacing can come
    // back a hair short after projection.
    let slack = T::lit(1e-9);
    let count = |len: T| (len / region.spacing_m + slack).floor().to_u32().unwrap_or(0) + 1;
    let (cols, rows) = (count(width), count(height));
    let du = u.scale(region.spacing_m / width);
    let dv = v.scale(region.spacing_m / height);

    let mut points = Vec::with_capacity((rows * cols) as usize);
    for row in 0..rows {
        for col in 0..cols {
            let offset = du.scale(T::from_u32(col).unwrap()).add(&dv.scale(T::from_u32(row).unwrap()));
            points.push(GridPoint { index: GridIndex { row, col }, position: anchor.add(&offset) });
        }
    }
    Ok(points)
}

/// Sum of straight-line hops `start → p1 → … → pn`.
pub fn route_length<T: Real>(start: &EnuPoint<T>, route: &[GridPoint<T>]) -> T {
    let mut here = *start;
    let mut total = T::zero();
    for p in route {
        total = total + here.distance(&p.position);
        here = p.position;
    }
    total
}

fn check_instance<T: Real>(points: &[GridPoint<T>], starts: &[EnuPoint<T>]) -> Result<(), PlanError> {
    if starts.is_empty() {
        return Err(PlanError::NoAgents);
    }
    if starts.iter().any(|s| !s.is_finite()) {
        return Err(PlanError::InvalidParameter { field: "starts", requirement: "finite" });
    }
    let mut seen = std::collections::BTreeSet::new();
    for p in points {
        if !seen.insert(p.index) {
            return Err(PlanError::DuplicateIndex { row: p.index.row, col: p.index.col });
        }
    }
    Ok(())
}

/// Greedy coverage routing.
///
/// Repeatedly takes the agent with the shortest route so far (lowest id on
/// ties) and appends the unvisited point nearest its current endpoint
/// (lowest grid index on ties), until every point is assigned.
pub fn plan_greedy_routes<T: Real>(points: &[GridPoint<T>], starts: &[EnuPoint<T>]) -> Result<RoutePlan<T>, PlanError> {
    check_instance(points, starts)?;
    let mut routes: Vec<Vec<GridPoint<T>>> = vec![Vec::new(); starts.len()];
    let mut lengths = vec![T::zero(); starts.len()];
    let mut ends = starts.to_vec();
    let mut unvisited: Vec<usize> = (0..points.len()).collect();

    while !unvisited.is_empty() {
        let agent = (0..starts.len()).fold(0, |best, a| if lengths[a] < lengths[best] { a } else { best });
        let (slot, dist) = unvisited
            .iter()
            .enumerate()
            .map(|(slot, &i)| (slot, ends[agent].distance(&points[i].position)))
            .min_by(|(sa, da), (sb, db)| {
                da.partial_cmp(db)
                    .unwrap_or(Ordering::Equal)
                    .then_with(|| points[unvisited[*sa]].index.cmp(&points[unvisited[*sb]].index))
            })
            .expect("unvisited is non-empty");
        let p = points[unvisited.swap_remove(slot)];
        lengths[agent] = lengths[agent] + dist;
        ends[agent] = p.position;
        routes[agent].push(p);
    }
    Ok(RoutePlan::from_routes(starts, routes))
}

/// Exhaustive minimum-makespan plan for small instances.
///
/// Among plans with equal makespan the lexicographically smallest
/// assignment (agent of point 0, then point 1, …) wins; within an agent the
/// lexicographically smallest visiting order of shortest length is used.
pub fn optimal_routes_bruteforce<T: Real>(points: &[GridPoint<T>], starts: &[EnuPoint<T>]) -> Result<RoutePlan<T>, PlanError> {
    if points.len() > BRUTEFORCE_MAX_POINTS || starts.len() > BRUTEFORCE_MAX_AGENTS {
        return Err(PlanError::TooLarge { points: points.len(), agents: starts.len() });
    }
    check_instance(points, starts)?;
    let n = points.len();
    let subsets = 1usize << n;

    // best[agent][mask] = shortest visiting order of the points in `mask`
    let mut best: Vec<Vec<(T, Vec<usize>)>> = Vec::with_capacity(starts.len());
    for start in starts {
        let mut per_mask = Vec::with_capacity(subsets);
        for mask in 0..subsets {
            let members: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let mut winner: Option<(T, Vec<usize>)> = None;
            for_each_permutation(&members, &mut |order| {
                let route: Vec<GridPoint<T>> = order.iter().map(|&i| points[i]).collect();
                let len = route_length(start, &route);
                if winner.as_ref().is_none_or(|(w, _)| len < *w) {
                    winner = Some((len, order.to_vec()));
                }
            });
            per_mask.push(winner.expect("every subset has at least one ordering"));
        }
        best.push(per_mask);
    }

    let agents = starts.len();
    let total = agents.pow(n as u32);
    let mut winner: Option<(T, Vec<usize>)> = None;
    let mut assignment = vec![0usize; n];
    for code in 0..total {
        // point 0 is the most significant digit, so codes run in
        // lexicographic order of assignments
        let mut rest = code;
        for slot in assignment.iter_mut().rev() {
            *slot = rest % agents;
            rest /= agents;
        }
        let mut masks = vec![0usize; agents];
        for (i, &a) in assignment.iter().enumerate() {
            masks[a] |= 1 << i;
        }
        let makespan = masks.iter().enumerate().map(|(a, &m)| best[a][m].0).fold(T::zero(), T::max);
        if winner.as_ref().is_none_or(|(w, _)| makespan < *w) {
            winner = Some((makespan, masks));
        }
    }
    let (_, masks) = winner.expect("at least one assignment");
    let routes = masks
        .iter()
        .enumerate()
        .map(|(a, &m)| best[a][m].1.iter().map(|&i| points[i]).collect())
        .collect();
    Ok(RoutePlan::from_routes(starts, routes))
}

/// Visits every permutation of `items` in lexicographic order of positions.
fn for_each_permutation(items: &[usize], f: &mut impl FnMut(&[usize])) {
    fn rec(pool: &mut Vec<usize>, prefix: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if pool.is_empty() {
            f(prefix);
            return;
        }
        for k in 0..pool.len() {
            let x = pool.remove(k);
            prefix.push(x);
            rec(pool, prefix, f);
            prefix.pop();
            pool.insert(k, x);
        }
    }
    let mut pool = items.to_vec();
    rec(&mut pool, &mut Vec::with_capacity(items.len()), f);
}

#[derive(Debug, Clone, Copy)]
struct Frontier<T> {
    f: T,
    cell: Cell,
}

impl<T: Real> PartialEq for Frontier<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Real> Eq for Frontier<T> {}

impl<T: Real> PartialOrd for Frontier<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for Frontier<T> {
    // reversed: BinaryHeap is a max-heap and we want the smallest (f, row, col)
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .partial_cmp(&self.f)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.cell.cmp(&self.cell))
    }
}

/// Minimum-cost 4-connected path; a move costs the cost of the cell entered.
///
/// Best-first search with an admissible straight-line heuristic scaled by
/// the cheapest passable cell. Ties on `f` expand the smaller (row, col).
pub fn plan_ground_path<T: Real>(terrain: &TerrainGrid<T>, start: Cell, goal: Cell) -> Result<GroundPath<T>, PlanError> {
    for (which, c) in [("start", start), ("goal", goal)] {
        match terrain.cell(c) {
            None => return Err(PlanError::BadEndpoint { which, row: c.row, col: c.col, reason: "outside the grid" }),
            Some(t) if !t.passable() => {
                return Err(PlanError::BadEndpoint { which, row: c.row, col: c.col, reason: "impassable" })
            }
            Some(_) => {}
        }
    }
    let width = terrain.width_cells;
    let idx = |c: Cell| c.row * width + c.col;
    let min_cost = terrain.min_cost().expect("start is passable");
    let heuristic = |c: Cell| {
        let dr = T::from_usize(c.row.abs_diff(goal.row)).unwrap();
        let dc = T::from_usize(c.col.abs_diff(goal.col)).unwrap();
        (dr * dr + dc * dc).sqrt() * min_cost
    };

    let size = width * terrain.height_cells;
    let mut g: Vec<Option<T>> = vec![None; size];
    let mut parent: Vec<Option<Cell>> = vec![None; size];
    let mut closed = vec![false; size];
    let mut open = BinaryHeap::new();
    g[idx(start)] = Some(T::zero());
    open.push(Frontier { f: heuristic(start), cell: start });

    while let Some(Frontier { cell, .. }) = open.pop() {
        if closed[idx(cell)] {
            continue;
        }
        closed[idx(cell)] = true;
        if cell == goal {
            let mut cells = vec![goal];
            let mut at = goal;
            while let Some(p) = parent[idx(at)] {
                cells.push(p);
                at = p;
            }
            cells.reverse();
            return Ok(GroundPath { cells, cost: g[idx(goal)].expect("goal reached") });
        }
        let here = g[idx(cell)].expect("expanded cells have a cost");
        let neighbours = [
            cell.row.checked_sub(1).map(|r| Cell::new(r, cell.col)),
            Some(Cell::new(cell.row + 1, cell.col)),
            cell.col.checked_sub(1).map(|c| Cell::new(cell.row, c)),
            Some(Cell::new(cell.row, cell.col + 1)),
        ];
        for next in neighbours.into_iter().flatten() {
            let Some(step) = terrain.cell(next).and_then(|t| t.cost) else { continue };
            if closed[idx(next)] {
                continue;
            }
            let candidate = here + step;
            if g[idx(next)].is_none_or(|old| candidate < old) {
                g[idx(next)] = Some(candidate);
                parent[idx(next)] = Some(cell);
                open.push(Frontier { f: candidate + heuristic(next), cell: next });
            }
        }
    }
    Err(PlanError::NoPath { start, goal })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{TerrainCell, TerrainClass};

    fn gp(row: u32, col: u32, e: f64, n: f64) -> GridPoint<f64> {
        GridPoint { index: GridIndex { row, col }, position: EnuPoint::new(e, n, 0.0) }
    }

    fn origin() -> GeoPoint<f64> {
        GeoPoint::new(52.0, -7.5, 0.0).unwrap()
    }

    fn region_from_enu(corners: [(f64, f64); 4], spacing: f64) -> SurveyRegion<f64> {
        let o = origin();
        let corners = corners
            .iter()
            .map(|&(e, n)| geo::from_enu(&o, &EnuPoint::new(e, n, 0.0)).unwrap())
            .collect();
        SurveyRegion::new(corners, spacing, 30.0).unwrap()
    }

    #[test]
    fn rectangle_point_count() {
        let region = region_from_enu([(0.0, 0.0), (20.0, 0.0), (20.0, 10.0), (0.0, 10.0)], 10.0);
        let pts = discretize_region(&region, &origin()).unwrap();
        assert_eq!(pts.len(), 6);
        let idx: Vec<(u32, u32)> = pts.iter().map(|p| (p.index.row, p.index.col)).collect();
        assert_eq!(idx, vec![(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)]);
        let last = pts[5].position;
        assert!((last.east_m - 20.0).abs() < 1e-6 && (last.north_m - 10.0).abs() < 1e-6);
        assert!(pts.iter().all(|p| p.position.up_m == 30.0));
    }

    #[test]
    fn degenerate_and_coarse_regions() {
        let o = origin();
        let region = SurveyRegion::new(vec![o; 4], 10.0, 20.0).unwrap();
        assert_eq!(discretize_region(&region, &o).unwrap().len(), 1);

        let region = region_from_enu([(0.0, 0.0), (20.0, 0.0), (20.0, 10.0), (0.0, 10.0)], 50.0);
        assert_eq!(discretize_region(&region, &o).unwrap().len(), 1);
    }

    #[test]
    fn rotated_rectangle_aligns_to_first_edge() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let region = region_from_enu(
            [(0.0, 0.0), (20.0 * s, 20.0 * s), (20.0 * s - 10.0 * s, 20.0 * s + 10.0 * s), (-10.0 * s, 10.0 * s)],
            10.0,
        );
        let pts = discretize_region(&region, &origin()).unwrap();
        assert_eq!(pts.len(), 6);
        assert!((pts[1].position.east_m - 10.0 * s).abs() < 1e-6);
        assert!((pts[1].position.north_m - 10.0 * s).abs() < 1e-6);
    }

    #[test]
    fn non_rectangle_rejected() {
        let region = region_from_enu([(0.0, 0.0), (20.0, 0.0), (30.0, 10.0), (0.0, 10.0)], 10.0);
        assert!(matches!(discretize_region(&region, &origin()), Err(PlanError::NotRectangle(_))));
    }

    #[test]
    fn three_corners_rejected() {
        let o = origin();
        assert_eq!(SurveyRegion::new(vec![o; 3], 10.0, 10.0).unwrap_err(), PlanError::CornerCount(3));
    }

    #[test]
    fn greedy_worked_example() {
        let pts = [gp(0, 0, 10.0, 0.0), gp(0, 1, 20.0, 0.0), gp(0, 2, 90.0, 0.0), gp(0, 3, 80.0, 0.0)];
        let starts = [EnuPoint::origin(), EnuPoint::new(100.0, 0.0, 0.0)];
        let plan = plan_greedy_routes(&pts, &starts).unwrap();
        let ids = |r: &AgentRoute<f64>| r.points.iter().map(|p| p.index.col).collect::<Vec<_>>();
        assert_eq!(ids(&plan.routes[0]), vec![0, 1]);
        assert_eq!(ids(&plan.routes[1]), vec![2, 3]);
        assert_eq!(plan.routes[0].length_m, 20.0);
        assert_eq!(plan.routes[1].length_m, 20.0);
        assert_eq!(plan.makespan_m, 20.0);
    }

    #[test]
    fn greedy_edge_cases() {
        let start = [EnuPoint::origin()];
        let one = [gp(0, 0, 3.0, 4.0)];
        let plan = plan_greedy_routes(&one, &start).unwrap();
        assert_eq!(plan.routes[0].points, one.to_vec());
        assert_eq!(plan.makespan_m, 5.0);

        let plan = plan_greedy_routes::<f64>(&[], &start).unwrap();
        assert!(plan.routes[0].points.is_empty());
        assert_eq!(plan.makespan_m, 0.0);

        assert_eq!(plan_greedy_routes(&one, &[]).unwrap_err(), PlanError::NoAgents);
    }

    #[test]
    fn greedy_tie_prefers_lower_index() {
        // both points are 5 m away; (0, 0) must win even though it is listed last
        let pts = [gp(0, 1, 5.0, 0.0), gp(0, 0, -5.0, 0.0)];
        let plan = plan_greedy_routes(&pts, &[EnuPoint::origin()]).unwrap();
        assert_eq!(plan.routes[0].points[0].index, GridIndex { row: 0, col: 0 });
    }

    #[test]
    fn route_length_cases() {
        assert_eq!(route_length::<f64>(&EnuPoint::origin(), &[]), 0.0);
        assert_eq!(route_length(&EnuPoint::origin(), &[gp(0, 0, 3.0, 4.0)]), 5.0);
        assert_eq!(route_length(&EnuPoint::origin(), &[gp(0, 0, 10.0, 0.0), gp(0, 1, 20.0, 0.0)]), 20.0);
    }

    #[test]
    fn bruteforce_small_cases() {
        let pts = [gp(0, 0, 10.0, 0.0), gp(0, 1, 20.0, 0.0), gp(0, 2, 90.0, 0.0), gp(0, 3, 80.0, 0.0)];
        let starts = [EnuPoint::origin(), EnuPoint::new(100.0, 0.0, 0.0)];
        assert_eq!(optimal_routes_bruteforce(&pts, &starts).unwrap().makespan_m, 20.0);

        let one = [gp(0, 0, 1.0, 0.0)];
        let plan = optimal_routes_bruteforce(&one, &[EnuPoint::origin()]).unwrap();
        assert_eq!(plan.routes[0].points, one.to_vec());

        let nine: Vec<_> = (0..9).map(|i| gp(0, i, i as f64, 0.0)).collect();
        assert!(matches!(
            optimal_routes_bruteforce(&nine, &[EnuPoint::origin()]),
            Err(PlanError::TooLarge { points: 9, .. })
        ));
    }

    fn uniform(w: usize, h: usize) -> TerrainGrid<f64> {
        let cells = vec![TerrainCell { class: TerrainClass::Road, cost: Some(1.0) }; w * h];
        TerrainGrid::from_cells(origin(), 1.0, w, h, cells).unwrap()
    }

    #[test]
    fn ground_path_uniform_grid() {
        let path = plan_ground_path(&uniform(3, 3), Cell::new(0, 0), Cell::new(2, 2)).unwrap();
        assert_eq!(path.cells.len(), 5);
        assert_eq!(path.cost, 4.0);
        for w in path.cells.windows(2) {
            assert_eq!(w[0].row.abs_diff(w[1].row) + w[0].col.abs_diff(w[1].col), 1);
        }
        let trivial = plan_ground_path(&uniform(3, 3), Cell::new(1, 1), Cell::new(1, 1)).unwrap();
        assert_eq!((trivial.cells.len(), trivial.cost), (1, 0.0));
    }

    #[test]
    fn ground_path_walled_goal() {
        let mut cells = vec![TerrainCell { class: TerrainClass::Grass, cost: Some(2.0) }; 25];
        for (r, c) in [(1, 2), (3, 2), (2, 1), (2, 3)] {
            cells[r * 5 + c] = TerrainCell { class: TerrainClass::Water, cost: None };
        }
        let grid = TerrainGrid::from_cells(origin(), 1.0, 5, 5, cells).unwrap();
        assert!(matches!(plan_ground_path(&grid, Cell::new(0, 0), Cell::new(2, 2)), Err(PlanError::NoPath { .. })));
        assert!(matches!(
            plan_ground_path(&grid, Cell::new(0, 0), Cell::new(1, 2)),
            Err(PlanError::BadEndpoint { reason: "impassable", .. })
        ));
        assert!(matches!(
            plan_ground_path(&grid, Cell::new(0, 0), Cell::new(9, 9)),
            Err(PlanError::BadEndpoint { .. })
        ));
    }

    #[test]
    fn ground_path_detours_around_expensive_cells() {
        // a band of rubble (cost 10) with a single road gap at column 4
        let mut cells = Vec::new();
        for r in 0..5 {
            for c in 0..5 {
                let cost = if r == 2 && c != 4 { 10.0 } else { 1.0 };
                cells.push(TerrainCell { class: TerrainClass::Road, cost: Some(cost) });
            }
        }
        let grid = TerrainGrid::from_cells(origin(), 1.0, 5, 5, cells).unwrap();
        let path = plan_ground_path(&grid, Cell::new(0, 0), Cell::new(4, 0)).unwrap();
        assert_eq!(path.cost, 12.0);
        assert!(path.cells.contains(&Cell::new(2, 4)));
    }
}
