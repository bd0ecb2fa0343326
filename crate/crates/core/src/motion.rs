//! Planar RRT-Connect for an axis-aligned footprint among axis-aligned obstacles.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{Aabb, Point2};

pub const DEFAULT_STEP: f64 = 0.05;
pub const DEFAULT_MAX_ITERATIONS: usize = 5000;
pub const DEFAULT_GOAL_TOLERANCE: f64 = 0.01;
pub const DEFAULT_INFLATION: f64 = 0.005;

/// Probability of sampling the other tree's root instead of a uniform point.
const TARGET_BIAS: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionQuery {
    pub start: Point2,
    pub goal: Point2,
    /// Half extents of the moving footprint.
    pub half_extents: (f64, f64),
    pub obstacles: Vec<Aabb>,
    pub bounds: Aabb,
    pub seed: u64,
    pub step: f64,
    pub max_iterations: usize,
    pub goal_tolerance: f64,
    pub inflation: f64,
}

impl MotionQuery {
    pub fn new(start: Point2, goal: Point2, bounds: Aabb) -> Self {
        MotionQuery {
            start,
            goal,
            half_extents: (0.01, 0.01),
            obstacles: Vec::new(),
            bounds,
            seed: 0,
            step: DEFAULT_STEP,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            goal_tolerance: DEFAULT_GOAL_TOLERANCE,
            inflation: DEFAULT_INFLATION,
        }
    }

    pub fn with_obstacles(mut self, obstacles: Vec<Aabb>) -> Self {
        self.obstacles = obstacles;
        self
    }

    pub fn with_half_extents(mut self, hx: f64, hy: f64) -> Self {
        self.half_extents = (hx, hy);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    /// Center inside bounds and footprint clear of every inflated obstacle.
    pub fn is_free(&self, p: Point2) -> bool {
        if !self.bounds.contains_point(p.x, p.y) {
            return false;
        }
        let body = Aabb::centered(p.x, p.y, self.half_extents.0, self.half_extents.1);
        !self.obstacles.iter().any(|o| o.inflate(self.inflation).overlaps(&body))
    }

    /// Sampling resolution used for edge checks. Never coarser than `step / 4`,
    /// and fine enough that the inflation margin covers the gaps between samples.
    pub fn edge_resolution(&self) -> f64 {
        let quarter = self.step / 4.0;
        if self.inflation > 0.0 {
            quarter.min(2.0 * self.inflation)
        } else {
            quarter
        }
    }

    pub fn segment_free(&self, a: Point2, b: Point2) -> bool {
        segment_clear(a, b, self.edge_resolution(), |p| self.is_free(p))
    }
}

fn segment_clear(a: Point2, b: Point2, resolution: f64, free: impl Fn(Point2) -> bool) -> bool {
    let n = (a.distance(&b) / resolution).ceil().max(1.0) as usize;
    (0..=n).all(|i| free(a.lerp(&b, i as f64 / n as f64)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub waypoints: Vec<Point2>,
    pub length: f64,
}

impl Trajectory {
    pub fn from_waypoints(waypoints: Vec<Point2>) -> Self {
        let length = waypoints.windows(2).map(|w| w[0].distance(&w[1])).sum();
        Trajectory { waypoints, length }
    }

    pub fn start(&self) -> Option<Point2> {
        self.waypoints.first().copied()
    }

    pub fn end(&self) -> Option<Point2> {
        self.waypoints.last().copied()
    }

    pub fn max_segment(&self) -> f64 {
        self.waypoints.windows(2).map(|w| w[0].distance(&w[1])).fold(0.0, f64::max)
    }

    /// Splits every segment so none is longer than `step`.
    pub fn densify(&self, step: f64) -> Trajectory {
        let Some(&first) = self.waypoints.first() else {
            return self.clone();
        };
        let mut out = vec![first];
        for w in self.waypoints.windows(2) {
            let n = (w[0].distance(&w[1]) / step).ceil().max(1.0) as usize;
            for i in 1..n {
                out.push(w[0].lerp(&w[1], i as f64 / n as f64));
            }
            out.push(w[1]);
        }
        Trajectory::from_waypoints(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MotionFailure {
    GoalInCollision,
    StartInCollision,
    IterationLimit,
}

impl MotionFailure {
    pub fn as_str(&self) -> &'static str {
        match self {
            MotionFailure::GoalInCollision => "motion planning failed: goal in collision",
            MotionFailure::StartInCollision => "motion planning failed: start in collision",
            MotionFailure::IterationLimit => "motion planning failed: iteration limit reached",
        }
    }
}

impl fmt::Display for MotionFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::error::Error for MotionFailure {}

struct Tree {
    nodes: Vec<Point2>,
    parents: Vec<usize>,
}

impl Tree {
    fn new(root: Point2) -> Self {
        Tree { nodes: vec![root], parents: vec![0] }
    }

    fn nearest(&self, q: Point2) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.nodes.iter().enumerate() {
            let d = (p.x - q.x).powi(2) + (p.y - q.y).powi(2);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    fn push(&mut self, p: Point2, parent: usize) -> usize {
        self.nodes.push(p);
        self.parents.push(parent);
        self.nodes.len() - 1
    }

    /// Root-to-node path.
    fn path_to(&self, mut idx: usize) -> Vec<Point2> {
        let mut out = vec![self.nodes[idx]];
        while idx != 0 {
            idx = self.parents[idx];
            out.push(self.nodes[idx]);
        }
        out.reverse();
        out
    }
}

enum Extend {
    Trapped,
    Advanced(usize),
    Reached(usize),
}

fn extend(tree: &mut Tree, q: Point2, query: &MotionQuery) -> Extend {
    let near_idx = tree.nearest(q);
    let near = tree.nodes[near_idx];
    let d = near.distance(&q);
    if d <= 1e-12 {
        return Extend::Reached(near_idx);
    }
    let reached = d <= query.step;
    let new = if reached { q } else { near.lerp(&q, query.step / d) };
    if !query.is_free(new) || !query.segment_free(near, new) {
        return Extend::Trapped;
    }
    let idx = tree.push(new, near_idx);
    if reached {
        Extend::Reached(idx)
    } else {
        Extend::Advanced(idx)
    }
}

fn connect(tree: &mut Tree, q: Point2, query: &MotionQuery) -> Option<usize> {
    loop {
        match extend(tree, q, query) {
            Extend::Reached(idx) => return Some(idx),
            Extend::Advanced(_) => continue,
            Extend::Trapped => return None,
        }
    }
}

/// Plans a collision-free path from `query.start` to `query.goal`.
///
/// # Panics
/// If `step` is not positive or `max_iterations` is zero.
pub fn plan_motion(query: &MotionQuery) -> Result<Trajectory, MotionFailure> {
    assert!(query.step > 0.0, "step must be positive");
    assert!(query.max_iterations >= 1, "max_iterations must be at least 1");
    if !query.is_free(query.start) {
        return Err(MotionFailure::StartInCollision);
    }
    if !query.is_free(query.goal) {
        return Err(MotionFailure::GoalInCollision);
    }
    if query.segment_free(query.start, query.goal) {
        return Ok(Trajectory::from_waypoints(vec![query.start, query.goal]).densify(query.step));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(query.seed);
    let mut a = Tree::new(query.start);
    let mut b = Tree::new(query.goal);
    let mut a_is_start = true;
    let (lo, hi) = ((query.bounds.xmin, query.bounds.ymin), (query.bounds.xmax, query.bounds.ymax));
    for _ in 0..query.max_iterations {
        let q = if rng.random_bool(TARGET_BIAS) {
            b.nodes[0]
        } else {
            Point2::new(rng.random_range(lo.0..=hi.0), rng.random_range(lo.1..=hi.1))
        };
        let new_idx = match extend(&mut a, q, query) {
            Extend::Trapped => None,
            Extend::Advanced(i) | Extend::Reached(i) => Some(i),
        };
        if let Some(ia) = new_idx {
            let target = a.nodes[ia];
            if let Some(ib) = connect(&mut b, target, query) {
                let (start_tree, start_idx, goal_tree, goal_idx) =
                    if a_is_start { (&a, ia, &b, ib) } else { (&b, ib, &a, ia) };
                let mut path = start_tree.path_to(start_idx);
                let mut tail = goal_tree.path_to(goal_idx);
                tail.reverse();
                path.extend(tail.into_iter().skip(1));
                let raw = Trajectory::from_waypoints(path);
                return Ok(shortcut(&raw, query));
            }
        }
        std::mem::swap(&mut a, &mut b);
        a_is_start = !a_is_start;
    }
    Err(MotionFailure::IterationLimit)
}

/// Greedy deterministic shortcutting: from each kept waypoint, jump to the
/// farthest later waypoint reachable by a free straight segment. The result is
/// re-densified so no segment exceeds `query.step`.
pub fn shortcut(trajectory: &Trajectory, query: &MotionQuery) -> Trajectory {
    let w = &trajectory.waypoints;
    if w.len() <= 2 {
        return trajectory.densify(query.step);
    }
    let mut kept = vec![w[0]];
    let mut i = 0;
    while i < w.len() - 1 {
        let mut j = w.len() - 1;
        while j > i + 1 && !query.segment_free(w[i], w[j]) {
            j -= 1;
        }
        kept.push(w[j]);
        i = j;
    }
    Trajectory::from_waypoints(kept).densify(query.step)
}

/// Independent dense re-check against the uninflated obstacles.
pub fn trajectory_is_sound(trajectory: &Trajectory, query: &MotionQuery, resolution: f64) -> bool {
    let free = |p: Point2| {
        query.bounds.contains_point(p.x, p.y) && {
            let body = Aabb::centered(p.x, p.y, query.half_extents.0, query.half_extents.1);
            !query.obstacles.iter().any(|o| o.overlaps(&body))
        }
    };
    match trajectory.waypoints.as_slice() {
        [] => false,
        [p] => free(*p),
        w => w.windows(2).all(|s| segment_clear(s[0], s[1], resolution, free)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bounds() -> Aabb {
        Aabb::new(0.0, 0.0, 1.0, 1.0)
    }

    #[test]
    fn free_space_is_straight() {
        let q = MotionQuery::new(Point2::new(0.1, 0.1), Point2::new(0.9, 0.8), bounds());
        let t = plan_motion(&q).unwrap();
        let direct = q.start.distance(&q.goal);
        assert!(t.length <= 1.5 * direct);
        assert!(t.max_segment() <= q.step + 1e-9);
        assert_eq!(t.end(), Some(q.goal));
    }

    #[test]
    fn goal_and_start_collisions() {
        let wall = Aabb::new(0.4, 0.4, 0.6, 0.6);
        let q = MotionQuery::new(Point2::new(0.1, 0.1), Point2::new(0.5, 0.5), bounds()).with_obstacles(vec![wall]);
        assert_eq!(plan_motion(&q), Err(MotionFailure::GoalInCollision));
        let q = MotionQuery::new(Point2::new(0.5, 0.5), Point2::new(0.1, 0.1), bounds()).with_obstacles(vec![wall]);
        assert_eq!(plan_motion(&q), Err(MotionFailure::StartInCollision));
        let q = MotionQuery::new(Point2::new(0.1, 0.1), Point2::new(1.5, 0.5), bounds());
        assert_eq!(plan_motion(&q), Err(MotionFailure::GoalInCollision));
    }

    #[test]
    fn routes_around_wall() {
        let wall = Aabb::new(0.45, 0.0, 0.55, 0.8);
        let q = MotionQuery::new(Point2::new(0.2, 0.2), Point2::new(0.8, 0.2), bounds())
            .with_obstacles(vec![wall])
            .with_seed(7);
        let t = plan_motion(&q).unwrap();
        assert!(trajectory_is_sound(&t, &q, q.step / 8.0));
        assert!(t.waypoints.iter().any(|p| p.y > 0.8));
        assert_eq!(plan_motion(&q).unwrap(), t);
    }

    #[test]
    fn shortcut_straightens_zigzag() {
        let zig = Trajectory::from_waypoints(vec![
            Point2::new(0.1, 0.1),
            Point2::new(0.3, 0.4),
            Point2::new(0.5, 0.1),
            Point2::new(0.7, 0.4),
            Point2::new(0.9, 0.1),
        ]);
        let q = MotionQuery::new(Point2::new(0.1, 0.1), Point2::new(0.9, 0.1), bounds());
        let s = shortcut(&zig, &q);
        assert!(s.length < zig.length);
        assert!((s.length - 0.8).abs() < 1e-9);
    }

    #[test]
    fn single_segment_unchanged() {
        let q = MotionQuery::new(Point2::new(0.1, 0.1), Point2::new(0.12, 0.1), bounds());
        let t = Trajectory::from_waypoints(vec![q.start, q.goal]);
        assert_eq!(shortcut(&t, &q), t);
    }

    #[test]
    fn l_path_keeps_corner() {
        let wall = Aabb::new(0.3, 0.3, 1.0, 1.0);
        let q = MotionQuery::new(Point2::new(0.1, 0.9), Point2::new(0.9, 0.1), bounds()).with_obstacles(vec![wall]);
        let l = Trajectory::from_waypoints(vec![q.start, Point2::new(0.1, 0.1), q.goal]);
        let s = shortcut(&l, &q);
        assert!(s.waypoints.contains(&Point2::new(0.1, 0.1)));
        assert!(trajectory_is_sound(&s, &q, q.step / 8.0));
        assert!(s.length <= l.length + 1e-9);
    }
}
