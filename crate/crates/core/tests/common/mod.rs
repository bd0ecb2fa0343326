#![allow(dead_code)]

use std::collections::VecDeque;

use ontotamp_core::{Aabb, KnowledgeBase, MotionQuery, Point2};

/// 4-connected BFS over cell centers spaced `cell` apart, starting and ending
/// at the query's start and goal (which must sit on the lattice). A cell is
/// free when the moving box, inflated by `margin`, clears every obstacle and
/// stays inside the bounds; edges are checked at `cell / 16`.
pub fn grid_bfs_feasible(q: &MotionQuery, cell: f64, margin: f64) -> bool {
    let (hx, hy) = (q.half_extents.0 + margin, q.half_extents.1 + margin);
    let free = |p: Point2| {
        q.bounds.contains_point(p.x, p.y)
            && !q.obstacles.iter().any(|o| o.overlaps(&Aabb::centered(p.x, p.y, hx, hy)))
    };
    let b = q.bounds;
    let nx = ((b.xmax - b.xmin) / cell).round() as i64;
    let ny = ((b.ymax - b.ymin) / cell).round() as i64;
    let at = |i: i64, j: i64| Point2::new(b.xmin + i as f64 * cell, b.ymin + j as f64 * cell);
    let index = |p: Point2| (((p.x - b.xmin) / cell).round() as i64, ((p.y - b.ymin) / cell).round() as i64);
    let (s, g) = (index(q.start), index(q.goal));
    if !free(at(s.0, s.1)) || !free(at(g.0, g.1)) {
        return false;
    }
    let edge_free = |a: Point2, c: Point2| (0..=16).all(|k| free(a.lerp(&c, k as f64 / 16.0)));
    let mut seen = vec![false; ((nx + 1) * (ny + 1)) as usize];
    let id = |i: i64, j: i64| (i * (ny + 1) + j) as usize;
    let mut queue = VecDeque::from([s]);
    seen[id(s.0, s.1)] = true;
    while let Some((i, j)) = queue.pop_front() {
        if (i, j) == g {
            return true;
        }
        for (di, dj) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let (a, c) = (i + di, j + dj);
            if a < 0 || c < 0 || a > nx || c > ny || seen[id(a, c)] {
                continue;
            }
            if edge_free(at(i, j), at(a, c)) {
                seen[id(a, c)] = true;
                queue.push_back((a, c));
            }
        }
    }
    false
}

/// Minimal xorshift generator so the instance families do not depend on the
/// planner's RNG.
pub struct XorShift(pub u64);

impl XorShift {
    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// Lattice point in `[lo, hi]` with spacing `cell`.
    pub fn lattice(&mut self, lo: f64, hi: f64, cell: f64) -> f64 {
        let n = ((hi - lo) / cell).round() as u64;
        lo + (self.next_u64() % (n + 1)) as f64 * cell
    }
}

pub const BFS_CELL: f64 = 0.025;

/// Random cluttered query on the unit square with lattice start and goal.
pub fn random_instance(rng: &mut XorShift, seed: u64) -> MotionQuery {
    let bounds = Aabb::new(0.0, 0.0, 1.0, 1.0);
    let n = 3 + (rng.next_u64() % 6) as usize;
    let obstacles = (0..n)
        .map(|_| {
            let (w, h) = (rng.range(0.05, 0.3), rng.range(0.05, 0.3));
            let (x, y) = (rng.range(0.0, 1.0 - w), rng.range(0.0, 1.0 - h));
            Aabb::new(x, y, x + w, y + h)
        })
        .collect();
    let start = Point2::new(rng.lattice(0.05, 0.95, BFS_CELL), rng.lattice(0.05, 0.95, BFS_CELL));
    let goal = Point2::new(rng.lattice(0.05, 0.95, BFS_CELL), rng.lattice(0.05, 0.95, BFS_CELL));
    MotionQuery::new(start, goal, bounds).with_obstacles(obstacles).with_seed(seed)
}

/// Query whose start and goal are separated by a full-height wall.
pub fn walled_instance(rng: &mut XorShift, seed: u64) -> MotionQuery {
    let mut q = random_instance(rng, seed);
    let x = rng.range(0.4, 0.6);
    q.obstacles.push(Aabb::new(x - 0.02, -0.01, x + 0.02, 1.01));
    q.start = Point2::new(rng.lattice(0.05, 0.3, BFS_CELL), rng.lattice(0.05, 0.95, BFS_CELL));
    q.goal = Point2::new(rng.lattice(0.7, 0.95, BFS_CELL), rng.lattice(0.05, 0.95, BFS_CELL));
    q.obstacles.retain(|o| {
        let clear = |p: Point2| !o.inflate(0.02).contains_point(p.x, p.y);
        clear(q.start) && clear(q.goal) || o.ymax > 1.0
    });
    q
}

/// Sort key independent of the inference module: ruled types by priority,
/// then known types without a rule, then unknown labels.
pub fn oracle_rank(kb: &KnowledgeBase, task: &str, name: &str) -> (u8, u32) {
    match kb.object_type(name) {
        None => (2, 0),
        Some(ty) => match kb.query_action_priority(task, &ty) {
            Ok(Some((p, _))) => (0, p),
            _ => (1, 0),
        },
    }
}

/// Lexicographically-first permutation (by mention index) that respects every
/// pairwise rank constraint, found by enumeration.
pub fn brute_force_order(ranks: &[(u8, u32)]) -> Vec<usize> {
    let n = ranks.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<Vec<usize>> = None;
    loop {
        let ok = (0..n).all(|i| (i + 1..n).all(|j| ranks[perm[i]] <= ranks[perm[j]]));
        if ok && best.as_ref().is_none_or(|b| perm < *b) {
            best = Some(perm.clone());
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best.unwrap_or_default()
}

fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}
