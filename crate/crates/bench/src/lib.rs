//! Fixtures shared by the benchmarks.

use ontotamp_core::eval::task_world;
use ontotamp_core::{Aabb, GoalSpec, KnowledgeBase, MotionQuery, Point2, WorldState};

pub const TASK2_PROMPT: &str = "Put banana, apple and bowl in plate";
pub const TASK4_PROMPT: &str =
    "Clean table, move plate and cup to the right table, move sugar_box, tomato_can, and cracker_box to the left table";

pub const PLAN_BLOCK: &str = "Full Plan =\n    Pick ([bowl],{})\n    Place ([bowl]),{0.2,0.4,0.77,0}\n    Pick ([banana],{})\n    Place ([banana]),{0.2,0.4,0.83,0}\n    Pick ([apple],{})\n    Place ([apple]),{0.22,0.41,0.83,0}\n";

pub fn kitchen() -> KnowledgeBase {
    KnowledgeBase::kitchen()
}

pub fn scene(id: &str) -> (WorldState, GoalSpec) {
    task_world(id).expect("built-in scene")
}

/// Query that needs a detour around a central wall.
pub fn wall_query(seed: u64) -> MotionQuery {
    MotionQuery::new(Point2::new(0.1, 0.5), Point2::new(0.9, 0.5), Aabb::new(0.0, 0.0, 1.0, 1.0))
        .with_obstacles(vec![Aabb::new(0.45, 0.1, 0.55, 0.9)])
        .with_seed(seed)
}
