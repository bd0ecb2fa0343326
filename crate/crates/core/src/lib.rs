//! Ontology-guided task and motion planning for tabletop pick-and-place.
//!
//! Pipeline: [`tagger`] extracts tasks and objects from a command,
//! [`inference`] ranks them with the rules of an [`ontology`], [`prompt`]
//! composes the planner input, a [`planner`] backend returns a Pick/Place plan,
//! and [`executor`] runs it in the kinematic [`world`] with [`motion`] planning
//! and failure feedback. [`eval`] aggregates success rates over task suites.

pub mod assets;
pub mod eval;
pub mod executor;
pub mod geometry;
pub mod inference;
pub mod motion;
pub mod ontology;
pub mod planner;
pub mod prompt;
pub mod tagger;
pub mod world;

pub use eval::{run_benchmark, score_semantics, EvalRow, TaskSpec};
pub use executor::{run_task, ExecutionTrace, ExecutorConfig, FailureInjection, Outcome, PipelineMode};
pub use geometry::{Aabb, Point2};
pub use inference::{build_guidance, classify_objects, Guidance};
pub use motion::{plan_motion, MotionFailure, MotionQuery, Trajectory};
pub use ontology::{ActionPriorityRule, KnowledgeBase, OntologyError};
pub use planner::{
    parse_plan, validate_plan, BackendConfig, BackendError, BackendKind, MockBackend, MockMode, PlacePose, PlannerBackend,
    PrimitiveAction, SymbolicPlan,
};
pub use prompt::{Prompt, PromptTemplate, TemplateError};
pub use tagger::{extract_command, TagError, TaggedCommand};
pub use world::{describe_state, load_scene, GoalSpec, PreconditionError, SceneObject, WorldState};
