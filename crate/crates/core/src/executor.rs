//! Plan, move, and re-plan on failure.

use std::collections::BTreeSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::geometry::Point2;
use crate::inference::build_guidance;
use crate::motion::{
    plan_motion, MotionFailure, MotionQuery, DEFAULT_GOAL_TOLERANCE, DEFAULT_INFLATION, DEFAULT_MAX_ITERATIONS,
    DEFAULT_STEP,
};
use crate::ontology::KnowledgeBase;
use crate::planner::{parse_plan, validate_plan, PlannerBackend, PrimitiveAction, SymbolicPlan, ViolationKind};
use crate::prompt::PromptTemplate;
use crate::tagger::extract_command;
use crate::world::{describe_environment, GoalSpec, WorldState};

pub const DEFAULT_MAX_CALLS: usize = 10;
pub const GRIPPER_HALF_EXTENT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PipelineMode {
    /// No ontology guidance in the prompt.
    Baseline,
    Onto,
}

impl PipelineMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            PipelineMode::Baseline => "baseline",
            PipelineMode::Onto => "onto",
        }
    }
}

impl std::str::FromStr for PipelineMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(PipelineMode::Baseline),
            "onto" => Ok(PipelineMode::Onto),
            other => Err(format!("unknown mode {other:?} (expected baseline or onto)")),
        }
    }
}

/// Which motion queries are forced to fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FailureInjection {
    #[default]
    Never,
    /// The k-th motion query of the run, counting from 1.
    NthQuery(usize),
    EveryQuery,
    /// The first query issued for a Place action.
    FirstPlace,
}

impl std::str::FromStr for FailureInjection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "never" => Ok(FailureInjection::Never),
            "every" => Ok(FailureInjection::EveryQuery),
            "first-place" => Ok(FailureInjection::FirstPlace),
            other => other
                .strip_prefix("nth:")
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|k| *k >= 1)
                .map(FailureInjection::NthQuery)
                .ok_or_else(|| format!("unknown injection policy {other:?} (never, every, first-place, nth:K)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionSettings {
    pub step: f64,
    pub max_iterations: usize,
    pub goal_tolerance: f64,
    pub inflation: f64,
    pub gripper_half_extent: f64,
}

impl Default for MotionSettings {
    fn default() -> Self {
        MotionSettings {
            step: DEFAULT_STEP,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            goal_tolerance: DEFAULT_GOAL_TOLERANCE,
            inflation: DEFAULT_INFLATION,
            gripper_half_extent: GRIPPER_HALF_EXTENT,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExecutorConfig {
    pub max_calls: usize,
    pub mode: PipelineMode,
    pub motion: MotionSettings,
    pub seed: u64,
    pub injection: FailureInjection,
    pub injected_reason: MotionFailure,
    pub template: PromptTemplate,
    /// Keep every intermediate state in the trace.
    pub record_states: bool,
}

impl Default for ExecutorConfig {
    fn default() -> Self {
        ExecutorConfig {
            max_calls: DEFAULT_MAX_CALLS,
            mode: PipelineMode::Onto,
            motion: MotionSettings::default(),
            seed: 0,
            injection: FailureInjection::Never,
            injected_reason: MotionFailure::IterationLimit,
            template: PromptTemplate::default(),
            record_states: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Success,
    PlanningFailure,
    ExecutionFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MotionRecord {
    Planned { waypoints: usize, length: f64 },
    Failed { reason: MotionFailure, injected: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    /// 1-based planner call that produced the action.
    pub call: usize,
    pub action: PrimitiveAction,
    /// `None` when a precondition failed before motion planning.
    pub motion: Option<MotionRecord>,
    pub error: Option<String>,
    /// Hash of the state after the step.
    pub state_hash: String,
    /// Undone by a later failure in the same Pick/Place pair.
    pub rolled_back: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub steps: Vec<TraceStep>,
    pub llm_calls: usize,
    pub outcome: Outcome,
    /// Wall time spent in motion planning, seconds.
    pub motion_time_total: f64,
    /// Wall time spent waiting for the planner backend, seconds.
    pub llm_time_total: f64,
    pub motion_queries: usize,
    pub failure_messages: Vec<String>,
    pub prompts: Vec<String>,
    pub responses: Vec<String>,
    /// Actions whose effects persist in the final state.
    pub committed: Vec<PrimitiveAction>,
    /// Unexecuted remainder of the last plan.
    pub pending: Vec<PrimitiveAction>,
    /// Backend error that ended the run, if any.
    pub error: Option<String>,
    pub final_state: WorldState,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub states: Vec<WorldState>,
}

impl ExecutionTrace {
    /// Executed actions followed by the unexecuted tail of the last plan.
    pub fn stitched_plan(&self) -> SymbolicPlan {
        SymbolicPlan::new(self.committed.iter().chain(&self.pending).cloned().collect())
    }

    /// Same trace with wall-clock fields zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> ExecutionTrace {
        ExecutionTrace { motion_time_total: 0.0, llm_time_total: 0.0, ..self.clone() }
    }
}

fn violation_text(kind: ViolationKind) -> &'static str {
    match kind {
        ViolationKind::PickWhileHolding => "gripper occupied",
        ViolationKind::PlaceWithoutPick => "object not held",
        ViolationKind::UnknownObject => "object not found",
        ViolationKind::PickBuried => "object has objects on top",
    }
}

fn failure_message(action: &PrimitiveAction, reason: &str) -> String {
    format!("FAILURE: {} {}: {reason}", action.verb(), action.object())
}

/// Motion query for `action` from the current gripper position.
pub fn motion_query(state: &WorldState, action: &PrimitiveAction, settings: &MotionSettings, seed: u64) -> MotionQuery {
    let g = settings.gripper_half_extent;
    let (goal, half, mut exclude) = match action {
        PrimitiveAction::Pick { object } => {
            let o = &state.objects[object];
            let mut ex: BTreeSet<String> = state.ancestors(object).into_iter().collect();
            ex.insert(object.clone());
            (o.center(), (g, g), ex)
        }
        PrimitiveAction::Place { object, pose } => {
            let o = &state.objects[object];
            let (hx, hy) = o.footprint.half_extents();
            let mut ex = BTreeSet::from([object.clone()]);
            if let Some(s) = state.support_at(pose.x, pose.y, object) {
                if s.is_object {
                    ex.extend(state.ancestors(&s.name));
                    ex.insert(s.name);
                }
            }
            (Point2::new(pose.x, pose.y), (hx.max(g), hy.max(g)), ex)
        }
    };
    let body = crate::geometry::Aabb::centered(state.gripper.x, state.gripper.y, half.0, half.1);
    for o in state.objects.values() {
        if o.footprint.inflate(settings.inflation).overlaps(&body) {
            exclude.insert(o.name.clone());
        }
    }
    let obstacles = state.objects.values().filter(|o| !exclude.contains(&o.name)).map(|o| o.footprint).collect();
    MotionQuery {
        start: state.gripper,
        goal,
        half_extents: half,
        obstacles,
        bounds: state.workspace,
        seed,
        step: settings.step,
        max_iterations: settings.max_iterations,
        goal_tolerance: settings.goal_tolerance,
        inflation: settings.inflation,
    }
}

fn query_seed(seed: u64, index: usize) -> u64 {
    // splitmix64 over (seed, index)
    let mut z = seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, PartialEq)]
enum FailureKind {
    Planning,
    Execution,
}

/// Runs the plan/execute/feedback loop until the goal holds or the call budget is spent.
pub fn run_task(
    kb: &KnowledgeBase,
    initial: &WorldState,
    goal: &GoalSpec,
    user_input: &str,
    backend: &mut dyn PlannerBackend,
    config: &ExecutorConfig,
) -> ExecutionTrace {
    let tagged = extract_command(user_input);
    let mut state = initial.clone();
    let mut trace = ExecutionTrace {
        steps: Vec::new(),
        llm_calls: 0,
        outcome: Outcome::PlanningFailure,
        motion_time_total: 0.0,
        llm_time_total: 0.0,
        motion_queries: 0,
        failure_messages: Vec::new(),
        prompts: Vec::new(),
        responses: Vec::new(),
        committed: Vec::new(),
        pending: Vec::new(),
        error: None,
        final_state: initial.clone(),
        states: Vec::new(),
    };
    let mut last_failure = FailureKind::Planning;
    let mut place_queries = 0usize;
    let mut succeeded = false;

    while trace.llm_calls < config.max_calls.max(1) {
        trace.llm_calls += 1;
        let call = trace.llm_calls;
        let mut guidance = match (config.mode, &tagged) {
            (PipelineMode::Onto, Ok(cmd)) => build_guidance(kb, cmd, Some(&state)).render(),
            (PipelineMode::Onto, Err(e)) => format!("Warning: {e}"),
            (PipelineMode::Baseline, _) => String::new(),
        };
        for m in &trace.failure_messages {
            if !guidance.is_empty() {
                guidance.push('\n');
            }
            guidance.push_str(m);
        }
        let env = describe_environment(kb, &state);
        let prompt = config.template.compose(&guidance, &env, user_input);
        trace.prompts.push(prompt.text.clone());

        let started = Instant::now();
        let reply = backend.request_plan(&prompt);
        trace.llm_time_total += started.elapsed().as_secs_f64();
        let text = match reply {
            Ok(t) => t,
            Err(e) => {
                trace.error = Some(e.to_string());
                last_failure = FailureKind::Planning;
                break;
            }
        };
        trace.responses.push(text.clone());

        let plan = match parse_plan(&text) {
            Ok(p) => p,
            Err(e) => {
                trace.failure_messages.push(format!("FAILURE: Plan: {e}"));
                trace.pending.clear();
                last_failure = FailureKind::Planning;
                continue;
            }
        };
        if let Err(violations) = validate_plan(&plan, &state) {
            for v in violations {
                let action = &plan.actions[v.index];
                trace.failure_messages.push(failure_message(action, violation_text(v.kind)));
            }
            trace.pending = plan.actions.clone();
            last_failure = FailureKind::Planning;
            continue;
        }

        let mut snapshot = (state.clone(), trace.committed.len(), trace.steps.len(), 0usize);
        let mut failed = false;
        for (i, action) in plan.actions.iter().enumerate() {
            if !action.is_place() {
                snapshot = (state.clone(), trace.committed.len(), trace.steps.len(), i);
            }
            let mut record = TraceStep {
                call,
                action: action.clone(),
                motion: None,
                error: None,
                state_hash: String::new(),
                rolled_back: false,
            };
            let failure = if let Err(e) = state.check_action(action) {
                Some(e.to_string())
            } else {
                trace.motion_queries += 1;
                let index = trace.motion_queries;
                let inject = match config.injection {
                    FailureInjection::Never => false,
                    FailureInjection::NthQuery(k) => index == k,
                    FailureInjection::EveryQuery => true,
                    FailureInjection::FirstPlace => action.is_place() && place_queries == 0,
                };
                if action.is_place() {
                    place_queries += 1;
                }
                let query = motion_query(&state, action, &config.motion, query_seed(config.seed, index));
                let started = Instant::now();
                let result = if inject { Err(config.injected_reason) } else { plan_motion(&query) };
                trace.motion_time_total += started.elapsed().as_secs_f64();
                match result {
                    Err(reason) => {
                        record.motion = Some(MotionRecord::Failed { reason, injected: inject });
                        Some(reason.to_string())
                    }
                    Ok(traj) => {
                        record.motion =
                            Some(MotionRecord::Planned { waypoints: traj.waypoints.len(), length: traj.length });
                        match state.apply_action(action, &traj) {
                            Ok(next) => {
                                state = next;
                                None
                            }
                            Err(e) => Some(e.to_string()),
                        }
                    }
                }
            };
            record.state_hash = state.state_hash();
            if config.record_states {
                trace.states.push(state.clone());
            }
            match failure {
                None => {
                    trace.committed.push(action.clone());
                    trace.steps.push(record);
                }
                Some(reason) => {
                    record.error = Some(reason.clone());
                    trace.steps.push(record);
                    trace.failure_messages.push(failure_message(action, &reason));
                    let (snap_state, committed_len, steps_len, start) = snapshot.clone();
                    for s in &mut trace.steps[steps_len..] {
                        s.rolled_back = true;
                    }
                    state = snap_state;
                    trace.committed.truncate(committed_len);
                    trace.pending = plan.actions[start..].to_vec();
                    last_failure = FailureKind::Execution;
                    failed = true;
                    break;
                }
            }
        }
        if failed {
            continue;
        }
        trace.pending.clear();
        if state.check_goal(goal) {
            succeeded = true;
            break;
        }
        trace.failure_messages.push("FAILURE: Plan: goal not satisfied after execution".to_string());
        last_failure = FailureKind::Planning;
    }

    trace.outcome = if succeeded {
        Outcome::Success
    } else if last_failure == FailureKind::Execution {
        Outcome::ExecutionFailure
    } else {
        Outcome::PlanningFailure
    };
    trace.final_state = state;
    trace
}
