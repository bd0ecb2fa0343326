//! Task suites, plan scoring and success-rate aggregation.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assets;
use crate::executor::{run_task, ExecutionTrace, ExecutorConfig, Outcome, PipelineMode};
use crate::ontology::KnowledgeBase;
use crate::planner::{parse_plan, validate_plan, BackendConfig, BackendError, MockMode, SymbolicPlan};
use crate::tagger::{extract_command, TaggedCommand};
use crate::world::{load_scene, GoalSpec, WorldError, WorldState};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: u32,
    pub prompt: String,
    pub scene: String,
    /// The command lists objects in an order that violates the priorities.
    pub order_sensitive: bool,
    /// `(a, b)`: `a` must be placed before `b`.
    pub gold_pairs: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldParse {
    pub id: u32,
    pub prompt: String,
    pub parse: TaggedCommand,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseSample {
    pub prompt: String,
    pub parse: TaggedCommand,
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown scene {0:?}")]
    UnknownScene(String),
    #[error("scene {id}: {source}")]
    Scene { id: String, source: WorldError },
    #[error("trials must be at least 1")]
    InvalidTrials,
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub fn load_tasks(json: &str) -> Result<Vec<TaskSpec>, EvalError> {
    Ok(serde_json::from_str(json)?)
}

pub fn builtin_tasks() -> Vec<TaskSpec> {
    load_tasks(assets::TASKS_JSON).expect("bundled task suite")
}

pub fn builtin_gold_parses() -> Vec<GoldParse> {
    serde_json::from_str(assets::GOLD_PARSES_JSON).expect("bundled gold parses")
}

pub fn builtin_noise_corpus() -> Vec<NoiseSample> {
    serde_json::from_str(assets::NOISE_CORPUS_JSON).expect("bundled noise corpus")
}

/// Initial state and goal of a built-in scene.
pub fn task_world(scene: &str) -> Result<(WorldState, GoalSpec), EvalError> {
    let text = assets::scene(scene).ok_or_else(|| EvalError::UnknownScene(scene.to_string()))?;
    load_scene(text).map_err(|source| EvalError::Scene { id: scene.to_string(), source })
}

fn first_places(plan: &SymbolicPlan) -> BTreeMap<&str, usize> {
    plan.placement_order().into_iter().enumerate().map(|(i, o)| (o, i)).collect()
}

/// Fraction of gold pairs whose first placements appear in order. 1.0 when
/// there are no pairs.
pub fn pair_fraction(plan: &SymbolicPlan, pairs: &[(String, String)]) -> f64 {
    if pairs.is_empty() {
        return 1.0;
    }
    let pos = first_places(plan);
    let ok = pairs
        .iter()
        .filter(|(a, b)| matches!((pos.get(a.as_str()), pos.get(b.as_str())), (Some(i), Some(j)) if i < j))
        .count();
    ok as f64 / pairs.len() as f64
}

/// 0.1 for a structurally valid plan plus 0.9 times the gold pair fraction.
pub fn score_plan(plan: &SymbolicPlan, pairs: &[(String, String)], initial: &WorldState) -> f64 {
    let structural = if validate_plan(plan, initial).is_ok() { 1.0 } else { 0.0 };
    0.1 * structural + 0.9 * pair_fraction(plan, pairs)
}

/// [`score_plan`] on raw planner text; unparseable text scores 0.
pub fn score_semantics(text: &str, pairs: &[(String, String)], initial: &WorldState) -> f64 {
    match parse_plan(text) {
        Ok(plan) => score_plan(&plan, pairs, initial),
        Err(_) => 0.0,
    }
}

/// Task-plan success: the stitched plan is valid and fully ordered.
pub fn task_plan_success(trace: &ExecutionTrace, task: &TaskSpec, initial: &WorldState) -> bool {
    let plan = trace.stitched_plan();
    !plan.is_empty() && score_plan(&plan, &task.gold_pairs, initial) == 1.0
}

/// Execution success: task-plan success, the goal reached, and no gold pair
/// inverted in the final stack.
pub fn execution_success(trace: &ExecutionTrace, task: &TaskSpec, initial: &WorldState) -> bool {
    task_plan_success(trace, task, initial)
        && trace.outcome == Outcome::Success
        && task
            .gold_pairs
            .iter()
            .all(|(a, b)| !trace.final_state.ancestors(a).iter().any(|x| x == b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub task_id: u32,
    pub trial: usize,
    pub seed: u64,
    pub outcome: Option<Outcome>,
    pub llm_calls: usize,
    pub motion_queries: usize,
    pub motion_time_s: f64,
    pub llm_time_s: f64,
    pub score: f64,
    pub tpsr: bool,
    pub exesr: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub task_id: u32,
    pub mode: PipelineMode,
    pub backend: String,
    pub trials: usize,
    pub tpsr: f64,
    pub exesr: f64,
    pub mean_calls: f64,
    pub mean_motion_time_s: f64,
    pub mean_motion_queries: f64,
    pub mean_score: f64,
    pub mean_llm_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRun {
    pub rows: Vec<EvalRow>,
    pub trials: Vec<TrialResult>,
}

/// Backend used for `name` in `mode`. `mock` pairs baseline with the naive
/// mock and onto with the guided mock.
pub fn backend_for_mode(name: &str, mode: PipelineMode) -> Result<BackendConfig, BackendError> {
    match name {
        "mock" => Ok(BackendConfig::mock(match mode {
            PipelineMode::Baseline => MockMode::Naive,
            PipelineMode::Onto => MockMode::Guided,
        })),
        other => {
            let mut c = BackendConfig::mock(MockMode::Guided);
            c.kind = other.parse()?;
            Ok(c)
        }
    }
}

pub fn trial_seed(seed: u64, task_id: u32, trial: usize) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(u64::from(task_id) * 10_007).wrapping_add(trial as u64)
}

fn run_trial(
    kb: &KnowledgeBase,
    task: &TaskSpec,
    trial: usize,
    backend: &BackendConfig,
    config: &ExecutorConfig,
) -> TrialResult {
    let seed = trial_seed(config.seed, task.id, trial);
    let mut result = TrialResult {
        task_id: task.id,
        trial,
        seed,
        outcome: None,
        llm_calls: 0,
        motion_queries: 0,
        motion_time_s: 0.0,
        llm_time_s: 0.0,
        score: 0.0,
        tpsr: false,
        exesr: false,
        error: None,
    };
    let (state, goal) = match task_world(&task.scene) {
        Ok(w) => w,
        Err(e) => {
            result.error = Some(e.to_string());
            return result;
        }
    };
    let mut planner = match backend.build() {
        Ok(b) => b,
        Err(e) => {
            result.error = Some(e.to_string());
            return result;
        }
    };
    let cfg = ExecutorConfig { seed, ..config.clone() };
    let trace = run_task(kb, &state, &goal, &task.prompt, planner.as_mut(), &cfg);
    result.outcome = Some(trace.outcome);
    result.llm_calls = trace.llm_calls;
    result.motion_queries = trace.motion_queries;
    result.motion_time_s = trace.motion_time_total;
    result.llm_time_s = trace.llm_time_total;
    result.score = score_plan(&trace.stitched_plan(), &task.gold_pairs, &state);
    result.tpsr = task_plan_success(&trace, task, &state);
    result.exesr = execution_success(&trace, task, &state);
    result.error = trace.error;
    result
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Runs every task `trials` times and aggregates one row per task.
pub fn run_benchmark(
    kb: &KnowledgeBase,
    tasks: &[TaskSpec],
    backend: &BackendConfig,
    trials: usize,
    config: &ExecutorConfig,
) -> Result<BenchmarkRun, EvalError> {
    if trials == 0 {
        return Err(EvalError::InvalidTrials);
    }
    backend.validate()?;
    let jobs: Vec<(usize, usize)> = (0..tasks.len()).flat_map(|t| (0..trials).map(move |k| (t, k))).collect();
    let results: Vec<TrialResult> =
        jobs.par_iter().map(|&(t, k)| run_trial(kb, &tasks[t], k, backend, config)).collect();
    let rows = tasks
        .iter()
        .map(|task| {
            let rs: Vec<&TrialResult> = results.iter().filter(|r| r.task_id == task.id).collect();
            let n = rs.len() as f64;
            EvalRow {
                task_id: task.id,
                mode: config.mode,
                backend: backend.label(),
                trials: rs.len(),
                tpsr: rs.iter().filter(|r| r.tpsr).count() as f64 / n,
                exesr: rs.iter().filter(|r| r.exesr).count() as f64 / n,
                mean_calls: mean(rs.iter().map(|r| r.llm_calls as f64)),
                mean_motion_time_s: mean(rs.iter().map(|r| r.motion_time_s)),
                mean_motion_queries: mean(rs.iter().map(|r| r.motion_queries as f64)),
                mean_score: mean(rs.iter().map(|r| r.score)),
                mean_llm_time_s: mean(rs.iter().map(|r| r.llm_time_s)),
            }
        })
        .collect();
    Ok(BenchmarkRun { rows, trials: results })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggingReport {
    pub samples: usize,
    /// Mean wall time per command, seconds. `None` for an empty corpus.
    pub mean_time_s: Option<f64>,
    pub accuracy: Option<f64>,
}

/// Times the tagger over the corpus and scores exact parse matches.
pub fn measure_tagging(corpus: &[NoiseSample], trials: usize) -> TaggingReport {
    if corpus.is_empty() || trials == 0 {
        return TaggingReport { samples: corpus.len(), mean_time_s: None, accuracy: None };
    }
    let mut correct = 0usize;
    let started = Instant::now();
    for k in 0..trials {
        for s in corpus {
            let got = extract_command(&s.prompt);
            if k == 0 && got.as_ref().is_ok_and(|c| *c == s.parse) {
                correct += 1;
            }
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    TaggingReport {
        samples: corpus.len(),
        mean_time_s: Some(elapsed / (trials * corpus.len()) as f64),
        accuracy: Some(correct as f64 / corpus.len() as f64),
    }
}

/// Gold parses the tagger reproduces exactly.
pub fn gold_parse_matches(gold: &[GoldParse]) -> usize {
    gold.iter().filter(|g| extract_command(&g.prompt).is_ok_and(|c| c == g.parse)).count()
}

/// CSV with columns task_id, mode, backend, tpsr, exesr, mean_calls, mean_motion_time_s.
pub fn write_csv<W: std::io::Write>(rows: &[EvalRow], out: W) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["task_id", "mode", "backend", "tpsr", "exesr", "mean_calls", "mean_motion_time_s"])?;
    for r in rows {
        w.write_record([
            r.task_id.to_string(),
            r.mode.as_str().to_string(),
            r.backend.clone(),
            format!("{:.3}", r.tpsr),
            format!("{:.3}", r.exesr),
            format!("{:.2}", r.mean_calls),
            format!("{:.6}", r.mean_motion_time_s),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

fn fmt_opt(v: Option<f64>, f: impl Fn(f64) -> String) -> String {
    v.map_or_else(|| "N/A".to_string(), f)
}

/// Markdown report: one table row per task, one column group per mode/backend.
pub fn render_markdown(
    tasks: &[TaskSpec],
    rows: &[EvalRow],
    tagging: Option<&TaggingReport>,
    gold: Option<(usize, usize)>,
) -> String {
    let mut groups: Vec<(PipelineMode, String)> = Vec::new();
    for r in rows {
        let key = (r.mode, r.backend.clone());
        if !groups.contains(&key) {
            groups.push(key);
        }
    }
    let mut s = String::from("# Benchmark\n\n| Task | Command |");
    for (m, b) in &groups {
        let _ = write!(s, " {m} ({b}) TPSR | EXESR | calls | motion s |", m = m.as_str());
    }
    s.push_str("\n|---|---|");
    for _ in &groups {
        s.push_str("---|---|---|---|");
    }
    s.push('\n');
    for t in tasks {
        let _ = write!(s, "| {} | {} |", t.id, t.prompt);
        for (m, b) in &groups {
            match rows.iter().find(|r| r.task_id == t.id && r.mode == *m && &r.backend == b) {
                Some(r) => {
                    let _ = write!(
                        s,
                        " {:.2} | {:.2} | {:.1} | {:.4} |",
                        r.tpsr, r.exesr, r.mean_calls, r.mean_motion_time_s
                    );
                }
                None => s.push_str(" - | - | - | - |"),
            }
        }
        s.push('\n');
    }
    for (m, b) in &groups {
        let rs: Vec<&EvalRow> = rows.iter().filter(|r| r.mode == *m && &r.backend == b).collect();
        let _ = write!(
            s,
            "\nMean over tasks, {} ({b}): TPSR {:.2}, EXESR {:.2}, calls {:.2}\n",
            m.as_str(),
            mean(rs.iter().map(|r| r.tpsr)),
            mean(rs.iter().map(|r| r.exesr)),
            mean(rs.iter().map(|r| r.mean_calls)),
        );
    }
    if tagging.is_some() || gold.is_some() {
        s.push_str("\n## Tagging\n\n");
        if let Some((ok, n)) = gold {
            let _ = writeln!(s, "- gold parses reproduced: {ok}/{n}");
        }
        if let Some(t) = tagging {
            let _ = writeln!(s, "- noisy corpus samples: {}", t.samples);
            let _ = writeln!(s, "- noisy corpus accuracy: {}", fmt_opt(t.accuracy, |a| format!("{:.1}%", a * 100.0)));
            let _ = writeln!(s, "- mean tagging time: {}", fmt_opt(t.mean_time_s, |v| format!("{:.1} us", v * 1e6)));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::{PlacePose, PrimitiveAction};

    fn pairs(p: &[(&str, &str)]) -> Vec<(String, String)> {
        p.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn pair_fraction_counts_first_places() {
        let plan = SymbolicPlan::new(vec![
            PrimitiveAction::pick("b"),
            PrimitiveAction::place("b", PlacePose::new(0.0, 0.0, 0.0, 0.0)),
            PrimitiveAction::pick("a"),
            PrimitiveAction::place("a", PlacePose::new(0.0, 0.0, 0.0, 0.0)),
        ]);
        assert_eq!(pair_fraction(&plan, &pairs(&[("b", "a")])), 1.0);
        assert_eq!(pair_fraction(&plan, &pairs(&[("a", "b"), ("b", "a")])), 0.5);
        assert_eq!(pair_fraction(&plan, &pairs(&[("b", "c")])), 0.0);
        assert_eq!(pair_fraction(&plan, &[]), 1.0);
    }

    #[test]
    fn unparseable_scores_zero() {
        let (state, _) = task_world("scene_a").unwrap();
        assert_eq!(score_semantics("nothing", &pairs(&[("a", "b")]), &state), 0.0);
    }

    #[test]
    fn zero_trials_rejected() {
        let kb = KnowledgeBase::kitchen();
        let r = run_benchmark(&kb, &builtin_tasks(), &BackendConfig::mock(MockMode::Guided), 0, &ExecutorConfig::default());
        assert!(matches!(r, Err(EvalError::InvalidTrials)));
    }

    #[test]
    fn empty_corpus_is_na() {
        let r = measure_tagging(&[], 3);
        assert_eq!(r.accuracy, None);
        assert!(render_markdown(&[], &[], Some(&r), None).contains("accuracy: N/A"));
    }
}
