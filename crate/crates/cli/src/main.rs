use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ontotamp_core::eval::{
    backend_for_mode, builtin_gold_parses, builtin_noise_corpus, builtin_tasks, gold_parse_matches, load_tasks,
    measure_tagging, render_markdown, run_benchmark, write_csv, EvalRow,
};
use ontotamp_core::tagger::tokenize;
use ontotamp_core::world::describe_environment;
use ontotamp_core::{
    assets, build_guidance, extract_command, load_scene, run_task, BackendConfig, ExecutorConfig, FailureInjection,
    GoalSpec, KnowledgeBase, PipelineMode, PromptTemplate, WorldState,
};

#[derive(Parser)]
#[command(name = "ontotamp", version, about = "Ontology-guided task and motion planning")]
struct Cli {
    /// N-Triples knowledge base (defaults to the built-in kitchen ontology).
    #[arg(long, global = true)]
    kb: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tag a command into task clauses.
    Tag {
        text: String,
        #[arg(long)]
        json: bool,
        /// Also print the token stream.
        #[arg(long)]
        tokens: bool,
    },
    /// Look up an object's type or a task rule.
    Query {
        /// Object label, e.g. `bowl`.
        #[arg(long, conflicts_with_all = ["action", "object_type"])]
        label: Option<String>,
        #[arg(long, requires = "object_type")]
        action: Option<String>,
        #[arg(long = "type", requires = "action")]
        object_type: Option<String>,
    },
    /// Print the environment description of a scene.
    Describe {
        #[arg(long)]
        scene: String,
    },
    /// Compose the planner prompt and print one backend reply.
    Plan(RunArgs),
    /// Plan, execute and replan until the scene goal holds.
    Run {
        #[command(flatten)]
        args: RunArgs,
        /// Write the full execution trace as JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// never, every, first-place or nth:K
        #[arg(long, default_value = "never")]
        inject_failure: String,
    },
    /// Run the task suite and write CSV and Markdown reports.
    Bench {
        /// baseline, onto or both
        #[arg(long, default_value = "both")]
        mode: String,
        #[command(flatten)]
        backend: BackendArgs,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        max_calls: usize,
        /// Task suite JSON (defaults to the built-in suite).
        #[arg(long)]
        tasks: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        template: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct BackendArgs {
    /// mock (pairs with --mode), mock-guided, mock-naive or http
    #[arg(long, default_value = "mock")]
    backend: String,
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    model: Option<String>,
    /// Name of the environment variable holding the API credential.
    #[arg(long)]
    cred_env: Option<String>,
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
    #[arg(long, default_value_t = 0.0)]
    temperature: f64,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Scene file or built-in id (scene_a .. scene_d).
    #[arg(long)]
    scene: String,
    /// Natural-language command.
    #[arg(long = "command")]
    text: String,
    /// baseline or onto
    #[arg(long, default_value = "onto")]
    mode: String,
    #[command(flatten)]
    backend: BackendArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    max_calls: usize,
    #[arg(long)]
    template: Option<PathBuf>,
}

fn load_kb(path: Option<&Path>) -> Result<KnowledgeBase> {
    match path {
        Some(p) => KnowledgeBase::load_file(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(KnowledgeBase::kitchen()),
    }
}

fn load_world(scene: &str) -> Result<(WorldState, GoalSpec)> {
    let text = match assets::scene(scene) {
        Some(t) => t.to_string(),
        None => fs::read_to_string(scene).with_context(|| format!("reading scene {scene}"))?,
    };
    load_scene(&text).with_context(|| format!("loading scene {scene}"))
}

fn load_template(path: Option<&Path>) -> Result<PromptTemplate> {
    match path {
        Some(p) => Ok(PromptTemplate::load_file(p)?),
        None => Ok(PromptTemplate::default()),
    }
}

fn backend_config(args: &BackendArgs, mode: PipelineMode) -> Result<BackendConfig> {
    let mut config = if args.backend == "http" {
        let endpoint = args.endpoint.clone().context("--backend http needs --endpoint")?;
        let model = args.model.clone().context("--backend http needs --model")?;
        let cred_env = args.cred_env.clone().context("--backend http needs --cred-env")?;
        BackendConfig::http(endpoint, model, cred_env)
    } else {
        backend_for_mode(&args.backend, mode)?
    };
    config.timeout_s = args.timeout;
    config.temperature = args.temperature;
    config.validate()?;
    Ok(config)
}

fn modes(which: &str) -> Result<Vec<PipelineMode>> {
    Ok(match which {
        "both" => vec![PipelineMode::Baseline, PipelineMode::Onto],
        other => vec![other.parse().map_err(anyhow::Error::msg)?],
    })
}

fn executor_config(args: &RunArgs, mode: PipelineMode) -> Result<ExecutorConfig> {
    Ok(ExecutorConfig {
        mode,
        seed: args.seed,
        max_calls: args.max_calls,
        template: load_template(args.template.as_deref())?,
        ..Default::default()
    })
}

fn run(cli: Cli) -> Result<()> {
    let kb_path = cli.kb.as_deref();
    match cli.command {
        Command::Tag { text, json, tokens } => {
            if tokens {
                for t in tokenize(&text) {
                    println!("{}\t{}", t.index, t.text);
                }
            }
            let cmd = extract_command(&text)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&cmd)?);
            } else {
                println!("{cmd}");
            }
        }
        Command::Query { label, action, object_type } => {
            let kb = load_kb(kb_path)?;
            match (label, action, object_type) {
                (Some(l), _, _) => match kb.query_object_type(&l).as_slice() {
                    [] => println!("{l}: Unknown"),
                    types => println!("{l}: {}", types.join(", ")),
                },
                (None, Some(a), Some(t)) => match kb.query_action_priority(&a, &t)? {
                    Some((p, d)) => println!("{a}/{t}: priority {p}: {d}"),
                    None => println!("{a}/{t}: no rule"),
                },
                _ => bail!("give --label, or --action with --type"),
            }
        }
        Command::Describe { scene } => {
            let kb = load_kb(kb_path)?;
            let (state, goal) = load_world(&scene)?;
            println!("{}", describe_environment(&kb, &state));
            for p in &goal.predicates {
                println!("goal: {p}");
            }
        }
        Command::Plan(args) => {
            let kb = load_kb(kb_path)?;
            let mode: PipelineMode = args.mode.parse().map_err(anyhow::Error::msg)?;
            let (state, _) = load_world(&args.scene)?;
            let guidance = match mode {
                PipelineMode::Onto => build_guidance(&kb, &extract_command(&args.text)?, Some(&state)).render(),
                PipelineMode::Baseline => String::new(),
            };
            let template = load_template(args.template.as_deref())?;
            let prompt = template.compose(&guidance, &describe_environment(&kb, &state), &args.text);
            let mut backend = backend_config(&args.backend, mode)?.build()?;
            println!("{}", prompt.text);
            println!("--- {} ---", backend.name());
            println!("{}", backend.request_plan(&prompt)?.trim_end());
        }
        Command::Run { args, trace, inject_failure } => {
            let kb = load_kb(kb_path)?;
            let mode: PipelineMode = args.mode.parse().map_err(anyhow::Error::msg)?;
            let (state, goal) = load_world(&args.scene)?;
            let injection: FailureInjection = inject_failure.parse().map_err(anyhow::Error::msg)?;
            let config = ExecutorConfig { injection, ..executor_config(&args, mode)? };
            let mut backend = backend_config(&args.backend, mode)?.build()?;
            let t = run_task(&kb, &state, &goal, &args.text, backend.as_mut(), &config);
            println!("outcome: {:?}", t.outcome);
            println!("llm calls: {}", t.llm_calls);
            println!("motion queries: {}", t.motion_queries);
            for m in &t.failure_messages {
                println!("{m}");
            }
            if let Some(e) = &t.error {
                println!("backend error: {e}");
            }
            print!("{}", t.stitched_plan().render());
            if let Some(path) = trace {
                fs::write(&path, serde_json::to_string_pretty(&t)?)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Command::Bench { mode, backend, trials, seed, max_calls, tasks, csv, report, template } => {
            let kb = load_kb(kb_path)?;
            let tasks = match tasks {
                Some(p) => load_tasks(&fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?)?,
                None => builtin_tasks(),
            };
            let mut rows: Vec<EvalRow> = Vec::new();
            for m in modes(&mode)? {
                let config = ExecutorConfig {
                    mode: m,
                    seed,
                    max_calls,
                    template: load_template(template.as_deref())?,
                    ..Default::default()
                };
                let run = run_benchmark(&kb, &tasks, &backend_config(&backend, m)?, trials, &config)?;
                for r in run.trials.iter().filter_map(|r| r.error.as_ref().map(|e| (r.task_id, r.trial, e))) {
                    eprintln!("task {} trial {}: {}", r.0, r.1, r.2);
                }
                rows.extend(run.rows);
            }
            let mut out = Vec::new();
            write_csv(&rows, &mut out)?;
            let csv_text = String::from_utf8(out)?;
            let gold = builtin_gold_parses();
            let tagging = measure_tagging(&builtin_noise_corpus(), 5);
            let md = render_markdown(&tasks, &rows, Some(&tagging), Some((gold_parse_matches(&gold), gold.len())));
            match &csv {
                Some(p) => fs::write(p, &csv_text).with_context(|| format!("writing {}", p.display()))?,
                None => print!("{csv_text}"),
            }
            if let Some(p) = &report {
                fs::write(p, &md).with_context(|| format!("writing {}", p.display()))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
