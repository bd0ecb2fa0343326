use criterion::{criterion_group, criterion_main, Criterion};
use ontotamp_bench::{kitchen, scene, wall_query, PLAN_BLOCK, TASK2_PROMPT, TASK4_PROMPT};
use ontotamp_core::world::describe_environment;
use ontotamp_core::{
    build_guidance, extract_command, parse_plan, plan_motion, run_task, ExecutorConfig, MockBackend, MockMode,
    PipelineMode,
};
use std::hint::black_box;

fn front_end(c: &mut Criterion) {
    let kb = kitchen();
    let (state, _) = scene("scene_b");
    c.bench_function("kb_load", |b| b.iter(kitchen));
    c.bench_function("rule_query", |b| b.iter(|| kb.query_action_priority(black_box("put"), black_box("Crockery"))));
    c.bench_function("tag_task4", |b| b.iter(|| extract_command(black_box(TASK4_PROMPT))));
    let cmd = extract_command(TASK4_PROMPT).unwrap();
    c.bench_function("guidance_task4", |b| b.iter(|| build_guidance(&kb, &cmd, Some(&state))));
    c.bench_function("describe_scene_b", |b| b.iter(|| describe_environment(&kb, &state)));
    c.bench_function("parse_plan", |b| b.iter(|| parse_plan(black_box(PLAN_BLOCK))));
}

fn motion(c: &mut Criterion) {
    let q = wall_query(1);
    c.bench_function("rrt_connect_wall", |b| b.iter(|| plan_motion(&q)));
}

fn end_to_end(c: &mut Criterion) {
    let kb = kitchen();
    let (state, goal) = scene("scene_a");
    for (name, mode, mock) in [
        ("task2_onto", PipelineMode::Onto, MockMode::Guided),
        ("task2_baseline", PipelineMode::Baseline, MockMode::Naive),
    ] {
        let cfg = ExecutorConfig { mode, ..Default::default() };
        c.bench_function(name, |b| {
            b.iter(|| run_task(&kb, &state, &goal, TASK2_PROMPT, &mut MockBackend::new(mock), &cfg))
        });
    }
}

criterion_group!(benches, front_end, motion, end_to_end);
criterion_main!(benches);
