//! Built-in task suite, scenes and corpora.

pub const TASKS_JSON: &str = include_str!("../data/tasks.json");
pub const GOLD_PARSES_JSON: &str = include_str!("../data/gold_parses.json");
pub const NOISE_CORPUS_JSON: &str = include_str!("../data/noise_corpus.json");

pub const SCENES: [(&str, &str); 4] = [
    ("scene_a", include_str!("../data/scenes/scene_a.json")),
    ("scene_b", include_str!("../data/scenes/scene_b.json")),
    ("scene_c", include_str!("../data/scenes/scene_c.json")),
    ("scene_d", include_str!("../data/scenes/scene_d.json")),
];

/// Scene JSON by id, e.g. `scene_a`.
pub fn scene(id: &str) -> Option<&'static str> {
    SCENES.iter().find(|(k, _)| *k == id).map(|(_, v)| *v)
}
