//! Deterministic stand-ins for a language model.
//!
//! Both modes read the environment block back into a small geometric model and
//! choose Place targets by a fixed grid scan. The guided mode follows the
//! order lines of the guidance block across all clauses; the naive mode follows
//! the order in which the user mentioned the objects.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{PlacePose, PrimitiveAction, SymbolicPlan};
use crate::geometry::Aabb;
use crate::prompt::{Prompt, Slot};
use crate::tagger::extract_command;
use crate::world::{parse_description, parse_surfaces};

/// Grid cell of the placement scan, meters.
pub const SCAN_CELL: f64 = 0.02;
/// Minimum gap kept to objects that are not part of the support chain.
pub const SCAN_CLEARANCE: f64 = 0.01;

const Z_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MockMode {
    Guided,
    Naive,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MockError {
    #[error("prompt has no {0} block")]
    MissingBlock(Slot),
}

#[derive(Debug, Clone, PartialEq)]
struct Item {
    name: String,
    bbox: Aabb,
    z: f64,
    surface: bool,
}

impl Item {
    fn center(&self) -> (f64, f64) {
        self.bbox.center()
    }
}

/// Geometry recovered from the environment block, updated as the plan is built.
struct Layout {
    items: Vec<Item>,
}

impl Layout {
    fn parse(env: &str) -> Self {
        let mut items: Vec<Item> = parse_surfaces(env)
            .into_iter()
            .map(|s| Item { name: s.name, bbox: Aabb::from_array(s.bbox), z: s.height, surface: true })
            .collect();
        items.extend(parse_description(env).into_iter().map(|o| Item {
            name: o.name,
            bbox: Aabb::from_array(o.bbox),
            z: o.position[2],
            surface: false,
        }));
        Layout { items }
    }

    fn get(&self, name: &str) -> Option<&Item> {
        self.items.iter().find(|i| i.name == name)
    }

    fn is_above(item: &Item, base: &Item) -> bool {
        let (cx, cy) = item.center();
        let higher = if base.surface { item.z >= base.z - Z_EPS } else { item.z > base.z + Z_EPS };
        !item.surface && item.name != base.name && base.bbox.contains_point(cx, cy) && higher
    }

    /// Objects resting (directly or not) on `base`.
    fn above(&self, base: &Item) -> Vec<&Item> {
        self.items.iter().filter(|i| Self::is_above(i, base)).collect()
    }

    /// Objects `candidate` rests on.
    fn below(&self, candidate: &Item) -> Vec<&Item> {
        self.items.iter().filter(|i| !i.surface && Self::is_above(candidate, i)).collect()
    }

    fn stack_top(&self, base: &Item) -> Item {
        self.above(base)
            .into_iter()
            .filter(|i| {
                let (bx, by) = base.center();
                i.bbox.contains_point(bx, by)
            })
            .max_by(|a, b| a.z.total_cmp(&b.z))
            .cloned()
            .unwrap_or_else(|| base.clone())
    }

    fn scan(&self, object: &Item, candidate: &Item) -> Option<(f64, f64)> {
        let (hx, hy) = object.bbox.half_extents();
        let mut skip: Vec<&str> = vec![&object.name, &candidate.name];
        skip.extend(self.below(candidate).into_iter().map(|i| i.name.as_str()));
        let obstacles: Vec<Aabb> = self
            .items
            .iter()
            .filter(|i| !i.surface && !skip.contains(&i.name.as_str()))
            .map(|i| i.bbox)
            .collect();
        let region = candidate.bbox;
        let mut y = region.ymin + hy;
        while y <= region.ymax - hy + 1e-9 {
            let mut x = region.xmin + hx;
            while x <= region.xmax - hx + 1e-9 {
                let fp = Aabb::centered(x, y, hx, hy);
                let padded = fp.inflate(SCAN_CLEARANCE);
                if region.contains(&fp) && !obstacles.iter().any(|o| o.overlaps(&padded)) {
                    return Some((x, y));
                }
                x += SCAN_CELL;
            }
            y += SCAN_CELL;
        }
        None
    }

    fn move_to(&mut self, name: &str, x: f64, y: f64, base_z: f64) {
        if let Some(i) = self.items.iter_mut().find(|i| i.name == name) {
            i.bbox = i.bbox.translated_to(x, y);
            // Only relative heights matter inside the model.
            i.z = base_z + 1e-3;
        }
    }
}

struct WorkItem {
    task: String,
    destination: Option<String>,
    object: String,
}

fn round(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}

/// Parses `Task order for <task>[ to <dest>]: <name> (<Type>, priority N), ...`.
fn order_lines(guidance: &str) -> Vec<(WorkItem, u32)> {
    let mut out = Vec::new();
    for line in guidance.lines() {
        let Some(rest) = line.trim().strip_prefix("Task order for ") else { continue };
        let Some((header, items)) = rest.split_once(':') else { continue };
        let (task, destination) = match header.split_once(" to ") {
            Some((t, d)) => (t.trim().to_string(), Some(d.trim().to_string())),
            None => (header.trim().to_string(), None),
        };
        for entry in items.split("),") {
            let entry = entry.trim().trim_end_matches(')');
            let Some((name, meta)) = entry.split_once(" (") else { continue };
            let priority = meta
                .split_once(", priority ")
                .and_then(|(_, p)| p.trim().parse::<u32>().ok())
                .unwrap_or(u32::MAX);
            out.push((WorkItem { task: task.clone(), destination: destination.clone(), object: name.trim().to_string() }, priority));
        }
    }
    out
}

fn mention_order(user: &str) -> Vec<WorkItem> {
    let Ok(cmd) = extract_command(user) else { return Vec::new() };
    cmd.clauses
        .iter()
        .flat_map(|c| {
            c.objects.iter().map(|o| WorkItem { task: c.task.clone(), destination: c.destination.clone(), object: o.clone() })
        })
        .collect()
}

/// Plans Pick/Place pairs for `items` against the layout.
fn plan_items(layout: &mut Layout, items: &[WorkItem]) -> SymbolicPlan {
    let mut actions = Vec::new();
    for w in items {
        let Some(dest_name) = &w.destination else { continue };
        let (Some(object), Some(dest)) = (layout.get(&w.object).cloned(), layout.get(dest_name).cloned()) else {
            continue;
        };
        if object.surface || object.name == dest.name || Layout::is_above(&object, &dest) {
            continue;
        }
        let (x, y, z) = if w.task == "stack" {
            let top = layout.stack_top(&dest);
            if top.surface {
                match layout.scan(&object, &top) {
                    Some((x, y)) => (x, y, top.z),
                    None => (top.center().0, top.center().1, top.z),
                }
            } else {
                (top.center().0, top.center().1, top.z)
            }
        } else {
            let mut candidates = vec![dest.clone()];
            let mut on_dest: Vec<Item> = layout.above(&dest).into_iter().cloned().collect();
            on_dest.sort_by(|a, b| b.bbox.area().total_cmp(&a.bbox.area()).then_with(|| a.name.cmp(&b.name)));
            candidates.extend(on_dest);
            let fits = candidates
                .iter()
                .filter(|c| c.surface || c.bbox.area() + 1e-12 >= object.bbox.area())
                .filter(|c| c.name != object.name)
                .find_map(|c| layout.scan(&object, c).map(|(x, y)| (x, y, c.z)));
            fits.unwrap_or_else(|| (dest.center().0, dest.center().1, dest.z))
        };
        let (x, y, z) = (round(x), round(y), round(z));
        layout.move_to(&object.name, x, y, z);
        actions.push(PrimitiveAction::pick(object.name.clone()));
        actions.push(PrimitiveAction::place(object.name.clone(), PlacePose::new(x, y, z, 0.0)));
    }
    SymbolicPlan::new(actions)
}

/// Produces plan text for `prompt` in the given mode.
pub fn mock_generate(mode: MockMode, prompt: &Prompt) -> Result<String, MockError> {
    let block = |slot| prompt.block(slot).ok_or(MockError::MissingBlock(slot));
    let guidance = block(Slot::Guidance)?;
    let env = block(Slot::EnvState)?;
    let user = block(Slot::UserInput)?;
    let mut layout = Layout::parse(env);
    let items: Vec<WorkItem> = match mode {
        MockMode::Guided => {
            let mut ranked = order_lines(guidance);
            if ranked.is_empty() {
                mention_order(user)
            } else {
                ranked.sort_by_key(|(_, p)| *p);
                ranked.into_iter().map(|(w, _)| w).collect()
            }
        }
        MockMode::Naive => mention_order(user),
    };
    Ok(plan_items(&mut layout, &items).render())
}
