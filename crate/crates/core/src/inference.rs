//! Ordering guidance from a tagged command and the knowledge base.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::ontology::{KnowledgeBase, OntologyError};
use crate::tagger::{Clause, TaggedCommand};
use crate::world::{WorldState, UNKNOWN_TYPE};

/// Tasks whose rules also govern later `put` clauses of the same command.
const CONTEXT_TASKS: [&str; 3] = ["clean", "arrange", "serve"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedObject {
    pub name: String,
    pub object_type: String,
    /// `None` when the type is unknown or has no rule for the governing task.
    pub priority: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseGuidance {
    pub task: String,
    pub destination: Option<String>,
    /// Ranked objects in guidance order.
    pub ordered: Vec<RankedObject>,
    pub notes: Vec<String>,
    pub warnings: Vec<String>,
}

impl ClauseGuidance {
    pub fn ordered_objects(&self) -> Vec<&str> {
        self.ordered.iter().map(|r| r.name.as_str()).collect()
    }

    /// One-line ordering summary, e.g.
    /// `Task order for put to plate: bowl (Crockery, priority 1), apple (FoodItem, priority 2)`.
    pub fn order_line(&self) -> String {
        let mut s = format!("Task order for {}", self.task);
        if let Some(d) = &self.destination {
            let _ = write!(s, " to {d}");
        }
        s.push(':');
        let items: Vec<String> = self
            .ordered
            .iter()
            .map(|r| match r.priority {
                Some(p) => format!("{} ({}, priority {p})", r.name, r.object_type),
                None => format!("{} ({}, unranked)", r.name, r.object_type),
            })
            .collect();
        if !items.is_empty() {
            s.push(' ');
            s.push_str(&items.join(", "));
        }
        s
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Guidance {
    pub clauses: Vec<ClauseGuidance>,
}

impl Guidance {
    pub fn notes(&self) -> impl Iterator<Item = &str> {
        self.clauses.iter().flat_map(|c| c.notes.iter().map(String::as_str))
    }

    pub fn warnings(&self) -> impl Iterator<Item = &str> {
        self.clauses.iter().flat_map(|c| c.warnings.iter().map(String::as_str))
    }

    /// Prompt block: order lines, then `Note:` and `Warning:` lines.
    pub fn render(&self) -> String {
        let mut lines = Vec::new();
        for c in &self.clauses {
            lines.push(c.order_line());
        }
        for n in self.notes() {
            lines.push(format!("Note: {n}"));
        }
        for w in self.warnings() {
            lines.push(format!("Warning: {w}"));
        }
        lines.join("\n")
    }
}

/// Object name to its knowledge-base class, `Unknown` when unclassified.
pub fn classify_objects(kb: &KnowledgeBase, command: &TaggedCommand) -> BTreeMap<String, String> {
    command
        .all_objects()
        .map(|o| (o.to_string(), kb.object_type(o).unwrap_or_else(|| UNKNOWN_TYPE.to_string())))
        .collect()
}

/// Plural noun phrase used in notes.
pub fn natural_type(class: &str) -> String {
    match class {
        "FoodItem" | "FoodItems" => "food items".into(),
        "BoxedFood" => "boxed food items".into(),
        "Crockery" => "crockery".into(),
        "Utensil" => "utensils".into(),
        "KitchenItems" => "kitchen items".into(),
        "Container" => "containers".into(),
        other => {
            let mut out = String::new();
            for (i, c) in other.chars().enumerate() {
                if c.is_uppercase() && i > 0 {
                    out.push(' ');
                }
                out.extend(c.to_lowercase());
            }
            out
        }
    }
}

/// `a`, `a and b`, `a, b and c`.
pub fn join_natural<S: AsRef<str>>(items: &[S]) -> String {
    match items {
        [] => String::new(),
        [one] => one.as_ref().to_string(),
        [init @ .., last] => {
            let head: Vec<&str> = init.iter().map(AsRef::as_ref).collect();
            format!("{} and {}", head.join(", "), last.as_ref())
        }
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn lookup(kb: &KnowledgeBase, task: &str, ty: &str) -> Result<Option<(u32, String)>, OntologyError> {
    kb.query_action_priority(task, ty)
}

/// Sort key: ranked objects by priority, then unranked known types, then unknowns.
fn rank(r: &RankedObject) -> (u8, u32) {
    match r.priority {
        Some(p) => (0, p),
        None if r.object_type != UNKNOWN_TYPE => (1, 0),
        None => (2, 0),
    }
}

fn clause_guidance(kb: &KnowledgeBase, clause: &Clause, context: Option<&str>, state: Option<&WorldState>) -> ClauseGuidance {
    let mut warnings = Vec::new();
    let mut descriptions: BTreeMap<String, String> = BTreeMap::new();
    let mut ranked = Vec::with_capacity(clause.objects.len());
    for name in &clause.objects {
        let object_type = kb.object_type(name).unwrap_or_else(|| UNKNOWN_TYPE.to_string());
        let mut priority = None;
        if object_type == UNKNOWN_TYPE {
            warnings.push(format!("{name} is not in the knowledge base and is handled last."));
        } else {
            let tasks: Vec<&str> = context.into_iter().chain(std::iter::once(clause.task.as_str())).collect();
            let mut ambiguous = false;
            for t in tasks {
                match lookup(kb, t, &object_type) {
                    Ok(Some((p, d))) => {
                        priority = Some(p);
                        descriptions.insert(object_type.clone(), d);
                        break;
                    }
                    Ok(None) => {}
                    Err(_) => ambiguous = true,
                }
            }
            if priority.is_none() {
                if ambiguous {
                    warnings.push(format!("conflicting {} rules for {name} ({object_type}); it is left unranked.", clause.task));
                } else {
                    warnings.push(format!("no {} rule for {name} ({object_type}); it is left unranked.", clause.task));
                }
            }
        }
        ranked.push(RankedObject { name: name.clone(), object_type, priority });
    }

    let area = |name: &str| state.and_then(|s| s.object(name)).map(|o| o.area());
    let by_area = clause.task == "stack" && state.is_some();
    let mut ordered = ranked.clone();
    if by_area {
        ordered.sort_by(|a, b| {
            rank(a).cmp(&rank(b)).then_with(|| {
                let (x, y) = (area(&a.name).unwrap_or(f64::NEG_INFINITY), area(&b.name).unwrap_or(f64::NEG_INFINITY));
                y.total_cmp(&x)
            })
        });
    } else {
        ordered.sort_by_key(rank);
    }

    let verb = capitalize(&clause.task);
    let mut type_order: Vec<(String, u32)> = Vec::new();
    for r in &ordered {
        if let Some(p) = r.priority {
            if !type_order.iter().any(|(t, _)| *t == r.object_type) {
                type_order.push((r.object_type.clone(), p));
            }
        }
    }
    let mut notes = Vec::new();
    for (ty, p) in &type_order {
        let objs: Vec<&str> =
            ordered.iter().filter(|r| r.object_type == *ty).map(|r| r.name.as_str()).collect();
        let lower: Vec<String> = type_order.iter().filter(|(_, q)| q > p).map(|(t, _)| natural_type(t)).collect();
        let higher: Vec<String> = type_order.iter().filter(|(_, q)| q < p).map(|(t, _)| natural_type(t)).collect();
        let desc = &descriptions[ty];
        let note = if !lower.is_empty() {
            format!("{verb} {} before {} because {desc}.", join_natural(&objs), join_natural(&lower))
        } else if !higher.is_empty() {
            format!("{verb} {} after {} because {desc}.", join_natural(&objs), join_natural(&higher))
        } else {
            format!("{verb} {}: {desc}.", join_natural(&objs))
        };
        notes.push(capitalize(&note));
    }
    if by_area && ordered.len() > 1 {
        let names: Vec<&str> = ordered.iter().map(|r| r.name.as_str()).collect();
        notes.push(format!("{verb} {} in that order, largest bounding box first.", join_natural(&names)));
    }

    ClauseGuidance { task: clause.task.clone(), destination: clause.destination.clone(), ordered, notes, warnings }
}

/// Builds per-clause ordering guidance.
///
/// A `put` clause that follows a `clean`, `arrange` or `serve` clause is ranked
/// by that task's rules first, falling back to `put` rules. Stacking clauses are
/// ordered by footprint area (largest first) when `state` is given.
pub fn build_guidance(kb: &KnowledgeBase, command: &TaggedCommand, state: Option<&WorldState>) -> Guidance {
    let mut context: Option<&str> = None;
    let mut clauses = Vec::with_capacity(command.clauses.len());
    for clause in &command.clauses {
        if CONTEXT_TASKS.contains(&clause.task.as_str()) {
            context = Some(clause.task.as_str());
        }
        let governing = if clause.task == "put" { context } else { None };
        clauses.push(clause_guidance(kb, clause, governing, state));
    }
    Guidance { clauses }
}
