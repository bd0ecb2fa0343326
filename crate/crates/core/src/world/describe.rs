//! Natural-language rendering of a world state.

use super::WorldState;
use crate::ontology::KnowledgeBase;

pub const UNKNOWN_TYPE: &str = "Unknown";

fn num(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".to_string()
    } else {
        s
    }
}

/// One sentence per object, name-sorted, newline-separated.
pub fn describe_state(kb: &KnowledgeBase, state: &WorldState) -> String {
    let mut lines = Vec::with_capacity(state.objects.len());
    for o in state.objects.values() {
        let ty = kb.object_type(&o.name).unwrap_or_else(|| UNKNOWN_TYPE.to_string());
        let f = &o.footprint;
        lines.push(format!(
            "{} is a {} located at position [{}, {}, {}] and orientation [{}] with a bounding box spanning from [{}, {}] to [{}, {}] and dimensions of {} meters in length and {} meters in width.",
            o.name,
            ty,
            num(o.position[0]),
            num(o.position[1]),
            num(o.position[2]),
            num(o.yaw),
            num(f.xmin),
            num(f.ymin),
            num(f.xmax),
            num(f.ymax),
            num(o.length),
            num(o.width),
        ));
    }
    lines.join("\n")
}

/// One sentence per support surface.
pub fn describe_surfaces(state: &WorldState) -> String {
    state
        .surfaces
        .values()
        .map(|s| {
            format!(
                "{} is a surface spanning from [{}, {}] to [{}, {}] at height {} meters.",
                s.name,
                num(s.region.xmin),
                num(s.region.ymin),
                num(s.region.xmax),
                num(s.region.ymax),
                num(s.height)
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Surfaces, then objects, then the gripper status.
pub fn describe_environment(kb: &KnowledgeBase, state: &WorldState) -> String {
    let mut parts = Vec::new();
    let surfaces = describe_surfaces(state);
    if !surfaces.is_empty() {
        parts.push(surfaces);
    }
    let objects = describe_state(kb, state);
    if !objects.is_empty() {
        parts.push(objects);
    }
    parts.push(match &state.held {
        Some(h) => format!("The gripper is holding {h}."),
        None => "The gripper is empty.".to_string(),
    });
    parts.join("\n")
}

/// Numeric fields recovered from an object sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct DescribedObject {
    pub name: String,
    pub object_type: String,
    pub position: [f64; 3],
    pub yaw: f64,
    pub bbox: [f64; 4],
    pub length: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescribedSurface {
    pub name: String,
    pub bbox: [f64; 4],
    pub height: f64,
}

fn numbers<const N: usize>(s: &str) -> Option<[f64; N]> {
    let vals: Vec<f64> = s.split(',').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().ok()?;
    vals.try_into().ok()
}

fn between<'a>(s: &'a str, start: &str, end: &str) -> Option<(&'a str, &'a str)> {
    let rest = s.strip_prefix(start)?;
    let idx = rest.find(end)?;
    Some((&rest[..idx], &rest[idx + end.len()..]))
}

fn parse_object_line(line: &str) -> Option<DescribedObject> {
    let (name, rest) = line.split_once(" is a ")?;
    let (object_type, rest) = rest.split_once(" located at position [")?;
    let (pos, rest) = rest.split_once(']')?;
    let (yaw, rest) = between(rest, " and orientation [", "]")?;
    let (lo, rest) = between(rest, " with a bounding box spanning from [", "]")?;
    let (hi, rest) = between(rest, " to [", "]")?;
    let (length, rest) = between(rest, " and dimensions of ", " meters in length and ")?;
    let width = rest.strip_suffix(" meters in width.")?;
    let [x0, y0] = numbers::<2>(lo)?;
    let [x1, y1] = numbers::<2>(hi)?;
    Some(DescribedObject {
        name: name.to_string(),
        object_type: object_type.to_string(),
        position: numbers::<3>(pos)?,
        yaw: yaw.trim().parse().ok()?,
        bbox: [x0, y0, x1, y1],
        length: length.trim().parse().ok()?,
        width: width.trim().parse().ok()?,
    })
}

fn parse_surface_line(line: &str) -> Option<DescribedSurface> {
    let (name, rest) = line.split_once(" is a surface spanning from [")?;
    let (lo, rest) = rest.split_once(']')?;
    let (hi, rest) = between(rest, " to [", "]")?;
    let height = rest.strip_prefix(" at height ")?.strip_suffix(" meters.")?;
    let [x0, y0] = numbers::<2>(lo)?;
    let [x1, y1] = numbers::<2>(hi)?;
    Some(DescribedSurface { name: name.to_string(), bbox: [x0, y0, x1, y1], height: height.trim().parse().ok()? })
}

/// Extracts every object sentence. Other lines are ignored.
pub fn parse_description(text: &str) -> Vec<DescribedObject> {
    text.lines().filter_map(|l| parse_object_line(l.trim())).collect()
}

/// Extracts every surface sentence. Other lines are ignored.
pub fn parse_surfaces(text: &str) -> Vec<DescribedSurface> {
    text.lines().filter_map(|l| parse_surface_line(l.trim())).collect()
}
