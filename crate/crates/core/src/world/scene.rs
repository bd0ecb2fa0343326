use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GoalSpec, SceneObject, Surface, WorldError, WorldState, EPS};
use crate::geometry::{Aabb, Point2};

/// On-disk scene layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub workspace: Option<[f64; 4]>,
    #[serde(default)]
    pub gripper: Option<[f64; 2]>,
    #[serde(default)]
    pub surfaces: Vec<SurfaceEntry>,
    #[serde(default)]
    pub objects: Vec<ObjectEntry>,
    #[serde(default)]
    pub goal: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceEntry {
    pub name: String,
    pub bbox: [f64; 4],
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectEntry {
    pub name: String,
    #[serde(rename = "type", default)]
    pub type_hint: Option<String>,
    pub position: [f64; 3],
    #[serde(default)]
    pub yaw: f64,
    pub bbox: [f64; 4],
    pub height: f64,
    /// Explicit support; resolved from geometry when absent.
    #[serde(default)]
    pub support: Option<String>,
}

pub fn load_scene_file(path: impl AsRef<Path>) -> Result<(WorldState, GoalSpec), WorldError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| WorldError::Parse(format!("{}: {e}", path.display())))?;
    load_scene(&text)
}

pub fn load_scene(text: &str) -> Result<(WorldState, GoalSpec), WorldError> {
    let file: SceneFile = serde_json::from_str(text).map_err(|e| WorldError::Parse(e.to_string()))?;
    let state = file.build()?;
    let goal = GoalSpec::parse(&file.goal, &state)?;
    Ok((state, goal))
}

impl SceneFile {
    pub fn build(&self) -> Result<WorldState, WorldError> {
        let parse = |m: String| WorldError::Parse(m);
        let inv = |m: String| WorldError::Invariant(m);

        let mut names = BTreeSet::new();
        for n in self.surfaces.iter().map(|s| &s.name).chain(self.objects.iter().map(|o| &o.name)) {
            if n.is_empty() || n.chars().any(char::is_whitespace) {
                return Err(parse(format!("invalid name {n:?}")));
            }
            if !names.insert(n.clone()) {
                return Err(inv(format!("duplicate name {n}")));
            }
        }

        let workspace = match (self.workspace, self.surfaces.first()) {
            (Some(w), _) => Aabb::from_array(w),
            (None, Some(first)) => self
                .surfaces
                .iter()
                .fold(Aabb::from_array(first.bbox), |acc, s| acc.union(&Aabb::from_array(s.bbox))),
            (None, None) => return Err(parse("scene needs a workspace or at least one surface".into())),
        };
        if !workspace.is_valid() {
            return Err(inv("degenerate workspace".into()));
        }

        let mut state = WorldState::new(workspace);
        if let Some([x, y]) = self.gripper {
            state.gripper = Point2::new(x, y);
        }
        for s in &self.surfaces {
            let region = Aabb::from_array(s.bbox);
            if !region.is_valid() || !s.height.is_finite() {
                return Err(inv(format!("surface {} has a degenerate region", s.name)));
            }
            state.surfaces.insert(s.name.clone(), Surface { name: s.name.clone(), region, height: s.height });
        }

        // Lower objects first so stacked objects find their supports.
        let mut order: Vec<&ObjectEntry> = self.objects.iter().collect();
        order.sort_by(|a, b| a.position[2].total_cmp(&b.position[2]).then_with(|| a.name.cmp(&b.name)));
        for e in order {
            let footprint = Aabb::from_array(e.bbox);
            if !footprint.is_valid() {
                return Err(inv(format!("{} has a degenerate bounding box", e.name)));
            }
            if e.height.is_nan() || e.height <= 0.0 || !e.yaw.is_finite() || e.position.iter().any(|v| !v.is_finite()) {
                return Err(inv(format!("{} has invalid pose or height", e.name)));
            }
            let (cx, cy) = footprint.center();
            if (cx - e.position[0]).abs() > 1e-6 || (cy - e.position[1]).abs() > 1e-6 {
                return Err(inv(format!("{} position is not the center of its bounding box", e.name)));
            }
            let support = match &e.support {
                Some(s) => {
                    let top = if let Some(o) = state.objects.get(s) {
                        o.top()
                    } else if let Some(surf) = state.surfaces.get(s) {
                        surf.height
                    } else {
                        return Err(inv(format!("{} rests on unknown support {s}", e.name)));
                    };
                    (s.clone(), top)
                }
                None => {
                    let info = state
                        .support_at(e.position[0], e.position[1], &e.name)
                        .ok_or_else(|| inv(format!("{} has no support under its center", e.name)))?;
                    (info.name, info.top)
                }
            };
            let region = match state.objects.get(&support.0) {
                Some(o) => {
                    if o.area() + EPS < footprint.area() {
                        return Err(inv(format!("{} is too small to support {}", o.name, e.name)));
                    }
                    o.footprint
                }
                None => state.surfaces[&support.0].region,
            };
            if !region.contains_point(e.position[0], e.position[1]) {
                return Err(inv(format!("{} center lies outside its support {}", e.name, support.0)));
            }
            state.objects.insert(
                e.name.clone(),
                SceneObject {
                    name: e.name.clone(),
                    type_hint: e.type_hint.clone(),
                    position: [e.position[0], e.position[1], support.1],
                    yaw: e.yaw,
                    footprint,
                    length: footprint.width(),
                    width: footprint.height(),
                    height: e.height,
                    support: Some(support.0),
                },
            );
        }
        state.check_invariants()?;
        Ok(state)
    }
}
