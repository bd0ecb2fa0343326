//! Kinematic tabletop world: objects resting on surfaces or on each other.
//!
//! Placement snaps an object's base height to the top of its support. An
//! object's support is the topmost object (or else the surface) whose region
//! contains the footprint center. Footprints translate with the object; yaw is
//! recorded but does not rotate the footprint.

mod describe;
mod goal;
mod scene;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geometry::{Aabb, Point2};
use crate::motion::Trajectory;
use crate::planner::PrimitiveAction;

pub use describe::{
    describe_environment, describe_state, describe_surfaces, parse_description, parse_surfaces, DescribedObject,
    DescribedSurface, UNKNOWN_TYPE,
};
pub use goal::{GoalPredicate, GoalSpec};
pub use scene::{load_scene, load_scene_file, ObjectEntry, SceneFile, SurfaceEntry};

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub name: String,
    /// Object type declared by the scene file; the knowledge base takes precedence.
    pub type_hint: Option<String>,
    /// Footprint center and base height.
    pub position: [f64; 3],
    pub yaw: f64,
    pub footprint: Aabb,
    /// Extent along x.
    pub length: f64,
    /// Extent along y.
    pub width: f64,
    /// Vertical extent, used to compute the top of a stack.
    pub height: f64,
    /// `None` while held.
    pub support: Option<String>,
}

impl SceneObject {
    pub fn top(&self) -> f64 {
        self.position[2] + self.height
    }

    pub fn center(&self) -> Point2 {
        Point2::new(self.position[0], self.position[1])
    }

    pub fn area(&self) -> f64 {
        self.footprint.area()
    }
}

/// A named support region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Surface {
    pub name: String,
    pub region: Aabb,
    /// Height of the top face.
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub objects: BTreeMap<String, SceneObject>,
    pub held: Option<String>,
    pub surfaces: BTreeMap<String, Surface>,
    pub gripper: Point2,
    pub workspace: Aabb,
}

#[derive(Debug, Error, PartialEq)]
pub enum WorldError {
    #[error("scene parse error: {0}")]
    Parse(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

/// Why an action cannot be applied. `Display` output is stable and used
/// verbatim in failure feedback.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PreconditionReason {
    ObjectNotFound,
    GripperOccupied,
    ObjectBuried,
    NotHeld,
    InvalidParameters,
    OutsideWorkspace,
    NoSupport,
    SupportTooSmall,
    TargetInCollision,
}

impl PreconditionReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            PreconditionReason::ObjectNotFound => "object not found",
            PreconditionReason::GripperOccupied => "gripper occupied",
            PreconditionReason::ObjectBuried => "object has objects on top",
            PreconditionReason::NotHeld => "object not held",
            PreconditionReason::InvalidParameters => "invalid place parameters",
            PreconditionReason::OutsideWorkspace => "target outside workspace",
            PreconditionReason::NoSupport => "no support under target",
            PreconditionReason::SupportTooSmall => "support too small",
            PreconditionReason::TargetInCollision => "target in collision",
        }
    }
}

impl std::fmt::Display for PreconditionReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{reason}")]
pub struct PreconditionError {
    pub reason: PreconditionReason,
}

impl From<PreconditionReason> for PreconditionError {
    fn from(reason: PreconditionReason) -> Self {
        PreconditionError { reason }
    }
}

/// Where a placed object would rest.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportInfo {
    pub name: String,
    pub top: f64,
    /// `true` when the support is an object rather than a surface.
    pub is_object: bool,
}

impl WorldState {
    pub fn new(workspace: Aabb) -> Self {
        let (cx, _) = workspace.center();
        WorldState {
            objects: BTreeMap::new(),
            held: None,
            surfaces: BTreeMap::new(),
            gripper: Point2::new(cx, workspace.ymin),
            workspace,
        }
    }

    pub fn object(&self, name: &str) -> Option<&SceneObject> {
        self.objects.get(name)
    }

    pub fn is_surface(&self, name: &str) -> bool {
        self.surfaces.contains_key(name)
    }

    /// Objects resting directly on `name`.
    pub fn objects_on<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a SceneObject> + 'a {
        self.objects.values().filter(move |o| o.support.as_deref() == Some(name))
    }

    /// Object supports below `name`, nearest first. Surfaces are not included.
    pub fn ancestors(&self, name: &str) -> Vec<String> {
        let mut out = Vec::new();
        let mut cur = self.objects.get(name).and_then(|o| o.support.clone());
        while let Some(s) = cur {
            if out.contains(&s) || !self.objects.contains_key(&s) {
                break;
            }
            cur = self.objects[&s].support.clone();
            out.push(s);
        }
        out
    }

    /// Surface at the bottom of the support chain.
    pub fn root_surface(&self, name: &str) -> Option<String> {
        let mut cur = self.objects.get(name)?.support.clone();
        let mut steps = 0;
        while let Some(s) = cur {
            if self.surfaces.contains_key(&s) {
                return Some(s);
            }
            steps += 1;
            if steps > self.objects.len() {
                return None;
            }
            cur = self.objects.get(&s)?.support.clone();
        }
        None
    }

    /// Topmost object (other than `exclude`) or surface containing `(x, y)`.
    pub fn support_at(&self, x: f64, y: f64, exclude: &str) -> Option<SupportInfo> {
        let best_object = self
            .objects
            .values()
            .filter(|o| o.name != exclude && o.support.is_some() && o.footprint.contains_point(x, y))
            .max_by(|a, b| a.top().total_cmp(&b.top()).then_with(|| b.name.cmp(&a.name)));
        if let Some(o) = best_object {
            return Some(SupportInfo { name: o.name.clone(), top: o.top(), is_object: true });
        }
        self.surfaces
            .values()
            .filter(|s| s.region.contains_point(x, y))
            .max_by(|a, b| a.height.total_cmp(&b.height).then_with(|| b.name.cmp(&a.name)))
            .map(|s| SupportInfo { name: s.name.clone(), top: s.height, is_object: false })
    }

    /// Checks an action's preconditions without applying it.
    pub fn check_action(&self, action: &PrimitiveAction) -> Result<(), PreconditionError> {
        self.transition(action, None).map(|_| ())
    }

    /// Applies a Pick or Place. The gripper ends at the trajectory's last waypoint.
    pub fn apply_action(&self, action: &PrimitiveAction, trajectory: &Trajectory) -> Result<WorldState, PreconditionError> {
        self.transition(action, trajectory.waypoints.last().copied())
    }

    fn transition(&self, action: &PrimitiveAction, gripper_end: Option<Point2>) -> Result<WorldState, PreconditionError> {
        use PreconditionReason::*;
        match action {
            PrimitiveAction::Pick { object } => {
                let obj = self.objects.get(object).ok_or(PreconditionError::from(ObjectNotFound))?;
                if self.held.is_some() {
                    return Err(GripperOccupied.into());
                }
                if self.objects_on(object).next().is_some() {
                    return Err(ObjectBuried.into());
                }
                let mut next = self.clone();
                next.held = Some(object.clone());
                next.gripper = gripper_end.unwrap_or_else(|| obj.center());
                next.objects.get_mut(object).expect("exists").support = None;
                Ok(next)
            }
            PrimitiveAction::Place { object, pose } => {
                if !self.objects.contains_key(object) {
                    return Err(ObjectNotFound.into());
                }
                if self.held.as_deref() != Some(object.as_str()) {
                    return Err(NotHeld.into());
                }
                if !pose.is_finite() {
                    return Err(InvalidParameters.into());
                }
                if !self.workspace.contains_point(pose.x, pose.y) {
                    return Err(OutsideWorkspace.into());
                }
                let obj = &self.objects[object];
                let footprint = obj.footprint.translated_to(pose.x, pose.y);
                let support = self.support_at(pose.x, pose.y, object).ok_or(PreconditionError::from(NoSupport))?;
                let mut chain: BTreeSet<String> = BTreeSet::new();
                if support.is_object {
                    if self.objects[&support.name].area() + EPS < obj.area() {
                        return Err(SupportTooSmall.into());
                    }
                    chain.insert(support.name.clone());
                    chain.extend(self.ancestors(&support.name));
                }
                let collides = self
                    .objects
                    .values()
                    .any(|o| o.name != *object && !chain.contains(&o.name) && o.footprint.overlaps(&footprint));
                if collides {
                    return Err(TargetInCollision.into());
                }
                let mut next = self.clone();
                next.held = None;
                next.gripper = gripper_end.unwrap_or(Point2::new(pose.x, pose.y));
                let o = next.objects.get_mut(object).expect("exists");
                o.position = [pose.x, pose.y, support.top];
                o.yaw = pose.theta;
                o.footprint = footprint;
                o.support = Some(support.name);
                Ok(next)
            }
        }
    }

    /// Validates every structural invariant of the state.
    pub fn check_invariants(&self) -> Result<(), WorldError> {
        let inv = |m: String| Err(WorldError::Invariant(m));
        let held: Vec<&SceneObject> = self.objects.values().filter(|o| o.support.is_none()).collect();
        match (&self.held, held.as_slice()) {
            (None, []) => {}
            (Some(h), [o]) if &o.name == h => {}
            (h, list) => {
                return inv(format!(
                    "held={h:?} but unsupported objects are {:?}",
                    list.iter().map(|o| &o.name).collect::<Vec<_>>()
                ))
            }
        }
        for o in self.objects.values() {
            if !o.footprint.is_valid() {
                return inv(format!("{} has a degenerate footprint", o.name));
            }
            if (o.length - o.footprint.width()).abs() > 1e-9 || (o.width - o.footprint.height()).abs() > 1e-9 {
                return inv(format!("{} dimensions disagree with its footprint", o.name));
            }
            if self.surfaces.contains_key(&o.name) {
                return inv(format!("{} is both an object and a surface", o.name));
            }
            if let Some(s) = &o.support {
                if !self.objects.contains_key(s) && !self.surfaces.contains_key(s) {
                    return inv(format!("{} rests on unknown support {s}", o.name));
                }
                if s == &o.name {
                    return inv(format!("{} supports itself", o.name));
                }
                if self.root_surface(&o.name).is_none() {
                    return inv(format!("support chain of {} is cyclic or does not reach a surface", o.name));
                }
            }
        }
        let resting: Vec<&SceneObject> = self.objects.values().filter(|o| o.support.is_some()).collect();
        for (i, a) in resting.iter().enumerate() {
            for b in &resting[i + 1..] {
                if !a.footprint.overlaps(&b.footprint) {
                    continue;
                }
                let related = self.ancestors(&a.name).contains(&b.name) || self.ancestors(&b.name).contains(&a.name);
                if !related || a.support == b.support {
                    return inv(format!("footprints of {} and {} overlap", a.name, b.name));
                }
            }
        }
        Ok(())
    }

    /// Short content hash of the state.
    pub fn state_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("state serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn check_goal(&self, goal: &GoalSpec) -> bool {
        goal.is_satisfied(self)
    }
}
