use serde::{Deserialize, Serialize};

use super::{PrimitiveAction, SymbolicPlan};
use crate::motion::Trajectory;
use crate::world::WorldState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ViolationKind {
    PickWhileHolding,
    PlaceWithoutPick,
    UnknownObject,
    PickBuried,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub index: usize,
    pub kind: ViolationKind,
    pub object: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "action {} ({}): {:?}", self.index + 1, self.object, self.kind)
    }
}

/// Symbolic rollout of `plan` from `state`.
///
/// Place geometry (collisions, capacity) is left to execution; a geometrically
/// invalid Place still releases the object onto whatever lies under its center.
pub fn validate_plan(plan: &SymbolicPlan, state: &WorldState) -> Result<(), Vec<Violation>> {
    let mut s = state.clone();
    let mut out = Vec::new();
    let none = Trajectory::from_waypoints(Vec::new());
    for (index, action) in plan.actions.iter().enumerate() {
        let object = action.object().to_string();
        let mut flag = |kind| out.push(Violation { index, kind, object: object.clone() });
        if !s.objects.contains_key(action.object()) {
            flag(ViolationKind::UnknownObject);
            continue;
        }
        match action {
            PrimitiveAction::Pick { object } => {
                if s.held.is_some() {
                    flag(ViolationKind::PickWhileHolding);
                    continue;
                }
                if s.objects_on(object).next().is_some() {
                    flag(ViolationKind::PickBuried);
                    continue;
                }
                s = s.apply_action(action, &none).expect("pick preconditions checked");
            }
            PrimitiveAction::Place { object, pose } => {
                if s.held.as_deref() != Some(object.as_str()) {
                    flag(ViolationKind::PlaceWithoutPick);
                    continue;
                }
                match s.apply_action(action, &none) {
                    Ok(next) => s = next,
                    Err(_) => {
                        let support = s.support_at(pose.x, pose.y, object);
                        let (cx, cy) = s.objects[object].footprint.center();
                        // Nothing underneath: the object goes back where it was.
                        let back = s.support_at(cx, cy, object);
                        let o = s.objects.get_mut(object).expect("exists");
                        if let Some(info) = support {
                            o.footprint = o.footprint.translated_to(pose.x, pose.y);
                            o.position = [pose.x, pose.y, info.top];
                            o.support = Some(info.name);
                        } else if let Some(info) = back {
                            o.support = Some(info.name);
                        }
                        s.held = None;
                    }
                }
            }
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::PlacePose;
    use crate::world::load_scene;

    fn world() -> WorldState {
        load_scene(
            r#"{
            "surfaces": [{"name": "table", "bbox": [0, 0, 1, 1], "height": 0.7}],
            "objects": [
                {"name": "bowl", "position": [0.3, 0.3, 0.7], "bbox": [0.2, 0.2, 0.4, 0.4], "height": 0.06},
                {"name": "apple", "position": [0.7, 0.7, 0.7], "bbox": [0.66, 0.66, 0.74, 0.74], "height": 0.07}
            ]}"#,
        )
        .unwrap()
        .0
    }

    #[test]
    fn pick_under_placed_object_is_buried() {
        let plan = SymbolicPlan::new(vec![
            PrimitiveAction::pick("apple"),
            PrimitiveAction::place("apple", PlacePose::new(0.3, 0.3, 0.76, 0.0)),
            PrimitiveAction::pick("bowl"),
        ]);
        // bowl is buried under the apple at this point
        let v = validate_plan(&plan, &world()).unwrap_err();
        assert_eq!(v, vec![Violation { index: 2, kind: ViolationKind::PickBuried, object: "bowl".into() }]);
        assert!(validate_plan(&SymbolicPlan::new(plan.actions[..2].to_vec()), &world()).is_ok());
    }

    #[test]
    fn violations() {
        let place = SymbolicPlan::new(vec![PrimitiveAction::place("apple", PlacePose::new(0.3, 0.3, 0.7, 0.0))]);
        assert_eq!(validate_plan(&place, &world()).unwrap_err()[0].kind, ViolationKind::PlaceWithoutPick);
        let picks = SymbolicPlan::new(vec![PrimitiveAction::pick("bowl"), PrimitiveAction::pick("apple")]);
        assert_eq!(validate_plan(&picks, &world()).unwrap_err()[0].kind, ViolationKind::PickWhileHolding);
        let unknown = SymbolicPlan::new(vec![PrimitiveAction::pick("spanner")]);
        assert_eq!(validate_plan(&unknown, &world()).unwrap_err()[0].kind, ViolationKind::UnknownObject);
    }
}
