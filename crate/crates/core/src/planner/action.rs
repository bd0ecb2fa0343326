use std::fmt;

use serde::{Deserialize, Serialize};

/// Place target `(x, y, z, theta)`: meters and radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacePose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub theta: f64,
}

impl PlacePose {
    pub const fn new(x: f64, y: f64, z: f64, theta: f64) -> Self {
        PlacePose { x, y, z, theta }
    }

    pub fn is_finite(&self) -> bool {
        [self.x, self.y, self.z, self.theta].iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verb", rename_all = "lowercase")]
pub enum PrimitiveAction {
    Pick { object: String },
    Place { object: String, pose: PlacePose },
}

impl PrimitiveAction {
    pub fn pick(object: impl Into<String>) -> Self {
        PrimitiveAction::Pick { object: object.into() }
    }

    pub fn place(object: impl Into<String>, pose: PlacePose) -> Self {
        PrimitiveAction::Place { object: object.into(), pose }
    }

    pub fn object(&self) -> &str {
        match self {
            PrimitiveAction::Pick { object } | PrimitiveAction::Place { object, .. } => object,
        }
    }

    pub fn verb(&self) -> &'static str {
        match self {
            PrimitiveAction::Pick { .. } => "Pick",
            PrimitiveAction::Place { .. } => "Place",
        }
    }

    pub fn is_place(&self) -> bool {
        matches!(self, PrimitiveAction::Place { .. })
    }
}

impl fmt::Display for PrimitiveAction {
    /// Canonical plan-grammar form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrimitiveAction::Pick { object } => write!(f, "Pick ([{object}],{{}})"),
            PrimitiveAction::Place { object, pose } => {
                write!(f, "Place ([{object}]),{{{},{},{},{}}}", pose.x, pose.y, pose.z, pose.theta)
            }
        }
    }
}

/// Ordered list of primitive actions.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SymbolicPlan {
    pub actions: Vec<PrimitiveAction>,
}

impl SymbolicPlan {
    pub fn new(actions: Vec<PrimitiveAction>) -> Self {
        SymbolicPlan { actions }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// `Full Plan =` block, one action per indented line.
    pub fn render(&self) -> String {
        let mut out = String::from("Full Plan =\n");
        for a in &self.actions {
            out.push_str("    ");
            out.push_str(&a.to_string());
            out.push('\n');
        }
        out
    }

    /// Objects in the order they are placed (first placement wins).
    pub fn placement_order(&self) -> Vec<&str> {
        let mut seen = Vec::new();
        for a in &self.actions {
            if let PrimitiveAction::Place { object, .. } = a {
                if !seen.contains(&object.as_str()) {
                    seen.push(object.as_str());
                }
            }
        }
        seen
    }
}
