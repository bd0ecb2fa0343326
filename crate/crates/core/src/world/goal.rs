use std::fmt;

use serde::{Deserialize, Serialize};

use super::{WorldError, WorldState};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GoalPredicate {
    /// Direct support is one of `supports`.
    On { object: String, supports: Vec<String> },
    /// The support chain bottoms out on `surface`.
    AtSurface { object: String, surface: String },
    /// Bottom to top; each element rests directly on its predecessor.
    StackedOrder(Vec<String>),
}

impl GoalPredicate {
    pub fn holds(&self, state: &WorldState) -> bool {
        let support = |name: &str| state.objects.get(name).and_then(|o| o.support.clone());
        match self {
            GoalPredicate::On { object, supports } => {
                support(object).is_some_and(|s| supports.contains(&s))
            }
            GoalPredicate::AtSurface { object, surface } => {
                state.root_surface(object).as_deref() == Some(surface.as_str())
            }
            GoalPredicate::StackedOrder(names) => {
                names.first().is_some_and(|n| support(n).is_some())
                    && names.windows(2).all(|w| support(&w[1]).as_deref() == Some(w[0].as_str()))
            }
        }
    }

    pub fn names(&self) -> Vec<&str> {
        match self {
            GoalPredicate::On { object, supports } => {
                std::iter::once(object.as_str()).chain(supports.iter().map(String::as_str)).collect()
            }
            GoalPredicate::AtSurface { object, surface } => vec![object, surface],
            GoalPredicate::StackedOrder(names) => names.iter().map(String::as_str).collect(),
        }
    }

    /// Parses `on(a, b)`, `on(a, b|c)`, `at_surface(a, s)` or `stacked_order(a, b, c)`.
    pub fn parse(text: &str) -> Result<Self, WorldError> {
        let err = || WorldError::Parse(format!("malformed goal predicate {text:?}"));
        let text = text.trim();
        let open = text.find('(').ok_or_else(err)?;
        let inner = text[open + 1..].strip_suffix(')').ok_or_else(err)?;
        let args: Vec<&str> = inner.split(',').map(str::trim).collect();
        if args.iter().any(|a| a.is_empty()) {
            return Err(err());
        }
        match (text[..open].trim(), args.as_slice()) {
            ("on", [a, b]) => Ok(GoalPredicate::On {
                object: a.to_string(),
                supports: b.split('|').map(|s| s.trim().to_string()).collect(),
            }),
            ("at_surface", [a, s]) => Ok(GoalPredicate::AtSurface { object: a.to_string(), surface: s.to_string() }),
            ("stacked_order", list) if list.len() >= 2 => {
                Ok(GoalPredicate::StackedOrder(list.iter().map(|s| s.to_string()).collect()))
            }
            _ => Err(err()),
        }
    }
}

impl fmt::Display for GoalPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GoalPredicate::On { object, supports } => write!(f, "on({object}, {})", supports.join("|")),
            GoalPredicate::AtSurface { object, surface } => write!(f, "at_surface({object}, {surface})"),
            GoalPredicate::StackedOrder(names) => write!(f, "stacked_order({})", names.join(", ")),
        }
    }
}

/// Conjunction of predicates. Empty is vacuously satisfied.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalSpec {
    pub predicates: Vec<GoalPredicate>,
}

impl GoalSpec {
    /// Parses predicates and checks that every referenced name exists in `state`.
    pub fn parse(lines: &[String], state: &WorldState) -> Result<Self, WorldError> {
        let predicates = lines.iter().map(|l| GoalPredicate::parse(l)).collect::<Result<Vec<_>, _>>()?;
        for p in &predicates {
            for n in p.names() {
                if !state.objects.contains_key(n) && !state.surfaces.contains_key(n) {
                    return Err(WorldError::Invariant(format!("goal references unknown name {n}")));
                }
            }
            if let GoalPredicate::AtSurface { surface, .. } = p {
                if !state.surfaces.contains_key(surface) {
                    return Err(WorldError::Invariant(format!("{surface} is not a surface")));
                }
            }
        }
        Ok(GoalSpec { predicates })
    }

    pub fn is_satisfied(&self, state: &WorldState) -> bool {
        self.predicates.iter().all(|p| p.holds(state))
    }

    /// Objects the goal asks to move, in first-mention order.
    pub fn objects(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for p in &self.predicates {
            let names: Vec<&str> = match p {
                GoalPredicate::On { object, .. } | GoalPredicate::AtSurface { object, .. } => vec![object],
                GoalPredicate::StackedOrder(names) => names.iter().map(String::as_str).collect(),
            };
            for n in names {
                if !out.contains(&n) {
                    out.push(n);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predicate_grammar_round_trips() {
        for text in ["on(bowl, plate)", "on(apple, plate|bowl)", "at_surface(cup, right_table)", "stacked_order(a, b, c)"] {
            let p = GoalPredicate::parse(text).unwrap();
            assert_eq!(p.to_string(), text);
        }
        assert!(GoalPredicate::parse("on(bowl)").is_err());
        assert!(GoalPredicate::parse("near(a, b)").is_err());
        assert!(GoalPredicate::parse("on(a, b").is_err());
    }

    #[test]
    fn empty_goal_is_vacuous() {
        let state = WorldState::new(crate::geometry::Aabb::new(0.0, 0.0, 1.0, 1.0));
        assert!(GoalSpec::default().is_satisfied(&state));
    }
}
