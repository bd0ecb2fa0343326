//! Parser for `Pick ([name],{})` / `Place ([name]),{x,y,z,theta}` entries.

use thiserror::Error;

use super::{PlacePose, PrimitiveAction, SymbolicPlan};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanParseError {
    #[error("no Pick/Place entries found")]
    NoActions,
    #[error("malformed {verb} entry at line {line}: {message}")]
    Malformed { verb: &'static str, line: usize, message: String },
}

struct Scanner<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn ws(&mut self) {
        let t = self.rest().trim_start();
        self.pos = self.src.len() - t.len();
    }

    fn eat(&mut self, c: char) -> bool {
        self.ws();
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn until(&mut self, c: char) -> Option<&'a str> {
        let idx = self.rest().find(c)?;
        let s = &self.rest()[..idx];
        self.pos += idx + c.len_utf8();
        Some(s)
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn valid_name(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| is_word_char(c) || c == '-' || c == '.')
}

/// Extracts the action sequence. Prose around the entries is ignored; a verb
/// not followed by `(` is treated as prose.
pub fn parse_plan(text: &str) -> Result<SymbolicPlan, PlanParseError> {
    let mut actions = Vec::new();
    let mut i = 0;
    while i < text.len() {
        let rest = &text[i..];
        let verb = if rest.starts_with("Pick") {
            "Pick"
        } else if rest.starts_with("Place") {
            "Place"
        } else {
            i += rest.chars().next().map_or(1, char::len_utf8);
            continue;
        };
        let boundary_before = text[..i].chars().next_back().is_none_or(|c| !is_word_char(c));
        let after = i + verb.len();
        let boundary_after = text[after..].chars().next().is_none_or(|c| !is_word_char(c));
        let mut sc = Scanner { src: text, pos: after };
        if !(boundary_before && boundary_after) || !sc.eat('(') {
            i = after;
            continue;
        }
        let line = text[..i].matches('\n').count() + 1;
        let err = |message: &str| PlanParseError::Malformed { verb, line, message: message.to_string() };
        if !sc.eat('[') {
            return Err(err("expected '[' before the object name"));
        }
        let name = sc.until(']').ok_or_else(|| err("unterminated object name"))?.trim();
        if !valid_name(name) {
            return Err(err("invalid object name"));
        }
        let action = if verb == "Pick" {
            if !(sc.eat(',') && sc.eat('{') && sc.eat('}') && sc.eat(')')) {
                return Err(err("expected ',{})' after the object"));
            }
            PrimitiveAction::pick(name)
        } else {
            // Both `Place ([o]),{..}` and `Place ([o],{..})` are accepted.
            let closed_early = sc.eat(')');
            if !sc.eat(',') || !sc.eat('{') {
                return Err(err("expected ',{' before the parameters"));
            }
            let body = sc.until('}').ok_or_else(|| err("unterminated parameter list"))?;
            let params: Vec<&str> = body.split(',').map(str::trim).collect();
            if params.len() != 4 {
                return Err(err(&format!("expected 4 parameters, found {}", params.len())));
            }
            let mut v = [0.0; 4];
            for (slot, p) in v.iter_mut().zip(&params) {
                *slot = p.parse::<f64>().map_err(|_| err(&format!("non-numeric parameter {p:?}")))?;
                if !slot.is_finite() {
                    return Err(err("parameters must be finite"));
                }
            }
            if !closed_early && !sc.eat(')') {
                return Err(err("expected ')' after the parameters"));
            }
            PrimitiveAction::place(name, PlacePose::new(v[0], v[1], v[2], v[3]))
        };
        actions.push(action);
        i = sc.pos;
    }
    if actions.is_empty() {
        return Err(PlanParseError::NoActions);
    }
    Ok(SymbolicPlan::new(actions))
}
