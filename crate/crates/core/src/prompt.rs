//! Prompt templates with `{GUIDANCE}`, `{ENV_STATE}` and `{USER_INPUT}` slots.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_TEMPLATE: &str = include_str!("../data/prompt_template.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Slot {
    Guidance,
    EnvState,
    UserInput,
}

impl Slot {
    pub const ALL: [Slot; 3] = [Slot::Guidance, Slot::EnvState, Slot::UserInput];

    pub fn marker(&self) -> &'static str {
        match self {
            Slot::Guidance => "{GUIDANCE}",
            Slot::EnvState => "{ENV_STATE}",
            Slot::UserInput => "{USER_INPUT}",
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.marker())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TemplateError {
    #[error("template is missing slot {0}")]
    MissingSlot(Slot),
    #[error("template repeats slot {0}")]
    DuplicateSlot(Slot),
    #[error("cannot read template {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Section {
    Text(String),
    Slot(Slot),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    sections: Vec<Section>,
}

impl PromptTemplate {
    pub fn parse(text: &str) -> Result<Self, TemplateError> {
        let mut found: Vec<(usize, Slot)> = Vec::new();
        for slot in Slot::ALL {
            let hits: Vec<usize> = text.match_indices(slot.marker()).map(|(i, _)| i).collect();
            match hits.as_slice() {
                [] => return Err(TemplateError::MissingSlot(slot)),
                [i] => found.push((*i, slot)),
                _ => return Err(TemplateError::DuplicateSlot(slot)),
            }
        }
        found.sort();
        let mut sections = Vec::new();
        let mut pos = 0;
        for (i, slot) in found {
            if i > pos {
                sections.push(Section::Text(text[pos..i].to_string()));
            }
            sections.push(Section::Slot(slot));
            pos = i + slot.marker().len();
        }
        if pos < text.len() {
            sections.push(Section::Text(text[pos..].to_string()));
        }
        Ok(PromptTemplate { sections })
    }

    pub fn load_file(path: impl AsRef<std::path::Path>) -> Result<Self, TemplateError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| TemplateError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::parse(&text)
    }

    pub fn sections(&self) -> &[Section] {
        &self.sections
    }

    /// Substitutes the three slots and records where each landed.
    pub fn compose(&self, guidance: &str, env_state: &str, user_input: &str) -> Prompt {
        let mut text = String::new();
        let mut provenance = BTreeMap::new();
        for s in &self.sections {
            match s {
                Section::Text(t) => text.push_str(t),
                Section::Slot(slot) => {
                    let value = match slot {
                        Slot::Guidance => guidance,
                        Slot::EnvState => env_state,
                        Slot::UserInput => user_input,
                    };
                    let start = text.len();
                    text.push_str(value);
                    provenance.insert(*slot, (start, text.len()));
                }
            }
        }
        Prompt { text, provenance }
    }
}

impl Default for PromptTemplate {
    fn default() -> Self {
        Self::parse(DEFAULT_TEMPLATE).expect("shipped template is valid")
    }
}

/// Parses `template` and composes in one step.
pub fn compose(template: &str, guidance: &str, env_state: &str, user_input: &str) -> Result<Prompt, TemplateError> {
    Ok(PromptTemplate::parse(template)?.compose(guidance, env_state, user_input))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub text: String,
    /// Byte range of each substituted slot.
    pub provenance: BTreeMap<Slot, (usize, usize)>,
}

impl Prompt {
    pub fn block(&self, slot: Slot) -> Option<&str> {
        self.provenance.get(&slot).map(|&(a, b)| &self.text[a..b])
    }
}
