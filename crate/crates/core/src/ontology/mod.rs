//! Kitchen knowledge base: classes, labeled individuals and action-priority rules.
//!
//! The store answers exactly two query shapes:
//!
//! * object typing: `?obj a ?type ; rdfs:label ?label` filtered by a
//!   case-insensitive label match, excluding the `NamedIndividual` marker;
//! * rule lookup: `?rule a ActionPriority ; hasAction ?a ; hasObjectType ?t ;
//!   hasPriority ?p ; hasDescription ?d`.
//!
//! Class membership is taken from direct `rdf:type` assertions only.

mod ntriples;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

pub use ntriples::{local_name, parse_document, serialize, Literal, Term, Triple};

pub const RDF_TYPE: &str = "rdf:type";
pub const RDFS_LABEL: &str = "rdfs:label";
pub const RDFS_SUBCLASS_OF: &str = "rdfs:subClassOf";
pub const OWL_NAMED_INDIVIDUAL: &str = "owl:NamedIndividual";
pub const OWL_CLASS: &str = "owl:Class";
pub const ACTION_PRIORITY: &str = "ActionPriority";
pub const HAS_ACTION: &str = "hasAction";
pub const HAS_OBJECT_TYPE: &str = "hasObjectType";
pub const HAS_PRIORITY: &str = "hasPriority";
pub const HAS_DESCRIPTION: &str = "hasDescription";

/// The shipped kitchen ontology.
pub const KITCHEN_KB: &str = include_str!("../../data/kitchen.nt");

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OntologyError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("ambiguous rules for ({action}, {object_type}): {rules:?}")]
    Ambiguity { action: String, object_type: String, rules: Vec<String> },
    #[error("io error reading {path}: {message}")]
    Io { path: String, message: String },
}

/// One `ActionPriority` instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionPriorityRule {
    /// Subject of the rule instance (e.g. `ex:Rule1`).
    pub id: String,
    /// Lowercase task verb.
    pub action: String,
    pub object_type: String,
    /// 1 is the highest priority.
    pub priority: u32,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeBase {
    triples: BTreeSet<Triple>,
    /// lowercase label -> direct classes (sorted)
    class_index: BTreeMap<String, Vec<String>>,
    /// (action, object_type) -> matching rules
    rule_index: BTreeMap<(String, String), Vec<ActionPriorityRule>>,
}

fn is_pred(predicate: &str, local: &str) -> bool {
    local_name(predicate) == local
}

fn is_type_pred(predicate: &str) -> bool {
    predicate == RDF_TYPE || predicate.ends_with("#type") || predicate == "type"
}

fn is_label_pred(predicate: &str) -> bool {
    predicate == RDFS_LABEL || predicate.ends_with("#label") || predicate == "label"
}

fn subject_key(t: &Term) -> String {
    t.to_string()
}

impl KnowledgeBase {
    pub fn empty() -> Self {
        KnowledgeBase { triples: BTreeSet::new(), class_index: BTreeMap::new(), rule_index: BTreeMap::new() }
    }

    /// Parses a document and builds the indices.
    pub fn load(document: &str) -> Result<Self, OntologyError> {
        Self::from_triples(parse_document(document)?)
    }

    pub fn load_file(path: impl AsRef<std::path::Path>) -> Result<Self, OntologyError> {
        let path = path.as_ref();
        let doc = std::fs::read_to_string(path)
            .map_err(|e| OntologyError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::load(&doc)
    }

    /// The shipped kitchen ontology.
    pub fn kitchen() -> Self {
        Self::load(KITCHEN_KB).expect("shipped kitchen KB is well-formed")
    }

    pub fn from_triples(triples: impl IntoIterator<Item = Triple>) -> Result<Self, OntologyError> {
        let triples: BTreeSet<Triple> = triples.into_iter().collect();
        let class_index = build_class_index(&triples)?;
        let rule_index = build_rule_index(&triples)?;
        Ok(KnowledgeBase { triples, class_index, rule_index })
    }

    pub fn triples(&self) -> &BTreeSet<Triple> {
        &self.triples
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn serialize(&self) -> String {
        serialize(&self.triples)
    }

    pub fn rules(&self) -> impl Iterator<Item = &ActionPriorityRule> {
        self.rule_index.values().flatten()
    }

    pub fn rule_count(&self) -> usize {
        self.rule_index.values().map(Vec::len).sum()
    }

    pub fn rule_keys(&self) -> impl Iterator<Item = &(String, String)> {
        self.rule_index.keys()
    }

    /// All labels known to the store, lowercased.
    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.class_index.keys().map(String::as_str)
    }

    /// Direct classes of the individual labeled `label` (case-insensitive).
    pub fn query_object_type(&self, label: &str) -> Vec<String> {
        self.class_index.get(&label.to_lowercase()).cloned().unwrap_or_default()
    }

    /// First direct class, if any.
    pub fn object_type(&self, label: &str) -> Option<String> {
        self.class_index.get(&label.to_lowercase()).and_then(|c| c.first().cloned())
    }

    /// Priority and description of the rule for `(action, object_type)`.
    pub fn query_action_priority(
        &self,
        action: &str,
        object_type: &str,
    ) -> Result<Option<(u32, String)>, OntologyError> {
        let key = (action.to_lowercase(), object_type.to_string());
        match self.rule_index.get(&key).map(Vec::as_slice) {
            None | Some([]) => Ok(None),
            Some([rule]) => Ok(Some((rule.priority, rule.description.clone()))),
            Some(rules) => Err(OntologyError::Ambiguity {
                action: key.0,
                object_type: key.1,
                rules: rules.iter().map(|r| r.id.clone()).collect(),
            }),
        }
    }

    /// Classes declared with `rdf:type owl:Class`.
    pub fn classes(&self) -> BTreeSet<String> {
        self.triples
            .iter()
            .filter(|t| is_type_pred(&t.predicate) && t.object.as_iri() == Some(OWL_CLASS))
            .map(|t| t.subject.local_name())
            .collect()
    }

    /// Direct superclass of a class, if declared.
    pub fn superclass(&self, class: &str) -> Option<String> {
        self.triples
            .iter()
            .find(|t| is_pred(&t.predicate, "subClassOf") && t.subject.local_name() == class)
            .map(|t| t.object.local_name())
    }
}

fn build_class_index(triples: &BTreeSet<Triple>) -> Result<BTreeMap<String, Vec<String>>, OntologyError> {
    let mut labels: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut types: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for t in triples {
        if is_label_pred(&t.predicate) {
            if let Term::Literal(Literal::Str(label)) = &t.object {
                labels.entry(subject_key(&t.subject)).or_default().push(label.to_lowercase());
            }
        } else if is_type_pred(&t.predicate) {
            if let Term::Iri(class) = &t.object {
                let local = local_name(class);
                if local != local_name(OWL_NAMED_INDIVIDUAL) {
                    types.entry(subject_key(&t.subject)).or_default().insert(local.to_string());
                }
            }
        }
    }

    let mut index: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut owner: BTreeMap<String, String> = BTreeMap::new();
    for (subject, subject_labels) in labels {
        for label in subject_labels {
            if let Some(prev) = owner.get(&label) {
                if prev != &subject {
                    return Err(OntologyError::Schema(format!(
                        "label \"{label}\" is used by both {prev} and {subject}"
                    )));
                }
                continue;
            }
            owner.insert(label.clone(), subject.clone());
            let classes = types.get(&subject).map(|s| s.iter().cloned().collect()).unwrap_or_default();
            index.insert(label, classes);
        }
    }
    Ok(index)
}

fn build_rule_index(
    triples: &BTreeSet<Triple>,
) -> Result<BTreeMap<(String, String), Vec<ActionPriorityRule>>, OntologyError> {
    let rule_subjects: BTreeSet<&Term> = triples
        .iter()
        .filter(|t| {
            is_type_pred(&t.predicate) && matches!(&t.object, Term::Iri(c) if local_name(c) == ACTION_PRIORITY)
        })
        .map(|t| &t.subject)
        .collect();

    let mut index: BTreeMap<(String, String), Vec<ActionPriorityRule>> = BTreeMap::new();
    for subject in rule_subjects {
        let id = match subject {
            Term::Iri(s) => s.clone(),
            other => other.to_string(),
        };
        let single = |prop: &str| -> Result<&Term, OntologyError> {
            let mut values = triples.iter().filter(|t| &t.subject == subject && is_pred(&t.predicate, prop));
            let first = values
                .next()
                .ok_or_else(|| OntologyError::Schema(format!("ActionPriority {id} is missing {prop}")))?;
            if values.next().is_some() {
                return Err(OntologyError::Schema(format!("ActionPriority {id} has several {prop} values")));
            }
            Ok(&first.object)
        };

        let action = match single(HAS_ACTION)? {
            Term::Literal(Literal::Str(s)) => s.trim().to_lowercase(),
            Term::Iri(s) => local_name(s).to_lowercase(),
            other => return Err(OntologyError::Schema(format!("{id}: hasAction has invalid value {other}"))),
        };
        let object_type = match single(HAS_OBJECT_TYPE)? {
            Term::Literal(Literal::Str(s)) => s.trim().to_string(),
            Term::Iri(s) => local_name(s).to_string(),
            other => return Err(OntologyError::Schema(format!("{id}: hasObjectType has invalid value {other}"))),
        };
        let priority = match single(HAS_PRIORITY)? {
            Term::Literal(Literal::Int(p)) if *p >= 1 && *p <= u32::MAX as i64 => *p as u32,
            other => return Err(OntologyError::Schema(format!("{id}: hasPriority must be an integer >= 1, got {other}"))),
        };
        let description = match single(HAS_DESCRIPTION)? {
            Term::Literal(Literal::Str(s)) if !s.trim().is_empty() => s.trim().to_string(),
            other => return Err(OntologyError::Schema(format!("{id}: hasDescription must be non-empty text, got {other}"))),
        };
        if action.is_empty() || object_type.is_empty() {
            return Err(OntologyError::Schema(format!("{id}: empty action or object type")));
        }
        index.entry((action.clone(), object_type.clone())).or_default().push(ActionPriorityRule {
            id,
            action,
            object_type,
            priority,
            description,
        });
    }
    Ok(index)
}
