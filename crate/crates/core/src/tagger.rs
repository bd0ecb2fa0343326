//! Rule-based semantic tagging of natural-language commands.
//!
//! Tokens are tagged from a closed kitchen lexicon with suffix fallbacks, then
//! clauses are cut at task verbs that follow a comma or conjunction. Inside a
//! clause the first noun run after the verb holds the manipulated objects and
//! the noun after the last locative preposition is the destination.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use std::fmt;

/// Tasks the robot knows how to perform.
pub const TASKS: [&str; 5] = ["clean", "arrange", "put", "serve", "stack"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Pos {
    Verb,
    Noun,
    Adj,
    Det,
    Prep,
    Conj,
    Punct,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub pos: Option<Pos>,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause {
    pub task: String,
    pub objects: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub destination: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedCommand {
    pub clauses: Vec<Clause>,
}

impl TaggedCommand {
    /// Objects of every clause, in mention order.
    pub fn all_objects(&self) -> impl Iterator<Item = &str> {
        self.clauses.iter().flat_map(|c| c.objects.iter().map(String::as_str))
    }
}

impl fmt::Display for TaggedCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}/[{}]", c.task, c.objects.join(", "))?;
            if let Some(d) = &c.destination {
                write!(f, "/{d}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TagError {
    #[error("NoTaskFound: no verb from the task set {tasks:?} in input", tasks = TASKS)]
    NoTaskFound,
    #[error("EmptyObjects: '{task}' clause has no object")]
    EmptyObjects { task: String },
}

const PUNCT_CHARS: &[char] = &[',', '.', ';', ':', '!', '?'];

/// Splits on whitespace; sentence punctuation becomes separate tokens.
pub fn tokenize(input: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut push = |text: &str| {
        let index = out.len();
        out.push(Token { text: text.to_string(), pos: None, index });
    };
    for word in input.split_whitespace() {
        let mut start = 0;
        for (i, c) in word.char_indices() {
            if PUNCT_CHARS.contains(&c) {
                if start < i {
                    push(&word[start..i]);
                }
                push(&word[i..i + c.len_utf8()]);
                start = i + c.len_utf8();
            }
        }
        if start < word.len() {
            push(&word[start..]);
        }
    }
    out
}

/// Canonical task for a verb form, if the verb maps into the task set.
pub fn canonical_task(word: &str) -> Option<&'static str> {
    let w = word.to_lowercase();
    let task = match w.as_str() {
        "clean" | "cleans" | "cleaning" | "cleaned" => "clean",
        "arrange" | "arranges" | "arranging" | "arranged" => "arrange",
        "put" | "puts" | "putting" => "put",
        "serve" | "serves" | "serving" | "served" => "serve",
        "stack" | "stacks" | "stacking" | "stacked" => "stack",
        // synonyms used by the benchmark prompts
        "move" | "moves" | "moving" | "moved" | "place" | "places" | "placing" | "placed" | "bring" | "brings"
        | "bringing" | "brought" => "put",
        _ => return None,
    };
    Some(task)
}

const DETERMINERS: &[&str] = &["the", "a", "an", "all", "some", "each", "every", "this", "that", "these", "those", "its"];
const PREPOSITIONS: &[&str] = &[
    "in", "on", "to", "into", "onto", "inside", "by", "from", "of", "at", "with", "over", "under", "near", "next",
    "beside", "for", "off",
];
const LOCATIVE: &[&str] = &["in", "on", "to", "into", "onto", "inside"];
const CONJUNCTIONS: &[&str] = &["and", "or", "then", "but"];
const ADJECTIVES: &[&str] = &[
    "left", "right", "green", "red", "blue", "yellow", "white", "black", "large", "small", "big", "little", "boxed",
    "empty", "dirty", "top", "bottom", "first", "second", "third",
];
const NOUNS: &[&str] = &[
    "apple", "banana", "bread", "orange", "lemon", "bowl", "plate", "plates", "cup", "cups", "mug", "spoon", "fork",
    "knife", "tray", "basket", "table", "sugar_box", "tomato_can", "cracker_box", "box", "can", "items", "item",
    "food", "crockery", "utensils",
];
// words that never name a manipulable object
const OTHER_WORDS: &[&str] = &["breakfast", "lunch", "dinner", "please", "now", "also", "here", "there", "it", "them"];

fn lexicon_pos(word: &str) -> Pos {
    let w = word.to_lowercase();
    if word.chars().all(|c| PUNCT_CHARS.contains(&c)) {
        return Pos::Punct;
    }
    if canonical_task(&w).is_some() {
        return Pos::Verb;
    }
    let w = w.as_str();
    if DETERMINERS.contains(&w) {
        Pos::Det
    } else if PREPOSITIONS.contains(&w) {
        Pos::Prep
    } else if CONJUNCTIONS.contains(&w) {
        Pos::Conj
    } else if ADJECTIVES.contains(&w) {
        Pos::Adj
    } else if NOUNS.contains(&w) {
        Pos::Noun
    } else if OTHER_WORDS.contains(&w) {
        Pos::Other
    } else if w.chars().last().is_some_and(|c| c.is_ascii_digit()) {
        Pos::Noun
    } else if w.len() > 2 && w.ends_with("ly") {
        Pos::Other
    } else {
        Pos::Noun
    }
}

/// Assigns a part-of-speech tag to every token.
pub fn tag_pos(tokens: Vec<Token>) -> Vec<Token> {
    tokens
        .into_iter()
        .map(|mut t| {
            t.pos = Some(lexicon_pos(&t.text));
            t
        })
        .collect()
}

fn pos_of(t: &Token) -> Pos {
    t.pos.unwrap_or_else(|| lexicon_pos(&t.text))
}

fn is_locative(t: &Token) -> bool {
    pos_of(t) == Pos::Prep && LOCATIVE.contains(&t.text.to_lowercase().as_str())
}

/// Reads a compound noun group `ADJ* NOUN+` starting at `i`; returns the
/// joined name and the index after it. `None` if no noun is reached.
fn noun_group(tokens: &[Token], mut i: usize) -> Option<(String, usize)> {
    let mut parts = Vec::new();
    while i < tokens.len() && pos_of(&tokens[i]) == Pos::Adj {
        parts.push(tokens[i].text.to_lowercase());
        i += 1;
    }
    let noun_start = i;
    while i < tokens.len() && pos_of(&tokens[i]) == Pos::Noun {
        parts.push(tokens[i].text.to_lowercase());
        i += 1;
    }
    (i > noun_start).then(|| (parts.join("_"), i))
}

fn clause_from(tokens: &[Token], task: &str) -> Clause {
    // tokens[0] is the task verb
    let locative_positions: Vec<usize> =
        tokens.iter().enumerate().filter(|(_, t)| is_locative(t)).map(|(i, _)| i).collect();
    let object_limit = locative_positions.first().copied().unwrap_or(tokens.len());

    let mut objects = Vec::new();
    let mut i = 1;
    // skip to the first noun group
    while i < object_limit {
        if let Some((name, next)) = noun_group(&tokens[..object_limit], i) {
            objects.push(name);
            i = next;
            break;
        }
        i += 1;
    }
    // conjunct run: groups separated by commas, conjunctions and determiners
    if !objects.is_empty() {
        while i < object_limit {
            let t = &tokens[i];
            match pos_of(t) {
                Pos::Punct if t.text == "," => i += 1,
                Pos::Conj | Pos::Det => i += 1,
                Pos::Adj | Pos::Noun => match noun_group(&tokens[..object_limit], i) {
                    Some((name, next)) => {
                        objects.push(name);
                        i = next;
                    }
                    None => break,
                },
                _ => break,
            }
        }
    }

    let destination = locative_positions.last().and_then(|&p| {
        let mut j = p + 1;
        while j < tokens.len() && pos_of(&tokens[j]) == Pos::Det {
            j += 1;
        }
        noun_group(tokens, j).map(|(name, _)| name)
    });

    Clause { task: task.to_string(), objects, destination }
}

/// Extracts task clauses, their objects and destinations from a command.
pub fn extract_command(input: &str) -> Result<TaggedCommand, TagError> {
    let tokens = tag_pos(tokenize(input));

    // clause starts: the first task verb, and every later task verb preceded by a
    // comma/conjunction boundary
    let mut starts: Vec<(usize, &'static str)> = Vec::new();
    for (i, t) in tokens.iter().enumerate() {
        let Some(task) = canonical_task(&t.text).filter(|_| pos_of(t) == Pos::Verb) else { continue };
        if starts.is_empty() {
            starts.push((i, task));
            continue;
        }
        let mut j = i;
        let mut boundary = false;
        while j > 0 {
            j -= 1;
            match pos_of(&tokens[j]) {
                Pos::Conj => boundary = true,
                Pos::Punct if matches!(tokens[j].text.as_str(), "," | ";" | ".") => boundary = true,
                _ => break,
            }
        }
        if boundary {
            starts.push((i, task));
        }
    }
    if starts.is_empty() {
        return Err(TagError::NoTaskFound);
    }

    let mut clauses = Vec::with_capacity(starts.len());
    for (k, &(start, task)) in starts.iter().enumerate() {
        let end = starts.get(k + 1).map(|s| s.0).unwrap_or(tokens.len());
        let clause = clause_from(&tokens[start..end], task);
        if clause.objects.is_empty() && matches!(task, "put" | "serve" | "stack") {
            return Err(TagError::EmptyObjects { task: task.to_string() });
        }
        clauses.push(clause);
    }
    Ok(TaggedCommand { clauses })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(tokens: &[Token]) -> Vec<&str> {
        tokens.iter().map(|t| t.text.as_str()).collect()
    }

    fn clause(task: &str, objects: &[&str], dest: Option<&str>) -> Clause {
        Clause {
            task: task.into(),
            objects: objects.iter().map(|s| s.to_string()).collect(),
            destination: dest.map(str::to_string),
        }
    }

    #[test]
    fn tokenize_cases() {
        assert!(tokenize("").is_empty());
        assert_eq!(texts(&tokenize("put the green_cup")), ["put", "the", "green_cup"]);
        let toks = tag_pos(tokenize("clean table, move plate"));
        assert_eq!(texts(&toks), ["clean", "table", ",", "move", "plate"]);
        assert_eq!(toks.iter().filter(|t| t.pos == Some(Pos::Punct)).count(), 1);
        assert!(toks.iter().enumerate().all(|(i, t)| t.index == i));
    }

    #[test]
    fn pos_fallbacks() {
        let tags: Vec<Pos> = tag_pos(tokenize("put banana quickly plate7 zorb"))
            .iter()
            .map(|t| t.pos.unwrap())
            .collect();
        assert_eq!(tags, [Pos::Verb, Pos::Noun, Pos::Other, Pos::Noun, Pos::Noun]);
    }

    #[test]
    fn intro_example() {
        let cmd = extract_command("put the banana, apple, and bowl in the plate").unwrap();
        assert_eq!(cmd.clauses, vec![clause("put", &["banana", "apple", "bowl"], Some("plate"))]);
    }

    #[test]
    fn stacking_example() {
        let cmd = extract_command("Stack cup, plate1, and plate2 on plate3").unwrap();
        assert_eq!(cmd.clauses, vec![clause("stack", &["cup", "plate1", "plate2"], Some("plate3"))]);
    }

    #[test]
    fn multi_clause_with_move() {
        let cmd = extract_command(
            "Clean table, move plate and cup to the right_table, move sugar_box, tomato_can, and cracker_box to the left_table",
        )
        .unwrap();
        assert_eq!(
            cmd.clauses,
            vec![
                clause("clean", &["table"], None),
                clause("put", &["plate", "cup"], Some("right_table")),
                clause("put", &["sugar_box", "tomato_can", "cracker_box"], Some("left_table")),
            ]
        );
    }

    #[test]
    fn compound_modifiers_join() {
        let cmd = extract_command("move the green cup to the right table").unwrap();
        assert_eq!(cmd.clauses, vec![clause("put", &["green_cup"], Some("right_table"))]);
        let cmd = extract_command("move boxed food items to the left table").unwrap();
        assert_eq!(cmd.clauses[0].objects, ["boxed_food_items"]);
    }

    #[test]
    fn embedded_verb_does_not_split() {
        let cmd = extract_command("Serve breakfast by placing plate, bread and cup on the table.").unwrap();
        assert_eq!(cmd.clauses, vec![clause("serve", &["plate", "bread", "cup"], Some("table"))]);
    }

    #[test]
    fn errors() {
        assert_eq!(extract_command("hello world"), Err(TagError::NoTaskFound));
        assert_eq!(extract_command(""), Err(TagError::NoTaskFound));
        assert_eq!(extract_command("put it in the bowl"), Err(TagError::EmptyObjects { task: "put".into() }));
        // clean without an object is allowed
        assert_eq!(extract_command("clean").unwrap().clauses, vec![clause("clean", &[], None)]);
    }

    #[test]
    fn single_object() {
        let cmd = extract_command("put the bowl in plate").unwrap();
        assert_eq!(cmd.to_string(), "put/[bowl]/plate");
    }
}
