//! Block grammars.
//!
//! Every block in the catalog carries one grammar string per language. The
//! grammar DSL has three constructs:
//!
//! * literal words, written in normalized form (`move`, `grad`),
//! * slots, `{name}`, referring to a slot declared on the block,
//! * optional groups, `[ ... ]`, holding literals and slots (no nesting).
//!
//! A grammar compiles to an anchored regular expression over the normalized
//! remainder, with one named capture group per slot. Slots inside an optional
//! group that are not spoken are filled from their shadow default.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use regex_automata::meta::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{BlockCatalog, BlockSpec, Language, SlotKind, SlotSpec, ValidationError};
use crate::textnorm::tokenize;
use crate::value::{parse_number, Value};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("syntax error at {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("duplicate slot '{slot}' at {position}")]
    DuplicateSlot { slot: String, position: usize },
    #[error("unknown slot '{slot}' at {position}")]
    UnknownSlot { slot: String, position: usize },
    #[error("slot '{slot}' is declared but never used")]
    UnusedSlot { slot: String },
    #[error("optional slot '{slot}' has no default")]
    OptionalWithoutDefault { slot: String },
    #[error("grammar is empty")]
    Empty,
    #[error("regex compilation failed: {0}")]
    Regex(String),
}

impl GrammarError {
    fn syntax(position: usize, message: impl Into<String>) -> Self {
        GrammarError::Syntax { position, message: message.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Element {
    Literal(String),
    Slot(String),
    Optional(Vec<Element>),
}

/// Parses the DSL without checking slots against a block.
pub fn parse(grammar: &str) -> Result<Vec<Element>, GrammarError> {
    let chars: Vec<(usize, char)> = grammar.char_indices().collect();
    let mut top: Vec<Element> = Vec::new();
    let mut group: Option<(usize, Vec<Element>)> = None;
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '[' => {
                if group.is_some() {
                    return Err(GrammarError::syntax(pos, "nested optional group"));
                }
                group = Some((pos, Vec::new()));
                i += 1;
            }
            ']' => {
                let Some((_, items)) = group.take() else {
                    return Err(GrammarError::syntax(pos, "unmatched ']'"));
                };
                if items.is_empty() {
                    return Err(GrammarError::syntax(pos, "empty optional group"));
                }
                top.push(Element::Optional(items));
                i += 1;
            }
            '{' => {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && chars[j].1 != '}' {
                    j += 1;
                }
                if j == chars.len() {
                    return Err(GrammarError::syntax(pos, "unterminated slot"));
                }
                let name: String = chars[start..j].iter().map(|(_, c)| *c).collect();
                if !is_identifier(&name) {
                    return Err(GrammarError::syntax(pos, format!("invalid slot name '{name}'")));
                }
                let target = match group.as_mut() {
                    Some((_, items)) => items,
                    None => &mut top,
                };
                target.push(Element::Slot(name));
                i = j + 1;
            }
            '}' => return Err(GrammarError::syntax(pos, "unmatched '}'")),
            _ => {
                let mut j = i;
                while j < chars.len() && !chars[j].1.is_whitespace() && !"[]{}".contains(chars[j].1) {
                    j += 1;
                }
                let word: String = chars[i..j].iter().map(|(_, c)| *c).collect();
                if tokenize(&word) != [word.clone()] {
                    return Err(GrammarError::syntax(pos, format!("literal '{word}' is not a normalized word")));
                }
                let target = match group.as_mut() {
                    Some((_, items)) => items,
                    None => &mut top,
                };
                target.push(Element::Literal(word));
                i = j;
            }
        }
    }
    if let Some((pos, _)) = group {
        return Err(GrammarError::syntax(pos, "unterminated optional group"));
    }
    if top.is_empty() {
        return Err(GrammarError::Empty);
    }
    Ok(top)
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A block opcode with typed slot values, ready to be placed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockInstantiation {
    pub opcode: String,
    pub slot_values: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub used_defaults: BTreeSet<String>,
}

impl BlockInstantiation {
    /// Every slot filled from its shadow default (or first dropdown option).
    pub fn with_defaults(spec: &BlockSpec) -> BlockInstantiation {
        let mut slot_values = BTreeMap::new();
        let mut used_defaults = BTreeSet::new();
        for slot in &spec.slots {
            slot_values.insert(slot.name.clone(), default_value(slot));
            used_defaults.insert(slot.name.clone());
        }
        BlockInstantiation { opcode: spec.opcode.clone(), slot_values, used_defaults }
    }
}

fn default_value(slot: &SlotSpec) -> Value {
    match (&slot.default, slot.options.first()) {
        (Some(v), _) => v.clone(),
        (None, Some(first)) => Value::Text(first.clone()),
        (None, None) => Value::Text(slot.name.clone()),
    }
}

#[derive(Clone, Debug)]
pub struct CompiledGrammar {
    pub opcode: String,
    pub language: Language,
    pub pattern: String,
    pub slot_order: Vec<String>,
    regex: Regex,
    slots: Vec<SlotSpec>,
    elements: Vec<Element>,
}

/// Result of matching a remainder against one grammar.
#[derive(Clone, Debug, PartialEq)]
pub struct GrammarMatch {
    pub instantiation: BlockInstantiation,
    /// Remainder tokens consumed by literals rather than slots.
    pub literal_tokens: usize,
}

pub fn compile(spec: &BlockSpec, language: Language) -> Result<CompiledGrammar, GrammarError> {
    let text = spec.grammar.get(&language).ok_or(GrammarError::Empty)?;
    let elements = parse(text)?;

    // Each declared slot exactly once, nothing undeclared.
    let mut seen = BTreeSet::new();
    let mut slot_order = Vec::new();
    let mut optional_slots = BTreeSet::new();
    let mut check = |name: &str, optional: bool| -> Result<(), GrammarError> {
        let position = text.find(&format!("{{{name}}}")).unwrap_or(0);
        if spec.slot(name).is_none() {
            return Err(GrammarError::UnknownSlot { slot: name.to_string(), position });
        }
        if !seen.insert(name.to_string()) {
            let second = text[position + 1..].find(&format!("{{{name}}}")).map_or(position, |p| p + position + 1);
            return Err(GrammarError::DuplicateSlot { slot: name.to_string(), position: second });
        }
        slot_order.push(name.to_string());
        if optional {
            optional_slots.insert(name.to_string());
        }
        Ok(())
    };
    for el in &elements {
        match el {
            Element::Slot(name) => check(name, false)?,
            Element::Optional(items) => {
                for item in items {
                    if let Element::Slot(name) = item {
                        check(name, true)?;
                    }
                }
            }
            Element::Literal(_) => {}
        }
    }
    for slot in &spec.slots {
        if !seen.contains(&slot.name) {
            return Err(GrammarError::UnusedSlot { slot: slot.name.clone() });
        }
        if optional_slots.contains(&slot.name) && slot.default.is_none() && slot.options.is_empty() {
            return Err(GrammarError::OptionalWithoutDefault { slot: slot.name.clone() });
        }
    }

    let mut pattern = String::from("^");
    for el in &elements {
        push_element(&mut pattern, el, spec);
    }
    pattern.push('$');
    let regex = Regex::new(&pattern).map_err(|e| GrammarError::Regex(e.to_string()))?;
    Ok(CompiledGrammar {
        opcode: spec.opcode.clone(),
        language,
        pattern,
        slot_order,
        regex,
        slots: spec.slots.clone(),
        elements,
    })
}

// Every element consumes its own leading space; the haystack is the
// remainder with a space before each token.
fn push_element(out: &mut String, el: &Element, spec: &BlockSpec) {
    match el {
        Element::Literal(word) => {
            out.push(' ');
            out.push_str(&regex_syntax::escape(word));
        }
        Element::Slot(name) => {
            let slot = spec.slot(name).expect("slot checked");
            out.push_str(" (?P<");
            out.push_str(name);
            out.push('>');
            out.push_str(&slot_pattern(slot));
            out.push(')');
        }
        Element::Optional(items) => {
            out.push_str("(?:");
            for item in items {
                push_element(out, item, spec);
            }
            out.push_str(")?");
        }
    }
}

fn slot_pattern(slot: &SlotSpec) -> String {
    match slot.kind {
        SlotKind::Number => String::from(r"-?[0-9]+(?:\.[0-9]+)?"),
        SlotKind::Text | SlotKind::VariableRef | SlotKind::ReporterRef => String::from(r"[^ ]+(?: [^ ]+)*?"),
        SlotKind::Dropdown => {
            let mut options: Vec<String> = slot.options.iter().map(|o| tokenize(o).join(" ")).collect();
            // Longest first so leftmost-first matching prefers "up arrow" over "up".
            options.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
            let alts: Vec<String> = options.iter().map(|o| regex_syntax::escape(o)).collect();
            format!("(?:{})", alts.join("|"))
        }
    }
}

impl CompiledGrammar {
    pub fn match_tokens(&self, tokens: &[String]) -> Option<GrammarMatch> {
        let mut haystack = String::new();
        for t in tokens {
            haystack.push(' ');
            haystack.push_str(t);
        }
        let mut caps = self.regex.create_captures();
        self.regex.captures(haystack.as_str(), &mut caps);
        if !caps.is_match() {
            return None;
        }
        let mut slot_values = BTreeMap::new();
        let mut used_defaults = BTreeSet::new();
        let mut slot_tokens = 0;
        for slot in &self.slots {
            match caps.get_group_by_name(&slot.name) {
                Some(span) => {
                    let text = &haystack[span.start..span.end];
                    slot_tokens += text.split(' ').count();
                    slot_values.insert(slot.name.clone(), typed_value(slot, text)?);
                }
                None => {
                    slot_values.insert(slot.name.clone(), default_value(slot));
                    used_defaults.insert(slot.name.clone());
                }
            }
        }
        Some(GrammarMatch {
            instantiation: BlockInstantiation { opcode: self.opcode.clone(), slot_values, used_defaults },
            literal_tokens: tokens.len() - slot_tokens,
        })
    }

    /// All phrasings of this block for the given slot values: every optional
    /// group in or out, except that a group holding a slot whose value is not
    /// the default must be spoken.
    pub fn realizations(&self, values: &BTreeMap<String, Value>) -> Vec<String> {
        let value_of = |name: &str| {
            let slot = self.slots.iter().find(|s| s.name == name).expect("slot known");
            values.get(name).cloned().unwrap_or_else(|| default_value(slot))
        };
        let mut phrases: Vec<Vec<String>> = alloc::vec![Vec::new()];
        for el in &self.elements {
            match el {
                Element::Literal(w) => phrases.iter_mut().for_each(|p| p.push(w.clone())),
                Element::Slot(name) => {
                    let v = spoken(&value_of(name));
                    phrases.iter_mut().for_each(|p| p.push(v.clone()));
                }
                Element::Optional(items) => {
                    let mut spoken_group = Vec::new();
                    let mut may_skip = true;
                    for item in items {
                        match item {
                            Element::Literal(w) => spoken_group.push(w.clone()),
                            Element::Slot(name) => {
                                let slot = self.slots.iter().find(|s| s.name == *name).expect("slot known");
                                let v = value_of(name);
                                if v != default_value(slot) {
                                    may_skip = false;
                                }
                                spoken_group.push(spoken(&v));
                            }
                            Element::Optional(_) => unreachable!("groups do not nest"),
                        }
                    }
                    let mut next = Vec::with_capacity(phrases.len() * 2);
                    for p in phrases {
                        if may_skip {
                            next.push(p.clone());
                        }
                        let mut with = p;
                        with.extend(spoken_group.iter().cloned());
                        next.push(with);
                    }
                    phrases = next;
                }
            }
        }
        let mut out: Vec<String> = phrases.into_iter().map(|p| p.join(" ")).collect();
        out.sort();
        out.dedup();
        out
    }

    /// Literals plus slot defaults, optional groups included.
    pub fn canonical_utterance(&self) -> String {
        self.render(&BTreeMap::new())
    }

    /// The full phrase (optional groups included) for the given values,
    /// falling back to defaults for missing slots.
    pub fn render(&self, values: &BTreeMap<String, Value>) -> String {
        let mut words = Vec::new();
        let walk = |el: &Element, words: &mut Vec<String>| match el {
            Element::Literal(w) => words.push(w.clone()),
            Element::Slot(name) => {
                let slot = self.slots.iter().find(|s| s.name == *name).expect("slot known");
                words.push(spoken(values.get(name).unwrap_or(&default_value(slot))));
            }
            Element::Optional(_) => {}
        };
        for el in &self.elements {
            match el {
                Element::Optional(items) => items.iter().for_each(|i| walk(i, &mut words)),
                other => walk(other, &mut words),
            }
        }
        words.join(" ")
    }
}

fn spoken(value: &Value) -> String {
    tokenize(&value.to_string()).join(" ")
}

fn typed_value(slot: &SlotSpec, text: &str) -> Option<Value> {
    match slot.kind {
        SlotKind::Number => parse_number(text).map(Value::Number),
        SlotKind::Dropdown => slot
            .options
            .iter()
            .find(|o| tokenize(o).join(" ") == text)
            .map(|o| Value::Text(o.clone())),
        SlotKind::Text | SlotKind::VariableRef | SlotKind::ReporterRef => Some(Value::Text(text.to_string())),
    }
}

/// Canonical phrase for a block, see [`CompiledGrammar::canonical_utterance`].
pub fn canonical_utterance(spec: &BlockSpec, language: Language) -> Result<String, GrammarError> {
    Ok(compile(spec, language)?.canonical_utterance())
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("no block grammar matches \"{remainder}\"")]
pub struct NoBlockMatch {
    pub remainder: String,
}

/// Every block grammar of one language, compiled once.
#[derive(Clone, Debug)]
pub struct CompiledCatalog {
    pub language: Language,
    grammars: Vec<CompiledGrammar>,
}

impl CompiledCatalog {
    pub fn new(catalog: &BlockCatalog, language: Language) -> Result<Self, ValidationError> {
        let grammars = catalog
            .blocks
            .iter()
            .map(|b| {
                compile(b, language).map_err(|error| ValidationError::Grammar {
                    opcode: b.opcode.clone(),
                    language,
                    grammar: b.grammar.get(&language).cloned().unwrap_or_default(),
                    error,
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(CompiledCatalog { language, grammars })
    }

    pub fn grammar(&self, opcode: &str) -> Option<&CompiledGrammar> {
        self.grammars.iter().find(|g| g.opcode == opcode)
    }

    pub fn grammars(&self) -> &[CompiledGrammar] {
        &self.grammars
    }

    /// All blocks whose grammar matches the whole remainder. Ranked by literal
    /// tokens matched (more first), then defaults used (fewer first), then
    /// catalog order.
    pub fn parse_remainder(&self, remainder: &[String]) -> Result<Vec<BlockInstantiation>, NoBlockMatch> {
        let mut hits: Vec<(usize, GrammarMatch)> = self
            .grammars
            .iter()
            .enumerate()
            .filter_map(|(i, g)| g.match_tokens(remainder).map(|m| (i, m)))
            .collect();
        if hits.is_empty() {
            return Err(NoBlockMatch { remainder: remainder.join(" ") });
        }
        hits.sort_by(|(ia, a), (ib, b)| {
            b.literal_tokens
                .cmp(&a.literal_tokens)
                .then(a.instantiation.used_defaults.len().cmp(&b.instantiation.used_defaults.len()))
                .then(ia.cmp(ib))
        });
        Ok(hits.into_iter().map(|(_, m)| m.instantiation).collect())
    }
}
