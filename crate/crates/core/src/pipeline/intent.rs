//! Turning a matched command and its remainder into a concrete action on the
//! current workspace.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{Category, Command, LanguagePack, OverlayMode, SlotKind};
use crate::grammar::{BlockInstantiation, CompiledCatalog};
use crate::matcher::{compare_results, Hypothesis, MatchResult, Matcher, Tier};
use crate::textnorm::tokenize;
use crate::value::{parse_number, Value};
use crate::workspace::overlay::{ElementRef, OverlayMap};
use crate::workspace::{BlockId, Position, SpriteId, VariableScope, Workspace, WorkspaceError};

/// Something the session can do. Voice commands are interpreted into
/// actions; UI clients send them directly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    Place {
        block: BlockInstantiation,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        at: Option<Position>,
    },
    Delete { block: BlockId },
    /// What a mouse click on the element would do.
    Activate { element: ElementRef },
    Focus { block: Option<BlockId> },
    SelectSprite { sprite: SpriteId },
    AddSprite {
        #[serde(default)]
        name: Option<String>,
    },
    SetInput { block: BlockId, slot: String, value: Value },
    SetVariable { name: String, value: Value },
    Connect { upper: BlockId, lower: BlockId },
    Nest { container: BlockId, child: BlockId },
    CreateVariable {
        name: String,
        #[serde(default = "global")]
        scope: VariableScope,
    },
    OpenCategory { category: Option<Category> },
    SetOverlayMode { mode: OverlayMode },
    Undo,
    Redo,
    StartListening,
    StopListening,
}

fn global() -> VariableScope {
    VariableScope::Global
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum IntentError {
    #[error("say what to {0}")]
    MissingArgument(Command),
    #[error("no block matches '{0}'")]
    NoBlockMatch(String),
    #[error("number {number} cannot be used with '{command}'")]
    WrongTarget { number: u32, command: Command },
    #[error("nothing on screen is called '{0}'")]
    UnknownTarget(String),
    #[error("say what to set and the new value, for example 'set steps to 50'")]
    MalformedSet,
    #[error("say which blocks to connect, for example 'connect 5 to 3'")]
    MalformedConnect,
    #[error("'{value}' is not a number")]
    NotANumber { value: String },
    #[error("unknown category '{0}'")]
    UnknownCategory(String),
    #[error("unknown overlay mode '{0}'")]
    UnknownMode(String),
    #[error(transparent)]
    Workspace(#[from] WorkspaceError),
}

/// What an interpretation may look at.
pub struct Context<'a> {
    pub pack: &'a LanguagePack,
    pub grammars: &'a CompiledCatalog,
    pub workspace: &'a Workspace,
    pub overlay: &'a OverlayMap,
    /// Generation of the display the speaker was looking at.
    pub seen_generation: u64,
}

/// Matcher candidates plus one synthetic candidate per hypothesis that is a
/// bare number: "place N" while a palette is open, otherwise "click N".
pub fn candidates(matcher: &Matcher, event: &[Hypothesis], palette_open: bool) -> Vec<MatchResult> {
    let mut out = matcher.match_command(event).unwrap_or_default();
    for hyp in event {
        let tokens = matcher.normalize(&hyp.text).numbers_resolved;
        if let [n] = tokens.as_slice() {
            if overlay_number(n).is_some() {
                out.push(MatchResult {
                    command: if palette_open { Command::Place } else { Command::Click },
                    alias: String::new(),
                    remainder: tokens.clone(),
                    tier: Tier::Exact,
                    match_score: 1.0,
                    confidence: hyp.weight(),
                    source_hypothesis: hyp.rank,
                });
            }
        }
    }
    out.sort_by(compare_results);
    out
}

fn overlay_number(token: &str) -> Option<u32> {
    if token.bytes().all(|b| b.is_ascii_digit()) {
        token.parse().ok()
    } else {
        None
    }
}

fn single_number(tokens: &[String]) -> Option<u32> {
    match tokens {
        [t] => overlay_number(t),
        _ => None,
    }
}

/// Spelling-insensitive key for comparing spoken words with on-screen text.
fn key(words: &[String]) -> String {
    words.concat()
}

fn find_phrase(tokens: &[String], phrases: &[String], from: usize) -> Option<(usize, usize)> {
    (from..tokens.len()).find_map(|i| {
        phrases.iter().map(|p| tokenize(p)).find(|p| !p.is_empty() && tokens[i..].starts_with(p)).map(|p| (i, p.len()))
    })
}

impl Context<'_> {
    fn resolve(&self, number: u32) -> Result<ElementRef, IntentError> {
        Ok(self.overlay.resolve(number, self.seen_generation)?.clone())
    }

    /// An element by its spoken overlay number or its visible text.
    fn element(&self, words: &[String]) -> Result<ElementRef, IntentError> {
        if let Some(n) = single_number(words) {
            return self.resolve(n);
        }
        let wanted = key(words);
        let by_label = self.overlay.labels.iter().find(|l| key(&tokenize(&l.text)) == wanted).map(|l| l.element.clone());
        let by_sprite = || {
            let ws = self.workspace;
            ws.project().sprites.iter().find(|s| key(&tokenize(&s.name)) == wanted).map(|s| ElementRef::Sprite(s.id))
        };
        by_label.or_else(by_sprite).ok_or_else(|| IntentError::UnknownTarget(words.join(" ")))
    }

    fn block(&self, words: &[String], command: Command) -> Result<BlockId, IntentError> {
        match self.element(words)? {
            ElementRef::Block(id) => Ok(id),
            _ => Err(match single_number(words) {
                Some(number) => IntentError::WrongTarget { number, command },
                None => IntentError::UnknownTarget(words.join(" ")),
            }),
        }
    }

    /// Every reading of the candidate, best first. Only placements can have
    /// more than one.
    pub fn interpret(&self, candidate: &MatchResult) -> Result<Vec<Action>, IntentError> {
        let rest = candidate.remainder.as_slice();
        let command = candidate.command;
        let one = |a: Action| Ok(vec![a]);
        match command {
            Command::Place => {
                if rest.is_empty() {
                    return Err(IntentError::MissingArgument(command));
                }
                if let Some(number) = single_number(rest) {
                    return match self.resolve(number)? {
                        ElementRef::Palette(opcode) => {
                            let spec = self.workspace.spec(&opcode).ok_or(WorkspaceError::UnknownOpcode(opcode))?;
                            one(Action::Place { block: BlockInstantiation::with_defaults(spec), at: None })
                        }
                        _ => Err(IntentError::WrongTarget { number, command }),
                    };
                }
                let parses = self.grammars.parse_remainder(rest).map_err(|e| IntentError::NoBlockMatch(e.remainder))?;
                Ok(parses.into_iter().map(|block| Action::Place { block, at: None }).collect())
            }
            Command::Delete => match (rest.is_empty(), self.workspace.view().focused_block) {
                (true, Some(block)) => one(Action::Delete { block }),
                (true, None) => Err(WorkspaceError::NoFocus.into()),
                (false, _) => one(Action::Delete { block: self.block(rest, command)? }),
            },
            Command::Click | Command::Select => {
                if rest.is_empty() {
                    return Err(IntentError::MissingArgument(command));
                }
                one(Action::Activate { element: self.element(rest)? })
            }
            Command::Set => self.interpret_set(rest).map(|a| vec![a]),
            Command::Connect => self.interpret_connect(rest).map(|a| vec![a]),
            Command::CreateVariable => {
                if rest.is_empty() {
                    return Err(IntentError::MissingArgument(command));
                }
                one(Action::CreateVariable { name: rest.join(" "), scope: VariableScope::Global })
            }
            Command::Open => {
                if rest.is_empty() {
                    return Err(IntentError::MissingArgument(command));
                }
                if let Some(number) = single_number(rest) {
                    return match self.resolve(number)? {
                        ElementRef::Control(crate::workspace::overlay::UiControl::Category(c)) => {
                            one(Action::OpenCategory { category: Some(c) })
                        }
                        _ => Err(IntentError::WrongTarget { number, command }),
                    };
                }
                let spoken = rest.join(" ");
                let category = self.pack.keywords.categories.iter().find(|(_, names)| names.contains(&spoken));
                match category {
                    Some((c, _)) => one(Action::OpenCategory { category: Some(*c) }),
                    None => Err(IntentError::UnknownCategory(spoken)),
                }
            }
            Command::Mode => {
                let spoken = rest.join(" ");
                let mode = self.pack.keywords.overlay_modes.iter().find(|(_, names)| names.contains(&spoken));
                match mode {
                    Some((m, _)) => one(Action::SetOverlayMode { mode: *m }),
                    None if rest.is_empty() => Err(IntentError::MissingArgument(command)),
                    None => Err(IntentError::UnknownMode(spoken)),
                }
            }
            Command::Undo => one(Action::Undo),
            Command::Redo => one(Action::Redo),
            Command::StartListening => one(Action::StartListening),
            Command::StopListening => one(Action::StopListening),
        }
    }

    /// "set <slot> to <value>" on the focused block, "set <n> to <value>"
    /// on a one-input block, otherwise "set <variable> to <value>".
    fn interpret_set(&self, rest: &[String]) -> Result<Action, IntentError> {
        let (at, len) = find_phrase(rest, &self.pack.keywords.assign, 1).ok_or(IntentError::MalformedSet)?;
        let (target, value) = (&rest[..at], &rest[at + len..]);
        if value.is_empty() {
            return Err(IntentError::MalformedSet);
        }
        let ws = self.workspace;
        let slot_of = |block: BlockId, name: Option<&str>| {
            let spec = ws.block(block).and_then(|b| ws.spec(&b.opcode))?;
            match name {
                Some(n) => spec.slots.iter().find(|s| key(&tokenize(&s.name.replace('_', " "))) == n),
                None if spec.slots.len() == 1 => spec.slots.first(),
                None => None,
            }
        };
        let target_key = key(target);
        let hit = match (single_number(target), ws.view().focused_block) {
            (Some(_), _) => {
                let block = self.block(target, Command::Set)?;
                slot_of(block, None).map(|s| (block, s))
            }
            (None, Some(block)) => slot_of(block, Some(&target_key)).map(|s| (block, s)),
            (None, None) => None,
        };
        if let Some((block, slot)) = hit {
            let text = value.join(" ");
            let value = match slot.kind {
                SlotKind::Number => {
                    let n = single_number_value(value).ok_or(IntentError::NotANumber { value: text })?;
                    Value::Number(n)
                }
                _ => Value::Text(text),
            };
            return Ok(Action::SetInput { block, slot: slot.name.clone(), value });
        }
        let name = target.join(" ");
        if ws.variable(&name).is_some() {
            return Ok(Action::SetVariable { name, value: Value::from_spoken(&value.join(" ")) });
        }
        Err(IntentError::UnknownTarget(name))
    }

    /// "connect A to B" puts block A below block B. With one block named,
    /// it goes below the focused block.
    fn interpret_connect(&self, rest: &[String]) -> Result<Action, IntentError> {
        if let Some((at, len)) = find_phrase(rest, &self.pack.keywords.link, 1) {
            let lower = self.block(&rest[..at], Command::Connect)?;
            let upper = self.block(&rest[at + len..], Command::Connect)?;
            return Ok(Action::Connect { upper, lower });
        }
        match rest {
            [a, b] if overlay_number(a).is_some() && overlay_number(b).is_some() => Ok(Action::Connect {
                upper: self.block(core::slice::from_ref(b), Command::Connect)?,
                lower: self.block(core::slice::from_ref(a), Command::Connect)?,
            }),
            [_] => {
                let upper = ws_focus(self.workspace)?;
                Ok(Action::Connect { upper, lower: self.block(rest, Command::Connect)? })
            }
            _ => Err(IntentError::MalformedConnect),
        }
    }
}

fn ws_focus(ws: &Workspace) -> Result<BlockId, IntentError> {
    ws.view().focused_block.ok_or(IntentError::Workspace(WorkspaceError::NoFocus))
}

fn single_number_value(tokens: &[String]) -> Option<f64> {
    match tokens {
        [t] => parse_number(t),
        _ => None,
    }
}

/// Fills unset slots of a directly supplied instantiation from defaults.
pub fn complete(mut inst: BlockInstantiation, ws: &Workspace) -> BlockInstantiation {
    if let Some(spec) = ws.spec(&inst.opcode) {
        for (name, value) in BlockInstantiation::with_defaults(spec).slot_values {
            if !inst.slot_values.contains_key(&name) {
                inst.slot_values.insert(name.clone(), value);
                inst.used_defaults.insert(name);
            }
        }
    }
    inst
}
