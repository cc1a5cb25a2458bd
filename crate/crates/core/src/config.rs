//! Externally configurable data: command vocabulary per language, the block
//! catalog with grammars and shadow defaults, and engine settings.
//!
//! All three documents are JSON. The core only parses and validates text; the
//! `blockvoice` crate reads the files. A default configuration is embedded and
//! available through [`Config::bundled`].

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grammar::{self, GrammarError};
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    En,
    De,
}

impl Language {
    pub const ALL: [Language; 2] = [Language::En, Language::De];

    pub fn code(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::De => "de",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Language {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "en" => Ok(Language::En),
            "de" => Ok(Language::De),
            other => Err(format!("unknown language '{other}' (expected en or de)")),
        }
    }
}

/// Canonical command ids. Every command has a handler in the pipeline, so the
/// vocabulary files can only attach aliases to these.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Place,
    Delete,
    Click,
    Select,
    Set,
    Connect,
    CreateVariable,
    Open,
    Mode,
    Undo,
    Redo,
    StartListening,
    StopListening,
}

impl Command {
    pub fn id(self) -> &'static str {
        match self {
            Command::Place => "place",
            Command::Delete => "delete",
            Command::Click => "click",
            Command::Select => "select",
            Command::Set => "set",
            Command::Connect => "connect",
            Command::CreateVariable => "create_variable",
            Command::Open => "open",
            Command::Mode => "mode",
            Command::Undo => "undo",
            Command::Redo => "redo",
            Command::StartListening => "start_listening",
            Command::StopListening => "stop_listening",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| format!("unknown command '{s}'"))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfirmationWords {
    pub accept: Vec<String>,
    pub reject: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LanguagePack {
    pub language: Language,
    pub commands: BTreeMap<Command, Vec<String>>,
    pub number_words: BTreeMap<String, i64>,
    pub confirmation: ConfirmationWords,
    #[serde(default)]
    pub keywords: Keywords,
}

/// Function words used when reading command remainders.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Keywords {
    /// Separates a target from its new value: "set steps *to* 50".
    pub assign: Vec<String>,
    /// Separates two blocks being connected: "connect 5 *to* 3".
    pub link: Vec<String>,
    pub categories: BTreeMap<Category, Vec<String>>,
    pub overlay_modes: BTreeMap<OverlayMode, Vec<String>>,
}

impl Keywords {
    fn phrases(&self) -> impl Iterator<Item = &String> {
        self.assign
            .iter()
            .chain(&self.link)
            .chain(self.categories.values().flatten())
            .chain(self.overlay_modes.values().flatten())
    }
}

impl LanguagePack {
    /// Primary (first-listed) alias of a command.
    pub fn primary_alias(&self, command: Command) -> Option<&str> {
        self.commands.get(&command).and_then(|a| a.first()).map(String::as_str)
    }

    pub fn aliases(&self) -> impl Iterator<Item = (Command, &str)> {
        self.commands
            .iter()
            .flat_map(|(c, aliases)| aliases.iter().map(move |a| (*c, a.as_str())))
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        let lang = self.language;
        let mut owner: BTreeMap<&str, Command> = BTreeMap::new();
        for (command, aliases) in &self.commands {
            if aliases.is_empty() {
                return Err(ValidationError::NoAliases { language: lang, command: *command });
            }
            for alias in aliases {
                check_phrase(alias).map_err(|reason| ValidationError::MalformedAlias {
                    language: lang,
                    alias: alias.clone(),
                    reason,
                })?;
                if let Some(prev) = owner.insert(alias.as_str(), *command) {
                    if prev != *command {
                        return Err(ValidationError::DuplicateAlias {
                            language: lang,
                            alias: alias.clone(),
                            first: prev,
                            second: *command,
                        });
                    }
                }
            }
        }
        for word in self.number_words.keys() {
            if word.is_empty() || word.contains(char::is_whitespace) || *word != word.to_lowercase() {
                return Err(ValidationError::MalformedNumberWord { language: lang, word: word.clone() });
            }
        }
        let accept: BTreeSet<&str> = self.confirmation.accept.iter().map(String::as_str).collect();
        for phrase in self.confirmation.accept.iter().chain(&self.confirmation.reject) {
            check_phrase(phrase).map_err(|reason| ValidationError::MalformedAlias {
                language: lang,
                alias: phrase.clone(),
                reason,
            })?;
        }
        for phrase in self.keywords.phrases() {
            check_phrase(phrase).map_err(|reason| ValidationError::MalformedAlias {
                language: lang,
                alias: phrase.clone(),
                reason,
            })?;
        }
        if self.confirmation.accept.is_empty() || self.confirmation.reject.is_empty() {
            return Err(ValidationError::MissingConfirmationWords { language: lang });
        }
        if let Some(both) = self.confirmation.reject.iter().find(|r| accept.contains(r.as_str())) {
            return Err(ValidationError::AmbiguousConfirmation { language: lang, word: both.clone() });
        }
        Ok(())
    }
}

fn check_phrase(phrase: &str) -> Result<(), &'static str> {
    if phrase.trim().is_empty() {
        return Err("empty");
    }
    if phrase != phrase.to_lowercase() {
        return Err("not lowercase");
    }
    let collapsed: Vec<&str> = phrase.split_whitespace().collect();
    if collapsed.join(" ") != phrase {
        return Err("whitespace not normalized");
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Motion,
    Looks,
    Events,
    Control,
    Variables,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::Motion,
        Category::Looks,
        Category::Events,
        Category::Control,
        Category::Variables,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Motion => "motion",
            Category::Looks => "looks",
            Category::Events => "events",
            Category::Control => "control",
            Category::Variables => "variables",
        }
    }
}

/// Connection shape of a block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Hat,
    Stack,
    Cap,
    CBlock,
    CapCBlock,
    Reporter,
}

impl Shape {
    /// Can be attached below another block.
    pub fn has_previous(self) -> bool {
        matches!(self, Shape::Stack | Shape::Cap | Shape::CBlock | Shape::CapCBlock)
    }

    /// Accepts a block below it.
    pub fn has_next(self) -> bool {
        matches!(self, Shape::Hat | Shape::Stack | Shape::CBlock)
    }

    pub fn has_substack(self) -> bool {
        matches!(self, Shape::CBlock | Shape::CapCBlock)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotKind {
    Number,
    Text,
    Dropdown,
    VariableRef,
    ReporterRef,
}

fn default_true() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlotSpec {
    pub name: String,
    #[serde(rename = "type")]
    pub kind: SlotKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub options: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<Value>,
    /// `false` declares a field without a shadow placeholder (variable pickers).
    #[serde(default = "default_true", skip_serializing_if = "is_true")]
    pub shadow: bool,
}

impl SlotSpec {
    /// Whether `value` is a legal content for this slot.
    pub fn accepts(&self, value: &Value) -> bool {
        match (self.kind, value) {
            (SlotKind::Number, Value::Number(n)) => n.is_finite(),
            (SlotKind::Number, Value::Text(_)) => false,
            (SlotKind::Text, Value::Text(_)) => true,
            (SlotKind::Text, Value::Number(n)) => n.is_finite(),
            (SlotKind::Dropdown, Value::Text(t)) => self.options.iter().any(|o| o == t),
            (SlotKind::VariableRef | SlotKind::ReporterRef, Value::Text(t)) => !t.trim().is_empty(),
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    pub opcode: String,
    pub category: Category,
    pub shape: Shape,
    #[serde(default)]
    pub slots: Vec<SlotSpec>,
    pub grammar: BTreeMap<Language, String>,
}

impl BlockSpec {
    pub fn slot(&self, name: &str) -> Option<&SlotSpec> {
        self.slots.iter().find(|s| s.name == name)
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        let opcode = || self.opcode.clone();
        if self.opcode.is_empty() {
            return Err(ValidationError::EmptyOpcode);
        }
        let mut names = BTreeSet::new();
        for slot in &self.slots {
            if !names.insert(slot.name.as_str()) {
                return Err(ValidationError::DuplicateSlot { opcode: opcode(), slot: slot.name.clone() });
            }
            if slot.kind == SlotKind::Dropdown && slot.options.is_empty() {
                return Err(ValidationError::EmptyDropdown { opcode: opcode(), slot: slot.name.clone() });
            }
            if slot.kind != SlotKind::Dropdown && !slot.options.is_empty() {
                return Err(ValidationError::UnexpectedOptions { opcode: opcode(), slot: slot.name.clone() });
            }
            match (&slot.default, slot.shadow) {
                (None, true) => {
                    return Err(ValidationError::MissingShadowDefault { opcode: opcode(), slot: slot.name.clone() })
                }
                (Some(v), _) if !slot.accepts(v) => {
                    return Err(ValidationError::DefaultTypeMismatch { opcode: opcode(), slot: slot.name.clone() })
                }
                _ => {}
            }
        }
        if self.grammar.is_empty() {
            return Err(ValidationError::MissingGrammar { opcode: opcode(), language: None });
        }
        for (lang, text) in &self.grammar {
            grammar::compile(self, *lang).map_err(|error| ValidationError::Grammar {
                opcode: opcode(),
                language: *lang,
                grammar: text.clone(),
                error,
            })?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockCatalog {
    pub blocks: Vec<BlockSpec>,
}

impl BlockCatalog {
    pub fn get(&self, opcode: &str) -> Option<&BlockSpec> {
        self.blocks.iter().find(|b| b.opcode == opcode)
    }

    pub fn index_of(&self, opcode: &str) -> Option<usize> {
        self.blocks.iter().position(|b| b.opcode == opcode)
    }

    pub fn in_category(&self, category: Category) -> impl Iterator<Item = &BlockSpec> {
        self.blocks.iter().filter(move |b| b.category == category)
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        let mut seen = BTreeSet::new();
        for block in &self.blocks {
            if !seen.insert(block.opcode.as_str()) {
                return Err(ValidationError::DuplicateOpcode { opcode: block.opcode.clone() });
            }
            block.validate()?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlayMode {
    #[default]
    Combined,
    Smart,
    Numerical,
}

impl FromStr for OverlayMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "combined" => Ok(OverlayMode::Combined),
            "smart" => Ok(OverlayMode::Smart),
            "numerical" => Ok(OverlayMode::Numerical),
            _ => Err(format!("unknown overlay mode '{s}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TalkMode {
    #[default]
    PushToTalk,
    ToggleToTalk,
    Continuous,
}

impl FromStr for TalkMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "push_to_talk" => Ok(TalkMode::PushToTalk),
            "toggle_to_talk" => Ok(TalkMode::ToggleToTalk),
            "continuous" => Ok(TalkMode::Continuous),
            _ => Err(format!("unknown talk mode '{s}'")),
        }
    }
}

/// Thresholds, timers and modes. Durations are milliseconds of logical time.
///
/// Routing is `c >= t_execute` execute, `t_confirm <= c < t_execute` confirm,
/// `c < t_confirm` reject.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineSettings {
    pub t_execute: f64,
    pub t_confirm: f64,
    pub confirmation_timeout_ms: u64,
    pub feedback_duration_ms: u64,
    pub silence_timeout_ms: u64,
    pub overlay_mode: OverlayMode,
    pub talk_mode: TalkMode,
    pub fuzzy_floor: f64,
    pub undo_depth: usize,
}

impl Default for EngineSettings {
    fn default() -> Self {
        EngineSettings {
            t_execute: 0.85,
            t_confirm: 0.50,
            confirmation_timeout_ms: 10_000,
            feedback_duration_ms: 3_000,
            silence_timeout_ms: 5_000,
            overlay_mode: OverlayMode::Combined,
            talk_mode: TalkMode::PushToTalk,
            fuzzy_floor: 0.6,
            undo_depth: 100,
        }
    }
}

impl EngineSettings {
    pub fn validate(&self) -> Result<(), ValidationError> {
        validate_thresholds(self)?;
        for (field, v) in [
            ("confirmation_timeout_ms", self.confirmation_timeout_ms),
            ("feedback_duration_ms", self.feedback_duration_ms),
            ("silence_timeout_ms", self.silence_timeout_ms),
        ] {
            if v == 0 {
                return Err(ValidationError::NonPositiveDuration { field });
            }
        }
        if !(self.fuzzy_floor > 0.0 && self.fuzzy_floor <= 1.0) {
            return Err(ValidationError::FuzzyFloor { value: self.fuzzy_floor });
        }
        if self.undo_depth == 0 {
            return Err(ValidationError::UndoDepth);
        }
        Ok(())
    }
}

/// Ok iff `0 <= t_confirm <= t_execute <= 1`.
pub fn validate_thresholds(settings: &EngineSettings) -> Result<(), ValidationError> {
    let (c, e) = (settings.t_confirm, settings.t_execute);
    if (0.0..=1.0).contains(&c) && (0.0..=1.0).contains(&e) && c <= e {
        Ok(())
    } else {
        Err(ValidationError::Thresholds { t_confirm: c, t_execute: e })
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ValidationError {
    #[error("duplicate alias '{alias}' ({language}): maps to both '{first}' and '{second}'")]
    DuplicateAlias { language: Language, alias: String, first: Command, second: Command },
    #[error("command '{command}' ({language}) has no aliases")]
    NoAliases { language: Language, command: Command },
    #[error("malformed phrase '{alias}' ({language}): {reason}")]
    MalformedAlias { language: Language, alias: String, reason: &'static str },
    #[error("malformed number word '{word}' ({language})")]
    MalformedNumberWord { language: Language, word: String },
    #[error("confirmation words missing for {language}")]
    MissingConfirmationWords { language: Language },
    #[error("'{word}' ({language}) is both an accept and a reject word")]
    AmbiguousConfirmation { language: Language, word: String },
    #[error("language pack for {0} defined twice")]
    DuplicateLanguage(Language),
    #[error("no language packs configured")]
    NoLanguages,
    #[error("block opcode is empty")]
    EmptyOpcode,
    #[error("duplicate block opcode '{opcode}'")]
    DuplicateOpcode { opcode: String },
    #[error("block '{opcode}' declares slot '{slot}' twice")]
    DuplicateSlot { opcode: String, slot: String },
    #[error("dropdown slot '{opcode}.{slot}' has no options")]
    EmptyDropdown { opcode: String, slot: String },
    #[error("slot '{opcode}.{slot}' lists options but is not a dropdown")]
    UnexpectedOptions { opcode: String, slot: String },
    #[error("shadow slot '{opcode}.{slot}' has no shadow default")]
    MissingShadowDefault { opcode: String, slot: String },
    #[error("shadow default of '{opcode}.{slot}' does not match the slot type")]
    DefaultTypeMismatch { opcode: String, slot: String },
    #[error("block '{opcode}' has no grammar{}", .language.map(|l| format!(" for {l}")).unwrap_or_default())]
    MissingGrammar { opcode: String, language: Option<Language> },
    #[error("grammar of '{opcode}' ({language}) \"{grammar}\": {error}")]
    Grammar { opcode: String, language: Language, grammar: String, error: GrammarError },
    #[error("thresholds violate 0 <= t_confirm <= t_execute <= 1 (t_confirm={t_confirm}, t_execute={t_execute})")]
    Thresholds { t_confirm: f64, t_execute: f64 },
    #[error("duration '{field}' must be > 0")]
    NonPositiveDuration { field: &'static str },
    #[error("fuzzy_floor must lie in (0, 1], got {value}")]
    FuzzyFloor { value: f64 },
    #[error("undo_depth must be >= 1")]
    UndoDepth,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ConfigError {
    #[error("{document}:{line}:{column}: {message}")]
    Parse { document: String, line: usize, column: usize, message: String },
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

fn parse<T: for<'de> Deserialize<'de>>(document: &str, text: &str) -> Result<T, ConfigError> {
    serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        document: document.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// A named JSON document, e.g. `("commands.en.json", "{...}")`.
pub type Document<'a> = (&'a str, &'a str);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub packs: BTreeMap<Language, LanguagePack>,
    pub catalog: BlockCatalog,
    pub settings: EngineSettings,
}

/// Serialized form of a [`Config`], one JSON text per file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigDocuments {
    pub commands: Vec<(Language, String)>,
    pub blocks: String,
    pub settings: String,
}

const BUNDLED_COMMANDS_EN: &str = include_str!("../assets/commands.en.json");
const BUNDLED_COMMANDS_DE: &str = include_str!("../assets/commands.de.json");
const BUNDLED_BLOCKS: &str = include_str!("../assets/blocks.json");
const BUNDLED_SETTINGS: &str = include_str!("../assets/settings.json");

impl Config {
    /// The default configuration shipped with the engine.
    pub fn bundled() -> Config {
        Config::from_documents(
            &[("commands.en.json", BUNDLED_COMMANDS_EN), ("commands.de.json", BUNDLED_COMMANDS_DE)],
            ("blocks.json", BUNDLED_BLOCKS),
            Some(("settings.json", BUNDLED_SETTINGS)),
        )
        .expect("bundled configuration is valid")
    }

    pub fn bundled_documents() -> ConfigDocuments {
        ConfigDocuments {
            commands: alloc::vec![
                (Language::En, BUNDLED_COMMANDS_EN.to_string()),
                (Language::De, BUNDLED_COMMANDS_DE.to_string()),
            ],
            blocks: BUNDLED_BLOCKS.to_string(),
            settings: BUNDLED_SETTINGS.to_string(),
        }
    }

    /// Parses and validates configuration documents. Settings fields that are
    /// omitted (or a missing settings document) take their defaults.
    pub fn from_documents(
        commands: &[Document<'_>],
        blocks: Document<'_>,
        settings: Option<Document<'_>>,
    ) -> Result<Config, ConfigError> {
        let mut packs = BTreeMap::new();
        for (name, text) in commands {
            let pack: LanguagePack = parse(name, text)?;
            if packs.contains_key(&pack.language) {
                return Err(ValidationError::DuplicateLanguage(pack.language).into());
            }
            packs.insert(pack.language, pack);
        }
        let catalog: BlockCatalog = parse(blocks.0, blocks.1)?;
        let settings = match settings {
            Some((name, text)) => parse(name, text)?,
            None => EngineSettings::default(),
        };
        let config = Config { packs, catalog, settings };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.packs.is_empty() {
            return Err(ValidationError::NoLanguages);
        }
        for pack in self.packs.values() {
            pack.validate()?;
        }
        self.catalog.validate()?;
        for block in &self.catalog.blocks {
            for lang in self.packs.keys() {
                if !block.grammar.contains_key(lang) {
                    return Err(ValidationError::MissingGrammar {
                        opcode: block.opcode.clone(),
                        language: Some(*lang),
                    });
                }
            }
        }
        self.settings.validate()
    }

    pub fn pack(&self, language: Language) -> Option<&LanguagePack> {
        self.packs.get(&language)
    }

    pub fn languages(&self) -> impl Iterator<Item = Language> + '_ {
        self.packs.keys().copied()
    }

    pub fn to_documents(&self) -> ConfigDocuments {
        ConfigDocuments {
            commands: self.packs.iter().map(|(l, p)| (*l, pretty(p))).collect(),
            blocks: pretty(&self.catalog),
            settings: pretty(&self.settings),
        }
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("config serializes");
    s.push('\n');
    s
}
