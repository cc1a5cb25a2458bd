//! Trial evaluation under the four conditions and the comparison report.
//!
//! Baseline conditions compare raw hypotheses with the expected command's
//! phrasings leniently (number words equal digits). Pipeline conditions run
//! the matcher and block grammars and compare the resulting intent with the
//! expected one: same command and remainder, or same block and slot values.
//!
//! * Pipeline-Top: the first candidate the session would act on (the best
//!   interpretable one) is correct and clears the confirmation threshold.
//! * Pipeline-Any: some candidate, under some block reading, is correct.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{BlockCatalog, Command, Config, Language, LanguagePack, ValidationError};
use crate::grammar::{BlockInstantiation, CompiledCatalog};
use crate::matcher::{Hypothesis, MatchResult, Matcher};
use crate::pipeline::intent;
use crate::stats::{self, EffectSize, LogisticFit, StatsError};
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Service {
    Vosk,
    Web,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Microphone {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Complexity {
    Simple,
    Medium,
    Complex,
}

impl Service {
    pub const ALL: [Service; 2] = [Service::Vosk, Service::Web];
}

impl Complexity {
    pub const ALL: [Complexity; 3] = [Complexity::Simple, Complexity::Medium, Complexity::Complex];
}

fn enum_name<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        _ => String::new(),
    }
}

fn parse_enum<T: for<'de> Deserialize<'de>>(s: &str, what: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_ascii_lowercase())).map_err(|_| format!("unknown {what} '{s}'"))
}

macro_rules! name_traits {
    ($t:ty, $what:literal) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&enum_name(self))
            }
        }

        impl FromStr for $t {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                parse_enum(s, $what)
            }
        }
    };
}

name_traits!(Service, "service");
name_traits!(Microphone, "microphone");
name_traits!(Complexity, "complexity");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedBlock {
    pub opcode: String,
    #[serde(default)]
    pub slots: BTreeMap<String, Value>,
}

/// The intended action: a command with its remainder, or a placement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub remainder_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<ExpectedBlock>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub baseline_top: bool,
    pub baseline_any: bool,
    pub pipeline_top: bool,
    pub pipeline_any: bool,
}

impl TrialOutcome {
    pub fn get(&self, condition: Condition) -> bool {
        match condition {
            Condition::BaselineTop => self.baseline_top,
            Condition::BaselineAny => self.baseline_any,
            Condition::PipelineTop => self.pipeline_top,
            Condition::PipelineAny => self.pipeline_any,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trial {
    pub id: String,
    pub language: Language,
    pub service: Service,
    pub microphone: Microphone,
    pub complexity: Complexity,
    pub expected: Expected,
    pub hypotheses: Vec<Hypothesis>,
    /// Outcome recorded elsewhere (for example by hand); when present it is
    /// used instead of evaluating the hypotheses.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<TrialOutcome>,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EvalError {
    #[error("trial '{id}': {reason}")]
    InvalidTrial { id: String, reason: String },
    #[error(transparent)]
    Config(#[from] ValidationError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    BaselineTop,
    BaselineAny,
    PipelineTop,
    PipelineAny,
}

impl Condition {
    pub const ALL: [Condition; 4] =
        [Condition::BaselineTop, Condition::BaselineAny, Condition::PipelineTop, Condition::PipelineAny];

    pub fn short(self) -> &'static str {
        match self {
            Condition::BaselineTop => "Base-Top",
            Condition::BaselineAny => "Base-Any",
            Condition::PipelineTop => "Pipe-Top",
            Condition::PipelineAny => "Pipe-Any",
        }
    }
}

/// What the pipeline understood, independent of workspace state.
#[derive(Clone, Debug, PartialEq)]
enum Intent {
    Block(BlockInstantiation),
    Command { command: Command, remainder: Vec<String> },
}

/// The expected intent in comparable form.
enum Target {
    Block { opcode: String, slots: BTreeMap<String, Value> },
    Command { command: Command, remainder: Vec<String> },
}

struct LanguageEngine {
    pack: LanguagePack,
    matcher: Matcher,
    grammars: CompiledCatalog,
    catalog: BlockCatalog,
}

/// Evaluates trials against one configuration.
pub struct Evaluator {
    engines: BTreeMap<Language, LanguageEngine>,
    t_confirm: f64,
}

impl Evaluator {
    pub fn new(config: &Config) -> Result<Evaluator, EvalError> {
        let mut engines = BTreeMap::new();
        for (language, pack) in &config.packs {
            engines.insert(
                *language,
                LanguageEngine {
                    pack: pack.clone(),
                    matcher: Matcher::new(pack, config.settings.fuzzy_floor),
                    grammars: CompiledCatalog::new(&config.catalog, *language)?,
                    catalog: config.catalog.clone(),
                },
            );
        }
        Ok(Evaluator { engines, t_confirm: config.settings.t_confirm })
    }

    pub fn evaluate(&self, trial: &Trial) -> Result<TrialOutcome, EvalError> {
        let invalid = |reason: String| EvalError::InvalidTrial { id: trial.id.clone(), reason };
        let engine = self.engines.get(&trial.language).ok_or_else(|| invalid(format!("no '{}' language pack", trial.language)))?;
        if trial.hypotheses.is_empty() {
            return Err(invalid("no hypotheses".into()));
        }
        let target = engine.target(&trial.expected).map_err(invalid)?;
        let phrases = engine.phrases(&trial.expected, &target);
        let hypotheses: Vec<Hypothesis> = trial
            .hypotheses
            .iter()
            .enumerate()
            .map(|(rank, h)| Hypothesis { rank, ..h.clone() })
            .collect();

        let said = |h: &Hypothesis| {
            let tokens = engine.matcher.normalize(&h.text).numbers_resolved;
            phrases.contains(&tokens)
        };
        let baseline_top = said(&hypotheses[0]);
        let baseline_any = hypotheses.iter().any(said);

        let candidates = intent::candidates(&engine.matcher, &hypotheses, false);
        let readings: Vec<(&MatchResult, Option<Vec<Intent>>)> =
            candidates.iter().map(|c| (c, engine.intents(c))).collect();
        let top = readings.iter().find_map(|(c, r)| r.as_ref().map(|r| (c, r)));
        let pipeline_top = top.is_some_and(|(c, r)| c.confidence >= self.t_confirm && target.is(&r[0]));
        let pipeline_any = readings.iter().filter_map(|(_, r)| r.as_ref()).flatten().any(|i| target.is(i));
        Ok(TrialOutcome { baseline_top, baseline_any, pipeline_top, pipeline_any })
    }

    /// The recorded outcome if the trial carries one, else an evaluation.
    pub fn outcome(&self, trial: &Trial) -> Result<TrialOutcome, EvalError> {
        match trial.outcome {
            Some(o) => Ok(o),
            None => self.evaluate(trial),
        }
    }
}

impl LanguageEngine {
    fn tokens(&self, text: &str) -> Vec<String> {
        self.matcher.normalize(text).numbers_resolved
    }

    fn target(&self, expected: &Expected) -> Result<Target, String> {
        match (&expected.block, &expected.remainder_text) {
            (Some(_), Some(_)) => Err("expected has both a block and a remainder".into()),
            (Some(block), None) => {
                if expected.command != Command::Place {
                    return Err(format!("a block is expected but the command is '{}'", expected.command));
                }
                let spec = self.catalog.get(&block.opcode).ok_or_else(|| format!("unknown opcode '{}'", block.opcode))?;
                let mut slots = BlockInstantiation::with_defaults(spec).slot_values;
                for (name, value) in &block.slots {
                    if !slots.contains_key(name) {
                        return Err(format!("'{}' has no slot '{name}'", block.opcode));
                    }
                    slots.insert(name.clone(), value.clone());
                }
                Ok(Target::Block { opcode: block.opcode.clone(), slots })
            }
            (None, text) => {
                let remainder = text.as_deref().map(|t| self.tokens(t)).unwrap_or_default();
                let numeric = remainder.len() == 1 && remainder[0].bytes().all(|b| b.is_ascii_digit());
                if expected.command == Command::Place && !numeric {
                    return Err("a placement needs a block or an overlay number".into());
                }
                Ok(Target::Command { command: expected.command, remainder })
            }
        }
    }

    /// Every way of saying the expected action correctly, normalized.
    fn phrases(&self, expected: &Expected, target: &Target) -> Vec<Vec<String>> {
        let aliases = self.pack.commands.get(&expected.command).cloned().unwrap_or_default();
        let tails: Vec<String> = match target {
            Target::Block { opcode, slots } => {
                self.grammars.grammar(opcode).map(|g| g.realizations(slots)).unwrap_or_default()
            }
            Target::Command { .. } => alloc::vec![expected.remainder_text.clone().unwrap_or_default()],
        };
        let mut out = Vec::new();
        for alias in &aliases {
            for tail in &tails {
                out.push(self.tokens(&format!("{alias} {tail}")));
            }
        }
        out
    }

    /// All readings of a candidate, or `None` if it cannot be acted on.
    fn intents(&self, candidate: &MatchResult) -> Option<Vec<Intent>> {
        let rest = &candidate.remainder;
        let numeric = rest.len() == 1 && rest[0].bytes().all(|b| b.is_ascii_digit());
        if candidate.command == Command::Place && !rest.is_empty() && !numeric {
            let parses = self.grammars.parse_remainder(rest).ok()?;
            return Some(parses.into_iter().map(Intent::Block).collect());
        }
        Some(alloc::vec![Intent::Command { command: candidate.command, remainder: rest.clone() }])
    }
}

impl Target {
    fn is(&self, intent: &Intent) -> bool {
        match (self, intent) {
            (Target::Block { opcode, slots }, Intent::Block(b)) => *opcode == b.opcode && *slots == b.slot_values,
            (Target::Command { command, remainder }, Intent::Command { command: c, remainder: r }) => {
                command == c && remainder == r
            }
            _ => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Baseline,
    Pipeline,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HierarchyViolation {
    pub id: String,
    pub family: Family,
}

/// Every trial where a Top condition succeeds but its Any condition fails.
pub fn check_hierarchy<'a>(outcomes: impl IntoIterator<Item = (&'a str, &'a TrialOutcome)>) -> Vec<HierarchyViolation> {
    let mut out = Vec::new();
    for (id, o) in outcomes {
        if o.baseline_top && !o.baseline_any {
            out.push(HierarchyViolation { id: id.to_string(), family: Family::Baseline });
        }
        if o.pipeline_top && !o.pipeline_any {
            out.push(HierarchyViolation { id: id.to_string(), family: Family::Pipeline });
        }
    }
    out
}

/// Restricts which trials are aggregated; unset fields match everything.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialFilter {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<Language>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub service: Option<Service>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub microphone: Option<Microphone>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complexity: Option<Complexity>,
}

impl TrialFilter {
    pub fn matches(&self, t: &Trial) -> bool {
        self.language.is_none_or(|v| v == t.language)
            && self.service.is_none_or(|v| v == t.service)
            && self.microphone.is_none_or(|v| v == t.microphone)
            && self.complexity.is_none_or(|v| v == t.complexity)
    }

    /// Adds one `key=value` restriction.
    pub fn restrict(&mut self, spec: &str) -> Result<(), String> {
        let (key, value) = spec.split_once('=').ok_or_else(|| format!("expected key=value, got '{spec}'"))?;
        match key.trim() {
            "language" => self.language = Some(value.trim().parse()?),
            "service" => self.service = Some(value.trim().parse()?),
            "microphone" => self.microphone = Some(value.trim().parse()?),
            "complexity" => self.complexity = Some(value.trim().parse()?),
            other => return Err(format!("unknown scope key '{other}' (language, service, microphone, complexity)")),
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "level", rename_all = "snake_case")]
pub enum Scope {
    Overall,
    Language(Language),
    Complexity(Complexity),
    Service(Service),
}

impl Scope {
    pub fn contains(&self, t: &Trial) -> bool {
        match self {
            Scope::Overall => true,
            Scope::Language(l) => t.language == *l,
            Scope::Complexity(c) => t.complexity == *c,
            Scope::Service(s) => t.service == *s,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Scope::Overall => "Overall".into(),
            Scope::Language(l) => l.code().to_ascii_uppercase(),
            Scope::Complexity(c) => capitalized(&enum_name(c)),
            Scope::Service(s) => capitalized(&enum_name(s)),
        }
    }
}

fn capitalized(s: &str) -> String {
    let mut chars = s.chars();
    chars.next().map(|c| c.to_ascii_uppercase().to_string() + chars.as_str()).unwrap_or_default()
}

/// Improved condition versus base condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    BaseAnyVsBaseTop,
    PipeTopVsBaseTop,
    PipeAnyVsBaseAny,
    PipeAnyVsBaseTop,
}

impl Comparison {
    pub const ALL: [Comparison; 4] = [
        Comparison::BaseAnyVsBaseTop,
        Comparison::PipeTopVsBaseTop,
        Comparison::PipeAnyVsBaseAny,
        Comparison::PipeAnyVsBaseTop,
    ];

    /// (base, improved)
    pub fn conditions(self) -> (Condition, Condition) {
        match self {
            Comparison::BaseAnyVsBaseTop => (Condition::BaselineTop, Condition::BaselineAny),
            Comparison::PipeTopVsBaseTop => (Condition::BaselineTop, Condition::PipelineTop),
            Comparison::PipeAnyVsBaseAny => (Condition::BaselineAny, Condition::PipelineAny),
            Comparison::PipeAnyVsBaseTop => (Condition::BaselineTop, Condition::PipelineAny),
        }
    }

    pub fn name(self) -> String {
        let (base, improved) = self.conditions();
        format!("{} vs {}", improved.short(), base.short())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub scope: Scope,
    pub comparison: Comparison,
    pub n: usize,
    pub base_successes: usize,
    pub improved_successes: usize,
    /// Percentages, unrounded.
    pub base_rate: f64,
    pub improved_rate: f64,
    pub gain_points: f64,
    pub cohens_h: f64,
    /// Label of `cohens_h` rounded to two decimals.
    pub effect: EffectSize,
    /// Trials where only the improved condition succeeds.
    pub improved_only: usize,
    /// Trials where only the base condition succeeds.
    pub base_only: usize,
    pub mcnemar_p: f64,
    pub holm_adjusted_p: f64,
    pub significant: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionRate {
    pub condition: Condition,
    pub successes: usize,
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub summary: Vec<ConditionRate>,
    pub rows: Vec<ComparisonRow>,
    pub hierarchy_violations: Vec<HierarchyViolation>,
}

/// Scopes in table order, skipping levels with no trials.
pub fn scopes(trials: &[&Trial]) -> Vec<Scope> {
    let mut out = alloc::vec![Scope::Overall];
    let present = |s: &Scope| trials.iter().any(|t| s.contains(t));
    out.extend(Language::ALL.map(Scope::Language).into_iter().filter(present));
    out.extend(Complexity::ALL.map(Scope::Complexity).into_iter().filter(present));
    out.extend(Service::ALL.map(Scope::Service).into_iter().filter(present));
    out
}

/// Aggregates paired outcomes into the comparison table. Holm correction
/// runs over all rows as one family.
pub fn build_report(results: &[(&Trial, TrialOutcome)]) -> Result<EvalReport, EvalError> {
    let trials: Vec<&Trial> = results.iter().map(|(t, _)| *t).collect();
    if trials.is_empty() {
        return Err(StatsError::EmptySelection.into());
    }
    let mut rows = Vec::new();
    for scope in scopes(&trials) {
        let selected: Vec<&TrialOutcome> = results.iter().filter(|(t, _)| scope.contains(t)).map(|(_, o)| o).collect();
        let n = selected.len();
        for comparison in Comparison::ALL {
            let (base, improved) = comparison.conditions();
            let count = |c: Condition| selected.iter().filter(|o| o.get(c)).count();
            let (base_successes, improved_successes) = (count(base), count(improved));
            let improved_only = selected.iter().filter(|o| o.get(improved) && !o.get(base)).count();
            let base_only = selected.iter().filter(|o| o.get(base) && !o.get(improved)).count();
            let base_rate = stats::percentage(base_successes, n)?;
            let improved_rate = stats::percentage(improved_successes, n)?;
            let h = stats::cohens_h(base_rate / 100.0, improved_rate / 100.0)?;
            rows.push(ComparisonRow {
                scope,
                comparison,
                n,
                base_successes,
                improved_successes,
                base_rate,
                improved_rate,
                gain_points: improved_rate - base_rate,
                cohens_h: h,
                effect: EffectSize::classify(stats::round2(h)),
                improved_only,
                base_only,
                mcnemar_p: stats::mcnemar_exact(improved_only as u64, base_only as u64),
                holm_adjusted_p: 1.0,
                significant: false,
            });
        }
    }
    let holm = stats::holm_adjust(&rows.iter().map(|r| r.mcnemar_p).collect::<Vec<_>>())?;
    for (row, (p, reject)) in rows.iter_mut().zip(holm.adjusted.into_iter().zip(holm.reject)) {
        row.holm_adjusted_p = p;
        row.significant = reject;
    }
    let n = results.len();
    let summary = Condition::ALL
        .iter()
        .map(|&condition| {
            let successes = results.iter().filter(|(_, o)| o.get(condition)).count();
            Ok(ConditionRate { condition, successes, rate: stats::percentage(successes, n)? })
        })
        .collect::<Result<Vec<_>, StatsError>>()?;
    let hierarchy_violations = check_hierarchy(results.iter().map(|(t, o)| (t.id.as_str(), o)));
    Ok(EvalReport { n, summary, rows, hierarchy_violations })
}

/// Column names of the improvement model; reference levels are en, web,
/// microphone a and simple.
pub const IMPROVEMENT_COLUMNS: [&str; 6] =
    ["(intercept)", "language=de", "service=vosk", "microphone=b", "complexity=medium", "complexity=complex"];

pub fn design_row(t: &Trial) -> Vec<f64> {
    let flag = |b: bool| f64::from(u8::from(b));
    alloc::vec![
        1.0,
        flag(t.language == Language::De),
        flag(t.service == Service::Vosk),
        flag(t.microphone == Microphone::B),
        flag(t.complexity == Complexity::Medium),
        flag(t.complexity == Complexity::Complex),
    ]
}

/// Logistic model of improvement (Pipeline-Top succeeds where Baseline-Top
/// fails) on the trial factors, main effects only.
pub fn improvement_model(results: &[(&Trial, TrialOutcome)]) -> Result<LogisticFit, StatsError> {
    let names: Vec<String> = IMPROVEMENT_COLUMNS.iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<f64>> = results.iter().map(|(t, _)| design_row(t)).collect();
    let y: Vec<bool> = results.iter().map(|(_, o)| o.pipeline_top && !o.baseline_top).collect();
    stats::logistic_fit(&names, &rows, &y)
}
