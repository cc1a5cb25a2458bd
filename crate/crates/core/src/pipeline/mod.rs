//! The voice session: transcripts arrive under a talk mode, get matched and
//! interpreted, are routed by confidence (execute, ask, reject) and applied
//! to the workspace, and every step produces feedback.
//!
//! Time is a logical millisecond clock supplied with each event, so a
//! recorded event sequence always replays to the same log.

pub mod intent;
pub mod protocol;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{Command, Config, EngineSettings, Language, LanguagePack, OverlayMode, TalkMode, ValidationError};
use crate::grammar::CompiledCatalog;
use crate::matcher::{Hypothesis, MatchResult, Matcher, Tier};
use crate::textnorm::tokenize;
use crate::workspace::overlay::{assign_overlays, ElementRef, OverlayMap, UiControl};
use crate::workspace::{BlockId, Workspace, WorkspaceError};

pub use intent::{Action, Context, IntentError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Idle,
    Listening,
    AwaitingConfirmation,
    Executing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PttState {
    Down,
    Up,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Answer {
    Yes,
    No,
}

/// Everything a session reacts to. The serialized form is the inbound half
/// of the session protocol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    Transcript {
        hypotheses: Vec<Hypothesis>,
        /// Display generation the numbers in the utterance refer to.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        overlay_generation: Option<u64>,
    },
    Ptt { state: PttState },
    Toggle,
    Confirm { value: Answer },
    DirectOp { op: Action },
    SetMode {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        overlay: Option<OverlayMode>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        talk: Option<TalkMode>,
    },
    Timeout,
    Tick,
}

impl Event {
    /// A transcript whose hypotheses are ranked in list order.
    pub fn transcript<I, S>(texts: I) -> Event
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Event::Transcript { hypotheses: crate::matcher::ranked(texts), overlay_generation: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackKind {
    Executed,
    ConfirmationRequest,
    Rejected,
    Error,
    RecordingStarted,
    RecordingStopped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeedbackEvent {
    pub kind: FeedbackKind,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub highlight: Option<ElementRef>,
    pub ttl_ms: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Execute,
    Confirm,
    Reject,
    /// Matched, but no candidate could be turned into an action.
    Error,
}

/// How the best interpretable candidate of a transcript was routed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Routing {
    pub command: Command,
    pub tier: Tier,
    pub confidence: f64,
    pub decision: Decision,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action_text: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Voice,
    Direct,
}

/// A change to the project (never a pure view change).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mutation {
    pub action: Action,
    pub source: Source,
    /// Confidence of the voice candidate that caused it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    pub revision: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pending {
    pub action: Action,
    pub action_text: String,
    pub candidate: MatchResult,
    pub deadline: u64,
}

/// One log entry: an event and everything it caused.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub at: u64,
    pub event: Event,
    /// Phases passed through, starting with the phase before the event.
    pub phases: Vec<Phase>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<MatchResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub routing: Option<Routing>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mutations: Vec<Mutation>,
    pub feedback: Vec<FeedbackEvent>,
    pub generation: u64,
}

impl Step {
    pub fn phase(&self) -> Phase {
        *self.phases.last().expect("phases start non-empty")
    }

    fn enter(&mut self, phase: Phase) {
        if self.phases.last() != Some(&phase) {
            self.phases.push(phase);
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SessionLog {
    pub steps: Vec<Step>,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SessionError {
    #[error("no language pack for '{0}'")]
    UnknownLanguage(Language),
    #[error(transparent)]
    Config(#[from] ValidationError),
}

pub struct Session {
    pack: LanguagePack,
    settings: EngineSettings,
    matcher: Matcher,
    grammars: CompiledCatalog,
    workspace: Workspace,
    overlay: OverlayMap,
    talk_mode: TalkMode,
    recording: bool,
    pending: Option<Pending>,
    now: u64,
    last_speech: u64,
}

impl Session {
    pub fn new(config: &Config, language: Language) -> Result<Session, SessionError> {
        let workspace = Workspace::new(Arc::new(config.catalog.clone()), config.settings.undo_depth);
        Session::with_workspace(config, language, workspace)
    }

    pub fn with_workspace(config: &Config, language: Language, mut workspace: Workspace) -> Result<Session, SessionError> {
        let pack = config.pack(language).ok_or(SessionError::UnknownLanguage(language))?.clone();
        let settings = config.settings.clone();
        let grammars = CompiledCatalog::new(&config.catalog, language)?;
        workspace.set_overlay_mode(settings.overlay_mode);
        let mut session = Session {
            matcher: Matcher::new(&pack, settings.fuzzy_floor),
            pack,
            grammars,
            overlay: OverlayMap { mode: settings.overlay_mode, generation: 0, entries: Default::default(), labels: vec![] },
            workspace,
            talk_mode: settings.talk_mode,
            recording: settings.talk_mode == TalkMode::Continuous,
            settings,
            pending: None,
            now: 0,
            last_speech: 0,
        };
        session.refresh_overlay();
        Ok(session)
    }

    pub fn language(&self) -> Language {
        self.pack.language
    }

    pub fn settings(&self) -> &EngineSettings {
        &self.settings
    }

    pub fn workspace(&self) -> &Workspace {
        &self.workspace
    }

    pub fn overlay(&self) -> &OverlayMap {
        &self.overlay
    }

    pub fn grammars(&self) -> &CompiledCatalog {
        &self.grammars
    }

    pub fn pending(&self) -> Option<&Pending> {
        self.pending.as_ref()
    }

    pub fn talk_mode(&self) -> TalkMode {
        self.talk_mode
    }

    pub fn recording(&self) -> bool {
        self.recording
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn phase(&self) -> Phase {
        if self.pending.is_some() {
            Phase::AwaitingConfirmation
        } else if self.recording {
            Phase::Listening
        } else {
            Phase::Idle
        }
    }

    /// Label of an element as shown on screen and used in prompts.
    pub fn describe_element(&self, element: &ElementRef) -> String {
        match element {
            ElementRef::Control(c) => control_name(*c).to_string(),
            ElementRef::Sprite(id) => {
                self.workspace.project().sprite(*id).map_or_else(|| format!("sprite {}", id.0), |s| s.name.clone())
            }
            ElementRef::Palette(op) => self.grammars.grammar(op).map_or_else(|| op.clone(), |g| g.canonical_utterance()),
            ElementRef::Block(id) => self.block_text(*id),
        }
    }

    fn block_text(&self, id: BlockId) -> String {
        let Some(block) = self.workspace.block(id) else {
            return format!("block {id}");
        };
        let values = block.inputs.keys().filter_map(|k| block.literal(k).map(|v| (k.clone(), v.clone()))).collect();
        self.grammars.grammar(&block.opcode).map_or_else(|| block.opcode.clone(), |g| g.render(&values))
    }

    /// The action in words, as repeated in prompts and feedback.
    pub fn describe(&self, action: &Action) -> String {
        let phrase = |op: &str, values| self.grammars.grammar(op).map_or_else(|| op.to_string(), |g| g.render(values));
        match action {
            Action::Place { block, .. } => format!("place {}", phrase(&block.opcode, &block.slot_values)),
            Action::Delete { block } => format!("delete {}", self.block_text(*block)),
            Action::Activate { element } => format!("click {}", self.describe_element(element)),
            Action::Focus { block: Some(b) } => format!("select {}", self.block_text(*b)),
            Action::Focus { block: None } => "clear the selection".into(),
            Action::SelectSprite { sprite } => format!("select {}", self.describe_element(&ElementRef::Sprite(*sprite))),
            Action::AddSprite { name: Some(n) } => format!("add sprite {n}"),
            Action::AddSprite { name: None } => "add a sprite".into(),
            Action::SetInput { block, slot, value } => format!("set {slot} of {} to {value}", self.block_text(*block)),
            Action::SetVariable { name, value } => format!("set variable {name} to {value}"),
            Action::Connect { upper, lower } => {
                format!("attach {} below {}", self.block_text(*lower), self.block_text(*upper))
            }
            Action::Nest { container, child } => {
                format!("put {} inside {}", self.block_text(*child), self.block_text(*container))
            }
            Action::CreateVariable { name, .. } => format!("create variable {name}"),
            Action::OpenCategory { category: Some(c) } => format!("open {}", c.name()),
            Action::OpenCategory { category: None } => "close the palette".into(),
            Action::SetOverlayMode { mode } => format!("switch to {} overlays", mode_name(*mode)),
            Action::Undo => "undo".into(),
            Action::Redo => "redo".into(),
            Action::StartListening => "start listening".into(),
            Action::StopListening => "stop listening".into(),
        }
    }

    /// Ranked candidates for a transcript in the current context.
    pub fn candidates(&self, hypotheses: &[Hypothesis]) -> Vec<MatchResult> {
        intent::candidates(&self.matcher, hypotheses, self.workspace.view().palette.is_some())
    }

    pub fn context(&self, seen_generation: Option<u64>) -> Context<'_> {
        Context {
            pack: &self.pack,
            grammars: &self.grammars,
            workspace: &self.workspace,
            overlay: &self.overlay,
            seen_generation: seen_generation.unwrap_or(self.overlay.generation),
        }
    }

    fn feedback(&self, kind: FeedbackKind, message: impl Into<String>) -> FeedbackEvent {
        FeedbackEvent { kind, message: message.into(), highlight: None, ttl_ms: self.settings.feedback_duration_ms }
    }

    fn refresh_overlay(&mut self) {
        let mode = self.workspace.view().overlay_mode;
        let map = assign_overlays(&self.workspace, mode, |e| self.label(e));
        self.overlay = map;
    }

    fn label(&self, element: &ElementRef) -> Option<String> {
        match element {
            ElementRef::Control(c) => c.caption().map(String::from),
            other => Some(self.describe_element(other)),
        }
    }

    /// Applies one event at logical time `at` (clamped to be monotonic).
    pub fn handle_event(&mut self, at: u64, event: Event) -> Step {
        self.now = self.now.max(at);
        let mut step = Step {
            at: self.now,
            event: event.clone(),
            phases: vec![self.phase()],
            candidates: vec![],
            routing: None,
            mutations: vec![],
            feedback: vec![],
            generation: 0,
        };
        self.expire(&mut step);
        match event {
            Event::Transcript { hypotheses, overlay_generation } => {
                self.on_transcript(hypotheses, overlay_generation, &mut step)
            }
            Event::Ptt { state } => self.set_recording(state == PttState::Down, &mut step),
            Event::Toggle => self.set_recording(!self.recording, &mut step),
            Event::Confirm { value } => match self.pending.take() {
                Some(p) if value == Answer::Yes => self.execute(p.action, Source::Voice, Some(p.candidate.confidence), &mut step),
                Some(p) => step.feedback.push(self.feedback(FeedbackKind::Rejected, format!("cancelled: {}", p.action_text))),
                None => step.feedback.push(self.feedback(FeedbackKind::Error, "there is nothing to confirm")),
            },
            Event::DirectOp { op } => self.execute(op, Source::Direct, None, &mut step),
            Event::SetMode { overlay, talk } => {
                if let Some(mode) = overlay {
                    self.workspace.set_overlay_mode(mode);
                    let msg = format!("{} overlays", mode_name(mode));
                    step.feedback.push(self.feedback(FeedbackKind::Executed, msg));
                }
                if let Some(mode) = talk {
                    self.set_talk_mode(mode, &mut step);
                }
            }
            Event::Timeout => {
                if let Some(p) = self.pending.take() {
                    step.feedback.push(self.timed_out(&p));
                }
            }
            Event::Tick => {}
        }
        self.refresh_overlay();
        step.generation = self.workspace.generation();
        step.enter(self.phase());
        step
    }

    fn timed_out(&self, pending: &Pending) -> FeedbackEvent {
        self.feedback(FeedbackKind::Rejected, format!("no answer, cancelled: {}", pending.action_text))
    }

    /// Deadlines that passed before this event fire first.
    fn expire(&mut self, step: &mut Step) {
        if self.pending.as_ref().is_some_and(|p| self.now >= p.deadline) {
            let p = self.pending.take().expect("checked");
            step.feedback.push(self.timed_out(&p));
        }
        let silent = self.now.saturating_sub(self.last_speech) >= self.settings.silence_timeout_ms;
        if self.recording && self.talk_mode == TalkMode::ToggleToTalk && silent {
            self.recording = false;
            step.feedback.push(self.feedback(FeedbackKind::RecordingStopped, "stopped listening after silence"));
        }
    }

    fn set_recording(&mut self, on: bool, step: &mut Step) {
        if on == self.recording {
            return;
        }
        self.recording = on;
        if on {
            self.last_speech = self.now;
            step.feedback.push(self.feedback(FeedbackKind::RecordingStarted, "recording"));
        } else {
            step.feedback.push(self.feedback(FeedbackKind::RecordingStopped, "stopped recording"));
        }
    }

    fn set_talk_mode(&mut self, mode: TalkMode, step: &mut Step) {
        self.talk_mode = mode;
        step.feedback.push(self.feedback(FeedbackKind::Executed, format!("talk mode: {}", talk_name(mode))));
        self.set_recording(mode == TalkMode::Continuous, step);
    }

    fn confirmation_answer(&self, hypotheses: &[Hypothesis]) -> Option<Answer> {
        let says = |phrases: &[String], text: &str| {
            let spoken = self.matcher.normalize(text).tokens;
            phrases.iter().any(|p| tokenize(p) == spoken)
        };
        hypotheses.iter().find_map(|h| {
            if says(&self.pack.confirmation.accept, &h.text) {
                Some(Answer::Yes)
            } else if says(&self.pack.confirmation.reject, &h.text) {
                Some(Answer::No)
            } else {
                None
            }
        })
    }

    fn on_transcript(&mut self, mut hypotheses: Vec<Hypothesis>, seen: Option<u64>, step: &mut Step) {
        for (rank, h) in hypotheses.iter_mut().enumerate() {
            h.rank = rank;
        }
        if hypotheses.is_empty() {
            step.feedback.push(self.feedback(FeedbackKind::Error, "empty transcript"));
            return;
        }
        let candidates = self.candidates(&hypotheses);
        if !self.recording {
            // Only a spoken "start listening" gets through in continuous mode.
            let wake = self.talk_mode == TalkMode::Continuous
                && candidates.first().is_some_and(|c| {
                    c.command == Command::StartListening && c.confidence >= self.settings.t_confirm
                });
            if wake {
                self.set_recording(true, step);
            } else {
                step.feedback.push(self.feedback(FeedbackKind::Rejected, "not listening"));
            }
            step.candidates = candidates;
            return;
        }
        self.last_speech = self.now;
        if let Some(p) = self.pending.take() {
            match self.confirmation_answer(&hypotheses) {
                Some(Answer::Yes) => {
                    self.execute(p.action, Source::Voice, Some(p.candidate.confidence), step);
                    return;
                }
                Some(Answer::No) => {
                    step.feedback.push(self.feedback(FeedbackKind::Rejected, format!("cancelled: {}", p.action_text)));
                    return;
                }
                None => {
                    step.feedback.push(self.feedback(FeedbackKind::Rejected, format!("cancelled: {}", p.action_text)));
                }
            }
        }
        step.candidates = candidates.clone();
        let Some(best) = candidates.first() else {
            let msg = format!("no command recognized in '{}'", hypotheses[0].text);
            step.feedback.push(self.feedback(FeedbackKind::Rejected, msg));
            return;
        };
        let ctx = self.context(seen);
        let mut first_error = None;
        let mut chosen = None;
        for c in &candidates {
            match ctx.interpret(c) {
                Ok(actions) => {
                    chosen = Some((c.clone(), actions.into_iter().next().expect("interpretations are non-empty")));
                    break;
                }
                Err(e) => {
                    first_error.get_or_insert(e);
                }
            }
        }
        let Some((candidate, action)) = chosen else {
            let too_unsure = best.confidence < self.settings.t_confirm;
            step.routing = Some(Routing {
                command: best.command,
                tier: best.tier,
                confidence: best.confidence,
                decision: if too_unsure { Decision::Reject } else { Decision::Error },
                action_text: None,
            });
            let fb = if too_unsure {
                self.feedback(FeedbackKind::Rejected, "not sure what you meant, please say it again")
            } else {
                self.feedback(FeedbackKind::Error, first_error.expect("at least one candidate failed").to_string())
            };
            step.feedback.push(fb);
            return;
        };
        let text = self.describe(&action);
        let c = candidate.confidence;
        let decision = if c >= self.settings.t_execute {
            Decision::Execute
        } else if c >= self.settings.t_confirm {
            Decision::Confirm
        } else {
            Decision::Reject
        };
        step.routing = Some(Routing {
            command: candidate.command,
            tier: candidate.tier,
            confidence: c,
            decision,
            action_text: Some(text.clone()),
        });
        match decision {
            Decision::Execute => self.execute(action, Source::Voice, Some(c), step),
            Decision::Confirm => {
                let deadline = self.now + self.settings.confirmation_timeout_ms;
                let mut fb = self.feedback(FeedbackKind::ConfirmationRequest, format!("{text}?"));
                fb.ttl_ms = self.settings.confirmation_timeout_ms;
                step.feedback.push(fb);
                self.pending = Some(Pending { action, action_text: text, candidate, deadline });
            }
            _ => {
                let msg = format!("not sure what you meant (maybe '{text}'), please say it again");
                step.feedback.push(self.feedback(FeedbackKind::Rejected, msg));
            }
        }
    }

    /// Runs an action now. Voice actions only get here above the gate.
    fn execute(&mut self, action: Action, source: Source, confidence: Option<f64>, step: &mut Step) {
        step.enter(Phase::Executing);
        let text = self.describe(&action);
        let revision = self.workspace.revision();
        match self.apply(&action, step) {
            Ok(highlight) => {
                if self.workspace.revision() != revision {
                    step.mutations.push(Mutation {
                        action,
                        source,
                        confidence,
                        revision: self.workspace.revision(),
                    });
                }
                let mut fb = self.feedback(FeedbackKind::Executed, text);
                fb.highlight = highlight;
                step.feedback.push(fb);
            }
            Err(e) => step.feedback.push(self.feedback(FeedbackKind::Error, format!("cannot {text}: {e}"))),
        }
    }

    fn apply(&mut self, action: &Action, step: &mut Step) -> Result<Option<ElementRef>, WorkspaceError> {
        let ws = &mut self.workspace;
        let block = |id: BlockId| Some(ElementRef::Block(id));
        Ok(match action {
            Action::Place { block: inst, at } => {
                let inst = intent::complete(inst.clone(), ws);
                let id = match at {
                    Some(pos) => ws.place_block_at(&inst, *pos)?,
                    None => ws.place_block(&inst)?,
                };
                block(id)
            }
            Action::Delete { block: id } => {
                ws.delete_block(*id)?;
                None
            }
            Action::Activate { element } => return self.activate(element, step),
            Action::Focus { block: id } => {
                ws.focus(*id)?;
                id.and_then(block)
            }
            Action::SelectSprite { sprite } => {
                ws.select_sprite(*sprite)?;
                Some(ElementRef::Sprite(*sprite))
            }
            Action::AddSprite { name } => Some(ElementRef::Sprite(ws.add_sprite(name.as_deref())?)),
            Action::SetInput { block: id, slot, value } => {
                ws.set_input(*id, slot, value.clone())?;
                block(*id)
            }
            Action::SetVariable { name, value } => {
                ws.set_variable(name, value.clone())?;
                None
            }
            Action::Connect { upper, lower } => {
                ws.connect(*upper, *lower)?;
                block(*lower)
            }
            Action::Nest { container, child } => {
                ws.nest(*container, *child)?;
                block(*child)
            }
            Action::CreateVariable { name, scope } => {
                ws.create_variable(name, *scope)?;
                None
            }
            Action::OpenCategory { category } => {
                ws.open_palette(*category);
                category.map(|c| ElementRef::Control(UiControl::Category(c)))
            }
            Action::SetOverlayMode { mode } => {
                ws.set_overlay_mode(*mode);
                Some(ElementRef::Control(UiControl::OverlayMode))
            }
            Action::Undo => {
                ws.undo()?;
                None
            }
            Action::Redo => {
                ws.redo()?;
                None
            }
            Action::StartListening => {
                self.set_recording(true, step);
                None
            }
            Action::StopListening => {
                self.set_recording(false, step);
                None
            }
        })
    }

    /// Click semantics: tabs toggle their palette, toggles cycle modes,
    /// sprites are selected, palette items placed, blocks focused.
    fn activate(&mut self, element: &ElementRef, step: &mut Step) -> Result<Option<ElementRef>, WorkspaceError> {
        let ws = &mut self.workspace;
        match element {
            ElementRef::Control(UiControl::GreenFlag | UiControl::Stop) => {}
            ElementRef::Control(UiControl::AddSprite) => {
                let id = ws.add_sprite(None)?;
                return Ok(Some(ElementRef::Sprite(id)));
            }
            ElementRef::Control(UiControl::Category(c)) => {
                let next = if ws.view().palette == Some(*c) { None } else { Some(*c) };
                ws.open_palette(next);
            }
            ElementRef::Control(UiControl::OverlayMode) => {
                let next = match ws.view().overlay_mode {
                    OverlayMode::Combined => OverlayMode::Smart,
                    OverlayMode::Smart => OverlayMode::Numerical,
                    OverlayMode::Numerical => OverlayMode::Combined,
                };
                ws.set_overlay_mode(next);
            }
            ElementRef::Control(UiControl::TalkMode) => {
                let next = match self.talk_mode {
                    TalkMode::PushToTalk => TalkMode::ToggleToTalk,
                    TalkMode::ToggleToTalk => TalkMode::Continuous,
                    TalkMode::Continuous => TalkMode::PushToTalk,
                };
                self.set_talk_mode(next, step);
            }
            ElementRef::Sprite(id) => ws.select_sprite(*id)?,
            ElementRef::Palette(op) => {
                let spec = ws.spec(op).ok_or_else(|| WorkspaceError::UnknownOpcode(op.clone()))?;
                let inst = crate::grammar::BlockInstantiation::with_defaults(spec);
                let id = ws.place_block(&inst)?;
                return Ok(Some(ElementRef::Block(id)));
            }
            ElementRef::Block(id) => ws.focus(Some(*id))?,
        }
        Ok(Some(element.clone()))
    }
}

fn control_name(control: UiControl) -> &'static str {
    match control {
        UiControl::GreenFlag => "the green flag",
        UiControl::Stop => "the stop button",
        UiControl::AddSprite => "add sprite",
        UiControl::Category(c) => c.name(),
        UiControl::OverlayMode => "the overlay mode switch",
        UiControl::TalkMode => "the talk mode switch",
    }
}

fn mode_name(mode: OverlayMode) -> &'static str {
    match mode {
        OverlayMode::Combined => "combined",
        OverlayMode::Smart => "smart",
        OverlayMode::Numerical => "numerical",
    }
}

fn talk_name(mode: TalkMode) -> &'static str {
    match mode {
        TalkMode::PushToTalk => "push to talk",
        TalkMode::ToggleToTalk => "toggle to talk",
        TalkMode::Continuous => "continuous",
    }
}

/// Feeds timed events through the session until the source runs dry,
/// handing each step to `sink` as it happens.
pub fn run_session<I>(session: &mut Session, source: I, mut sink: impl FnMut(&Step)) -> SessionLog
where
    I: IntoIterator<Item = (u64, Event)>,
{
    let mut log = SessionLog::default();
    for (at, event) in source {
        let step = session.handle_event(at, event);
        sink(&step);
        log.steps.push(step);
    }
    log
}
