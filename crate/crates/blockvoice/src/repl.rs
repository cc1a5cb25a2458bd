//! Typed stand-in for voice input. Each line is one transcript, bracketed by
//! push-to-talk down and up, and goes through the same session code as the
//! server.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};
use std::time::Instant;

use blockvoice_core::matcher::Hypothesis;
use blockvoice_core::pipeline::{Event, FeedbackKind, PttState, Session, Step};
use blockvoice_core::workspace::overlay::ElementRef;
use blockvoice_core::workspace::{BlockId, Sprite};

pub struct Repl {
    session: Session,
    asr_confidence: Option<f64>,
}

/// What to do with one input line.
#[derive(Debug, PartialEq, Eq)]
pub enum Reply {
    Output(String),
    Quit,
}

impl Repl {
    pub fn new(session: Session, asr_confidence: Option<f64>) -> Repl {
        Repl { session, asr_confidence }
    }

    pub fn session(&self) -> &Session {
        &self.session
    }

    /// Handles one line typed at logical time `now` (milliseconds).
    pub fn line(&mut self, now: u64, line: &str) -> Reply {
        let text = line.trim();
        match text {
            "" => return Reply::Output(String::new()),
            "quit" | "exit" => return Reply::Quit,
            "print" => return Reply::Output(render_workspace(&self.session)),
            _ => {}
        }
        let hypothesis = Hypothesis { text: text.to_string(), confidence: self.asr_confidence, rank: 0 };
        let events = [
            Event::Ptt { state: PttState::Down },
            Event::Transcript { hypotheses: vec![hypothesis], overlay_generation: None },
            Event::Ptt { state: PttState::Up },
        ];
        let mut out = String::new();
        for event in events {
            let step = self.session.handle_event(now, event);
            write_feedback(&mut out, &step);
        }
        out.push_str(&render_workspace(&self.session));
        Reply::Output(out)
    }

    /// Lets time pass without input, so deadlines can expire.
    pub fn tick(&mut self, now: u64) -> String {
        let mut out = String::new();
        write_feedback(&mut out, &self.session.handle_event(now, Event::Tick));
        out
    }

    pub fn run(&mut self, input: impl BufRead, mut output: impl Write) -> io::Result<()> {
        let start = Instant::now();
        let elapsed = || start.elapsed().as_millis() as u64;
        writeln!(output, "{}", render_workspace(&self.session))?;
        prompt(&mut output)?;
        for line in input.lines() {
            let line = line?;
            let ticked = self.tick(elapsed());
            output.write_all(ticked.as_bytes())?;
            match self.line(elapsed(), &line) {
                Reply::Quit => break,
                Reply::Output(text) => output.write_all(text.as_bytes())?,
            }
            prompt(&mut output)?;
        }
        Ok(())
    }
}

fn prompt(output: &mut impl Write) -> io::Result<()> {
    write!(output, "> ")?;
    output.flush()
}

fn write_feedback(out: &mut String, step: &Step) {
    for f in &step.feedback {
        let tag = match f.kind {
            FeedbackKind::Executed => "ok",
            FeedbackKind::ConfirmationRequest => "confirm",
            FeedbackKind::Rejected => "rejected",
            FeedbackKind::Error => "error",
            FeedbackKind::RecordingStarted | FeedbackKind::RecordingStopped => continue,
        };
        let _ = writeln!(out, "[{tag}] {}", f.message);
    }
}

fn number(session: &Session, element: &ElementRef) -> String {
    match session.overlay().number_of(element) {
        Some(n) => format!("[{n}] "),
        None => String::new(),
    }
}

fn write_chain(out: &mut String, session: &Session, sprite: &Sprite, first: BlockId, depth: usize) {
    let mut cur = Some(first);
    while let Some(id) = cur {
        let element = ElementRef::Block(id);
        let focus = if session.workspace().view().focused_block == Some(id) { " <" } else { "" };
        let _ = writeln!(
            out,
            "{:indent$}{}{}{focus}",
            "",
            number(session, &element),
            session.describe_element(&element),
            indent = 2 + 2 * depth
        );
        let block = sprite.block(id);
        if let Some(inner) = block.and_then(|b| b.substack()) {
            write_chain(out, session, sprite, inner, depth + 1);
        }
        cur = block.and_then(|b| b.next);
    }
}

/// Compact text view of the workspace with overlay numbers.
pub fn render_workspace(session: &Session) -> String {
    let ws = session.workspace();
    let overlay = session.overlay();
    let mut out = String::new();
    let controls: Vec<String> = overlay
        .entries
        .iter()
        .filter(|(_, e)| matches!(e, ElementRef::Control(_)))
        .map(|(n, e)| format!("{n}:{}", session.describe_element(e)))
        .collect();
    if !controls.is_empty() {
        let _ = writeln!(out, "controls: {}", controls.join("  "));
    }
    let sprites: Vec<String> = ws
        .project()
        .sprites
        .iter()
        .map(|s| {
            let mark = if s.id == ws.view().selected_sprite { "*" } else { "" };
            format!("{}{}{mark}", number(session, &ElementRef::Sprite(s.id)), s.name)
        })
        .collect();
    let _ = writeln!(out, "sprites: {}", sprites.join("  "));
    if let Some(category) = ws.view().palette {
        let _ = writeln!(out, "palette ({}):", category.name());
        for spec in ws.catalog().in_category(category) {
            let element = ElementRef::Palette(spec.opcode.clone());
            let _ = writeln!(out, "  {}{}", number(session, &element), session.describe_element(&element));
        }
    }
    let sprite = ws.sprite();
    if sprite.stacks.is_empty() {
        let _ = writeln!(out, "(no blocks)");
    }
    for top in &sprite.stacks {
        let pos = sprite.block(*top).and_then(|b| b.position).unwrap_or_default();
        let _ = writeln!(out, "stack at ({}, {}):", pos.x, pos.y);
        write_chain(&mut out, session, sprite, *top, 0);
    }
    let variables: Vec<String> = ws
        .project()
        .stage_variables
        .iter()
        .chain(sprite.variables.iter())
        .map(|(k, v)| format!("{k} = {v}"))
        .collect();
    if !variables.is_empty() {
        let _ = writeln!(out, "variables: {}", variables.join(", "));
    }
    if let Some(p) = session.pending() {
        let _ = writeln!(out, "awaiting confirmation: {}? (until {} ms)", p.action_text, p.deadline);
    }
    out
}
