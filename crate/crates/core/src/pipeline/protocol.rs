//! Outbound half of the session protocol. Inbound messages are [`Event`]s.
//!
//! One JSON object per line. After every handled event the server sends the
//! step's feedback, a confirmation request if one was raised, the phase and
//! a full snapshot.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{Event, FeedbackEvent, FeedbackKind, Phase, Session, Step};
use crate::config::TalkMode;
use crate::workspace::overlay::{ElementRef, OverlayMap};
use crate::workspace::project::ProjectFile;
use crate::workspace::View;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Outbound {
    Snapshot {
        generation: u64,
        workspace: ProjectFile,
        view: View,
        overlay: OverlayMap,
    },
    Feedback {
        kind: FeedbackKind,
        message: String,
        ttl: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        highlight: Option<ElementRef>,
    },
    ConfirmationRequest {
        action_text: String,
        deadline: u64,
    },
    State {
        phase: Phase,
        talk_mode: TalkMode,
        recording: bool,
    },
    /// A message that could not be handled; the session carries on.
    Error {
        message: String,
    },
}

impl Outbound {
    pub fn snapshot(session: &Session) -> Outbound {
        let ws = session.workspace();
        Outbound::Snapshot {
            generation: ws.generation(),
            workspace: ws.to_project_file(),
            view: ws.view().clone(),
            overlay: session.overlay().clone(),
        }
    }

    pub fn state(session: &Session) -> Outbound {
        Outbound::State { phase: session.phase(), talk_mode: session.talk_mode(), recording: session.recording() }
    }

    pub fn feedback(f: &FeedbackEvent) -> Outbound {
        Outbound::Feedback { kind: f.kind, message: f.message.clone(), ttl: f.ttl_ms, highlight: f.highlight.clone() }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("protocol messages always serialize")
    }
}

/// Messages announcing a step, in sending order.
pub fn messages(step: &Step, session: &Session) -> Vec<Outbound> {
    let mut out: Vec<Outbound> = step.feedback.iter().map(Outbound::feedback).collect();
    if let Some(p) = session.pending() {
        if step.feedback.iter().any(|f| f.kind == FeedbackKind::ConfirmationRequest) {
            out.push(Outbound::ConfirmationRequest { action_text: p.action_text.clone(), deadline: p.deadline });
        }
    }
    out.push(Outbound::state(session));
    out.push(Outbound::snapshot(session));
    out
}

/// Messages sent to a newly connected client.
pub fn greeting(session: &Session) -> Vec<Outbound> {
    alloc::vec![Outbound::state(session), Outbound::snapshot(session)]
}

/// Parses one inbound line.
pub fn parse_event(line: &str) -> Result<Event, String> {
    serde_json::from_str(line).map_err(|e| alloc::format!("malformed message: {e}"))
}
