use blockvoice_core::config::{Category, Config, OverlayMode, TalkMode};
use blockvoice_core::matcher::Hypothesis;
use blockvoice_core::pipeline::protocol::{messages, parse_event, Outbound};
use blockvoice_core::pipeline::{
    run_session, Action, Answer, Decision, Event, FeedbackKind, Phase, PttState, Session, Source, Step,
};
use blockvoice_core::value::Value;
use blockvoice_core::workspace::overlay::{ElementRef, UiControl};
use blockvoice_core::Language;
use proptest::prelude::*;

fn session() -> Session {
    let mut s = Session::new(&Config::bundled(), Language::En).unwrap();
    s.handle_event(0, Event::Ptt { state: PttState::Down });
    s
}

fn say(s: &mut Session, text: &str) -> Step {
    let at = s.now() + 100;
    s.handle_event(at, Event::transcript([text]))
}

fn say_with(s: &mut Session, text: &str, confidence: f64) -> Step {
    let at = s.now() + 100;
    let hypotheses = vec![Hypothesis::with_confidence(text, 0, confidence)];
    s.handle_event(at, Event::Transcript { hypotheses, overlay_generation: None })
}

fn kinds(step: &Step) -> Vec<FeedbackKind> {
    step.feedback.iter().map(|f| f.kind).collect()
}

fn steps_of_only_block(s: &Session) -> Option<Value> {
    let sprite = s.workspace().sprite();
    assert_eq!(sprite.blocks.len(), 1);
    sprite.blocks.values().next().unwrap().literal("steps").cloned()
}

#[test]
fn exact_command_executes_immediately() {
    let mut s = session();
    let step = say(&mut s, "place move twenty steps");
    assert_eq!(step.routing.as_ref().unwrap().decision, Decision::Execute);
    assert_eq!(kinds(&step), [FeedbackKind::Executed]);
    assert_eq!(step.feedback[0].message, "place move 20 steps");
    assert_eq!(step.mutations.len(), 1);
    assert_eq!(step.phases, [Phase::Listening, Phase::Executing, Phase::Listening]);
    assert_eq!(steps_of_only_block(&s), Some(Value::Number(20.0)));
}

#[test]
fn mid_confidence_asks_first_and_yes_executes() {
    let mut s = session();
    let step = say_with(&mut s, "plays move 10 steps", 0.8);
    let routing = step.routing.clone().unwrap();
    assert!((routing.confidence - 0.72).abs() < 1e-12);
    assert_eq!(routing.decision, Decision::Confirm);
    assert_eq!(kinds(&step), [FeedbackKind::ConfirmationRequest]);
    assert_eq!(step.feedback[0].message, "place move 10 steps?");
    assert!(step.mutations.is_empty());
    assert_eq!(s.phase(), Phase::AwaitingConfirmation);
    assert_eq!(s.pending().unwrap().deadline, s.now() + s.settings().confirmation_timeout_ms);

    let step = say(&mut s, "yes");
    assert_eq!(kinds(&step), [FeedbackKind::Executed]);
    assert!((step.mutations[0].confidence.unwrap() - 0.72).abs() < 1e-12);
    assert_eq!(s.phase(), Phase::Listening);
    assert_eq!(steps_of_only_block(&s), Some(Value::Number(10.0)));
}

#[test]
fn confirmation_can_be_denied_or_time_out() {
    let mut s = session();
    say_with(&mut s, "plays move 10 steps", 0.8);
    let step = say(&mut s, "no");
    assert_eq!(kinds(&step), [FeedbackKind::Rejected]);
    assert!(s.pending().is_none());

    say_with(&mut s, "plays move 10 steps", 0.8);
    let deadline = s.pending().unwrap().deadline;
    let step = s.handle_event(deadline - 1, Event::Tick);
    assert!(step.feedback.is_empty());
    let step = s.handle_event(deadline, Event::Tick);
    assert_eq!(kinds(&step), [FeedbackKind::Rejected]);
    assert!(s.pending().is_none());

    say_with(&mut s, "plays move 10 steps", 0.8);
    let step = s.handle_event(s.now(), Event::Timeout);
    assert_eq!(kinds(&step), [FeedbackKind::Rejected]);
    let step = s.handle_event(s.now(), Event::Confirm { value: Answer::Yes });
    assert_eq!(kinds(&step), [FeedbackKind::Error]);
    assert_eq!(s.workspace().project().block_count(), 0);
}

#[test]
fn a_new_command_while_asking_cancels_the_question() {
    let mut s = session();
    say_with(&mut s, "plays move 10 steps", 0.8);
    let step = say(&mut s, "place wait 2 seconds");
    assert_eq!(kinds(&step), [FeedbackKind::Rejected, FeedbackKind::Executed]);
    let only = s.workspace().sprite().blocks.values().next().unwrap();
    assert_eq!(only.opcode, "control_wait");
}

#[test]
fn garbage_is_rejected_without_changes() {
    let mut s = session();
    let before = s.workspace().serialize();
    let step = say_with(&mut s, "xylophone", 0.3);
    assert_eq!(kinds(&step), [FeedbackKind::Rejected]);
    let step = say_with(&mut s, "plase move 10 steps", 0.4);
    assert_eq!(step.routing.as_ref().unwrap().decision, Decision::Reject);
    assert_eq!(kinds(&step), [FeedbackKind::Rejected]);
    assert_eq!(s.workspace().serialize(), before);
}

#[test]
fn push_to_talk_ignores_speech_while_released() {
    let mut s = Session::new(&Config::bundled(), Language::En).unwrap();
    assert_eq!(s.phase(), Phase::Idle);
    let step = say(&mut s, "place move 10 steps");
    assert_eq!(kinds(&step), [FeedbackKind::Rejected]);
    assert!(step.mutations.is_empty());
    let step = s.handle_event(1000, Event::Ptt { state: PttState::Down });
    assert_eq!(kinds(&step), [FeedbackKind::RecordingStarted]);
    let step = s.handle_event(2000, Event::Ptt { state: PttState::Up });
    assert_eq!(kinds(&step), [FeedbackKind::RecordingStopped]);
    assert_eq!(s.phase(), Phase::Idle);
}

#[test]
fn toggle_mode_stops_after_silence() {
    let mut s = Session::new(&Config::bundled(), Language::En).unwrap();
    s.handle_event(0, Event::SetMode { overlay: None, talk: Some(TalkMode::ToggleToTalk) });
    s.handle_event(0, Event::Toggle);
    assert!(s.recording());
    say(&mut s, "place show");
    let quiet = s.now() + s.settings().silence_timeout_ms;
    let step = s.handle_event(quiet, Event::Tick);
    assert_eq!(kinds(&step), [FeedbackKind::RecordingStopped]);
    assert!(!s.recording());
}

#[test]
fn continuous_mode_wakes_on_start_listening_only() {
    let mut s = Session::new(&Config::bundled(), Language::En).unwrap();
    s.handle_event(0, Event::SetMode { overlay: None, talk: Some(TalkMode::Continuous) });
    assert!(s.recording());
    let step = say(&mut s, "stop listening");
    assert_eq!(kinds(&step), [FeedbackKind::RecordingStopped, FeedbackKind::Executed]);
    let step = say(&mut s, "place show");
    assert_eq!(kinds(&step), [FeedbackKind::Rejected]);
    let step = say(&mut s, "start listening");
    assert_eq!(kinds(&step), [FeedbackKind::RecordingStarted]);
    assert!(say(&mut s, "place show").mutations.len() == 1);
}

#[test]
fn numbers_follow_palette_context() {
    let mut s = session();
    let step = say(&mut s, "open motion");
    assert_eq!(kinds(&step), [FeedbackKind::Executed]);
    assert!(step.mutations.is_empty());
    let n = s.overlay().number_of(&ElementRef::Palette("motion_movesteps".into())).unwrap();
    let step = say(&mut s, &n.to_string());
    assert_eq!(step.candidates[0].command, blockvoice_core::Command::Place);
    assert_eq!(step.mutations.len(), 1);
    assert_eq!(s.workspace().sprite().blocks.len(), 1);

    let step = say(&mut s, "click 4");
    assert_eq!(step.feedback[0].message, "click motion");
    assert_eq!(s.workspace().view().palette, None);
    let block = *s.workspace().sprite().blocks.keys().next().unwrap();
    let n = s.overlay().number_of(&ElementRef::Block(block)).unwrap();
    say(&mut s, "click 1");
    say(&mut s, &n.to_string());
    assert_eq!(s.workspace().view().focused_block, Some(block));
}

#[test]
fn focus_drives_delete_and_set() {
    let mut s = session();
    say(&mut s, "place move 10 steps");
    let step = say(&mut s, "set steps to fifty");
    assert_eq!(step.feedback[0].message, "set steps of move 10 steps to 50");
    assert_eq!(steps_of_only_block(&s), Some(Value::Number(50.0)));
    let step = say(&mut s, "set steps to banana");
    assert_eq!(kinds(&step), [FeedbackKind::Error]);
    say(&mut s, "set my variable to 7");
    assert_eq!(s.workspace().variable("my variable"), Some(&Value::Number(7.0)));
    say(&mut s, "delete");
    assert_eq!(s.workspace().project().block_count(), 0);
    let step = say(&mut s, "delete");
    assert_eq!(kinds(&step), [FeedbackKind::Error]);
}

#[test]
fn connect_by_numbers() {
    let mut s = session();
    say(&mut s, "place move 10 steps");
    s.handle_event(s.now(), Event::DirectOp { op: Action::Focus { block: None } });
    say(&mut s, "place wait 1 seconds");
    let ids: Vec<_> = s.workspace().sprite().stacks.clone();
    assert_eq!(ids.len(), 2);
    let (first, second) = (ids[0], ids[1]);
    let n1 = s.overlay().number_of(&ElementRef::Block(first)).unwrap();
    let n2 = s.overlay().number_of(&ElementRef::Block(second)).unwrap();
    let step = say(&mut s, &format!("connect {n2} to {n1}"));
    assert_eq!(step.feedback[0].message, "attach wait 1 seconds below move 10 steps");
    let sprite = s.workspace().sprite();
    assert_eq!(sprite.stacks, [first]);
    assert_eq!(sprite.blocks[&first].next, Some(second));
}

#[test]
fn stale_numbers_are_refused() {
    let mut s = session();
    let seen = s.overlay().generation;
    say(&mut s, "place move 10 steps");
    let hypotheses = vec![Hypothesis::new("click 1", 0)];
    let step = s.handle_event(s.now(), Event::Transcript { hypotheses, overlay_generation: Some(seen) });
    assert_eq!(kinds(&step), [FeedbackKind::Error]);
    assert!(step.feedback[0].message.contains("outdated"));
}

#[test]
fn voice_and_direct_ops_share_undo() {
    let mut s = session();
    say(&mut s, "place move 10 steps");
    let place = Action::Place {
        block: serde_json::from_str(r#"{"opcode":"control_wait","slot_values":{}}"#).unwrap(),
        at: None,
    };
    let step = s.handle_event(s.now(), Event::DirectOp { op: place });
    assert_eq!(step.mutations[0].source, Source::Direct);
    assert_eq!(step.mutations[0].confidence, None);
    assert_eq!(s.workspace().project().block_count(), 2);
    say(&mut s, "undo");
    say(&mut s, "undo");
    assert_eq!(s.workspace().project().block_count(), 0);
    let step = say(&mut s, "undo");
    assert_eq!(kinds(&step), [FeedbackKind::Error]);
    say(&mut s, "redo");
    assert_eq!(s.workspace().project().block_count(), 1);
}

#[test]
fn german_session() {
    let mut s = Session::new(&Config::bundled(), Language::De).unwrap();
    s.handle_event(0, Event::Ptt { state: PttState::Down });
    let step = say(&mut s, "platziere gehe zwanzig schritte");
    assert_eq!(step.mutations.len(), 1);
    say_with(&mut s, "blatziere zeige dich", 0.8);
    assert_eq!(s.phase(), Phase::AwaitingConfirmation);
    let step = say(&mut s, "ja");
    assert_eq!(kinds(&step), [FeedbackKind::Executed]);
    assert_eq!(s.workspace().project().block_count(), 2);
}

#[test]
fn click_controls() {
    let mut s = session();
    say(&mut s, "click 3");
    assert_eq!(s.workspace().project().sprites.len(), 2);
    say(&mut s, "click 9");
    assert_eq!(s.workspace().view().overlay_mode, OverlayMode::Smart);
    // In smart mode tabs carry text labels and lose their numbers.
    say(&mut s, "click looks");
    assert_eq!(s.workspace().view().palette, Some(Category::Looks));
    say(&mut s, "select sprite one");
    assert_eq!(s.workspace().view().selected_sprite.0, 1);
    let n = s.overlay().number_of(&ElementRef::Control(UiControl::TalkMode)).unwrap();
    say(&mut s, &format!("click {n}"));
    assert_eq!(s.talk_mode(), TalkMode::ToggleToTalk);
}

fn script() -> Vec<(u64, Event)> {
    vec![
        (0, Event::Ptt { state: PttState::Down }),
        (100, Event::transcript(["place move twenty steps"])),
        (200, Event::Transcript { hypotheses: vec![Hypothesis::with_confidence("plays wait 1 seconds", 0, 0.8)], overlay_generation: None }),
        (300, Event::transcript(["yes"])),
        (400, Event::Ptt { state: PttState::Up }),
    ]
}

#[test]
fn replay_is_deterministic() {
    let run = || {
        let mut s = session();
        let mut seen = 0;
        let log = run_session(&mut s, script(), |_| seen += 1);
        assert_eq!(seen, 5);
        (serde_json::to_string(&log).unwrap(), s.workspace().serialize())
    };
    let (log, ws) = run();
    assert_eq!(run(), (log.clone(), ws.clone()));
    assert!(ws.contains("control_wait"));

    let mut s = Session::new(&Config::bundled(), Language::En).unwrap();
    let log = run_session(&mut s, Vec::new(), |_| {});
    assert!(log.steps.is_empty());
    assert_eq!(s.phase(), Phase::Idle);
}

#[test]
fn protocol_round_trip() {
    let event = parse_event(r#"{"type":"transcript","hypotheses":[{"text":"place show","confidence":0.9}]}"#).unwrap();
    assert!(matches!(event, Event::Transcript { .. }));
    assert!(parse_event(r#"{"type":"confirm","value":"yes"}"#).is_ok());
    assert!(parse_event(r#"{"type":"direct_op","op":{"action":"connect","upper":1,"lower":2}}"#).is_ok());
    assert!(parse_event(r#"{"type":"set_mode","overlay":"smart"}"#).is_ok());
    assert!(parse_event(r#"{"type":"bogus"}"#).is_err());
    for (_, e) in script() {
        let line = serde_json::to_string(&e).unwrap();
        assert_eq!(parse_event(&line).unwrap(), e);
    }

    let mut s = session();
    let step = say_with(&mut s, "plays show", 0.8);
    let out = messages(&step, &s);
    assert!(matches!(out[0], Outbound::Feedback { kind: FeedbackKind::ConfirmationRequest, .. }));
    assert!(matches!(&out[1], Outbound::ConfirmationRequest { action_text, .. } if action_text == "place show"));
    assert!(matches!(out[2], Outbound::State { phase: Phase::AwaitingConfirmation, .. }));
    assert!(matches!(out[3], Outbound::Snapshot { .. }));
}

fn arb_event() -> impl Strategy<Value = Event> {
    let words = prop::sample::select(vec![
        "place", "plays", "plase", "move", "10", "steps", "wait", "1", "seconds", "delete", "click", "3", "12",
        "undo", "redo", "yes", "no", "open", "motion", "set", "to", "5", "connect", "show", "xylophone", "stop",
        "listening", "select", "sprite1",
    ]);
    let text = prop::collection::vec(words, 1..6).prop_map(|w| w.join(" "));
    let hyp = (text, prop::option::of(0.0f64..=1.0));
    prop_oneof![
        8 => prop::collection::vec(hyp, 1..4).prop_map(|hs| Event::Transcript {
            hypotheses: hs.into_iter().enumerate().map(|(rank, (text, confidence))| Hypothesis { text, confidence, rank }).collect(),
            overlay_generation: None,
        }),
        1 => Just(Event::Confirm { value: Answer::Yes }),
        1 => Just(Event::Tick),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn no_voice_mutation_below_the_confirm_threshold(events in prop::collection::vec(arb_event(), 1..30)) {
        let mut s = session();
        let t_confirm = s.settings().t_confirm;
        for (i, e) in events.into_iter().enumerate() {
            let step = s.handle_event(1000 * (i as u64 + 1), e);
            for m in &step.mutations {
                if m.source == Source::Voice {
                    prop_assert!(m.confidence.unwrap() >= t_confirm);
                }
            }
            prop_assert!(s.workspace().check().is_ok());
            prop_assert_eq!(s.pending().is_some(), s.phase() == Phase::AwaitingConfirmation);
        }
    }
}
