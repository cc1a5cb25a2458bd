//! Exit criteria. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any fails.

use std::io::Cursor;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use blockvoice::{cli, dataset, report};
use blockvoice_core::config::{Category, Command, Config, Language};
use blockvoice_core::distance::edit_distance;
use blockvoice_core::eval::{Evaluator, TrialFilter, TrialOutcome, IMPROVEMENT_COLUMNS};
use blockvoice_core::grammar::{BlockInstantiation, CompiledCatalog};
use blockvoice_core::matcher::{match_text, Hypothesis, Tier};
use blockvoice_core::pipeline::{Answer, Event, PttState, Session, Source};
use blockvoice_core::stats::{self, EffectSize};
use blockvoice_core::textnorm::normalize;
use blockvoice_core::value::Value;
use blockvoice_core::workspace::{BlockId, Position, VariableScope, Workspace};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

struct Reported {
    scope: String,
    comparison: String,
    base: f64,
    improved: f64,
    gain: f64,
    h: f64,
    label: String,
}

fn reported() -> Vec<Reported> {
    include_str!("fixtures/reported_comparisons.tsv")
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            let num = |i: usize| f[i].parse::<f64>().unwrap();
            Reported {
                scope: f[0].into(),
                comparison: f[1].into(),
                base: num(2),
                improved: num(3),
                gain: num(4),
                h: num(5),
                label: f[6].into(),
            }
        })
        .collect()
}

/// Binary representation error only; 18.75 against a printed 18.8 is a
/// difference of exactly 0.05.
const SLACK: f64 = 1e-9;

fn scope_size(scope: &str) -> usize {
    match scope {
        "Overall" => 192,
        "EN" | "DE" | "Vosk" | "Web" => 96,
        _ => 64,
    }
}

/// h from the printed percentages; gain from the success counts those
/// percentages round from.
fn effect_sizes() -> Outcome {
    let start = Instant::now();
    let rows = reported();
    let mut misses = Vec::new();
    let mut worst_h: f64 = 0.0;
    for r in &rows {
        let h = stats::cohens_h(r.base / 100.0, r.improved / 100.0).map_err(|e| e.to_string())?;
        worst_h = worst_h.max((h - r.h).abs());
        let n = scope_size(&r.scope);
        let count = |pct: f64| (pct * n as f64 / 100.0).round() as usize;
        let gain = stats::percentage(count(r.improved), n).unwrap() - stats::percentage(count(r.base), n).unwrap();
        if (h - r.h).abs() > 0.015 + SLACK || (gain - r.gain).abs() > 0.05 + SLACK {
            misses.push(format!("{} {}: h {h:.3} vs {}, gain {gain:.2} vs {}", r.scope, r.comparison, r.h, r.gain));
        }
    }
    let elapsed = start.elapsed();
    ensure(
        misses.is_empty() && rows.len() == 32 && elapsed.as_secs_f64() < 1.0,
        format!("{}/{} rows, max |dh| {worst_h:.4}, {elapsed:?} {misses:?}", rows.len() - misses.len(), rows.len()),
    )
}

fn size_labels() -> Outcome {
    let rows = reported();
    let wrong: Vec<String> = rows
        .iter()
        .filter(|r| EffectSize::classify(r.h).short() != r.label)
        .map(|r| format!("{} {} h={} printed {}", r.scope, r.comparison, r.h, r.label))
        .collect();
    ensure(wrong.is_empty(), format!("{}/{} labels {wrong:?}", rows.len() - wrong.len(), rows.len()))
}

/// Two-sided exact p by enumerating every sign sequence of length `n` and
/// summing those at most as probable as the observed split.
fn mcnemar() -> Outcome {
    let mut cases = 0;
    let mut worst: f64 = 0.0;
    for n in 0..=20u32 {
        let mut histogram = vec![0u64; n as usize + 1];
        for mask in 0u32..(1 << n) {
            histogram[mask.count_ones() as usize] += 1;
        }
        let total = f64::from(1u32 << n);
        for b in 0..=n {
            let c = n - b;
            let observed = histogram[b as usize];
            let as_extreme: u64 = histogram.iter().filter(|&&k| k <= observed).sum();
            let oracle = (as_extreme as f64 / total).min(1.0);
            let p = stats::mcnemar_exact(u64::from(b), u64::from(c));
            worst = worst.max((p - oracle).abs());
            cases += 1;
        }
    }
    ensure(cases == 231 && worst <= 1e-12, format!("{cases} cases, max |dp| {worst:e}"))
}

/// Sequential step-down: walk the sorted p-values, multiplier m-k, and
/// stop rejecting at the first miss.
fn holm() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut bad = Vec::new();
    for case in 0..100 {
        let m = rng.gen_range(1..=10);
        let p: Vec<f64> = (0..m)
            .map(|_| match rng.gen_range(0..4) {
                0 => rng.gen_range(0.0..0.01),
                1 => [0.01, 0.02, 0.5, 1.0][rng.gen_range(0..4)],
                _ => rng.gen::<f64>(),
            })
            .collect();
        let mut sorted = p.clone();
        sorted.sort_by(f64::total_cmp);
        let expected: Vec<f64> = p
            .iter()
            .map(|&pi| {
                let mut best: f64 = 0.0;
                for (k, &pk) in sorted.iter().enumerate() {
                    if pk > pi {
                        break;
                    }
                    let first = sorted.iter().position(|&x| x == pk).unwrap();
                    debug_assert!(first <= k);
                    best = best.max((m - first) as f64 * pk);
                }
                best.min(1.0)
            })
            .collect();
        let mut rejected = 0;
        while rejected < m && sorted[rejected] * ((m - rejected) as f64) < stats::ALPHA {
            rejected += 1;
        }
        let threshold = if rejected == 0 { f64::NEG_INFINITY } else { sorted[rejected - 1] };
        let got = stats::holm_adjust(&p).map_err(|e| e.to_string())?;
        for i in 0..m {
            let expect_reject = p[i] <= threshold;
            if (got.adjusted[i] - expected[i]).abs() > 1e-12 || got.reject[i] != expect_reject {
                bad.push(case);
                break;
            }
        }
    }
    ensure(bad.is_empty(), format!("{} of 100 vectors agree {bad:?}", 100 - bad.len()))
}

fn strings_up_to(len: usize) -> Vec<String> {
    let mut all = vec![String::new()];
    let mut frontier = vec![String::new()];
    for _ in 0..len {
        frontier = frontier.iter().flat_map(|s| ['a', 'b', 'c'].map(|c| format!("{s}{c}"))).collect();
        all.extend(frontier.iter().cloned());
    }
    all
}

/// Textbook recursion on suffixes, memoized per pair.
fn recursive_distance(a: &[u8], b: &[u8], memo: &mut [[Option<usize>; 7]; 7]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    if let Some(d) = memo[a.len()][b.len()] {
        return d;
    }
    let d = if a[0] == b[0] {
        recursive_distance(&a[1..], &b[1..], memo)
    } else {
        1 + recursive_distance(&a[1..], b, memo)
            .min(recursive_distance(a, &b[1..], memo))
            .min(recursive_distance(&a[1..], &b[1..], memo))
    };
    memo[a.len()][b.len()] = Some(d);
    d
}

fn edit_distances() -> Outcome {
    let words = strings_up_to(6);
    let mut pairs = 0u64;
    let mut wrong = Vec::new();
    for a in &words {
        for b in &words {
            let oracle = recursive_distance(a.as_bytes(), b.as_bytes(), &mut [[None; 7]; 7]);
            if edit_distance(a, b) != oracle && wrong.len() < 5 {
                wrong.push(format!("{a}/{b}"));
            }
            pairs += 1;
        }
    }
    ensure(wrong.is_empty(), format!("{pairs} pairs over {} strings {wrong:?}", words.len()))
}

fn phonetic_recovery() -> Outcome {
    let config = Config::bundled();
    let en = config.pack(Language::En).unwrap();
    let top = |word: &str| match_text(word, en).ok().and_then(|r| r.into_iter().next()).map(|r| (r.command, r.tier));
    let plays = top("plays");
    let plase = top("plase");
    let trials = dataset::sample();
    let glide = trials.iter().find(|t| t.id == "en-c02-b-vosk").ok_or("sample trial missing")?;
    let outcome = Evaluator::new(&config).map_err(|e| e.to_string())?.evaluate(glide).map_err(|e| e.to_string())?;
    let checks = [
        ("plays->place phonetic", plays == Some((Command::Place, Tier::Phonetic))),
        ("plase->place fuzzy", plase == Some((Command::Place, Tier::Fuzzy))),
        ("plays slide not recovered", !outcome.pipeline_top),
    ];
    let detail = format!(
        "plays {plays:?}, plase {plase:?}, \"{}\" pipeline_top={} | {}",
        glide.hypotheses[0].text,
        outcome.pipeline_top,
        checks.iter().map(|(n, ok)| format!("{n}: {}", if *ok { "ok" } else { "no" })).collect::<Vec<_>>().join(", ")
    );
    ensure(checks.iter().all(|(_, ok)| *ok), detail)
}

fn grammar_round_trip() -> Outcome {
    let config = Config::bundled();
    let mut checked = 0;
    let mut failed = Vec::new();
    for lang in Language::ALL {
        let catalog = CompiledCatalog::new(&config.catalog, lang).map_err(|e| e.to_string())?;
        let pack = config.pack(lang).unwrap();
        for spec in &config.catalog.blocks {
            checked += 1;
            let phrase = catalog.grammar(&spec.opcode).unwrap().canonical_utterance();
            let tokens = normalize(&phrase, pack).numbers_resolved;
            let expected = BlockInstantiation::with_defaults(spec);
            match catalog.parse_remainder(&tokens) {
                Ok(ranked) if ranked[0].opcode == expected.opcode && ranked[0].slot_values == expected.slot_values => {}
                _ => failed.push(format!("{lang}:{}", spec.opcode)),
            }
        }
    }
    ensure(failed.is_empty(), format!("{}/{checked} blocks {failed:?}", checked - failed.len()))
}

fn pick_block(ws: &Workspace, rng: &mut ChaCha8Rng) -> BlockId {
    let ids: Vec<BlockId> = ws.sprite().blocks.keys().copied().collect();
    ids.choose(rng).copied().unwrap_or(BlockId(u32::MAX))
}

fn random_op(ws: &mut Workspace, rng: &mut ChaCha8Rng) {
    let catalog = ws.catalog().clone();
    let inst = BlockInstantiation::with_defaults(catalog.blocks.choose(rng).unwrap());
    let names = ["score", "lives", "speed"];
    let _ = match rng.gen_range(0..14) {
        0..=2 => ws.place_block(&inst).map(drop),
        3 => ws.place_block_at(&inst, Position { x: rng.gen_range(0..300), y: rng.gen_range(0..300) }).map(drop),
        4 | 5 => {
            let (a, b) = (pick_block(ws, rng), pick_block(ws, rng));
            ws.connect(a, b)
        }
        6 => {
            let (a, b) = (pick_block(ws, rng), pick_block(ws, rng));
            ws.nest(a, b)
        }
        7 => ws.delete_block(pick_block(ws, rng)).map(drop),
        8 => {
            let id = pick_block(ws, rng);
            let slot = ws.block(id).and_then(|b| b.inputs.keys().find(|k| *k != "SUBSTACK").cloned());
            match slot {
                Some(s) => ws.set_input(id, &s, Value::Number(f64::from(rng.gen_range(-50..50)))),
                None => Ok(()),
            }
        }
        9 => {
            let id = if rng.gen_bool(0.8) { Some(pick_block(ws, rng)) } else { None };
            ws.focus(id)
        }
        10 => {
            if rng.gen_bool(0.5) {
                ws.add_sprite(None).map(drop)
            } else {
                let id = ws.project().sprites.choose(rng).unwrap().id;
                ws.select_sprite(id)
            }
        }
        11 => {
            let scope = if rng.gen_bool(0.5) { VariableScope::Global } else { VariableScope::Sprite };
            let name = names.choose(rng).unwrap();
            ws.create_variable(name, scope).and_then(|()| ws.set_variable(name, Value::Number(1.0)))
        }
        12 => {
            ws.open_palette(Category::ALL.choose(rng).copied());
            Ok(())
        }
        _ => {
            if rng.gen_bool(0.7) {
                ws.undo()
            } else {
                ws.redo()
            }
        }
    };
}

fn workspace_safety() -> Outcome {
    let catalog = Arc::new(Config::bundled().catalog);
    let mut failures = Vec::new();
    let mut applied = 0usize;
    for seed in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ws = Workspace::new(catalog.clone(), 100);
        let origin = ws.serialize();
        for step in 0..50 {
            random_op(&mut ws, &mut rng);
            applied += 1;
            if let Err(v) = ws.check() {
                failures.push(format!("seed {seed} step {step}: {v}"));
                break;
            }
        }
        while ws.undo().is_ok() {}
        if ws.serialize() != origin {
            failures.push(format!("seed {seed}: undo did not return to origin"));
        }
    }
    ensure(failures.is_empty(), format!("1000 sequences, {applied} ops {:?}", &failures[..failures.len().min(3)]))
}

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["blockvoice"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run(argv, &mut Cursor::new(Vec::new()), &mut out, &mut err);
    (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&err).into_owned())
}

fn hierarchy() -> Outcome {
    let trials = dataset::sample();
    let e = report::evaluate(&Config::bundled(), &trials, &TrialFilter::default(), 4).map_err(|e| e.to_string())?;
    let clean = e.report.hierarchy_violations.len();

    let mut injected = trials.clone();
    injected[0].outcome =
        Some(TrialOutcome { baseline_top: true, baseline_any: false, pipeline_top: true, pipeline_any: true });
    let dir = std::env::temp_dir().join(format!("blockvoice-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let path = dir.join("injected.jsonl");
    std::fs::write(&path, dataset::to_jsonl(&injected)).map_err(|e| e.to_string())?;
    let (code, stdout, _) = run_cli(&["eval", "--dataset", path.to_str().unwrap()]);
    let _ = std::fs::remove_dir_all(&dir);
    let named = stdout.contains(&injected[0].id);
    ensure(
        clean == 0 && code == cli::INVALID && named,
        format!("{} trials, {clean} violations; injected (T,F,T,T) exit {code}, reported={named}", trials.len()),
    )
}

fn pipeline_gate() -> Outcome {
    const WORDS: [&str; 32] = [
        "place", "plays", "plase", "play", "move", "10", "steps", "wait", "1", "seconds", "delete", "click", "3",
        "12", "undo", "redo", "yes", "no", "open", "motion", "looks", "set", "to", "5", "connect", "show", "hide",
        "say", "hello", "repeat", "times", "xylophone",
    ];
    let config = Config::bundled();
    let mut rng = ChaCha8Rng::seed_from_u64(10_000);
    let mut session = Session::new(&config, Language::En).map_err(|e| e.to_string())?;
    let t_confirm = session.settings().t_confirm;
    let mut now = 0;
    session.handle_event(now, Event::Ptt { state: PttState::Down });
    let (mut voice_mutations, mut below, mut unexplained) = (0, 0, 0);
    for _ in 0..10_000 {
        now += 500;
        let event = if rng.gen_ratio(1, 10) {
            Event::Confirm { value: if rng.gen_bool(0.7) { Answer::Yes } else { Answer::No } }
        } else {
            let hypotheses = (0..rng.gen_range(1..=3))
                .map(|rank| {
                    let len = rng.gen_range(1..=5);
                    let text = (0..len).map(|_| *WORDS.choose(&mut rng).unwrap()).collect::<Vec<_>>().join(" ");
                    let confidence = rng.gen_bool(0.8).then(|| rng.gen::<f64>());
                    Hypothesis { text, confidence, rank }
                })
                .collect();
            Event::Transcript { hypotheses, overlay_generation: None }
        };
        let before = session.workspace().serialize();
        let step = session.handle_event(now, event);
        for m in &step.mutations {
            if m.source == Source::Voice {
                voice_mutations += 1;
                if m.confidence.is_none_or(|c| c < t_confirm) {
                    below += 1;
                }
            }
        }
        if step.mutations.is_empty() && session.workspace().serialize() != before {
            unexplained += 1;
        }
    }
    ensure(
        below == 0 && unexplained == 0 && voice_mutations > 0,
        format!("10000 transcripts, {voice_mutations} voice mutations, {below} below t_confirm={t_confirm}, {unexplained} unrecorded changes"),
    )
}

const TRUE_COEFFICIENTS: [f64; 6] = [0.4, -0.8, 0.5, -0.3, 0.6, 1.0];

fn synthetic(seed: u64, beta: &[f64; 6]) -> (Vec<Vec<f64>>, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(5000);
    let mut y = Vec::with_capacity(5000);
    for _ in 0..5000 {
        let complexity = rng.gen_range(0..3);
        let row = vec![
            1.0,
            f64::from(u8::from(rng.gen_bool(0.5))),
            f64::from(u8::from(rng.gen_bool(0.5))),
            f64::from(u8::from(rng.gen_bool(0.5))),
            f64::from(u8::from(complexity == 1)),
            f64::from(u8::from(complexity == 2)),
        ];
        let eta: f64 = row.iter().zip(beta).map(|(x, b)| x * b).sum();
        y.push(rng.gen::<f64>() < 1.0 / (1.0 + (-eta).exp()));
        rows.push(row);
    }
    (rows, y)
}

fn logistic() -> Outcome {
    let names: Vec<String> = IMPROVEMENT_COLUMNS.iter().map(|s| s.to_string()).collect();
    let fit = |seed: u64, beta: &[f64; 6]| {
        let (rows, y) = synthetic(seed, beta);
        stats::logistic_fit(&names, &rows, &y).map_err(|e| e.to_string())
    };

    let fixed = fit(20_260_411, &TRUE_COEFFICIENTS)?;
    let max_error = fixed
        .coefficients
        .iter()
        .zip(TRUE_COEFFICIENTS)
        .map(|(c, b)| (c.estimate - b).abs())
        .fold(0.0, f64::max);

    let mut covered = 0;
    let mut within = 0;
    for seed in 0..50 {
        let f = fit(seed, &TRUE_COEFFICIENTS)?;
        let pairs = || f.coefficients.iter().zip(TRUE_COEFFICIENTS);
        if pairs().all(|(c, b)| c.ci_low <= b.exp() && b.exp() <= c.ci_high) {
            covered += 1;
        }
        if pairs().all(|(c, b)| (c.estimate - b).abs() <= 0.05) {
            within += 1;
        }
    }

    let null = fit(20_260_411, &[0.0; 6])?;
    let null_ors: Vec<f64> = null.coefficients[1..].iter().map(|c| c.odds_ratio).collect();
    let null_ok = null_ors.iter().all(|or| (0.9..=1.1).contains(or));

    ensure(
        max_error <= 0.05 && covered >= 45 && null_ok,
        format!(
            "fixed seed max |b-b0| {max_error:.3} (<=0.05), {within}/50 seeds all within 0.05, CI coverage {covered}/50 (>=45), null ORs [{}]",
            null_ors.iter().map(|o| format!("{o:.3}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn determinism() -> Outcome {
    let (c1, a, _) = run_cli(&["eval", "--sample", "--format", "machine", "--jobs", "1"]);
    let (c2, b, _) = run_cli(&["eval", "--sample", "--format", "machine", "--jobs", "4"]);
    let doc: serde_json::Value = serde_json::from_str(&a).map_err(|e| e.to_string())?;
    let rate = |name: &str| {
        doc["report"]["summary"].as_array().unwrap().iter().find(|s| s["condition"] == name).unwrap()["rate"]
            .as_f64()
            .unwrap()
    };
    let (base, pipe) = (rate("baseline_top"), rate("pipeline_top"));
    ensure(
        c1 == cli::OK && c2 == cli::OK && a == b && pipe >= base,
        format!("{} bytes identical={}, base-top {base}% pipe-top {pipe}%", a.len(), a == b),
    )
}

fn wer_fixture() -> Outcome {
    let config = Config::bundled();
    let mut rows = 0;
    let mut wrong = Vec::new();
    let mut max = 0.0f64;
    for line in include_str!("fixtures/wer_pairs.tsv").lines().filter(|l| !l.starts_with('#')) {
        let f: Vec<&str> = line.split('\t').collect();
        let lang: Language = f[0].parse().map_err(|_| format!("bad language {}", f[0]))?;
        let expected = 100.0 * f[3].parse::<f64>().unwrap() / f[4].parse::<f64>().unwrap();
        let got = stats::wer(f[1], f[2], config.pack(lang).unwrap()).map_err(|e| e.to_string())?;
        max = max.max(got);
        if (got - expected).abs() > 1e-9 {
            wrong.push(format!("\"{}\"/\"{}\": {got} vs {expected}", f[1], f[2]));
        }
        rows += 1;
    }
    ensure(wrong.is_empty() && rows == 10 && max > 100.0, format!("{rows} pairs, max {max}% {wrong:?}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        ("effect sizes and gains", effect_sizes),
        ("effect size labels", size_labels),
        ("mcnemar exact vs enumeration", mcnemar),
        ("holm vs sequential step-down", holm),
        ("edit distance vs recursion", edit_distances),
        ("phonetic recovery", phonetic_recovery),
        ("grammar round trip", grammar_round_trip),
        ("workspace safety", workspace_safety),
        ("hierarchy invariant", hierarchy),
        ("pipeline confidence gate", pipeline_gate),
        ("logistic regression recovery", logistic),
        ("end-to-end determinism", determinism),
        ("word error rate", wer_fixture),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let (tag, detail) = match check() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {name} ({:.2}s): {detail}", start.elapsed().as_secs_f64());
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
