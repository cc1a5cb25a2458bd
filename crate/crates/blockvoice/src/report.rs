//! Batch evaluation and report rendering.

use std::fmt::Write as _;
use std::thread;

use blockvoice_core::config::Config;
use blockvoice_core::eval::{
    build_report, improvement_model, ComparisonRow, EvalError, EvalReport, Evaluator, Scope, Trial,
    TrialFilter, TrialOutcome,
};
use blockvoice_core::stats::{self, LogisticFit};
use serde::{Deserialize, Serialize};

use crate::config_dir;

pub const MACHINE_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub id: String,
    /// Whether the outcome came with the dataset rather than from the engine.
    pub recorded: bool,
    #[serde(flatten)]
    pub outcome: TrialOutcome,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelResult {
    Fit(LogisticFit),
    Error(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub filter: TrialFilter,
    pub outcomes: Vec<TrialResult>,
    pub report: EvalReport,
    pub improvement_model: ModelResult,
}

impl Evaluation {
    /// Hierarchy violations among outcomes that came with the dataset.
    pub fn recorded_violations(&self) -> usize {
        self.report
            .hierarchy_violations
            .iter()
            .filter(|v| self.outcomes.iter().any(|o| o.id == v.id && o.recorded))
            .count()
    }
}

/// The machine-readable report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MachineReport {
    pub format_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub config_hash: String,
    pub dataset_hash: String,
    #[serde(flatten)]
    pub evaluation: Evaluation,
}

impl MachineReport {
    pub fn new(evaluation: Evaluation, config: &Config, dataset_bytes: &[u8]) -> MachineReport {
        MachineReport {
            format_version: MACHINE_VERSION,
            tool: env!("CARGO_PKG_NAME").into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            config_hash: config_dir::config_hash(config),
            dataset_hash: config_dir::sha256(dataset_bytes),
            evaluation,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn outcomes(config: &Config, trials: &[&Trial]) -> Result<Vec<TrialOutcome>, EvalError> {
    let evaluator = Evaluator::new(config)?;
    trials.iter().map(|t| evaluator.outcome(t)).collect()
}

/// Evaluates the trials selected by `filter` on `jobs` workers, each with its
/// own engine. Results are folded in trial-id order.
pub fn evaluate(config: &Config, trials: &[Trial], filter: &TrialFilter, jobs: usize) -> Result<Evaluation, EvalError> {
    let mut selected: Vec<&Trial> = trials.iter().filter(|t| filter.matches(t)).collect();
    selected.sort_by(|a, b| a.id.cmp(&b.id));
    let jobs = jobs.max(1).min(selected.len().max(1));
    let chunk = selected.len().div_ceil(jobs).max(1);
    let parts: Vec<Result<Vec<TrialOutcome>, EvalError>> = thread::scope(|s| {
        let handles: Vec<_> = selected.chunks(chunk).map(|part| s.spawn(move || outcomes(config, part))).collect();
        handles.into_iter().map(|h| h.join().expect("evaluation worker panicked")).collect()
    });
    let mut all = Vec::with_capacity(selected.len());
    for part in parts {
        all.extend(part?);
    }
    let paired: Vec<(&Trial, TrialOutcome)> = selected.iter().copied().zip(all.iter().copied()).collect();
    let report = build_report(&paired)?;
    let improvement_model = match improvement_model(&paired) {
        Ok(fit) => ModelResult::Fit(fit),
        Err(e) => ModelResult::Error(e.to_string()),
    };
    let outcomes = paired
        .iter()
        .map(|(t, o)| TrialResult { id: t.id.clone(), recorded: t.outcome.is_some(), outcome: *o })
        .collect();
    Ok(Evaluation { filter: filter.clone(), outcomes, report, improvement_model })
}

fn p_value(p: f64) -> String {
    if p >= 0.01 {
        format!("{p:.3}")
    } else {
        format!("{p:.1e}")
    }
}

fn scope_heading(scope: &Scope) -> Option<&'static str> {
    match scope {
        Scope::Overall => Some("Overall Performance"),
        Scope::Language(_) => Some("Language"),
        Scope::Complexity(_) => Some("Complexity"),
        Scope::Service(_) => Some("ASR Service"),
    }
}

fn row_line(out: &mut String, r: &ComparisonRow) {
    let metric = if r.scope == Scope::Overall { String::new() } else { r.scope.label() };
    let _ = writeln!(
        out,
        "{:<9} {:<21} {:>8.1} {:>8.1} {:>+6.1} {:>5.2} ({}) {:>9} {:>9} {:>3} {:>4}",
        metric,
        r.comparison.name(),
        stats::round1(r.base_rate),
        stats::round1(r.improved_rate),
        stats::round1(r.gain_points),
        stats::round2(r.cohens_h),
        r.effect.short(),
        p_value(r.mcnemar_p),
        p_value(r.holm_adjusted_p),
        if r.significant { "*" } else { "" },
        r.n,
    );
}

/// Human-readable report laid out like the published comparison table.
pub fn render_table(e: &Evaluation) -> String {
    let report = &e.report;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<9} {:<21} {:>8} {:>8} {:>6} {:>9} {:>9} {:>9} {:>3} {:>4}",
        "Metric", "Comparison", "Base (%)", "Impr (%)", "Gain", "Cohen's h", "McNemar p", "Holm p", "sig", "n"
    );
    let mut last_heading = None;
    for r in &report.rows {
        let heading = scope_heading(&r.scope);
        if heading != last_heading {
            let _ = writeln!(out, "{}", heading.unwrap_or_default());
            last_heading = heading;
        }
        row_line(&mut out, r);
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "{}", summary_line(report));
    if !report.hierarchy_violations.is_empty() {
        let _ = writeln!(out, "hierarchy violations: {}", report.hierarchy_violations.len());
        for v in &report.hierarchy_violations {
            let _ = writeln!(out, "  {} ({:?})", v.id, v.family);
        }
    }
    let _ = writeln!(out);
    match &e.improvement_model {
        ModelResult::Fit(fit) => {
            let _ = writeln!(out, "Odds of improvement (Pipe-Top succeeds, Base-Top fails), n={}", fit.n);
            let _ = writeln!(out, "{:<18} {:>8} {:>7} {:>8} {:>17} {:>9}", "term", "estimate", "se", "OR", "95% CI", "p");
            for c in &fit.coefficients {
                let _ = writeln!(
                    out,
                    "{:<18} {:>8.3} {:>7.3} {:>8.3} {:>17} {:>9}",
                    c.name,
                    c.estimate,
                    c.std_error,
                    c.odds_ratio,
                    format!("[{:.3}, {:.3}]", c.ci_low, c.ci_high),
                    p_value(c.p_value)
                );
            }
        }
        ModelResult::Error(e) => {
            let _ = writeln!(out, "Odds of improvement: not estimable ({e})");
        }
    }
    out
}

/// One line with the overall rate of every condition.
pub fn summary_line(report: &EvalReport) -> String {
    let parts: Vec<String> = report
        .summary
        .iter()
        .map(|c| format!("{} {:.1}%", c.condition.short(), stats::round1(c.rate)))
        .collect();
    format!("n={}: {}", report.n, parts.join(", "))
}
