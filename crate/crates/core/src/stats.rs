//! Statistics for paired evaluation: success rates, Cohen's h, the exact
//! McNemar test, Holm step-down correction, word error rate and a
//! fixed-effects logistic regression fitted by IRLS.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::LanguagePack;
use crate::distance::levenshtein;
use crate::textnorm::normalize;

pub const ALPHA: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum StatsError {
    #[error("{value} is not a proportion in [0, 1]")]
    Domain { value: f64 },
    #[error("reference transcript is empty")]
    EmptyReference,
    #[error("filter selects no trials")]
    EmptySelection,
    #[error("separation detected on '{column}': the response is perfectly predicted")]
    SeparationDetected { column: String },
    #[error("design matrix is singular")]
    SingularDesign,
    #[error("design has {rows} rows but {responses} responses")]
    DimensionMismatch { rows: usize, responses: usize },
    #[error("IRLS did not converge in {iterations} iterations")]
    NoConvergence { iterations: usize },
}

/// Rounds half away from zero to one decimal.
pub fn round1(x: f64) -> f64 {
    libm::round(x * 10.0) / 10.0
}

pub fn round2(x: f64) -> f64 {
    libm::round(x * 100.0) / 100.0
}

/// `100 * successes / n`, unrounded.
pub fn percentage(successes: usize, n: usize) -> Result<f64, StatsError> {
    if n == 0 {
        return Err(StatsError::EmptySelection);
    }
    Ok(100.0 * successes as f64 / n as f64)
}

/// Percentage rounded to one decimal.
pub fn success_rate(successes: usize, n: usize) -> Result<f64, StatsError> {
    percentage(successes, n).map(round1)
}

fn check_proportion(p: f64) -> Result<f64, StatsError> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(StatsError::Domain { value: p })
    }
}

/// `|2 asin(sqrt p2) - 2 asin(sqrt p1)|`.
pub fn cohens_h(p1: f64, p2: f64) -> Result<f64, StatsError> {
    let phi = |p: f64| 2.0 * libm::asin(libm::sqrt(p));
    Ok(libm::fabs(phi(check_proportion(p2)?) - phi(check_proportion(p1)?)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectSize {
    Negligible,
    Small,
    Medium,
    Large,
}

impl EffectSize {
    /// Boundaries belong to the higher label: 0.5 is medium, 0.8 large.
    pub fn classify(h: f64) -> EffectSize {
        if h >= 0.8 {
            EffectSize::Large
        } else if h >= 0.5 {
            EffectSize::Medium
        } else if h >= 0.2 {
            EffectSize::Small
        } else {
            EffectSize::Negligible
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            EffectSize::Negligible => "-",
            EffectSize::Small => "s",
            EffectSize::Medium => "m",
            EffectSize::Large => "l",
        }
    }
}

impl fmt::Display for EffectSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

/// Exact two-sided McNemar test on the discordant counts: `b` pairs where
/// only the improved condition succeeds, `c` where only the base does.
pub fn mcnemar_exact(b: u64, c: u64) -> f64 {
    let n = b + c;
    if n == 0 {
        return 1.0;
    }
    let k = b.min(c);
    let p = if n <= 126 {
        // Exact integer tail; C(126, 63) still fits in a u128.
        let mut coef: u128 = 1;
        let mut tail: u128 = 0;
        for i in 0..=k {
            if i > 0 {
                coef = coef * u128::from(n - i + 1) / u128::from(i);
            }
            tail += coef;
        }
        tail as f64 / libm::ldexp(1.0, (n - 1) as i32)
    } else {
        let ln2 = core::f64::consts::LN_2;
        let lchoose = |i: u64| {
            libm::lgamma(n as f64 + 1.0) - libm::lgamma(i as f64 + 1.0) - libm::lgamma((n - i) as f64 + 1.0)
        };
        2.0 * (0..=k).map(|i| libm::exp(lchoose(i) - n as f64 * ln2)).sum::<f64>()
    };
    p.min(1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolmResult {
    /// Adjusted p-values in input order.
    pub adjusted: Vec<f64>,
    pub reject: Vec<bool>,
}

/// Holm step-down adjustment at [`ALPHA`].
pub fn holm_adjust(pvalues: &[f64]) -> Result<HolmResult, StatsError> {
    for &p in pvalues {
        check_proportion(p)?;
    }
    let m = pvalues.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| pvalues[a].total_cmp(&pvalues[b]));
    let mut adjusted = vec![0.0; m];
    let mut running: f64 = 0.0;
    for (j, &i) in order.iter().enumerate() {
        running = running.max(((m - j) as f64 * pvalues[i]).min(1.0));
        adjusted[i] = running;
    }
    let reject = adjusted.iter().map(|&p| p < ALPHA).collect();
    Ok(HolmResult { adjusted, reject })
}

/// Word error rate in percent after normalization; may exceed 100.
pub fn wer(reference: &str, hypothesis: &str, pack: &LanguagePack) -> Result<f64, StatsError> {
    let r = normalize(reference, pack).numbers_resolved;
    if r.is_empty() {
        return Err(StatsError::EmptyReference);
    }
    let h = normalize(hypothesis, pack).numbers_resolved;
    Ok(100.0 * levenshtein(&r, &h) as f64 / r.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
    pub p_value: f64,
    pub odds_ratio: f64,
    /// 95% Wald interval on the odds-ratio scale.
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    pub coefficients: Vec<Coefficient>,
    pub iterations: usize,
    pub log_likelihood: f64,
    pub n: usize,
}

impl LogisticFit {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }
}

const Z_975: f64 = 1.959_963_984_540_054;
const MAX_ITERATIONS: usize = 100;
const MAX_ABS_ETA: f64 = 30.0;

/// Maximum-likelihood logistic regression. `rows` must already contain the
/// intercept column; `names` labels the columns.
pub fn logistic_fit(names: &[String], rows: &[Vec<f64>], y: &[bool]) -> Result<LogisticFit, StatsError> {
    if rows.len() != y.len() {
        return Err(StatsError::DimensionMismatch { rows: rows.len(), responses: y.len() });
    }
    let p = names.len();
    if rows.iter().any(|r| r.len() != p) || rows.len() < p {
        return Err(StatsError::SingularDesign);
    }
    detect_separation(names, rows, y)?;

    let mut beta = vec![0.0; p];
    let mut info = information(rows, &beta);
    cholesky(&info, p).ok_or(StatsError::SingularDesign)?;
    for iteration in 1..=MAX_ITERATIONS {
        let mut grad = vec![0.0; p];
        for (row, &yi) in rows.iter().zip(y) {
            let mu = sigmoid(dot(row, &beta));
            let resid = f64::from(u8::from(yi)) - mu;
            for (g, x) in grad.iter_mut().zip(row) {
                *g += x * resid;
            }
        }
        let l = cholesky(&info, p).ok_or_else(|| separated(names))?;
        let step = cholesky_solve(&l, p, &grad);
        for (b, s) in beta.iter_mut().zip(&step) {
            *b += s;
        }
        if rows.iter().any(|r| dot(r, &beta).abs() > MAX_ABS_ETA) {
            return Err(separated(names));
        }
        info = information(rows, &beta);
        if step.iter().all(|s| s.abs() < 1e-10) {
            let l = cholesky(&info, p).ok_or_else(|| separated(names))?;
            let inverse = cholesky_inverse(&l, p);
            let coefficients = names
                .iter()
                .enumerate()
                .map(|(j, name)| {
                    let estimate = beta[j];
                    let std_error = libm::sqrt(inverse[j * p + j]);
                    let z = estimate / std_error;
                    Coefficient {
                        name: name.clone(),
                        estimate,
                        std_error,
                        z,
                        p_value: libm::erfc(libm::fabs(z) / core::f64::consts::SQRT_2),
                        odds_ratio: libm::exp(estimate),
                        ci_low: libm::exp(estimate - Z_975 * std_error),
                        ci_high: libm::exp(estimate + Z_975 * std_error),
                    }
                })
                .collect();
            let log_likelihood = rows
                .iter()
                .zip(y)
                .map(|(r, &yi)| {
                    let eta = dot(r, &beta);
                    if yi { -libm::log1p(libm::exp(-eta)) } else { -libm::log1p(libm::exp(eta)) }
                })
                .sum();
            return Ok(LogisticFit { coefficients, iterations: iteration, log_likelihood, n: rows.len() });
        }
    }
    Err(StatsError::NoConvergence { iterations: MAX_ITERATIONS })
}

fn separated(names: &[String]) -> StatsError {
    StatsError::SeparationDetected { column: names.join("+") }
}

/// A constant response, or a 0/1 column whose set rows share one response,
/// makes the MLE diverge.
fn detect_separation(names: &[String], rows: &[Vec<f64>], y: &[bool]) -> Result<(), StatsError> {
    if y.iter().all(|&v| v) || y.iter().all(|&v| !v) {
        return Err(StatsError::SeparationDetected { column: names.first().cloned().unwrap_or_default() });
    }
    for (j, name) in names.iter().enumerate() {
        let column = rows.iter().map(|r| r[j]);
        let is_indicator = column.clone().all(|v| v == 0.0 || v == 1.0);
        if !is_indicator || column.clone().all(|v| v == 1.0) {
            continue;
        }
        let mut seen = [false; 2];
        for (r, &yi) in rows.iter().zip(y) {
            if r[j] == 1.0 {
                seen[usize::from(yi)] = true;
            }
        }
        if seen[0] != seen[1] {
            return Err(StatsError::SeparationDetected { column: name.clone() });
        }
    }
    Ok(())
}

fn sigmoid(eta: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-eta))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `X' W X` as a row-major p×p matrix.
fn information(rows: &[Vec<f64>], beta: &[f64]) -> Vec<f64> {
    let p = beta.len();
    let mut m = vec![0.0; p * p];
    for row in rows {
        let mu = sigmoid(dot(row, beta));
        let w = mu * (1.0 - mu);
        for i in 0..p {
            for j in 0..=i {
                m[i * p + j] += w * row[i] * row[j];
            }
        }
    }
    for i in 0..p {
        for j in 0..i {
            m[j * p + i] = m[i * p + j];
        }
    }
    m
}

/// Lower-triangular factor, or `None` if the matrix is not positive definite.
fn cholesky(a: &[f64], p: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; p * p];
    let scale = (0..p).map(|i| a[i * p + i].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for i in 0..p {
        for j in 0..=i {
            let s = a[i * p + j] - (0..j).map(|k| l[i * p + k] * l[j * p + k]).sum::<f64>();
            if i == j {
                if s <= 1e-12 * scale {
                    return None;
                }
                l[i * p + i] = libm::sqrt(s);
            } else {
                l[i * p + j] = s / l[j * p + j];
            }
        }
    }
    Some(l)
}

fn cholesky_solve(l: &[f64], p: usize, b: &[f64]) -> Vec<f64> {
    let mut z = vec![0.0; p];
    for i in 0..p {
        z[i] = (b[i] - (0..i).map(|k| l[i * p + k] * z[k]).sum::<f64>()) / l[i * p + i];
    }
    let mut x = vec![0.0; p];
    for i in (0..p).rev() {
        x[i] = (z[i] - (i + 1..p).map(|k| l[k * p + i] * x[k]).sum::<f64>()) / l[i * p + i];
    }
    x
}

fn cholesky_inverse(l: &[f64], p: usize) -> Vec<f64> {
    let mut inv = vec![0.0; p * p];
    for j in 0..p {
        let mut e = vec![0.0; p];
        e[j] = 1.0;
        for (i, v) in cholesky_solve(l, p, &e).into_iter().enumerate() {
            inv[i * p + j] = v;
        }
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Config, Language};
    use alloc::string::ToString;

    #[test]
    fn rates() {
        assert_eq!(success_rate(89, 192), Ok(46.4));
        assert_eq!(success_rate(0, 7), Ok(0.0));
        assert_eq!(success_rate(64, 64), Ok(100.0));
        assert_eq!(success_rate(0, 0), Err(StatsError::EmptySelection));
    }

    #[test]
    fn effect_sizes() {
        let h = cohens_h(0.464, 0.849).unwrap();
        assert!((0.84..=0.855).contains(&h), "{h}");
        assert!((cohens_h(0.271, 0.823).unwrap() - 1.18).abs() < 0.005);
        assert_eq!(cohens_h(0.3, 0.3), Ok(0.0));
        assert!(cohens_h(1.2, 0.3).is_err());
        assert_eq!(EffectSize::classify(0.5), EffectSize::Medium);
        assert_eq!(EffectSize::classify(0.8), EffectSize::Large);
        assert_eq!(EffectSize::classify(0.19), EffectSize::Negligible);
        assert_eq!(EffectSize::classify(0.2), EffectSize::Small);
    }

    #[test]
    fn mcnemar_examples() {
        assert_eq!(mcnemar_exact(10, 2), 158.0 / 4096.0);
        assert_eq!(mcnemar_exact(7, 7), 1.0);
        assert_eq!(mcnemar_exact(0, 0), 1.0);
        let big = mcnemar_exact(150, 100);
        assert!(big > 0.0 && big < 0.01);
    }

    #[test]
    fn holm_examples() {
        let r = holm_adjust(&[0.01, 0.04, 0.03]).unwrap();
        let expect = [0.03, 0.06, 0.06];
        for (a, e) in r.adjusted.iter().zip(expect) {
            assert!((a - e).abs() < 1e-12);
        }
        assert_eq!(r.reject, [true, false, false]);
        let r = holm_adjust(&[1.0, 1.0]).unwrap();
        assert_eq!((r.adjusted, r.reject), (vec![1.0, 1.0], vec![false, false]));
        let r = holm_adjust(&[0.049]).unwrap();
        assert_eq!((r.adjusted, r.reject), (vec![0.049], vec![true]));
    }

    #[test]
    fn wer_examples() {
        let config = Config::bundled();
        let en = config.pack(Language::En).unwrap();
        assert_eq!(wer("place move ten steps", "place moved ten", en), Ok(50.0));
        assert_eq!(wer("place five", "place 5", en), Ok(0.0));
        assert_eq!(wer("a", "b c", en), Ok(200.0));
        assert_eq!(wer("", "b", en), Err(StatsError::EmptyReference));
    }

    #[test]
    fn separation_and_singularity() {
        let names = ["intercept".to_string(), "x".to_string()];
        let rows = vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 1.0]];
        let err = logistic_fit(&names, &rows, &[true, false, true, true]).unwrap_err();
        assert_eq!(err, StatsError::SeparationDetected { column: "x".into() });
        let rows = vec![vec![1.0, 2.0], vec![1.0, 2.0], vec![1.0, 2.0]];
        assert_eq!(logistic_fit(&names, &rows, &[true, false, true]), Err(StatsError::SingularDesign));
    }

    #[test]
    fn fits_a_known_two_group_model() {
        // Group 0: 3/10 successes, group 1: 6/10. The MLE reproduces the
        // group log-odds exactly.
        let names = ["intercept".to_string(), "x".to_string()];
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for (x, successes) in [(0.0, 3), (1.0, 6)] {
            for i in 0..10 {
                rows.push(vec![1.0, x]);
                y.push(i < successes);
            }
        }
        let fit = logistic_fit(&names, &rows, &y).unwrap();
        let logit = |p: f64| libm::log(p / (1.0 - p));
        assert!((fit.coefficients[0].estimate - logit(0.3)).abs() < 1e-9);
        assert!((fit.coefficients[1].estimate - (logit(0.6) - logit(0.3))).abs() < 1e-9);
        // Var of a log-odds difference: sum of 1/(n p (1-p)) per group.
        let se = libm::sqrt(1.0 / (10.0 * 0.3 * 0.7) + 1.0 / (10.0 * 0.6 * 0.4));
        assert!((fit.coefficients[1].std_error - se).abs() < 1e-9);
        let c = &fit.coefficients[1];
        assert!(c.ci_low < c.odds_ratio && c.odds_ratio < c.ci_high);
    }
}
