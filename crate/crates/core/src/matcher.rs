//! Command matching: split an utterance into command and remainder, trying
//! exact alias prefixes first, then phonetic keys, then edit-distance
//! similarity.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{Command, Language, LanguagePack};
use crate::distance::similarity;
use crate::phonetic::{self, PhoneticKey};
use crate::textnorm::NormalizedUtterance;

pub const PHONETIC_SCORE: f64 = 0.9;
pub const DEFAULT_FUZZY_FLOOR: f64 = 0.6;

/// One ASR candidate transcript.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    #[serde(default)]
    pub rank: usize,
}

impl Hypothesis {
    pub fn new(text: impl Into<String>, rank: usize) -> Self {
        Hypothesis { text: text.into(), confidence: None, rank }
    }

    pub fn with_confidence(text: impl Into<String>, rank: usize, confidence: f64) -> Self {
        Hypothesis { text: text.into(), confidence: Some(confidence), rank }
    }

    /// ASR confidence clamped to [0, 1], or the rank prior when absent.
    pub fn weight(&self) -> f64 {
        match self.confidence {
            Some(c) if c.is_nan() => 0.0,
            Some(c) => c.clamp(0.0, 1.0),
            None => rank_prior(self.rank),
        }
    }
}

/// Ranks the hypotheses of an event in list order.
pub fn ranked<I, S>(texts: I) -> Vec<Hypothesis>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    texts.into_iter().enumerate().map(|(rank, t)| Hypothesis::new(t, rank)).collect()
}

pub fn rank_prior(rank: usize) -> f64 {
    1.0 / (1.0 + rank as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Exact,
    Phonetic,
    Fuzzy,
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tier::Exact => "exact",
            Tier::Phonetic => "phonetic",
            Tier::Fuzzy => "fuzzy",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub command: Command,
    /// The alias the command tokens were matched against.
    pub alias: String,
    pub remainder: Vec<String>,
    pub tier: Tier,
    pub match_score: f64,
    pub confidence: f64,
    pub source_hypothesis: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error("no hypotheses")]
    EmptyEvent,
    #[error("no command matched")]
    NoMatch,
}

struct Alias {
    command: Command,
    text: String,
    tokens: Vec<String>,
    keys: Vec<PhoneticKey>,
}

/// Precomputed alias tokens and phonetic keys for one language pack.
pub struct Matcher {
    language: Language,
    number_words: alloc::collections::BTreeMap<String, i64>,
    aliases: Vec<Alias>,
    fuzzy_floor: f64,
}

impl Matcher {
    pub fn new(pack: &LanguagePack, fuzzy_floor: f64) -> Self {
        let aliases = pack
            .aliases()
            .map(|(command, text)| {
                let tokens: Vec<String> = text.split(' ').map(ToString::to_string).collect();
                let keys = tokens.iter().map(|t| phonetic::encode(t, pack.language)).collect();
                Alias { command, text: text.to_string(), tokens, keys }
            })
            .collect();
        Matcher { language: pack.language, number_words: pack.number_words.clone(), aliases, fuzzy_floor }
    }

    pub fn language(&self) -> Language {
        self.language
    }

    pub fn fuzzy_floor(&self) -> f64 {
        self.fuzzy_floor
    }

    pub fn normalize(&self, text: &str) -> NormalizedUtterance {
        crate::textnorm::normalize_with(text, &self.number_words)
    }

    /// Longest alias that is a token prefix of the utterance.
    pub fn split_command(&self, u: &NormalizedUtterance) -> Option<(Command, Vec<String>)> {
        self.exact(&u.numbers_resolved).map(|(a, rest)| (a.command, rest.to_vec()))
    }

    fn exact<'a>(&self, tokens: &'a [String]) -> Option<(&Alias, &'a [String])> {
        self.aliases
            .iter()
            .filter(|a| tokens.starts_with(&a.tokens))
            .max_by_key(|a| a.tokens.len())
            .map(|a| (a, &tokens[a.tokens.len()..]))
    }

    /// Candidates for one hypothesis: the exact match if any, else every
    /// alias whose tokens all sound alike, else every alias above the fuzzy
    /// floor. Only the best candidate per command is kept.
    fn candidates(&self, tokens: &[String]) -> Vec<(&Alias, Tier, f64)> {
        if let Some((alias, _)) = self.exact(tokens) {
            return alloc::vec![(alias, Tier::Exact, 1.0)];
        }
        let mut out: Vec<(&Alias, Tier, f64)> = Vec::new();
        let phonetic: Vec<&Alias> = self
            .aliases
            .iter()
            .filter(|a| {
                tokens.len() >= a.tokens.len()
                    && a.keys.iter().zip(tokens).all(|(key, tok)| {
                        key.sounds_like(&phonetic::encode(tok, self.language))
                    })
            })
            .collect();
        for alias in phonetic {
            push_best(&mut out, alias, Tier::Phonetic, PHONETIC_SCORE);
        }
        if !out.is_empty() {
            return out;
        }
        for alias in &self.aliases {
            if tokens.len() < alias.tokens.len() {
                continue;
            }
            let head = tokens[..alias.tokens.len()].join(" ");
            let score = similarity(&head, &alias.text);
            if score >= self.fuzzy_floor {
                push_best(&mut out, alias, Tier::Fuzzy, score);
            }
        }
        out
    }

    pub fn match_command(&self, event: &[Hypothesis]) -> Result<Vec<MatchResult>, MatchError> {
        if event.is_empty() {
            return Err(MatchError::EmptyEvent);
        }
        let mut results = Vec::new();
        for hyp in event {
            let u = self.normalize(&hyp.text);
            let tokens = &u.numbers_resolved;
            for (alias, tier, score) in self.candidates(tokens) {
                results.push(MatchResult {
                    command: alias.command,
                    alias: alias.text.clone(),
                    remainder: tokens[alias.tokens.len()..].to_vec(),
                    tier,
                    match_score: score,
                    confidence: score * hyp.weight(),
                    source_hypothesis: hyp.rank,
                });
            }
        }
        if results.is_empty() {
            return Err(MatchError::NoMatch);
        }
        results.sort_by(compare_results);
        Ok(results)
    }
}

fn push_best<'a>(out: &mut Vec<(&'a Alias, Tier, f64)>, alias: &'a Alias, tier: Tier, score: f64) {
    match out.iter_mut().find(|(a, _, _)| a.command == alias.command) {
        Some(slot) if score > slot.2 || (score == slot.2 && alias.tokens.len() > slot.0.tokens.len()) => {
            *slot = (alias, tier, score)
        }
        Some(_) => {}
        None => out.push((alias, tier, score)),
    }
}

/// Confidence descending, then tier, then hypothesis rank.
pub fn compare_results(a: &MatchResult, b: &MatchResult) -> Ordering {
    b.confidence
        .partial_cmp(&a.confidence)
        .unwrap_or(Ordering::Equal)
        .then(a.tier.cmp(&b.tier))
        .then(a.source_hypothesis.cmp(&b.source_hypothesis))
}

pub fn split_command(u: &NormalizedUtterance, pack: &LanguagePack) -> Option<(Command, Vec<String>)> {
    Matcher::new(pack, DEFAULT_FUZZY_FLOOR).split_command(u)
}

pub fn match_command(event: &[Hypothesis], pack: &LanguagePack, fuzzy_floor: f64) -> Result<Vec<MatchResult>, MatchError> {
    Matcher::new(pack, fuzzy_floor).match_command(event)
}

/// Convenience for a single typed line.
pub fn match_text(text: &str, pack: &LanguagePack) -> Result<Vec<MatchResult>, MatchError> {
    match_command(&[Hypothesis::new(text, 0)], pack, DEFAULT_FUZZY_FLOOR)
}
