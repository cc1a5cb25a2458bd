//! Transcript normalization: tokenization, casing, and number words to
//! digits.
//!
//! Tokens are lowercase runs of letters and digits. Hyphens, commas and any
//! other punctuation separate tokens, apostrophes are dropped, a `-` directly
//! before a digit at the start of a token is kept as a sign, and a `.` between
//! digits is kept as a decimal point.
//!
//! Number words are taken from the language pack. Multi-word cardinals up to
//! 999 are merged (`twenty five` -> `25`, `two hundred and five` -> `205`);
//! German compounds are expected as single dictionary tokens for 0..=99 and
//! are split around `hundert` above that (`zweihundertfünf` -> `205`).

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::config::LanguagePack;

const CONNECTORS: [&str; 2] = ["and", "und"];

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedUtterance {
    pub raw: String,
    pub tokens: Vec<String>,
    pub numbers_resolved: Vec<String>,
}

impl NormalizedUtterance {
    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn resolved_text(&self) -> String {
        self.numbers_resolved.join(" ")
    }
}

pub fn normalize(text: &str, pack: &LanguagePack) -> NormalizedUtterance {
    normalize_with(text, &pack.number_words)
}

pub fn normalize_with(text: &str, number_words: &BTreeMap<String, i64>) -> NormalizedUtterance {
    let tokens = tokenize(text);
    let numbers_resolved = resolve_numbers(&tokens, number_words);
    NormalizedUtterance { raw: text.to_string(), tokens, numbers_resolved }
}

/// `normalize(a) == normalize(b)` after number resolution, so `"place 5"`
/// and `"Place five"` are equal.
pub fn lenient_equal(a: &str, b: &str, pack: &LanguagePack) -> bool {
    normalize(a, pack).numbers_resolved == normalize(b, pack).numbers_resolved
}

pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut cur = String::new();
    let flush = |cur: &mut String, tokens: &mut Vec<String>| {
        if !cur.is_empty() {
            tokens.push(core::mem::take(cur));
        }
    };
    for (i, &c) in chars.iter().enumerate() {
        let next_is_digit = chars.get(i + 1).is_some_and(|n| n.is_ascii_digit());
        if c.is_alphanumeric() {
            cur.extend(c.to_lowercase());
        } else if c == '\'' || c == '’' {
            // "let's" -> "lets"
        } else if c == '-' && cur.is_empty() && next_is_digit {
            cur.push('-');
        } else if c == '.' && next_is_digit && is_integer_token(&cur) {
            cur.push('.');
        } else {
            flush(&mut cur, &mut tokens);
        }
    }
    flush(&mut cur, &mut tokens);
    tokens
}

fn is_integer_token(s: &str) -> bool {
    let body = s.strip_prefix('-').unwrap_or(s);
    !body.is_empty() && body.bytes().all(|b| b.is_ascii_digit())
}

fn word_value(word: &str, lexicon: &BTreeMap<String, i64>) -> Option<i64> {
    if let Some(v) = lexicon.get(word) {
        return Some(*v);
    }
    // Compound hundreds, e.g. "zweihundertfünf".
    for (hundred, _) in lexicon.iter().filter(|(_, v)| **v == 100) {
        let Some(pos) = word.find(hundred.as_str()) else { continue };
        let prefix = &word[..pos];
        let mut suffix = &word[pos + hundred.len()..];
        let mult = if prefix.is_empty() {
            1
        } else {
            match lexicon.get(prefix) {
                Some(v) if (1..=9).contains(v) => *v,
                _ => continue,
            }
        };
        for conn in CONNECTORS {
            if let Some(rest) = suffix.strip_prefix(conn) {
                if !rest.is_empty() {
                    suffix = rest;
                }
            }
        }
        let rest = if suffix.is_empty() {
            0
        } else {
            match lexicon.get(suffix) {
                Some(v) if (1..=99).contains(v) => *v,
                _ => continue,
            }
        };
        return Some(mult * 100 + rest);
    }
    None
}

/// Reads one cardinal starting at `i`; returns its value and the number of
/// tokens consumed.
fn read_cardinal(tokens: &[String], i: usize, lexicon: &BTreeMap<String, i64>) -> Option<(i64, usize)> {
    let value = |k: usize| tokens.get(k).and_then(|t| word_value(t, lexicon));
    let is_unit = |v: i64| (1..=9).contains(&v);
    let is_tens = |v: i64| (20..=90).contains(&v) && v % 10 == 0;

    let first = value(i)?;
    if first > 100 {
        // Already a complete compound above one hundred.
        return Some((first, 1));
    }
    let mut j = i;
    let mut total = 0;
    let mut hundreds = false;
    if is_unit(first) && value(i + 1) == Some(100) {
        total = first * 100;
        j += 2;
        hundreds = true;
    } else if first == 100 {
        total = 100;
        j += 1;
        hundreds = true;
    }
    if hundreds {
        let connector = tokens.get(j).is_some_and(|t| CONNECTORS.contains(&t.as_str()));
        let after = if connector { value(j + 1) } else { value(j) };
        if matches!(after, Some(v) if (1..=99).contains(&v)) {
            if connector {
                j += 1;
            }
        } else {
            return Some((total, j - i));
        }
    }
    match value(j) {
        Some(t) if is_tens(t) => {
            total += t;
            j += 1;
            if let Some(u) = value(j).filter(|u| is_unit(*u)) {
                total += u;
                j += 1;
            }
        }
        Some(v) if (0..=99).contains(&v) && !(hundreds && v == 0) => {
            total += v;
            j += 1;
        }
        _ => {}
    }
    (j > i).then_some((total, j - i))
}

fn resolve_numbers(tokens: &[String], lexicon: &BTreeMap<String, i64>) -> Vec<String> {
    let mut out = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        match read_cardinal(tokens, i, lexicon) {
            Some((v, used)) => {
                out.push(v.to_string());
                i += used;
            }
            None => {
                out.push(tokens[i].clone());
                i += 1;
            }
        }
    }
    out
}
