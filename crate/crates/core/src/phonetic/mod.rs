//! Phonetic keys for command words: Double Metaphone for English, Cologne
//! phonetics for German.

use alloc::string::String;
use serde::{Deserialize, Serialize};

use crate::config::Language;

pub mod cologne;
pub mod double_metaphone;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhoneticKey {
    pub primary: String,
    /// Only produced by Double Metaphone, and only when it differs from `primary`.
    pub alternate: Option<String>,
}

impl PhoneticKey {
    pub fn is_empty(&self) -> bool {
        self.primary.is_empty() && self.alternate.is_none()
    }

    /// Two keys sound alike when any of their codes coincide.
    pub fn sounds_like(&self, other: &PhoneticKey) -> bool {
        if self.is_empty() || other.is_empty() {
            return false;
        }
        let mine = core::iter::once(&self.primary).chain(self.alternate.as_ref());
        mine.filter(|c| !c.is_empty()).any(|c| {
            *c == other.primary || other.alternate.as_ref() == Some(c)
        })
    }
}

pub fn encode_en(word: &str) -> PhoneticKey {
    double_metaphone::encode(word)
}

pub fn encode_de(word: &str) -> PhoneticKey {
    cologne::encode(word)
}

pub fn encode(word: &str, language: Language) -> PhoneticKey {
    match language {
        Language::En => encode_en(word),
        Language::De => encode_de(word),
    }
}
