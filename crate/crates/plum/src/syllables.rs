//! Dictionary syllable counting via embedded hyphenation patterns.
//!
//! A word of n hyphenation points counts n + 1 syllables. Languages whose
//! patterns fail to load fall back to the vowel-group heuristic, and the
//! mode is reported per language.

use hyphenation::{Hyphenator, Load, Standard};
use plum_core::text::{SyllableCounter, SyllableMode, VowelGroupCounter};
use plum_core::Language;

pub struct HyphenationCounter {
    english: Option<Standard>,
    spanish: Option<Standard>,
    hindi: Option<Standard>,
}

impl Default for HyphenationCounter {
    fn default() -> Self {
        Self::new()
    }
}

impl HyphenationCounter {
    pub fn new() -> Self {
        let load = |l| Standard::from_embedded(l).ok();
        HyphenationCounter {
            english: load(hyphenation::Language::EnglishUS),
            spanish: load(hyphenation::Language::Spanish),
            hindi: load(hyphenation::Language::Hindi),
        }
    }

    fn dictionary(&self, language: Language) -> Option<&Standard> {
        match language {
            Language::English => self.english.as_ref(),
            Language::Spanish => self.spanish.as_ref(),
            Language::Hindi => self.hindi.as_ref(),
        }
    }
}

impl SyllableCounter for HyphenationCounter {
    fn count(&self, word: &str, language: Language) -> usize {
        match self.dictionary(language) {
            Some(dict) => dict.hyphenate(&word.to_lowercase()).breaks.len() + 1,
            None => VowelGroupCounter.count(word, language),
        }
    }

    fn mode(&self, language: Language) -> SyllableMode {
        match self.dictionary(language) {
            Some(_) => SyllableMode::Hyphenation,
            None => SyllableMode::VowelGroup,
        }
    }
}
