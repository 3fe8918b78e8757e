//! Sentence splitting, tokenisation and syllable counting.

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::taxonomy::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum TextError {
    #[error("text is empty")]
    EmptyText,
}

/// A response split into sentences, in source order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceSplit {
    sentences: Vec<String>,
}

impl SentenceSplit {
    pub fn sentences(&self) -> &[String] {
        &self.sentences
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.sentences.iter().map(String::as_str)
    }
}

fn is_terminator(c: char, language: Language) -> bool {
    matches!(c, '.' | '!' | '?' | '…')
        || (language == Language::Hindi && matches!(c, '।' | '॥'))
}

fn is_closing(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '”' | '’' | '»')
}

/// Splits text on sentence terminators.
///
/// A run of terminators ends a sentence only when followed by whitespace or
/// the end of the text, so decimals and dotted abbreviations without a space
/// stay intact. Hindi also ends sentences at `।`. For Spanish, a `.` inside
/// an open `¿…?` or `¡…!` pair does not split; the pair's closing mark does.
/// Text without any terminator is one sentence.
pub fn split_sentences(text: &str, language: Language) -> Result<SentenceSplit, TextError> {
    if text.trim().is_empty() {
        return Err(TextError::EmptyText);
    }
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;
    let mut open_pairs = 0usize;
    let mut i = 0;
    while i < chars.len() {
        let (_, c) = chars[i];
        if language == Language::Spanish && matches!(c, '¿' | '¡') {
            open_pairs += 1;
        }
        if is_terminator(c, language) {
            let mut j = i;
            let mut closes_pair = false;
            while j < chars.len() && (is_terminator(chars[j].1, language) || is_closing(chars[j].1)) {
                if matches!(chars[j].1, '?' | '!') {
                    closes_pair = true;
                }
                j += 1;
            }
            let at_boundary = j == chars.len() || chars[j].1.is_whitespace();
            let inside_pair = language == Language::Spanish && open_pairs > 0 && !closes_pair;
            if at_boundary && !inside_pair {
                let end = if j == chars.len() { text.len() } else { chars[j].0 };
                push_trimmed(&mut sentences, &text[start..end]);
                start = end;
                open_pairs = 0;
            } else if closes_pair && open_pairs > 0 {
                open_pairs -= 1;
            }
            i = j;
            continue;
        }
        i += 1;
    }
    push_trimmed(&mut sentences, &text[start..]);
    Ok(SentenceSplit { sentences })
}

fn push_trimmed(out: &mut Vec<String>, piece: &str) {
    let t = piece.trim();
    if t.chars().any(|c| c.is_alphanumeric()) {
        out.push(t.into());
    } else if let Some(last) = out.last_mut() {
        // Stray punctuation after the last terminator joins the previous sentence.
        if !t.is_empty() {
            last.push(' ');
            last.push_str(t);
        }
    } else if !t.is_empty() {
        out.push(t.into());
    }
}

fn is_edge_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '।' | '॥' | '¿' | '¡' | '«' | '»' | '“' | '”' | '‘' | '’' | '…' | '—' | '–'
        )
}

/// Whitespace tokenisation with punctuation trimmed from token edges.
///
/// Tokens made only of punctuation are dropped.
pub fn tokenize(text: &str) -> Vec<&str> {
    text.split_whitespace()
        .map(|t| t.trim_matches(is_edge_punctuation))
        .filter(|t| !t.is_empty())
        .collect()
}

/// How syllables were counted for a language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SyllableMode {
    /// Dictionary hyphenation patterns.
    Hyphenation,
    /// Vowel-group heuristic.
    VowelGroup,
}

impl SyllableMode {
    pub const fn as_str(self) -> &'static str {
        match self {
            SyllableMode::Hyphenation => "hyphenation",
            SyllableMode::VowelGroup => "vowel_group",
        }
    }
}

pub trait SyllableCounter {
    /// Syllables in one word; at least 1 for any non-empty word.
    fn count(&self, word: &str, language: Language) -> usize;

    fn mode(&self, language: Language) -> SyllableMode;
}

/// Heuristic syllable counter usable for every supported language.
#[derive(Debug, Clone, Copy, Default)]
pub struct VowelGroupCounter;

impl SyllableCounter for VowelGroupCounter {
    fn count(&self, word: &str, language: Language) -> usize {
        let n = match language {
            Language::English => english_vowel_groups(word),
            Language::Spanish => vowel_groups(word, is_spanish_vowel),
            Language::Hindi => devanagari_syllables(word),
        };
        n.max(1)
    }

    fn mode(&self, _language: Language) -> SyllableMode {
        SyllableMode::VowelGroup
    }
}

fn vowel_groups(word: &str, is_vowel: impl Fn(char) -> bool) -> usize {
    let mut groups = 0;
    let mut prev = false;
    for c in word.chars().flat_map(char::to_lowercase) {
        let v = is_vowel(c);
        if v && !prev {
            groups += 1;
        }
        prev = v;
    }
    groups
}

fn is_spanish_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'á' | 'é' | 'í' | 'ó' | 'ú' | 'ü' | 'y')
}

fn english_vowel_groups(word: &str) -> usize {
    let lower: String = word.chars().flat_map(char::to_lowercase).collect();
    let mut n = vowel_groups(&lower, |c| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y'));
    // Silent final e, but not "-le" after a consonant (ta-ble).
    let b = lower.as_bytes();
    if n > 1 && b.len() > 2 && b[b.len() - 1] == b'e' {
        let le = b[b.len() - 2] == b'l' && !matches!(b[b.len() - 3], b'a' | b'e' | b'i' | b'o' | b'u' | b'y');
        if !le && !matches!(b[b.len() - 2], b'a' | b'e' | b'i' | b'o' | b'u' | b'y') {
            n -= 1;
        }
    }
    n
}

/// Counts aksharas: independent vowels plus consonants not silenced by a virama.
fn devanagari_syllables(word: &str) -> usize {
    let chars: Vec<char> = word.chars().collect();
    let mut n = 0;
    for (i, &c) in chars.iter().enumerate() {
        let independent_vowel = ('\u{0904}'..='\u{0914}').contains(&c);
        let consonant = ('\u{0915}'..='\u{0939}').contains(&c) || ('\u{0958}'..='\u{095F}').contains(&c);
        if independent_vowel {
            n += 1;
        } else if consonant {
            let silenced = chars.get(i + 1) == Some(&'\u{094D}');
            if !silenced {
                n += 1;
            }
        }
    }
    if n == 0 {
        // Latin-script words inside Hindi text.
        n = english_vowel_groups(word);
    }
    n
}
