//! Prompt corpora: three languages, five category files, one prompt per line.
//!
//! This module handles the text of individual category files and the
//! in-memory [`Corpus`]. Walking a directory tree is done by the `plum` crate.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::taxonomy::{Language, PolitenessCategory};

/// Prompts per category file in a complete corpus.
pub const PROMPTS_PER_FILE: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("{language}: {file} is missing", file = category.file_name())]
    MissingCategoryFile {
        language: Language,
        category: PolitenessCategory,
    },
    #[error("{language}/{file}: expected {expected} prompts, found {found}", file = category.file_name())]
    CountMismatch {
        language: Language,
        category: PolitenessCategory,
        expected: usize,
        found: usize,
    },
    #[error("{language}/{file} line {line}: prompt text is empty", file = category.file_name())]
    EmptyPrompt {
        language: Language,
        category: PolitenessCategory,
        line: usize,
    },
    #[error("{language}/{category} ordinal {ordinal} appears more than once")]
    DuplicatePrompt {
        language: Language,
        category: PolitenessCategory,
        ordinal: u32,
    },
    #[error("{language}/{file} line {line}: ordinal must be at least 1", file = category.file_name())]
    ZeroOrdinal {
        language: Language,
        category: PolitenessCategory,
        line: usize,
    },
}

/// One corpus line.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prompt {
    pub language: Language,
    pub category: PolitenessCategory,
    pub ordinal: u32,
    pub text: String,
}

/// Splits a leading `N.` or `N)` numbering token off a line.
///
/// Returns the number (if any) and the remaining text. The token must be
/// followed by whitespace or the end of the line; `1.5 million` keeps its
/// digits. Repeated tokens are all removed so that stripping is idempotent.
pub fn split_numbering(line: &str) -> (Option<u32>, &str) {
    let mut rest = line.trim();
    let mut first = None;
    while let Some((n, tail)) = one_prefix(rest) {
        first.get_or_insert(n);
        rest = tail;
    }
    (first, rest)
}

/// Removes every leading numbering token; see [`split_numbering`].
pub fn strip_numbering(line: &str) -> &str {
    split_numbering(line).1
}

fn one_prefix(s: &str) -> Option<(u32, &str)> {
    let digits = s.bytes().take_while(u8::is_ascii_digit).count();
    if digits == 0 {
        return None;
    }
    let (num, tail) = s.split_at(digits);
    let tail = tail.strip_prefix('.').or_else(|| tail.strip_prefix(')'))?;
    if !(tail.is_empty() || tail.starts_with(char::is_whitespace)) {
        return None;
    }
    let n = num.parse().unwrap_or(u32::MAX);
    Some((n, tail.trim_start()))
}

/// Parses the contents of one category file.
///
/// Blank lines are skipped. A numbered line takes its ordinal from the
/// number; an unnumbered one takes its 1-based position among non-blank
/// lines.
pub fn parse_category_text(
    language: Language,
    category: PolitenessCategory,
    contents: &str,
) -> Result<Vec<Prompt>, CorpusError> {
    let contents = contents.strip_prefix('\u{feff}').unwrap_or(contents);
    let mut prompts = Vec::new();
    for (idx, raw) in contents.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let (number, text) = split_numbering(line);
        if text.is_empty() {
            return Err(CorpusError::EmptyPrompt {
                language,
                category,
                line: idx + 1,
            });
        }
        let ordinal = number.unwrap_or(prompts.len() as u32 + 1);
        if ordinal == 0 {
            return Err(CorpusError::ZeroOrdinal {
                language,
                category,
                line: idx + 1,
            });
        }
        prompts.push(Prompt {
            language,
            category,
            ordinal,
            text: text.into(),
        });
    }
    Ok(prompts)
}

/// Renders prompts in the on-disk layout: `N. text` per line, LF endings.
pub fn render_category_text<'a, I>(prompts: I) -> String
where
    I: IntoIterator<Item = &'a Prompt>,
{
    let mut sorted: Vec<&Prompt> = prompts.into_iter().collect();
    sorted.sort_by_key(|p| p.ordinal);
    let mut out = String::new();
    for p in sorted {
        out.push_str(&alloc::format!("{}. {}\n", p.ordinal, p.text));
    }
    out
}

/// An immutable, de-duplicated prompt collection.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    groups: BTreeMap<(Language, PolitenessCategory), Vec<Prompt>>,
}

impl Corpus {
    /// Builds a corpus, rejecting repeated `(language, category, ordinal)` keys.
    pub fn from_prompts<I>(prompts: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = Prompt>,
    {
        let mut groups: BTreeMap<(Language, PolitenessCategory), Vec<Prompt>> = BTreeMap::new();
        for p in prompts {
            groups.entry((p.language, p.category)).or_default().push(p);
        }
        for ((language, category), group) in groups.iter_mut() {
            group.sort_by_key(|p| p.ordinal);
            if let Some(w) = group.windows(2).find(|w| w[0].ordinal == w[1].ordinal) {
                return Err(CorpusError::DuplicatePrompt {
                    language: *language,
                    category: *category,
                    ordinal: w[0].ordinal,
                });
            }
        }
        Ok(Corpus { groups })
    }

    /// Checks the complete-corpus shape: all fifteen groups, exactly 100 each.
    pub fn validate_strict(&self) -> Result<(), CorpusError> {
        for language in Language::ALL {
            for category in PolitenessCategory::ALL {
                let found = self.group_len(language, category);
                match self.groups.get(&(language, category)) {
                    None => {
                        return Err(CorpusError::MissingCategoryFile { language, category })
                    }
                    Some(_) if found != PROMPTS_PER_FILE => {
                        return Err(CorpusError::CountMismatch {
                            language,
                            category,
                            expected: PROMPTS_PER_FILE,
                            found,
                        })
                    }
                    Some(_) => {}
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.groups.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn group_len(&self, language: Language, category: PolitenessCategory) -> usize {
        self.groups.get(&(language, category)).map_or(0, Vec::len)
    }

    /// Per-(language, category) prompt counts.
    pub fn counts(&self) -> BTreeMap<(Language, PolitenessCategory), usize> {
        self.groups.iter().map(|(k, v)| (*k, v.len())).collect()
    }

    pub fn language_len(&self, language: Language) -> usize {
        self.groups
            .iter()
            .filter(|((l, _), _)| *l == language)
            .map(|(_, v)| v.len())
            .sum()
    }

    /// Prompts of one group ordered by ordinal; empty when the group is absent.
    pub fn subset(&self, language: Language, category: PolitenessCategory) -> &[Prompt] {
        self.groups
            .get(&(language, category))
            .map_or(&[][..], Vec::as_slice)
    }

    pub fn get(&self, language: Language, category: PolitenessCategory, ordinal: u32) -> Option<&Prompt> {
        let group = self.subset(language, category);
        group
            .binary_search_by_key(&ordinal, |p| p.ordinal)
            .ok()
            .map(|i| &group[i])
    }

    /// All prompts in (language, category, ordinal) order.
    pub fn iter(&self) -> impl Iterator<Item = &Prompt> {
        self.groups.values().flatten()
    }

    pub fn groups(&self) -> impl Iterator<Item = ((Language, PolitenessCategory), &[Prompt])> {
        self.groups.iter().map(|(k, v)| (*k, v.as_slice()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use proptest::prelude::*;

    #[test]
    fn strips_numbered_prefix() {
        let ps = parse_category_text(
            Language::English,
            PolitenessCategory::Pop,
            "1. Could you please help me understand how quantum entanglement works?\n",
        )
        .unwrap();
        assert_eq!(ps.len(), 1);
        assert_eq!(ps[0].ordinal, 1);
        assert_eq!(
            ps[0].text,
            "Could you please help me understand how quantum entanglement works?"
        );
    }

    #[test]
    fn prefix_grammar() {
        assert_eq!(split_numbering("12) Explain tides."), (Some(12), "Explain tides."));
        assert_eq!(split_numbering("1.5 million people"), (None, "1.5 million people"));
        assert_eq!(split_numbering("2024 was a year"), (None, "2024 was a year"));
        assert_eq!(split_numbering("3.\tTabbed"), (Some(3), "Tabbed"));
        assert_eq!(split_numbering("7."), (Some(7), ""));
    }

    #[test]
    fn blank_lines_and_crlf() {
        let ps = parse_category_text(
            Language::Spanish,
            PolitenessCategory::Bal,
            "\u{feff}Explica la fotosíntesis.\r\n\r\n   \r\nExplica la gravedad.\r\n",
        )
        .unwrap();
        assert_eq!(ps.len(), 2);
        assert_eq!(ps[0].text, "Explica la fotosíntesis.");
        assert_eq!(ps[1].ordinal, 2);
    }

    #[test]
    fn empty_prompt_after_prefix() {
        let err = parse_category_text(Language::Hindi, PolitenessCategory::Nep, "1. ok\n2.  \n")
            .unwrap_err();
        assert_eq!(
            err,
            CorpusError::EmptyPrompt {
                language: Language::Hindi,
                category: PolitenessCategory::Nep,
                line: 2
            }
        );
    }

    #[test]
    fn duplicates_rejected() {
        let ps = parse_category_text(Language::English, PolitenessCategory::Poi, "1. a\n1. b\n").unwrap();
        assert!(matches!(
            Corpus::from_prompts(ps),
            Err(CorpusError::DuplicatePrompt { ordinal: 1, .. })
        ));
    }

    #[test]
    fn empty_corpus_subset_is_empty() {
        let c = Corpus::default();
        assert!(c.subset(Language::English, PolitenessCategory::Pop).is_empty());
        assert!(matches!(
            c.validate_strict(),
            Err(CorpusError::MissingCategoryFile { .. })
        ));
    }

    #[test]
    fn subset_is_sorted_by_ordinal() {
        let text: String = (1..=100).rev().map(|i| format!("{i}. prompt {i}\n")).collect();
        let ps = parse_category_text(Language::English, PolitenessCategory::Pop, &text).unwrap();
        let c = Corpus::from_prompts(ps).unwrap();
        let sub = c.subset(Language::English, PolitenessCategory::Pop);
        assert_eq!(sub.len(), 100);
        assert!(sub.iter().map(|p| p.ordinal).eq(1..=100));
        assert_eq!(c.get(Language::English, PolitenessCategory::Pop, 42).unwrap().text, "prompt 42");
    }

    proptest! {
        #[test]
        fn strip_is_idempotent(s in "[0-9]{0,3}[.)]?[ \t]{0,2}[0-9]{0,2}[.)]?[ a-zA-Z.]{0,12}") {
            let once = strip_numbering(&s);
            prop_assert_eq!(strip_numbering(once), once);
        }

        #[test]
        fn render_parse_round_trip(texts in proptest::collection::vec("[a-zA-Z¿¡ñ][a-zA-Z ,?¿¡ñá]{0,20}[a-z?.]", 1..20)) {
            let prompts: Vec<Prompt> = texts.iter().enumerate().map(|(i, t)| Prompt {
                language: Language::Spanish,
                category: PolitenessCategory::Nei,
                ordinal: i as u32 + 1,
                text: t.trim().into(),
            }).collect();
            let rendered = render_category_text(&prompts);
            let parsed = parse_category_text(Language::Spanish, PolitenessCategory::Nei, &rendered).unwrap();
            prop_assert_eq!(parsed, prompts);
        }
    }
}
