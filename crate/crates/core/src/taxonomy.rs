//! Factor levels shared by every stage of an experiment.

use core::fmt;
use core::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown {kind} label `{label}`")]
pub struct UnknownLabel {
    pub kind: &'static str,
    pub label: alloc::string::String,
}

fn unknown(kind: &'static str, label: &str) -> UnknownLabel {
    UnknownLabel {
        kind,
        label: label.into(),
    }
}

/// Prompt language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Language {
    English,
    Hindi,
    Spanish,
}

impl Language {
    pub const ALL: [Language; 3] = [Language::English, Language::Hindi, Language::Spanish];

    pub const fn name(self) -> &'static str {
        match self {
            Language::English => "English",
            Language::Hindi => "Hindi",
            Language::Spanish => "Spanish",
        }
    }

    /// Two-letter code used on the command line.
    pub const fn code(self) -> &'static str {
        match self {
            Language::English => "en",
            Language::Hindi => "hi",
            Language::Spanish => "es",
        }
    }

    /// Name of the corpus directory holding this language's prompt files.
    pub const fn directory(self) -> &'static str {
        match self {
            Language::English => "English Prompts",
            Language::Hindi => "Hindi Prompts",
            Language::Spanish => "Spanish Prompts",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Language {
    type Err = UnknownLabel;

    /// Accepts the full name or the two-letter code, case-insensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Language::ALL
            .into_iter()
            .find(|l| s.eq_ignore_ascii_case(l.name()) || s.eq_ignore_ascii_case(l.code()))
            .ok_or_else(|| unknown("language", s))
    }
}

/// The five prompt tones, in corpus file order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PolitenessCategory {
    /// Positive politeness.
    Pop,
    /// Negative politeness.
    Nep,
    /// Positive impoliteness.
    Poi,
    /// Negative impoliteness.
    Nei,
    /// Bald-on-record.
    Bal,
}

impl PolitenessCategory {
    pub const ALL: [PolitenessCategory; 5] = [
        PolitenessCategory::Pop,
        PolitenessCategory::Nep,
        PolitenessCategory::Poi,
        PolitenessCategory::Nei,
        PolitenessCategory::Bal,
    ];

    pub const fn label(self) -> &'static str {
        match self {
            PolitenessCategory::Pop => "POP",
            PolitenessCategory::Nep => "NEP",
            PolitenessCategory::Poi => "POI",
            PolitenessCategory::Nei => "NEI",
            PolitenessCategory::Bal => "BAL",
        }
    }

    /// 1-based file number: `Category1.txt` is POP, `Category5.txt` is BAL.
    pub const fn file_number(self) -> u8 {
        match self {
            PolitenessCategory::Pop => 1,
            PolitenessCategory::Nep => 2,
            PolitenessCategory::Poi => 3,
            PolitenessCategory::Nei => 4,
            PolitenessCategory::Bal => 5,
        }
    }

    pub fn from_file_number(n: u8) -> Option<Self> {
        PolitenessCategory::ALL
            .into_iter()
            .find(|c| c.file_number() == n)
    }

    pub fn file_name(self) -> alloc::string::String {
        alloc::format!("Category{}.txt", self.file_number())
    }
}

impl fmt::Display for PolitenessCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PolitenessCategory {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        PolitenessCategory::ALL
            .into_iter()
            .find(|c| s.eq_ignore_ascii_case(c.label()))
            .ok_or_else(|| unknown("politeness category", s))
    }
}

/// Conversational priming that precedes a trial prompt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HistoryCondition {
    /// Cold start, no prior turns.
    Raw,
    /// Primed with polite turns.
    Pol,
    /// Primed with impolite turns.
    Imp,
}

impl HistoryCondition {
    pub const ALL: [HistoryCondition; 3] =
        [HistoryCondition::Raw, HistoryCondition::Pol, HistoryCondition::Imp];

    pub const fn label(self) -> &'static str {
        match self {
            HistoryCondition::Raw => "RAW",
            HistoryCondition::Pol => "POL",
            HistoryCondition::Imp => "IMP",
        }
    }
}

impl fmt::Display for HistoryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for HistoryCondition {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        HistoryCondition::ALL
            .into_iter()
            .find(|c| s.eq_ignore_ascii_case(c.label()))
            .ok_or_else(|| unknown("history condition", s))
    }
}

/// Time-of-day replicate of one experimental cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReplicateSlot {
    Morning,
    Afternoon,
    Evening,
    Night,
}

impl ReplicateSlot {
    pub const ALL: [ReplicateSlot; 4] = [
        ReplicateSlot::Morning,
        ReplicateSlot::Afternoon,
        ReplicateSlot::Evening,
        ReplicateSlot::Night,
    ];

    pub const fn label(self) -> &'static str {
        match self {
            ReplicateSlot::Morning => "morning",
            ReplicateSlot::Afternoon => "afternoon",
            ReplicateSlot::Evening => "evening",
            ReplicateSlot::Night => "night",
        }
    }
}

impl fmt::Display for ReplicateSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ReplicateSlot {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        ReplicateSlot::ALL
            .into_iter()
            .find(|c| s.eq_ignore_ascii_case(c.label()))
            .ok_or_else(|| unknown("replicate slot", s))
    }
}

/// A proleptic Gregorian calendar date, formatted `YYYY-MM-DD`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CalendarDay {
    year: u16,
    month: u8,
    day: u8,
}

impl CalendarDay {
    pub fn new(year: u16, month: u8, day: u8) -> Option<Self> {
        if !(1..=12).contains(&month) || day == 0 || day > days_in_month(year, month) {
            return None;
        }
        Some(CalendarDay { year, month, day })
    }

    pub const fn year(self) -> u16 {
        self.year
    }

    pub const fn month(self) -> u8 {
        self.month
    }

    pub const fn day(self) -> u8 {
        self.day
    }
}

fn days_in_month(year: u16, month: u8) -> u8 {
    match month {
        2 if (year % 4 == 0 && year % 100 != 0) || year % 400 == 0 => 29,
        2 => 28,
        4 | 6 | 9 | 11 => 30,
        _ => 31,
    }
}

impl fmt::Display for CalendarDay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}-{:02}", self.year, self.month, self.day)
    }
}

impl FromStr for CalendarDay {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let mut parts = t.split('-');
        let parsed = (|| {
            let y = parts.next()?.parse().ok()?;
            let m = parts.next()?.parse().ok()?;
            let d = parts.next()?.parse().ok()?;
            if parts.next().is_some() {
                return None;
            }
            CalendarDay::new(y, m, d)
        })();
        parsed.ok_or_else(|| unknown("calendar day", t))
    }
}
