//! Segment pairs, span-tagged error candidates and annotator decisions.

mod edit;
mod filter;
mod io;
pub mod synthetic;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use edit::{derive_edit, parse_tagged, Edit, TaggedText, TAG_CLOSE, TAG_OPEN};
pub use filter::{apply_filters, load_decisions, Decision, DecisionSheet, FilterConfig, Vote, DECISION_HEADER};
pub use io::{
    load_candidates, load_segment_pairs, write_candidates, IngestOutcome, IngestReject, CANDIDATE_HEADER, PAIR_HEADER,
};

/// A translation direction such as `en-de`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Direction {
    source_lang: String,
    target_lang: String,
}

fn valid_lang(code: &str) -> bool {
    (2..=3).contains(&code.len()) && code.bytes().all(|b| b.is_ascii_lowercase())
}

impl Direction {
    pub fn new(source_lang: &str, target_lang: &str) -> Result<Self> {
        if !valid_lang(source_lang) || !valid_lang(target_lang) {
            return Err(Error::Config(format!(
                "invalid direction `{source_lang}-{target_lang}`: language codes must be 2-3 lowercase letters"
            )));
        }
        Ok(Self { source_lang: source_lang.to_string(), target_lang: target_lang.to_string() })
    }

    pub fn source_lang(&self) -> &str {
        &self.source_lang
    }

    pub fn target_lang(&self) -> &str {
        &self.target_lang
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.source_lang, self.target_lang)
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (src, tgt) = s
            .split_once('-')
            .ok_or_else(|| Error::Config(format!("invalid direction `{s}`: expected `src-tgt`")))?;
        Direction::new(src, tgt)
    }
}

impl TryFrom<String> for Direction {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Direction> for String {
    fn from(d: Direction) -> String {
        d.to_string()
    }
}

/// Gold source/reference pair for one direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentPair {
    pub pair_id: String,
    pub direction: Direction,
    pub source: String,
    pub reference: String,
}

/// The four MQM accuracy error categories injected into references.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorType {
    Addition,
    Omission,
    Mistranslation,
    Untranslated,
}

impl ErrorType {
    pub const ALL: [ErrorType; 4] =
        [ErrorType::Addition, ErrorType::Omission, ErrorType::Mistranslation, ErrorType::Untranslated];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorType::Addition => "addition",
            ErrorType::Omission => "omission",
            ErrorType::Mistranslation => "mistranslation",
            ErrorType::Untranslated => "untranslated",
        }
    }
}

impl fmt::Display for ErrorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ErrorType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ErrorType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown error type `{s}`")))
    }
}

/// Which half of the sentence the error was requested in. Metadata only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Half {
    First,
    Second,
}

impl Half {
    pub fn as_str(self) -> &'static str {
        match self {
            Half::First => "first",
            Half::Second => "second",
        }
    }
}

impl fmt::Display for Half {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Half {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" => Ok(Half::First),
            "second" => Ok(Half::Second),
            _ => Err(Error::Config(format!("unknown half `{s}`"))),
        }
    }
}

/// Annotator votes on one candidate and the derived unanimity flag.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FilterStatus {
    pub votes: Vec<Vote>,
    pub accepted: bool,
}

impl FilterStatus {
    pub fn from_votes(votes: Vec<Vote>) -> Self {
        let accepted = !votes.is_empty() && votes.iter().all(|v| v.accept);
        Self { votes, accepted }
    }
}

/// A reference with exactly one injected error, stored as an edit against
/// the reference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorCandidate {
    pub candidate_id: String,
    pub pair_id: String,
    pub direction: Direction,
    pub error_type: ErrorType,
    pub half: Half,
    pub tagged_text: String,
    pub edit: Edit,
    pub filter: FilterStatus,
}

impl ErrorCandidate {
    /// Builds a candidate from its tagged text, deriving the edit against
    /// `base` (the pair's reference).
    pub fn from_tagged(
        candidate_id: &str,
        pair: &SegmentPair,
        error_type: ErrorType,
        half: Half,
        tagged_text: &str,
    ) -> Result<Self> {
        let tagged = parse_tagged(tagged_text)?;
        let edit = derive_edit(&pair.reference, &tagged.detagged, tagged.open, tagged.close)?;
        Ok(Self {
            candidate_id: candidate_id.to_string(),
            pair_id: pair.pair_id.clone(),
            direction: pair.direction.clone(),
            error_type,
            half,
            tagged_text: tagged_text.to_string(),
            edit,
            filter: FilterStatus::default(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direction_round_trips() {
        let d: Direction = "en-zh".parse().unwrap();
        assert_eq!(d.to_string(), "en-zh");
        assert_eq!(d.to_string().parse::<Direction>().unwrap(), d);
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(json, "\"en-zh\"");
    }

    #[test]
    fn direction_rejects_bad_codes() {
        for bad in ["EN-de", "e-de", "engl-de", "en", "en-", "-de", "en-d3"] {
            assert!(bad.parse::<Direction>().is_err(), "{bad}");
        }
    }

    #[test]
    fn unanimity() {
        let v = |a: &str, accept| Vote { annotator_id: a.into(), accept };
        assert!(FilterStatus::from_votes(vec![v("a", true), v("b", true)]).accepted);
        assert!(!FilterStatus::from_votes(vec![v("a", true), v("b", false)]).accepted);
        assert!(!FilterStatus::from_votes(vec![]).accepted);
    }
}
