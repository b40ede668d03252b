use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use super::{Direction, ErrorCandidate, FilterStatus};
use crate::error::{Error, Result};
use crate::tsv;

pub const DECISION_HEADER: [&str; 3] = ["candidate_id", "annotator_id", "reject"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vote {
    pub annotator_id: String,
    pub accept: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub candidate_id: String,
    pub vote: Vote,
    pub line: usize,
}

/// Annotator decisions, one row per (candidate, annotator).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DecisionSheet {
    pub decisions: Vec<Decision>,
}

impl DecisionSheet {
    pub fn push(&mut self, candidate_id: &str, annotator_id: &str, accept: bool) {
        self.decisions.push(Decision {
            candidate_id: candidate_id.to_string(),
            vote: Vote { annotator_id: annotator_id.to_string(), accept },
            line: 0,
        });
    }
}

/// Reads a decision sheet. The `reject` column is `T` or empty; a missing
/// trailing column counts as empty.
pub fn load_decisions(path: &Path) -> Result<DecisionSheet> {
    let table = tsv::read_table(path, &DECISION_HEADER, false, 2)?;
    let name = path.display().to_string();
    let mut sheet = DecisionSheet::default();
    for row in &table.rows {
        let accept = match row.get(2).trim() {
            "" => true,
            "T" => false,
            other => {
                return Err(Error::parse(&name, row.line, format!("reject column must be `T` or empty, found `{other}`")))
            }
        };
        if row.get(0).is_empty() || row.get(1).is_empty() {
            return Err(Error::parse(&name, row.line, "empty candidate or annotator id"));
        }
        sheet.decisions.push(Decision {
            candidate_id: row.get(0).to_string(),
            vote: Vote { annotator_id: row.get(1).to_string(), accept },
            line: row.line,
        });
    }
    Ok(sheet)
}

/// How many votes each candidate must carry before the unanimity rule applies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterConfig {
    pub required_votes: usize,
    pub per_direction: BTreeMap<Direction, usize>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self { required_votes: 2, per_direction: BTreeMap::new() }
    }
}

impl FilterConfig {
    pub fn single_annotator() -> Self {
        Self { required_votes: 1, per_direction: BTreeMap::new() }
    }

    pub fn required_for(&self, direction: &Direction) -> usize {
        self.per_direction.get(direction).copied().unwrap_or(self.required_votes)
    }
}

/// Attaches votes to every candidate and sets the unanimity flag.
///
/// Existing filter status is replaced, not merged, so re-applying a sheet is
/// idempotent. All candidates are returned; downstream stages keep only the
/// accepted ones.
pub fn apply_filters(
    mut candidates: Vec<ErrorCandidate>,
    sheet: &DecisionSheet,
    config: &FilterConfig,
) -> Result<Vec<ErrorCandidate>> {
    let index: HashMap<&str, usize> =
        candidates.iter().enumerate().map(|(i, c)| (c.candidate_id.as_str(), i)).collect();
    let mut votes: Vec<Vec<super::Vote>> = vec![Vec::new(); candidates.len()];
    let mut seen = HashSet::new();
    for d in &sheet.decisions {
        let &i = index.get(d.candidate_id.as_str()).ok_or_else(|| {
            Error::Integrity(format!("decision (line {}) for unknown candidate `{}`", d.line, d.candidate_id))
        })?;
        if !seen.insert((d.candidate_id.as_str(), d.vote.annotator_id.as_str())) {
            return Err(Error::Integrity(format!(
                "annotator `{}` voted twice on candidate `{}`",
                d.vote.annotator_id, d.candidate_id
            )));
        }
        votes[i].push(d.vote.clone());
    }
    for (c, v) in candidates.iter_mut().zip(votes) {
        let required = config.required_for(&c.direction);
        if required == 0 {
            return Err(Error::Config(format!("required_votes for {} must be at least 1", c.direction)));
        }
        if v.len() < required {
            return Err(Error::Config(format!(
                "candidate `{}` has {} vote(s) but {} direction requires {required}",
                c.candidate_id,
                v.len(),
                c.direction
            )));
        }
        c.filter = FilterStatus::from_votes(v);
    }
    Ok(candidates)
}
