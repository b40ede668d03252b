use std::collections::{HashMap, HashSet};
use std::path::Path;

use super::{Direction, ErrorCandidate, SegmentPair};
use crate::error::{Error, Result};
use crate::tsv::{self, TsvBuilder};

pub const PAIR_HEADER: [&str; 3] = ["id", "source", "reference"];
pub const CANDIDATE_HEADER: [&str; 5] = ["id", "pair_id", "error_type", "half", "tagged_text"];

/// Loads a segment-pair TSV (`id`, `source`, `reference`), preserving file order.
pub fn load_segment_pairs(path: &Path, direction: &Direction) -> Result<Vec<SegmentPair>> {
    let table = tsv::read_table(path, &PAIR_HEADER, false, PAIR_HEADER.len())?;
    let name = path.display().to_string();
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        let (id, source, reference) = (row.get(0), row.get(1), row.get(2));
        if id.is_empty() {
            return Err(Error::parse(&name, row.line, "empty id"));
        }
        if source.is_empty() || reference.is_empty() {
            return Err(Error::parse(&name, row.line, format!("pair `{id}` has an empty source or reference")));
        }
        if !seen.insert(id.to_string()) {
            return Err(Error::Integrity(format!("duplicate pair id `{id}` in {name} (line {})", row.line)));
        }
        out.push(SegmentPair {
            pair_id: id.to_string(),
            direction: direction.clone(),
            source: source.to_string(),
            reference: reference.to_string(),
        });
    }
    Ok(out)
}

/// A candidate row that could not be turned into an edit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestReject {
    pub candidate_id: String,
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct IngestOutcome {
    pub candidates: Vec<ErrorCandidate>,
    pub rejects: Vec<IngestReject>,
}

/// Loads a candidate TSV against the pairs of the same direction.
///
/// Rows whose tags are malformed or whose change escapes the tagged region
/// are returned as [`IngestReject`]s; structural problems (unknown pair,
/// duplicate id, bad enum value) abort the load.
pub fn load_candidates(path: &Path, pairs: &[SegmentPair]) -> Result<IngestOutcome> {
    let table = tsv::read_table(path, &CANDIDATE_HEADER, false, CANDIDATE_HEADER.len())?;
    let name = path.display().to_string();
    let by_id: HashMap<&str, &SegmentPair> = pairs.iter().map(|p| (p.pair_id.as_str(), p)).collect();
    let mut seen = HashSet::new();
    let mut outcome = IngestOutcome::default();
    for row in &table.rows {
        let id = row.get(0);
        if id.is_empty() {
            return Err(Error::parse(&name, row.line, "empty candidate id"));
        }
        if !seen.insert(id.to_string()) {
            return Err(Error::Integrity(format!("duplicate candidate id `{id}` in {name} (line {})", row.line)));
        }
        let pair = by_id.get(row.get(1)).ok_or_else(|| {
            Error::Integrity(format!("candidate `{id}` references unknown pair `{}` ({name}:{})", row.get(1), row.line))
        })?;
        let error_type = row.get(2).parse().map_err(|e: Error| Error::parse(&name, row.line, e.to_string()))?;
        let half = row.get(3).parse().map_err(|e: Error| Error::parse(&name, row.line, e.to_string()))?;
        match ErrorCandidate::from_tagged(id, pair, error_type, half, row.get(4)) {
            Ok(c) => outcome.candidates.push(c),
            Err(e @ (Error::TagFormat(_) | Error::Alignment(_))) => outcome.rejects.push(IngestReject {
                candidate_id: id.to_string(),
                line: row.line,
                reason: e.to_string(),
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(outcome)
}

/// Serialises candidates in the candidate-file layout so they can be
/// reloaded with [`load_candidates`].
pub fn write_candidates(out: &mut TsvBuilder, candidates: &[ErrorCandidate]) -> Result<()> {
    out.row(CANDIDATE_HEADER)?;
    for c in candidates {
        out.row([
            c.candidate_id.as_str(),
            c.pair_id.as_str(),
            c.error_type.as_str(),
            c.half.as_str(),
            c.tagged_text.as_str(),
        ])?;
    }
    Ok(())
}
