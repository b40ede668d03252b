//! Sentence-level construction: merging non-overlapping single-error edits
//! into pseudo translations and collecting them into a triplet pool.

mod pool_file;
mod prompt;

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::corpus::{Direction, Edit, ErrorCandidate, SegmentPair};
use crate::error::{Error, Result};

pub use pool_file::{decode_edits, encode_edits, read_pool, write_pool, POOL_HEADER};
pub use prompt::{render_injection_prompt, render_template};

/// Upper bound on merged errors per sentence.
pub const MAX_ERRORS: usize = 5;
/// MQM points deducted per major error.
pub const POINTS_PER_ERROR: u32 = 5;

/// Half-open interval intersection, plus two insertions at one anchor.
/// Touching intervals do not overlap.
pub fn edits_overlap(a: &Edit, b: &Edit) -> bool {
    if a.is_insertion() && b.is_insertion() {
        return a.start() == b.start();
    }
    a.start() < b.end() && b.start() < a.end()
}

/// Applies pairwise non-overlapping edits to `base`.
///
/// Offsets are code points into the original `base`. The result does not
/// depend on the order of `edits`: they are canonically sorted by
/// `(start, end)` before splicing, so an insertion sharing its anchor with a
/// replacement lands in front of it.
pub fn apply_edits(base: &str, edits: &[Edit]) -> Result<String> {
    let chars: Vec<char> = base.chars().collect();
    let mut sorted: Vec<&Edit> = edits.iter().collect();
    sorted.sort_by_key(|e| (e.start(), e.end()));
    for e in &sorted {
        if e.end() > chars.len() {
            return Err(Error::Bounds { start: e.start(), end: e.end(), len: chars.len() });
        }
    }
    for (i, a) in sorted.iter().enumerate() {
        for b in &sorted[i + 1..] {
            if edits_overlap(a, b) {
                return Err(Error::Overlap { a_start: a.start(), a_end: a.end(), b_start: b.start(), b_end: b.end() });
            }
        }
    }
    let mut out = String::with_capacity(base.len() + sorted.iter().map(|e| e.replacement().len()).sum::<usize>());
    let mut cursor = 0;
    for e in sorted {
        out.extend(&chars[cursor..e.start()]);
        out.push_str(e.replacement());
        cursor = e.end();
    }
    out.extend(&chars[cursor..]);
    Ok(out)
}

/// MQM points lost by a sentence with `error_count` major errors.
pub fn mqm_deduction(error_count: usize) -> Result<u32> {
    if error_count > MAX_ERRORS {
        return Err(Error::Domain(format!("error count {error_count} exceeds the maximum of {MAX_ERRORS}")));
    }
    Ok(POINTS_PER_ERROR * error_count as u32)
}

/// A reference with `error_count` merged errors (the quality level).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoTranslation {
    pub pair_id: String,
    pub direction: Direction,
    /// Sorted by start; pairwise non-overlapping.
    pub edits: Vec<Edit>,
    pub text: String,
    /// Ids of the candidates merged into this translation.
    pub candidate_ids: Vec<String>,
}

impl PseudoTranslation {
    pub fn error_count(&self) -> usize {
        self.edits.len()
    }

    pub fn level(&self) -> u8 {
        self.edits.len() as u8
    }

    pub fn deduction(&self) -> u32 {
        POINTS_PER_ERROR * self.edits.len() as u32
    }

    /// Signed MQM quality used for every correlation: `-deduction`.
    pub fn quality(&self) -> f64 {
        -(self.deduction() as f64)
    }
}

/// Enumerates every subset of `candidates` with at most `k_max` members
/// whose edits are pairwise non-overlapping, including the empty subset.
///
/// Candidates are ordered by id; output is grouped by subset size and, within
/// a size, in lexicographic order of candidate positions.
pub fn enumerate_pseudo_translations(
    pair: &SegmentPair,
    candidates: &[&ErrorCandidate],
    k_max: usize,
) -> Result<Vec<PseudoTranslation>> {
    if k_max > MAX_ERRORS {
        return Err(Error::Domain(format!("k_max {k_max} exceeds {MAX_ERRORS}")));
    }
    for c in candidates {
        if c.pair_id != pair.pair_id || c.direction != pair.direction {
            return Err(Error::Integrity(format!(
                "candidate `{}` belongs to {}/{}, not {}/{}",
                c.candidate_id, c.direction, c.pair_id, pair.direction, pair.pair_id
            )));
        }
    }
    let mut sorted: Vec<&ErrorCandidate> = candidates.to_vec();
    sorted.sort_by(|a, b| a.candidate_id.cmp(&b.candidate_id));
    let n = sorted.len();
    let clash: Vec<Vec<bool>> =
        (0..n).map(|i| (0..n).map(|j| i != j && edits_overlap(&sorted[i].edit, &sorted[j].edit)).collect()).collect();

    let mut out = Vec::new();
    for k in 0..=k_max.min(n) {
        let mut chosen = Vec::with_capacity(k);
        combinations(n, k, 0, &clash, &mut chosen, &mut |subset| {
            let mut edits: Vec<Edit> = subset.iter().map(|&i| sorted[i].edit.clone()).collect();
            edits.sort_by_key(|e| (e.start(), e.end()));
            let text = apply_edits(&pair.reference, &edits)?;
            out.push(PseudoTranslation {
                pair_id: pair.pair_id.clone(),
                direction: pair.direction.clone(),
                edits,
                text,
                candidate_ids: subset.iter().map(|&i| sorted[i].candidate_id.clone()).collect(),
            });
            Ok(())
        })?;
    }
    Ok(out)
}

fn combinations(
    n: usize,
    k: usize,
    from: usize,
    clash: &[Vec<bool>],
    chosen: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    if chosen.len() == k {
        return emit(chosen);
    }
    let remaining = k - chosen.len();
    for i in from..n {
        if n - i < remaining {
            break;
        }
        if chosen.iter().any(|&j| clash[i][j]) {
            continue;
        }
        chosen.push(i);
        combinations(n, k, i + 1, clash, chosen, emit)?;
        chosen.pop();
    }
    Ok(())
}

/// A (source, pseudo translation, reference) instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triplet {
    pub triplet_id: String,
    pub source: String,
    pub translation: PseudoTranslation,
    pub reference: String,
}

impl Triplet {
    pub fn direction(&self) -> &Direction {
        &self.translation.direction
    }

    pub fn level(&self) -> u8 {
        self.translation.level()
    }
}

/// Per-pair enumeration counts (smallest and largest pair).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PairSpread {
    pub min: usize,
    pub max: usize,
}

/// All triplets of one direction, indexed by quality level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripletPool {
    pub direction: Direction,
    pub triplets: Vec<Triplet>,
    /// Level to positions in `triplets`, in pool order.
    pub by_level: BTreeMap<u8, Vec<usize>>,
    pub per_pair: PairSpread,
}

impl TripletPool {
    pub fn from_triplets(direction: Direction, triplets: Vec<Triplet>) -> Result<Self> {
        let mut by_level: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
        let mut per_pair: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, t) in triplets.iter().enumerate() {
            if t.translation.direction != direction {
                return Err(Error::Integrity(format!("triplet `{}` is not in {direction}", t.triplet_id)));
            }
            by_level.entry(t.level()).or_default().push(i);
            *per_pair.entry(t.translation.pair_id.as_str()).or_default() += 1;
        }
        let per_pair = PairSpread {
            min: per_pair.values().copied().min().unwrap_or(0),
            max: per_pair.values().copied().max().unwrap_or(0),
        };
        Ok(Self { direction, triplets, by_level, per_pair })
    }

    pub fn level(&self, level: u8) -> &[usize] {
        self.by_level.get(&level).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn level_counts(&self) -> BTreeMap<u8, usize> {
        self.by_level.iter().map(|(k, v)| (*k, v.len())).collect()
    }

    pub fn get(&self, idx: usize) -> &Triplet {
        &self.triplets[idx]
    }
}

pub fn triplet_id(direction: &Direction, pair_id: &str, index: usize) -> String {
    format!("{direction}:{pair_id}:{index}")
}

/// Builds the pool for one direction from its pairs and accepted candidates.
///
/// Pairs are enumerated in parallel and merged in input order, so the pool is
/// identical for any thread count. Unaccepted candidates are ignored.
pub fn build_triplet_pool(
    direction: &Direction,
    pairs: &[SegmentPair],
    candidates: &[ErrorCandidate],
    k_max: usize,
) -> Result<TripletPool> {
    let mut grouped: HashMap<&str, Vec<&ErrorCandidate>> = HashMap::new();
    for c in candidates.iter().filter(|c| c.filter.accepted) {
        grouped.entry(c.pair_id.as_str()).or_default().push(c);
    }
    let known: std::collections::HashSet<&str> = pairs.iter().map(|p| p.pair_id.as_str()).collect();
    if let Some(orphan) = grouped.keys().find(|k| !known.contains(*k)) {
        return Err(Error::Integrity(format!("accepted candidates reference unknown pair `{orphan}`")));
    }
    for p in pairs {
        if &p.direction != direction {
            return Err(Error::Integrity(format!("pair `{}` is {}, expected {direction}", p.pair_id, p.direction)));
        }
    }
    let per_pair: Vec<Vec<Triplet>> = pairs
        .par_iter()
        .map(|pair| {
            let cands = grouped.get(pair.pair_id.as_str()).map(Vec::as_slice).unwrap_or(&[]);
            let pts = enumerate_pseudo_translations(pair, cands, k_max)?;
            Ok(pts
                .into_iter()
                .enumerate()
                .map(|(i, translation)| Triplet {
                    triplet_id: triplet_id(direction, &pair.pair_id, i),
                    source: pair.source.clone(),
                    reference: pair.reference.clone(),
                    translation,
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    TripletPool::from_triplets(direction.clone(), per_pair.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ErrorType, FilterStatus, Half, Vote};

    fn e(s: usize, t: usize, r: &str) -> Edit {
        Edit::new(s, t, r).unwrap()
    }

    #[test]
    fn overlap_examples() {
        assert!(edits_overlap(&e(1, 4, "x"), &e(3, 6, "y")));
        assert!(!edits_overlap(&e(1, 3, "x"), &e(3, 6, "y")));
        assert!(edits_overlap(&e(5, 5, "x"), &e(5, 5, "y")));
        assert!(!edits_overlap(&e(5, 5, "x"), &e(5, 7, "")));
        assert!(edits_overlap(&e(5, 5, "x"), &e(4, 7, "")));
    }

    #[test]
    fn apply_examples() {
        assert_eq!(apply_edits("ABCDEFGH", &[e(1, 3, "xy"), e(5, 7, "Q")]).unwrap(), "AxyDEQH");
        assert_eq!(apply_edits("ABCDEFGH", &[e(5, 7, "Q"), e(1, 3, "xy")]).unwrap(), "AxyDEQH");
        assert_eq!(apply_edits("abc", &[]).unwrap(), "abc");
        assert!(matches!(apply_edits("abc", &[e(0, 2, "z"), e(1, 3, "w")]), Err(Error::Overlap { .. })));
        assert!(matches!(apply_edits("abc", &[e(2, 4, "z")]), Err(Error::Bounds { .. })));
    }

    #[test]
    fn insertion_and_replacement_share_anchor() {
        let a = apply_edits("abcd", &[e(1, 3, "X"), e(1, 1, "+")]).unwrap();
        let b = apply_edits("abcd", &[e(1, 1, "+"), e(1, 3, "X")]).unwrap();
        assert_eq!(a, "a+Xd");
        assert_eq!(a, b);
    }

    #[test]
    fn mqm_examples() {
        assert_eq!(mqm_deduction(3).unwrap(), 15);
        assert_eq!(mqm_deduction(0).unwrap(), 0);
        assert_eq!(mqm_deduction(5).unwrap(), 25);
        assert!(matches!(mqm_deduction(6), Err(Error::Domain(_))));
    }

    pub(crate) fn pair(id: &str, reference: &str) -> SegmentPair {
        SegmentPair {
            pair_id: id.into(),
            direction: "en-de".parse().unwrap(),
            source: format!("src {id}"),
            reference: reference.into(),
        }
    }

    pub(crate) fn cand(id: &str, pair: &SegmentPair, edit: Edit) -> ErrorCandidate {
        ErrorCandidate {
            candidate_id: id.into(),
            pair_id: pair.pair_id.clone(),
            direction: pair.direction.clone(),
            error_type: ErrorType::Mistranslation,
            half: Half::First,
            tagged_text: String::new(),
            edit,
            filter: FilterStatus::from_votes(vec![Vote { annotator_id: "a".into(), accept: true }]),
        }
    }

    #[test]
    fn enumeration_counts() {
        let p = pair("p", "0123456789");
        let cs = [cand("a", &p, e(0, 1, "A")), cand("b", &p, e(3, 4, "B")), cand("c", &p, e(6, 7, "C"))];
        let refs: Vec<&ErrorCandidate> = cs.iter().collect();
        let out = enumerate_pseudo_translations(&p, &refs, 5).unwrap();
        assert_eq!(out.len(), 8);
        assert_eq!(out[0].text, "0123456789");
        assert_eq!(out[7].text, "A12B45C789");

        let cs = [cand("a", &p, e(0, 3, "A")), cand("b", &p, e(2, 4, "B"))];
        let refs: Vec<&ErrorCandidate> = cs.iter().collect();
        assert_eq!(enumerate_pseudo_translations(&p, &refs, 5).unwrap().len(), 3);

        let out = enumerate_pseudo_translations(&p, &[], 5).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].error_count(), 0);
        assert_eq!(out[0].text, p.reference);
    }

    #[test]
    fn enumeration_rejects_foreign_candidates() {
        let p = pair("p", "0123");
        let q = pair("q", "0123");
        let c = cand("a", &q, e(0, 1, "x"));
        assert!(matches!(enumerate_pseudo_translations(&p, &[&c], 5), Err(Error::Integrity(_))));
    }

    #[test]
    fn pool_levels() {
        let p1 = pair("p1", "abcdef");
        let p2 = pair("p2", "uvwxyz");
        let cs = vec![cand("a", &p1, e(0, 1, "A")), cand("b", &p2, e(2, 3, "B"))];
        let d: Direction = "en-de".parse().unwrap();
        let pool = build_triplet_pool(&d, &[p1.clone(), p2], &cs, 5).unwrap();
        assert_eq!(pool.triplets.len(), 4);
        assert_eq!(pool.level_counts(), BTreeMap::from([(0, 2), (1, 2)]));
        assert_eq!(pool.per_pair, PairSpread { min: 2, max: 2 });

        let empty = build_triplet_pool(&d, &[p1], &[], 5).unwrap();
        assert_eq!(empty.level_counts(), BTreeMap::from([(0, 1)]));
    }

    #[test]
    fn unaccepted_candidates_are_ignored() {
        let p = pair("p", "abcdef");
        let mut c = cand("a", &p, e(0, 1, "A"));
        c.filter = FilterStatus::from_votes(vec![Vote { annotator_id: "x".into(), accept: false }]);
        let pool = build_triplet_pool(&p.direction.clone(), &[p], &[c], 5).unwrap();
        assert_eq!(pool.triplets.len(), 1);
    }

    #[test]
    fn k_max_limits_levels() {
        let p = pair("p", "0123456789");
        let cs: Vec<ErrorCandidate> =
            (0..6).map(|i| cand(&format!("c{i}"), &p, e(i, i + 1, "#"))).collect();
        let pool = build_triplet_pool(&p.direction.clone(), std::slice::from_ref(&p), &cs, 2).unwrap();
        assert_eq!(pool.level_counts(), BTreeMap::from([(0, 1), (1, 6), (2, 15)]));
        let full = build_triplet_pool(&p.direction.clone(), &[p], &cs, 5).unwrap();
        assert_eq!(full.level_counts(), BTreeMap::from([(0, 1), (1, 6), (2, 15), (3, 20), (4, 15), (5, 6)]));
    }
}
