//! Deterministic synthetic corpora for fixtures, benchmarks and tests.
//!
//! Sentences are strings of pseudo-words drawn from a per-direction
//! vocabulary. Each candidate perturbs one word position with one of the four
//! error types and wraps the changed region in `<v>…</v>`, mimicking the
//! output of an injection run.

use std::path::{Path, PathBuf};

use super::{DecisionSheet, Direction, ErrorType, Half, SegmentPair, TAG_CLOSE, TAG_OPEN};
use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::tsv::TsvBuilder;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub n_pairs: usize,
    pub min_words: usize,
    pub max_words: usize,
    pub candidates_per_pair: usize,
    /// Probability that a candidate reuses an already-perturbed position.
    pub overlap_rate: f64,
    /// Per-annotator probability of writing `T` in the reject column.
    pub reject_rate: f64,
    /// Probability of emitting a candidate with broken tags.
    pub malformed_rate: f64,
    pub annotators: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            n_pairs: 60,
            min_words: 12,
            max_words: 20,
            candidates_per_pair: 8,
            overlap_rate: 0.15,
            reject_rate: 0.05,
            malformed_rate: 0.0,
            annotators: 2,
            seed: 2024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateRow {
    pub id: String,
    pub pair_id: String,
    pub error_type: ErrorType,
    pub half: Half,
    pub tagged_text: String,
}

#[derive(Debug, Clone)]
pub struct SyntheticDirection {
    pub direction: Direction,
    pub pairs: Vec<SegmentPair>,
    pub candidates: Vec<CandidateRow>,
    pub decisions: DecisionSheet,
}

const ONSETS: &[&str] = &["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "sh", "ch", "tr"];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "ai", "ou"];

fn vocabulary(rng: &mut SeededRng, size: usize, max_syllables: usize) -> Vec<String> {
    let mut words: Vec<String> = Vec::with_capacity(size);
    while words.len() < size {
        let syllables = 1 + rng.index(max_syllables);
        let w: String = (0..syllables).map(|_| format!("{}{}", rng.choose(ONSETS), rng.choose(VOWELS))).collect();
        if !words.contains(&w) {
            words.push(w);
        }
    }
    words
}

fn other_word<'a>(rng: &mut SeededRng, vocab: &'a [String], not: &str) -> &'a str {
    loop {
        let w = rng.choose(vocab);
        if w != not {
            return w;
        }
    }
}

pub fn generate(direction: &Direction, config: &SyntheticConfig) -> Result<SyntheticDirection> {
    if config.min_words < 2 || config.max_words < config.min_words {
        return Err(Error::Config("synthetic sentences need 2 <= min_words <= max_words".into()));
    }
    let dir = direction.to_string();
    let mut rng = SeededRng::new(config.seed, &["synthetic", &dir]);
    // Directions differ in typical word length, which shifts chrF levels.
    let max_syllables = 2 + rng.index(3);
    let target_vocab = vocabulary(&mut rng, 400, max_syllables);
    let source_vocab = vocabulary(&mut rng, 400, 3);

    let mut pairs = Vec::with_capacity(config.n_pairs);
    let mut candidates = Vec::new();
    let mut decisions = DecisionSheet::default();
    for p in 0..config.n_pairs {
        let pair_id = format!("s{p:05}");
        let n_words = config.min_words + rng.index(config.max_words - config.min_words + 1);
        let words: Vec<&str> = (0..n_words).map(|_| rng.choose(&target_vocab).as_str()).collect();
        let src: Vec<&str> = (0..n_words).map(|_| rng.choose(&source_vocab).as_str()).collect();
        let reference = words.join(" ");
        let source = src.join(" ");

        let mut positions: Vec<usize> = Vec::new();
        let fresh = rng.sample_indices(n_words, config.candidates_per_pair.min(n_words));
        for (i, &pos) in fresh.iter().enumerate() {
            if i > 0 && rng.chance(config.overlap_rate) {
                let reused = positions[rng.index(positions.len())];
                positions.push(reused);
            } else {
                positions.push(pos);
            }
        }

        for (c, &pos) in positions.iter().enumerate() {
            let error_type = ErrorType::ALL[rng.index(4)];
            let half = if pos < n_words / 2 { Half::First } else { Half::Second };
            let (before, inner, after) = perturb(&mut rng, &words, pos, error_type, &target_vocab, &source_vocab);
            let tagged_text = if rng.chance(config.malformed_rate) {
                format!("{before}{TAG_OPEN}{inner}{after}")
            } else {
                format!("{before}{TAG_OPEN}{inner}{TAG_CLOSE}{after}")
            };
            let id = format!("{pair_id}-c{c}");
            for a in 0..config.annotators {
                decisions.push(&id, &format!("a{}", a + 1), !rng.chance(config.reject_rate));
            }
            candidates.push(CandidateRow { id, pair_id: pair_id.clone(), error_type, half, tagged_text });
        }
        pairs.push(SegmentPair { pair_id, direction: direction.clone(), source, reference });
    }
    Ok(SyntheticDirection { direction: direction.clone(), pairs, candidates, decisions })
}

/// Splits the perturbed sentence into (text before tag, tagged text, text after tag).
fn perturb(
    rng: &mut SeededRng,
    words: &[&str],
    pos: usize,
    error_type: ErrorType,
    target_vocab: &[String],
    source_vocab: &[String],
) -> (String, String, String) {
    let join = |ws: &[&str]| ws.join(" ");
    let head = join(&words[..pos]);
    let tail = join(&words[pos + 1..]);
    let sep = |s: &str| if s.is_empty() { "" } else { " " };
    match error_type {
        ErrorType::Addition => {
            let extra = other_word(rng, target_vocab, words[pos]);
            (
                format!("{head}{}", sep(&head)),
                format!("{extra} "),
                format!("{}{}{tail}", words[pos], sep(&tail)),
            )
        }
        ErrorType::Omission => {
            if tail.is_empty() {
                (head, String::new(), String::new())
            } else {
                (format!("{head}{}", sep(&head)), String::new(), tail)
            }
        }
        ErrorType::Mistranslation | ErrorType::Untranslated => {
            let vocab = if error_type == ErrorType::Mistranslation { target_vocab } else { source_vocab };
            let w = other_word(rng, vocab, words[pos]);
            (format!("{head}{}", sep(&head)), w.to_string(), format!("{}{tail}", sep(&tail)))
        }
    }
}

/// Paths of the three input files written for one direction.
#[derive(Debug, Clone)]
pub struct SyntheticFiles {
    pub pairs: PathBuf,
    pub candidates: PathBuf,
    pub decisions: PathBuf,
}

impl SyntheticDirection {
    pub fn pairs_tsv(&self) -> Result<String> {
        let mut b = TsvBuilder::new();
        b.row(super::PAIR_HEADER)?;
        for p in &self.pairs {
            b.row([p.pair_id.as_str(), p.source.as_str(), p.reference.as_str()])?;
        }
        Ok(b.finish())
    }

    pub fn candidates_tsv(&self) -> Result<String> {
        let mut b = TsvBuilder::new();
        b.row(super::CANDIDATE_HEADER)?;
        for c in &self.candidates {
            b.row([c.id.as_str(), c.pair_id.as_str(), c.error_type.as_str(), c.half.as_str(), c.tagged_text.as_str()])?;
        }
        Ok(b.finish())
    }

    pub fn decisions_tsv(&self) -> Result<String> {
        let mut b = TsvBuilder::new();
        b.row(super::DECISION_HEADER)?;
        for d in &self.decisions.decisions {
            b.row([d.candidate_id.as_str(), d.vote.annotator_id.as_str(), if d.vote.accept { "" } else { "T" }])?;
        }
        Ok(b.finish())
    }

    pub fn write_to(&self, dir: &Path) -> Result<SyntheticFiles> {
        let d = self.direction.to_string();
        let files = SyntheticFiles {
            pairs: dir.join(format!("{d}.pairs.tsv")),
            candidates: dir.join(format!("{d}.candidates.tsv")),
            decisions: dir.join(format!("{d}.decisions.tsv")),
        };
        for (path, body) in [
            (&files.pairs, self.pairs_tsv()?),
            (&files.candidates, self.candidates_tsv()?),
            (&files.decisions, self.decisions_tsv()?),
        ] {
            std::fs::write(path, body).map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
        }
        Ok(files)
    }
}
