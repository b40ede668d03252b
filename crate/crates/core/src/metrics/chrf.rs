//! Character n-gram F-score (chrF, and chrF++ when word orders are enabled).

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChrfConfig {
    pub char_n: usize,
    /// 0 gives plain chrF, 2 gives chrF++.
    pub word_n: usize,
    pub beta: f64,
}

impl Default for ChrfConfig {
    fn default() -> Self {
        Self { char_n: 6, word_n: 2, beta: 2.0 }
    }
}

impl ChrfConfig {
    pub const CHRF: ChrfConfig = ChrfConfig { char_n: 6, word_n: 0, beta: 2.0 };

    pub fn validate(&self) -> Result<()> {
        if self.char_n == 0 || self.beta.partial_cmp(&0.0) != Some(Ordering::Greater) || !self.beta.is_finite() {
            return Err(Error::Config(format!("invalid chrF config {self:?}: need char_n >= 1 and beta > 0")));
        }
        Ok(())
    }

    /// Effective configuration, e.g. `chrF++(c6,w2,b2)`.
    pub fn label(&self) -> String {
        let family = if self.word_n == 0 { "chrF" } else { "chrF++" };
        format!("{family}(c{},w{},b{})", self.char_n, self.word_n, self.beta)
    }
}

/// Per-order n-gram totals: hypothesis count, reference count, clipped matches.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OrderStats {
    pub hyp: usize,
    pub reference: usize,
    pub matches: usize,
}

fn order_stats<T: Ord>(hyp: &[T], reference: &[T], n: usize) -> OrderStats {
    fn grams<T: Ord>(xs: &[T], n: usize) -> Vec<&[T]> {
        let mut g: Vec<&[T]> = if xs.len() >= n { xs.windows(n).collect() } else { Vec::new() };
        g.sort_unstable();
        g
    }
    let (h, r) = (grams(hyp, n), grams(reference, n));
    // Clipped matches of two sorted multisets: the size of their intersection.
    let (mut i, mut j, mut matches) = (0, 0, 0);
    while i < h.len() && j < r.len() {
        match h[i].cmp(r[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                matches += 1;
                i += 1;
                j += 1;
            }
        }
    }
    OrderStats { hyp: h.len(), reference: r.len(), matches }
}

/// Collects statistics for character orders `1..=char_n` (whitespace
/// removed) followed by word orders `1..=word_n`.
pub fn chrf_statistics(hypothesis: &str, reference: &str, config: &ChrfConfig) -> Vec<OrderStats> {
    let hc: Vec<char> = hypothesis.chars().filter(|c| !c.is_whitespace()).collect();
    let rc: Vec<char> = reference.chars().filter(|c| !c.is_whitespace()).collect();
    let mut stats: Vec<OrderStats> = (1..=config.char_n).map(|n| order_stats(&hc, &rc, n)).collect();
    if config.word_n > 0 {
        let hw: Vec<&str> = hypothesis.split_whitespace().collect();
        let rw: Vec<&str> = reference.split_whitespace().collect();
        stats.extend((1..=config.word_n).map(|n| order_stats(&hw, &rw, n)));
    }
    stats
}

/// F-beta of the precision and recall averaged over orders present in both
/// strings, scaled to `[0, 100]`.
pub fn f_score(stats: &[OrderStats], beta: f64) -> f64 {
    let (mut prec, mut rec, mut effective) = (0.0, 0.0, 0usize);
    for s in stats {
        if s.hyp > 0 && s.reference > 0 {
            prec += s.matches as f64 / s.hyp as f64;
            rec += s.matches as f64 / s.reference as f64;
            effective += 1;
        }
    }
    if effective == 0 {
        return 0.0;
    }
    prec /= effective as f64;
    rec /= effective as f64;
    if prec + rec == 0.0 {
        return 0.0;
    }
    let b2 = beta * beta;
    100.0 * (1.0 + b2) * prec * rec / (b2 * prec + rec)
}

/// Sentence-level chrF. Identical non-empty strings score 100 even when they
/// contain no n-grams (e.g. whitespace only).
pub fn chrf_score(hypothesis: &str, reference: &str, config: &ChrfConfig) -> f64 {
    if hypothesis == reference && !hypothesis.is_empty() {
        return 100.0;
    }
    f_score(&chrf_statistics(hypothesis, reference, config), config.beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_empty() {
        let cfg = ChrfConfig::default();
        assert_eq!(chrf_score("the cat sat", "the cat sat", &cfg), 100.0);
        assert_eq!(chrf_score("  ", "  ", &cfg), 100.0);
        assert_eq!(chrf_score("", "abc", &cfg), 0.0);
        assert_eq!(chrf_score("abc", "", &cfg), 0.0);
        assert_eq!(chrf_score("", "", &cfg), 0.0);
    }

    #[test]
    fn hand_computed_bigram_case() {
        // "abcd" vs "abce", orders 1 and 2:
        // unigrams: 3 of 4 match both ways; bigrams: ab, bc match of 3.
        let cfg = ChrfConfig { char_n: 2, word_n: 0, beta: 2.0 };
        let p = (3.0 / 4.0 + 2.0 / 3.0) / 2.0;
        let r = p;
        let expected = 100.0 * 5.0 * p * r / (4.0 * p + r);
        assert!((chrf_score("abcd", "abce", &cfg) - expected).abs() < 1e-12);
    }

    #[test]
    fn short_hypothesis_skips_missing_orders() {
        let cfg = ChrfConfig { char_n: 3, word_n: 0, beta: 2.0 };
        // Only the unigram order exists in both: p = 1, r = 1/3.
        let expected = 100.0 * 5.0 * (1.0 / 3.0) / (4.0 + 1.0 / 3.0);
        assert!((chrf_score("a", "abc", &cfg) - expected).abs() < 1e-12);
    }

    #[test]
    fn labels() {
        assert_eq!(ChrfConfig::default().label(), "chrF++(c6,w2,b2)");
        assert_eq!(ChrfConfig::CHRF.label(), "chrF(c6,w0,b2)");
        assert!(ChrfConfig { char_n: 0, ..Default::default() }.validate().is_err());
        assert!(ChrfConfig { beta: 0.0, ..Default::default() }.validate().is_err());
    }
}
