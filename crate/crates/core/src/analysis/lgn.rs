//! Level-grounded normalisation: per-direction score statistics estimated
//! from a sample balanced across all quality levels.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use super::stats;
use crate::corpus::Direction;
use crate::error::{Error, Result};
use crate::metrics::ScoreMatrix;
use crate::rng::SeededRng;
use crate::synthesis::MAX_ERRORS;
use crate::tsv::{self, TsvBuilder};

pub const CALIBRATION_HEADER: [&str; 7] = ["metric", "direction", "mu", "sigma", "n_pooled", "repeats", "seed"];
pub const LGN_SAMPLE_HEADER: [&str; 5] = ["metric", "direction", "repeat", "level", "triplet_id"];

#[derive(Debug, Clone, PartialEq)]
pub struct LgnPlan {
    pub per_level_n: usize,
    pub repeats: usize,
    pub seed: u64,
    pub with_replacement: bool,
}

impl LgnPlan {
    pub fn new(seed: u64) -> Self {
        Self { per_level_n: 102, repeats: 10, seed, with_replacement: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationStats {
    pub metric: String,
    pub direction: Direction,
    pub mu: f64,
    pub sigma: f64,
    /// Triplets pooled per repeat.
    pub n_pooled: usize,
    pub repeats: usize,
    pub seed: u64,
}

/// Calibration for one metric, keyed by direction.
pub type CalibrationSet = BTreeMap<Direction, CalibrationStats>;

#[derive(Debug, Clone, PartialEq)]
pub struct LgnSample {
    pub repeat: usize,
    pub level: u8,
    pub triplet_id: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LgnFit {
    pub stats: CalibrationStats,
    /// `(mu, sigma)` of each repeat's pooled sample.
    pub per_repeat: Vec<(f64, f64)>,
    pub samples: Vec<LgnSample>,
}

/// Estimates `(mu, sigma)` of `metric` in `direction`: each repeat draws
/// `per_level_n` triplets from every level 0..=5, takes the pooled mean and
/// sample sd, and the final statistics average over repeats.
pub fn lgn_fit(matrix: &ScoreMatrix, metric: &str, direction: &Direction, plan: &LgnPlan) -> Result<LgnFit> {
    if plan.per_level_n == 0 || plan.repeats == 0 {
        return Err(Error::Config("LGN per_level_n and repeats must be at least 1".into()));
    }
    if matrix.metric_index(metric).is_none() {
        return Err(Error::Coverage { triplet_id: "*".into(), metric: metric.to_string() });
    }
    let mut by_level: BTreeMap<u8, Vec<(&str, f64)>> = BTreeMap::new();
    for row in matrix.rows().iter().filter(|r| &r.direction == direction) {
        let score = matrix.require(&row.triplet_id, metric)?;
        by_level.entry(row.level).or_default().push((&row.triplet_id, score));
    }
    for level in 0..=MAX_ERRORS as u8 {
        let have = by_level.get(&level).map_or(0, Vec::len);
        let short = if plan.with_replacement { have == 0 } else { have < plan.per_level_n };
        if short {
            return Err(Error::Capacity(format!(
                "LGN for {metric} on {direction}: level {level} holds {have} scored triplets, {} needed",
                if plan.with_replacement { 1 } else { plan.per_level_n }
            )));
        }
    }

    let dir = direction.to_string();
    let mut mus = Vec::with_capacity(plan.repeats);
    let mut sigmas = Vec::with_capacity(plan.repeats);
    let mut samples = Vec::new();
    for repeat in 0..plan.repeats {
        let mut pooled = Vec::with_capacity(plan.per_level_n * (MAX_ERRORS + 1));
        for level in 0..=MAX_ERRORS as u8 {
            let cands = &by_level[&level];
            let mut rng = SeededRng::new(plan.seed, &["lgn", metric, &dir, &repeat.to_string(), &level.to_string()]);
            let picks = if plan.with_replacement {
                rng.sample_indices_with_replacement(cands.len(), plan.per_level_n)
            } else {
                rng.sample_indices(cands.len(), plan.per_level_n)
            };
            for i in picks {
                pooled.push(cands[i].1);
                samples.push(LgnSample { repeat, level, triplet_id: cands[i].0.to_string() });
            }
        }
        mus.push(stats::mean(&pooled));
        sigmas.push(stats::sample_sd(&pooled));
    }
    let mu = stats::mean(&mus);
    let sigma = stats::mean(&sigmas);
    if sigma.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) || !sigma.is_finite() || !mu.is_finite() {
        return Err(Error::DegenerateCalibration { metric: metric.to_string(), direction: dir });
    }
    Ok(LgnFit {
        stats: CalibrationStats {
            metric: metric.to_string(),
            direction: direction.clone(),
            mu,
            sigma,
            n_pooled: plan.per_level_n * (MAX_ERRORS + 1),
            repeats: plan.repeats,
            seed: plan.seed,
        },
        per_repeat: mus.into_iter().zip(sigmas).collect(),
        samples,
    })
}

/// `z = (s - mu) / sigma`.
pub fn lgn_apply(score: f64, stats: &CalibrationStats) -> f64 {
    debug_assert!(stats.sigma > 0.0);
    (score - stats.mu) / stats.sigma
}

pub fn write_calibration(out: &mut TsvBuilder, stats: &[CalibrationStats]) -> Result<()> {
    out.row(CALIBRATION_HEADER)?;
    for s in stats {
        out.row([
            s.metric.clone(),
            s.direction.to_string(),
            s.mu.to_string(),
            s.sigma.to_string(),
            s.n_pooled.to_string(),
            s.repeats.to_string(),
            s.seed.to_string(),
        ])?;
    }
    Ok(())
}

pub fn write_samples(out: &mut TsvBuilder, metric: &str, direction: &Direction, samples: &[LgnSample]) -> Result<()> {
    for s in samples {
        out.row([
            metric.to_string(),
            direction.to_string(),
            s.repeat.to_string(),
            s.level.to_string(),
            s.triplet_id.clone(),
        ])?;
    }
    Ok(())
}

/// Reads a calibration table into per-metric sets.
pub fn read_calibration(path: &Path) -> Result<BTreeMap<String, CalibrationSet>> {
    let table = tsv::read_table(path, &CALIBRATION_HEADER, false, 0)?;
    let name = path.display().to_string();
    let mut out: BTreeMap<String, CalibrationSet> = BTreeMap::new();
    for row in &table.rows {
        let bad = |what: &str| Error::parse(&name, row.line, format!("bad {what}"));
        let direction: Direction = row.get(1).parse().map_err(|_| bad("direction"))?;
        let num = |i: usize, what: &str| row.get(i).parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| bad(what));
        let stats = CalibrationStats {
            metric: row.get(0).to_string(),
            direction: direction.clone(),
            mu: num(2, "mu")?,
            sigma: num(3, "sigma")?,
            n_pooled: row.get(4).parse().map_err(|_| bad("n_pooled"))?,
            repeats: row.get(5).parse().map_err(|_| bad("repeats"))?,
            seed: row.get(6).parse().map_err(|_| bad("seed"))?,
        };
        if stats.sigma <= 0.0 {
            return Err(Error::DegenerateCalibration { metric: stats.metric, direction: direction.to_string() });
        }
        let set = out.entry(stats.metric.clone()).or_default();
        if set.insert(direction.clone(), stats).is_some() {
            return Err(Error::Integrity(format!("{name}: duplicate calibration for {} on {direction}", row.get(0))));
        }
    }
    Ok(out)
}
