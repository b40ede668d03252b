//! System scoring by the average strategy and the correlation and stability
//! reports built on it.

use std::collections::BTreeMap;

use serde::Serialize;

use super::kendall::kendall_tau_b;
use super::lgn::{lgn_apply, CalibrationSet};
use super::stats;
use crate::assembly::{human_score, PseudoSystem};
use crate::corpus::Direction;
use crate::error::{Error, Result};
use crate::metrics::ScoreMatrix;
use crate::synthesis::POINTS_PER_ERROR;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemEvaluation {
    pub system_id: String,
    pub repeat_index: usize,
    pub level: Option<u8>,
    pub metric: String,
    pub per_direction: BTreeMap<Direction, f64>,
    /// Metric score: mean of the per-direction means.
    pub s_m: f64,
    /// Human score recomputed from member levels.
    pub s_h: f64,
    pub lgn_applied: bool,
}

/// Scores `system` with `metric`: per-direction means of (optionally
/// LGN-normalised) triplet scores, then their unweighted mean.
pub fn evaluate_average_strategy(
    system: &PseudoSystem,
    matrix: &ScoreMatrix,
    metric: &str,
    lgn: Option<&CalibrationSet>,
) -> Result<SystemEvaluation> {
    let mut per_direction = BTreeMap::new();
    let mut levels: Vec<Vec<u8>> = Vec::new();
    for (direction, ids) in &system.members {
        if ids.is_empty() {
            continue;
        }
        let stats = match lgn {
            Some(set) => {
                let s = set.get(direction).ok_or_else(|| {
                    Error::Calibration(format!("no LGN statistics for {metric} on {direction}"))
                })?;
                if s.metric != metric || &s.direction != direction {
                    return Err(Error::Calibration(format!(
                        "statistics for {} on {} supplied for {metric} on {direction}",
                        s.metric, s.direction
                    )));
                }
                Some(s)
            }
            None => None,
        };
        let mut scores = Vec::with_capacity(ids.len());
        let mut lv = Vec::with_capacity(ids.len());
        for id in ids {
            let row = matrix.row(id).ok_or_else(|| Error::Coverage { triplet_id: id.clone(), metric: metric.into() })?;
            if &row.direction != direction {
                return Err(Error::Integrity(format!(
                    "system `{}` lists {id} under {direction}, but it belongs to {}",
                    system.system_id, row.direction
                )));
            }
            let s = matrix.require(id, metric)?;
            scores.push(match stats {
                Some(st) => lgn_apply(s, st),
                None => s,
            });
            lv.push(row.level);
        }
        per_direction.insert(direction.clone(), stats::mean(&scores));
        levels.push(lv);
    }
    if per_direction.is_empty() {
        return Err(Error::Domain(format!("system `{}` has no members", system.system_id)));
    }
    let means: Vec<f64> = per_direction.values().copied().collect();
    Ok(SystemEvaluation {
        system_id: system.system_id.clone(),
        repeat_index: system.repeat_index,
        level: system.level,
        metric: metric.to_string(),
        per_direction,
        s_m: stats::mean(&means),
        s_h: human_score(levels.iter().map(Vec::as_slice)),
        lgn_applied: lgn.is_some(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    System,
    Triplet,
}

impl Granularity {
    pub fn as_str(self) -> &'static str {
        match self {
            Granularity::System => "system",
            Granularity::Triplet => "triplet",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub metric: String,
    pub granularity: Granularity,
    pub num_languages: usize,
    pub lgn_applied: bool,
    /// Mean over repeats.
    pub tau: f64,
    pub repeats: usize,
    pub per_repeat_taus: Vec<f64>,
}

/// τ-b between `s_m` and `s_h` within each repeat, averaged over repeats.
pub fn system_level_correlation(evaluations: &[SystemEvaluation]) -> Result<CorrelationReport> {
    let first = evaluations.first().ok_or_else(|| Error::Domain("no system evaluations".into()))?;
    let mut by_repeat: BTreeMap<usize, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for e in evaluations {
        if e.metric != first.metric || e.lgn_applied != first.lgn_applied {
            return Err(Error::Domain("system evaluations mix metrics or normalisations".into()));
        }
        let slot = by_repeat.entry(e.repeat_index).or_default();
        slot.0.push(e.s_m);
        slot.1.push(e.s_h);
    }
    let per_repeat_taus =
        by_repeat.values().map(|(m, h)| kendall_tau_b(m, h)).collect::<Result<Vec<f64>>>()?;
    Ok(CorrelationReport {
        metric: first.metric.clone(),
        granularity: Granularity::System,
        num_languages: evaluations.iter().map(|e| e.per_direction.len()).max().unwrap_or(0),
        lgn_applied: first.lgn_applied,
        tau: stats::mean(&per_repeat_taus),
        repeats: per_repeat_taus.len(),
        per_repeat_taus,
    })
}

/// τ-b between triplet scores and signed MQM quality, pooled over the given
/// directions.
pub fn triplet_level_correlation(
    matrix: &ScoreMatrix,
    metric: &str,
    directions: &[Direction],
    lgn: Option<&CalibrationSet>,
) -> Result<CorrelationReport> {
    let mut m = Vec::new();
    let mut h = Vec::new();
    for row in matrix.rows().iter().filter(|r| directions.contains(&r.direction)) {
        let s = matrix.require(&row.triplet_id, metric)?;
        let s = match lgn {
            Some(set) => {
                let st = set.get(&row.direction).ok_or_else(|| {
                    Error::Calibration(format!("no LGN statistics for {metric} on {}", row.direction))
                })?;
                lgn_apply(s, st)
            }
            None => s,
        };
        m.push(s);
        h.push(-f64::from(u32::from(row.level) * POINTS_PER_ERROR));
    }
    let tau = kendall_tau_b(&m, &h)?;
    Ok(CorrelationReport {
        metric: metric.to_string(),
        granularity: Granularity::Triplet,
        num_languages: directions.len(),
        lgn_applied: lgn.is_some(),
        tau,
        repeats: 1,
        per_repeat_taus: vec![tau],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvReport {
    pub metric: String,
    pub level: u8,
    pub lgn_applied: bool,
    pub per_direction: BTreeMap<Direction, f64>,
    pub cv: f64,
}

/// CV across directions of the repeat-averaged scores of same-level
/// monolingual systems.
pub fn cross_lingual_cv(evaluations: &[SystemEvaluation], level: u8) -> Result<CvReport> {
    let mut groups: BTreeMap<Direction, Vec<f64>> = BTreeMap::new();
    let mut meta = None;
    for e in evaluations.iter().filter(|e| e.level == Some(level)) {
        if e.per_direction.len() != 1 {
            return Err(Error::Domain(format!("system `{}` is not monolingual", e.system_id)));
        }
        let (d, &v) = e.per_direction.iter().next().expect("one direction");
        groups.entry(d.clone()).or_default().push(v);
        meta.get_or_insert((e.metric.clone(), e.lgn_applied));
    }
    let (metric, lgn_applied) =
        meta.ok_or_else(|| Error::Domain(format!("no monolingual systems at level {level}")))?;
    let per_direction: BTreeMap<Direction, f64> = groups.into_iter().map(|(d, v)| (d, stats::mean(&v))).collect();
    let values: Vec<f64> = per_direction.values().copied().collect();
    let cv = stats::coefficient_of_variation(&values)?;
    Ok(CvReport { metric, level, lgn_applied, per_direction, cv })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::lgn::CalibrationStats;
    use crate::metrics::RowMeta;

    fn setup() -> (ScoreMatrix, Vec<PseudoSystem>) {
        let dirs: Vec<Direction> = ["en-de", "zh-en"].iter().map(|d| d.parse().unwrap()).collect();
        let mut rows = Vec::new();
        for d in &dirs {
            for level in 0..=5u8 {
                for i in 0..4 {
                    rows.push(RowMeta { triplet_id: format!("{d}:{level}:{i}"), direction: d.clone(), level });
                }
            }
        }
        let mut m = ScoreMatrix::new(rows.clone(), vec!["m".into()]).unwrap();
        for (k, r) in rows.iter().enumerate() {
            let offset = if r.direction == dirs[0] { 10.0 } else { 0.0 };
            m.set(&r.triplet_id, "m", 90.0 - 6.0 * r.level as f64 + offset + (k % 3) as f64 * 0.7).unwrap();
        }
        let mut systems = Vec::new();
        for repeat in 0..2 {
            for level in 0..=4u8 {
                let members: BTreeMap<Direction, Vec<String>> = dirs
                    .iter()
                    .map(|d| (d.clone(), (0..3).map(|i| format!("{d}:{}:{}", level + (i % 2) as u8, (i + repeat) % 4)).collect()))
                    .collect();
                systems.push(PseudoSystem {
                    system_id: format!("r{repeat}_t{level}"),
                    seed: 1,
                    repeat_index: repeat,
                    target_deduction: 0.0,
                    human_score: 0.0,
                    members,
                    achieved_deduction: BTreeMap::new(),
                    level: None,
                });
            }
        }
        (m, systems)
    }

    #[test]
    fn equal_counts_give_global_mean() {
        let (m, systems) = setup();
        for s in &systems {
            let e = evaluate_average_strategy(s, &m, "m", None).unwrap();
            let all: Vec<f64> = s.members.values().flatten().map(|id| m.get(id, "m").unwrap()).collect();
            assert!((e.s_m - stats::mean(&all)).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_lgn_is_bit_identical() {
        let (m, systems) = setup();
        let set: CalibrationSet = ["en-de", "zh-en"]
            .iter()
            .map(|d| {
                let d: Direction = d.parse().unwrap();
                (d.clone(), CalibrationStats { metric: "m".into(), direction: d, mu: 0.0, sigma: 1.0, n_pooled: 6, repeats: 1, seed: 0 })
            })
            .collect();
        for s in &systems {
            let a = evaluate_average_strategy(s, &m, "m", None).unwrap();
            let b = evaluate_average_strategy(s, &m, "m", Some(&set)).unwrap();
            assert_eq!(a.s_m.to_bits(), b.s_m.to_bits());
            assert_eq!(a.s_h, b.s_h);
        }
    }

    #[test]
    fn wrong_or_missing_calibration() {
        let (m, systems) = setup();
        let d: Direction = "en-de".parse().unwrap();
        let only_one: CalibrationSet = [(d.clone(), CalibrationStats { metric: "m".into(), direction: d.clone(), mu: 0.0, sigma: 1.0, n_pooled: 6, repeats: 1, seed: 0 })].into();
        assert!(matches!(evaluate_average_strategy(&systems[0], &m, "m", Some(&only_one)), Err(Error::Calibration(_))));
        let z: Direction = "zh-en".parse().unwrap();
        let swapped: CalibrationSet = [
            (d.clone(), CalibrationStats { metric: "m".into(), direction: z.clone(), mu: 0.0, sigma: 1.0, n_pooled: 6, repeats: 1, seed: 0 }),
            (z.clone(), CalibrationStats { metric: "m".into(), direction: d.clone(), mu: 0.0, sigma: 1.0, n_pooled: 6, repeats: 1, seed: 0 }),
        ]
        .into();
        assert!(matches!(evaluate_average_strategy(&systems[0], &m, "m", Some(&swapped)), Err(Error::Calibration(_))));
        assert!(matches!(evaluate_average_strategy(&systems[0], &m, "nope", None), Err(Error::Coverage { .. })));
    }

    #[test]
    fn correlations() {
        let (m, systems) = setup();
        let evals: Vec<_> = systems.iter().map(|s| evaluate_average_strategy(s, &m, "m", None).unwrap()).collect();
        let r = system_level_correlation(&evals).unwrap();
        assert_eq!(r.repeats, 2);
        assert_eq!(r.num_languages, 2);
        assert!(r.tau > 0.9, "{r:?}");
        let dirs: Vec<Direction> = vec!["en-de".parse().unwrap(), "zh-en".parse().unwrap()];
        let t = triplet_level_correlation(&m, "m", &dirs, None).unwrap();
        assert!(t.tau > 0.5);
    }

    #[test]
    fn cv_over_monolingual_systems() {
        let (m, _) = setup();
        let mut evals = Vec::new();
        for d in ["en-de", "zh-en"] {
            let dir: Direction = d.parse().unwrap();
            for repeat in 0..2 {
                let sys = PseudoSystem {
                    system_id: format!("mono_{d}_l1_r{repeat}"),
                    seed: 0,
                    repeat_index: repeat,
                    target_deduction: 5.0,
                    human_score: -5.0,
                    members: [(dir.clone(), vec![format!("{d}:1:{repeat}")])].into(),
                    achieved_deduction: BTreeMap::new(),
                    level: Some(1),
                };
                evals.push(evaluate_average_strategy(&sys, &m, "m", None).unwrap());
            }
        }
        let r = cross_lingual_cv(&evals, 1).unwrap();
        let expected = stats::coefficient_of_variation(&r.per_direction.values().copied().collect::<Vec<_>>()).unwrap();
        assert_eq!(r.cv, expected);
        assert!(r.cv > 0.0);
        assert!(cross_lingual_cv(&evals, 3).is_err());
    }
}
