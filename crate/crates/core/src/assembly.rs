//! System-level construction: pseudo systems whose human score is fixed in
//! advance by the quality levels of the triplets they are sampled from.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Direction;
use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::synthesis::{TripletPool, MAX_ERRORS, POINTS_PER_ERROR};

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan {
    pub n_per_direction: usize,
    pub repeats: usize,
    pub seed: u64,
    pub with_replacement: bool,
    pub directions: Vec<Direction>,
}

impl SamplingPlan {
    pub fn new(directions: Vec<Direction>, seed: u64) -> Self {
        Self { n_per_direction: 102, repeats: 10, seed, with_replacement: false, directions }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_per_direction == 0 || self.repeats == 0 {
            return Err(Error::Config("n_per_direction and repeats must be at least 1".into()));
        }
        if self.directions.is_empty() {
            return Err(Error::Config("sampling plan lists no directions".into()));
        }
        Ok(())
    }
}

/// A sampled set of triplets with a predetermined human score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoSystem {
    pub system_id: String,
    pub seed: u64,
    #[serde(rename = "repeat")]
    pub repeat_index: usize,
    /// Mean MQM points lost per segment that the system was built to hit.
    pub target_deduction: f64,
    /// Signed quality: mean over directions of the mean of `-deduction`.
    pub human_score: f64,
    pub members: BTreeMap<Direction, Vec<String>>,
    /// Mean deduction actually achieved in each direction.
    pub achieved_deduction: BTreeMap<Direction, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u8>,
}

fn mean_deduction(levels: &[u8]) -> f64 {
    let total: u64 = levels.iter().map(|&l| u64::from(l) * u64::from(POINTS_PER_ERROR)).sum();
    total as f64 / levels.len() as f64
}

/// Signed human score of a system from the quality levels of its members,
/// averaged first within and then across directions. Empty directions are
/// skipped.
pub fn human_score<'a>(levels_by_direction: impl IntoIterator<Item = &'a [u8]>) -> f64 {
    let means: Vec<f64> =
        levels_by_direction.into_iter().filter(|l| !l.is_empty()).map(mean_deduction).collect();
    if means.is_empty() {
        return 0.0;
    }
    let overall = means.iter().sum::<f64>() / means.len() as f64;
    // Avoid emitting -0.0 for perfect systems.
    if overall == 0.0 {
        0.0
    } else {
        -overall
    }
}

impl PseudoSystem {
    pub fn member_levels(&self, pools: &BTreeMap<Direction, TripletPool>) -> Result<BTreeMap<Direction, Vec<u8>>> {
        self.members
            .iter()
            .map(|(d, ids)| {
                let pool = pools.get(d).ok_or_else(|| Error::Integrity(format!("no pool for {d}")))?;
                let index: std::collections::HashMap<&str, u8> =
                    pool.triplets.iter().map(|t| (t.triplet_id.as_str(), t.level())).collect();
                let levels = ids
                    .iter()
                    .map(|id| {
                        index.get(id.as_str()).copied().ok_or_else(|| {
                            Error::Integrity(format!("system `{}` references unknown triplet `{id}`", self.system_id))
                        })
                    })
                    .collect::<Result<Vec<u8>>>()?;
                Ok((d.clone(), levels))
            })
            .collect()
    }

    /// Recomputes the human score from the pool; equals `human_score` exactly.
    pub fn recompute_human_score(&self, pools: &BTreeMap<Direction, TripletPool>) -> Result<f64> {
        let levels = self.member_levels(pools)?;
        Ok(human_score(levels.values().map(Vec::as_slice)))
    }
}

/// Splits a target deduction into `(base_level, upper_count)`: `upper_count`
/// of `n` segments come from `base_level + 1`, the rest from `base_level`.
///
/// With `target = 5 (q + f)` this assigns `ceil(f n)` segments to level
/// `q + 1`, hitting the target exactly when `f n` is integral and staying
/// within `5 / n` above it otherwise.
pub fn level_mixture(target_deduction: f64, n: usize) -> Result<(u8, usize)> {
    let max = (MAX_ERRORS as u32 * POINTS_PER_ERROR) as f64;
    if !target_deduction.is_finite() || !(0.0..=max).contains(&target_deduction) {
        return Err(Error::Config(format!("target deduction {target_deduction} outside [0, {max}]")));
    }
    let scaled = target_deduction / POINTS_PER_ERROR as f64;
    let q = scaled.floor();
    if q as usize >= MAX_ERRORS {
        return Ok((MAX_ERRORS as u8, 0));
    }
    let upper = (scaled - q) * n as f64;
    let rounded = upper.round();
    let upper = if (upper - rounded).abs() < 1e-9 { rounded as usize } else { upper.ceil() as usize };
    if upper >= n {
        Ok((q as u8 + 1, 0))
    } else {
        Ok((q as u8, upper))
    }
}

/// Mean deduction realised by [`level_mixture`].
pub fn achieved_deduction(target_deduction: f64, n: usize) -> Result<f64> {
    let (q, upper) = level_mixture(target_deduction, n)?;
    let mut levels = vec![q; n - upper];
    levels.extend(std::iter::repeat_n(q + 1, upper));
    Ok(mean_deduction(&levels))
}

fn draw(
    pool: &TripletPool,
    level: u8,
    count: usize,
    with_replacement: bool,
    rng: &mut SeededRng,
) -> Result<Vec<String>> {
    let positions = pool.level(level);
    if count == 0 {
        return Ok(Vec::new());
    }
    let picks = if with_replacement {
        if positions.is_empty() {
            return Err(Error::Capacity(format!("{}: level {level} has no triplets to sample", pool.direction)));
        }
        rng.sample_indices_with_replacement(positions.len(), count)
    } else {
        if positions.len() < count {
            return Err(Error::Capacity(format!(
                "{}: level {level} holds {} triplets, {count} needed (short by {})",
                pool.direction,
                positions.len(),
                count - positions.len()
            )));
        }
        rng.sample_indices(positions.len(), count)
    };
    Ok(picks.into_iter().map(|i| pool.get(positions[i]).triplet_id.clone()).collect())
}

/// Samples a single-direction system at one quality level.
pub fn sample_monolingual_system(
    pool: &TripletPool,
    level: u8,
    plan: &SamplingPlan,
    repeat_index: usize,
) -> Result<PseudoSystem> {
    if level as usize > MAX_ERRORS {
        return Err(Error::Domain(format!("quality level {level} outside 0..={MAX_ERRORS}")));
    }
    let dir = pool.direction.to_string();
    let mut rng =
        SeededRng::new(plan.seed, &["mono", &dir, &level.to_string(), &repeat_index.to_string()]);
    let ids = draw(pool, level, plan.n_per_direction, plan.with_replacement, &mut rng)?;
    let levels = vec![level; ids.len()];
    let deduction = mean_deduction(&levels);
    Ok(PseudoSystem {
        system_id: format!("mono_{dir}_l{level}_r{repeat_index}"),
        seed: plan.seed,
        repeat_index,
        target_deduction: deduction,
        human_score: human_score([levels.as_slice()]),
        members: BTreeMap::from([(pool.direction.clone(), ids)]),
        achieved_deduction: BTreeMap::from([(pool.direction.clone(), deduction)]),
        level: Some(level),
    })
}

/// Samples a system spanning `plan.directions` whose per-direction mean
/// deduction approximates `target_deduction` (see [`level_mixture`]).
pub fn sample_multilingual_system(
    pools: &BTreeMap<Direction, TripletPool>,
    target_deduction: f64,
    plan: &SamplingPlan,
    repeat_index: usize,
) -> Result<PseudoSystem> {
    plan.validate()?;
    let n = plan.n_per_direction;
    let (q, upper) = level_mixture(target_deduction, n)?;
    let mut members = BTreeMap::new();
    let mut achieved = BTreeMap::new();
    let mut all_levels = Vec::new();
    for d in &plan.directions {
        let pool = pools.get(d).ok_or_else(|| Error::Config(format!("no triplet pool for {d}")))?;
        let need = [(q, n - upper), (q + 1, upper)];
        if !plan.with_replacement {
            let short = need.iter().any(|&(l, c)| c > 0 && pool.level(l).len() < c);
            if short {
                let avail: Vec<String> = (0..=MAX_ERRORS as u8).map(|l| format!("{l}:{}", pool.level(l).len())).collect();
                return Err(Error::Capacity(format!(
                    "{d}: target {target_deduction} needs {} at level {q} and {upper} at level {}; available per level {}",
                    n - upper,
                    q + 1,
                    avail.join(" ")
                )));
            }
        }
        let mut ids = Vec::with_capacity(n);
        let mut levels = Vec::with_capacity(n);
        for (level, count) in need {
            let mut rng = SeededRng::new(
                plan.seed,
                &["multi", &repeat_index.to_string(), &target_deduction.to_string(), &d.to_string(), &level.to_string()],
            );
            ids.extend(draw(pool, level, count, plan.with_replacement, &mut rng)?);
            levels.extend(std::iter::repeat_n(level, count));
        }
        achieved.insert(d.clone(), mean_deduction(&levels));
        members.insert(d.clone(), ids);
        all_levels.push(levels);
    }
    Ok(PseudoSystem {
        system_id: format!("r{repeat_index}_t{target_deduction}"),
        seed: plan.seed,
        repeat_index,
        target_deduction,
        human_score: human_score(all_levels.iter().map(Vec::as_slice)),
        members,
        achieved_deduction: achieved,
        level: None,
    })
}

/// `targets.len() × plan.repeats` multilingual systems with ids `r{repeat}_t{index}`.
///
/// Targets must be strictly increasing and remain distinct after rounding to
/// the achievable mixtures for `plan.n_per_direction`, so that systems within
/// a repeat are strictly ranked by human score.
pub fn generate_system_suite(
    pools: &BTreeMap<Direction, TripletPool>,
    targets: &[f64],
    plan: &SamplingPlan,
) -> Result<Vec<PseudoSystem>> {
    plan.validate()?;
    if targets.is_empty() {
        return Err(Error::Config("no target deductions given".into()));
    }
    for w in targets.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Config(format!("targets must be strictly increasing ({} then {})", w[0], w[1])));
        }
    }
    let achieved: Vec<f64> =
        targets.iter().map(|&t| achieved_deduction(t, plan.n_per_direction)).collect::<Result<_>>()?;
    for (i, w) in achieved.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Err(Error::Config(format!(
                "targets {} and {} both realise {} points with {} triplets per direction",
                targets[i],
                targets[i + 1],
                w[0],
                plan.n_per_direction
            )));
        }
    }
    let per_repeat: Vec<Vec<PseudoSystem>> = (0..plan.repeats)
        .into_par_iter()
        .map(|r| {
            targets
                .iter()
                .enumerate()
                .map(|(i, &t)| {
                    let mut s = sample_multilingual_system(pools, t, plan, r)?;
                    s.system_id = format!("r{r}_t{i}");
                    Ok(s)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_repeat.into_iter().flatten().collect())
}

/// One single-direction system per (direction, level, repeat), in that order.
pub fn generate_monolingual_suite(
    pools: &BTreeMap<Direction, TripletPool>,
    levels: &[u8],
    plan: &SamplingPlan,
) -> Result<Vec<PseudoSystem>> {
    plan.validate()?;
    let mut jobs = Vec::new();
    for d in &plan.directions {
        let pool = pools.get(d).ok_or_else(|| Error::Config(format!("no triplet pool for {d}")))?;
        for &l in levels {
            for r in 0..plan.repeats {
                jobs.push((pool, l, r));
            }
        }
    }
    jobs.into_par_iter().map(|(pool, l, r)| sample_monolingual_system(pool, l, plan, r)).collect()
}

/// JSON Lines manifest: a leading `{"meta": …}` line, then one system per line.
pub fn write_manifest(meta: &serde_json::Value, systems: &[PseudoSystem]) -> Result<String> {
    let mut out = serde_json::to_string(&serde_json::json!({ "meta": meta }))?;
    out.push('\n');
    for s in systems {
        out.push_str(&serde_json::to_string(s)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn read_manifest(path: &Path) -> Result<Vec<PseudoSystem>> {
    let text = crate::tsv::read_file(path)?;
    let name = path.display().to_string();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(line).map_err(|e| Error::parse(&name, i + 1, e.to_string()))?;
        if value.get("meta").is_some() {
            continue;
        }
        out.push(serde_json::from_value(value).map_err(|e| Error::parse(&name, i + 1, e.to_string()))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Edit;
    use crate::synthesis::{PseudoTranslation, Triplet};

    /// A pool with `per_level` synthetic triplets at each level 0..=5.
    pub(crate) fn pool(dir: &str, per_level: usize) -> TripletPool {
        let d: Direction = dir.parse().unwrap();
        let mut ts = Vec::new();
        for level in 0..=5usize {
            for i in 0..per_level {
                let edits: Vec<Edit> = (0..level).map(|k| Edit::new(2 * k, 2 * k + 1, "#").unwrap()).collect();
                ts.push(Triplet {
                    triplet_id: format!("{dir}:l{level}:{i}"),
                    source: "s".into(),
                    reference: "abcdefghij".into(),
                    translation: PseudoTranslation {
                        pair_id: format!("p{i}"),
                        direction: d.clone(),
                        edits,
                        text: String::new(),
                        candidate_ids: vec![],
                    },
                });
            }
        }
        TripletPool::from_triplets(d, ts).unwrap()
    }

    fn pools(dirs: &[&str], per_level: usize) -> BTreeMap<Direction, TripletPool> {
        dirs.iter().map(|d| (d.parse().unwrap(), pool(d, per_level))).collect()
    }

    fn plan(dirs: &[&str], n: usize) -> SamplingPlan {
        SamplingPlan {
            n_per_direction: n,
            repeats: 3,
            seed: 11,
            with_replacement: false,
            directions: dirs.iter().map(|d| d.parse().unwrap()).collect(),
        }
    }

    #[test]
    fn monolingual_scores() {
        let p = pool("en-de", 120);
        let pl = plan(&["en-de"], 102);
        assert_eq!(sample_monolingual_system(&p, 0, &pl, 0).unwrap().human_score, 0.0);
        let s = sample_monolingual_system(&p, 3, &pl, 0).unwrap();
        assert_eq!(s.human_score, -15.0);
        assert_eq!(s.members.values().next().unwrap().len(), 102);
        assert!(matches!(sample_monolingual_system(&p, 6, &pl, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn monolingual_capacity_error_names_shortfall() {
        let p = pool("en-de", 100);
        match sample_monolingual_system(&p, 2, &plan(&["en-de"], 102), 0) {
            Err(Error::Capacity(m)) => assert!(m.contains("level 2") && m.contains("short by 2"), "{m}"),
            other => panic!("{other:?}"),
        }
        let mut pl = plan(&["en-de"], 102);
        pl.with_replacement = true;
        assert!(sample_monolingual_system(&p, 2, &pl, 0).is_ok());
    }

    #[test]
    fn monolingual_is_deterministic_and_distinct() {
        let p = pool("en-de", 150);
        let pl = plan(&["en-de"], 102);
        let a = sample_monolingual_system(&p, 1, &pl, 4).unwrap();
        let b = sample_monolingual_system(&p, 1, &pl, 4).unwrap();
        let c = sample_monolingual_system(&p, 1, &pl, 5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.members, c.members);
        let ids = a.members.values().next().unwrap();
        let uniq: std::collections::HashSet<_> = ids.iter().collect();
        assert_eq!(uniq.len(), ids.len());
    }

    #[test]
    fn mixture_examples() {
        assert_eq!(level_mixture(0.0, 102).unwrap(), (0, 0));
        assert_eq!(level_mixture(25.0, 102).unwrap(), (5, 0));
        assert_eq!(level_mixture(7.5, 102).unwrap(), (1, 51));
        assert_eq!(level_mixture(15.0, 102).unwrap(), (3, 0));
        assert!(level_mixture(25.5, 10).is_err());
        assert!(level_mixture(-1.0, 10).is_err());
        for t in [0.3, 1.7, 7.51, 12.345, 24.99] {
            let a = achieved_deduction(t, 102).unwrap();
            assert!(a >= t && a - t <= 5.0 / 102.0, "{t} -> {a}");
        }
    }

    #[test]
    fn multilingual_targets() {
        let ps = pools(&["en-de", "en-ja"], 150);
        let pl = plan(&["en-de", "en-ja"], 102);
        let s = sample_multilingual_system(&ps, 0.0, &pl, 0).unwrap();
        assert_eq!(s.human_score, 0.0);
        let s = sample_multilingual_system(&ps, 25.0, &pl, 0).unwrap();
        assert_eq!(s.human_score, -25.0);
        let s = sample_multilingual_system(&ps, 7.5, &pl, 0).unwrap();
        for v in s.achieved_deduction.values() {
            assert!((v - 7.5).abs() <= 5.0 / 102.0);
        }
        assert!((s.human_score + 7.5).abs() <= 5.0 / 102.0);
        assert_eq!(s.recompute_human_score(&ps).unwrap(), s.human_score);
    }

    #[test]
    fn multilingual_capacity_lists_availability() {
        let ps = pools(&["en-de"], 30);
        match sample_multilingual_system(&ps, 10.0, &plan(&["en-de"], 40), 0) {
            Err(Error::Capacity(m)) => assert!(m.contains("2:30"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn suite_shape_and_ranking() {
        let ps = pools(&["en-de", "en-ja"], 150);
        let targets: Vec<f64> = (0..10).map(|i| i as f64 * 2.5).collect();
        let pl = plan(&["en-de", "en-ja"], 102);
        let suite = generate_system_suite(&ps, &targets, &pl).unwrap();
        assert_eq!(suite.len(), 30);
        assert_eq!(suite[13].system_id, "r1_t3");
        for r in 0..3 {
            let hs: Vec<f64> = suite.iter().filter(|s| s.repeat_index == r).map(|s| s.human_score).collect();
            assert!(hs.windows(2).all(|w| w[1] < w[0]), "{hs:?}");
        }
        let single = generate_system_suite(&ps, &[5.0], &SamplingPlan { repeats: 1, ..pl.clone() }).unwrap();
        assert_eq!(single.len(), 1);
        assert!(matches!(generate_system_suite(&ps, &[5.0, 5.0], &pl), Err(Error::Config(_))));
        assert!(matches!(generate_system_suite(&ps, &[5.0, 5.0 + 1e-12], &pl), Err(Error::Config(_))));
        assert!(matches!(generate_system_suite(&ps, &[], &pl), Err(Error::Config(_))));
    }

    #[test]
    fn suite_is_thread_count_independent() {
        let ps = pools(&["en-de", "en-ja"], 150);
        let pl = plan(&["en-de", "en-ja"], 50);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| generate_system_suite(&ps, &[1.0, 6.0, 11.0], &pl).unwrap())
        };
        let meta = serde_json::json!({});
        assert_eq!(write_manifest(&meta, &run(1)).unwrap(), write_manifest(&meta, &run(6)).unwrap());
    }

    #[test]
    fn manifest_round_trips() {
        let ps = pools(&["en-de"], 20);
        let s = sample_multilingual_system(&ps, 2.5, &plan(&["en-de"], 10), 0).unwrap();
        let text = write_manifest(&serde_json::json!({"seed": 11}), std::slice::from_ref(&s)).unwrap();
        let second = text.lines().nth(1).unwrap();
        assert!(second.starts_with(r#"{"system_id":"r0_t2.5","seed":11,"repeat":0,"target_deduction":2.5,"human_score":-2.5,"members":{"en-de":["#));
        let f = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(f.path(), &text).unwrap();
        assert_eq!(read_manifest(f.path()).unwrap(), vec![s]);
    }
}
