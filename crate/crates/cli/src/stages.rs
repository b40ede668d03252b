//! Pipeline stages. Each reads its upstream artifacts from the output
//! directory and writes its own, all-or-nothing.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::PathBuf;

use rayon::prelude::*;
use serde_json::json;

use mtcal_core::analysis::lgn::{write_samples, LGN_SAMPLE_HEADER};
use mtcal_core::analysis::stats;
use mtcal_core::analysis::{
    cross_lingual_cv, evaluate_average_strategy, lgn_apply, lgn_fit, paired_t_test, read_calibration,
    system_level_correlation, triplet_level_correlation, write_calibration, CalibrationSet, CorrelationReport,
    Granularity, LgnPlan, SystemEvaluation,
};
use mtcal_core::assembly::{generate_monolingual_suite, generate_system_suite, read_manifest, write_manifest, PseudoSystem};
use mtcal_core::corpus::{
    apply_filters, load_candidates, load_decisions, load_segment_pairs, write_candidates, Direction, ErrorCandidate,
    ErrorType, Half,
};
use mtcal_core::metrics::{score_pool, ScoreMatrix};
use mtcal_core::synthesis::{build_triplet_pool, read_pool, render_injection_prompt, write_pool, TripletPool, MAX_ERRORS};
use mtcal_core::{Error, Result};

use crate::config::Loaded;
use crate::output::{self, InputDigest, Stage};
use crate::report;

pub const POOL: &str = "pool.tsv";
pub const POOL_DISTRIBUTION: &str = "pool_distribution.tsv";
pub const INGEST_REPORT: &str = "ingest_report.tsv";
pub const INGEST_REJECTS: &str = "ingest_rejects.tsv";
pub const SYSTEMS: &str = "systems.jsonl";
pub const MONO_SYSTEMS: &str = "mono_systems.jsonl";
pub const SCORES: &str = "scores.tsv";
pub const SCORE_FAILURES: &str = "score_failures.tsv";
pub const CALIBRATION: &str = "calibration.tsv";
pub const LGN_SAMPLES: &str = "lgn_samples.tsv";
pub const CORRELATION: &str = "correlation.tsv";
pub const CV: &str = "cv.tsv";
pub const TTEST: &str = "ttest.tsv";
pub const STABILITY: &str = "stability.tsv";
pub const LEVEL_MEANS: &str = "level_means.tsv";
pub const REPORT: &str = "report.json";

pub fn accepted_file(d: &Direction) -> String {
    format!("accepted.{d}.tsv")
}

pub struct Ctx {
    pub loaded: Loaded,
    pub use_lgn: bool,
}

impl Ctx {
    fn out(&self) -> PathBuf {
        self.loaded.output_dir()
    }

    /// Path of an upstream artifact, or a dependency error naming its stage.
    fn upstream(&self, name: &str, stage: &str) -> Result<PathBuf> {
        let p = self.out().join(name);
        if p.is_file() {
            Ok(p)
        } else {
            Err(Error::Dependency { stage: stage.into(), path: p })
        }
    }

    fn stage(&self, name: &'static str, digest: InputDigest) -> Stage {
        let c = &self.loaded;
        Stage { dir: self.out(), meta: output::meta(name, &c.hash, c.config.seed, digest.finish()) }
    }

    fn read_pools(&self, digest: &mut InputDigest) -> Result<BTreeMap<Direction, TripletPool>> {
        let path = self.upstream(POOL, "synth")?;
        digest.file(POOL, &path)?;
        let pools = read_pool(&path)?;
        for d in self.loaded.directions() {
            if !pools.contains_key(&d) {
                return Err(Error::Integrity(format!("{} has no triplets for {d}", path.display())));
            }
        }
        Ok(pools)
    }
}

pub fn ingest(ctx: &Ctx) -> Result<()> {
    let l = &ctx.loaded;
    let mut digest = InputDigest::new();
    for d in &l.config.directions {
        digest.file(&format!("{}.pairs", d.name), &l.resolve(&d.pairs))?;
        digest.file(&format!("{}.candidates", d.name), &l.resolve(&d.candidates))?;
        if let Some(p) = &d.decisions {
            digest.file(&format!("{}.decisions", d.name), &l.resolve(p))?;
        }
    }
    let stage = ctx.stage("ingest", digest);
    let filter = l.filter_config();

    let mut report = stage.meta.tsv();
    report.row(["direction", "error_type", "generated", "accepted", "required_votes"])?;
    let mut rejects = stage.meta.tsv();
    rejects.row(["direction", "candidate_id", "line", "reason"])?;
    let mut outputs = Vec::new();
    for d in &l.config.directions {
        let pairs = load_segment_pairs(&l.resolve(&d.pairs), &d.name)?;
        let outcome = load_candidates(&l.resolve(&d.candidates), &pairs)?;
        let decisions = d.decisions.as_ref().expect("validated at load");
        let mut sheet = load_decisions(&l.resolve(decisions))?;
        // Votes on malformed candidates are moot; the candidate is already in the rejects file.
        let malformed: HashSet<&str> = outcome.rejects.iter().map(|r| r.candidate_id.as_str()).collect();
        sheet.decisions.retain(|d| !malformed.contains(d.candidate_id.as_str()));
        let filtered = apply_filters(outcome.candidates, &sheet, &filter)?;
        let required = filter.required_for(&d.name).to_string();
        for t in ErrorType::ALL {
            let of_type: Vec<&ErrorCandidate> = filtered.iter().filter(|c| c.error_type == t).collect();
            let accepted = of_type.iter().filter(|c| c.filter.accepted).count();
            report.row([d.name.to_string(), t.to_string(), of_type.len().to_string(), accepted.to_string(), required.clone()])?;
        }
        for r in &outcome.rejects {
            rejects.row([d.name.to_string(), r.candidate_id.clone(), r.line.to_string(), r.reason.clone()])?;
        }
        let accepted: Vec<ErrorCandidate> = filtered.into_iter().filter(|c| c.filter.accepted).collect();
        let mut b = stage.meta.tsv();
        write_candidates(&mut b, &accepted)?;
        eprintln!(
            "ingest {}: {} pairs, {} accepted candidates, {} malformed",
            d.name,
            pairs.len(),
            accepted.len(),
            outcome.rejects.len()
        );
        outputs.push((accepted_file(&d.name), b.finish()));
    }
    outputs.push((INGEST_REPORT.into(), report.finish()));
    outputs.push((INGEST_REJECTS.into(), rejects.finish()));
    for (name, body) in outputs {
        stage.write(&name, &body)?;
    }
    Ok(())
}

pub fn synth(ctx: &Ctx) -> Result<()> {
    let l = &ctx.loaded;
    let mut digest = InputDigest::new();
    let mut inputs = Vec::new();
    for d in &l.config.directions {
        let accepted = ctx.upstream(&accepted_file(&d.name), "ingest")?;
        digest.file(&format!("{}.pairs", d.name), &l.resolve(&d.pairs))?;
        digest.file(&accepted_file(&d.name), &accepted)?;
        inputs.push((d, accepted));
    }
    let stage = ctx.stage("synth", digest);
    let mut pools = BTreeMap::new();
    for (d, accepted) in inputs {
        let pairs = load_segment_pairs(&l.resolve(&d.pairs), &d.name)?;
        let outcome = load_candidates(&accepted, &pairs)?;
        if let Some(r) = outcome.rejects.first() {
            return Err(Error::Integrity(format!("{}:{}: {}", accepted.display(), r.line, r.reason)));
        }
        let candidates: Vec<ErrorCandidate> = outcome
            .candidates
            .into_iter()
            .map(|mut c| {
                c.filter.accepted = true;
                c
            })
            .collect();
        let pool = build_triplet_pool(&d.name, &pairs, &candidates, l.config.sampling.k_max)?;
        eprintln!("synth {}: {} triplets {:?}", d.name, pool.triplets.len(), pool.level_counts());
        pools.insert(d.name.clone(), pool);
    }
    let mut b = stage.meta.tsv();
    write_pool(&mut b, pools.values())?;
    let mut dist = stage.meta.tsv();
    dist.row(["direction", "level", "triplets", "per_pair_min", "per_pair_max"])?;
    for pool in pools.values() {
        let pair_ids: BTreeSet<&str> = pool.triplets.iter().map(|t| t.translation.pair_id.as_str()).collect();
        for level in 0..=MAX_ERRORS as u8 {
            let mut per_pair: BTreeMap<&str, usize> = pair_ids.iter().map(|p| (*p, 0)).collect();
            for &i in pool.level(level) {
                *per_pair.get_mut(pool.get(i).translation.pair_id.as_str()).expect("known pair") += 1;
            }
            dist.row([
                pool.direction.to_string(),
                level.to_string(),
                pool.level(level).len().to_string(),
                per_pair.values().min().copied().unwrap_or(0).to_string(),
                per_pair.values().max().copied().unwrap_or(0).to_string(),
            ])?;
        }
    }
    let pool_body = b.finish();
    let dist_body = dist.finish();
    stage.write(POOL, &pool_body)?;
    stage.write(POOL_DISTRIBUTION, &dist_body)?;
    Ok(())
}

fn subset_label(dirs: &[Direction]) -> String {
    dirs.iter().map(Direction::to_string).collect::<Vec<_>>().join(",")
}

pub fn assemble(ctx: &Ctx) -> Result<()> {
    let l = &ctx.loaded;
    let mut digest = InputDigest::new();
    let pools = ctx.read_pools(&mut digest)?;
    let stage = ctx.stage("assemble", digest);
    let s = &l.config.sampling;

    let mut systems = Vec::new();
    let subsets = l.language_subsets();
    for (k, subset) in subsets.iter().enumerate() {
        let plan = l.sampling_plan(subset.clone(), s.system_repeats);
        for mut sys in generate_system_suite(&pools, &s.targets, &plan)? {
            sys.system_id = format!("s{k}_{}", sys.system_id);
            systems.push(sys);
        }
    }
    let plan = l.sampling_plan(l.directions(), l.mono_repeats());
    let mono = generate_monolingual_suite(&pools, &s.levels, &plan)?;

    let mut m = stage.meta.json();
    m["subsets"] = json!(subsets.iter().map(|d| subset_label(d)).collect::<Vec<_>>());
    m["n_per_direction"] = json!(s.n_per_direction);
    m["with_replacement"] = json!(s.with_replacement);
    m["human_score"] = json!("signed: -(mean MQM deduction), 5 points per error");
    let systems_body = write_manifest(&m, &systems)?;
    let mono_body = write_manifest(&m, &mono)?;
    eprintln!("assemble: {} multilingual systems, {} monolingual systems", systems.len(), mono.len());
    stage.write(SYSTEMS, &systems_body)?;
    stage.write(MONO_SYSTEMS, &mono_body)?;
    Ok(())
}

pub fn score(ctx: &Ctx) -> Result<()> {
    let specs = ctx.loaded.metric_specs()?;
    if specs.is_empty() {
        return Err(Error::Config("no [[metrics]] configured".into()));
    }
    let mut digest = InputDigest::new();
    let pools = ctx.read_pools(&mut digest)?;
    let stage = ctx.stage("score", digest);
    let triplets: Vec<_> = pools.values().flat_map(|p| p.triplets.iter().cloned()).collect();
    let outcome = score_pool(&specs, &triplets)?;

    let mut b = stage.meta.tsv();
    for s in &specs {
        b.meta(&format!("metric {}", s.describe()));
    }
    outcome.matrix.write(&mut b)?;
    let mut f = stage.meta.tsv();
    f.row(["metric", "missing", "error"])?;
    for fail in &outcome.failures {
        let msg = fail.error.to_string().replace(['\t', '\n', '\r'], " ");
        f.row([fail.metric.clone(), fail.missing.len().to_string(), msg])?;
    }
    let scores_body = b.finish();
    let failures_body = f.finish();
    stage.write(SCORES, &scores_body)?;
    stage.write(SCORE_FAILURES, &failures_body)?;
    eprintln!("score: {} triplets x {} metrics", triplets.len(), specs.len());
    match outcome.failures.into_iter().next() {
        Some(f) => Err(f.error),
        None => Ok(()),
    }
}

pub fn fit_lgn(ctx: &Ctx) -> Result<()> {
    let l = &ctx.loaded;
    let path = ctx.upstream(SCORES, "score")?;
    let mut digest = InputDigest::new();
    digest.file(SCORES, &path)?;
    let stage = ctx.stage("fit-lgn", digest);
    let matrix = ScoreMatrix::read(&path)?;
    let plan = LgnPlan {
        per_level_n: l.config.lgn.per_level_n,
        repeats: l.config.lgn.repeats,
        seed: l.config.seed,
        with_replacement: l.config.lgn.with_replacement,
    };
    let jobs: Vec<(String, Direction)> = matrix
        .metrics()
        .iter()
        .flat_map(|m| l.directions().into_iter().map(move |d| (m.clone(), d)))
        .collect();
    let fits = jobs
        .par_iter()
        .map(|(m, d)| lgn_fit(&matrix, m, d, &plan))
        .collect::<Result<Vec<_>>>()?;
    let mut cal = stage.meta.tsv();
    write_calibration(&mut cal, &fits.iter().map(|f| f.stats.clone()).collect::<Vec<_>>())?;
    let mut samples = stage.meta.tsv();
    samples.row(LGN_SAMPLE_HEADER)?;
    for (f, (m, d)) in fits.iter().zip(&jobs) {
        write_samples(&mut samples, m, d, &f.samples)?;
    }
    let cal_body = cal.finish();
    let samples_body = samples.finish();
    stage.write(CALIBRATION, &cal_body)?;
    stage.write(LGN_SAMPLES, &samples_body)?;
    eprintln!("fit-lgn: {} calibrations", fits.len());
    Ok(())
}

fn fmt(v: f64) -> String {
    format!("{v:.6}")
}

struct Variant<'a> {
    name: &'static str,
    cal: Option<&'a CalibrationSet>,
}

pub fn analyze(ctx: &Ctx) -> Result<()> {
    let l = &ctx.loaded;
    let mut digest = InputDigest::new();
    let scores_path = ctx.upstream(SCORES, "score")?;
    let systems_path = ctx.upstream(SYSTEMS, "assemble")?;
    let mono_path = ctx.upstream(MONO_SYSTEMS, "assemble")?;
    digest.file(SCORES, &scores_path)?;
    digest.file(SYSTEMS, &systems_path)?;
    digest.file(MONO_SYSTEMS, &mono_path)?;
    let calibration = if ctx.use_lgn {
        let p = ctx.out().join(CALIBRATION);
        if !p.is_file() {
            return Err(Error::Calibration(format!(
                "--use-lgn needs {} (run `fit-lgn` first)",
                p.display()
            )));
        }
        digest.file(CALIBRATION, &p)?;
        Some(read_calibration(&p)?)
    } else {
        None
    };
    let stage = ctx.stage("analyze", digest);
    let matrix = ScoreMatrix::read(&scores_path)?;
    let systems = read_manifest(&systems_path)?;
    let mono = read_manifest(&mono_path)?;
    let s = &l.config.sampling;
    let directions = l.directions();

    let mut by_subset: BTreeMap<Vec<Direction>, Vec<&PseudoSystem>> = BTreeMap::new();
    for sys in &systems {
        by_subset.entry(sys.members.keys().cloned().collect()).or_default().push(sys);
    }

    let mut corr = stage.meta.tsv();
    corr.meta("kendall tau-b; human score = -(MQM deduction); triplet level pools all triplets of the listed directions");
    corr.row(["metric", "variant", "granularity", "num_languages", "directions", "tau", "repeats"])?;
    let mut cv = stage.meta.tsv();
    cv.meta("cv = 100 * sample sd / |mean| over per-direction means of monolingual systems");
    let mut cv_header = vec!["metric".to_string(), "variant".into(), "level".into(), "cv_percent".into()];
    cv_header.extend(directions.iter().map(|d| d.to_string()));
    cv.row(&cv_header)?;
    let mut stab = stage.meta.tsv();
    stab.row(["metric", "repeats", "direction", "level", "mean", "variance"])?;
    let mut level_means = stage.meta.tsv();
    level_means.row(["metric", "variant", "direction", "level", "triplets", "mean"])?;

    let mut report_metrics = Vec::new();
    let mut taus: BTreeMap<(Vec<Direction>, Granularity), TausByMetric> = BTreeMap::new();
    let mut notes: Vec<String> = Vec::new();
    let mut charts = Vec::new();

    for metric in matrix.metrics() {
        let mut variants = vec![Variant { name: "plain", cal: None }];
        if let Some(c) = &calibration {
            let set = c.get(metric).ok_or_else(|| {
                Error::Calibration(format!("{CALIBRATION} has no statistics for metric `{metric}`"))
            })?;
            variants.push(Variant { name: "lgn", cal: Some(set) });
        }
        let mut metric_json = json!({ "metric": metric });
        for v in &variants {
            let evals: Vec<SystemEvaluation> = systems
                .par_iter()
                .map(|sys| evaluate_average_strategy(sys, &matrix, metric, v.cal))
                .collect::<Result<_>>()?;
            let index: BTreeMap<&str, &SystemEvaluation> = evals.iter().map(|e| (e.system_id.as_str(), e)).collect();
            let mut reports: Vec<(Vec<Direction>, CorrelationReport)> = Vec::new();
            for (subset, members) in &by_subset {
                let group: Vec<SystemEvaluation> =
                    members.iter().map(|m| index[m.system_id.as_str()].clone()).collect();
                reports.push((subset.clone(), system_level_correlation(&group)?));
                reports.push((subset.clone(), triplet_level_correlation(&matrix, metric, subset, v.cal)?));
            }
            for (subset, r) in &reports {
                corr.row([
                    metric.clone(),
                    v.name.to_string(),
                    r.granularity.as_str().to_string(),
                    r.num_languages.to_string(),
                    subset_label(subset),
                    fmt(r.tau),
                    r.repeats.to_string(),
                ])?;
                taus.entry((subset.clone(), r.granularity))
                    .or_default()
                    .entry(metric.clone())
                    .or_default()
                    .insert(v.name, r.tau);
            }

            let mono_evals: Vec<SystemEvaluation> = mono
                .par_iter()
                .map(|sys| evaluate_average_strategy(sys, &matrix, metric, v.cal))
                .collect::<Result<_>>()?;
            let mut cv_json = Vec::new();
            if directions.len() >= 2 {
                for &level in &s.levels {
                    let mut at_level: Vec<SystemEvaluation> = mono_evals
                        .iter()
                        .filter(|e| e.level == Some(level) && e.repeat_index < s.repeats)
                        .cloned()
                        .collect();
                    at_level.sort_by(|a, b| a.system_id.cmp(&b.system_id));
                    let r = match cross_lingual_cv(&at_level, level) {
                        Ok(r) => r,
                        Err(e @ Error::Domain(_)) => {
                            notes.push(format!("{metric} {} level {level}: {e}", v.name));
                            continue;
                        }
                        Err(e) => return Err(e),
                    };
                    let mut row = vec![metric.clone(), v.name.to_string(), level.to_string(), fmt(r.cv)];
                    row.extend(directions.iter().map(|d| r.per_direction.get(d).map_or("NA".into(), |m| fmt(*m))));
                    cv.row(&row)?;
                    cv_json.push(serde_json::to_value(&r)?);
                }
            } else if v.name == "plain" {
                notes.push(format!("{metric}: cross-lingual CV needs at least 2 directions"));
            }

            if v.name == "plain" {
                for &reps in &s.stability_repeats {
                    for d in &directions {
                        for &level in &s.levels {
                            let vals: Vec<f64> = mono_evals
                                .iter()
                                .filter(|e| e.level == Some(level) && e.repeat_index < reps && e.per_direction.contains_key(d))
                                .map(|e| e.s_m)
                                .collect();
                            if vals.len() < reps {
                                continue;
                            }
                            stab.row([
                                metric.clone(),
                                reps.to_string(),
                                d.to_string(),
                                level.to_string(),
                                fmt(stats::mean(&vals)),
                                fmt(stats::sample_variance(&vals)),
                            ])?;
                        }
                    }
                }
            }

            let curves = level_curves(&matrix, metric, v.cal)?;
            for (d, points) in &curves {
                for &(level, n, mean) in points {
                    level_means.row([metric.clone(), v.name.to_string(), d.to_string(), level.to_string(), n.to_string(), fmt(mean)])?;
                }
            }
            let title = format!("{metric}{}: mean score by quality level", if v.cal.is_some() { " (LGN)" } else { "" });
            let file = format!("chart.{metric}.{}.svg", v.name);
            charts.push((file.clone(), report::line_chart(&title, &curves)));

            metric_json[v.name] = json!({
                "correlations": reports.iter().map(|(subset, r)| {
                    let mut j = serde_json::to_value(r).expect("report serialises");
                    j["directions"] = json!(subset_label(subset));
                    j
                }).collect::<Vec<_>>(),
                "cv": cv_json,
                "chart": file,
            });
        }
        report_metrics.push(metric_json);
    }

    let mut ttest_json = Vec::new();
    let ttest_body = if calibration.is_some() {
        let mut t = stage.meta.tsv();
        t.meta("paired t-test over metrics: tau with LGN minus tau without");
        t.row(["granularity", "num_languages", "directions", "metrics", "mean_gain", "t", "df", "p_two_tailed"])?;
        for ((subset, gran), per_metric) in &taus {
            let (lgn, plain): (Vec<f64>, Vec<f64>) = per_metric.values().map(|m| (m["lgn"], m["plain"])).unzip();
            match paired_t_test(&lgn, &plain) {
                Ok(r) => {
                    let gains: Vec<f64> = lgn.iter().zip(&plain).map(|(a, b)| a - b).collect();
                    t.row([
                        gran.as_str().to_string(),
                        subset.len().to_string(),
                        subset_label(subset),
                        lgn.len().to_string(),
                        fmt(stats::mean(&gains)),
                        fmt(r.t),
                        r.df.to_string(),
                        format!("{:.6e}", r.p_two_tailed),
                    ])?;
                    ttest_json.push(json!({
                        "granularity": gran, "directions": subset_label(subset), "t": r.t, "df": r.df, "p_two_tailed": r.p_two_tailed
                    }));
                }
                Err(e @ Error::Domain(_)) => notes.push(format!("t-test {} {}: {e}", gran.as_str(), subset_label(subset))),
                Err(e) => return Err(e),
            }
        }
        Some(t.finish())
    } else {
        None
    };

    let report = json!({
        "meta": stage.meta.json(),
        "correlation": "kendall tau-b",
        "human_score": "signed: -(MQM deduction), 5 points per error",
        "metrics": report_metrics,
        "ttest": ttest_json,
        "notes": notes,
    });
    let mut outputs: Vec<(String, String)> = vec![
        (CORRELATION.into(), corr.finish()),
        (CV.into(), cv.finish()),
        (STABILITY.into(), stab.finish()),
        (LEVEL_MEANS.into(), level_means.finish()),
    ];
    if let Some(t) = ttest_body {
        outputs.push((TTEST.into(), t));
    }
    outputs.extend(charts);
    outputs.push((REPORT.into(), serde_json::to_string_pretty(&report)? + "\n"));
    for (name, body) in &outputs {
        stage.write(name, body)?;
    }
    for n in &notes {
        eprintln!("note: {n}");
    }
    eprintln!("analyze: wrote {} files to {}", outputs.len(), stage.dir.display());
    Ok(())
}

/// metric -> variant -> tau
type TausByMetric = BTreeMap<String, BTreeMap<&'static str, f64>>;
type Curves = BTreeMap<Direction, Vec<(u8, usize, f64)>>;

/// Mean (optionally normalised) score per direction and level over every
/// triplet in the matrix: `(level, count, mean)` per direction.
fn level_curves(
    matrix: &ScoreMatrix,
    metric: &str,
    cal: Option<&CalibrationSet>,
) -> Result<Curves> {
    let mut acc: BTreeMap<Direction, BTreeMap<u8, Vec<f64>>> = BTreeMap::new();
    for row in matrix.rows() {
        let mut v = matrix.require(&row.triplet_id, metric)?;
        if let Some(set) = cal {
            let st = set
                .get(&row.direction)
                .ok_or_else(|| Error::Calibration(format!("no LGN statistics for {metric} on {}", row.direction)))?;
            v = lgn_apply(v, st);
        }
        acc.entry(row.direction.clone()).or_default().entry(row.level).or_default().push(v);
    }
    Ok(acc
        .into_iter()
        .map(|(d, levels)| (d, levels.into_iter().map(|(l, v)| (l, v.len(), stats::mean(&v))).collect()))
        .collect())
}

pub fn prompts(ctx: &Ctx) -> Result<()> {
    let l = &ctx.loaded;
    let dir = l
        .config
        .templates
        .as_ref()
        .map(|t| l.resolve(t))
        .ok_or_else(|| Error::Config("`templates` is not set in the config".into()))?;
    let mut digest = InputDigest::new();
    for t in ErrorType::ALL {
        let p = dir.join(format!("{t}.txt"));
        if p.is_file() {
            digest.file(&format!("{t}.txt"), &p)?;
        }
    }
    for d in &l.config.directions {
        digest.file(&format!("{}.pairs", d.name), &l.resolve(&d.pairs))?;
    }
    let stage = ctx.stage("prompts", digest);
    let mut outputs = Vec::new();
    for d in &l.config.directions {
        let pairs = load_segment_pairs(&l.resolve(&d.pairs), &d.name)?;
        let mut body = serde_json::to_string(&json!({ "meta": stage.meta.json() }))? + "\n";
        for p in &pairs {
            for t in ErrorType::ALL {
                for half in [Half::First, Half::Second] {
                    let prompt = render_injection_prompt(p, t, half, &dir)?;
                    body.push_str(&serde_json::to_string(&json!({
                        "pair_id": p.pair_id, "error_type": t, "half": half.as_str(), "prompt": prompt
                    }))?);
                    body.push('\n');
                }
            }
        }
        outputs.push((format!("prompts.{}.jsonl", d.name), body));
    }
    for (name, body) in outputs {
        stage.write(&name, &body)?;
    }
    Ok(())
}

pub fn run_all(ctx: &Ctx) -> Result<()> {
    ingest(ctx)?;
    synth(ctx)?;
    assemble(ctx)?;
    score(ctx)?;
    if ctx.use_lgn {
        fit_lgn(ctx)?;
    }
    analyze(ctx)
}
