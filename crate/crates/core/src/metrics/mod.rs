//! Metric scoring: builtin chrF plus external scorers over a line protocol.

pub mod chrf;
pub mod external;
pub mod mock;

use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Direction;
use crate::error::{Error, Result};
use crate::synthesis::Triplet;
use crate::tsv::{self, TsvBuilder};

pub use chrf::{chrf_score, ChrfConfig};
pub use external::run_external_scorer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    #[serde(rename = "higher")]
    HigherBetter,
    #[serde(rename = "lower")]
    LowerBetter,
}

impl Orientation {
    pub fn orient(self, raw: f64) -> f64 {
        match self {
            Orientation::HigherBetter => raw,
            Orientation::LowerBetter => -raw,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::HigherBetter => "higher",
            Orientation::LowerBetter => "lower",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricKind {
    Builtin(ChrfConfig),
    External { command: Vec<String>, timeout_s: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpec {
    pub name: String,
    pub orientation: Orientation,
    pub kind: MetricKind,
    pub needs_reference: bool,
}

impl MetricSpec {
    pub fn chrf(name: &str, config: ChrfConfig) -> Self {
        Self {
            name: name.to_string(),
            orientation: Orientation::HigherBetter,
            kind: MetricKind::Builtin(config),
            needs_reference: true,
        }
    }

    pub fn external(name: &str, command: Vec<String>, timeout_s: f64, orientation: Orientation) -> Self {
        Self {
            name: name.to_string(),
            orientation,
            kind: MetricKind::External { command, timeout_s },
            needs_reference: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['\t', '\n']) {
            return Err(Error::Config(format!("invalid metric name {:?}", self.name)));
        }
        match &self.kind {
            MetricKind::Builtin(cfg) => cfg.validate(),
            MetricKind::External { command, timeout_s } => {
                if command.is_empty() || command[0].is_empty() {
                    return Err(Error::Config(format!("metric `{}` has an empty command", self.name)));
                }
                if timeout_s.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) || !timeout_s.is_finite() {
                    return Err(Error::Config(format!("metric `{}` needs a positive timeout", self.name)));
                }
                Ok(())
            }
        }
    }

    /// Human-readable description of the effective configuration.
    pub fn describe(&self) -> String {
        match &self.kind {
            MetricKind::Builtin(cfg) => format!("{} [{}; {}]", self.name, cfg.label(), self.orientation.as_str()),
            MetricKind::External { command, .. } => {
                format!("{} [external `{}`; {}]", self.name, command.join(" "), self.orientation.as_str())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord {
    pub triplet_id: String,
    pub metric: String,
    pub raw_score: f64,
    /// `raw_score`, negated for lower-is-better metrics.
    pub oriented_score: f64,
}

impl ScoreRecord {
    pub fn new(triplet_id: &str, spec: &MetricSpec, raw_score: f64) -> Self {
        Self {
            triplet_id: triplet_id.to_string(),
            metric: spec.name.clone(),
            raw_score,
            oriented_score: spec.orientation.orient(raw_score),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowMeta {
    pub triplet_id: String,
    pub direction: Direction,
    pub level: u8,
}

/// Oriented scores, one row per triplet and one column per metric. Missing
/// entries are `None` and written as `NA`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    rows: Vec<RowMeta>,
    metrics: Vec<String>,
    /// Column-major: `values[metric][row]`.
    values: Vec<Vec<Option<f64>>>,
    index: HashMap<String, usize>,
}

pub const MATRIX_FIXED_COLUMNS: [&str; 3] = ["triplet_id", "direction", "level"];

impl ScoreMatrix {
    pub fn new(rows: Vec<RowMeta>, metrics: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(rows.len());
        for (i, r) in rows.iter().enumerate() {
            if index.insert(r.triplet_id.clone(), i).is_some() {
                return Err(Error::Integrity(format!("duplicate matrix row `{}`", r.triplet_id)));
            }
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(m) = metrics.iter().find(|m| !seen.insert(m.as_str())) {
            return Err(Error::Config(format!("duplicate metric name `{m}`")));
        }
        let values = vec![vec![None; rows.len()]; metrics.len()];
        Ok(Self { rows, metrics, values, index })
    }

    pub fn from_triplets(triplets: &[Triplet], metrics: Vec<String>) -> Result<Self> {
        let rows = triplets
            .iter()
            .map(|t| RowMeta { triplet_id: t.triplet_id.clone(), direction: t.direction().clone(), level: t.level() })
            .collect();
        Self::new(rows, metrics)
    }

    pub fn rows(&self) -> &[RowMeta] {
        &self.rows
    }

    pub fn metrics(&self) -> &[String] {
        &self.metrics
    }

    pub fn metric_index(&self, metric: &str) -> Option<usize> {
        self.metrics.iter().position(|m| m == metric)
    }

    pub fn row_index(&self, triplet_id: &str) -> Option<usize> {
        self.index.get(triplet_id).copied()
    }

    pub fn row(&self, triplet_id: &str) -> Option<&RowMeta> {
        self.row_index(triplet_id).map(|i| &self.rows[i])
    }

    pub fn get(&self, triplet_id: &str, metric: &str) -> Option<f64> {
        self.values[self.metric_index(metric)?][self.row_index(triplet_id)?]
    }

    /// Like [`get`](Self::get) but a missing entry is a coverage error.
    pub fn require(&self, triplet_id: &str, metric: &str) -> Result<f64> {
        self.get(triplet_id, metric)
            .ok_or_else(|| Error::Coverage { triplet_id: triplet_id.to_string(), metric: metric.to_string() })
    }

    pub fn set(&mut self, triplet_id: &str, metric: &str, oriented: f64) -> Result<()> {
        let m = self.metric_index(metric).ok_or_else(|| Error::Config(format!("unknown metric `{metric}`")))?;
        let r = self
            .row_index(triplet_id)
            .ok_or_else(|| Error::Integrity(format!("unknown triplet `{triplet_id}`")))?;
        self.values[m][r] = Some(oriented);
        Ok(())
    }

    pub fn column(&self, metric: &str) -> Option<&[Option<f64>]> {
        Some(&self.values[self.metric_index(metric)?])
    }

    pub fn missing(&self, metric: &str) -> Vec<&str> {
        match self.metric_index(metric) {
            Some(m) => self.values[m]
                .iter()
                .zip(&self.rows)
                .filter(|(v, _)| v.is_none())
                .map(|(_, r)| r.triplet_id.as_str())
                .collect(),
            None => self.rows.iter().map(|r| r.triplet_id.as_str()).collect(),
        }
    }

    pub fn write(&self, out: &mut TsvBuilder) -> Result<()> {
        let mut header: Vec<&str> = MATRIX_FIXED_COLUMNS.to_vec();
        header.extend(self.metrics.iter().map(String::as_str));
        out.row(header)?;
        for (i, r) in self.rows.iter().enumerate() {
            let mut fields = vec![r.triplet_id.clone(), r.direction.to_string(), r.level.to_string()];
            fields.extend(self.values.iter().map(|col| match col[i] {
                Some(v) => v.to_string(),
                None => "NA".to_string(),
            }));
            out.row(fields)?;
        }
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let table = tsv::read_table(path, &MATRIX_FIXED_COLUMNS, true, 0)?;
        let name = path.display().to_string();
        let metrics: Vec<String> = table.header[MATRIX_FIXED_COLUMNS.len()..].to_vec();
        let width = table.header.len();
        let mut rows = Vec::with_capacity(table.rows.len());
        let mut cells = Vec::with_capacity(table.rows.len());
        for row in &table.rows {
            if row.fields.len() != width {
                return Err(Error::parse(&name, row.line, format!("expected {width} columns, found {}", row.fields.len())));
            }
            let direction = row.get(1).parse().map_err(|e: Error| Error::parse(&name, row.line, e.to_string()))?;
            let level = row.get(2).parse().map_err(|_| Error::parse(&name, row.line, "bad level"))?;
            rows.push(RowMeta { triplet_id: row.get(0).to_string(), direction, level });
            let vals = row.fields[MATRIX_FIXED_COLUMNS.len()..]
                .iter()
                .map(|f| match f.as_str() {
                    "NA" => Ok(None),
                    v => v
                        .parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .map(Some)
                        .ok_or_else(|| Error::parse(&name, row.line, format!("bad score `{v}`"))),
                })
                .collect::<Result<Vec<_>>>()?;
            cells.push(vals);
        }
        let mut m = Self::new(rows, metrics)?;
        for (r, vals) in cells.into_iter().enumerate() {
            for (c, v) in vals.into_iter().enumerate() {
                m.values[c][r] = v;
            }
        }
        Ok(m)
    }
}

/// A metric that could not score every triplet.
#[derive(Debug)]
pub struct MetricFailure {
    pub metric: String,
    pub error: Error,
    pub missing: Vec<String>,
}

#[derive(Debug)]
pub struct ScoreOutcome {
    pub matrix: ScoreMatrix,
    /// Metric-major, triplet order within each metric.
    pub records: Vec<ScoreRecord>,
    pub failures: Vec<MetricFailure>,
}

impl ScoreOutcome {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Scores every triplet with every metric. Builtin metrics run in-process (in
/// parallel, order-stable); each external metric gets one child process. A
/// failing metric leaves its column empty and is listed in `failures`.
pub fn score_pool(specs: &[MetricSpec], triplets: &[Triplet]) -> Result<ScoreOutcome> {
    if specs.is_empty() {
        return Err(Error::Config("no metrics configured".into()));
    }
    for s in specs {
        s.validate()?;
    }
    let mut matrix = ScoreMatrix::from_triplets(triplets, specs.iter().map(|s| s.name.clone()).collect())?;
    let mut records = Vec::with_capacity(specs.len() * triplets.len());
    let mut failures = Vec::new();
    for spec in specs {
        let result = match &spec.kind {
            MetricKind::Builtin(cfg) => Ok(triplets
                .par_iter()
                .map(|t| ScoreRecord::new(&t.triplet_id, spec, chrf_score(&t.translation.text, &t.reference, cfg)))
                .collect::<Vec<_>>()),
            MetricKind::External { .. } if triplets.is_empty() => Ok(Vec::new()),
            MetricKind::External { .. } => run_external_scorer(spec, triplets),
        };
        match result {
            Ok(recs) => {
                for r in &recs {
                    matrix.set(&r.triplet_id, &spec.name, r.oriented_score)?;
                }
                records.extend(recs);
            }
            Err(error) => failures.push(MetricFailure {
                metric: spec.name.clone(),
                error,
                missing: triplets.iter().map(|t| t.triplet_id.clone()).collect(),
            }),
        }
    }
    Ok(ScoreOutcome { matrix, records, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Edit;
    use crate::synthesis::PseudoTranslation;

    fn triplet(id: &str, reference: &str, edits: Vec<Edit>) -> Triplet {
        let text = crate::synthesis::apply_edits(reference, &edits).unwrap();
        Triplet {
            triplet_id: id.into(),
            source: "src".into(),
            reference: reference.into(),
            translation: PseudoTranslation {
                pair_id: "p".into(),
                direction: "en-de".parse().unwrap(),
                edits,
                text,
                candidate_ids: vec![],
            },
        }
    }

    #[test]
    fn orientation_rule() {
        let spec = MetricSpec::external("mx", vec!["x".into()], 1.0, Orientation::LowerBetter);
        let r = ScoreRecord::new("t", &spec, 3.0);
        assert_eq!(r.oriented_score, -3.0);
        let spec = MetricSpec::chrf("c", ChrfConfig::default());
        assert_eq!(ScoreRecord::new("t", &spec, 3.0).oriented_score, 3.0);
    }

    #[test]
    fn builtin_pool_scoring() {
        let ts = vec![
            triplet("a", "das ist gut", vec![]),
            triplet("b", "das ist gut", vec![Edit::new(4, 7, "war").unwrap()]),
            triplet("c", "ja", vec![Edit::new(0, 2, "nein").unwrap()]),
        ];
        let specs = [MetricSpec::chrf("chrF", ChrfConfig::CHRF)];
        let out = score_pool(&specs, &ts).unwrap();
        assert_eq!(out.records.len(), 3);
        assert_eq!(out.matrix.get("a", "chrF"), Some(100.0));
        assert!(out.matrix.get("b", "chrF").unwrap() < 100.0);

        let specs = [MetricSpec::chrf("chrF", ChrfConfig::CHRF), MetricSpec::chrf("chrF++", ChrfConfig::default())];
        let out = score_pool(&specs, &ts[..2]).unwrap();
        let order: Vec<(&str, &str)> =
            out.records.iter().map(|r| (r.metric.as_str(), r.triplet_id.as_str())).collect();
        assert_eq!(order, [("chrF", "a"), ("chrF", "b"), ("chrF++", "a"), ("chrF++", "b")]);
        assert!(matches!(score_pool(&[], &ts), Err(Error::Config(_))));
    }

    #[test]
    fn failing_external_metric_is_listed() {
        let ts = vec![triplet("a", "x", vec![])];
        let specs = [
            MetricSpec::chrf("chrF", ChrfConfig::CHRF),
            MetricSpec::external("broken", vec!["/nonexistent/scorer".into()], 5.0, Orientation::HigherBetter),
        ];
        let out = score_pool(&specs, &ts).unwrap();
        assert!(!out.is_complete());
        assert_eq!(out.failures[0].metric, "broken");
        assert_eq!(out.failures[0].missing, ["a"]);
        assert_eq!(out.matrix.get("a", "broken"), None);
        assert_eq!(out.matrix.missing("broken"), ["a"]);
        assert_eq!(out.records.len(), 1);
    }

    #[test]
    fn matrix_tsv_round_trip() {
        let ts = vec![triplet("a", "x y", vec![]), triplet("b", "x y", vec![Edit::new(0, 1, "z").unwrap()])];
        let mut m = ScoreMatrix::from_triplets(&ts, vec!["m1".into(), "m2".into()]).unwrap();
        m.set("a", "m1", 0.1 + 0.2).unwrap();
        m.set("b", "m2", -3.5).unwrap();
        let mut b = TsvBuilder::new();
        b.meta("test");
        m.write(&mut b).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(f.path(), b.finish()).unwrap();
        let back = ScoreMatrix::read(f.path()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.get("a", "m2"), None);
        assert!(matches!(back.require("a", "m2"), Err(Error::Coverage { .. })));
        assert_eq!(back.row("b").unwrap().level, 1);
    }
}
