//! Run configuration: a TOML file plus command-line overrides.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use mtcal_core::assembly::SamplingPlan;
use mtcal_core::corpus::{Direction, FilterConfig};
use mtcal_core::metrics::{ChrfConfig, MetricKind, MetricSpec, Orientation};
use mtcal_core::synthesis::MAX_ERRORS;
use mtcal_core::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub templates: Option<PathBuf>,
    pub directions: Vec<DirectionConfig>,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub lgn: LgnConfig,
    #[serde(default)]
    pub metrics: Vec<MetricConfig>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectionConfig {
    pub name: Direction,
    pub pairs: PathBuf,
    pub candidates: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decisions: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub required_votes: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingConfig {
    pub n_per_direction: usize,
    /// Repeats for monolingual systems.
    pub repeats: usize,
    /// Repeats for the multilingual system suite.
    pub system_repeats: usize,
    pub with_replacement: bool,
    /// Target deductions (MQM points per segment) of the system suite.
    pub targets: Vec<f64>,
    /// Quality levels of the monolingual systems.
    pub levels: Vec<u8>,
    pub k_max: usize,
    pub required_votes: usize,
    /// Direction subsets for multilingual suites; empty means all directions.
    pub language_subsets: Vec<Vec<Direction>>,
    /// Repeat counts compared in the stability report.
    pub stability_repeats: Vec<usize>,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            n_per_direction: 102,
            repeats: 10,
            system_repeats: 100,
            with_replacement: false,
            targets: (0..10).map(|i| i as f64 * 2.5).collect(),
            levels: vec![1, 2, 3, 4, 5],
            k_max: MAX_ERRORS,
            required_votes: 2,
            language_subsets: Vec::new(),
            stability_repeats: vec![5, 10, 25],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LgnConfig {
    pub per_level_n: usize,
    pub repeats: usize,
    pub with_replacement: bool,
}

impl Default for LgnConfig {
    fn default() -> Self {
        Self { per_level_n: 102, repeats: 10, with_replacement: false }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CommandLine {
    Line(String),
    Argv(Vec<String>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<CommandLine>,
    #[serde(default = "default_orientation")]
    pub orientation: Orientation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub char_n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word_n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default = "yes")]
    pub needs_reference: bool,
    #[serde(default = "default_timeout")]
    pub timeout_s: f64,
}

fn default_orientation() -> Orientation {
    Orientation::HigherBetter
}

fn yes() -> bool {
    true
}

fn default_timeout() -> f64 {
    300.0
}

/// Command-line settings that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub n_per_direction: Option<usize>,
    pub with_replacement: bool,
    pub repeats: Option<Vec<usize>>,
    pub levels: Option<Vec<u8>>,
    pub k_max: Option<usize>,
    pub single_annotator: bool,
}

/// A loaded configuration with paths resolved against the config file.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: RunConfig,
    pub base: PathBuf,
    pub hash: String,
}

impl Loaded {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut config: RunConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        config.apply(overrides);
        config.validate()?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let hash = config.hash()?;
        let loaded = Self { config, base, hash };
        loaded.check_inputs()?;
        Ok(loaded)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.config.output_dir)
    }

    pub fn directions(&self) -> Vec<Direction> {
        self.config.directions.iter().map(|d| d.name.clone()).collect()
    }

    fn check_inputs(&self) -> Result<()> {
        for d in &self.config.directions {
            for (what, p) in [("pairs", Some(&d.pairs)), ("candidates", Some(&d.candidates)), ("decisions", d.decisions.as_ref())]
            {
                match p {
                    Some(p) if !self.resolve(p).is_file() => {
                        return Err(Error::Config(format!(
                            "{} {what} file {} does not exist",
                            d.name,
                            self.resolve(p).display()
                        )))
                    }
                    None => {
                        return Err(Error::Config(format!(
                            "{} has no decisions file but requires {} vote(s) per candidate",
                            d.name,
                            self.filter_config().required_for(&d.name)
                        )))
                    }
                    _ => {}
                }
            }
        }
        if let Some(t) = &self.config.templates {
            if !self.resolve(t).is_dir() {
                return Err(Error::Config(format!("template directory {} does not exist", self.resolve(t).display())));
            }
        }
        Ok(())
    }

    pub fn filter_config(&self) -> FilterConfig {
        let mut f = FilterConfig { required_votes: self.config.sampling.required_votes, ..Default::default() };
        for d in &self.config.directions {
            if let Some(v) = d.required_votes {
                f.per_direction.insert(d.name.clone(), v);
            }
        }
        f
    }

    pub fn sampling_plan(&self, directions: Vec<Direction>, repeats: usize) -> SamplingPlan {
        SamplingPlan {
            n_per_direction: self.config.sampling.n_per_direction,
            repeats,
            seed: self.config.seed,
            with_replacement: self.config.sampling.with_replacement,
            directions,
        }
    }

    /// Direction subsets for the multilingual suites, each sorted.
    pub fn language_subsets(&self) -> Vec<Vec<Direction>> {
        let subsets = &self.config.sampling.language_subsets;
        if subsets.is_empty() {
            let mut all = self.directions();
            all.sort();
            return vec![all];
        }
        subsets
            .iter()
            .map(|s| {
                let mut s = s.clone();
                s.sort();
                s
            })
            .collect()
    }

    /// Repeats of the monolingual suite: enough for every stability setting.
    pub fn mono_repeats(&self) -> usize {
        let s = &self.config.sampling;
        s.stability_repeats.iter().copied().chain([s.repeats]).max().unwrap_or(s.repeats)
    }

    pub fn metric_specs(&self) -> Result<Vec<MetricSpec>> {
        self.config.metrics.iter().map(|m| m.spec(&self.base)).collect()
    }
}

impl RunConfig {
    fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(n) = o.n_per_direction {
            self.sampling.n_per_direction = n;
        }
        if o.with_replacement {
            self.sampling.with_replacement = true;
            self.lgn.with_replacement = true;
        }
        if let Some(r) = &o.repeats {
            if let Some(&max) = r.iter().max() {
                self.sampling.repeats = max;
                self.sampling.stability_repeats = r.clone();
            }
        }
        if let Some(l) = &o.levels {
            self.sampling.levels = l.clone();
        }
        if let Some(k) = o.k_max {
            self.sampling.k_max = k;
        }
        if o.single_annotator {
            self.sampling.required_votes = 1;
            for d in &mut self.directions {
                d.required_votes = Some(1);
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Config(m));
        if self.directions.is_empty() {
            return cfg("config lists no directions".into());
        }
        let mut seen = BTreeSet::new();
        for d in &self.directions {
            if !seen.insert(&d.name) {
                return cfg(format!("direction {} listed twice", d.name));
            }
        }
        let s = &self.sampling;
        if s.n_per_direction == 0 || s.repeats == 0 || s.system_repeats == 0 {
            return cfg("n_per_direction, repeats and system_repeats must be at least 1".into());
        }
        if s.k_max > MAX_ERRORS {
            return cfg(format!("k_max {} exceeds {MAX_ERRORS}", s.k_max));
        }
        if let Some(l) = s.levels.iter().find(|&&l| l as usize > MAX_ERRORS) {
            return cfg(format!("level {l} outside 0..={MAX_ERRORS}"));
        }
        if s.stability_repeats.contains(&0) {
            return cfg("stability_repeats entries must be at least 1".into());
        }
        for subset in &s.language_subsets {
            if subset.is_empty() {
                return cfg("empty language subset".into());
            }
            if let Some(d) = subset.iter().find(|d| !seen.contains(d)) {
                return cfg(format!("language subset names unknown direction {d}"));
            }
        }
        if self.lgn.per_level_n == 0 || self.lgn.repeats == 0 {
            return cfg("lgn per_level_n and repeats must be at least 1".into());
        }
        let mut names = BTreeSet::new();
        for m in &self.metrics {
            if !names.insert(&m.name) {
                return cfg(format!("metric `{}` defined twice", m.name));
            }
            m.spec(Path::new(""))?;
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON form, ignoring where outputs go.
    fn hash(&self) -> Result<String> {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let json = serde_json::to_string(&c)?;
        Ok(hex::encode(Sha256::digest(json.as_bytes())))
    }
}

impl MetricConfig {
    pub fn spec(&self, base: &Path) -> Result<MetricSpec> {
        let bad = |m: &str| Error::Config(format!("metric `{}`: {m}", self.name));
        let spec = match (&self.builtin, &self.command) {
            (Some(b), None) if b == "chrf" => {
                let d = ChrfConfig::default();
                let cfg = ChrfConfig {
                    char_n: self.char_n.unwrap_or(d.char_n),
                    word_n: self.word_n.unwrap_or(d.word_n),
                    beta: self.beta.unwrap_or(d.beta),
                };
                MetricSpec { orientation: self.orientation, needs_reference: true, ..MetricSpec::chrf(&self.name, cfg) }
            }
            (Some(b), None) => return Err(bad(&format!("unknown builtin `{b}`"))),
            (None, Some(cmd)) => {
                if self.char_n.is_some() || self.word_n.is_some() || self.beta.is_some() {
                    return Err(bad("char_n/word_n/beta apply only to builtin metrics"));
                }
                let mut argv = match cmd {
                    CommandLine::Line(s) => s.split_whitespace().map(str::to_string).collect(),
                    CommandLine::Argv(v) => v.clone(),
                };
                if argv.is_empty() {
                    return Err(bad("empty command"));
                }
                // Relative program paths are taken from the config directory.
                if argv[0].contains('/') && Path::new(&argv[0]).is_relative() {
                    argv[0] = base.join(&argv[0]).display().to_string();
                }
                MetricSpec {
                    name: self.name.clone(),
                    orientation: self.orientation,
                    kind: MetricKind::External { command: argv, timeout_s: self.timeout_s },
                    needs_reference: self.needs_reference,
                }
            }
            (Some(_), Some(_)) => return Err(bad("set either `builtin` or `command`, not both")),
            (None, None) => return Err(bad("needs `builtin` or `command`")),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 7
[[directions]]
name = "en-de"
pairs = "p.tsv"
candidates = "c.tsv"
decisions = "d.tsv"

[[metrics]]
name = "chrf"
builtin = "chrf"
word_n = 0

[[metrics]]
name = "ext"
command = "scorer --fast"
orientation = "lower"
needs_reference = false
"#;

    #[test]
    fn parses_and_hashes() {
        let mut c: RunConfig = toml::from_str(MINIMAL).unwrap();
        c.validate().unwrap();
        assert_eq!(c.sampling.n_per_direction, 102);
        assert_eq!(c.sampling.targets.len(), 10);
        let h1 = c.hash().unwrap();
        c.output_dir = "elsewhere".into();
        assert_eq!(c.hash().unwrap(), h1);
        c.apply(&Overrides { seed: Some(8), ..Default::default() });
        assert_ne!(c.hash().unwrap(), h1);

        let specs: Vec<MetricSpec> = c.metrics.iter().map(|m| m.spec(Path::new("/cfg")).unwrap()).collect();
        assert_eq!(specs[1].orientation, Orientation::LowerBetter);
        assert!(!specs[1].needs_reference);
        assert!(matches!(&specs[1].kind, MetricKind::External { command, .. } if command == &["scorer", "--fast"]));
    }

    #[test]
    fn overrides() {
        let mut c: RunConfig = toml::from_str(MINIMAL).unwrap();
        c.apply(&Overrides { repeats: Some(vec![5, 25, 10]), single_annotator: true, ..Default::default() });
        assert_eq!(c.sampling.repeats, 25);
        assert_eq!(c.sampling.stability_repeats, [5, 25, 10]);
        assert_eq!(c.directions[0].required_votes, Some(1));
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = MINIMAL.replace("word_n = 0", "command = \"x\"");
        let c: RunConfig = toml::from_str(&bad).unwrap();
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        assert!(toml::from_str::<RunConfig>(&MINIMAL.replace("seed = 7", "seed = 7\nbogus = 1")).is_err());
        let mut c: RunConfig = toml::from_str(MINIMAL).unwrap();
        c.sampling.k_max = 6;
        assert!(c.validate().is_err());
    }
}
