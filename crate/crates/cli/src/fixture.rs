//! Self-contained synthetic corpus plus a config that runs the whole
//! pipeline on it with builtin metrics only.

use std::path::Path;

use mtcal_core::corpus::synthetic::{generate, SyntheticConfig};
use mtcal_core::corpus::Direction;
use mtcal_core::Result;

use crate::output::write_atomic;

pub const DIRECTIONS: [&str; 2] = ["en-xa", "en-xb"];

const TEMPLATES: [(&str, &str); 4] = [
    ("addition.txt", include_str!("../../../templates/addition.txt")),
    ("omission.txt", include_str!("../../../templates/omission.txt")),
    ("mistranslation.txt", include_str!("../../../templates/mistranslation.txt")),
    ("untranslated.txt", include_str!("../../../templates/untranslated.txt")),
];

#[derive(Debug, Clone)]
pub struct FixtureOptions {
    pub pairs: usize,
    pub seed: u64,
    pub malformed_rate: f64,
}

impl Default for FixtureOptions {
    fn default() -> Self {
        Self { pairs: 60, seed: 2024, malformed_rate: 0.02 }
    }
}

/// Writes `data/`, `templates/` and `mtcal.toml` under `dir`.
pub fn write_fixture(dir: &Path, opts: &FixtureOptions) -> Result<()> {
    let data = dir.join("data");
    let cfg = SyntheticConfig { n_pairs: opts.pairs, seed: opts.seed, malformed_rate: opts.malformed_rate, ..Default::default() };
    let mut direction_tables = String::new();
    for name in DIRECTIONS {
        let d: Direction = name.parse()?;
        let synth = generate(&d, &cfg)?;
        write_atomic(&data.join(format!("{d}.pairs.tsv")), synth.pairs_tsv()?.as_bytes())?;
        write_atomic(&data.join(format!("{d}.candidates.tsv")), synth.candidates_tsv()?.as_bytes())?;
        write_atomic(&data.join(format!("{d}.decisions.tsv")), synth.decisions_tsv()?.as_bytes())?;
        direction_tables.push_str(&format!(
            "[[directions]]\nname = \"{d}\"\npairs = \"data/{d}.pairs.tsv\"\ncandidates = \"data/{d}.candidates.tsv\"\ndecisions = \"data/{d}.decisions.tsv\"\n\n"
        ));
    }
    for (name, body) in TEMPLATES {
        write_atomic(&dir.join("templates").join(name), body.as_bytes())?;
    }
    // Level 0 holds one triplet per pair, which caps every per-level draw.
    let n = (opts.pairs * 2 / 3).max(1);
    let config = format!(
        r#"seed = {seed}
output_dir = "out"
templates = "templates"

{direction_tables}[sampling]
n_per_direction = {n}
repeats = 10
system_repeats = 10
stability_repeats = [5, 10]
levels = [1, 2, 3, 4, 5]

[lgn]
per_level_n = {n}
repeats = 5

[[metrics]]
name = "chrf"
builtin = "chrf"
word_n = 0

[[metrics]]
name = "chrfpp"
builtin = "chrf"
word_n = 2

[[metrics]]
name = "chrf_b1"
builtin = "chrf"
word_n = 0
beta = 1.0
"#,
        seed = opts.seed,
    );
    write_atomic(&dir.join("mtcal.toml"), config.as_bytes())
}
