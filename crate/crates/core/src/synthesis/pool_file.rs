use std::collections::BTreeMap;
use std::path::Path;

use super::{apply_edits, PseudoTranslation, Triplet, TripletPool};
use crate::corpus::{Direction, Edit};
use crate::error::{Error, Result};
use crate::tsv::{self, TsvBuilder};

pub const POOL_HEADER: [&str; 8] =
    ["triplet_id", "pair_id", "direction", "level", "source", "translation", "reference", "edits"];

fn escape(s: &str, out: &mut String) {
    for ch in s.chars() {
        match ch {
            '%' => out.push_str("%25"),
            ':' => out.push_str("%3A"),
            ';' => out.push_str("%3B"),
            '\t' => out.push_str("%09"),
            '\n' => out.push_str("%0A"),
            c => out.push(c),
        }
    }
}

fn unescape(s: &str) -> Option<String> {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            let hex = s.get(i + 1..i + 3)?;
            out.push(u8::from_str_radix(hex, 16).ok()?);
            i += 3;
        } else {
            out.push(bytes[i]);
            i += 1;
        }
    }
    String::from_utf8(out).ok()
}

/// `start:end:replacement` items joined by `;`, replacement percent-escaped.
pub fn encode_edits(edits: &[Edit]) -> String {
    let mut out = String::new();
    for (i, e) in edits.iter().enumerate() {
        if i > 0 {
            out.push(';');
        }
        out.push_str(&format!("{}:{}:", e.start(), e.end()));
        escape(e.replacement(), &mut out);
    }
    out
}

pub fn decode_edits(s: &str) -> Option<Vec<Edit>> {
    if s.is_empty() {
        return Some(Vec::new());
    }
    s.split(';')
        .map(|item| {
            let mut parts = item.splitn(3, ':');
            let start = parts.next()?.parse().ok()?;
            let end = parts.next()?.parse().ok()?;
            let rep = unescape(parts.next()?)?;
            Edit::new(start, end, rep).ok()
        })
        .collect()
}

pub fn write_pool<'a>(out: &mut TsvBuilder, pools: impl IntoIterator<Item = &'a TripletPool>) -> Result<()> {
    out.row(POOL_HEADER)?;
    for pool in pools {
        let dir = pool.direction.to_string();
        for t in &pool.triplets {
            out.row([
                t.triplet_id.as_str(),
                t.translation.pair_id.as_str(),
                dir.as_str(),
                &t.level().to_string(),
                t.source.as_str(),
                t.translation.text.as_str(),
                t.reference.as_str(),
                &encode_edits(&t.translation.edits),
            ])?;
        }
    }
    Ok(())
}

/// Reads a pool file back into per-direction pools, re-checking that every
/// translation is its reference with the listed edits applied.
pub fn read_pool(path: &Path) -> Result<BTreeMap<Direction, TripletPool>> {
    let table = tsv::read_table(path, &POOL_HEADER, false, POOL_HEADER.len())?;
    let name = path.display().to_string();
    let mut grouped: BTreeMap<Direction, Vec<Triplet>> = BTreeMap::new();
    let mut seen = std::collections::HashSet::new();
    for row in &table.rows {
        let bad = |m: String| Error::parse(&name, row.line, m);
        let direction: Direction = row.get(2).parse().map_err(|e: Error| bad(e.to_string()))?;
        let level: usize = row.get(3).parse().map_err(|_| bad(format!("bad level `{}`", row.get(3))))?;
        let edits = decode_edits(row.get(7)).ok_or_else(|| bad(format!("bad edits `{}`", row.get(7))))?;
        if edits.len() != level || level > super::MAX_ERRORS {
            return Err(bad(format!("level {level} does not match {} edits", edits.len())));
        }
        let reference = row.get(6).to_string();
        let text = apply_edits(&reference, &edits).map_err(|e| bad(e.to_string()))?;
        if text != row.get(5) {
            return Err(Error::Integrity(format!(
                "{name}:{}: translation differs from the reference with its edits applied",
                row.line
            )));
        }
        if !seen.insert(row.get(0).to_string()) {
            return Err(Error::Integrity(format!("duplicate triplet id `{}` in {name}", row.get(0))));
        }
        grouped.entry(direction.clone()).or_default().push(Triplet {
            triplet_id: row.get(0).to_string(),
            source: row.get(4).to_string(),
            reference,
            translation: PseudoTranslation {
                pair_id: row.get(1).to_string(),
                direction,
                edits,
                text,
                candidate_ids: Vec::new(),
            },
        });
    }
    grouped.into_iter().map(|(d, ts)| Ok((d.clone(), TripletPool::from_triplets(d, ts)?))).collect()
}
