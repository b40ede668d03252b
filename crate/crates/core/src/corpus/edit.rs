use crate::error::{Error, Result};

pub const TAG_OPEN: &str = "<v>";
pub const TAG_CLOSE: &str = "</v>";

/// A single replacement against a base text.
///
/// Offsets count Unicode scalar values (code points), never bytes. The
/// replaced range is `[start, end)`; an empty range is a pure insertion and
/// an empty replacement a pure deletion. A no-op cannot be constructed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edit {
    start: usize,
    end: usize,
    replacement: String,
}

impl Edit {
    pub fn new(start: usize, end: usize, replacement: impl Into<String>) -> Result<Self> {
        let replacement = replacement.into();
        if end < start {
            return Err(Error::Bounds { start, end, len: end });
        }
        if start == end && replacement.is_empty() {
            return Err(Error::Domain(format!("no-op edit at offset {start}")));
        }
        Ok(Self { start, end, replacement })
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn replacement(&self) -> &str {
        &self.replacement
    }

    pub fn is_insertion(&self) -> bool {
        self.start == self.end
    }

    pub fn is_deletion(&self) -> bool {
        self.replacement.is_empty()
    }
}

/// Result of stripping the single `<v>…</v>` marker pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedText {
    pub detagged: String,
    /// Code-point offset of the enclosed region in `detagged`.
    pub open: usize,
    /// Code-point offset one past the enclosed region.
    pub close: usize,
}

pub fn parse_tagged(tagged_text: &str) -> Result<TaggedText> {
    let openers: Vec<usize> = tagged_text.match_indices(TAG_OPEN).map(|(i, _)| i).collect();
    let closers: Vec<usize> = tagged_text.match_indices(TAG_CLOSE).map(|(i, _)| i).collect();
    if openers.len() != 1 || closers.len() != 1 {
        return Err(Error::TagFormat(format!(
            "expected exactly one {TAG_OPEN}…{TAG_CLOSE} pair, found {} opener(s) and {} closer(s)",
            openers.len(),
            closers.len()
        )));
    }
    let (o, c) = (openers[0], closers[0]);
    if c < o + TAG_OPEN.len() {
        return Err(Error::TagFormat(format!("{TAG_CLOSE} precedes {TAG_OPEN}")));
    }
    let before = &tagged_text[..o];
    let inner = &tagged_text[o + TAG_OPEN.len()..c];
    let after = &tagged_text[c + TAG_CLOSE.len()..];
    let open = before.chars().count();
    let close = open + inner.chars().count();
    let mut detagged = String::with_capacity(tagged_text.len());
    detagged.push_str(before);
    detagged.push_str(inner);
    detagged.push_str(after);
    Ok(TaggedText { detagged, open, close })
}

/// Recovers the edit that turns `base` into `candidate`, confined to the
/// tagged region `[tag_open, tag_close)` of the candidate.
///
/// Text outside the tag must match the base exactly. Inside it, the common
/// prefix is grown first and the common suffix second, so the result is the
/// minimal edit and is unique even with repeated substrings.
pub fn derive_edit(base: &str, candidate: &str, tag_open: usize, tag_close: usize) -> Result<Edit> {
    let b: Vec<char> = base.chars().collect();
    let c: Vec<char> = candidate.chars().collect();
    if tag_open > tag_close || tag_close > c.len() {
        return Err(Error::Alignment(format!(
            "tag region [{tag_open}, {tag_close}) does not fit a candidate of length {}",
            c.len()
        )));
    }
    let lcp = b.iter().zip(&c).take_while(|(x, y)| x == y).count();
    if lcp < tag_open {
        return Err(Error::Alignment(format!(
            "candidate differs from the reference at offset {lcp}, before the tagged region [{tag_open}, {tag_close})"
        )));
    }
    let lcs = b.iter().rev().zip(c.iter().rev()).take_while(|(x, y)| x == y).count();
    let tail = c.len() - tag_close;
    if lcs < tail || tag_open + tail > b.len() {
        return Err(Error::Alignment(format!(
            "candidate differs from the reference after the tagged region [{tag_open}, {tag_close})"
        )));
    }
    let prefix = lcp.min(tag_close).min(b.len() - tail);
    let suffix = lcs.min(c.len() - prefix).min(b.len() - prefix);
    let end = b.len() - suffix;
    let replacement: String = c[prefix..c.len() - suffix].iter().collect();
    if prefix == end && replacement.is_empty() {
        return Err(Error::Alignment("candidate is identical to the reference".into()));
    }
    Edit::new(prefix, end, replacement)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthesis::apply_edits;

    #[test]
    fn parse_examples() {
        let t = parse_tagged("ab<v>XY</v>cd").unwrap();
        assert_eq!((t.detagged.as_str(), t.open, t.close), ("abXYcd", 2, 4));
        let t = parse_tagged("ab<v></v>cd").unwrap();
        assert_eq!((t.detagged.as_str(), t.open, t.close), ("abcd", 2, 2));
    }

    #[test]
    fn parse_rejects_malformed() {
        for bad in ["ab<v>X<v>Y</v>", "abc", "a</v>b<v>c", "<v>a</v><v>b</v>", "a<v>b", "a</v>b"] {
            assert!(matches!(parse_tagged(bad), Err(Error::TagFormat(_))), "{bad}");
        }
    }

    #[test]
    fn parse_counts_code_points() {
        let t = parse_tagged("訴訟に<v>食料</v>が").unwrap();
        assert_eq!((t.open, t.close), (3, 5));
        assert_eq!(t.detagged, "訴訟に食料が");
    }

    #[test]
    fn derive_insertion() {
        let e = derive_edit("the cat sat", "the big cat sat", 4, 8).unwrap();
        assert_eq!(e, Edit::new(4, 4, "big ").unwrap());
        assert_eq!(apply_edits("the cat sat", &[e]).unwrap(), "the big cat sat");
    }

    #[test]
    fn derive_deletion() {
        let e = derive_edit("the cat sat", "the sat", 4, 4).unwrap();
        assert_eq!(e, Edit::new(4, 8, "").unwrap());
        assert_eq!(apply_edits("the cat sat", &[e]).unwrap(), "the sat");
    }

    #[test]
    fn derive_rejects_change_outside_tag() {
        assert!(matches!(derive_edit("abc", "xbz", 0, 1), Err(Error::Alignment(_))));
        assert!(matches!(derive_edit("abc", "xbc", 1, 2), Err(Error::Alignment(_))));
    }

    #[test]
    fn derive_rejects_identity() {
        assert!(matches!(derive_edit("abc", "abc", 1, 2), Err(Error::Alignment(_))));
    }

    #[test]
    fn derive_respects_tag_with_repeats() {
        // Prefix-first alignment alone would place the insertion at the end.
        let e = derive_edit("a a", "a a a", 0, 2).unwrap();
        assert_eq!(e, Edit::new(0, 0, "a ").unwrap());
        let e = derive_edit("a a", "a a a", 2, 4).unwrap();
        assert_eq!(e, Edit::new(2, 2, "a ").unwrap());
    }

    #[test]
    fn derive_trims_inside_tag() {
        let e = derive_edit("the cats", "the cots", 4, 8).unwrap();
        assert_eq!(e, Edit::new(5, 6, "o").unwrap());
    }

    #[test]
    fn no_op_edit_is_rejected() {
        assert!(Edit::new(3, 3, "").is_err());
        assert!(Edit::new(4, 3, "x").is_err());
    }
}
