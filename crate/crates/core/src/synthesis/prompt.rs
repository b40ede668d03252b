use std::path::Path;

use crate::corpus::{ErrorType, Half, SegmentPair};
use crate::error::{Error, Result};

/// Substitutes `{name}` placeholders from `vars`. `{{` and `}}` produce
/// literal braces; any other placeholder is an error.
pub fn render_template(template_name: &str, template: &str, vars: &[(&str, &str)]) -> Result<String> {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(i) = rest.find(['{', '}']) {
        out.push_str(&rest[..i]);
        let tail = &rest[i..];
        if let Some(after) = tail.strip_prefix("{{") {
            out.push('{');
            rest = after;
        } else if let Some(after) = tail.strip_prefix("}}") {
            out.push('}');
            rest = after;
        } else if tail.starts_with('}') {
            return Err(Error::Template { template: template_name.into(), placeholder: "}".into() });
        } else {
            let close = tail.find('}').ok_or_else(|| Error::Template {
                template: template_name.into(),
                placeholder: tail.chars().take(20).collect(),
            })?;
            let key = &tail[1..close];
            let value = vars.iter().find(|(k, _)| *k == key).map(|(_, v)| *v).ok_or_else(|| Error::Template {
                template: template_name.into(),
                placeholder: key.into(),
            })?;
            out.push_str(value);
            rest = &tail[close + 1..];
        }
    }
    out.push_str(rest);
    Ok(out)
}

/// Renders `{template_dir}/{error_type}.txt` for one pair. No model is called.
pub fn render_injection_prompt(
    pair: &SegmentPair,
    error_type: ErrorType,
    half: Half,
    template_dir: &Path,
) -> Result<String> {
    let path = template_dir.join(format!("{error_type}.txt"));
    let template = std::fs::read_to_string(&path)
        .map_err(|e| Error::Config(format!("prompt template {} unavailable: {e}", path.display())))?;
    render_template(
        &path.display().to_string(),
        &template,
        &[("src", &pair.source), ("ref", &pair.reference), ("half", half.as_str())],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> SegmentPair {
        SegmentPair {
            pair_id: "1".into(),
            direction: "en-ja".parse().unwrap(),
            source: "The lawsuit said {x}".into(),
            reference: "訴訟によれば".into(),
        }
    }

    #[test]
    fn substitutes_placeholders() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("addition.txt"), "Source: {src}\nRef: {ref}\nHalf: {half} {{json}}").unwrap();
        let out = render_injection_prompt(&pair(), ErrorType::Addition, Half::Second, dir.path()).unwrap();
        // Placeholder-looking text inside values is left alone.
        assert_eq!(out, "Source: The lawsuit said {x}\nRef: 訴訟によれば\nHalf: second {json}");
    }

    #[test]
    fn missing_template_is_configuration_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            render_injection_prompt(&pair(), ErrorType::Omission, Half::First, dir.path()),
            Err(Error::Config(_))
        ));
        assert!(matches!("typo".parse::<ErrorType>(), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_placeholder_is_named() {
        match render_template("t", "hello {unknown} {src}", &[("src", "x")]) {
            Err(Error::Template { placeholder, .. }) => assert_eq!(placeholder, "unknown"),
            other => panic!("{other:?}"),
        }
        assert!(render_template("t", "open {src", &[("src", "x")]).is_err());
    }
}
