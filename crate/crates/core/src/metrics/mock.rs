//! Model-free scorer speaking the external wire protocol, used for protocol
//! conformance runs and self-contained fixture pipelines.

use std::io::{BufRead, Write};

use serde::Deserialize;

#[derive(Debug, Deserialize)]
struct Request {
    id: String,
    hyp: String,
}

/// Fault injection for exercising host-side error paths.
#[derive(Debug, Clone, Default)]
pub struct MockOptions {
    /// Never answer this id.
    pub omit_id: Option<String>,
    /// Exit with status 3 after this many responses.
    pub fail_after: Option<usize>,
    /// Emit a non-JSON line as the n-th response (1-based).
    pub garbage_at: Option<usize>,
    /// Stop responding (sleep) after this many responses.
    pub stall_after: Option<usize>,
}

/// `(number of characters in hyp mod 7) / 7`.
pub fn mock_score(hyp: &str) -> f64 {
    (hyp.chars().count() % 7) as f64 / 7.0
}

/// Outcome of a mock session, mapped to an exit status by the binary.
#[derive(Debug, PartialEq, Eq)]
pub enum MockExit {
    Ok,
    Failed(i32),
}

pub fn serve_mock(input: impl BufRead, mut output: impl Write, mut diag: impl Write, opts: &MockOptions) -> MockExit {
    let mut answered = 0usize;
    for (i, line) in input.lines().enumerate() {
        let line = match line {
            Ok(l) => l,
            Err(e) => {
                let _ = writeln!(diag, "mock scorer: read error: {e}");
                return MockExit::Failed(1);
            }
        };
        if line.trim().is_empty() {
            continue;
        }
        let req: Request = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                let _ = writeln!(diag, "mock scorer: malformed request on line {}: {e}", i + 1);
                return MockExit::Failed(1);
            }
        };
        if opts.fail_after == Some(answered) {
            let _ = writeln!(diag, "mock scorer: simulated failure after {answered} responses");
            return MockExit::Failed(3);
        }
        if opts.stall_after == Some(answered) {
            let _ = output.flush();
            std::thread::sleep(std::time::Duration::from_secs(3600));
        }
        if opts.omit_id.as_deref() == Some(req.id.as_str()) {
            continue;
        }
        answered += 1;
        let written = if opts.garbage_at == Some(answered) {
            writeln!(output, "this is not json")
        } else {
            let resp = serde_json::json!({ "id": req.id, "score": mock_score(&req.hyp) });
            writeln!(output, "{resp}")
        };
        if written.and_then(|_| output.flush()).is_err() {
            return MockExit::Failed(1);
        }
    }
    MockExit::Ok
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn answers_every_request_in_order() {
        let input = "{\"id\":\"a\",\"src\":\"s\",\"hyp\":\"abcdefgh\",\"ref\":null,\"direction\":\"en-de\"}\n\
                     {\"id\":\"b\",\"src\":\"s\",\"hyp\":\"abc\",\"ref\":\"x\",\"direction\":\"en-de\"}\n";
        let mut out = Vec::new();
        let exit = serve_mock(input.as_bytes(), &mut out, std::io::sink(), &MockOptions::default());
        assert_eq!(exit, MockExit::Ok);
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], r#"{"id":"a","score":0.14285714285714285}"#);
        assert_eq!(lines[1], format!(r#"{{"id":"b","score":{}}}"#, 3.0 / 7.0));
    }

    #[test]
    fn malformed_request_fails() {
        let mut diag = Vec::new();
        let exit = serve_mock("nope\n".as_bytes(), std::io::sink(), &mut diag, &MockOptions::default());
        assert_eq!(exit, MockExit::Failed(1));
        assert!(String::from_utf8(diag).unwrap().contains("line 1"));
    }
}
