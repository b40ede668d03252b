//! Host side of the line-delimited JSON scorer protocol.
//!
//! Requests go to the child's stdin, one object per line:
//! `{"id": …, "src": …, "hyp": …, "ref": … | null, "direction": …}`.
//! Responses come back on stdout as `{"id": …, "score": …}`, one per line, in
//! any order. Closing stdin ends the session; the child must exit 0.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{MetricKind, MetricSpec, ScoreRecord};
use crate::error::{Error, Result};
use crate::synthesis::Triplet;

#[derive(Serialize)]
struct Request<'a> {
    id: &'a str,
    src: &'a str,
    hyp: &'a str,
    #[serde(rename = "ref")]
    reference: Option<&'a str>,
    direction: String,
}

#[derive(Deserialize)]
struct Response {
    id: String,
    score: f64,
}

/// Serialises one request line (without the trailing newline).
pub fn request_line(triplet: &Triplet, needs_reference: bool) -> Result<String> {
    Ok(serde_json::to_string(&Request {
        id: &triplet.triplet_id,
        src: &triplet.source,
        hyp: &triplet.translation.text,
        reference: needs_reference.then_some(triplet.reference.as_str()),
        direction: triplet.direction().to_string(),
    })?)
}

/// Streams `triplets` through an external scorer and returns one record per
/// triplet, in input order.
pub fn run_external_scorer(spec: &MetricSpec, triplets: &[Triplet]) -> Result<Vec<ScoreRecord>> {
    let (command, timeout_s) = match &spec.kind {
        MetricKind::External { command, timeout_s } => (command, *timeout_s),
        MetricKind::Builtin(_) => {
            return Err(Error::Config(format!("metric `{}` is builtin, not external", spec.name)))
        }
    };
    spec.validate()?;
    if triplets.is_empty() {
        return Err(Error::Config(format!("no triplets to score with `{}`", spec.name)));
    }
    let scorer_err = |message: String, stderr: String| Error::Scorer { metric: spec.name.clone(), message, stderr };
    let protocol_err = |message: String| Error::Protocol { metric: spec.name.clone(), message };

    let lines: Vec<String> =
        triplets.iter().map(|t| request_line(t, spec.needs_reference)).collect::<Result<_>>()?;
    let mut child = Command::new(&command[0])
        .args(&command[1..])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| scorer_err(format!("cannot start `{}`: {e}", command.join(" ")), String::new()))?;

    let stdin = child.stdin.take().expect("piped stdin");
    let stdout = child.stdout.take().expect("piped stdout");
    let mut stderr = child.stderr.take().expect("piped stderr");

    let writer = std::thread::spawn(move || {
        let mut w = BufWriter::new(stdin);
        for line in lines {
            // A closed pipe means the child died; its exit status reports why.
            if w.write_all(line.as_bytes()).and_then(|_| w.write_all(b"\n")).is_err() {
                return;
            }
        }
        let _ = w.flush();
    });
    let stderr_reader = std::thread::spawn(move || {
        let mut buf = String::new();
        let _ = stderr.read_to_string(&mut buf);
        buf
    });
    let (tx, rx) = mpsc::channel();
    let reader = std::thread::spawn(move || {
        for line in BufReader::new(stdout).lines() {
            if tx.send(line).is_err() {
                break;
            }
        }
    });

    let index: HashMap<&str, usize> = triplets.iter().enumerate().map(|(i, t)| (t.triplet_id.as_str(), i)).collect();
    let mut scores: Vec<Option<f64>> = vec![None; triplets.len()];
    let timeout = Duration::from_secs_f64(timeout_s);
    let mut line_no = 0usize;
    let mut failure: Option<Error> = None;
    loop {
        match rx.recv_timeout(timeout) {
            Ok(Ok(line)) => {
                line_no += 1;
                if line.trim().is_empty() {
                    continue;
                }
                let resp: Response = match serde_json::from_str(&line) {
                    Ok(r) => r,
                    Err(e) => {
                        failure = Some(protocol_err(format!("unparsable response on line {line_no}: {e}")));
                        break;
                    }
                };
                let Some(&i) = index.get(resp.id.as_str()) else {
                    failure = Some(protocol_err(format!("response for unknown id `{}` (line {line_no})", resp.id)));
                    break;
                };
                if scores[i].is_some() {
                    failure = Some(protocol_err(format!("duplicate response for id `{}` (line {line_no})", resp.id)));
                    break;
                }
                if !resp.score.is_finite() {
                    failure = Some(protocol_err(format!("non-finite score for id `{}`", resp.id)));
                    break;
                }
                scores[i] = Some(resp.score);
            }
            Ok(Err(e)) => {
                failure = Some(protocol_err(format!("reading response line {}: {e}", line_no + 1)));
                break;
            }
            Err(mpsc::RecvTimeoutError::Timeout) => {
                failure = Some(Error::Timeout { metric: spec.name.clone(), seconds: timeout_s });
                break;
            }
            Err(mpsc::RecvTimeoutError::Disconnected) => break,
        }
    }
    if failure.is_some() {
        let _ = child.kill();
    }
    let status = child.wait().map_err(|e| Error::io(format!("waiting for scorer `{}`", spec.name), e))?;
    let _ = writer.join();
    drop(rx);
    let _ = reader.join();
    let diagnostics = stderr_reader.join().unwrap_or_default();
    if let Some(e) = failure {
        return Err(match e {
            Error::Protocol { metric, message } if !diagnostics.is_empty() => {
                Error::Protocol { metric, message: format!("{message}\n--- scorer stderr ---\n{diagnostics}") }
            }
            other => other,
        });
    }
    let answered = scores.iter().filter(|s| s.is_some()).count();
    if !status.success() {
        return Err(scorer_err(
            format!("exited with {status} after answering {answered} of {} requests", triplets.len()),
            diagnostics,
        ));
    }
    if let Some(i) = scores.iter().position(Option::is_none) {
        return Err(protocol_err(format!(
            "no response for id `{}` ({} of {} unanswered)",
            triplets[i].triplet_id,
            triplets.len() - answered,
            triplets.len()
        )));
    }
    Ok(triplets
        .iter()
        .zip(scores)
        .map(|(t, s)| ScoreRecord::new(&t.triplet_id, spec, s.expect("checked above")))
        .collect())
}
