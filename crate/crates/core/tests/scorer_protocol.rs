use std::collections::BTreeMap;

use mtcal_core::metrics::external::{request_line, run_external_scorer};
use mtcal_core::metrics::mock::mock_score;
use mtcal_core::metrics::{score_pool, MetricSpec, Orientation};
use mtcal_core::synthesis::{PseudoTranslation, Triplet};
use mtcal_core::Error;

const MOCK: &str = env!("CARGO_BIN_EXE_mtcal-mock-scorer");

fn triplets(n: usize) -> Vec<Triplet> {
    (0..n)
        .map(|i| {
            let dir = if i % 2 == 0 { "en-de" } else { "zh-en" };
            Triplet {
                triplet_id: format!("{dir}:p{i}:0"),
                source: format!("source {i} \"quoted\"\ttab"),
                translation: PseudoTranslation {
                    pair_id: format!("p{i}"),
                    direction: dir.parse().unwrap(),
                    edits: Vec::new(),
                    text: "x".repeat(i % 23) + "ü",
                    candidate_ids: Vec::new(),
                },
                reference: format!("reference {i}"),
            }
        })
        .collect()
}

fn mock(args: &[&str]) -> MetricSpec {
    let mut command = vec![MOCK.to_string()];
    command.extend(args.iter().map(|s| s.to_string()));
    MetricSpec::external("mock", command, 10.0, Orientation::HigherBetter)
}

#[test]
fn thousand_requests_round_trip_in_order() {
    let ts = triplets(1000);
    let recs = run_external_scorer(&mock(&[]), &ts).unwrap();
    assert_eq!(recs.len(), 1000);
    for (r, t) in recs.iter().zip(&ts) {
        assert_eq!(r.triplet_id, t.triplet_id);
        assert_eq!(r.raw_score, mock_score(&t.translation.text));
    }
}

#[test]
fn lower_is_better_is_sign_flipped() {
    let ts = triplets(20);
    let mut spec = mock(&[]);
    spec.orientation = Orientation::LowerBetter;
    let recs = run_external_scorer(&spec, &ts).unwrap();
    for r in &recs {
        assert_eq!(r.oriented_score, -r.raw_score);
    }
}

#[test]
fn request_shape() {
    let t = &triplets(3)[2];
    let with: serde_json::Value = serde_json::from_str(&request_line(t, true).unwrap()).unwrap();
    let without: serde_json::Value = serde_json::from_str(&request_line(t, false).unwrap()).unwrap();
    assert_eq!(with["ref"], "reference 2");
    assert!(without["ref"].is_null());
    assert_eq!(with["direction"], "en-de");
    assert_eq!(with["src"], t.source);
    let keys: Vec<&String> = with.as_object().unwrap().keys().collect();
    assert_eq!(keys.len(), 5);
}

#[test]
fn omitted_id_is_a_protocol_error_naming_it() {
    let ts = triplets(50);
    let err = run_external_scorer(&mock(&["--omit", "en-de:p10:0"]), &ts).unwrap_err();
    match &err {
        Error::Protocol { message, .. } => assert!(message.contains("en-de:p10:0"), "{message}"),
        other => panic!("unexpected {other:?}"),
    }
    assert_eq!(err.exit_code(), 4);
}

#[test]
fn nonzero_exit_is_a_scorer_error_with_stderr() {
    let ts = triplets(50);
    match run_external_scorer(&mock(&["--fail-after", "5"]), &ts).unwrap_err() {
        Error::Scorer { stderr, message, .. } => {
            assert!(stderr.contains("simulated failure"), "{stderr}");
            assert!(message.contains("5 of 50"), "{message}");
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn garbage_line_is_a_protocol_error_with_line_number() {
    let ts = triplets(50);
    match run_external_scorer(&mock(&["--garbage-at", "7"]), &ts).unwrap_err() {
        Error::Protocol { message, .. } => assert!(message.contains("line 7"), "{message}"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn stalled_scorer_times_out() {
    let ts = triplets(10);
    let mut spec = mock(&["--stall-after", "3"]);
    if let mtcal_core::metrics::MetricKind::External { timeout_s, .. } = &mut spec.kind {
        *timeout_s = 0.5;
    }
    let started = std::time::Instant::now();
    assert!(matches!(run_external_scorer(&spec, &ts), Err(Error::Timeout { .. })));
    assert!(started.elapsed().as_secs() < 10);
}

#[test]
fn missing_binary_is_a_scorer_error() {
    let spec = MetricSpec::external("ghost", vec!["/nonexistent/scorer".into()], 5.0, Orientation::HigherBetter);
    assert!(matches!(run_external_scorer(&spec, &triplets(2)), Err(Error::Scorer { .. })));
}

#[test]
fn failing_metric_leaves_others_intact() {
    let ts = triplets(30);
    let specs = vec![
        MetricSpec::chrf("chrf", Default::default()),
        MetricSpec { name: "broken".into(), ..mock(&["--fail-after", "2"]) },
        mock(&[]),
    ];
    let out = score_pool(&specs, &ts).unwrap();
    assert_eq!(out.failures.len(), 1);
    assert_eq!(out.failures[0].metric, "broken");
    assert_eq!(out.failures[0].missing.len(), 30);
    let by_metric: BTreeMap<&str, usize> =
        out.records.iter().fold(BTreeMap::new(), |mut m, r| {
            *m.entry(r.metric.as_str()).or_default() += 1;
            m
        });
    assert_eq!(by_metric["chrf"], 30);
    assert_eq!(by_metric["mock"], 30);
    assert!(out.matrix.missing("mock").is_empty());
    assert_eq!(out.matrix.missing("broken").len(), 30);
}
