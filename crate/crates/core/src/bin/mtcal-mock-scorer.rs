//! Standalone mock scorer: `mtcal-mock-scorer [--omit ID] [--fail-after N] [--garbage-at N] [--stall-after N]`.

use std::io::{self, BufReader};
use std::process::ExitCode;

use mtcal_core::metrics::mock::{serve_mock, MockExit, MockOptions};

fn main() -> ExitCode {
    let mut opts = MockOptions::default();
    let mut args = std::env::args().skip(1);
    while let Some(flag) = args.next() {
        let value = args.next();
        let num = || value.as_deref().and_then(|v| v.parse().ok());
        match flag.as_str() {
            "--omit" => opts.omit_id = value.clone(),
            "--fail-after" => opts.fail_after = num(),
            "--garbage-at" => opts.garbage_at = num(),
            "--stall-after" => opts.stall_after = num(),
            _ => {
                eprintln!("unknown flag {flag}");
                return ExitCode::from(2);
            }
        }
    }
    let stdin = io::stdin();
    match serve_mock(BufReader::new(stdin.lock()), io::stdout().lock(), io::stderr(), &opts) {
        MockExit::Ok => ExitCode::SUCCESS,
        MockExit::Failed(code) => ExitCode::from(code as u8),
    }
}
