//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p mfc-lab --test acceptance -- --nocapture`.

use mfc_lab::acceptance::{Lab, CRITERIA};
use std::io::Write;

#[test]
fn acceptance_criteria() {
    let mut lab = Lab::new(20_240_917).expect("benchmark model");
    let mut failed = Vec::new();
    writeln!(std::io::stdout().lock()).unwrap();
    for id in 1..=CRITERIA.len() {
        let outcome = lab.run(id);
        // written to the stdout handle directly so the verdicts show without --nocapture
        writeln!(std::io::stdout().lock(), "{}", outcome.line()).unwrap();
        if !outcome.acceptable() {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
