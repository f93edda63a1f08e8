//! Acceptance criteria 1–10, one pass/fail line each.
//!
//! Criteria listed in `KNOWN_FAILURES` are reported but do not fail the run;
//! every other criterion must pass within its runtime budget.

use std::time::Instant;

use cfslab::acceptance::{run_criterion, summary_line, KNOWN_FAILURES};
use cfslab::Exec;

#[test]
fn acceptance_criteria() {
    let mut unexpected = Vec::new();
    for id in 1..=10u8 {
        let start = Instant::now();
        let outcome = run_criterion(id, Exec::Parallel).unwrap_or_else(|e| panic!("criterion {id} errored: {e}"));
        let secs = start.elapsed().as_secs_f64();
        let in_budget = secs <= outcome.runtime_limit_s;
        println!("{} [{secs:.1} s / {:.0} s]", summary_line(&outcome), outcome.runtime_limit_s);
        for (k, v) in &outcome.metrics {
            println!("    {k} = {v:.6e}");
        }
        let expected = !KNOWN_FAILURES.contains(&id);
        if outcome.passed != expected || !in_budget {
            unexpected.push(id);
        }
    }
    assert!(unexpected.is_empty(), "criteria with unexpected outcome or over budget: {unexpected:?}");
}
