//! End-to-end acceptance battery at default trial counts and tolerances.

use std::time::Instant;

use dro_nested::verify::{VerifyOptions, CRITERIA};

#[test]
fn acceptance_criteria() {
    let opts = VerifyOptions::default();
    let mut failed = Vec::new();
    for (id, name, f) in CRITERIA {
        let start = Instant::now();
        let r = f(&opts);
        println!(
            "criterion {id:>2} {:<4} {name} (trials {}, max residual {:e}, tol {:e}, {:.2?})",
            if r.passed { "PASS" } else { "FAIL" },
            r.trials,
            r.max_residual,
            r.tolerance,
            start.elapsed()
        );
        for d in &r.detail {
            println!("    {d}");
        }
        if !r.passed {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
