//! Runs the randomized acceptance batteries with a chosen seed and trial
//! count (`cargo run --example verify_battery -- 7 50`).

use dro_nested::verify::{run, VerifyOptions};

fn main() {
    let mut args = std::env::args().skip(1);
    let seed = args.next().map_or(42, |s| s.parse().expect("seed"));
    let trials = args.next().map(|s| s.parse().expect("trials"));
    let opts = VerifyOptions {
        seed,
        trials,
        tolerance: None,
    };
    let results = run(&opts, &[]);
    for r in &results {
        println!(
            "{:>2} {} {:<46} trials {:>5} max residual {:.2e}",
            r.id,
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.trials,
            r.max_residual
        );
    }
    if results.iter().any(|r| !r.passed) {
        std::process::exit(1);
    }
}
