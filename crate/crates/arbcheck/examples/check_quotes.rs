//! Classify a quote set at a spread bound: verdict, violations, witnesses.
//!
//! Run with `cargo run --example check_quotes`.

use arbcheck::classify::{classify, ClassifyOptions};
use arbcheck::num::{format_rat, rat};
use arbcheck::quotes::{discount, parse_quotes};

fn main() {
    // a calendar mispricing: the near call is dearer than the far call
    let doc = r#"{
        "bank": [1, 1, 1],
        "underlying": {"bid": 2, "ask": 2},
        "options": [
            {"t": 1, "strike": 1, "bid": 2, "ask": 2},
            {"t": 2, "strike": 1, "bid": 1, "ask": 1}
        ]
    }"#;
    let dqs = discount(&parse_quotes(doc).expect("valid document"));
    for eps in [rat(0), arbcheck::num::ratio(3, 4)] {
        let report = classify(&dqs, &eps, &ClassifyOptions::default()).expect("admissible bound");
        println!("spread bound {} -> {:?}", format_rat(&eps), report.verdict);
        for (t, verdict) in &report.per_maturity {
            for v in &verdict.violations {
                println!("  maturity {}: {} at {:?}", t, v.kind.label(), v.indices);
            }
        }
        for v in &report.calendar_violations {
            println!(
                "  {} versus {:?} (basket bid {})",
                v.condition.label(),
                v.versus,
                format_rat(&v.basket_bid)
            );
        }
        for c in &report.certificates {
            println!(
                "  certificate [{}]: setup cost {}, verified {}",
                c.source,
                format_rat(&c.verification.initial_value),
                c.verification.verified()
            );
        }
        println!();
    }
}
