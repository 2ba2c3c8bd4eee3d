//! Find the smallest spread bound under which the calendar conditions pass.
//!
//! Run with `cargo run --example minimal_spread`.

use arbcheck::multi_maturity::{min_epsilon, ConsistencyMode};
use arbcheck::num::{format_rat, ratio};
use arbcheck::quotes::{discount, parse_quotes};

fn main() {
    let doc = r#"{
        "bank": [1, 1, 1],
        "underlying": {"bid": 2, "ask": 2},
        "options": [
            {"t": 1, "strike": 1, "bid": 2, "ask": 2},
            {"t": 2, "strike": 1, "bid": 1, "ask": 1}
        ]
    }"#;
    let dqs = discount(&parse_quotes(doc).expect("valid document"));
    let tol = ratio(1, 1_000_000_000);
    let scan = min_epsilon(&dqs, ConsistencyMode::Necessary, &tol, 2, 100_000)
        .expect("a passing bound exists");
    println!("minimal passing bound: {}", format_rat(&scan.value));
    println!("bracketed from below by a failing {}", format_rat(&scan.bracket.0));
    println!("validity ceiling: {}", format_rat(&scan.ceiling));
    println!("scan evaluations: {}", scan.trace.len());
    for (eps, ok) in scan.trace.iter().take(8) {
        println!("  {} -> {}", format_rat(eps), if *ok { "pass" } else { "fail" });
    }
}
