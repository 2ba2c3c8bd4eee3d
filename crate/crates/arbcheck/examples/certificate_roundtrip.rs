//! Certificates as portable evidence: classify an arbitrageable quote set,
//! serialize the certificate, parse it back, and re-verify it on the full
//! admissible price grid.
//!
//! Run with `cargo run --example certificate_roundtrip`.

use arbcheck::certificates::{verify_model_independent, SemiStaticPortfolio};
use arbcheck::classify::{classify, ClassifyOptions, OverallVerdict};
use arbcheck::num::{format_rat, rat};
use arbcheck::quotes::{discount, parse_quotes};

fn main() {
    // frictionless prices increasing with the strike: a call spread pays
    // to be assembled
    let doc = r#"{
        "bank": [1, 1],
        "underlying": {"bid": 5, "ask": 5},
        "options": [
            {"t": 1, "strike": 1, "bid": 1, "ask": 1},
            {"t": 1, "strike": 2, "bid": 2, "ask": 2}
        ]
    }"#;
    let dqs = discount(&parse_quotes(doc).expect("valid document"));
    let report = classify(&dqs, &rat(0), &ClassifyOptions::default()).unwrap();
    assert_eq!(report.verdict, OverallVerdict::ModelIndependentArbitrage);

    let cert = &report.certificates[0];
    println!("certificate source: {}", cert.source);
    let wire = cert.portfolio.to_json().to_string();
    println!("serialized: {}", wire);

    let parsed = SemiStaticPortfolio::from_json(&serde_json::from_str(&wire).unwrap()).unwrap();
    let verification = verify_model_independent(&parsed, &dqs, &rat(0), 5).unwrap();
    println!(
        "replayed: setup cost {}, worst terminal bank {}, paths checked {}",
        format_rat(&verification.initial_value),
        format_rat(&verification.worst_terminal_bank),
        verification.paths_checked,
    );
    assert!(verification.verified());
    println!("verified: negative cost, nonnegative terminal bank everywhere");
}
