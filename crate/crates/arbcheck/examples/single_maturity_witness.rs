//! Build an explicit model for a consistent single-maturity strip: shadow
//! prices inside the quoted bands, the reference law they induce, and the
//! finished scenario tree.
//!
//! Run with `cargo run --example single_maturity_witness`.

use arbcheck::classify::{classify, ClassifyOptions};
use arbcheck::num::{format_rat, rat};
use arbcheck::quotes::{discount, parse_quotes};
use arbcheck::single_maturity::{augment, check_conditions, shadow_prices};

fn main() {
    // ask prices that increase with the strike are still consistent
    let doc = r#"{
        "bank": [1, 1],
        "underlying": {"bid": 4, "ask": 4},
        "options": [
            {"t": 1, "strike": 1, "bid": 1.5, "ask": 6},
            {"t": 1, "strike": 2, "bid": 2, "ask": 7}
        ]
    }"#;
    let dqs = discount(&parse_quotes(doc).expect("valid document"));
    let strip = augment(&dqs, 1, &rat(0)).expect("bound admissible");
    println!("condition battery: {:?}", check_conditions(&strip).tag);

    let e = shadow_prices(&strip).expect("consistent strip");
    for (s, v) in e.iter().enumerate() {
        println!(
            "  strike {}: shadow price {} in [{}, {}]",
            format_rat(&strip.strikes[s]),
            format_rat(v),
            format_rat(&strip.bids[s]),
            format_rat(&strip.asks[s]),
        );
    }

    let report = classify(&dqs, &rat(0), &ClassifyOptions::default()).unwrap();
    let model = report.model.expect("witness model");
    println!("witness law mean: {}", format_rat(&report.witness_mean.unwrap()));
    println!("model nodes:");
    for n in &model.nodes {
        println!(
            "  t={} bid={} reference={} ask={} shadow={} (prob {})",
            n.time,
            format_rat(&n.bid),
            format_rat(&n.reference),
            format_rat(&n.ask),
            format_rat(&n.shadow),
            format_rat(&n.prob),
        );
    }
    model.validate().expect("arbitrage free");
    model.validate_spread_bound(&rat(0)).expect("zero spread");
}
