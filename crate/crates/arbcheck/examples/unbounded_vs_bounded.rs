//! The same quotes under three notions of consistency: a hard spread bound,
//! a spread bound that only holds outside a tail probability, and no bound
//! at all.
//!
//! Run with `cargo run --example unbounded_vs_bounded`.

use arbcheck::classify::{classify, ClassifyOptions};
use arbcheck::multi_maturity::{check_p_bounded, check_unbounded};
use arbcheck::num::{format_rat, rat, ratio};
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

    // hard bound: arbitrage
    let report = classify(&dqs, &rat(0), &ClassifyOptions::default()).unwrap();
    println!("bound 0: {:?}", report.verdict);

    // no bound: the wide-spread model absorbs the mispricing
    let unbounded = check_unbounded(&dqs);
    println!("unbounded: {:?}", unbounded.tag());

    // tail-tolerant bound: equivalent to the unbounded conditions, with a
    // coupling witness showing the excess displacement mass stays under p
    let (tail_report, witness) = check_p_bounded(&dqs, &ratio(1, 2), &ratio(1, 4), true);
    println!("p-bounded (eps 1/2, p 1/4): {:?}", tail_report.tag());
    if let Some(w) = witness {
        println!("  shadow mean {}", format_rat(&w.shadow_mean));
        for (t, nu, plan) in &w.couplings {
            let close: arbcheck::Rat = plan.iter().map(|(_, _, m)| m.clone()).sum();
            println!(
                "  maturity {}: shadow law with {} atoms, mass within the bound: {}",
                t,
                nu.atoms().len(),
                format_rat(&close),
            );
        }
    }
}
