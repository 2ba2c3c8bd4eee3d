//! Calendar baskets: enumeration over the quoted strikes, market pricing,
//! and the two-scenario hedge replayed on a random bounded model.
//!
//! Run with `cargo run --example calendar_baskets`.

use arbcheck::certificates::execute;
use arbcheck::multi_maturity::{basket_prices, basket_strategy, check_necessary, enumerate_baskets};
use arbcheck::num::{format_rat, rat, ratio};
use arbcheck::quotes::{discount, parse_quotes};
use arbcheck::util::SplitMix64;

fn main() {
    let doc = r#"{
        "bank": [1, 1, 1],
        "underlying": {"bid": 6, "ask": 6},
        "options": [
            {"t": 1, "strike": 5, "bid": 1.5, "ask": 1.75},
            {"t": 2, "strike": 5, "bid": 1.25, "ask": 1.5},
            {"t": 2, "strike": 6, "bid": 0.75, "ask": 1}
        ]
    }"#;
    let dqs = discount(&parse_quotes(doc).expect("valid document"));
    let eps = ratio(1, 4);

    let baskets = enumerate_baskets(&dqs, &eps, 2, 1000);
    println!("{} baskets over the quoted strikes", baskets.len());
    for basket in baskets.iter().take(4) {
        let (ask, bid) = basket_prices(&dqs, basket);
        println!(
            "  maturity {} signs {:?} legs {:?}/{:?}: bid {}, ask {}",
            basket.maturity,
            basket.signs,
            basket.pinned,
            basket.held,
            format_rat(&bid),
            format_rat(&ask),
        );
    }

    // the hedge guarantee on a random spread-bounded model: flat book with
    // nonnegative bank, or short one share with bank above the pinned level
    let mut rng = SplitMix64::new(7);
    let model = arbcheck::sim::random_bounded_model(&dqs.bank, &eps, &rat(6), &mut rng);
    let basket = &baskets[baskets.len() - 1];
    let ledger = execute(&basket_strategy(&dqs, basket), &model, &eps).unwrap();
    for (i, path) in ledger.paths.iter().enumerate() {
        let u = basket.maturity;
        println!(
            "  path {}: bank {} stock {} at the basket maturity",
            i,
            format_rat(&path.bank[u]),
            format_rat(&path.dyn_stock[u]),
        );
    }

    let violations = check_necessary(&dqs, &eps, 2, 100_000).unwrap();
    println!("calendar battery violations at bound {}: {}", format_rat(&eps), violations.len());
    for v in &violations {
        println!("  {} versus {:?}", v.condition.label(), v.versus);
    }
}
