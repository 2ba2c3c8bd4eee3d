//! Distances and order relations on finitely supported laws: quantile-exact
//! infinity Wasserstein distance, convex order, mean-pinned envelopes, and
//! tail-tolerant coupling feasibility.
//!
//! Run with `cargo run --example measure_toolkit`.

use arbcheck::measures::{
    call_function, close_coupling_feasible, convex_order_leq, envelopes, winf_distance,
    DiscreteMeasure,
};
use arbcheck::num::{format_rat, rat, ratio};

fn main() {
    let concentrated = DiscreteMeasure::dirac(rat(1));
    let spread = DiscreteMeasure::new(vec![(rat(0), ratio(1, 2)), (rat(2), ratio(1, 2))]).unwrap();

    println!("winf(point, spread) = {}", format_rat(&winf_distance(&concentrated, &spread)));
    println!(
        "convex order: point <= spread: {}, spread <= point: {}",
        convex_order_leq(&concentrated, &spread),
        convex_order_leq(&spread, &concentrated),
    );

    // smallest and largest laws with mean 5 within distance 1 of a point mass
    let mu = DiscreteMeasure::dirac(rat(5));
    let (lower, upper) = envelopes(&mu, &rat(5), &rat(1)).unwrap();
    println!(
        "lower envelope measure: {:?}",
        lower.measure().atoms().iter().map(|(x, w)| (format_rat(x), format_rat(w))).collect::<Vec<_>>()
    );
    println!(
        "upper envelope measure: {:?}",
        upper.measure().atoms().iter().map(|(x, w)| (format_rat(x), format_rat(w))).collect::<Vec<_>>()
    );
    println!(
        "call values at 4: lower {}, upper {}",
        format_rat(&lower.eval(&rat(4))),
        format_rat(&upper.eval(&rat(4))),
    );

    // couplings with a tail allowance
    let far = DiscreteMeasure::dirac(rat(2));
    let near = DiscreteMeasure::dirac(rat(0));
    for (eps, p) in [(rat(1), ratio(1, 2)), (rat(2), ratio(1, 2)), (rat(1), rat(1))] {
        println!(
            "coupling with |X-Y| <= {} outside mass {}: {}",
            format_rat(&eps),
            format_rat(&p),
            close_coupling_feasible(&near, &far, &eps, &p),
        );
    }

    // call functions serialize through their measures
    let curve = call_function(&spread);
    println!("call value at 1: {}", format_rat(&curve.eval(&rat(1))));
}
