//! The multi-maturity construction end to end: chain conditions on call
//! curves, a peacock of shadow laws inside the distance balls, exact
//! martingale kernels, and the assembled scenario tree.
//!
//! Run with `cargo run --example peacock_pipeline`.

use arbcheck::measures::{call_function, winf_distance, DiscreteMeasure};
use arbcheck::multi_maturity::{
    assemble_model, check_simplified, martingale_from_peacock, peacock_construct,
    SimplifiedInput, SimplifiedVerdict, SpreadConvention,
};
use arbcheck::num::{format_rat, rat, ratio};

fn main() {
    // reference laws drift apart over two periods; their means straddle the spot
    let mu1 = DiscreteMeasure::new(vec![(rat(5), ratio(1, 2)), (rat(7), ratio(1, 2))]).unwrap();
    let mu2 = DiscreteMeasure::new(vec![
        (rat(4), ratio(1, 4)),
        (rat(6), ratio(1, 2)),
        (rat(8), ratio(1, 4)),
    ])
    .unwrap();
    let spot = rat(6);
    let eps = ratio(1, 2);
    let input = SimplifiedInput {
        curves: vec![call_function(&mu1), call_function(&mu2)],
        spot: spot.clone(),
        epsilon: eps.clone(),
    };
    match check_simplified(&input).unwrap() {
        SimplifiedVerdict::Consistent => println!("chain conditions: consistent"),
        SimplifiedVerdict::Violated(v) => {
            println!("chain conditions violated ({}): margin {}", v.wire_id(), format_rat(&v.margin));
            return;
        }
    }
    let mus = [mu1, mu2];
    let nus = peacock_construct(&mus, &eps, &spot).unwrap().expect("consistent");
    for (t, nu) in nus.iter().enumerate() {
        println!(
            "shadow law {}: {:?} (distance {})",
            t + 1,
            nu.atoms().iter().map(|(x, w)| (format_rat(x), format_rat(w))).collect::<Vec<_>>(),
            format_rat(&winf_distance(&mus[t], nu)),
        );
    }
    let kernels = martingale_from_peacock(&nus).expect("peacock");
    for k in &kernels {
        println!("kernel rows (barycenter preserved):");
        for (i, row) in k.rows.iter().enumerate() {
            println!(
                "  from {}: {:?}",
                format_rat(&k.from[i]),
                row.iter().map(format_rat).collect::<Vec<_>>()
            );
        }
    }
    let bank = vec![rat(1), rat(1), rat(1)];
    let model =
        assemble_model(&mus, &nus, &kernels, &bank, &eps, SpreadConvention::Tight).unwrap();
    model.validate().expect("arbitrage free");
    model.validate_spread_bound(&eps).expect("bounded spread");
    println!("assembled model: {} nodes over horizon {}", model.nodes.len(), model.horizon());
}
