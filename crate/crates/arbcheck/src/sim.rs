//! Seeded random generation of spread-bounded models, for demonstrations and
//! randomized sweeps.

use crate::model::{FiniteModel, ModelNode};
use crate::num::{max_rat, min_rat, ratio, Rat};
use crate::util::SplitMix64;
use num_traits::One;

/// Random model satisfying the spread-bound invariants: the discounted shadow
/// price is an exact martingale built from mean-preserving two-point splits,
/// the discounted reference stays within `eps` of it and above `eps`, and the
/// band is the envelope of the two.
pub fn random_bounded_model(
    bank: &[Rat],
    eps: &Rat,
    start: &Rat,
    rng: &mut SplitMix64,
) -> FiniteModel {
    let horizon = bank.len() - 1;
    let root = ModelNode {
        id: 0,
        parent: None,
        time: 0,
        prob: Rat::one(),
        bid: start.clone(),
        ask: start.clone(),
        reference: start.clone(),
        shadow: start.clone(),
    };
    let mut nodes = vec![root];
    // frontier holds (node id, discounted shadow value)
    let mut frontier: Vec<(usize, Rat)> = vec![(0, start.clone())];
    let floor = eps + eps; // keep shadows comfortably above the reference floor
    for t in 1..=horizon {
        let mut next = Vec::new();
        for (parent, y) in frontier {
            let splits: Vec<(Rat, Rat)> = if rng.chance(1, 2) || y <= &floor + ratio(1, 4) {
                vec![(y.clone(), Rat::one())]
            } else {
                // y - d1 with prob d2/(d1+d2), y + d2 with the complement
                let d1 = min_rat(rng.rat_between(1, 2, 4), &y - &floor);
                let d2 = rng.rat_between(1, 2, 4);
                let q1 = &d2 / (&d1 + &d2);
                vec![(&y - &d1, q1.clone()), (&y + &d2, Rat::one() - q1)]
            };
            for (y_child, prob) in splits {
                // reference within eps of the shadow and at least eps
                let lo = max_rat(&y_child - eps, eps.clone());
                let hi = &y_child + eps;
                let lambda = ratio(rng.below(5) as i64, 4);
                let reference_disc = &lo + (&hi - &lo) * lambda;
                let id = nodes.len();
                let shadow = &y_child * &bank[t];
                let reference = reference_disc * &bank[t];
                nodes.push(ModelNode {
                    id,
                    parent: Some(parent),
                    time: t,
                    prob,
                    bid: min_rat(shadow.clone(), reference.clone()),
                    ask: max_rat(shadow.clone(), reference.clone()),
                    reference,
                    shadow: shadow.clone(),
                });
                next.push((id, y_child));
            }
        }
        frontier = next;
    }
    FiniteModel { bank: bank.to_vec(), nodes }
}
