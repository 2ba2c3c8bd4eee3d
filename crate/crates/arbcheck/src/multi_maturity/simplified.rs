//! Necessary and sufficient consistency check under the simplifying
//! assumptions: one frictionless call curve per maturity (a call function of
//! a finitely supported law on `[eps, infinity)`), a single spot price, and a
//! spread bound only on the underlying.
//!
//! For every chain length `u` and all real levels `k_1..k_{u-1}` four
//! piecewise-linear inequalities must hold. Each inequality is linear in
//! every coordinate between kinks, so the continuum quantifier reduces to the
//! finite grid of curve kinks shifted by `{0, +-eps, +-2eps}` plus far
//! anchors; ties between neighbouring coordinates are evaluated under both
//! signs.

use crate::measures::CallFunction;
use crate::num::{max_rat, min_rat, Rat};
use num_traits::{Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AssumptionError {
    #[error("curve {0} has support below the spread bound")]
    SupportBelowBound(usize),
    #[error("need at least one maturity")]
    Empty,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplifiedInput {
    /// Call curves for maturities 1..=T (index 0 of the vector is maturity 1).
    pub curves: Vec<CallFunction>,
    pub spot: Rat,
    pub epsilon: Rat,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplifiedViolation {
    /// Chain length u.
    pub horizon: usize,
    /// Which of the four boundary-sign patterns failed (1..=4).
    pub condition: usize,
    pub levels: Vec<Rat>,
    pub margin: Rat,
}

impl SimplifiedViolation {
    pub fn wire_id(&self) -> String {
        const ROMAN: [&str; 4] = ["i", "ii", "iii", "iv"];
        format!("5.3-{}", ROMAN[self.condition - 1])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SimplifiedVerdict {
    Consistent,
    Violated(SimplifiedViolation),
}

impl SimplifiedInput {
    pub fn horizon(&self) -> usize {
        self.curves.len()
    }

    fn validate(&self) -> Result<(), AssumptionError> {
        if self.curves.is_empty() {
            return Err(AssumptionError::Empty);
        }
        for (i, c) in self.curves.iter().enumerate() {
            if c.measure().min_support() < &self.epsilon {
                return Err(AssumptionError::SupportBelowBound(i + 1));
            }
        }
        Ok(())
    }
}

/// Candidate grid for the level `k_t`, which interacts with the curves of
/// maturities `t` and `t+1`: their kinks shifted by 0, +-eps, +-2eps, plus
/// one anchor below and above everything (where all curve terms are affine).
fn level_grid(input: &SimplifiedInput, t: usize, refine: usize) -> Vec<Rat> {
    let eps = &input.epsilon;
    let two = Rat::from_integer(2.into());
    let mut grid: Vec<Rat> = Vec::new();
    for idx in [t, t + 1] {
        if idx >= 1 && idx <= input.curves.len() {
            for kink in input.curves[idx - 1].kinks() {
                for shift in
                    [Rat::zero(), eps.clone(), -eps.clone(), &two * eps, -(&two * eps)]
                {
                    grid.push(&kink + shift);
                }
            }
        }
    }
    let first = grid.first().cloned().unwrap_or_else(Rat::zero);
    let lo = grid.iter().cloned().fold(first.clone(), min_rat) - Rat::from_integer(1.into());
    let hi = grid.iter().cloned().fold(first, max_rat) + Rat::from_integer(1.into());
    grid.push(lo.clone());
    grid.push(hi.clone());
    if refine > 0 {
        for i in 1..=refine {
            grid.push(&lo + (&hi - &lo) * crate::num::ratio(i as i64, refine as i64 + 1));
        }
    }
    grid.sort();
    grid.dedup();
    grid
}

/// Evaluates one chain: levels `k_1..k_{u-1}`, fixed boundary signs, interior
/// signs from neighbour comparison with both variants explored on ties.
/// Returns the minimal value of the condition expression over the sign
/// choices (the condition requires the expression to be nonnegative).
fn chain_value(
    input: &SimplifiedInput,
    u: usize,
    levels: &[Rat],
    sigma_first: i8,
    sigma_last: i8,
) -> Rat {
    let eps = &input.epsilon;
    let r = |idx: usize, x: &Rat| input.curves[idx - 1].eval(x);
    // interior sign possibilities per position 2..=u-1
    let mut patterns: Vec<Vec<i8>> = vec![vec![sigma_first]];
    for t in 2..u {
        let diff = &levels[t - 2] - &levels[t - 1];
        let choices: &[i8] = if diff.is_positive() {
            &[1]
        } else if diff.is_negative() {
            &[-1]
        } else {
            &[1, -1]
        };
        let mut next = Vec::new();
        for p in &patterns {
            for &c in choices {
                let mut q = p.clone();
                q.push(c);
                next.push(q);
            }
        }
        patterns = next;
    }
    for p in &mut patterns {
        p.push(sigma_last);
    }
    let mut worst: Option<Rat> = None;
    for sigmas in patterns {
        let sig = |t: usize| Rat::from_integer((sigmas[t - 1] as i64).into());
        let mut total = Rat::zero();
        for t in 1..u {
            let k_t = &levels[t - 1];
            total += r(t + 1, &(k_t + eps * sig(t + 1))) - r(t, &(k_t + eps * sig(t)));
        }
        let r1_eps = r(1, eps);
        let ru_eps = r(u, eps);
        let two_eps = Rat::from_integer(2.into()) * eps;
        total += match (sigma_first, sigma_last) {
            (-1, 1) => &r1_eps - &ru_eps + &two_eps,
            (-1, -1) => &r1_eps - &input.spot + &two_eps,
            (1, 1) => &input.spot - &ru_eps,
            (1, -1) => Rat::zero(),
            _ => unreachable!(),
        };
        worst = Some(match worst {
            None => total,
            Some(w) => min_rat(w, total),
        });
    }
    worst.unwrap()
}

fn condition_signs(condition: usize) -> (i8, i8) {
    match condition {
        1 => (-1, 1),
        2 => (-1, -1),
        3 => (1, 1),
        4 => (1, -1),
        _ => unreachable!(),
    }
}

/// Decides consistency of the curves at spread bound `eps` by checking the
/// four chain conditions on the kink grid. `refine` adds that many uniform
/// grid points per coordinate (used by the finer cross-check).
pub fn check_simplified_with_grid(
    input: &SimplifiedInput,
    refine: usize,
) -> Result<SimplifiedVerdict, AssumptionError> {
    input.validate()?;
    let horizon = input.horizon();
    for u in 2..=horizon {
        let grids: Vec<Vec<Rat>> = (1..u).map(|t| level_grid(input, t, refine)).collect();
        let mut stack: Vec<Vec<Rat>> = vec![Vec::new()];
        while let Some(prefix) = stack.pop() {
            if prefix.len() == u - 1 {
                for condition in 1..=4 {
                    let (s1, su) = condition_signs(condition);
                    let value = chain_value(input, u, &prefix, s1, su);
                    if value.is_negative() {
                        return Ok(SimplifiedVerdict::Violated(SimplifiedViolation {
                            horizon: u,
                            condition,
                            levels: prefix,
                            margin: -value,
                        }));
                    }
                }
                continue;
            }
            for x in &grids[prefix.len()] {
                let mut next = prefix.clone();
                next.push(x.clone());
                stack.push(next);
            }
        }
    }
    Ok(SimplifiedVerdict::Consistent)
}

/// Standard entry point on the kink grid alone.
pub fn check_simplified(input: &SimplifiedInput) -> Result<SimplifiedVerdict, AssumptionError> {
    check_simplified_with_grid(input, 0)
}
