//! Peacock construction inside infinity-Wasserstein balls, martingale
//! transition kernels, and assembly of a full finite model from the pieces.
//!
//! The constructive route climbs call functions: start from the smallest
//! admissible law of the first marginal, then at each step take the pointwise
//! max with the next lower envelope and verify it stays below the upper
//! envelope. Every output is post-verified exactly (means, convex order,
//! distance); when the greedy climb cannot certify itself it falls back to an
//! exact joint linear program over a finite support grid that is provably
//! sufficient (any admissible peacock can be split cell-by-cell onto the
//! grid without leaving the balls or breaking the convex order).

use crate::linfeas::FeasibilityProblem;
use crate::measures::{
    comonotone_coupling, convex_order_leq, envelopes, winf_distance, CallFunction,
    DiscreteMeasure,
};
use crate::model::{FiniteModel, ModelNode};
use crate::num::{max_rat, min_rat, Rat};
use crate::pwl::PwlFn;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PeacockError {
    #[error("target mean outside the intersection of the mean bands")]
    MeanOutsideIntersection,
    #[error("input sequence is empty")]
    Empty,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KernelError {
    #[error("marginals are not increasing in convex order at step {0}")]
    NotAPeacock(usize),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AssembleError {
    #[error("marginal pair {0} farther apart than the spread bound")]
    DistanceExceeded(usize),
    #[error("kernel shape does not match the marginals")]
    KernelMismatch,
}

/// Row-stochastic martingale transition between consecutive marginals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MartingaleKernel {
    pub from: Vec<Rat>,
    pub to: Vec<Rat>,
    /// rows[i][j] = P(next = to[j] | current = from[i]); each row sums to one
    /// and has barycenter from[i].
    pub rows: Vec<Vec<Rat>>,
}

/// Finds a peacock `(nu_t)` with common mean `m` such that every `nu_t` stays
/// within infinity-Wasserstein distance `eps` of `mu_t`; `None` when no such
/// peacock exists.
pub fn peacock_construct(
    mus: &[DiscreteMeasure],
    eps: &Rat,
    m: &Rat,
) -> Result<Option<Vec<DiscreteMeasure>>, PeacockError> {
    if mus.is_empty() {
        return Err(PeacockError::Empty);
    }
    for mu in mus {
        let mean = mu.mean();
        if *m < &mean - eps || *m > &mean + eps {
            return Err(PeacockError::MeanOutsideIntersection);
        }
    }
    if let Some(seq) = greedy_climb(mus, eps, m) {
        if verify_peacock(mus, eps, m, &seq) {
            return Ok(Some(seq));
        }
    }
    Ok(peacock_lp(mus, eps, m))
}

fn verify_peacock(mus: &[DiscreteMeasure], eps: &Rat, m: &Rat, seq: &[DiscreteMeasure]) -> bool {
    seq.len() == mus.len()
        && seq.iter().all(|nu| nu.mean() == *m)
        && seq.windows(2).all(|w| convex_order_leq(&w[0], &w[1]))
        && seq.iter().zip(mus).all(|(nu, mu)| winf_distance(mu, nu) <= *eps)
}

/// The climbing pass: call functions of the candidates, each the max of the
/// previous candidate and the next lower envelope, clipped against the upper
/// envelope.
fn greedy_climb(mus: &[DiscreteMeasure], eps: &Rat, m: &Rat) -> Option<Vec<DiscreteMeasure>> {
    let mut out: Vec<DiscreteMeasure> = Vec::with_capacity(mus.len());
    let mut current: Option<CallFunction> = None;
    for mu in mus {
        let (lower, upper) = envelopes(mu, m, eps).expect("means pre-checked");
        let candidate = match &current {
            None => lower,
            Some(prev) => {
                let raw = PwlFn::pointwise_max(prev.pwl(), lower.pwl());
                CallFunction::from_pwl(raw).ok()?
            }
        };
        // the climb fails when the candidate pierces the upper envelope
        let inside = candidate
            .kinks()
            .iter()
            .chain(upper.kinks().iter())
            .all(|x| candidate.eval(x) <= upper.eval(x));
        if !inside {
            return None;
        }
        out.push(candidate.measure());
        current = Some(candidate);
    }
    Some(out)
}

/// Support grid sufficient for the joint feasibility program: every atom of
/// every marginal, shifted by `{-eps, 0, +eps}`, plus the target mean.
fn support_grid(mus: &[DiscreteMeasure], eps: &Rat, m: &Rat) -> Vec<Rat> {
    let mut grid = vec![m.clone()];
    for mu in mus {
        for (x, _) in mu.atoms() {
            grid.push(x.clone());
            grid.push(x + eps);
            grid.push(x - eps);
        }
    }
    grid.sort();
    grid.dedup();
    grid
}

/// Exact joint feasibility: transport variables couple each `mu_t` to a law
/// on the grid within distance `eps`; equal means and kink-wise convex-order
/// constraints chain the laws into a peacock.
pub fn peacock_lp(mus: &[DiscreteMeasure], eps: &Rat, m: &Rat) -> Option<Vec<DiscreteMeasure>> {
    let grid = support_grid(mus, eps, m);
    let horizon = mus.len();
    // arcs per period: (atom index, grid index) with |x - g| <= eps
    let mut arcs: Vec<Vec<(usize, usize)>> = Vec::with_capacity(horizon);
    let mut offsets = Vec::with_capacity(horizon);
    let mut total_vars = 0usize;
    for mu in mus {
        let mut list = Vec::new();
        for (ai, (x, _)) in mu.atoms().iter().enumerate() {
            for (gi, g) in grid.iter().enumerate() {
                if (x - g).abs() <= *eps {
                    list.push((ai, gi));
                }
            }
        }
        offsets.push(total_vars);
        total_vars += list.len();
        arcs.push(list);
    }
    let mut p = FeasibilityProblem::new(total_vars);
    // marginal rows: each atom's mass ships out entirely
    for (t, mu) in mus.iter().enumerate() {
        for (ai, (_, w)) in mu.atoms().iter().enumerate() {
            let coeffs: Vec<(usize, Rat)> = arcs[t]
                .iter()
                .enumerate()
                .filter(|(_, (a, _))| *a == ai)
                .map(|(vi, _)| (offsets[t] + vi, Rat::one()))
                .collect();
            p.eq(coeffs, w.clone());
        }
        // mean of the induced law
        let coeffs: Vec<(usize, Rat)> = arcs[t]
            .iter()
            .enumerate()
            .map(|(vi, (_, gi))| (offsets[t] + vi, grid[*gi].clone()))
            .collect();
        p.eq(coeffs, m.clone());
    }
    // convex order between consecutive laws at every grid kink:
    // sum_g nu_t(g) (g - x)^+ <= sum_g nu_{t+1}(g) (g - x)^+
    for t in 0..horizon.saturating_sub(1) {
        for x in &grid {
            let mut coeffs: Vec<(usize, Rat)> = Vec::new();
            for (vi, (_, gi)) in arcs[t].iter().enumerate() {
                let weight = max_rat(&grid[*gi] - x, Rat::zero());
                if !weight.is_zero() {
                    coeffs.push((offsets[t] + vi, weight));
                }
            }
            for (vi, (_, gi)) in arcs[t + 1].iter().enumerate() {
                let weight = max_rat(&grid[*gi] - x, Rat::zero());
                if !weight.is_zero() {
                    coeffs.push((offsets[t + 1] + vi, -weight));
                }
            }
            if !coeffs.is_empty() {
                p.le(coeffs, Rat::zero());
            }
        }
    }
    let x = p.solve()?;
    let mut out = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let mut masses: Vec<Rat> = vec![Rat::zero(); grid.len()];
        for (vi, (_, gi)) in arcs[t].iter().enumerate() {
            masses[*gi] += &x[offsets[t] + vi];
        }
        let atoms: Vec<(Rat, Rat)> = grid
            .iter()
            .zip(masses)
            .filter(|(_, w)| w.is_positive())
            .map(|(g, w)| (g.clone(), w))
            .collect();
        out.push(DiscreteMeasure::new(atoms).expect("masses sum to one"));
    }
    Some(out)
}

/// Martingale transition kernels along a peacock, one per step, found by
/// exact linear feasibility (mass balance, barycenter, pushforward).
pub fn martingale_from_peacock(
    nus: &[DiscreteMeasure],
) -> Result<Vec<MartingaleKernel>, KernelError> {
    let mut out = Vec::new();
    for (step, w) in nus.windows(2).enumerate() {
        let (a, b) = (&w[0], &w[1]);
        let n = a.atoms().len();
        let m = b.atoms().len();
        let mut p = FeasibilityProblem::new(n * m);
        for (i, (x, wi)) in a.atoms().iter().enumerate() {
            let row: Vec<(usize, Rat)> = (0..m).map(|j| (i * m + j, Rat::one())).collect();
            p.eq(row, wi.clone());
            let bary: Vec<(usize, Rat)> =
                (0..m).map(|j| (i * m + j, b.atoms()[j].0.clone())).collect();
            p.eq(bary, x * wi);
        }
        for (j, (_, wj)) in b.atoms().iter().enumerate() {
            let col: Vec<(usize, Rat)> = (0..n).map(|i| (i * m + j, Rat::one())).collect();
            p.eq(col, wj.clone());
        }
        let x = p.solve().ok_or(KernelError::NotAPeacock(step))?;
        let rows = (0..n)
            .map(|i| {
                let wi = &a.atoms()[i].1;
                (0..m).map(|j| &x[i * m + j] / wi).collect()
            })
            .collect();
        out.push(MartingaleKernel {
            from: a.atoms().iter().map(|(x, _)| x.clone()).collect(),
            to: b.atoms().iter().map(|(x, _)| x.clone()).collect(),
            rows,
        });
    }
    Ok(out)
}

/// Which side the bid/ask band takes around the reference and shadow prices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpreadConvention {
    /// bid = min(reference, shadow), ask = max: spread bound eps.
    Tight,
    /// reference is the bid-ask midpoint: spread bound 2*eps.
    Midpoint,
}

/// Assembles a finite model from reference marginals `mu_t`, shadow marginals
/// `nu_t`, and the martingale kernels: the shadow tree follows the kernels,
/// each node is refined by the comonotone conditional law of the reference
/// given the shadow, and the bid/ask band wraps the two prices per the chosen
/// convention.
pub fn assemble_model(
    mus: &[DiscreteMeasure],
    nus: &[DiscreteMeasure],
    kernels: &[MartingaleKernel],
    bank: &[Rat],
    eps: &Rat,
    convention: SpreadConvention,
) -> Result<FiniteModel, AssembleError> {
    let horizon = mus.len();
    if nus.len() != horizon || kernels.len() + 1 != horizon.max(1) || bank.len() != horizon + 1 {
        return Err(AssembleError::KernelMismatch);
    }
    for (t, (mu, nu)) in mus.iter().zip(nus).enumerate() {
        if winf_distance(mu, nu) > *eps {
            return Err(AssembleError::DistanceExceeded(t + 1));
        }
    }
    // conditional reference laws per shadow atom and period
    let mut conditionals: Vec<Vec<Vec<(Rat, Rat)>>> = Vec::with_capacity(horizon);
    for (mu, nu) in mus.iter().zip(nus) {
        let coupling = comonotone_coupling(mu, nu);
        let mut per_atom: Vec<Vec<(Rat, Rat)>> = vec![Vec::new(); nu.atoms().len()];
        for (i, j, mass) in coupling {
            let x = mu.atoms()[i].0.clone();
            let w = mass / &nu.atoms()[j].1;
            per_atom[j].push((x, w));
        }
        conditionals.push(per_atom);
    }
    let m = nus[0].mean();
    let root = ModelNode {
        id: 0,
        parent: None,
        time: 0,
        prob: Rat::one(),
        bid: m.clone(),
        ask: m.clone(),
        reference: m.clone(),
        shadow: m,
    };
    let mut nodes = vec![root];
    // frontier: (node id, shadow atom index at current time)
    let mut frontier: Vec<(usize, usize)> = Vec::new();
    for t in 1..=horizon {
        let nu = &nus[t - 1];
        let mut next_frontier = Vec::new();
        let parents: Vec<(usize, Option<usize>)> = if t == 1 {
            vec![(0, None)]
        } else {
            frontier.iter().map(|(id, ai)| (*id, Some(*ai))).collect()
        };
        for (parent_id, parent_atom) in parents {
            for (j, (y, wj)) in nu.atoms().iter().enumerate() {
                let q = match parent_atom {
                    None => wj.clone(), // the first marginal itself
                    Some(ai) => kernels[t - 2].rows[ai][j].clone(),
                };
                if q.is_zero() {
                    continue;
                }
                for (x, wx) in &conditionals[t - 1][j] {
                    let id = nodes.len();
                    let shadow = y * &bank[t];
                    let reference = x * &bank[t];
                    let (bid, ask) = match convention {
                        SpreadConvention::Tight => (
                            min_rat(reference.clone(), shadow.clone()),
                            max_rat(reference.clone(), shadow.clone()),
                        ),
                        SpreadConvention::Midpoint => {
                            let mirrored = Rat::from_integer(2.into()) * &reference - &shadow;
                            (
                                min_rat(shadow.clone(), mirrored.clone()),
                                max_rat(shadow.clone(), mirrored),
                            )
                        }
                    };
                    nodes.push(ModelNode {
                        id,
                        parent: Some(parent_id),
                        time: t,
                        prob: &q * wx,
                        bid,
                        ask,
                        reference,
                        shadow,
                    });
                    next_frontier.push((id, j));
                }
            }
        }
        frontier = next_frontier;
    }
    Ok(FiniteModel { bank: bank.to_vec(), nodes })
}
