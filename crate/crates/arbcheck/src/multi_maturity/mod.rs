//! Multi-maturity analyses: calendar baskets and their hedge, the necessary
//! cross-maturity conditions, the simplified-assumption equivalence, peacock
//! and martingale construction, unbounded- and probabilistically-bounded
//! consistency, and the minimal explaining spread bound.

pub mod cvb;
pub mod necessary;
pub mod peacock;
pub mod simplified;

pub use cvb::{basket_prices, basket_strategy, enumerate_baskets, validate_basket, CalendarBasket};
pub use necessary::{check_necessary, necessary_pass, BudgetError, NecessaryCondition, NecessaryViolation};
pub use peacock::{
    assemble_model, martingale_from_peacock, peacock_construct, peacock_lp, MartingaleKernel,
    SpreadConvention,
};
pub use simplified::{
    check_simplified, check_simplified_with_grid, AssumptionError, SimplifiedInput,
    SimplifiedVerdict, SimplifiedViolation,
};

use crate::measures::{close_coupling_feasible, max_close_flow, CallFunction, DiscreteMeasure};
use crate::model::{FiniteModel, ModelNode};
use crate::num::{min_rat, Rat};
use crate::quotes::{validate_for_epsilon, DiscountedQuoteSet};
use crate::single_maturity::{
    augment, check_conditions, extend_to_call_function, raw_strip, shadow_prices,
    shadow_prices_anchored, SingleVerdict, Trichotomy,
};
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScanError {
    #[error("no consistent spread bound below the validity ceiling {0}")]
    NoConsistentEpsilonInRange(String),
    #[error("quotes do not admit any spread bound (a strike or the underlying bid is too low)")]
    NoAdmissibleEpsilon,
}

/// Per-maturity verdicts of the unbounded-spread analysis: the condition
/// battery over the quoted strikes only, no underlying entry.
#[derive(Clone, Debug)]
pub struct UnboundedReport {
    pub per_maturity: Vec<(usize, SingleVerdict)>,
}

impl UnboundedReport {
    pub fn tag(&self) -> Trichotomy {
        let mut tag = Trichotomy::Consistent;
        for (_, v) in &self.per_maturity {
            match v.tag {
                Trichotomy::ModelIndependentArbitrage => {
                    return Trichotomy::ModelIndependentArbitrage
                }
                Trichotomy::WeakArbitrage => tag = Trichotomy::WeakArbitrage,
                Trichotomy::Consistent => {}
            }
        }
        tag
    }
}

/// Consistency with no bound on the spread: the four conditions per maturity,
/// quoted strikes only. The underlying quotes never enter.
pub fn check_unbounded(dqs: &DiscountedQuoteSet) -> UnboundedReport {
    let per_maturity = dqs
        .quoted_maturities()
        .into_iter()
        .map(|t| (t, check_conditions(&raw_strip(dqs, t))))
        .collect();
    UnboundedReport { per_maturity }
}

/// Witness model for the unbounded verdict: per maturity a call curve through
/// admissible prices over the quoted strikes, a constant shadow price inside
/// the quoted underlying band, and the band wrapped around the two.
pub fn unbounded_model(dqs: &DiscountedQuoteSet) -> Option<FiniteModel> {
    let report = check_unbounded(dqs);
    if !matches!(report.tag(), Trichotomy::Consistent) {
        return None;
    }
    let s = (&dqs.underlying_bid + &dqs.underlying_ask) / Rat::from_integer(2.into());
    let horizon = dqs.horizon();
    let mut marginals: Vec<DiscreteMeasure> = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        if dqs.options[t].is_empty() {
            marginals.push(DiscreteMeasure::dirac(s.clone()));
            continue;
        }
        let strip = raw_strip(dqs, t);
        let e = shadow_prices(&strip).ok()?;
        let pts: Vec<(Rat, Rat)> = strip.strikes.iter().cloned().zip(e).collect();
        let cf = extend_to_call_function(&pts).ok()?;
        marginals.push(cf.measure());
    }
    let mut nodes = vec![ModelNode {
        id: 0,
        parent: None,
        time: 0,
        prob: Rat::one(),
        bid: s.clone(),
        ask: s.clone(),
        reference: s.clone(),
        shadow: s.clone(),
    }];
    let mut frontier = vec![0usize];
    for t in 1..=horizon {
        let mut next = Vec::new();
        for parent in frontier {
            for (x, w) in marginals[t - 1].atoms() {
                let id = nodes.len();
                let reference = x * &dqs.bank[t];
                let shadow = &s * &dqs.bank[t];
                nodes.push(ModelNode {
                    id,
                    parent: Some(parent),
                    time: t,
                    prob: w.clone(),
                    bid: min_rat(reference.clone(), shadow.clone()),
                    ask: crate::num::max_rat(reference.clone(), shadow.clone()),
                    reference,
                    shadow,
                });
                next.push(id);
            }
        }
        frontier = next;
    }
    Some(FiniteModel { bank: dqs.bank.clone(), nodes })
}

/// A coupling demonstration for the probabilistically bounded verdict: per
/// maturity, a coupling of the reference law with a shadow law whose mass at
/// displacement above `eps` is at most `p`.
#[derive(Clone, Debug)]
pub struct TailCouplingWitness {
    pub shadow_mean: Rat,
    /// Per maturity: shadow law and the coupling plan (i, j, mass) between
    /// reference atoms and shadow atoms.
    pub couplings: Vec<(usize, DiscreteMeasure, Vec<(usize, usize, Rat)>)>,
}

/// Consistency when the spread bound only needs to hold outside probability
/// `p`: equivalent to the unbounded conditions for every `p` in (0, 1].
/// With `witness` set, additionally tries to exhibit couplings whose large
/// displacements carry mass at most `p` (best effort on a finite grid).
pub fn check_p_bounded(
    dqs: &DiscountedQuoteSet,
    eps: &Rat,
    p: &Rat,
    witness: bool,
) -> (UnboundedReport, Option<TailCouplingWitness>) {
    let report = check_unbounded(dqs);
    if !witness || !matches!(report.tag(), Trichotomy::Consistent) {
        return (report, None);
    }
    let model = match unbounded_model(dqs) {
        Some(m) => m,
        None => return (report, None),
    };
    let s = (&dqs.underlying_bid + &dqs.underlying_ask) / Rat::from_integer(2.into());
    let mut couplings = Vec::new();
    for t in 1..=dqs.horizon() {
        let mu = model.reference_marginal(t);
        // shadow law: keep mass 1-p comonotonically within eps where possible,
        // park the rest at the mean-correcting point
        let nu = tail_coupling_law(&mu, eps, p, &s);
        let nu = match nu {
            Some(n) => n,
            None => return (report, None),
        };
        if !close_coupling_feasible(&mu, &nu, eps, p) {
            return (report, None);
        }
        let (_, plan) = max_close_flow(&mu, &nu, eps);
        couplings.push((t, nu, plan));
    }
    (report, Some(TailCouplingWitness { shadow_mean: s, couplings }))
}

/// Shadow law with mean `target`: mass `1-p` glued to the reference law,
/// mass `p` at the point that fixes the mean.
fn tail_coupling_law(
    mu: &DiscreteMeasure,
    eps: &Rat,
    p: &Rat,
    target: &Rat,
) -> Option<DiscreteMeasure> {
    let _ = eps;
    if p.is_zero() {
        return None;
    }
    if *p >= Rat::one() {
        return Some(DiscreteMeasure::dirac(target.clone()));
    }
    let mean = mu.mean();
    let z = (target - (Rat::one() - p) * &mean) / p;
    if !z.is_positive() {
        return None;
    }
    let mut atoms: Vec<(Rat, Rat)> =
        mu.atoms().iter().map(|(x, w)| (x.clone(), w * (Rat::one() - p))).collect();
    atoms.push((z, p.clone()));
    DiscreteMeasure::new(atoms).ok()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConsistencyMode {
    /// All per-maturity condition batteries with the underlying entry.
    Single,
    /// The calendar basket battery across maturities.
    Necessary,
    /// Synthesized frictionless curves checked by the chain conditions.
    Simplified,
}

/// Synthesizes the per-maturity call curves for the simplified analysis from
/// frictionless quotes: the shadow-price curve with its first value steered
/// toward mean `spot`, extended to a call function. `None` when the quotes
/// are not frictionless or some maturity fails its own conditions.
pub fn synthesize_curves(dqs: &DiscountedQuoteSet, eps: &Rat) -> Option<SimplifiedInput> {
    if dqs.underlying_bid != dqs.underlying_ask {
        return None;
    }
    if dqs.options.iter().flatten().any(|q| q.bid != q.ask) {
        return None;
    }
    let spot = dqs.underlying_bid.clone();
    let mut curves: Vec<CallFunction> = Vec::new();
    for t in 1..=dqs.horizon() {
        if dqs.options[t].is_empty() {
            curves.push(crate::measures::call_function(&DiscreteMeasure::dirac(spot.clone())));
            continue;
        }
        let strip = augment(dqs, t, eps).ok()?;
        if !matches!(check_conditions(&strip).tag, Trichotomy::Consistent) {
            return None;
        }
        let preferred = &spot - eps; // makes the curve mean exactly the spot
        let e = shadow_prices_anchored(&strip, Some(&preferred)).ok()?;
        let pts: Vec<(Rat, Rat)> = strip.strikes.iter().cloned().zip(e).collect();
        curves.push(extend_to_call_function(&pts).ok()?);
    }
    Some(SimplifiedInput { curves, spot, epsilon: eps.clone() })
}

/// One evaluation of the mode's checker at a given bound.
pub fn mode_consistent(
    dqs: &DiscountedQuoteSet,
    mode: ConsistencyMode,
    eps: &Rat,
    max_u: usize,
    cap: usize,
) -> bool {
    if validate_for_epsilon(dqs, eps).is_err() {
        return false;
    }
    match mode {
        ConsistencyMode::Single => dqs.quoted_maturities().into_iter().all(|t| {
            augment(dqs, t, eps)
                .map(|s| matches!(check_conditions(&s).tag, Trichotomy::Consistent))
                .unwrap_or(false)
        }),
        ConsistencyMode::Necessary => necessary_pass(dqs, eps, max_u, cap).unwrap_or(false),
        ConsistencyMode::Simplified => match synthesize_curves(dqs, eps) {
            Some(input) => matches!(check_simplified(&input), Ok(SimplifiedVerdict::Consistent)),
            None => false,
        },
    }
}

#[derive(Clone, Debug)]
pub struct EpsilonScan {
    /// A passing bound within tolerance of the scanned infimum.
    pub value: Rat,
    /// Every bound evaluated, with its verdict, in evaluation order.
    pub trace: Vec<(Rat, bool)>,
    /// Failing and passing ends of the final bracket.
    pub bracket: (Rat, Rat),
    /// Strict upper limit imposed by the standing assumptions.
    pub ceiling: Rat,
}

/// Scans for the smallest spread bound that the mode's checker accepts:
/// geometric coarse scan below the validity ceiling, then bisection to
/// `tol`, with no monotonicity assumed (the reported value is a grid point
/// verified to pass whose left neighbourhood failed).
pub fn min_epsilon(
    dqs: &DiscountedQuoteSet,
    mode: ConsistencyMode,
    tol: &Rat,
    max_u: usize,
    cap: usize,
) -> Result<EpsilonScan, ScanError> {
    let mut ceiling: Option<Rat> = None;
    let shrink = |v: Rat, ceiling: &mut Option<Rat>| {
        *ceiling = Some(match ceiling.take() {
            None => v,
            Some(c) => min_rat(c, v),
        });
    };
    for t in dqs.quoted_maturities() {
        shrink(dqs.options[t][0].strike.clone(), &mut ceiling);
    }
    shrink(&dqs.underlying_bid / Rat::from_integer(2.into()), &mut ceiling);
    let ceiling = ceiling.ok_or(ScanError::NoAdmissibleEpsilon)?;
    if !ceiling.is_positive() {
        return Err(ScanError::NoAdmissibleEpsilon);
    }
    let mut trace: Vec<(Rat, bool)> = Vec::new();
    let run = |e: &Rat, trace: &mut Vec<(Rat, bool)>| -> bool {
        let ok = mode_consistent(dqs, mode, e, max_u, cap);
        trace.push((e.clone(), ok));
        ok
    };
    // coarse grid: zero plus a geometric ladder under the ceiling
    let mut grid = vec![Rat::zero()];
    let mut step = &ceiling * crate::num::ratio(1, 2);
    for _ in 0..24 {
        grid.push(step.clone());
        step = step / Rat::from_integer(2.into());
    }
    grid.sort();
    let mut passing: Option<usize> = None;
    for (i, e) in grid.iter().enumerate() {
        if run(e, &mut trace) {
            passing = Some(i);
            break;
        }
    }
    let first_pass = match passing {
        Some(i) => i,
        None => {
            return Err(ScanError::NoConsistentEpsilonInRange(crate::num::format_rat(&ceiling)))
        }
    };
    let mut hi = grid[first_pass].clone();
    if hi.is_zero() {
        return Ok(EpsilonScan { value: hi.clone(), trace, bracket: (hi.clone(), hi), ceiling });
    }
    let mut lo = if first_pass == 0 { Rat::zero() } else { grid[first_pass - 1].clone() };
    while &hi - &lo > *tol {
        let mid = (&hi + &lo) / Rat::from_integer(2.into());
        if run(&mid, &mut trace) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // confirm the reported bound on its own neighbourhood
    debug_assert!(mode_consistent(dqs, mode, &hi, max_u, cap));
    Ok(EpsilonScan { value: hi.clone(), trace, bracket: (lo, hi), ceiling })
}
