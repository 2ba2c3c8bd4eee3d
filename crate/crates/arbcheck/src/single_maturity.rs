//! Single-maturity consistency: the four-condition battery over an augmented
//! strike strip, the trichotomy verdict, shadow-price construction, explicit
//! model witnesses, arbitrage certificates, and the degenerate-case price
//! perturbation that rules out model-independent arbitrage.
//!
//! A strip augments the quoted strikes with a synthetic entry at index 0
//! representing the underlying: discounted strike `eps`, bid `S0_bid - 2*eps`,
//! ask `S0_ask`. The unbounded analysis reuses the same battery on strips
//! without the synthetic entry.

use crate::certificates::{DynamicRule, OptionLeg, SemiStaticPortfolio};
use crate::measures::{CallFunction, DiscreteMeasure};
use crate::num::{max_rat, min_rat, Rat};
use crate::pwl::PwlFn;
use crate::quotes::{validate_for_epsilon, DiscountedQuoteSet, ValidationError};
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ShadowError {
    #[error("empty admissible band at strip index {0}")]
    InfeasibleBand(usize),
    #[error("strip has no strikes")]
    EmptyStrip,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CertificateError {
    #[error("degenerate violations admit only weak arbitrage")]
    NotMICertifiable,
    #[error("violation indices out of range")]
    BadWitness,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PerturbError {
    #[error("perturbation needs conditions (i)-(iii) to hold")]
    PreconditionViolated,
}

/// One maturity's strikes and price bands, optionally augmented with the
/// synthetic underlying entry at index 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AugmentedStrip {
    pub maturity: usize,
    /// B(t) of the maturity, for moving between discounted and cash strikes.
    pub bank_factor: Rat,
    pub epsilon: Rat,
    /// Discounted strikes, strictly increasing.
    pub strikes: Vec<Rat>,
    pub bids: Vec<Rat>,
    pub asks: Vec<Rat>,
    /// Whether index 0 is the synthetic underlying entry.
    pub has_pseudo: bool,
}

impl AugmentedStrip {
    pub fn len(&self) -> usize {
        self.strikes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strikes.is_empty()
    }

    /// Undiscounted strike of entry `i`.
    pub fn cash_strike(&self, i: usize) -> Rat {
        &self.strikes[i] * &self.bank_factor
    }

    pub fn underlying_bid(&self) -> Rat {
        // bids[0] stores S0_bid - 2*eps
        &self.bids[0] + Rat::from_integer(2.into()) * &self.epsilon
    }

    pub fn underlying_ask(&self) -> Rat {
        self.asks[0].clone()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConditionKind {
    /// Butterfly spreads must have nonnegative setup price.
    Butterfly,
    /// Call spreads must not fall faster than the strike gap.
    CallSpreadSlope,
    /// Call spreads must have nonnegative setup price.
    CallSpreadPrice,
    /// A zero-cost call spread forces both prices to zero.
    Degenerate,
}

impl ConditionKind {
    pub fn wire_id(&self) -> &'static str {
        match self {
            ConditionKind::Butterfly => "butterfly",
            ConditionKind::CallSpreadSlope => "callspread_slope",
            ConditionKind::CallSpreadPrice => "callspread_price",
            ConditionKind::Degenerate => "degenerate",
        }
    }

    /// Human label with the single-maturity condition number.
    pub fn label(&self) -> &'static str {
        match self {
            ConditionKind::Butterfly => "(3.1) butterfly price",
            ConditionKind::CallSpreadSlope => "(3.2) call-spread slope",
            ConditionKind::CallSpreadPrice => "(3.3) call-spread price",
            ConditionKind::Degenerate => "(3.4) degenerate call spread",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionViolation {
    pub kind: ConditionKind,
    /// Strip indices witnessing the violation: (i, j, l) for butterflies,
    /// (i, l) or (i, j) for the pair conditions.
    pub indices: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trichotomy {
    Consistent,
    WeakArbitrage,
    ModelIndependentArbitrage,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingleVerdict {
    pub tag: Trichotomy,
    pub violations: Vec<ConditionViolation>,
}

/// Builds the augmented strip for one maturity: synthetic entry at discounted
/// strike `eps` with band `[S0_bid - 2*eps, S0_ask]`, then the quoted strikes.
pub fn augment(
    dqs: &DiscountedQuoteSet,
    t: usize,
    eps: &Rat,
) -> Result<AugmentedStrip, ValidationError> {
    validate_for_epsilon(dqs, eps)?;
    let two = Rat::from_integer(2.into());
    let mut strikes = vec![eps.clone()];
    let mut bids = vec![&dqs.underlying_bid - &two * eps];
    let mut asks = vec![dqs.underlying_ask.clone()];
    for q in &dqs.options[t] {
        strikes.push(q.strike.clone());
        bids.push(q.bid.clone());
        asks.push(q.ask.clone());
    }
    Ok(AugmentedStrip {
        maturity: t,
        bank_factor: dqs.bank[t].clone(),
        epsilon: eps.clone(),
        strikes,
        bids,
        asks,
        has_pseudo: true,
    })
}

/// Strip over the quoted strikes only (no synthetic underlying entry); used
/// by the unbounded-spread analysis.
pub fn raw_strip(dqs: &DiscountedQuoteSet, t: usize) -> AugmentedStrip {
    AugmentedStrip {
        maturity: t,
        bank_factor: dqs.bank[t].clone(),
        epsilon: Rat::zero(),
        strikes: dqs.options[t].iter().map(|q| q.strike.clone()).collect(),
        bids: dqs.options[t].iter().map(|q| q.bid.clone()).collect(),
        asks: dqs.options[t].iter().map(|q| q.ask.clone()).collect(),
        has_pseudo: false,
    }
}

/// Evaluates the four no-arbitrage conditions over all index pairs/triples:
///
/// 1. butterflies priced nonnegatively: cross slopes are monotone,
/// 2. call spreads no cheaper than slope -1,
/// 3. call spreads priced nonnegatively: bids do not exceed lower asks,
/// 4. a zero-cost call spread forces both prices to zero.
///
/// The tag follows the trichotomy: failures of 1-3 admit model-independent
/// arbitrage, a failure of 4 alone only weak arbitrage.
pub fn check_conditions(strip: &AugmentedStrip) -> SingleVerdict {
    let n = strip.len();
    let k = &strip.strikes;
    let bid = &strip.bids;
    let ask = &strip.asks;
    let mut violations = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            // (3.3)
            if bid[j] > ask[i] {
                violations
                    .push(ConditionViolation { kind: ConditionKind::CallSpreadPrice, indices: vec![i, j] });
            }
            // (3.4)
            if bid[j] == ask[i] && !bid[j].is_zero() {
                violations
                    .push(ConditionViolation { kind: ConditionKind::Degenerate, indices: vec![i, j] });
            }
            // (3.2), written without division
            if &ask[j] - &bid[i] < -(&k[j] - &k[i]) {
                violations
                    .push(ConditionViolation { kind: ConditionKind::CallSpreadSlope, indices: vec![i, j] });
            }
            for l in (j + 1)..n {
                // (3.1): (ask_l - bid_j)/(k_l - k_j) >= (bid_j - ask_i)/(k_j - k_i)
                let lhs = (&ask[l] - &bid[j]) * (&k[j] - &k[i]);
                let rhs = (&bid[j] - &ask[i]) * (&k[l] - &k[j]);
                if lhs < rhs {
                    violations.push(ConditionViolation {
                        kind: ConditionKind::Butterfly,
                        indices: vec![i, j, l],
                    });
                }
            }
        }
    }
    let tag = if violations.is_empty() {
        Trichotomy::Consistent
    } else if violations.iter().all(|v| v.kind == ConditionKind::Degenerate) {
        Trichotomy::WeakArbitrage
    } else {
        Trichotomy::ModelIndependentArbitrage
    };
    SingleVerdict { tag, violations }
}

/// The virtual zero-price strike appended before the shadow-price induction:
/// beyond it every admissible call curve can reach zero without breaking any
/// condition.
pub fn virtual_strike(strip: &AugmentedStrip) -> Rat {
    let n = strip.len();
    let k = &strip.strikes;
    let bid = &strip.bids;
    let ask = &strip.asks;
    let mut best: Option<Rat> = None;
    for i in 0..n {
        for j in (i + 1)..n {
            if &ask[i] - &bid[j] > Rat::zero() {
                let cand = (&ask[i] * &k[j] - &bid[j] * &k[i]) / (&ask[i] - &bid[j]);
                best = Some(match best {
                    None => cand,
                    Some(b) => max_rat(b, cand),
                });
            }
        }
    }
    let fallback = (0..n).map(|j| &k[j] + &bid[j]).fold(k[n - 1].clone(), max_rat);
    match best {
        Some(b) => max_rat(b, fallback),
        None => fallback + Rat::one(),
    }
}

/// Line through (k_j, bid_j) and (k_l, ask_l) evaluated at x.
fn line_bid_ask(k: &[Rat], bid: &[Rat], ask: &[Rat], j: usize, l: usize, x: &Rat) -> Rat {
    &bid[j] + (&ask[l] - &bid[j]) * (x - &k[j]) / (&k[l] - &k[j])
}

/// Shadow prices: one admissible price inside every band such that their
/// linear interpolation is convex, decreasing and starts no steeper than -1.
/// The induction appends a virtual zero-price strike first, then takes the
/// midpoint of each admissible interval.
pub fn shadow_prices(strip: &AugmentedStrip) -> Result<Vec<Rat>, ShadowError> {
    shadow_prices_anchored(strip, None)
}

/// Same construction, but the first shadow price is the clamp of `preferred`
/// into its admissible interval instead of the midpoint. Pinning the first
/// value pins the mean of the witness curve. The virtual strike formula
/// yields the smallest admissible tail, which can bind the first band from
/// below; anchored runs therefore retry with geometrically larger tails until
/// the preferred value fits or stops improving.
pub fn shadow_prices_anchored(
    strip: &AugmentedStrip,
    preferred_first: Option<&Rat>,
) -> Result<Vec<Rat>, ShadowError> {
    let base = if strip.is_empty() { Rat::one() } else { virtual_strike(strip) };
    let preferred = match preferred_first {
        None => return shadow_prices_with_tail(strip, None, &base),
        Some(p) => p,
    };
    let mut best: Option<Vec<Rat>> = None;
    let mut tail = base;
    for _ in 0..6 {
        if let Ok(e) = shadow_prices_with_tail(strip, Some(preferred), &tail) {
            if e[0] == *preferred {
                return Ok(e);
            }
            let better = match &best {
                None => true,
                Some(b) => (&e[0] - preferred).abs() < (&b[0] - preferred).abs(),
            };
            if better {
                best = Some(e);
            }
        }
        tail = tail * Rat::from_integer(4.into()) + Rat::one();
    }
    best.ok_or(ShadowError::InfeasibleBand(0))
}

fn shadow_prices_with_tail(
    strip: &AugmentedStrip,
    preferred_first: Option<&Rat>,
    tail_strike: &Rat,
) -> Result<Vec<Rat>, ShadowError> {
    if strip.is_empty() {
        return Err(ShadowError::EmptyStrip);
    }
    let n = strip.len();
    let mut k = strip.strikes.clone();
    let mut bid = strip.bids.clone();
    let mut ask = strip.asks.clone();
    k.push(max_rat(tail_strike.clone(), virtual_strike(strip)));
    bid.push(Rat::zero());
    ask.push(Rat::zero());
    let m = n + 1;
    let mut e: Vec<Rat> = Vec::with_capacity(m);
    for s in 0..m {
        // lower bound: lines through later (bid, ask) pairs, and the slope
        // extrapolation of the two previous points (slope -1 to start)
        let mut lo: Option<Rat> = None;
        let raise = |v: Rat, lo: &mut Option<Rat>| {
            *lo = Some(match lo.take() {
                None => v,
                Some(b) => max_rat(b, v),
            });
        };
        for j in s..m {
            for l in (j + 1)..m {
                raise(line_bid_ask(&k, &bid, &ask, j, l, &k[s]), &mut lo);
            }
        }
        match s {
            0 => {}
            1 => raise(&e[0] - (&k[1] - &k[0]), &mut lo),
            _ => {
                let slope = (&e[s - 1] - &e[s - 2]) / (&k[s - 1] - &k[s - 2]);
                raise(&e[s - 1] + slope * (&k[s] - &k[s - 1]), &mut lo);
            }
        }
        // upper bound: lines from the previous point to later asks, or the
        // slope cap k_i + ask_i - k_s at the start
        let mut hi: Option<Rat> = None;
        let cut = |v: Rat, hi: &mut Option<Rat>| {
            *hi = Some(match hi.take() {
                None => v,
                Some(b) => min_rat(b, v),
            });
        };
        if s == 0 {
            for i in 0..m {
                cut(&k[i] + &ask[i] - &k[0], &mut hi);
            }
        } else {
            for i in s..m {
                let g = &e[s - 1] + (&ask[i] - &e[s - 1]) * (&k[s] - &k[s - 1]) / (&k[i] - &k[s - 1]);
                cut(g, &mut hi);
            }
        }
        let lo = lo.unwrap_or_else(Rat::zero);
        let hi = hi.expect("upper bound set");
        if lo > hi {
            return Err(ShadowError::InfeasibleBand(s));
        }
        let pick = match (s, preferred_first) {
            (0, Some(p)) => min_rat(max_rat(p.clone(), lo), hi),
            _ => (lo + hi) / Rat::from_integer(2.into()),
        };
        e.push(pick);
    }
    e.truncate(n);
    Ok(e)
}

/// Extends the interpolation of `(k_s, e_s)` to a full call function: slope -1
/// to the left, the chain itself, then (if the last value is positive) the
/// final segment's slope continued until it reaches zero.
pub fn extend_to_call_function(points: &[(Rat, Rat)]) -> Result<CallFunction, ShadowError> {
    assert!(!points.is_empty());
    let mut pts: Vec<(Rat, Rat)> = points.to_vec();
    let last = pts.last().unwrap().clone();
    if !last.1.is_zero() {
        let slope = if pts.len() == 1 {
            -Rat::one()
        } else {
            let prev = &pts[pts.len() - 2];
            (&last.1 - &prev.1) / (&last.0 - &prev.0)
        };
        if !slope.is_negative() {
            return Err(ShadowError::InfeasibleBand(pts.len() - 1));
        }
        let zero_at = &last.0 - &last.1 / slope.clone();
        pts.push((zero_at, Rat::zero()));
    }
    CallFunction::from_pwl(PwlFn::new(pts, -Rat::one(), Rat::zero()))
        .map_err(|_| ShadowError::InfeasibleBand(0))
}

/// Builds the single-maturity witness pair from shadow prices: the reference
/// law `mu` (call curve through the shadow prices, supported in
/// `[eps, infinity)`), and the shadow law `nu = mu` translated just enough to
/// move its mean into the quoted underlying band (a translation of at most
/// `eps`, so the two laws stay within distance `eps`).
pub fn build_single_model(
    strip: &AugmentedStrip,
    e: &[Rat],
) -> Result<(DiscreteMeasure, DiscreteMeasure), ShadowError> {
    assert!(strip.has_pseudo, "model construction needs the underlying entry");
    let pts: Vec<(Rat, Rat)> = strip.strikes.iter().cloned().zip(e.iter().cloned()).collect();
    let cf = extend_to_call_function(&pts)?;
    let mut mu = cf.measure();
    let mean = mu.mean();
    let lo = strip.underlying_bid();
    let hi = strip.underlying_ask();
    let delta = if mean < lo {
        &lo - &mean
    } else if mean > hi {
        &hi - &mean
    } else {
        Rat::zero()
    };
    debug_assert!(delta.abs() <= strip.epsilon);
    // an atom sitting exactly at the first strip level can land a price
    // process at zero (directly when eps = 0, or through a full-length
    // shift); sliding the first kink up the slope -1 line keeps the mean and
    // every strike value while lifting the support strictly above zero
    if mu.min_support() + crate::num::min_rat(delta.clone(), Rat::zero()) <= Rat::zero() {
        let kinks = cf.pwl().pts.clone();
        let first = kinks[0].0.clone();
        let first_val = kinks[0].1.clone();
        let next =
            kinks.get(1).map(|(x, _)| x.clone()).unwrap_or_else(|| &first + Rat::one());
        let mut gap = (&next - &first) / Rat::from_integer(2.into());
        for _ in 0..40 {
            let mut lifted = kinks.clone();
            lifted[0] = (&first + &gap, &first_val - &gap);
            if let Ok(cf) = CallFunction::from_pwl(PwlFn::new(lifted, -Rat::one(), Rat::zero())) {
                let cand = cf.measure();
                if cand.min_support() + crate::num::min_rat(delta.clone(), Rat::zero())
                    > Rat::zero()
                {
                    mu = cand;
                    break;
                }
            }
            gap = gap / Rat::from_integer(2.into());
        }
    }
    let nu = mu.shift(&delta);
    Ok((mu, nu))
}

/// Model-independent arbitrage certificate for a violated condition.
///
/// Butterfly: long the outer strikes with weights 1/(k_j - k_i) and
/// 1/(k_l - k_j), short the middle. Call-spread slope: long the upper strike,
/// short the lower, deposit the strike gap. Call-spread price: long the lower
/// strike, short the upper. Index 0 legs become underlying positions that are
/// liquidated at the maturity.
pub fn arbitrage_certificate(
    strip: &AugmentedStrip,
    violation: &ConditionViolation,
) -> Result<SemiStaticPortfolio, CertificateError> {
    let t = strip.maturity;
    let k = &strip.strikes;
    let leg = |i: usize, qty: Rat| OptionLeg {
        maturity: t,
        strike_index: i,
        strike: strip.cash_strike(i),
        qty,
    };
    let needs_liquidation = |indices: &[usize]| indices.contains(&0);
    match violation.kind {
        ConditionKind::Degenerate => Err(CertificateError::NotMICertifiable),
        ConditionKind::Butterfly => {
            let [i, j, l]: [usize; 3] =
                violation.indices.clone().try_into().map_err(|_| CertificateError::BadWitness)?;
            let wi = Rat::one() / (&k[j] - &k[i]);
            let wl = Rat::one() / (&k[l] - &k[j]);
            let wj = -(&wi + &wl);
            let legs = vec![leg(i, wi), leg(j, wj), leg(l, wl)];
            let rule = if needs_liquidation(&violation.indices) {
                DynamicRule::LiquidateAt(t)
            } else {
                DynamicRule::Static
            };
            Ok(SemiStaticPortfolio {
                initial_bank: Rat::zero(),
                initial_stock: Rat::zero(),
                legs,
                rule,
            })
        }
        ConditionKind::CallSpreadSlope => {
            let [i, l]: [usize; 2] =
                violation.indices.clone().try_into().map_err(|_| CertificateError::BadWitness)?;
            if i == 0 && strip.has_pseudo {
                // long the upper strike, sell the underlying outright, and
                // deposit k_l + eps
                Ok(SemiStaticPortfolio {
                    initial_bank: &k[l] + &strip.epsilon,
                    initial_stock: -Rat::one(),
                    legs: vec![leg(l, Rat::one())],
                    rule: DynamicRule::LiquidateAt(t),
                })
            } else {
                Ok(SemiStaticPortfolio {
                    initial_bank: &k[l] - &k[i],
                    initial_stock: Rat::zero(),
                    legs: vec![leg(i, -Rat::one()), leg(l, Rat::one())],
                    rule: DynamicRule::Static,
                })
            }
        }
        ConditionKind::CallSpreadPrice => {
            let [i, j]: [usize; 2] =
                violation.indices.clone().try_into().map_err(|_| CertificateError::BadWitness)?;
            if i == 0 && strip.has_pseudo {
                // buy the underlying outright, write the richer call
                Ok(SemiStaticPortfolio {
                    initial_bank: Rat::zero(),
                    initial_stock: Rat::one(),
                    legs: vec![leg(j, -Rat::one())],
                    rule: DynamicRule::LiquidateAt(t),
                })
            } else {
                Ok(SemiStaticPortfolio {
                    initial_bank: Rat::zero(),
                    initial_stock: Rat::zero(),
                    legs: vec![leg(i, Rat::one()), leg(j, -Rat::one())],
                    rule: DynamicRule::Static,
                })
            }
        }
    }
}

/// Band- and monotonicity-aware shadow chain without the virtual strike,
/// for strips whose only failures are degenerate: the chain stays inside the
/// bands, is convex and non-increasing with first slope at least -1, and goes
/// flat exactly where a zero-cost call spread pins it. A greedy midpoint pass
/// runs first; when its local bounds collide the chain is produced by exact
/// linear feasibility over the same constraints.
pub fn degenerate_shadow_prices(strip: &AugmentedStrip) -> Result<Vec<Rat>, ShadowError> {
    let n = strip.len();
    if n == 0 {
        return Err(ShadowError::EmptyStrip);
    }
    if let Ok(e) = degenerate_chain_greedy(strip) {
        return Ok(e);
    }
    degenerate_chain_lp(strip)
}

fn degenerate_chain_greedy(strip: &AugmentedStrip) -> Result<Vec<Rat>, ShadowError> {
    let n = strip.len();
    let k = &strip.strikes;
    let bid = &strip.bids;
    let ask = &strip.asks;
    let mut e: Vec<Rat> = Vec::with_capacity(n);
    for s in 0..n {
        // floors: own bid, every later bid (the chain must stay above them on
        // its way down), supporting bid-ask lines, and the convex extrapolation
        let mut lo = (s..n).map(|j| bid[j].clone()).fold(Rat::zero(), max_rat);
        for j in s..n {
            for l in (j + 1)..n {
                lo = max_rat(lo, line_bid_ask(k, bid, ask, j, l, &k[s]));
            }
        }
        match s {
            0 => {}
            1 => lo = max_rat(lo, &e[0] - (&k[1] - &k[0])),
            _ => {
                let slope = (&e[s - 1] - &e[s - 2]) / (&k[s - 1] - &k[s - 2]);
                lo = max_rat(lo, &e[s - 1] + slope * (&k[s] - &k[s - 1]));
            }
        }
        let mut hi = ask[s].clone();
        if s > 0 {
            hi = min_rat(hi, e[s - 1].clone());
            for i in s..n {
                let g = &e[s - 1] + (&ask[i] - &e[s - 1]) * (&k[s] - &k[s - 1]) / (&k[i] - &k[s - 1]);
                hi = min_rat(hi, g);
            }
        } else {
            for i in 0..n {
                hi = min_rat(hi, &k[i] + &ask[i] - &k[0]);
            }
        }
        if lo > hi {
            return Err(ShadowError::InfeasibleBand(s));
        }
        e.push((lo + hi) / Rat::from_integer(2.into()));
    }
    Ok(e)
}

fn degenerate_chain_lp(strip: &AugmentedStrip) -> Result<Vec<Rat>, ShadowError> {
    let n = strip.len();
    let k = &strip.strikes;
    let mut p = crate::linfeas::FeasibilityProblem::new(n);
    for s in 0..n {
        p.ge(vec![(s, Rat::one())], strip.bids[s].clone());
        p.le(vec![(s, Rat::one())], strip.asks[s].clone());
        if s + 1 < n {
            // non-increasing
            p.le(vec![(s + 1, Rat::one()), (s, -Rat::one())], Rat::zero());
        }
    }
    // first slope at least -1
    if n >= 2 {
        p.ge(vec![(1, Rat::one()), (0, -Rat::one())], -(&k[1] - &k[0]));
    }
    // convexity: (e_{s+1} - e_s)(k_s - k_{s-1}) >= (e_s - e_{s-1})(k_{s+1} - k_s)
    for s in 1..n.saturating_sub(1) {
        let left = &k[s] - &k[s - 1];
        let right = &k[s + 1] - &k[s];
        p.ge(
            vec![
                (s + 1, left.clone()),
                (s, -(&left + &right)),
                (s - 1, right.clone()),
            ],
            Rat::zero(),
        );
    }
    p.solve().ok_or(ShadowError::InfeasibleBand(0))
}

/// Shifts the shadow prices beyond the last slope-(-1) prefix down by a
/// margin-capped amount so that every zero-cost call spread becomes strictly
/// positive while convexity, the slope floor and nonnegativity survive. The
/// returned chain, read as bid = ask prices, passes all four conditions.
pub fn perturbed_prices(
    strip: &AugmentedStrip,
    e: &[Rat],
    margin: &Rat,
) -> Result<Vec<Rat>, PerturbError> {
    let n = e.len();
    assert_eq!(n, strip.len());
    if margin.is_negative() {
        return Err(PerturbError::PreconditionViolated);
    }
    let k = &strip.strikes;
    let anchor = &e[0] + &k[0];
    let l0 = (0..n).filter(|&l| &e[l] + &k[l] == anchor).max().unwrap();
    if l0 + 1 == n {
        return Ok(e.to_vec());
    }
    let denom: Rat = (l0..n).map(|s| &k[s] - &k[l0]).sum();
    let slope_room =
        (&e[l0 + 1] + &k[l0 + 1] - &e[l0] - &k[l0]) * &denom / (&k[l0 + 1] - &k[l0]);
    let tail_room = &e[n - 1] * &denom / (&k[n - 1] - &k[l0]);
    let z = min_rat(margin.clone(), min_rat(slope_room, tail_room));
    let mut out = e.to_vec();
    for l in (l0 + 1)..n {
        out[l] = &e[l] - &z * (&k[l] - &k[l0]) / &denom;
    }
    Ok(out)
}

/// Reads a shadow chain as a frictionless strip (bid = ask everywhere).
pub fn frictionless_strip(strip: &AugmentedStrip, prices: &[Rat]) -> AugmentedStrip {
    AugmentedStrip {
        maturity: strip.maturity,
        bank_factor: strip.bank_factor.clone(),
        epsilon: strip.epsilon.clone(),
        strikes: strip.strikes.clone(),
        bids: prices.to_vec(),
        asks: prices.to_vec(),
        has_pseudo: false,
    }
}

/// Mean of the call curve through the shadow prices (value at zero of the
/// extension), which the witness construction realizes exactly.
pub fn witness_mean(strip: &AugmentedStrip, e: &[Rat]) -> Rat {
    &e[0] + &strip.strikes[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{call_function, winf_distance};
    use crate::num::{rat, ratio};
    use crate::quotes::{discount, parse_quotes};

    pub(crate) fn motivating_dqs(c: i64) -> DiscountedQuoteSet {
        let doc = format!(
            r#"{{"bank": [1, 1, 1],
                "underlying": {{"bid": 2, "ask": 2}},
                "options": [
                  {{"t": 1, "strike": 1, "bid": {c1}, "ask": {c1}}},
                  {{"t": 2, "strike": 1, "bid": 1, "ask": 1}}
                ]}}"#,
            c1 = c + 1
        );
        discount(&parse_quotes(&doc).unwrap())
    }

    /// Rising-ask strip: bid/ask (1.5, 6) and (2, 7) at strikes 1, 2 with the
    /// underlying at 4; consistent even though asks increase with strike.
    pub(crate) fn rising_ask_dqs() -> DiscountedQuoteSet {
        let doc = r#"{"bank": [1, 1],
            "underlying": {"bid": 4, "ask": 4},
            "options": [
              {"t": 1, "strike": 1, "bid": 1.5, "ask": 6},
              {"t": 1, "strike": 2, "bid": 2, "ask": 7}
            ]}"#;
        discount(&parse_quotes(doc).unwrap())
    }

    #[test]
    fn augment_examples() {
        let strip = augment(&motivating_dqs(1), 1, &rat(0)).unwrap();
        assert_eq!(strip.strikes, vec![rat(0), rat(1)]);
        assert_eq!(strip.bids, vec![rat(2), rat(2)]);
        assert_eq!(strip.asks, vec![rat(2), rat(2)]);

        let strip = augment(&rising_ask_dqs(), 1, &rat(0)).unwrap();
        assert_eq!(strip.strikes, vec![rat(0), rat(1), rat(2)]);
        assert_eq!(strip.bids, vec![rat(4), ratio(3, 2), rat(2)]);
        assert_eq!(strip.asks, vec![rat(4), rat(6), rat(7)]);

        // eps = 1 with the underlying quoted at 4
        let doc = r#"{"bank": [1, 1],
            "underlying": {"bid": 4, "ask": 4},
            "options": [{"t": 1, "strike": 3, "bid": 1, "ask": 2}]}"#;
        let dqs = discount(&parse_quotes(doc).unwrap());
        let strip = augment(&dqs, 1, &rat(1)).unwrap();
        assert_eq!(strip.strikes[0], rat(1));
        assert_eq!(strip.bids[0], rat(2));
        assert_eq!(strip.asks[0], rat(4));
    }

    #[test]
    fn conditions_on_rising_ask_strip() {
        let strip = augment(&rising_ask_dqs(), 1, &rat(0)).unwrap();
        let verdict = check_conditions(&strip);
        assert_eq!(verdict.tag, Trichotomy::Consistent);
        assert!(verdict.violations.is_empty());
    }

    #[test]
    fn conditions_on_degenerate_strip() {
        // near call quoted at the underlying ask: zero-cost call spread at
        // positive price, weak arbitrage only
        let strip = augment(&motivating_dqs(1), 1, &rat(0)).unwrap();
        let verdict = check_conditions(&strip);
        assert_eq!(verdict.tag, Trichotomy::WeakArbitrage);
        assert_eq!(verdict.violations.len(), 1);
        assert_eq!(verdict.violations[0].kind, ConditionKind::Degenerate);
        assert_eq!(verdict.violations[0].indices, vec![0, 1]);
    }

    #[test]
    fn conditions_on_increasing_frictionless_prices() {
        // frictionless prices 1 then 2 on rising strikes: a call spread with
        // negative setup price
        let doc = r#"{"bank": [1, 1],
            "underlying": {"bid": 5, "ask": 5},
            "options": [
              {"t": 1, "strike": 1, "bid": 1, "ask": 1},
              {"t": 1, "strike": 2, "bid": 2, "ask": 2}
            ]}"#;
        let dqs = discount(&parse_quotes(doc).unwrap());
        let verdict = check_conditions(&augment(&dqs, 1, &rat(0)).unwrap());
        assert_eq!(verdict.tag, Trichotomy::ModelIndependentArbitrage);
        assert!(verdict
            .violations
            .iter()
            .any(|v| v.kind == ConditionKind::CallSpreadPrice && v.indices == vec![1, 2]));
    }

    #[test]
    fn shadow_prices_respect_the_band_bounds() {
        // direct evaluation of the band bounds on the rising-ask strip; the
        // chain (4, 3.5, 3.25) is one admissible selection
        let strip = augment(&rising_ask_dqs(), 1, &rat(0)).unwrap();
        let candidate = vec![rat(4), ratio(7, 2), ratio(13, 4)];
        let k = &strip.strikes;
        let bid = &strip.bids;
        let ask = &strip.asks;
        // e0: between every bid-ask line at k0 and the slope cap
        for j in 0..3 {
            for l in (j + 1)..3 {
                assert!(candidate[0] >= line_bid_ask(k, bid, ask, j, l, &k[0]));
            }
        }
        for i in 0..3 {
            assert!(candidate[0] <= &k[i] + &ask[i] - &k[0]);
        }
        // e1, e2: band membership, convexity, slope floor
        for s in 1..3 {
            assert!(candidate[s] >= bid[s] && candidate[s] <= ask[s]);
        }
        assert!(&candidate[1] - &candidate[0] >= -(&k[1] - &k[0]));
        let s1 = &candidate[1] - &candidate[0];
        let s2 = &candidate[2] - &candidate[1];
        assert!(s2 >= s1);
    }

    #[test]
    fn shadow_prices_forced_on_frictionless_strips() {
        let doc = r#"{"bank": [1, 1],
            "underlying": {"bid": 4, "ask": 4},
            "options": [
              {"t": 1, "strike": 2, "bid": 2.5, "ask": 2.5},
              {"t": 1, "strike": 4, "bid": 1.5, "ask": 1.5}
            ]}"#;
        let dqs = discount(&parse_quotes(doc).unwrap());
        let strip = augment(&dqs, 1, &rat(0)).unwrap();
        assert_eq!(check_conditions(&strip).tag, Trichotomy::Consistent);
        let e = shadow_prices(&strip).unwrap();
        assert_eq!(e[1], ratio(5, 2));
        assert_eq!(e[2], ratio(3, 2));
    }

    #[test]
    fn shadow_prices_midpoint_in_wide_band() {
        let doc = r#"{"bank": [1, 1],
            "underlying": {"bid": 4, "ask": 4},
            "options": [{"t": 1, "strike": 2, "bid": 1, "ask": 3}]}"#;
        let dqs = discount(&parse_quotes(doc).unwrap());
        let strip = augment(&dqs, 1, &rat(0)).unwrap();
        let e = shadow_prices(&strip).unwrap();
        assert!(e[1] >= rat(1) && e[1] <= rat(3));
        // chain convex decreasing with slope >= -1
        assert!(&e[1] - &e[0] >= -(&strip.strikes[1] - &strip.strikes[0]));
    }

    #[test]
    fn model_witness_for_rising_ask_strip() {
        let strip = augment(&rising_ask_dqs(), 1, &rat(0)).unwrap();
        let e = shadow_prices(&strip).unwrap();
        let (mu, nu) = build_single_model(&strip, &e).unwrap();
        assert_eq!(mu.mean(), rat(4));
        assert_eq!(nu, mu); // zero spread bound: no shift
        let r = call_function(&mu);
        assert!(r.eval(&rat(1)) >= ratio(3, 2) && r.eval(&rat(1)) <= rat(6));
        assert!(r.eval(&rat(2)) >= rat(2) && r.eval(&rat(2)) <= rat(7));
        assert!(mu.min_support() >= &rat(0));
    }

    #[test]
    fn extension_recovers_the_mean_at_zero() {
        // a convex decreasing chain with positive tail value: the extension
        // continues the last slope down to zero, and the value at zero is the
        // mean of the associated law
        let pts = vec![(rat(0), rat(4)), (rat(1), ratio(7, 2)), (rat(2), ratio(13, 4))];
        let cf = extend_to_call_function(&pts).unwrap();
        let mu = cf.measure();
        assert_eq!(cf.eval(&rat(0)), rat(4));
        assert_eq!(mu.mean(), rat(4));
        // the tail slope -1/4 reaches zero at 15
        assert_eq!(mu.max_support(), &rat(15));
        // chains that end flat at a positive value have no admissible tail
        let flat = vec![(rat(0), rat(2)), (rat(1), rat(2))];
        assert!(extend_to_call_function(&flat).is_err());
    }

    #[test]
    fn zero_bound_witness_never_shifts() {
        let strip = augment(&rising_ask_dqs(), 1, &rat(0)).unwrap();
        let e = shadow_prices(&strip).unwrap();
        let (mu, nu) = build_single_model(&strip, &e).unwrap();
        assert_eq!(mu, nu);
    }

    #[test]
    fn model_witness_shift_cases() {
        // eps > 0 with the curve mean below the quoted band: shift up by the gap
        let doc = r#"{"bank": [1, 1],
            "underlying": {"bid": 10, "ask": 10},
            "options": [{"t": 1, "strike": 8, "bid": 1.5, "ask": 1.5}]}"#;
        let dqs = discount(&parse_quotes(doc).unwrap());
        let eps = rat(1);
        let strip = augment(&dqs, 1, &eps).unwrap();
        let e = shadow_prices(&strip).unwrap();
        let (mu, nu) = build_single_model(&strip, &e).unwrap();
        assert!(winf_distance(&mu, &nu) <= eps);
        assert!(nu.mean() >= rat(10) && nu.mean() <= rat(10));
        assert!(mu.min_support() >= &eps);
        let r = call_function(&mu);
        assert_eq!(r.eval(&rat(8)), ratio(3, 2));
    }

    #[test]
    fn certificates_for_each_condition() {
        // call-spread price violation away from the underlying
        let strip = AugmentedStrip {
            maturity: 1,
            bank_factor: rat(1),
            epsilon: rat(0),
            strikes: vec![rat(0), rat(1), rat(2)],
            bids: vec![rat(5), rat(1), rat(2)],
            asks: vec![rat(5), rat(1), rat(2)],
            has_pseudo: true,
        };
        let v = ConditionViolation { kind: ConditionKind::CallSpreadPrice, indices: vec![1, 2] };
        let p = arbitrage_certificate(&strip, &v).unwrap();
        assert_eq!(p.legs.len(), 2);
        assert_eq!(p.legs[0].qty, rat(1));
        assert_eq!(p.legs[1].qty, rat(-1));

        // slope violation against the underlying: long call, short stock, deposit
        let v = ConditionViolation { kind: ConditionKind::CallSpreadSlope, indices: vec![0, 2] };
        let p = arbitrage_certificate(&strip, &v).unwrap();
        assert_eq!(p.initial_stock, rat(-1));
        assert_eq!(p.initial_bank, rat(2));

        // interior butterfly weights
        let v = ConditionViolation { kind: ConditionKind::Butterfly, indices: vec![0, 1, 2] };
        let p = arbitrage_certificate(&strip, &v).unwrap();
        assert_eq!(p.legs[0].qty, rat(1));
        assert_eq!(p.legs[2].qty, rat(1));
        assert_eq!(p.legs[1].qty, rat(-2));

        let v = ConditionViolation { kind: ConditionKind::Degenerate, indices: vec![0, 1] };
        assert_eq!(arbitrage_certificate(&strip, &v), Err(CertificateError::NotMICertifiable));
    }

    #[test]
    fn perturbation_fixes_degenerate_strip() {
        let strip = augment(&motivating_dqs(1), 1, &rat(0)).unwrap();
        assert_eq!(check_conditions(&strip).tag, Trichotomy::WeakArbitrage);
        let e = degenerate_shadow_prices(&strip).unwrap();
        assert_eq!(e, vec![rat(2), rat(2)]);
        let perturbed = perturbed_prices(&strip, &e, &rat(1)).unwrap();
        let verdict = check_conditions(&frictionless_strip(&strip, &perturbed));
        assert_eq!(verdict.tag, Trichotomy::Consistent);
        assert_eq!(perturbed, vec![rat(2), rat(1)]);
    }

    #[test]
    fn perturbation_margin_to_zero() {
        let strip = augment(&motivating_dqs(1), 1, &rat(0)).unwrap();
        let e = degenerate_shadow_prices(&strip).unwrap();
        let tiny = ratio(1, 1_000_000);
        let perturbed = perturbed_prices(&strip, &e, &tiny).unwrap();
        assert!((&perturbed[1] - &e[1]).abs() <= tiny);
    }

    #[test]
    fn perturbation_keeps_structural_bounds() {
        // wider degenerate strip: ask at 0 equals bid at 2
        let doc = r#"{"bank": [1, 1],
            "underlying": {"bid": 3, "ask": 3},
            "options": [
              {"t": 1, "strike": 1, "bid": 2.5, "ask": 3.5},
              {"t": 1, "strike": 2, "bid": 3, "ask": 4}
            ]}"#;
        let dqs = discount(&parse_quotes(doc).unwrap());
        let strip = augment(&dqs, 1, &rat(0)).unwrap();
        let verdict = check_conditions(&strip);
        assert_eq!(verdict.tag, Trichotomy::WeakArbitrage);
        let e = degenerate_shadow_prices(&strip).unwrap();
        let perturbed = perturbed_prices(&strip, &e, &rat(1)).unwrap();
        let fr = frictionless_strip(&strip, &perturbed);
        assert_eq!(check_conditions(&fr).tag, Trichotomy::Consistent);
        // the two structural guards of the shift amount
        assert!(perturbed.last().unwrap() >= &rat(0));
        let k = &strip.strikes;
        let l0 = 0;
        assert!(&perturbed[l0 + 1] - &perturbed[l0] >= -(&k[l0 + 1] - &k[l0]));
    }
}
