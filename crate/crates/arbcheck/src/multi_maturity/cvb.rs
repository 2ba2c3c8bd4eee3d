//! Calendar vertical baskets: chained long/short call positions across
//! maturities whose written side admits a two-scenario hedge.
//!
//! Index 0 at any maturity denotes the underlying leg with discounted strike
//! `eps`, ask `S0_ask` and bid `S0_bid - 2*eps`; a written underlying leg
//! bundles a `2*eps` bank deposit.

use crate::certificates::{DynamicRule, HedgeStep, OptionLeg, SemiStaticPortfolio};
use crate::num::Rat;
use crate::quotes::DiscountedQuoteSet;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BasketError {
    #[error("basket maturity must be between 1 and the horizon")]
    BadMaturity,
    #[error("leg index out of range at maturity {0}")]
    BadIndex(usize),
    #[error("sign vector inconsistent with the anchor levels at step {0}")]
    SignMismatch(usize),
    #[error("anchor does not match the pinned strike at step {0}")]
    AnchorMismatch(usize),
    #[error("held leg strike exceeds its cap at step {0}")]
    HeldLegTooHigh(usize),
}

/// Parameters (u, sigma, x, I, J): at each time t <= u the basket writes the
/// call with index `pinned[t-1]` whose discounted strike equals
/// `x_t + eps*sigma_t`, and from t >= 2 on it also holds the call with index
/// `held[t-2]` whose discounted strike is at most `x_{t-1} + eps*sigma_t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CalendarBasket {
    pub maturity: usize,
    pub epsilon: Rat,
    /// sigma_1..sigma_u, each +1 or -1; sigma_t = sgn(x_{t-1} - x_t) for t >= 2.
    pub signs: Vec<i8>,
    /// x_1..x_u.
    pub anchors: Vec<Rat>,
    /// j_1..j_u (0 = underlying leg).
    pub pinned: Vec<usize>,
    /// i_1..i_{u-1} (0 = underlying leg).
    pub held: Vec<usize>,
}

/// Discounted strike of quote index `idx` at maturity `t` (0 = underlying leg).
pub fn leg_strike(dqs: &DiscountedQuoteSet, eps: &Rat, t: usize, idx: usize) -> Option<Rat> {
    if idx == 0 {
        let _ = t;
        Some(eps.clone())
    } else {
        dqs.options.get(t)?.get(idx - 1).map(|q| q.strike.clone())
    }
}

/// Bid of quote index `idx` at maturity `t` under the underlying-leg convention.
pub fn leg_bid(dqs: &DiscountedQuoteSet, eps: &Rat, t: usize, idx: usize) -> Option<Rat> {
    if idx == 0 {
        Some(&dqs.underlying_bid - Rat::from_integer(2.into()) * eps)
    } else {
        dqs.options.get(t)?.get(idx - 1).map(|q| q.bid.clone())
    }
}

/// Ask of quote index `idx` at maturity `t` under the underlying-leg convention.
pub fn leg_ask(dqs: &DiscountedQuoteSet, eps: &Rat, t: usize, idx: usize) -> Option<Rat> {
    let _ = eps;
    if idx == 0 {
        Some(dqs.underlying_ask.clone())
    } else {
        dqs.options.get(t)?.get(idx - 1).map(|q| q.ask.clone())
    }
}

pub fn validate_basket(dqs: &DiscountedQuoteSet, b: &CalendarBasket) -> Result<(), BasketError> {
    let u = b.maturity;
    if u == 0 || u > dqs.horizon() {
        return Err(BasketError::BadMaturity);
    }
    if b.signs.len() != u || b.anchors.len() != u || b.pinned.len() != u || b.held.len() + 1 != u {
        return Err(BasketError::BadMaturity);
    }
    for t in 1..=u {
        let sigma = b.signs[t - 1];
        if sigma != 1 && sigma != -1 {
            return Err(BasketError::SignMismatch(t));
        }
        let kj = leg_strike(dqs, &b.epsilon, t, b.pinned[t - 1]).ok_or(BasketError::BadIndex(t))?;
        let sig = Rat::from_integer((sigma as i64).into());
        if kj != &b.anchors[t - 1] + &b.epsilon * &sig {
            return Err(BasketError::AnchorMismatch(t));
        }
        if t >= 2 {
            // sign consistency: sigma_t = sgn(x_{t-1} - x_t); a tie admits both signs
            let diff = &b.anchors[t - 2] - &b.anchors[t - 1];
            if diff.is_positive() && sigma != 1 || diff.is_negative() && sigma != -1 {
                return Err(BasketError::SignMismatch(t));
            }
            let ki = leg_strike(dqs, &b.epsilon, t, b.held[t - 2]).ok_or(BasketError::BadIndex(t))?;
            if ki > &b.anchors[t - 2] + &b.epsilon * sig {
                return Err(BasketError::HeldLegTooHigh(t));
            }
        }
    }
    Ok(())
}

/// Market ask and bid of the basket: each leg at its own side of the quote,
/// and a `2*eps` adjustment when the basket opens in the falling direction
/// (the written package then carries the extra deposit).
pub fn basket_prices(dqs: &DiscountedQuoteSet, b: &CalendarBasket) -> (Rat, Rat) {
    let eps = &b.epsilon;
    let two = Rat::from_integer(2.into());
    let mut ask = leg_ask(dqs, eps, 1, b.pinned[0]).expect("validated");
    let mut bid = leg_bid(dqs, eps, 1, b.pinned[0]).expect("validated");
    for t in 2..=b.maturity {
        ask += leg_ask(dqs, eps, t, b.pinned[t - 1]).expect("validated")
            - leg_bid(dqs, eps, t, b.held[t - 2]).expect("validated");
        bid += leg_bid(dqs, eps, t, b.pinned[t - 1]).expect("validated")
            - leg_ask(dqs, eps, t, b.held[t - 2]).expect("validated");
    }
    if b.signs[0] == -1 {
        ask -= &two * eps;
        bid -= &two * eps;
    }
    (ask, bid)
}

/// The written-basket replication: sell every pinned leg at its bid, buy every
/// held leg at its ask, and run the two-scenario hedge. Its initial value is
/// the negated basket bid; along every admissible path the book is either
/// flat with nonnegative bank or short one share with bank at least
/// `x_t = k(t, pinned_t) - eps*sigma_t`.
pub fn basket_strategy(dqs: &DiscountedQuoteSet, b: &CalendarBasket) -> SemiStaticPortfolio {
    let eps = &b.epsilon;
    let two = Rat::from_integer(2.into());
    let mut legs = Vec::new();
    let mut initial_bank = Rat::zero();
    if b.signs[0] == -1 {
        initial_bank += &two * eps;
    }
    let mut push_leg = |t: usize, idx: usize, qty: Rat| {
        let strike = if idx == 0 {
            eps * &dqs.bank[t]
        } else {
            &dqs.options[t][idx - 1].strike * &dqs.bank[t]
        };
        legs.push(OptionLeg { maturity: t, strike_index: idx, strike, qty });
    };
    push_leg(1, b.pinned[0], -Rat::one());
    for t in 2..=b.maturity {
        push_leg(t, b.pinned[t - 1], -Rat::one());
        push_leg(t, b.held[t - 2], Rat::one());
    }
    let steps = (1..=b.maturity)
        .map(|t| {
            let short_leg = b.pinned[t - 1];
            let long_leg = if t >= 2 { Some(b.held[t - 2]) } else { None };
            HedgeStep {
                t,
                sigma: b.signs[t - 1],
                anchor: b.anchors[t - 1].clone(),
                prev_anchor: if t >= 2 { Some(b.anchors[t - 2].clone()) } else { None },
                short_leg,
                long_leg,
                strike_short: leg_strike(dqs, eps, t, short_leg).expect("validated") * &dqs.bank[t],
                strike_long: long_leg
                    .map(|i| leg_strike(dqs, eps, t, i).expect("validated") * &dqs.bank[t]),
            }
        })
        .collect();
    SemiStaticPortfolio {
        initial_bank,
        initial_stock: Rat::zero(),
        legs,
        rule: DynamicRule::BasketHedge { steps, covers: Vec::new() },
    }
}

/// All baskets over the quoted strikes with maturity at most `max_u`,
/// enumerated depth-first; `cap` bounds the number of EMITTED baskets.
pub fn enumerate_baskets(
    dqs: &DiscountedQuoteSet,
    eps: &Rat,
    max_u: usize,
    cap: usize,
) -> Vec<CalendarBasket> {
    let mut out: Vec<CalendarBasket> = Vec::new();
    let horizon = dqs.horizon().min(max_u);
    #[allow(clippy::too_many_arguments)]
    fn extend(
        dqs: &DiscountedQuoteSet,
        eps: &Rat,
        horizon: usize,
        cap: usize,
        b: &mut CalendarBasket,
        out: &mut Vec<CalendarBasket>,
    ) {
        if out.len() >= cap {
            return;
        }
        let u = b.signs.len();
        if u >= 1 {
            let mut done = b.clone();
            done.maturity = u;
            done.held.truncate(u.saturating_sub(1));
            out.push(done);
        }
        if u == horizon {
            return;
        }
        let t = u + 1;
        let n_t = dqs.options[t].len();
        for sigma in [1i8, -1] {
            if t == 1 {
                for j in 0..=n_t {
                    let kj = leg_strike(dqs, eps, t, j).unwrap();
                    let sig = Rat::from_integer((sigma as i64).into());
                    b.signs.push(sigma);
                    b.anchors.push(&kj - eps * &sig);
                    b.pinned.push(j);
                    extend(dqs, eps, horizon, cap, b, out);
                    b.signs.pop();
                    b.anchors.pop();
                    b.pinned.pop();
                }
            } else {
                for j in 0..=n_t {
                    let kj = leg_strike(dqs, eps, t, j).unwrap();
                    let sig = Rat::from_integer((sigma as i64).into());
                    let x_t = &kj - eps * &sig;
                    let prev = b.anchors[u - 1].clone();
                    let diff = &prev - &x_t;
                    let sign_ok = if diff.is_positive() {
                        sigma == 1
                    } else if diff.is_negative() {
                        sigma == -1
                    } else {
                        true // tie: both signs admissible
                    };
                    if !sign_ok {
                        continue;
                    }
                    let cap_i = &prev + eps * &sig;
                    for i in 0..=n_t {
                        let ki = leg_strike(dqs, eps, t, i).unwrap();
                        if ki > cap_i {
                            continue;
                        }
                        b.signs.push(sigma);
                        b.anchors.push(x_t.clone());
                        b.pinned.push(j);
                        b.held.push(i);
                        extend(dqs, eps, horizon, cap, b, out);
                        b.signs.pop();
                        b.anchors.pop();
                        b.pinned.pop();
                        b.held.pop();
                    }
                }
            }
        }
    }
    let mut scratch = CalendarBasket {
        maturity: 0,
        epsilon: eps.clone(),
        signs: Vec::new(),
        anchors: Vec::new(),
        pinned: Vec::new(),
        held: Vec::new(),
    };
    extend(dqs, eps, horizon, cap, &mut scratch, &mut out);
    out
}
