//! Necessary cross-maturity conditions: every written calendar basket,
//! compared against later quotes, must price like a call with strike
//! `x_s = k(s, j) - eps*sigma_s` settling at `k + eps`. The conditions are
//! monotone in the basket bid, so each terminal state `(s, sigma, j)` only
//! needs its maximal-bid chain, found by dynamic programming over
//! `(maturity, pinned index, sign)` states.

use super::cvb::{leg_ask, leg_bid, leg_strike, CalendarBasket};
use crate::num::Rat;
use crate::quotes::DiscountedQuoteSet;
use num_traits::{Signed, Zero};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BudgetError {
    #[error("basket state space exceeds the enumeration cap ({0})")]
    CombinatorialBudgetExceeded(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NecessaryCondition {
    SlopeComparison,
    SlopeFloor,
    Nonnegativity,
    DegenerateSpread,
}

impl NecessaryCondition {
    pub fn wire_id(&self) -> &'static str {
        match self {
            NecessaryCondition::SlopeComparison => "4.3-i",
            NecessaryCondition::SlopeFloor => "4.3-ii",
            NecessaryCondition::Nonnegativity => "4.3-iii",
            NecessaryCondition::DegenerateSpread => "4.3-iv",
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            NecessaryCondition::SlopeComparison => "(4.3-i) calendar butterfly slope",
            NecessaryCondition::SlopeFloor => "(4.3-ii) calendar call-spread slope",
            NecessaryCondition::Nonnegativity => "(4.3-iii) calendar call-spread price",
            NecessaryCondition::DegenerateSpread => "(4.3-iv) degenerate calendar spread",
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, NecessaryCondition::DegenerateSpread)
    }
}

#[derive(Clone, Debug)]
pub struct NecessaryViolation {
    pub condition: NecessaryCondition,
    /// The maximal-bid basket witnessing the violation.
    pub basket: CalendarBasket,
    pub basket_bid: Rat,
    /// The quote(s) the basket is compared against: (maturity, index).
    pub versus: Vec<(usize, usize)>,
    /// Violation margin (how far the inequality fails), for reporting.
    pub margin: Rat,
}

type State = (usize, usize, i8); // (maturity, pinned index, sign)

struct DpEntry {
    bid: Rat,
    anchor: Rat,
    // predecessor state and the held index chosen on the incoming edge
    back: Option<(State, usize)>,
}

/// Maximal-bid chains for every terminal state, with back-pointers for
/// witness reconstruction. Errors out when the state/edge budget exceeds
/// `cap`.
fn best_chains(
    dqs: &DiscountedQuoteSet,
    eps: &Rat,
    max_u: usize,
    cap: usize,
) -> Result<HashMap<State, DpEntry>, BudgetError> {
    let horizon = dqs.horizon().min(max_u);
    let mut table: HashMap<State, DpEntry> = HashMap::new();
    let mut work = 0usize;
    let bump = |work: &mut usize| -> Result<(), BudgetError> {
        *work += 1;
        if *work > cap {
            Err(BudgetError::CombinatorialBudgetExceeded(cap))
        } else {
            Ok(())
        }
    };
    for t in 1..=horizon {
        let n_t = dqs.options[t].len();
        for j in 0..=n_t {
            let kj = leg_strike(dqs, eps, t, j).unwrap();
            let bid_j = leg_bid(dqs, eps, t, j).unwrap();
            for sigma in [1i8, -1] {
                let sig = Rat::from_integer((sigma as i64).into());
                let x_t = &kj - eps * &sig;
                if t == 1 {
                    bump(&mut work)?;
                    let mut bid = bid_j.clone();
                    if sigma == -1 {
                        bid -= Rat::from_integer(2.into()) * eps;
                    }
                    let entry = DpEntry { bid, anchor: x_t.clone(), back: None };
                    match table.get(&(1, j, sigma)) {
                        Some(prev) if prev.bid >= entry.bid => {}
                        _ => {
                            table.insert((1, j, sigma), entry);
                        }
                    }
                } else {
                    // best predecessor: maximize prev.bid - ask(held) over
                    // sign-consistent predecessors and admissible held legs
                    let mut best: Option<DpEntry> = None;
                    let prev_states: Vec<(State, Rat, Rat)> = table
                        .iter()
                        .filter(|((pt, _, _), _)| *pt + 1 == t)
                        .map(|(s, e)| (*s, e.bid.clone(), e.anchor.clone()))
                        .collect();
                    for (prev_state, prev_bid, prev_anchor) in prev_states {
                        let diff = &prev_anchor - &x_t;
                        let sign_ok = if diff.is_positive() {
                            sigma == 1
                        } else if diff.is_negative() {
                            sigma == -1
                        } else {
                            true
                        };
                        if !sign_ok {
                            continue;
                        }
                        let cap_i = &prev_anchor + eps * &sig;
                        for i in 0..=n_t {
                            bump(&mut work)?;
                            let ki = leg_strike(dqs, eps, t, i).unwrap();
                            if ki > cap_i {
                                continue;
                            }
                            let ask_i = leg_ask(dqs, eps, t, i).unwrap();
                            let bid = &prev_bid + &bid_j - ask_i;
                            if best.as_ref().map(|b| bid > b.bid).unwrap_or(true) {
                                best = Some(DpEntry {
                                    bid,
                                    anchor: x_t.clone(),
                                    back: Some((prev_state, i)),
                                });
                            }
                        }
                    }
                    if let Some(entry) = best {
                        table.insert((t, j, sigma), entry);
                    }
                }
            }
        }
    }
    Ok(table)
}

fn reconstruct(eps: &Rat, table: &HashMap<State, DpEntry>, terminal: State) -> CalendarBasket {
    let mut signs = Vec::new();
    let mut anchors = Vec::new();
    let mut pinned = Vec::new();
    let mut held = Vec::new();
    let mut state = terminal;
    loop {
        let entry = &table[&state];
        signs.push(state.2);
        anchors.push(entry.anchor.clone());
        pinned.push(state.1);
        match &entry.back {
            Some((prev, i)) => {
                held.push(*i);
                state = *prev;
            }
            None => break,
        }
    }
    signs.reverse();
    anchors.reverse();
    pinned.reverse();
    held.reverse();
    CalendarBasket { maturity: terminal.0, epsilon: eps.clone(), signs, anchors, pinned, held }
}

/// Runs the calendar battery: for every maximal-bid basket with maturity `s`
/// and every one or two later quotes, checks
///
/// - (i) slope comparison across `(t, i)` below and `(u, l)` above,
/// - (ii) the slope floor `-1` against an upper quote,
/// - (iii) nonnegative spread price against a dominated quote,
/// - (iv) zero-cost spreads force a zero ask (degenerate, weak only).
pub fn check_necessary(
    dqs: &DiscountedQuoteSet,
    eps: &Rat,
    max_u: usize,
    cap: usize,
) -> Result<Vec<NecessaryViolation>, BudgetError> {
    let table = best_chains(dqs, eps, max_u, cap)?;
    let mut out = Vec::new();
    let horizon = dqs.horizon();
    for (state, entry) in &table {
        let (s, _, _) = *state;
        let x_s = &entry.anchor;
        let bid = &entry.bid;
        let mut basket = None;
        let witness = |basket: &mut Option<CalendarBasket>| -> CalendarBasket {
            basket.get_or_insert_with(|| reconstruct(eps, &table, *state)).clone()
        };
        for t in (s + 1)..=horizon {
            for i in 0..=dqs.options[t].len() {
                let ki = leg_strike(dqs, eps, t, i).unwrap();
                let ask_i = leg_ask(dqs, eps, t, i).unwrap();
                let low = &ki + eps; // settlement level of the lower quote
                // (iii): bid <= ask_i when x_s >= k_i + eps
                if *x_s >= low && bid > &ask_i {
                    out.push(NecessaryViolation {
                        condition: NecessaryCondition::Nonnegativity,
                        basket: witness(&mut basket),
                        basket_bid: bid.clone(),
                        versus: vec![(t, i)],
                        margin: bid - &ask_i,
                    });
                }
                // (iv): bid = ask_i > 0 when x_s > k_i + eps
                if *x_s > low && bid == &ask_i && !ask_i.is_zero() {
                    out.push(NecessaryViolation {
                        condition: NecessaryCondition::DegenerateSpread,
                        basket: witness(&mut basket),
                        basket_bid: bid.clone(),
                        versus: vec![(t, i)],
                        margin: Rat::zero(),
                    });
                }
            }
            for l in 0..=dqs.options[t].len() {
                let kl = leg_strike(dqs, eps, t, l).unwrap();
                let ask_l = leg_ask(dqs, eps, t, l).unwrap();
                let high = &kl + eps;
                // (ii): (ask_l - bid) / (k_l + eps - x_s) >= -1 when x_s < k_l + eps
                if *x_s < high {
                    let gap = &high - x_s;
                    if &ask_l - bid < -gap.clone() {
                        out.push(NecessaryViolation {
                            condition: NecessaryCondition::SlopeFloor,
                            basket: witness(&mut basket),
                            basket_bid: bid.clone(),
                            versus: vec![(t, l)],
                            margin: -(&ask_l - bid + gap),
                        });
                    }
                }
            }
        }
        // (i): lower quote (t, i), upper quote (u, l)
        for t in (s + 1)..=horizon {
            for i in 0..=dqs.options[t].len() {
                let ki = leg_strike(dqs, eps, t, i).unwrap();
                let low = &ki + eps;
                if !(low < *x_s) {
                    continue;
                }
                let ask_i = leg_ask(dqs, eps, t, i).unwrap();
                for u in (s + 1)..=horizon {
                    for l in 0..=dqs.options[u].len() {
                        let kl = leg_strike(dqs, eps, u, l).unwrap();
                        let high = &kl + eps;
                        if !(*x_s < high) {
                            continue;
                        }
                        let ask_l = leg_ask(dqs, eps, u, l).unwrap();
                        // (bid - ask_i)/(x_s - low) <= (ask_l - bid)/(high - x_s)
                        let lhs = (bid - &ask_i) * (&high - x_s);
                        let rhs = (&ask_l - bid) * (x_s - &low);
                        if lhs > rhs {
                            out.push(NecessaryViolation {
                                condition: NecessaryCondition::SlopeComparison,
                                basket: witness(&mut basket),
                                basket_bid: bid.clone(),
                                versus: vec![(t, i), (u, l)],
                                margin: (lhs - rhs) / ((x_s - &low) * (&high - x_s)),
                            });
                        }
                    }
                }
            }
        }
    }
    // deterministic order; sign-twin baskets at eps = 0 collapse to one entry
    out.sort_by(|a, b| {
        (a.basket.maturity, a.condition.wire_id(), &a.versus)
            .cmp(&(b.basket.maturity, b.condition.wire_id(), &b.versus))
    });
    out.dedup_by(|a, b| {
        a.condition == b.condition
            && a.versus == b.versus
            && a.basket_bid == b.basket_bid
            && a.basket.maturity == b.basket.maturity
            && a.basket.anchors == b.basket.anchors
    });
    Ok(out)
}

/// True when the battery passes (no violations at all).
pub fn necessary_pass(
    dqs: &DiscountedQuoteSet,
    eps: &Rat,
    max_u: usize,
    cap: usize,
) -> Result<bool, BudgetError> {
    Ok(check_necessary(dqs, eps, max_u, cap)?.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{rat, ratio};
    use crate::quotes::{discount, parse_quotes};

    fn motivating_dqs(c: i64) -> DiscountedQuoteSet {
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

    #[test]
    fn frictionless_calendar_mispricing_found() {
        // the near call is dearer than the far call: at eps = 0 the calendar
        // spread has negative price, a nonnegativity violation
        let dqs = motivating_dqs(1);
        let violations = check_necessary(&dqs, &rat(0), 2, 100_000).unwrap();
        assert!(violations
            .iter()
            .any(|v| v.condition == NecessaryCondition::Nonnegativity
                && v.basket.maturity == 1
                && v.versus == vec![(2, 1)]));
    }

    #[test]
    fn large_spread_explains_the_prices() {
        let dqs = motivating_dqs(1);
        // threshold 1/2: the falling-direction basket bid 2 - 2*eps must not
        // exceed the far ask 1
        assert!(!necessary_pass(&dqs, &ratio(49, 100), 2, 100_000).unwrap());
        assert!(necessary_pass(&dqs, &ratio(1, 2), 2, 100_000).unwrap());
        assert!(necessary_pass(&dqs, &ratio(3, 4), 2, 100_000).unwrap());
    }

    #[test]
    fn single_maturity_set_has_no_calendar_conditions() {
        let doc = r#"{"bank": [1, 1],
            "underlying": {"bid": 4, "ask": 4},
            "options": [{"t": 1, "strike": 2, "bid": 1, "ask": 2}]}"#;
        let dqs = discount(&parse_quotes(doc).unwrap());
        assert!(check_necessary(&dqs, &rat(0), 1, 100_000).unwrap().is_empty());
    }

    #[test]
    fn budget_cap_respected() {
        let dqs = motivating_dqs(1);
        assert!(matches!(
            check_necessary(&dqs, &rat(0), 2, 3),
            Err(BudgetError::CombinatorialBudgetExceeded(3))
        ));
    }
}
