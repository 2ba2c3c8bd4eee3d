//! Semi-static portfolios: static option legs plus a replayable dynamic
//! trading rule, the self-financing ledger, pricing against quotes, and
//! grid verification of model-independent arbitrage claims.
//!
//! Bank positions are held as unit counts of the bank account, so a cash
//! amount `x` received at time `t` adds `x / B(t)` units. Stock buys settle
//! at the ask, sells at the bid. Option payoffs are cash settled against the
//! reference price. Underlying legs (strike index 0) are stock positions
//! entered at time zero at the pseudo prices and carried until their
//! maturity; written ones bundle a `2*eps` bank deposit.

use crate::model::FiniteModel;
use crate::num::{json_to_rat, max_rat, min_rat, rat_to_json, Rat};
use crate::quotes::DiscountedQuoteSet;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PortfolioError {
    #[error("leg references unknown instrument (t={t}, index={index})")]
    UnknownInstrument { t: usize, index: usize },
    #[error("portfolio horizon exceeds the model horizon")]
    HorizonMismatch,
    #[error("malformed certificate document: {0}")]
    Malformed(String),
}

/// A static call position. `strike_index` 0 is the underlying-leg convention;
/// indices >= 1 refer to the sorted quotes of that maturity. `strike` is the
/// undiscounted strike used for cash settlement (for index 0 it equals
/// `eps * B(t)` and is never settled; the leg is stock).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptionLeg {
    pub maturity: usize,
    pub strike_index: usize,
    pub strike: Rat,
    pub qty: Rat,
}

/// One step of the calendar-basket hedging state machine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HedgeStep {
    pub t: usize,
    /// Direction sign at this maturity (+1 or -1).
    pub sigma: i8,
    /// Pinned level x_t (discounted).
    pub anchor: Rat,
    pub prev_anchor: Option<Rat>,
    /// Index written at this maturity (0 = underlying leg).
    pub short_leg: usize,
    /// Index held into this maturity (0 = underlying leg); None at the first step.
    pub long_leg: Option<usize>,
    /// Undiscounted strike of the written leg.
    pub strike_short: Rat,
    pub strike_long: Option<Rat>,
}

/// Replayable dynamic rules. Decision thresholds are explicit data, so
/// certificates serialize and replay bit-exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DynamicRule {
    /// No trading after time zero.
    Static,
    /// Close the whole stock book at time `t`.
    LiquidateAt(usize),
    /// Sell one share at `trigger_t` when the reference exceeds `strike`;
    /// buy it back at `cover_t`.
    CalendarCover { trigger_t: usize, strike: Rat, cover_t: usize },
    /// Two-scenario hedge for a written calendar basket, with covering
    /// purchases after the basket matures (executed only while short).
    BasketHedge { steps: Vec<HedgeStep>, covers: Vec<(usize, Rat)> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemiStaticPortfolio {
    /// Initial bank units committed at time zero.
    pub initial_bank: Rat,
    /// Net plain stock entered at time zero, priced at the quoted bid/ask.
    pub initial_stock: Rat,
    pub legs: Vec<OptionLeg>,
    pub rule: DynamicRule,
}

impl SemiStaticPortfolio {
    pub fn empty() -> SemiStaticPortfolio {
        SemiStaticPortfolio {
            initial_bank: Rat::zero(),
            initial_stock: Rat::zero(),
            legs: Vec::new(),
            rule: DynamicRule::Static,
        }
    }

    /// Latest time at which the portfolio settles or trades.
    pub fn horizon(&self) -> usize {
        let mut h = 0;
        for l in &self.legs {
            h = h.max(l.maturity);
        }
        match &self.rule {
            DynamicRule::Static => {}
            DynamicRule::LiquidateAt(t) => h = h.max(*t),
            DynamicRule::CalendarCover { trigger_t, cover_t, .. } => {
                h = h.max(*trigger_t).max(*cover_t)
            }
            DynamicRule::BasketHedge { steps, covers } => {
                for s in steps {
                    h = h.max(s.t);
                }
                for (t, _) in covers {
                    h = h.max(*t);
                }
            }
        }
        h
    }

    pub fn to_json(&self) -> Value {
        let rule = match &self.rule {
            DynamicRule::Static => json!({"kind": "static"}),
            DynamicRule::LiquidateAt(t) => json!({"kind": "liquidate_at", "t": t}),
            DynamicRule::CalendarCover { trigger_t, strike, cover_t } => json!({
                "kind": "calendar_cover",
                "trigger_t": trigger_t,
                "strike": rat_to_json(strike),
                "cover_t": cover_t,
            }),
            DynamicRule::BasketHedge { steps, covers } => json!({
                "kind": "basket_hedge",
                "steps": steps.iter().map(|s| json!({
                    "t": s.t,
                    "sigma": s.sigma,
                    "anchor": rat_to_json(&s.anchor),
                    "prev_anchor": s.prev_anchor.as_ref().map(rat_to_json),
                    "short_leg": s.short_leg,
                    "long_leg": s.long_leg,
                    "strike_short": rat_to_json(&s.strike_short),
                    "strike_long": s.strike_long.as_ref().map(rat_to_json),
                })).collect::<Vec<_>>(),
                "covers": covers.iter().map(|(t, q)| json!([t, rat_to_json(q)])).collect::<Vec<_>>(),
            }),
        };
        json!({
            "initial_bank": rat_to_json(&self.initial_bank),
            "initial_stock": rat_to_json(&self.initial_stock),
            "legs": self.legs.iter().map(|l| json!({
                "t": l.maturity,
                "index": l.strike_index,
                "strike": rat_to_json(&l.strike),
                "qty": rat_to_json(&l.qty),
            })).collect::<Vec<_>>(),
            "rule": rule,
        })
    }

    pub fn from_json(v: &Value) -> Result<SemiStaticPortfolio, PortfolioError> {
        let bad = |m: &str| PortfolioError::Malformed(m.to_string());
        let num = |v: &Value| json_to_rat(v).map_err(PortfolioError::Malformed);
        let mut legs = Vec::new();
        for l in v.get("legs").and_then(Value::as_array).ok_or_else(|| bad("legs"))? {
            legs.push(OptionLeg {
                maturity: l.get("t").and_then(Value::as_u64).ok_or_else(|| bad("leg t"))? as usize,
                strike_index: l.get("index").and_then(Value::as_u64).ok_or_else(|| bad("leg index"))?
                    as usize,
                strike: num(l.get("strike").ok_or_else(|| bad("leg strike"))?)?,
                qty: num(l.get("qty").ok_or_else(|| bad("leg qty"))?)?,
            });
        }
        let rv = v.get("rule").ok_or_else(|| bad("rule"))?;
        let opt_num = |s: Option<&Value>| -> Result<Option<Rat>, PortfolioError> {
            match s {
                Some(Value::Null) | None => Ok(None),
                Some(x) => Ok(Some(num(x)?)),
            }
        };
        let rule = match rv.get("kind").and_then(Value::as_str) {
            Some("static") => DynamicRule::Static,
            Some("liquidate_at") => DynamicRule::LiquidateAt(
                rv.get("t").and_then(Value::as_u64).ok_or_else(|| bad("liquidate t"))? as usize,
            ),
            Some("calendar_cover") => DynamicRule::CalendarCover {
                trigger_t: rv.get("trigger_t").and_then(Value::as_u64).ok_or_else(|| bad("trigger"))?
                    as usize,
                strike: num(rv.get("strike").ok_or_else(|| bad("strike"))?)?,
                cover_t: rv.get("cover_t").and_then(Value::as_u64).ok_or_else(|| bad("cover"))? as usize,
            },
            Some("basket_hedge") => {
                let mut steps = Vec::new();
                for s in rv.get("steps").and_then(Value::as_array).ok_or_else(|| bad("steps"))? {
                    steps.push(HedgeStep {
                        t: s.get("t").and_then(Value::as_u64).ok_or_else(|| bad("step t"))? as usize,
                        sigma: s.get("sigma").and_then(Value::as_i64).ok_or_else(|| bad("sigma"))? as i8,
                        anchor: num(s.get("anchor").ok_or_else(|| bad("anchor"))?)?,
                        prev_anchor: opt_num(s.get("prev_anchor"))?,
                        short_leg: s
                            .get("short_leg")
                            .and_then(Value::as_u64)
                            .ok_or_else(|| bad("short"))? as usize,
                        long_leg: s.get("long_leg").and_then(Value::as_u64).map(|x| x as usize),
                        strike_short: num(s.get("strike_short").ok_or_else(|| bad("ks"))?)?,
                        strike_long: opt_num(s.get("strike_long"))?,
                    });
                }
                let mut covers = Vec::new();
                for c in rv.get("covers").and_then(Value::as_array).ok_or_else(|| bad("covers"))? {
                    let pair = c.as_array().ok_or_else(|| bad("cover pair"))?;
                    covers.push((
                        pair[0].as_u64().ok_or_else(|| bad("cover t"))? as usize,
                        num(&pair[1])?,
                    ));
                }
                DynamicRule::BasketHedge { steps, covers }
            }
            _ => return Err(bad("rule kind")),
        };
        Ok(SemiStaticPortfolio {
            initial_bank: num(v.get("initial_bank").ok_or_else(|| bad("initial_bank"))?)?,
            initial_stock: num(v.get("initial_stock").ok_or_else(|| bad("initial_stock"))?)?,
            legs,
            rule,
        })
    }
}

/// Initial portfolio value: bank units plus the net stock entered at bid/ask
/// plus every option leg at its side of the quote; underlying legs use the
/// pseudo prices (ask `S0_ask`, bid `S0_bid - 2*eps`).
pub fn initial_value(
    portfolio: &SemiStaticPortfolio,
    dqs: &DiscountedQuoteSet,
    eps: &Rat,
) -> Result<Rat, PortfolioError> {
    let mut value = portfolio.initial_bank.clone();
    let s = &portfolio.initial_stock;
    if s.is_positive() {
        value += s * &dqs.underlying_ask;
    } else if s.is_negative() {
        value += s * &dqs.underlying_bid;
    }
    let two = Rat::from_integer(2.into());
    for leg in &portfolio.legs {
        let (bid, ask) = if leg.strike_index == 0 {
            (&dqs.underlying_bid - &two * eps, dqs.underlying_ask.clone())
        } else {
            let q = dqs
                .options
                .get(leg.maturity)
                .and_then(|v| v.get(leg.strike_index - 1))
                .ok_or(PortfolioError::UnknownInstrument {
                    t: leg.maturity,
                    index: leg.strike_index,
                })?;
            (q.bid.clone(), q.ask.clone())
        };
        if leg.qty.is_positive() {
            value += &leg.qty * ask;
        } else {
            value += &leg.qty * bid;
        }
    }
    Ok(value)
}

/// Per-path execution record. Index `t` holds the state after time-`t`
/// settlement and trading; `carry_stock` is stock still inside unmatured
/// underlying legs.
#[derive(Clone, Debug)]
pub struct PathLedger {
    pub nodes: Vec<usize>,
    pub probability: Rat,
    pub bank: Vec<Rat>,
    pub dyn_stock: Vec<Rat>,
    pub carry_stock: Vec<Rat>,
}

impl PathLedger {
    pub fn terminal_bank(&self) -> &Rat {
        self.bank.last().unwrap()
    }

    pub fn terminal_stock(&self) -> Rat {
        self.dyn_stock.last().unwrap() + self.carry_stock.last().unwrap()
    }
}

#[derive(Clone, Debug)]
pub struct Ledger {
    pub paths: Vec<PathLedger>,
}

/// Executes the portfolio along explicit price triples (bid, reference, ask)
/// for times 1..=T; returns (bank, dynamic stock, carried stock) series.
pub(crate) fn run_path(
    portfolio: &SemiStaticPortfolio,
    bank_account: &[Rat],
    prices: &[(Rat, Rat, Rat)],
    eps: &Rat,
) -> (Vec<Rat>, Vec<Rat>, Vec<Rat>) {
    let horizon = prices.len();
    let two = Rat::from_integer(2.into());
    let mut bank = portfolio.initial_bank.clone();
    let mut dyn_stock = portfolio.initial_stock.clone();
    let mut carry: Vec<(usize, Rat)> = Vec::new();
    for leg in &portfolio.legs {
        if leg.strike_index == 0 {
            carry.push((leg.maturity, leg.qty.clone()));
            if leg.qty.is_negative() {
                // a written underlying leg's package includes a 2*eps deposit
                bank += &two * eps * -leg.qty.clone();
            }
        }
    }
    let mut bank_series = vec![bank.clone()];
    let mut dyn_series = vec![dyn_stock.clone()];
    let carry_total =
        |carry: &Vec<(usize, Rat)>| carry.iter().map(|(_, q)| q.clone()).sum::<Rat>();
    let mut carry_series = vec![carry_total(&carry)];

    let mut basket_short = false;
    let last_step = match &portfolio.rule {
        DynamicRule::BasketHedge { steps, .. } => steps.iter().map(|s| s.t).max().unwrap_or(0),
        _ => 0,
    };
    for t in 1..=horizon {
        let (s_bid, s_ref, s_ask) = &prices[t - 1];
        let disc = Rat::one() / &bank_account[t];
        // cash-settled option payoffs
        let payoffs: Rat = portfolio
            .legs
            .iter()
            .filter(|l| l.maturity == t && l.strike_index > 0)
            .map(|l| &l.qty * max_rat(s_ref - &l.strike, Rat::zero()))
            .sum();
        bank += payoffs * &disc;
        // release carried underlying legs into the dynamic book
        for (m, q) in &carry {
            if *m == t {
                dyn_stock += q;
            }
        }
        carry.retain(|(m, _)| *m != t);
        // dynamic trading
        let mut trade = Rat::zero();
        match &portfolio.rule {
            DynamicRule::Static => {}
            DynamicRule::LiquidateAt(when) => {
                if t == *when {
                    trade = -dyn_stock.clone();
                }
            }
            DynamicRule::CalendarCover { trigger_t, strike, cover_t } => {
                if t == *trigger_t && s_ref > strike {
                    trade -= Rat::one();
                }
                if t == *cover_t {
                    let after = &dyn_stock + &trade;
                    if after.is_negative() {
                        trade -= after;
                    }
                }
            }
            DynamicRule::BasketHedge { steps, covers } => {
                if let Some(step) = steps.iter().find(|s| s.t == t) {
                    let itm = step.short_leg > 0 && s_ref > &step.strike_short;
                    if step.prev_anchor.is_none() {
                        // first maturity of the basket
                        if step.short_leg == 0 {
                            basket_short = true; // released written leg joins the book
                        } else if itm {
                            trade -= Rat::one();
                            basket_short = true;
                        }
                    } else if !basket_short {
                        match (step.short_leg, step.long_leg.unwrap_or(usize::MAX)) {
                            (0, 0) => {}
                            (0, _) => basket_short = true,
                            (_, 0) => trade -= Rat::one(), // sell the released unit
                            _ => {
                                let ki = step.strike_long.as_ref().unwrap();
                                if *ki > step.strike_short && s_ref > &step.strike_short {
                                    trade -= Rat::one();
                                    basket_short = true;
                                }
                            }
                        }
                    } else {
                        match (step.short_leg, step.long_leg.unwrap_or(usize::MAX)) {
                            (0, 0) => {}
                            (0, _) => trade += Rat::one(), // buy back one of the two shorts
                            (_, 0) => {
                                if itm {
                                    trade -= Rat::one(); // sell the released unit again
                                } else {
                                    basket_short = false; // released long cancels the short
                                }
                            }
                            _ => {
                                if !itm {
                                    // rising step (sigma -1): close the short;
                                    // falling step: stay short, the carried
                                    // balance already covers the new level
                                    if step.sigma == -1 {
                                        trade += Rat::one();
                                        basket_short = false;
                                    }
                                }
                            }
                        }
                    }
                } else if t > last_step {
                    // after the basket matured: covers while short, then shed
                    // any surplus released stock
                    for (when, qty) in covers {
                        if *when == t {
                            let book = &dyn_stock + &trade;
                            if basket_short && book.is_negative() {
                                trade += min_rat(qty.clone(), -book);
                            }
                        }
                    }
                    let book = &dyn_stock + &trade;
                    if book.is_positive() {
                        trade -= book;
                    }
                }
            }
        }
        if !trade.is_zero() {
            dyn_stock += &trade;
            if trade.is_positive() {
                bank -= &trade * s_ask * &disc;
            } else {
                bank += -trade.clone() * s_bid * &disc;
            }
        }
        bank_series.push(bank.clone());
        dyn_series.push(dyn_stock.clone());
        carry_series.push(carry_total(&carry));
    }
    (bank_series, dyn_series, carry_series)
}

/// Replays the portfolio on every path of a finite model.
pub fn execute(
    portfolio: &SemiStaticPortfolio,
    model: &FiniteModel,
    eps: &Rat,
) -> Result<Ledger, PortfolioError> {
    if portfolio.horizon() > model.horizon() {
        return Err(PortfolioError::HorizonMismatch);
    }
    let mut paths = Vec::new();
    for path in model.paths() {
        let prices: Vec<(Rat, Rat, Rat)> = path
            .iter()
            .skip(1)
            .map(|&id| {
                let n = &model.nodes[id];
                (n.bid.clone(), n.reference.clone(), n.ask.clone())
            })
            .collect();
        let (bank, dyn_stock, carry_stock) = run_path(portfolio, &model.bank, &prices, eps);
        paths.push(PathLedger {
            probability: model.path_probability(&path),
            nodes: path,
            bank,
            dyn_stock,
            carry_stock,
        });
    }
    Ok(Ledger { paths })
}

#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub initial_value: Rat,
    /// r < 0: the portfolio is entered at negative cost.
    pub negative_cost: bool,
    /// Terminal bank nonnegative and the stock book closed on every grid path.
    pub payoff_nonnegative: bool,
    pub worst_terminal_bank: Rat,
    pub worst_path: Vec<(Rat, Rat, Rat)>,
    pub paths_checked: usize,
}

impl VerificationReport {
    pub fn verified(&self) -> bool {
        self.negative_cost && self.payoff_nonnegative
    }
}

/// Admissible reference-price grid for one period: all settlement and
/// decision kinks, their eps-shifts, the floor eps*B(t), a cap beyond every
/// kink, and a uniform fill of `density` points.
fn reference_grid(
    portfolio: &SemiStaticPortfolio,
    dqs: &DiscountedQuoteSet,
    eps: &Rat,
    t: usize,
    density: usize,
) -> Vec<Rat> {
    let bt = &dqs.bank[t];
    let floor = eps * bt;
    let mut criticals: Vec<Rat> = vec![floor.clone()];
    let mut push_strike = |k: &Rat| {
        criticals.push(k.clone());
        criticals.push(k + eps * bt);
        if k - eps * bt > Rat::zero() {
            criticals.push(k - eps * bt);
        }
    };
    for q in dqs.options.get(t).map(|v| v.as_slice()).unwrap_or(&[]) {
        push_strike(&(&q.strike * bt));
    }
    for leg in &portfolio.legs {
        if leg.maturity == t && leg.strike_index > 0 {
            push_strike(&leg.strike);
        }
    }
    match &portfolio.rule {
        DynamicRule::CalendarCover { trigger_t, strike, .. } if *trigger_t == t => {
            push_strike(strike)
        }
        DynamicRule::BasketHedge { steps, .. } => {
            for s in steps.iter().filter(|s| s.t == t) {
                push_strike(&s.strike_short);
                if let Some(k) = &s.strike_long {
                    push_strike(k);
                }
            }
        }
        _ => {}
    }
    let hi = criticals.iter().cloned().fold(floor.clone(), max_rat) + bt;
    criticals.push(hi.clone());
    let mut grid: Vec<Rat> = criticals.into_iter().filter(|x| *x >= floor).collect();
    for i in 1..=density {
        grid.push(&floor + (&hi - &floor) * crate::num::ratio(i as i64, density as i64 + 1));
    }
    grid.sort();
    grid.dedup();
    grid
}

/// Checks the model-independent arbitrage definition on an exhaustive grid of
/// admissible price paths: negative setup cost, then nonnegative terminal
/// bank and a flat stock book on every path of the grid. The grid contains
/// every settlement/decision kink, the kinks shifted by the spread bound, and
/// the three extreme bid/ask corners per reference price.
pub fn verify_model_independent(
    portfolio: &SemiStaticPortfolio,
    dqs: &DiscountedQuoteSet,
    eps: &Rat,
    grid_density: usize,
) -> Result<VerificationReport, PortfolioError> {
    let r_phi = initial_value(portfolio, dqs, eps)?;
    let horizon = dqs.horizon().max(portfolio.horizon());
    if portfolio.horizon() > dqs.horizon() {
        return Err(PortfolioError::HorizonMismatch);
    }
    // per period: (bid, ref, ask) candidates
    let mut per_period: Vec<Vec<(Rat, Rat, Rat)>> = Vec::new();
    for t in 1..=horizon {
        let spread_cap = eps * &dqs.bank[t];
        let mut triples = Vec::new();
        for c in reference_grid(portfolio, dqs, eps, t, grid_density) {
            let mut corners = vec![(c.clone(), c.clone(), c.clone())];
            if spread_cap.is_positive() {
                corners.push((&c - &spread_cap, c.clone(), c.clone()));
                corners.push((c.clone(), c.clone(), &c + &spread_cap));
            }
            for (b, r, a) in corners {
                if !b.is_negative() {
                    triples.push((b, r, a));
                }
            }
        }
        per_period.push(triples);
    }
    let mut worst: Option<(Rat, Vec<(Rat, Rat, Rat)>)> = None;
    let mut all_ok = true;
    let mut count = 0usize;
    let mut stack: Vec<Vec<(Rat, Rat, Rat)>> = vec![Vec::new()];
    while let Some(prefix) = stack.pop() {
        if prefix.len() == horizon {
            count += 1;
            let (bank, dyn_stock, carry) = run_path(portfolio, &dqs.bank, &prefix, eps);
            let terminal = bank.last().unwrap().clone();
            let flat = (dyn_stock.last().unwrap() + carry.last().unwrap()).is_zero();
            if terminal.is_negative() || !flat {
                all_ok = false;
            }
            let key = if flat { terminal.clone() } else { terminal.clone() - Rat::one() };
            if worst.as_ref().map(|(w, _)| key < *w).unwrap_or(true) {
                worst = Some((terminal, prefix.clone()));
            }
            continue;
        }
        for triple in &per_period[prefix.len()] {
            let mut next = prefix.clone();
            next.push(triple.clone());
            stack.push(next);
        }
    }
    let (worst_terminal_bank, worst_path) = worst.unwrap_or((Rat::zero(), Vec::new()));
    Ok(VerificationReport {
        negative_cost: r_phi.is_negative(),
        initial_value: r_phi,
        payoff_nonnegative: all_ok,
        worst_terminal_bank,
        worst_path,
        paths_checked: count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::deterministic_model;
    use crate::num::{rat, ratio};
    use crate::quotes::{discount, parse_quotes};

    fn motivating_quotes(c: i64) -> DiscountedQuoteSet {
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

    fn naive_calendar() -> SemiStaticPortfolio {
        // long the far call, short the near call, short the stock when the
        // near call lands in the money, cover at the end
        SemiStaticPortfolio {
            initial_bank: rat(0),
            initial_stock: rat(0),
            legs: vec![
                OptionLeg { maturity: 1, strike_index: 1, strike: rat(1), qty: rat(-1) },
                OptionLeg { maturity: 2, strike_index: 1, strike: rat(1), qty: rat(1) },
            ],
            rule: DynamicRule::CalendarCover { trigger_t: 1, strike: rat(1), cover_t: 2 },
        }
    }

    #[test]
    fn initial_value_examples() {
        let dqs = motivating_quotes(1);
        assert_eq!(initial_value(&SemiStaticPortfolio::empty(), &dqs, &rat(0)).unwrap(), rat(0));
        let long_call = SemiStaticPortfolio {
            legs: vec![OptionLeg { maturity: 1, strike_index: 1, strike: rat(1), qty: rat(1) }],
            ..SemiStaticPortfolio::empty()
        };
        assert_eq!(initial_value(&long_call, &dqs, &rat(0)).unwrap(), rat(2));
        // short one call at bid 2, long one stock at ask 2, bank -1
        let mixed = SemiStaticPortfolio {
            initial_bank: rat(-1),
            initial_stock: rat(1),
            legs: vec![OptionLeg { maturity: 1, strike_index: 1, strike: rat(1), qty: rat(-1) }],
            rule: DynamicRule::Static,
        };
        // -1 + 1*ask(2) - 1*bid(2) = -1
        assert_eq!(initial_value(&mixed, &dqs, &rat(0)).unwrap(), rat(-1));
        // naive calendar spread costs 1 - (c+1) = -c
        assert_eq!(initial_value(&naive_calendar(), &motivating_quotes(3), &rat(0)).unwrap(), rat(-3));
    }

    #[test]
    fn executes_calendar_on_wide_spread_model() {
        // the explicit deterministic model: bid 2 throughout, first-period ask
        // 2c+2, reference at the midpoint
        let c = 5i64;
        let model = deterministic_model(
            vec![rat(1), rat(1), rat(1)],
            vec![
                (rat(2), rat(2), rat(2), rat(2)),
                (rat(2), rat(c + 2), rat(2 * c + 2), rat(2)),
                (rat(2), rat(2), rat(2), rat(2)),
            ],
        );
        model.validate().unwrap();
        let ledger = execute(&naive_calendar(), &model, &rat(0)).unwrap();
        assert_eq!(ledger.paths.len(), 1);
        // short call pays -(c+1), stock sold at 2; far call pays +1, cover at 2
        assert_eq!(ledger.paths[0].terminal_bank(), &rat(-c));
        assert_eq!(ledger.paths[0].terminal_stock(), rat(0));
    }

    #[test]
    fn do_nothing_portfolio_keeps_constant_units() {
        let model = deterministic_model(
            vec![rat(1), ratio(11, 10)],
            vec![(rat(2), rat(2), rat(2), rat(2)), (rat(2), rat(2), rat(2), rat(2))],
        );
        let p = SemiStaticPortfolio { initial_bank: rat(7), ..SemiStaticPortfolio::empty() };
        let ledger = execute(&p, &model, &rat(0)).unwrap();
        assert_eq!(ledger.paths[0].bank, vec![rat(7), rat(7)]);
    }

    #[test]
    fn verify_rejects_zero_cost_portfolio() {
        let dqs = motivating_quotes(1);
        let report = verify_model_independent(&SemiStaticPortfolio::empty(), &dqs, &rat(0), 2).unwrap();
        assert!(!report.verified());
        assert!(!report.negative_cost);
        assert!(report.payoff_nonnegative);
    }

    #[test]
    fn verify_fails_naive_calendar_under_wide_bound() {
        // with the arithmetic convention at bound 2c there are admissible
        // paths on which the calendar spread loses money
        let c = 1i64;
        let dqs = motivating_quotes(c);
        let report =
            verify_model_independent(&naive_calendar(), &dqs, &rat(2 * c), 2).unwrap();
        assert!(report.negative_cost);
        assert!(!report.payoff_nonnegative);
        assert!(report.worst_terminal_bank <= rat(-c));
    }

    #[test]
    fn certificate_json_round_trip() {
        let p = naive_calendar();
        let v = p.to_json();
        assert_eq!(SemiStaticPortfolio::from_json(&v).unwrap(), p);
    }
}
