//! End-to-end classification of a quote set at a spread bound: per-maturity
//! condition batteries, the cross-maturity calendar battery, certificate
//! construction and grid verification for model-independent violations,
//! model-dependent witnesses for degenerate ones, and an explicit model
//! witness when full consistency is established.

use crate::certificates::{
    execute, verify_model_independent, DynamicRule, OptionLeg, PortfolioError,
    SemiStaticPortfolio, VerificationReport,
};
use crate::model::FiniteModel;
use crate::multi_maturity::{
    assemble_model, basket_strategy, check_necessary, check_simplified, martingale_from_peacock,
    peacock_construct, synthesize_curves, CalendarBasket, NecessaryCondition, NecessaryViolation,
    SimplifiedVerdict, SpreadConvention,
};
use crate::multi_maturity::cvb::leg_strike;
use crate::num::{format_rat, Rat};
use crate::quotes::{validate_for_epsilon, DiscountedQuoteSet, ValidationError};
use crate::single_maturity::{
    augment, build_single_model, check_conditions, shadow_prices, witness_mean, ConditionKind,
    ConditionViolation, SingleVerdict,
};
use num_traits::{One, Signed, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OverallVerdict {
    Consistent,
    /// Every necessary condition holds but full consistency could not be
    /// established for this multi-maturity instance.
    NecessaryPass,
    WeakArbitrage,
    ModelIndependentArbitrage,
}

#[derive(Clone, Debug)]
pub struct CertificateRecord {
    /// Which violated condition produced the certificate.
    pub source: String,
    pub portfolio: SemiStaticPortfolio,
    pub verification: VerificationReport,
}

/// Decides which branch of a model-dependent witness applies.
#[derive(Clone, Debug)]
pub enum WeakTrigger {
    /// The call at (maturity, undiscounted strike) finishes in the money with
    /// positive probability.
    CallItm { maturity: usize, strike: Rat },
    /// The written basket ends short with positive probability.
    BasketItm { basket: CalendarBasket },
}

#[derive(Clone, Debug)]
pub struct WeakWitness {
    pub source: String,
    pub trigger: WeakTrigger,
    /// Strategy when the trigger has probability zero.
    pub if_never_exercised: SemiStaticPortfolio,
    /// Zero-cost strategy that gains with positive probability otherwise.
    pub if_exercised: SemiStaticPortfolio,
}

#[derive(Clone, Debug)]
pub struct ClassifyOptions {
    pub max_u: usize,
    pub basket_cap: usize,
    pub grid_density: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { max_u: usize::MAX, basket_cap: 1_000_000, grid_density: 5 }
    }
}

#[derive(Clone, Debug)]
pub struct ClassifyReport {
    pub epsilon: Rat,
    pub verdict: OverallVerdict,
    pub per_maturity: Vec<(usize, SingleVerdict)>,
    pub calendar_violations: Vec<NecessaryViolation>,
    pub certificates: Vec<CertificateRecord>,
    pub weak_witnesses: Vec<WeakWitness>,
    pub simplified: Option<SimplifiedVerdict>,
    pub model: Option<FiniteModel>,
    /// Mean of the reference-law witness (single-maturity instances).
    pub witness_mean: Option<Rat>,
    pub notes: Vec<String>,
}

/// Builds the model-independent certificate for a calendar violation: write
/// the basket and run its hedge, buy the dominated quote(s), and cover the
/// short out of their settlements.
pub fn calendar_certificate(
    dqs: &DiscountedQuoteSet,
    eps: &Rat,
    violation: &NecessaryViolation,
) -> SemiStaticPortfolio {
    let mut portfolio = basket_strategy(dqs, &violation.basket);
    let x_s = violation.basket.anchors.last().unwrap().clone();
    let mut covers: Vec<(usize, Rat)> = Vec::new();
    let add_leg = |portfolio: &mut SemiStaticPortfolio, t: usize, idx: usize, qty: Rat| {
        let strike = leg_strike(dqs, eps, t, idx).expect("validated") * &dqs.bank[t];
        portfolio.legs.push(OptionLeg { maturity: t, strike_index: idx, strike, qty });
    };
    match violation.condition {
        NecessaryCondition::Nonnegativity | NecessaryCondition::DegenerateSpread => {
            let (t, i) = violation.versus[0];
            add_leg(&mut portfolio, t, i, Rat::one());
            if i > 0 {
                covers.push((t, Rat::one()));
            }
        }
        NecessaryCondition::SlopeFloor => {
            let (u, l) = violation.versus[0];
            let k_l = leg_strike(dqs, eps, u, l).expect("validated");
            portfolio.initial_bank += &k_l + eps - &x_s;
            add_leg(&mut portfolio, u, l, Rat::one());
            if l > 0 {
                covers.push((u, Rat::one()));
            }
        }
        NecessaryCondition::SlopeComparison => {
            let (t, i) = violation.versus[0];
            let (u, l) = violation.versus[1];
            let k_i = leg_strike(dqs, eps, t, i).expect("validated");
            let k_l = leg_strike(dqs, eps, u, l).expect("validated");
            let theta = (&k_l + eps - &x_s) / (&k_l - &k_i);
            add_leg(&mut portfolio, t, i, theta.clone());
            add_leg(&mut portfolio, u, l, Rat::one() - &theta);
            if i > 0 {
                covers.push((t, theta.clone()));
            }
            if l > 0 {
                covers.push((u, Rat::one() - theta));
            }
        }
    }
    covers.sort();
    if let DynamicRule::BasketHedge { covers: slot, .. } = &mut portfolio.rule {
        *slot = covers;
    }
    portfolio
}

fn single_weak_witness(
    dqs: &DiscountedQuoteSet,
    eps: &Rat,
    t: usize,
    violation: &ConditionViolation,
) -> WeakWitness {
    let strip = augment(dqs, t, eps).expect("validated");
    let (i, j) = (violation.indices[0], violation.indices[1]);
    let strike_j = strip.cash_strike(j);
    let sell_leg = OptionLeg {
        maturity: t,
        strike_index: j,
        strike: strike_j.clone(),
        qty: -Rat::one(),
    };
    // bank the premium: zero setup cost, and the deposit is the sure gain
    // when the written call is never exercised
    let if_never = SemiStaticPortfolio {
        initial_bank: strip.bids[j].clone(),
        initial_stock: Rat::zero(),
        legs: vec![sell_leg.clone()],
        rule: DynamicRule::Static,
    };
    let if_exercised = if i == 0 {
        SemiStaticPortfolio {
            initial_bank: Rat::zero(),
            initial_stock: Rat::one(),
            legs: vec![sell_leg],
            rule: DynamicRule::LiquidateAt(t),
        }
    } else {
        SemiStaticPortfolio {
            initial_bank: Rat::zero(),
            initial_stock: Rat::zero(),
            legs: vec![
                OptionLeg {
                    maturity: t,
                    strike_index: i,
                    strike: strip.cash_strike(i),
                    qty: Rat::one(),
                },
                sell_leg,
            ],
            rule: DynamicRule::Static,
        }
    };
    WeakWitness {
        source: format!("maturity {}: {} at ({}, {})", t, violation.kind.label(), i, j),
        trigger: WeakTrigger::CallItm { maturity: t, strike: strike_j },
        if_never_exercised: if_never,
        if_exercised,
    }
}

fn calendar_weak_witness(
    dqs: &DiscountedQuoteSet,
    eps: &Rat,
    violation: &NecessaryViolation,
) -> WeakWitness {
    // banking the basket bid makes the written-basket strategy cost nothing
    // and turn the deposit into a sure gain when the basket never ends short
    let mut if_never = basket_strategy(dqs, &violation.basket);
    if_never.initial_bank += &violation.basket_bid;
    WeakWitness {
        source: format!(
            "{} against {:?}",
            violation.condition.label(),
            violation.versus
        ),
        trigger: WeakTrigger::BasketItm { basket: violation.basket.clone() },
        if_never_exercised: if_never,
        if_exercised: calendar_certificate(dqs, eps, violation),
    }
}

/// Evaluates a weak-arbitrage trigger on a specific model: does the named
/// event have positive probability there?
pub fn weak_trigger_fires(
    model: &FiniteModel,
    dqs: &DiscountedQuoteSet,
    eps: &Rat,
    trigger: &WeakTrigger,
) -> Result<bool, PortfolioError> {
    match trigger {
        WeakTrigger::CallItm { maturity, strike } => Ok(model
            .paths()
            .iter()
            .any(|p| model.nodes[p[*maturity]].reference > *strike)),
        WeakTrigger::BasketItm { basket } => {
            let strategy = basket_strategy(dqs, basket);
            let ledger = execute(&strategy, model, eps)?;
            Ok(ledger
                .paths
                .iter()
                .any(|p| p.dyn_stock[basket.maturity].is_negative()))
        }
    }
}

/// Picks the branch of a model-dependent witness that applies to `model`.
pub fn weak_branch<'w>(
    witness: &'w WeakWitness,
    model: &FiniteModel,
    dqs: &DiscountedQuoteSet,
    eps: &Rat,
) -> Result<&'w SemiStaticPortfolio, PortfolioError> {
    if weak_trigger_fires(model, dqs, eps, &witness.trigger)? {
        Ok(&witness.if_exercised)
    } else {
        Ok(&witness.if_never_exercised)
    }
}

/// Full classification at spread bound `eps`.
pub fn classify(
    dqs: &DiscountedQuoteSet,
    eps: &Rat,
    opts: &ClassifyOptions,
) -> Result<ClassifyReport, ValidationError> {
    validate_for_epsilon(dqs, eps)?;
    let per_maturity: Vec<(usize, SingleVerdict)> = dqs
        .quoted_maturities()
        .into_iter()
        .map(|t| {
            let strip = augment(dqs, t, eps).expect("validated above");
            (t, check_conditions(&strip))
        })
        .collect();
    let mut notes = Vec::new();
    // the calendar battery compares baskets against strictly later quotes,
    // so it is vacuous on single-period data
    let (calendar_violations, battery_complete) = if dqs.horizon() < 2 {
        (Vec::new(), true)
    } else {
        match check_necessary(dqs, eps, opts.max_u.min(dqs.horizon()), opts.basket_cap) {
            Ok(v) => (v, true),
            Err(e) => {
                notes.push(format!("calendar battery incomplete: {}", e));
                (Vec::new(), false)
            }
        }
    };
    let mut certificates = Vec::new();
    let mut weak_witnesses = Vec::new();

    let single_mi: Vec<(usize, ConditionViolation)> = per_maturity
        .iter()
        .flat_map(|(t, v)| {
            v.violations
                .iter()
                .filter(|c| c.kind != ConditionKind::Degenerate)
                .map(|c| (*t, c.clone()))
                .collect::<Vec<_>>()
        })
        .collect();
    let calendar_mi: Vec<&NecessaryViolation> = calendar_violations
        .iter()
        .filter(|v| !v.condition.is_degenerate())
        .collect();

    if !single_mi.is_empty() || !calendar_mi.is_empty() {
        // one certificate per violated condition kind and maturity
        let mut seen = std::collections::BTreeSet::new();
        for (t, violation) in &single_mi {
            if !seen.insert((*t, violation.kind.wire_id())) {
                continue;
            }
            let strip = augment(dqs, *t, eps).expect("validated");
            if let Ok(portfolio) =
                crate::single_maturity::arbitrage_certificate(&strip, violation)
            {
                if let Ok(verification) =
                    verify_model_independent(&portfolio, dqs, eps, opts.grid_density)
                {
                    certificates.push(CertificateRecord {
                        source: format!(
                            "maturity {}: {} at {:?}",
                            t,
                            violation.kind.label(),
                            violation.indices
                        ),
                        portfolio,
                        verification,
                    });
                }
            }
        }
        let mut seen_cal = std::collections::BTreeSet::new();
        for violation in &calendar_mi {
            if !seen_cal.insert((violation.basket.maturity, violation.condition.wire_id())) {
                continue;
            }
            let portfolio = calendar_certificate(dqs, eps, violation);
            if let Ok(verification) =
                verify_model_independent(&portfolio, dqs, eps, opts.grid_density)
            {
                certificates.push(CertificateRecord {
                    source: format!("{} versus {:?}", violation.condition.label(), violation.versus),
                    portfolio,
                    verification,
                });
            }
        }
        return Ok(ClassifyReport {
            epsilon: eps.clone(),
            verdict: OverallVerdict::ModelIndependentArbitrage,
            per_maturity,
            calendar_violations,
            certificates,
            weak_witnesses,
            simplified: None,
            model: None,
            witness_mean: None,
            notes,
        });
    }

    let single_weak: Vec<(usize, ConditionViolation)> = per_maturity
        .iter()
        .flat_map(|(t, v)| v.violations.iter().map(|c| (*t, c.clone())).collect::<Vec<_>>())
        .collect();
    let calendar_weak: Vec<&NecessaryViolation> =
        calendar_violations.iter().filter(|v| v.condition.is_degenerate()).collect();
    if !single_weak.is_empty() || !calendar_weak.is_empty() {
        for (t, violation) in &single_weak {
            weak_witnesses.push(single_weak_witness(dqs, eps, *t, violation));
        }
        for violation in &calendar_weak {
            weak_witnesses.push(calendar_weak_witness(dqs, eps, violation));
        }
        return Ok(ClassifyReport {
            epsilon: eps.clone(),
            verdict: OverallVerdict::WeakArbitrage,
            per_maturity,
            calendar_violations,
            certificates,
            weak_witnesses,
            simplified: None,
            model: None,
            witness_mean: None,
            notes,
        });
    }

    // everything necessary holds; try to establish full consistency
    if !battery_complete {
        notes.push(
            "verdict capped at necessary-pass: the calendar battery did not finish".to_string(),
        );
        return Ok(ClassifyReport {
            epsilon: eps.clone(),
            verdict: OverallVerdict::NecessaryPass,
            per_maturity,
            calendar_violations,
            certificates,
            weak_witnesses,
            simplified: None,
            model: None,
            witness_mean: None,
            notes,
        });
    }
    if dqs.horizon() == 1 {
        let strip = augment(dqs, 1, eps).expect("validated");
        let e = shadow_prices(&strip).expect("conditions hold");
        let mean = witness_mean(&strip, &e);
        let (mu, nu) = build_single_model(&strip, &e).expect("conditions hold");
        notes.push(format!(
            "single-maturity witness law has mean {} (pinned by the synthetic underlying band)",
            format_rat(&mean)
        ));
        let kernels = martingale_from_peacock(&[nu.clone()]).expect("trivial");
        let model = assemble_model(
            &[mu],
            &[nu],
            &kernels,
            &dqs.bank,
            eps,
            SpreadConvention::Tight,
        )
        .expect("distance within the bound by construction");
        return Ok(ClassifyReport {
            epsilon: eps.clone(),
            verdict: OverallVerdict::Consistent,
            per_maturity,
            calendar_violations,
            certificates,
            weak_witnesses,
            simplified: None,
            model: Some(model),
            witness_mean: Some(mean),
            notes,
        });
    }

    match synthesize_curves(dqs, eps) {
        Some(input) => match check_simplified(&input) {
            Ok(SimplifiedVerdict::Consistent) => {
                let mus: Vec<_> = input.curves.iter().map(|c| c.measure()).collect();
                let model = peacock_construct(&mus, eps, &input.spot)
                    .ok()
                    .flatten()
                    .and_then(|nus| {
                        let kernels = martingale_from_peacock(&nus).ok()?;
                        assemble_model(&mus, &nus, &kernels, &dqs.bank, eps, SpreadConvention::Tight)
                            .ok()
                    });
                match model {
                    Some(model) => {
                        notes.push(
                            "consistency established through the synthesized frictionless curves"
                                .to_string(),
                        );
                        Ok(ClassifyReport {
                            epsilon: eps.clone(),
                            verdict: OverallVerdict::Consistent,
                            per_maturity,
                            calendar_violations,
                            certificates,
                            weak_witnesses,
                            simplified: Some(SimplifiedVerdict::Consistent),
                            model: Some(model),
                            witness_mean: None,
                            notes,
                        })
                    }
                    None => {
                        notes.push(
                            "chain conditions passed but no witness was assembled; verdict                              capped at necessary-pass"
                                .to_string(),
                        );
                        Ok(ClassifyReport {
                            epsilon: eps.clone(),
                            verdict: OverallVerdict::NecessaryPass,
                            per_maturity,
                            calendar_violations,
                            certificates,
                            weak_witnesses,
                            simplified: Some(SimplifiedVerdict::Consistent),
                            model: None,
                            witness_mean: None,
                            notes,
                        })
                    }
                }
            }
            Ok(v @ SimplifiedVerdict::Violated(_)) => {
                notes.push(
                    "necessary conditions hold; the synthesized-curve chain check failed, so \
                     full consistency is not established"
                        .to_string(),
                );
                Ok(ClassifyReport {
                    epsilon: eps.clone(),
                    verdict: OverallVerdict::NecessaryPass,
                    per_maturity,
                    calendar_violations,
                    certificates,
                    weak_witnesses,
                    simplified: Some(v),
                    model: None,
                    witness_mean: None,
                    notes,
                })
            }
            Err(e) => {
                notes.push(format!(
                    "necessary conditions hold; the chain check was not applicable ({})",
                    e
                ));
                Ok(ClassifyReport {
                    epsilon: eps.clone(),
                    verdict: OverallVerdict::NecessaryPass,
                    per_maturity,
                    calendar_violations,
                    certificates,
                    weak_witnesses,
                    simplified: None,
                    model: None,
                    witness_mean: None,
                    notes,
                })
            }
        },
        None => {
            notes.push(
                "necessary conditions hold; sufficiency for general multi-maturity spreads \
                 is outside the decidable fragment, so the verdict is a necessary-pass"
                    .to_string(),
            );
            Ok(ClassifyReport {
                epsilon: eps.clone(),
                verdict: OverallVerdict::NecessaryPass,
                per_maturity,
                calendar_violations,
                certificates,
                weak_witnesses,
                simplified: None,
                model: None,
                witness_mean: None,
                notes,
            })
        }
    }
}

/// Implied frictionless quotes of a model: the call curve of the reference
/// marginal evaluated at every original strike.
pub fn implied_quotes(model: &FiniteModel, dqs: &DiscountedQuoteSet) -> DiscountedQuoteSet {
    let mut out = dqs.clone();
    for t in 1..=dqs.horizon() {
        if dqs.options[t].is_empty() {
            continue;
        }
        let curve = crate::measures::call_function(&model.reference_marginal(t));
        for q in &mut out.options[t] {
            let v = curve.eval(&q.strike);
            q.bid = v.clone();
            q.ask = v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificates::initial_value;
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

    fn rising_ask_dqs() -> DiscountedQuoteSet {
        let doc = r#"{"bank": [1, 1],
            "underlying": {"bid": 4, "ask": 4},
            "options": [
              {"t": 1, "strike": 1, "bid": 1.5, "ask": 6},
              {"t": 1, "strike": 2, "bid": 2, "ask": 7}
            ]}"#;
        discount(&parse_quotes(doc).unwrap())
    }

    #[test]
    fn rising_ask_instance_is_consistent_with_model() {
        let report = classify(&rising_ask_dqs(), &rat(0), &ClassifyOptions::default()).unwrap();
        assert_eq!(report.verdict, OverallVerdict::Consistent);
        let model = report.model.expect("witness model");
        model.validate().unwrap();
        model.validate_spread_bound(&rat(0)).unwrap();
        assert_eq!(report.witness_mean, Some(rat(4)));
        // the witness mean is pinned at the spot, not at the remark's point law
        assert_ne!(report.witness_mean, Some(rat(5)));
    }

    #[test]
    fn motivating_example_is_mi_at_zero() {
        let report = classify(&motivating_dqs(1), &rat(0), &ClassifyOptions::default()).unwrap();
        assert_eq!(report.verdict, OverallVerdict::ModelIndependentArbitrage);
        assert!(report
            .calendar_violations
            .iter()
            .any(|v| v.condition == NecessaryCondition::Nonnegativity));
        // every attached certificate verifies on the grid
        assert!(!report.certificates.is_empty());
        for c in &report.certificates {
            assert!(c.verification.verified(), "{}", c.source);
        }
    }

    #[test]
    fn motivating_example_is_weak_above_the_calendar_threshold() {
        let report =
            classify(&motivating_dqs(1), &ratio(3, 4), &ClassifyOptions::default()).unwrap();
        assert_eq!(report.verdict, OverallVerdict::WeakArbitrage);
        assert!(!report.weak_witnesses.is_empty());
    }

    #[test]
    fn increasing_frictionless_prices_yield_certificates() {
        let doc = r#"{"bank": [1, 1],
            "underlying": {"bid": 5, "ask": 5},
            "options": [
              {"t": 1, "strike": 1, "bid": 1, "ask": 1},
              {"t": 1, "strike": 2, "bid": 2, "ask": 2}
            ]}"#;
        let dqs = discount(&parse_quotes(doc).unwrap());
        let report = classify(&dqs, &rat(0), &ClassifyOptions::default()).unwrap();
        assert_eq!(report.verdict, OverallVerdict::ModelIndependentArbitrage);
        let cert = report
            .certificates
            .iter()
            .find(|c| c.source.contains("call-spread price"))
            .expect("call spread certificate");
        assert!(cert.verification.verified());
        assert!(cert.verification.initial_value.is_negative());
    }

    #[test]
    fn weak_witness_branches_work_on_models() {
        // degenerate single-maturity instance: near call at the underlying ask
        let dqs = motivating_dqs(1);
        let eps = ratio(3, 4);
        let report = classify(&dqs, &eps, &ClassifyOptions::default()).unwrap();
        let witness = report
            .weak_witnesses
            .iter()
            .find(|w| matches!(w.trigger, WeakTrigger::CallItm { .. }))
            .expect("single-maturity witness");
        // a model where the call lands in the money: reference above strike
        let itm_model = crate::model::deterministic_model(
            vec![rat(1), rat(1), rat(1)],
            vec![
                (rat(2), rat(2), rat(2), rat(2)),
                (ratio(7, 4), ratio(5, 2), ratio(5, 2), rat(2)),
                (ratio(7, 4), rat(2), ratio(5, 2), rat(2)),
            ],
        );
        itm_model.validate().unwrap();
        let branch = weak_branch(witness, &itm_model, &dqs, &eps).unwrap();
        assert_eq!(branch as *const _, &witness.if_exercised as *const _);
        let ledger = execute(branch, &itm_model, &eps).unwrap();
        for p in &ledger.paths {
            assert!(!p.terminal_bank().is_negative());
            assert_eq!(p.terminal_stock(), rat(0));
        }
        // cost at most zero, gain on the in-the-money path
        let r = initial_value(branch, &dqs, &eps).unwrap();
        assert!(!r.is_positive());
        assert!(ledger.paths.iter().any(|p| p.terminal_bank().is_positive()));
    }

    #[test]
    fn frictionless_multi_maturity_instance_builds_a_model() {
        let doc = r#"{"bank": [1, 1, 1], "underlying": {"bid": 4, "ask": 4},
            "options": [
              {"t": 1, "strike": 3, "bid": 1.5, "ask": 1.5},
              {"t": 2, "strike": 3, "bid": 1.75, "ask": 1.75}]}"#;
        let dqs = discount(&parse_quotes(doc).unwrap());
        // wide enough bound: fully consistent with an assembled witness tree
        let report = classify(&dqs, &rat(1), &ClassifyOptions::default()).unwrap();
        assert_eq!(report.verdict, OverallVerdict::Consistent);
        let model = report.model.expect("witness");
        model.validate().unwrap();
        model.validate_spread_bound(&rat(1)).unwrap();
        for t in [1usize, 2] {
            let curve = crate::measures::call_function(&model.reference_marginal(t));
            for q in &dqs.options[t] {
                assert_eq!(curve.eval(&q.strike), q.bid);
            }
        }
        // decreasing calendar prices need a genuine spread to explain
        let doc = r#"{"bank": [1, 1, 1], "underlying": {"bid": 4, "ask": 4},
            "options": [
              {"t": 1, "strike": 3, "bid": 1.75, "ask": 1.75},
              {"t": 2, "strike": 3, "bid": 1.5, "ask": 1.5}]}"#;
        let falling = discount(&parse_quotes(doc).unwrap());
        let tight = classify(&falling, &ratio(1, 100), &ClassifyOptions::default()).unwrap();
        assert_ne!(tight.verdict, OverallVerdict::Consistent);
        let wide = classify(&falling, &rat(1), &ClassifyOptions::default()).unwrap();
        assert_eq!(wide.verdict, OverallVerdict::Consistent);
        wide.model.expect("witness").validate().unwrap();
    }

    #[test]
    fn implied_quotes_close_the_loop() {
        let report = classify(&rising_ask_dqs(), &rat(0), &ClassifyOptions::default()).unwrap();
        let model = report.model.unwrap();
        let implied = implied_quotes(&model, &rising_ask_dqs());
        // implied prices sit inside the original bands
        let orig = rising_ask_dqs();
        for t in 1..=orig.horizon() {
            for (q, o) in implied.options[t].iter().zip(&orig.options[t]) {
                assert!(q.bid >= o.bid && q.ask <= o.ask);
            }
        }
        let re = classify(&implied, &rat(0), &ClassifyOptions::default()).unwrap();
        assert_eq!(re.verdict, OverallVerdict::Consistent);
    }
}
