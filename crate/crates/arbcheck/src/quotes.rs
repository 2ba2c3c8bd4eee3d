//! Market data: bank account, call quotes per maturity, underlying bid/ask.
//!
//! Ingestion is strict: crossed quotes and nonpositive prices are data errors,
//! not arbitrage. Duplicate records for the same (maturity, strike) merge by
//! max bid / min ask and the merged band must be nonempty.

use crate::num::{json_to_rat, rat_to_json, Rat};
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QuoteError {
    #[error("malformed quote document: {0}")]
    Malformed(String),
    #[error("bank account must start at 1")]
    BankNotNormalized,
    #[error("bank account values must be positive")]
    NonPositiveBank,
    #[error("quote document needs at least one future period")]
    NoFuturePeriods,
    #[error("maturity {0} out of range")]
    MaturityOutOfRange(usize),
    #[error("prices and strikes must be strictly positive")]
    NonPositivePrice,
    #[error("bid exceeds ask at maturity {t} strike {strike}")]
    CrossedQuote { t: usize, strike: String },
    #[error("underlying bid exceeds ask")]
    CrossedUnderlying,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ValidationError {
    #[error("discounted strike at maturity {t} is not above the spread bound")]
    StrikeBelowEpsilon { t: usize },
    #[error("underlying bid minus twice the spread bound is not positive")]
    PseudoBidNonpositive,
    #[error("spread bound must be nonnegative")]
    NegativeEpsilon,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptionQuote {
    pub strike: Rat,
    pub bid: Rat,
    pub ask: Rat,
}

/// Raw quotes: bank account B(0..T) with B(0) = 1, per-maturity sorted call
/// quotes, and the underlying bid/ask at time zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuoteSet {
    pub bank: Vec<Rat>,
    /// `options[t]` holds the quotes with maturity `t`; index 0 is unused.
    pub options: Vec<Vec<OptionQuote>>,
    pub underlying_bid: Rat,
    pub underlying_ask: Rat,
}

/// Same data with strikes discounted by 1/B(t).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscountedQuoteSet {
    pub bank: Vec<Rat>,
    /// `options[t].strike` is the discounted strike k = K / B(t).
    pub options: Vec<Vec<OptionQuote>>,
    pub underlying_bid: Rat,
    pub underlying_ask: Rat,
}

impl QuoteSet {
    pub fn horizon(&self) -> usize {
        self.bank.len() - 1
    }

    pub fn to_json(&self) -> Value {
        let mut opts = Vec::new();
        for (t, quotes) in self.options.iter().enumerate() {
            for q in quotes {
                opts.push(json!({
                    "t": t,
                    "strike": rat_to_json(&q.strike),
                    "bid": rat_to_json(&q.bid),
                    "ask": rat_to_json(&q.ask),
                }));
            }
        }
        json!({
            "bank": self.bank.iter().map(rat_to_json).collect::<Vec<_>>(),
            "underlying": {
                "bid": rat_to_json(&self.underlying_bid),
                "ask": rat_to_json(&self.underlying_ask),
            },
            "options": opts,
        })
    }
}

impl DiscountedQuoteSet {
    pub fn horizon(&self) -> usize {
        self.bank.len() - 1
    }

    /// 1/B(t).
    pub fn discount_factor(&self, t: usize) -> Rat {
        Rat::one() / &self.bank[t]
    }

    /// Maturities that carry at least one quote.
    pub fn quoted_maturities(&self) -> Vec<usize> {
        (1..self.options.len()).filter(|t| !self.options[*t].is_empty()).collect()
    }
}

fn field<'v>(v: &'v Value, name: &str) -> Result<&'v Value, QuoteError> {
    v.get(name).ok_or_else(|| QuoteError::Malformed(format!("missing field {:?}", name)))
}

fn read_rat(v: &Value, what: &str) -> Result<Rat, QuoteError> {
    json_to_rat(v).map_err(|e| QuoteError::Malformed(format!("{}: {}", what, e)))
}

/// Parses the JSON quote document
/// `{"bank": [...], "underlying": {"bid": .., "ask": ..}, "options": [{"t", "strike", "bid", "ask"}, ...]}`.
pub fn parse_quotes(source: &str) -> Result<QuoteSet, QuoteError> {
    let doc: Value =
        serde_json::from_str(source).map_err(|e| QuoteError::Malformed(e.to_string()))?;
    let bank_v = field(&doc, "bank")?
        .as_array()
        .ok_or_else(|| QuoteError::Malformed("bank must be an array".into()))?;
    let bank: Vec<Rat> =
        bank_v.iter().map(|v| read_rat(v, "bank")).collect::<Result<_, _>>()?;
    if bank.len() < 2 {
        return Err(QuoteError::NoFuturePeriods);
    }
    if !bank[0].is_one() {
        return Err(QuoteError::BankNotNormalized);
    }
    if bank.iter().any(|b| !b.is_positive()) {
        return Err(QuoteError::NonPositiveBank);
    }
    let horizon = bank.len() - 1;
    let underlying = field(&doc, "underlying")?;
    let underlying_bid = read_rat(field(underlying, "bid")?, "underlying bid")?;
    let underlying_ask = read_rat(field(underlying, "ask")?, "underlying ask")?;
    if !underlying_bid.is_positive() || !underlying_ask.is_positive() {
        return Err(QuoteError::NonPositivePrice);
    }
    if underlying_bid > underlying_ask {
        return Err(QuoteError::CrossedUnderlying);
    }
    let mut options: Vec<Vec<OptionQuote>> = vec![Vec::new(); horizon + 1];
    for entry in field(&doc, "options")?
        .as_array()
        .ok_or_else(|| QuoteError::Malformed("options must be an array".into()))?
    {
        let t = field(entry, "t")?
            .as_u64()
            .ok_or_else(|| QuoteError::Malformed("maturity t must be an integer".into()))?
            as usize;
        if t == 0 || t > horizon {
            return Err(QuoteError::MaturityOutOfRange(t));
        }
        let q = OptionQuote {
            strike: read_rat(field(entry, "strike")?, "strike")?,
            bid: read_rat(field(entry, "bid")?, "bid")?,
            ask: read_rat(field(entry, "ask")?, "ask")?,
        };
        if !q.strike.is_positive() || !q.bid.is_positive() || !q.ask.is_positive() {
            return Err(QuoteError::NonPositivePrice);
        }
        options[t].push(q);
    }
    // sort and merge duplicates: max bid, min ask, band must stay nonempty
    for (t, quotes) in options.iter_mut().enumerate() {
        quotes.sort_by(|a, b| a.strike.cmp(&b.strike));
        let mut merged: Vec<OptionQuote> = Vec::with_capacity(quotes.len());
        for q in quotes.drain(..) {
            match merged.last_mut() {
                Some(prev) if prev.strike == q.strike => {
                    prev.bid = crate::num::max_rat(prev.bid.clone(), q.bid);
                    prev.ask = crate::num::min_rat(prev.ask.clone(), q.ask);
                }
                _ => merged.push(q),
            }
        }
        for q in &merged {
            if q.bid > q.ask {
                return Err(QuoteError::CrossedQuote {
                    t,
                    strike: crate::num::format_rat(&q.strike),
                });
            }
        }
        *quotes = merged;
    }
    Ok(QuoteSet { bank, options, underlying_bid, underlying_ask })
}

/// Discounts strikes: k = K / B(t). Strike ordering is preserved because the
/// per-maturity factor is a positive constant.
pub fn discount(qs: &QuoteSet) -> DiscountedQuoteSet {
    let options = qs
        .options
        .iter()
        .enumerate()
        .map(|(t, quotes)| {
            quotes
                .iter()
                .map(|q| OptionQuote {
                    strike: &q.strike / &qs.bank[t],
                    bid: q.bid.clone(),
                    ask: q.ask.clone(),
                })
                .collect()
        })
        .collect();
    DiscountedQuoteSet {
        bank: qs.bank.clone(),
        options,
        underlying_bid: qs.underlying_bid.clone(),
        underlying_ask: qs.underlying_ask.clone(),
    }
}

/// Checks the standing assumptions for a spread bound: every discounted
/// strike exceeds `eps`, and the synthetic underlying bid stays positive.
pub fn validate_for_epsilon(dqs: &DiscountedQuoteSet, eps: &Rat) -> Result<(), ValidationError> {
    if eps.is_negative() {
        return Err(ValidationError::NegativeEpsilon);
    }
    for t in dqs.quoted_maturities() {
        if dqs.options[t][0].strike <= *eps {
            return Err(ValidationError::StrikeBelowEpsilon { t });
        }
    }
    let two = Rat::from_integer(2.into());
    if &dqs.underlying_bid - two * eps <= Rat::zero() {
        return Err(ValidationError::PseudoBidNonpositive);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{parse_rat, rat, ratio};

    pub(crate) fn motivating_example_doc(c: i64) -> String {
        // two maturities, one strike each, wide calendar mispricing of size c
        format!(
            r#"{{"bank": [1, 1, 1],
                "underlying": {{"bid": 2, "ask": 2}},
                "options": [
                  {{"t": 1, "strike": 1, "bid": {c1}, "ask": {c1}}},
                  {{"t": 2, "strike": 1, "bid": 1, "ask": 1}}
                ]}}"#,
            c1 = c + 1
        )
    }

    #[test]
    fn parses_motivating_example() {
        let qs = parse_quotes(&motivating_example_doc(1)).unwrap();
        assert_eq!(qs.horizon(), 2);
        assert_eq!(qs.options[1].len(), 1);
        assert_eq!(qs.options[2].len(), 1);
        assert_eq!(qs.options[1][0].bid, rat(2));
        assert_eq!(qs.options[2][0].ask, rat(1));
        assert_eq!(qs.underlying_bid, rat(2));
    }

    #[test]
    fn resorts_unsorted_strikes() {
        let doc = r#"{"bank": [1, 1],
            "underlying": {"bid": 4, "ask": 4},
            "options": [
              {"t": 1, "strike": 2, "bid": 1, "ask": 2},
              {"t": 1, "strike": 1, "bid": 2, "ask": 3}
            ]}"#;
        let qs = parse_quotes(doc).unwrap();
        assert_eq!(qs.options[1][0].strike, rat(1));
        assert_eq!(qs.options[1][1].strike, rat(2));
    }

    #[test]
    fn rejects_crossed_quote() {
        let doc = r#"{"bank": [1, 1],
            "underlying": {"bid": 4, "ask": 4},
            "options": [{"t": 1, "strike": 1, "bid": 3, "ask": 2}]}"#;
        assert!(matches!(parse_quotes(doc), Err(QuoteError::CrossedQuote { .. })));
    }

    #[test]
    fn merges_duplicate_strikes() {
        let doc = r#"{"bank": [1, 1],
            "underlying": {"bid": 4, "ask": 4},
            "options": [
              {"t": 1, "strike": 1, "bid": 1, "ask": 3},
              {"t": 1, "strike": 1, "bid": 2, "ask": 4}
            ]}"#;
        let qs = parse_quotes(doc).unwrap();
        assert_eq!(qs.options[1].len(), 1);
        assert_eq!(qs.options[1][0].bid, rat(2));
        assert_eq!(qs.options[1][0].ask, rat(3));
    }

    #[test]
    fn discount_examples() {
        let doc = r#"{"bank": [1, 1],
            "underlying": {"bid": 4, "ask": 4},
            "options": [{"t": 1, "strike": 100, "bid": 1, "ask": 2}]}"#;
        let dqs = discount(&parse_quotes(doc).unwrap());
        assert_eq!(dqs.options[1][0].strike, rat(100));

        let doc = r#"{"bank": [1, 2],
            "underlying": {"bid": 4, "ask": 4},
            "options": [{"t": 1, "strike": 100, "bid": 1, "ask": 2}]}"#;
        let dqs = discount(&parse_quotes(doc).unwrap());
        assert_eq!(dqs.options[1][0].strike, rat(50));

        let doc = r#"{"bank": [1, 1.05],
            "underlying": {"bid": 4, "ask": 4},
            "options": [{"t": 1, "strike": 105, "bid": 1, "ask": 2}]}"#;
        let dqs = discount(&parse_quotes(doc).unwrap());
        assert_eq!(dqs.options[1][0].strike, rat(100));
    }

    #[test]
    fn round_trip_is_value_stable() {
        let qs = parse_quotes(&motivating_example_doc(5)).unwrap();
        let reparsed = parse_quotes(&qs.to_json().to_string()).unwrap();
        assert_eq!(qs, reparsed);
        // with a non-decimal rational in the data
        let doc = r#"{"bank": [1, 1.05],
            "underlying": {"bid": 4, "ask": 4.5},
            "options": [{"t": 1, "strike": 105, "bid": 0.25, "ask": 0.5}]}"#;
        let qs = parse_quotes(doc).unwrap();
        let dqs = discount(&qs);
        assert_eq!(dqs.options[1][0].strike, rat(100));
        let reparsed = parse_quotes(&qs.to_json().to_string()).unwrap();
        assert_eq!(qs, reparsed);
        assert_eq!(parse_rat("1.05").unwrap(), qs.bank[1]);
    }

    #[test]
    fn validation_examples() {
        let dqs = discount(&parse_quotes(&motivating_example_doc(1)).unwrap());
        assert!(validate_for_epsilon(&dqs, &rat(0)).is_ok());
        assert!(validate_for_epsilon(&dqs, &ratio(1, 2)).is_ok());
        assert_eq!(
            validate_for_epsilon(&dqs, &rat(1)),
            Err(ValidationError::StrikeBelowEpsilon { t: 1 })
        );
        // pseudo bid 2 - 2*eps must stay positive: eps < 1, so 0.99 passes
        assert!(validate_for_epsilon(&dqs, &ratio(99, 100)).is_ok());
    }
}
