//! Consistency analysis of European call quotes under bid-ask spreads.
//!
//! Given a finite set of call bid/ask quotes and an underlying bid/ask, the
//! library decides whether a market model with discounted underlying spread
//! bounded by a given `eps` can reproduce the quotes, produces explicit
//! arbitrage certificates or explicit finite models as witnesses, and finds
//! the minimal explaining bound. All checks run in exact rational arithmetic.
//!
//! The runnable examples under `examples/` walk through each capability; the
//! thin `arbcheck` binary exposes the same analyses as subcommands.
//!
//! ```
//! use arbcheck::{classify, ClassifyOptions, OverallVerdict};
//! use arbcheck::num::rat;
//! use arbcheck::quotes::{discount, parse_quotes};
//!
//! let quotes = parse_quotes(r#"{
//!     "bank": [1, 1],
//!     "underlying": {"bid": 4, "ask": 4},
//!     "options": [{"t": 1, "strike": 2, "bid": 2.5, "ask": 2.5}]
//! }"#).unwrap();
//! let report = classify(&discount(&quotes), &rat(0), &ClassifyOptions::default()).unwrap();
//! assert_eq!(report.verdict, OverallVerdict::Consistent);
//! assert!(report.model.is_some());
//! ```

pub mod certificates;
pub mod classify;
pub mod cli;
pub mod linfeas;
pub mod measures;
pub mod model;
pub mod multi_maturity;
pub mod num;
pub mod pwl;
pub mod quotes;
pub mod sim;
pub mod single_maturity;
pub mod util;

pub use certificates::{
    execute, initial_value, verify_model_independent, DynamicRule, Ledger, OptionLeg,
    SemiStaticPortfolio,
};
pub use classify::{classify, ClassifyOptions, ClassifyReport, OverallVerdict};
pub use measures::{
    call_function, close_coupling_feasible, convex_order_leq, envelopes, is_peacock,
    winf_distance, CallFunction, DiscreteMeasure,
};
pub use model::FiniteModel;
pub use multi_maturity::{
    assemble_model, check_necessary, check_p_bounded, check_simplified, check_unbounded,
    martingale_from_peacock, min_epsilon, peacock_construct, CalendarBasket, ConsistencyMode,
    SimplifiedInput, SimplifiedVerdict, SpreadConvention,
};
pub use num::Rat;
pub use quotes::{discount, parse_quotes, validate_for_epsilon, DiscountedQuoteSet, QuoteSet};
pub use single_maturity::{
    augment, build_single_model, check_conditions, shadow_prices, AugmentedStrip, SingleVerdict,
    Trichotomy,
};
