//! Property suites for the structural invariants: serialization stability,
//! the measure/call-function bijection, order relations, coupling
//! monotonicity, ledger self-financing, witness hypotheses, the written
//! basket's replication bound at zero spread, and CLI exit-code totality.

use arbcheck::certificates::{execute, initial_value, DynamicRule, OptionLeg, SemiStaticPortfolio};
use arbcheck::measures::{
    call_function, close_coupling_feasible, convex_order_leq, max_close_mass, winf_distance,
    DiscreteMeasure,
};
use arbcheck::multi_maturity::{basket_strategy, enumerate_baskets};
use arbcheck::num::{parse_rat, rat, ratio, Rat};
use arbcheck::quotes::{discount, parse_quotes, validate_for_epsilon};
use arbcheck::single_maturity::{augment, build_single_model, check_conditions, shadow_prices, Trichotomy};
use arbcheck::util::SplitMix64;
use num_traits::{One, Signed, Zero};

fn random_measure(rng: &mut SplitMix64, max_atoms: usize, lo: i64, hi: i64) -> DiscreteMeasure {
    let n = 1 + rng.below(max_atoms as u64) as usize;
    let weights: Vec<i64> = (0..n).map(|_| rng.below(4) as i64 + 1).collect();
    let total: i64 = weights.iter().sum();
    let mut atoms: Vec<(Rat, Rat)> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for w in &weights {
        let mut x = ratio(lo * 4 + rng.below(((hi - lo) * 4 + 1) as u64) as i64, 4);
        while seen.contains(&x) {
            x = x + ratio(1, 4);
        }
        seen.insert(x.clone());
        atoms.push((x, ratio(*w, total)));
    }
    DiscreteMeasure::new(atoms).unwrap()
}

#[test]
fn quote_documents_round_trip_exactly() {
    let mut rng = SplitMix64::new(42);
    for _ in 0..50 {
        let b1 = format!("1.{:03}", rng.below(1000));
        let doc = format!(
            r#"{{"bank": [1, {b1}],
                "underlying": {{"bid": {bid}, "ask": {ask}}},
                "options": [
                  {{"t": 1, "strike": {k}, "bid": 0.25, "ask": {oask}}}
                ]}}"#,
            b1 = b1,
            bid = format!("{}.{:02}", 4 + rng.below(4), rng.below(100)),
            ask = 9,
            k = format!("{}.{:06}", 1 + rng.below(4), rng.below(1_000_000)),
            oask = format!("0.{:012}", rng.below(1_000_000_000) + 250_000_000_000),
        );
        let qs = parse_quotes(&doc).unwrap();
        let reparsed = parse_quotes(&qs.to_json().to_string()).unwrap();
        assert_eq!(qs, reparsed);
        let twice = parse_quotes(&reparsed.to_json().to_string()).unwrap();
        assert_eq!(reparsed, twice);
        // zero bound always validates on positive quote documents
        assert!(validate_for_epsilon(&discount(&qs), &rat(0)).is_ok());
    }
}

#[test]
fn bijection_and_mean_anchor() {
    let mut rng = SplitMix64::new(7);
    for _ in 0..200 {
        let mu = random_measure(&mut rng, 5, 0, 10);
        let cf = call_function(&mu);
        assert_eq!(cf.measure(), mu);
        // for nonnegative support the mean is the call value at zero
        assert_eq!(cf.eval(&rat(0)), mu.mean());
    }
}

#[test]
fn convex_order_transitive() {
    let mut rng = SplitMix64::new(11);
    let mut hits = 0;
    while hits < 60 {
        let nu = random_measure(&mut rng, 3, 0, 8);
        // mu below nu: collapse some mass toward the mean; rho above: spread it
        let mu = DiscreteMeasure::dirac(nu.mean());
        let mut atoms: Vec<(Rat, Rat)> = Vec::new();
        for (x, w) in nu.atoms() {
            atoms.push((x - rat(1), w * ratio(1, 2)));
            atoms.push((x + rat(1), w * ratio(1, 2)));
        }
        let rho = DiscreteMeasure::new(atoms).unwrap();
        assert!(convex_order_leq(&mu, &nu));
        assert!(convex_order_leq(&nu, &rho));
        assert!(convex_order_leq(&mu, &rho));
        hits += 1;
    }
}

#[test]
fn coupling_feasibility_monotone_in_radius_and_tail() {
    let mut rng = SplitMix64::new(13);
    for _ in 0..100 {
        let mu = random_measure(&mut rng, 4, 0, 8);
        let nu = random_measure(&mut rng, 4, 0, 8);
        let e1 = ratio(rng.below(4) as i64, 2);
        let e2 = &e1 + ratio(1 + rng.below(4) as i64, 2);
        let p1 = ratio(1 + rng.below(3) as i64, 8);
        let p2 = &p1 + ratio(1, 4);
        // shipping more is possible at a wider radius
        assert!(max_close_mass(&mu, &nu, &e1) <= max_close_mass(&mu, &nu, &e2));
        if close_coupling_feasible(&mu, &nu, &e1, &p1) {
            assert!(close_coupling_feasible(&mu, &nu, &e2, &p1));
            assert!(close_coupling_feasible(&mu, &nu, &e1, &p2));
        }
    }
}

#[test]
fn ledger_matches_the_self_financing_recursion() {
    // replay a static-plus-cover portfolio by hand and compare bank series
    let mut rng = SplitMix64::new(17);
    for _ in 0..50 {
        let bank = vec![rat(1), ratio(11, 10), ratio(121, 100)];
        let eps = ratio(1, 2);
        let start = rat(6);
        let model = arbcheck::sim::random_bounded_model(&bank, &eps, &start, &mut rng);
        let strike = rat(5) + ratio(rng.below(8) as i64, 2);
        let qty = ratio(rng.below(5) as i64 - 2, 1);
        let portfolio = SemiStaticPortfolio {
            initial_bank: ratio(rng.below(5) as i64 - 2, 2),
            initial_stock: rat(0),
            legs: vec![OptionLeg {
                maturity: 2,
                strike_index: 1,
                strike: strike.clone(),
                qty: qty.clone(),
            }],
            rule: DynamicRule::Static,
        };
        let ledger = execute(&portfolio, &model, &eps).unwrap();
        for path in &ledger.paths {
            // hand recursion: bank_t = bank_{t-1} + payoff_t / B(t)
            let mut bank_units = portfolio.initial_bank.clone();
            for (t, node) in path.nodes.iter().enumerate().skip(1) {
                if t == 2 {
                    let payoff = {
                        let d = &model.nodes[*node].reference - &strike;
                        if d.is_positive() {
                            d
                        } else {
                            rat(0)
                        }
                    };
                    bank_units = bank_units + &qty * payoff / &bank[t];
                }
                assert_eq!(path.bank[t], bank_units);
            }
        }
    }
}

#[test]
fn consistent_strips_yield_witnesses_satisfying_the_hypotheses() {
    let mut rng = SplitMix64::new(19);
    let mut seen = 0;
    for _ in 0..300 {
        // decreasing frictionless-ish prices around a spot make many
        // consistent strips
        let n = 1 + rng.below(3) as usize;
        let spot = rat(6) + ratio(rng.below(4) as i64, 2);
        let mut k = ratio(2 + rng.below(3) as i64, 2);
        let mut options = String::new();
        for _ in 0..n {
            let bid = {
                let base = &spot - &k - ratio(rng.below(4) as i64, 4);
                if base.is_positive() {
                    base
                } else {
                    ratio(1, 8)
                }
            };
            options.push_str(&format!(
                r#"{{"t": 1, "strike": "{}", "bid": "{}", "ask": "{}"}},"#,
                k,
                bid,
                &bid + ratio(rng.below(6) as i64 + 1, 4)
            ));
            k = &k + ratio(1 + rng.below(3) as i64, 2);
        }
        options.pop();
        let doc = format!(
            r#"{{"bank": [1, 1], "underlying": {{"bid": "{s}", "ask": "{s}"}}, "options": [{o}]}}"#,
            s = spot,
            o = options
        );
        let dqs = discount(&parse_quotes(&doc).unwrap());
        let eps = ratio(rng.below(3) as i64, 4);
        if validate_for_epsilon(&dqs, &eps).is_err() {
            continue;
        }
        let strip = augment(&dqs, 1, &eps).unwrap();
        if !matches!(check_conditions(&strip).tag, Trichotomy::Consistent) {
            continue;
        }
        let e = shadow_prices(&strip).unwrap();
        let (mu, nu) = build_single_model(&strip, &e).unwrap();
        let r = call_function(&mu);
        for q in &dqs.options[1] {
            let v = r.eval(&q.strike);
            assert!(v >= q.bid && v <= q.ask);
        }
        assert!(mu.min_support() >= &eps);
        assert!(winf_distance(&mu, &nu) <= eps);
        assert!(nu.mean() >= dqs.underlying_bid && nu.mean() <= dqs.underlying_ask);
        seen += 1;
    }
    assert!(seen > 50, "only {} consistent strips", seen);
}

#[test]
fn written_basket_replicates_a_short_call_at_zero_spread() {
    // at zero spread with tightly held legs, the hedge super-replicates the
    // written call at the basket maturity, with equality on all-in-the-money
    // paths
    let doc = r#"{"bank": [1, 1, 1],
        "underlying": {"bid": 6, "ask": 6},
        "options": [
          {"t": 1, "strike": 4, "bid": 2.5, "ask": 2.5},
          {"t": 2, "strike": 4, "bid": 2.5, "ask": 2.5},
          {"t": 2, "strike": 5, "bid": 2, "ask": 2}
        ]}"#;
    let dqs = discount(&parse_quotes(doc).unwrap());
    let eps = rat(0);
    let mut rng = SplitMix64::new(23);
    for basket in enumerate_baskets(&dqs, &eps, 2, 100) {
        // tight chains only: every held strike equals the previous anchor
        let tight = basket
            .held
            .iter()
            .enumerate()
            .all(|(idx, &i)| {
                arbcheck::multi_maturity::cvb::leg_strike(&dqs, &eps, idx + 2, i).unwrap()
                    == basket.anchors[idx]
            });
        if !tight {
            continue;
        }
        let strategy = basket_strategy(&dqs, &basket);
        for _ in 0..20 {
            let model =
                arbcheck::sim::random_bounded_model(&dqs.bank, &eps, &rat(6), &mut rng);
            let ledger = execute(&strategy, &model, &eps).unwrap();
            let u = basket.maturity;
            let strike = arbcheck::multi_maturity::cvb::leg_strike(&dqs, &eps, u, basket.pinned[u - 1])
                .unwrap();
            for path in &ledger.paths {
                let node = &model.nodes[path.nodes[u]];
                let payoff = {
                    let d = model.discount(u) * &node.reference - &strike;
                    if d.is_positive() {
                        d
                    } else {
                        rat(0)
                    }
                };
                let liquidation =
                    &path.bank[u] + &path.dyn_stock[u] * model.discount(u) * &node.bid;
                assert!(liquidation >= -payoff.clone(), "basket {:?}", basket);
                // all-in-the-money paths replicate exactly
                let all_itm = (1..=u).all(|t| {
                    let k = arbcheck::multi_maturity::cvb::leg_strike(
                        &dqs,
                        &eps,
                        t,
                        basket.pinned[t - 1],
                    )
                    .unwrap();
                    model.discount(t) * &model.nodes[path.nodes[t]].reference > k
                });
                if all_itm && basket.pinned.iter().all(|&j| j > 0) {
                    assert_eq!(liquidation, -payoff, "basket {:?}", basket);
                }
            }
        }
    }
}

#[test]
fn shipped_mass_matches_the_cut_dual() {
    // transportation duality: the maximal mass shipped along admissible arcs
    // equals the minimum over left subsets L of mass(L) plus the mass of
    // right nodes reachable from outside L
    let mut rng = SplitMix64::new(29);
    for _ in 0..200 {
        let mu = random_measure(&mut rng, 4, 0, 8);
        let nu = random_measure(&mut rng, 4, 0, 8);
        let eps = ratio(rng.below(9) as i64, 2);
        let shipped = max_close_mass(&mu, &nu, &eps);
        let n = mu.atoms().len();
        let admissible = |i: usize, j: usize| -> bool {
            (&mu.atoms()[i].0 - &nu.atoms()[j].0).abs() <= eps
        };
        let mut best: Option<Rat> = None;
        for cut in 0u32..(1 << n) {
            let cut_mass: Rat = (0..n)
                .filter(|i| cut & (1 << i) != 0)
                .map(|i| mu.atoms()[i].1.clone())
                .sum();
            let reach_mass: Rat = (0..nu.atoms().len())
                .filter(|&j| (0..n).any(|i| cut & (1 << i) == 0 && admissible(i, j)))
                .map(|j| nu.atoms()[j].1.clone())
                .sum();
            let total = cut_mass + reach_mass;
            best = Some(match best {
                None => total,
                Some(b) => {
                    if total < b {
                        total
                    } else {
                        b
                    }
                }
            });
        }
        assert_eq!(shipped, best.unwrap());
    }
}

#[test]
fn exit_codes_follow_the_verdict() {
    let dir = std::env::temp_dir().join("arbcheck-properties");
    std::fs::create_dir_all(&dir).unwrap();
    let write = |name: &str, content: &str| -> String {
        let p = dir.join(name);
        std::fs::write(&p, content).unwrap();
        p.to_str().unwrap().to_string()
    };
    let consistent = write(
        "consistent.json",
        r#"{"bank": [1, 1], "underlying": {"bid": 4, "ask": 4},
           "options": [{"t": 1, "strike": 2, "bid": 2.5, "ask": 2.5}]}"#,
    );
    let weak = write(
        "weak.json",
        r#"{"bank": [1, 1], "underlying": {"bid": 4, "ask": 4},
           "options": [{"t": 1, "strike": 2, "bid": 4, "ask": 4.5}]}"#,
    );
    let mi = write(
        "mi.json",
        r#"{"bank": [1, 1], "underlying": {"bid": 4, "ask": 4},
           "options": [
             {"t": 1, "strike": 1, "bid": 1, "ask": 1},
             {"t": 1, "strike": 2, "bid": 2, "ask": 2}]}"#,
    );
    let broken = write("broken.json", r#"{"bank": [1, 1]}"#);
    let run = |args: Vec<&str>| -> i32 {
        arbcheck::cli::run(args.into_iter().map(String::from).collect())
    };
    assert_eq!(run(vec!["check", &consistent, "--epsilon", "0", "--format", "json"]), 0);
    assert_eq!(run(vec!["check", &weak, "--epsilon", "0", "--format", "json"]), 2);
    assert_eq!(run(vec!["check", &mi, "--epsilon", "0", "--format", "json"]), 3);
    assert_eq!(run(vec!["check", &broken, "--epsilon", "0"]), 1);
    assert_eq!(run(vec!["min-epsilon", &consistent, "--mode", "single"]), 0);
    // a strike this low cannot clear any positive bound: scan ceiling
    let hopeless = write(
        "hopeless.json",
        r#"{"bank": [1, 1, 1], "underlying": {"bid": 2, "ask": 2},
           "options": [
             {"t": 1, "strike": 0.001, "bid": 3, "ask": 3},
             {"t": 2, "strike": 0.001, "bid": 1, "ask": 1}]}"#,
    );
    assert_eq!(run(vec!["min-epsilon", &hopeless, "--mode", "necessary"]), 4);
}

#[test]
fn weak_witnesses_satisfy_the_model_dependent_definition() {
    // on every random bounded model, the applicable branch has nonpositive
    // setup cost, nonnegative terminal bank, a flat terminal book, and a
    // strictly positive outcome with positive probability
    let doc = r#"{"bank": [1, 1], "underlying": {"bid": 4, "ask": 4},
        "options": [{"t": 1, "strike": 2, "bid": 4, "ask": 4.5}]}"#;
    let dqs = discount(&parse_quotes(doc).unwrap());
    let eps = ratio(1, 2);
    let report = arbcheck::classify(&dqs, &eps, &arbcheck::ClassifyOptions::default()).unwrap();
    assert_eq!(report.verdict, arbcheck::OverallVerdict::WeakArbitrage);
    let mut rng = SplitMix64::new(31);
    let mut exercised = 0usize;
    let mut skipped = 0usize;
    for _ in 0..60 {
        // low starts keep the call out of the money on every branch
        let start = if rng.chance(1, 3) {
            ratio(5, 4)
        } else {
            rat(3) + ratio(rng.below(6) as i64, 2)
        };
        let model = arbcheck::sim::random_bounded_model(&dqs.bank, &eps, &start, &mut rng);
        model.validate().unwrap();
        model.validate_spread_bound(&eps).unwrap();
        for witness in &report.weak_witnesses {
            let branch =
                arbcheck::classify::weak_branch(witness, &model, &dqs, &eps).unwrap();
            if std::ptr::eq(branch, &witness.if_exercised) {
                exercised += 1;
            } else {
                skipped += 1;
            }
            let cost = initial_value(branch, &dqs, &eps).unwrap();
            assert!(!cost.is_positive(), "{}", witness.source);
            let ledger = execute(branch, &model, &eps).unwrap();
            let mut gains = false;
            for path in &ledger.paths {
                assert!(!path.terminal_bank().is_negative(), "{}", witness.source);
                assert_eq!(path.terminal_stock(), rat(0), "{}", witness.source);
                if path.terminal_bank().is_positive() {
                    gains = true;
                }
            }
            assert!(gains, "{} should gain somewhere", witness.source);
        }
    }
    assert!(exercised > 5 && skipped > 5, "{} / {}", exercised, skipped);
}

#[test]
fn chain_check_stable_under_grid_refinement() {
    // the kink grid decides the continuum quantifier; a tenfold finer grid
    // must agree
    use arbcheck::multi_maturity::check_simplified_with_grid;
    use arbcheck::{SimplifiedInput, SimplifiedVerdict};
    let mut rng = SplitMix64::new(37);
    for _ in 0..25 {
        let horizon = 2 + rng.below(2) as usize;
        let eps = ratio(1 + rng.below(3) as i64, 4);
        let mus: Vec<DiscreteMeasure> =
            (0..horizon).map(|_| random_measure(&mut rng, 3, 3, 9)).collect();
        if mus.iter().any(|mu| mu.min_support() <= &eps) {
            continue;
        }
        let input = SimplifiedInput {
            curves: mus.iter().map(call_function).collect(),
            spot: mus[0].mean(),
            epsilon: eps,
        };
        let coarse = matches!(
            arbcheck::check_simplified(&input).unwrap(),
            SimplifiedVerdict::Consistent
        );
        let fine = matches!(
            check_simplified_with_grid(&input, 10).unwrap(),
            SimplifiedVerdict::Consistent
        );
        assert_eq!(coarse, fine);
    }
}

#[test]
fn tail_tolerant_verdict_matches_unbounded_at_full_tail() {
    let doc = r#"{"bank": [1, 1, 1], "underlying": {"bid": 2, "ask": 2},
        "options": [
          {"t": 1, "strike": 1, "bid": 2, "ask": 2},
          {"t": 2, "strike": 1, "bid": 1, "ask": 1}]}"#;
    let dqs = discount(&parse_quotes(doc).unwrap());
    let unbounded = arbcheck::check_unbounded(&dqs);
    let (tail, _) = arbcheck::check_p_bounded(&dqs, &ratio(1, 2), &rat(1), false);
    assert_eq!(format!("{:?}", unbounded.tag()), format!("{:?}", tail.tag()));
    // rising asks over the quoted strikes are fine without the underlying
    let doc = r#"{"bank": [1, 1], "underlying": {"bid": 4, "ask": 4},
        "options": [
          {"t": 1, "strike": 1, "bid": 1.5, "ask": 6},
          {"t": 1, "strike": 2, "bid": 2, "ask": 7}]}"#;
    let dqs = discount(&parse_quotes(doc).unwrap());
    assert!(matches!(
        arbcheck::check_unbounded(&dqs).tag(),
        Trichotomy::Consistent
    ));
}

#[test]
fn zero_bound_chain_check_is_peacock_order() {
    // at a zero bound the chain conditions hold iff the laws increase in
    // convex order with the common mean at the spot
    use arbcheck::{SimplifiedInput, SimplifiedVerdict};
    let mut rng = SplitMix64::new(41);
    for _ in 0..60 {
        let base = random_measure(&mut rng, 3, 2, 8);
        let second = if rng.chance(1, 2) {
            // a genuine mean-preserving spread
            let mut atoms = Vec::new();
            for (x, w) in base.atoms() {
                atoms.push((x - rat(1), w * ratio(1, 2)));
                atoms.push((x + rat(1), w * ratio(1, 2)));
            }
            DiscreteMeasure::new(atoms).unwrap()
        } else {
            random_measure(&mut rng, 3, 2, 8)
        };
        let input = SimplifiedInput {
            curves: vec![call_function(&base), call_function(&second)],
            spot: base.mean(),
            epsilon: rat(0),
        };
        let consistent = matches!(
            arbcheck::check_simplified(&input).unwrap(),
            SimplifiedVerdict::Consistent
        );
        let expected = convex_order_leq(&base, &second) && second.mean() == base.mean();
        assert_eq!(consistent, expected);
    }
}

#[test]
fn simplified_scan_brackets_a_passing_bound() {
    use arbcheck::multi_maturity::{min_epsilon, mode_consistent, ConsistencyMode};
    let doc = r#"{"bank": [1, 1, 1], "underlying": {"bid": 4, "ask": 4},
        "options": [
          {"t": 1, "strike": 3, "bid": 1.5, "ask": 1.5},
          {"t": 2, "strike": 3, "bid": 1.75, "ask": 1.75}]}"#;
    let dqs = discount(&parse_quotes(doc).unwrap());
    let tol = ratio(1, 1_000_000);
    let scan = min_epsilon(&dqs, ConsistencyMode::Simplified, &tol, 2, 100_000).unwrap();
    assert!(mode_consistent(&dqs, ConsistencyMode::Simplified, &scan.value, 2, 100_000));
    if scan.value.is_positive() {
        assert!(!mode_consistent(&dqs, ConsistencyMode::Simplified, &scan.bracket.0, 2, 100_000));
        assert!(&scan.value - &scan.bracket.0 <= tol);
    }
}

#[test]
fn weak_verdict_on_degenerate_quote() {
    // call quoted at the underlying ask: only a model-dependent opportunity
    let doc = r#"{"bank": [1, 1], "underlying": {"bid": 4, "ask": 4},
        "options": [{"t": 1, "strike": 2, "bid": 4, "ask": 4.5}]}"#;
    let dqs = discount(&parse_quotes(doc).unwrap());
    let strip = augment(&dqs, 1, &rat(0)).unwrap();
    assert!(matches!(check_conditions(&strip).tag, Trichotomy::WeakArbitrage));
}

#[test]
fn certificate_files_replay_to_the_same_verdict() {
    let dir = std::env::temp_dir().join("arbcheck-properties");
    std::fs::create_dir_all(&dir).unwrap();
    let quotes_path = dir.join("replay-quotes.json");
    std::fs::write(
        &quotes_path,
        r#"{"bank": [1, 1], "underlying": {"bid": 5, "ask": 5},
           "options": [
             {"t": 1, "strike": 1, "bid": 1, "ask": 1},
             {"t": 1, "strike": 2, "bid": 2, "ask": 2}]}"#,
    )
    .unwrap();
    let dqs = discount(
        &parse_quotes(&std::fs::read_to_string(&quotes_path).unwrap()).unwrap(),
    );
    let report =
        arbcheck::classify(&dqs, &rat(0), &arbcheck::ClassifyOptions::default()).unwrap();
    assert_eq!(report.verdict, arbcheck::OverallVerdict::ModelIndependentArbitrage);
    let cert = &report.certificates[0];
    let cert_path = dir.join("replay-cert.json");
    std::fs::write(&cert_path, cert.portfolio.to_json().to_string()).unwrap();
    let code = arbcheck::cli::run(vec![
        "verify".into(),
        quotes_path.to_str().unwrap().into(),
        "--certificate".into(),
        cert_path.to_str().unwrap().into(),
        "--epsilon".into(),
        "0".into(),
        "--format".into(),
        "json".into(),
    ]);
    // confirmation mirrors the original check exit code
    assert_eq!(code, 3);
    // a parsed-back portfolio prices identically
    let parsed = SemiStaticPortfolio::from_json(
        &serde_json::from_str(&std::fs::read_to_string(&cert_path).unwrap()).unwrap(),
    )
    .unwrap();
    assert_eq!(
        initial_value(&parsed, &dqs, &rat(0)).unwrap(),
        cert.verification.initial_value
    );
}

#[test]
fn decimal_parsing_is_exact_at_twelve_digits() {
    let r = parse_rat("0.000000000001").unwrap();
    assert_eq!(r * rat(10).pow(12), rat(1));
}
