//! Command-line surface: `check`, `min-epsilon`, `model`, `verify`,
//! `distance`. Reports print as JSON or human-readable lines; exit codes
//! encode the verdict (0 consistent / necessary-pass, 2 weak arbitrage,
//! 3 model-independent arbitrage, 1 input error, 4 scan ceiling reached).

use crate::certificates::{verify_model_independent, SemiStaticPortfolio};
use crate::classify::{classify, weak_branch, ClassifyOptions, ClassifyReport, OverallVerdict};
use crate::measures::{close_coupling_feasible, convex_order_leq, winf_distance, DiscreteMeasure};
use crate::multi_maturity::{
    check_p_bounded, check_unbounded, min_epsilon, ConsistencyMode, ScanError, SimplifiedVerdict,
};
use crate::num::{format_rat, json_to_rat, parse_rat, rat_to_json, Rat};
use crate::quotes::{discount, parse_quotes, DiscountedQuoteSet};
use crate::single_maturity::Trichotomy;
use crate::util::SplitMix64;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_WEAK: i32 = 2;
pub const EXIT_MI: i32 = 3;
pub const EXIT_CEILING: i32 = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Human,
}

#[derive(Clone, Debug)]
pub struct CliConfig {
    pub command: String,
    pub inputs: Vec<String>,
    pub epsilon: Rat,
    pub p: Option<Rat>,
    pub mode: String,
    pub tolerance: Rat,
    pub grid_density: usize,
    pub seed: u64,
    pub format: OutputFormat,
    pub caps: usize,
    pub max_u: usize,
    pub certificate: Option<String>,
    pub convention: String,
    pub witness: bool,
}

impl Default for CliConfig {
    fn default() -> Self {
        CliConfig {
            command: String::new(),
            inputs: Vec::new(),
            epsilon: Rat::zero(),
            p: None,
            mode: "single".into(),
            tolerance: crate::num::ratio(1, 1_000_000_000),
            grid_density: 5,
            seed: 20240817,
            format: OutputFormat::Human,
            caps: 1_000_000,
            max_u: usize::MAX,
            certificate: None,
            convention: "tight".into(),
            witness: false,
        }
    }
}

pub fn parse_args(args: &[String]) -> Result<CliConfig, String> {
    let mut cfg = CliConfig::default();
    let mut it = args.iter().peekable();
    cfg.command = it.next().cloned().ok_or("missing subcommand")?;
    let need_value = |it: &mut std::iter::Peekable<std::slice::Iter<String>>,
                          flag: &str|
     -> Result<String, String> {
        it.next().cloned().ok_or_else(|| format!("flag {} needs a value", flag))
    };
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--epsilon" => {
                let v = need_value(&mut it, "--epsilon")?;
                cfg.epsilon = parse_rat(&v).ok_or(format!("bad --epsilon {:?}", v))?;
            }
            "--p" => {
                let v = need_value(&mut it, "--p")?;
                cfg.p = Some(parse_rat(&v).ok_or(format!("bad --p {:?}", v))?);
            }
            "--mode" => cfg.mode = need_value(&mut it, "--mode")?,
            "--unbounded" => cfg.mode = "unbounded".into(),
            "--tolerance" => {
                let v = need_value(&mut it, "--tolerance")?;
                cfg.tolerance = parse_rat(&v).ok_or(format!("bad --tolerance {:?}", v))?;
            }
            "--grid-density" => {
                cfg.grid_density = need_value(&mut it, "--grid-density")?
                    .parse()
                    .map_err(|_| "bad --grid-density")?;
            }
            "--seed" => {
                cfg.seed = need_value(&mut it, "--seed")?.parse().map_err(|_| "bad --seed")?;
            }
            "--format" => {
                cfg.format = match need_value(&mut it, "--format")?.as_str() {
                    "json" => OutputFormat::Json,
                    "human" => OutputFormat::Human,
                    other => return Err(format!("unknown format {:?}", other)),
                };
            }
            "--caps" => {
                cfg.caps = need_value(&mut it, "--caps")?.parse().map_err(|_| "bad --caps")?;
            }
            "--max-u" => {
                cfg.max_u = need_value(&mut it, "--max-u")?.parse().map_err(|_| "bad --max-u")?;
            }
            "--certificate" => cfg.certificate = Some(need_value(&mut it, "--certificate")?),
            "--convention" => cfg.convention = need_value(&mut it, "--convention")?,
            "--witness" => cfg.witness = true,
            other if other.starts_with("--") => return Err(format!("unknown flag {:?}", other)),
            other => cfg.inputs.push(other.to_string()),
        }
    }
    if !cfg.tolerance.is_positive() {
        return Err("tolerance must be positive".into());
    }
    if cfg.epsilon.is_negative() {
        return Err("epsilon must be nonnegative".into());
    }
    if let Some(p) = &cfg.p {
        if !p.is_positive() || *p > Rat::one() {
            return Err("p must lie in (0, 1]".into());
        }
    }
    Ok(cfg)
}

fn load_quotes(path: &str) -> Result<DiscountedQuoteSet, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {}", path, e))?;
    let qs = parse_quotes(&text).map_err(|e| e.to_string())?;
    Ok(discount(&qs))
}

fn verdict_name(v: OverallVerdict) -> &'static str {
    match v {
        OverallVerdict::Consistent => "consistent",
        OverallVerdict::NecessaryPass => "necessary_pass",
        OverallVerdict::WeakArbitrage => "weak_arbitrage",
        OverallVerdict::ModelIndependentArbitrage => "model_independent_arbitrage",
    }
}

fn verdict_exit(v: OverallVerdict) -> i32 {
    match v {
        OverallVerdict::Consistent | OverallVerdict::NecessaryPass => EXIT_OK,
        OverallVerdict::WeakArbitrage => EXIT_WEAK,
        OverallVerdict::ModelIndependentArbitrage => EXIT_MI,
    }
}

fn classify_report_json(report: &ClassifyReport) -> Value {
    let per_maturity: Vec<Value> = report
        .per_maturity
        .iter()
        .map(|(t, v)| {
            json!({
                "t": t,
                "tag": match v.tag {
                    Trichotomy::Consistent => "consistent",
                    Trichotomy::WeakArbitrage => "weak_arbitrage",
                    Trichotomy::ModelIndependentArbitrage => "model_independent_arbitrage",
                },
                "violations": v.violations.iter().map(|c| json!({
                    "condition": c.kind.wire_id(),
                    "label": c.kind.label(),
                    "indices": c.indices,
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    let calendar: Vec<Value> = report
        .calendar_violations
        .iter()
        .map(|v| {
            json!({
                "condition": v.condition.wire_id(),
                "label": v.condition.label(),
                "basket_maturity": v.basket.maturity,
                "basket_bid": rat_to_json(&v.basket_bid),
                "versus": v.versus,
                "margin": rat_to_json(&v.margin),
            })
        })
        .collect();
    let certificates: Vec<Value> = report
        .certificates
        .iter()
        .map(|c| {
            json!({
                "source": c.source,
                "initial_value": rat_to_json(&c.verification.initial_value),
                "verified": c.verification.verified(),
                "worst_terminal_bank": rat_to_json(&c.verification.worst_terminal_bank),
                "portfolio": c.portfolio.to_json(),
            })
        })
        .collect();
    let witnesses: Vec<Value> = report
        .weak_witnesses
        .iter()
        .map(|w| {
            json!({
                "source": w.source,
                "if_never_exercised": w.if_never_exercised.to_json(),
                "if_exercised": w.if_exercised.to_json(),
            })
        })
        .collect();
    let simplified = report.simplified.as_ref().map(|v| match v {
        SimplifiedVerdict::Consistent => json!({"verdict": "consistent"}),
        SimplifiedVerdict::Violated(viol) => json!({
            "verdict": "violated",
            "condition": viol.wire_id(),
            "horizon": viol.horizon,
            "levels": viol.levels.iter().map(rat_to_json).collect::<Vec<_>>(),
            "margin": rat_to_json(&viol.margin),
        }),
    });
    json!({
        "epsilon": rat_to_json(&report.epsilon),
        "verdict": verdict_name(report.verdict),
        "per_maturity": per_maturity,
        "calendar_violations": calendar,
        "certificates": certificates,
        "weak_witnesses": witnesses,
        "simplified": simplified,
        "witness_mean": report.witness_mean.as_ref().map(rat_to_json),
        "model": report.model.as_ref().map(|m| m.to_json()),
        "notes": report.notes,
    })
}

fn emit(cfg: &CliConfig, v: &Value, human: String) {
    use std::io::Write;
    let text = match cfg.format {
        OutputFormat::Json => serde_json::to_string_pretty(v).unwrap(),
        OutputFormat::Human => human,
    };
    // ignore broken pipes so downstream `head` style consumers work
    let _ = writeln!(std::io::stdout(), "{}", text);
}

fn human_classify(report: &ClassifyReport) -> String {
    let mut out = Vec::new();
    out.push(format!(
        "verdict: {} (spread bound {})",
        verdict_name(report.verdict),
        format_rat(&report.epsilon)
    ));
    for (t, v) in &report.per_maturity {
        for c in &v.violations {
            out.push(format!("  maturity {}: {} at {:?}", t, c.kind.label(), c.indices));
        }
    }
    for v in &report.calendar_violations {
        out.push(format!(
            "  {} versus {:?} (basket maturity {}, bid {})",
            v.condition.label(),
            v.versus,
            v.basket.maturity,
            format_rat(&v.basket_bid)
        ));
    }
    for c in &report.certificates {
        out.push(format!(
            "  certificate [{}]: setup cost {}, grid-verified: {}",
            c.source,
            format_rat(&c.verification.initial_value),
            c.verification.verified()
        ));
    }
    for w in &report.weak_witnesses {
        out.push(format!("  weak witness [{}]", w.source));
    }
    if let Some(m) = &report.witness_mean {
        out.push(format!("  witness law mean: {}", format_rat(m)));
    }
    for n in &report.notes {
        out.push(format!("  note: {}", n));
    }
    out.join("\n")
}

fn run_check(cfg: &CliConfig) -> i32 {
    let dqs = match load_quotes(&cfg.inputs[0]) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {}", e);
            return EXIT_INPUT;
        }
    };
    if cfg.mode == "unbounded" || cfg.p.is_some() {
        let (report, witness) = match &cfg.p {
            Some(p) => check_p_bounded(&dqs, &cfg.epsilon, p, cfg.witness),
            None => (check_unbounded(&dqs), None),
        };
        let tag = report.tag();
        let verdict = match tag {
            Trichotomy::Consistent => OverallVerdict::Consistent,
            Trichotomy::WeakArbitrage => OverallVerdict::WeakArbitrage,
            Trichotomy::ModelIndependentArbitrage => OverallVerdict::ModelIndependentArbitrage,
        };
        let per: Vec<Value> = report
            .per_maturity
            .iter()
            .map(|(t, v)| {
                json!({
                    "t": t,
                    "violations": v.violations.iter().map(|c| json!({
                        "condition": c.kind.wire_id(),
                        "indices": c.indices,
                    })).collect::<Vec<_>>(),
                })
            })
            .collect();
        let coupling = witness.map(|w| {
            json!({
                "shadow_mean": rat_to_json(&w.shadow_mean),
                "couplings": w.couplings.iter().map(|(t, nu, plan)| json!({
                    "t": t,
                    "shadow_law": nu.atoms().iter()
                        .map(|(x, m)| json!([rat_to_json(x), rat_to_json(m)]))
                        .collect::<Vec<_>>(),
                    "plan": plan.iter()
                        .map(|(i, j, m)| json!([i, j, rat_to_json(m)]))
                        .collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
            })
        });
        let v = json!({
            "mode": if cfg.p.is_some() { "p_bounded" } else { "unbounded" },
            "verdict": verdict_name(verdict),
            "per_maturity": per,
            "tail_coupling_witness": coupling,
        });
        emit(cfg, &v, format!("verdict: {}", verdict_name(verdict)));
        return verdict_exit(verdict);
    }
    let opts = ClassifyOptions {
        max_u: cfg.max_u,
        basket_cap: cfg.caps,
        grid_density: cfg.grid_density,
    };
    match classify(&dqs, &cfg.epsilon, &opts) {
        Ok(report) => {
            let mut v = classify_report_json(&report);
            if report.verdict == OverallVerdict::WeakArbitrage {
                v["weak_demonstrations"] = weak_demonstrations(cfg, &dqs, &report);
            }
            emit(cfg, &v, human_classify(&report));
            verdict_exit(report.verdict)
        }
        Err(e) => {
            eprintln!("error: {}", e);
            EXIT_INPUT
        }
    }
}

/// Seeded demonstration of weak arbitrage: on each random bounded model, the
/// applicable branch has nonpositive cost, nonnegative terminal bank, and a
/// strictly positive outcome somewhere.
fn weak_demonstrations(cfg: &CliConfig, dqs: &DiscountedQuoteSet, report: &ClassifyReport) -> Value {
    let mut rng = SplitMix64::new(cfg.seed);
    let mut runs = Vec::new();
    let start = (&dqs.underlying_bid + &dqs.underlying_ask) / Rat::from_integer(2.into());
    for _ in 0..3 {
        let model = crate::sim::random_bounded_model(&dqs.bank, &cfg.epsilon, &start, &mut rng);
        if model.validate().is_err() {
            continue;
        }
        for w in report.weak_witnesses.iter().take(1) {
            if let Ok(branch) = weak_branch(w, &model, dqs, &cfg.epsilon) {
                if let Ok(ledger) = crate::certificates::execute(branch, &model, &cfg.epsilon) {
                    let gains = ledger.paths.iter().any(|p| p.terminal_bank().is_positive());
                    let safe = ledger.paths.iter().all(|p| !p.terminal_bank().is_negative());
                    runs.push(json!({
                        "witness": w.source,
                        "gains_with_positive_probability": gains,
                        "never_loses": safe,
                    }));
                }
            }
        }
    }
    Value::Array(runs)
}

fn run_min_epsilon(cfg: &CliConfig) -> i32 {
    let dqs = match load_quotes(&cfg.inputs[0]) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {}", e);
            return EXIT_INPUT;
        }
    };
    let mode = match cfg.mode.as_str() {
        "single" => ConsistencyMode::Single,
        "necessary" => ConsistencyMode::Necessary,
        "simplified" => ConsistencyMode::Simplified,
        other => {
            eprintln!("error: unknown mode {:?} (single|necessary|simplified)", other);
            return EXIT_INPUT;
        }
    };
    match min_epsilon(&dqs, mode, &cfg.tolerance, cfg.max_u.min(dqs.horizon()), cfg.caps) {
        Ok(scan) => {
            let v = json!({
                "minimal_epsilon": rat_to_json(&scan.value),
                "bracket": [rat_to_json(&scan.bracket.0), rat_to_json(&scan.bracket.1)],
                "ceiling": rat_to_json(&scan.ceiling),
                "trace": scan.trace.iter()
                    .map(|(e, ok)| json!([rat_to_json(e), ok]))
                    .collect::<Vec<_>>(),
            });
            emit(
                cfg,
                &v,
                format!(
                    "minimal consistent spread bound: {} (bracketed by failing {})",
                    format_rat(&scan.value),
                    format_rat(&scan.bracket.0)
                ),
            );
            EXIT_OK
        }
        Err(e @ ScanError::NoConsistentEpsilonInRange(_)) => {
            eprintln!("error: {}", e);
            EXIT_CEILING
        }
        Err(e) => {
            eprintln!("error: {}", e);
            EXIT_INPUT
        }
    }
}

fn run_model(cfg: &CliConfig) -> i32 {
    let dqs = match load_quotes(&cfg.inputs[0]) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {}", e);
            return EXIT_INPUT;
        }
    };
    if cfg.mode == "unbounded" {
        return match crate::multi_maturity::unbounded_model(&dqs) {
            Some(model) => {
                emit(cfg, &model.to_json(), format!("{}", model.to_json()));
                EXIT_OK
            }
            None => {
                eprintln!("error: quotes are not consistent in the unbounded sense");
                EXIT_MI
            }
        };
    }
    let opts = ClassifyOptions {
        max_u: cfg.max_u,
        basket_cap: cfg.caps,
        grid_density: cfg.grid_density,
    };
    match classify(&dqs, &cfg.epsilon, &opts) {
        Ok(report) => match (&report.model, cfg.convention.as_str()) {
            (Some(model), "midpoint") => {
                let m = model.to_midpoint_convention();
                emit(cfg, &m.to_json(), format!("{}", m.to_json()));
                EXIT_OK
            }
            (Some(model), _) => {
                emit(cfg, &model.to_json(), format!("{}", model.to_json()));
                EXIT_OK
            }
            (None, _) => {
                let v = classify_report_json(&report);
                emit(cfg, &v, human_classify(&report));
                eprintln!("error: no model witness at this bound");
                EXIT_MI
            }
        },
        Err(e) => {
            eprintln!("error: {}", e);
            EXIT_INPUT
        }
    }
}

fn run_verify(cfg: &CliConfig) -> i32 {
    let dqs = match load_quotes(&cfg.inputs[0]) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {}", e);
            return EXIT_INPUT;
        }
    };
    let cert_path = match &cfg.certificate {
        Some(p) => p.clone(),
        None => {
            eprintln!("error: verify needs --certificate <file>");
            return EXIT_INPUT;
        }
    };
    let portfolio = match std::fs::read_to_string(&cert_path)
        .map_err(|e| format!("{}: {}", cert_path, e))
        .and_then(|text| {
            serde_json::from_str::<Value>(&text)
                .map_err(|e| e.to_string())
                .and_then(|v| SemiStaticPortfolio::from_json(&v).map_err(|e| e.to_string()))
        }) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {}", e);
            return EXIT_INPUT;
        }
    };
    match verify_model_independent(&portfolio, &dqs, &cfg.epsilon, cfg.grid_density) {
        Ok(report) => {
            let verified = report.verified();
            let v = json!({
                "verified": verified,
                "initial_value": rat_to_json(&report.initial_value),
                "worst_terminal_bank": rat_to_json(&report.worst_terminal_bank),
                "paths_checked": report.paths_checked,
            });
            emit(
                cfg,
                &v,
                format!(
                    "certificate {}: setup cost {}, worst terminal bank {}",
                    if verified { "CONFIRMED" } else { "REFUTED" },
                    format_rat(&report.initial_value),
                    format_rat(&report.worst_terminal_bank)
                ),
            );
            if verified {
                EXIT_MI
            } else {
                EXIT_INPUT
            }
        }
        Err(e) => {
            eprintln!("error: {}", e);
            EXIT_INPUT
        }
    }
}

fn load_measure(path: &str) -> Result<DiscreteMeasure, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {}", path, e))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let atoms = v
        .get("atoms")
        .and_then(Value::as_array)
        .ok_or("measure document needs an atoms array")?;
    let mut parsed = Vec::new();
    for pair in atoms {
        let arr = pair.as_array().ok_or("atom must be [point, mass]")?;
        if arr.len() != 2 {
            return Err("atom must be [point, mass]".into());
        }
        parsed.push((json_to_rat(&arr[0])?, json_to_rat(&arr[1])?));
    }
    DiscreteMeasure::new(parsed).map_err(|e| e.to_string())
}

fn run_distance(cfg: &CliConfig) -> i32 {
    if cfg.inputs.len() != 2 {
        eprintln!("error: distance needs two measure files");
        return EXIT_INPUT;
    }
    let (mu, nu) = match (load_measure(&cfg.inputs[0]), load_measure(&cfg.inputs[1])) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("error: {}", e);
            return EXIT_INPUT;
        }
    };
    let w = winf_distance(&mu, &nu);
    let le = convex_order_leq(&mu, &nu);
    let ge = convex_order_leq(&nu, &mu);
    let coupling = cfg.p.as_ref().map(|p| close_coupling_feasible(&mu, &nu, &cfg.epsilon, p));
    let v = json!({
        "winf": rat_to_json(&w),
        "convex_order_leq": le,
        "convex_order_geq": ge,
        "tail_coupling_feasible": coupling,
    });
    emit(
        cfg,
        &v,
        format!(
            "winf distance: {}\nconvex order (first <= second): {}\nconvex order (second <= first): {}{}",
            format_rat(&w),
            le,
            ge,
            match coupling {
                Some(c) => format!("\ncoupling within bound feasible: {}", c),
                None => String::new(),
            }
        ),
    );
    EXIT_OK
}

/// Entry point used by the binary; returns the process exit code.
pub fn run(args: Vec<String>) -> i32 {
    let cfg = match parse_args(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}", e);
            eprintln!("{}", USAGE);
            return EXIT_INPUT;
        }
    };
    if cfg.command != "distance" && cfg.inputs.is_empty() {
        eprintln!("error: missing input file");
        eprintln!("{}", USAGE);
        return EXIT_INPUT;
    }
    match cfg.command.as_str() {
        "check" => run_check(&cfg),
        "min-epsilon" => run_min_epsilon(&cfg),
        "model" => run_model(&cfg),
        "verify" => run_verify(&cfg),
        "distance" => run_distance(&cfg),
        other => {
            eprintln!("error: unknown subcommand {:?}", other);
            eprintln!("{}", USAGE);
            EXIT_INPUT
        }
    }
}

pub const USAGE: &str = "usage:
  arbcheck check <quotes.json> [--epsilon E] [--unbounded | --mode unbounded] [--p P [--witness]]
  arbcheck min-epsilon <quotes.json> --mode single|necessary|simplified [--tolerance T]
  arbcheck model <quotes.json> [--epsilon E] [--mode unbounded] [--convention tight|midpoint]
  arbcheck verify <quotes.json> --certificate <cert.json> [--epsilon E]
  arbcheck distance <mu.json> <nu.json> [--epsilon E --p P]
common flags: --format json|human --grid-density N --seed N --caps N --max-u N";
