//! Finite scenario trees carrying bid, ask, reference and shadow price
//! processes, with exact invariant checks.
//!
//! A model is arbitrage free when the reference price stays inside the
//! bid-ask band and the discounted shadow price is a martingale under the
//! tree probabilities. The spread-bound checks are separate so the same tree
//! type serves both the bounded and unbounded analyses.

use crate::measures::DiscreteMeasure;
use crate::num::{json_to_rat, rat_to_json, Rat};
use num_traits::{One, Signed};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("node {0}: prices must satisfy 0 < bid <= reference <= ask")]
    PriceOrder(usize),
    #[error("node {0}: shadow price must lie in the bid-ask band")]
    ShadowOutsideBand(usize),
    #[error("node {0}: branch probabilities must be positive and sum to one")]
    BadProbabilities(usize),
    #[error("node {0}: discounted shadow price is not a martingale")]
    NotMartingale(usize),
    #[error("node {0}: spread exceeds the bound")]
    SpreadTooWide(usize),
    #[error("node {0}: reference price below the bound floor")]
    ReferenceTooLow(usize),
    #[error("node {0}: reference is not the bid-ask midpoint")]
    NotMidpoint(usize),
    #[error("tree structure broken at node {0}")]
    BadStructure(usize),
    #[error("malformed model document: {0}")]
    Malformed(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelNode {
    pub id: usize,
    pub parent: Option<usize>,
    pub time: usize,
    /// Conditional branch probability given the parent.
    pub prob: Rat,
    pub bid: Rat,
    pub ask: Rat,
    /// Cash-settlement reference price.
    pub reference: Rat,
    /// Consistent price system (shadow price).
    pub shadow: Rat,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteModel {
    pub bank: Vec<Rat>,
    /// Nodes in topological order; node 0 is the root at time 0.
    pub nodes: Vec<ModelNode>,
}

impl FiniteModel {
    pub fn horizon(&self) -> usize {
        self.bank.len() - 1
    }

    pub fn discount(&self, t: usize) -> Rat {
        Rat::one() / &self.bank[t]
    }

    pub fn children(&self, id: usize) -> Vec<usize> {
        self.nodes.iter().filter(|n| n.parent == Some(id)).map(|n| n.id).collect()
    }

    /// Root-to-leaf node id paths, one per scenario.
    pub fn paths(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut stack = vec![vec![0usize]];
        while let Some(path) = stack.pop() {
            let last = *path.last().unwrap();
            let kids = self.children(last);
            if kids.is_empty() {
                out.push(path);
            } else {
                for k in kids {
                    let mut next = path.clone();
                    next.push(k);
                    stack.push(next);
                }
            }
        }
        out.sort();
        out
    }

    pub fn path_probability(&self, path: &[usize]) -> Rat {
        path.iter().skip(1).map(|&id| self.nodes[id].prob.clone()).product()
    }

    /// Law of the discounted reference price at time `t`.
    pub fn reference_marginal(&self, t: usize) -> DiscreteMeasure {
        let d = self.discount(t);
        let mut by_node: std::collections::BTreeMap<usize, Rat> = Default::default();
        for path in self.paths() {
            by_node
                .entry(path[t])
                .or_insert_with(|| self.path_probability(&path[..=t]));
        }
        let atoms = by_node
            .into_iter()
            .map(|(id, p)| (&d * &self.nodes[id].reference, p))
            .collect();
        DiscreteMeasure::new(atoms).expect("node probabilities sum to one")
    }

    /// Structural and arbitrage-freeness invariants: price ordering, shadow
    /// inside the band, probabilities, and the discounted-shadow martingale
    /// property, all exact.
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.nodes.is_empty() || self.nodes[0].time != 0 || self.nodes[0].parent.is_some() {
            return Err(ModelError::BadStructure(0));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if n.id != i {
                return Err(ModelError::BadStructure(i));
            }
            if let Some(p) = n.parent {
                if p >= i || self.nodes[p].time + 1 != n.time {
                    return Err(ModelError::BadStructure(i));
                }
            }
            if !(n.bid.is_positive() && n.bid <= n.reference && n.reference <= n.ask) {
                return Err(ModelError::PriceOrder(i));
            }
            if n.shadow < n.bid || n.shadow > n.ask {
                return Err(ModelError::ShadowOutsideBand(i));
            }
            if !n.prob.is_positive() && n.parent.is_some() {
                return Err(ModelError::BadProbabilities(i));
            }
        }
        for n in &self.nodes {
            let kids = self.children(n.id);
            if kids.is_empty() {
                if n.time != self.horizon() {
                    return Err(ModelError::BadStructure(n.id));
                }
                continue;
            }
            let total: Rat = kids.iter().map(|&k| self.nodes[k].prob.clone()).sum();
            if !total.is_one() {
                return Err(ModelError::BadProbabilities(n.id));
            }
            let here = self.discount(n.time) * &n.shadow;
            let next: Rat = kids
                .iter()
                .map(|&k| &self.nodes[k].prob * self.discount(self.nodes[k].time) * &self.nodes[k].shadow)
                .sum();
            if here != next {
                return Err(ModelError::NotMartingale(n.id));
            }
        }
        Ok(())
    }

    /// Spread-bound invariants for t >= 1: ask - bid <= eps*B(t) and
    /// reference >= eps*B(t).
    pub fn validate_spread_bound(&self, eps: &Rat) -> Result<(), ModelError> {
        for n in &self.nodes {
            if n.time == 0 {
                continue;
            }
            let cap = eps * &self.bank[n.time];
            if &n.ask - &n.bid > cap {
                return Err(ModelError::SpreadTooWide(n.id));
            }
            if n.reference < cap {
                return Err(ModelError::ReferenceTooLow(n.id));
            }
        }
        Ok(())
    }

    /// Midpoint-convention bound at `eps`: the reference is the bid-ask
    /// midpoint, the spread is at most `2*eps*B(t)`, and the reference stays
    /// at or above `eps*B(t)`. Doubling affects only the spread width; the
    /// reference floor is inherited from the underlying bound.
    pub fn validate_midpoint_bound(&self, eps: &Rat) -> Result<(), ModelError> {
        self.validate_midpoint()?;
        let two = Rat::from_integer(2.into());
        for n in &self.nodes {
            if n.time == 0 {
                continue;
            }
            let cap = eps * &self.bank[n.time];
            if &n.ask - &n.bid > &two * &cap {
                return Err(ModelError::SpreadTooWide(n.id));
            }
            if n.reference < cap {
                return Err(ModelError::ReferenceTooLow(n.id));
            }
        }
        Ok(())
    }

    /// Midpoint convention: reference = (bid + ask) / 2 at every node.
    pub fn validate_midpoint(&self) -> Result<(), ModelError> {
        let two = Rat::from_integer(2.into());
        for n in &self.nodes {
            if &n.bid + &n.ask != &two * &n.reference {
                return Err(ModelError::NotMidpoint(n.id));
            }
        }
        Ok(())
    }

    /// Rebuilds bid/ask as the reflection of the shadow about the reference,
    /// so the reference becomes the midpoint. A model with spread bound eps
    /// turns into one with midpoint reference and spread bound 2*eps.
    pub fn to_midpoint_convention(&self) -> FiniteModel {
        let two = Rat::from_integer(2.into());
        let nodes = self
            .nodes
            .iter()
            .map(|n| {
                let mirrored = &two * &n.reference - &n.shadow;
                let bid = crate::num::min_rat(n.shadow.clone(), mirrored.clone());
                let ask = crate::num::max_rat(n.shadow.clone(), mirrored);
                ModelNode { bid, ask, ..n.clone() }
            })
            .collect();
        FiniteModel { bank: self.bank.clone(), nodes }
    }

    /// Tightens bid/ask to the envelope of reference and shadow. A midpoint
    /// model with spread bound 2*eps turns into one with spread bound eps.
    pub fn to_tight_convention(&self) -> FiniteModel {
        let nodes = self
            .nodes
            .iter()
            .map(|n| ModelNode {
                bid: crate::num::min_rat(n.reference.clone(), n.shadow.clone()),
                ask: crate::num::max_rat(n.reference.clone(), n.shadow.clone()),
                ..n.clone()
            })
            .collect();
        FiniteModel { bank: self.bank.clone(), nodes }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "bank": self.bank.iter().map(rat_to_json).collect::<Vec<_>>(),
            "nodes": self.nodes.iter().map(|n| json!({
                "id": n.id,
                "parent": n.parent,
                "time": n.time,
                "prob": rat_to_json(&n.prob),
                "bid": rat_to_json(&n.bid),
                "ask": rat_to_json(&n.ask),
                "reference": rat_to_json(&n.reference),
                "shadow": rat_to_json(&n.shadow),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<FiniteModel, ModelError> {
        let grab = |v: &Value, k: &str| -> Result<Rat, ModelError> {
            json_to_rat(v.get(k).ok_or_else(|| ModelError::Malformed(format!("missing {}", k)))?)
                .map_err(ModelError::Malformed)
        };
        let bank = v
            .get("bank")
            .and_then(Value::as_array)
            .ok_or_else(|| ModelError::Malformed("missing bank".into()))?
            .iter()
            .map(|b| json_to_rat(b).map_err(ModelError::Malformed))
            .collect::<Result<Vec<_>, _>>()?;
        let mut nodes = Vec::new();
        for n in v
            .get("nodes")
            .and_then(Value::as_array)
            .ok_or_else(|| ModelError::Malformed("missing nodes".into()))?
        {
            nodes.push(ModelNode {
                id: n.get("id").and_then(Value::as_u64).ok_or_else(|| ModelError::Malformed("id".into()))?
                    as usize,
                parent: n.get("parent").and_then(Value::as_u64).map(|p| p as usize),
                time: n
                    .get("time")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| ModelError::Malformed("time".into()))? as usize,
                prob: grab(n, "prob")?,
                bid: grab(n, "bid")?,
                ask: grab(n, "ask")?,
                reference: grab(n, "reference")?,
                shadow: grab(n, "shadow")?,
            });
        }
        Ok(FiniteModel { bank, nodes })
    }
}

/// Deterministic single-path model builder (used in tests and examples).
pub fn deterministic_model(bank: Vec<Rat>, rows: Vec<(Rat, Rat, Rat, Rat)>) -> FiniteModel {
    // rows[t] = (bid, reference, ask, shadow) at time t
    let nodes = rows
        .into_iter()
        .enumerate()
        .map(|(t, (bid, reference, ask, shadow))| ModelNode {
            id: t,
            parent: if t == 0 { None } else { Some(t - 1) },
            time: t,
            prob: Rat::one(),
            bid,
            ask,
            reference,
            shadow,
        })
        .collect();
    FiniteModel { bank, nodes }
}
