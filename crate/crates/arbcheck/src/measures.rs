//! Finitely supported probability measures, their call functions, convex
//! order, the infinity Wasserstein distance, mean-constrained envelope call
//! functions, and coupling feasibility for the modified Prokhorov distance.

use crate::num::{max_rat, min_rat, Rat};
use crate::pwl::PwlFn;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MeasureError {
    #[error("atom masses must be positive")]
    NonPositiveMass,
    #[error("atom masses must sum to one (got {0})")]
    MassNotOne(String),
    #[error("no atoms")]
    Empty,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CallFnError {
    #[error("call function is not convex")]
    NonConvex,
    #[error("call function has slope below -1")]
    SlopeBelowMinusOne,
    #[error("call function takes a negative value")]
    NegativeValue,
    #[error("call function must vanish at its last breakpoint (got {0})")]
    NonZeroTail(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EnvelopeError {
    #[error("target mean lies outside [mean-eps, mean+eps]")]
    MeanOutsideBand,
}

/// A finitely supported probability measure with strictly increasing atom
/// positions and total mass exactly one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscreteMeasure {
    atoms: Vec<(Rat, Rat)>,
}

impl DiscreteMeasure {
    pub fn new(mut atoms: Vec<(Rat, Rat)>) -> Result<DiscreteMeasure, MeasureError> {
        if atoms.is_empty() {
            return Err(MeasureError::Empty);
        }
        atoms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Rat, Rat)> = Vec::with_capacity(atoms.len());
        for (x, w) in atoms {
            if w.is_zero() {
                continue;
            }
            if w.is_negative() {
                return Err(MeasureError::NonPositiveMass);
            }
            match merged.last_mut() {
                Some((px, pw)) if *px == x => *pw += w,
                _ => merged.push((x, w)),
            }
        }
        if merged.is_empty() {
            return Err(MeasureError::Empty);
        }
        let total: Rat = merged.iter().map(|(_, w)| w.clone()).sum();
        if !total.is_one() {
            return Err(MeasureError::MassNotOne(crate::num::format_rat(&total)));
        }
        Ok(DiscreteMeasure { atoms: merged })
    }

    pub fn dirac(x: Rat) -> DiscreteMeasure {
        DiscreteMeasure { atoms: vec![(x, Rat::one())] }
    }

    pub fn atoms(&self) -> &[(Rat, Rat)] {
        &self.atoms
    }

    pub fn mean(&self) -> Rat {
        self.atoms.iter().map(|(x, w)| x * w).sum()
    }

    pub fn min_support(&self) -> &Rat {
        &self.atoms[0].0
    }

    pub fn max_support(&self) -> &Rat {
        &self.atoms.last().unwrap().0
    }

    /// Translation by `d`; the mean shifts by `d` and the infinity Wasserstein
    /// distance to the original is exactly `|d|`.
    pub fn shift(&self, d: &Rat) -> DiscreteMeasure {
        DiscreteMeasure { atoms: self.atoms.iter().map(|(x, w)| (x + d, w.clone())).collect() }
    }

    /// Cumulative mass strictly below / at each atom, i.e. the CDF at `x`.
    pub fn cdf(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for (a, w) in &self.atoms {
            if a <= x {
                acc += w;
            } else {
                break;
            }
        }
        acc
    }

    /// Quantile segments: `(q_lo, q_hi, atom)` covering (0, 1].
    pub fn quantile_segments(&self) -> Vec<(Rat, Rat, Rat)> {
        let mut out = Vec::with_capacity(self.atoms.len());
        let mut acc = Rat::zero();
        for (x, w) in &self.atoms {
            let next = &acc + w;
            out.push((acc.clone(), next.clone(), x.clone()));
            acc = next;
        }
        out
    }
}

/// The call function of a finitely supported measure: convex, non-increasing,
/// slopes in [-1, 0], left tail slope exactly -1, vanishing at and beyond the
/// last breakpoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CallFunction(PwlFn);

impl CallFunction {
    /// Validates raw breakpoints as a call function.
    pub fn from_breakpoints(pts: Vec<(Rat, Rat)>) -> Result<CallFunction, CallFnError> {
        let f = PwlFn::new(pts, -Rat::one(), Rat::zero());
        CallFunction::from_pwl(f)
    }

    pub(crate) fn from_pwl(f: PwlFn) -> Result<CallFunction, CallFnError> {
        let f = f.normalized();
        let chain = f.slope_chain();
        if chain.iter().any(|s| *s < -Rat::one()) {
            return Err(CallFnError::SlopeBelowMinusOne);
        }
        if chain.windows(2).any(|w| w[0] > w[1]) {
            return Err(CallFnError::NonConvex);
        }
        if chain.iter().any(|s| *s > Rat::zero()) {
            return Err(CallFnError::NonConvex);
        }
        if f.left_slope != -Rat::one() {
            return Err(CallFnError::SlopeBelowMinusOne);
        }
        if !f.right_slope.is_zero() {
            return Err(CallFnError::NonZeroTail(crate::num::format_rat(&f.right_slope)));
        }
        let last = f.pts.last().unwrap();
        if !last.1.is_zero() {
            return Err(CallFnError::NonZeroTail(crate::num::format_rat(&last.1)));
        }
        if f.pts.iter().any(|(_, y)| y.is_negative()) {
            return Err(CallFnError::NegativeValue);
        }
        Ok(CallFunction(f))
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        self.0.eval(x)
    }

    pub fn kinks(&self) -> Vec<Rat> {
        self.0.kinks().cloned().collect()
    }

    pub(crate) fn pwl(&self) -> &PwlFn {
        &self.0
    }

    /// Mean of the associated measure; equals the value at 0 for measures
    /// supported on the nonnegative half line.
    pub fn mean(&self) -> Rat {
        self.measure().mean()
    }

    /// Recovers the measure: the mass at a kink is the jump of the slope.
    pub fn measure(&self) -> DiscreteMeasure {
        let f = &self.0;
        let mut atoms = Vec::with_capacity(f.pts.len());
        let chain = f.slope_chain();
        for (i, (x, _)) in f.pts.iter().enumerate() {
            let jump = &chain[i + 1] - &chain[i];
            if !jump.is_zero() {
                atoms.push((x.clone(), jump));
            }
        }
        DiscreteMeasure::new(atoms).expect("slope jumps of a call function sum to one")
    }
}

/// R_mu(x) = sum of mass * (point - x)^+ over the atoms.
pub fn call_function(mu: &DiscreteMeasure) -> CallFunction {
    let atoms = mu.atoms();
    let mut pts: Vec<(Rat, Rat)> = Vec::with_capacity(atoms.len());
    for (x, _) in atoms {
        let v: Rat = atoms
            .iter()
            .filter(|(y, _)| y > x)
            .map(|(y, w)| w * (y - x))
            .sum();
        pts.push((x.clone(), v));
    }
    CallFunction(PwlFn::new(pts, -Rat::one(), Rat::zero()))
}

/// mu <=_c nu: equal means and pointwise ordered call functions. Both call
/// functions are piecewise linear, so comparing at the union of kinks decides
/// the pointwise order.
pub fn convex_order_leq(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> bool {
    if mu.mean() != nu.mean() {
        return false;
    }
    let rm = call_function(mu);
    let rn = call_function(nu);
    rm.kinks()
        .iter()
        .chain(rn.kinks().iter())
        .all(|x| rm.eval(x) <= rn.eval(x))
}

/// True when the sequence increases in convex order step by step.
pub fn is_peacock(seq: &[DiscreteMeasure]) -> bool {
    seq.windows(2).all(|w| convex_order_leq(&w[0], &w[1]))
}

/// Infinity Wasserstein distance: the sup over quantile levels of the
/// quantile gap, computed exactly on the merged cumulative-mass grid. The
/// comonotone coupling attains it, so this equals the infimum over couplings
/// of the maximal displacement.
///
/// ```
/// use arbcheck::measures::{winf_distance, DiscreteMeasure};
/// use arbcheck::num::{rat, ratio};
///
/// let point = DiscreteMeasure::dirac(rat(1));
/// let spread = DiscreteMeasure::new(vec![(rat(0), ratio(1, 2)), (rat(2), ratio(1, 2))]).unwrap();
/// assert_eq!(winf_distance(&point, &spread), rat(1));
/// ```
pub fn winf_distance(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Rat {
    let a = mu.quantile_segments();
    let b = nu.quantile_segments();
    let mut levels: Vec<Rat> = a.iter().chain(b.iter()).map(|(_, hi, _)| hi.clone()).collect();
    levels.sort();
    levels.dedup();
    let mut best = Rat::zero();
    let mut lo = Rat::zero();
    for hi in levels {
        // every merged level cell (lo, hi] lies inside one segment of each measure
        let qa = a.iter().find(|(l, h, _)| *l <= lo && hi <= *h).map(|(_, _, x)| x).unwrap();
        let qb = b.iter().find(|(l, h, _)| *l <= lo && hi <= *h).map(|(_, _, x)| x).unwrap();
        let gap = (qa - qb).abs();
        best = max_rat(best, gap);
        lo = hi;
    }
    best
}

/// The comonotone coupling of two measures as a list of `(i, j, mass)`
/// entries on the product of the supports.
pub fn comonotone_coupling(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Vec<(usize, usize, Rat)> {
    let mut out = Vec::new();
    let mut i = 0usize;
    let mut j = 0usize;
    let mut left_i = mu.atoms()[0].1.clone();
    let mut left_j = nu.atoms()[0].1.clone();
    loop {
        let take = min_rat(left_i.clone(), left_j.clone());
        if !take.is_zero() {
            out.push((i, j, take.clone()));
        }
        left_i -= &take;
        left_j -= &take;
        if left_i.is_zero() {
            i += 1;
            if i == mu.atoms().len() {
                break;
            }
            left_i = mu.atoms()[i].1.clone();
        }
        if left_j.is_zero() {
            j += 1;
            if j == nu.atoms().len() {
                break;
            }
            left_j = nu.atoms()[j].1.clone();
        }
    }
    out
}

/// Smallest and largest (in convex order) call functions among measures with
/// mean `m` at infinity-Wasserstein distance at most `eps` from `mu`:
///
/// - lower: pointwise max of `m + R(x - eps) - (mean + eps)` and `R(x + eps)`;
/// - upper: greatest convex minorant of the pointwise min of
///   `m + R(x + eps) - (mean - eps)` and `R(x - eps)`.
pub fn envelopes(
    mu: &DiscreteMeasure,
    m: &Rat,
    eps: &Rat,
) -> Result<(CallFunction, CallFunction), EnvelopeError> {
    let mean = mu.mean();
    if *m < &mean - eps || *m > &mean + eps {
        return Err(EnvelopeError::MeanOutsideBand);
    }
    let r = call_function(mu);
    let shifted_up = r.pwl().translate(eps); // R(x - eps)
    let shifted_down = r.pwl().translate(&-eps.clone()); // R(x + eps)

    let lower_a = shifted_up.add_const(&(m - (&mean + eps)));
    let lower = PwlFn::pointwise_max(&lower_a, &shifted_down);
    let lower = CallFunction::from_pwl(lower).expect("lower envelope is a call function");

    let upper_a = shifted_down.add_const(&(m - (&mean - eps)));
    let upper = PwlFn::pointwise_min(&upper_a, &shifted_up).lower_convex_hull();
    let upper = CallFunction::from_pwl(upper).expect("upper envelope is a call function");
    Ok((lower, upper))
}

/// Maximum probability mass that can be shipped between the supports along
/// pairs with |x - y| <= eps, subject to the marginal masses: a transportation
/// (max-flow) problem on the bipartite support graph.
pub fn max_close_mass(mu: &DiscreteMeasure, nu: &DiscreteMeasure, eps: &Rat) -> Rat {
    max_close_flow(mu, nu, eps).0
}

/// Returns the optimal flow value together with the plan `(i, j, mass)`.
pub fn max_close_flow(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    eps: &Rat,
) -> (Rat, Vec<(usize, usize, Rat)>) {
    let n = mu.atoms().len();
    let m = nu.atoms().len();
    // node ids: 0 = source, 1..=n left, n+1..=n+m right, n+m+1 = sink
    let size = n + m + 2;
    let sink = n + m + 1;
    let mut cap: Vec<Vec<Rat>> = vec![vec![Rat::zero(); size]; size];
    for (i, (_, w)) in mu.atoms().iter().enumerate() {
        cap[0][1 + i] = w.clone();
    }
    for (j, (_, w)) in nu.atoms().iter().enumerate() {
        cap[n + 1 + j][sink] = w.clone();
    }
    for (i, (x, _)) in mu.atoms().iter().enumerate() {
        for (j, (y, _)) in nu.atoms().iter().enumerate() {
            if (x - y).abs() <= *eps {
                cap[1 + i][n + 1 + j] = Rat::from_integer(2.into()); // effectively unbounded
            }
        }
    }
    let mut flow: Vec<Vec<Rat>> = vec![vec![Rat::zero(); size]; size];
    let mut total = Rat::zero();
    loop {
        // BFS for an augmenting path (Edmonds-Karp)
        let mut prev: Vec<Option<usize>> = vec![None; size];
        prev[0] = Some(0);
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            for v in 0..size {
                if prev[v].is_none() && cap[u][v] > flow[u][v] {
                    prev[v] = Some(u);
                    queue.push_back(v);
                }
            }
        }
        if prev[sink].is_none() {
            break;
        }
        // bottleneck
        let mut bottleneck: Option<Rat> = None;
        let mut v = sink;
        while v != 0 {
            let u = prev[v].unwrap();
            let slack = &cap[u][v] - &flow[u][v];
            bottleneck = Some(match bottleneck {
                None => slack,
                Some(b) => min_rat(b, slack),
            });
            v = u;
        }
        let push = bottleneck.unwrap();
        let mut v = sink;
        while v != 0 {
            let u = prev[v].unwrap();
            flow[u][v] += &push;
            flow[v][u] -= &push;
            v = u;
        }
        total += push;
    }
    let mut plan = Vec::new();
    for i in 0..n {
        for j in 0..m {
            let f = flow[1 + i][n + 1 + j].clone();
            if f > Rat::zero() {
                plan.push((i, j, f));
            }
        }
    }
    (total, plan)
}

/// Coupling characterization of the modified Prokhorov distance: true iff a
/// coupling of `mu` and `nu` exists with P(|X - Y| > eps) <= p.
pub fn close_coupling_feasible(mu: &DiscreteMeasure, nu: &DiscreteMeasure, eps: &Rat, p: &Rat) -> bool {
    if *p >= Rat::one() {
        return true;
    }
    max_close_mass(mu, nu, eps) >= Rat::one() - p
}
