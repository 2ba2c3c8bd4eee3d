//! Exact rational linear feasibility via phase-one simplex with Bland's rule.
//!
//! Martingale kernels, peacock existence and the single-maturity feasibility
//! oracles all reduce to small systems of the form `Ax {=,<=,>=} b, x >= 0`.
//! Everything runs on `BigRational`, so feasibility answers are exact and the
//! returned points satisfy the constraints identically.

use crate::num::Rat;
use num_traits::{Signed, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rel {
    Eq,
    Le,
    Ge,
}

#[derive(Clone, Debug)]
struct Row {
    coeffs: Vec<(usize, Rat)>,
    rel: Rel,
    rhs: Rat,
}

/// A feasibility problem over nonnegative variables.
#[derive(Clone, Debug)]
pub struct FeasibilityProblem {
    n: usize,
    rows: Vec<Row>,
}

impl FeasibilityProblem {
    pub fn new(n_vars: usize) -> FeasibilityProblem {
        FeasibilityProblem { n: n_vars, rows: Vec::new() }
    }

    pub fn n_vars(&self) -> usize {
        self.n
    }

    pub fn add(&mut self, coeffs: Vec<(usize, Rat)>, rel: Rel, rhs: Rat) {
        for (i, _) in &coeffs {
            assert!(*i < self.n, "variable index out of range");
        }
        self.rows.push(Row { coeffs, rel, rhs });
    }

    pub fn eq(&mut self, coeffs: Vec<(usize, Rat)>, rhs: Rat) {
        self.add(coeffs, Rel::Eq, rhs);
    }

    pub fn le(&mut self, coeffs: Vec<(usize, Rat)>, rhs: Rat) {
        self.add(coeffs, Rel::Le, rhs);
    }

    pub fn ge(&mut self, coeffs: Vec<(usize, Rat)>, rhs: Rat) {
        self.add(coeffs, Rel::Ge, rhs);
    }

    /// Returns a feasible point, or `None` when the system is infeasible.
    pub fn solve(&self) -> Option<Vec<Rat>> {
        let m = self.rows.len();
        if m == 0 {
            return Some(vec![Rat::zero(); self.n]);
        }
        // dense rows with slack columns appended, all rhs made nonnegative
        let mut n_cols = self.n;
        let mut dense: Vec<(Vec<Rat>, Rat)> = Vec::with_capacity(m);
        let mut slack: Vec<Option<(usize, Rat)>> = vec![None; m];
        for (r, row) in self.rows.iter().enumerate() {
            let mut coeffs = vec![Rat::zero(); self.n];
            for (i, c) in &row.coeffs {
                coeffs[*i] += c;
            }
            let mut rhs = row.rhs.clone();
            let mut rel = row.rel;
            if rhs.is_negative() {
                for c in coeffs.iter_mut() {
                    *c = -c.clone();
                }
                rhs = -rhs;
                rel = match rel {
                    Rel::Le => Rel::Ge,
                    Rel::Ge => Rel::Le,
                    Rel::Eq => Rel::Eq,
                };
            }
            match rel {
                Rel::Le => {
                    slack[r] = Some((n_cols, Rat::from_integer(1.into())));
                    n_cols += 1;
                }
                Rel::Ge => {
                    slack[r] = Some((n_cols, Rat::from_integer((-1).into())));
                    n_cols += 1;
                }
                Rel::Eq => {}
            }
            dense.push((coeffs, rhs));
        }
        // pad all rows to n_cols and add artificial columns
        let mut tableau: Vec<Vec<Rat>> = Vec::with_capacity(m);
        let mut basis: Vec<usize> = Vec::with_capacity(m);
        let mut artificial: Vec<usize> = Vec::new();
        let total = n_cols + m; // upper bound on columns incl. artificials
        for (r, (coeffs, rhs)) in dense.into_iter().enumerate() {
            let mut row = vec![Rat::zero(); total + 1];
            for (i, c) in coeffs.into_iter().enumerate() {
                row[i] = c;
            }
            if let Some((col, coeff)) = &slack[r] {
                row[*col] = coeff.clone();
            }
            row[total] = rhs;
            // a +1 slack with nonnegative rhs can start in the basis
            let slack_basis = match &slack[r] {
                Some((col, coeff)) if coeff == &Rat::from_integer(1.into()) => Some(*col),
                _ => None,
            };
            if let Some(col) = slack_basis {
                basis.push(col);
            } else {
                let a_col = n_cols + artificial.len();
                row[a_col] = Rat::from_integer(1.into());
                artificial.push(a_col);
                basis.push(a_col);
            }
            tableau.push(row);
        }
        let n_total = n_cols + artificial.len();
        // phase-1 objective: minimize the sum of artificial variables
        let mut obj = vec![Rat::zero(); total + 1];
        for (r, &b) in basis.iter().enumerate() {
            if b >= n_cols {
                for c in 0..=total {
                    let v = tableau[r][c].clone();
                    obj[c] += v;
                }
            }
        }
        loop {
            // Bland: entering = lowest-indexed column with positive reduced cost
            let mut enter = None;
            for c in 0..n_total {
                if basis.contains(&c) {
                    continue;
                }
                if obj[c] > Rat::zero() {
                    enter = Some(c);
                    break;
                }
            }
            let enter = match enter {
                Some(c) => c,
                None => break,
            };
            // leaving: min ratio, ties by lowest basis variable index
            let mut leave: Option<(usize, Rat)> = None;
            for r in 0..m {
                if tableau[r][enter] > Rat::zero() {
                    let ratio = &tableau[r][total] / &tableau[r][enter];
                    let better = match &leave {
                        None => true,
                        Some((lr, best)) => {
                            ratio < *best || (ratio == *best && basis[r] < basis[*lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let (lr, _) = leave?; // phase-one is bounded below; guard anyway
            // pivot
            let piv = tableau[lr][enter].clone();
            for c in 0..=total {
                tableau[lr][c] = &tableau[lr][c] / &piv;
            }
            for r in 0..m {
                if r != lr && !tableau[r][enter].is_zero() {
                    let factor = tableau[r][enter].clone();
                    for c in 0..=total {
                        let delta = &factor * &tableau[lr][c];
                        tableau[r][c] = &tableau[r][c] - delta;
                    }
                }
            }
            if !obj[enter].is_zero() {
                let factor = obj[enter].clone();
                for c in 0..=total {
                    let delta = &factor * &tableau[lr][c];
                    obj[c] = &obj[c] - delta;
                }
            }
            basis[lr] = enter;
        }
        if !obj[total].is_zero() {
            return None; // artificials cannot be driven to zero
        }
        let mut x = vec![Rat::zero(); self.n];
        for (r, &b) in basis.iter().enumerate() {
            if b < self.n {
                x[b] = tableau[r][total].clone();
            } else if b >= n_cols && !tableau[r][total].is_zero() {
                return None; // degenerate artificial stuck at positive level
            }
        }
        // exactness check: the point must satisfy every original row
        debug_assert!(self.check(&x));
        Some(x)
    }

    /// Exact verification that `x` satisfies every constraint.
    pub fn check(&self, x: &[Rat]) -> bool {
        self.rows.iter().all(|row| {
            let lhs: Rat = row.coeffs.iter().map(|(i, c)| c * &x[*i]).sum();
            match row.rel {
                Rel::Eq => lhs == row.rhs,
                Rel::Le => lhs <= row.rhs,
                Rel::Ge => lhs >= row.rhs,
            }
        }) && x.iter().all(|v| !v.is_negative())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{rat, ratio};

    #[test]
    fn feasible_system() {
        // x + y = 1, x - y <= 0  ->  e.g. x = 0, y = 1
        let mut p = FeasibilityProblem::new(2);
        p.eq(vec![(0, rat(1)), (1, rat(1))], rat(1));
        p.le(vec![(0, rat(1)), (1, rat(-1))], rat(0));
        let x = p.solve().expect("feasible");
        assert!(p.check(&x));
    }

    #[test]
    fn infeasible_system() {
        // x + y = 1, x + y >= 2
        let mut p = FeasibilityProblem::new(2);
        p.eq(vec![(0, rat(1)), (1, rat(1))], rat(1));
        p.ge(vec![(0, rat(1)), (1, rat(1))], rat(2));
        assert!(p.solve().is_none());
    }

    #[test]
    fn negative_rhs_and_fractions() {
        // -x <= -1/2 (i.e. x >= 1/2), x <= 3/4
        let mut p = FeasibilityProblem::new(1);
        p.le(vec![(0, rat(-1))], ratio(-1, 2));
        p.le(vec![(0, rat(1))], ratio(3, 4));
        let x = p.solve().expect("feasible");
        assert!(x[0] >= ratio(1, 2) && x[0] <= ratio(3, 4));
    }

    #[test]
    fn martingale_style_system() {
        // coupling of delta_1 to (0, 2) with barycenter 1: pi0 = pi1 = 1/2
        let mut p = FeasibilityProblem::new(2);
        p.eq(vec![(0, rat(1)), (1, rat(1))], rat(1));
        p.eq(vec![(0, rat(0)), (1, rat(2))], rat(1));
        let x = p.solve().expect("feasible");
        assert_eq!(x, vec![ratio(1, 2), ratio(1, 2)]);
    }
}
