//! Piecewise-linear functions on the real line with linear tails.
//!
//! A `PwlFn` is defined by a sorted list of breakpoints plus a left tail
//! slope and a right tail slope. Pointwise max/min and the greatest convex
//! minorant are exact; every breakpoint of a result lies in the union of the
//! input breakpoints and their crossing points.

use crate::num::{max_rat, min_rat, Rat};
use num_traits::Zero;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PwlFn {
    /// Breakpoints with strictly increasing x.
    pub pts: Vec<(Rat, Rat)>,
    pub left_slope: Rat,
    pub right_slope: Rat,
}

impl PwlFn {
    pub fn new(pts: Vec<(Rat, Rat)>, left_slope: Rat, right_slope: Rat) -> PwlFn {
        assert!(!pts.is_empty(), "a piecewise-linear function needs a breakpoint");
        for w in pts.windows(2) {
            assert!(w[0].0 < w[1].0, "breakpoints must be strictly increasing");
        }
        PwlFn { pts, left_slope, right_slope }.normalized()
    }

    /// Constant function (one anchor point, zero slopes).
    pub fn constant(x_anchor: Rat, value: Rat) -> PwlFn {
        PwlFn { pts: vec![(x_anchor, value)], left_slope: Rat::zero(), right_slope: Rat::zero() }
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let first = &self.pts[0];
        if *x <= first.0 {
            return &first.1 + &self.left_slope * (x - &first.0);
        }
        let last = self.pts.last().unwrap();
        if *x >= last.0 {
            return &last.1 + &self.right_slope * (x - &last.0);
        }
        let i = self.pts.partition_point(|(px, _)| px < x);
        let (x0, y0) = &self.pts[i - 1];
        let (x1, y1) = &self.pts[i];
        if x == x1 {
            return y1.clone();
        }
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    pub fn kinks(&self) -> impl Iterator<Item = &Rat> {
        self.pts.iter().map(|(x, _)| x)
    }

    /// g(x) = f(x - d): translate the graph right by `d`.
    pub fn translate(&self, d: &Rat) -> PwlFn {
        PwlFn {
            pts: self.pts.iter().map(|(x, y)| (x + d, y.clone())).collect(),
            left_slope: self.left_slope.clone(),
            right_slope: self.right_slope.clone(),
        }
    }

    pub fn add_const(&self, c: &Rat) -> PwlFn {
        PwlFn {
            pts: self.pts.iter().map(|(x, y)| (x.clone(), y + c)).collect(),
            left_slope: self.left_slope.clone(),
            right_slope: self.right_slope.clone(),
        }
    }

    /// Slope immediately to the right of breakpoint `i`.
    fn slope_after(&self, i: usize) -> Rat {
        if i + 1 == self.pts.len() {
            self.right_slope.clone()
        } else {
            let (x0, y0) = &self.pts[i];
            let (x1, y1) = &self.pts[i + 1];
            (y1 - y0) / (x1 - x0)
        }
    }

    /// Slope immediately to the left of breakpoint `i`.
    fn slope_before(&self, i: usize) -> Rat {
        if i == 0 {
            self.left_slope.clone()
        } else {
            let (x0, y0) = &self.pts[i - 1];
            let (x1, y1) = &self.pts[i];
            (y1 - y0) / (x1 - x0)
        }
    }

    /// All segment slopes from left tail to right tail, in order.
    pub fn slope_chain(&self) -> Vec<Rat> {
        let mut out = vec![self.left_slope.clone()];
        for i in 0..self.pts.len() - 1 {
            out.push(self.slope_after(i));
        }
        out.push(self.right_slope.clone());
        out
    }

    pub fn is_convex(&self) -> bool {
        self.slope_chain().windows(2).all(|w| w[0] <= w[1])
    }

    /// Drops breakpoints that are collinear with their neighbours (or tails).
    pub fn normalized(mut self) -> PwlFn {
        loop {
            let n = self.pts.len();
            if n == 1 {
                return self;
            }
            let mut removed = false;
            for i in 0..self.pts.len() {
                if self.slope_before(i) == self.slope_after(i) {
                    self.pts.remove(i);
                    removed = true;
                    break;
                }
            }
            if !removed {
                return self;
            }
        }
    }

    fn crossing(ax: &Rat, a: &Rat, bx: &Rat, b: &Rat) -> Option<Rat> {
        // f - g linear on [ax, bx] with values a, b at the ends
        if (a > &Rat::zero() && b < &Rat::zero()) || (a < &Rat::zero() && b > &Rat::zero()) {
            Some(ax + (bx - ax) * a / (a - b))
        } else {
            None
        }
    }

    fn combine(f: &PwlFn, g: &PwlFn, take_max: bool) -> PwlFn {
        let mut xs: Vec<Rat> = f.kinks().chain(g.kinks()).cloned().collect();
        xs.sort();
        xs.dedup();
        // tail crossings
        let first = xs[0].clone();
        if f.left_slope != g.left_slope {
            let df = f.eval(&first) - g.eval(&first);
            let ds = &f.left_slope - &g.left_slope;
            let x = &first - df / ds;
            if x < first {
                xs.insert(0, x);
            }
        }
        let last = xs.last().unwrap().clone();
        if f.right_slope != g.right_slope {
            let df = f.eval(&last) - g.eval(&last);
            let ds = &f.right_slope - &g.right_slope;
            let x = &last - df / ds;
            if x > last {
                xs.push(x);
            }
        }
        // interior crossings
        let mut grid: Vec<Rat> = Vec::with_capacity(xs.len() * 2);
        for i in 0..xs.len() {
            if i > 0 {
                let a = f.eval(&xs[i - 1]) - g.eval(&xs[i - 1]);
                let b = f.eval(&xs[i]) - g.eval(&xs[i]);
                if let Some(x) = PwlFn::crossing(&xs[i - 1], &a, &xs[i], &b) {
                    grid.push(x);
                }
            }
            grid.push(xs[i].clone());
        }
        let pts: Vec<(Rat, Rat)> = grid
            .into_iter()
            .map(|x| {
                let fv = f.eval(&x);
                let gv = g.eval(&x);
                let v = if take_max { max_rat(fv, gv) } else { min_rat(fv, gv) };
                (x, v)
            })
            .collect();
        let (ls, rs) = if take_max {
            (min_rat(f.left_slope.clone(), g.left_slope.clone()), max_rat(f.right_slope.clone(), g.right_slope.clone()))
        } else {
            (max_rat(f.left_slope.clone(), g.left_slope.clone()), min_rat(f.right_slope.clone(), g.right_slope.clone()))
        };
        PwlFn { pts, left_slope: ls, right_slope: rs }.normalized()
    }

    pub fn pointwise_max(f: &PwlFn, g: &PwlFn) -> PwlFn {
        PwlFn::combine(f, g, true)
    }

    pub fn pointwise_min(f: &PwlFn, g: &PwlFn) -> PwlFn {
        PwlFn::combine(f, g, false)
    }

    /// Greatest convex minorant. Requires `left_slope <= right_slope`
    /// (otherwise no finite convex minorant exists).
    pub fn lower_convex_hull(&self) -> PwlFn {
        assert!(self.left_slope <= self.right_slope, "no finite convex minorant");
        if self.is_convex() {
            return self.clone();
        }
        // The hull's left tail is parallel to the left tail of `self` and
        // touches the graph where y - ls*x is minimal; same on the right.
        let score = |p: &(Rat, Rat), s: &Rat| -> Rat { &p.1 - s * &p.0 };
        let mut start = 0usize;
        for i in 1..self.pts.len() {
            if score(&self.pts[i], &self.left_slope) < score(&self.pts[start], &self.left_slope) {
                start = i;
            }
        }
        let mut end = self.pts.len() - 1;
        for i in (0..self.pts.len()).rev() {
            if score(&self.pts[i], &self.right_slope) < score(&self.pts[end], &self.right_slope) {
                end = i;
            }
        }
        assert!(start <= end, "inconsistent hull anchors");
        // lower hull of the breakpoints between the two touch points
        let mut hull: Vec<(Rat, Rat)> = Vec::new();
        for p in &self.pts[start..=end] {
            while hull.len() >= 2 {
                let a = &hull[hull.len() - 2];
                let b = &hull[hull.len() - 1];
                // keep b only if it lies strictly below segment a-p
                let cross = (&b.0 - &a.0) * (&p.1 - &a.1) - (&b.1 - &a.1) * (&p.0 - &a.0);
                if cross <= Rat::zero() {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p.clone());
        }
        PwlFn { pts: hull, left_slope: self.left_slope.clone(), right_slope: self.right_slope.clone() }
            .normalized()
    }
}
