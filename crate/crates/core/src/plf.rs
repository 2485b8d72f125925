// SPDX-License-Identifier: Apache-2.0

//! Exact continuous piecewise-linear functions on `[0,1]` (or on the point
//! `{0}`).

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{fmt_q, parse_q, Ext, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain1 {
    Unit,
    Point,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extremum {
    Min,
    Max,
}

impl Extremum {
    pub fn better(self, a: &Q, b: &Q) -> bool {
        match self {
            Extremum::Min => a < b,
            Extremum::Max => a > b,
        }
    }

    pub fn pick(self, a: Q, b: Q) -> Q {
        if self.better(&b, &a) {
            b
        } else {
            a
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Prefix,
    Suffix,
}

/// A continuous PL function given by its breakpoints, or the everywhere-`+∞`
/// function.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Plf1 {
    Inf(bool),
    Finite(Vec<(Q, Q)>),
}

fn lerp(p: &(Q, Q), r: &(Q, Q), x: &Q) -> Q {
    if p.0 == r.0 {
        return p.1.clone();
    }
    &p.1 + (&r.1 - &p.1) * (x - &p.0) / (&r.0 - &p.0)
}

impl Plf1 {
    /// Everywhere-`+∞` on the given domain.
    pub fn infinite(dom: Domain1) -> Self {
        Plf1::Inf(dom == Domain1::Point)
    }

    pub fn constant(dom: Domain1, c: Q) -> Self {
        match dom {
            Domain1::Unit => Plf1::Finite(vec![(Q::zero(), c.clone()), (Q::one(), c)]),
            Domain1::Point => Plf1::Finite(vec![(Q::zero(), c)]),
        }
    }

    pub fn affine(a: Q, b: Q) -> Self {
        Plf1::Finite(vec![(Q::zero(), b.clone()), (Q::one(), a + b)])
    }

    /// Builds from breakpoints, validating and canonicalising them.
    pub fn from_points(pts: Vec<(Q, Q)>) -> Result<Self> {
        if pts.is_empty() {
            return Err(Error::Structural("PLF1 without breakpoints".into()));
        }
        if pts[0].0 != Q::zero() {
            return Err(Error::Structural("PLF1 must start at 0".into()));
        }
        if pts.len() > 1 {
            if pts.last().unwrap().0 != Q::one() {
                return Err(Error::Structural("PLF1 must end at 1".into()));
            }
            if pts.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(Error::Structural("PLF1 breakpoints must be strictly increasing".into()));
            }
        }
        Ok(Plf1::Finite(pts).canonicalize())
    }

    pub fn domain(&self) -> Domain1 {
        match self {
            Plf1::Inf(true) => Domain1::Point,
            Plf1::Inf(false) => Domain1::Unit,
            Plf1::Finite(p) if p.len() == 1 => Domain1::Point,
            Plf1::Finite(_) => Domain1::Unit,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Plf1::Inf(_))
    }

    pub fn points(&self) -> &[(Q, Q)] {
        match self {
            Plf1::Finite(p) => p,
            Plf1::Inf(_) => &[],
        }
    }

    pub fn eval(&self, x: &Q) -> Result<Ext> {
        let in_dom = match self.domain() {
            Domain1::Point => x.is_zero(),
            Domain1::Unit => *x >= Q::zero() && *x <= Q::one(),
        };
        if !in_dom {
            return Err(Error::Domain(format!("{} outside the PLF domain", fmt_q(x))));
        }
        let pts = match self {
            Plf1::Inf(_) => return Ok(Ext::Inf),
            Plf1::Finite(p) => p,
        };
        if pts.len() == 1 {
            return Ok(Ext::Fin(pts[0].1.clone()));
        }
        let i = pts.partition_point(|p| p.0 <= *x);
        let i = i.clamp(1, pts.len() - 1);
        Ok(Ext::Fin(lerp(&pts[i - 1], &pts[i], x)))
    }

    /// Finite evaluation; `+∞` is a structural error.
    pub fn eval_fin(&self, x: &Q) -> Result<Q> {
        match self.eval(x)? {
            Ext::Fin(v) => Ok(v),
            Ext::Inf => Err(Error::Structural("unexpected +inf function".into())),
        }
    }

    /// Removes middle points of collinear triples.
    pub fn canonicalize(&self) -> Plf1 {
        let pts = match self {
            Plf1::Inf(_) => return self.clone(),
            Plf1::Finite(p) => p,
        };
        let mut out: Vec<(Q, Q)> = Vec::with_capacity(pts.len());
        for p in pts {
            if let Some(last) = out.last() {
                if last.0 == p.0 {
                    continue;
                }
            }
            while out.len() >= 2 {
                let a = &out[out.len() - 2];
                let b = &out[out.len() - 1];
                let cross = (&b.0 - &a.0) * (&p.1 - &a.1) - (&b.1 - &a.1) * (&p.0 - &a.0);
                if cross.is_zero() {
                    out.pop();
                } else {
                    break;
                }
            }
            out.push(p.clone());
        }
        Plf1::Finite(out)
    }

    /// Extensional equality on canonical forms.
    pub fn equals(&self, other: &Plf1) -> bool {
        self.canonicalize() == other.canonicalize()
    }

    pub fn add_const(&self, c: &Q) -> Plf1 {
        match self {
            Plf1::Inf(_) => self.clone(),
            Plf1::Finite(p) => Plf1::Finite(p.iter().map(|(x, y)| (x.clone(), y + c)).collect()),
        }
    }

    /// Maximum absolute slope of any piece.
    pub fn max_abs_slope(&self) -> Q {
        let pts = self.points();
        let mut best = Q::zero();
        for w in pts.windows(2) {
            let s = crate::rational::abs(&((&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0)));
            if s > best {
                best = s;
            }
        }
        best
    }

    /// Pointwise `f ≤ g` (exact: both are PL, so breakpoints suffice).
    pub fn le(&self, other: &Plf1) -> bool {
        match (self, other) {
            (_, Plf1::Inf(_)) => true,
            (Plf1::Inf(_), _) => false,
            (Plf1::Finite(a), Plf1::Finite(b)) => {
                let xs = merged_xs(a, b);
                xs.iter().all(|x| self.eval(x).unwrap() <= other.eval(x).unwrap())
            }
        }
    }

    /// Local extremum values: values at breakpoints where the slope changes
    /// sign, and at both ends.
    pub fn local_extrema(&self) -> Vec<Q> {
        let pts = self.canonicalize();
        let pts = pts.points();
        let mut out = Vec::new();
        for (i, p) in pts.iter().enumerate() {
            if i == 0 || i + 1 == pts.len() {
                out.push(p.1.clone());
                continue;
            }
            let l = &p.1 - &pts[i - 1].1;
            let r = &pts[i + 1].1 - &p.1;
            let zero = Q::zero();
            if (l <= zero && r >= zero) || (l >= zero && r <= zero) {
                out.push(p.1.clone());
            }
        }
        out
    }

    pub fn to_wire(&self) -> serde_json::Value {
        match self {
            Plf1::Inf(point) => serde_json::json!({ "infinite": true, "point": point }),
            Plf1::Finite(pts) => serde_json::Value::Array(
                pts.iter()
                    .map(|(x, y)| serde_json::json!([fmt_q(x), fmt_q(y)]))
                    .collect(),
            ),
        }
    }

    pub fn from_wire(v: &serde_json::Value) -> Result<Plf1> {
        if let Some(obj) = v.as_object() {
            let point = obj.get("point").and_then(|p| p.as_bool()).unwrap_or(false);
            return Ok(Plf1::Inf(point));
        }
        let wire: Vec<(String, String)> = serde_json::from_value(v.clone())?;
        let pts = wire
            .iter()
            .map(|(x, y)| Ok((parse_q(x)?, parse_q(y)?)))
            .collect::<Result<Vec<_>>>()?;
        Plf1::from_points(pts)
    }
}

impl fmt::Display for Plf1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Plf1::Inf(_) => write!(f, "+inf"),
            Plf1::Finite(p) => {
                let parts: Vec<String> = p.iter().map(|(x, y)| format!("({},{})", fmt_q(x), fmt_q(y))).collect();
                write!(f, "{{{}}}", parts.join(","))
            }
        }
    }
}

/// Wire form used by the dump output.
#[derive(Serialize, Deserialize)]
pub struct Plf1Wire(pub Vec<(String, String)>);

fn merged_xs(a: &[(Q, Q)], b: &[(Q, Q)]) -> Vec<Q> {
    let mut xs: Vec<Q> = a.iter().chain(b.iter()).map(|p| p.0.clone()).collect();
    xs.sort();
    xs.dedup();
    xs
}

/// Lower (`Min`) or upper (`Max`) envelope of functions on a common domain.
pub fn pointwise_extremum(fs: &[Plf1], dir: Extremum) -> Result<Plf1> {
    let first = fs.first().ok_or_else(|| Error::Structural("empty envelope".into()))?;
    let dom = first.domain();
    if fs.iter().any(|f| f.domain() != dom) {
        return Err(Error::Structural("envelope over mixed domains".into()));
    }
    let finite: Vec<&Vec<(Q, Q)>> = fs
        .iter()
        .filter_map(|f| match f {
            Plf1::Finite(p) => Some(p),
            Plf1::Inf(_) => None,
        })
        .collect();
    match dir {
        Extremum::Max if finite.len() < fs.len() => return Ok(Plf1::infinite(dom)),
        _ if finite.is_empty() => return Ok(Plf1::infinite(dom)),
        _ => {}
    }
    if dom == Domain1::Point {
        let v = finite.iter().map(|p| p[0].1.clone()).reduce(|a, b| dir.pick(a, b)).unwrap();
        return Ok(Plf1::Finite(vec![(Q::zero(), v)]));
    }
    let mut acc: Vec<(Q, Q)> = finite[0].clone();
    for g in &finite[1..] {
        acc = envelope2(&acc, g, dir);
    }
    Ok(Plf1::Finite(acc).canonicalize())
}

fn envelope2(a: &[(Q, Q)], b: &[(Q, Q)], dir: Extremum) -> Vec<(Q, Q)> {
    let fa = Plf1::Finite(a.to_vec());
    let fb = Plf1::Finite(b.to_vec());
    let xs = merged_xs(a, b);
    let mut out: Vec<(Q, Q)> = Vec::new();
    for (i, x) in xs.iter().enumerate() {
        let va = fa.eval_fin(x).unwrap();
        let vb = fb.eval_fin(x).unwrap();
        if i > 0 {
            let px = &xs[i - 1];
            let pa = fa.eval_fin(px).unwrap();
            let pb = fb.eval_fin(px).unwrap();
            let d0 = &pa - &pb;
            let d1 = &va - &vb;
            let zero = Q::zero();
            if (d0 < zero && d1 > zero) || (d0 > zero && d1 < zero) {
                // both linear on [px, x]: crossing where the difference vanishes
                let t = &d0 / (&d0 - &d1);
                let cx = px + (x - px) * &t;
                let cy = &pa + (&va - &pa) * &t;
                out.push((cx, cy));
            }
        }
        out.push((x.clone(), dir.pick(va, vb)));
    }
    out
}

/// `g(Δ) = ext f over [Δ,1]` (suffix) or over `[0,Δ]` (prefix).
pub fn running_extremum(f: &Plf1, side: Side, dir: Extremum) -> Result<Plf1> {
    let pts = match f {
        Plf1::Inf(_) => return Ok(f.clone()),
        Plf1::Finite(p) => p,
    };
    if pts.len() == 1 {
        return Ok(f.clone());
    }
    match side {
        Side::Prefix => Ok(prefix_extremum(pts, dir)),
        Side::Suffix => {
            // mirror x ↦ 1-x, take prefix, mirror back
            let mirrored: Vec<(Q, Q)> = pts.iter().rev().map(|(x, y)| (Q::one() - x, y.clone())).collect();
            let pre = prefix_extremum(&mirrored, dir);
            let back: Vec<(Q, Q)> =
                pre.points().iter().rev().map(|(x, y)| (Q::one() - x, y.clone())).collect();
            Ok(Plf1::Finite(back).canonicalize())
        }
    }
}

fn prefix_extremum(pts: &[(Q, Q)], dir: Extremum) -> Plf1 {
    let mut out: Vec<(Q, Q)> = vec![pts[0].clone()];
    let mut best = pts[0].1.clone();
    for w in pts.windows(2) {
        let (p, r) = (&w[0], &w[1]);
        // segment p->r; `best` is the running extremum at p.x
        if dir.better(&r.1, &best) {
            if dir.better(&p.1, &best) || p.1 == best {
                // already tracking f at p
                out.push(r.clone());
            } else {
                // f crosses the plateau inside the segment
                let t = (&best - &p.1) / (&r.1 - &p.1);
                let cx = &p.0 + (&r.0 - &p.0) * t;
                out.push((cx, best.clone()));
                out.push(r.clone());
            }
            best = r.1.clone();
        } else {
            out.push((r.0.clone(), best.clone()));
        }
    }
    Plf1::Finite(out).canonicalize()
}

/// Global extremum over the domain.
pub fn global_extremum(f: &Plf1, dir: Extremum) -> Ext {
    match f {
        Plf1::Inf(_) => Ext::Inf,
        Plf1::Finite(p) => Ext::Fin(p.iter().map(|x| x.1.clone()).reduce(|a, b| dir.pick(a, b)).unwrap()),
    }
}

/// A straight segment `s(u) = start + u·(end-start)` in the plane.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub start: (Q, Q),
    pub end: (Q, Q),
}

impl Segment {
    pub fn new(start: (Q, Q), end: (Q, Q)) -> Self {
        Segment { start, end }
    }

    pub fn at(&self, u: &Q) -> (Q, Q) {
        (
            &self.start.0 + (&self.end.0 - &self.start.0) * u,
            &self.start.1 + (&self.end.1 - &self.start.1) * u,
        )
    }

    pub fn is_point(&self) -> bool {
        self.start == self.end
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn f(pts: &[(i64, i64, i64, i64)]) -> Plf1 {
        Plf1::from_points(pts.iter().map(|&(a, b, c, d)| (q(a, b), q(c, d))).collect()).unwrap()
    }

    fn v(p: &Plf1, x: Q) -> Q {
        p.eval_fin(&x).unwrap()
    }

    #[test]
    fn eval_examples() {
        let id = f(&[(0, 1, 0, 1), (1, 1, 1, 1)]);
        assert_eq!(v(&id, q(1, 2)), q(1, 2));
        let vee = f(&[(0, 1, 1, 1), (1, 2, 0, 1), (1, 1, 1, 1)]);
        assert_eq!(v(&vee, q(3, 4)), q(1, 2));
        assert_eq!(Plf1::infinite(Domain1::Unit).eval(&q(1, 3)).unwrap(), Ext::Inf);
        assert!(id.eval(&q(3, 2)).is_err());
        assert!(id.eval(&q(-1, 2)).is_err());
    }

    #[test]
    fn envelope_examples() {
        let up = f(&[(0, 1, 0, 1), (1, 1, 1, 1)]);
        let down = f(&[(0, 1, 1, 1), (1, 1, 0, 1)]);
        let m = pointwise_extremum(&[up.clone(), down.clone()], Extremum::Min).unwrap();
        assert_eq!(m, f(&[(0, 1, 0, 1), (1, 2, 1, 2), (1, 1, 0, 1)]));
        let inf = Plf1::infinite(Domain1::Unit);
        assert_eq!(pointwise_extremum(&[up.clone(), inf.clone()], Extremum::Min).unwrap(), up);
        assert!(pointwise_extremum(&[up.clone(), inf], Extremum::Max).unwrap().is_infinite());
        let mx = pointwise_extremum(&[up.clone(), down.clone()], Extremum::Max).unwrap();
        for i in 0..=100 {
            let x = q(i, 100);
            assert_eq!(v(&mx, x.clone()), v(&up, x.clone()).max(v(&down, x)));
        }
        let pt = Plf1::constant(Domain1::Point, qi(1));
        assert!(pointwise_extremum(&[up, pt], Extremum::Min).is_err());
    }

    #[test]
    fn running_extremum_examples() {
        let vee = f(&[(0, 1, 1, 1), (1, 2, 0, 1), (1, 1, 1, 1)]);
        let smin = running_extremum(&vee, Side::Suffix, Extremum::Min).unwrap();
        assert_eq!(smin, f(&[(0, 1, 0, 1), (1, 2, 0, 1), (1, 1, 1, 1)]));
        let smax = running_extremum(&vee, Side::Suffix, Extremum::Max).unwrap();
        assert_eq!(smax, Plf1::constant(Domain1::Unit, qi(1)));
        let inc = f(&[(0, 1, 1, 4), (1, 2, 1, 2), (1, 1, 2, 1)]);
        let pmin = running_extremum(&inc, Side::Prefix, Extremum::Min).unwrap();
        assert_eq!(pmin, Plf1::constant(Domain1::Unit, q(1, 4)));
    }

    #[test]
    fn canonical_forms() {
        let c = Plf1::Finite(vec![(qi(0), qi(0)), (q(1, 2), q(1, 2)), (qi(1), qi(1))]).canonicalize();
        assert_eq!(c, Plf1::Finite(vec![(qi(0), qi(0)), (qi(1), qi(1))]));
        assert_eq!(c.canonicalize(), c);
        assert!(c.equals(&Plf1::affine(qi(1), qi(0))));
    }

    #[test]
    fn wire_roundtrip() {
        let vee = f(&[(0, 1, 1, 1), (1, 2, 0, 1), (1, 1, 1, 1)]);
        assert_eq!(Plf1::from_wire(&vee.to_wire()).unwrap(), vee);
        let inf = Plf1::infinite(Domain1::Point);
        assert_eq!(Plf1::from_wire(&inf.to_wire()).unwrap(), inf);
    }

    fn arb_plf() -> impl proptest::strategy::Strategy<Value = Plf1> {
        use proptest::prelude::*;
        (proptest::collection::btree_set(1i64..32, 0..5), proptest::collection::vec(-16i64..=16, 6)).prop_map(|(xs, ys)| {
            let mut pts = vec![(qi(0), q(ys[0], 4))];
            pts.extend(xs.iter().enumerate().map(|(i, x)| (q(*x, 32), q(ys[i + 1], 4))));
            pts.push((qi(1), q(ys[5], 4)));
            Plf1::Finite(pts)
        })
    }

    proptest::proptest! {
        #[test]
        fn canonical_form_is_stable(f in arb_plf()) {
            let c = f.canonicalize();
            proptest::prop_assert_eq!(c.canonicalize(), c.clone());
            for (x, y) in f.points() {
                proptest::prop_assert_eq!(c.eval_fin(x).unwrap(), y.clone());
            }
        }

        #[test]
        fn pointwise_min_is_below_both(f in arb_plf(), g in arb_plf()) {
            let m = pointwise_extremum(&[f.clone(), g.clone()], Extremum::Min).unwrap();
            proptest::prop_assert!(m.le(&f) && m.le(&g));
            for (x, _) in f.points().iter().chain(g.points()) {
                let want = std::cmp::min(f.eval_fin(x).unwrap(), g.eval_fin(x).unwrap());
                proptest::prop_assert_eq!(m.eval_fin(x).unwrap(), want);
            }
        }
    }
}
