// SPDX-License-Identifier: Apache-2.0

//! Exact planar geometry: affine maps and possibly degenerate convex
//! polygons (points, segments, proper polygons).

use num_traits::{Signed, Zero};

use crate::rational::{qi, Q};

pub type Pt = (Q, Q);

pub fn pt(x: Q, y: Q) -> Pt {
    (x, y)
}

fn sub(a: &Pt, b: &Pt) -> Pt {
    (&a.0 - &b.0, &a.1 - &b.1)
}

fn cross(o: &Pt, a: &Pt, b: &Pt) -> Q {
    let u = sub(a, o);
    let v = sub(b, o);
    &u.0 * &v.1 - &u.1 * &v.0
}

/// `a·x + b·y + c`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Affine {
    pub a: Q,
    pub b: Q,
    pub c: Q,
}

impl Affine {
    pub fn new(a: Q, b: Q, c: Q) -> Self {
        Affine { a, b, c }
    }

    pub fn constant(c: Q) -> Self {
        Affine { a: Q::zero(), b: Q::zero(), c }
    }

    pub fn eval(&self, p: &Pt) -> Q {
        &self.a * &p.0 + &self.b * &p.1 + &self.c
    }

    pub fn add(&self, o: &Affine) -> Affine {
        Affine { a: &self.a + &o.a, b: &self.b + &o.b, c: &self.c + &o.c }
    }

    pub fn sub(&self, o: &Affine) -> Affine {
        Affine { a: &self.a - &o.a, b: &self.b - &o.b, c: &self.c - &o.c }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero()
    }

    /// `self ∘ m`.
    pub fn compose(&self, m: &AffineMap) -> Affine {
        Affine {
            a: &self.a * &m.fx.a + &self.b * &m.fy.a,
            b: &self.a * &m.fx.b + &self.b * &m.fy.b,
            c: &self.a * &m.fx.c + &self.b * &m.fy.c + &self.c,
        }
    }

    /// Half-plane `self ≤ 0`.
    pub fn nonpos(&self) -> HalfPlane {
        HalfPlane { a: self.a.clone(), b: self.b.clone(), c: -self.c.clone() }
    }

    /// Half-plane `self ≥ 0`.
    pub fn nonneg(&self) -> HalfPlane {
        HalfPlane { a: -self.a.clone(), b: -self.b.clone(), c: self.c.clone() }
    }
}

/// Affine map of the plane, one affine form per output coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    pub fx: Affine,
    pub fy: Affine,
}

impl AffineMap {
    pub fn identity() -> Self {
        AffineMap {
            fx: Affine::new(qi(1), qi(0), qi(0)),
            fy: Affine::new(qi(0), qi(1), qi(0)),
        }
    }

    pub fn apply(&self, p: &Pt) -> Pt {
        (self.fx.eval(p), self.fy.eval(p))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &AffineMap) -> AffineMap {
        AffineMap { fx: self.fx.compose(inner), fy: self.fy.compose(inner) }
    }
}

/// `a·x + b·y ≤ c`.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfPlane {
    pub a: Q,
    pub b: Q,
    pub c: Q,
}

impl HalfPlane {
    pub fn side(&self, p: &Pt) -> Q {
        &self.a * &p.0 + &self.b * &p.1 - &self.c
    }

    pub fn contains(&self, p: &Pt) -> bool {
        !self.side(p).is_positive()
    }

    /// Preimage under an affine map.
    pub fn pullback(&self, m: &AffineMap) -> HalfPlane {
        let f = Affine::new(self.a.clone(), self.b.clone(), -self.c.clone()).compose(m);
        f.nonpos()
    }

    pub fn is_trivial(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

/// A convex polygon stored as its counter-clockwise vertex cycle with no
/// collinear vertices. One vertex is a point, two a segment, none empty.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    pub verts: Vec<Pt>,
}

impl Poly {
    pub fn empty() -> Self {
        Poly { verts: Vec::new() }
    }

    pub fn point(p: Pt) -> Self {
        Poly { verts: vec![p] }
    }

    pub fn segment(a: Pt, b: Pt) -> Self {
        Poly::hull(vec![a, b])
    }

    /// Convex hull (monotone chain), collinear points dropped.
    pub fn hull(mut pts: Vec<Pt>) -> Self {
        pts.sort();
        pts.dedup();
        if pts.len() <= 1 {
            return Poly { verts: pts };
        }
        let mut lower: Vec<Pt> = Vec::new();
        for p in &pts {
            while lower.len() >= 2 && !cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p).is_positive() {
                lower.pop();
            }
            lower.push(p.clone());
        }
        let mut upper: Vec<Pt> = Vec::new();
        for p in pts.iter().rev() {
            while upper.len() >= 2 && !cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p).is_positive() {
                upper.pop();
            }
            upper.push(p.clone());
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        if lower.len() == 2 && lower[0] == lower[1] {
            lower.pop();
        }
        Poly { verts: lower }
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    /// Affine dimension, `None` when empty.
    pub fn dim(&self) -> Option<usize> {
        match self.verts.len() {
            0 => None,
            1 => Some(0),
            2 => Some(1),
            _ => Some(2),
        }
    }

    pub fn clip(&self, h: &HalfPlane) -> Poly {
        let n = self.verts.len();
        if n == 0 {
            return self.clone();
        }
        if h.is_trivial() {
            return if h.c.is_negative() { Poly::empty() } else { self.clone() };
        }
        let mut out: Vec<Pt> = Vec::new();
        let sides: Vec<Q> = self.verts.iter().map(|p| h.side(p)).collect();
        for i in 0..n {
            if !sides[i].is_positive() {
                out.push(self.verts[i].clone());
            }
            if n >= 2 {
                let j = (i + 1) % n;
                let (si, sj) = (&sides[i], &sides[j]);
                if (si.is_positive() && sj.is_negative()) || (si.is_negative() && sj.is_positive()) {
                    let t = si / (si - sj);
                    let a = &self.verts[i];
                    let b = &self.verts[j];
                    out.push((&a.0 + (&b.0 - &a.0) * &t, &a.1 + (&b.1 - &a.1) * &t));
                }
            }
        }
        Poly::hull(out)
    }

    pub fn clip_all(&self, hs: &[HalfPlane]) -> Poly {
        let mut p = self.clone();
        for h in hs {
            if p.is_empty() {
                break;
            }
            p = p.clip(h);
        }
        p
    }

    /// Half-plane description, with equalities for degenerate shapes.
    pub fn halfplanes(&self) -> Vec<HalfPlane> {
        let v = &self.verts;
        match v.len() {
            0 => vec![HalfPlane { a: qi(0), b: qi(0), c: qi(-1) }],
            1 => {
                let (x, y) = &v[0];
                vec![
                    HalfPlane { a: qi(1), b: qi(0), c: x.clone() },
                    HalfPlane { a: qi(-1), b: qi(0), c: -x.clone() },
                    HalfPlane { a: qi(0), b: qi(1), c: y.clone() },
                    HalfPlane { a: qi(0), b: qi(-1), c: -y.clone() },
                ]
            }
            2 => {
                let (a, b) = (&v[0], &v[1]);
                let e = sub(b, a);
                let line_c = &e.1 * &a.0 - &e.0 * &a.1;
                vec![
                    HalfPlane { a: e.1.clone(), b: -e.0.clone(), c: line_c.clone() },
                    HalfPlane { a: -e.1.clone(), b: e.0.clone(), c: -line_c },
                    HalfPlane { a: -e.0.clone(), b: -e.1.clone(), c: -(&e.0 * &a.0 + &e.1 * &a.1) },
                    HalfPlane { a: e.0.clone(), b: e.1.clone(), c: &e.0 * &b.0 + &e.1 * &b.1 },
                ]
            }
            n => (0..n)
                .map(|i| {
                    let p = &v[i];
                    let e = sub(&v[(i + 1) % n], p);
                    HalfPlane { a: e.1.clone(), b: -e.0.clone(), c: &e.1 * &p.0 - &e.0 * &p.1 }
                })
                .collect(),
        }
    }

    pub fn intersect(&self, other: &Poly) -> Poly {
        self.clip_all(&other.halfplanes())
    }

    pub fn contains(&self, p: &Pt) -> bool {
        !self.is_empty() && self.halfplanes().iter().all(|h| h.contains(p))
    }

    /// A point in the relative interior.
    pub fn interior_point(&self) -> Pt {
        let n = qi(self.verts.len() as i64);
        let sx: Q = self.verts.iter().map(|p| p.0.clone()).sum();
        let sy: Q = self.verts.iter().map(|p| p.1.clone()).sum();
        (sx / &n, sy / n)
    }

    /// Twice the area in dimension 2, `|dx|+|dy|` in dimension 1, 0 for a
    /// point. Comparable only between shapes of equal dimension.
    pub fn measure(&self) -> Q {
        let v = &self.verts;
        match v.len() {
            0 | 1 => Q::zero(),
            2 => (&v[1].0 - &v[0].0).abs() + (&v[1].1 - &v[0].1).abs(),
            n => (0..n).map(|i| cross(&v[0], &v[i], &v[(i + 1) % n])).sum(),
        }
    }

    /// Edges `(p_i, p_{i+1})`; a segment yields itself once.
    pub fn edges(&self) -> Vec<(Pt, Pt)> {
        let v = &self.verts;
        match v.len() {
            0 | 1 => Vec::new(),
            2 => vec![(v[0].clone(), v[1].clone())],
            n => (0..n).map(|i| (v[i].clone(), v[(i + 1) % n].clone())).collect(),
        }
    }

    pub fn map(&self, m: &AffineMap) -> Poly {
        Poly::hull(self.verts.iter().map(|p| m.apply(p)).collect())
    }

    /// Splits along `f = 0` into the parts `f ≤ 0` and `f ≥ 0`; parts of
    /// lower dimension than `self` are dropped.
    pub fn split(&self, f: &Affine) -> (Option<Poly>, Option<Poly>) {
        let d = self.dim();
        let keep = |p: Poly| if p.dim() == d { Some(p) } else { None };
        (keep(self.clip(&f.nonpos())), keep(self.clip(&f.nonneg())))
    }

    /// Whether the union of two convex shapes is convex (and of equal
    /// dimension), in which case their hull is that union.
    pub fn convex_union(&self, other: &Poly) -> Option<Poly> {
        if self.dim() != other.dim() {
            return None;
        }
        let mut pts = self.verts.clone();
        pts.extend(other.verts.iter().cloned());
        let h = Poly::hull(pts);
        if h.dim() != self.dim() {
            return None;
        }
        let inter = self.intersect(other);
        let overlap = if inter.dim() == self.dim() { inter.measure() } else { Q::zero() };
        if overlap.is_zero() && h.measure() == self.measure() + other.measure() {
            Some(h)
        } else {
            None
        }
    }
}

/// The unit square `[0,1]²`.
pub fn unit_square() -> Poly {
    Poly::hull(vec![(qi(0), qi(0)), (qi(1), qi(0)), (qi(1), qi(1)), (qi(0), qi(1))])
}
