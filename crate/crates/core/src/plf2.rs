// SPDX-License-Identifier: Apache-2.0

//! Continuous piecewise-linear functions on convex polygons of the plane.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::Valuation;
use crate::geom::{Affine, AffineMap, HalfPlane, Poly, Pt};
use crate::plf::{Extremum, Plf1, Segment};
use crate::rational::{fmt_q, parse_q, qi, Ext, Q};

/// One linear piece: a convex polygon with an affine function on it.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub poly: Poly,
    pub f: Affine,
}

/// A continuous PL function on `domain`, or the everywhere-`+∞` function
/// when `cells` is `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct Plf2 {
    pub domain: Poly,
    pub cells: Option<Vec<Cell>>,
}

fn reverse(h: &HalfPlane) -> HalfPlane {
    HalfPlane { a: -h.a.clone(), b: -h.b.clone(), c: -h.c.clone() }
}

fn agree_on(f: &Affine, g: &Affine, p: &Poly) -> bool {
    p.verts.iter().all(|v| f.eval(v) == g.eval(v))
}

impl Plf2 {
    pub fn affine(domain: Poly, f: Affine) -> Self {
        let cells = vec![Cell { poly: domain.clone(), f }];
        Plf2 { domain, cells: Some(cells) }
    }

    pub fn constant(domain: Poly, c: Q) -> Self {
        Plf2::affine(domain, Affine::constant(c))
    }

    pub fn infinite(domain: Poly) -> Self {
        Plf2 { domain, cells: None }
    }

    pub fn from_cells(domain: Poly, cells: Vec<Cell>) -> Self {
        Plf2 { domain, cells: Some(cells) }
    }

    pub fn is_infinite(&self) -> bool {
        self.cells.is_none()
    }

    pub fn cells(&self) -> &[Cell] {
        self.cells.as_deref().unwrap_or(&[])
    }

    pub fn eval(&self, p: &Pt) -> Result<Ext> {
        if !self.domain.contains(p) {
            return Err(Error::Domain(format!("({}, {}) outside function domain", fmt_q(&p.0), fmt_q(&p.1))));
        }
        match &self.cells {
            None => Ok(Ext::Inf),
            Some(cs) => cs
                .iter()
                .find(|c| c.poly.contains(p))
                .map(|c| Ext::Fin(c.f.eval(p)))
                .ok_or_else(|| Error::Structural("cells do not cover the domain".into())),
        }
    }

    pub fn eval_fin(&self, p: &Pt) -> Result<Q> {
        match self.eval(p)? {
            Ext::Fin(v) => Ok(v),
            Ext::Inf => Err(Error::Structural("finite value expected".into())),
        }
    }

    /// Evaluates at a two-clock valuation.
    pub fn eval_valuation(&self, v: &Valuation) -> Result<Q> {
        if v.dim() != 2 {
            return Err(Error::Domain(format!("output functions take two clocks, got {}", v.dim())));
        }
        self.eval_fin(&(v.0[0].clone(), v.0[1].clone()))
    }

    pub fn add_affine(&self, g: &Affine) -> Plf2 {
        Plf2 {
            domain: self.domain.clone(),
            cells: self.cells.as_ref().map(|cs| {
                cs.iter().map(|c| Cell { poly: c.poly.clone(), f: c.f.add(g) }).collect()
            }),
        }
    }

    /// `F ∘ m` on `new_domain`, which `m` must map into the domain of `F`.
    pub fn pullback(&self, m: &AffineMap, new_domain: &Poly) -> Result<Plf2> {
        let image = new_domain.map(m);
        if image.verts.iter().any(|v| !self.domain.contains(v)) {
            return Err(Error::Domain("pullback image leaves the function domain".into()));
        }
        let Some(cs) = &self.cells else {
            return Ok(Plf2::infinite(new_domain.clone()));
        };
        let dim = new_domain.dim();
        let mut out = Vec::new();
        for c in cs {
            let hs: Vec<HalfPlane> = c.poly.halfplanes().iter().map(|h| h.pullback(m)).collect();
            let poly = new_domain.clip_all(&hs);
            if poly.dim() == dim {
                out.push(Cell { poly, f: c.f.compose(m) });
            }
        }
        Ok(merge_cells(Plf2::from_cells(new_domain.clone(), out)))
    }

    /// Restriction to a sub-polygon of the domain.
    pub fn restrict_to(&self, sub: &Poly) -> Result<Plf2> {
        self.pullback(&AffineMap::identity(), sub)
    }

    /// Restriction to a segment, parametrized by `u ∈ [0,1]`.
    pub fn restrict2(&self, s: &Segment) -> Result<Plf1> {
        for p in [&s.start, &s.end] {
            if !self.domain.contains(p) {
                return Err(Error::Domain("segment leaves the function domain".into()));
            }
        }
        if s.is_point() {
            return Ok(match self.eval(&s.start)? {
                Ext::Inf => Plf1::infinite(crate::plf::Domain1::Unit),
                Ext::Fin(v) => Plf1::constant(crate::plf::Domain1::Unit, v),
            });
        }
        let Some(cs) = &self.cells else {
            return Ok(Plf1::infinite(crate::plf::Domain1::Unit));
        };
        let seg = Poly::segment(s.start.clone(), s.end.clone());
        let dx = &s.end.0 - &s.start.0;
        let dy = &s.end.1 - &s.start.1;
        let param = |p: &Pt| -> Q {
            if !dx.is_zero() {
                (&p.0 - &s.start.0) / &dx
            } else {
                (&p.1 - &s.start.1) / &dy
            }
        };
        let mut us: Vec<Q> = vec![qi(0), qi(1)];
        for c in cs {
            let piece = seg.intersect(&c.poly);
            us.extend(piece.verts.iter().map(&param));
        }
        us.sort();
        us.dedup();
        let mut pts = Vec::with_capacity(us.len());
        for u in us {
            let v = self.eval_fin(&s.at(&u))?;
            pts.push((u, v));
        }
        Ok(Plf1::from_points(pts)?.canonicalize())
    }

    /// Whether neighbouring cells agree wherever they meet.
    pub fn check_continuity(&self) -> bool {
        let cs = self.cells();
        for i in 0..cs.len() {
            for j in i + 1..cs.len() {
                let inter = cs[i].poly.intersect(&cs[j].poly);
                if !agree_on(&cs[i].f, &cs[j].f, &inter) {
                    return false;
                }
            }
        }
        true
    }

    pub fn equals(&self, other: &Plf2) -> bool {
        if self.domain != other.domain || self.is_infinite() != other.is_infinite() {
            return false;
        }
        for c in self.cells() {
            for d in other.cells() {
                let inter = c.poly.intersect(&d.poly);
                if !agree_on(&c.f, &d.f, &inter) {
                    return false;
                }
            }
        }
        true
    }

    pub fn to_wire(&self) -> Plf2Wire {
        let mut wire = Plf2Wire {
            infinite: self.is_infinite(),
            domain: self.domain.verts.iter().map(pt_wire).collect(),
            vertices: Vec::new(),
            cells: Vec::new(),
            coeffs: Vec::new(),
        };
        let index = |p: &Pt, vs: &mut Vec<[String; 2]>| -> usize {
            let w = pt_wire(p);
            match vs.iter().position(|x| *x == w) {
                Some(i) => i,
                None => {
                    vs.push(w);
                    vs.len() - 1
                }
            }
        };
        for c in self.cells() {
            let ids: Vec<usize> = c.poly.verts.iter().map(|p| index(p, &mut wire.vertices)).collect();
            let tris: Vec<[usize; 3]> = match ids.len() {
                1 => vec![[ids[0]; 3]],
                2 => vec![[ids[0], ids[1], ids[1]]],
                n => (1..n - 1).map(|k| [ids[0], ids[k], ids[k + 1]]).collect(),
            };
            for t in tris {
                wire.cells.push(t);
                wire.coeffs.push([fmt_q(&c.f.a), fmt_q(&c.f.b), fmt_q(&c.f.c)]);
            }
        }
        wire
    }

    pub fn from_wire(w: &Plf2Wire) -> Result<Plf2> {
        let parse_pt = |p: &[String; 2]| -> Result<Pt> { Ok((parse_q(&p[0])?, parse_q(&p[1])?)) };
        let verts: Vec<Pt> = w.vertices.iter().map(parse_pt).collect::<Result<_>>()?;
        let domain = if w.domain.is_empty() {
            Poly::hull(verts.clone())
        } else {
            Poly::hull(w.domain.iter().map(parse_pt).collect::<Result<_>>()?)
        };
        if domain.is_empty() {
            return Err(Error::Parse("empty function domain".into()));
        }
        if w.infinite {
            return Ok(Plf2::infinite(domain));
        }
        if w.cells.len() != w.coeffs.len() {
            return Err(Error::Parse("cell and coefficient counts differ".into()));
        }
        let mut cells = Vec::new();
        for (t, k) in w.cells.iter().zip(&w.coeffs) {
            let mut pts = Vec::new();
            for &i in t {
                pts.push(verts.get(i).cloned().ok_or_else(|| Error::Parse(format!("vertex index {i} out of range")))?);
            }
            let f = Affine::new(parse_q(&k[0])?, parse_q(&k[1])?, parse_q(&k[2])?);
            cells.push(Cell { poly: Poly::hull(pts), f });
        }
        let f = Plf2::from_cells(domain, cells);
        if !f.check_continuity() {
            return Err(Error::Parse("output function is not continuous".into()));
        }
        Ok(merge_cells(f))
    }
}

fn pt_wire(p: &Pt) -> [String; 2] {
    [fmt_q(&p.0), fmt_q(&p.1)]
}

/// Serialized form: vertex list, triangles as vertex index triples and one
/// `[a, b, c]` coefficient triple per triangle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plf2Wire {
    #[serde(default)]
    pub infinite: bool,
    #[serde(default)]
    pub domain: Vec<[String; 2]>,
    pub vertices: Vec<[String; 2]>,
    pub cells: Vec<[usize; 3]>,
    pub coeffs: Vec<[String; 3]>,
}

/// Greedily merges neighbouring cells carrying the same function.
pub fn merge_cells(f: Plf2) -> Plf2 {
    let Some(mut cs) = f.cells else { return f };
    loop {
        let mut merged = false;
        'outer: for i in 0..cs.len() {
            for j in i + 1..cs.len() {
                if !agree_on(&cs[i].f, &cs[j].f, &cs[j].poly) || !agree_on(&cs[j].f, &cs[i].f, &cs[i].poly) {
                    continue;
                }
                if let Some(u) = cs[i].poly.convex_union(&cs[j].poly) {
                    cs[i].poly = u;
                    cs.swap_remove(j);
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            break;
        }
    }
    Plf2 { domain: f.domain, cells: Some(cs) }
}

/// Pointwise extremum of partial affine candidates over `domain`. Each
/// candidate is defined on its own polygon; the union must cover the domain
/// or be empty, in which case the result is `+∞`.
pub fn envelope(domain: &Poly, cands: &[(Poly, Affine)], dir: Extremum) -> Result<Plf2> {
    let dim = domain.dim();
    let mut pieces: Vec<(Poly, Option<Affine>)> = vec![(domain.clone(), None)];
    for (cp, cf) in cands {
        let p = cp.intersect(domain);
        if p.dim() != dim {
            continue;
        }
        let hs = p.halfplanes();
        let mut next = Vec::with_capacity(pieces.len() + 4);
        for (poly, g) in pieces {
            if poly.intersect(&p).dim() != dim {
                next.push((poly, g));
                continue;
            }
            let mut rest = poly;
            for h in &hs {
                if rest.verts.iter().all(|v| h.side(v).is_zero()) {
                    continue;
                }
                let out = rest.clip(&reverse(h));
                if out.dim() == dim {
                    next.push((out, g.clone()));
                }
                rest = rest.clip(h);
            }
            match g {
                None => next.push((rest, Some(cf.clone()))),
                Some(g) => {
                    let diff = cf.sub(&g);
                    if rest.verts.iter().all(|v| diff.eval(v).is_zero()) {
                        next.push((rest, Some(g)));
                        continue;
                    }
                    let (le, ge) = rest.split(&diff);
                    let (new_side, old_side) = match dir {
                        Extremum::Min => (le, ge),
                        Extremum::Max => (ge, le),
                    };
                    if let Some(q) = new_side {
                        next.push((q, Some(cf.clone())));
                    }
                    if let Some(q) = old_side {
                        next.push((q, Some(g)));
                    }
                }
            }
        }
        pieces = next;
    }
    if pieces.iter().all(|(_, g)| g.is_none()) {
        return Ok(Plf2::infinite(domain.clone()));
    }
    if pieces.iter().any(|(_, g)| g.is_none()) {
        return Err(Error::Structural("envelope candidates do not cover the domain".into()));
    }
    let cells = pieces.into_iter().map(|(poly, g)| Cell { poly, f: g.expect("covered") }).collect();
    Ok(merge_cells(Plf2::from_cells(domain.clone(), cells)))
}

/// Pointwise extremum of functions sharing one domain. `+∞` is neutral for
/// `Min` and absorbing for `Max`.
pub fn pointwise_extremum2(fs: &[Plf2], dir: Extremum) -> Result<Plf2> {
    let Some(first) = fs.first() else {
        return Err(Error::Structural("extremum of no functions".into()));
    };
    if fs.iter().any(|f| f.domain != first.domain) {
        return Err(Error::Structural("mixed domains in extremum".into()));
    }
    if dir == Extremum::Max && fs.iter().any(|f| f.is_infinite()) {
        return Ok(Plf2::infinite(first.domain.clone()));
    }
    let cands: Vec<(Poly, Affine)> =
        fs.iter().flat_map(|f| f.cells().iter().map(|c| (c.poly.clone(), c.f.clone()))).collect();
    envelope(&first.domain, &cands, dir)
}

/// `H(ν) = ext { K(ν + δ·d) : δ ≥ 0, ν + δ·d ∈ dom K }` for `ν ∈ p`.
///
/// Candidates are the ray's crossings with every cell edge, the cell
/// vertices and the starting point itself; the extremum of an affine
/// function over a segment sits at one of them.
pub fn sweep_extremum(p: &Poly, k: &Plf2, d: &Pt, dir: Extremum) -> Result<Plf2> {
    let Some(cs) = &k.cells else {
        return Ok(Plf2::infinite(p.clone()));
    };
    let dim = p.dim();
    let mut cands: Vec<(Poly, Affine)> = Vec::new();
    let mut push = |poly: Poly, f: Affine| {
        if poly.dim() == dim {
            cands.push((poly, f));
        }
    };
    for c in cs {
        push(p.intersect(&c.poly), c.f.clone());
        for (a, b) in c.poly.edges() {
            let e = (&b.0 - &a.0, &b.1 - &a.1);
            let det = &e.0 * &d.1 - &d.0 * &e.1;
            if det.is_zero() {
                continue;
            }
            // ν + δ·d = a + s·e, both δ and s affine in ν.
            let delta = Affine::new(e.1.clone() / &det, -e.0.clone() / &det, (&e.0 * &a.1 - &e.1 * &a.0) / &det);
            let s = Affine::new(d.1.clone() / &det, -d.0.clone() / &det, (&d.0 * &a.1 - &d.1 * &a.0) / &det);
            let valid = p.clip_all(&[delta.nonneg(), s.nonneg(), s.sub(&Affine::constant(qi(1))).nonpos()]);
            let hit = AffineMap {
                fx: Affine::new(qi(1) + &delta.a * &d.0, &delta.b * &d.0, &delta.c * &d.0),
                fy: Affine::new(&delta.a * &d.1, qi(1) + &delta.b * &d.1, &delta.c * &d.1),
            };
            push(valid, c.f.compose(&hit));
        }
        for v in &c.poly.verts {
            let back = Poly::segment(v.clone(), (&v.0 - &d.0 * qi(4), &v.1 - &d.1 * qi(4)));
            push(p.intersect(&back), Affine::constant(c.f.eval(v)));
        }
    }
    envelope(p, &cands, dir)
}

/// Extremum over every vertical fiber `{(Δ, δ) : δ ≥ 0}` of `f`, returned
/// as a function of `Δ ∈ [0,1]`.
pub fn fiber_extremum(f: &Plf2, dir: Extremum) -> Result<Plf1> {
    let base = f.domain.clip(&HalfPlane { a: qi(0), b: qi(1), c: qi(0) });
    if base.is_empty() {
        return Err(Error::Domain("empty fiber".into()));
    }
    let h = sweep_extremum(&base, f, &(qi(0), qi(1)), dir)?;
    h.restrict2(&Segment::new((qi(0), qi(0)), (qi(1), qi(0))))
}
