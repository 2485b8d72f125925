// SPDX-License-Identifier: Apache-2.0

//! Value iteration on two-clock kernel games.
//!
//! Once every move resets a clock, non-goal locations sit on the segment
//! `x = 0`, the segment `y = 0` or the origin, and their value functions
//! become functions of the circular clock difference `Δ`. One iteration then
//! reduces to identities, prefix/suffix extrema and constants on PLF1s.

use crate::error::{Error, Result};
use crate::game::{Owner, Valuation};
use crate::geom::{Affine, Poly, Pt};
use crate::plf::{global_extremum, pointwise_extremum, running_extremum, Domain1, Plf1, Segment, Side};
use crate::plf2::{Cell, Plf2};
use crate::rational::{qi, Ext, Q};
use crate::region::Region;
use crate::region_game::{RTrans, RegionGame};
use crate::step::{combine, ext_of, goal_value, transition_value};

/// Shape of a region closure, as far as `Δ` is concerned.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    /// `{(0,y)}`, with `Δ = y`.
    Vert,
    /// `{(x,0)}`, with `Δ = 1 - x`.
    Horiz,
    /// `{(0,0)}`.
    Point,
    /// A two-dimensional region.
    Open,
}

pub fn kind_of(r: &Region) -> Kind {
    if r.zero.len() == 2 {
        Kind::Point
    } else if r.zero == [0] && r.one.is_empty() {
        Kind::Vert
    } else if r.zero == [1] && r.one.is_empty() {
        Kind::Horiz
    } else {
        Kind::Open
    }
}

/// Circular clock difference of a valuation lying on `x = 0` or `y = 0`.
pub fn delta(v: &Valuation) -> Result<Q> {
    let (x, y) = match v.0.as_slice() {
        [x, y] => (x, y),
        _ => return Err(Error::Domain("the clock difference needs two clocks".into())),
    };
    if *x == qi(0) {
        Ok(y.clone())
    } else if *y == qi(0) {
        Ok(qi(1) - x)
    } else {
        Err(Error::Domain("valuation off both axes".into()))
    }
}

fn delta_in(kind: Kind, p: &Pt) -> Q {
    match kind {
        Kind::Vert => p.1.clone(),
        Kind::Horiz => qi(1) - &p.0,
        _ => qi(0),
    }
}

fn dom1(kind: Kind) -> Domain1 {
    if kind == Kind::Point {
        Domain1::Point
    } else {
        Domain1::Unit
    }
}

/// The closure of a `Vert` or `Horiz` region traversed with increasing `Δ`.
fn param_segment(kind: Kind) -> Segment {
    match kind {
        Kind::Vert => Segment::new((qi(0), qi(0)), (qi(0), qi(1))),
        Kind::Horiz => Segment::new((qi(1), qi(0)), (qi(0), qi(0))),
        _ => Segment::new((qi(0), qi(0)), (qi(0), qi(0))),
    }
}

/// A `Δ`-function seen as a function on the region closure.
pub fn lift(kind: Kind, dom: &Poly, f: &Plf1) -> Result<Plf2> {
    let Plf1::Finite(pts) = f else {
        return Ok(Plf2::infinite(dom.clone()));
    };
    if kind == Kind::Point {
        return Ok(Plf2::constant(dom.clone(), pts[0].1.clone()));
    }
    let (u, seg) = match kind {
        Kind::Vert => (Affine::new(qi(0), qi(1), qi(0)), param_segment(kind)),
        Kind::Horiz => (Affine::new(qi(-1), qi(0), qi(1)), param_segment(kind)),
        _ => return Err(Error::Structural("lifting a Δ-function onto an open region".into())),
    };
    let cells = pts
        .windows(2)
        .map(|w| {
            let s = (&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0);
            let f = Affine::new(&u.a * &s, &u.b * &s, &u.c * &s + &w[0].1 - &s * &w[0].0);
            Cell { poly: Poly::segment(seg.at(&w[0].0), seg.at(&w[1].0)), f }
        })
        .collect();
    Ok(Plf2::from_cells(dom.clone(), cells))
}

/// A function on a region closure read as a function of `Δ`.
pub fn project(kind: Kind, h: &Plf2) -> Result<Plf1> {
    match kind {
        Kind::Point => Ok(match h.eval(&(qi(0), qi(0)))? {
            Ext::Inf => Plf1::infinite(Domain1::Point),
            Ext::Fin(v) => Plf1::constant(Domain1::Point, v),
        }),
        Kind::Vert | Kind::Horiz => h.restrict2(&param_segment(kind)),
        Kind::Open => Err(Error::Structural("projecting an open region onto Δ".into())),
    }
}

/// How one non-goal move acts on `Δ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Case {
    /// The landing point does not depend on `Δ`.
    Const(Pt),
    /// `Δ` is preserved.
    Identity,
    /// Landing anywhere in `[Δ,1]`.
    Suffix,
    /// Landing anywhere in `[0,Δ]`.
    Prefix,
    /// Landing anywhere in `[0,1]`.
    Global,
}

/// Which case applies to a move from `src` firing in `mid` and resetting
/// `resets`, into a location of kind `target`.
pub fn classify(src: &Region, mid: &Region, resets: &[usize], target: Kind) -> Result<Case> {
    let kind = kind_of(src);
    let both = resets.contains(&0) && resets.contains(&1);
    let origin = (qi(0), qi(0));
    let (case, lands) = if both || kind == Kind::Point && (mid == src || !mid.one.is_empty()) {
        (Case::Const(origin), None)
    } else if mid == src {
        match (kind, resets) {
            (Kind::Vert, [0]) => (Case::Identity, Some(Kind::Vert)),
            (Kind::Horiz, [1]) => (Case::Identity, Some(Kind::Horiz)),
            (Kind::Vert, [1]) | (Kind::Horiz, [0]) => (Case::Const(origin), None),
            _ => return Err(Error::Structural(format!("no Δ-case for an immediate move from {:?}", kind))),
        }
    } else if !mid.one.is_empty() {
        match (kind, resets) {
            (Kind::Vert, [1]) => (Case::Identity, Some(Kind::Horiz)),
            (Kind::Horiz, [0]) => (Case::Identity, Some(Kind::Vert)),
            _ => return Err(Error::Structural(format!("no Δ-case for a move to 1 from {:?}", kind))),
        }
    } else {
        let lands = if resets == [0] { Kind::Vert } else { Kind::Horiz };
        match kind {
            Kind::Vert => (Case::Suffix, Some(lands)),
            Kind::Horiz => (Case::Prefix, Some(lands)),
            Kind::Point => (Case::Global, Some(lands)),
            Kind::Open => return Err(Error::Structural("Δ-case from an open region".into())),
        }
    };
    match (lands, target) {
        (Some(l), t) if l != t => Err(Error::Structural(format!("move lands on {:?} but enters {:?}", l, t))),
        (None, Kind::Open) => Err(Error::Structural("move into an open region".into())),
        _ => Ok(case),
    }
}

/// `Opt_t` from `Opt` of the target, for a zero-weight move.
pub fn step_transition(case: &Case, src: Kind, tgt: Kind, opt: &Plf1, owner: Owner) -> Result<Plf1> {
    let dir = ext_of(owner);
    let dom = dom1(src);
    if opt.is_infinite() {
        return Ok(Plf1::infinite(dom));
    }
    Ok(match case {
        Case::Const(p) => match opt.eval(&delta_in(tgt, p))? {
            Ext::Inf => Plf1::infinite(dom),
            Ext::Fin(v) => Plf1::constant(dom, v),
        },
        Case::Identity => opt.clone(),
        Case::Suffix => running_extremum(opt, Side::Suffix, dir)?,
        Case::Prefix => running_extremum(opt, Side::Prefix, dir)?,
        Case::Global => match global_extremum(opt, dir) {
            Ext::Inf => Plf1::infinite(dom),
            Ext::Fin(v) => Plf1::constant(dom, v),
        },
    })
}

/// Fixed point of the iteration.
#[derive(Clone, Debug)]
pub struct ViResult {
    /// One function per location of the game; `None` for goals.
    pub values: Vec<Option<Plf1>>,
    /// First `k` with `Opt^{k+1} = Opt^k`.
    pub k: usize,
    /// Value of the entrance on its whole region closure.
    pub entrance: Plf2,
    pub kinds: Vec<Kind>,
}

impl ViResult {
    pub fn value_at(&self, g: &RegionGame, l: usize, v: &Valuation) -> Result<Ext> {
        let loc = g.locs.get(l).ok_or_else(|| Error::Domain(format!("no location {}", l)))?;
        if !loc.reg.closure_contains(&v.0) {
            return Err(Error::Domain(format!("valuation outside the region of {}", loc.name)));
        }
        let p = (v.0[0].clone(), v.0[1].clone());
        match &self.values[l] {
            Some(f) => f.eval(&delta_in(self.kinds[l], &p)),
            None => goal_value(loc).eval(&p),
        }
    }
}

enum Move {
    /// Computed once from the goal's output.
    Fixed(Plf1),
    Delta(Case, usize),
    /// A move with weights, through the planar step.
    Planar(usize),
}

/// Iterates to the fixed point, then reads off the value of `entrance`.
pub fn iterate(g: &RegionGame, entrance: usize, k_cap: usize) -> Result<ViResult> {
    iterate_observed(g, entrance, k_cap, |_, _| {})
}

/// [`iterate`], calling `seen(k, opt)` on the initial vector and after
/// every step.
pub fn iterate_observed(
    g: &RegionGame,
    entrance: usize,
    k_cap: usize,
    mut seen: impl FnMut(usize, &[Option<Plf1>]),
) -> Result<ViResult> {
    let kinds: Vec<Kind> = g.locs.iter().map(|l| kind_of(&l.reg)).collect();
    let out = g.out_index();
    // An open entrance is evaluated once, from the fixed point of the rest.
    let entered = g.trans.iter().any(|t| t.to == entrance) || kinds.get(entrance) != Some(&Kind::Open);
    let mut moves: Vec<Vec<Move>> = Vec::with_capacity(g.locs.len());
    for (i, l) in g.locs.iter().enumerate() {
        let mut ms = Vec::new();
        if !l.goal && kinds[i] == Kind::Open && i != entrance {
            return Err(Error::Structural(format!("kernel location {} is not on an axis", l.name)));
        }
        if l.goal || i == entrance && !entered {
            moves.push(ms);
            continue;
        }
        for &ti in &out[i] {
            let t = &g.trans[ti];
            let tl = &g.locs[t.to];
            if tl.goal {
                let h = transition_value(l, t, &goal_value(tl))?;
                ms.push(Move::Fixed(project(kinds[i], &h)?));
            } else if l.weight == 0 && t.weight == 0 {
                ms.push(Move::Delta(classify(&l.reg, &t.mid, &t.resets, kinds[t.to])?, ti));
            } else {
                ms.push(Move::Planar(ti));
            }
        }
        moves.push(ms);
    }

    let init = |i: usize| -> Option<Plf1> { (!g.locs[i].goal).then(|| Plf1::infinite(dom1(kinds[i]))) };
    let mut opt: Vec<Option<Plf1>> = (0..g.locs.len()).map(init).collect();
    let skip = |i: usize| g.locs[i].goal || i == entrance && !entered;
    let mut k = 0;
    seen(0, &opt);
    loop {
        if k >= k_cap {
            return Err(Error::IterationCap(k_cap));
        }
        let mut next = opt.clone();
        for i in 0..g.locs.len() {
            if skip(i) {
                continue;
            }
            let vals = moves[i]
                .iter()
                .map(|m| move_value(g, &kinds, &opt, i, m))
                .collect::<Result<Vec<_>>>()?;
            let v = if vals.is_empty() {
                match g.locs[i].owner {
                    Owner::Min => Plf1::infinite(dom1(kinds[i])),
                    Owner::Max => Plf1::constant(dom1(kinds[i]), qi(0)),
                }
            } else {
                pointwise_extremum(&vals, ext_of(g.locs[i].owner))?
            };
            let old = opt[i].as_ref().expect("non-goal");
            if !v.le(old) {
                return Err(Error::Structural(format!("iteration not monotone at {}", g.locs[i].name)));
            }
            next[i] = Some(v);
        }
        let stable = (0..g.locs.len()).all(|i| match (&next[i], &opt[i]) {
            (Some(a), Some(b)) => a.equals(b),
            _ => true,
        });
        opt = next;
        if stable {
            break;
        }
        k += 1;
        seen(k, &opt);
    }

    let entrance_value = entrance_step(g, &kinds, &opt, entrance)?;
    if !entered && !g.locs[entrance].goal && kinds[entrance] != Kind::Open {
        opt[entrance] = Some(project(kinds[entrance], &entrance_value)?);
    }
    Ok(ViResult { values: opt, k, entrance: entrance_value, kinds })
}

fn move_value(g: &RegionGame, kinds: &[Kind], opt: &[Option<Plf1>], i: usize, m: &Move) -> Result<Plf1> {
    match m {
        Move::Fixed(f) => Ok(f.clone()),
        Move::Delta(case, ti) => {
            let to = g.trans[*ti].to;
            step_transition(case, kinds[i], kinds[to], opt[to].as_ref().expect("non-goal"), g.locs[i].owner)
        }
        Move::Planar(ti) => {
            let t = &g.trans[*ti];
            let h = transition_value(&g.locs[i], t, &planar(g, kinds, opt, t.to)?)?;
            project(kinds[i], &h)
        }
    }
}

fn planar(g: &RegionGame, kinds: &[Kind], opt: &[Option<Plf1>], l: usize) -> Result<Plf2> {
    let loc = &g.locs[l];
    match &opt[l] {
        Some(f) => lift(kinds[l], &loc.reg.closure_poly(), f),
        None => Ok(goal_value(loc)),
    }
}

/// One more step from a fresh copy of the entrance with no incoming edges.
fn entrance_step(g: &RegionGame, kinds: &[Kind], opt: &[Option<Plf1>], entrance: usize) -> Result<Plf2> {
    let loc = &g.locs[entrance];
    let moves = g
        .outgoing(entrance)
        .map(|(_, t): (usize, &RTrans)| transition_value(loc, t, &planar(g, kinds, opt, t.to)?))
        .collect::<Result<Vec<_>>>()?;
    combine(loc, moves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::region_game::RLoc;
    use crate::step::bounded_vi;

    fn vert() -> Region {
        Region::new(2, vec![0], vec![vec![1]], vec![])
    }
    fn horiz() -> Region {
        Region::new(2, vec![1], vec![vec![0]], vec![])
    }
    fn x_below() -> Region {
        Region::new(2, vec![], vec![vec![0], vec![1]], vec![])
    }
    fn y_below() -> Region {
        Region::new(2, vec![], vec![vec![1], vec![0]], vec![])
    }

    fn loc(name: &str, owner: Owner, reg: Region, output: Option<Affine>) -> RLoc {
        let goal = output.is_some();
        let output = output.map(|f| Plf2::affine(reg.closure_poly(), f));
        RLoc { name: name.into(), owner, goal, weight: 0, reg, base: 0, output }
    }

    fn tr(from: usize, to: usize, mid: Region, resets: Vec<usize>) -> RTrans {
        RTrans { from, to, mid, guards: Vec::new(), resets, weight: 0 }
    }

    fn game(locs: Vec<RLoc>, trans: Vec<RTrans>) -> RegionGame {
        RegionGame {
            clocks: vec!["x".into(), "y".into()],
            locs,
            trans,
            initial: 0,
            init_val: vec![qi(0), qi(0)],
            trimmed: true,
            relaxed: true,
        }
    }

    fn xy() -> Affine {
        Affine::new(qi(1), qi(1), qi(0))
    }

    #[test]
    fn circular_difference() {
        assert_eq!(delta(&Valuation(vec![qi(0), q(3, 10)])).unwrap(), q(3, 10));
        assert_eq!(delta(&Valuation(vec![q(3, 10), qi(0)])).unwrap(), q(7, 10));
        assert_eq!(delta(&Valuation(vec![qi(0), qi(0)])).unwrap(), qi(0));
        assert!(delta(&Valuation(vec![q(1, 2), q(1, 3)])).is_err());
    }

    #[test]
    fn projected_outputs() {
        for (owner, want) in [(Owner::Min, Plf1::affine(qi(1), qi(0))), (Owner::Max, Plf1::affine(qi(-1), qi(2)))] {
            let g = game(vec![loc("a", owner, vert(), None), loc("g", Owner::Min, x_below(), Some(xy()))], vec![tr(0, 1, x_below(), vec![])]);
            let h = transition_value(&g.locs[0], &g.trans[0], &goal_value(&g.locs[1])).unwrap();
            assert!(project(Kind::Vert, &h).unwrap().equals(&want), "{:?}", owner);
        }
        let diag = Region::new(2, vec![], vec![vec![0, 1]], vec![]);
        let g = game(vec![loc("a", Owner::Min, Region::origin(2), None), loc("g", Owner::Min, diag.clone(), Some(xy()))], vec![tr(0, 1, diag, vec![])]);
        let h = transition_value(&g.locs[0], &g.trans[0], &goal_value(&g.locs[1])).unwrap();
        assert_eq!(project(Kind::Point, &h).unwrap(), Plf1::constant(Domain1::Point, qi(0)));
    }

    #[test]
    fn running_extremum_cases() {
        let target = Plf1::from_points(vec![(qi(0), qi(1)), (q(1, 2), qi(0)), (qi(1), qi(1))]).unwrap();
        let case = classify(&vert(), &x_below(), &[1], Kind::Horiz).unwrap();
        assert_eq!(case, Case::Suffix);
        let min = step_transition(&case, Kind::Vert, Kind::Horiz, &target, Owner::Min).unwrap();
        let want = Plf1::from_points(vec![(qi(0), qi(0)), (q(1, 2), qi(0)), (qi(1), qi(1))]).unwrap();
        assert!(min.equals(&want));
        let max = step_transition(&case, Kind::Vert, Kind::Horiz, &target, Owner::Max).unwrap();
        assert!(max.equals(&Plf1::constant(Domain1::Unit, qi(1))));
        let same = classify(&vert(), &vert(), &[0], Kind::Vert).unwrap();
        assert_eq!(same, Case::Identity);
        assert!(step_transition(&same, Kind::Vert, Kind::Vert, &target, Owner::Max).unwrap().equals(&target));
    }

    #[test]
    fn mismatched_landing_rejected() {
        assert!(classify(&vert(), &x_below(), &[1], Kind::Vert).is_err());
    }

    #[test]
    fn single_goal_move_stops_after_one_step() {
        let g = game(vec![loc("a", Owner::Min, vert(), None), loc("g", Owner::Min, x_below(), Some(xy()))], vec![tr(0, 1, x_below(), vec![])]);
        let r = iterate(&g, 0, 100).unwrap();
        assert_eq!(r.k, 1);
        assert!(r.values[0].as_ref().unwrap().equals(&Plf1::affine(qi(1), qi(0))));
        assert_eq!(r.value_at(&g, 0, &Valuation(vec![qi(0), q(1, 2)])).unwrap(), Ext::Fin(q(1, 2)));
    }

    fn zero_cycle() -> RegionGame {
        let f1 = Affine::new(qi(2), qi(-1), qi(1));
        let f2 = Affine::new(qi(-1), qi(2), qi(1));
        game(
            vec![
                loc("a", Owner::Min, vert(), None),
                loc("b", Owner::Max, horiz(), None),
                loc("g1", Owner::Min, x_below(), Some(f1)),
                loc("g2", Owner::Min, y_below(), Some(f2)),
            ],
            vec![
                tr(0, 1, x_below(), vec![1]),
                tr(0, 2, x_below(), vec![]),
                tr(1, 0, y_below(), vec![0]),
                tr(1, 3, y_below(), vec![]),
            ],
        )
    }

    #[test]
    fn agrees_with_planar_iteration() {
        let g = zero_cycle();
        let r = iterate(&g, 0, 100).unwrap();
        let planar = bounded_vi(&g, r.k + 1).unwrap();
        for l in 0..2 {
            let want = project(r.kinds[l], &planar[l]).unwrap();
            assert!(r.values[l].as_ref().unwrap().equals(&want), "{}: {:?} vs {:?}", l, r.values[l], want);
        }
        assert!(project(Kind::Vert, &r.entrance).unwrap().equals(r.values[0].as_ref().unwrap()));
    }

    #[test]
    fn iteration_is_a_fixed_point() {
        let g = zero_cycle();
        let r = iterate(&g, 0, 100).unwrap();
        let again = bounded_vi(&g, r.k + 3).unwrap();
        for l in 0..2 {
            assert!(project(r.kinds[l], &again[l]).unwrap().equals(r.values[l].as_ref().unwrap()));
        }
    }
}
