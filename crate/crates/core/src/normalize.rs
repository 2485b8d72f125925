// SPDX-License-Identifier: Apache-2.0

//! Rewriting a bounded game into a `[0,1)`-game whose locations remember
//! the integer parts of the clocks.

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::game::{CmpOp, Configuration, Game, Guard, Location, Transition, Valuation};
use crate::geom::{unit_square, Affine, AffineMap};
use crate::rational::{qi, Q};

/// A `[0,1)`-game with, per location, the source location and the vector
/// of integer parts it stands for.
#[derive(Clone, Debug)]
pub struct Normalized {
    pub game: Game,
    pub m: u32,
    pub origin: Vec<(usize, Vec<u32>)>,
}

/// Rejects games in which some clock can grow past the largest constant:
/// every transition must bound every clock from above.
pub fn check_bounded(g: &Game) -> Result<()> {
    for t in &g.transitions {
        for c in 0..g.num_clocks() {
            let bounded = t.guards.iter().any(|gd| gd.clock.0 == c && gd.op.is_upper_bound());
            if !bounded {
                return Err(Error::UnboundedClock(format!(
                    "transition {} -> {} puts no upper bound on clock {}",
                    g.locations[t.from].name, g.locations[t.to].name, g.clocks[c]
                )));
            }
        }
    }
    let cmax = qi(g.max_constant() as i64);
    if g.initial.valuation.0.iter().any(|v| *v > cmax) {
        return Err(Error::UnboundedClock("initial valuation exceeds every guard constant".into()));
    }
    Ok(())
}

/// Adds `x ≤ 1` for every clock the clauses leave unbounded, so that a
/// fractional part never runs past 1 without a tick.
fn bound_fractions(guards: &mut Vec<Guard>, dim: usize) {
    for c in 0..dim {
        if !guards.iter().any(|g| g.clock.0 == c && g.op.is_upper_bound()) {
            guards.push(Guard::new(c, CmpOp::Le, 1));
        }
    }
    guards.sort();
}

/// Rewrites `x ∼ c` for a clock whose integer part is `n` into a clause on
/// the fractional part: `Ok(None)` when trivially true, `Err(())` when false.
fn frac_guard(clock: usize, op: CmpOp, c: u32, n: u32) -> std::result::Result<Option<Guard>, ()> {
    use std::cmp::Ordering::*;
    match n.cmp(&c) {
        Greater => match op {
            CmpOp::Gt | CmpOp::Ge => Ok(None),
            _ => Err(()),
        },
        Less => match op {
            CmpOp::Lt if c == n + 1 => Ok(Some(Guard::new(clock, CmpOp::Lt, 1))),
            CmpOp::Lt | CmpOp::Le => Ok(None),
            _ => Err(()),
        },
        Equal => match op {
            CmpOp::Eq | CmpOp::Le => Ok(Some(Guard::new(clock, CmpOp::Eq, 0))),
            CmpOp::Lt => Err(()),
            CmpOp::Ge => Ok(None),
            CmpOp::Gt => Ok(Some(Guard::new(clock, CmpOp::Gt, 0))),
        },
    }
}

/// Per clock, the loosest upper bound over the transitions leaving `l`
/// (`true` when strict). `None` when nothing leaves `l`.
fn latest_bounds(g: &Game, l: usize) -> Option<Vec<(u32, bool)>> {
    let mut out: Option<Vec<(u32, bool)>> = None;
    for t in g.transitions.iter().filter(|t| t.from == l) {
        let acc = out.get_or_insert_with(|| vec![(0, true); g.num_clocks()]);
        for gd in t.guards.iter().filter(|gd| gd.op.is_upper_bound()) {
            let cand = (gd.bound, gd.op == CmpOp::Lt);
            let cur = &mut acc[gd.clock.0];
            if cand.0 > cur.0 || (cand.0 == cur.0 && !cand.1) {
                *cur = cand;
            }
        }
    }
    out
}

/// Restricts a tick so that no clock has passed the latest bound of the
/// location. Past it no transition is enabled again, and ticking there
/// would let Max run the clock into a deadlock the source game does not
/// have. Returns `false` when the tick can never be taken.
fn still_live(latest: &[(u32, bool)], b: &[u32], set: &[usize], guards: &mut Vec<Guard>) -> bool {
    for (c, &(u, strict)) in latest.iter().enumerate() {
        if set.contains(&c) {
            if b[c] + 1 > u || (b[c] + 1 == u && strict) {
                return false;
            }
        } else if b[c] > u || (b[c] == u && strict) {
            return false;
        } else if b[c] == u {
            guards.push(Guard::new(c, CmpOp::Eq, 0));
        } else if b[c] + 1 == u && strict {
            guards.push(Guard::new(c, CmpOp::Lt, 1));
        }
    }
    true
}

fn encode(buckets: &[u32], m: u32) -> usize {
    buckets.iter().rev().fold(0usize, |acc, &b| acc * m as usize + b as usize)
}

fn decode(mut idx: usize, dim: usize, m: u32) -> Vec<u32> {
    (0..dim)
        .map(|_| {
            let b = (idx % m as usize) as u32;
            idx /= m as usize;
            b
        })
        .collect()
}

/// The `[0,1)`-game with `|L|·M^|X|` locations, `M = cmax + 1`.
pub fn normalize_01(g: &Game) -> Result<Normalized> {
    let dim = g.num_clocks();
    let m = g.max_constant() + 1;
    let per = (m as usize).pow(dim as u32);
    let idx = |l: usize, b: &[u32]| l * per + encode(b, m);
    let mut locations = Vec::with_capacity(g.locations.len() * per);
    let mut origin = Vec::with_capacity(g.locations.len() * per);
    for (l, loc) in g.locations.iter().enumerate() {
        for k in 0..per {
            let b = decode(k, dim, m);
            let tag: Vec<String> = b.iter().map(|v| v.to_string()).collect();
            let mut nl = Location::new(format!("{}@{}", loc.name, tag.join(",")), loc.owner, loc.goal, loc.weight);
            nl.synthetic = loc.synthetic;
            locations.push(nl);
            origin.push((l, b));
        }
    }
    let mut transitions = Vec::new();
    for k in 0..per {
        let b = decode(k, dim, m);
        for t in &g.transitions {
            let mut guards = Vec::new();
            let mut feasible = true;
            for gd in &t.guards {
                match frac_guard(gd.clock.0, gd.op, gd.bound, b[gd.clock.0]) {
                    Ok(Some(fg)) => guards.push(fg),
                    Ok(None) => {}
                    Err(()) => feasible = false,
                }
            }
            if !feasible {
                continue;
            }
            bound_fractions(&mut guards, dim);
            let mut nb = b.clone();
            for r in &t.resets {
                nb[r.0] = 0;
            }
            let resets = t.resets.iter().map(|c| c.0).collect();
            transitions.push(Transition::new(idx(t.from, &b), idx(t.to, &nb), guards, resets, t.weight));
        }
        for (l, loc) in g.locations.iter().enumerate() {
            if loc.goal {
                continue;
            }
            let Some(latest) = latest_bounds(g, l) else { continue };
            for mask in 1u32..(1 << dim) {
                let set: Vec<usize> = (0..dim).filter(|c| mask & (1 << c) != 0).collect();
                if set.iter().any(|&c| b[c] + 1 >= m) {
                    continue;
                }
                let mut nb = b.clone();
                for &c in &set {
                    nb[c] += 1;
                }
                let mut guards: Vec<Guard> = set.iter().map(|&c| Guard::new(c, CmpOp::Eq, 1)).collect();
                if !still_live(&latest, &b, &set, &mut guards) {
                    continue;
                }
                bound_fractions(&mut guards, dim);
                transitions.push(Transition::new(idx(l, &b), idx(l, &nb), guards, set, 0));
            }
        }
    }
    let v0 = &g.initial.valuation;
    let mut b0 = Vec::with_capacity(dim);
    let mut f0 = Vec::with_capacity(dim);
    for v in &v0.0 {
        let n = v.numer().div_floor(v.denom());
        let nb: u32 = n.try_into().map_err(|_| Error::Domain("initial clock value out of range".into()))?;
        if nb >= m {
            return Err(Error::UnboundedClock("initial valuation exceeds every guard constant".into()));
        }
        b0.push(nb);
        f0.push(v - qi(nb as i64));
    }
    let initial = Configuration { location: idx(g.initial.location, &b0), valuation: Valuation(f0) };
    let mut out = Game::new(g.clocks.clone(), locations, transitions, initial);
    if !g.outputs.is_empty() && dim != 2 {
        return Err(Error::Structural("output functions need exactly two clocks".into()));
    }
    for (&l, f) in &g.outputs {
        for k in 0..per {
            let b = decode(k, dim, m);
            let shift = AffineMap {
                fx: Affine::new(qi(1), qi(0), qi(b[0] as i64)),
                fy: Affine::new(qi(0), qi(1), qi(b[1] as i64)),
            };
            let back = AffineMap {
                fx: Affine::new(qi(1), qi(0), qi(-(b[0] as i64))),
                fy: Affine::new(qi(0), qi(1), qi(-(b[1] as i64))),
            };
            let dom = unit_square().intersect(&f.domain.map(&back));
            if !dom.is_empty() {
                out.outputs.insert(idx(l, &b), f.pullback(&shift, &dom)?);
            }
        }
    }
    Ok(Normalized { game: out, m, origin })
}

/// Integer parts and fractional parts of a valuation.
pub fn split_valuation(v: &Valuation) -> (Vec<u32>, Vec<Q>) {
    v.0.iter()
        .map(|x| {
            let n = x.numer().div_floor(x.denom());
            let n32: u32 = n.try_into().unwrap_or(u32::MAX);
            (n32, x - qi(n32 as i64))
        })
        .unzip()
}
