// SPDX-License-Identifier: Apache-2.0

//! Turning a relaxed kernel game into one where every transition resets a
//! clock or enters a goal.
//!
//! Clocks that reach 1 without being reset are reset anyway and the
//! location entered is replaced by a copy remembering the set `S` of
//! clocks that "really" sit at 1. From such a copy no time can elapse
//! (the clocks of `S` would exceed 1), so its transitions fire at once and
//! reset `S` as well; a goal copy reads the clocks of `S` as 1.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::cycle::sccs;
use crate::error::{Error, Result};
use crate::game::{CmpOp, Guard, Owner};
use crate::geom::{Affine, AffineMap};
use crate::rational::qi;
use crate::region::Region;
use crate::region_game::{minimal_guard, RLoc, RTrans, RegionGame};

/// Top interior block, or the zero block when there is none.
pub fn upclock_or_zero(r: &Region) -> Vec<usize> {
    if r.blocks.is_empty() {
        r.zero.clone()
    } else {
        r.upclock()
    }
}

/// Equality clauses singling out `mid` among the time-successors of `src`.
pub fn relaxed_guard(src: &Region, mid: &Region) -> Vec<Guard> {
    let succ = src.time_successors().unwrap_or_default();
    let mut g: Vec<Guard> = minimal_guard(&succ, mid).into_iter().filter(|g| g.op == CmpOp::Eq).collect();
    if mid == src {
        // Delay 0 is forced exactly when some clock sits at 0.
        g.retain(|c| c.bound == 0);
    }
    g
}

fn forces_no_delay(src: &Region, mid: &Region) -> bool {
    mid == src && !src.zero.is_empty()
}

fn key(t: &RTrans) -> (usize, usize, Region, Vec<usize>) {
    (t.from, t.to, t.mid.clone(), t.resets.clone())
}

/// Rejects games in which Max alone can cycle.
pub fn check_max_cycles(g: &RegionGame) -> Result<()> {
    let n = g.locs.len();
    let mut adj = vec![Vec::new(); n];
    for t in &g.trans {
        let (a, b) = (&g.locs[t.from], &g.locs[t.to]);
        if a.owner == Owner::Max && b.owner == Owner::Max && !b.goal {
            adj[t.from].push(t.to);
        }
    }
    for comp in sccs(n, &adj) {
        let cyclic = comp.len() > 1 || adj[comp[0]].contains(&comp[0]);
        if cyclic {
            return Err(Error::MaxControlledCycle(g.locs[comp[0]].name.clone()));
        }
    }
    Ok(())
}

pub fn add_resets(g: &RegionGame) -> Result<RegionGame> {
    let mut g = g.clone();
    // Reset-free Min self-loops only waste time.
    g.trans.retain(|t| {
        !(t.from == t.to && t.resets.is_empty() && g.locs[t.from].owner == Owner::Min && !g.locs[t.to].goal)
    });
    check_max_cycles(&g)?;

    // Phase 1: resets for x=0 guards and composition of reset-free moves
    // between locations of the same player.
    let mut seen: BTreeSet<(usize, usize, Region, Vec<usize>)> = g.trans.iter().map(key).collect();
    loop {
        let mut changed = false;
        let mut next: Vec<RTrans> = Vec::with_capacity(g.trans.len());
        let mut added: Vec<RTrans> = Vec::new();
        for t in &g.trans {
            let src = &g.locs[t.from];
            let dst = &g.locs[t.to];
            if dst.goal || !t.resets.is_empty() {
                next.push(t.clone());
            } else if forces_no_delay(&src.reg, &t.mid) {
                next.push(RTrans { resets: src.reg.zero.clone(), ..t.clone() });
                changed = true;
            } else if !t.mid.one.is_empty() {
                return Err(Error::Structural(format!("transition from {} reaches 1 without reset", src.name)));
            } else if src.owner == dst.owner {
                changed = true;
                for t2 in g.trans.iter().filter(|t2| t2.from == t.to && t2.to != t.from) {
                    let c = RTrans { from: t.from, mid: t2.mid.clone(), guards: Vec::new(), ..t2.clone() };
                    if seen.insert(key(&c)) {
                        added.push(c);
                    }
                }
            } else {
                next.push(t.clone());
            }
        }
        next.extend(added);
        g.trans = next;
        if !changed {
            break;
        }
    }
    let pushed: Vec<usize> = (0..g.trans.len())
        .filter(|&i| {
            let t = &g.trans[i];
            t.resets.is_empty() && !g.locs[t.to].goal
        })
        .collect();

    // Phase 2: cross-player moves wait until the top clocks reach 1, reset
    // them and enter the matching copy.
    let mut copies = Copies::default();
    for &i in &pushed {
        let src = g.locs[g.trans[i].from].reg.clone();
        let u = upclock_or_zero(&src);
        let mid = src
            .time_successors()?
            .into_iter()
            .find(|s| s.one == u)
            .ok_or_else(|| Error::Structural("no time-successor with the top clocks at 1".into()))?;
        let to = g.trans[i].to;
        if upclock_or_zero(&g.locs[to].reg) != u {
            let names = (&g.locs[g.trans[i].from].name, &g.locs[to].name);
            return Err(Error::Structural(format!("top clocks of {} and {} differ", names.0, names.1)));
        }
        let target = copies.get(&mut g, to, u.clone())?;
        let t = &mut g.trans[i];
        t.mid = mid;
        t.resets = u;
        t.to = target;
    }
    while let Some((here, base, s)) = copies.queue.pop_front() {
        let reg = g.locs[here].reg.clone();
        let outs: Vec<RTrans> = g.trans.iter().filter(|t| t.from == base).cloned().collect();
        for t in outs {
            let (tb, mut s2) = copies.rev.get(&t.to).cloned().unwrap_or((t.to, Vec::new()));
            s2.extend(s.iter().copied().filter(|c| !t.resets.contains(c)));
            s2.sort_unstable();
            s2.dedup();
            let mut resets = t.resets.clone();
            resets.extend(s.iter().copied());
            resets.sort_unstable();
            resets.dedup();
            let to = copies.get(&mut g, tb, s2)?;
            g.trans.push(RTrans { from: here, to, mid: reg.clone(), guards: Vec::new(), resets, weight: t.weight });
        }
    }

    // Clocks tested against 0 are reset; guards recomputed.
    for t in &mut g.trans {
        let src = &g.locs[t.from].reg;
        if forces_no_delay(src, &t.mid) && !g.locs[t.to].goal {
            t.resets.extend(src.zero.iter().copied());
            t.resets.sort_unstable();
            t.resets.dedup();
        }
        t.guards = relaxed_guard(src, &t.mid);
    }
    let g = g.prune_unreachable();
    for t in &g.trans {
        if !g.locs[t.to].goal && t.resets.is_empty() {
            return Err(Error::Structural(format!("transition from {} still lacks a reset", g.locs[t.from].name)));
        }
    }
    g.check_closure_coherent()?;
    Ok(g)
}

#[derive(Default)]
struct Copies {
    map: BTreeMap<(usize, Vec<usize>), usize>,
    rev: BTreeMap<usize, (usize, Vec<usize>)>,
    queue: VecDeque<(usize, usize, Vec<usize>)>,
}

impl Copies {
    /// The copy of `base` with the clocks of `s` virtually at 1.
    fn get(&mut self, g: &mut RegionGame, base: usize, s: Vec<usize>) -> Result<usize> {
        if s.is_empty() {
            return Ok(base);
        }
        if let Some(&i) = self.map.get(&(base, s.clone())) {
            return Ok(i);
        }
        let b = g.locs[base].clone();
        if !s.iter().all(|c| b.reg.upclock().contains(c)) {
            return Err(Error::Structural(format!("clocks {:?} cannot sit at 1 in {}", s, b.name)));
        }
        let reg = b.reg.reset(&s);
        let output = match &b.output {
            Some(f) => {
                let one = |c: usize, lin: Affine| if s.contains(&c) { Affine::constant(qi(1)) } else { lin };
                let m = AffineMap {
                    fx: one(0, Affine::new(qi(1), qi(0), qi(0))),
                    fy: one(1, Affine::new(qi(0), qi(1), qi(0))),
                };
                Some(f.pullback(&m, &reg.closure_poly())?)
            }
            None => None,
        };
        let names: Vec<String> = s.iter().map(|&c| g.clocks[c].clone()).collect();
        let idx = g.locs.len();
        g.locs.push(RLoc { name: format!("{}^{}", b.name, names.join("")), reg, output, ..b });
        self.map.insert((base, s.clone()), idx);
        self.rev.insert(idx, (base, s.clone()));
        if !g.locs[base].goal {
            self.queue.push_back((idx, base, s));
        }
        Ok(idx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Configuration, Game, Location, Transition, Valuation};
    use crate::normalize::normalize_01;
    use crate::region_game::{build_region_wtg, relax, trim};
    use crate::step::bounded_vi;

    fn le(c: usize) -> Guard {
        Guard::new(c, CmpOp::Le, 1)
    }

    fn region_game(locs: Vec<Location>, ts: Vec<Transition>) -> RegionGame {
        let g = Game::new(vec!["x".into(), "y".into()], locs, ts, Configuration { location: 0, valuation: Valuation::zero(2) });
        let n = normalize_01(&g).unwrap();
        relax(&trim(&build_region_wtg(&n.game).unwrap()).unwrap())
    }

    fn min_then_max() -> RegionGame {
        let locs = vec![
            Location::new("a", Owner::Min, false, 0),
            Location::new("b", Owner::Max, false, 0),
            Location::new("g", Owner::Min, true, 0),
        ];
        let ts = vec![
            Transition::new(0, 1, vec![le(0), le(1)], vec![], 0),
            Transition::new(1, 2, vec![le(0), le(1)], vec![], 1),
            Transition::new(1, 2, vec![Guard::new(0, CmpOp::Eq, 1), le(1)], vec![], 3),
        ];
        region_game(locs, ts)
    }

    fn value_at(g: &RegionGame, vals: &[crate::plf2::Plf2], name: &str, v: &(crate::rational::Q, crate::rational::Q)) -> crate::rational::Ext {
        let i = g
            .locs
            .iter()
            .position(|l| l.name.starts_with(name) && l.reg.contains(&[v.0.clone(), v.1.clone()]) && !l.name.contains('^'))
            .unwrap();
        vals[i].eval(v).unwrap()
    }

    #[test]
    fn every_move_resets_afterwards() {
        let g = add_resets(&min_then_max()).unwrap();
        for t in &g.trans {
            assert!(g.locs[t.to].goal || !t.resets.is_empty(), "{:?}", t);
        }
        g.check_closure_coherent().unwrap();
    }

    #[test]
    fn values_preserved() {
        let g = min_then_max();
        let h = add_resets(&g).unwrap();
        let vg = bounded_vi(&g, 20).unwrap();
        let vh = bounded_vi(&h, 20).unwrap();
        let v = (qi(0), qi(0));
        assert_eq!(value_at(&g, &vg, "a@0,0", &v), value_at(&h, &vh, "a@0,0", &v));
        assert_eq!(value_at(&g, &vg, "a@0,0", &(qi(0), qi(0))), crate::rational::Ext::Fin(qi(3)));
    }

    #[test]
    fn max_cycle_rejected() {
        let locs = vec![Location::new("b", Owner::Max, false, 0), Location::new("c", Owner::Max, false, 0)];
        let ts = vec![
            Transition::new(0, 1, vec![le(0), le(1)], vec![0, 1], 0),
            Transition::new(1, 0, vec![le(0), le(1)], vec![0, 1], 0),
        ];
        assert!(matches!(add_resets(&region_game(locs, ts)), Err(Error::MaxControlledCycle(_))));
    }

    #[test]
    fn top_clock_of_regions() {
        let r = Region::new(2, vec![], vec![vec![1], vec![0]], vec![]);
        assert_eq!(upclock_or_zero(&r), vec![0]);
        assert_eq!(upclock_or_zero(&Region::origin(2)), vec![0, 1]);
    }
}
