// SPDX-License-Identifier: Apache-2.0

//! Region games built on top of `[0,1)`-games, trimming and relaxation.
//!
//! A transition of a region game carries the time-successor region `mid`
//! its source valuation is in when it fires. In a relaxed game the allowed
//! delays from `ν` in the closure of the source region are exactly those
//! with `ν + δ` in the closure of `mid`.

use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};
use crate::game::{CmpOp, Configuration, Game, Guard, Location, Owner, Transition, Valuation};
use crate::plf2::Plf2;
use crate::rational::Q;
use crate::region::Region;

#[derive(Clone, Debug, PartialEq)]
pub struct RLoc {
    pub name: String,
    pub owner: Owner,
    pub goal: bool,
    pub weight: u64,
    pub reg: Region,
    /// Location of the underlying `[0,1)`-game.
    pub base: usize,
    /// Output weight on the closure of `reg`; goals only.
    pub output: Option<Plf2>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RTrans {
    pub from: usize,
    pub to: usize,
    pub mid: Region,
    pub guards: Vec<Guard>,
    pub resets: Vec<usize>,
    pub weight: u64,
}

impl RTrans {
    pub fn resets_clock(&self, c: usize) -> bool {
        self.resets.contains(&c)
    }

    pub fn has_guard(&self, c: usize, op: CmpOp, bound: u32) -> bool {
        self.guards.contains(&Guard::new(c, op, bound))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegionGame {
    pub clocks: Vec<String>,
    pub locs: Vec<RLoc>,
    pub trans: Vec<RTrans>,
    pub initial: usize,
    /// Initial fractional valuation, inside the initial region.
    pub init_val: Vec<Q>,
    pub trimmed: bool,
    pub relaxed: bool,
}

impl RegionGame {
    pub fn n(&self) -> usize {
        self.clocks.len()
    }

    pub fn outgoing(&self, l: usize) -> impl Iterator<Item = (usize, &RTrans)> {
        self.trans.iter().enumerate().filter(move |(_, t)| t.from == l)
    }

    pub fn out_index(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.locs.len()];
        for (i, t) in self.trans.iter().enumerate() {
            out[t.from].push(i);
        }
        out
    }

    /// Keeps only what is reachable from the initial location.
    pub fn prune_unreachable(&self) -> RegionGame {
        let out = self.out_index();
        let mut seen = vec![false; self.locs.len()];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        while let Some(l) = queue.pop_front() {
            for &t in &out[l] {
                let to = self.trans[t].to;
                if !seen[to] {
                    seen[to] = true;
                    queue.push_back(to);
                }
            }
        }
        self.restrict(&seen)
    }

    /// Sub-game on the locations flagged in `keep`.
    pub fn restrict(&self, keep: &[bool]) -> RegionGame {
        let mut map = vec![usize::MAX; self.locs.len()];
        let mut locs = Vec::new();
        for (i, l) in self.locs.iter().enumerate() {
            if keep[i] {
                map[i] = locs.len();
                locs.push(l.clone());
            }
        }
        let trans = self
            .trans
            .iter()
            .filter(|t| keep[t.from] && keep[t.to])
            .map(|t| RTrans { from: map[t.from], to: map[t.to], ..t.clone() })
            .collect();
        RegionGame { locs, trans, initial: map[self.initial], ..self.clone() }
    }

    /// The region game as an ordinary timed game over fractional clocks,
    /// with the full clause set of each `mid` region as guard (relaxed to
    /// non-strict comparisons when the game is relaxed).
    pub fn to_game(&self) -> Game {
        let locations = self
            .locs
            .iter()
            .map(|l| Location::new(l.name.clone(), l.owner, l.goal, l.weight))
            .collect();
        let transitions = self
            .trans
            .iter()
            .map(|t| {
                let mut guards = t.mid.constraints();
                if self.relaxed {
                    guards = guards.into_iter().map(relax_clause).collect();
                }
                Transition::new(t.from, t.to, guards, t.resets.clone(), t.weight)
            })
            .collect();
        let initial = Configuration { location: self.initial, valuation: Valuation(self.init_val.clone()) };
        let mut g = Game::new(self.clocks.clone(), locations, transitions, initial);
        for (i, l) in self.locs.iter().enumerate() {
            if let Some(f) = &l.output {
                g.outputs.insert(i, f.clone());
            }
        }
        g
    }

    /// Checks that every transition's target region is its `mid` region
    /// after resets, and `mid` a time-successor of the source region.
    pub fn check_coherent(&self) -> Result<()> {
        for t in &self.trans {
            let src = &self.locs[t.from].reg;
            let succ = src.time_successors()?;
            if !succ.contains(&t.mid) {
                return Err(Error::Structural(format!("transition from {} fires outside its time-successors", self.locs[t.from].name)));
            }
            if t.mid.reset(&t.resets) != self.locs[t.to].reg {
                return Err(Error::Structural(format!("transition {} -> {} lands outside the target region", self.locs[t.from].name, self.locs[t.to].name)));
            }
        }
        Ok(())
    }

    /// Weaker coherence for relaxed games: landings lie in the closure of
    /// the target region.
    pub fn check_closure_coherent(&self) -> Result<()> {
        for t in &self.trans {
            let src = &self.locs[t.from];
            if !src.reg.time_successors()?.contains(&t.mid) {
                return Err(Error::Structural(format!("transition from {} fires outside its time-successors", src.name)));
            }
            let target = &self.locs[t.to].reg;
            for mut v in t.mid.closure_vertices() {
                for &c in &t.resets {
                    v[c] = Q::from_integer(0.into());
                }
                if !target.closure_contains(&v) {
                    return Err(Error::Structural(format!(
                        "transition {} -> {} lands outside the target closure",
                        src.name, self.locs[t.to].name
                    )));
                }
            }
        }
        Ok(())
    }
}

fn relax_clause(g: Guard) -> Guard {
    match (g.op, g.bound) {
        (CmpOp::Gt, 0) => Guard { op: CmpOp::Ge, ..g },
        (CmpOp::Lt, 1) => Guard { op: CmpOp::Le, ..g },
        _ => g,
    }
}

/// The region game of a `[0,1)`-game: one location per location and
/// `[0,1)`-region, one transition per enabled time-successor. Guards are
/// the original clauses together with `C(mid)`.
pub fn build_region_wtg(g: &Game) -> Result<RegionGame> {
    let n = g.num_clocks();
    let regions = Region::all(n, false);
    let per = regions.len();
    let index: BTreeMap<Region, usize> = regions.iter().cloned().enumerate().map(|(i, r)| (r, i)).collect();
    let mut locs = Vec::with_capacity(g.locations.len() * per);
    for (l, loc) in g.locations.iter().enumerate() {
        for r in &regions {
            // A goal region outside the output's domain has no payoff; it
            // becomes a stuck location.
            let mut goal = loc.goal;
            let output = match g.outputs.get(&l) {
                Some(f) if loc.goal => {
                    let cl = r.closure_poly();
                    if cl.verts.iter().all(|v| f.domain.contains(v)) {
                        Some(f.restrict_to(&cl)?)
                    } else {
                        goal = false;
                        None
                    }
                }
                _ => None,
            };
            locs.push(RLoc {
                name: format!("{}|{}", loc.name, region_tag(r, &g.clocks)),
                owner: loc.owner,
                goal,
                weight: loc.weight,
                reg: r.clone(),
                base: l,
                output,
            });
        }
    }
    let mut trans = Vec::new();
    for (ri, r) in regions.iter().enumerate() {
        let succ = r.time_successors()?;
        for t in &g.transitions {
            let resets: Vec<usize> = t.resets.iter().map(|c| c.0).collect();
            for s in &succ {
                if !s.one.iter().all(|c| resets.contains(c)) || !s.satisfies_all(&t.guards) {
                    continue;
                }
                let target = s.reset(&resets);
                let mut guards = t.guards.clone();
                guards.extend(s.constraints());
                guards.sort();
                guards.dedup();
                trans.push(RTrans {
                    from: t.from * per + ri,
                    to: t.to * per + index[&target],
                    mid: s.clone(),
                    guards,
                    resets: resets.clone(),
                    weight: t.weight,
                });
            }
        }
    }
    let v0 = &g.initial.valuation.0;
    let r0 = Region::of(v0)?;
    let initial = g.initial.location * per + index[&r0];
    Ok(RegionGame {
        clocks: g.clocks.clone(),
        locs,
        trans,
        initial,
        init_val: v0.clone(),
        trimmed: false,
        relaxed: false,
    })
}

pub fn region_tag(r: &Region, clocks: &[String]) -> String {
    r.to_names(clocks).iter().map(|b| b.join("")).collect::<Vec<_>>().join("<")
}

/// Smallest set of clauses (greedy, in clause order) from the region
/// description of `mid` that singles out `mid` among the time-successors.
pub fn minimal_guard(succ: &[Region], mid: &Region) -> Vec<Guard> {
    let selects = |gs: &[Guard]| succ.iter().filter(|s| s.satisfies_all(gs)).count() == 1;
    let mut gs = mid.constraints();
    gs.sort_by_key(|g| (g.op == CmpOp::Eq, *g));
    let mut i = 0;
    while i < gs.len() {
        let mut without = gs.clone();
        without.remove(i);
        if selects(&without) {
            gs = without;
        } else {
            i += 1;
        }
    }
    gs.sort();
    gs
}

/// Drops transitions disabled from their source region and every clause
/// implied by the source region.
pub fn trim(g: &RegionGame) -> Result<RegionGame> {
    let mut out = g.clone();
    out.trans.clear();
    for t in &g.trans {
        let src = &g.locs[t.from].reg;
        let succ = src.time_successors()?;
        if !succ.contains(&t.mid) || !t.mid.satisfies_all(&t.guards) {
            continue;
        }
        out.trans.push(RTrans { guards: minimal_guard(&succ, &t.mid), ..t.clone() });
    }
    out.trimmed = true;
    Ok(out)
}

/// Whether a trimmed guard obeys the syntactic shape of trimmed games.
pub fn trimmed_shape_ok(src: &Region, guards: &[Guard]) -> bool {
    let top = if src.blocks.is_empty() { src.zero.clone() } else { src.upclock() };
    let mut has_zero = false;
    let mut has_one = false;
    for g in guards {
        let c = g.clock.0;
        match (g.op, g.bound) {
            (CmpOp::Eq, 0) | (CmpOp::Gt, 0) => {
                if !src.zero.contains(&c) {
                    return false;
                }
                has_zero |= g.op == CmpOp::Eq;
            }
            (CmpOp::Eq, 1) => {
                if !top.contains(&c) {
                    return false;
                }
                has_one = true;
            }
            _ => {}
        }
    }
    !(has_zero && has_one)
}

/// Relaxation: strict clauses become non-strict, and clauses then always
/// true on `[0,1]` are dropped, leaving only `x=0` and `x=1` clauses.
pub fn relax(g: &RegionGame) -> RegionGame {
    let mut out = g.clone();
    for t in &mut out.trans {
        t.guards.retain(|gd| gd.op == CmpOp::Eq);
    }
    out.relaxed = true;
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_loc_game() -> Game {
        let locs = vec![Location::new("a", Owner::Min, false, 0)];
        let ts = vec![Transition::new(0, 0, vec![], vec![0, 1], 0)];
        Game::new(vec!["x".into(), "y".into()], locs, ts, Configuration { location: 0, valuation: Valuation::zero(2) })
    }

    #[test]
    fn product_has_six_locations() {
        let rg = build_region_wtg(&one_loc_game()).unwrap();
        assert_eq!(rg.locs.len(), 6);
        let origin = rg.initial;
        assert_eq!(rg.locs[origin].reg, Region::origin(2));
        assert!(rg.trans.iter().any(|t| t.from == origin && t.to == origin && t.mid == Region::origin(2)));
        rg.check_coherent().unwrap();
    }

    #[test]
    fn trim_shapes_and_idempotence() {
        let rg = build_region_wtg(&one_loc_game()).unwrap();
        let t1 = trim(&rg).unwrap();
        for t in &t1.trans {
            assert!(trimmed_shape_ok(&t1.locs[t.from].reg, &t.guards), "{:?}", t);
        }
        assert_eq!(trim(&t1).unwrap(), t1);
    }

    #[test]
    fn unsatisfiable_transition_removed() {
        let mut g = one_loc_game();
        g.transitions[0].guards = vec![Guard::new(1, CmpOp::Eq, 0)];
        let rg = build_region_wtg(&g).unwrap();
        let b = Region::new(2, vec![0], vec![vec![1]], vec![]);
        assert!(!rg.trans.iter().any(|t| rg.locs[t.from].reg == b));
    }

    #[test]
    fn implied_clause_removed() {
        let g = one_loc_game();
        let t = trim(&build_region_wtg(&g).unwrap()).unwrap();
        let src = Region::new(2, vec![0], vec![vec![1]], vec![]);
        let mid = Region::new(2, vec![], vec![vec![0], vec![1]], vec![]);
        let tr = t.trans.iter().find(|tr| t.locs[tr.from].reg == src && tr.mid == mid).unwrap();
        assert_eq!(tr.guards, vec![Guard::new(0, CmpOp::Gt, 0), Guard::new(1, CmpOp::Lt, 1)]);
        let relaxed = relax(&t);
        let tr = relaxed.trans.iter().find(|tr| relaxed.locs[tr.from].reg == src && tr.mid == mid).unwrap();
        assert!(tr.guards.is_empty());
    }
}
