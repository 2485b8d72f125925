// SPDX-License-Identifier: Apache-2.0

//! Bottom-up evaluation of the semi-unfolding of a region game.
//!
//! Starting from the initial location, paths are followed and visits to
//! positive-weight locations and transitions are counted; a branch stops
//! (with value `+∞`) once some counter reaches `W/κ + 2`. Entering a kernel
//! component collapses into a single node solved by kernel value iteration.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::all_reset::add_resets;
use crate::cycle::Kernel;
use crate::error::{Error, Result};
use crate::game::Owner;
use crate::kernel_vi::iterate;
use crate::plf::Plf1;
use crate::plf2::Plf2;
use crate::rational::{qi, Q};
use crate::region_game::{RLoc, RTrans, RegionGame};
use crate::step::{combine, goal_value, transition_value};

/// Locations from which Min can force a visit to a target, with the number
/// of rounds needed; `None` outside the attractor.
pub fn attractor(g: &RegionGame, target: &[bool]) -> Vec<Option<usize>> {
    let n = g.locs.len();
    let out = g.out_index();
    let mut rank: Vec<Option<usize>> = (0..n).map(|i| target[i].then_some(0)).collect();
    let mut round = 0;
    loop {
        round += 1;
        let prev = rank.clone();
        for i in 0..n {
            if prev[i].is_some() || g.locs[i].goal {
                continue;
            }
            let mut succ = out[i].iter().map(|&t| prev[g.trans[t].to].is_some());
            let wins = match g.locs[i].owner {
                Owner::Min => succ.any(|b| b),
                // A Max location without moves is worth 0.
                Owner::Max => succ.all(|b| b),
            };
            if wins {
                rank[i] = Some(round);
            }
        }
        if rank == prev {
            return rank;
        }
    }
}

/// Goals with a finite output.
pub fn finite_goals(g: &RegionGame) -> Vec<bool> {
    g.locs.iter().map(|l| l.goal && !goal_value(l).is_infinite()).collect()
}

/// Whether Min can force reaching a goal from the initial location.
pub fn check_finite_value(g: &RegionGame) -> bool {
    attractor(g, &finite_goals(g))[g.initial].is_some()
}

fn max_output(l: &RLoc) -> Q {
    let f = goal_value(l);
    f.cells().iter().flat_map(|c| c.poly.verts.iter().map(move |v| c.f.eval(v))).max().unwrap_or_else(|| qi(0))
}

/// Upper bound on the value at every attractor location, from Min's
/// attractor strategy: each round costs at most `w(ℓ) + w(t)` since delays
/// never exceed 1.
pub fn attractor_bound(g: &RegionGame) -> Vec<Option<Q>> {
    let rank = attractor(g, &finite_goals(g));
    let out = g.out_index();
    let mut order: Vec<usize> = (0..g.locs.len()).filter(|&i| rank[i].is_some()).collect();
    order.sort_by_key(|&i| rank[i]);
    let mut b: Vec<Option<Q>> = vec![None; g.locs.len()];
    for i in order {
        let l = &g.locs[i];
        if l.goal {
            b[i] = Some(max_output(l));
            continue;
        }
        let costs = out[i].iter().filter_map(|&t| {
            let t = &g.trans[t];
            let below = rank[t.to].is_some_and(|r| Some(r) < rank[i]);
            below.then(|| b[t.to].clone().map(|v| v + qi((l.weight + t.weight) as i64))).flatten()
        });
        b[i] = Some(match l.owner {
            Owner::Min => costs.min().expect("attractor location has a move down"),
            Owner::Max => costs.max().unwrap_or_else(|| qi(0)),
        });
    }
    b
}

/// Element of the region game whose visits are counted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Elem {
    Loc(usize),
    Trans(usize),
}

type Counters = BTreeMap<Elem, u32>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TreeStats {
    pub nodes: usize,
    pub kernel_nodes: usize,
    pub stopped_leaves: usize,
    pub max_vi_steps: usize,
    pub kernel_runs: Vec<KernelRun>,
}

/// Fixed point of one kernel node: `Δ`-functions of its non-goal locations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelRun {
    pub entrance: String,
    pub steps: usize,
    pub values: Vec<(String, Plf1)>,
}

/// Evaluator of the semi-unfolding; subtrees are shared when they start at
/// the same location with the same counters.
pub struct Unfolder<'a> {
    g: &'a RegionGame,
    kernel: &'a Kernel,
    threshold: u32,
    k_cap: usize,
    memo: HashMap<(usize, Vec<(Elem, u32)>), Plf2>,
    active: HashSet<(usize, Vec<(Elem, u32)>)>,
    pub stats: TreeStats,
    /// When set, every kernel game is kept before and after adding resets.
    pub record_kernel_games: bool,
    pub kernel_games: Vec<(RegionGame, RegionGame)>,
}

impl<'a> Unfolder<'a> {
    pub fn new(g: &'a RegionGame, kernel: &'a Kernel, threshold: u32, k_cap: usize) -> Self {
        Unfolder {
            g,
            kernel,
            threshold,
            k_cap,
            memo: HashMap::new(),
            active: HashSet::new(),
            stats: TreeStats::default(),
            record_kernel_games: false,
            kernel_games: Vec::new(),
        }
    }

    /// Value function of the root, on the closure of the initial region.
    pub fn solve_root(&mut self) -> Result<Plf2> {
        let mut c = Counters::new();
        let i = self.g.initial;
        if self.g.locs[i].weight > 0 && !self.g.locs[i].goal {
            c.insert(Elem::Loc(i), 1);
        }
        self.visit(i, &c)
    }

    fn visit(&mut self, l: usize, counters: &Counters) -> Result<Plf2> {
        let key = (l, counters.iter().map(|(e, n)| (*e, *n)).collect::<Vec<_>>());
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        if !self.active.insert(key.clone()) {
            return Err(Error::Structural(format!("cycle without progress through {}", self.g.locs[l].name)));
        }
        let loc = &self.g.locs[l];
        let v = if loc.goal {
            goal_value(loc)
        } else if let Some(c) = self.kernel.comp_of[l] {
            self.stats.kernel_nodes += 1;
            self.kernel_node(l, c, counters)?
        } else {
            let outs: Vec<usize> = self.g.outgoing(l).map(|(i, _)| i).collect();
            let mut moves = Vec::with_capacity(outs.len());
            for t in outs {
                let child = self.child(t, counters)?;
                moves.push(transition_value(loc, &self.g.trans[t], &child)?);
            }
            combine(loc, moves)?
        };
        self.stats.nodes += 1;
        self.active.remove(&key);
        self.memo.insert(key, v.clone());
        Ok(v)
    }

    /// Value after taking transition `t`, or `+∞` when a counter hits the
    /// threshold.
    fn child(&mut self, t: usize, counters: &Counters) -> Result<Plf2> {
        let tr = &self.g.trans[t];
        let to = &self.g.locs[tr.to];
        let mut c = counters.clone();
        let mut bumped = Vec::new();
        if tr.weight > 0 {
            bumped.push(Elem::Trans(t));
        }
        if to.weight > 0 && !to.goal {
            bumped.push(Elem::Loc(tr.to));
        }
        for e in bumped {
            let n = c.entry(e).or_insert(0);
            *n += 1;
            if *n >= self.threshold {
                self.stats.stopped_leaves += 1;
                return Ok(Plf2::infinite(to.reg.closure_poly()));
            }
        }
        self.visit(tr.to, &c)
    }

    fn kernel_node(&mut self, entrance: usize, comp: usize, counters: &Counters) -> Result<Plf2> {
        let kc = &self.kernel.comps[comp];
        let mut map = BTreeMap::new();
        let mut locs = Vec::new();
        for &l in &kc.locs {
            map.insert(l, locs.len());
            locs.push(self.g.locs[l].clone());
        }
        let mut trans: Vec<RTrans> = kc
            .inner
            .iter()
            .map(|&t| {
                let t = &self.g.trans[t];
                RTrans { from: map[&t.from], to: map[&t.to], ..t.clone() }
            })
            .collect();
        for &t in &kc.outputs {
            let f = self.child(t, counters)?;
            let tr = &self.g.trans[t];
            let to = &self.g.locs[tr.to];
            let name = format!("{}>{}", self.g.locs[tr.from].name, to.name);
            let output = Some(f.add_affine(&crate::geom::Affine::constant(qi(tr.weight as i64))));
            let idx = locs.len();
            locs.push(RLoc { name, owner: Owner::Min, goal: true, weight: 0, reg: to.reg.clone(), base: to.base, output });
            trans.push(RTrans { from: map[&tr.from], to: idx, weight: 0, ..tr.clone() });
        }
        let kg = RegionGame { locs, trans, initial: map[&entrance], trimmed: true, relaxed: true, ..self.g.clone() };
        let rank = attractor(&kg, &finite_goals(&kg));
        if rank[kg.initial].is_none() {
            return Ok(Plf2::infinite(self.g.locs[entrance].reg.closure_poly()));
        }
        let keep: Vec<bool> = rank.iter().map(|r| r.is_some()).collect();
        let pruned = kg.restrict(&keep);
        let kg = add_resets(&pruned)?;
        if self.record_kernel_games {
            self.kernel_games.push((pruned, kg.clone()));
        }
        let r = iterate(&kg, kg.initial, self.k_cap)?;
        self.stats.max_vi_steps = self.stats.max_vi_steps.max(r.k);
        let values = kg.locs.iter().zip(&r.values).filter_map(|(l, v)| Some((l.name.clone(), v.clone()?))).collect();
        self.stats.kernel_runs.push(KernelRun { entrance: self.g.locs[entrance].name.clone(), steps: r.k, values });
        Ok(r.entrance)
    }
}

/// Number of visits at which a branch stops.
pub fn stop_threshold(w: &Q, kappa: &Q) -> u32 {
    let t = (w / kappa).ceil().to_integer() + 2;
    u32::try_from(t).unwrap_or(u32::MAX)
}
