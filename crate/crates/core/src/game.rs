// SPDX-License-Identifier: Apache-2.0

//! Turn-based weighted timed games: guards, valuations, delayed transitions
//! and runs.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::plf2::Plf2;
use crate::rational::{qi, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClockId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn holds(self, lhs: &Q, rhs: &Q) -> bool {
        match self {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Gt => lhs > rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "<" => CmpOp::Lt,
            "<=" | "≤" => CmpOp::Le,
            "=" | "==" => CmpOp::Eq,
            ">=" | "≥" => CmpOp::Ge,
            ">" => CmpOp::Gt,
            _ => return Err(Error::Parse(format!("unknown comparison `{s}`"))),
        })
    }

    pub fn is_upper_bound(self) -> bool {
        matches!(self, CmpOp::Lt | CmpOp::Le | CmpOp::Eq)
    }
}

/// A clock constraint `clock op bound`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Guard {
    pub clock: ClockId,
    pub op: CmpOp,
    pub bound: u32,
}

impl Guard {
    pub fn new(clock: usize, op: CmpOp, bound: u32) -> Self {
        Guard { clock: ClockId(clock), op, bound }
    }

    pub fn holds(&self, v: &Valuation) -> Result<bool> {
        let val = v.get(self.clock)?;
        Ok(self.op.holds(val, &qi(self.bound as i64)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Owner {
    Min,
    Max,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Location {
    pub name: String,
    pub owner: Owner,
    pub goal: bool,
    /// Rate weight; always 0 on goal locations.
    pub weight: u64,
    /// Added by [`ensure_deadlock_free`].
    pub synthetic: bool,
}

impl Location {
    pub fn new(name: impl Into<String>, owner: Owner, goal: bool, weight: u64) -> Self {
        Location { name: name.into(), owner, goal, weight, synthetic: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub guards: Vec<Guard>,
    /// Sorted, deduplicated.
    pub resets: Vec<ClockId>,
    pub weight: u64,
}

impl Transition {
    pub fn new(from: usize, to: usize, guards: Vec<Guard>, resets: Vec<usize>, weight: u64) -> Self {
        let mut resets: Vec<ClockId> = resets.into_iter().map(ClockId).collect();
        resets.sort();
        resets.dedup();
        let mut guards = guards;
        guards.sort();
        guards.dedup();
        Transition { from, to, guards, resets, weight }
    }

    pub fn resets_clock(&self, c: usize) -> bool {
        self.resets.contains(&ClockId(c))
    }

    pub fn has_guard(&self, c: usize, op: CmpOp, bound: u32) -> bool {
        self.guards.contains(&Guard::new(c, op, bound))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Valuation(pub Vec<Q>);

impl Valuation {
    pub fn zero(dim: usize) -> Self {
        Valuation(vec![Q::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, c: ClockId) -> Result<&Q> {
        self.0
            .get(c.0)
            .ok_or_else(|| Error::Structural(format!("unknown clock index {}", c.0)))
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(crate::rational::fmt_q).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub location: usize,
    pub valuation: Valuation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunStep {
    pub delay: Q,
    pub transition: usize,
    pub target: Configuration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Run {
    pub start: Configuration,
    pub steps: Vec<RunStep>,
}

impl Run {
    pub fn new(start: Configuration) -> Self {
        Run { start, steps: Vec::new() }
    }

    pub fn last(&self) -> &Configuration {
        self.steps.last().map(|s| &s.target).unwrap_or(&self.start)
    }
}

/// Weight of a finite run, and whether it ends in a goal.
#[derive(Clone, Debug, PartialEq)]
pub struct RunWeight {
    pub weight: Q,
    pub reaches_goal: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Game {
    pub clocks: Vec<String>,
    pub locations: Vec<Location>,
    pub transitions: Vec<Transition>,
    pub initial: Configuration,
    /// Output weight functions on goal locations (kernel games). Goals
    /// without an entry pay 0.
    pub outputs: BTreeMap<usize, Plf2>,
}

pub fn satisfies(v: &Valuation, guards: &[Guard]) -> Result<bool> {
    for g in guards {
        if !g.holds(v)? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn elapse(v: &Valuation, d: &Q) -> Result<Valuation> {
    if d.is_negative() {
        return Err(Error::Domain(format!("negative delay {}", crate::rational::fmt_q(d))));
    }
    Ok(Valuation(v.0.iter().map(|c| c + d).collect()))
}

pub fn reset(v: &Valuation, clocks: &[ClockId]) -> Valuation {
    let mut out = v.clone();
    for c in clocks {
        if let Some(slot) = out.0.get_mut(c.0) {
            *slot = Q::zero();
        }
    }
    out
}

impl Game {
    pub fn new(clocks: Vec<String>, locations: Vec<Location>, transitions: Vec<Transition>, initial: Configuration) -> Self {
        Game { clocks, locations, transitions, initial, outputs: BTreeMap::new() }
    }

    pub fn num_clocks(&self) -> usize {
        self.clocks.len()
    }

    pub fn location_index(&self, name: &str) -> Option<usize> {
        self.locations.iter().position(|l| l.name == name)
    }

    pub fn outgoing(&self, loc: usize) -> impl Iterator<Item = (usize, &Transition)> {
        self.transitions.iter().enumerate().filter(move |(_, t)| t.from == loc)
    }

    pub fn max_constant(&self) -> u32 {
        self.transitions
            .iter()
            .flat_map(|t| t.guards.iter().map(|g| g.bound))
            .max()
            .unwrap_or(0)
    }

    pub fn max_location_weight(&self) -> u64 {
        self.locations.iter().map(|l| l.weight).max().unwrap_or(0)
    }

    pub fn max_transition_weight(&self) -> u64 {
        self.transitions.iter().map(|t| t.weight).max().unwrap_or(0)
    }

    /// Checks indices, goal ownership and clock references.
    pub fn validate(&self) -> Result<()> {
        let n = self.locations.len();
        let k = self.clocks.len();
        for l in &self.locations {
            if l.goal && l.owner != Owner::Min {
                return Err(Error::Structural(format!("goal location `{}` must belong to Min", l.name)));
            }
            if l.goal && l.weight != 0 {
                return Err(Error::Structural(format!("goal location `{}` carries a weight", l.name)));
            }
        }
        for (i, t) in self.transitions.iter().enumerate() {
            if t.from >= n || t.to >= n {
                return Err(Error::Structural(format!("transition {i} references an unknown location")));
            }
            if self.locations[t.from].goal {
                return Err(Error::Structural(format!("transition {i} leaves a goal location")));
            }
            if t.guards.iter().any(|g| g.clock.0 >= k) || t.resets.iter().any(|c| c.0 >= k) {
                return Err(Error::Structural(format!("transition {i} references an unknown clock")));
            }
        }
        if self.initial.location >= n || self.initial.valuation.dim() != k {
            return Err(Error::Structural("initial configuration does not match the game".into()));
        }
        if self.initial.valuation.0.iter().any(|v| v.is_negative()) {
            return Err(Error::Domain("negative initial clock value".into()));
        }
        for l in self.outputs.keys() {
            if *l >= n || !self.locations[*l].goal {
                return Err(Error::Structural(format!("output function attached to non-goal location {l}")));
            }
        }
        Ok(())
    }

    /// Value collected on arriving in goal `loc` with valuation `v`.
    pub fn goal_payoff(&self, loc: usize, v: &Valuation) -> Result<Q> {
        match self.outputs.get(&loc) {
            Some(f) => f.eval_valuation(v),
            None => Ok(Q::zero()),
        }
    }

    /// Delayed transition `(ℓ,ν) --d,t--> (ℓ',ν')` with its weight.
    pub fn step(&self, c: &Configuration, d: &Q, t: usize) -> Result<(Configuration, Q)> {
        let tr = self
            .transitions
            .get(t)
            .ok_or_else(|| Error::Structural(format!("unknown transition {t}")))?;
        if tr.from != c.location {
            return Err(Error::Structural(format!(
                "transition {t} leaves location {} but the configuration is in {}",
                tr.from, c.location
            )));
        }
        let moved = elapse(&c.valuation, d)?;
        if !satisfies(&moved, &tr.guards)? {
            return Err(Error::InvalidStep(format!("guard of transition {t} fails at {moved}")));
        }
        let weight = d * qi(self.locations[c.location].weight as i64) + qi(tr.weight as i64);
        Ok((Configuration { location: tr.to, valuation: reset(&moved, &tr.resets) }, weight))
    }

    /// Appends a checked step to `run`, returning its weight.
    pub fn extend_run(&self, run: &mut Run, d: Q, t: usize) -> Result<Q> {
        let (target, w) = self.step(run.last(), &d, t)?;
        run.steps.push(RunStep { delay: d, transition: t, target });
        Ok(w)
    }

    pub fn run_weight(&self, r: &Run) -> Result<RunWeight> {
        let mut cur = r.start.clone();
        let mut total = Q::zero();
        for (i, s) in r.steps.iter().enumerate() {
            let (next, w) = self.step(&cur, &s.delay, s.transition)?;
            if next != s.target {
                return Err(Error::Structural(format!("run step {i} does not chain")));
            }
            total += w;
            cur = next;
        }
        let reaches_goal = self.locations[cur.location].goal;
        if reaches_goal {
            total += self.goal_payoff(cur.location, &cur.valuation)?;
        }
        Ok(RunWeight { weight: total, reaches_goal })
    }
}

/// Adds an unguarded zero-weight escape from every non-goal location: Min
/// locations to a synthetic non-goal sink, Max locations to a synthetic goal.
pub fn ensure_deadlock_free(g: &Game) -> Game {
    let mut out = g.clone();
    let find = |out: &Game, goal: bool| {
        out.locations.iter().position(|l| l.synthetic && l.goal == goal)
    };
    let sink = match find(&out, false) {
        Some(i) => i,
        None => {
            out.locations.push(Location { synthetic: true, ..Location::new("__sink", Owner::Min, false, 0) });
            let i = out.locations.len() - 1;
            out.transitions.push(Transition::new(i, i, vec![], vec![], 0));
            i
        }
    };
    let goal = match find(&out, true) {
        Some(i) => i,
        None => {
            out.locations.push(Location { synthetic: true, ..Location::new("__goal", Owner::Min, true, 0) });
            out.locations.len() - 1
        }
    };
    for l in 0..out.locations.len() {
        let loc = &out.locations[l];
        if loc.goal || l == sink {
            continue;
        }
        let target = match loc.owner {
            Owner::Min => sink,
            Owner::Max => goal,
        };
        let exists = out
            .transitions
            .iter()
            .any(|t| t.from == l && t.to == target && t.guards.is_empty() && t.resets.is_empty() && t.weight == 0);
        if !exists {
            out.transitions.push(Transition::new(l, target, vec![], vec![], 0));
        }
    }
    out
}
