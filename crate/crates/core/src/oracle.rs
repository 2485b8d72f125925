// SPDX-License-Identifier: Apache-2.0

//! Bounded-horizon values of the grid game: delays and valuations are
//! multiples of `1/N`, Min must reach a goal within `k` moves.
//!
//! Values are exact. They are kept as integers over a common denominator
//! `D = N·lcm(denominators of the output coefficients)`, which every grid
//! value shares.

use std::collections::{HashMap, VecDeque};
use std::io::Write;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::game::{CmpOp, Configuration, Game, Owner, Run, RunWeight, Valuation};
use crate::rational::{fmt_q, Ext, Q};

/// A grid configuration: location and clock values in units of `1/N`.
pub type GridState = (usize, Vec<i64>);

const INF: i64 = i64::MAX;

#[derive(Clone, Debug)]
struct Move {
    delay: i64,
    trans: usize,
    target: usize,
    cost: i64,
}

/// Reachable part of the grid game and its value layers.
#[derive(Clone, Debug)]
pub struct BoundedValueTable {
    pub n: i64,
    pub denom: i64,
    pub states: Vec<GridState>,
    index: HashMap<GridState, usize>,
    moves: Vec<Vec<Move>>,
    /// `layers[k][s]` is `Val^{≤k}` times `denom`, or `i64::MAX`.
    layers: Vec<Vec<i64>>,
}

fn lcm_all<'a>(qs: impl Iterator<Item = &'a Q>) -> BigInt {
    qs.fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

fn holds(op: CmpOp, lhs: i64, rhs: i64) -> bool {
    match op {
        CmpOp::Lt => lhs < rhs,
        CmpOp::Le => lhs <= rhs,
        CmpOp::Eq => lhs == rhs,
        CmpOp::Ge => lhs >= rhs,
        CmpOp::Gt => lhs > rhs,
    }
}

/// Grid units of a valuation, or `None` when it is off the grid.
pub fn to_grid(v: &Valuation, n: i64) -> Option<Vec<i64>> {
    v.0.iter()
        .map(|x| {
            let s = x * Q::from_integer(n.into());
            s.is_integer().then(|| s.to_integer().to_i64()).flatten()
        })
        .collect()
}

pub fn from_grid(v: &[i64], n: i64) -> Valuation {
    Valuation(v.iter().map(|&x| Q::new(x.into(), n.into())).collect())
}

impl BoundedValueTable {
    /// Explores the grid configurations reachable from `starts`, then runs
    /// `k` rounds of backward induction.
    pub fn build(g: &Game, n: i64, k: usize, starts: &[Configuration]) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain("grid resolution must be at least 2".into()));
        }
        let coeffs: Vec<&Q> =
            g.outputs.values().flat_map(|f| f.cells().iter().flat_map(|c| [&c.f.a, &c.f.b, &c.f.c])).collect();
        let l = lcm_all(coeffs.into_iter());
        let denom = (l * BigInt::from(n)).to_i64().ok_or_else(|| Error::Domain("grid denominator overflows".into()))?;
        let cap = n * g.max_constant() as i64 + 1;
        let mut t = BoundedValueTable {
            n,
            denom,
            states: Vec::new(),
            index: HashMap::new(),
            moves: Vec::new(),
            layers: Vec::new(),
        };
        let mut queue = VecDeque::new();
        for c in starts {
            let v = to_grid(&c.valuation, n)
                .ok_or_else(|| Error::Domain(format!("start valuation {} is off the 1/{} grid", c.valuation, n)))?;
            let v = v.into_iter().map(|x| x.min(cap)).collect();
            t.intern((c.location, v), &mut queue);
        }
        while let Some(s) = queue.pop_front() {
            let (loc, v) = t.states[s].clone();
            let mut ms = Vec::new();
            if !g.locations[loc].goal {
                let lo = v.iter().copied().min().unwrap_or(0);
                let wl = g.locations[loc].weight as i64;
                for d in 0..=(cap - lo).max(0) {
                    let moved: Vec<i64> = v.iter().map(|x| (x + d).min(cap)).collect();
                    for (ti, tr) in g.outgoing(loc) {
                        if !tr.guards.iter().all(|gd| holds(gd.op, moved[gd.clock.0], gd.bound as i64 * n)) {
                            continue;
                        }
                        let mut next = moved.clone();
                        for r in &tr.resets {
                            next[r.0] = 0;
                        }
                        let target = t.intern((tr.to, next), &mut queue);
                        let cost = wl * d * (denom / n) + tr.weight as i64 * denom;
                        ms.push(Move { delay: d, trans: ti, target, cost });
                    }
                }
            }
            t.moves[s] = ms;
        }
        let mut layer0 = Vec::with_capacity(t.states.len());
        for (loc, v) in &t.states {
            layer0.push(if g.locations[*loc].goal {
                let p = g.goal_payoff(*loc, &from_grid(v, n))? * Q::from_integer(denom.into());
                if !p.is_integer() {
                    return Err(Error::Structural("goal payoff off the common denominator".into()));
                }
                p.to_integer().to_i64().ok_or_else(|| Error::Domain("payoff overflows".into()))?
            } else {
                INF
            });
        }
        t.layers.push(layer0);
        for _ in 0..k {
            let next = t.step(g);
            t.layers.push(next);
        }
        Ok(t)
    }

    fn intern(&mut self, s: GridState, queue: &mut VecDeque<usize>) -> usize {
        if let Some(&i) = self.index.get(&s) {
            return i;
        }
        let i = self.states.len();
        self.index.insert(s.clone(), i);
        self.states.push(s);
        self.moves.push(Vec::new());
        queue.push_back(i);
        i
    }

    fn step(&self, g: &Game) -> Vec<i64> {
        let prev = self.layers.last().expect("layer 0");
        (0..self.states.len())
            .map(|s| {
                let loc = &g.locations[self.states[s].0];
                if loc.goal {
                    return prev[s];
                }
                let vals = self.moves[s].iter().map(|m| add(prev[m.target], m.cost));
                match loc.owner {
                    Owner::Min => vals.min().unwrap_or(INF),
                    Owner::Max => vals.max().unwrap_or(0),
                }
            })
            .collect()
    }

    pub fn horizon(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn lookup(&self, c: &Configuration) -> Option<usize> {
        let v = to_grid(&c.valuation, self.n)?;
        self.index.get(&(c.location, v)).copied()
    }

    fn ext(&self, raw: i64) -> Ext {
        if raw == INF {
            Ext::Inf
        } else {
            Ext::Fin(Q::new(raw.into(), self.denom.into()))
        }
    }

    /// `Val^{≤k}` at a configuration reached from the starts.
    pub fn value(&self, c: &Configuration, k: usize) -> Result<Ext> {
        let s = self
            .lookup(c)
            .ok_or_else(|| Error::Domain(format!("configuration {} was not explored", c.valuation)))?;
        let layer = self.layers.get(k).ok_or_else(|| Error::Domain(format!("horizon {} not computed", k)))?;
        Ok(self.ext(layer[s]))
    }

    /// The move achieving the value of state `s` with `k` moves left.
    pub fn greedy(&self, g: &Game, s: usize, k: usize) -> Option<(i64, usize)> {
        if k == 0 {
            return None;
        }
        let prev = &self.layers[k - 1];
        let owner = g.locations[self.states[s].0].owner;
        let best = self.moves[s].iter().map(|m| add(prev[m.target], m.cost));
        let best = match owner {
            Owner::Min => best.min()?,
            Owner::Max => best.max()?,
        };
        self.moves[s].iter().find(|m| add(prev[m.target], m.cost) == best).map(|m| (m.delay, m.trans))
    }

    /// Moves available at a state, as `(delay in grid units, transition)`.
    pub fn moves_at(&self, s: usize) -> Vec<(i64, usize)> {
        self.moves[s].iter().map(|m| (m.delay, m.trans)).collect()
    }

    /// CSV rows `location,clock values...,value` of layer `k`.
    pub fn dump_csv(&self, g: &Game, k: usize, mut w: impl Write) -> Result<()> {
        let layer = self.layers.get(k).ok_or_else(|| Error::Domain(format!("horizon {} not computed", k)))?;
        writeln!(w, "location,{},value", g.clocks.join(","))?;
        for (s, (loc, v)) in self.states.iter().enumerate() {
            let vals: Vec<String> = v.iter().map(|&x| fmt_q(&Q::new(x.into(), self.n.into()))).collect();
            let val = match self.ext(layer[s]) {
                Ext::Inf => "+inf".to_string(),
                Ext::Fin(q) => fmt_q(&q),
            };
            writeln!(w, "{},{},{}", g.locations[*loc].name, vals.join(","), val)?;
        }
        Ok(())
    }
}

fn add(v: i64, c: i64) -> i64 {
    if v == INF {
        INF
    } else {
        v + c
    }
}

/// `Val^{≤K}` of the grid game at its initial configuration.
pub fn bounded_values(g: &Game, n: i64, k: usize) -> Result<BoundedValueTable> {
    BoundedValueTable::build(g, n, k, std::slice::from_ref(&g.initial))
}

/// A positional grid strategy: given location, grid valuation and the
/// number of moves left, a delay in grid units and a transition.
pub type GridStrategy<'a> = dyn Fn(usize, &[i64], usize) -> Option<(i64, usize)> + 'a;

/// Plays the two strategies from `start` for at most `k` moves.
pub fn play(
    g: &Game,
    n: i64,
    sigma_min: &GridStrategy,
    sigma_max: &GridStrategy,
    start: &Configuration,
    k: usize,
) -> Result<(Run, RunWeight)> {
    let mut run = Run::new(start.clone());
    for left in (1..=k).rev() {
        let cur = run.last().clone();
        if g.locations[cur.location].goal {
            break;
        }
        let v = to_grid(&cur.valuation, n).ok_or_else(|| Error::Domain("play left the grid".into()))?;
        let sigma = match g.locations[cur.location].owner {
            Owner::Min => sigma_min,
            Owner::Max => sigma_max,
        };
        let Some((d, t)) = sigma(cur.location, &v, left) else {
            break;
        };
        let d = Q::new(d.into(), n.into());
        g.extend_run(&mut run, d, t).map_err(|e| {
            Error::InvalidStep(format!("strategy move at {}{}: {}", g.locations[cur.location].name, cur.valuation, e))
        })?;
    }
    let w = g.run_weight(&run)?;
    Ok((run, w))
}
