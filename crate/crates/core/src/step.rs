// SPDX-License-Identifier: Apache-2.0

//! One backward step on two-clock region games with value functions on
//! region closures: `inf/sup` over delays and transitions of the delay
//! cost, the transition weight and the value after resets.

use crate::error::Result;
use crate::game::Owner;
use crate::geom::{Affine, AffineMap, Poly};
use crate::plf::Extremum;
use crate::plf2::{pointwise_extremum2, sweep_extremum, Plf2};
use crate::rational::{qi, Q};
use crate::region_game::{RLoc, RTrans, RegionGame};

pub fn ext_of(o: Owner) -> Extremum {
    match o {
        Owner::Min => Extremum::Min,
        Owner::Max => Extremum::Max,
    }
}

/// Map of the plane setting the reset clocks to 0.
pub fn reset_map(resets: &[usize]) -> AffineMap {
    let coord = |c: usize, id: Affine| if resets.contains(&c) { Affine::constant(qi(0)) } else { id };
    AffineMap {
        fx: coord(0, Affine::new(qi(1), qi(0), qi(0))),
        fy: coord(1, Affine::new(qi(0), qi(1), qi(0))),
    }
}

/// Value of taking `t` from `src`, as a function on the closure of the
/// source region, given the value function of the target.
pub fn transition_value(src: &RLoc, t: &RTrans, target: &Plf2) -> Result<Plf2> {
    let dom = src.reg.closure_poly();
    let mid = t.mid.closure_poly();
    if target.is_infinite() {
        return Ok(Plf2::infinite(dom));
    }
    let w = qi(src.weight as i64);
    let arrival = target
        .pullback(&reset_map(&t.resets), &mid)?
        .add_affine(&Affine::new(w.clone(), qi(0), qi(t.weight as i64)));
    let h = sweep_extremum(&dom, &arrival, &(qi(1), qi(1)), ext_of(src.owner))?;
    Ok(h.add_affine(&Affine::new(-w, qi(0), qi(0))))
}

/// Value of a location from the values of its possible moves.
pub fn combine(loc: &RLoc, moves: Vec<Plf2>) -> Result<Plf2> {
    let dom = loc.reg.closure_poly();
    if loc.goal {
        return Ok(goal_value(loc));
    }
    if moves.is_empty() {
        return Ok(match loc.owner {
            Owner::Min => Plf2::infinite(dom),
            Owner::Max => Plf2::constant(dom, Q::from_integer(0.into())),
        });
    }
    pointwise_extremum2(&moves, ext_of(loc.owner))
}

pub fn goal_value(loc: &RLoc) -> Plf2 {
    match &loc.output {
        Some(f) => f.clone(),
        None => Plf2::constant(loc.reg.closure_poly(), qi(0)),
    }
}

/// Exact `Val^{≤k}` on a relaxed two-clock region game, for every location.
pub fn bounded_vi(g: &RegionGame, k: usize) -> Result<Vec<Plf2>> {
    let mut vals: Vec<Plf2> = g
        .locs
        .iter()
        .map(|l| if l.goal { goal_value(l) } else { Plf2::infinite(l.reg.closure_poly()) })
        .collect();
    let out = g.out_index();
    for _ in 0..k {
        let mut next = Vec::with_capacity(vals.len());
        for (i, l) in g.locs.iter().enumerate() {
            let moves = out[i]
                .iter()
                .map(|&t| transition_value(l, &g.trans[t], &vals[g.trans[t].to]))
                .collect::<Result<Vec<_>>>()?;
            next.push(combine(l, moves)?);
        }
        vals = next;
    }
    Ok(vals)
}

/// The closure of a location's region, as used for value functions.
pub fn domain(l: &RLoc) -> Poly {
    l.reg.closure_poly()
}
