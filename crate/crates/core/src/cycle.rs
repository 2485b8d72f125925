// SPDX-License-Identifier: Apache-2.0

//! Corner-point abstraction, the almost-non-Zeno check, green marking of
//! zero-weight cycles, kernels and the value bound `W`.

use std::collections::BTreeSet;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::game::CmpOp;
use crate::rational::{qi, Q};
use crate::region_game::{RLoc, RTrans, RegionGame};

/// One corner of a region closure: coordinates in `{0,1}`.
pub type Corner = Vec<u8>;

fn corners_of(l: &RLoc) -> Vec<Corner> {
    l.reg.closure_vertices().iter().map(|v| v.iter().map(|x| u8::from(!x.is_zero())).collect()).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CornerEdge {
    pub from: usize,
    pub to: usize,
    pub trans: usize,
    pub weight: u64,
}

/// Nodes are `(region-location, corner)` pairs; each edge realizes one
/// region transition with a delay of 0 or 1.
#[derive(Clone, Debug)]
pub struct CornerGraph {
    pub nodes: Vec<(usize, Corner)>,
    pub edges: Vec<CornerEdge>,
}

impl CornerGraph {
    pub fn node(&self, loc: usize, c: &Corner) -> Option<usize> {
        self.nodes.iter().position(|(l, k)| *l == loc && k == c)
    }

    /// Corner edges realizing region transition `t`.
    pub fn edges_of(&self, t: usize) -> impl Iterator<Item = &CornerEdge> {
        self.edges.iter().filter(move |e| e.trans == t)
    }
}

pub fn build_corner_point(g: &RegionGame) -> CornerGraph {
    let mut nodes = Vec::new();
    let mut first = Vec::with_capacity(g.locs.len());
    for (i, l) in g.locs.iter().enumerate() {
        first.push(nodes.len());
        for c in corners_of(l) {
            nodes.push((i, c));
        }
    }
    let find = |loc: usize, c: &Corner, nodes: &[(usize, Corner)]| -> Option<usize> {
        nodes[first[loc]..].iter().take_while(|(l, _)| *l == loc).position(|(_, k)| k == c).map(|p| first[loc] + p)
    };
    let mut edges = Vec::new();
    for (ti, t) in g.trans.iter().enumerate() {
        let src = &g.locs[t.from];
        let mid_corners: Vec<Corner> =
            t.mid.closure_vertices().iter().map(|v| v.iter().map(|x| u8::from(!x.is_zero())).collect()).collect();
        for c in corners_of(src) {
            for k in 0..=1u8 {
                let moved: Option<Corner> = if k == 0 {
                    Some(c.clone())
                } else if c.iter().all(|&b| b == 0) {
                    Some(vec![1; c.len()])
                } else {
                    None
                };
                let Some(cm) = moved else { continue };
                if !mid_corners.contains(&cm) {
                    continue;
                }
                let mut landed = cm.clone();
                for &r in &t.resets {
                    landed[r] = 0;
                }
                let (Some(a), Some(b)) = (find(t.from, &c, &nodes), find(t.to, &landed, &nodes)) else { continue };
                edges.push(CornerEdge { from: a, to: b, trans: ti, weight: k as u64 * src.weight + t.weight });
            }
        }
    }
    CornerGraph { nodes, edges }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AnzReport {
    AlmostNonZeno { kappa: Q, cycles: usize },
    /// A simple region cycle (transition ids) with a corner realization of
    /// weight 0 and one of weight at least 1.
    Violation { cycle: Vec<usize>, min: u64, max: u64 },
    BudgetExceeded(usize),
}

/// Tarjan's SCCs on an adjacency list; components in reverse topological order.
pub fn sccs(n: usize, adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    struct St<'a> {
        adj: &'a [Vec<usize>],
        index: Vec<usize>,
        low: Vec<usize>,
        on: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        out: Vec<Vec<usize>>,
    }
    const UNSET: usize = usize::MAX;
    let mut st = St { adj, index: vec![UNSET; n], low: vec![0; n], on: vec![false; n], stack: Vec::new(), next: 0, out: Vec::new() };
    for root in 0..n {
        if st.index[root] != UNSET {
            continue;
        }
        // Iterative DFS: (node, next child position).
        let mut work: Vec<(usize, usize)> = vec![(root, 0)];
        st.index[root] = st.next;
        st.low[root] = st.next;
        st.next += 1;
        st.stack.push(root);
        st.on[root] = true;
        while let Some(&mut (v, ref mut pos)) = work.last_mut() {
            if *pos < st.adj[v].len() {
                let w = st.adj[v][*pos];
                *pos += 1;
                if st.index[w] == UNSET {
                    st.index[w] = st.next;
                    st.low[w] = st.next;
                    st.next += 1;
                    st.stack.push(w);
                    st.on[w] = true;
                    work.push((w, 0));
                } else if st.on[w] {
                    st.low[v] = st.low[v].min(st.index[w]);
                }
            } else {
                work.pop();
                if let Some(&(u, _)) = work.last() {
                    st.low[u] = st.low[u].min(st.low[v]);
                }
                if st.low[v] == st.index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = st.stack.pop().expect("scc stack");
                        st.on[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    st.out.push(comp);
                }
            }
        }
    }
    st.out
}

/// Minimum and maximum corner-realization weights of a transition path,
/// with free start and end corners.
pub fn corner_path_bounds(cp: &CornerGraph, path: &[usize]) -> Option<(u64, u64)> {
    let mut cur: Vec<(usize, u64, u64)> = Vec::new();
    for (i, &t) in path.iter().enumerate() {
        let mut next: Vec<(usize, u64, u64)> = Vec::new();
        for e in cp.edges_of(t) {
            let from = if i == 0 {
                Some((0, 0))
            } else {
                cur.iter().find(|(n, _, _)| *n == e.from).map(|&(_, lo, hi)| (lo, hi))
            };
            let Some((lo, hi)) = from else { continue };
            let (lo, hi) = (lo + e.weight, hi + e.weight);
            match next.iter_mut().find(|(n, _, _)| *n == e.to) {
                Some(slot) => {
                    slot.1 = slot.1.min(lo);
                    slot.2 = slot.2.max(hi);
                }
                None => next.push((e.to, lo, hi)),
            }
        }
        if next.is_empty() {
            return None;
        }
        cur = next;
    }
    let lo = cur.iter().map(|c| c.1).min()?;
    let hi = cur.iter().map(|c| c.2).max()?;
    Some((lo, hi))
}

/// Enumerates simple cycles of the region graph (transition sequences)
/// and checks that every corner realization of each weighs 0 or at least 1.
pub fn check_almost_non_zeno(g: &RegionGame, cp: &CornerGraph, budget: usize) -> AnzReport {
    let n = g.locs.len();
    let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, t) in g.trans.iter().enumerate() {
        out_edges[t.from].push(i);
    }
    let adj: Vec<Vec<usize>> = out_edges.iter().map(|es| es.iter().map(|&e| g.trans[e].to).collect()).collect();
    let mut comp_of = vec![usize::MAX; n];
    for (ci, comp) in sccs(n, &adj).iter().enumerate() {
        for &v in comp {
            comp_of[v] = ci;
        }
    }
    let mut count = 0usize;
    for s in 0..n {
        // Cycles whose smallest location is `s`.
        let mut path: Vec<usize> = Vec::new();
        let mut on_path = vec![false; n];
        let mut stack: Vec<(usize, usize)> = vec![(s, 0)];
        on_path[s] = true;
        while let Some(&mut (v, ref mut pos)) = stack.last_mut() {
            if *pos >= out_edges[v].len() {
                stack.pop();
                on_path[v] = false;
                path.pop();
                continue;
            }
            let e = out_edges[v][*pos];
            *pos += 1;
            let w = g.trans[e].to;
            if w < s || comp_of[w] != comp_of[s] {
                continue;
            }
            if w == s {
                count += 1;
                if count > budget {
                    return AnzReport::BudgetExceeded(budget);
                }
                let mut cycle = path.clone();
                cycle.push(e);
                if let Some((lo, hi)) = corner_path_bounds(cp, &cycle) {
                    if hi > 0 && lo < 1 {
                        return AnzReport::Violation { cycle, min: lo, max: hi };
                    }
                }
            } else if !on_path[w] {
                on_path[w] = true;
                path.push(e);
                stack.push((w, 0));
            }
        }
    }
    AnzReport::AlmostNonZeno { kappa: qi(1), cycles: count }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GreenMarking {
    pub locs: BTreeSet<usize>,
    pub trans: BTreeSet<usize>,
}

/// Locations and transitions on some cycle of weight-0 corner edges.
pub fn mark_green(g: &RegionGame, cp: &CornerGraph) -> GreenMarking {
    let n = cp.nodes.len();
    let zero: Vec<&CornerEdge> = cp.edges.iter().filter(|e| e.weight == 0).collect();
    let mut adj = vec![Vec::new(); n];
    for e in &zero {
        adj[e.from].push(e.to);
    }
    let mut comp_of = vec![usize::MAX; n];
    for (ci, comp) in sccs(n, &adj).iter().enumerate() {
        for &v in comp {
            comp_of[v] = ci;
        }
    }
    let mut m = GreenMarking::default();
    for e in zero {
        if comp_of[e.from] == comp_of[e.to] {
            m.trans.insert(e.trans);
            m.locs.insert(cp.nodes[e.from].0);
            m.locs.insert(cp.nodes[e.to].0);
        }
    }
    debug_assert!(m.trans.iter().all(|&t| m.locs.contains(&g.trans[t].from)));
    m
}

/// Splits every green location of positive weight `ℓ` into a weight-0 copy
/// `ℓ_0` receiving the incoming and green outgoing edges, followed by a
/// delay-free edge `ℓ_0 → ℓ`.
pub fn fix_weight_zero(g: &RegionGame, marking: &GreenMarking) -> Result<RegionGame> {
    let mut out = g.clone();
    for &l in &marking.locs {
        if g.locs[l].weight == 0 {
            continue;
        }
        let reg = g.locs[l].reg.clone();
        for (ti, t) in g.outgoing(l) {
            if marking.trans.contains(&ti) && (t.mid != reg || reg.zero.is_empty()) {
                return Err(Error::Structural(format!(
                    "green location {} of positive weight has a green exit that lets time elapse",
                    g.locs[l].name
                )));
            }
        }
        let Some(&z) = reg.zero.first() else {
            return Err(Error::Structural(format!("green location {} of positive weight has no x=0 exit", g.locs[l].name)));
        };
        let l0 = out.locs.len();
        out.locs.push(RLoc { name: format!("{}#0", g.locs[l].name), weight: 0, ..g.locs[l].clone() });
        for (ti, t) in out.trans.iter_mut().enumerate() {
            if t.to == l {
                t.to = l0;
            }
            if t.from == l && marking.trans.contains(&ti) {
                t.from = l0;
            }
        }
        out.trans.push(RTrans {
            from: l0,
            to: l,
            mid: reg.clone(),
            guards: vec![crate::game::Guard::new(z, CmpOp::Eq, 0)],
            resets: Vec::new(),
            weight: 0,
        });
        if out.initial == l {
            out.initial = l0;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelComponent {
    pub locs: Vec<usize>,
    /// Green transitions inside the component.
    pub inner: Vec<usize>,
    /// Every other transition leaving a location of the component.
    pub outputs: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Kernel {
    pub comps: Vec<KernelComponent>,
    pub comp_of: Vec<Option<usize>>,
}

/// Strongly connected components of the green subgraph.
pub fn extract_kernel(g: &RegionGame, marking: &GreenMarking) -> Kernel {
    let n = g.locs.len();
    let mut adj = vec![Vec::new(); n];
    for &t in &marking.trans {
        adj[g.trans[t].from].push(g.trans[t].to);
    }
    let mut k = Kernel { comps: Vec::new(), comp_of: vec![None; n] };
    for comp in sccs(n, &adj) {
        let set: BTreeSet<usize> = comp.iter().copied().collect();
        let inner: Vec<usize> = marking
            .trans
            .iter()
            .copied()
            .filter(|&t| set.contains(&g.trans[t].from) && set.contains(&g.trans[t].to))
            .collect();
        if inner.is_empty() {
            continue;
        }
        let outputs = (0..g.trans.len())
            .filter(|t| set.contains(&g.trans[*t].from) && !inner.contains(t))
            .collect();
        let ci = k.comps.len();
        for &l in &comp {
            k.comp_of[l] = Some(ci);
        }
        k.comps.push(KernelComponent { locs: comp, inner, outputs });
    }
    k
}

/// `κ = 1` and the product bound `W = |L_R|·(max w(ℓ) + max w(t) + 1)`.
pub fn compute_bounds(g: &RegionGame) -> (Q, Q) {
    let wl = g.locs.iter().map(|l| l.weight).max().unwrap_or(0);
    let wt = g.trans.iter().map(|t| t.weight).max().unwrap_or(0);
    let w = qi(g.locs.len() as i64) * qi((wl + wt + 1) as i64);
    (qi(1), w)
}
