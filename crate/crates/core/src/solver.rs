// SPDX-License-Identifier: Apache-2.0

//! End-to-end solving of the Value Problem.

use std::fmt;

use crate::cycle::{
    build_corner_point, check_almost_non_zeno, compute_bounds, extract_kernel, fix_weight_zero, mark_green, AnzReport,
    Kernel,
};
use crate::error::{Error, Result};
use crate::game::{CmpOp, Game, Guard, Valuation};
use crate::normalize::{check_bounded, normalize_01};
use crate::plf2::Plf2;
use crate::rational::{fmt_q, Ext, Q};
use crate::region_game::{build_region_wtg, trim, RegionGame};
use crate::unfold::{attractor_bound, check_finite_value, stop_threshold, TreeStats, Unfolder};

#[derive(Clone, Debug)]
pub struct Options {
    pub budget_cycles: usize,
    pub k_cap: usize,
    /// Added to the stop threshold; 0 in normal use.
    pub extra_visits: u32,
    pub stack_mib: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options { budget_cycles: 200_000, k_cap: 10_000, extra_visits: 0, stack_mib: 512 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    AtMost,
    Exceeds,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::AtMost => "at-most",
            Decision::Exceeds => "exceeds",
        })
    }
}

pub fn decide_value(v: &Ext, c: &Q) -> Decision {
    match v {
        Ext::Fin(x) if x <= c => Decision::AtMost,
        _ => Decision::Exceeds,
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub region_locations: usize,
    pub region_transitions: usize,
    pub kernel_components: usize,
    pub anz_cycles: usize,
    pub weight_bound: Option<Q>,
    pub stop_visits: u32,
    pub tree: TreeStats,
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub value: Ext,
    pub decision: Option<Decision>,
    pub diagnostics: Diagnostics,
    /// Value function of the initial region-location, when finite.
    pub root: Option<Plf2>,
}

/// The region game after all structural rewriting, ready for unfolding.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub game: RegionGame,
    pub kernel: Kernel,
    pub anz_cycles: usize,
}

/// Completes games with fewer than two clocks by clocks reset on every move.
pub fn pad_clocks(g: &Game) -> Result<Game> {
    let n = g.num_clocks();
    if n == 2 {
        return Ok(g.clone());
    }
    if n > 2 {
        return Err(Error::MoreThanTwoClocks(n));
    }
    if n == 0 {
        return Err(Error::Structural("games need at least one clock".into()));
    }
    if !g.outputs.is_empty() {
        return Err(Error::Structural("output functions need exactly two clocks".into()));
    }
    let mut out = g.clone();
    let pad = 1;
    out.clocks.push(format!("{}'", g.clocks[0]));
    let cmax = g.max_constant();
    for t in &mut out.transitions {
        t.guards.push(Guard::new(pad, CmpOp::Le, cmax));
        t.guards.sort();
        t.resets.push(crate::game::ClockId(pad));
    }
    out.initial.valuation = Valuation(vec![g.initial.valuation.0[0].clone(), Q::from_integer(0.into())]);
    Ok(out)
}

pub fn prepare(g: &Game, opts: &Options) -> Result<Prepared> {
    g.validate()?;
    let g = pad_clocks(g)?;
    check_bounded(&g)?;
    let n = normalize_01(&g)?;
    let rg = trim(&build_region_wtg(&n.game)?)?.prune_unreachable();
    let cp = build_corner_point(&rg);
    let anz_cycles = match check_almost_non_zeno(&rg, &cp, opts.budget_cycles) {
        AnzReport::AlmostNonZeno { cycles, .. } => cycles,
        AnzReport::Violation { cycle, .. } => {
            let names = cycle.iter().map(|&t| rg.locs[rg.trans[t].from].name.clone()).collect();
            return Err(Error::NotAlmostNonZeno(names));
        }
        AnzReport::BudgetExceeded(b) => return Err(Error::BudgetExceeded(b)),
    };
    let fixed = fix_weight_zero(&rg, &mark_green(&rg, &cp))?;
    let marking = mark_green(&fixed, &build_corner_point(&fixed));
    let kernel = extract_kernel(&fixed, &marking);
    Ok(Prepared { game: fixed, kernel, anz_cycles })
}

/// Value of the game from its initial configuration.
pub fn solve(g: &Game, opts: &Options) -> Result<Verdict> {
    let p = prepare(g, opts)?;
    let rg = &p.game;
    let mut diag = Diagnostics {
        region_locations: rg.locs.len(),
        region_transitions: rg.trans.len(),
        kernel_components: p.kernel.comps.len(),
        anz_cycles: p.anz_cycles,
        ..Default::default()
    };
    if !check_finite_value(rg) {
        return Ok(Verdict { value: Ext::Inf, decision: None, diagnostics: diag, root: None });
    }
    let (kappa, crude) = compute_bounds(rg);
    let w = match &attractor_bound(rg)[rg.initial] {
        Some(b) if *b < crude => b.clone(),
        _ => crude,
    };
    let threshold = stop_threshold(&w, &kappa).saturating_add(opts.extra_visits);
    diag.weight_bound = Some(w);
    diag.stop_visits = threshold;

    let (root, stats) = run_with_stack(opts.stack_mib, || {
        let mut u = Unfolder::new(rg, &p.kernel, threshold, opts.k_cap);
        let v = u.solve_root();
        (v, u.stats.clone())
    });
    diag.tree = stats;
    let root = root?;
    let p0 = (rg.init_val[0].clone(), rg.init_val[1].clone());
    let value = root.eval(&p0)?;
    Ok(Verdict { value, decision: None, diagnostics: diag, root: Some(root) })
}

/// [`solve`] followed by the comparison with `c`.
pub fn decide(g: &Game, c: &Q, opts: &Options) -> Result<Verdict> {
    let mut v = solve(g, opts)?;
    v.decision = Some(decide_value(&v.value, c));
    Ok(v)
}

fn run_with_stack<T: Send>(mib: usize, f: impl FnOnce() -> T + Send) -> T {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(mib << 20)
            .spawn_scoped(s, f)
            .expect("spawn solver thread")
            .join()
            .expect("solver thread panicked")
    })
}

pub fn format_value(v: &Ext) -> String {
    match v {
        Ext::Fin(x) => fmt_q(x),
        Ext::Inf => "+inf".into(),
    }
}
