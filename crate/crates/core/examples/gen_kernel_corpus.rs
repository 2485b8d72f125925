// SPDX-License-Identifier: Apache-2.0

//! Writes the kernel-game corpus used by the acceptance tests.
//!
//! `cargo run -p wtg --example gen_kernel_corpus -- [out_dir] [count] [seed]`
//!
//! Games are drawn from a fixed seed and kept only when value iteration
//! converges, the entrance has a finite value and the location graph has a
//! cycle outside the goals. At least a third of the kept games have a Max
//! location.

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wtg::game::Owner;
use wtg::geom::{Affine, Poly};
use wtg::io::write_region_game;
use wtg::kernel_vi::{iterate, kind_of, lift, Kind};
use wtg::plf::Plf1;
use wtg::plf2::{Cell, Plf2};
use wtg::rational::{q, qi, Q};
use wtg::region::Region;
use wtg::region_game::{RLoc, RTrans, RegionGame};

fn vert() -> Region {
    Region::new(2, vec![0], vec![vec![1]], vec![])
}

fn horiz() -> Region {
    Region::new(2, vec![1], vec![vec![0]], vec![])
}

fn eighth(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Q {
    q(rng.gen_range(lo..=hi), 8)
}

fn small(rng: &mut ChaCha8Rng) -> Q {
    q(rng.gen_range(-4..=4), 2)
}

/// Output on a one-dimensional `Δ`-region: up to three pieces with
/// breakpoints in eighths.
fn delta_output(rng: &mut ChaCha8Rng, kind: Kind, dom: &Poly) -> Plf2 {
    let pieces = rng.gen_range(1..=3);
    let mut xs: Vec<i64> = (1..8).collect();
    xs.shuffle(rng);
    let mut xs: Vec<i64> = xs[..pieces - 1].to_vec();
    xs.sort();
    let mut pts = vec![(qi(0), eighth(rng, 0, 24))];
    for x in xs.into_iter().chain([8]) {
        pts.push((q(x, 8), eighth(rng, 0, 24)));
    }
    let f = Plf1::from_points(pts).expect("increasing breakpoints");
    lift(kind, dom, &f).expect("lift onto a segment")
}

/// Output on a closure of any shape: an affine function, plus up to two
/// kinks along vertical lines at eighths when the closure is planar.
fn planar_output(rng: &mut ChaCha8Rng, dom: &Poly) -> Plf2 {
    let base = Affine::new(small(rng), small(rng), qi(rng.gen_range(1..=3)));
    if dom.dim() != Some(2) {
        return Plf2::affine(dom.clone(), base);
    }
    let kinks = rng.gen_range(0..=2);
    let mut cs: Vec<i64> = (1..8).collect();
    cs.shuffle(rng);
    let mut cs = cs[..kinks].to_vec();
    cs.sort();
    let mut cells = Vec::new();
    let mut rest = Some(dom.clone());
    let mut f = base;
    for c in cs {
        let line = Affine::new(qi(1), qi(0), -q(c, 8));
        let Some(r) = rest.take() else { break };
        let (left, right) = r.split(&line);
        if let Some(l) = left {
            cells.push(Cell { poly: l, f: f.clone() });
        }
        let s = small(rng);
        f = f.add(&Affine::new(s.clone(), qi(0), -(s * q(c, 8))));
        rest = right;
    }
    if let Some(r) = rest {
        cells.push(Cell { poly: r, f });
    }
    Plf2::from_cells(dom.clone(), cells)
}

fn subsets() -> [Vec<usize>; 4] {
    [vec![], vec![0], vec![1], vec![0, 1]]
}

fn has_cycle(n: usize, trans: &[RTrans]) -> bool {
    let adj: Vec<Vec<usize>> = (0..n).map(|l| trans.iter().filter(|t| t.from == l && t.to < n).map(|t| t.to).collect()).collect();
    wtg::cycle::sccs(n, &adj).iter().any(|c| c.len() > 1 || adj[c[0]].contains(&c[0]))
}

fn draw(rng: &mut ChaCha8Rng) -> RegionGame {
    let shapes = [vert(), horiz(), Region::origin(2)];
    let nn = rng.gen_range(1..=4);
    let ng = rng.gen_range(1..=(5 - nn).min(2));
    let owner = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.5) { Owner::Min } else { Owner::Max };
    let mut locs: Vec<RLoc> = (0..nn)
        .map(|i| RLoc {
            name: format!("l{i}"),
            owner: owner(rng),
            goal: false,
            weight: 0,
            reg: shapes.choose(rng).expect("shapes").clone(),
            base: i,
            output: None,
        })
        .collect();

    let mut landings = Vec::new();
    for l in &locs {
        for mid in l.reg.time_successors().expect("boundary region") {
            for r in subsets() {
                let land = mid.reset(&r);
                if !landings.contains(&land) {
                    landings.push(land);
                }
            }
        }
    }
    for i in 0..ng {
        let reg = landings.choose(rng).expect("landings").clone();
        let dom = reg.closure_poly();
        let output = match kind_of(&reg) {
            k @ (Kind::Vert | Kind::Horiz) => delta_output(rng, k, &dom),
            _ => planar_output(rng, &dom),
        };
        locs.push(RLoc { name: format!("g{i}"), owner: Owner::Min, goal: true, weight: 0, reg, base: nn + i, output: Some(output) });
    }

    let mut cands = Vec::new();
    for (from, l) in locs.iter().enumerate().take(nn) {
        for mid in l.reg.time_successors().expect("boundary region") {
            for r in subsets() {
                let land = mid.reset(&r);
                for (to, t) in locs.iter().enumerate() {
                    if t.reg == land && (t.goal || !r.is_empty()) {
                        cands.push(RTrans { from, to, mid: mid.clone(), guards: Vec::new(), resets: r.clone(), weight: 0 });
                    }
                }
            }
        }
    }
    let mut trans: Vec<RTrans> = cands.iter().filter(|_| rng.gen_bool(0.3)).cloned().collect();
    for l in 0..nn {
        if !trans.iter().any(|t| t.from == l) {
            let mine: Vec<_> = cands.iter().filter(|t| t.from == l).collect();
            if let Some(t) = mine.choose(rng) {
                trans.push((*t).clone());
            }
        }
    }
    trans.sort_by_key(|t| (t.from, t.to));
    trans.dedup();
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

/// Iteration count when the game is kept.
fn acceptable(g: &RegionGame) -> Option<usize> {
    let nn = g.locs.iter().filter(|l| !l.goal).count();
    if !has_cycle(nn, &g.trans) {
        return None;
    }
    let r = iterate(g, g.initial, 200).ok()?;
    (r.k >= 1 && !r.entrance.is_infinite()).then_some(r.k)
}

fn has_max(g: &RegionGame) -> bool {
    g.locs.iter().any(|l| !l.goal && l.owner == Owner::Max)
}

fn main() {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "crates/core/tests/corpus/kernel".into()));
    let count: usize = args.next().map_or(24, |s| s.parse().expect("count"));
    let seed: u64 = args.next().map_or(20_261_014, |s| s.parse().expect("seed"));
    std::fs::create_dir_all(&dir).expect("create corpus directory");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kept = 0;
    let mut tries = 0;
    let mut with_max = 0;
    while kept < count {
        tries += 1;
        assert!(tries < 100_000, "generator keeps rejecting games");
        let g = draw(&mut rng);
        let Some(k) = acceptable(&g) else { continue };
        if !has_max(&g) && 3 * (kept + 1 - with_max) > 2 * count {
            continue;
        }
        with_max += usize::from(has_max(&g));
        println!("kernel_{kept:02}: {} locations, {} transitions, k = {k}", g.locs.len(), g.trans.len());
        let path = dir.join(format!("kernel_{kept:02}.json"));
        std::fs::write(&path, write_region_game(&g).expect("serialize")).expect("write game");
        kept += 1;
    }
    println!("wrote {kept} games to {} ({tries} draws)", dir.display());
}
