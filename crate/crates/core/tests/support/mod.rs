// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use wtg::game::{Configuration, Game, Valuation};
use wtg::io::{load_game, parse_region_game};
use wtg::kernel_vi::{kind_of, Kind};
use wtg::rational::{abs, q, qi, Ext, Q};
use wtg::region_game::RegionGame;

pub fn corpus_dir(sub: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("corpus").join(sub)
}

/// Sorted `.json` files of a corpus sub-directory.
pub fn corpus_files(sub: &str) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(corpus_dir(sub))
        .unwrap_or_else(|e| panic!("corpus {sub}: {e}"))
        .map(|e| e.expect("dir entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    v.sort();
    v
}

pub fn name_of(p: &Path) -> String {
    p.file_stem().expect("file name").to_string_lossy().into_owned()
}

pub fn load_region(p: &Path) -> RegionGame {
    parse_region_game(&std::fs::read_to_string(p).expect("read corpus file")).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

pub fn load(p: &Path) -> Game {
    load_game(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

/// Largest slope of any output piece, read off each cell: the larger
/// coefficient on planar cells, the rise over the sup-norm run on segments.
pub fn max_output_slope(g: &RegionGame) -> Q {
    let mut s = qi(0);
    for l in &g.locs {
        let Some(f) = &l.output else { continue };
        for c in f.cells() {
            let m = match c.poly.dim() {
                Some(2) => std::cmp::max(abs(&c.f.a), abs(&c.f.b)),
                Some(1) => {
                    let (p, r) = (&c.poly.verts[0], &c.poly.verts[c.poly.verts.len() - 1]);
                    let run = std::cmp::max(abs(&(&r.0 - &p.0)), abs(&(&r.1 - &p.1)));
                    abs(&(c.f.eval(r) - c.f.eval(p))) / run
                }
                _ => qi(0),
            };
            s = s.max(m);
        }
    }
    s
}

/// Grid valuations `i/n` of a one-dimensional boundary region closure.
pub fn boundary_grid(kind: Kind, n: i64) -> Vec<Valuation> {
    match kind {
        Kind::Vert => (0..=n).map(|i| Valuation(vec![qi(0), q(i, n)])).collect(),
        Kind::Horiz => (0..=n).map(|i| Valuation(vec![q(i, n), qi(0)])).collect(),
        Kind::Point => vec![Valuation(vec![qi(0), qi(0)])],
        Kind::Open => Vec::new(),
    }
}

/// Grid starts on every non-goal location of a kernel game.
pub fn kernel_starts(g: &RegionGame, n: i64) -> Vec<Configuration> {
    let mut v = Vec::new();
    for (i, l) in g.locs.iter().enumerate() {
        if !l.goal {
            for val in boundary_grid(kind_of(&l.reg), n) {
                v.push(Configuration { location: i, valuation: val });
            }
        }
    }
    v
}

pub fn within(a: &Ext, b: &Ext, eps: &Q) -> bool {
    match (a, b) {
        (Ext::Inf, Ext::Inf) => true,
        (Ext::Fin(x), Ext::Fin(y)) => abs(&(x - y)) <= *eps,
        _ => false,
    }
}

/// Bounded grid values at the given starts.
pub fn oracle_at(g: &Game, n: i64, k: usize, starts: &[Configuration]) -> Vec<Ext> {
    let t = wtg::oracle::BoundedValueTable::build(g, n, k, starts).unwrap_or_else(|e| panic!("oracle: {e}"));
    starts.iter().map(|c| t.value(c, k).expect("explored start")).collect()
}

/// Grid points of a region closure, as configurations of location `l`.
pub fn closure_grid(reg: &wtg::region::Region, l: usize, n: i64) -> Vec<Configuration> {
    let mut out = Vec::new();
    let d = reg.n;
    let mut idx = vec![0i64; d];
    loop {
        let v: Vec<Q> = idx.iter().map(|&i| q(i, n)).collect();
        if reg.closure_contains(&v) {
            out.push(Configuration { location: l, valuation: Valuation(v) });
        }
        let mut c = 0;
        while c < d && idx[c] == n {
            idx[c] = 0;
            c += 1;
        }
        if c == d {
            break;
        }
        idx[c] += 1;
    }
    out
}

/// Largest slope of a goal output of an ordinary game.
pub fn game_output_slope(g: &Game) -> Q {
    let mut s = qi(0);
    for f in g.outputs.values() {
        for c in f.cells() {
            s = s.max(std::cmp::max(abs(&c.f.a), abs(&c.f.b)));
        }
    }
    s
}
