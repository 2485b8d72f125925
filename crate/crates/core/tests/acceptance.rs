// SPDX-License-Identifier: Apache-2.0

//! Acceptance checks. Each criterion prints a single `PASS` or `FAIL` line;
//! the process fails when any criterion fails.

#[path = "acceptance/properties.rs"]
mod properties;
mod support;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use wtg::cycle::{build_corner_point, check_almost_non_zeno, fix_weight_zero, mark_green, AnzReport};
use wtg::game::{Configuration, Game};
use wtg::kernel_vi::iterate;
use wtg::normalize::{check_bounded, normalize_01};
use wtg::oracle::{bounded_values, BoundedValueTable};
use wtg::rational::{fmt_q, parse_q, q, qi, Ext, Q};
use wtg::region_game::{build_region_wtg, relax, trim};
use wtg::solver::{decide, pad_clocks, prepare, solve, Decision, Options};
use wtg::unfold::{check_finite_value, Unfolder};

use support::*;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn criterion_1() -> Check {
    let start = Instant::now();
    let files = corpus_files("kernel");
    if files.len() < 20 {
        return Err(format!("only {} kernel games", files.len()));
    }
    let mut worst_k = 0;
    let mut checked = 0;
    let mut finite = 0;
    for p in &files {
        let g = load_region(p);
        let name = name_of(p);
        if g.locs.len() > 5 {
            return Err(format!("{name}: {} locations", g.locs.len()));
        }
        let r = iterate(&g, g.initial, 10_000).map_err(|e| format!("{name}: {e}"))?;
        if r.k > 200 {
            return Err(format!("{name}: k = {}", r.k));
        }
        worst_k = worst_k.max(r.k);
        let eps = max_output_slope(&g) * q(2, 64);
        let starts = kernel_starts(&g, 64);
        let game = g.to_game();
        let table = BoundedValueTable::build(&game, 64, r.k + 5, &starts).map_err(|e| format!("{name}: {e}"))?;
        for c in &starts {
            let want = r.value_at(&g, c.location, &c.valuation).map_err(|e| format!("{name}: {e}"))?;
            let got = table.value(c, r.k + 5).map_err(|e| format!("{name}: {e}"))?;
            if !within(&want, &got, &eps) {
                return Err(format!(
                    "{name}: {} at {} has fixed point {want} but oracle {got} (eps {})",
                    g.locs[c.location].name,
                    c.valuation,
                    fmt_q(&eps)
                ));
            }
            checked += 1;
            finite += usize::from(!want.is_inf());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 60.0 {
        return Err(format!("took {secs:.1} s"));
    }
    Ok(format!("{} games, max k = {worst_k}, {checked} grid points ({finite} finite), {secs:.1} s", files.len()))
}

fn three_clock_anz(g: &Game) -> std::result::Result<Q, String> {
    check_bounded(g).map_err(|e| e.to_string())?;
    let n = normalize_01(g).map_err(|e| e.to_string())?;
    let rg = trim(&build_region_wtg(&n.game).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?.prune_unreachable();
    match check_almost_non_zeno(&rg, &build_corner_point(&rg), 200_000) {
        AnzReport::AlmostNonZeno { kappa, .. } => Ok(kappa),
        AnzReport::Violation { .. } => Err("violation".into()),
        AnzReport::BudgetExceeded(b) => Err(format!("budget {b} exceeded")),
    }
}

fn criterion_2() -> Check {
    let g = load(&corpus_dir("fig2").join("three_clock.json"));
    let kappa = three_clock_anz(&g).map_err(|e| format!("ANZ check: {e}"))?;
    if kappa != qi(1) {
        return Err(format!("kappa = {}", fmt_q(&kappa)));
    }
    let t = bounded_values(&g, 12, 20).map_err(|e| e.to_string())?;
    let vals: Vec<Ext> = (2..=20).map(|k| t.value(&g.initial, k)).collect::<wtg::Result<_>>().map_err(|e| e.to_string())?;
    let shown = vals.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
    let floor = Ext::Fin(qi(1) - q(2, 12));
    if let Some(v) = vals.iter().find(|v| **v < floor) {
        return Err(format!("N=12 value {v} below 1 - 2/12; K=2..20: {shown}"));
    }
    let t24 = bounded_values(&g, 24, 40).map_err(|e| e.to_string())?;
    let v24 = t24.value(&g.initial, 40).map_err(|e| e.to_string())?;
    if !(Ext::Fin(qi(1)) <= v24 && v24 <= Ext::Fin(q(115, 100))) {
        return Err(format!("N=24, K=40 value {v24} outside [1, 1.15]"));
    }
    if let Some(k) = vals.windows(2).position(|w| w[1] >= w[0]) {
        return Err(format!(
            "N=12 values not strictly decreasing at K={}..{} (kappa 1, N=24/K=40 value {v24}); K=2..20: {shown}",
            k + 2,
            k + 3
        ));
    }
    Ok(format!("kappa 1; N=12 K=2..20: {shown}; N=24 K=40: {v24}"))
}

const GRID: i64 = 8;
const HORIZON: usize = 64;

/// Tolerance `2·S/N` with `S = (max location weight + output slope)·(K+1)`.
fn grid_tolerance(g: &Game) -> Q {
    let s = (Q::from_integer((g.max_location_weight() as i64).into()) + game_output_slope(g)) * qi(HORIZON as i64 + 1);
    s * q(2, GRID)
}

struct Tally {
    exact: usize,
    close: usize,
}

impl Tally {
    fn compare(&mut self, what: &str, a: &[Ext], b: &[Ext], eps: &Q) -> std::result::Result<(), String> {
        for (x, y) in a.iter().zip(b) {
            if x == y {
                self.exact += 1;
            } else if within(x, y, eps) {
                self.close += 1;
            } else {
                return Err(format!("{what}: {x} vs {y}"));
            }
        }
        Ok(())
    }
}

fn preserved(p: &std::path::Path, tally: &mut Tally) -> std::result::Result<usize, String> {
    let name = name_of(p);
    let g = pad_clocks(&load(p)).map_err(|e| format!("{name}: {e}"))?;
    let eps = grid_tolerance(&g);
    let exact = qi(0);
    let v0 = oracle_at(&g, GRID, HORIZON, std::slice::from_ref(&g.initial));

    let n = normalize_01(&g).map_err(|e| format!("{name}: {e}"))?;
    let v1 = oracle_at(&n.game, GRID, HORIZON, std::slice::from_ref(&n.game.initial));
    tally.compare(&format!("{name} normalized"), &v0, &v1, &exact)?;

    let rg = trim(&build_region_wtg(&n.game).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?.prune_unreachable();
    let strict = rg.to_game();
    let vs = oracle_at(&strict, GRID, HORIZON, std::slice::from_ref(&strict.initial));
    let relaxed = relax(&rg).to_game();
    let vr = oracle_at(&relaxed, GRID, HORIZON, std::slice::from_ref(&relaxed.initial));
    tally.compare(&format!("{name} strict region game"), &v0, &vs, &eps)?;
    tally.compare(&format!("{name} relaxed region game"), &v0, &vr, &eps)?;

    let fixed = fix_weight_zero(&rg, &mark_green(&rg, &build_corner_point(&rg))).map_err(|e| format!("{name}: {e}"))?;
    let fg = fixed.to_game();
    let vf = oracle_at(&fg, GRID, HORIZON, std::slice::from_ref(&fg.initial));
    tally.compare(&format!("{name} weight-zero fix"), &vs, &vf, &exact)?;

    let prep = prepare(&g, &Options::default()).map_err(|e| format!("{name}: {e}"))?;
    let mut kernels = 0;
    if check_finite_value(&prep.game) {
        let mut u = Unfolder::new(&prep.game, &prep.kernel, 64, 10_000);
        u.record_kernel_games = true;
        u.solve_root().map_err(|e| format!("{name}: {e}"))?;
        for (pre, post) in &u.kernel_games {
            let starts = closure_grid(&pre.locs[pre.initial].reg, pre.initial, GRID);
            let moved: Vec<_> = starts.iter().map(|c| Configuration { location: post.initial, ..c.clone() }).collect();
            let a = oracle_at(&pre.to_game(), GRID, HORIZON, &starts);
            let b = oracle_at(&post.to_game(), GRID, HORIZON, &moved);
            tally.compare(&format!("{name} resets in kernel at {}", pre.locs[pre.initial].name), &a, &b, &exact)?;
            kernels += 1;
        }
    }
    Ok(kernels)
}

fn criterion_3() -> Check {
    let files = corpus_files("transform");
    if files.len() < 10 {
        return Err(format!("only {} games", files.len()));
    }
    let mut tally = Tally { exact: 0, close: 0 };
    let mut kernels = 0;
    for p in &files {
        kernels += preserved(p, &mut tally)?;
    }
    Ok(format!(
        "{} games, {kernels} kernel games, {} comparisons exact, {} within tolerance",
        files.len(),
        tally.exact,
        tally.close
    ))
}

fn criterion_4() -> Check {
    let dir = corpus_dir("hand");
    let text = std::fs::read_to_string(dir.join("expected.txt")).map_err(|e| e.to_string())?;
    let expected: Vec<(&str, &str)> = text
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .filter_map(|l| l.split_once(' '))
        .collect();
    if expected.len() < 5 {
        return Err(format!("only {} hand-built games", expected.len()));
    }
    if !dir.join("DERIVATIONS.md").exists() {
        return Err("derivations missing".into());
    }
    let tenth = q(1, 10);
    for &(name, v) in &expected {
        let want = parse_q(v).map_err(|e| format!("{name}: {e}"))?;
        let g = load(&dir.join(format!("{name}.json")));
        let got = solve(&g, &Options::default()).map_err(|e| format!("{name}: {e}"))?.value;
        if got != Ext::Fin(want.clone()) {
            return Err(format!("{name}: solve gives {got}, derived {v}"));
        }
        let oracle = bounded_values(&g, 8, 40).and_then(|t| t.value(&g.initial, 40)).map_err(|e| format!("{name}: {e}"))?;
        if oracle != got {
            return Err(format!("{name}: oracle gives {oracle}, derived {v}"));
        }
        for (c, d) in [(&want - &tenth, Decision::Exceeds), (want.clone(), Decision::AtMost), (&want + &tenth, Decision::AtMost)] {
            let out = decide(&g, &c, &Options::default()).map_err(|e| format!("{name}: {e}"))?.decision;
            if out != Some(d) {
                return Err(format!("{name}: decide at {} gives {out:?}", fmt_q(&c)));
            }
        }
    }
    Ok(format!("{} games exact, oracle N=8 K=40 agrees, 3 thresholds each", expected.len()))
}

/// Closed replays of a witness cycle in the relaxed region game, on the
/// `1/n` grid: the weights of every run that follows the cycle's
/// transitions and returns to its starting valuation.
fn replay_weights(rg: &wtg::region_game::RegionGame, cycle: &[usize], n: i64) -> Vec<Q> {
    let g = relax(rg).to_game();
    let first = rg.trans[cycle[0]].from;
    let mut out = Vec::new();
    for start in closure_grid(&rg.locs[first].reg, first, n) {
        let mut frontier = vec![(start.clone(), qi(0))];
        for &t in cycle {
            let mut next = Vec::new();
            for (c, w) in &frontier {
                for j in 0..=n {
                    if let Ok((c2, dw)) = g.step(c, &q(j, n), t) {
                        next.push((c2, w + dw));
                    }
                }
            }
            frontier = next;
        }
        out.extend(frontier.into_iter().filter(|(c, _)| *c == start).map(|(_, w)| w));
    }
    out
}

fn region_game_of(g: &Game) -> std::result::Result<wtg::region_game::RegionGame, String> {
    let g = pad_clocks(g).map_err(|e| e.to_string())?;
    check_bounded(&g).map_err(|e| e.to_string())?;
    let n = normalize_01(&g).map_err(|e| e.to_string())?;
    Ok(trim(&build_region_wtg(&n.game).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?.prune_unreachable())
}

fn criterion_6() -> Check {
    let g = load(&corpus_dir("anz").join("mixed_cycle.json"));
    let rg = region_game_of(&g)?;
    let cycle = match check_almost_non_zeno(&rg, &build_corner_point(&rg), 200_000) {
        AnzReport::Violation { cycle, min, max } if min == 0 && max >= 1 => cycle,
        other => return Err(format!("mixed cycle: {other:?}")),
    };
    let closes = cycle.iter().zip(cycle.iter().cycle().skip(1)).all(|(&a, &b)| rg.trans[a].to == rg.trans[b].from);
    if !closes {
        return Err(format!("witness {cycle:?} is not a cycle"));
    }
    let ws = replay_weights(&rg, &cycle, 4);
    if !ws.iter().any(|w| *w == qi(0)) || !ws.iter().any(|w| *w >= qi(1)) {
        return Err(format!("witness replays with weights {ws:?}"));
    }
    if solve(&g, &Options::default()).is_ok() {
        return Err("solve accepted the mixed cycle".into());
    }

    let mut anz = 0;
    for p in corpus_files("transform").into_iter().chain(corpus_files("hand")) {
        let rg = region_game_of(&load(&p))?;
        match check_almost_non_zeno(&rg, &build_corner_point(&rg), 200_000) {
            AnzReport::AlmostNonZeno { kappa, .. } if kappa == qi(1) => anz += 1,
            other => return Err(format!("{}: {other:?}", name_of(&p))),
        }
    }
    let fig2 = load(&corpus_dir("fig2").join("three_clock.json"));
    match three_clock_anz(&fig2) {
        Ok(k) if k == qi(1) => anz += 1,
        other => return Err(format!("three_clock: {other:?}")),
    }

    let fixtures = [corpus_dir("transform").join("t01_forced_wait.json"), corpus_dir("hand").join("h04_max_loops.json"), corpus_dir("fig2").join("three_clock.json")];
    let mut counts = Vec::new();
    for p in &fixtures {
        let text = std::fs::read_to_string(p).map_err(|e| e.to_string())?;
        let doc: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        let locs = doc["locations"].as_array().map_or(0, Vec::len);
        let clocks = doc["clocks"].as_array().map_or(0, Vec::len) as u32;
        let cmax = doc["transitions"].as_array().into_iter().flatten().flat_map(|t| t["guards"].as_array().into_iter().flatten()).filter_map(|gd| gd[2].as_u64()).max().unwrap_or(0) as usize;
        let want = locs * (cmax + 1).pow(clocks);
        let got = normalize_01(&load(p)).map_err(|e| e.to_string())?.game.locations.len();
        if got != want {
            return Err(format!("{}: {got} normalized locations, expected {want}", name_of(p)));
        }
        counts.push(format!("{}={got}", name_of(p)));
    }
    Ok(format!(
        "violation witness of {} transitions replays with weights 0 and {}; {anz} games with kappa 1; location counts {}",
        cycle.len(),
        ws.iter().max().map(fmt_q).unwrap_or_default(),
        counts.join(", ")
    ))
}

fn main() {
    let criteria: [Criterion; 6] = [
        ("kernel value iteration", criterion_1),
        ("three-clock non-terminating example", criterion_2),
        ("value preservation under transformations", criterion_3),
        ("end-to-end exactness on hand-built games", criterion_4),
        ("property suites", properties::criterion_5),
        ("almost non-Zeno checker", criterion_6),
    ];
    let mut failed = 0;
    for (i, &(title, f)) in criteria.iter().enumerate() {
        let out = std::thread::Builder::new()
            .stack_size(512 << 20)
            .spawn(move || catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into())))
            .expect("spawn")
            .join()
            .unwrap_or_else(|_| Err("panicked".into()));
        match out {
            Ok(d) => println!("PASS criterion {}: {title} ({d})", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {}: {title} ({d})", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
