// SPDX-License-Identifier: Apache-2.0

//! Property suites run from the acceptance harness with fixed seeds.

use proptest::collection::{btree_set, vec};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use wtg::geom::{unit_square, Affine};
use wtg::kernel_vi::iterate_observed;
use wtg::plf::{running_extremum, Extremum, Plf1, Side};
use wtg::plf2::{fiber_extremum, merge_cells, Cell, Plf2};
use wtg::rational::{q, qi, to_f64, Ext, Q};
use wtg::region_game::RegionGame;
use wtg::solver::{prepare, solve, Options};
use wtg::unfold::{check_finite_value, Unfolder};

use crate::support::*;

type Check = Result<String, String>;

fn runner(cases: u32, seed: u8) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32]))
}

/// Games `solve` accepts: the transform and hand corpora.
fn solvable() -> Vec<std::path::PathBuf> {
    corpus_files("transform").into_iter().chain(corpus_files("hand")).collect()
}

/// Kernel games met while solving the transform and hand corpora, after
/// the reset rewriting.
fn unfolded_kernels() -> Result<Vec<(String, RegionGame)>, String> {
    let mut out = Vec::new();
    for p in solvable() {
        let name = name_of(&p);
        let prep = prepare(&load(&p), &Options::default()).map_err(|e| format!("{name}: {e}"))?;
        if !check_finite_value(&prep.game) {
            continue;
        }
        let mut u = Unfolder::new(&prep.game, &prep.kernel, 64, 10_000);
        u.record_kernel_games = true;
        u.solve_root().map_err(|e| format!("{name}: {e}"))?;
        out.extend(u.kernel_games.into_iter().map(|(_, post)| (name.clone(), post)));
    }
    Ok(out)
}

fn all_runs() -> Result<Vec<(String, RegionGame)>, String> {
    let mut runs: Vec<(String, RegionGame)> = corpus_files("kernel").iter().map(|p| (name_of(p), load_region(p))).collect();
    runs.extend(unfolded_kernels()?);
    Ok(runs)
}

fn plf1_well_formed(f: &Plf1) -> bool {
    let c = f.canonicalize();
    if c.canonicalize() != c {
        return false;
    }
    let pts = f.points();
    match pts.len() {
        0 => f.is_infinite(),
        1 => pts[0].0 == qi(0),
        _ => pts[0].0 == qi(0) && pts[pts.len() - 1].0 == qi(1) && pts.windows(2).all(|w| w[0].0 < w[1].0),
    }
}

fn plf2_well_formed(f: &Plf2) -> bool {
    let once = merge_cells(f.clone());
    let twice = merge_cells(once.clone());
    f.check_continuity() && once.cells().len() == twice.cells().len() && once.equals(&twice) && once.equals(f)
}

/// (a) and (b) on every kernel run: `Opt_{k+1} ≤ Opt_k` at every location,
/// and every PLF met along the way is continuous and canonically stable.
pub fn runs_are_monotone_and_well_formed() -> Check {
    let runs = all_runs()?;
    let mut steps = 0;
    let mut plfs = 0;
    for (name, g) in &runs {
        let mut prev: Option<Vec<Option<Plf1>>> = None;
        let mut bad: Option<String> = None;
        let r = iterate_observed(g, g.initial, 10_000, |k, opt| {
            if bad.is_some() {
                return;
            }
            for (i, f) in opt.iter().enumerate() {
                let Some(f) = f else { continue };
                plfs += 1;
                if !plf1_well_formed(f) {
                    bad = Some(format!("{name}: malformed value at {} in step {k}", g.locs[i].name));
                    return;
                }
                if let Some(Some(old)) = prev.as_ref().map(|p| &p[i]) {
                    if !f.le(old) {
                        bad = Some(format!("{name}: step {k} increases {}", g.locs[i].name));
                        return;
                    }
                }
            }
            steps += 1;
            prev = Some(opt.to_vec());
        })
        .map_err(|e| format!("{name}: {e}"))?;
        if let Some(b) = bad {
            return Err(b);
        }
        plfs += 1;
        if !plf2_well_formed(&r.entrance) {
            return Err(format!("{name}: malformed entrance value"));
        }
    }
    let mut roots = 0;
    for p in solvable() {
        let name = name_of(&p);
        let v = solve(&load(&p), &Options::default()).map_err(|e| format!("{name}: {e}"))?;
        if let Some(f) = &v.root {
            roots += 1;
            if !plf2_well_formed(f) {
                return Err(format!("{name}: malformed root value"));
            }
        }
    }
    Ok(format!("{} runs, {steps} steps, {} PLFs", runs.len(), plfs + roots))
}

fn plf1_strategy() -> impl Strategy<Value = Plf1> {
    (btree_set(1i64..64, 0..6), vec(-32i64..=32, 7)).prop_map(|(xs, ys)| {
        let mut pts = vec![(qi(0), q(ys[0], 8))];
        for (i, x) in xs.iter().enumerate() {
            pts.push((q(*x, 64), q(ys[i + 1], 8)));
        }
        pts.push((qi(1), q(ys[6], 8)));
        Plf1::from_points(pts).expect("increasing breakpoints")
    })
}

fn value(f: &Plf1, x: &Q) -> Q {
    f.eval_fin(x).expect("finite PLF")
}

/// Extremum of `f` over `[0,x]` or `[x,1]`, from its breakpoints.
fn brute_running(f: &Plf1, x: &Q, side: Side, dir: Extremum) -> Q {
    let inside = |t: &Q| match side {
        Side::Prefix => t <= x,
        Side::Suffix => t >= x,
    };
    f.points().iter().filter(|p| inside(&p.0)).map(|p| p.1.clone()).fold(value(f, x), |a, b| dir.pick(a, b))
}

fn check_running(f: &Plf1, side: Side, dir: Extremum) -> Result<(), TestCaseError> {
    let g = running_extremum(f, side, dir).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let extrema = f.local_extrema();
    for w in g.points().windows(2) {
        let (a, b) = (&w[0].0, &w[1].0);
        let mut probes = vec![a.clone(), b.clone(), (a + b) / qi(2)];
        probes.extend(f.points().iter().filter(|p| &p.0 > a && &p.0 < b).map(|p| p.0.clone()));
        let follows = probes.iter().all(|x| value(&g, x) == value(f, x));
        let flat = w[0].1 == w[1].1 && extrema.contains(&w[0].1);
        prop_assert!(follows || flat, "piece [{a}, {b}] is neither a piece of f nor a local extremum plateau");
        for x in &probes {
            prop_assert_eq!(value(&g, x), brute_running(f, x, side, dir));
        }
    }
    Ok(())
}

/// (c) Running extrema consist of pieces of the input and constant
/// plateaus at local extremum values.
pub fn running_extremum_structure() -> Check {
    let mut r = runner(200, 3);
    r.run(&plf1_strategy(), |f| {
        for side in [Side::Prefix, Side::Suffix] {
            for dir in [Extremum::Min, Extremum::Max] {
                check_running(&f, side, dir)?;
            }
        }
        Ok(())
    })
    .map_err(|e| e.to_string())?;
    Ok("200 PLF1s, prefix and suffix, min and max".into())
}

/// A continuous PLF2 on the unit square: an affine base plus hinges
/// `s·max(0, ℓ)` along random lines.
#[derive(Clone, Debug)]
struct Hinged {
    base: (i64, i64, i64),
    hinges: Vec<((i64, i64, i64), i64)>,
}

impl Hinged {
    fn line(l: &(i64, i64, i64)) -> Affine {
        Affine::new(qi(l.0), qi(l.1), q(l.2, 8))
    }

    fn eval_f64(&self, x: f64, y: f64) -> f64 {
        let (a, b, c) = self.base;
        let mut v = a as f64 * x + b as f64 * y + c as f64;
        for (l, s) in &self.hinges {
            let h = l.0 as f64 * x + l.1 as f64 * y + l.2 as f64 / 8.0;
            v += *s as f64 * h.max(0.0);
        }
        v
    }

    /// Bound on the slope along `y`.
    fn lipschitz_y(&self) -> f64 {
        (self.base.1.abs() + self.hinges.iter().map(|(l, s)| (l.1 * s).abs()).sum::<i64>()) as f64
    }

    fn to_plf2(&self) -> Plf2 {
        let mut polys = vec![unit_square()];
        for (l, _) in &self.hinges {
            let line = Self::line(l);
            polys = polys
                .into_iter()
                .flat_map(|p| {
                    let (lo, hi) = p.split(&line);
                    lo.into_iter().chain(hi)
                })
                .collect();
        }
        let cells = polys
            .into_iter()
            .filter(|p| p.dim() == Some(2))
            .map(|poly| {
                let n = qi(poly.verts.len() as i64);
                let cx = poly.verts.iter().map(|v| v.0.clone()).sum::<Q>() / &n;
                let cy = poly.verts.iter().map(|v| v.1.clone()).sum::<Q>() / &n;
                let mut f = Affine::new(qi(self.base.0), qi(self.base.1), qi(self.base.2));
                for (l, s) in &self.hinges {
                    let line = Self::line(l);
                    if line.eval(&(cx.clone(), cy.clone())) > qi(0) {
                        let s = qi(*s);
                        f = f.add(&Affine::new(&line.a * &s, &line.b * &s, &line.c * &s));
                    }
                }
                Cell { poly, f }
            })
            .collect();
        Plf2::from_cells(unit_square(), cells)
    }
}

fn hinged_strategy() -> impl Strategy<Value = Hinged> {
    let line = (-4i64..=4, -4i64..=4, -16i64..=16).prop_filter("a line", |l| l.0 != 0 || l.1 != 0);
    ((-3i64..=3, -3i64..=3, -3i64..=3), vec((line, -3i64..=3), 1..=3)).prop_map(|(base, hinges)| Hinged { base, hinges })
}

/// (d) Fiber extrema against a brute-force search on the 1/1000 grid.
pub fn fiber_extremum_against_grid() -> Check {
    const STEPS: usize = 1000;
    let mut r = runner(100, 4);
    let worst = std::cell::Cell::new(0.0f64);
    r.run(&hinged_strategy(), |h| {
        let f = h.to_plf2();
        prop_assert!(f.check_continuity(), "generated PLF2 is discontinuous");
        let slack = h.lipschitz_y() / STEPS as f64 + 1e-9;
        for dir in [Extremum::Max, Extremum::Min] {
            let e = fiber_extremum(&f, dir).map_err(|e| TestCaseError::fail(e.to_string()))?;
            for i in 0..=STEPS {
                let x = i as f64 / STEPS as f64;
                let column = (0..=STEPS).map(|j| h.eval_f64(x, j as f64 / STEPS as f64));
                let brute = match dir {
                    Extremum::Max => column.fold(f64::NEG_INFINITY, f64::max),
                    Extremum::Min => column.fold(f64::INFINITY, f64::min),
                };
                let exact = match e.eval(&q(i as i64, STEPS as i64)).map_err(|e| TestCaseError::fail(e.to_string()))? {
                    Ext::Fin(v) => to_f64(&v),
                    Ext::Inf => return Err(TestCaseError::fail("infinite fiber extremum")),
                };
                let gap = match dir {
                    Extremum::Max => exact - brute,
                    Extremum::Min => brute - exact,
                };
                worst.set(worst.get().max(gap));
                prop_assert!((-1e-9..=slack).contains(&gap), "Δ = {x}: exact {exact}, grid {brute}");
            }
        }
        Ok(())
    })
    .map_err(|e| e.to_string())?;
    Ok(format!("100 PLF2s, largest gap to the grid {:.2e}", worst.get()))
}

/// (e) One extra visit before stopping leaves every root value unchanged.
pub fn threshold_is_stable() -> Check {
    let mut n = 0;
    for p in solvable() {
        let name = name_of(&p);
        let g = load(&p);
        let a = solve(&g, &Options::default()).map_err(|e| format!("{name}: {e}"))?.value;
        let b = solve(&g, &Options { extra_visits: 1, ..Options::default() }).map_err(|e| format!("{name}: {e}"))?.value;
        if a != b {
            return Err(format!("{name}: {a} at the threshold, {b} one visit later"));
        }
        n += 1;
    }
    Ok(format!("{n} games"))
}

type Part = (&'static str, fn() -> Check);

pub fn criterion_5() -> Check {
    let parts: [Part; 4] = [
        ("monotone runs, well-formed PLFs", runs_are_monotone_and_well_formed),
        ("running extremum", running_extremum_structure),
        ("fiber extremum", fiber_extremum_against_grid),
        ("threshold stability", threshold_is_stable),
    ];
    let mut out = Vec::new();
    for (title, f) in parts {
        out.push(format!("{title}: {}", f().map_err(|e| format!("{title}: {e}"))?));
    }
    Ok(out.join("; "))
}
