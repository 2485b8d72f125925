// SPDX-License-Identifier: Apache-2.0

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use wtg::cycle::{build_corner_point, check_almost_non_zeno, AnzReport};
use wtg::io::{load_game, GameFile};
use wtg::normalize::{check_bounded, normalize_01};
use wtg::oracle::bounded_values;
use wtg::rational::{fmt_q, parse_q};
use wtg::region_game::{build_region_wtg, trim};
use wtg::solver::{decide_value, format_value, pad_clocks, prepare, solve, Options, Verdict};
use wtg::{Error, Result};

#[derive(Parser)]
#[command(name = "wtg", version, about = "Exact values of two-clock weighted timed games")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute the value of a game and optionally compare it to a threshold.
    Solve(SolveArgs),
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    /// Threshold `p/q` for the decision line.
    #[arg(long)]
    threshold: Option<String>,
    /// Only run the almost non-Zeno check.
    #[arg(long)]
    check_anz: bool,
    /// Write the trimmed region game as JSON (`-` for stdout).
    #[arg(long, num_args = 0..=1, default_missing_value = "-")]
    dump_regions: Option<String>,
    /// Write kernel fixed points and the root value function as JSON.
    #[arg(long)]
    dump_value_functions: Option<PathBuf>,
    /// Evaluate the grid game instead of solving exactly.
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value_t = 16)]
    grid: i64,
    /// Horizon of the grid game; defaults to four moves per region-location.
    #[arg(long)]
    horizon: Option<usize>,
    /// Write the last layer of the grid game as CSV.
    #[arg(long)]
    oracle_dump: Option<PathBuf>,
    #[arg(long, default_value_t = 200_000)]
    budget_cycles: usize,
    #[arg(long, default_value_t = 10_000)]
    k_cap: usize,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NotAlmostNonZeno(_) => 2,
        Error::Parse(_)
        | Error::Io(_)
        | Error::Structural(_)
        | Error::Domain(_)
        | Error::UnboundedClock(_)
        | Error::MoreThanTwoClocks(_)
        | Error::MaxControlledCycle(_) => 3,
        _ => 1,
    }
}

fn write_out(target: &str, text: &str) -> Result<()> {
    if target == "-" {
        println!("{text}");
        Ok(())
    } else {
        Ok(std::fs::write(target, text)?)
    }
}

fn region_game_json(path: &Path) -> Result<String> {
    let g = pad_clocks(&load_game(path)?)?;
    check_bounded(&g)?;
    let rg = trim(&build_region_wtg(&normalize_01(&g)?.game)?)?.prune_unreachable();
    Ok(serde_json::to_string_pretty(&GameFile::from_region_game(&rg))?)
}

fn dump_values(path: &Path, v: &Verdict) -> Result<()> {
    let runs: Vec<_> = v
        .diagnostics
        .tree
        .kernel_runs
        .iter()
        .map(|r| {
            let values: serde_json::Map<String, serde_json::Value> =
                r.values.iter().map(|(n, f)| (n.clone(), f.to_wire())).collect();
            json!({ "entrance": r.entrance, "iterations": r.steps, "values": values })
        })
        .collect();
    let doc = json!({
        "value": format_value(&v.value),
        "root": v.root.as_ref().map(|f| serde_json::to_value(f.to_wire()).unwrap_or_default()),
        "kernels": runs,
    });
    Ok(std::fs::write(path, serde_json::to_string_pretty(&doc)?)?)
}

fn run(a: &SolveArgs) -> Result<()> {
    let threshold = a.threshold.as_deref().map(parse_q).transpose()?;
    if let Some(target) = &a.dump_regions {
        write_out(target, &region_game_json(&a.file)?)?;
    }
    let g = load_game(&a.file)?;
    if a.check_anz {
        let pg = pad_clocks(&g)?;
        check_bounded(&pg)?;
        let rg = trim(&build_region_wtg(&normalize_01(&pg)?.game)?)?.prune_unreachable();
        return match check_almost_non_zeno(&rg, &build_corner_point(&rg), a.budget_cycles) {
            AnzReport::AlmostNonZeno { kappa, cycles } => {
                println!("almost-non-zeno = yes (kappa = {}, cycles = {})", fmt_q(&kappa), cycles);
                Ok(())
            }
            AnzReport::Violation { cycle, .. } => {
                let names = cycle.iter().map(|&t| rg.locs[rg.trans[t].from].name.clone()).collect();
                Err(Error::NotAlmostNonZeno(names))
            }
            AnzReport::BudgetExceeded(b) => Err(Error::BudgetExceeded(b)),
        };
    }
    if a.oracle {
        let k = match a.horizon {
            Some(k) => k,
            None => 4 * prepare(&g, &Options { budget_cycles: a.budget_cycles, ..Default::default() })?.game.locs.len(),
        };
        let t = bounded_values(&g, a.grid, k)?;
        let v = t.value(&g.initial, k)?;
        println!("oracle(N={}, K={}) = {}", a.grid, k, format_value(&v));
        if let Some(c) = &threshold {
            println!("decision(th={}) = {}", fmt_q(c), decide_value(&v, c));
        }
        if let Some(p) = &a.oracle_dump {
            let mut f = std::fs::File::create(p)?;
            t.dump_csv(&g, k, &mut f)?;
            f.flush()?;
        }
        return Ok(());
    }
    let opts = Options { budget_cycles: a.budget_cycles, k_cap: a.k_cap, ..Default::default() };
    let v = solve(&g, &opts)?;
    println!("value = {}", format_value(&v.value));
    if let Some(c) = &threshold {
        println!("decision(th={}) = {}", fmt_q(c), decide_value(&v.value, c));
    }
    let d = &v.diagnostics;
    println!(
        "regions = {}, kernels = {}, stop-visits = {}, tree-nodes = {}, kernel-nodes = {}, stopped = {}, vi-steps = {}",
        d.region_locations,
        d.kernel_components,
        d.stop_visits,
        d.tree.nodes,
        d.tree.kernel_nodes,
        d.tree.stopped_leaves,
        d.tree.max_vi_steps
    );
    if let Some(p) = &a.dump_value_functions {
        dump_values(p, &v)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Cmd::Solve(a) = &cli.cmd;
    match run(a) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
