// SPDX-License-Identifier: Apache-2.0

//! JSON game files.
//!
//! ```json
//! {
//!   "clocks": ["x", "y"],
//!   "locations": [{"id": "a", "owner": "min", "goal": false, "weight": 1},
//!                 {"id": "g", "owner": "min", "goal": true}],
//!   "transitions": [{"from": "a", "to": "g", "guards": [["x", "=", 1], ["y", "<=", 1]],
//!                    "resets": [], "weight": 0}],
//!   "initial": {"location": "a", "valuation": {"x": "0", "y": "1/2"}}
//! }
//! ```
//!
//! Goals may carry an output function under `"outputs": {"g": <plf2>}`.
//! Region games are written in the same format with a `region` field per
//! location and a `mid` field per transition.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{CmpOp, Configuration, Game, Guard, Location, Owner, Transition, Valuation};
use crate::plf2::{Plf2, Plf2Wire};
use crate::rational::{fmt_q, parse_q};
use crate::region::Region;
use crate::region_game::{RLoc, RTrans, RegionGame};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocationFile {
    pub id: String,
    pub owner: String,
    #[serde(default)]
    pub goal: bool,
    #[serde(default)]
    pub weight: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<Vec<Vec<String>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransitionFile {
    pub from: String,
    pub to: String,
    #[serde(default)]
    pub guards: Vec<(String, String, u32)>,
    #[serde(default)]
    pub resets: Vec<String>,
    #[serde(default)]
    pub weight: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mid: Option<Vec<Vec<String>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InitialFile {
    pub location: String,
    #[serde(default)]
    pub valuation: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GameFile {
    pub clocks: Vec<String>,
    pub locations: Vec<LocationFile>,
    #[serde(default)]
    pub transitions: Vec<TransitionFile>,
    pub initial: InitialFile,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub outputs: BTreeMap<String, Plf2Wire>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub trimmed: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub relaxed: bool,
}

fn is_false(b: &bool) -> bool {
    !*b
}

fn owner_of(s: &str) -> Result<Owner> {
    match s.to_ascii_lowercase().as_str() {
        "min" => Ok(Owner::Min),
        "max" => Ok(Owner::Max),
        _ => Err(Error::Parse(format!("unknown owner `{s}`"))),
    }
}

fn owner_name(o: Owner) -> String {
    match o {
        Owner::Min => "min".into(),
        Owner::Max => "max".into(),
    }
}

impl GameFile {
    pub fn to_game(&self) -> Result<Game> {
        let clock = |name: &str| {
            self.clocks
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::Parse(format!("unknown clock `{name}`")))
        };
        let mut ids = BTreeMap::new();
        for (i, l) in self.locations.iter().enumerate() {
            if ids.insert(l.id.clone(), i).is_some() {
                return Err(Error::Parse(format!("duplicate location `{}`", l.id)));
            }
        }
        let loc = |name: &str| ids.get(name).copied().ok_or_else(|| Error::Parse(format!("unknown location `{name}`")));
        let locations = self
            .locations
            .iter()
            .map(|l| Ok(Location::new(l.id.clone(), owner_of(&l.owner)?, l.goal, l.weight)))
            .collect::<Result<Vec<_>>>()?;
        let mut transitions = Vec::with_capacity(self.transitions.len());
        for t in &self.transitions {
            let guards = t
                .guards
                .iter()
                .map(|(c, op, b)| Ok(Guard::new(clock(c)?, CmpOp::parse(op)?, *b)))
                .collect::<Result<Vec<_>>>()?;
            let resets = t.resets.iter().map(|c| clock(c)).collect::<Result<Vec<_>>>()?;
            transitions.push(Transition::new(loc(&t.from)?, loc(&t.to)?, guards, resets, t.weight));
        }
        for c in self.initial.valuation.keys() {
            clock(c)?;
        }
        let valuation = self
            .clocks
            .iter()
            .map(|c| self.initial.valuation.get(c).map(|s| parse_q(s)).unwrap_or_else(|| parse_q("0")))
            .collect::<Result<Vec<_>>>()?;
        let initial = Configuration { location: loc(&self.initial.location)?, valuation: Valuation(valuation) };
        let mut g = Game::new(self.clocks.clone(), locations, transitions, initial);
        for (name, w) in &self.outputs {
            g.outputs.insert(loc(name)?, Plf2::from_wire(w)?);
        }
        g.validate()?;
        Ok(g)
    }

    pub fn from_game(g: &Game) -> GameFile {
        let names: Vec<String> = g.locations.iter().map(|l| l.name.clone()).collect();
        GameFile {
            clocks: g.clocks.clone(),
            locations: g
                .locations
                .iter()
                .map(|l| LocationFile {
                    id: l.name.clone(),
                    owner: owner_name(l.owner),
                    goal: l.goal,
                    weight: l.weight,
                    region: None,
                })
                .collect(),
            transitions: g
                .transitions
                .iter()
                .map(|t| TransitionFile {
                    from: names[t.from].clone(),
                    to: names[t.to].clone(),
                    guards: t
                        .guards
                        .iter()
                        .map(|gd| (g.clocks[gd.clock.0].clone(), gd.op.symbol().to_string(), gd.bound))
                        .collect(),
                    resets: t.resets.iter().map(|c| g.clocks[c.0].clone()).collect(),
                    weight: t.weight,
                    mid: None,
                })
                .collect(),
            initial: InitialFile {
                location: names[g.initial.location].clone(),
                valuation: g.clocks.iter().cloned().zip(g.initial.valuation.0.iter().map(fmt_q)).collect(),
            },
            outputs: g.outputs.iter().map(|(l, f)| (names[*l].clone(), f.to_wire())).collect(),
            trimmed: false,
            relaxed: false,
        }
    }

    /// A region game as a game file over fractional clocks, with regions.
    pub fn from_region_game(rg: &RegionGame) -> GameFile {
        let mut f = GameFile::from_game(&rg.to_game());
        for (lf, l) in f.locations.iter_mut().zip(&rg.locs) {
            lf.region = Some(l.reg.to_names(&rg.clocks));
        }
        for (tf, t) in f.transitions.iter_mut().zip(&rg.trans) {
            tf.mid = Some(t.mid.to_names(&rg.clocks));
        }
        f.trimmed = rg.trimmed;
        f.relaxed = rg.relaxed;
        f
    }

    /// Reads back a file written by [`GameFile::from_region_game`]. Every
    /// location needs a `region` and every transition a `mid`.
    pub fn to_region_game(&self) -> Result<RegionGame> {
        let g = self.to_game()?;
        let mut locs = Vec::with_capacity(g.locations.len());
        for (i, (lf, l)) in self.locations.iter().zip(&g.locations).enumerate() {
            let parts = lf.region.as_ref().ok_or_else(|| Error::Parse(format!("location `{}` has no region", lf.id)))?;
            let reg = Region::from_names(parts, &self.clocks)?;
            let output = g.outputs.get(&i).cloned();
            locs.push(RLoc { name: l.name.clone(), owner: l.owner, goal: l.goal, weight: l.weight, reg, base: i, output });
        }
        let mut trans = Vec::with_capacity(g.transitions.len());
        for (tf, t) in self.transitions.iter().zip(&g.transitions) {
            let parts = tf.mid.as_ref().ok_or_else(|| Error::Parse(format!("transition {} -> {} has no mid region", tf.from, tf.to)))?;
            trans.push(RTrans {
                from: t.from,
                to: t.to,
                mid: Region::from_names(parts, &self.clocks)?,
                guards: t.guards.clone(),
                resets: t.resets.iter().map(|c| c.0).collect(),
                weight: t.weight,
            });
        }
        let init_val = g.initial.valuation.0.clone();
        if !locs[g.initial.location].reg.closure_contains(&init_val) {
            return Err(Error::Parse("initial valuation outside the initial region".into()));
        }
        Ok(RegionGame {
            clocks: self.clocks.clone(),
            locs,
            trans,
            initial: g.initial.location,
            init_val,
            trimmed: self.trimmed,
            relaxed: self.relaxed,
        })
    }
}

pub fn parse_game(text: &str) -> Result<Game> {
    let f: GameFile = serde_json::from_str(text)?;
    f.to_game()
}

pub fn write_game(g: &Game) -> Result<String> {
    Ok(serde_json::to_string_pretty(&GameFile::from_game(g))?)
}

pub fn load_game(path: &std::path::Path) -> Result<Game> {
    parse_game(&std::fs::read_to_string(path)?)
}

pub fn parse_region_game(text: &str) -> Result<RegionGame> {
    let f: GameFile = serde_json::from_str(text)?;
    f.to_region_game()
}

pub fn write_region_game(rg: &RegionGame) -> Result<String> {
    Ok(serde_json::to_string_pretty(&GameFile::from_region_game(rg))?)
}
