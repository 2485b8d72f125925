// SPDX-License-Identifier: Apache-2.0

//! Clock regions over fractional parts: ordered partitions
//! `(X_0, X_1, .., X_p, X_=1)`.

use std::collections::BTreeSet;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::game::{CmpOp, Guard, Valuation};
use crate::geom::{Poly, Pt};
use crate::rational::{q, qi, Q};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Region {
    pub n: usize,
    pub zero: Vec<usize>,
    pub blocks: Vec<Vec<usize>>,
    pub one: Vec<usize>,
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v
}

impl Region {
    /// Builds a region, dropping empty interior blocks.
    pub fn new(n: usize, zero: Vec<usize>, blocks: Vec<Vec<usize>>, one: Vec<usize>) -> Self {
        Region {
            n,
            zero: sorted(zero),
            blocks: blocks.into_iter().map(sorted).filter(|b| !b.is_empty()).collect(),
            one: sorted(one),
        }
    }

    /// The region of the valuation with every clock at 0.
    pub fn origin(n: usize) -> Self {
        Region::new(n, (0..n).collect(), Vec::new(), Vec::new())
    }

    /// The region containing a valuation of fractional parts in `[0,1]`.
    pub fn of(v: &[Q]) -> Result<Self> {
        let n = v.len();
        let mut zero = Vec::new();
        let mut one = Vec::new();
        let mut inner: Vec<(Q, usize)> = Vec::new();
        for (i, x) in v.iter().enumerate() {
            if x.is_zero() {
                zero.push(i);
            } else if x.is_one() {
                one.push(i);
            } else if *x > Q::zero() && *x < Q::one() {
                inner.push((x.clone(), i));
            } else {
                return Err(Error::Domain(format!("clock value {x} outside [0,1]")));
            }
        }
        inner.sort();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut last: Option<Q> = None;
        for (x, i) in inner {
            if last.as_ref() == Some(&x) {
                blocks.last_mut().expect("block").push(i);
            } else {
                blocks.push(vec![i]);
                last = Some(x);
            }
        }
        Ok(Region::new(n, zero, blocks, one))
    }

    /// Every region over `n` clocks; with `closed`, also those with clocks at 1.
    pub fn all(n: usize, closed: bool) -> Vec<Region> {
        let top = n + 1;
        let mut out = BTreeSet::new();
        let mut rank = vec![0usize; n];
        loop {
            let mut zero = Vec::new();
            let mut one = Vec::new();
            let mut levels: Vec<Vec<usize>> = vec![Vec::new(); top + 1];
            for (c, &k) in rank.iter().enumerate() {
                if k == 0 {
                    zero.push(c);
                } else if k == top {
                    one.push(c);
                } else {
                    levels[k].push(c);
                }
            }
            if closed || one.is_empty() {
                out.insert(Region::new(n, zero, levels, one));
            }
            let mut i = 0;
            while i < n && rank[i] == top {
                rank[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
            rank[i] += 1;
        }
        out.into_iter().collect()
    }

    pub fn p(&self) -> usize {
        self.blocks.len()
    }

    /// Dimension of the closure.
    pub fn dim(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_half_open(&self) -> bool {
        self.one.is_empty()
    }

    /// Clocks of the top interior block.
    pub fn upclock(&self) -> Vec<usize> {
        self.blocks.last().cloned().unwrap_or_default()
    }

    /// A point of the region.
    pub fn sample(&self) -> Vec<Q> {
        let mut v = vec![Q::zero(); self.n];
        let p = self.p() as i64;
        for (i, b) in self.blocks.iter().enumerate() {
            for &c in b {
                v[c] = q(i as i64 + 1, p + 1);
            }
        }
        for &c in &self.one {
            v[c] = qi(1);
        }
        v
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        v.len() == self.n && Region::of(v).map(|r| r == *self).unwrap_or(false)
    }

    pub fn closure_contains(&self, v: &[Q]) -> bool {
        if v.len() != self.n {
            return false;
        }
        if self.zero.iter().any(|&c| !v[c].is_zero()) || self.one.iter().any(|&c| !v[c].is_one()) {
            return false;
        }
        let mut prev = Q::zero();
        for b in &self.blocks {
            let x = &v[b[0]];
            if b.iter().any(|&c| v[c] != *x) || *x < prev {
                return false;
            }
            prev = x.clone();
        }
        prev <= Q::one()
    }

    /// Vertices of the closure, a simplex with `p + 1` corners.
    pub fn closure_vertices(&self) -> Vec<Vec<Q>> {
        (0..=self.p())
            .map(|j| {
                let mut v = vec![Q::zero(); self.n];
                for b in &self.blocks[j..] {
                    for &c in b {
                        v[c] = qi(1);
                    }
                }
                for &c in &self.one {
                    v[c] = qi(1);
                }
                v
            })
            .collect()
    }

    /// Closure as a planar polygon; two clocks only.
    pub fn closure_poly(&self) -> Poly {
        assert_eq!(self.n, 2, "planar closure needs two clocks");
        let pts: Vec<Pt> = self.closure_vertices().into_iter().map(|v| (v[0].clone(), v[1].clone())).collect();
        Poly::hull(pts)
    }

    /// Time-successors of a `[0,1)`-region, starting with the region itself.
    pub fn time_successors(&self) -> Result<Vec<Region>> {
        if !self.one.is_empty() {
            return Err(Error::Domain("time-successors need a region with no clock at 1".into()));
        }
        let mut out = vec![self.clone()];
        let mut cur = self.clone();
        loop {
            let next = if !cur.one.is_empty() {
                break;
            } else if !cur.zero.is_empty() {
                let mut blocks = vec![cur.zero.clone()];
                blocks.extend(cur.blocks.iter().cloned());
                Region::new(self.n, Vec::new(), blocks, Vec::new())
            } else if let Some((top, rest)) = cur.blocks.split_last() {
                Region::new(self.n, Vec::new(), rest.to_vec(), top.clone())
            } else {
                break;
            };
            out.push(next.clone());
            cur = next;
        }
        Ok(out)
    }

    /// `r[X:=0]`.
    pub fn reset(&self, xs: &[usize]) -> Region {
        let keep = |b: &Vec<usize>| b.iter().copied().filter(|c| !xs.contains(c)).collect::<Vec<_>>();
        let mut zero = self.zero.clone();
        zero.extend_from_slice(xs);
        Region::new(self.n, zero, self.blocks.iter().map(keep).collect(), keep(&self.one))
    }

    /// Clauses `C(r)` describing the region clock by clock.
    pub fn constraints(&self) -> Vec<Guard> {
        let mut g: Vec<Guard> = self.zero.iter().map(|&c| Guard::new(c, CmpOp::Eq, 0)).collect();
        for b in &self.blocks {
            for &c in b {
                g.push(Guard::new(c, CmpOp::Gt, 0));
                g.push(Guard::new(c, CmpOp::Lt, 1));
            }
        }
        g.extend(self.one.iter().map(|&c| Guard::new(c, CmpOp::Eq, 1)));
        g.sort();
        g
    }

    /// Whether a fractional clause holds on the region (clauses are constant
    /// on regions).
    pub fn satisfies(&self, g: &Guard) -> bool {
        g.holds(&Valuation(self.sample())).unwrap_or(false)
    }

    pub fn satisfies_all(&self, gs: &[Guard]) -> bool {
        gs.iter().all(|g| self.satisfies(g))
    }

    /// Regions meeting the topological closure of `self`.
    pub fn adherence(&self) -> Vec<Region> {
        Region::all(self.n, true).into_iter().filter(|s| self.closure_contains(&s.sample())).collect()
    }

    /// `[X_0, X_1, .., X_p, X_=1]` with clock names.
    pub fn to_names(&self, clocks: &[String]) -> Vec<Vec<String>> {
        let names = |b: &Vec<usize>| b.iter().map(|&c| clocks[c].clone()).collect::<Vec<_>>();
        let mut out = vec![names(&self.zero)];
        out.extend(self.blocks.iter().map(names));
        out.push(names(&self.one));
        out
    }

    pub fn from_names(parts: &[Vec<String>], clocks: &[String]) -> Result<Region> {
        if parts.len() < 2 {
            return Err(Error::Parse("region needs at least the X_0 and X_=1 parts".into()));
        }
        let idx = |s: &String| {
            clocks.iter().position(|c| c == s).ok_or_else(|| Error::Parse(format!("unknown clock `{s}` in region")))
        };
        let conv = |b: &Vec<String>| b.iter().map(idx).collect::<Result<Vec<_>>>();
        let zero = conv(&parts[0])?;
        let one = conv(&parts[parts.len() - 1])?;
        let blocks = parts[1..parts.len() - 1].iter().map(conv).collect::<Result<Vec<_>>>()?;
        let r = Region::new(clocks.len(), zero, blocks, one);
        let count: usize = r.zero.len() + r.one.len() + r.blocks.iter().map(|b| b.len()).sum::<usize>();
        if count != clocks.len() {
            return Err(Error::Parse("region is not a partition of the clocks".into()));
        }
        Ok(r)
    }
}
