// SPDX-License-Identifier: Apache-2.0

//! Exact rationals and the extended value type `Q ∪ {+∞}`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

/// Parses `"p/q"`, `"p"` or `"-p/q"`.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n = BigInt::from_str(n).map_err(|_| Error::Parse(format!("bad rational `{s}`")))?;
    let d = BigInt::from_str(d).map_err(|_| Error::Parse(format!("bad rational `{s}`")))?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in `{s}`")));
    }
    Ok(Q::new(n, d))
}

/// Formats as `p/q`, or `p` for integers.
pub fn fmt_q(v: &Q) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

pub fn to_f64(v: &Q) -> f64 {
    use num_traits::ToPrimitive;
    v.to_f64().unwrap_or(f64::NAN)
}

pub fn abs(v: &Q) -> Q {
    v.abs()
}

/// `Q ∪ {+∞}` with the usual order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ext {
    Fin(Q),
    Inf,
}

impl Ext {
    pub fn is_inf(&self) -> bool {
        matches!(self, Ext::Inf)
    }

    pub fn finite(&self) -> Option<&Q> {
        match self {
            Ext::Fin(v) => Some(v),
            Ext::Inf => None,
        }
    }

    pub fn add_q(&self, v: &Q) -> Ext {
        match self {
            Ext::Fin(a) => Ext::Fin(a + v),
            Ext::Inf => Ext::Inf,
        }
    }

    pub fn min(self, other: Ext) -> Ext {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Ext) -> Ext {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl From<Q> for Ext {
    fn from(v: Q) -> Self {
        Ext::Fin(v)
    }
}

impl PartialOrd for Ext {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ext {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Ext::Fin(a), Ext::Fin(b)) => a.cmp(b),
            (Ext::Fin(_), Ext::Inf) => Ordering::Less,
            (Ext::Inf, Ext::Fin(_)) => Ordering::Greater,
            (Ext::Inf, Ext::Inf) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ext::Fin(v) => write!(f, "{}", fmt_q(v)),
            Ext::Inf => write!(f, "+inf"),
        }
    }
}

/// Serde adapter for rationals written as `"p/q"` strings.
pub mod serde_q {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).map_err(serde::de::Error::custom)
    }
}
