//! Semirings over `f64` used to combine path weights.
//!
//! `plus` merges alternative paths and `times` chains consecutive edges. A
//! semiring is checked on construction against randomly sampled operands:
//! commutativity and associativity of `plus`, associativity of `times`, both
//! identities, two-sided distributivity, and annihilation by `zero`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::rng;

/// Number of random operand triples tested per law.
pub const ALGEBRA_CHECK_SAMPLES: usize = 200;
/// Relative tolerance of the algebra check for real operations.
pub const ALGEBRA_CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("semiring `{name}` violates {law} at ({u}, {v}, {w})")]
pub struct SemiringViolation {
    pub name: String,
    pub law: &'static str,
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SemiringKind {
    /// Reachability: `(or, and, 0, 1)`.
    Boolean,
    /// Fraction of a quantity carried along all paths: `(+, *, 0, 1)`.
    Pollution,
    /// Strongest single path: `(max, *, 0, 1)`.
    Influence,
    /// `(min, +, inf, 0)`.
    ShortestPath,
    /// Widest path: `(max, min, 0, inf)`.
    MaxCapacity,
    Custom,
}

impl SemiringKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Boolean => "boolean",
            Self::Pollution => "pollution",
            Self::Influence => "influence",
            Self::ShortestPath => "shortest-path",
            Self::MaxCapacity => "capacity",
            Self::Custom => "custom",
        }
    }
}

impl fmt::Display for SemiringKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SemiringKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "boolean" => Ok(Self::Boolean),
            "pollution" => Ok(Self::Pollution),
            "influence" => Ok(Self::Influence),
            "shortest-path" | "shortest_path" => Ok(Self::ShortestPath),
            "capacity" | "max-capacity" | "max_capacity" => Ok(Self::MaxCapacity),
            other => Err(format!("unknown semiring `{other}`")),
        }
    }
}

/// Where the algebra check draws its operands from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Boolean,
    /// Uniform in `[lo, hi]`, with the two identities mixed in.
    Interval(f64, f64),
    /// As `Interval`, plus `+inf` now and then.
    IntervalWithInfinity(f64, f64),
}

#[derive(Clone, Copy)]
pub struct Semiring {
    kind: SemiringKind,
    name: &'static str,
    plus: fn(f64, f64) -> f64,
    times: fn(f64, f64) -> f64,
    zero: f64,
    one: f64,
    /// Maps a DAG edge weight into the carrier set.
    embed: fn(f64) -> f64,
    domain: Domain,
}

impl fmt::Debug for Semiring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Semiring")
            .field("name", &self.name)
            .field("zero", &self.zero)
            .field("one", &self.one)
            .finish()
    }
}

impl PartialEq for Semiring {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.name == other.name
            && self.zero.to_bits() == other.zero.to_bits()
            && self.one.to_bits() == other.one.to_bits()
    }
}

fn bool_of(x: f64) -> bool {
    x != 0.0
}

fn identity(x: f64) -> f64 {
    x
}

impl Semiring {
    pub fn boolean() -> Self {
        Self {
            kind: SemiringKind::Boolean,
            name: "boolean",
            plus: |u, v| f64::from(u8::from(bool_of(u) || bool_of(v))),
            times: |u, v| f64::from(u8::from(bool_of(u) && bool_of(v))),
            zero: 0.0,
            one: 1.0,
            embed: |w| f64::from(u8::from(bool_of(w))),
            domain: Domain::Boolean,
        }
    }

    /// Sum over paths of the product of weights. Weights may be negative,
    /// which is what a linear structural equation model needs.
    pub fn pollution() -> Self {
        Self {
            kind: SemiringKind::Pollution,
            name: "pollution",
            plus: |u, v| u + v,
            times: |u, v| u * v,
            zero: 0.0,
            one: 1.0,
            embed: identity,
            domain: Domain::Interval(-1.0, 1.0),
        }
    }

    pub fn influence() -> Self {
        Self {
            kind: SemiringKind::Influence,
            name: "influence",
            plus: f64::max,
            times: |u, v| u * v,
            zero: 0.0,
            one: 1.0,
            embed: identity,
            domain: Domain::Interval(0.0, 1.0),
        }
    }

    pub fn shortest_path() -> Self {
        Self {
            kind: SemiringKind::ShortestPath,
            name: "shortest-path",
            plus: f64::min,
            times: |u, v| u + v,
            zero: f64::INFINITY,
            one: 0.0,
            embed: identity,
            domain: Domain::IntervalWithInfinity(0.0, 10.0),
        }
    }

    pub fn max_capacity() -> Self {
        Self {
            kind: SemiringKind::MaxCapacity,
            name: "capacity",
            plus: f64::max,
            times: f64::min,
            zero: 0.0,
            one: f64::INFINITY,
            embed: identity,
            domain: Domain::IntervalWithInfinity(0.0, 10.0),
        }
    }

    /// `(max, min)` on `[0, 1]`, the carrier of capacities mapped by
    /// `c -> exp(-1/c)`.
    pub fn unit_capacity() -> Self {
        Self {
            kind: SemiringKind::MaxCapacity,
            name: "unit-capacity",
            plus: f64::max,
            times: f64::min,
            zero: 0.0,
            one: 1.0,
            embed: identity,
            domain: Domain::Interval(0.0, 1.0),
        }
    }

    pub fn from_kind(kind: SemiringKind) -> Option<Self> {
        match kind {
            SemiringKind::Boolean => Some(Self::boolean()),
            SemiringKind::Pollution => Some(Self::pollution()),
            SemiringKind::Influence => Some(Self::influence()),
            SemiringKind::ShortestPath => Some(Self::shortest_path()),
            SemiringKind::MaxCapacity => Some(Self::max_capacity()),
            SemiringKind::Custom => None,
        }
    }

    /// A user-defined semiring; rejected unless it passes the algebra check.
    pub fn custom(
        name: &'static str,
        plus: fn(f64, f64) -> f64,
        times: fn(f64, f64) -> f64,
        zero: f64,
        one: f64,
        domain: Domain,
    ) -> Result<Self, SemiringViolation> {
        let s = Self {
            kind: SemiringKind::Custom,
            name,
            plus,
            times,
            zero,
            one,
            embed: identity,
            domain,
        };
        s.check_algebra(0)?;
        Ok(s)
    }

    pub fn kind(&self) -> SemiringKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn zero(&self) -> f64 {
        self.zero
    }

    pub fn one(&self) -> f64 {
        self.one
    }

    #[inline]
    pub fn plus(&self, u: f64, v: f64) -> f64 {
        (self.plus)(u, v)
    }

    #[inline]
    pub fn times(&self, u: f64, v: f64) -> f64 {
        (self.times)(u, v)
    }

    #[inline]
    pub fn embed(&self, edge_weight: f64) -> f64 {
        (self.embed)(edge_weight)
    }

    #[inline]
    pub fn is_zero(&self, x: f64) -> bool {
        x == self.zero
    }

    /// Whether the semiring's identities coincide with the reals' 0 and 1, so
    /// closure values can be used directly as matrix entries.
    pub fn is_real_compatible(&self) -> bool {
        self.zero == 0.0 && self.one == 1.0
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        let (lo, hi, with_inf) = match self.domain {
            Domain::Boolean => return f64::from(u8::from(rng.random_bool(0.5))),
            Domain::Interval(lo, hi) => (lo, hi, false),
            Domain::IntervalWithInfinity(lo, hi) => (lo, hi, true),
        };
        match rng.random_range(0..10) {
            0 => self.zero,
            1 => self.one,
            2 if with_inf => f64::INFINITY,
            _ if lo == hi => lo,
            _ => rng.random_range(lo..=hi),
        }
    }

    /// Tests every semiring law on [`ALGEBRA_CHECK_SAMPLES`] random triples.
    pub fn check_algebra(&self, seed: u64) -> Result<(), SemiringViolation> {
        let mut rng = rng::stream(seed, &[rng::tag::ALGEBRA_CHECK]);
        for _ in 0..ALGEBRA_CHECK_SAMPLES {
            let (u, v, w) = (self.sample(&mut rng), self.sample(&mut rng), self.sample(&mut rng));
            let fail = |law| SemiringViolation { name: self.name.to_string(), law, u, v, w };
            let (p, t) = (|a, b| self.plus(a, b), |a, b| self.times(a, b));
            let laws: [(&'static str, f64, f64); 10] = [
                ("commutativity of plus", p(u, v), p(v, u)),
                ("associativity of plus", p(p(u, v), w), p(u, p(v, w))),
                ("zero as plus identity", p(u, self.zero), u),
                ("associativity of times", t(t(u, v), w), t(u, t(v, w))),
                ("one as left times identity", t(self.one, u), u),
                ("one as right times identity", t(u, self.one), u),
                ("left distributivity", t(u, p(v, w)), p(t(u, v), t(u, w))),
                ("right distributivity", t(p(v, w), u), p(t(v, u), t(w, u))),
                ("left annihilation by zero", t(self.zero, u), self.zero),
                ("right annihilation by zero", t(u, self.zero), self.zero),
            ];
            for (law, lhs, rhs) in laws {
                if !approx_eq(lhs, rhs) {
                    return Err(fail(law));
                }
            }
        }
        Ok(())
    }
}

fn approx_eq(a: f64, b: f64) -> bool {
    if a == b {
        return true;
    }
    if !(a.is_finite() && b.is_finite()) {
        return false;
    }
    (a - b).abs() <= ALGEBRA_CHECK_TOL * a.abs().max(b.abs()).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_pass_algebra_check() {
        for s in [
            Semiring::boolean(),
            Semiring::pollution(),
            Semiring::influence(),
            Semiring::shortest_path(),
            Semiring::max_capacity(),
            Semiring::unit_capacity(),
        ] {
            for seed in 0..5 {
                s.check_algebra(seed).unwrap();
            }
        }
    }

    #[test]
    fn custom_rejects_non_distributive() {
        // (+, max) is not distributive
        let err = Semiring::custom("bad", |u, v| u + v, f64::max, 0.0, f64::NEG_INFINITY, Domain::Interval(-1.0, 1.0))
            .unwrap_err();
        assert_eq!(err.name, "bad");

        // (max, +) over reals with -inf as zero: the tropical max-plus semiring
        let ok = Semiring::custom(
            "max-plus",
            f64::max,
            |u, v| u + v,
            f64::NEG_INFINITY,
            0.0,
            Domain::Interval(-5.0, 5.0),
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn kind_parsing() {
        for k in [
            SemiringKind::Boolean,
            SemiringKind::Pollution,
            SemiringKind::Influence,
            SemiringKind::ShortestPath,
            SemiringKind::MaxCapacity,
        ] {
            assert_eq!(k.as_str().parse::<SemiringKind>().unwrap(), k);
        }
        assert!("tropical".parse::<SemiringKind>().is_err());
    }

    #[test]
    fn identities() {
        let sp = Semiring::shortest_path();
        assert_eq!(sp.plus(3.0, sp.zero()), 3.0);
        assert_eq!(sp.times(3.0, sp.one()), 3.0);
        assert!(!sp.is_real_compatible());
        assert!(Semiring::pollution().is_real_compatible());
        assert_eq!(Semiring::boolean().embed(-0.3), 1.0);
    }
}
