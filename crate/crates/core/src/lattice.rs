//! Integer lattice points and finite regions.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A site of the integer lattice. Ordering is lexicographic on `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LatticePoint {
    pub x: i64,
    pub y: i64,
}

impl LatticePoint {
    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }
}

impl Add for LatticePoint {
    type Output = LatticePoint;

    fn add(self, rhs: LatticePoint) -> LatticePoint {
        LatticePoint::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// Parses `"x,y"` (surrounding parentheses and whitespace are accepted).
impl FromStr for LatticePoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let (x, y) = inner
            .split_once(',')
            .or_else(|| inner.split_once(':'))
            .ok_or_else(|| Error::Argument(format!("expected `x,y`, got `{s}`")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| Error::Argument(format!("bad lattice coordinate `{t}` in `{s}`")))
        };
        Ok(LatticePoint::new(parse(x)?, parse(y)?))
    }
}

/// Offsets of the eight neighbours `s_1 .. s_8`, counter-clockwise from east.
pub const NEIGHBOR_OFFSETS: [LatticePoint; 8] = [
    LatticePoint::new(1, 0),
    LatticePoint::new(1, 1),
    LatticePoint::new(0, 1),
    LatticePoint::new(-1, 1),
    LatticePoint::new(-1, 0),
    LatticePoint::new(-1, -1),
    LatticePoint::new(0, -1),
    LatticePoint::new(1, -1),
];

/// The eight neighbours of `site`, in order `s_1 .. s_8`.
pub fn neighbor_points(site: LatticePoint) -> [LatticePoint; 8] {
    NEIGHBOR_OFFSETS.map(|o| site + o)
}

/// The eight neighbours of `site` as a region. The region iterates in
/// lattice order, use [`neighbor_points`] for the `s_1 .. s_8` order.
pub fn neighbors(site: LatticePoint) -> Region {
    Region {
        points: neighbor_points(site).into_iter().collect(),
    }
}

/// A finite, duplicate-free set of lattice points with deterministic
/// (lexicographic) iteration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Region {
    points: BTreeSet<LatticePoint>,
}

impl Region {
    pub fn new<I: IntoIterator<Item = LatticePoint>>(points: I) -> Self {
        Self {
            points: points.into_iter().collect(),
        }
    }

    pub fn singleton(p: LatticePoint) -> Self {
        Self::new([p])
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        self.points.contains(p)
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &LatticePoint> + '_ {
        self.points.iter()
    }

    pub fn to_vec(&self) -> Vec<LatticePoint> {
        self.points.iter().copied().collect()
    }

    /// `self ∪ {p}`.
    pub fn with(&self, p: LatticePoint) -> Region {
        let mut points = self.points.clone();
        points.insert(p);
        Region { points }
    }

    pub fn union(&self, other: &Region) -> Region {
        Region {
            points: self.points.union(&other.points).copied().collect(),
        }
    }

    pub fn is_subset(&self, other: &Region) -> bool {
        self.points.is_subset(&other.points)
    }

    pub fn translate(&self, by: LatticePoint) -> Region {
        Region::new(self.points.iter().map(|&p| p + by))
    }

    pub(crate) fn require_nonempty(&self, what: &str) -> Result<()> {
        if self.is_empty() {
            Err(Error::Argument(format!("{what} must contain at least one site")))
        } else {
            Ok(())
        }
    }
}

impl FromIterator<LatticePoint> for Region {
    fn from_iter<I: IntoIterator<Item = LatticePoint>>(iter: I) -> Self {
        Region::new(iter)
    }
}

impl<'a> IntoIterator for &'a Region {
    type Item = &'a LatticePoint;
    type IntoIter = std::collections::btree_set::Iter<'a, LatticePoint>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

/// Parses `"x,y;x,y;..."`.
impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let points = s
            .split(';')
            .filter(|t| !t.trim().is_empty())
            .map(str::parse)
            .collect::<Result<BTreeSet<_>>>()?;
        if points.is_empty() {
            return Err(Error::Argument(format!("empty region `{s}`")));
        }
        Ok(Region { points })
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.points.iter().map(|p| format!("{},{}", p.x, p.y)).collect();
        f.write_str(&parts.join(";"))
    }
}
