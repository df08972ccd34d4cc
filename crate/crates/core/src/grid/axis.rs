use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Comparison used for physical-to-abstract reverse lookup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cmp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Cmp {
    pub const ALL: [Cmp; 5] = [Cmp::Lt, Cmp::Le, Cmp::Eq, Cmp::Ge, Cmp::Gt];

    pub fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            Cmp::Lt => lhs < rhs,
            Cmp::Le => lhs <= rhs,
            Cmp::Eq => lhs == rhs,
            Cmp::Ge => lhs >= rhs,
            Cmp::Gt => lhs > rhs,
        }
    }
}

impl FromStr for Cmp {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "<" => Cmp::Lt,
            "<=" => Cmp::Le,
            "==" => Cmp::Eq,
            ">=" => Cmp::Ge,
            ">" => Cmp::Gt,
            _ => return Err(Error::InvalidGrid(format!("unknown comparison '{s}'"))),
        })
    }
}

impl fmt::Display for Cmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Eq => "==",
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
        })
    }
}

/// One axis of a periodic grid: `coords` repeat every `period` units.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawAxis")]
pub struct OneDimGrid {
    period: i64,
    coords: Vec<i64>,
}

#[derive(Deserialize)]
struct RawAxis {
    period: i64,
    coords: Vec<i64>,
}

impl TryFrom<RawAxis> for OneDimGrid {
    type Error = Error;
    fn try_from(raw: RawAxis) -> Result<Self> {
        OneDimGrid::new(raw.period, raw.coords)
    }
}

impl OneDimGrid {
    pub fn new(period: i64, coords: Vec<i64>) -> Result<Self> {
        if period <= 0 {
            return Err(Error::InvalidGrid(format!("period {period} must be positive")));
        }
        if coords.is_empty() {
            return Err(Error::InvalidGrid("grid needs at least one coordinate".into()));
        }
        if coords[0] < 0 || *coords.last().unwrap() >= period {
            return Err(Error::InvalidGrid(format!(
                "coordinates must lie in [0, {period})"
            )));
        }
        if coords.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid("coordinates must be strictly increasing".into()));
        }
        Ok(Self { period, coords })
    }

    /// Grid with a single coordinate at 0 repeating every `pitch`.
    pub fn uniform(pitch: i64) -> Result<Self> {
        Self::new(pitch, vec![0])
    }

    pub fn period(&self) -> i64 {
        self.period
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    /// Coordinates per period.
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Abstract index to physical coordinate.
    pub fn phys(&self, i: i64) -> i64 {
        let r = self.coords.len() as i64;
        self.period * i.div_euclid(r) + self.coords[i.rem_euclid(r) as usize]
    }

    /// Reverse mapping: the abstract index selected by `op` against `value`.
    ///
    /// `>=`/`>` give the smallest index whose coordinate satisfies the
    /// comparison, `<=`/`<` the largest, and `==` the exact index.
    pub fn index_where(&self, op: Cmp, value: i64) -> Result<i64> {
        let r = self.coords.len() as i64;
        let q = value.div_euclid(self.period);
        let rem = value - q * self.period;
        // Count of coordinates in this period below (or at) rem. A count of r
        // rolls over into the next period, a count of 0 with -1 into the previous.
        let below = self.coords.partition_point(|&c| c < rem) as i64;
        let at_or_below = self.coords.partition_point(|&c| c <= rem) as i64;
        Ok(match op {
            Cmp::Ge => q * r + below,
            Cmp::Gt => q * r + at_or_below,
            Cmp::Le => q * r + at_or_below - 1,
            Cmp::Lt => q * r + below - 1,
            Cmp::Eq => {
                if at_or_below == below {
                    return Err(Error::NotOnGrid(value));
                }
                q * r + below
            }
        })
    }

    /// Inclusive abstract index range of grid points within `[lo, hi]`, if any.
    pub fn indices_within(&self, lo: i64, hi: i64) -> Option<(i64, i64)> {
        let first = self.index_where(Cmp::Ge, lo).ok()?;
        let last = self.index_where(Cmp::Le, hi).ok()?;
        (first <= last).then_some((first, last))
    }

    /// Physical coordinates for the stepped abstract range `[start, stop)`.
    pub fn slice(&self, start: i64, stop: i64, step: i64) -> Vec<i64> {
        super::mapping::slice_indices(start, stop, step)
            .map(|i| self.phys(i))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g() -> OneDimGrid {
        OneDimGrid::new(100, vec![0, 40, 85]).unwrap()
    }

    #[test]
    fn phys_examples() {
        assert_eq!(g().phys(0), 0);
        assert_eq!(g().phys(4), 140);
        assert_eq!(g().phys(-1), -15);
    }

    #[test]
    fn index_where_examples() {
        assert_eq!(g().index_where(Cmp::Ge, 130).unwrap(), 4);
        assert_eq!(g().index_where(Cmp::Ge, 0).unwrap(), 0);
        assert_eq!(g().index_where(Cmp::Eq, 85).unwrap(), 2);
        assert!(matches!(g().index_where(Cmp::Eq, 86), Err(Error::NotOnGrid(86))));
        assert_eq!(g().index_where(Cmp::Lt, 0).unwrap(), -1);
        assert_eq!(g().index_where(Cmp::Gt, 85).unwrap(), 3);
        assert_eq!(g().index_where(Cmp::Le, 99).unwrap(), 2);
    }

    #[test]
    fn slice_on_grid() {
        assert_eq!(g().slice(2, 6, 1), vec![85, 100, 140, 185]);
        assert_eq!(g().slice(0, -3, -1), vec![0, -15, -60]);
    }

    #[test]
    fn invalid_axes_rejected() {
        assert!(OneDimGrid::new(0, vec![0]).is_err());
        assert!(OneDimGrid::new(100, vec![]).is_err());
        assert!(OneDimGrid::new(100, vec![0, 100]).is_err());
        assert!(OneDimGrid::new(100, vec![10, 10]).is_err());
        assert!(OneDimGrid::new(100, vec![-1, 10]).is_err());
        assert!(serde_json::from_str::<OneDimGrid>(r#"{"period":10,"coords":[5,3]}"#).is_err());
    }

    fn arb_grid() -> impl Strategy<Value = OneDimGrid> {
        (1i64..200)
            .prop_flat_map(|period| {
                (Just(period), proptest::collection::btree_set(0..period, 1..8))
            })
            .prop_map(|(p, c)| OneDimGrid::new(p, c.into_iter().collect()).unwrap())
    }

    proptest! {
        #[test]
        fn phys_monotone_and_periodic(g in arb_grid(), i in -50i64..50) {
            let r = g.len() as i64;
            prop_assert!(g.phys(i) < g.phys(i + 1));
            prop_assert_eq!(g.phys(i + r) - g.phys(i), g.period());
        }

        #[test]
        fn reverse_mapping_round_trips(g in arb_grid(), i in -20i64..=20, v in -1000i64..1000) {
            prop_assert_eq!(g.index_where(Cmp::Ge, g.phys(i)).unwrap(), i);
            prop_assert_eq!(g.index_where(Cmp::Eq, g.phys(i)).unwrap(), i);
            let k = g.index_where(Cmp::Ge, v).unwrap();
            prop_assert!(g.phys(k) >= v);
            prop_assert!(g.phys(k - 1) < v);
        }
    }
}
