use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A non-empty list indexed cyclically over all integers.
///
/// Negative indices wrap from the end: with `r` elements, index `i` resolves
/// to element `i.rem_euclid(r)`, so `-1` is the last element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<T>", into = "Vec<T>")]
pub struct CircularMapping<T: Clone> {
    elements: Vec<T>,
}

impl<T: Clone> TryFrom<Vec<T>> for CircularMapping<T> {
    type Error = Error;
    fn try_from(elements: Vec<T>) -> Result<Self> {
        Self::new(elements)
    }
}

impl<T: Clone> From<CircularMapping<T>> for Vec<T> {
    fn from(m: CircularMapping<T>) -> Self {
        m.elements
    }
}

impl<T: Clone> CircularMapping<T> {
    pub fn new(elements: Vec<T>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::EmptyMapping);
        }
        Ok(Self { elements })
    }

    /// Number of elements in one period.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn elements(&self) -> &[T] {
        &self.elements
    }

    /// Position inside one period for an arbitrary integer index.
    pub fn wrap(&self, i: i64) -> usize {
        i.rem_euclid(self.elements.len() as i64) as usize
    }

    pub fn get(&self, i: i64) -> &T {
        &self.elements[self.wrap(i)]
    }

    /// Half-open slice `[start, stop)` with the given step, following the
    /// cyclic indexing for every visited index.
    ///
    /// # Panics
    ///
    /// Panics if `step` is zero.
    pub fn slice(&self, start: i64, stop: i64, step: i64) -> Vec<T> {
        slice_indices(start, stop, step)
            .map(|i| self.get(i).clone())
            .collect()
    }

    /// Element-wise map keeping the cyclic structure.
    pub fn map<U: Clone>(&self, f: impl FnMut(&T) -> U) -> CircularMapping<U> {
        CircularMapping {
            elements: self.elements.iter().map(f).collect(),
        }
    }
}

/// Indices visited by a half-open stepped range.
pub fn slice_indices(start: i64, stop: i64, step: i64) -> impl Iterator<Item = i64> {
    assert!(step != 0, "slice step must be nonzero");
    let mut i = start;
    std::iter::from_fn(move || {
        let inside = if step > 0 { i < stop } else { i > stop };
        inside.then(|| {
            let cur = i;
            i += step;
            cur
        })
    })
}

/// Two-dimensional cyclic array: a cyclic list of equally sized cyclic rows.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<T>>", into = "Vec<Vec<T>>")]
pub struct CircularMappingArray<T: Clone> {
    rows: CircularMapping<CircularMapping<T>>,
}

impl<T: Clone> TryFrom<Vec<Vec<T>>> for CircularMappingArray<T> {
    type Error = Error;
    fn try_from(rows: Vec<Vec<T>>) -> Result<Self> {
        Self::new(rows)
    }
}

impl<T: Clone> From<CircularMappingArray<T>> for Vec<Vec<T>> {
    fn from(a: CircularMappingArray<T>) -> Self {
        a.rows.elements.into_iter().map(Vec::from).collect()
    }
}

impl<T: Clone> CircularMappingArray<T> {
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        let expected = rows.first().map(Vec::len).ok_or(Error::EmptyMapping)?;
        let rows = rows
            .into_iter()
            .map(|row| {
                if row.len() != expected {
                    return Err(Error::RaggedArray {
                        expected,
                        found: row.len(),
                    });
                }
                CircularMapping::new(row)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            rows: CircularMapping::new(rows)?,
        })
    }

    /// `(rows, columns)` of one period.
    pub fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.rows.get(0).len())
    }

    pub fn get(&self, i: i64, j: i64) -> &T {
        self.rows.get(i).get(j)
    }

    pub fn slice(
        &self,
        rows: (i64, i64, i64),
        cols: (i64, i64, i64),
    ) -> Vec<Vec<T>> {
        slice_indices(rows.0, rows.1, rows.2)
            .map(|i| self.rows.get(i).slice(cols.0, cols.1, cols.2))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn abc() -> CircularMapping<char> {
        CircularMapping::new(vec!['a', 'b', 'c']).unwrap()
    }

    #[test]
    fn get_examples() {
        let m = abc();
        assert_eq!(*m.get(0), 'a');
        assert_eq!(*m.get(4), 'b');
        assert_eq!(*m.get(-1), 'c');
        assert_eq!(*m.get(-3), 'a');
        assert_eq!(*m.get(-4), 'c');
    }

    #[test]
    fn slice_examples() {
        let m = abc();
        assert_eq!(m.slice(0, 3, 1), vec!['a', 'b', 'c']);
        assert_eq!(m.slice(2, 6, 1), vec!['c', 'a', 'b', 'c']);
        assert_eq!(m.slice(4, 1, -2), vec!['b', 'c']);
        assert!(m.slice(3, 0, 1).is_empty());
    }

    #[test]
    fn empty_and_ragged_rejected() {
        assert!(matches!(
            CircularMapping::<u8>::new(vec![]),
            Err(Error::EmptyMapping)
        ));
        assert!(matches!(
            CircularMappingArray::new(vec![vec![1, 2], vec![3]]),
            Err(Error::RaggedArray { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn array_wraps_both_axes() {
        let a = CircularMappingArray::new(vec![vec![1, 2, 3], vec![4, 5, 6]]).unwrap();
        assert_eq!(a.shape(), (2, 3));
        assert_eq!(*a.get(0, 0), 1);
        assert_eq!(*a.get(-1, -1), 6);
        assert_eq!(*a.get(3, 4), 5);
        assert_eq!(a.slice((0, 2, 1), (2, 4, 1)), vec![vec![3, 1], vec![6, 4]]);
    }

    #[test]
    fn serde_rejects_empty() {
        let m: Result<CircularMapping<i32>, _> = serde_json::from_str("[]");
        assert!(m.is_err());
        let m: CircularMapping<i32> = serde_json::from_str("[1,2]").unwrap();
        assert_eq!(*m.get(-1), 2);
    }

    proptest! {
        #[test]
        fn get_matches_unrolled(v in proptest::collection::vec(any::<u8>(), 1..=8), i in -32i64..32) {
            let m = CircularMapping::new(v.clone()).unwrap();
            let r = v.len() as i64;
            let k = 4;
            // 2k copies laid out from index -k*r
            let unrolled: Vec<u8> = (0..2 * k).flat_map(|_| v.iter().copied()).collect();
            prop_assume!(i.abs() < k * r);
            prop_assert_eq!(*m.get(i), unrolled[(i + k * r) as usize]);
        }
    }
}
