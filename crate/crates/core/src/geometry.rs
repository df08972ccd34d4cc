//! Integer points, boxes, layered shapes, and the four-orientation
//! transform group used for every placement computation.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A point in integer design units (nanometers unless the technology says otherwise).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }
}

impl From<[i64; 2]> for Point {
    fn from(v: [i64; 2]) -> Self {
        Point::new(v[0], v[1])
    }
}

impl From<Point> for [i64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// An axis-aligned box. Corners are always normalized so `lo <= hi` per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[i64; 4]", into = "[i64; 4]")]
pub struct Rect {
    lo: Point,
    hi: Point,
}

impl From<[i64; 4]> for Rect {
    fn from(v: [i64; 4]) -> Self {
        Rect::new(Point::new(v[0], v[1]), Point::new(v[2], v[3]))
    }
}

impl From<Rect> for [i64; 4] {
    fn from(r: Rect) -> Self {
        [r.lo.x, r.lo.y, r.hi.x, r.hi.y]
    }
}

impl Rect {
    pub fn new(a: Point, b: Point) -> Self {
        Self {
            lo: Point::new(a.x.min(b.x), a.y.min(b.y)),
            hi: Point::new(a.x.max(b.x), a.y.max(b.y)),
        }
    }

    pub fn from_coords(x0: i64, y0: i64, x1: i64, y1: i64) -> Self {
        Self::new(Point::new(x0, y0), Point::new(x1, y1))
    }

    /// Box of the given size with its lower-left corner at the origin.
    pub fn from_size(size: Point) -> Self {
        Self::new(Point::ORIGIN, size)
    }

    pub fn lo(&self) -> Point {
        self.lo
    }

    pub fn hi(&self) -> Point {
        self.hi
    }

    pub fn width(&self) -> i64 {
        self.hi.x - self.lo.x
    }

    pub fn height(&self) -> i64 {
        self.hi.y - self.lo.y
    }

    pub fn area(&self) -> i64 {
        self.width() * self.height()
    }

    /// Integer center, rounded toward negative infinity.
    pub fn center(&self) -> Point {
        Point::new(
            (self.lo.x + self.hi.x).div_euclid(2),
            (self.lo.y + self.hi.y).div_euclid(2),
        )
    }

    pub fn translate(&self, d: Point) -> Rect {
        Rect {
            lo: self.lo + d,
            hi: self.hi + d,
        }
    }

    pub fn contains_point(&self, p: Point) -> bool {
        self.lo.x <= p.x && p.x <= self.hi.x && self.lo.y <= p.y && p.y <= self.hi.y
    }

    pub fn contains(&self, other: &Rect) -> bool {
        self.contains_point(other.lo) && self.contains_point(other.hi)
    }

    /// Closed intersection. Touching boxes yield a degenerate (zero-width) box.
    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        let lo = Point::new(self.lo.x.max(other.lo.x), self.lo.y.max(other.lo.y));
        let hi = Point::new(self.hi.x.min(other.hi.x), self.hi.y.min(other.hi.y));
        (lo.x <= hi.x && lo.y <= hi.y).then_some(Rect { lo, hi })
    }

    /// True when the open interiors intersect.
    pub fn overlaps_interior(&self, other: &Rect) -> bool {
        self.lo.x < other.hi.x
            && other.lo.x < self.hi.x
            && self.lo.y < other.hi.y
            && other.lo.y < self.hi.y
    }

    pub fn union(&self, other: &Rect) -> Rect {
        Rect {
            lo: Point::new(self.lo.x.min(other.lo.x), self.lo.y.min(other.lo.y)),
            hi: Point::new(self.hi.x.max(other.hi.x), self.hi.y.max(other.hi.y)),
        }
    }

    pub fn expand(&self, dx: i64, dy: i64) -> Rect {
        Rect::from_coords(self.lo.x - dx, self.lo.y - dy, self.hi.x + dx, self.hi.y + dy)
    }

    /// Per-axis edge separation `(dx, dy)`; zero on an axis whose projections touch or overlap.
    pub fn separation(&self, other: &Rect) -> (i64, i64) {
        let dx = (other.lo.x - self.hi.x).max(self.lo.x - other.hi.x).max(0);
        let dy = (other.lo.y - self.hi.y).max(self.lo.y - other.hi.y).max(0);
        (dx, dy)
    }

    /// Bounding box of a set of boxes.
    pub fn bounding<'a>(rects: impl IntoIterator<Item = &'a Rect>) -> Option<Rect> {
        rects.into_iter().copied().reduce(|a, b| a.union(&b))
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} {} {} {}]", self.lo.x, self.lo.y, self.hi.x, self.hi.y)
    }
}

/// Role of a shape on its layer; selects the GDS datatype offset on export.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Purpose {
    Drawing,
    Pin,
    Cut,
    Dummy,
    #[serde(rename = "colorA")]
    ColorA,
    #[serde(rename = "colorB")]
    ColorB,
}

impl Purpose {
    /// Offset added to the layer's base datatype in GDS output.
    pub fn datatype_offset(self) -> i16 {
        match self {
            Purpose::Drawing | Purpose::Cut => 0,
            Purpose::Pin => 1,
            Purpose::ColorA => 2,
            Purpose::ColorB => 3,
            Purpose::Dummy => 4,
        }
    }
}

/// A box on a named layer with a purpose.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub layer: String,
    pub purpose: Purpose,
    pub rect: Rect,
}

impl Shape {
    pub fn new(layer: impl Into<String>, purpose: Purpose, rect: Rect) -> Self {
        Self {
            layer: layer.into(),
            purpose,
            rect,
        }
    }

    pub fn drawing(layer: impl Into<String>, rect: Rect) -> Self {
        Self::new(layer, Purpose::Drawing, rect)
    }

    pub fn map_rect(&self, f: impl FnOnce(Rect) -> Rect) -> Shape {
        Shape {
            layer: self.layer.clone(),
            purpose: self.purpose,
            rect: f(self.rect),
        }
    }
}

/// 2x2 integer matrix, row-major.
pub type Matrix = [[i64; 2]; 2];

pub const IDENTITY: Matrix = [[1, 0], [0, 1]];

/// One of the four axis-preserving orientations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub enum Transform {
    #[default]
    R0,
    /// Mirror about the x axis: `(x, y) -> (x, -y)`.
    MX,
    /// Mirror about the y axis: `(x, y) -> (-x, y)`.
    MY,
    R180,
}

impl Transform {
    pub const ALL: [Transform; 4] = [Transform::R0, Transform::MX, Transform::MY, Transform::R180];

    pub fn matrix(self) -> Matrix {
        match self {
            Transform::R0 => [[1, 0], [0, 1]],
            Transform::MX => [[1, 0], [0, -1]],
            Transform::MY => [[-1, 0], [0, 1]],
            Transform::R180 => [[-1, 0], [0, -1]],
        }
    }

    /// `0.5 * (I - T)`, which is always a 0/1 diagonal matrix for these orientations.
    pub fn half_complement(self) -> Matrix {
        let m = self.matrix();
        [
            [(1 - m[0][0]) / 2, -m[0][1] / 2],
            [-m[1][0] / 2, (1 - m[1][1]) / 2],
        ]
    }

    pub fn from_matrix(m: Matrix) -> Option<Transform> {
        Transform::ALL.into_iter().find(|t| t.matrix() == m)
    }

    /// Whether the y coordinate is negated (x-axis reflection).
    pub fn flips_y(self) -> bool {
        matches!(self, Transform::MX | Transform::R180)
    }

    pub fn flips_x(self) -> bool {
        matches!(self, Transform::MY | Transform::R180)
    }

    pub fn apply(self, p: Point) -> Point {
        mat_vec(self.matrix(), p)
    }

    /// Transforms both corners and re-normalizes.
    pub fn apply_rect(self, r: Rect) -> Rect {
        Rect::new(self.apply(r.lo), self.apply(r.hi))
    }

    /// The orientation whose matrix is `outer * inner`.
    pub fn compose(outer: Transform, inner: Transform) -> Transform {
        // Diagonal sign matrices commute; composition is per-axis sign xor.
        let fx = outer.flips_x() ^ inner.flips_x();
        let fy = outer.flips_y() ^ inner.flips_y();
        match (fx, fy) {
            (false, false) => Transform::R0,
            (false, true) => Transform::MX,
            (true, false) => Transform::MY,
            (true, true) => Transform::R180,
        }
    }

    pub fn then(self, outer: Transform) -> Transform {
        Transform::compose(outer, self)
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Transform::R0 => "R0",
            Transform::MX => "MX",
            Transform::MY => "MY",
            Transform::R180 => "R180",
        };
        f.write_str(s)
    }
}

pub fn mat_vec(m: Matrix, p: Point) -> Point {
    Point::new(m[0][0] * p.x + m[0][1] * p.y, m[1][0] * p.x + m[1][1] * p.y)
}

pub fn mat_mul(a: Matrix, b: Matrix) -> Matrix {
    let mut out = [[0; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn matrices_match_orientation_table() {
        assert_eq!(Transform::R0.matrix(), [[1, 0], [0, 1]]);
        assert_eq!(Transform::MX.matrix(), [[1, 0], [0, -1]]);
        assert_eq!(Transform::MY.matrix(), [[-1, 0], [0, 1]]);
        assert_eq!(Transform::R180.matrix(), [[-1, 0], [0, -1]]);
    }

    #[test]
    fn half_complement_table() {
        assert_eq!(Transform::R0.half_complement(), [[0, 0], [0, 0]]);
        assert_eq!(Transform::MX.half_complement(), [[0, 0], [0, 1]]);
        assert_eq!(Transform::MY.half_complement(), [[1, 0], [0, 0]]);
        assert_eq!(Transform::R180.half_complement(), [[1, 0], [0, 1]]);
    }

    #[test]
    fn apply_examples() {
        assert_eq!(Transform::R0.apply(Point::new(3, 4)), Point::new(3, 4));
        assert_eq!(Transform::MX.apply(Point::new(3, 4)), Point::new(3, -4));
        let r = Rect::from_coords(1, 2, 5, 6);
        let m = Transform::MY.apply_rect(r);
        assert_eq!((m.lo(), m.hi()), (Point::new(-5, 2), Point::new(-1, 6)));
    }

    #[test]
    fn compose_examples() {
        assert_eq!(Transform::compose(Transform::R0, Transform::MX), Transform::MX);
        assert_eq!(Transform::compose(Transform::MX, Transform::MY), Transform::R180);
        assert_eq!(Transform::compose(Transform::R180, Transform::R180), Transform::R0);
    }

    #[test]
    fn composition_table_matches_matrix_products() {
        for a in Transform::ALL {
            let m = a.matrix();
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            assert!(det == 1 || det == -1);
            assert_eq!(mat_mul(m, [[m[0][0], m[1][0]], [m[0][1], m[1][1]]]), IDENTITY);
            for b in Transform::ALL {
                let product = mat_mul(a.matrix(), b.matrix());
                assert_eq!(Transform::from_matrix(product), Some(Transform::compose(a, b)));
                for c in Transform::ALL {
                    assert_eq!(
                        Transform::compose(Transform::compose(a, b), c),
                        Transform::compose(a, Transform::compose(b, c))
                    );
                }
            }
            assert_eq!(Transform::compose(Transform::R0, a), a);
            assert_eq!(Transform::compose(a, Transform::R0), a);
            assert_eq!(Transform::compose(a, a), Transform::R0);
        }
    }

    #[test]
    fn rect_normalizes() {
        let r = Rect::from_coords(5, 6, 1, 2);
        assert_eq!(r.lo(), Point::new(1, 2));
        assert_eq!(r.hi(), Point::new(5, 6));
        assert_eq!(r.separation(&Rect::from_coords(8, 0, 9, 1)), (3, 1));
    }

    proptest! {
        #[test]
        fn apply_respects_composition(
            a in 0usize..4, b in 0usize..4,
            x in -(1i64 << 31)..(1i64 << 31), y in -(1i64 << 31)..(1i64 << 31),
        ) {
            let (ta, tb) = (Transform::ALL[a], Transform::ALL[b]);
            let p = Point::new(x, y);
            prop_assert_eq!(Transform::compose(ta, tb).apply(p), ta.apply(tb.apply(p)));
        }
    }
}
