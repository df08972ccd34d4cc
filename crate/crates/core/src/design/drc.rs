use std::collections::BTreeSet;
use std::fmt;

use super::Design;
use crate::error::Result;
use crate::geometry::{Purpose, Rect};

/// Two shapes on one layer closer than the layer's minimum spacing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub layer: String,
    pub a: Rect,
    pub b: Rect,
    pub dx: i64,
    pub dy: i64,
    pub required: i64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} and {} are ({}, {}) apart, need {}",
            self.layer, self.a, self.b, self.dx, self.dy, self.required
        )
    }
}

/// Pairwise spacing check on one layer.
///
/// Shapes joined by a chain of touching or overlapping shapes count as one
/// polygon and are never checked against each other. A same-layer gap is
/// exempt when a cut shape of the layer's cut rule crosses it.
pub fn check_spacing(d: &Design, layer: &str) -> Result<Vec<Violation>> {
    let s = d.tech.min_spacing(layer)?;
    let all = d.shapes()?;
    let rects: Vec<Rect> = all
        .iter()
        .filter(|sh| sh.layer == layer && matches!(sh.purpose, Purpose::Drawing | Purpose::Dummy))
        .map(|sh| sh.rect)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let cuts: Vec<Rect> = match d.tech.cut_rule(layer)? {
        Some(rule) => all.iter().filter(|sh| sh.layer == rule.layer).map(|sh| sh.rect).collect(),
        None => Vec::new(),
    };
    let polygon = components(&rects);
    let mut out = Vec::new();
    for (i, a) in rects.iter().enumerate() {
        for (j, b) in rects.iter().enumerate().skip(i + 1) {
            if polygon[i] == polygon[j] {
                continue;
            }
            let (dx, dy) = a.separation(b);
            if dx * dx + dy * dy >= s * s {
                continue;
            }
            let gap = gap_box(a, b);
            if cuts.iter().any(|c| crosses(c, &gap)) {
                continue;
            }
            out.push(Violation {
                layer: layer.to_string(),
                a: *a,
                b: *b,
                dx,
                dy,
                required: s,
            });
        }
    }
    Ok(out)
}

/// Component label per rect, grouping rects that touch transitively.
fn components(rects: &[Rect]) -> Vec<usize> {
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut parent: Vec<usize> = (0..rects.len()).collect();
    for i in 0..rects.len() {
        for j in i + 1..rects.len() {
            if rects[i].separation(&rects[j]) == (0, 0) {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    (0..rects.len()).map(|i| root(&mut parent, i)).collect()
}

/// Spacing check over every metal, via and device layer.
pub fn check_all(d: &Design) -> Result<Vec<Violation>> {
    let mut out = Vec::new();
    for l in d.tech.drc_layers() {
        out.extend(check_spacing(d, &l.name)?);
    }
    Ok(out)
}

/// Region between two boxes: the gap on separated axes, the overlap elsewhere.
fn gap_box(a: &Rect, b: &Rect) -> Rect {
    Rect::from_coords(
        a.lo().x.max(b.lo().x),
        a.lo().y.max(b.lo().y),
        a.hi().x.min(b.hi().x),
        a.hi().y.min(b.hi().y),
    )
}

fn crosses(cut: &Rect, gap: &Rect) -> bool {
    let axis = |clo: i64, chi: i64, glo: i64, ghi: i64| {
        if ghi > glo {
            clo < ghi && chi > glo
        } else {
            clo <= ghi && chi >= glo
        }
    };
    axis(cut.lo().x, cut.hi().x, gap.lo().x, gap.hi().x)
        && axis(cut.lo().y, cut.hi().y, gap.lo().y, gap.hi().y)
}
