//! Manufacturing passes over a routed design: line-end cuts, minimum-area
//! extension, mask coloring and dummy fill.

use std::collections::{BTreeMap, BTreeSet};

use crate::design::{Axis, Design, FlowFlags, Wire, WireId};
use crate::error::{Error, Result};
use crate::geometry::{Purpose, Rect, Shape, Transform};
use crate::grid::Cmp;
use crate::tech::DUMMY_TEMPLATE;
use crate::template::{self, Params};

/// Runs every enabled pass the technology supports, in the order min-area,
/// cuts, colors, dummies. Dummy fill needs a `region`.
pub fn apply(d: &mut Design, flags: &FlowFlags, region: Option<&Rect>) -> Result<()> {
    use crate::design::flow_stage as stage;
    let tech = d.tech.clone();
    let layers: BTreeSet<String> = d.wires().map(|(_, w)| w.layer.clone()).collect();
    if flags.min_area {
        for l in &layers {
            if stage("min-area extension", tech.min_area(l))? > 0 {
                stage("min-area extension", extend_min_area(d, l))?;
            }
        }
    }
    if flags.cuts {
        for l in &layers {
            if stage("cut generation", tech.cut_rule(l))?.is_some() {
                stage("cut generation", cut_pattern_gen(d, l))?;
            }
        }
    }
    if flags.colors {
        for l in &layers {
            if stage("mask coloring", tech.layer(l))?.colorable {
                stage("mask coloring", assign_colors(d, l, flags.color_offset))?;
            }
        }
    }
    if flags.dummies && tech.templates.contains_key(DUMMY_TEMPLATE) {
        if let Some(r) = region {
            stage("dummy fill", fill_dummies(d, r))?;
        }
    }
    Ok(())
}

/// Inserts cut shapes on the cut layer of `layer`; returns the new ones.
///
/// Wires sharing a track are merged where they touch. A cut goes in every
/// gap between neighbouring groups narrower than the rule's threshold, and
/// past both ends of the track unless the end wire is a pin. Existing cuts
/// are never duplicated, so running the pass twice adds nothing.
pub fn cut_pattern_gen(d: &mut Design, layer: &str) -> Result<Vec<Shape>> {
    let rule = d
        .tech
        .cut_rule(layer)?
        .ok_or_else(|| Error::NoCutRule(layer.to_string()))?
        .clone();

    let mut tracks: BTreeMap<(Axis, i64), Vec<&Wire>> = BTreeMap::new();
    for (_, w) in d.wires() {
        if w.layer == layer {
            tracks.entry((w.axis, w.track_phys)).or_default().push(w);
        }
    }

    let cut_at = |axis: Axis, track: i64, center: i64| {
        let c = d.tech.snap_down(center);
        let a0 = c - rule.width / 2;
        let t0 = track - rule.length / 2;
        let r = match axis {
            Axis::Horizontal => Rect::from_coords(a0, t0, a0 + rule.width, t0 + rule.length),
            Axis::Vertical => Rect::from_coords(t0, a0, t0 + rule.length, a0 + rule.width),
        };
        Shape::new(rule.layer.clone(), Purpose::Cut, r)
    };

    let mut found = BTreeSet::new();
    for ((axis, track), mut ws) in tracks {
        ws.sort_by_key(|w| (w.lo, w.hi));
        let lo = ws[0].lo;
        let hi = ws.iter().map(|w| w.hi).max().unwrap();
        if ws.iter().any(|w| w.lo == lo && !w.is_pin) {
            found.insert(cut_at(axis, track, lo - rule.end_margin));
        }
        if ws.iter().any(|w| w.hi == hi && !w.is_pin) {
            found.insert(cut_at(axis, track, hi + rule.end_margin));
        }
        let mut reach = ws[0].hi;
        for w in &ws[1..] {
            let gap = w.lo - reach;
            if gap > 0 && gap < rule.spacing_threshold {
                found.insert(cut_at(axis, track, (reach + w.lo).div_euclid(2)));
            }
            reach = reach.max(w.hi);
        }
    }

    let existing: BTreeSet<&Shape> = d.rects.iter().collect();
    let new: Vec<Shape> = found.into_iter().filter(|s| !existing.contains(s)).collect();
    d.rects.extend(new.iter().cloned());
    Ok(new)
}

/// Lengthens wires on `layer` below the minimum area, split evenly over
/// both ends and snapped outward to the manufacturing grid. Returns the
/// wires that changed.
pub fn extend_min_area(d: &mut Design, layer: &str) -> Result<Vec<WireId>> {
    let min_area = d.tech.min_area(layer)?;
    let tech = d.tech.clone();
    let ids: Vec<WireId> = d
        .wires()
        .filter(|(_, w)| w.layer == layer && w.width * w.length() < min_area)
        .map(|(id, _)| id)
        .collect();
    for &id in &ids {
        let w = d.wire_mut(id)?;
        let need = (min_area + w.width - 1) / w.width - w.length();
        w.lo -= tech.snap_up(need / 2);
        w.hi += tech.snap_up(need - need / 2);
    }
    Ok(ids)
}

/// Colors every wire on `layer` from its grid's track color mapping,
/// shifted by `offset` tracks. Returns the wires colored.
pub fn assign_colors(d: &mut Design, layer: &str, offset: i64) -> Result<Vec<WireId>> {
    if !d.tech.layer(layer)?.colorable {
        return Err(Error::NotColorable(layer.to_string()));
    }
    let mut colored = Vec::new();
    let updates: Vec<(WireId, String, Axis, i64)> = d
        .wires()
        .filter(|(_, w)| w.layer == layer)
        .map(|(id, w)| (id, w.grid.clone(), w.axis, w.track))
        .collect();
    for (id, grid, axis, track) in updates {
        let g = d.grid(&grid)?;
        let map = match axis {
            Axis::Vertical => g.xcolor(),
            Axis::Horizontal => g.ycolor(),
        };
        let color = *map.get(track + offset);
        if color.is_none() {
            return Err(Error::NotColorable(format!("{layer} on grid {grid}")));
        }
        d.wire_mut(id)?.color = color;
        colored.push(id);
    }
    Ok(colored)
}

/// Places a dummy cell on every free placement site fully inside `region`.
/// Returns the indices of the new instances.
pub fn fill_dummies(d: &mut Design, region: &Rect) -> Result<Vec<usize>> {
    if !d.tech.templates.contains_key(DUMMY_TEMPLATE) {
        return Err(Error::NoDummyTemplate);
    }
    let pg = d.placement.clone().ok_or(Error::NoPlacementGrid)?;
    let dummy = template::generate(&d.tech, DUMMY_TEMPLATE, &Params::new())?;

    let sites = |g: &crate::grid::OneDimGrid, lo: i64, hi: i64| -> Result<Vec<i64>> {
        let first = g.index_where(Cmp::Ge, lo)?;
        let mut out = Vec::new();
        let mut i = first;
        while g.phys(i + 1) <= hi {
            out.push(i);
            i += 1;
        }
        Ok(out)
    };
    let xs = sites(&pg.x, region.lo().x, region.hi().x)?;
    let ys = sites(&pg.y, region.lo().y, region.hi().y)?;

    let taken: Vec<Rect> = d.instances.iter().map(|vi| vi.bbox()).collect();
    let mut added = Vec::new();
    for &y in &ys {
        for &x in &xs {
            let site = Rect::new(pg.phys(x, y), pg.phys(x + 1, y + 1));
            if taken.iter().any(|b| b.overlaps_interior(&site)) {
                continue;
            }
            added.push(d.place(&dummy, &pg, x, y, Transform::R0));
        }
    }
    Ok(added)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::grid::{MaskColor, OneDimGrid, PlacementGrid};
    use crate::tech::TechDb;

    fn tech() -> Arc<TechDb> {
        Arc::new(
            TechDb::load(
                r#"{
                "name": "pp",
                "layers": [
                    {"name":"m1","gds":[10,0],"kind":"metal","min_width":20,"min_spacing":20,
                     "min_area":2000,"colorable":true,
                     "cut":{"layer":"cm1","width":10,"length":30,"spacing_threshold":30,"end_margin":15}},
                    {"name":"cm1","gds":[30,0],"kind":"cut","min_width":10,"min_spacing":10},
                    {"name":"m2","gds":[12,0],"kind":"metal","min_width":20,"min_spacing":20},
                    {"name":"m3","gds":[14,0],"kind":"metal","min_width":20,"min_spacing":20,"min_area":1200}
                ],
                "templates": {
                    "blk": {"kind":"native","size":[100,100],"shapes":[{"layer":"m2","rect":[0,0,100,100]}]},
                    "dummy": {"kind":"native","size":[50,100],"shapes":[{"layer":"m2","purpose":"dummy","rect":[0,0,50,100]}]}
                },
                "grids": {}
            }"#,
            )
            .unwrap(),
        )
    }

    fn hwire(track: i64, lo: i64, hi: i64) -> Wire {
        Wire {
            layer: "m1".into(),
            axis: Axis::Horizontal,
            grid: "g".into(),
            track,
            track_phys: track * 40,
            lo,
            hi,
            width: 20,
            is_pin: false,
            color: None,
        }
    }

    #[test]
    fn cuts_between_and_at_ends() {
        let mut d = Design::new("c", tech());
        d.add_wire(hwire(0, 0, 100)).unwrap();
        d.add_wire(hwire(0, 120, 200)).unwrap();
        d.add_wire(hwire(0, 210, 300)).unwrap();
        let cuts = cut_pattern_gen(&mut d, "m1").unwrap();
        // two gaps plus both track ends
        assert_eq!(cuts.len(), 4);
        let xs: BTreeSet<i64> = cuts.iter().map(|c| c.rect.center().x).collect();
        assert_eq!(xs, [-15, 110, 205, 315].into_iter().collect());
        assert!(cuts.iter().all(|c| c.layer == "cm1" && c.rect.height() == 30 && c.rect.width() == 10));
        assert!(cut_pattern_gen(&mut d, "m1").unwrap().is_empty());
        assert_eq!(d.rects.len(), 4);
    }

    #[test]
    fn wide_gap_and_pin_ends_left_alone() {
        let mut d = Design::new("c", tech());
        let a = d.add_wire(hwire(1, 0, 100)).unwrap();
        d.add_wire(hwire(1, 130, 200)).unwrap();
        d.add_pin("p", "n", a).unwrap();
        let cuts = cut_pattern_gen(&mut d, "m1").unwrap();
        assert_eq!(cuts.len(), 1);
        assert_eq!(cuts[0].rect.center().x, 215);
    }

    #[test]
    fn no_rule_is_an_error() {
        let mut d = Design::new("c", tech());
        assert!(matches!(cut_pattern_gen(&mut d, "m2"), Err(Error::NoCutRule(_))));
        assert!(matches!(assign_colors(&mut d, "m2", 0), Err(Error::NotColorable(_))));
    }

    #[test]
    fn min_area_extends_symmetrically() {
        let mut d = Design::new("a", tech());
        let id = d.add_wire(hwire(0, 0, 50)).unwrap();
        let big = d.add_wire(hwire(2, 0, 200)).unwrap();
        assert_eq!(extend_min_area(&mut d, "m1").unwrap(), vec![id]);
        let w = d.wire(id).unwrap();
        assert_eq!((w.lo, w.hi), (-25, 75));
        assert_eq!(d.wire(big).unwrap().length(), 200);
    }

    #[test]
    fn fill_counts_free_sites() {
        let mut d = Design::new("f", tech());
        assert!(matches!(
            fill_dummies(&mut d, &Rect::from_coords(0, 0, 150, 200)),
            Err(Error::NoPlacementGrid)
        ));
        d.set_placement_grid(PlacementGrid::new(
            OneDimGrid::uniform(50).unwrap(),
            OneDimGrid::uniform(100).unwrap(),
        ));
        let added = fill_dummies(&mut d, &Rect::from_coords(0, 0, 150, 200)).unwrap();
        assert_eq!(added.len(), 6);
        assert!(fill_dummies(&mut d, &Rect::from_coords(0, 0, 150, 200)).unwrap().is_empty());
    }

    #[test]
    fn colors_follow_tracks() {
        use crate::grid::{generate_routing_grid, AxisSpec, GridSpec, TrackClass};
        let t = tech();
        let spec = GridSpec {
            x: AxisSpec { layer: "m2".into(), pattern: vec![TrackClass::SIGNAL] },
            y: AxisSpec { layer: "m1".into(), pattern: vec![TrackClass::SIGNAL] },
        };
        let g = generate_routing_grid(&t, &spec, &Rect::from_coords(0, 0, 400, 400)).unwrap();
        for (offset, want) in [(0, [MaskColor::A, MaskColor::B]), (1, [MaskColor::B, MaskColor::A])] {
            let mut d = Design::new("k", t.clone());
            d.add_grid("g", g.clone());
            let ids: Vec<WireId> = (0..4)
                .map(|k| d.route("g", &[(0, k), (2, k)]).unwrap().wires[0])
                .collect();
            assert_eq!(assign_colors(&mut d, "m1", offset).unwrap().len(), 4);
            for (k, id) in ids.iter().enumerate() {
                assert_eq!(d.wire(*id).unwrap().color, Some(want[k % 2]));
            }
        }
    }

    #[test]
    fn close_pair_gets_one_centered_cut() {
        let mut d = Design::new("c", tech());
        let a = d.add_wire(hwire(0, 0, 50)).unwrap();
        let b = d.add_wire(hwire(0, 60, 120)).unwrap();
        d.add_pin("a", "a", a).unwrap();
        d.add_pin("b", "b", b).unwrap();
        let cuts = cut_pattern_gen(&mut d, "m1").unwrap();
        assert_eq!(cuts.len(), 1);
        assert_eq!(cuts[0].rect.center().x, 55);
    }

    #[test]
    fn min_area_arithmetic() {
        let mut d = Design::new("a", tech());
        let id = d.add_wire(Wire { layer: "m3".into(), ..hwire(0, 0, 40) }).unwrap();
        extend_min_area(&mut d, "m3").unwrap();
        let w = d.wire(id).unwrap();
        assert_eq!((w.lo, w.hi), (-10, 50));
        assert_eq!(w.rect().area(), 1200);
        // no area rule: nothing moves
        let other = d.add_wire(Wire { layer: "m2".into(), ..hwire(3, 0, 10) }).unwrap();
        assert!(extend_min_area(&mut d, "m2").unwrap().is_empty());
        assert_eq!(d.wire(other).unwrap().length(), 10);
    }

    #[test]
    fn fill_skips_occupied_sites() {
        let t = tech();
        let mut d = Design::new("f", t.clone());
        let pg = PlacementGrid::new(OneDimGrid::uniform(50).unwrap(), OneDimGrid::uniform(100).unwrap());
        let blk = crate::template::generate(&t, "blk", &Default::default()).unwrap();
        d.place(&blk, &pg, 0, 0, crate::geometry::Transform::R0);
        d.set_placement_grid(pg);
        let added = fill_dummies(&mut d, &Rect::from_coords(0, 0, 150, 200)).unwrap();
        assert_eq!(added.len(), 4);
    }
}
