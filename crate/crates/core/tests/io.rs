mod common;

use common::{gds_records, rec, tech, UNITS_BYTES};
use laygen::design::Design;
use laygen::genlib::{gen_current_dac, gen_scan_cell};
use laygen::geometry::{Point, Rect, Shape, Transform};
use laygen::grid::{OneDimGrid, PlacementGrid};
use laygen::io::{decode_gds, encode_gds, read_json, write_gds, write_json, write_svg, GdsElement, SvgStyle};
use laygen::template;

fn empty() -> Design {
    Design::new("empty", tech("mock_finfet"))
}

fn with_instance(t: Transform) -> Design {
    let mut d = empty();
    let vi = template::generate(&d.tech, "nmos_finger", &Default::default()).unwrap();
    let unit = PlacementGrid::new(OneDimGrid::uniform(1).unwrap(), OneDimGrid::uniform(1).unwrap());
    d.place(&vi, &unit, 100, 200, t);
    d
}

#[test]
fn empty_design_skeleton() {
    let bytes = write_gds(&empty()).unwrap();
    let kinds: Vec<u8> = gds_records(&bytes).iter().map(|r| r.0).collect();
    use rec::*;
    assert_eq!(kinds, [HEADER, BGNLIB, LIBNAME, UNITS, BGNSTR, STRNAME, ENDSTR, ENDLIB]);
    assert_eq!(gds_records(&bytes)[0].1, 600i16.to_be_bytes());
    let lib = decode_gds(&bytes).unwrap();
    assert_eq!(lib.structures.len(), 1);
}

#[test]
fn units_bytes_are_frozen() {
    let bytes = write_gds(&empty()).unwrap();
    let units = gds_records(&bytes).into_iter().find(|r| r.0 == rec::UNITS).unwrap();
    assert_eq!(units.1, UNITS_BYTES);
}

#[test]
fn one_rect_one_closed_boundary() {
    let mut d = empty();
    d.rects.push(Shape::drawing("m1", Rect::from_coords(0, 0, 1, 1)));
    let bytes = write_gds(&d).unwrap();
    let recs = gds_records(&bytes);
    assert_eq!(recs.iter().filter(|r| r.0 == rec::BOUNDARY).count(), 1);
    let xy = &recs.iter().find(|r| r.0 == rec::XY).unwrap().1;
    let pts: Vec<(i32, i32)> = xy
        .chunks(8)
        .map(|c| (i32::from_be_bytes(c[..4].try_into().unwrap()), i32::from_be_bytes(c[4..].try_into().unwrap())))
        .collect();
    assert_eq!(pts.len(), 5);
    assert_eq!(pts[0], pts[4]);
    assert_eq!(pts[..4].iter().collect::<std::collections::BTreeSet<_>>().len(), 4);
}

#[test]
fn sref_orientation_flags() {
    // (reflect bit, angle) per orientation
    let table = [
        (Transform::R0, None, None),
        (Transform::MX, Some(true), Some(0.0)),
        (Transform::MY, Some(true), Some(180.0)),
        (Transform::R180, Some(false), Some(180.0)),
    ];
    for (t, reflect, angle) in table {
        let bytes = write_gds(&with_instance(t)).unwrap();
        let recs = gds_records(&bytes);
        let at = recs.iter().position(|r| r.0 == rec::SREF).unwrap();
        let tail: Vec<_> = recs[at..].iter().take_while(|r| r.0 != 0x11).collect();
        let strans = tail.iter().find(|r| r.0 == rec::STRANS).map(|r| r.1[0] & 0x80 != 0);
        assert_eq!(strans, reflect, "{t:?}");
        let lib = decode_gds(&bytes).unwrap();
        let sref = lib
            .structures
            .iter()
            .flat_map(|s| &s.elements)
            .find_map(|e| match e {
                GdsElement::Sref { reflect, angle, .. } => Some((*reflect, *angle)),
                _ => None,
            })
            .unwrap();
        assert_eq!(sref, (reflect.unwrap_or(false), angle.unwrap_or(0.0)), "{t:?}");
        if angle.is_none() {
            assert!(tail.iter().all(|r| r.0 != rec::ANGLE));
        }
    }
}

fn fixture_designs() -> Vec<Design> {
    let mut out = Vec::new();
    for name in common::TECHS {
        let t = tech(name);
        out.push(gen_current_dac(t.clone(), 2).unwrap());
        out.push(gen_scan_cell(t, 3, true).unwrap());
    }
    out.extend(Transform::ALL.map(with_instance));
    out
}

#[test]
fn gds_round_trip_is_exact() {
    for d in fixture_designs() {
        let bytes = write_gds(&d).unwrap();
        let lib = decode_gds(&bytes).unwrap();
        assert_eq!(encode_gds(&lib), bytes, "{}", d.name);
        // every top-level rect survives
        let top = lib.structures.last().unwrap();
        let rects: Vec<Rect> = top.elements.iter().filter_map(GdsElement::rect).collect();
        for s in &d.rects {
            assert!(rects.contains(&s.rect), "{} lost {}", d.name, s.rect);
        }
        let transforms: Vec<Transform> = top.elements.iter().filter_map(GdsElement::transform).collect();
        let want: Vec<Transform> = d.instances.iter().map(|i| i.transform).collect();
        assert_eq!(transforms, want);
    }
}

#[test]
fn instance_origin_lands_on_anchor() {
    let d = with_instance(Transform::R180);
    let lib = decode_gds(&write_gds(&d).unwrap()).unwrap();
    let origin = lib.structures.last().unwrap().elements.iter().find_map(|e| match e {
        GdsElement::Sref { origin, .. } => Some(*origin),
        _ => None,
    });
    let s = d.instances[0].size;
    assert_eq!(origin, Some((100 + s.x as i32, 200 + s.y as i32)));
    assert_eq!(d.instances[0].anchor(), Point::new(100 + s.x, 200 + s.y));
}

#[test]
fn json_empty_and_stable() {
    let text = write_json(&empty()).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["instances", "wires", "vias", "pins", "rects"] {
        assert_eq!(v[key], serde_json::json!([]), "{key}");
    }
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    let again: serde_json::Value = serde_json::from_str(&write_json(&empty()).unwrap()).unwrap();
    assert_eq!(keys, again.as_object().unwrap().keys().collect::<Vec<_>>());
    assert_eq!(text, write_json(&empty()).unwrap());
}

#[test]
fn json_round_trip_and_order_independence() {
    for d in fixture_designs() {
        let text = write_json(&d).unwrap();
        assert_eq!(write_json(&read_json(&text).unwrap()).unwrap(), text);
        let mut shuffled = d.clone();
        shuffled.rects.reverse();
        assert_eq!(write_json(&shuffled).unwrap(), text);
    }
}

#[test]
fn svg_is_deterministic() {
    let style = SvgStyle::default();
    let e = write_svg(&empty(), &style).unwrap();
    assert!(e.starts_with("<svg") && e.trim_end().ends_with("</svg>"));
    let d = gen_current_dac(tech("mock_planar"), 1).unwrap();
    assert_eq!(write_svg(&d, &style).unwrap(), write_svg(&d, &style).unwrap());
}

#[test]
fn schema_examples_load() {
    let doc = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../SCHEMAS.md")).unwrap();
    let blocks: Vec<&str> = doc.split("```json\n").skip(1).map(|b| b.split("```").next().unwrap()).collect();
    assert_eq!(blocks.len(), 2);
    let tech = laygen::tech::TechDb::load(blocks[0]).unwrap();
    let d = read_json(blocks[1]).unwrap();
    assert_eq!(*d.tech, tech);
    let canonical = write_json(&d).unwrap();
    assert_eq!(write_json(&read_json(&canonical).unwrap()).unwrap(), canonical);
    assert!(laygen::design::check_all(&d).unwrap().is_empty());
}

#[test]
fn out_of_range_coordinates_are_rejected() {
    let mut d = empty();
    d.rects.push(Shape::drawing("m1", Rect::from_coords(0, 0, i64::from(i32::MAX) + 1, 10)));
    assert!(matches!(write_gds(&d), Err(laygen::Error::Overflow(_))));
}
