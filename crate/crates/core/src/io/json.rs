use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::design::{Design, Pin, PlacedVia, Wire, WireId};
use crate::error::{Error, Result};
use crate::geometry::{Point, Purpose, Rect, Shape, Transform};
use crate::grid::{PlacementGrid, RoutingGrid};
use crate::tech::TechDb;
use crate::template::{self, Params};

pub const FORMAT: &str = "laygen-layout";
pub const VERSION: u32 = 1;

/// Serialized form of a design.
///
/// The technology, grids, wires, vias and pins are stored as edited; instances
/// are stored by master and parameters and rebuilt on load. `rects` is the
/// flattened geometry in canonical order, written for consumers and ignored
/// on load.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutDocument {
    pub format: String,
    pub version: u32,
    pub name: String,
    pub tech: TechDb,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub placement: Option<PlacementGrid>,
    #[serde(default)]
    pub grids: BTreeMap<String, RoutingGrid>,
    #[serde(default)]
    pub instances: Vec<InstanceRecord>,
    #[serde(default)]
    pub wires: Vec<WireRecord>,
    #[serde(default)]
    pub vias: Vec<PlacedVia>,
    #[serde(default)]
    pub pins: Vec<Pin>,
    #[serde(default)]
    pub shapes: Vec<Shape>,
    #[serde(default)]
    pub rects: Vec<RectRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub master: String,
    #[serde(default)]
    pub params: Params,
    pub origin: Point,
    pub transform: Transform,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireRecord {
    pub id: WireId,
    #[serde(flatten)]
    pub wire: Wire,
}

/// One flattened rectangle with its GDS layer and datatype.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RectRecord {
    pub layer: String,
    pub bbox: Rect,
    pub purpose: Purpose,
    pub gds: [i16; 2],
}

fn sort_shapes(shapes: &mut [Shape]) {
    shapes.sort_by(|a, b| (&a.layer, a.rect, a.purpose).cmp(&(&b.layer, b.rect, b.purpose)));
}

/// GDS layer/datatype pair for a shape.
pub(crate) fn gds_pair(tech: &TechDb, s: &Shape) -> Result<(i16, i16)> {
    let (l, dt) = tech.layer(&s.layer)?.gds;
    Ok((l, dt + s.purpose.datatype_offset()))
}

pub fn to_document(d: &Design) -> Result<LayoutDocument> {
    let mut shapes = d.rects.clone();
    sort_shapes(&mut shapes);
    let mut rects = d
        .shapes()?
        .into_iter()
        .map(|s| {
            let (l, dt) = gds_pair(&d.tech, &s)?;
            Ok(RectRecord {
                layer: s.layer,
                bbox: s.rect,
                purpose: s.purpose,
                gds: [l, dt],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rects.sort();
    Ok(LayoutDocument {
        format: FORMAT.to_string(),
        version: VERSION,
        name: d.name.clone(),
        tech: (*d.tech).clone(),
        placement: d.placement.clone(),
        grids: d.grids.clone(),
        instances: d
            .instances
            .iter()
            .map(|vi| InstanceRecord {
                master: vi.master.clone(),
                params: vi.params.clone(),
                origin: vi.origin,
                transform: vi.transform,
            })
            .collect(),
        wires: d
            .wires()
            .map(|(id, w)| WireRecord { id, wire: w.clone() })
            .collect(),
        vias: d.vias.clone(),
        pins: d.pins.clone(),
        shapes,
        rects,
    })
}

pub fn from_document(doc: LayoutDocument) -> Result<Design> {
    if doc.format != FORMAT {
        return Err(Error::validation("format", format!("expected {FORMAT:?}, found {:?}", doc.format)));
    }
    if doc.version != VERSION {
        return Err(Error::validation("version", format!("unsupported version {}", doc.version)));
    }
    doc.tech.validate()?;
    let tech = Arc::new(doc.tech);
    let mut d = Design::new(doc.name, tech.clone());
    d.placement = doc.placement;
    d.grids = doc.grids;
    for (i, rec) in doc.instances.iter().enumerate() {
        let vi = template::generate(&tech, &rec.master, &rec.params).map_err(|e| {
            Error::validation(format!("instances[{i}]"), e.to_string())
        })?;
        d.instances.push(vi.placed(rec.origin, rec.transform));
    }
    for rec in doc.wires {
        if !d.grids.contains_key(&rec.wire.grid) {
            return Err(Error::UnknownGrid(rec.wire.grid));
        }
        d.insert_wire(rec.id, rec.wire)?;
    }
    for v in doc.vias {
        d.add_via(&v.via, v.at)?;
    }
    for p in doc.pins {
        d.add_pin(&p.name, &p.net, p.wire)?;
    }
    for s in &doc.shapes {
        tech.layer(&s.layer)?;
    }
    d.rects = doc.shapes;
    Ok(d)
}

/// Pretty JSON with a trailing newline; byte-stable for a given design.
pub fn write_json(d: &Design) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&to_document(d)?)?;
    s.push('\n');
    Ok(s)
}

pub fn read_json(text: &str) -> Result<Design> {
    from_document(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::tests::tech;
    use crate::geometry::Shape;
    use crate::grid::{generate_routing_grid, AxisSpec, GridSpec, OneDimGrid, TrackClass};

    fn sample() -> Design {
        let t = tech();
        let spec = GridSpec {
            x: AxisSpec { layer: "m2".into(), pattern: vec![TrackClass::SIGNAL] },
            y: AxisSpec { layer: "m1".into(), pattern: vec![TrackClass::SIGNAL] },
        };
        let g = generate_routing_grid(&t, &spec, &Rect::from_coords(0, 0, 400, 400)).unwrap();
        let mut d = Design::new("sample", t.clone());
        d.add_grid("g", g);
        let pg = PlacementGrid::new(OneDimGrid::uniform(40).unwrap(), OneDimGrid::uniform(40).unwrap());
        let vi = template::generate(&t, "blk", &Params::new()).unwrap();
        d.place(&vi, &pg, 5, 5, Transform::MX);
        d.set_placement_grid(pg);
        let r = d.route("g", &[(0, 0), (3, 0), (3, 2)]).unwrap();
        d.add_pin("a", "n", r.wires[0]).unwrap();
        d.rects.push(Shape::drawing("m3", Rect::from_coords(0, 0, 30, 30)));
        d.rects.push(Shape::drawing("m1", Rect::from_coords(300, 300, 330, 330)));
        d
    }

    #[test]
    fn round_trip_is_byte_stable() {
        let d = sample();
        let a = write_json(&d).unwrap();
        let back = read_json(&a).unwrap();
        assert_eq!(write_json(&back).unwrap(), a);
        assert_eq!(back.instances, d.instances);
        assert_eq!(back.wires().count(), d.wires().count());
    }

    #[test]
    fn rects_are_canonical() {
        let mut d = sample();
        let a = write_json(&d).unwrap();
        d.rects.reverse();
        assert_eq!(write_json(&d).unwrap(), a);
    }

    #[test]
    fn rejects_foreign_documents() {
        let mut doc = to_document(&sample()).unwrap();
        doc.format = "other".into();
        assert!(matches!(from_document(doc), Err(Error::Validation { .. })));
        assert!(matches!(read_json("{"), Err(Error::Parse(_))));
    }
}
