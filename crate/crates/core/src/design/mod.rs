//! The design container and the generation pipeline.

mod drc;
mod flow;

pub(crate) use flow::stage as flow_stage;

pub use drc::{check_all, check_spacing, Violation};
pub use flow::{default_fill_region, run_flow, FlowFlags, Generator, GeneratorSpec, Nets, ROUTE_GRID};

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Purpose, Rect, Shape, Transform};
use crate::grid::{MaskColor, PlacementGrid, RoutingGrid};
use crate::tech::{TechDb, ViaDef};
use crate::template::VirtualInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Horizontal,
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WireId(pub usize);

impl fmt::Display for WireId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w{}", self.0)
    }
}

/// A track-aligned wire segment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wire {
    pub layer: String,
    pub axis: Axis,
    /// Routing grid the track belongs to.
    pub grid: String,
    /// Abstract track index on the perpendicular axis.
    pub track: i64,
    /// Physical center coordinate of the track.
    pub track_phys: i64,
    pub lo: i64,
    pub hi: i64,
    pub width: i64,
    #[serde(default)]
    pub is_pin: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<MaskColor>,
}

impl Wire {
    pub fn rect(&self) -> Rect {
        let lo = self.track_phys - self.width / 2;
        let hi = lo + self.width;
        match self.axis {
            Axis::Horizontal => Rect::from_coords(self.lo, lo, self.hi, hi),
            Axis::Vertical => Rect::from_coords(lo, self.lo, hi, self.hi),
        }
    }

    pub fn length(&self) -> i64 {
        self.hi - self.lo
    }

    /// Same layer, direction and center line.
    pub fn same_track(&self, other: &Wire) -> bool {
        self.layer == other.layer && self.axis == other.axis && self.track_phys == other.track_phys
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pin {
    pub name: String,
    pub net: String,
    pub wire: WireId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacedVia {
    pub via: String,
    pub at: Point,
}

/// Cut and enclosure shapes of a via centered at `at`.
pub fn via_shapes(def: &ViaDef, at: Point) -> [Shape; 3] {
    let cut = Rect::from_coords(
        at.x - def.size.x / 2,
        at.y - def.size.y / 2,
        at.x - def.size.x / 2 + def.size.x,
        at.y - def.size.y / 2 + def.size.y,
    );
    [
        Shape::drawing(def.layer.clone(), cut),
        Shape::drawing(def.lower.clone(), cut.expand(def.enclosure[0], def.enclosure[0])),
        Shape::drawing(def.upper.clone(), cut.expand(def.enclosure[1], def.enclosure[1])),
    ]
}

/// Wires and vias created by one `route` call.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Route {
    pub wires: Vec<WireId>,
    pub vias: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Design {
    pub name: String,
    pub tech: Arc<TechDb>,
    pub instances: Vec<VirtualInstance>,
    wires: BTreeMap<WireId, Wire>,
    next_wire: usize,
    pub vias: Vec<PlacedVia>,
    pub pins: Vec<Pin>,
    /// Raw shapes outside instances and wires, including cuts.
    pub rects: Vec<Shape>,
    pub grids: BTreeMap<String, RoutingGrid>,
    pub placement: Option<PlacementGrid>,
}

impl Design {
    pub fn new(name: impl Into<String>, tech: Arc<TechDb>) -> Self {
        Self {
            name: name.into(),
            tech,
            instances: Vec::new(),
            wires: BTreeMap::new(),
            next_wire: 0,
            vias: Vec::new(),
            pins: Vec::new(),
            rects: Vec::new(),
            grids: BTreeMap::new(),
            placement: None,
        }
    }

    pub fn wires(&self) -> impl Iterator<Item = (WireId, &Wire)> {
        self.wires.iter().map(|(id, w)| (*id, w))
    }

    pub fn wire(&self, id: WireId) -> Result<&Wire> {
        self.wires.get(&id).ok_or(Error::UnknownWire(id.0))
    }

    pub fn wire_mut(&mut self, id: WireId) -> Result<&mut Wire> {
        self.wires.get_mut(&id).ok_or(Error::UnknownWire(id.0))
    }

    pub fn wire_count(&self) -> usize {
        self.wires.len()
    }

    /// Adds a wire after checking its layer and extent.
    pub fn add_wire(&mut self, wire: Wire) -> Result<WireId> {
        self.tech.layer(&wire.layer)?;
        if wire.lo > wire.hi || wire.width <= 0 {
            return Err(Error::validation(
                "wire",
                format!("extent [{}, {}] width {} is invalid", wire.lo, wire.hi, wire.width),
            ));
        }
        let id = WireId(self.next_wire);
        self.next_wire += 1;
        self.wires.insert(id, wire);
        Ok(id)
    }

    /// Inserts a wire under a fixed id (document import).
    pub(crate) fn insert_wire(&mut self, id: WireId, wire: Wire) -> Result<()> {
        self.tech.layer(&wire.layer)?;
        self.next_wire = self.next_wire.max(id.0 + 1);
        self.wires.insert(id, wire);
        Ok(())
    }

    /// Removes a wire along with any pins on it.
    pub fn remove_wire(&mut self, id: WireId) -> Option<Wire> {
        let w = self.wires.remove(&id)?;
        self.pins.retain(|p| p.wire != id);
        Some(w)
    }

    pub fn set_placement_grid(&mut self, grid: PlacementGrid) {
        self.placement = Some(grid);
    }

    /// Places `vi` with its origin at abstract site `(x, y)` of `grid`.
    pub fn place(
        &mut self,
        vi: &VirtualInstance,
        grid: &PlacementGrid,
        x: i64,
        y: i64,
        transform: Transform,
    ) -> usize {
        self.instances.push(vi.placed(grid.phys(x, y), transform));
        self.instances.len() - 1
    }

    /// Bounding box of all instances.
    pub fn instance_bbox(&self) -> Option<Rect> {
        let boxes: Vec<Rect> = self.instances.iter().map(VirtualInstance::bbox).collect();
        Rect::bounding(&boxes)
    }

    pub fn add_grid(&mut self, name: impl Into<String>, grid: RoutingGrid) {
        self.grids.insert(name.into(), grid);
    }

    pub fn grid(&self, name: &str) -> Result<&RoutingGrid> {
        self.grids.get(name).ok_or_else(|| Error::UnknownGrid(name.to_string()))
    }

    pub fn add_via(&mut self, via: &str, at: Point) -> Result<usize> {
        self.tech.via(via)?;
        self.vias.push(PlacedVia {
            via: via.to_string(),
            at,
        });
        Ok(self.vias.len() - 1)
    }

    /// Places the grid's via at abstract crossing `(x, y)`.
    pub fn add_grid_via(&mut self, grid: &str, x: i64, y: i64) -> Result<usize> {
        let g = self.grid(grid)?;
        let via = g.via(x, y).ok_or(Error::MissingVia { x, y })?.to_string();
        let at = Point::new(g.xgrid().phys(x), g.ygrid().phys(y));
        self.add_via(&via, at)
    }

    /// Routes a rectilinear path through abstract grid points.
    ///
    /// Each segment becomes one wire on the track's layer and width. A via is
    /// dropped wherever consecutive segments sit on different layers. Wire
    /// ends reach the track crossing plus the via landing, or half a wire
    /// width at free ends.
    pub fn route(&mut self, grid: &str, waypoints: &[(i64, i64)]) -> Result<Route> {
        let g = self.grid(grid)?.clone();
        let mut pts: Vec<(i64, i64)> = waypoints.to_vec();
        pts.dedup();
        if pts.len() < 2 {
            return Err(Error::TooFewWaypoints);
        }
        struct Seg {
            axis: Axis,
            layer: String,
            track: i64,
            from: i64,
            to: i64,
            width: i64,
        }
        let mut segs = Vec::with_capacity(pts.len() - 1);
        for w in pts.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            let seg = if y0 == y1 {
                Seg {
                    axis: Axis::Horizontal,
                    layer: g.hlayer(y0).to_string(),
                    track: y0,
                    from: x0,
                    to: x1,
                    width: g.hwidth(y0),
                }
            } else if x0 == x1 {
                Seg {
                    axis: Axis::Vertical,
                    layer: g.vlayer(x0).to_string(),
                    track: x0,
                    from: y0,
                    to: y1,
                    width: g.vwidth(x0),
                }
            } else {
                return Err(Error::NonRectilinear {
                    from: format!("({x0}, {y0})"),
                    to: format!("({x1}, {y1})"),
                });
            };
            segs.push(seg);
        }

        // via (if any) at each interior waypoint
        let mut joints: Vec<Option<String>> = Vec::with_capacity(segs.len().saturating_sub(1));
        for (k, pair) in segs.windows(2).enumerate() {
            let (a, b) = (&pair[0], &pair[1]);
            let (x, y) = pts[k + 1];
            let via = if a.layer == b.layer {
                None
            } else if a.axis != b.axis {
                Some(g.via(x, y).ok_or(Error::MissingVia { x, y })?.to_string())
            } else {
                Some(
                    self.tech
                        .via_between(&a.layer, &b.layer)
                        .ok_or(Error::MissingVia { x, y })?
                        .name
                        .clone(),
                )
            };
            joints.push(via);
        }

        let phys = |axis: Axis, i: i64| match axis {
            Axis::Horizontal => g.xgrid().phys(i),
            Axis::Vertical => g.ygrid().phys(i),
        };
        let mut out = Route::default();
        for (k, s) in segs.iter().enumerate() {
            let ext_at = |joint: Option<&Option<String>>| -> Result<i64> {
                match joint {
                    Some(Some(v)) => {
                        let half = self.tech.via(v)?.half_landing(&s.layer);
                        Ok(match s.axis {
                            Axis::Horizontal => half.x,
                            Axis::Vertical => half.y,
                        }
                        .max(s.width / 2))
                    }
                    _ => Ok(s.width / 2),
                }
            };
            let ext_from = ext_at(if k == 0 { None } else { joints.get(k - 1) })?;
            let ext_to = ext_at(joints.get(k))?;
            let (pf, pt) = (phys(s.axis, s.from), phys(s.axis, s.to));
            let (lo, hi) = if pf <= pt {
                (pf - ext_from, pt + ext_to)
            } else {
                (pt - ext_to, pf + ext_from)
            };
            let track_phys = match s.axis {
                Axis::Horizontal => g.ygrid().phys(s.track),
                Axis::Vertical => g.xgrid().phys(s.track),
            };
            let id = self.add_wire(Wire {
                layer: s.layer.clone(),
                axis: s.axis,
                grid: grid.to_string(),
                track: s.track,
                track_phys,
                lo,
                hi,
                width: s.width,
                is_pin: false,
                color: None,
            })?;
            out.wires.push(id);
        }
        for (k, via) in joints.into_iter().enumerate() {
            if let Some(v) = via {
                let (x, y) = pts[k + 1];
                let at = Point::new(g.xgrid().phys(x), g.ygrid().phys(y));
                out.vias.push(self.add_via(&v, at)?);
            }
        }
        Ok(out)
    }

    /// Exposes `wire` as pin `name` on `net`.
    pub fn add_pin(&mut self, name: &str, net: &str, wire: WireId) -> Result<&Pin> {
        if let Some(p) = self.pins.iter().find(|p| p.name == name) {
            if p.net != net {
                return Err(Error::DuplicatePin(name.to_string()));
            }
        }
        self.wire_mut(wire)?.is_pin = true;
        self.pins.push(Pin {
            name: name.to_string(),
            net: net.to_string(),
            wire,
        });
        Ok(self.pins.last().unwrap())
    }

    pub fn pin_shape(&self, pin: &Pin) -> Result<Shape> {
        let w = self.wire(pin.wire)?;
        Ok(Shape::new(w.layer.clone(), Purpose::Pin, w.rect()))
    }

    pub fn pin(&self, name: &str) -> Result<&Pin> {
        self.pins
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| Error::UnknownPin(name.to_string()))
    }

    /// Every shape of the design in absolute coordinates.
    pub fn shapes(&self) -> Result<Vec<Shape>> {
        let mut out = Vec::new();
        for vi in &self.instances {
            out.extend(vi.flatten());
            for name in vi.pins.keys() {
                out.push(vi.pin_abs(name)?.shape());
            }
        }
        out.extend(self.wire_shapes());
        for v in &self.vias {
            out.extend(via_shapes(self.tech.via(&v.via)?, v.at));
        }
        for p in &self.pins {
            out.push(self.pin_shape(p)?);
        }
        out.extend(self.rects.iter().cloned());
        Ok(out)
    }

    /// Wire rects plus mask-color markers for colored wires.
    pub fn wire_shapes(&self) -> Vec<Shape> {
        let mut out = Vec::new();
        for w in self.wires.values() {
            out.push(Shape::drawing(w.layer.clone(), w.rect()));
            if let Some(c) = w.color {
                let purpose = match c {
                    MaskColor::A => Purpose::ColorA,
                    MaskColor::B => Purpose::ColorB,
                };
                out.push(Shape::new(w.layer.clone(), purpose, w.rect()));
            }
        }
        out
    }

    /// Bounding box of all geometry.
    pub fn bbox(&self) -> Result<Option<Rect>> {
        let shapes = self.shapes()?;
        Ok(Rect::bounding(shapes.iter().map(|s| &s.rect)))
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::grid::{generate_routing_grid, AxisSpec, GridSpec, OneDimGrid, TrackClass};

    pub(crate) fn tech() -> Arc<TechDb> {
        Arc::new(
            TechDb::load(
                r#"{
                "name": "unit",
                "layers": [
                    {"name":"m1","gds":[10,0],"kind":"metal","min_width":20,"min_spacing":20},
                    {"name":"v1","gds":[11,0],"kind":"via","min_width":20,"min_spacing":20},
                    {"name":"m2","gds":[12,0],"kind":"metal","min_width":20,"min_spacing":20},
                    {"name":"m3","gds":[14,0],"kind":"metal","min_width":20,"min_spacing":20}
                ],
                "vias": [{"name":"via1","lower":"m1","upper":"m2","layer":"v1","size":[20,20],"enclosure":[0,0]}],
                "templates": {"blk": {"kind":"native","size":[40,40],"shapes":[{"layer":"m1","rect":[0,0,40,40]}]}}
            }"#,
            )
            .unwrap(),
        )
    }

    fn routed() -> Design {
        let t = tech();
        let spec = GridSpec {
            x: AxisSpec { layer: "m2".into(), pattern: vec![TrackClass::SIGNAL] },
            y: AxisSpec { layer: "m1".into(), pattern: vec![TrackClass::SIGNAL] },
        };
        let g = generate_routing_grid(&t, &spec, &Rect::from_coords(0, 0, 400, 400)).unwrap();
        let mut d = Design::new("t", t);
        d.add_grid("g", g);
        d
    }

    #[test]
    fn place_examples() {
        let t = tech();
        let vi = crate::template::generate(&t, "blk", &Default::default()).unwrap();
        let mut d = Design::new("p", t);
        let unit = PlacementGrid::new(OneDimGrid::uniform(1).unwrap(), OneDimGrid::uniform(1).unwrap());
        let i = d.place(&vi, &unit, 0, 0, Transform::R0);
        assert_eq!(d.instances[i].origin, Point::new(0, 0));
        let g = OneDimGrid::new(100, vec![0, 40, 85]).unwrap();
        let pg = PlacementGrid::new(g.clone(), g);
        let i = d.place(&vi, &pg, 2, 1, Transform::R0);
        assert_eq!(d.instances[i].origin, Point::new(85, 40));
        let j = d.place(&vi, &pg, 2, 1, Transform::MX);
        assert_eq!(d.instances[j].bbox(), d.instances[i].bbox());
    }

    #[test]
    fn route_examples() {
        let mut d = routed();
        let r = d.route("g", &[(0, 0), (3, 0)]).unwrap();
        assert_eq!((r.wires.len(), r.vias.len()), (1, 0));
        let w = d.wire(r.wires[0]).unwrap();
        assert_eq!((w.axis, w.layer.as_str(), w.lo, w.hi, w.track_phys), (Axis::Horizontal, "m1", -10, 130, 0));

        let r = d.route("g", &[(0, 0), (3, 0), (3, 2)]).unwrap();
        assert_eq!((r.wires.len(), r.vias.len()), (2, 1));
        assert_eq!(d.vias[r.vias[0]].at, Point::new(120, 0));
        let v = d.wire(r.wires[1]).unwrap();
        assert_eq!((v.axis, v.lo, v.hi, v.track_phys), (Axis::Vertical, -10, 90, 120));

        assert!(matches!(d.route("g", &[(0, 0), (2, 3)]), Err(Error::NonRectilinear { .. })));
        assert!(matches!(d.route("g", &[(1, 1), (1, 1)]), Err(Error::TooFewWaypoints)));
    }

    #[test]
    fn missing_via_reported() {
        let t = tech();
        let spec = GridSpec {
            x: AxisSpec { layer: "m3".into(), pattern: vec![TrackClass::SIGNAL] },
            y: AxisSpec { layer: "m1".into(), pattern: vec![TrackClass::SIGNAL] },
        };
        let g = generate_routing_grid(&t, &spec, &Rect::from_coords(0, 0, 400, 400)).unwrap();
        let mut d = Design::new("t", t);
        d.add_grid("g", g);
        assert!(matches!(
            d.route("g", &[(0, 0), (1, 0), (1, 1)]),
            Err(Error::MissingVia { x: 1, y: 0 })
        ));
    }

    #[test]
    fn pins() {
        let mut d = routed();
        let r = d.route("g", &[(0, 0), (3, 0)]).unwrap();
        let w = r.wires[0];
        assert!(!d.wire(w).unwrap().is_pin);
        d.add_pin("a", "n1", w).unwrap();
        assert!(d.wire(w).unwrap().is_pin);
        assert_eq!(d.pin_shape(d.pin("a").unwrap()).unwrap().rect, d.wire(w).unwrap().rect());
        d.add_pin("a", "n1", w).unwrap();
        assert!(matches!(d.add_pin("a", "n2", w), Err(Error::DuplicatePin(_))));
        d.remove_wire(w);
        assert!(matches!(d.add_pin("b", "n1", w), Err(Error::UnknownWire(_))));
        assert!(d.pins.is_empty());
    }
}
