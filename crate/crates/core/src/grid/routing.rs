use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::tech::TechDb;

use super::{CircularMapping, CircularMappingArray, Cmp, OneDimGrid};

/// Multiple-patterning mask assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MaskColor {
    A,
    B,
}

impl MaskColor {
    pub fn other(self) -> MaskColor {
        match self {
            MaskColor::A => MaskColor::B,
            MaskColor::B => MaskColor::A,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrackKind {
    #[default]
    Signal,
    Power,
}

fn one() -> i64 {
    1
}

/// One entry of a track pattern: its class and width multiplier.
///
/// Reads either a bare kind (`"signal"`) or `{"kind": "power", "wmul": 3}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "RawTrackClass")]
pub struct TrackClass {
    pub kind: TrackKind,
    #[serde(default = "one")]
    pub wmul: i64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawTrackClass {
    Bare(TrackKind),
    Full {
        kind: TrackKind,
        #[serde(default = "one")]
        wmul: i64,
    },
}

impl From<RawTrackClass> for TrackClass {
    fn from(r: RawTrackClass) -> Self {
        match r {
            RawTrackClass::Bare(kind) => TrackClass { kind, wmul: 1 },
            RawTrackClass::Full { kind, wmul } => TrackClass { kind, wmul },
        }
    }
}

impl TrackClass {
    pub const SIGNAL: TrackClass = TrackClass {
        kind: TrackKind::Signal,
        wmul: 1,
    };

    pub fn power(wmul: i64) -> Self {
        Self {
            kind: TrackKind::Power,
            wmul,
        }
    }
}

/// Track pattern for one routing direction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AxisSpec {
    pub layer: String,
    pub pattern: Vec<TrackClass>,
}

/// Parameters for generating a routing grid: vertical tracks (positions
/// along x) and horizontal tracks (positions along y).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    pub x: AxisSpec,
    pub y: AxisSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dir {
    /// Tracks stacked along x (vertical wires).
    X,
    Y,
}

/// Laid-out tracks of one axis before packaging into a grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxisLayout {
    pub period: i64,
    pub coords: Vec<i64>,
    pub widths: Vec<i64>,
    pub classes: Vec<TrackClass>,
}

impl AxisSpec {
    fn layout(&self, tech: &TechDb, dir: Dir) -> Result<AxisLayout> {
        if self.pattern.is_empty() {
            return Err(Error::InfeasibleSpec(format!(
                "empty track pattern on layer '{}'",
                self.layer
            )));
        }
        let layer = tech.layer(&self.layer)?;
        let mut pattern = self.pattern.clone();
        // An odd pattern cannot alternate masks cyclically; run it twice.
        if layer.colorable && pattern.len() % 2 == 1 {
            pattern.extend(self.pattern.iter().copied());
        }
        let landing = tech
            .vias_touching(&self.layer)
            .map(|v| {
                let (cut, enc) = (v.cut_size(), v.enclosure_on(&self.layer));
                match dir {
                    Dir::X => cut.x + 2 * enc,
                    Dir::Y => cut.y + 2 * enc,
                }
            })
            .max()
            .unwrap_or(0);
        let mut widths = Vec::with_capacity(pattern.len());
        for (k, class) in pattern.iter().enumerate() {
            if class.wmul < 1 {
                return Err(Error::InfeasibleSpec(format!(
                    "track {k} width multiplier {} must be >= 1",
                    class.wmul
                )));
            }
            widths.push(layer.min_width * class.wmul);
        }
        let footprint = |k: usize| widths[k].max(landing);
        // center distance between neighbours: half of each footprint plus spacing
        let step = |a: usize, b: usize| {
            let sum = footprint(a) + footprint(b);
            (sum + 1) / 2 + layer.min_spacing
        };
        let n = pattern.len();
        let mut coords = Vec::with_capacity(n);
        let mut c = 0;
        for k in 0..n {
            coords.push(c);
            c += step(k, (k + 1) % n);
        }
        Ok(AxisLayout {
            period: c,
            coords,
            widths,
            classes: pattern,
        })
    }
}

impl GridSpec {
    /// Period of each axis (x, y) this spec would produce.
    pub fn periods(&self, tech: &TechDb) -> Result<(i64, i64)> {
        Ok((
            self.x.layout(tech, Dir::X)?.period,
            self.y.layout(tech, Dir::Y)?.period,
        ))
    }
}

/// A periodic routing grid with per-track attributes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawRoutingGrid")]
pub struct RoutingGrid {
    xgrid: OneDimGrid,
    ygrid: OneDimGrid,
    vlayer: CircularMapping<String>,
    hlayer: CircularMapping<String>,
    vwidth: CircularMapping<i64>,
    hwidth: CircularMapping<i64>,
    vclass: CircularMapping<TrackClass>,
    hclass: CircularMapping<TrackClass>,
    viamap: CircularMappingArray<Option<String>>,
    xcolor: CircularMapping<Option<MaskColor>>,
    ycolor: CircularMapping<Option<MaskColor>>,
}

#[derive(Deserialize)]
struct RawRoutingGrid {
    xgrid: OneDimGrid,
    ygrid: OneDimGrid,
    vlayer: CircularMapping<String>,
    hlayer: CircularMapping<String>,
    vwidth: CircularMapping<i64>,
    hwidth: CircularMapping<i64>,
    vclass: CircularMapping<TrackClass>,
    hclass: CircularMapping<TrackClass>,
    viamap: CircularMappingArray<Option<String>>,
    xcolor: CircularMapping<Option<MaskColor>>,
    ycolor: CircularMapping<Option<MaskColor>>,
}

impl TryFrom<RawRoutingGrid> for RoutingGrid {
    type Error = Error;
    fn try_from(r: RawRoutingGrid) -> Result<Self> {
        let g = RoutingGrid {
            xgrid: r.xgrid,
            ygrid: r.ygrid,
            vlayer: r.vlayer,
            hlayer: r.hlayer,
            vwidth: r.vwidth,
            hwidth: r.hwidth,
            vclass: r.vclass,
            hclass: r.hclass,
            viamap: r.viamap,
            xcolor: r.xcolor,
            ycolor: r.ycolor,
        };
        g.validate()?;
        Ok(g)
    }
}

impl RoutingGrid {
    fn validate(&self) -> Result<()> {
        let (nx, ny) = (self.xgrid.len(), self.ygrid.len());
        let x_ok = [self.vlayer.len(), self.vwidth.len(), self.vclass.len(), self.xcolor.len()]
            .iter()
            .all(|&l| l == nx);
        let y_ok = [self.hlayer.len(), self.hwidth.len(), self.hclass.len(), self.ycolor.len()]
            .iter()
            .all(|&l| l == ny);
        if !x_ok || !y_ok || self.viamap.shape() != (nx, ny) {
            return Err(Error::InvalidGrid(
                "track attribute lengths must match axis coordinate counts".into(),
            ));
        }
        if self
            .vwidth
            .elements()
            .iter()
            .chain(self.hwidth.elements())
            .any(|&w| w <= 0)
        {
            return Err(Error::InvalidGrid("track widths must be positive".into()));
        }
        Ok(())
    }

    pub fn xgrid(&self) -> &OneDimGrid {
        &self.xgrid
    }

    pub fn ygrid(&self) -> &OneDimGrid {
        &self.ygrid
    }

    pub fn vlayer(&self, x: i64) -> &str {
        self.vlayer.get(x)
    }

    pub fn hlayer(&self, y: i64) -> &str {
        self.hlayer.get(y)
    }

    pub fn vwidth(&self, x: i64) -> i64 {
        *self.vwidth.get(x)
    }

    pub fn hwidth(&self, y: i64) -> i64 {
        *self.hwidth.get(y)
    }

    pub fn vclass(&self, x: i64) -> TrackClass {
        *self.vclass.get(x)
    }

    pub fn hclass(&self, y: i64) -> TrackClass {
        *self.hclass.get(y)
    }

    pub fn via(&self, x: i64, y: i64) -> Option<&str> {
        self.viamap.get(x, y).as_deref()
    }

    pub fn xcolor(&self) -> &CircularMapping<Option<MaskColor>> {
        &self.xcolor
    }

    pub fn ycolor(&self) -> &CircularMapping<Option<MaskColor>> {
        &self.ycolor
    }

    pub fn vwidths(&self) -> &CircularMapping<i64> {
        &self.vwidth
    }

    pub fn hwidths(&self) -> &CircularMapping<i64> {
        &self.hwidth
    }

    /// Inclusive abstract index window of grid points inside `a ∩ b`.
    pub fn overlap_range(&self, a: &Rect, b: &Rect) -> Option<GridWindow> {
        let ix = a.intersection(b)?;
        let x = self.xgrid.indices_within(ix.lo().x, ix.hi().x)?;
        let y = self.ygrid.indices_within(ix.lo().y, ix.hi().y)?;
        Some(GridWindow { x, y })
    }

    /// Abstract x-track indices whose centers fall in `[lo, hi)`.
    pub fn x_tracks_in(&self, lo: i64, hi: i64) -> Vec<i64> {
        tracks_in(&self.xgrid, lo, hi)
    }

    pub fn y_tracks_in(&self, lo: i64, hi: i64) -> Vec<i64> {
        tracks_in(&self.ygrid, lo, hi)
    }
}

fn tracks_in(g: &OneDimGrid, lo: i64, hi: i64) -> Vec<i64> {
    let first = g.index_where(Cmp::Ge, lo).expect("ordering comparisons never fail");
    let last = g.index_where(Cmp::Lt, hi).expect("ordering comparisons never fail");
    (first..=last).collect()
}

/// Inclusive `(first, last)` index ranges per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridWindow {
    pub x: (i64, i64),
    pub y: (i64, i64),
}

/// Builds a routing grid from a track-pattern spec.
///
/// Neighbouring track centers sit half of each track's footprint plus the
/// layer spacing apart, where a footprint is the larger of the track width
/// and the widest via landing on that layer. One pass over the pattern is
/// one grid period.
pub fn generate_routing_grid(tech: &TechDb, spec: &GridSpec, region: &Rect) -> Result<RoutingGrid> {
    if region.width() <= 0 || region.height() <= 0 {
        return Err(Error::InfeasibleSpec(format!("region {region} is empty")));
    }
    let xl = spec.x.layout(tech, Dir::X)?;
    let yl = spec.y.layout(tech, Dir::Y)?;
    if xl.period > region.width() || yl.period > region.height() {
        return Err(Error::InfeasibleSpec(format!(
            "grid period ({}, {}) exceeds region {}",
            xl.period, yl.period, region
        )));
    }
    let colors = |layer: &str, n: usize| -> Result<Vec<Option<MaskColor>>> {
        let colorable = tech.layer(layer)?.colorable;
        Ok((0..n)
            .map(|k| colorable.then_some(if k % 2 == 0 { MaskColor::A } else { MaskColor::B }))
            .collect())
    };
    let via = tech.via_between(&spec.x.layer, &spec.y.layer).map(|v| v.name.clone());
    let viamap = vec![vec![via; yl.coords.len()]; xl.coords.len()];
    let g = RoutingGrid {
        xcolor: CircularMapping::new(colors(&spec.x.layer, xl.coords.len())?)?,
        ycolor: CircularMapping::new(colors(&spec.y.layer, yl.coords.len())?)?,
        vlayer: CircularMapping::new(vec![spec.x.layer.clone(); xl.coords.len()])?,
        hlayer: CircularMapping::new(vec![spec.y.layer.clone(); yl.coords.len()])?,
        vwidth: CircularMapping::new(xl.widths)?,
        hwidth: CircularMapping::new(yl.widths)?,
        vclass: CircularMapping::new(xl.classes)?,
        hclass: CircularMapping::new(yl.classes)?,
        xgrid: OneDimGrid::new(xl.period, xl.coords)?,
        ygrid: OneDimGrid::new(yl.period, yl.coords)?,
        viamap: CircularMappingArray::new(viamap)?,
    };
    g.validate()?;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tech(colorable: bool) -> TechDb {
        TechDb::load(&format!(
            r#"{{"name":"g","layers":[
                {{"name":"m1","gds":[1,0],"min_width":20,"min_spacing":20,"colorable":{colorable}}},
                {{"name":"m2","gds":[2,0],"min_width":20,"min_spacing":20}}
            ]}}"#
        ))
        .unwrap()
    }

    fn spec(x: Vec<TrackClass>, y: Vec<TrackClass>) -> GridSpec {
        GridSpec {
            x: AxisSpec { layer: "m1".into(), pattern: x },
            y: AxisSpec { layer: "m2".into(), pattern: y },
        }
    }

    fn region() -> Rect {
        Rect::from_coords(0, 0, 1000, 1000)
    }

    #[test]
    fn single_signal_track_pitch() {
        let g = generate_routing_grid(&tech(false), &spec(vec![TrackClass::SIGNAL], vec![TrackClass::SIGNAL]), &region())
            .unwrap();
        assert_eq!(g.xgrid().period(), 40);
        assert_eq!(g.xgrid().coords(), &[0]);
        assert_eq!(g.vwidth(0), 20);
        assert_eq!(g.xcolor().get(0), &None);
    }

    #[test]
    fn power_track_gets_extra_room() {
        let s = TrackClass::SIGNAL;
        let g = generate_routing_grid(&tech(false), &spec(vec![s], vec![s, s, TrackClass::power(3)]), &region())
            .unwrap();
        // steps: (20+20)/2+20, (20+60)/2+20, (60+20)/2+20
        assert_eq!(g.ygrid().coords(), &[0, 40, 100]);
        assert_eq!(g.ygrid().period(), 160);
        assert_eq!(g.hwidth(2), 60);
        assert_eq!(g.hclass(5).kind, TrackKind::Power);
    }

    #[test]
    fn colorable_odd_pattern_is_doubled() {
        let g = generate_routing_grid(&tech(true), &spec(vec![TrackClass::SIGNAL; 3], vec![TrackClass::SIGNAL]), &region())
            .unwrap();
        assert_eq!(g.xgrid().len(), 6);
        let colors: Vec<_> = (0..8).map(|i| *g.xcolor().get(i)).collect();
        for w in colors.windows(2) {
            assert!(w[0].is_some() && w[0] != w[1]);
        }
    }

    #[test]
    fn infeasible_specs() {
        let t = tech(false);
        let e = generate_routing_grid(&t, &spec(vec![], vec![TrackClass::SIGNAL]), &region());
        assert!(matches!(e, Err(Error::InfeasibleSpec(_))));
        let small = Rect::from_coords(0, 0, 30, 30);
        let e = generate_routing_grid(&t, &spec(vec![TrackClass::SIGNAL], vec![TrackClass::SIGNAL]), &small);
        assert!(matches!(e, Err(Error::InfeasibleSpec(_))));
        let mut bad = spec(vec![TrackClass::SIGNAL], vec![TrackClass::SIGNAL]);
        bad.x.layer = "m7".into();
        assert!(matches!(generate_routing_grid(&t, &bad, &region()), Err(Error::UnknownLayer(_))));
    }

    fn grid_on_85() -> RoutingGrid {
        let s = TrackClass::SIGNAL;
        let g = generate_routing_grid(&tech(false), &spec(vec![s; 3], vec![s; 3]), &region()).unwrap();
        let mut v = serde_json::to_value(&g).unwrap();
        let axis = serde_json::json!({"period": 100, "coords": [0, 40, 85]});
        v["xgrid"] = axis.clone();
        v["ygrid"] = axis;
        serde_json::from_value(v).unwrap()
    }

    #[test]
    fn overlap_windows() {
        let g = grid_on_85();
        let a = Rect::from_coords(0, 0, 100, 100);
        assert_eq!(g.overlap_range(&a, &a).unwrap().x, (0, 3));
        let far = Rect::from_coords(500, 500, 600, 600);
        assert_eq!(g.overlap_range(&a, &far), None);
        let (p, q) = (Rect::from_coords(0, 0, 50, 50), Rect::from_coords(40, 40, 90, 90));
        assert_eq!(g.overlap_range(&p, &q).unwrap().x, (1, 1));
    }

    #[test]
    fn mismatched_attributes_rejected() {
        let mut v = serde_json::to_value(grid_on_85()).unwrap();
        v["xgrid"] = serde_json::json!({"period": 100, "coords": [0, 40]});
        assert!(serde_json::from_value::<RoutingGrid>(v).is_err());
    }

    fn arb_class() -> impl Strategy<Value = TrackClass> {
        prop_oneof![Just(TrackClass::SIGNAL), (1i64..5).prop_map(TrackClass::power)]
    }

    proptest! {
        #[test]
        fn adjacent_tracks_keep_spacing(
            pat in proptest::collection::vec(arb_class(), 1..6),
            colorable in any::<bool>(),
        ) {
            let t = tech(colorable);
            let g = generate_routing_grid(&t, &spec(pat, vec![TrackClass::SIGNAL]), &Rect::from_coords(0, 0, 10_000, 100))
                .unwrap();
            let n = 2 * g.xgrid().len() as i64;
            for i in 0..n {
                let gap = g.xgrid().phys(i + 1) - g.xgrid().phys(i);
                let need = (g.vwidth(i) + g.vwidth(i + 1)) / 2 + 20;
                prop_assert!(gap >= need, "track {i}: gap {gap} < {need}");
            }
        }
    }
}
