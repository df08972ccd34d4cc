//! Technology database: layers, design rules, vias, templates, and named
//! grid specs, loaded from a JSON document and validated up front.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::grid::GridSpec;
use crate::template::TemplateDef;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerKind {
    Metal,
    Via,
    Cut,
    #[default]
    Device,
    Marker,
}

/// Cut-mask rule attached to a routing layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutRule {
    /// Layer the cut shapes are drawn on.
    pub layer: String,
    /// Cut extent along the wire.
    pub width: i64,
    /// Cut extent across the wire.
    pub length: i64,
    /// Same-track gaps below this get a cut.
    pub spacing_threshold: i64,
    /// Distance from a boundary wire end to its cut center.
    pub end_margin: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerDef {
    pub name: String,
    #[serde(with = "gds_pair")]
    pub gds: (i16, i16),
    #[serde(default)]
    pub kind: LayerKind,
    pub min_width: i64,
    pub min_spacing: i64,
    #[serde(default)]
    pub min_area: i64,
    #[serde(default)]
    pub colorable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cut: Option<CutRule>,
}

mod gds_pair {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &(i16, i16), s: S) -> Result<S::Ok, S::Error> {
        [v.0, v.1].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(i16, i16), D::Error> {
        let [l, t] = <[i16; 2]>::deserialize(d)?;
        Ok((l, t))
    }
}

/// A via between two routing layers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViaDef {
    pub name: String,
    pub lower: String,
    pub upper: String,
    /// Layer holding the via cut.
    pub layer: String,
    /// Cut size `[w, h]`.
    pub size: Point,
    /// Enclosure beyond the cut on `[lower, upper]`.
    pub enclosure: [i64; 2],
}

impl ViaDef {
    pub fn cut_size(&self) -> Point {
        self.size
    }

    pub fn connects(&self, layer: &str) -> bool {
        self.lower == layer || self.upper == layer
    }

    /// Enclosure on `layer`, zero if the via does not touch it.
    pub fn enclosure_on(&self, layer: &str) -> i64 {
        if self.lower == layer {
            self.enclosure[0]
        } else if self.upper == layer {
            self.enclosure[1]
        } else {
            0
        }
    }

    /// Half the landing pad extent on `layer` along x and y.
    pub fn half_landing(&self, layer: &str) -> Point {
        let e = self.enclosure_on(layer);
        Point::new(self.size.x / 2 + e, self.size.y / 2 + e)
    }
}

fn default_unit() -> i64 {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TechDb {
    pub name: String,
    /// Manufacturing grid in design units.
    #[serde(default = "default_unit")]
    pub unit_nm: i64,
    pub layers: Vec<LayerDef>,
    #[serde(default)]
    pub vias: Vec<ViaDef>,
    #[serde(default)]
    pub templates: BTreeMap<String, TemplateDef>,
    #[serde(default)]
    pub grids: BTreeMap<String, GridSpec>,
}

/// Name of the template used for dummy fill.
pub const DUMMY_TEMPLATE: &str = "dummy";

impl TechDb {
    /// Parses and validates a technology document.
    pub fn load(text: &str) -> Result<TechDb> {
        let db: TechDb = serde_json::from_str(text)?;
        db.validate()?;
        Ok(db)
    }

    pub fn load_file(path: impl AsRef<std::path::Path>) -> Result<TechDb> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::validation(path.display().to_string(), format!("cannot read: {e}"))
        })?;
        Self::load(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.unit_nm <= 0 {
            return Err(Error::validation("unit_nm", "must be positive"));
        }
        let mut names = BTreeSet::new();
        for (i, l) in self.layers.iter().enumerate() {
            let field = |f: &str| format!("layers[{i}].{f}");
            if !names.insert(l.name.as_str()) {
                return Err(Error::validation(field("name"), format!("duplicate layer '{}'", l.name)));
            }
            if l.min_width <= 0 {
                return Err(Error::validation(field("min_width"), "must be positive"));
            }
            if l.min_spacing <= 0 {
                return Err(Error::validation(field("min_spacing"), "must be positive"));
            }
            if l.min_area < 0 {
                return Err(Error::validation(field("min_area"), "must be non-negative"));
            }
        }
        for (i, l) in self.layers.iter().enumerate() {
            let Some(cut) = &l.cut else { continue };
            let field = |f: &str| format!("layers[{i}].cut.{f}");
            if !names.contains(cut.layer.as_str()) {
                return Err(Error::validation(field("layer"), format!("unknown layer '{}'", cut.layer)));
            }
            for (f, v) in [
                ("width", cut.width),
                ("length", cut.length),
                ("spacing_threshold", cut.spacing_threshold),
                ("end_margin", cut.end_margin),
            ] {
                if v <= 0 {
                    return Err(Error::validation(field(f), "must be positive"));
                }
            }
            if cut.width > cut.spacing_threshold {
                return Err(Error::validation(field("width"), "must not exceed spacing_threshold"));
            }
            if cut.spacing_threshold < l.min_spacing {
                return Err(Error::validation(
                    field("spacing_threshold"),
                    "must be at least the layer min_spacing",
                ));
            }
        }
        for (i, v) in self.vias.iter().enumerate() {
            for (f, layer) in [("lower", &v.lower), ("upper", &v.upper), ("layer", &v.layer)] {
                if !names.contains(layer.as_str()) {
                    return Err(Error::validation(
                        format!("vias[{i}].{f}"),
                        format!("unknown layer '{layer}'"),
                    ));
                }
            }
            if v.size.x <= 0 || v.size.y <= 0 {
                return Err(Error::validation(format!("vias[{i}].size"), "must be positive"));
            }
            if v.enclosure.iter().any(|&e| e < 0) {
                return Err(Error::validation(format!("vias[{i}].enclosure"), "must be non-negative"));
            }
        }
        for (name, g) in &self.grids {
            for (axis, spec) in [("x", &g.x), ("y", &g.y)] {
                if !names.contains(spec.layer.as_str()) {
                    return Err(Error::validation(
                        format!("grids.{name}.{axis}.layer"),
                        format!("unknown layer '{}'", spec.layer),
                    ));
                }
            }
        }
        for (name, t) in &self.templates {
            t.validate(name, self)?;
        }
        Ok(())
    }

    pub fn layer(&self, name: &str) -> Result<&LayerDef> {
        self.layers
            .iter()
            .find(|l| l.name == name)
            .ok_or_else(|| Error::UnknownLayer(name.to_string()))
    }

    pub fn has_layer(&self, name: &str) -> bool {
        self.layers.iter().any(|l| l.name == name)
    }

    pub fn min_width(&self, layer: &str) -> Result<i64> {
        Ok(self.layer(layer)?.min_width)
    }

    pub fn min_spacing(&self, layer: &str) -> Result<i64> {
        Ok(self.layer(layer)?.min_spacing)
    }

    pub fn min_area(&self, layer: &str) -> Result<i64> {
        Ok(self.layer(layer)?.min_area)
    }

    pub fn cut_rule(&self, layer: &str) -> Result<Option<&CutRule>> {
        Ok(self.layer(layer)?.cut.as_ref())
    }

    pub fn via(&self, name: &str) -> Result<&ViaDef> {
        self.vias
            .iter()
            .find(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVia(name.to_string()))
    }

    pub fn vias_touching<'a>(&'a self, layer: &'a str) -> impl Iterator<Item = &'a ViaDef> + 'a {
        self.vias.iter().filter(move |v| v.connects(layer))
    }

    /// First via joining `a` and `b` in either order; `None` for the same layer.
    pub fn via_between(&self, a: &str, b: &str) -> Option<&ViaDef> {
        if a == b {
            return None;
        }
        self.vias
            .iter()
            .find(|v| (v.lower == a && v.upper == b) || (v.lower == b && v.upper == a))
    }

    pub fn template(&self, name: &str) -> Result<&TemplateDef> {
        self.templates
            .get(name)
            .ok_or_else(|| Error::UnknownTemplate(name.to_string()))
    }

    pub fn grid_spec(&self, name: &str) -> Result<&GridSpec> {
        self.grids
            .get(name)
            .ok_or_else(|| Error::UnknownGrid(name.to_string()))
    }

    /// Routing layers that carry a cut rule, in declaration order.
    pub fn cut_layers(&self) -> impl Iterator<Item = &LayerDef> {
        self.layers.iter().filter(|l| l.cut.is_some())
    }

    pub fn has_cut_rules(&self) -> bool {
        self.cut_layers().next().is_some()
    }

    /// Layers covered by the spacing check.
    pub fn drc_layers(&self) -> impl Iterator<Item = &LayerDef> {
        self.layers
            .iter()
            .filter(|l| matches!(l.kind, LayerKind::Metal | LayerKind::Via | LayerKind::Device))
    }

    /// Rounds `v` up to the manufacturing grid.
    pub fn snap_up(&self, v: i64) -> i64 {
        let u = self.unit_nm;
        v.div_euclid(u) * u + if v.rem_euclid(u) == 0 { 0 } else { u }
    }

    /// Rounds `v` down to the manufacturing grid.
    pub fn snap_down(&self, v: i64) -> i64 {
        v.div_euclid(self.unit_nm) * self.unit_nm
    }
}
