//! Static and dynamic templates and the virtual instances they produce.
//!
//! A virtual instance groups sub-elements behind one origin, orientation,
//! size and pin set. A sub-element `k` with offset `x_k` and orientation
//! `T_k` inside an instance at origin `x` with orientation `T` and size `s`
//! lands at
//!
//! ```text
//! p_k = x + 0.5·(I − T)·s + T·x_k        orientation T∘T_k
//! ```
//!
//! The offset is rotated by the instance orientation `T`, not by the
//! sub-element's own `T_k`: only this reading keeps the mirrored group inside
//! the same bounding box as the unmirrored one. `T_k` composes into the
//! sub-element's effective orientation instead.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{mat_vec, Point, Purpose, Rect, Shape, Transform};
use crate::tech::TechDb;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Bool(bool),
    Int(i64),
    Str(String),
}

impl std::fmt::Display for ParamValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParamValue::Bool(b) => write!(f, "{b}"),
            ParamValue::Int(i) => write!(f, "{i}"),
            ParamValue::Str(s) => f.write_str(s),
        }
    }
}

impl From<i64> for ParamValue {
    fn from(v: i64) -> Self {
        ParamValue::Int(v)
    }
}

impl From<bool> for ParamValue {
    fn from(v: bool) -> Self {
        ParamValue::Bool(v)
    }
}

impl From<&str> for ParamValue {
    fn from(v: &str) -> Self {
        ParamValue::Str(v.to_string())
    }
}

pub type Params = BTreeMap<String, ParamValue>;

/// Builds a parameter map from `(name, value)` pairs.
pub fn params<I, K, V>(items: I) -> Params
where
    I: IntoIterator<Item = (K, V)>,
    K: Into<String>,
    V: Into<ParamValue>,
{
    items.into_iter().map(|(k, v)| (k.into(), v.into())).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ParamSpec {
    Int {
        default: i64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        min: Option<i64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max: Option<i64>,
    },
    Choice {
        values: Vec<String>,
        default: String,
    },
    Bool {
        default: bool,
    },
}

impl ParamSpec {
    pub fn default_value(&self) -> ParamValue {
        match self {
            ParamSpec::Int { default, .. } => ParamValue::Int(*default),
            ParamSpec::Choice { default, .. } => ParamValue::Str(default.clone()),
            ParamSpec::Bool { default } => ParamValue::Bool(*default),
        }
    }

    pub fn check(&self, name: &str, v: &ParamValue) -> Result<()> {
        match (self, v) {
            (ParamSpec::Int { min, max, .. }, ParamValue::Int(i)) => {
                if min.is_some_and(|m| *i < m) || max.is_some_and(|m| *i > m) {
                    return Err(Error::bad_param(
                        name,
                        format!("{i} outside [{}, {}]", fmt_bound(*min), fmt_bound(*max)),
                    ));
                }
                Ok(())
            }
            (ParamSpec::Choice { values, .. }, ParamValue::Str(s)) => {
                if values.contains(s) {
                    Ok(())
                } else {
                    Err(Error::bad_param(name, format!("'{s}' not one of {values:?}")))
                }
            }
            (ParamSpec::Bool { .. }, ParamValue::Bool(_)) => Ok(()),
            _ => Err(Error::bad_param(name, format!("wrong type for value '{v}'"))),
        }
    }

    /// Parses a command-line string into a value of this spec's type.
    pub fn parse(&self, name: &str, s: &str) -> Result<ParamValue> {
        match self {
            ParamSpec::Int { .. } => s
                .parse()
                .map(ParamValue::Int)
                .map_err(|_| Error::bad_param(name, format!("'{s}' is not an integer"))),
            ParamSpec::Choice { .. } => Ok(ParamValue::Str(s.to_string())),
            ParamSpec::Bool { .. } => s
                .parse()
                .map(ParamValue::Bool)
                .map_err(|_| Error::bad_param(name, format!("'{s}' is not a boolean"))),
        }
    }
}

fn fmt_bound(b: Option<i64>) -> String {
    b.map_or_else(|| "..".to_string(), |v| v.to_string())
}

/// Fills defaults and checks every value against `schema`.
pub fn resolve_params(schema: &BTreeMap<String, ParamSpec>, given: &Params) -> Result<Params> {
    if let Some(k) = given.keys().find(|k| !schema.contains_key(*k)) {
        return Err(Error::bad_param(k.clone(), "unknown parameter"));
    }
    schema
        .iter()
        .map(|(name, spec)| {
            let v = given.get(name).cloned().unwrap_or_else(|| spec.default_value());
            spec.check(name, &v)?;
            Ok((name.clone(), v))
        })
        .collect()
}

/// A pin rectangle with its net.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PinShape {
    pub layer: String,
    pub rect: Rect,
    pub net: String,
}

impl PinShape {
    pub fn shape(&self) -> Shape {
        Shape::new(self.layer.clone(), Purpose::Pin, self.rect)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeDef {
    pub layer: String,
    #[serde(default = "drawing")]
    pub purpose: Purpose,
    pub rect: Rect,
}

fn drawing() -> Purpose {
    Purpose::Drawing
}

impl From<&ShapeDef> for Shape {
    fn from(d: &ShapeDef) -> Self {
        Shape::new(d.layer.clone(), d.purpose, d.rect)
    }
}

/// Fixed geometry mapped one-to-one to an instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NativeTemplate {
    pub size: Point,
    #[serde(default)]
    pub shapes: Vec<ShapeDef>,
    #[serde(default)]
    pub pins: BTreeMap<String, PinShape>,
}

/// Selects the core template, optionally keyed by a choice parameter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoreSelect {
    Fixed(String),
    ByParam {
        param: String,
        map: BTreeMap<String, String>,
    },
}

/// Optional sub-block appended after the cores when a bool parameter is set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extra {
    pub param: String,
    pub template: String,
}

/// Full-bbox marker rect whose layer depends on a choice parameter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Marker {
    pub param: String,
    pub layers: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PinSpan {
    All,
    Cores,
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynamicPin {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub net: Option<String>,
    pub layer: String,
    pub y: [i64; 2],
    pub span: PinSpan,
    /// Pin width for `left`/`right` spans.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<i64>,
}

/// A parameterized row generator: optional boundary dummies around a run of
/// core cells, optional extra blocks, vth-style markers, and pins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynamicTemplate {
    #[serde(default)]
    pub params: BTreeMap<String, ParamSpec>,
    /// Int parameter giving the number of core cells; one core when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<String>,
    pub core: CoreSelect,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<String>,
    #[serde(default)]
    pub extras: Vec<Extra>,
    #[serde(default)]
    pub markers: Vec<Marker>,
    #[serde(default)]
    pub pins: Vec<DynamicPin>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TemplateDef {
    Native(NativeTemplate),
    Dynamic(DynamicTemplate),
}

impl TemplateDef {
    pub(crate) fn validate(&self, name: &str, tech: &TechDb) -> Result<()> {
        let field = |f: &str| format!("templates.{name}.{f}");
        let check_layer = |f: String, layer: &str| {
            if tech.has_layer(layer) {
                Ok(())
            } else {
                Err(Error::validation(f, format!("unknown layer '{layer}'")))
            }
        };
        match self {
            TemplateDef::Native(t) => {
                if t.size.x < 0 || t.size.y < 0 {
                    return Err(Error::validation(field("size"), "must be non-negative"));
                }
                let bbox = Rect::from_size(t.size);
                for (i, s) in t.shapes.iter().enumerate() {
                    check_layer(field(&format!("shapes[{i}].layer")), &s.layer)?;
                }
                for (pin, p) in &t.pins {
                    check_layer(field(&format!("pins.{pin}.layer")), &p.layer)?;
                    if !bbox.contains(&p.rect) {
                        return Err(Error::validation(field(&format!("pins.{pin}.rect")), "outside bbox"));
                    }
                }
            }
            TemplateDef::Dynamic(t) => {
                let native = |f: String, n: &str| match tech.templates.get(n) {
                    Some(TemplateDef::Native(nt)) => Ok(nt),
                    _ => Err(Error::validation(f, format!("'{n}' is not a native template"))),
                };
                for (p, spec) in &t.params {
                    spec.check(p, &spec.default_value())
                        .map_err(|e| Error::validation(field(&format!("params.{p}")), e.to_string()))?;
                }
                let choice = |f: String, p: &str| match t.params.get(p) {
                    Some(ParamSpec::Choice { values, .. }) => Ok(values),
                    _ => Err(Error::validation(f, format!("'{p}' is not a choice parameter"))),
                };
                let mut children = Vec::new();
                match &t.core {
                    CoreSelect::Fixed(n) => children.push(native(field("core"), n)?),
                    CoreSelect::ByParam { param, map } => {
                        for v in choice(field("core.param"), param)? {
                            let n = map.get(v).ok_or_else(|| {
                                Error::validation(field("core.map"), format!("no entry for '{v}'"))
                            })?;
                            children.push(native(field("core.map"), n)?);
                        }
                    }
                }
                if let Some(b) = &t.boundary {
                    children.push(native(field("boundary"), b)?);
                }
                for (i, e) in t.extras.iter().enumerate() {
                    children.push(native(field(&format!("extras[{i}].template")), &e.template)?);
                    if !matches!(t.params.get(&e.param), Some(ParamSpec::Bool { .. })) {
                        return Err(Error::validation(
                            field(&format!("extras[{i}].param")),
                            "must name a bool parameter",
                        ));
                    }
                }
                if children.iter().any(|c| c.size.y != children[0].size.y) {
                    return Err(Error::validation(field("core"), "all blocks must share one height"));
                }
                if let Some(c) = &t.count {
                    if !matches!(t.params.get(c), Some(ParamSpec::Int { .. })) {
                        return Err(Error::validation(field("count"), "must name an int parameter"));
                    }
                }
                for (i, m) in t.markers.iter().enumerate() {
                    for v in choice(field(&format!("markers[{i}].param")), &m.param)? {
                        let layer = m.layers.get(v).ok_or_else(|| {
                            Error::validation(field(&format!("markers[{i}].layers")), format!("no entry for '{v}'"))
                        })?;
                        check_layer(field(&format!("markers[{i}].layers.{v}")), layer)?;
                    }
                }
                for (i, p) in t.pins.iter().enumerate() {
                    check_layer(field(&format!("pins[{i}].layer")), &p.layer)?;
                    if matches!(p.span, PinSpan::Left | PinSpan::Right) && p.width.unwrap_or(0) <= 0 {
                        return Err(Error::validation(field(&format!("pins[{i}].width")), "edge pins need a width"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn params(&self) -> BTreeMap<String, ParamSpec> {
        match self {
            TemplateDef::Native(_) => BTreeMap::new(),
            TemplateDef::Dynamic(t) => t.params.clone(),
        }
    }
}

/// One placed member of a virtual instance, in instance-local coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubElement {
    /// Native template name, or `<markers>` / `<pins>` for raw geometry.
    pub master: String,
    pub shapes: Vec<Shape>,
    pub offset: Point,
    pub transform: Transform,
}

impl SubElement {
    /// Bounding box of this element's geometry in instance-local coordinates.
    pub fn local_bbox(&self) -> Option<Rect> {
        let rects: Vec<Rect> = self
            .shapes
            .iter()
            .map(|s| self.transform.apply_rect(s.rect).translate(self.offset))
            .collect();
        Rect::bounding(&rects)
    }
}

/// A group of sub-elements handled as one instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VirtualInstance {
    pub master: String,
    pub params: Params,
    pub origin: Point,
    pub transform: Transform,
    pub size: Point,
    pub subelements: Vec<SubElement>,
    pub pins: BTreeMap<String, PinShape>,
}

impl VirtualInstance {
    /// Bounding box; identical for every orientation at a given origin.
    pub fn bbox(&self) -> Rect {
        Rect::new(self.origin, self.origin + self.size)
    }

    /// Same instance at a new origin and orientation.
    pub fn placed(&self, origin: Point, transform: Transform) -> VirtualInstance {
        VirtualInstance {
            origin,
            transform,
            ..self.clone()
        }
    }

    /// `x + 0.5·(I − T)·s`: where the local origin lands.
    pub fn anchor(&self) -> Point {
        self.origin + mat_vec(self.transform.half_complement(), self.size)
    }

    /// Maps an instance-local point to absolute coordinates.
    pub fn to_abs(&self, p: Point) -> Point {
        self.anchor() + self.transform.apply(p)
    }

    pub fn to_abs_rect(&self, r: Rect) -> Rect {
        self.transform.apply_rect(r).translate(self.anchor())
    }

    /// Placed origin and effective orientation of sub-element `k`.
    ///
    /// The offset is mapped by the instance orientation `T`, and the member's
    /// own orientation composes under it. Mapping the offset by the member's
    /// orientation instead would leave an R0 member unmoved when the whole
    /// instance is mirrored, which breaks the mirror about the bbox midline.
    ///
    /// # Panics
    ///
    /// Panics if `k` is out of range.
    pub fn place_subelement(&self, k: usize) -> (Point, Transform) {
        let sub = &self.subelements[k];
        (
            self.to_abs(sub.offset),
            Transform::compose(self.transform, sub.transform),
        )
    }

    /// All sub-element geometry in absolute coordinates.
    pub fn flatten(&self) -> Vec<Shape> {
        let mut out = Vec::new();
        for k in 0..self.subelements.len() {
            let (origin, t) = self.place_subelement(k);
            out.extend(
                self.subelements[k]
                    .shapes
                    .iter()
                    .map(|s| s.map_rect(|r| t.apply_rect(r).translate(origin))),
            );
        }
        out
    }

    pub fn pin_abs(&self, name: &str) -> Result<PinShape> {
        let p = self
            .pins
            .get(name)
            .ok_or_else(|| Error::UnknownPin(name.to_string()))?;
        Ok(PinShape {
            layer: p.layer.clone(),
            rect: self.to_abs_rect(p.rect),
            net: p.net.clone(),
        })
    }

    /// `rows × cols` copies stepped by `pitch`, row-major from this origin.
    pub fn array(&self, rows: usize, cols: usize, pitch: Point) -> Vec<VirtualInstance> {
        let mut out = Vec::with_capacity(rows * cols);
        for r in 0..rows as i64 {
            for c in 0..cols as i64 {
                let at = self.origin + Point::new(c * pitch.x, r * pitch.y);
                out.push(self.placed(at, self.transform));
            }
        }
        out
    }
}

/// Instantiates template `name` with `given` parameters at the origin, R0.
pub fn generate(tech: &TechDb, name: &str, given: &Params) -> Result<VirtualInstance> {
    let def = tech.template(name)?;
    match def {
        TemplateDef::Native(t) => {
            if let Some(k) = given.keys().next() {
                return Err(Error::bad_param(k.clone(), "native templates take no parameters"));
            }
            Ok(VirtualInstance {
                master: name.to_string(),
                params: Params::new(),
                origin: Point::ORIGIN,
                transform: Transform::R0,
                size: t.size,
                subelements: vec![SubElement {
                    master: name.to_string(),
                    shapes: t.shapes.iter().map(Shape::from).collect(),
                    offset: Point::ORIGIN,
                    transform: Transform::R0,
                }],
                pins: t.pins.clone(),
            })
        }
        TemplateDef::Dynamic(t) => generate_dynamic(tech, name, t, given),
    }
}

fn native<'a>(tech: &'a TechDb, name: &str) -> Result<&'a NativeTemplate> {
    match tech.template(name)? {
        TemplateDef::Native(n) => Ok(n),
        TemplateDef::Dynamic(_) => Err(Error::UnknownTemplate(name.to_string())),
    }
}

fn generate_dynamic(
    tech: &TechDb,
    name: &str,
    t: &DynamicTemplate,
    given: &Params,
) -> Result<VirtualInstance> {
    let params = resolve_params(&t.params, given)?;
    let str_param = |p: &str| match params.get(p) {
        Some(ParamValue::Str(s)) => Ok(s.as_str()),
        _ => Err(Error::bad_param(p, "missing choice value")),
    };
    let count = match &t.count {
        Some(p) => match params.get(p) {
            Some(ParamValue::Int(n)) if *n >= 1 => *n,
            Some(v) => return Err(Error::bad_param(p.clone(), format!("count must be >= 1, got {v}"))),
            None => return Err(Error::bad_param(p.clone(), "missing count")),
        },
        None => 1,
    };
    let core = match &t.core {
        CoreSelect::Fixed(n) => n.clone(),
        CoreSelect::ByParam { param, map } => map
            .get(str_param(param)?)
            .cloned()
            .ok_or_else(|| Error::bad_param(param.clone(), "no core for value"))?,
    };

    // (template, orientation, is core)
    let mut blocks: Vec<(&str, Transform, bool)> = Vec::new();
    if let Some(b) = &t.boundary {
        blocks.push((b, Transform::R0, false));
    }
    for _ in 0..count {
        blocks.push((&core, Transform::R0, true));
    }
    for e in &t.extras {
        if params.get(&e.param) == Some(&ParamValue::Bool(true)) {
            blocks.push((&e.template, Transform::R0, false));
        }
    }
    if let Some(b) = &t.boundary {
        // right-hand boundary is the mirror image of the left one
        blocks.push((b, Transform::MY, false));
    }

    let mut subelements = Vec::with_capacity(blocks.len() + 2);
    let mut x = 0;
    let mut height = 0;
    let mut cores_span: Option<(i64, i64)> = None;
    for &(block, tr, is_core) in &blocks {
        let nt = native(tech, block)?;
        let w = nt.size.x;
        // A y-mirrored block spans [-w, 0] locally; shift it right by its width.
        let offset = if tr.flips_x() { Point::new(x + w, 0) } else { Point::new(x, 0) };
        subelements.push(SubElement {
            master: block.to_string(),
            shapes: nt.shapes.iter().map(Shape::from).collect(),
            offset,
            transform: tr,
        });
        if is_core {
            cores_span = Some(match cores_span {
                None => (x, x + w),
                Some((lo, _)) => (lo, x + w),
            });
        }
        x += w;
        height = height.max(nt.size.y);
    }
    let size = Point::new(x, height);
    let bbox = Rect::from_size(size);

    let markers: Vec<Shape> = t
        .markers
        .iter()
        .map(|m| {
            let v = str_param(&m.param)?;
            let layer = m.layers.get(v).ok_or_else(|| Error::bad_param(m.param.clone(), "no marker layer"))?;
            Ok(Shape::drawing(layer.clone(), bbox))
        })
        .collect::<Result<_>>()?;
    if !markers.is_empty() {
        subelements.push(SubElement {
            master: "<markers>".into(),
            shapes: markers,
            offset: Point::ORIGIN,
            transform: Transform::R0,
        });
    }

    let (core_lo, core_hi) = cores_span.unwrap_or((0, size.x));
    let mut pins = BTreeMap::new();
    let mut pin_shapes = Vec::new();
    for p in &t.pins {
        let (x0, x1) = match p.span {
            PinSpan::All => (0, size.x),
            PinSpan::Cores => (core_lo, core_hi),
            PinSpan::Left => (0, p.width.unwrap_or(0)),
            PinSpan::Right => (size.x - p.width.unwrap_or(0), size.x),
        };
        let rect = Rect::from_coords(x0, p.y[0], x1, p.y[1]);
        if !bbox.contains(&rect) {
            return Err(Error::bad_param(p.name.clone(), format!("pin {rect} leaves bbox")));
        }
        pin_shapes.push(Shape::drawing(p.layer.clone(), rect));
        pins.insert(
            p.name.clone(),
            PinShape {
                layer: p.layer.clone(),
                rect,
                net: p.net.clone().unwrap_or_else(|| p.name.clone()),
            },
        );
    }
    if !pin_shapes.is_empty() {
        subelements.push(SubElement {
            master: "<pins>".into(),
            shapes: pin_shapes,
            offset: Point::ORIGIN,
            transform: Transform::R0,
        });
    }

    Ok(VirtualInstance {
        master: name.to_string(),
        params,
        origin: Point::ORIGIN,
        transform: Transform::R0,
        size,
        subelements,
        pins,
    })
}
