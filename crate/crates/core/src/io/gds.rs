//! GDSII stream output, plus a reader for the subset the writer emits.

use std::collections::BTreeMap;

use crate::design::Design;
use crate::error::{Error, Result};
use crate::geometry::{Point, Rect, Shape, Transform};
use crate::template::{Params, VirtualInstance};

use super::json::gds_pair;

/// Seconds-free timestamp written into BGNLIB and BGNSTR.
const STAMP: [i16; 12] = [2000, 1, 1, 0, 0, 0, 2000, 1, 1, 0, 0, 0];

mod rec {
    pub const HEADER: u16 = 0x0002;
    pub const BGNLIB: u16 = 0x0102;
    pub const LIBNAME: u16 = 0x0206;
    pub const UNITS: u16 = 0x0305;
    pub const ENDLIB: u16 = 0x0400;
    pub const BGNSTR: u16 = 0x0502;
    pub const STRNAME: u16 = 0x0606;
    pub const ENDSTR: u16 = 0x0700;
    pub const BOUNDARY: u16 = 0x0800;
    pub const SREF: u16 = 0x0A00;
    pub const TEXT: u16 = 0x0C00;
    pub const LAYER: u16 = 0x0D02;
    pub const DATATYPE: u16 = 0x0E02;
    pub const XY: u16 = 0x1003;
    pub const ENDEL: u16 = 0x1100;
    pub const SNAME: u16 = 0x1206;
    pub const TEXTTYPE: u16 = 0x1602;
    pub const STRING: u16 = 0x1906;
    pub const STRANS: u16 = 0x1A01;
    pub const ANGLE: u16 = 0x1C05;
}

#[derive(Debug, Clone, PartialEq)]
pub struct GdsLibrary {
    pub name: String,
    /// Database unit in user units.
    pub user_unit: f64,
    /// Database unit in meters.
    pub meter_unit: f64,
    pub structures: Vec<GdsStructure>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GdsStructure {
    pub name: String,
    pub elements: Vec<GdsElement>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GdsElement {
    Boundary {
        layer: i16,
        datatype: i16,
        xy: Vec<(i32, i32)>,
    },
    Sref {
        name: String,
        reflect: bool,
        angle: f64,
        origin: (i32, i32),
    },
    Text {
        layer: i16,
        texttype: i16,
        origin: (i32, i32),
        string: String,
    },
}

impl GdsElement {
    /// The box drawn by a closed axis-aligned four-corner boundary.
    pub fn rect(&self) -> Option<Rect> {
        let GdsElement::Boundary { xy, .. } = self else {
            return None;
        };
        if xy.len() != 5 || xy[0] != xy[4] {
            return None;
        }
        let r = Rect::from_coords(
            xy[0].0 as i64,
            xy[0].1 as i64,
            xy[2].0 as i64,
            xy[2].1 as i64,
        );
        (rect_loop(&r).ok()? == *xy).then_some(r)
    }

    /// Orientation of a reference, if it is one of the four supported.
    pub fn transform(&self) -> Option<Transform> {
        let GdsElement::Sref { reflect, angle, .. } = self else {
            return None;
        };
        match (*reflect, *angle as i64) {
            (false, 0) => Some(Transform::R0),
            (true, 0) => Some(Transform::MX),
            (true, 180) => Some(Transform::MY),
            (false, 180) => Some(Transform::R180),
            _ => None,
        }
    }
}

fn coord(v: i64) -> Result<i32> {
    i32::try_from(v).map_err(|_| Error::Overflow(v))
}

fn rect_loop(r: &Rect) -> Result<Vec<(i32, i32)>> {
    let (x0, y0, x1, y1) = (coord(r.lo().x)?, coord(r.lo().y)?, coord(r.hi().x)?, coord(r.hi().y)?);
    Ok(vec![(x0, y0), (x1, y0), (x1, y1), (x0, y1), (x0, y0)])
}

fn sref_of(t: Transform) -> (bool, f64) {
    match t {
        Transform::R0 => (false, 0.0),
        Transform::MX => (true, 0.0),
        Transform::MY => (true, 180.0),
        Transform::R180 => (false, 180.0),
    }
}

/// Structure names must be letters, digits, `_`, `?` or `$`.
fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect()
}

fn variant_name(master: &str, params: &Params) -> String {
    let mut name = sanitize(master);
    for (k, v) in params {
        name.push_str(&format!("__{}_{}", sanitize(k), sanitize(&v.to_string())));
    }
    name
}

fn boundaries(d: &Design, shapes: Vec<Shape>) -> Result<Vec<GdsElement>> {
    let mut keyed = shapes
        .into_iter()
        .map(|s| Ok((gds_pair(&d.tech, &s)?, s.rect)))
        .collect::<Result<Vec<_>>>()?;
    keyed.sort();
    keyed
        .into_iter()
        .map(|((layer, datatype), r)| {
            Ok(GdsElement::Boundary {
                layer,
                datatype,
                xy: rect_loop(&r)?,
            })
        })
        .collect()
}

fn label(d: &Design, s: &Shape, name: &str) -> Result<GdsElement> {
    let (layer, texttype) = gds_pair(&d.tech, s)?;
    let c = s.rect.center();
    Ok(GdsElement::Text {
        layer,
        texttype,
        origin: (coord(c.x)?, coord(c.y)?),
        string: name.to_string(),
    })
}

fn master_structure(d: &Design, name: &str, vi: &VirtualInstance) -> Result<GdsStructure> {
    let local = vi.placed(Point::ORIGIN, Transform::R0);
    let mut shapes = local.flatten();
    let mut labels = Vec::new();
    for pin in vi.pins.keys() {
        let s = local.pin_abs(pin)?.shape();
        labels.push(label(d, &s, pin)?);
        shapes.push(s);
    }
    let mut elements = boundaries(d, shapes)?;
    elements.extend(labels);
    Ok(GdsStructure {
        name: name.to_string(),
        elements,
    })
}

/// One structure per distinct instance variant plus the top cell.
pub fn to_library(d: &Design) -> Result<GdsLibrary> {
    let mut masters: BTreeMap<(String, Params), String> = BTreeMap::new();
    let mut structures = Vec::new();
    let mut used = std::collections::BTreeSet::new();
    for vi in &d.instances {
        let key = (vi.master.clone(), vi.params.clone());
        if masters.contains_key(&key) {
            continue;
        }
        let base = variant_name(&vi.master, &vi.params);
        let mut name = base.clone();
        let mut n = 1;
        while used.contains(&name) || name == sanitize(&d.name) {
            name = format!("{base}_{n}");
            n += 1;
        }
        used.insert(name.clone());
        structures.push(master_structure(d, &name, vi)?);
        masters.insert(key, name);
    }
    structures.sort_by(|a, b| a.name.cmp(&b.name));

    let mut shapes = d.wire_shapes();
    for v in &d.vias {
        shapes.extend(crate::design::via_shapes(d.tech.via(&v.via)?, v.at));
    }
    let mut labels = Vec::new();
    for p in &d.pins {
        let s = d.pin_shape(p)?;
        labels.push(label(d, &s, &p.name)?);
        shapes.push(s);
    }
    shapes.extend(d.rects.iter().cloned());
    let mut elements = boundaries(d, shapes)?;
    for vi in &d.instances {
        let (reflect, angle) = sref_of(vi.transform);
        let at = vi.anchor();
        elements.push(GdsElement::Sref {
            name: masters[&(vi.master.clone(), vi.params.clone())].clone(),
            reflect,
            angle,
            origin: (coord(at.x)?, coord(at.y)?),
        });
    }
    elements.extend(labels);
    structures.push(GdsStructure {
        name: sanitize(&d.name),
        elements,
    });
    Ok(GdsLibrary {
        name: sanitize(&d.name),
        user_unit: 1e-3,
        meter_unit: 1e-9,
        structures,
    })
}

pub fn write_gds(d: &Design) -> Result<Vec<u8>> {
    Ok(encode(&to_library(d)?))
}

/// Excess-64 base-16 floating point, as used by GDSII.
pub fn real8(v: f64) -> [u8; 8] {
    if v == 0.0 {
        return [0; 8];
    }
    let mut m = v.abs();
    let mut e: i32 = 0;
    while m >= 1.0 {
        m /= 16.0;
        e += 1;
    }
    while m < 1.0 / 16.0 {
        m *= 16.0;
        e -= 1;
    }
    let mut mant = (m * 2f64.powi(56)).round() as u64;
    if mant >= 1 << 56 {
        mant >>= 4;
        e += 1;
    }
    let mut out = mant.to_be_bytes();
    out[0] = ((v < 0.0) as u8) << 7 | (e + 64) as u8;
    out
}

pub fn from_real8(b: [u8; 8]) -> f64 {
    let sign = if b[0] & 0x80 != 0 { -1.0 } else { 1.0 };
    let e = (b[0] & 0x7f) as i32 - 64;
    let mut mb = b;
    mb[0] = 0;
    let mant = u64::from_be_bytes(mb) as f64 / 2f64.powi(56);
    sign * mant * 16f64.powi(e)
}

struct Writer(Vec<u8>);

impl Writer {
    fn record(&mut self, tag: u16, payload: &[u8]) {
        let len = (4 + payload.len()) as u16;
        self.0.extend_from_slice(&len.to_be_bytes());
        self.0.extend_from_slice(&tag.to_be_bytes());
        self.0.extend_from_slice(payload);
    }

    fn empty(&mut self, tag: u16) {
        self.record(tag, &[]);
    }

    fn i16s(&mut self, tag: u16, vals: &[i16]) {
        let p: Vec<u8> = vals.iter().flat_map(|v| v.to_be_bytes()).collect();
        self.record(tag, &p);
    }

    fn xy(&mut self, pts: &[(i32, i32)]) {
        let p: Vec<u8> = pts
            .iter()
            .flat_map(|(x, y)| x.to_be_bytes().into_iter().chain(y.to_be_bytes()))
            .collect();
        self.record(rec::XY, &p);
    }

    fn string(&mut self, tag: u16, s: &str) {
        let mut p = s.as_bytes().to_vec();
        if p.len() % 2 == 1 {
            p.push(0);
        }
        self.record(tag, &p);
    }
}

pub fn encode(lib: &GdsLibrary) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.i16s(rec::HEADER, &[600]);
    w.i16s(rec::BGNLIB, &STAMP);
    w.string(rec::LIBNAME, &lib.name);
    let mut units = real8(lib.user_unit).to_vec();
    units.extend(real8(lib.meter_unit));
    w.record(rec::UNITS, &units);
    for s in &lib.structures {
        w.i16s(rec::BGNSTR, &STAMP);
        w.string(rec::STRNAME, &s.name);
        for e in &s.elements {
            match e {
                GdsElement::Boundary { layer, datatype, xy } => {
                    w.empty(rec::BOUNDARY);
                    w.i16s(rec::LAYER, &[*layer]);
                    w.i16s(rec::DATATYPE, &[*datatype]);
                    w.xy(xy);
                }
                GdsElement::Sref {
                    name,
                    reflect,
                    angle,
                    origin,
                } => {
                    w.empty(rec::SREF);
                    w.string(rec::SNAME, name);
                    if *reflect || *angle != 0.0 {
                        w.record(rec::STRANS, &(if *reflect { 0x8000u16 } else { 0 }).to_be_bytes());
                        if *angle != 0.0 {
                            w.record(rec::ANGLE, &real8(*angle));
                        }
                    }
                    w.xy(&[*origin]);
                }
                GdsElement::Text {
                    layer,
                    texttype,
                    origin,
                    string,
                } => {
                    w.empty(rec::TEXT);
                    w.i16s(rec::LAYER, &[*layer]);
                    w.i16s(rec::TEXTTYPE, &[*texttype]);
                    w.xy(&[*origin]);
                    w.string(rec::STRING, string);
                }
            }
            w.empty(rec::ENDEL);
        }
        w.empty(rec::ENDSTR);
    }
    w.empty(rec::ENDLIB);
    w.0
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn next(&mut self) -> Result<(u16, &'a [u8])> {
        let hdr = self
            .data
            .get(self.pos..self.pos + 4)
            .ok_or_else(|| Error::Gds(format!("truncated record header at byte {}", self.pos)))?;
        let len = u16::from_be_bytes([hdr[0], hdr[1]]) as usize;
        let tag = u16::from_be_bytes([hdr[2], hdr[3]]);
        if len < 4 || len % 2 == 1 {
            return Err(Error::Gds(format!("bad record length {len} at byte {}", self.pos)));
        }
        let body = self
            .data
            .get(self.pos + 4..self.pos + len)
            .ok_or_else(|| Error::Gds(format!("truncated record at byte {}", self.pos)))?;
        self.pos += len;
        Ok((tag, body))
    }

    fn expect(&mut self, want: u16) -> Result<&'a [u8]> {
        let at = self.pos;
        let (tag, body) = self.next()?;
        if tag != want {
            return Err(Error::Gds(format!("expected record {want:04x}, found {tag:04x} at byte {at}")));
        }
        Ok(body)
    }

    fn peek(&self) -> Option<u16> {
        self.data
            .get(self.pos + 2..self.pos + 4)
            .map(|b| u16::from_be_bytes([b[0], b[1]]))
    }
}

fn i16_at(b: &[u8]) -> Result<i16> {
    b.get(..2)
        .map(|s| i16::from_be_bytes([s[0], s[1]]))
        .ok_or_else(|| Error::Gds("short integer record".into()))
}

fn text(b: &[u8]) -> Result<String> {
    let end = b.iter().rposition(|&c| c != 0).map_or(0, |i| i + 1);
    String::from_utf8(b[..end].to_vec()).map_err(|_| Error::Gds("non-UTF-8 string".into()))
}

fn points(b: &[u8]) -> Result<Vec<(i32, i32)>> {
    if !b.len().is_multiple_of(8) {
        return Err(Error::Gds("XY record length is not a multiple of 8".into()));
    }
    Ok(b.chunks(8)
        .map(|c| {
            (
                i32::from_be_bytes([c[0], c[1], c[2], c[3]]),
                i32::from_be_bytes([c[4], c[5], c[6], c[7]]),
            )
        })
        .collect())
}

fn real_at(b: &[u8], k: usize) -> Result<f64> {
    let s = b
        .get(8 * k..8 * k + 8)
        .ok_or_else(|| Error::Gds("short real record".into()))?;
    Ok(from_real8(s.try_into().unwrap()))
}

/// Parses the record subset produced by [`encode`].
pub fn decode(data: &[u8]) -> Result<GdsLibrary> {
    let mut r = Reader { data, pos: 0 };
    r.expect(rec::HEADER)?;
    r.expect(rec::BGNLIB)?;
    let name = text(r.expect(rec::LIBNAME)?)?;
    let units = r.expect(rec::UNITS)?;
    let (user_unit, meter_unit) = (real_at(units, 0)?, real_at(units, 1)?);
    let mut structures = Vec::new();
    loop {
        let at = r.pos;
        match r.next()? {
            (rec::ENDLIB, _) => break,
            (rec::BGNSTR, _) => {}
            (tag, _) => return Err(Error::Gds(format!("unexpected record {tag:04x} at byte {at}"))),
        }
        let sname = text(r.expect(rec::STRNAME)?)?;
        let mut elements = Vec::new();
        loop {
            let at = r.pos;
            let el = match r.next()?.0 {
                rec::ENDSTR => break,
                rec::BOUNDARY => {
                    let layer = i16_at(r.expect(rec::LAYER)?)?;
                    let datatype = i16_at(r.expect(rec::DATATYPE)?)?;
                    let xy = points(r.expect(rec::XY)?)?;
                    GdsElement::Boundary { layer, datatype, xy }
                }
                rec::SREF => {
                    let name = text(r.expect(rec::SNAME)?)?;
                    let (mut reflect, mut angle) = (false, 0.0);
                    if r.peek() == Some(rec::STRANS) {
                        reflect = i16_at(r.expect(rec::STRANS)?)? as u16 & 0x8000 != 0;
                        if r.peek() == Some(rec::ANGLE) {
                            angle = real_at(r.expect(rec::ANGLE)?, 0)?;
                        }
                    }
                    let xy = points(r.expect(rec::XY)?)?;
                    let origin = *xy.first().ok_or_else(|| Error::Gds("empty SREF XY".into()))?;
                    GdsElement::Sref {
                        name,
                        reflect,
                        angle,
                        origin,
                    }
                }
                rec::TEXT => {
                    let layer = i16_at(r.expect(rec::LAYER)?)?;
                    let texttype = i16_at(r.expect(rec::TEXTTYPE)?)?;
                    let xy = points(r.expect(rec::XY)?)?;
                    let origin = *xy.first().ok_or_else(|| Error::Gds("empty TEXT XY".into()))?;
                    let string = text(r.expect(rec::STRING)?)?;
                    GdsElement::Text {
                        layer,
                        texttype,
                        origin,
                        string,
                    }
                }
                tag => return Err(Error::Gds(format!("unsupported record {tag:04x} at byte {at}"))),
            };
            r.expect(rec::ENDEL)?;
            elements.push(el);
        }
        structures.push(GdsStructure {
            name: sname,
            elements,
        });
    }
    if r.pos != data.len() {
        return Err(Error::Gds(format!("{} trailing bytes after ENDLIB", data.len() - r.pos)));
    }
    Ok(GdsLibrary {
        name,
        user_unit,
        meter_unit,
        structures,
    })
}
