use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::design::Design;
use crate::error::Result;
use crate::geometry::{Purpose, Rect};

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

#[derive(Debug, Clone, PartialEq)]
pub struct LayerStyle {
    pub fill: String,
    pub opacity: f64,
}

/// Per-layer fill overrides; unlisted layers cycle through a fixed palette.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SvgStyle {
    pub layers: BTreeMap<String, LayerStyle>,
    pub margin: i64,
}

/// Draws every drawing, cut and dummy shape, one group per layer in
/// technology order. The y axis points up as in the layout.
pub fn write_svg(d: &Design, style: &SvgStyle) -> Result<String> {
    let shapes = d.shapes()?;
    let bbox = Rect::bounding(shapes.iter().map(|s| &s.rect))
        .unwrap_or_else(|| Rect::from_coords(0, 0, 1, 1))
        .expand(style.margin, style.margin);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}">"#,
        bbox.lo().x,
        -bbox.hi().y,
        bbox.width(),
        bbox.height()
    );
    for (i, layer) in d.tech.layers.iter().enumerate() {
        let rects: Vec<&Rect> = shapes
            .iter()
            .filter(|s| {
                s.layer == layer.name && matches!(s.purpose, Purpose::Drawing | Purpose::Cut | Purpose::Dummy)
            })
            .map(|s| &s.rect)
            .collect();
        if rects.is_empty() {
            continue;
        }
        let (fill, opacity) = match style.layers.get(&layer.name) {
            Some(s) => (s.fill.clone(), s.opacity),
            None => (PALETTE[i % PALETTE.len()].to_string(), 0.5),
        };
        let _ = writeln!(
            out,
            r#"  <g id="{}" fill="{}" fill-opacity="{}">"#,
            layer.name, fill, opacity
        );
        for r in rects {
            let _ = writeln!(
                out,
                r#"    <rect x="{}" y="{}" width="{}" height="{}"/>"#,
                r.lo().x,
                -r.hi().y,
                r.width(),
                r.height()
            );
        }
        out.push_str("  </g>\n");
    }
    out.push_str("</svg>\n");
    Ok(out)
}
