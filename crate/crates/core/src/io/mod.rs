//! Layout output: canonical JSON, GDSII and SVG.

pub mod gds;
mod json;
mod svg;

pub use gds::{decode as decode_gds, encode as encode_gds, to_library, write_gds, GdsElement, GdsLibrary, GdsStructure};
pub use json::{from_document, read_json, to_document, write_json, InstanceRecord, LayoutDocument, RectRecord, WireRecord};
pub use svg::{write_svg, LayerStyle, SvgStyle};
