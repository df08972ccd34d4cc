use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use super::{Design, WireId};
use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::grid::{generate_routing_grid, GridSpec};
use crate::postprocess;
use crate::tech::TechDb;
use crate::template::{resolve_params, ParamSpec, Params, VirtualInstance};

/// Wires per net produced by the routing stage.
pub type Nets = BTreeMap<String, Vec<WireId>>;

/// Name and parameter schema of a generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneratorSpec {
    pub name: String,
    pub description: String,
    pub params: BTreeMap<String, ParamSpec>,
}

/// One layout generator, split into the pipeline stages.
pub trait Generator {
    fn spec(&self) -> GeneratorSpec;

    fn instances(&self, tech: &TechDb, params: &Params) -> Result<Vec<VirtualInstance>>;

    /// Places instances and sets the design's placement grid.
    fn place(&self, d: &mut Design, params: &Params, instances: Vec<VirtualInstance>) -> Result<()>;

    /// Track pattern and region of the routing grid.
    fn grid(&self, d: &Design, params: &Params) -> Result<(GridSpec, Rect)>;

    fn route(&self, d: &mut Design, grid: &str, params: &Params) -> Result<Nets>;

    fn pin(&self, d: &mut Design, nets: &Nets, params: &Params) -> Result<()>;

    /// Area handed to dummy fill.
    fn fill_region(&self, d: &Design) -> Option<Rect> {
        default_fill_region(d)
    }
}

/// The placed instances plus one placement site all round.
pub fn default_fill_region(d: &Design) -> Option<Rect> {
    let bbox = d.instance_bbox()?;
    let pg = d.placement.as_ref()?;
    let sx = pg.x.phys(1) - pg.x.phys(0);
    let sy = pg.y.phys(1) - pg.y.phys(0);
    Some(bbox.expand(sx, sy))
}

/// Post-processing switches; everything on by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlowFlags {
    pub min_area: bool,
    pub cuts: bool,
    pub colors: bool,
    pub color_offset: i64,
    pub dummies: bool,
}

impl Default for FlowFlags {
    fn default() -> Self {
        Self {
            min_area: true,
            cuts: true,
            colors: true,
            color_offset: 0,
            dummies: true,
        }
    }
}

/// Name under which the flow registers its routing grid.
pub const ROUTE_GRID: &str = "route";

pub(crate) fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage {
        stage: name,
        source: Box::new(e),
    })
}

/// Runs every stage of `gen` and the post-processing passes the technology
/// supports.
pub fn run_flow(
    gen: &dyn Generator,
    tech: Arc<TechDb>,
    params: &Params,
    flags: &FlowFlags,
) -> Result<Design> {
    let spec = gen.spec();
    let params = stage("parameters", resolve_params(&spec.params, params))?;
    let mut d = Design::new(spec.name.clone(), tech.clone());

    let instances = stage("instance generation", gen.instances(&tech, &params))?;
    stage("placement", gen.place(&mut d, &params, instances))?;
    stage(
        "routing-grid generation",
        gen.grid(&d, &params).and_then(|(gs, region)| {
            let g = generate_routing_grid(&tech, &gs, &region)?;
            d.add_grid(ROUTE_GRID, g);
            Ok(())
        }),
    )?;
    let nets = stage("routing", gen.route(&mut d, ROUTE_GRID, &params))?;
    stage("pinning", gen.pin(&mut d, &nets, &params))?;

    let region = gen.fill_region(&d);
    postprocess::apply(&mut d, flags, region.as_ref())?;
    Ok(d)
}
