//! Cyclic mappings, periodic grid axes, and routing grids.

mod axis;
mod mapping;
mod routing;

pub use axis::{Cmp, OneDimGrid};
pub use mapping::{slice_indices, CircularMapping, CircularMappingArray};
pub use routing::{
    generate_routing_grid, AxisLayout, AxisSpec, GridSpec, GridWindow, MaskColor, RoutingGrid,
    TrackClass, TrackKind,
};

use serde::{Deserialize, Serialize};

use crate::geometry::Point;

/// Placement grid: abstract `(x, y)` sites map to physical origins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacementGrid {
    pub x: OneDimGrid,
    pub y: OneDimGrid,
}

impl PlacementGrid {
    pub fn new(x: OneDimGrid, y: OneDimGrid) -> Self {
        Self { x, y }
    }

    pub fn phys(&self, x: i64, y: i64) -> Point {
        Point::new(self.x.phys(x), self.y.phys(y))
    }
}
