//! Shared routing for generators that drop vertical stubs from a placed
//! array onto horizontal rails in a channel below it.

use std::collections::BTreeMap;

use crate::design::{Design, WireId};
use crate::error::{Error, Result};
use crate::geometry::{Point, Rect};
use crate::grid::{Cmp, GridSpec, RoutingGrid, TrackKind};
use crate::tech::TechDb;
use crate::template::{self, Params};

/// Grid pattern the generators route on.
pub const GRID_SPEC: &str = "channel";

/// Width and height of one placement site, taken from the row end cap.
pub fn site(tech: &TechDb) -> Result<Point> {
    Ok(template::generate(tech, "mos_end", &Params::new())?.size)
}

/// Grid spec plus a region that covers `array` and a rail channel under it
/// deep enough for the requested rail counts.
pub fn channel_grid(tech: &TechDb, array: &Rect, signal: usize, power: usize) -> Result<(GridSpec, Rect)> {
    let spec = tech.grid_spec(GRID_SPEC)?.clone();
    let (_, py) = spec.periods(tech)?;
    let count = |k: TrackKind| spec.y.pattern.iter().filter(|c| c.kind == k).count();
    let (sig_per, pow_per) = (count(TrackKind::Signal), count(TrackKind::Power));
    let periods = if pow_per == 0 {
        (signal + power).div_ceil(sig_per.max(1))
    } else {
        signal.div_ceil(sig_per.max(1)).max(power.div_ceil(pow_per))
    };
    // two spare periods keep the rails off the region edge and the array
    let depth = (periods as i64 + 2) * py;
    let region = Rect::from_coords(array.lo().x, array.lo().y - depth, array.hi().x, array.hi().y);
    Ok((spec, region))
}

/// Assigns rail nets to y-tracks strictly between the channel bottom and
/// the array. Power nets prefer power tracks.
pub fn rail_tracks(
    g: &RoutingGrid,
    channel_lo: i64,
    array_lo: i64,
    signal: &[String],
    power: &[String],
) -> Result<BTreeMap<String, i64>> {
    let mut tracks = g.y_tracks_in(channel_lo, array_lo);
    if tracks.len() < 2 {
        return Err(Error::InfeasibleSpec("rail channel has no interior tracks".into()));
    }
    tracks.remove(0);
    tracks.pop();
    let (mut sig, mut pow): (Vec<i64>, Vec<i64>) =
        tracks.iter().partition(|&&y| g.hclass(y).kind == TrackKind::Signal);
    sig.reverse();
    pow.reverse();
    let mut out = BTreeMap::new();
    for n in signal {
        let y = sig.pop().ok_or_else(|| Error::InfeasibleSpec(format!("no signal track left for '{n}'")))?;
        out.insert(n.clone(), y);
    }
    for n in power {
        let y = pow
            .pop()
            .or_else(|| sig.pop())
            .ok_or_else(|| Error::InfeasibleSpec(format!("no track left for '{n}'")))?;
        out.insert(n.clone(), y);
    }
    Ok(out)
}

/// First y-track at or above `y`.
pub fn track_above(g: &RoutingGrid, y: i64) -> Result<i64> {
    g.ygrid().index_where(Cmp::Ge, y)
}

/// A horizontal rail across x-tracks `x0..=x1`.
pub fn rail(d: &mut Design, grid: &str, y: i64, x0: i64, x1: i64) -> Result<WireId> {
    Ok(d.route(grid, &[(x0, y), (x1, y)])?.wires[0])
}

/// A vertical stub from `top` down to rail track `rail_y`, with the
/// junction via.
pub fn stub(d: &mut Design, grid: &str, x: i64, top: i64, rail_y: i64) -> Result<WireId> {
    let w = d.route(grid, &[(x, top), (x, rail_y)])?.wires[0];
    d.add_grid_via(grid, x, rail_y)?;
    Ok(w)
}
