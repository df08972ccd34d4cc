use std::collections::BTreeMap;

use super::channel::{self, channel_grid, rail_tracks, site, track_above};
use crate::design::{Design, Generator, GeneratorSpec, Nets};
use crate::error::{Error, Result};
use crate::geometry::{Rect, Transform};
use crate::grid::{Cmp, GridSpec, OneDimGrid, PlacementGrid};
use crate::tech::TechDb;
use crate::template::{self, ParamSpec, ParamValue, Params, VirtualInstance};

/// A row of abutting scan cells. Each cell's `scan_out` edge pin meets the
/// next cell's `scan_in`; `clk` and `se` drop to shared channel rails, and
/// the chain ends are brought out on the channel's I/O track.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScanChain;

impl Generator for ScanChain {
    fn spec(&self) -> GeneratorSpec {
        GeneratorSpec {
            name: "scan".into(),
            description: "chain of abutting scan flip-flop cells".into(),
            params: BTreeMap::from([
                ("n_bits".into(), ParamSpec::Int { default: 4, min: Some(1), max: Some(1024) }),
                ("levelshift".into(), ParamSpec::Bool { default: false }),
            ]),
        }
    }

    fn instances(&self, tech: &TechDb, p: &Params) -> Result<Vec<VirtualInstance>> {
        let n = match p.get("n_bits") {
            Some(ParamValue::Int(n)) => *n as usize,
            _ => return Err(Error::bad_param("n_bits", "expected an integer")),
        };
        let cell = template::generate(tech, "scancell", &template::params([("levelshift", p["levelshift"].clone())]))?;
        Ok(vec![cell; n])
    }

    fn place(&self, d: &mut Design, _p: &Params, instances: Vec<VirtualInstance>) -> Result<()> {
        let s = site(&d.tech)?;
        let pg = PlacementGrid::new(OneDimGrid::uniform(s.x)?, OneDimGrid::uniform(s.y)?);
        let mut x = 0;
        for vi in &instances {
            d.place(vi, &pg, x, 0, Transform::R0);
            x += vi.size.x / s.x;
        }
        d.set_placement_grid(pg);
        Ok(())
    }

    fn grid(&self, d: &Design, _p: &Params) -> Result<(GridSpec, Rect)> {
        let bbox = d.instance_bbox().ok_or(Error::InfeasibleSpec("nothing placed".into()))?;
        channel_grid(&d.tech, &bbox, 3, 0)
    }

    fn route(&self, d: &mut Design, grid: &str, _p: &Params) -> Result<Nets> {
        let g = d.grid(grid)?.clone();
        let bbox = d.instance_bbox().unwrap();
        let (_, region) = channel_grid(&d.tech, &bbox, 3, 0)?;
        let names = ["clk", "se", "io"].map(String::from);
        let rails = rail_tracks(&g, region.lo().y, bbox.lo().y, &names, &[])?;

        let xs = g.x_tracks_in(bbox.lo().x, bbox.hi().x);
        let (x0, x1) = (xs[0], *xs.last().unwrap());
        let mut nets = Nets::new();
        for net in ["clk", "se"] {
            let w = channel::rail(d, grid, rails[net], x0, x1)?;
            nets.entry(net.to_string()).or_default().push(w);
        }

        let cells: Vec<VirtualInstance> = d.instances.clone();
        for (k, vi) in cells.iter().enumerate() {
            let cb = vi.bbox();
            let tracks = g.x_tracks_in(cb.lo().x, cb.hi().x);
            if tracks.len() < 4 {
                return Err(Error::InfeasibleSpec(format!("cell {k} spans only {} vertical tracks", tracks.len())));
            }
            let mid = tracks.len() / 2;
            for (j, net) in ["clk", "se"].into_iter().enumerate() {
                let top = track_above(&g, vi.pin_abs(net)?.rect.center().y)?;
                let w = channel::stub(d, grid, tracks[mid - 1 + j], top, rails[net])?;
                nets.entry(net.to_string()).or_default().push(w);
            }
        }

        // chain ends: down from the edge pin, then out along the I/O track
        let io = rails["io"];
        let first = &cells[0];
        let last = &cells[cells.len() - 1];
        let sin = first.pin_abs("scan_in")?.rect;
        let sout = last.pin_abs("scan_out")?.rect;
        let tx_in = g.xgrid().index_where(Cmp::Ge, sin.lo().x)?;
        let tx_out = g.xgrid().index_where(Cmp::Le, sout.hi().x)?;
        let end_in = if tx_in == x0 { x0 + 1 } else { x0 };
        let end_out = if tx_out == x1 { x1 - 1 } else { x1 };
        for (net, tx, end, pin_y) in [
            ("scan_in", tx_in, end_in, sin.center().y),
            ("scan_out", tx_out, end_out, sout.center().y),
        ] {
            let top = track_above(&g, pin_y)?;
            let r = d.route(grid, &[(tx, top), (tx, io), (end, io)])?;
            // the horizontal leg carries the pin
            nets.insert(net.to_string(), r.wires.into_iter().rev().collect());
        }
        Ok(nets)
    }

    fn pin(&self, d: &mut Design, nets: &Nets, _p: &Params) -> Result<()> {
        for (net, wires) in nets {
            d.add_pin(net, net, wires[0])?;
        }
        Ok(())
    }
}
