use std::collections::BTreeMap;

use super::channel::{self, channel_grid, rail_tracks, site, track_above};
use crate::design::{Design, Generator, GeneratorSpec, Nets};
use crate::error::{Error, Result};
use crate::geometry::{Rect, Transform};
use crate::grid::{GridSpec, OneDimGrid, PlacementGrid};
use crate::tech::TechDb;
use crate::template::{self, ParamSpec, ParamValue, Params, VirtualInstance};

/// Binary-weighted current-steering DAC: one reference unit plus `2^b`
/// units for bit `b`, packed into two rows with the upper row mirrored.
/// Every unit drops a select stub to its bit rail (the reference unit to
/// `vss`) and an output stub to `out`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CurrentDac;

fn int(p: &Params, k: &str) -> Result<i64> {
    match p.get(k) {
        Some(ParamValue::Int(v)) => Ok(*v),
        _ => Err(Error::bad_param(k, "expected an integer")),
    }
}

/// Net selected by unit `u`: `vss` for the reference, else its bit.
fn unit_net(u: usize) -> String {
    if u == 0 {
        "vss".into()
    } else {
        format!("b{}", usize::BITS - 1 - u.leading_zeros())
    }
}

impl CurrentDac {
    fn shape(n: usize) -> (usize, usize) {
        let rows = if n >= 2 { 2 } else { 1 };
        (rows, n / rows)
    }
}

impl Generator for CurrentDac {
    fn spec(&self) -> GeneratorSpec {
        let choice = |values: &[&str]| ParamSpec::Choice {
            values: values.iter().map(|s| s.to_string()).collect(),
            default: values[0].to_string(),
        };
        GeneratorSpec {
            name: "dac".into(),
            description: "binary-weighted current-steering DAC unit array".into(),
            params: BTreeMap::from([
                ("bits".into(), ParamSpec::Int { default: 4, min: Some(1), max: Some(8) }),
                ("unit_nf".into(), ParamSpec::Int { default: 2, min: Some(2), max: Some(16) }),
                ("channel".into(), choice(&["n", "p"])),
                ("vth".into(), choice(&["svt", "lvt", "hvt"])),
            ]),
        }
    }

    fn instances(&self, tech: &TechDb, p: &Params) -> Result<Vec<VirtualInstance>> {
        let unit = template::generate(
            tech,
            "mosgen",
            &template::params([
                ("nf", p["unit_nf"].clone()),
                ("channel", p["channel"].clone()),
                ("vth", p["vth"].clone()),
            ]),
        )?;
        let n = 1usize << int(p, "bits")?;
        Ok(vec![unit; n])
    }

    fn place(&self, d: &mut Design, _p: &Params, instances: Vec<VirtualInstance>) -> Result<()> {
        let s = site(&d.tech)?;
        let pg = PlacementGrid::new(OneDimGrid::uniform(s.x)?, OneDimGrid::uniform(s.y)?);
        let (_, cols) = Self::shape(instances.len());
        for (u, vi) in instances.iter().enumerate() {
            let (r, c) = (u / cols, u % cols);
            let step = vi.size.x / s.x;
            let t = if r % 2 == 1 { Transform::MX } else { Transform::R0 };
            d.place(vi, &pg, c as i64 * step, r as i64, t);
        }
        d.set_placement_grid(pg);
        Ok(())
    }

    fn grid(&self, d: &Design, p: &Params) -> Result<(GridSpec, Rect)> {
        let bbox = d.instance_bbox().ok_or(Error::InfeasibleSpec("nothing placed".into()))?;
        channel_grid(&d.tech, &bbox, int(p, "bits")? as usize, 2)
    }

    fn route(&self, d: &mut Design, grid: &str, p: &Params) -> Result<Nets> {
        let bits = int(p, "bits")?;
        let g = d.grid(grid)?.clone();
        let bbox = d.instance_bbox().unwrap();
        let (_, region) = channel_grid(&d.tech, &bbox, bits as usize, 2)?;
        let region_lo = region.lo().y;
        let signal: Vec<String> = (0..bits).map(|b| format!("b{b}")).collect();
        let rails = rail_tracks(&g, region_lo, bbox.lo().y, &signal, &["out".into(), "vss".into()])?;

        let xs = g.x_tracks_in(bbox.lo().x, bbox.hi().x);
        let (x0, x1) = (xs[0], *xs.last().unwrap());
        let mut nets = Nets::new();
        for (net, &y) in &rails {
            let w = channel::rail(d, grid, y, x0, x1)?;
            nets.entry(net.clone()).or_default().push(w);
        }

        let units: Vec<VirtualInstance> = d.instances.clone();
        let (_, cols) = Self::shape(units.len());
        for (u, vi) in units.iter().enumerate() {
            let row = u / cols;
            let cb = vi.bbox();
            let tracks = g.x_tracks_in(cb.lo().x, cb.hi().x);
            if tracks.len() < 2 * (row + 1) {
                return Err(Error::InfeasibleSpec(format!(
                    "unit {u} spans {} vertical tracks, needs {}",
                    tracks.len(),
                    2 * (row + 1)
                )));
            }
            for (k, (pin, net)) in [("g", unit_net(u)), ("d", "out".to_string())].into_iter().enumerate() {
                let top = track_above(&g, vi.pin_abs(pin)?.rect.center().y)?;
                let w = channel::stub(d, grid, tracks[2 * row + k], top, rails[&net])?;
                nets.entry(net).or_default().push(w);
            }
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
