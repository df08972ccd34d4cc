#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use laygen::tech::TechDb;

pub const TECHS: [&str; 2] = ["mock_finfet", "mock_planar"];

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.json"))
}

pub fn tech(name: &str) -> Arc<TechDb> {
    Arc::new(TechDb::load_file(fixture(name)).unwrap())
}

/// `(record type, payload)` pairs from a GDSII stream, checking framing.
pub fn gds_records(data: &[u8]) -> Vec<(u8, Vec<u8>)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < data.len() {
        let len = u16::from_be_bytes([data[i], data[i + 1]]) as usize;
        assert!(len >= 4 && len.is_multiple_of(2), "bad record length {len} at {i}");
        out.push((data[i + 2], data[i + 4..i + len].to_vec()));
        i += len;
    }
    assert_eq!(i, data.len());
    out
}

pub mod rec {
    pub const HEADER: u8 = 0x00;
    pub const BGNLIB: u8 = 0x01;
    pub const LIBNAME: u8 = 0x02;
    pub const UNITS: u8 = 0x03;
    pub const ENDLIB: u8 = 0x04;
    pub const BGNSTR: u8 = 0x05;
    pub const STRNAME: u8 = 0x06;
    pub const ENDSTR: u8 = 0x07;
    pub const BOUNDARY: u8 = 0x08;
    pub const SREF: u8 = 0x0A;
    pub const XY: u8 = 0x10;
    pub const STRANS: u8 = 0x1A;
    pub const ANGLE: u8 = 0x1C;
}

/// Frozen UNITS payload: 1e-3 and 1e-9 as excess-64 reals.
pub const UNITS_BYTES: [u8; 16] = [
    0x3e, 0x41, 0x89, 0x37, 0x4b, 0xc6, 0xa7, 0xf0, //
    0x39, 0x44, 0xb8, 0x2f, 0xa0, 0x9b, 0x5a, 0x54,
];
