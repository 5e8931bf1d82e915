//! Map and spectrum file formats.
//!
//! A map CSV has the momenta (μm⁻¹) on the first row after a corner cell, and
//! one row per energy (eV) with the energy in the first column:
//!
//! ```text
//! energy_ev\kx_um,0,0.5,1
//! 1.6,0.12,0.13,0.15
//! 1.7,0.2,0.21,0.22
//! ```
//!
//! Floats are written in shortest round-trip form, so reading a written map
//! reproduces it bit for bit.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tmm::{DispersionMap, LayerStack, MapDefect, Polarization};

pub const MAP_CORNER: &str = "energy_ev\\kx_um";

pub fn map_to_csv(map: &DispersionMap) -> String {
    let mut out = String::with_capacity(16 * (map.energies.len() + 1) * (map.momenta.len() + 1));
    out.push_str(MAP_CORNER);
    for k in &map.momenta {
        write!(out, ",{k}").unwrap();
    }
    out.push('\n');
    for (e, row) in map.energies.iter().zip(&map.values) {
        write!(out, "{e}").unwrap();
        for v in row {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

fn parse_cells(line: &str, lineno: usize) -> Result<Vec<f64>> {
    line.split(',')
        .map(|c| {
            let c = c.trim();
            c.parse::<f64>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("not a number: `{c}`"),
            })
        })
        .collect()
}

/// Parses a map CSV; the quantity label is supplied by the caller (usually
/// from the sidecar).
pub fn map_from_csv(text: &str, quantity_label: &str) -> Result<DispersionMap> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty map file".into(),
    })?;
    let (_, rest) = header.split_once(',').ok_or(Error::Parse {
        line: hline,
        message: "header needs a corner cell and at least one momentum".into(),
    })?;
    let momenta = parse_cells(rest, hline)?;
    let mut energies = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in lines {
        let cells = parse_cells(line, lineno)?;
        if cells.len() != momenta.len() + 1 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected {} cells, found {}", momenta.len() + 1, cells.len()),
            });
        }
        energies.push(cells[0]);
        values.push(cells[1..].to_vec());
    }
    DispersionMap::new(energies, momenta, values, quantity_label).map_err(|e| Error::Parse {
        line: hline,
        message: e.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapMetadata {
    pub quantity_label: String,
    pub polarization: Polarization,
    pub stack: Option<LayerStack>,
    pub energies: usize,
    pub momenta: usize,
    pub defects: Vec<MapDefect>,
}

impl MapMetadata {
    pub fn for_map(map: &DispersionMap, polarization: Polarization, stack: Option<&LayerStack>) -> Self {
        Self {
            quantity_label: map.quantity_label.clone(),
            polarization,
            stack: stack.cloned(),
            energies: map.energies.len(),
            momenta: map.momenta.len(),
            defects: map.defects.clone(),
        }
    }
}

/// Stacked spectra: one row per energy, one column per cavity length.
pub fn stacked_spectra_csv(energies: &[f64], lengths: &[f64], columns: &[Vec<f64>]) -> String {
    let mut out = String::from("energy_ev");
    for l in lengths {
        write!(out, ",L_{l}").unwrap();
    }
    out.push('\n');
    for (i, e) in energies.iter().enumerate() {
        write!(out, "{e}").unwrap();
        for c in columns {
            out.push(',');
            if let Some(v) = c.get(i) {
                write!(out, "{v}").unwrap();
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tmm::ONE_MINUS_R;
    use proptest::prelude::*;

    #[test]
    fn csv_layout() {
        let map = DispersionMap::new(vec![1.5, 2.0], vec![0.0, 3.5], vec![vec![0.1, 0.2], vec![0.3, 0.4]], ONE_MINUS_R).unwrap();
        let csv = map_to_csv(&map);
        assert_eq!(csv, "energy_ev\\kx_um,0,3.5\n1.5,0.1,0.2\n2,0.3,0.4\n");
    }

    #[test]
    fn malformed_csv_reports_line() {
        let err = map_from_csv("c,0,1\n1.0,0.1,0.2\n2.0,0.1\n", ONE_MINUS_R).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let err = map_from_csv("c,0,1\n1.0,0.1,abc\n", ONE_MINUS_R).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(map_from_csv("", ONE_MINUS_R).is_err());
        assert!(map_from_csv("c,1,0\n1.0,0.1,0.2\n", ONE_MINUS_R).is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_exact(
            ne in 1usize..6, nk in 1usize..6,
            vals in prop::collection::vec(0.0f64..1.0, 36),
            e0 in 0.5f64..3.0, de in 1e-6f64..0.5, k0 in 0.0f64..5.0, dk in 1e-6f64..3.0,
        ) {
            let energies: Vec<f64> = (0..ne).map(|i| e0 + de * i as f64).collect();
            let momenta: Vec<f64> = (0..nk).map(|j| k0 + dk * j as f64).collect();
            let values: Vec<Vec<f64>> = (0..ne).map(|i| vals[i * 6..i * 6 + nk].to_vec()).collect();
            let map = DispersionMap::new(energies, momenta, values, ONE_MINUS_R).unwrap();
            let back = map_from_csv(&map_to_csv(&map), ONE_MINUS_R).unwrap();
            prop_assert_eq!(back, map);
        }
    }
}
