//! Output writers: CSV, JSON, and gnuplot-ready plot data.
//!
//! Every file embeds its full provenance — tool version, command, and the
//! resolved run configuration — so a run can be reproduced byte-for-byte from
//! its own header. Numbers are printed in the shortest representation that
//! re-parses to the identical f64.

use std::io::{self, Write};

use hybridoptomech::experiments::{SweepCell, SweepResult};
use hybridoptomech::spectra::SpectrumSample;
use hybridoptomech::steadystate::SteadyBranch;
use serde_json::json;

use crate::config::{Format, RunConfig};

pub const TOOL: &str = "hybridoptomech";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance block carried by every output file.
pub struct Provenance {
    pub command: &'static str,
    /// Resolved config (grids and strategies as actually used, output spec
    /// stripped — the destination is not a parameter of the computation).
    pub config: RunConfig,
}

impl Provenance {
    pub fn config_json(&self) -> String {
        serde_json::to_string(&self.config).expect("config serialization")
    }

    fn comment_header(&self, w: &mut dyn Write) -> io::Result<()> {
        writeln!(w, "# {TOOL} {VERSION}")?;
        writeln!(w, "# command: {}", self.command)?;
        writeln!(w, "# config: {}", self.config_json())
    }

    fn json_fields(&self) -> serde_json::Value {
        json!({
            "tool": TOOL,
            "version": VERSION,
            "command": self.command,
            "config": serde_json::to_value(&self.config).expect("config serialization"),
        })
    }
}

/// Shortest decimal representation that round-trips to the same f64.
pub fn num(x: f64) -> String {
    format!("{x}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn axis_lines(result: &SweepResult, w: &mut dyn Write) -> io::Result<()> {
    for axis in &result.axes {
        let (lo, hi) = match (axis.values.first(), axis.values.last()) {
            (Some(a), Some(b)) => (*a, *b),
            _ => (f64::NAN, f64::NAN),
        };
        writeln!(
            w,
            "# axis {}: {} points in [{}, {}]",
            axis.name,
            axis.values.len(),
            num(lo),
            num(hi)
        )?;
    }
    Ok(())
}

fn summary_line(result: &SweepResult, label: &str, w: &mut dyn Write) -> io::Result<()> {
    match result.summary.min_nf {
        Some(min) => {
            let coords: Vec<String> = result
                .coord_names
                .iter()
                .zip(result.summary.min_coords.iter())
                .map(|(name, value)| format!("{name}={}", num(*value)))
                .collect();
            writeln!(
                w,
                "# summary{label}: min n_f = {} at {}",
                num(min),
                coords.join(" ")
            )
        }
        None => writeln!(w, "# summary{label}: no stable cell"),
    }
}

fn overlay_lines(result: &SweepResult, w: &mut dyn Write) -> io::Result<()> {
    for overlay in &result.overlays {
        for chunk in &overlay.chunks {
            let mut parts = Vec::with_capacity(2 * chunk.len());
            for p in chunk {
                parts.push(num(p[0]));
                parts.push(num(p[1]));
            }
            writeln!(w, "# overlay {}: {}", overlay.name, parts.join(" "))?;
        }
    }
    Ok(())
}

fn cell_csv_row(cell: &SweepCell, w: &mut dyn Write) -> io::Result<()> {
    let coords: Vec<String> = cell.coords.iter().map(|&c| num(c)).collect();
    writeln!(
        w,
        "{},{},{}",
        coords.join(","),
        opt_num(cell.n_f),
        cell.status.as_str()
    )
}

fn cell_json(cell: &SweepCell) -> serde_json::Value {
    json!({
        "coords": cell.coords,
        "n_f": cell.n_f,
        "status": cell.status.as_str(),
    })
}

fn sweep_json(result: &SweepResult) -> serde_json::Value {
    json!({
        "axes": result.axes.iter().map(|a| json!({"name": a.name, "values": a.values})).collect::<Vec<_>>(),
        "coord_names": result.coord_names,
        "strategy": result.strategy.map(|s| s.name()),
        "cells": result.cells.iter().map(cell_json).collect::<Vec<_>>(),
        "overlays": result.overlays.iter().map(|o| json!({"name": o.name, "chunks": o.chunks})).collect::<Vec<_>>(),
        "summary": json!({"min_nf": result.summary.min_nf, "min_coords": result.summary.min_coords}),
    })
}

/// Write a single sweep (detuning map or resonant map).
pub fn write_sweep(
    w: &mut dyn Write,
    prov: &Provenance,
    result: &SweepResult,
    format: Format,
) -> io::Result<()> {
    match format {
        Format::Csv => {
            prov.comment_header(w)?;
            axis_lines(result, w)?;
            summary_line(result, "", w)?;
            overlay_lines(result, w)?;
            writeln!(w, "{},n_f,status", result.coord_names.join(","))?;
            for cell in &result.cells {
                cell_csv_row(cell, w)?;
            }
            Ok(())
        }
        Format::Plotdata => {
            prov.comment_header(w)?;
            axis_lines(result, w)?;
            summary_line(result, "", w)?;
            writeln!(w, "# columns: {} n_f status", result.coord_names.join(" "))?;
            let inner = result.axes.last().map(|a| a.values.len()).unwrap_or(0);
            for (idx, cell) in result.cells.iter().enumerate() {
                if idx > 0 && inner > 0 && idx % inner == 0 {
                    writeln!(w)?; // pm3d scanline separator
                }
                let coords: Vec<String> = cell.coords.iter().map(|&c| num(c)).collect();
                writeln!(
                    w,
                    "{} {} {}",
                    coords.join(" "),
                    cell.n_f.map(num).unwrap_or_else(|| "nan".into()),
                    cell.status.as_str()
                )?;
            }
            for overlay in &result.overlays {
                for chunk in &overlay.chunks {
                    writeln!(w)?;
                    writeln!(w)?; // new gnuplot index
                    writeln!(w, "# overlay {}", overlay.name)?;
                    for p in chunk {
                        writeln!(w, "{} {}", num(p[0]), num(p[1]))?;
                    }
                }
            }
            Ok(())
        }
        Format::Json => {
            let mut doc = prov.json_fields();
            let obj = doc.as_object_mut().expect("object");
            if let serde_json::Value::Object(extra) = sweep_json(result) {
                obj.extend(extra);
            }
            writeln!(w, "{}", serde_json::to_string_pretty(&doc)?)
        }
    }
}

/// Write one curve per strategy (strategy comparison).
pub fn write_curves(
    w: &mut dyn Write,
    prov: &Provenance,
    curves: &[SweepResult],
    format: Format,
) -> io::Result<()> {
    match format {
        Format::Csv => {
            prov.comment_header(w)?;
            for curve in curves {
                let label = curve
                    .strategy
                    .map(|s| format!(" {}", s.name()))
                    .unwrap_or_default();
                summary_line(curve, &label, w)?;
            }
            writeln!(w, "strategy,delta_c,delta_a,n_f,status")?;
            for curve in curves {
                let name = curve.strategy.map(|s| s.name()).unwrap_or("base");
                for cell in &curve.cells {
                    write!(w, "{name},")?;
                    cell_csv_row(cell, w)?;
                }
            }
            Ok(())
        }
        Format::Plotdata => {
            prov.comment_header(w)?;
            writeln!(w, "# columns: delta_c delta_a n_f status")?;
            for (k, curve) in curves.iter().enumerate() {
                if k > 0 {
                    writeln!(w)?;
                    writeln!(w)?;
                }
                let name = curve.strategy.map(|s| s.name()).unwrap_or("base");
                writeln!(w, "# strategy {name}")?;
                for cell in &curve.cells {
                    let coords: Vec<String> = cell.coords.iter().map(|&c| num(c)).collect();
                    writeln!(
                        w,
                        "{} {} {}",
                        coords.join(" "),
                        cell.n_f.map(num).unwrap_or_else(|| "nan".into()),
                        cell.status.as_str()
                    )?;
                }
            }
            Ok(())
        }
        Format::Json => {
            let mut doc = prov.json_fields();
            let obj = doc.as_object_mut().expect("object");
            obj.insert(
                "curves".into(),
                json!(curves
                    .iter()
                    .map(|c| {
                        json!({
                            "strategy": c.strategy.map(|s| s.name()),
                            "cells": c.cells.iter().map(cell_json).collect::<Vec<_>>(),
                            "summary": json!({"min_nf": c.summary.min_nf, "min_coords": c.summary.min_coords}),
                        })
                    })
                    .collect::<Vec<_>>()),
            );
            writeln!(w, "{}", serde_json::to_string_pretty(&doc)?)
        }
    }
}

/// Write a spectrum table with sideband markers at ±ω_m.
pub fn write_spectrum(
    w: &mut dyn Write,
    prov: &Provenance,
    rows: &[SpectrumSample],
    omega_m: f64,
    format: Format,
) -> io::Result<()> {
    match format {
        Format::Csv | Format::Plotdata => {
            prov.comment_header(w)?;
            writeln!(w, "# marker omega = {}", num(-omega_m))?;
            writeln!(w, "# marker omega = {}", num(omega_m))?;
            let sep = if format == Format::Csv { "," } else { " " };
            if format == Format::Csv {
                writeln!(w, "omega,s_kappa,s_gamma,s_f")?;
            } else {
                writeln!(w, "# columns: omega s_kappa s_gamma s_f")?;
            }
            for r in rows {
                writeln!(
                    w,
                    "{}{sep}{}{sep}{}{sep}{}",
                    num(r.omega),
                    num(r.s_kappa),
                    num(r.s_gamma),
                    num(r.s_f)
                )?;
            }
            Ok(())
        }
        Format::Json => {
            let mut doc = prov.json_fields();
            let obj = doc.as_object_mut().expect("object");
            obj.insert("markers".into(), json!([-omega_m, omega_m]));
            obj.insert(
                "samples".into(),
                json!(rows
                    .iter()
                    .map(|r| json!({"omega": r.omega, "s_kappa": r.s_kappa, "s_gamma": r.s_gamma, "s_f": r.s_f}))
                    .collect::<Vec<_>>()),
            );
            writeln!(w, "{}", serde_json::to_string_pretty(&doc)?)
        }
    }
}

/// Single-point occupation record.
pub struct OccupationRecord {
    pub n_f: Option<f64>,
    pub stable: bool,
    pub eigen_real_parts: [f64; 6],
    pub gamma_cool: f64,
    pub cooperativity: f64,
}

pub fn write_occupation(
    w: &mut dyn Write,
    prov: &Provenance,
    rec: &OccupationRecord,
) -> io::Result<()> {
    let mut doc = prov.json_fields();
    let obj = doc.as_object_mut().expect("object");
    obj.insert("n_f".into(), json!(rec.n_f));
    obj.insert("stable".into(), json!(rec.stable));
    obj.insert("eigen_real_parts".into(), json!(rec.eigen_real_parts));
    obj.insert("gamma_cool".into(), json!(rec.gamma_cool));
    obj.insert("cooperativity".into(), json!(rec.cooperativity));
    writeln!(w, "{}", serde_json::to_string_pretty(&doc)?)
}

/// Steady-state branch listing with per-branch stability flags.
pub fn write_branches(
    w: &mut dyn Write,
    prov: &Provenance,
    branches: &[(SteadyBranch, bool)],
    format: Format,
) -> io::Result<()> {
    match format {
        Format::Csv | Format::Plotdata => {
            prov.comment_header(w)?;
            let sep = if format == Format::Csv { "," } else { " " };
            let header = [
                "branch",
                "abs_cbar",
                "re_cbar",
                "im_cbar",
                "qbar",
                "re_abar",
                "im_abar",
                "residual",
                "stable",
                "degenerate",
            ]
            .join(sep);
            if format == Format::Csv {
                writeln!(w, "{header}")?;
            } else {
                writeln!(w, "# columns: {header}")?;
            }
            for (idx, (b, stable)) in branches.iter().enumerate() {
                let fields = [
                    idx.to_string(),
                    num(b.cbar.norm()),
                    num(b.cbar.re),
                    num(b.cbar.im),
                    num(b.qbar),
                    num(b.abar.re),
                    num(b.abar.im),
                    num(b.residual),
                    stable.to_string(),
                    b.degenerate.to_string(),
                ];
                writeln!(w, "{}", fields.join(sep))?;
            }
            Ok(())
        }
        Format::Json => {
            let mut doc = prov.json_fields();
            let obj = doc.as_object_mut().expect("object");
            obj.insert(
                "branches".into(),
                json!(branches
                    .iter()
                    .enumerate()
                    .map(|(idx, (b, stable))| {
                        json!({
                            "index": idx,
                            "cbar": [b.cbar.re, b.cbar.im],
                            "abar": [b.abar.re, b.abar.im],
                            "qbar": b.qbar,
                            "residual": b.residual,
                            "stable": stable,
                            "degenerate": b.degenerate,
                        })
                    })
                    .collect::<Vec<_>>()),
            );
            writeln!(w, "{}", serde_json::to_string_pretty(&doc)?)
        }
    }
}
