//! `holonomy` subcommand: build the representation from the config's
//! lengths and twists, certify it, and dump everything a downstream tool
//! needs into `holonomy.json`.

use std::path::Path;

use serde::Serialize;

use margulis_core::fuchsian::{build_holonomy, Holonomy, OrientationMargin, Word};
use margulis_core::lorentz::{HyperbolicFrame, LorentzIsometry};

use crate::config::LoadedConfig;
use crate::report::{self, Meta};
use crate::Failure;

#[derive(Serialize)]
struct CurveReport {
    name: String,
    matrix: [[f64; 3]; 3],
    frame: HyperbolicFrame,
    length: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    spec_length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    length_error: Option<f64>,
}

#[derive(Serialize)]
struct HolonomyReport {
    meta: Meta,
    b: usize,
    relation_residual: f64,
    relation_tolerance: f64,
    max_length_error: f64,
    length_tolerance: f64,
    /// Largest orientation value; certification requires it negative.
    worst_orientation_margin: f64,
    generators: Vec<CurveReport>,
    dividing_curves: Vec<CurveReport>,
    crossing_curves: Vec<CurveReport>,
    orientation_margins: Vec<OrientationMargin>,
}

fn matrix_rows(g: &LorentzIsometry) -> [[f64; 3]; 3] {
    let m = g.matrix();
    std::array::from_fn(|r| std::array::from_fn(|c| m[(r, c)]))
}

fn curve(
    name: String,
    g: &LorentzIsometry,
    frame: &HyperbolicFrame,
    spec_length: Option<f64>,
) -> CurveReport {
    let length = -frame.lambda.ln();
    CurveReport {
        name,
        matrix: matrix_rows(g),
        frame: *frame,
        length,
        spec_length,
        length_error: spec_length.map(|l| (length - l).abs()),
    }
}

fn assemble(loaded: &LoadedConfig, hol: &Holonomy) -> Result<HolonomyReport, Failure> {
    let b = hol.b();
    let spec = hol.spec();
    let mut generators = Vec::with_capacity(b + 1);
    for i in 1..=b + 1 {
        generators.push(curve(
            Word::generator(i).to_string(),
            hol.generator(i).map_err(Failure::from_core)?,
            hol.generator_frame(i).map_err(Failure::from_core)?,
            Some(spec.boundary_lengths[i - 1]),
        ));
    }
    let mut dividing_curves = Vec::with_capacity(b - 2);
    let mut crossing_curves = Vec::with_capacity(b - 2);
    for j in 1..=b - 2 {
        dividing_curves.push(curve(
            format!("h{j}"),
            hol.dividing_curve(j).map_err(Failure::from_core)?,
            hol.dividing_frame(j).map_err(Failure::from_core)?,
            Some(spec.dividing_lengths[j - 1]),
        ));
        crossing_curves.push(curve(
            format!("f{j}"),
            hol.crossing_curve(j).map_err(Failure::from_core)?,
            hol.crossing_frame(j).map_err(Failure::from_core)?,
            None,
        ));
    }
    let max_length_error = generators
        .iter()
        .chain(&dividing_curves)
        .filter_map(|c| c.length_error)
        .fold(0.0, f64::max);
    let worst_orientation_margin = hol
        .orientation_margins()
        .iter()
        .map(|m| m.value)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(HolonomyReport {
        meta: Meta::new(loaded),
        b,
        relation_residual: hol.relation_residual(),
        relation_tolerance: loaded.config.tolerance("relation", 1e-9),
        max_length_error,
        length_tolerance: loaded.config.tolerance("length", 1e-6),
        worst_orientation_margin,
        generators,
        dividing_curves,
        crossing_curves,
        orientation_margins: hol.orientation_margins().to_vec(),
    })
}

pub fn run(loaded: &LoadedConfig, out: &Path) -> Result<(), Failure> {
    let hol = build_holonomy(&loaded.config.holonomy_spec()).map_err(Failure::from_core)?;
    let report = assemble(loaded, &hol)?;
    let path = report::write_json(out, "holonomy.json", &report)?;
    println!(
        "holonomy certified: b={}, relation residual {:.3e}, max length error {:.3e}, worst orientation margin {:.6}",
        report.b, report.relation_residual, report.max_length_error, report.worst_orientation_margin
    );
    println!("wrote {}", path.display());

    if report.relation_residual > report.relation_tolerance {
        return Err(Failure::Finding(format!(
            "relation residual {:.3e} exceeds {:.3e}",
            report.relation_residual, report.relation_tolerance
        )));
    }
    if report.max_length_error > report.length_tolerance {
        return Err(Failure::Finding(format!(
            "length error {:.3e} exceeds {:.3e}",
            report.max_length_error, report.length_tolerance
        )));
    }
    if report.worst_orientation_margin >= 0.0 {
        return Err(Failure::Finding(format!(
            "orientation margin {:.6} is not negative",
            report.worst_orientation_margin
        )));
    }
    Ok(())
}
