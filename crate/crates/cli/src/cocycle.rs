//! `cocycle` subcommand: evaluate the deformation family at the config's
//! parameters and write the generator values plus the cohomology
//! coordinates as one CSV table.

use std::path::Path;

use margulis_core::affine::phi;
use margulis_core::fuchsian::{build_holonomy, Word};

use crate::config::LoadedConfig;
use crate::report::{csv_writer, sig17, Meta};
use crate::Failure;

pub fn run(loaded: &LoadedConfig, out: &Path, gauge_check: bool) -> Result<(), Failure> {
    let hol = build_holonomy(&loaded.config.holonomy_spec()).map_err(Failure::from_core)?;
    let p = loaded.config.deformation();
    let u = phi(&hol, &p).map_err(Failure::from_core)?;
    let coords = u.cohomology_coordinates().map_err(Failure::from_core)?;

    let meta = Meta::new(loaded);
    // The coordinates row is wider than the generator rows, so the table
    // is written in flexible mode.
    let (mut writer, path) = csv_writer(out, "cocycle.csv", &meta, true)?;
    let io_err = |e: csv::Error| Failure::Usage(format!("cannot write cocycle.csv: {e}"));
    writer
        .write_record(["generator", "x1", "x2", "x3"])
        .map_err(io_err)?;
    for i in 1..=hol.b() + 1 {
        let v = u.value(i).map_err(Failure::from_core)?;
        writer
            .write_record([
                Word::generator(i).to_string(),
                sig17(v.x1()),
                sig17(v.x2()),
                sig17(v.x3()),
            ])
            .map_err(io_err)?;
    }
    let mut coord_row = vec!["cohomology_coordinates".to_string()];
    coord_row.extend(coords.iter().map(|c| sig17(*c)));
    writer.write_record(&coord_row).map_err(io_err)?;
    writer
        .flush()
        .map_err(|e| Failure::Usage(format!("cannot write cocycle.csv: {e}")))?;
    println!(
        "cocycle on {} generators, {} coordinates",
        hol.b() + 1,
        coords.len()
    );
    println!("wrote {}", path.display());

    if gauge_check {
        let tol = loaded.config.tolerance("gauge", 1e-9);
        let frame1 = hol.generator_frame(1).map_err(Failure::from_core)?;
        let frame2 = hol.generator_frame(2).map_err(Failure::from_core)?;
        let (_, c1_minus, c1_plus) =
            frame1.coefficients(&u.value(1).map_err(Failure::from_core)?);
        let (_, c2_minus, _) = frame2.coefficients(&u.value(2).map_err(Failure::from_core)?);
        println!(
            "gauge check: |c1_minus| = {:.3e}, |c1_plus| = {:.3e}, |c2_minus| = {:.3e} (tolerance {tol:.1e})",
            c1_minus.abs(),
            c1_plus.abs(),
            c2_minus.abs()
        );
        let worst = c1_minus.abs().max(c1_plus.abs()).max(c2_minus.abs());
        if worst > tol {
            return Err(Failure::Finding(format!(
                "gauge coefficient {worst:.3e} exceeds {tol:.1e}"
            )));
        }
    }
    Ok(())
}
