//! `verify` subcommand: seeded verification suites over the library's
//! analytic identities, reported row by row.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use margulis_core::affine::{coboundary, coordinate_matrix, phi, DeformationParams};
use margulis_core::fuchsian::{build_holonomy, Holonomy};
use margulis_core::liealg::{length_derivative, verify_twist_formula};
use margulis_core::lorentz::LorentzVector;
use margulis_core::random::{random_hyperbolic, random_params, random_vector, random_word};

use crate::config::{LoadedConfig, RunConfig};
use crate::report::{write_check_csv, write_json, CheckRow, Meta};
use crate::{Failure, Which};

// Each suite draws from its own stream so that `--which gm` and
// `--which all` produce identical gm rows.
const LORENTZ_STREAM: u64 = 0x6c6f_7265_6e74_7a; // "lorentz"
const ISO_STREAM: u64 = 0x69_736f; // "iso"
const GM_STREAM: u64 = 0x67_6d; // "gm"

const TWIST_GRID: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

#[derive(Serialize)]
struct VerifyReport {
    meta: Meta,
    which: &'static str,
    total: usize,
    failed: usize,
    all_pass: bool,
    rows: Vec<CheckRow>,
}

fn suite_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ stream)
}

/// Determinant of the matrix with columns `x, y, z`, expanded directly so
/// the comparison against the Lorentzian product is independent of it.
fn det3(x: &LorentzVector, y: &LorentzVector, z: &LorentzVector) -> f64 {
    x.x1() * (y.x2() * z.x3() - y.x3() * z.x2())
        - y.x1() * (x.x2() * z.x3() - x.x3() * z.x2())
        + z.x1() * (x.x2() * y.x3() - x.x3() * y.x2())
}

fn lorentz_suite(config: &RunConfig) -> Vec<CheckRow> {
    let mut rng = suite_rng(config.seed, LORENTZ_STREAM);
    let tuple_tol = config.tolerance("cross_identity", 1e-10);
    let frame_tol = config.tolerance("frame_identity", 1e-9);

    let (mut worst_det, mut worst_pairing) = (0.0_f64, 0.0_f64);
    for _ in 0..10_000 {
        let x = random_vector(&mut rng, 1.0);
        let y = random_vector(&mut rng, 1.0);
        let z = random_vector(&mut rng, 1.0);
        let w = random_vector(&mut rng, 1.0);
        worst_det = worst_det.max((x.cross(&y).inner(&z) - det3(&x, &y, &z)).abs());
        let pairing = x.cross(&y).inner(&z.cross(&w));
        let bilinear = x.inner(&w) * y.inner(&z) - x.inner(&z) * y.inner(&w);
        worst_pairing = worst_pairing.max((pairing - bilinear).abs());
    }

    let mut worst_frame = 0.0_f64;
    for _ in 0..100 {
        let g = random_hyperbolic(&mut rng, 0.5..2.5);
        let frame = g.hyperbolic_frame().expect("sampler emits hyperbolic isometries");
        let gap = frame.x_minus.cross(&frame.x_plus) + frame.null_pairing() * frame.x_zero;
        worst_frame = worst_frame.max(gap.euclidean_norm());
    }

    vec![
        CheckRow::residual(
            "cross_pairs_with_determinant (10000 tuples, worst)",
            worst_det,
            0.0,
            tuple_tol,
        ),
        CheckRow::residual(
            "cross_pairing_is_bilinear_in_inner_products (10000 tuples, worst)",
            worst_pairing,
            0.0,
            tuple_tol,
        ),
        CheckRow::residual(
            "null_frame_cross_is_axis_multiple (100 hyperbolic, worst)",
            worst_frame,
            0.0,
            frame_tol,
        ),
    ]
}

fn iso_suite(config: &RunConfig, hol: &Holonomy) -> Result<Vec<CheckRow>, Failure> {
    let mut rng = suite_rng(config.seed, ISO_STREAM);
    let dim = DeformationParams::dim(hol.b());
    let cm = coordinate_matrix(hol).map_err(Failure::from_core)?;

    let mut rows = vec![
        CheckRow::at_least(
            format!("coordinate_matrix_determinant ({dim}x{dim})"),
            cm.determinant.abs(),
            config.tolerance("determinant_floor", 1e-12),
        ),
        CheckRow::info("coordinate_matrix_condition_number", cm.condition_number),
    ];

    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let v = random_vector(&mut rng, 1.0);
        let coords = coboundary(hol, &v)
            .cohomology_coordinates()
            .map_err(Failure::from_core)?;
        for c in coords {
            worst = worst.max(c.abs());
        }
    }
    rows.push(CheckRow::residual(
        "coboundary_coordinates_vanish (100 vectors, worst)",
        worst,
        0.0,
        config.tolerance("coboundary", 1e-9),
    ));
    Ok(rows)
}

fn gm_suite(config: &RunConfig, hol: &Holonomy) -> Result<Vec<CheckRow>, Failure> {
    let mut rng = suite_rng(config.seed, GM_STREAM);
    let b = hol.b();
    let match_tol = config.tolerance("goldman_margulis", 1e-6);
    let order_floor = config.tolerance("fd_order_floor", 1.9);
    let mut rows = Vec::with_capacity(60);

    let mut sample = 0;
    while sample < 50 {
        let p = random_params(&mut rng, b, 1.0);
        let len = rng.random_range(1..=5);
        let w = random_word(&mut rng, b, len);
        let u = phi(hol, &p).map_err(Failure::from_core)?;
        // Non-hyperbolic images are legitimately outside the identity's
        // domain: redraw.
        let (Ok(margulis), Ok(derivative)) = (u.margulis(&w), length_derivative(&u, &w, None))
        else {
            continue;
        };
        rows.push(CheckRow::residual(
            format!("margulis_matches_half_length_derivative [{w}] (sample {sample:02})"),
            margulis,
            derivative,
            match_tol,
        ));
        sample += 1;
    }

    let mut instance = 0;
    while instance < 10 {
        let p = random_params(&mut rng, b, 1.0);
        let len = rng.random_range(1..=5);
        let w = random_word(&mut rng, b, len);
        let u = phi(hol, &p).map_err(Failure::from_core)?;
        let Ok(margulis) = u.margulis(&w) else { continue };
        let coarse = match length_derivative(&u, &w, Some(2e-2)) {
            Ok(d) => (d - margulis).abs(),
            Err(_) => continue,
        };
        let fine = match length_derivative(&u, &w, Some(1e-2)) {
            Ok(d) => (d - margulis).abs(),
            Err(_) => continue,
        };
        let order = (coarse.max(1e-300) / fine.max(1e-300)).log2();
        rows.push(CheckRow::at_least(
            format!("fd_step_halving_order [{w}] (instance {instance})"),
            order,
            order_floor,
        ));
        instance += 1;
    }
    Ok(rows)
}

fn twist_suite(config: &RunConfig, hol: &Holonomy) -> Result<Vec<CheckRow>, Failure> {
    let b = hol.b();
    let p0 = config.deformation();
    let residual_tol = config.tolerance("twist", 1e-6);
    let margulis_tol = config.tolerance("twist_margulis", 1e-8);
    let independence_tol = config.tolerance("twist_independence", 1e-8);
    let mut rows = Vec::new();

    for l in 1..=b - 2 {
        for t in TWIST_GRID {
            let mut p = p0.clone();
            p.t[l - 1] = t;
            let check = verify_twist_formula(hol, &p, l, None).map_err(Failure::from_core)?;
            rows.push(CheckRow::residual(
                format!("twist_half_length_derivative l={l} t={t}"),
                check.derivative,
                check.predicted,
                residual_tol,
            ));
            rows.push(CheckRow::residual(
                format!("twist_margulis_matches_prediction l={l} t={t}"),
                check.margulis,
                check.predicted,
                margulis_tol,
            ));
        }

        for k in 1..=b - 2 {
            if k == l {
                continue;
            }
            let mut p = p0.clone();
            p.t[l - 1] = 0.5;
            p.t[k - 1] = 0.0;
            let baseline = verify_twist_formula(hol, &p, l, None).map_err(Failure::from_core)?;
            let (mut margulis_drift, mut residual_drift) = (0.0_f64, 0.0_f64);
            for t in TWIST_GRID {
                p.t[k - 1] = t;
                let check = verify_twist_formula(hol, &p, l, None).map_err(Failure::from_core)?;
                margulis_drift = margulis_drift.max((check.margulis - baseline.margulis).abs());
                residual_drift = residual_drift.max((check.residual - baseline.residual).abs());
            }
            rows.push(CheckRow::residual(
                format!("twist_margulis_ignores_t{k} l={l} (grid worst)"),
                margulis_drift,
                0.0,
                independence_tol,
            ));
            rows.push(CheckRow::residual(
                format!("twist_residual_ignores_t{k} l={l} (grid worst)"),
                residual_drift,
                0.0,
                independence_tol,
            ));
        }
    }
    Ok(rows)
}

fn which_name(which: Which) -> &'static str {
    match which {
        Which::Lorentz => "lorentz",
        Which::Iso => "iso",
        Which::Gm => "gm",
        Which::Twist => "twist",
        Which::All => "all",
    }
}

pub fn run(loaded: &LoadedConfig, out: &Path, which: Which) -> Result<(), Failure> {
    let config = &loaded.config;
    let needs_holonomy = !matches!(which, Which::Lorentz);
    let hol = if needs_holonomy {
        Some(build_holonomy(&config.holonomy_spec()).map_err(Failure::from_core)?)
    } else {
        None
    };
    let hol = hol.as_ref();

    let mut rows = Vec::new();
    if matches!(which, Which::Lorentz | Which::All) {
        rows.extend(lorentz_suite(config));
    }
    if matches!(which, Which::Iso | Which::All) {
        rows.extend(iso_suite(config, hol.expect("holonomy built"))?);
    }
    if matches!(which, Which::Gm | Which::All) {
        rows.extend(gm_suite(config, hol.expect("holonomy built"))?);
    }
    if matches!(which, Which::Twist | Which::All) {
        rows.extend(twist_suite(config, hol.expect("holonomy built"))?);
    }

    let meta = Meta::new(loaded);
    let failed = rows.iter().filter(|r| !r.pass).count();
    let report = VerifyReport {
        meta,
        which: which_name(which),
        total: rows.len(),
        failed,
        all_pass: failed == 0,
        rows,
    };
    let json_path = write_json(out, "report.json", &report)?;
    let csv_path = write_check_csv(out, "report.csv", &report.meta, &report.rows)?;
    println!(
        "verify {}: {} checks, {} failed",
        report.which, report.total, report.failed
    );
    println!("wrote {}", json_path.display());
    println!("wrote {}", csv_path.display());

    if let Some(first) = report.rows.iter().find(|r| !r.pass) {
        return Err(Failure::Finding(format!(
            "{}: residual {:.3e} exceeds {:.3e}",
            first.check, first.residual, first.tolerance
        )));
    }
    Ok(())
}
