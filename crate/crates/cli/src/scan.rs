//! `scan` subcommand: enumerate canonical reduced words, compute the
//! invariant spectrum of the configured deformation, and report either an
//! opposite-sign witness or sign consistency.

use std::path::Path;

use serde::Serialize;

use margulis_core::affine::phi;
use margulis_core::fuchsian::build_holonomy;
use margulis_core::proper::{invariant_spectrum, verdict_from_spectrum, ScanStatus, ScanVerdict};

use crate::config::LoadedConfig;
use crate::report::{csv_writer, sig17, write_json, Meta};
use crate::Failure;

#[derive(Serialize)]
struct WitnessWord {
    word: String,
    alpha: f64,
}

#[derive(Serialize)]
struct WitnessReport {
    positive: WitnessWord,
    negative: WitnessWord,
}

#[derive(Serialize)]
struct LengthStatsReport {
    length: usize,
    scanned: usize,
    skipped: usize,
    min_alpha: Option<f64>,
    max_alpha: Option<f64>,
}

#[derive(Serialize)]
struct StatsReport {
    scanned: usize,
    skipped: usize,
    zeros: usize,
    min_alpha: Option<f64>,
    max_alpha: Option<f64>,
    per_length: Vec<LengthStatsReport>,
}

#[derive(Serialize)]
struct VerdictReport {
    meta: Meta,
    max_len: usize,
    status: String,
    witness: Option<WitnessReport>,
    stats: StatsReport,
}

fn verdict_report(meta: Meta, max_len: usize, verdict: &ScanVerdict) -> VerdictReport {
    VerdictReport {
        meta,
        max_len,
        status: verdict.status.to_string(),
        witness: verdict.witness.as_ref().map(|w| WitnessReport {
            positive: WitnessWord {
                word: w.positive.0.to_string(),
                alpha: w.positive.1,
            },
            negative: WitnessWord {
                word: w.negative.0.to_string(),
                alpha: w.negative.1,
            },
        }),
        stats: StatsReport {
            scanned: verdict.spectrum.scanned,
            skipped: verdict.spectrum.skipped,
            zeros: verdict.spectrum.zeros,
            min_alpha: verdict.spectrum.min_alpha,
            max_alpha: verdict.spectrum.max_alpha,
            per_length: verdict
                .spectrum
                .per_length
                .iter()
                .map(|s| LengthStatsReport {
                    length: s.length,
                    scanned: s.scanned,
                    skipped: s.skipped,
                    min_alpha: s.min_alpha,
                    max_alpha: s.max_alpha,
                })
                .collect(),
        },
    }
}

pub fn run(loaded: &LoadedConfig, out: &Path, max_len: usize) -> Result<(), Failure> {
    if max_len == 0 {
        return Err(Failure::Usage("--max-len must be at least 1".to_string()));
    }
    let hol = build_holonomy(&loaded.config.holonomy_spec()).map_err(Failure::from_core)?;
    let u = phi(&hol, &loaded.config.deformation()).map_err(Failure::from_core)?;

    let spectrum = invariant_spectrum(&u, max_len);
    let verdict = verdict_from_spectrum(&spectrum);

    let meta = Meta::new(loaded);
    let (mut writer, csv_path) = csv_writer(out, "spectrum.csv", &meta, false)?;
    let io_err = |e: csv::Error| Failure::Usage(format!("cannot write spectrum.csv: {e}"));
    writer.write_record(["word", "length", "alpha"]).map_err(io_err)?;
    for row in &spectrum {
        writer
            .write_record([
                row.word.to_string(),
                row.word.len().to_string(),
                row.alpha.map(sig17).unwrap_or_default(),
            ])
            .map_err(io_err)?;
    }
    writer
        .flush()
        .map_err(|e| Failure::Usage(format!("cannot write spectrum.csv: {e}")))?;

    let report = verdict_report(meta, max_len, &verdict);
    let json_path = write_json(out, "verdict.json", &report)?;

    println!(
        "scan to length {max_len}: {} scanned, {} skipped, {} zeros, status {}",
        verdict.spectrum.scanned, verdict.spectrum.skipped, verdict.spectrum.zeros, verdict.status
    );
    println!("wrote {}", csv_path.display());
    println!("wrote {}", json_path.display());

    match (verdict.status, &verdict.witness) {
        (ScanStatus::NotProper, Some(w)) => Err(Failure::Finding(format!(
            "NOT_PROPER: alpha({}) = {:.6e} and alpha({}) = {:.6e} have opposite signs",
            w.positive.0, w.positive.1, w.negative.0, w.negative.1
        ))),
        _ => Ok(()),
    }
}
