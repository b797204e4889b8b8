//! Manifest-driven verification runs over `poissonkit-core`.

pub mod manifest;
pub mod report;
pub mod suites;

use anyhow::Result;
use sha2::{Digest, Sha256};

use manifest::{Manifest, Model, Overrides};
use report::{Check, Settings};
use suites::Suite;

/// Result of one run: the rendered report and whether any check failed.
pub struct Outcome {
    pub report: String,
    pub failed: bool,
    pub checks: Vec<Check>,
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Runs `suites` on the manifest text and renders the report.
pub fn run(subcommand: &str, text: &str, suites: &[Suite], overrides: Overrides, timings: bool) -> Result<Outcome> {
    let manifest = Manifest::from_json(text)?;
    let model = Model::build(manifest, overrides)?;
    let checks: Vec<Check> = suites.iter().flat_map(|s| s.run(&model)).collect();
    let settings = Settings {
        subcommand: subcommand.to_string(),
        degree_bound: model.bounds.degree_bound,
        tolerance: model.bounds.tolerance,
        quadrature_order: model.bounds.quadrature_order,
        seed: model.bounds.seed,
    };
    let report = report::render(&model.manifest.name, &digest(text.as_bytes()), &settings, &checks, timings);
    Ok(Outcome { report, failed: report::failed(&checks), checks })
}
