#![allow(dead_code)]

use std::path::PathBuf;

use stepwave::problem_io::{parse_document, ProblemDocument};

pub const FIXTURES: &[&str] = &[
    "ex3_3", "ex3_4", "ex3_5", "ex3_6", "ex3_7", "ex3_8", "heat", "heat_step", "rem3_10",
];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(format!("{name}.json"))
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap()
}

pub fn fixture(name: &str) -> ProblemDocument {
    parse_document(&fixture_text(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// `|a - b| / max(|a|, |b|, floor)`.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}
