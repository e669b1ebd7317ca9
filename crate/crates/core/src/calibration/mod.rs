//! Pinning the default orientation.
//!
//! The two orientations differ by complex conjugation and give opposite
//! indices. The default is whichever one assigns +1 to the oscillator
//! reference pair; [`calibrate`] decides this numerically and
//! [`render_pinned`] writes the result to `pinned.rs`, which is checked in
//! and regenerated with `omega-index calibrate --write`.

mod pinned;

pub use pinned::{PINNED_CUTS, PINNED_DIM, PINNED_LAMBDA, PINNED_ORIENTATION};

use crate::error::OmegaError;
use crate::index::{build_q, omega_from_q, Orientation, DEFAULT_GAP_FLOOR};
use crate::operators::build_harmonic;

/// Reference computation used to decide the default orientation.
#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationParams {
    pub lambda: f64,
    pub dim: usize,
    pub cuts: Vec<usize>,
}

impl CalibrationParams {
    /// Parameters the checked-in constants were generated from.
    pub fn pinned() -> Self {
        Self { lambda: PINNED_LAMBDA, dim: PINNED_DIM, cuts: PINNED_CUTS.to_vec() }
    }
}

/// Outcome for one orientation: the index, or the reason there is none.
#[derive(Clone, Debug, PartialEq)]
pub struct OrientationTrial {
    pub orientation: Orientation,
    pub omega: Result<i64, OmegaError>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationRecord {
    pub params: CalibrationParams,
    pub trials: Vec<OrientationTrial>,
    /// The unique orientation with index +1, if there is exactly one.
    pub pinned: Option<Orientation>,
}

pub fn calibrate(params: &CalibrationParams) -> Result<CalibrationRecord, OmegaError> {
    let pair = build_harmonic(params.lambda, params.dim)?;
    let trials: Vec<OrientationTrial> = [Orientation::Literal, Orientation::Conjugate]
        .into_iter()
        .map(|orientation| {
            let omega = build_q(&pair, orientation)
                .and_then(|qb| omega_from_q(&qb, &params.cuts, DEFAULT_GAP_FLOOR))
                .map(|r| r.omega);
            OrientationTrial { orientation, omega }
        })
        .collect();
    let winners: Vec<Orientation> =
        trials.iter().filter(|t| t.omega == Ok(1)).map(|t| t.orientation).collect();
    let pinned = match winners.as_slice() {
        [only] => Some(*only),
        _ => None,
    };
    Ok(CalibrationRecord { params: params.clone(), trials, pinned })
}

fn describe(trial: &OrientationTrial) -> String {
    match &trial.omega {
        Ok(w) => format!("{}: omega = {w}", trial.orientation),
        Err(e) => format!("{}: {}", trial.orientation, e.kind()),
    }
}

/// Rust source for `pinned.rs`.
pub fn render_pinned(record: &CalibrationRecord) -> String {
    let mut out = String::from("// @generated by `omega-index calibrate --write`; do not edit.\n");
    for t in &record.trials {
        out.push_str(&format!("// {}\n", describe(t)));
    }
    out.push('\n');
    out.push_str("use crate::index::Orientation;\n\n");
    out.push_str(&format!("pub const PINNED_LAMBDA: f64 = {:?};\n", record.params.lambda));
    out.push_str(&format!("pub const PINNED_DIM: usize = {};\n", record.params.dim));
    let cuts: Vec<String> = record.params.cuts.iter().map(|c| c.to_string()).collect();
    out.push_str(&format!("pub const PINNED_CUTS: &[usize] = &[{}];\n", cuts.join(", ")));
    let pinned = match record.pinned {
        Some(o) => format!("Some(Orientation::{o:?})"),
        None => "None".to_string(),
    };
    out.push_str(&format!("pub const PINNED_ORIENTATION: Option<Orientation> = {pinned};\n"));
    out
}

/// The checked-in `pinned.rs`, for drift checks.
pub const PINNED_SOURCE: &str = include_str!("pinned.rs");
