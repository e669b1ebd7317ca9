// @generated by `omega-index calibrate --write`; do not edit.
// literal: omega = -1
// conjugate: omega = 1

use crate::index::Orientation;

pub const PINNED_LAMBDA: f64 = 0.01;
pub const PINNED_DIM: usize = 120;
pub const PINNED_CUTS: &[usize] = &[70, 80, 90];
pub const PINNED_ORIENTATION: Option<Orientation> = Some(Orientation::Conjugate);
