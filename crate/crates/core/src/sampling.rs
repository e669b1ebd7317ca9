//! Seeded random matrix ensembles.
//!
//! Every draw comes from a ChaCha stream keyed by `(seed, stream)`, so a
//! trial's matrices depend only on its identifiers and never on which
//! worker thread ran it.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{hermitian_norm, ComplexMatrix};

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for trial `trial` of check number `check`.
pub fn stream_id(check: u32, trial: u32) -> u64 {
    (u64::from(check) << 32) | u64::from(trial)
}

fn complex_normal(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Complex Ginibre matrix with unit-variance entries.
pub fn ginibre(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = complex_normal(rng);
        }
    }
    ComplexMatrix::from_inner(m)
}

/// Random Hermitian matrix `(G + Gᴴ)/2`.
pub fn hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    ginibre(rng, n, n).symmetrized()
}

/// Random Hermitian matrix scaled to operator norm 1 (zero for `n == 0`).
pub fn unit_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let h = hermitian(rng, n);
    let norm = hermitian_norm(&h).unwrap_or(0.0);
    if norm > 0.0 {
        h.scale_real(1.0 / norm)
    } else {
        h
    }
}

/// Haar-ish unitary from the QR factor of a Ginibre matrix.
pub fn unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let g = ginibre(rng, n, n);
    ComplexMatrix::from_inner(g.inner().clone().qr().q())
}

/// Uniform real in `[lo, hi)`.
pub fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Uniform integer in `[lo, hi]`.
pub fn uniform_dim(rng: &mut impl Rng, lo: usize, hi: usize) -> usize {
    rng.random_range(lo..=hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::operator_norm;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = ginibre(&mut rng_for(7, stream_id(1, 2)), 3, 3);
        let b = ginibre(&mut rng_for(7, stream_id(1, 2)), 3, 3);
        let c = ginibre(&mut rng_for(7, stream_id(1, 3)), 3, 3);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn unit_hermitian_has_norm_one() {
        let h = unit_hermitian(&mut rng_for(1, 0), 6);
        assert!(h.hermitian_residual() == 0.0);
        assert!((operator_norm(&h) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unitary_is_unitary() {
        let u = unitary(&mut rng_for(3, 0), 5);
        let gram = u.adjoint().matmul(&u).unwrap();
        assert!(gram.sub(&ComplexMatrix::identity(5)).unwrap().max_abs_entry() < 1e-13);
    }
}
