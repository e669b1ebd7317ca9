//! Operator pairs and the reference constructions built from them.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{OmegaError, Result};
use crate::linalg::{hpd_inverse, operator_norm, ComplexMatrix, HERMITIAN_TOL};
use crate::matrix_io::load_matrix;
use crate::sampling;

/// Two Hermitian truncations `(A, B)` of the same size.
///
/// Indices `>= dim - boundary_window` are the truncation collar: entries
/// there are distorted by the finite cut and are excluded from interior
/// measurements.
#[derive(Clone, Debug)]
pub struct OperatorPair {
    a: ComplexMatrix,
    b: ComplexMatrix,
    pub basis_label: String,
    /// Analytic `‖[A,B]‖` for the untruncated operators, when known.
    pub known_commutator_norm: Option<f64>,
    boundary_window: usize,
}

impl OperatorPair {
    pub fn new(
        a: ComplexMatrix,
        b: ComplexMatrix,
        basis_label: impl Into<String>,
        known_commutator_norm: Option<f64>,
        boundary_window: usize,
    ) -> Result<Self> {
        for (name, m) in [("A", &a), ("B", &b)] {
            if !m.is_square() {
                return Err(OmegaError::DimensionMismatch(format!(
                    "{name} is {}x{}, expected square",
                    m.rows(),
                    m.cols()
                )));
            }
            let residual = m.hermitian_residual();
            if residual > HERMITIAN_TOL {
                return Err(OmegaError::NonHermitianInput { residual, tolerance: HERMITIAN_TOL });
            }
        }
        if a.rows() != b.rows() {
            return Err(OmegaError::DimensionMismatch(format!(
                "A is {0}x{0} but B is {1}x{1}",
                a.rows(),
                b.rows()
            )));
        }
        let dim = a.rows();
        if dim == 0 {
            return Err(OmegaError::InvalidParameter("operator pair must be non-empty".into()));
        }
        if 2 * boundary_window >= dim {
            return Err(OmegaError::InvalidParameter(format!(
                "boundary window {boundary_window} must be below half the dimension {dim}"
            )));
        }
        Ok(Self { a, b, basis_label: basis_label.into(), known_commutator_norm, boundary_window })
    }

    pub fn a(&self) -> &ComplexMatrix {
        &self.a
    }

    pub fn b(&self) -> &ComplexMatrix {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn boundary_window(&self) -> usize {
        self.boundary_window
    }

    /// Number of leading basis vectors unaffected by truncation.
    pub fn interior(&self) -> usize {
        self.dim() - self.boundary_window
    }

    /// `C = A + iB`.
    pub fn c(&self) -> ComplexMatrix {
        self.a.add(&self.b.scale(Complex64::new(0.0, 1.0))).expect("A and B share a shape")
    }

    /// `(A, -B)`: swaps `C` for `Cᴴ`.
    pub fn conjugated(&self) -> Self {
        Self { b: self.b.scale_real(-1.0), ..self.clone() }
    }

    /// `(s·A, s·B)`; the known commutator norm scales by `s²`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            a: self.a.scale_real(s),
            b: self.b.scale_real(s),
            known_commutator_norm: self.known_commutator_norm.map(|k| k * s * s),
            ..self.clone()
        }
    }

    /// Same pair seen through a relabelled basis: row/column `k` of the
    /// result is row/column `perm[k]` of the original.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.dim()];
        if perm.len() != self.dim() || perm.iter().any(|&p| p >= seen.len() || std::mem::replace(&mut seen[p], true)) {
            return Err(OmegaError::InvalidParameter("not a permutation of the basis".into()));
        }
        Ok(Self {
            a: self.a.principal_submatrix(perm),
            b: self.b.principal_submatrix(perm),
            ..self.clone()
        })
    }

    /// `‖[A,B]‖` with the boundary collar zeroed.
    pub fn masked_commutator_norm(&self) -> Result<f64> {
        let comm = self.a.commutator(&self.b)?;
        Ok(operator_norm(&comm.mask_tail(self.interior())))
    }
}

/// Which operator a perturbation acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    /// `magnitude · I`
    ScalarShift,
    /// `magnitude · diag(1/(k+1))`
    DiagonalDecay,
    /// `magnitude · R`, `R` seeded random Hermitian with `‖R‖ = 1`
    RandomHermitian,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub target: Target,
    pub kind: PerturbationKind,
    pub magnitude: f64,
    pub seed: u64,
}

/// How to construct a pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builder", rename_all = "snake_case")]
pub enum PairSpec {
    Harmonic { lambda: f64, dim: usize },
    CommutingGrid { radius: usize, scale: f64 },
    File { path_a: String, path_b: String, boundary_window: Option<usize> },
}

impl PairSpec {
    pub fn build(&self) -> Result<OperatorPair> {
        match self {
            PairSpec::Harmonic { lambda, dim } => build_harmonic(*lambda, *dim),
            PairSpec::CommutingGrid { radius, scale } => build_commuting_grid(*radius, *scale),
            PairSpec::File { path_a, path_b, boundary_window } => {
                load_pair(Path::new(path_a), Path::new(path_b), *boundary_window)
            }
        }
    }

    /// Builds the pair and applies perturbations in order.
    pub fn build_perturbed(&self, perturbations: &[Perturbation]) -> Result<OperatorPair> {
        perturbations.iter().try_fold(self.build()?, |pair, p| perturb(&pair, p))
    }
}

/// Position and momentum of the oscillator, scaled by `√λ`, in the Hermite
/// basis truncated to `dim` states.
///
/// `X = (a + aᴴ)/√2` and `P = i(aᴴ − a)/√2`, so `[X, P] = iI` away from the
/// last index and `A + iB = √(2λ)·a`.
pub fn build_harmonic(lambda: f64, dim: usize) -> Result<OperatorPair> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(OmegaError::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    if dim < 8 {
        return Err(OmegaError::InvalidParameter(format!("harmonic pair needs dim >= 8, got {dim}")));
    }
    let s = lambda.sqrt();
    let mut a = ComplexMatrix::zeros(dim, dim);
    let mut b = ComplexMatrix::zeros(dim, dim);
    for n in 0..dim - 1 {
        let w = s * ((n + 1) as f64 / 2.0).sqrt();
        a.set(n, n + 1, Complex64::new(w, 0.0));
        a.set(n + 1, n, Complex64::new(w, 0.0));
        b.set(n, n + 1, Complex64::new(0.0, -w));
        b.set(n + 1, n, Complex64::new(0.0, w));
    }
    OperatorPair::new(a, b, "oscillator", Some(lambda), (dim / 8).max(1))
}

/// Lattice points of `[-radius, radius]²` ordered by `n² + m²`, ties by `(n, m)`.
pub fn grid_points(radius: usize) -> Vec<(i64, i64)> {
    let r = radius as i64;
    let mut pts: Vec<(i64, i64)> = (-r..=r).flat_map(|n| (-r..=r).map(move |m| (n, m))).collect();
    pts.sort_by_key(|&(n, m)| (n * n + m * m, n, m));
    pts
}

/// Multiplication by the coordinates on a square patch of `Z²`.
///
/// Shells `n² + m² < (radius+1)²` lie entirely inside the patch; the
/// remaining corner points form the boundary window.
pub fn build_commuting_grid(radius: usize, scale: f64) -> Result<OperatorPair> {
    if radius < 1 {
        return Err(OmegaError::InvalidParameter("grid radius must be at least 1".into()));
    }
    if !scale.is_finite() {
        return Err(OmegaError::InvalidParameter(format!("grid scale must be finite, got {scale}")));
    }
    let pts = grid_points(radius);
    let complete = ((radius + 1) * (radius + 1)) as i64;
    let window = pts.iter().filter(|&&(n, m)| n * n + m * m >= complete).count();
    let xs: Vec<f64> = pts.iter().map(|&(n, _)| scale * n as f64).collect();
    let ys: Vec<f64> = pts.iter().map(|&(_, m)| scale * m as f64).collect();
    OperatorPair::new(
        ComplexMatrix::from_real_diagonal(&xs),
        ComplexMatrix::from_real_diagonal(&ys),
        "lattice",
        Some(0.0),
        window,
    )
}

/// Leading `2·cut` block of the closed-form oscillator almost-projection, in
/// the interleaved basis `(top φ₀, bottom φ₀, top φ₁, bottom φ₁, …)`.
///
/// Index 0 carries the scalar 1; rows `2n−1, 2n` carry the 2×2 block with
/// diagonal `2(n−1)λ/(2(n−1)λ+1)`, `1/(2nλ+1)` and off-diagonal
/// `√(nλ)/(2nλ+1)`. The last row falls on the first entry of the next block.
pub fn build_oscillator_analytic_q(lambda: f64, cut: usize) -> Result<ComplexMatrix> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(OmegaError::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    if cut < 2 {
        return Err(OmegaError::InvalidParameter(format!("cut must be at least 2, got {cut}")));
    }
    let size = 2 * cut;
    let re = |x: f64| Complex64::new(x, 0.0);
    let mut q = ComplexMatrix::zeros(size, size);
    q.set(0, 0, re(1.0));
    for n in 1..=cut {
        let (r1, r2) = (2 * n - 1, 2 * n);
        let prev = 2.0 * (n - 1) as f64 * lambda;
        q.set(r1, r1, re(prev / (prev + 1.0)));
        if r2 < size {
            let cur = 2.0 * n as f64 * lambda + 1.0;
            let off = re((n as f64 * lambda).sqrt() / cur);
            q.set(r2, r2, re(1.0 / cur));
            q.set(r1, r2, off);
            q.set(r2, r1, off);
        }
    }
    Ok(q)
}

/// Applies one perturbation. Only a scalar shift keeps the known commutator.
pub fn perturb(pair: &OperatorPair, p: &Perturbation) -> Result<OperatorPair> {
    if !(p.magnitude >= 0.0 && p.magnitude.is_finite()) {
        return Err(OmegaError::InvalidParameter(format!(
            "perturbation magnitude must be finite and >= 0, got {}",
            p.magnitude
        )));
    }
    if p.magnitude == 0.0 {
        return Ok(pair.clone());
    }
    let dim = pair.dim();
    let delta = match p.kind {
        PerturbationKind::ScalarShift => ComplexMatrix::identity(dim).scale_real(p.magnitude),
        PerturbationKind::DiagonalDecay => {
            let d: Vec<f64> = (0..dim).map(|k| p.magnitude / (k + 1) as f64).collect();
            ComplexMatrix::from_real_diagonal(&d)
        }
        PerturbationKind::RandomHermitian => {
            sampling::unit_hermitian(&mut sampling::rng_for(p.seed, 0), dim).scale_real(p.magnitude)
        }
    };
    let (a, b) = match p.target {
        Target::A => (pair.a.add(&delta)?, pair.b.clone()),
        Target::B => (pair.a.clone(), pair.b.add(&delta)?),
    };
    let known = match p.kind {
        PerturbationKind::ScalarShift => pair.known_commutator_norm,
        _ => None,
    };
    OperatorPair::new(a, b, pair.basis_label.clone(), known, pair.boundary_window)
}

/// Bott projection at a point of the plane.
pub fn bott_point(z: Complex64) -> ComplexMatrix {
    let d = 1.0 / (1.0 + z.norm_sqr());
    let mut p = ComplexMatrix::zeros(2, 2);
    p.set(0, 0, Complex64::new(d, 0.0));
    p.set(0, 1, z * d);
    p.set(1, 0, z.conj() * d);
    p.set(1, 1, Complex64::new(1.0 - d, 0.0));
    p
}

/// Stereographic coordinates of a pair and how far they are from a sphere.
#[derive(Clone, Debug)]
pub struct SphereMap {
    pub h1: ComplexMatrix,
    pub h2: ComplexMatrix,
    pub h3: ComplexMatrix,
    /// `‖h1² + h2² + h3² − h1‖`
    pub relation_defect: f64,
    /// `maxᵢ ‖hᵢ − hᵢᴴ‖`
    pub nonhermitian_defect: f64,
}

pub fn sphere_map(pair: &OperatorPair) -> Result<SphereMap> {
    let c = pair.c();
    let n = pair.dim();
    // I + Δ = 2I + CCᴴ
    let shifted = c.matmul(&c.adjoint())?.shift_diagonal(2.0)?;
    let h1 = hpd_inverse(&shifted)?;
    let h2 = pair.a.matmul(&h1)?;
    let h3 = pair.b.matmul(&h1)?;
    let relation = h1
        .matmul(&h1)?
        .add(&h2.matmul(&h2)?)?
        .add(&h3.matmul(&h3)?)?
        .sub(&h1)?;
    debug_assert_eq!(relation.rows(), n);
    let nonhermitian_defect = [&h1, &h2, &h3]
        .iter()
        .map(|h| operator_norm(&h.sub(&h.adjoint()).expect("square")))
        .fold(0.0, f64::max);
    Ok(SphereMap { relation_defect: operator_norm(&relation), nonhermitian_defect, h1, h2, h3 })
}

/// Reads `A` and `B` from `dense-complex-v1` files. The boundary window
/// defaults to `dim / 8`.
pub fn load_pair(path_a: &Path, path_b: &Path, boundary_window: Option<usize>) -> Result<OperatorPair> {
    let a = load_matrix(path_a)?;
    let b = load_matrix(path_b)?;
    let window = boundary_window.unwrap_or(a.rows() / 8);
    OperatorPair::new(a, b, "file", None, window)
}
