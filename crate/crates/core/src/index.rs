//! The almost-projection `Q(A, B)` and the integer index read off its
//! corner spectrum.
//!
//! With `C = A + iB`, `Δ = I + CCᴴ` and `Γ = I + CᴴC`,
//!
//! ```text
//! Q = [ Δ⁻¹      CΓ⁻¹   ]
//!     [ Γ⁻¹Cᴴ    I − Γ⁻¹ ]
//! ```
//!
//! which is the Bott projection with `(x, y)` replaced by `(A, B)`. When
//! `‖[A,B]‖` is small, `Q` is nearly idempotent and the compression of `Q`
//! to the first `N` basis vectors of both copies has `N + ω` eigenvalues
//! above 1/2.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::PINNED_ORIENTATION;
use crate::error::{OmegaError, Result};
use crate::linalg::{hermitian_eigenvalues, hermitian_norm, hpd_inverse, ComplexMatrix};
use crate::operators::OperatorPair;

/// Admissibility threshold on the idempotency bound.
pub const ADMISSIBLE_BOUND: f64 = 0.25;
/// Default minimum distance of any corner eigenvalue from 1/2.
pub const DEFAULT_GAP_FLOOR: f64 = 0.05;
/// Default target for `‖[A,B]‖` when rescaling a pair.
pub const DEFAULT_TARGET_COMMUTATOR: f64 = 0.02;
/// Safety factor applied on top of the exact rescaling.
pub const SCALE_MARGIN: f64 = 0.05;
/// Slack on the defect warning; `Q² − Q` is never exactly zero in floating point.
pub const DEFECT_ROUNDOFF: f64 = 1e-9;

/// Which of `C`, `Cᴴ` is substituted for `z` in the Bott projection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `C = A + iB`
    Literal,
    /// `C = A − iB`, i.e. the pair `(A, −B)`
    Conjugate,
    /// Whatever calibration pinned.
    Default,
}

impl Orientation {
    /// Resolves [`Orientation::Default`] against the pinned calibration.
    pub fn resolve(self) -> Result<Orientation> {
        match self {
            Orientation::Default => PINNED_ORIENTATION.ok_or(OmegaError::CalibrationMissing),
            other => Ok(other),
        }
    }

    pub fn reversed(self) -> Result<Orientation> {
        Ok(match self.resolve()? {
            Orientation::Literal => Orientation::Conjugate,
            _ => Orientation::Literal,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Literal => "literal",
            Orientation::Conjugate => "conjugate",
            Orientation::Default => "default",
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Orientation {
    type Err = OmegaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(Orientation::Literal),
            "conjugate" => Ok(Orientation::Conjugate),
            "default" => Ok(Orientation::Default),
            other => Err(OmegaError::ConfigParse(format!("unknown orientation {other:?}"))),
        }
    }
}

/// `Q` together with the ingredients used to build it.
#[derive(Clone, Debug)]
pub struct QBuild {
    /// `2M × 2M`, Hermitian.
    pub q: ComplexMatrix,
    /// Never [`Orientation::Default`].
    pub orientation: Orientation,
    /// `I + CᴴC`
    pub gamma: ComplexMatrix,
    /// `I + CCᴴ`
    pub delta: ComplexMatrix,
    /// `‖CᴴC − CCᴴ‖` used for admissibility: twice the known commutator
    /// norm when the builder supplies one, else `measured_epsilon`.
    pub epsilon: f64,
    /// `‖CᴴC − CCᴴ‖` with the boundary collar zeroed.
    pub measured_epsilon: f64,
    /// `‖Q² − Q‖` on the interior indices of both copies.
    pub defect: f64,
    pub dim: usize,
    pub boundary_window: usize,
}

impl QBuild {
    pub fn interior(&self) -> usize {
        self.dim - self.boundary_window
    }
}

pub fn build_q(pair: &OperatorPair, orientation: Orientation) -> Result<QBuild> {
    let orientation = orientation.resolve()?;
    let effective = match orientation {
        Orientation::Conjugate => pair.conjugated(),
        _ => pair.clone(),
    };
    let m = pair.dim();
    let c = effective.c();
    let c_adj = c.adjoint();
    let cc_adj = c.matmul(&c_adj)?;
    let c_adj_c = c_adj.matmul(&c)?;
    let delta = cc_adj.shift_diagonal(1.0)?;
    let gamma = c_adj_c.shift_diagonal(1.0)?;
    let delta_inv = hpd_inverse(&delta)?;
    let gamma_inv = hpd_inverse(&gamma)?;

    let upper_right = c.matmul(&gamma_inv)?;
    let lower_right = ComplexMatrix::identity(m).sub(&gamma_inv)?;
    let mut q = ComplexMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        for j in 0..m {
            q.set(i, j, delta_inv.get(i, j));
            q.set(i, m + j, upper_right.get(i, j));
            q.set(m + i, j, upper_right.get(j, i).conj());
            q.set(m + i, m + j, lower_right.get(i, j));
        }
    }
    let q = q.symmetrized();

    let interior = pair.interior();
    let self_commutator = c_adj_c.sub(&cc_adj)?.symmetrized();
    let measured_epsilon = hermitian_norm(&self_commutator.mask_tail(interior))?;
    let epsilon = pair.known_commutator_norm.map_or(measured_epsilon, |k| 2.0 * k);

    let keep: Vec<usize> = (0..interior).chain(m..m + interior).collect();
    let q2_minus_q = q.matmul(&q)?.sub(&q)?.principal_submatrix(&keep);
    let defect = hermitian_norm(&q2_minus_q.symmetrized())?;

    Ok(QBuild {
        q,
        orientation,
        gamma,
        delta,
        epsilon,
        measured_epsilon,
        defect,
        dim: m,
        boundary_window: pair.boundary_window(),
    })
}

/// Upper bound on `‖Q² − Q‖` given `‖CᴴC − CCᴴ‖ < ε`: `(4ε − 2ε²)/(1 − ε)²`.
pub fn theorem_bound(epsilon: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(OmegaError::InvalidParameter(format!("epsilon must lie in [0, 1), got {epsilon}")));
    }
    Ok((4.0 * epsilon - 2.0 * epsilon * epsilon) / (1.0 - epsilon).powi(2))
}

/// The measured defect next to its theoretical bound.
pub fn idempotency_defect(qb: &QBuild) -> Result<(f64, f64)> {
    Ok((qb.defect, theorem_bound(qb.epsilon)?))
}

/// Largest ε for which the idempotency bound stays below 1/4: the smaller
/// root of `9ε² − 18ε + 1 = 0`.
pub fn epsilon_admissibility_edge() -> f64 {
    1.0 - 288f64.sqrt() / 18.0
}

/// Indices of the corner block: first `cut` of the top copy, then first
/// `cut` of the bottom copy.
pub fn corner_indices(dim: usize, cut: usize) -> Vec<usize> {
    (0..cut).chain(dim..dim + cut).collect()
}

/// Compression of `Q` to `L_N ⊕ L_N`, `L_N` spanned by the first `cut`
/// basis vectors.
pub fn extract_q11(qb: &QBuild, cut: usize) -> Result<ComplexMatrix> {
    if cut == 0 {
        return Err(OmegaError::InvalidParameter("cut must be at least 1".into()));
    }
    if cut > qb.interior() {
        return Err(OmegaError::CutTooLarge { cut, limit: qb.interior() });
    }
    Ok(qb.q.principal_submatrix(&corner_indices(qb.dim, cut)))
}

/// Counts of a sorted spectrum on either side of 1/2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Count {
    /// Eigenvalues strictly above 1/2.
    pub m_n: usize,
    /// `min |μ − 1/2|`; infinite for an empty spectrum.
    pub gap: f64,
    pub s0_count: usize,
    pub s1_count: usize,
}

pub fn count_upper(eigenvalues: &[f64]) -> Count {
    let s1_count = eigenvalues.iter().filter(|&&mu| mu > 0.5).count();
    let gap = eigenvalues.iter().map(|mu| (mu - 0.5).abs()).fold(f64::INFINITY, f64::min);
    Count { m_n: s1_count, gap, s0_count: eigenvalues.len() - s1_count, s1_count }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub cut: usize,
    /// Ascending, length `2·cut`.
    pub eigenvalues: Vec<f64>,
    pub m_n: usize,
    pub gap: f64,
    pub s0_count: usize,
    pub s1_count: usize,
}

impl SpectralReport {
    pub fn omega(&self) -> i64 {
        self.m_n as i64 - self.cut as i64
    }
}

pub fn spectral_report(qb: &QBuild, cut: usize) -> Result<SpectralReport> {
    let eigenvalues = hermitian_eigenvalues(&extract_q11(qb, cut)?)?;
    let count = count_upper(&eigenvalues);
    Ok(SpectralReport {
        cut,
        eigenvalues,
        m_n: count.m_n,
        gap: count.gap,
        s0_count: count.s0_count,
        s1_count: count.s1_count,
    })
}

/// Five equispaced cuts in `[dim/8, 3·dim/8]`, deduplicated.
pub fn default_cuts(dim: usize) -> Vec<usize> {
    let lo = (dim / 8).max(1);
    let hi = (3 * dim / 8).max(lo);
    let mut cuts: Vec<usize> = (0..5).map(|k| lo + (hi - lo) * k / 4).collect();
    cuts.dedup();
    cuts
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaResult {
    pub omega: i64,
    pub reports: Vec<SpectralReport>,
    pub epsilon: f64,
    pub measured_epsilon: f64,
    pub defect: f64,
    pub theorem_bound: f64,
    pub orientation: Orientation,
    pub lambda_a: f64,
    pub mu_b: f64,
    pub warnings: Vec<String>,
}

/// Fails with [`OmegaError::InadmissibleCommutator`] unless the bound is below 1/4.
pub fn check_admissible(epsilon: f64) -> Result<f64> {
    match theorem_bound(epsilon) {
        Ok(bound) if bound < ADMISSIBLE_BOUND => Ok(bound),
        Ok(bound) => Err(OmegaError::InadmissibleCommutator { epsilon, bound }),
        Err(_) => Err(OmegaError::InadmissibleCommutator { epsilon, bound: f64::INFINITY }),
    }
}

/// The index of `pair`, required to agree across every cut.
pub fn omega(pair: &OperatorPair, cuts: &[usize], orientation: Orientation, gap_floor: f64) -> Result<OmegaResult> {
    let qb = build_q(pair, orientation)?;
    omega_from_q(&qb, cuts, gap_floor)
}

pub fn omega_from_q(qb: &QBuild, cuts: &[usize], gap_floor: f64) -> Result<OmegaResult> {
    if cuts.is_empty() {
        return Err(OmegaError::InvalidParameter("at least one cut is required".into()));
    }
    if !(0.0..0.5).contains(&gap_floor) {
        return Err(OmegaError::InvalidParameter(format!("gap floor must lie in [0, 0.5), got {gap_floor}")));
    }
    let bound = check_admissible(qb.epsilon)?;
    for &cut in cuts {
        if cut == 0 {
            return Err(OmegaError::InvalidParameter("cut must be at least 1".into()));
        }
        if cut > qb.interior() {
            return Err(OmegaError::CutTooLarge { cut, limit: qb.interior() });
        }
    }

    let reports = cuts
        .par_iter()
        .map(|&cut| spectral_report(qb, cut))
        .collect::<Result<Vec<_>>>()?;

    if let Some(r) = reports.iter().find(|r| r.gap < gap_floor) {
        return Err(OmegaError::GapViolation { cut: r.cut, gap: r.gap, floor: gap_floor });
    }
    let omega = reports[0].omega();
    if reports.iter().any(|r| r.omega() != omega) {
        let detail = reports
            .iter()
            .map(|r| format!("N={} -> {}", r.cut, r.omega()))
            .collect::<Vec<_>>()
            .join(", ");
        return Err(OmegaError::UnstableCount { detail });
    }

    let mut warnings = Vec::new();
    if qb.defect > bound + DEFECT_ROUNDOFF {
        warnings.push(format!(
            "interior defect {:.3e} exceeds the idempotency bound {bound:.3e}; the collar may be too thin",
            qb.defect
        ));
    }
    if (qb.epsilon - qb.measured_epsilon).abs() > 1e-9 * (1.0 + qb.epsilon) {
        warnings.push(format!(
            "measured epsilon {:.6e} differs from the analytic value {:.6e}",
            qb.measured_epsilon, qb.epsilon
        ));
    }

    Ok(OmegaResult {
        omega,
        reports,
        epsilon: qb.epsilon,
        measured_epsilon: qb.measured_epsilon,
        defect: qb.defect,
        theorem_bound: bound,
        orientation: qb.orientation,
        lambda_a: 1.0,
        mu_b: 1.0,
        warnings,
    })
}

#[derive(Clone, Debug)]
pub struct ScaledPair {
    pub pair: OperatorPair,
    pub lambda_a: f64,
    pub mu_b: f64,
    /// Commutator norm the scale factor was derived from.
    pub kappa: f64,
}

/// Shrinks `(A, B)` uniformly until `‖[A, B]‖ <= target`.
pub fn scale_admissible(pair: &OperatorPair, target: f64) -> Result<ScaledPair> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(OmegaError::InvalidParameter(format!("target must be positive, got {target}")));
    }
    let kappa = match pair.known_commutator_norm {
        Some(k) => k,
        None => pair.masked_commutator_norm()?,
    };
    if !kappa.is_finite() {
        return Err(OmegaError::InvalidParameter(format!("commutator norm is not finite: {kappa}")));
    }
    let s = if kappa <= target { 1.0 } else { (target / kappa).sqrt() * (1.0 - SCALE_MARGIN) };
    if s == 1.0 {
        return Ok(ScaledPair { pair: pair.clone(), lambda_a: 1.0, mu_b: 1.0, kappa });
    }
    let scaled = pair.scaled(s);
    let after = scaled.masked_commutator_norm()?;
    if after > target {
        return Err(OmegaError::InvalidParameter(format!(
            "rescaling by {s} left the commutator at {after}, above {target}"
        )));
    }
    Ok(ScaledPair { pair: scaled, lambda_a: s, mu_b: s, kappa })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{build_commuting_grid, build_harmonic};

    fn zero_pair() -> OperatorPair {
        let z = ComplexMatrix::zeros(1, 1);
        OperatorPair::new(z.clone(), z, "point", Some(0.0), 0).unwrap()
    }

    #[test]
    fn bound_values() {
        assert_eq!(theorem_bound(0.0).unwrap(), 0.0);
        assert!((theorem_bound(0.04).unwrap() - 0.1568 / 0.9216).abs() < 1e-15);
        assert!((theorem_bound(0.04).unwrap() - 0.170_139).abs() < 1e-6);
        assert!((theorem_bound(0.02).unwrap() - 0.082_465).abs() < 1e-6);
        assert!(theorem_bound(1.0).is_err());
        assert!(theorem_bound(-0.1).is_err());
    }

    #[test]
    fn admissibility_edge_matches_bisection() {
        let (mut lo, mut hi) = (0.0f64, 0.5f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let b = (4.0 * mid - 2.0 * mid * mid) / (1.0 - mid).powi(2);
            if b < 0.25 {
                lo = mid
            } else {
                hi = mid
            }
        }
        assert!((epsilon_admissibility_edge() - lo).abs() < 1e-14);
        // with ε = 4λ this is the λ edge (18 − √288)/72
        assert!((epsilon_admissibility_edge() / 4.0 - (18.0 - 288f64.sqrt()) / 72.0).abs() < 1e-15);
        assert!((epsilon_admissibility_edge() / 4.0 - 0.014_298).abs() < 1e-6);
    }

    #[test]
    fn zero_pair_q_is_bott_at_origin() {
        for o in [Orientation::Literal, Orientation::Conjugate] {
            let qb = build_q(&zero_pair(), o).unwrap();
            assert_eq!(qb.q.to_row_major().iter().map(|z| z.re).collect::<Vec<_>>(), vec![1.0, 0.0, 0.0, 0.0]);
            assert_eq!(qb.defect, 0.0);
            let q11 = extract_q11(&qb, 1).unwrap();
            assert_eq!(q11, qb.q);
        }
    }

    #[test]
    fn count_examples() {
        let c = count_upper(&[0.01, 0.49, 0.51, 0.99]);
        assert_eq!(c.m_n, 2);
        assert!((c.gap - 0.01).abs() < 1e-15);
        assert_eq!((c.s0_count, c.s1_count), (2, 2));
        let c = count_upper(&[0.0; 6]);
        assert_eq!((c.m_n, c.gap), (0, 0.5));
        // exactly 1/2 is not above 1/2
        assert_eq!(count_upper(&[0.5]).m_n, 0);
    }

    #[test]
    fn default_cut_sweep() {
        assert_eq!(default_cuts(400), vec![50, 75, 100, 125, 150]);
        assert_eq!(default_cuts(8), vec![1, 2, 3]);
    }

    #[test]
    fn cut_limits() {
        let qb = build_q(&build_harmonic(0.01, 16).unwrap(), Orientation::Literal).unwrap();
        assert_eq!(qb.interior(), 14);
        assert!(extract_q11(&qb, 14).is_ok());
        assert_eq!(extract_q11(&qb, 15).unwrap_err(), OmegaError::CutTooLarge { cut: 15, limit: 14 });
        assert!(extract_q11(&qb, 0).is_err());
    }

    #[test]
    fn commuting_grid_full_cut_is_q() {
        let pair = build_commuting_grid(1, 1.0).unwrap();
        let wide = OperatorPair::new(pair.a().clone(), pair.b().clone(), "lattice", Some(0.0), 0).unwrap();
        let qb = build_q(&wide, Orientation::Literal).unwrap();
        assert_eq!(extract_q11(&qb, 9).unwrap(), qb.q);
    }

    #[test]
    fn inadmissible_pair_rejected() {
        let pair = build_harmonic(0.1, 40).unwrap();
        let err = omega(&pair, &[10], Orientation::Conjugate, DEFAULT_GAP_FLOOR).unwrap_err();
        match err {
            OmegaError::InadmissibleCommutator { epsilon, bound } => {
                assert!((epsilon - 0.2).abs() < 1e-15);
                assert!((bound - 0.72 / 0.64).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn scaling_examples() {
        let pair = build_harmonic(0.01, 32).unwrap();
        let same = scale_admissible(&pair, 0.02).unwrap();
        assert_eq!(same.lambda_a, 1.0);
        assert_eq!(same.pair.a(), pair.a());

        // κ = 1: s = 0.95 √0.02
        let unit = build_harmonic(1.0, 32).unwrap();
        let scaled = scale_admissible(&unit, 0.02).unwrap();
        assert!((scaled.lambda_a - 0.95 * 0.02f64.sqrt()).abs() < 1e-15);
        assert!((scaled.lambda_a - 0.1344).abs() < 1e-4);
        let after = scaled.pair.masked_commutator_norm().unwrap();
        assert!((after - 0.95f64.powi(2) * 0.02).abs() < 1e-12);
        assert!((after - 0.01805).abs() < 1e-12);
        assert!(after <= 0.02);

        assert!(scale_admissible(&pair, 0.0).is_err());
    }

    #[test]
    fn orientation_parsing() {
        assert_eq!("literal".parse::<Orientation>().unwrap(), Orientation::Literal);
        assert!("sideways".parse::<Orientation>().is_err());
        assert_eq!(Orientation::Literal.reversed().unwrap(), Orientation::Conjugate);
    }
}
