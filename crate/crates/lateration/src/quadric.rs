//! Quadrics with a focus: classification, second focus, and recovery of
//! focal parameters from general quadric coefficients.
//!
//! A point set with the focus-directrix property,
//! `Q = { P : ‖P − F‖ = |⟨u,P⟩ − α| }` with `‖u‖ = e` the eccentricity,
//! is always a quadric of revolution. Two numbers pin down its shape: the
//! eccentricity and the semilatus rectum `|l|`, `l = ⟨u,F⟩ − α`. The classes
//! are
//!
//! | conditions        | class                        | sheets |
//! |-------------------|------------------------------|--------|
//! | e < 1, |l| > 0    | sphere (e=0) / prolate spheroid | 1   |
//! | e > 1, |l| > 0    | two-sheet hyperboloid        | 2      |
//! | e > 1, |l| = 0    | cone                         | 2      |
//! | e = 1, |l| > 0    | paraboloid                   | 1      |
//!
//! `u = 0` is allowed and describes the sphere of radius `|α|` around `F`.
//! The two sheets `Q±` are swapped by `(u, α) → (−u, −α)`; there is nothing
//! intrinsically positive about either.

use crate::numkernel::{dot, norm, Matrix, Tolerance};
use serde::{Deserialize, Serialize};
use std::fmt;

// ── Monomial order ──────────────────────────────────────────────────────────
//
// All quadric coefficient vectors in this crate use one fixed order of the
// degree-≤2 monomials:
//
//     1, x₁ … x_n, x₁² … x_n², x₁x₂, x₁x₃, …, x_{n−1}x_n
//
// i.e. constant, linear, squares, then cross terms with index pairs in
// lexicographic order.

/// Number of degree-≤2 monomials in `n` variables: `(n+1)(n+2)/2`.
pub fn monomial_count(n: usize) -> usize {
    (n + 1) * (n + 2) / 2
}

/// All degree-≤2 monomials evaluated at a point, in the fixed order.
pub fn monomial_row(point: &[f64]) -> Vec<f64> {
    let n = point.len();
    let mut row = Vec::with_capacity(monomial_count(n));
    row.push(1.0);
    row.extend_from_slice(point);
    row.extend(point.iter().map(|&c| c * c));
    for i in 0..n {
        for j in (i + 1)..n {
            row.push(point[i] * point[j]);
        }
    }
    row
}

/// Position of the `x_i·x_j` coefficient (i < j) in the fixed order.
fn cross_index(n: usize, i: usize, j: usize) -> usize {
    // Cross terms start after 1 + n + n entries; pairs (0,1), (0,2), … are
    // laid out row by row.
    1 + 2 * n + i * n - i * (i + 1) / 2 + (j - i - 1)
}

// ── Error type ──────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq)]
pub enum QuadricError {
    /// `e ≤ 1` together with `l = 0` admits only collinear or single-point
    /// sets, which cannot arise from an admissible satellite configuration.
    DegenerateQuadric { eccentricity: f64, semilatus: f64 },
    /// Coefficient vector length does not match the monomial count.
    ShapeMismatch { expected: usize, got: usize },
}

impl fmt::Display for QuadricError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DegenerateQuadric { eccentricity, semilatus } => write!(
                f,
                "degenerate quadric: e={eccentricity:.3e} with semilatus {semilatus:.3e}"
            ),
            Self::ShapeMismatch { expected, got } => {
                write!(f, "expected {expected} quadric coefficients, got {got}")
            }
        }
    }
}

impl std::error::Error for QuadricError {}

// ── Focal quadric ───────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum QuadricClass {
    Sphere,
    ProlateSpheroid,
    TwoSheetHyperboloid,
    Cone,
    Paraboloid,
}

impl fmt::Display for QuadricClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Sphere => "sphere",
            Self::ProlateSpheroid => "prolate spheroid",
            Self::TwoSheetHyperboloid => "two-sheet hyperboloid",
            Self::Cone => "cone",
            Self::Paraboloid => "paraboloid",
        };
        f.write_str(s)
    }
}

/// A quadric of revolution with a focus, in focus-directrix form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocalQuadric {
    pub focus: Vec<f64>,
    /// Directrix normal `u` scaled so that `‖u‖` is the eccentricity.
    pub scaled_normal: Vec<f64>,
    /// Directrix offset `α`.
    pub offset: f64,
    pub eccentricity: f64,
    /// Signed `l = ⟨u,F⟩ − α`; the semilatus rectum is `|l|`.
    pub semilatus: f64,
    pub class: QuadricClass,
    pub semi_axis_a: f64,
    /// Transverse semi-axis, defined for spheres, spheroids and
    /// hyperboloids.
    pub semi_axis_b: Option<f64>,
}

/// Classify the focal quadric given by `(u, α)` and a focus, normalizing
/// length comparisons by an explicit scale.
pub fn classify_focal_scaled(
    u: &[f64],
    alpha: f64,
    focus: &[f64],
    scale: f64,
    tol: &Tolerance,
) -> Result<FocalQuadric, QuadricError> {
    let e = norm(u);
    let l = dot(u, focus) - alpha;
    let eps = tol.class_abs;
    let l_zero = l.abs() <= eps * scale;

    let class = if e <= eps {
        if l_zero {
            return Err(QuadricError::DegenerateQuadric { eccentricity: e, semilatus: l });
        }
        QuadricClass::Sphere
    } else if (e - 1.0).abs() <= eps {
        if l_zero {
            return Err(QuadricError::DegenerateQuadric { eccentricity: e, semilatus: l });
        }
        QuadricClass::Paraboloid
    } else if e < 1.0 {
        if l_zero {
            return Err(QuadricError::DegenerateQuadric { eccentricity: e, semilatus: l });
        }
        QuadricClass::ProlateSpheroid
    } else if l_zero {
        QuadricClass::Cone
    } else {
        QuadricClass::TwoSheetHyperboloid
    };

    let (a, b) = match class {
        QuadricClass::Sphere | QuadricClass::ProlateSpheroid => {
            let d = 1.0 - e * e;
            (l.abs() / d, Some(l.abs() / d.sqrt()))
        }
        QuadricClass::TwoSheetHyperboloid => {
            let d = e * e - 1.0;
            (l.abs() / d, Some(l.abs() / d.sqrt()))
        }
        QuadricClass::Cone => ((e * e - 1.0).sqrt(), None),
        QuadricClass::Paraboloid => (l.abs().sqrt(), None),
    };

    Ok(FocalQuadric {
        focus: focus.to_vec(),
        scaled_normal: u.to_vec(),
        offset: alpha,
        eccentricity: e,
        semilatus: l,
        class,
        semi_axis_a: a,
        semi_axis_b: b,
    })
}

/// Classify with a scale inferred from the inputs. Use
/// [`classify_focal_scaled`] when the geometry of the generating point set
/// provides a better normalization.
pub fn classify_focal(
    u: &[f64],
    alpha: f64,
    focus: &[f64],
    tol: &Tolerance,
) -> Result<FocalQuadric, QuadricError> {
    let scale = 1.0f64
        .max(alpha.abs())
        .max(focus.iter().fold(0.0f64, |m, c| m.max(c.abs())));
    classify_focal_scaled(u, alpha, focus, scale, tol)
}

impl FocalQuadric {
    /// The other focus and the distance between the vertices (for a
    /// hyperboloid: the distance between the sheets). A sphere returns its
    /// own center with the diameter; cones and paraboloids have a single
    /// focus and return `None`.
    pub fn second_focus(&self) -> Option<(Vec<f64>, f64)> {
        match self.class {
            QuadricClass::Sphere => Some((self.focus.clone(), 2.0 * self.semilatus.abs())),
            QuadricClass::ProlateSpheroid | QuadricClass::TwoSheetHyperboloid => {
                let d = 1.0 - self.eccentricity * self.eccentricity;
                let step = 2.0 * self.semilatus / d;
                let focus2: Vec<f64> = self
                    .focus
                    .iter()
                    .zip(&self.scaled_normal)
                    .map(|(f, u)| f + step * u)
                    .collect();
                Some((focus2, 2.0 * self.semilatus.abs() / d.abs()))
            }
            QuadricClass::Cone | QuadricClass::Paraboloid => None,
        }
    }

    /// `|‖P − F‖ − |⟨u,P⟩ − α||`: zero exactly on the quadric.
    pub fn membership_residual(&self, p: &[f64]) -> f64 {
        let lhs = p
            .iter()
            .zip(&self.focus)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        (lhs - (dot(&self.scaled_normal, p) - self.offset).abs()).abs()
    }

    /// Signed directrix side of a point: positive on the sheet `Q₊`.
    pub fn sheet_side(&self, p: &[f64]) -> f64 {
        dot(&self.scaled_normal, p) - self.offset
    }

    /// Coefficients of the quadric in the fixed monomial order, from
    /// squaring the focus-directrix identity:
    /// `‖P−F‖² − (⟨u,P⟩−α)² = 0`.
    pub fn coefficient_vector(&self) -> Vec<f64> {
        let n = self.focus.len();
        let u = &self.scaled_normal;
        let f = &self.focus;
        let mut c = vec![0.0; monomial_count(n)];
        c[0] = dot(f, f) - self.offset * self.offset;
        for i in 0..n {
            c[1 + i] = -2.0 * (f[i] - self.offset * u[i]);
            c[1 + n + i] = 1.0 - u[i] * u[i];
        }
        for i in 0..n {
            for j in (i + 1)..n {
                c[cross_index(n, i, j)] = -2.0 * u[i] * u[j];
            }
        }
        c
    }
}

// ── Recovery from general coefficients ──────────────────────────────────────

/// Relative residual below which a recovered candidate is accepted as
/// reproducing the input coefficient vector.
const VERIFY_REL: f64 = 1e-6;

/// Recover focal parameters from a general quadric coefficient vector.
///
/// The quadratic part must be `λ(uuᵀ − I)` for some `λ ≠ 0`: its symmetric
/// eigendecomposition must show `n−1` equal eigenvalues, whose common value
/// fixes λ, and the remaining eigenvector gives the symmetry axis. The
/// directrix offset then solves a scalar quadratic, and every real root
/// yields one focus candidate. Candidates that fail to reproduce the input
/// coefficients are discarded, so an empty result means the quadric admits
/// no focal form.
pub fn recover_focal_parameters(
    coeffs: &[f64],
    n: usize,
    tol: &Tolerance,
) -> Result<Vec<FocalQuadric>, QuadricError> {
    let k = monomial_count(n);
    if coeffs.len() != k {
        return Err(QuadricError::ShapeMismatch { expected: k, got: coeffs.len() });
    }
    let coeff_scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if coeff_scale == 0.0 {
        return Ok(vec![]);
    }

    // Quadratic-part matrix S, linear part b, constant c0.
    let mut s = vec![0.0; n * n];
    for i in 0..n {
        s[i * n + i] = coeffs[1 + n + i];
        for j in (i + 1)..n {
            let half = coeffs[cross_index(n, i, j)] / 2.0;
            s[i * n + j] = half;
            s[j * n + i] = half;
        }
    }
    let b: Vec<f64> = coeffs[1..=n].to_vec();
    let c0_raw = coeffs[0];

    let s_max = s.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    if s_max <= tol.class_abs * coeff_scale {
        return Ok(vec![]); // no quadratic part: a hyperplane, not a quadric
    }
    let eig = Matrix::new(n, n, s)
        .expect("finite coefficients")
        .sym_eigen(tol)
        .expect("S is symmetric by construction");

    let spread = |values: &[f64]| -> f64 {
        values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
            - values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    };

    // The repeated group of n−1 eigenvalues is contiguous after sorting, so
    // the axis eigenvalue is either the first or the last. When all n agree
    // the quadric is a sphere and the axis is immaterial.
    let mut assignments: Vec<Option<usize>> = Vec::new();
    if spread(&eig.values) <= tol.class_abs * s_max {
        assignments.push(None);
    } else {
        assignments.push(Some(0));
        assignments.push(Some(n - 1));
    }

    let mut candidates: Vec<FocalQuadric> = Vec::new();
    for assignment in assignments {
        let (axis_idx, repeated): (Option<usize>, Vec<f64>) = match assignment {
            None => (None, eig.values.clone()),
            Some(idx) => {
                let rest: Vec<f64> = eig
                    .values
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != idx)
                    .map(|(_, &v)| v)
                    .collect();
                (Some(idx), rest)
            }
        };
        if spread(&repeated) > tol.class_abs * s_max {
            continue;
        }
        let mu = repeated.iter().sum::<f64>() / repeated.len() as f64;
        if mu.abs() <= tol.class_abs * s_max {
            continue;
        }

        let e2 = match axis_idx {
            None => 0.0,
            Some(idx) => 1.0 - eig.values[idx] / mu,
        };
        if e2 < -tol.class_abs {
            continue;
        }
        let e = e2.max(0.0).sqrt();
        let u: Vec<f64> = match axis_idx {
            None => vec![0.0; n],
            Some(idx) => eig.vector(idx).iter().map(|&c| e * c).collect(),
        };

        // Normalized linear and constant parts; the offset α solves
        //   (1 − e²)·α² + ⟨u, c_L⟩·α + (c₀ − ‖c_L‖²/4) = 0,
        // and each real root gives the focus F = α·u − c_L/2.
        let c_l: Vec<f64> = b.iter().map(|&v| v / mu).collect();
        let c0 = c0_raw / mu;
        let qa = 1.0 - e2;
        let qb = dot(&u, &c_l);
        let qc = c0 - dot(&c_l, &c_l) / 4.0;
        let coeff_mag = qa.abs().max(qb.abs()).max(qc.abs());
        if coeff_mag == 0.0 {
            continue;
        }

        let alphas: Vec<f64> = if qa.abs() <= tol.class_abs * coeff_mag {
            if qb.abs() <= tol.class_abs * coeff_mag {
                continue;
            }
            vec![-qc / qb]
        } else {
            let disc = qb * qb - 4.0 * qa * qc;
            let disc_scale = (qb * qb).max((4.0 * qa * qc).abs());
            if disc < 0.0 {
                if -disc > tol.class_abs * disc_scale.max(coeff_mag * coeff_mag) {
                    continue;
                }
                vec![-qb / (2.0 * qa)]
            } else if disc == 0.0 {
                vec![-qb / (2.0 * qa)]
            } else {
                let sign = if qb >= 0.0 { 1.0 } else { -1.0 };
                let q = -(qb + sign * disc.sqrt()) / 2.0;
                if q == 0.0 {
                    vec![0.0]
                } else {
                    vec![q / qa, qc / q]
                }
            }
        };

        for alpha in alphas {
            if !alpha.is_finite() {
                continue;
            }
            let focus: Vec<f64> = u.iter().zip(&c_l).map(|(ui, cl)| alpha * ui - cl / 2.0).collect();
            let Ok(q) = classify_focal(&u, alpha, &focus, tol) else { continue };

            // Re-verification: the candidate must reproduce the input
            // coefficients up to scale.
            let got = q.coefficient_vector();
            let got_norm = norm(&got);
            let in_norm = norm(coeffs);
            if got_norm == 0.0 {
                continue;
            }
            let diff = |sign: f64| -> f64 {
                got.iter()
                    .zip(coeffs)
                    .map(|(g, c)| (g / got_norm - sign * c / in_norm).powi(2))
                    .sum::<f64>()
                    .sqrt()
            };
            if diff(1.0).min(diff(-1.0)) > VERIFY_REL {
                continue;
            }

            let dup = candidates.iter().any(|c| {
                c.focus
                    .iter()
                    .zip(&q.focus)
                    .all(|(a, b)| (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs())))
                    && (c.semilatus.abs() - q.semilatus.abs()).abs()
                        <= 1e-9 * (1.0 + q.semilatus.abs())
            });
            if !dup {
                candidates.push(q);
            }
        }
    }
    Ok(candidates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::distance;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    /// Points of the sheet `Q₊` (or `Q₋` when `Q₊` is empty) via the polar
    /// form: along a unit direction `d` from the focus, the radius is
    /// `l / (1 − ⟨u,d⟩)`.
    fn sample_sheet(q: &FocalQuadric, rng: &mut ChaCha8Rng, count: usize) -> Vec<Vec<f64>> {
        let n = q.focus.len();
        let mut points = Vec::new();
        while points.len() < count {
            let mut d: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let len = norm(&d);
            if len < 1e-3 {
                continue;
            }
            for c in d.iter_mut() {
                *c /= len;
            }
            let ed = dot(&q.scaled_normal, &d);
            let radius = if q.semilatus >= 0.0 {
                q.semilatus / (1.0 - ed)
            } else {
                -q.semilatus / (1.0 + ed)
            };
            if !(radius.is_finite() && radius > 1e-6 && radius < 1e6) {
                continue;
            }
            points.push(q.focus.iter().zip(&d).map(|(f, di)| f + radius * di).collect());
        }
        points
    }

    #[test]
    fn classify_cone() {
        let q = classify_focal(&[0.0, 0.0, SQRT2], 0.0, &[0.0, 0.0, 0.0], &tol()).unwrap();
        assert_eq!(q.class, QuadricClass::Cone);
        assert!((q.eccentricity - SQRT2).abs() < 1e-12);
        assert_eq!(q.semilatus, 0.0);
        assert!((q.semi_axis_a - 1.0).abs() < 1e-12);
    }

    #[test]
    fn classify_hyperbola_axes() {
        // e = 5/3 with semilatus 16: semi-axes 9 and 12.
        let u = [0.0, 5.0 / 3.0];
        let alpha = 9.0;
        let q = classify_focal(&u, alpha, &[0.0, 15.0], &tol()).unwrap();
        assert_eq!(q.class, QuadricClass::TwoSheetHyperboloid);
        assert!((q.semilatus - 16.0).abs() < 1e-12);
        assert!((q.semi_axis_a - 9.0).abs() < 1e-12);
        assert!((q.semi_axis_b.unwrap() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn classify_unit_sphere() {
        let q = classify_focal(&[0.0, 0.0], -1.0, &[0.0, 0.0], &tol()).unwrap();
        assert_eq!(q.class, QuadricClass::Sphere);
        assert_eq!(q.eccentricity, 0.0);
        assert!((q.semilatus.abs() - 1.0).abs() < 1e-12);
        assert!((q.semi_axis_a - 1.0).abs() < 1e-12);
    }

    #[test]
    fn classify_rejects_degenerate() {
        assert!(matches!(
            classify_focal(&[0.5, 0.0], 0.0, &[0.0, 0.0], &tol()),
            Err(QuadricError::DegenerateQuadric { .. })
        ));
    }

    #[test]
    fn second_focus_hyperbola() {
        let q = classify_focal(&[0.0, 5.0 / 3.0], 9.0, &[0.0, 15.0], &tol()).unwrap();
        let (f2, d) = q.second_focus().unwrap();
        assert!(f2[0].abs() < 1e-12);
        assert!((f2[1] + 15.0).abs() < 1e-9);
        assert!((d - 18.0).abs() < 1e-9);
    }

    #[test]
    fn second_focus_sphere_is_center() {
        let q = classify_focal(&[0.0, 0.0], -1.0, &[0.0, 0.0], &tol()).unwrap();
        let (f2, d) = q.second_focus().unwrap();
        assert_eq!(f2, vec![0.0, 0.0]);
        assert!((d - 2.0).abs() < 1e-12);
    }

    #[test]
    fn second_focus_3d_hyperboloid() {
        let q = classify_focal(&[0.0, 0.0, 5.0 / 3.0], 9.0, &[0.0, 0.0, 15.0], &tol()).unwrap();
        let (f2, d) = q.second_focus().unwrap();
        assert!((f2[2] + 15.0).abs() < 1e-9 && f2[0].abs() < 1e-12 && f2[1].abs() < 1e-12);
        assert!((d - 18.0).abs() < 1e-9);
    }

    #[test]
    fn second_focus_none_for_cone() {
        let q = classify_focal(&[0.0, 0.0, SQRT2], 0.0, &[0.0; 3], &tol()).unwrap();
        assert!(q.second_focus().is_none());
    }

    #[test]
    fn recover_unit_circle() {
        // x² + y² − 1 in order (1, x, y, x², y², xy).
        let coeffs = [-1.0, 0.0, 0.0, 1.0, 1.0, 0.0];
        let got = recover_focal_parameters(&coeffs, 2, &tol()).unwrap();
        assert_eq!(got.len(), 1);
        let q = &got[0];
        assert_eq!(q.class, QuadricClass::Sphere);
        assert!(norm(&q.focus) < 1e-9);
        assert!((q.semilatus.abs() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn recover_hyperbola_foci() {
        // 16y² − 9x² − 1296 has foci (0, ±15) and eccentricity 5/3.
        let coeffs = [-1296.0, 0.0, 0.0, -9.0, 16.0, 0.0];
        let mut got = recover_focal_parameters(&coeffs, 2, &tol()).unwrap();
        assert_eq!(got.len(), 2);
        got.sort_by(|a, b| b.focus[1].total_cmp(&a.focus[1]));
        for (q, want_y) in got.iter().zip([15.0, -15.0]) {
            assert_eq!(q.class, QuadricClass::TwoSheetHyperboloid);
            assert!(q.focus[0].abs() < 1e-9);
            assert!((q.focus[1] - want_y).abs() < 1e-9);
            assert!((q.eccentricity - 5.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn recover_candidates_satisfy_membership() {
        // Every candidate returned for x² + 2y² − 1 must satisfy the
        // focus-directrix identity on points of the ellipse itself.
        let coeffs = [-1.0, 0.0, 0.0, 1.0, 2.0, 0.0];
        let got = recover_focal_parameters(&coeffs, 2, &tol()).unwrap();
        assert!(!got.is_empty());
        for q in &got {
            for k in 0..20 {
                let theta = k as f64 * std::f64::consts::TAU / 20.0;
                let p = [theta.cos(), theta.sin() / SQRT2];
                assert!(
                    q.membership_residual(&p) < 1e-9,
                    "candidate {q:?} fails at {p:?}"
                );
            }
        }
    }

    #[test]
    fn recover_rejects_unequal_axes() {
        // x² + 2y² + 3z² − 1 is not a quadric of revolution.
        let coeffs = [-1.0, 0.0, 0.0, 0.0, 1.0, 2.0, 3.0, 0.0, 0.0, 0.0];
        assert!(recover_focal_parameters(&coeffs, 3, &tol()).unwrap().is_empty());
    }

    #[test]
    fn recover_parabola_focus() {
        // x² − 2y = 0 is the parabola 2y = x² with focus (0, 1/2).
        let coeffs = [0.0, 0.0, -2.0, 1.0, 0.0, 0.0];
        let got = recover_focal_parameters(&coeffs, 2, &tol()).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].class, QuadricClass::Paraboloid);
        assert!(got[0].focus[0].abs() < 1e-9);
        assert!((got[0].focus[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn focus_directrix_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.random_range(2usize..=4);
            let e: f64 = rng.random_range(0.0..2.0);
            let mut axis: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0f64)).collect();
            let len = norm(&axis);
            if len < 1e-3 {
                continue;
            }
            for c in axis.iter_mut() {
                *c /= len;
            }
            let u: Vec<f64> = axis.iter().map(|&c| e * c).collect();
            let alpha: f64 = rng.random_range(-2.0..2.0);
            let focus: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let Ok(q) = classify_focal(&u, alpha, &focus, &tol()) else { continue };
            if q.class == QuadricClass::Cone {
                continue;
            }
            let scale = 1.0 + q.focus.iter().fold(0.0f64, |m, c| m.max(c.abs()));
            for p in sample_sheet(&q, &mut rng, 10) {
                assert!(q.membership_residual(&p) <= 1e-9 * scale * (1.0 + norm(&p)));
            }
        }
    }

    #[test]
    fn sheet_swap_symmetry() {
        let u = [0.3, 0.4];
        let alpha = 0.7;
        let f = [1.0, -2.0];
        let q = classify_focal(&u, alpha, &f, &tol()).unwrap();
        let neg_u = [-0.3, -0.4];
        let q2 = classify_focal(&neg_u, -alpha, &f, &tol()).unwrap();
        assert_eq!(q.class, q2.class);
        assert!((q.eccentricity - q2.eccentricity).abs() < 1e-15);
        assert!((q.semilatus + q2.semilatus).abs() < 1e-15);
        // Q± swap: the sheet side flips sign pointwise.
        let p = [0.4, 1.3];
        assert!((q.sheet_side(&p) + q2.sheet_side(&p)).abs() < 1e-15);
    }

    #[test]
    fn recover_round_trip_returns_focus() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut tried = 0;
        while tried < 40 {
            let n = rng.random_range(2usize..=4);
            let e: f64 = rng.random_range(0.05..2.0);
            if (e - 1.0).abs() < 1e-3 {
                continue;
            }
            let mut axis: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0f64)).collect();
            let len = norm(&axis);
            if len < 1e-3 {
                continue;
            }
            for c in axis.iter_mut() {
                *c /= len;
            }
            let u: Vec<f64> = axis.iter().map(|&c| e * c).collect();
            let alpha: f64 = rng.random_range(-2.0..2.0);
            let focus: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let Ok(q) = classify_focal(&u, alpha, &focus, &tol()) else { continue };
            if q.semilatus.abs() < 1e-2 {
                continue; // near-cone: the focus is poorly conditioned
            }
            tried += 1;
            let scale = 1.0 + norm(&focus);
            let candidates = recover_focal_parameters(&q.coefficient_vector(), n, &tol()).unwrap();
            let hit = candidates.iter().any(|c| distance(&c.focus, &focus) <= 1e-6 * scale);
            assert!(hit, "focus {focus:?} not recovered from {q:?}: {candidates:?}");
        }
    }

    #[test]
    fn hyperboloid_sheet_difference_is_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = classify_focal(&[0.0, 5.0 / 3.0], 9.0, &[0.0, 15.0], &tol()).unwrap();
        let (f2, d) = q.second_focus().unwrap();
        let points = sample_sheet(&q, &mut rng, 25);
        let first = distance(&points[0], &q.focus) - distance(&points[0], &f2);
        assert!((first.abs() - d).abs() < 1e-8);
        for p in &points {
            let diff = distance(p, &q.focus) - distance(p, &f2);
            assert!((diff - first).abs() < 1e-8, "sign flipped across the sheet");
        }
    }

    #[test]
    fn spheroid_sum_is_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let q = classify_focal(&[0.5, 0.0, 0.0], 1.5, &[0.4, 0.2, -0.1], &tol()).unwrap();
        assert_eq!(q.class, QuadricClass::ProlateSpheroid);
        let (f2, _) = q.second_focus().unwrap();
        let points = sample_sheet(&q, &mut rng, 25);
        let first = distance(&points[0], &q.focus) + distance(&points[0], &f2);
        // The constant sum is e·d(H,H′) = 2a.
        assert!((first - 2.0 * q.semi_axis_a).abs() < 1e-8);
        for p in &points {
            let sum = distance(p, &q.focus) + distance(p, &f2);
            assert!((sum - first).abs() < 1e-8);
        }
    }
}
