//! Geometric uniqueness analysis for a given satellite configuration.
//!
//! For satellites `a_i` and a user position `x`, the positioning problem has
//! two solutions exactly when the `a_i` lie on the same sheet of a two-sheet
//! hyperboloid of revolution with focus `x`; the alternate solution sits at
//! the other focus, with bias shifted by the distance between the sheets.
//! In every other case (full-rank system, sphere, spheroid, cone,
//! paraboloid) the solution is unique.
//!
//! Beyond the per-position classification this module provides
//! configuration-level certificates: if the satellites lie on *no* common
//! quadric (full-rank moment matrix of degree-≤2 monomials), or on exactly
//! one that is not a hyperboloid carrying all of them on one sheet, then the
//! solution is unique for every user position. A determinant-product test
//! over all arrival-time sign choices certifies full rank at a single `x`,
//! and a seeded sampler produces nonuniqueness witnesses on demand.

use crate::model::{
    bounding_diameter, validate_satellites, ModelError, Scenario, Solution,
};
use crate::numkernel::{distance, dot, norm, Matrix, Tolerance};
use crate::quadric::{
    classify_focal_scaled, monomial_count, monomial_row, recover_focal_parameters, FocalQuadric,
    QuadricClass, QuadricError,
};
use crate::solver::assemble_a;
use nalgebra::DMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Residual threshold (relative to the configuration scale) for accepting a
/// rank-deficiency reduction as consistent. Validation admits condition
/// numbers up to the reciprocal rank cutoff, so legitimate reductions can
/// carry residuals well above machine precision; genuine inconsistency
/// shows up at the scale of the data itself.
pub const REDUCTION_CONSISTENCY_REL: f64 = 1e-3;

/// Default relative threshold for declaring the determinant product zero:
/// the smallest determinant magnitude is compared against this fraction of
/// the geometric mean of the remaining ones.
pub const DET_PRODUCT_TAU: f64 = 1e-9;

// ── Error type ──────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq)]
pub enum UniquenessError {
    Model(ModelError),
    Quadric(QuadricError),
    /// Rank-deficient system whose reduction fails the defining identities;
    /// signals tolerance misconfiguration.
    InconsistentReduction { residual: f64, threshold: f64 },
    /// The determinant-product test needs exactly n+2 satellites.
    WrongSatelliteCount { expected: usize, got: usize },
    /// The witness sampler kept drawing degenerate configurations.
    DegenerateSampling { attempts: usize },
}

impl fmt::Display for UniquenessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Model(e) => e.fmt(f),
            Self::Quadric(e) => e.fmt(f),
            Self::InconsistentReduction { residual, threshold } => write!(
                f,
                "rank-deficient reduction is inconsistent: residual {residual:.3e} > {threshold:.3e}"
            ),
            Self::WrongSatelliteCount { expected, got } => {
                write!(f, "expected {expected} satellites, got {got}")
            }
            Self::DegenerateSampling { attempts } => {
                write!(f, "no admissible witness after {attempts} attempts")
            }
        }
    }
}

impl std::error::Error for UniquenessError {}

impl From<ModelError> for UniquenessError {
    fn from(e: ModelError) -> Self {
        Self::Model(e)
    }
}

impl From<QuadricError> for UniquenessError {
    fn from(e: QuadricError) -> Self {
        Self::Quadric(e)
    }
}

impl UniquenessError {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Model(e) => e.name(),
            Self::Quadric(QuadricError::DegenerateQuadric { .. }) => "DegenerateQuadric",
            Self::Quadric(QuadricError::ShapeMismatch { .. }) => "ShapeMismatch",
            Self::InconsistentReduction { .. } => "InconsistentReduction",
            Self::WrongSatelliteCount { .. } => "WrongSatelliteCount",
            Self::DegenerateSampling { .. } => "DegenerateSampling",
        }
    }
}

// ── Per-position classification ─────────────────────────────────────────────

/// Geometric case at a user position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseLabel {
    #[serde(rename = "FULLRANK")]
    FullRank,
    #[serde(rename = "SPHEROID")]
    Spheroid,
    #[serde(rename = "SPHERE")]
    Sphere,
    #[serde(rename = "HYPERBOLOID")]
    Hyperboloid,
    #[serde(rename = "CONE")]
    Cone,
    #[serde(rename = "PARABOLOID")]
    Paraboloid,
}

impl CaseLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::FullRank => "FULLRANK",
            Self::Spheroid => "SPHEROID",
            Self::Sphere => "SPHERE",
            Self::Hyperboloid => "HYPERBOLOID",
            Self::Cone => "CONE",
            Self::Paraboloid => "PARABOLOID",
        }
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Uniqueness verdict for one `(satellites, x)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub unique: bool,
    pub rank_a: usize,
    pub case_label: CaseLabel,
    /// The quadric through the satellites with focus `x`, when the system is
    /// rank deficient.
    pub quadric: Option<FocalQuadric>,
    /// The second solution, present exactly for the hyperboloid case.
    pub alternate: Option<Solution>,
}

/// Reusable classifier for one satellite configuration: validates once,
/// factors the affine system once, then classifies any number of user
/// positions.
#[derive(Debug, Clone)]
pub struct UniquenessClassifier {
    satellites: Vec<Vec<f64>>,
    dimension: usize,
    b_pinv: Matrix,
    norms_sq: Vec<f64>,
    scale: f64,
    tol: Tolerance,
}

impl UniquenessClassifier {
    pub fn new(satellites: &[Vec<f64>], tol: &Tolerance) -> Result<Self, UniquenessError> {
        let n = satellites.first().map_or(0, |a| a.len());
        validate_satellites(satellites, n, tol)?;
        let b = crate::model::assemble_b_from(satellites);
        let b_pinv = b
            .pseudo_inverse(tol)
            .map_err(|_| UniquenessError::Model(ModelError::CoplanarSatellites))?;
        Ok(Self {
            satellites: satellites.to_vec(),
            dimension: n,
            b_pinv,
            norms_sq: satellites.iter().map(|a| dot(a, a)).collect(),
            scale: bounding_diameter(satellites),
            tol: *tol,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn satellites(&self) -> &[Vec<f64>] {
        &self.satellites
    }

    fn times_for(&self, x: &[f64]) -> Vec<f64> {
        self.satellites.iter().map(|a| distance(a, x)).collect()
    }

    fn rank_a(&self, times: &[f64]) -> usize {
        let n = self.dimension;
        if self.satellites.len() == n + 1 {
            // m = n+1 rows can never reach rank n+2.
            return n + 1;
        }
        let s = Scenario {
            dimension: n,
            satellites: self.satellites.clone(),
            times: times.to_vec(),
        };
        assemble_a(&s).rank(&self.tol)
    }

    fn reduction(&self, times: &[f64]) -> (Vec<f64>, f64, Vec<f64>, f64) {
        let n = self.dimension;
        let doubled: Vec<f64> = times.iter().map(|&t| 2.0 * t).collect();
        let w1 = self.b_pinv.mul_vec(&doubled);
        let rhs: Vec<f64> = self
            .norms_sq
            .iter()
            .zip(times)
            .map(|(&ns, &t)| ns - t * t)
            .collect();
        let w2 = self.b_pinv.mul_vec(&rhs);
        (w1[..n].to_vec(), w1[n] / 2.0, w2[..n].to_vec(), w2[n])
    }

    fn check_consistency(
        &self,
        u: &[f64],
        alpha: f64,
        x: &[f64],
        times: &[f64],
    ) -> Result<(), UniquenessError> {
        let residual = self
            .satellites
            .iter()
            .zip(times)
            .map(|(a, &t)| (dot(u, a) - alpha - t).abs())
            .fold(0.0, f64::max);
        let t_max = times.iter().cloned().fold(0.0, f64::max);
        let threshold =
            REDUCTION_CONSISTENCY_REL * self.scale.max(t_max).max(norm(x)).max(1e-300);
        if residual > threshold {
            return Err(UniquenessError::InconsistentReduction { residual, threshold });
        }
        Ok(())
    }

    /// Case label only; skips building the quadric record and the alternate
    /// solution. This is the hot path of the Monte Carlo experiments.
    pub fn label(&self, x: &[f64]) -> Result<CaseLabel, UniquenessError> {
        let n = self.dimension;
        let times = self.times_for(x);
        if self.rank_a(&times) == n + 2 {
            return Ok(CaseLabel::FullRank);
        }
        let doubled: Vec<f64> = times.iter().map(|&t| 2.0 * t).collect();
        let w1 = self.b_pinv.mul_vec(&doubled);
        let (u, alpha) = (&w1[..n], w1[n] / 2.0);
        self.check_consistency(u, alpha, x, &times)?;
        let e = norm(u);
        let l = dot(u, x) - alpha;
        let eps = self.tol.class_abs;
        let label = if e <= eps {
            CaseLabel::Sphere
        } else if (e - 1.0).abs() <= eps {
            CaseLabel::Paraboloid
        } else if e < 1.0 {
            CaseLabel::Spheroid
        } else if l.abs() <= eps * self.scale {
            CaseLabel::Cone
        } else {
            CaseLabel::Hyperboloid
        };
        Ok(label)
    }

    /// Full uniqueness report at a user position.
    pub fn classify(&self, x: &[f64]) -> Result<UniquenessReport, UniquenessError> {
        let n = self.dimension;
        let times = self.times_for(x);
        let rank_a = self.rank_a(&times);
        if rank_a == n + 2 {
            return Ok(UniquenessReport {
                unique: true,
                rank_a,
                case_label: CaseLabel::FullRank,
                quadric: None,
                alternate: None,
            });
        }
        let (u, alpha, v, beta) = self.reduction(&times);
        self.check_consistency(&u, alpha, x, &times)?;
        // With zero bias the reduction also reproduces the user position:
        // v = x and β = ‖x‖². Treat a violation like any other inconsistency.
        let aux = distance(&v, x).max((beta - dot(x, x)).abs().sqrt());
        let aux_threshold = REDUCTION_CONSISTENCY_REL * self.scale.max(norm(x)).max(1.0);
        if aux > aux_threshold {
            return Err(UniquenessError::InconsistentReduction {
                residual: aux,
                threshold: aux_threshold,
            });
        }

        let quadric = classify_focal_scaled(&u, alpha, x, self.scale, &self.tol)?;
        let case_label = match quadric.class {
            QuadricClass::Sphere => CaseLabel::Sphere,
            QuadricClass::ProlateSpheroid => CaseLabel::Spheroid,
            QuadricClass::TwoSheetHyperboloid => CaseLabel::Hyperboloid,
            QuadricClass::Cone => CaseLabel::Cone,
            QuadricClass::Paraboloid => CaseLabel::Paraboloid,
        };

        let alternate = if case_label == CaseLabel::Hyperboloid {
            let (focus2, _) = quadric.second_focus().expect("hyperboloid has two foci");
            // The bias that pairs with the other focus; the sign depends on
            // which sheet carries the satellites, so derive it from the data.
            let bias: f64 = self
                .satellites
                .iter()
                .zip(&times)
                .map(|(a, &t)| t - distance(a, &focus2))
                .sum::<f64>()
                / times.len() as f64;
            let residual = self
                .satellites
                .iter()
                .zip(&times)
                .map(|(a, &t)| (distance(a, &focus2) - (t - bias)).abs())
                .fold(0.0, f64::max);
            Some(Solution { bias, user: focus2, residual })
        } else {
            None
        };

        Ok(UniquenessReport {
            unique: case_label != CaseLabel::Hyperboloid,
            rank_a,
            case_label,
            quadric: Some(quadric),
            alternate,
        })
    }
}

/// One-shot uniqueness classification for `(satellites, x)`.
pub fn classify_uniqueness(
    satellites: &[Vec<f64>],
    x: &[f64],
    tol: &Tolerance,
) -> Result<UniquenessReport, UniquenessError> {
    UniquenessClassifier::new(satellites, tol)?.classify(x)
}

// ── Moment matrix and certificates ──────────────────────────────────────────

/// The m × (n+2)(n+1)/2 matrix of degree-≤2 monomials evaluated at the
/// satellites, in the fixed monomial order.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentMatrix {
    pub entries: Matrix,
}

pub fn build_moment_matrix(satellites: &[Vec<f64>], n: usize) -> MomentMatrix {
    assert!(!satellites.is_empty(), "moment matrix needs at least one point");
    let rows: Vec<Vec<f64>> = satellites
        .iter()
        .map(|a| {
            assert_eq!(a.len(), n, "point dimension mismatch");
            monomial_row(a)
        })
        .collect();
    MomentMatrix { entries: Matrix::from_rows(&rows).expect("consistent monomial rows") }
}

/// Configuration-level uniqueness certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "certificate", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Certificate {
    /// No quadric contains all satellites, so the system has full rank — and
    /// the solution is unique — for every user position.
    NoCommonQuadric { moment_rank: usize },
    /// Exactly one quadric contains the satellites and it is not a two-sheet
    /// hyperboloid carrying all of them on one sheet, so the solution is
    /// unique for every user position.
    UniqueBenignQuadric {
        moment_rank: usize,
        /// The recovered quadric, when it admits a focal form.
        quadric: Option<FocalQuadric>,
    },
    /// The satellite geometry does not certify uniqueness everywhere.
    Inconclusive {
        moment_rank: usize,
        detail: String,
        /// Hyperboloids through the satellites with all of them on one
        /// sheet; their foci are exactly the ambiguous user positions.
        offending: Vec<FocalQuadric>,
    },
}

/// Certify that the positioning problem is uniquely solvable for *every*
/// user position, from the satellite geometry alone.
pub fn certify_uniqueness(
    satellites: &[Vec<f64>],
    tol: &Tolerance,
) -> Result<Certificate, UniquenessError> {
    let n = satellites.first().map_or(0, |a| a.len());
    validate_satellites(satellites, n, tol)?;
    let k = monomial_count(n);
    let mm = build_moment_matrix(satellites, n);
    let rank = mm.entries.rank(tol);

    if rank == k {
        return Ok(Certificate::NoCommonQuadric { moment_rank: rank });
    }
    if rank + 1 < k {
        return Ok(Certificate::Inconclusive {
            moment_rank: rank,
            detail: format!(
                "a {}-dimensional family of quadrics contains the satellites",
                k - rank
            ),
            offending: vec![],
        });
    }

    let ns = mm.entries.nullspace(tol);
    if ns.len() != 1 {
        return Ok(Certificate::Inconclusive {
            moment_rank: rank,
            detail: "rank decision is ambiguous at this tolerance".into(),
            offending: vec![],
        });
    }
    let candidates = recover_focal_parameters(&ns[0], n, tol)?;
    let scale = bounding_diameter(satellites);
    let (offending, benign): (Vec<FocalQuadric>, Vec<FocalQuadric>) =
        candidates.into_iter().partition(|q| {
            q.class == QuadricClass::TwoSheetHyperboloid && all_on_one_sheet(q, satellites, scale, tol)
        });

    if offending.is_empty() {
        Ok(Certificate::UniqueBenignQuadric {
            moment_rank: rank,
            quadric: benign.into_iter().next(),
        })
    } else {
        Ok(Certificate::Inconclusive {
            moment_rank: rank,
            detail: "satellites lie on one sheet of a hyperboloid of revolution".into(),
            offending,
        })
    }
}

fn all_on_one_sheet(
    q: &FocalQuadric,
    satellites: &[Vec<f64>],
    scale: f64,
    tol: &Tolerance,
) -> bool {
    let eps = tol.class_abs * scale;
    let sides: Vec<f64> = satellites.iter().map(|a| q.sheet_side(a)).collect();
    sides.iter().all(|&s| s >= -eps) || sides.iter().all(|&s| s <= eps)
}

// ── Determinant-product full-rank test ──────────────────────────────────────

/// Product of the (n+2)×(n+2) determinants with rows
/// `(ε_i·‖a_i − x‖, a_iᵀ, 1)` over all sign choices `ε_i = ±1` for rows
/// 2..m (the first sign is fixed to +1; flipping it only flips the sign of
/// every factor). A nonzero product certifies that the positioning system at
/// `x` has full rank regardless of the clock bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetProduct {
    /// Sign of the product: −1, 0 or +1.
    pub sign: i8,
    /// `ln |product|`; `-inf` when some factor vanishes exactly.
    pub log_abs: f64,
    /// `sign · exp(log_abs)`, saturating to ±inf for large products.
    pub value: f64,
    /// Smallest factor magnitude relative to the geometric mean of the
    /// others; the quantity tested against the zero threshold.
    pub min_scaled_det: f64,
}

impl DetProduct {
    /// Zero test at a relative threshold; [`DET_PRODUCT_TAU`] is the default.
    pub fn is_zero(&self, tau_rel: f64) -> bool {
        self.min_scaled_det <= tau_rel
    }
}

pub fn det_product(satellites: &[Vec<f64>], x: &[f64]) -> Result<DetProduct, UniquenessError> {
    let n = x.len();
    let m = satellites.len();
    if m != n + 2 {
        return Err(UniquenessError::WrongSatelliteCount { expected: n + 2, got: m });
    }
    let dists: Vec<f64> = satellites.iter().map(|a| distance(a, x)).collect();
    let combos = 1usize << (m - 1);
    let mut logs = Vec::with_capacity(combos);
    let mut sign = 1i8;
    for mask in 0..combos {
        let mut mat = DMatrix::zeros(m, m);
        for (i, a) in satellites.iter().enumerate() {
            let eps = if i > 0 && mask >> (i - 1) & 1 == 1 { -1.0 } else { 1.0 };
            mat[(i, 0)] = eps * dists[i];
            for (j, &c) in a.iter().enumerate() {
                mat[(i, j + 1)] = c;
            }
            mat[(i, m - 1)] = 1.0;
        }
        let det = mat.determinant();
        if det == 0.0 {
            sign = 0;
        } else if det < 0.0 {
            sign = -sign;
        }
        logs.push(det.abs().ln());
    }
    let log_abs: f64 = logs.iter().sum();
    let min_log = logs.iter().cloned().fold(f64::INFINITY, f64::min);
    let others = log_abs - min_log;
    let geo_mean_log = others / (combos - 1) as f64;
    let min_scaled_det = if min_log.is_finite() {
        (min_log - geo_mean_log).exp()
    } else {
        0.0
    };
    Ok(DetProduct {
        sign,
        log_abs,
        value: sign as f64 * log_abs.exp(),
        min_scaled_det,
    })
}

// ── Nonuniqueness witness sampling ──────────────────────────────────────────

/// Lift a parameter vector `y ∈ ℝ^{n−1}` onto the sheet `x₁ > 0` of the
/// hyperboloid `x₁² − Σ_{i≥2} x_i² = 1`.
pub fn hyperboloid_witness_point(y: &[f64]) -> Vec<f64> {
    let mut p = Vec::with_capacity(y.len() + 1);
    p.push((1.0 + dot(y, y)).sqrt());
    p.extend_from_slice(y);
    p
}

/// Sample a nonuniqueness witness: `m` satellites on one sheet of a fixed
/// two-sheet hyperboloid of revolution together with a user position at its
/// focus `(√2, 0, …, 0)`. The returned configuration always yields exactly
/// two solutions.
pub fn sample_hyperboloid_witness(
    n: usize,
    m: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<Vec<f64>>), UniquenessError> {
    if n < 2 {
        return Err(UniquenessError::Model(ModelError::BadDimension { n }));
    }
    if m < n + 1 {
        return Err(UniquenessError::Model(ModelError::TooFewSatellites { m, needed: n + 1 }));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = Tolerance::default();
    let attempts = 64;
    for _ in 0..attempts {
        let satellites: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                let y: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-2.0..2.0)).collect();
                hyperboloid_witness_point(&y)
            })
            .collect();
        if validate_satellites(&satellites, n, &tol).is_ok() {
            let mut x = vec![0.0; n];
            x[0] = std::f64::consts::SQRT_2;
            return Ok((x, satellites));
        }
    }
    Err(UniquenessError::DegenerateSampling { attempts })
}
