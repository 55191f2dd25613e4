//! Direct algebraic solver for the positioning equations
//! `‖a_i − x‖ = t_i − t`.
//!
//! The linearized system `A · (t, x, ‖x‖²−t²)ᵀ = (‖a_i‖²−t_i²)ᵢ` with
//! `A` built from rows `(−2t_i, 2a_iᵀ, −1)` either has full column rank
//! `n+2` — then a single pseudoinverse application yields the unique
//! solution — or rank `n+1`. In the deficient case, multiplying the reduced
//! system by `B⁺` (rows of `B` are `(2a_iᵀ, −1)`) expresses the user
//! position affinely in the bias, `x = t·u + v`, leaving one scalar
//! quadratic
//!
//! ```text
//! (‖u‖² − 1)·t² + 2(⟨u,v⟩ − α)·t + ‖v‖² − β = 0.
//! ```
//!
//! Each real root is mapped back to a candidate `(t′, x′)` and kept only if
//! it satisfies the arrival-time inequalities `t′ ≤ t_i`; a root that solves
//! the squared equations but violates an inequality is reported separately.
//! There are always one or two genuine solutions.

use crate::model::{assemble_b_from, ModelError, Scenario, Solution};
use crate::numkernel::{distance, dot, norm, Matrix, Tolerance};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Slack for the arrival-time inequality filter, relative to the scenario
/// scale. Keeps a true root from being rejected by rounding; a root exactly
/// on the boundary (`t′ = min t_i`) is accepted.
pub const INEQUALITY_SLACK_REL: f64 = 1e-9;

/// Residual threshold (relative to the scenario scale) for keeping the
/// full-rank solution. Near the rank boundary the full system is badly
/// conditioned while the reduced one is not, so failing this check falls
/// through to the reduced quadratic, which recovers such cases accurately.
pub const FULL_RANK_ACCEPT_REL: f64 = 1e-6;

/// Residual threshold (relative to the scenario scale) above which a
/// candidate root of the reduced quadratic is considered inconsistent with
/// the input times. Validation admits condition numbers up to the
/// reciprocal rank cutoff, and near that limit legitimate roots carry
/// residuals of ~1e-4 of scale; genuinely inconsistent times produce
/// residuals at the scale itself.
pub const RESIDUAL_ACCEPT_REL: f64 = 1e-3;

/// Root-separation threshold, relative to the scenario scale, below which
/// the two quadratic roots are merged into a double root. The discriminant
/// is computed from squared quantities, so its noise floor sits near the
/// square root of machine precision; separations below this cannot be
/// distinguished from an exact double root (the vertex-of-cone case, where
/// the distance between the sheets shrinks to zero).
pub const ROOT_MERGE_REL: f64 = 1e-6;

// ── Error type ──────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq)]
pub enum SolveError {
    Model(ModelError),
    /// No root of the reduced system satisfies the original equations:
    /// the input times are inconsistent.
    NoSolution { best_residual: f64 },
    /// Both leading coefficients of the reduced quadratic vanish. Impossible
    /// for admissible inputs; signals tolerance misconfiguration or
    /// inconsistent times.
    DegenerateQuadratic { c2: f64, c1: f64 },
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Model(e) => e.fmt(f),
            Self::NoSolution { best_residual } => {
                write!(f, "no consistent solution (best residual {best_residual:.3e})")
            }
            Self::DegenerateQuadratic { c2, c1 } => {
                write!(f, "degenerate reduced quadratic: c2={c2:.3e}, c1={c1:.3e}")
            }
        }
    }
}

impl std::error::Error for SolveError {}

impl From<ModelError> for SolveError {
    fn from(e: ModelError) -> Self {
        Self::Model(e)
    }
}

impl SolveError {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Model(e) => e.name(),
            Self::NoSolution { .. } => "NoSolution",
            Self::DegenerateQuadratic { .. } => "DegenerateQuadratic",
        }
    }
}

// ── Report types ────────────────────────────────────────────────────────────

/// Which path produced the solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Branch {
    FullRank,
    RankDeficient,
}

/// Reduction quantities `(u, 2α) = 2B⁺·times` and `(v, β) = B⁺·(‖a_i‖²−t_i²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
}

/// Full record of a solve: branch taken, reduction quantities, the reduced
/// quadratic, and the accepted/rejected candidate solutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub branch: Branch,
    pub rank_a: usize,
    /// Present on the rank-deficient branch.
    pub reduction: Option<Reduction>,
    /// Coefficients `(c2, c1, c0)` of the reduced quadratic.
    pub quad_coeffs: Option<[f64; 3]>,
    /// Raw discriminant `c1² − 4·c2·c0`; present when the quadratic is
    /// genuinely quadratic (`c2` above tolerance).
    pub discriminant: Option<f64>,
    /// One or two solutions of the original equations.
    pub solutions: Vec<Solution>,
    /// Root of the squared system that failed an arrival-time inequality.
    pub rejected: Vec<Solution>,
}

// ── Assembly ────────────────────────────────────────────────────────────────

/// The m×(n+2) matrix with rows `(−2t_i, 2a_iᵀ, −1)`.
pub fn assemble_a(s: &Scenario) -> Matrix {
    let rows: Vec<Vec<f64>> = s
        .satellites
        .iter()
        .zip(&s.times)
        .map(|(a, &t)| {
            let mut row = Vec::with_capacity(s.dimension + 2);
            row.push(-2.0 * t);
            row.extend(a.iter().map(|&c| 2.0 * c));
            row.push(-1.0);
            row
        })
        .collect();
    Matrix::from_rows(&rows).expect("validated scenario shapes")
}

/// The m×(n+1) matrix with rows `(2a_iᵀ, −1)`.
pub fn assemble_b(s: &Scenario) -> Matrix {
    assemble_b_from(&s.satellites)
}

fn squared_rhs(s: &Scenario) -> Vec<f64> {
    s.satellites
        .iter()
        .zip(&s.times)
        .map(|(a, &t)| dot(a, a) - t * t)
        .collect()
}

/// Reduction quantities from the deficient-rank branch.
pub fn reduce(s: &Scenario, tol: &Tolerance) -> Result<Reduction, SolveError> {
    let b_pinv = assemble_b(s)
        .pseudo_inverse(tol)
        .map_err(|_| SolveError::Model(ModelError::CoplanarSatellites))?;
    let n = s.dimension;
    let doubled: Vec<f64> = s.times.iter().map(|&t| 2.0 * t).collect();
    let w1 = b_pinv.mul_vec(&doubled);
    let w2 = b_pinv.mul_vec(&squared_rhs(s));
    Ok(Reduction {
        u: w1[..n].to_vec(),
        alpha: w1[n] / 2.0,
        v: w2[..n].to_vec(),
        beta: w2[n],
    })
}

// ── Solving ─────────────────────────────────────────────────────────────────

/// Solve the positioning problem end to end.
pub fn solve(s: &Scenario, tol: &Tolerance) -> Result<SolveReport, SolveError> {
    s.validate(tol)?;
    let n = s.dimension;
    let scale = s.length_scale().max(s.time_scale());

    let a = assemble_a(s);
    let rank_a = a.rank(tol);
    let rhs = squared_rhs(s);

    if rank_a == n + 2 {
        // Full-rank branch: one pseudoinverse application. Cross-check the
        // residual and fall back to the reduced quadratic if it fails, since
        // the rank decision is a measure-zero boundary in floating point.
        if let Ok(a_pinv) = a.pseudo_inverse(tol) {
            let w = a_pinv.mul_vec(&rhs);
            let bias = w[0];
            let user = w[1..=n].to_vec();
            let residual = s.residual(bias, &user);
            if residual <= FULL_RANK_ACCEPT_REL * scale {
                return Ok(SolveReport {
                    branch: Branch::FullRank,
                    rank_a,
                    reduction: None,
                    quad_coeffs: None,
                    discriminant: None,
                    solutions: vec![Solution { bias, user, residual }],
                    rejected: vec![],
                });
            }
        }
    }

    let reduction = reduce(s, tol)?;
    solve_deficient(s, tol, rank_a, reduction, scale)
}

fn solve_deficient(
    s: &Scenario,
    tol: &Tolerance,
    rank_a: usize,
    reduction: Reduction,
    scale: f64,
) -> Result<SolveReport, SolveError> {
    let Reduction { u, v, alpha, beta } = &reduction;
    let e = norm(u);
    let c2 = e * e - 1.0;
    let c1 = 2.0 * (dot(u, v) - alpha);
    let c0 = dot(v, v) - beta;

    // The classification threshold on the eccentricity decides whether the
    // equation is treated as linear; this keeps the solution count aligned
    // with the geometric case analysis.
    let parabolic = (e - 1.0).abs() <= tol.class_abs;
    let (roots, discriminant) = if parabolic {
        if c1.abs() <= tol.class_abs * scale.max(1.0) {
            return Err(SolveError::DegenerateQuadratic { c2, c1 });
        }
        (vec![-c0 / c1], None)
    } else {
        let disc = c1 * c1 - 4.0 * c2 * c0;
        // √disc/|c2| is the distance between the two roots, which equals the
        // distance between the sheets of the underlying quadric.
        let separation = disc.abs().sqrt() / c2.abs();
        let merge = tol.class_abs.max(ROOT_MERGE_REL) * scale;
        if disc < 0.0 && separation > merge {
            return Err(SolveError::NoSolution { best_residual: f64::INFINITY });
        }
        if separation <= merge {
            (vec![-c1 / (2.0 * c2)], Some(disc))
        } else {
            // Numerically stable pair: q/c2 and c0/q avoid cancellation.
            let sign = if c1 >= 0.0 { 1.0 } else { -1.0 };
            let q = -(c1 + sign * disc.sqrt()) / 2.0;
            (vec![q / c2, c0 / q], Some(disc))
        }
    };

    let slack = INEQUALITY_SLACK_REL * scale;
    let t_min = s.times.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut solutions = Vec::new();
    let mut rejected = Vec::new();
    let mut best_residual = f64::INFINITY;

    for t_prime in roots {
        if !t_prime.is_finite() {
            continue;
        }
        let user: Vec<f64> = u.iter().zip(v).map(|(ui, vi)| t_prime * ui + vi).collect();
        // Roots of the reduced system must satisfy the squared equations;
        // anything further off is numerical debris or inconsistent input.
        let abs_residual = s
            .satellites
            .iter()
            .zip(&s.times)
            .map(|(a, &t)| (distance(a, &user) - (t - t_prime).abs()).abs())
            .fold(0.0, f64::max);
        best_residual = best_residual.min(abs_residual);
        if abs_residual > RESIDUAL_ACCEPT_REL * scale {
            continue;
        }
        let residual = s.residual(t_prime, &user);
        let sol = Solution { bias: t_prime, user, residual };
        if t_prime <= t_min + slack {
            solutions.push(sol);
        } else {
            rejected.push(sol);
        }
    }

    if solutions.is_empty() {
        return Err(SolveError::NoSolution { best_residual });
    }

    Ok(SolveReport {
        branch: Branch::RankDeficient,
        rank_a,
        reduction: Some(reduction),
        quad_coeffs: Some([c2, c1, c0]),
        discriminant,
        solutions,
        rejected,
    })
}
