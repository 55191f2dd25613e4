//! Scenario representation, validation, and exact forward synthesis of
//! arrival times.
//!
//! Time units are chosen so the signal propagation speed is 1; any unit
//! conversion happens outside this crate. A scenario is solvable only when
//! the satellites are pairwise distinct and do not lie on a common affine
//! hyperplane, which forces `m ≥ n+1`.

use crate::numkernel::{distance, Matrix, Tolerance};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Pairwise-distinctness threshold, relative to the satellite bounding-box
/// diameter.
pub const DISTINCT_REL: f64 = 1e-12;

// ── Error type ──────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    /// Fewer than n+1 satellites.
    TooFewSatellites { m: usize, needed: usize },
    /// Two satellites closer than the relative distinctness threshold.
    DuplicateSatellites { i: usize, j: usize },
    /// Satellites lie on (or numerically near) a common affine hyperplane.
    CoplanarSatellites,
    /// The ambient dimension must be at least 2.
    BadDimension { n: usize },
    /// Ragged coordinate arrays or count mismatches.
    ShapeMismatch(String),
    /// NaN or infinity in coordinates or times.
    NonFinite,
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TooFewSatellites { m, needed } => {
                write!(f, "too few satellites: {m} < {needed}")
            }
            Self::DuplicateSatellites { i, j } => {
                write!(f, "satellites {i} and {j} coincide")
            }
            Self::CoplanarSatellites => {
                write!(f, "satellites lie on a common affine hyperplane")
            }
            Self::BadDimension { n } => write!(f, "dimension must be at least 2, got {n}"),
            Self::ShapeMismatch(msg) => write!(f, "shape mismatch: {msg}"),
            Self::NonFinite => write!(f, "coordinates and times must be finite"),
        }
    }
}

impl std::error::Error for ModelError {}

impl ModelError {
    /// Stable error name for structured error reporting.
    pub fn name(&self) -> &'static str {
        match self {
            Self::TooFewSatellites { .. } => "TooFewSatellites",
            Self::DuplicateSatellites { .. } => "DuplicateSatellites",
            Self::CoplanarSatellites => "CoplanarSatellites",
            Self::BadDimension { .. } => "BadDimension",
            Self::ShapeMismatch(_) => "ShapeMismatch",
            Self::NonFinite => "NonFinite",
        }
    }
}

// ── Domain types ────────────────────────────────────────────────────────────

/// A positioning instance: satellite positions and the signal arrival times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub dimension: usize,
    pub satellites: Vec<Vec<f64>>,
    pub times: Vec<f64>,
}

/// The true user position and clock bias behind a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub user: Vec<f64>,
    pub bias: f64,
}

/// One solution of the positioning equations, with its worst-case residual
/// `max_i |‖a_i − x′‖ − (t_i − t′)|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub bias: f64,
    pub user: Vec<f64>,
    pub residual: f64,
}

impl Scenario {
    /// Build a scenario, checking structure only (shapes and finiteness).
    /// Geometric admissibility is checked by [`Scenario::validate`].
    pub fn new(
        dimension: usize,
        satellites: Vec<Vec<f64>>,
        times: Vec<f64>,
    ) -> Result<Self, ModelError> {
        let s = Self { dimension, satellites, times };
        s.check_structure()?;
        Ok(s)
    }

    fn check_structure(&self) -> Result<(), ModelError> {
        if self.dimension < 2 {
            return Err(ModelError::BadDimension { n: self.dimension });
        }
        if let Some(i) = self.satellites.iter().position(|a| a.len() != self.dimension) {
            return Err(ModelError::ShapeMismatch(format!(
                "satellite {i} has {} coordinates, expected {}",
                self.satellites[i].len(),
                self.dimension
            )));
        }
        if self.times.len() != self.satellites.len() {
            return Err(ModelError::ShapeMismatch(format!(
                "{} times for {} satellites",
                self.times.len(),
                self.satellites.len()
            )));
        }
        let finite = self.satellites.iter().flatten().chain(self.times.iter());
        if !finite.clone().all(|v| v.is_finite()) {
            return Err(ModelError::NonFinite);
        }
        Ok(())
    }

    /// Full admissibility check: structure, satellite count, pairwise
    /// distinctness and non-coplanarity (rank of the affine matrix).
    pub fn validate(&self, tol: &Tolerance) -> Result<(), ModelError> {
        self.check_structure()?;
        validate_satellites(&self.satellites, self.dimension, tol)
    }

    pub fn num_satellites(&self) -> usize {
        self.satellites.len()
    }

    /// Diagonal of the satellite axis-aligned bounding box. Zero only when
    /// all satellites coincide.
    pub fn length_scale(&self) -> f64 {
        bounding_diameter(&self.satellites)
    }

    /// Spread of the arrival times (invariant under bias shifts).
    pub fn time_scale(&self) -> f64 {
        let lo = self.times.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.times.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    }

    /// Worst-case signed residual of `(bias, user)` against the scenario.
    pub fn residual(&self, bias: f64, user: &[f64]) -> f64 {
        self.satellites
            .iter()
            .zip(&self.times)
            .map(|(a, &t)| (distance(a, user) - (t - bias)).abs())
            .fold(0.0, f64::max)
    }
}

/// Geometric checks shared by scenarios and raw satellite sets.
pub(crate) fn validate_satellites(
    satellites: &[Vec<f64>],
    dimension: usize,
    tol: &Tolerance,
) -> Result<(), ModelError> {
    let m = satellites.len();
    if m < dimension + 1 {
        return Err(ModelError::TooFewSatellites { m, needed: dimension + 1 });
    }
    let diam = bounding_diameter(satellites);
    for i in 0..m {
        for j in (i + 1)..m {
            if distance(&satellites[i], &satellites[j]) <= DISTINCT_REL * diam {
                return Err(ModelError::DuplicateSatellites { i, j });
            }
        }
    }
    let b = assemble_b_from(satellites);
    if b.rank(tol) < dimension + 1 {
        return Err(ModelError::CoplanarSatellites);
    }
    Ok(())
}

pub(crate) fn assemble_b_from(satellites: &[Vec<f64>]) -> Matrix {
    let rows: Vec<Vec<f64>> = satellites
        .iter()
        .map(|a| {
            let mut row: Vec<f64> = a.iter().map(|&c| 2.0 * c).collect();
            row.push(-1.0);
            row
        })
        .collect();
    Matrix::from_rows(&rows).expect("validated satellite shapes")
}

pub(crate) fn bounding_diameter(points: &[Vec<f64>]) -> f64 {
    let n = points.first().map_or(0, |p| p.len());
    (0..n)
        .map(|j| {
            let lo = points.iter().map(|p| p[j]).fold(f64::INFINITY, f64::min);
            let hi = points.iter().map(|p| p[j]).fold(f64::NEG_INFINITY, f64::max);
            (hi - lo) * (hi - lo)
        })
        .sum::<f64>()
        .sqrt()
}

/// Arrival times for a known user position and clock bias:
/// `t_i = ‖a_i − x‖ + t`, exactly as computed in floating point.
pub fn synthesize_times(
    satellites: &[Vec<f64>],
    ground: &GroundTruth,
    tol: &Tolerance,
) -> Result<Scenario, ModelError> {
    let n = ground.user.len();
    if !ground.user.iter().all(|v| v.is_finite()) || !ground.bias.is_finite() {
        return Err(ModelError::NonFinite);
    }
    let times: Vec<f64> = satellites.iter().map(|a| distance(a, &ground.user) + ground.bias).collect();
    let s = Scenario::new(n, satellites.to_vec(), times)?;
    s.validate(tol)?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn cone_satellites() -> Vec<Vec<f64>> {
        vec![
            vec![3.0, 4.0, 5.0],
            vec![5.0, 12.0, 13.0],
            vec![8.0, 15.0, 17.0],
            vec![7.0, 24.0, 25.0],
        ]
    }

    fn five_satellites() -> Vec<Vec<f64>> {
        vec![
            vec![-28.8, 23.4],
            vec![-6.4, 10.2],
            vec![-2.7, 9.225],
            vec![9.0, 11.25],
            vec![16.0, 15.0],
        ]
    }

    #[test]
    fn validate_accepts_triangle() {
        let s = Scenario::new(
            2,
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![1.0, 2.0, 3.0],
        )
        .unwrap();
        assert!(s.validate(&tol()).is_ok());
    }

    #[test]
    fn validate_rejects_collinear() {
        let s = Scenario::new(
            2,
            vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]],
            vec![0.0, 0.0, 0.0],
        )
        .unwrap();
        assert_eq!(s.validate(&tol()), Err(ModelError::CoplanarSatellites));
    }

    #[test]
    fn validate_accepts_cone_scenario() {
        let truth = GroundTruth { user: vec![0.0; 3], bias: 0.0 };
        let s = synthesize_times(&cone_satellites(), &truth, &tol()).unwrap();
        assert!(s.validate(&tol()).is_ok());
    }

    #[test]
    fn validate_rejects_too_few() {
        let s = Scenario::new(2, vec![vec![0.0, 0.0], vec![1.0, 0.0]], vec![0.0, 0.0]).unwrap();
        assert_eq!(
            s.validate(&tol()),
            Err(ModelError::TooFewSatellites { m: 2, needed: 3 })
        );
    }

    #[test]
    fn validate_rejects_duplicates() {
        let s = Scenario::new(
            2,
            vec![vec![0.0, 0.0], vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![0.0; 4],
        )
        .unwrap();
        assert_eq!(s.validate(&tol()), Err(ModelError::DuplicateSatellites { i: 0, j: 1 }));
    }

    #[test]
    fn synthesize_cone_times() {
        let truth = GroundTruth { user: vec![0.0; 3], bias: 0.0 };
        let s = synthesize_times(&cone_satellites(), &truth, &tol()).unwrap();
        let want = [5.0 * SQRT2, 13.0 * SQRT2, 17.0 * SQRT2, 25.0 * SQRT2];
        for (got, want) in s.times.iter().zip(want) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn synthesize_five_point_times() {
        let truth = GroundTruth { user: vec![0.0, 15.0], bias: 0.0 };
        let s = synthesize_times(&five_satellites(), &truth, &tol()).unwrap();
        let want = [30.0, 8.0, 6.375, 9.75, 16.0];
        for (got, want) in s.times.iter().zip(want) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn synthesize_at_satellite_gives_bias() {
        let sats = cone_satellites();
        let truth = GroundTruth { user: sats[0].clone(), bias: 7.0 };
        let s = synthesize_times(&sats, &truth, &tol()).unwrap();
        assert_eq!(s.times[0], 7.0);
    }

    #[test]
    fn bias_shift_is_exact() {
        let sats = five_satellites();
        let t0 = synthesize_times(&sats, &GroundTruth { user: vec![1.5, -2.0], bias: 0.25 }, &tol())
            .unwrap();
        let t1 = synthesize_times(&sats, &GroundTruth { user: vec![1.5, -2.0], bias: 0.25 + 0.5 }, &tol())
            .unwrap();
        for (a, b) in t0.times.iter().zip(&t1.times) {
            assert_eq!(a + 0.5, *b);
        }
    }

    #[test]
    fn ground_truth_is_a_solution() {
        let truth = GroundTruth { user: vec![0.2, -0.7, 0.4], bias: -0.3 };
        let s = synthesize_times(&cone_satellites(), &truth, &tol()).unwrap();
        let scale = s.length_scale().max(1.0);
        assert!(s.residual(truth.bias, &truth.user) <= 1e-12 * scale);
    }

    #[test]
    fn json_round_trip() {
        let s = Scenario::new(
            2,
            vec![vec![0.1, 0.2], vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![1.0, 2.0, 3.0],
        )
        .unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let back: Scenario = serde_json::from_str(&text).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn json_rejects_ragged_coordinates() {
        let text = r#"{"dimension":2,"satellites":[[0,0],[1],[0,1]],"times":[1,2,3]}"#;
        let parsed: Scenario = serde_json::from_str(text).unwrap();
        assert!(matches!(parsed.validate(&tol()), Err(ModelError::ShapeMismatch(_))));
    }
}
