//! Monte Carlo uniqueness statistics and uniqueness region maps.
//!
//! The Monte Carlo experiment samples satellite configurations uniformly in
//! a box, estimates for each the fraction of user positions (from the same
//! box) with a unique solution, and histograms those fractions over 50
//! equal-width bins.
//!
//! Determinism contract: every configuration draws from its own counter-mode
//! substream of the master seed (stream id = configuration index), and the
//! reduction sums integer counters only. The result is therefore identical
//! bit for bit no matter how many workers participate; the `parallel`
//! feature (on by default) distributes configurations over a rayon pool,
//! and [`monte_carlo_sequential`] is the single-threaded reference path.

use crate::model::ModelError;
use crate::numkernel::Tolerance;
use crate::uniqueness::{CaseLabel, UniquenessClassifier, UniquenessError};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{self, Write};

/// Number of histogram bins over `[0, 1]`.
pub const HISTOGRAM_BINS: usize = 50;

const RESAMPLE_ATTEMPTS: usize = 1000;

// ── Error type ──────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentError {
    Model(ModelError),
    Uniqueness(UniquenessError),
    BadParams(String),
    /// Sampling kept producing inadmissible configurations.
    DegenerateSampling { attempts: usize },
}

impl fmt::Display for ExperimentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Model(e) => e.fmt(f),
            Self::Uniqueness(e) => e.fmt(f),
            Self::BadParams(msg) => write!(f, "bad parameters: {msg}"),
            Self::DegenerateSampling { attempts } => {
                write!(f, "no admissible configuration after {attempts} attempts")
            }
        }
    }
}

impl std::error::Error for ExperimentError {}

impl From<ModelError> for ExperimentError {
    fn from(e: ModelError) -> Self {
        Self::Model(e)
    }
}

impl From<UniquenessError> for ExperimentError {
    fn from(e: UniquenessError) -> Self {
        Self::Uniqueness(e)
    }
}

impl ExperimentError {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Model(e) => e.name(),
            Self::Uniqueness(e) => e.name(),
            Self::BadParams(_) => "BadParams",
            Self::DegenerateSampling { .. } => "DegenerateSampling",
        }
    }
}

// ── Monte Carlo ─────────────────────────────────────────────────────────────

/// Parameters of the Monte Carlo uniqueness experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloParams {
    pub dimension: usize,
    pub satellites: usize,
    pub configs: u64,
    pub users: u32,
    pub seed: u64,
    /// Sampling box `[lo, hi]^n`, shared by satellites and user positions.
    pub box_lo: f64,
    pub box_hi: f64,
}

impl MonteCarloParams {
    pub fn new(dimension: usize, satellites: usize, configs: u64, users: u32, seed: u64) -> Self {
        Self { dimension, satellites, configs, users, seed, box_lo: -1.0, box_hi: 1.0 }
    }

    fn check(&self) -> Result<(), ExperimentError> {
        if self.dimension < 2 {
            return Err(ExperimentError::Model(ModelError::BadDimension { n: self.dimension }));
        }
        if self.satellites < self.dimension + 1 {
            return Err(ExperimentError::Model(ModelError::TooFewSatellites {
                m: self.satellites,
                needed: self.dimension + 1,
            }));
        }
        if self.configs == 0 || self.users == 0 {
            return Err(ExperimentError::BadParams("configs and users must be positive".into()));
        }
        if !self.box_lo.is_finite() || !self.box_hi.is_finite() || self.box_lo >= self.box_hi {
            return Err(ExperimentError::BadParams("empty sampling box".into()));
        }
        Ok(())
    }
}

/// Histogram of per-configuration uniqueness fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// Fraction of configurations falling in each of the 50 bins.
    pub fractions: Vec<f64>,
    /// Mean uniqueness probability over all (configuration, user) pairs.
    pub average: f64,
    pub configs: u64,
    pub users: u64,
}

impl Histogram {
    /// CSV rows `bin_lo, bin_hi, fraction` with a trailing comment row
    /// carrying the average and the sample counts.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "bin_lo,bin_hi,fraction")?;
        let width = 1.0 / HISTOGRAM_BINS as f64;
        for (i, frac) in self.fractions.iter().enumerate() {
            writeln!(w, "{},{},{}", i as f64 * width, (i + 1) as f64 * width, frac)?;
        }
        writeln!(w, "# average={}, configs={}, users={}", self.average, self.configs, self.users)
    }

    pub fn to_csv(&self) -> String {
        let mut out = Vec::new();
        self.write_csv(&mut out).expect("writing to a Vec cannot fail");
        String::from_utf8(out).expect("CSV is ASCII")
    }
}

#[derive(Clone)]
struct Tally {
    bins: Vec<u64>,
    unique: u64,
}

impl Tally {
    fn zero() -> Self {
        Self { bins: vec![0; HISTOGRAM_BINS], unique: 0 }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.bins.iter_mut().zip(other.bins) {
            *a += b;
        }
        self.unique += other.unique;
        self
    }
}

/// One configuration: sample satellites (resampling inadmissible draws from
/// the same substream), then count unique user positions.
fn run_config(params: &MonteCarloParams, tol: &Tolerance, index: u64) -> Result<Tally, ExperimentError> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(index);
    let n = params.dimension;
    let range = params.box_lo..params.box_hi;

    let mut classifier = None;
    for _ in 0..RESAMPLE_ATTEMPTS {
        let sats: Vec<Vec<f64>> = (0..params.satellites)
            .map(|_| (0..n).map(|_| rng.random_range(range.clone())).collect())
            .collect();
        if let Ok(c) = UniquenessClassifier::new(&sats, tol) {
            classifier = Some(c);
            break;
        }
    }
    let classifier =
        classifier.ok_or(ExperimentError::DegenerateSampling { attempts: RESAMPLE_ATTEMPTS })?;

    let mut unique = 0u64;
    for _ in 0..params.users {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(range.clone())).collect();
        if classifier.label(&x)? != CaseLabel::Hyperboloid {
            unique += 1;
        }
    }
    let p = unique as f64 / params.users as f64;
    let bin = ((p * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1);
    let mut tally = Tally::zero();
    tally.bins[bin] = 1;
    tally.unique = unique;
    Ok(tally)
}

fn histogram_from(tally: Tally, params: &MonteCarloParams) -> Histogram {
    let total_pairs = params.configs as f64 * params.users as f64;
    Histogram {
        fractions: tally.bins.iter().map(|&c| c as f64 / params.configs as f64).collect(),
        average: tally.unique as f64 / total_pairs,
        configs: params.configs,
        users: params.users as u64,
    }
}

/// Single-threaded reference implementation.
pub fn monte_carlo_sequential(
    params: &MonteCarloParams,
    tol: &Tolerance,
) -> Result<Histogram, ExperimentError> {
    params.check()?;
    let mut tally = Tally::zero();
    for index in 0..params.configs {
        tally = tally.merge(run_config(params, tol, index)?);
    }
    Ok(histogram_from(tally, params))
}

/// Monte Carlo uniqueness histogram; distributes configurations over the
/// rayon pool when the `parallel` feature is enabled. Identical output to
/// [`monte_carlo_sequential`] for the same seed.
#[cfg(feature = "parallel")]
pub fn monte_carlo(params: &MonteCarloParams, tol: &Tolerance) -> Result<Histogram, ExperimentError> {
    params.check()?;
    let tally = (0..params.configs)
        .into_par_iter()
        .map(|index| run_config(params, tol, index))
        .try_reduce(Tally::zero, |a, b| Ok(a.merge(b)))?;
    Ok(histogram_from(tally, params))
}

#[cfg(not(feature = "parallel"))]
pub fn monte_carlo(params: &MonteCarloParams, tol: &Tolerance) -> Result<Histogram, ExperimentError> {
    monte_carlo_sequential(params, tol)
}

// ── Region map ──────────────────────────────────────────────────────────────

/// Grid of geometric case labels over a planar bounding box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMap {
    /// `[x_lo, x_hi, y_lo, y_hi]`.
    pub bbox: [f64; 4],
    /// Grid points per axis (inclusive of both box edges).
    pub resolution: usize,
    /// Row-major over y (outer) then x (inner); `resolution²` labels.
    pub labels: Vec<CaseLabel>,
}

impl RegionMap {
    pub fn grid_x(&self, i: usize) -> f64 {
        grid_coord(self.bbox[0], self.bbox[1], self.resolution, i)
    }

    pub fn grid_y(&self, j: usize) -> f64 {
        grid_coord(self.bbox[2], self.bbox[3], self.resolution, j)
    }

    pub fn label_at(&self, ix: usize, iy: usize) -> CaseLabel {
        self.labels[iy * self.resolution + ix]
    }

    /// CSV rows `x1, x2, label`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x1,x2,label")?;
        for iy in 0..self.resolution {
            for ix in 0..self.resolution {
                writeln!(w, "{},{},{}", self.grid_x(ix), self.grid_y(iy), self.label_at(ix, iy))?;
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = Vec::new();
        self.write_csv(&mut out).expect("writing to a Vec cannot fail");
        String::from_utf8(out).expect("CSV is ASCII")
    }
}

fn grid_coord(lo: f64, hi: f64, resolution: usize, i: usize) -> f64 {
    lo + (hi - lo) * i as f64 / (resolution - 1) as f64
}

/// Label every grid point of a planar box with its geometric case.
pub fn region_map(
    satellites: &[Vec<f64>],
    bbox: [f64; 4],
    resolution: usize,
    tol: &Tolerance,
) -> Result<RegionMap, ExperimentError> {
    let n = satellites.first().map_or(0, |a| a.len());
    if n != 2 {
        return Err(ExperimentError::BadParams(format!(
            "region maps are planar; satellites have dimension {n}"
        )));
    }
    if resolution < 2 {
        return Err(ExperimentError::BadParams("resolution must be at least 2".into()));
    }
    if !(bbox[0] < bbox[1] && bbox[2] < bbox[3]) {
        return Err(ExperimentError::BadParams("empty bounding box".into()));
    }
    let classifier = UniquenessClassifier::new(satellites, tol)?;
    let mut labels = Vec::with_capacity(resolution * resolution);
    for iy in 0..resolution {
        let y = grid_coord(bbox[2], bbox[3], resolution, iy);
        for ix in 0..resolution {
            let x = grid_coord(bbox[0], bbox[1], resolution, ix);
            labels.push(classifier.label(&[x, y])?);
        }
    }
    Ok(RegionMap { bbox, resolution, labels })
}
