//! Datasets, projections, direction sets, randomness and univariate summaries.
//!
//! Every depth function in this crate reduces to one-dimensional statistics of
//! projected samples `X_i^T u`. Two quantile conventions are used and they are
//! deliberately different:
//!
//! * [`empirical_quantile`] is the left-continuous inverse of the empirical CDF
//!   (type 1): the smallest order statistic `v` with `F_n(v) >= p`.
//! * [`sample_median`] is the usual median, averaging the two middle order
//!   statistics when `n` is even.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{DepthError, Result};

/// Slack used when turning `n * p` into an order-statistic index, so that
/// products like `5 * 0.6` that land a rounding error above an integer are not
/// pushed to the next index.
const QUANTILE_INDEX_SLACK: f64 = 1e-9;

/// An `n x d` matrix of finite reals. One row is one individual, the unit of
/// privacy protection.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    n: usize,
    d: usize,
}

impl Dataset {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = rows.first().map(Vec::len).ok_or(DepthError::EmptyInput)?;
        if d == 0 {
            return Err(DepthError::Input {
                row: 0,
                reason: "row has no columns".into(),
            });
        }
        let n = rows.len();
        let mut values = Vec::with_capacity(n * d);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != d {
                return Err(DepthError::Input {
                    row: i,
                    reason: format!("expected {d} columns, found {}", row.len()),
                });
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(DepthError::Input {
                    row: i,
                    reason: format!("column {j} is not finite"),
                });
            }
            values.extend(row);
        }
        Ok(Self { values, n, d })
    }

    /// A one-dimensional dataset, one row per value.
    pub fn from_column(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| vec![v]).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.d)
    }

    /// Adjacent dataset: row `i` swapped for `replacement`.
    pub fn with_row_replaced(&self, i: usize, replacement: &[f64]) -> Result<Self> {
        if replacement.len() != self.d {
            return Err(DepthError::DimensionMismatch {
                expected: self.d,
                got: replacement.len(),
            });
        }
        if i >= self.n {
            return Err(DepthError::invalid(format!(
                "row {i} out of range for n={}",
                self.n
            )));
        }
        let mut next = self.clone();
        next.values[i * self.d..(i + 1) * self.d].copy_from_slice(replacement);
        Ok(next)
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn concat(&self, other: &Dataset) -> Result<Self> {
        if other.d != self.d {
            return Err(DepthError::DimensionMismatch {
                expected: self.d,
                got: other.d,
            });
        }
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        Ok(Self {
            values,
            n: self.n + other.n,
            d: self.d,
        })
    }

    pub(crate) fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d {
            return Err(DepthError::DimensionMismatch {
                expected: self.d,
                got: x.len(),
            });
        }
        Ok(())
    }
}

/// Load a comma-separated numeric file. Set `has_header` to skip line 1.
pub fn load_dataset(path: impl AsRef<Path>, has_header: bool) -> Result<Dataset> {
    let file = File::open(path.as_ref())
        .map_err(|e| DepthError::Io(format!("{}: {e}", path.as_ref().display())))?;
    read_dataset(file, has_header)
}

pub fn read_dataset<R: Read>(reader: R, has_header: bool) -> Result<Dataset> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let record = record.map_err(|e| DepthError::Input {
            row: i,
            reason: e.to_string(),
        })?;
        let row = record
            .iter()
            .enumerate()
            .map(|(j, cell)| {
                cell.parse::<f64>().map_err(|_| DepthError::Input {
                    row: i,
                    reason: format!("column {j}: {cell:?} is not a number"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Dataset::new(rows)
}

/// A unit vector in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Normalizes `v`; fails on a zero or non-finite vector.
    pub fn new(v: Vec<f64>) -> Result<Self> {
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(DepthError::invalid(
                "direction must be a finite nonzero vector",
            ));
        }
        Ok(Self(v.into_iter().map(|c| c / norm).collect()))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        dot(&self.0, x)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// A data-independent set of directions on the unit sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    directions: Vec<Direction>,
    seed: Option<u64>,
}

impl DirectionSet {
    /// Wraps an explicit list, e.g. coordinate axes. All entries must share
    /// one dimension.
    pub fn from_directions(directions: Vec<Direction>) -> Result<Self> {
        let d = directions
            .first()
            .map(Direction::dim)
            .ok_or_else(|| DepthError::invalid("direction set must be nonempty"))?;
        if let Some(bad) = directions.iter().find(|u| u.dim() != d) {
            return Err(DepthError::DimensionMismatch {
                expected: d,
                got: bad.dim(),
            });
        }
        Ok(Self {
            directions,
            seed: None,
        })
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.directions[0].dim()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Direction> {
        self.directions.iter()
    }

    pub(crate) fn check_dim(&self, d: usize) -> Result<()> {
        if self.dim() != d {
            return Err(DepthError::DimensionMismatch {
                expected: d,
                got: self.dim(),
            });
        }
        Ok(())
    }
}

impl<'a> IntoIterator for &'a DirectionSet {
    type Item = &'a Direction;
    type IntoIter = std::slice::Iter<'a, Direction>;

    fn into_iter(self) -> Self::IntoIter {
        self.iter()
    }
}

/// `m` i.i.d. uniform directions on `S^{d-1}` from normalized standard
/// Gaussian vectors. For `d = 1` the sphere is `{+1, -1}` and exactly those
/// two directions are returned regardless of `m`.
pub fn sample_directions(m: usize, d: usize, seed: u64) -> Result<DirectionSet> {
    if m == 0 || d == 0 {
        return Err(DepthError::invalid(
            "direction count and dimension must be positive",
        ));
    }
    let directions = if d == 1 {
        vec![Direction(vec![1.0]), Direction(vec![-1.0])]
    } else {
        let mut rng = RandomSource::derive(seed, "directions");
        let mut out = Vec::with_capacity(m);
        while out.len() < m {
            let v: Vec<f64> = (0..d).map(|_| rng.standard_gaussian()).collect();
            if let Ok(u) = Direction::new(v) {
                out.push(u);
            }
        }
        out
    };
    Ok(DirectionSet {
        directions,
        seed: Some(seed),
    })
}

/// The projected sample `X_n^T u`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedSample {
    values: Vec<f64>,
    direction: Direction,
}

impl ProjectedSample {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn direction(&self) -> &Direction {
        &self.direction
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn project(data: &Dataset, u: &Direction) -> Result<ProjectedSample> {
    data.check_point(u.as_slice())?;
    Ok(ProjectedSample {
        values: data.rows().map(|row| u.dot(row)).collect(),
        direction: u.clone(),
    })
}

/// A sorted copy of a univariate sample, for repeated order-statistic queries.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedSample {
    sorted: Vec<f64>,
}

impl SortedSample {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(DepthError::EmptyInput);
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(DepthError::invalid("sample contains NaN"));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.sorted
    }

    /// The `j`-th order statistic, 1-based. `None` outside `1..=n`.
    pub fn order_stat(&self, j: i64) -> Option<f64> {
        if j < 1 || j as usize > self.sorted.len() {
            None
        } else {
            Some(self.sorted[j as usize - 1])
        }
    }

    /// 1-based index of the type-1 quantile at `p`.
    pub fn quantile_index(&self, p: f64) -> i64 {
        type1_index(self.sorted.len(), p)
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(DepthError::invalid(format!(
                "quantile level {p} outside (0, 1]"
            )));
        }
        let j = self.quantile_index(p);
        Ok(self.sorted[j as usize - 1])
    }

    pub fn median(&self) -> f64 {
        let n = self.sorted.len();
        if n % 2 == 1 {
            self.sorted[n / 2]
        } else {
            0.5 * (self.sorted[n / 2 - 1] + self.sorted[n / 2])
        }
    }

    pub fn iqr(&self) -> f64 {
        let n = self.sorted.len();
        self.sorted[type1_index(n, 0.75) as usize - 1]
            - self.sorted[type1_index(n, 0.25) as usize - 1]
    }

    pub fn mad(&self) -> f64 {
        let med = self.median();
        let deviations: Vec<f64> = self.sorted.iter().map(|v| (v - med).abs()).collect();
        // deviations are finite and non-NaN, so this cannot fail
        SortedSample::new(&deviations)
            .map(|s| s.median())
            .unwrap_or(0.0)
    }

    /// Number of values `<= t`.
    pub fn count_le(&self, t: f64) -> usize {
        self.sorted.partition_point(|&v| v <= t)
    }

    /// Number of values `< t`.
    pub fn count_lt(&self, t: f64) -> usize {
        self.sorted.partition_point(|&v| v < t)
    }
}

pub(crate) fn type1_index(n: usize, p: f64) -> i64 {
    let np = n as f64 * p;
    ((np - QUANTILE_INDEX_SLACK).ceil() as i64).clamp(1, n as i64)
}

/// Type-1 empirical quantile: `inf { v : F_n(v) >= p }`.
pub fn empirical_quantile(s: &[f64], p: f64) -> Result<f64> {
    SortedSample::new(s)?.quantile(p)
}

pub fn sample_median(s: &[f64]) -> Result<f64> {
    Ok(SortedSample::new(s)?.median())
}

/// Median absolute deviation about the sample median.
pub fn sample_mad(s: &[f64]) -> Result<f64> {
    Ok(SortedSample::new(s)?.mad())
}

/// `F_n^{-1}(3/4) - F_n^{-1}(1/4)` with type-1 quantiles.
pub fn sample_iqr(s: &[f64]) -> Result<f64> {
    Ok(SortedSample::new(s)?.iqr())
}

/// Which additive noise family a mechanism calibrates to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseVariant {
    /// Pure epsilon-DP for the additive mechanisms.
    Laplace,
    /// (epsilon, delta)-DP; requires `delta > 0`.
    Gaussian,
}

impl std::fmt::Display for NoiseVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NoiseVariant::Laplace => f.write_str("laplace"),
            NoiseVariant::Gaussian => f.write_str("gaussian"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    pub epsilon: f64,
    pub delta: f64,
    pub variant: NoiseVariant,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, delta: f64, variant: NoiseVariant) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(DepthError::invalid(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(DepthError::invalid(format!(
                "delta must lie in [0, 1), got {delta}"
            )));
        }
        if variant == NoiseVariant::Gaussian && delta == 0.0 {
            return Err(DepthError::invalid(
                "the gaussian variant requires delta > 0",
            ));
        }
        Ok(Self {
            epsilon,
            delta,
            variant,
        })
    }

    pub fn laplace(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, 0.0, NoiseVariant::Laplace)
    }

    pub fn gaussian(epsilon: f64, delta: f64) -> Result<Self> {
        Self::new(epsilon, delta, NoiseVariant::Gaussian)
    }
}

/// Source of the standard noise draws consumed by mechanisms.
///
/// Production code uses [`RandomSource`]; [`FixedNoise`] replays constants so
/// that tests can inject a known draw (for instance zero noise).
pub trait NoiseSource {
    fn standard_laplace(&mut self) -> f64;
    fn standard_gaussian(&mut self) -> f64;
    /// A draw from `[0, 1)`.
    fn unit_uniform(&mut self) -> f64;
}

/// Seeded ChaCha20 stream. Identical `(seed, label)` pairs give identical
/// draw sequences; distinct labels select independent streams.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    stream: u64,
    rng: ChaCha20Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            stream: 0,
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    /// Sub-stream of `seed` keyed by a fixed label.
    pub fn derive(seed: u64, label: &str) -> Self {
        let stream = fnv1a(label.as_bytes());
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Number of 32-bit words consumed so far.
    pub fn position(&self) -> u128 {
        self.rng.get_word_pos()
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

impl NoiseSource for RandomSource {
    fn standard_laplace(&mut self) -> f64 {
        // inverse CDF on (-1/2, 1/2)
        loop {
            let v: f64 = self.rng.random::<f64>() - 0.5;
            if v > -0.5 {
                return -v.signum() * (1.0 - 2.0 * v.abs()).ln();
            }
        }
    }

    fn standard_gaussian(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    fn unit_uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

/// Constant noise draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedNoise {
    pub laplace: f64,
    pub gaussian: f64,
    pub uniform: f64,
}

impl FixedNoise {
    /// Zero additive noise; categorical draws land at the first candidate
    /// with positive probability.
    pub fn zero() -> Self {
        Self {
            laplace: 0.0,
            gaussian: 0.0,
            uniform: 0.0,
        }
    }
}

impl NoiseSource for FixedNoise {
    fn standard_laplace(&mut self) -> f64 {
        self.laplace
    }

    fn standard_gaussian(&mut self) -> f64 {
        self.gaussian
    }

    fn unit_uniform(&mut self) -> f64 {
        self.uniform
    }
}
