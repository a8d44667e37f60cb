//! Non-private depth functions: halfspace, integrated rank-weighted (IRW),
//! simplicial and projection depth, plus the vector of depths at the sample
//! points.
//!
//! Halfspace, IRW and projection depth are evaluated over a [`DirectionSet`].
//! In one dimension the set is `{+1, -1}` and the values are exact; in higher
//! dimensions the infimum/integral/supremum over the sphere is approximated by
//! the sampled directions.

use std::fmt;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::data::{dot, Dataset, Direction, DirectionSet, RandomSource, SortedSample};
use crate::error::{DepthError, Result};

/// Default cap on `C(n, d+1)` for exact simplicial enumeration.
pub const DEFAULT_SIMPLICIAL_CAP: u128 = 2_000_000;

const ORIENT_TOL: f64 = 1e-12;
const BARYCENTRIC_TOL: f64 = 1e-9;

/// Univariate scale used by projection outlyingness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    /// Median absolute deviation (`O_1`).
    Mad,
    /// Interquartile range (`O_2`).
    Iqr,
}

impl Scale {
    pub fn of(self, s: &SortedSample) -> f64 {
        match self {
            Scale::Mad => s.mad(),
            Scale::Iqr => s.iqr(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DepthKind {
    Halfspace,
    Irw,
    Simplicial,
    Projection(Scale),
}

impl fmt::Display for DepthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DepthKind::Halfspace => f.write_str("halfspace"),
            DepthKind::Irw => f.write_str("irw"),
            DepthKind::Simplicial => f.write_str("simplicial"),
            DepthKind::Projection(Scale::Mad) => f.write_str("projection-o1"),
            DepthKind::Projection(Scale::Iqr) => f.write_str("projection-o2"),
        }
    }
}

/// How simplicial depth is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimplicialMode {
    /// Enumerate every `(d+1)`-subset; refuses when `C(n, d+1) > cap`.
    Exact { cap: u128 },
    /// Average over `draws` uniformly drawn subsets.
    MonteCarlo { draws: usize, seed: u64 },
}

impl Default for SimplicialMode {
    fn default() -> Self {
        SimplicialMode::Exact {
            cap: DEFAULT_SIMPLICIAL_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepthValue {
    pub value: f64,
    pub kind: DepthKind,
    pub point: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepthVector {
    pub values: Vec<f64>,
    pub kind: DepthKind,
}

fn check(x: &[f64], data: &Dataset, dirs: &DirectionSet) -> Result<()> {
    data.check_point(x)?;
    dirs.check_dim(data.d())
}

/// `min_u (1/n) #{i : X_i^T u <= x^T u}`.
pub fn halfspace_depth(x: &[f64], data: &Dataset, dirs: &DirectionSet) -> Result<DepthValue> {
    check(x, data, dirs)?;
    let n = data.n() as f64;
    let value = dirs
        .iter()
        .map(|u| {
            let t = u.dot(x);
            data.rows().filter(|row| u.dot(row) <= t).count() as f64 / n
        })
        .fold(f64::INFINITY, f64::min);
    Ok(DepthValue {
        value,
        kind: DepthKind::Halfspace,
        point: x.to_vec(),
    })
}

/// Average over directions of `min(F_u(x^T u), 1 - F_u(x^T u -))`.
pub fn irw_depth(x: &[f64], data: &Dataset, dirs: &DirectionSet) -> Result<DepthValue> {
    check(x, data, dirs)?;
    let n = data.n() as f64;
    let total: f64 = dirs
        .iter()
        .map(|u| {
            let t = u.dot(x);
            let (mut le, mut lt) = (0usize, 0usize);
            for row in data.rows() {
                let p = u.dot(row);
                le += usize::from(p <= t);
                lt += usize::from(p < t);
            }
            irw_term(le, lt, n)
        })
        .sum();
    Ok(DepthValue {
        value: total / dirs.len() as f64,
        kind: DepthKind::Irw,
        point: x.to_vec(),
    })
}

fn irw_term(le: usize, lt: usize, n: f64) -> f64 {
    (le as f64 / n).min(1.0 - lt as f64 / n)
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

/// Fraction of closed `(d+1)`-vertex simplices from the data containing `x`.
pub fn simplicial_depth(x: &[f64], data: &Dataset, mode: &SimplicialMode) -> Result<DepthValue> {
    data.check_point(x)?;
    let (n, d) = (data.n(), data.d());
    if n < d + 1 {
        return Err(DepthError::invalid(format!(
            "simplicial depth needs n >= d + 1, got n={n}, d={d}"
        )));
    }
    let value = match *mode {
        SimplicialMode::Exact { cap } => {
            let required = binomial(n, d + 1);
            if required > cap {
                return Err(DepthError::EnumerationCap { required, cap });
            }
            let mut vertices = Vec::with_capacity(d + 1);
            let hits = (0..n)
                .combinations(d + 1)
                .filter(|idx| {
                    vertices.clear();
                    vertices.extend(idx.iter().map(|&i| data.row(i)));
                    simplex_contains(&vertices, x)
                })
                .count();
            hits as f64 / required as f64
        }
        SimplicialMode::MonteCarlo { draws, seed } => {
            if draws == 0 {
                return Err(DepthError::invalid(
                    "monte carlo simplicial depth needs draws > 0",
                ));
            }
            let mut rng = RandomSource::derive(seed, "simplicial");
            let mut vertices = Vec::with_capacity(d + 1);
            let mut hits = 0usize;
            for _ in 0..draws {
                vertices.clear();
                vertices.extend(
                    index::sample(&mut rng, n, d + 1)
                        .into_iter()
                        .map(|i| data.row(i)),
                );
                hits += usize::from(simplex_contains(&vertices, x));
            }
            hits as f64 / draws as f64
        }
    };
    Ok(DepthValue {
        value,
        kind: DepthKind::Simplicial,
        point: x.to_vec(),
    })
}

/// Closed-simplex containment. `vertices` holds `d + 1` points of `R^d`.
pub fn simplex_contains(vertices: &[&[f64]], x: &[f64]) -> bool {
    match x.len() {
        1 => {
            let (a, b) = (vertices[0][0], vertices[1][0]);
            a.min(b) <= x[0] && x[0] <= a.max(b)
        }
        2 => triangle_contains(vertices[0], vertices[1], vertices[2], x),
        _ => barycentric_contains(vertices, x),
    }
}

fn orient(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    if v.abs() <= ORIENT_TOL {
        0.0
    } else {
        v
    }
}

fn on_segment(a: &[f64], b: &[f64], x: &[f64]) -> bool {
    orient(a, b, x) == 0.0
        && a[0].min(b[0]) <= x[0]
        && x[0] <= a[0].max(b[0])
        && a[1].min(b[1]) <= x[1]
        && x[1] <= a[1].max(b[1])
}

fn triangle_contains(a: &[f64], b: &[f64], c: &[f64], x: &[f64]) -> bool {
    if orient(a, b, c) == 0.0 {
        // degenerate triangle: a segment or a point
        return on_segment(a, b, x) || on_segment(b, c, x) || on_segment(a, c, x);
    }
    let s1 = orient(a, b, x);
    let s2 = orient(b, c, x);
    let s3 = orient(c, a, x);
    let has_neg = s1 < 0.0 || s2 < 0.0 || s3 < 0.0;
    let has_pos = s1 > 0.0 || s2 > 0.0 || s3 > 0.0;
    !(has_neg && has_pos)
}

fn barycentric_contains(vertices: &[&[f64]], x: &[f64]) -> bool {
    let d = x.len();
    let m = DMatrix::from_fn(
        d + 1,
        d + 1,
        |r, c| if r < d { vertices[c][r] } else { 1.0 },
    );
    let rhs = DVector::from_fn(d + 1, |r, _| if r < d { x[r] } else { 1.0 });
    // singular simplices have zero volume; treated as not containing x
    match m.lu().solve(&rhs) {
        Some(lambda) => lambda.iter().all(|&l| l >= -BARYCENTRIC_TOL),
        None => false,
    }
}

/// Per-direction location and scale of the projected sample, precomputed so
/// outlyingness can be evaluated at many points.
#[derive(Debug, Clone)]
pub struct ProjectionProfile {
    entries: Vec<ProfileEntry>,
    scale: Scale,
}

#[derive(Debug, Clone)]
struct ProfileEntry {
    direction: Direction,
    sorted: SortedSample,
    median: f64,
    spread: f64,
}

impl ProjectionProfile {
    pub fn new(data: &Dataset, dirs: &DirectionSet, scale: Scale) -> Result<Self> {
        dirs.check_dim(data.d())?;
        let entries = dirs
            .iter()
            .map(|u| {
                let values: Vec<f64> = data.rows().map(|row| u.dot(row)).collect();
                let sorted = SortedSample::new(&values)?;
                Ok(ProfileEntry {
                    direction: u.clone(),
                    median: sorted.median(),
                    spread: scale.of(&sorted),
                    sorted,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { entries, scale })
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn dim(&self) -> usize {
        self.entries[0].direction.dim()
    }

    /// `max_u |x^T u - med_u| / scale_u`, `+inf` when some direction has zero
    /// scale and a nonzero numerator.
    pub fn outlyingness(&self, x: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|e| directional_outlyingness(e.direction.dot(x), e.median, e.spread))
            .fold(0.0, f64::max)
    }

    /// Sorted projections per direction, in direction order.
    pub fn sorted_projections(&self) -> impl Iterator<Item = (&Direction, &SortedSample)> {
        self.entries.iter().map(|e| (&e.direction, &e.sorted))
    }

    /// `sup_u med_u` and `sup_u scale_u` over the directions.
    pub fn location_scale_sup(&self) -> (f64, f64) {
        self.entries
            .iter()
            .fold((f64::NEG_INFINITY, 0.0), |(m, s), e| {
                (m.max(e.median), s.max(e.spread))
            })
    }
}

pub(crate) fn directional_outlyingness(t: f64, median: f64, spread: f64) -> f64 {
    let numerator = (t - median).abs();
    if numerator == 0.0 {
        0.0
    } else if spread == 0.0 {
        f64::INFINITY
    } else {
        numerator / spread
    }
}

pub fn outlyingness(x: &[f64], data: &Dataset, dirs: &DirectionSet, scale: Scale) -> Result<f64> {
    check(x, data, dirs)?;
    Ok(ProjectionProfile::new(data, dirs, scale)?.outlyingness(x))
}

/// `1 / (1 + O(x))`; zero at infinite outlyingness.
pub fn projection_depth(
    x: &[f64],
    data: &Dataset,
    dirs: &DirectionSet,
    scale: Scale,
) -> Result<DepthValue> {
    let o = outlyingness(x, data, dirs, scale)?;
    Ok(DepthValue {
        value: depth_from_outlyingness(o),
        kind: DepthKind::Projection(scale),
        point: x.to_vec(),
    })
}

pub fn depth_from_outlyingness(o: f64) -> f64 {
    if o.is_infinite() {
        0.0
    } else {
        1.0 / (1.0 + o)
    }
}

/// Depth of `x` for any kind.
pub fn depth(
    x: &[f64],
    data: &Dataset,
    kind: DepthKind,
    dirs: &DirectionSet,
    mode: &SimplicialMode,
) -> Result<DepthValue> {
    match kind {
        DepthKind::Halfspace => halfspace_depth(x, data, dirs),
        DepthKind::Irw => irw_depth(x, data, dirs),
        DepthKind::Simplicial => simplicial_depth(x, data, mode),
        DepthKind::Projection(scale) => projection_depth(x, data, dirs, scale),
    }
}

/// Depth of every sample point with respect to the full sample.
pub fn depth_vector(
    data: &Dataset,
    kind: DepthKind,
    dirs: &DirectionSet,
    mode: &SimplicialMode,
) -> Result<DepthVector> {
    let values = match kind {
        DepthKind::Halfspace | DepthKind::Irw => {
            dirs.check_dim(data.d())?;
            rank_depths(data, kind, dirs)
        }
        DepthKind::Simplicial => data
            .rows()
            .map(|x| simplicial_depth(x, data, mode).map(|v| v.value))
            .collect::<Result<Vec<f64>>>()?,
        DepthKind::Projection(_) => {
            return Err(DepthError::UnsupportedKind {
                kind: kind.to_string(),
                operation: "depth_vector",
            })
        }
    };
    Ok(DepthVector { values, kind })
}

fn rank_depths(data: &Dataset, kind: DepthKind, dirs: &DirectionSet) -> Vec<f64> {
    let n = data.n() as f64;
    let mut acc = vec![
        match kind {
            DepthKind::Halfspace => f64::INFINITY,
            _ => 0.0,
        };
        data.n()
    ];
    let mut proj = vec![0.0; data.n()];
    for u in dirs {
        for (p, row) in proj.iter_mut().zip(data.rows()) {
            *p = dot(u.as_slice(), row);
        }
        let mut sorted = proj.clone();
        sorted.sort_by(f64::total_cmp);
        for (a, &t) in acc.iter_mut().zip(&proj) {
            let le = sorted.partition_point(|&v| v <= t);
            match kind {
                DepthKind::Halfspace => *a = a.min(le as f64 / n),
                _ => *a += irw_term(le, sorted.partition_point(|&v| v < t), n),
            }
        }
    }
    if kind == DepthKind::Irw {
        acc.iter_mut().for_each(|a| *a /= dirs.len() as f64);
    }
    acc
}
