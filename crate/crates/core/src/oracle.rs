//! Brute-force reference computations used to validate the fast paths:
//! exhaustive neighbor enumeration, exact 2-d halfspace depth, and an
//! empirical privacy-loss audit on binned mechanism outputs.

use std::f64::consts::{FRAC_PI_2, PI};

use itertools::Itertools;

use crate::data::{Dataset, RandomSource};
use crate::depth::{binomial, DepthKind, DepthValue};
use crate::error::{DepthError, Result};
use crate::sensitivity::Norm;

/// Maximum number of statistic evaluations an oracle call may perform.
pub const ORACLE_GUARD: u128 = 1_000_000;

/// Candidate replacement rows standing in for "any point of the sample
/// space".
#[derive(Debug, Clone, PartialEq)]
pub struct ReplacementPool {
    points: Vec<Vec<f64>>,
}

impl ReplacementPool {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let d = points.first().map(Vec::len).ok_or(DepthError::EmptyInput)?;
        if points.iter().any(|p| p.len() != d) {
            return Err(DepthError::invalid("pool points must share one dimension"));
        }
        Ok(Self { points })
    }

    /// One-dimensional pool from scalar values.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| vec![v]).collect())
    }

    /// `+-magnitude` along every axis, plus a copy of every distinct row of
    /// `data` and any `extra` points.
    pub fn standard(data: &Dataset, magnitude: f64, extra: &[Vec<f64>]) -> Result<Self> {
        let d = data.d();
        let mut points = Vec::new();
        for j in 0..d {
            for sign in [-1.0, 1.0] {
                let mut p = vec![0.0; d];
                p[j] = sign * magnitude;
                points.push(p);
            }
        }
        points.extend(data.rows().map(<[f64]>::to_vec));
        points.extend(extra.iter().cloned());
        points.sort_by(|a, b| {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        points.dedup();
        Self::new(points)
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `|a - b|` with `inf - inf` read as no change.
fn gap(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs()
    }
}

fn distance(a: &[f64], b: &[f64], norm: Norm) -> f64 {
    let gaps = a.iter().zip(b).map(|(x, y)| gap(*x, *y));
    match norm {
        Norm::L1 => gaps.sum(),
        Norm::L2 => gaps.map(|g| g * g).sum::<f64>().sqrt(),
        Norm::Sup => gaps.fold(0.0, f64::max),
    }
}

fn guard(required: u128) -> Result<()> {
    if required > ORACLE_GUARD {
        return Err(DepthError::GuardExceeded {
            required,
            limit: ORACLE_GUARD,
        });
    }
    Ok(())
}

/// Largest change of `stat` over all single-row replacements drawn from
/// `pool`, measured in `norm`.
pub fn brute_force_sensitivity<F>(
    stat: F,
    data: &Dataset,
    pool: &ReplacementPool,
    norm: Norm,
) -> Result<f64>
where
    F: Fn(&Dataset) -> Result<Vec<f64>>,
{
    guard(data.n() as u128 * pool.len() as u128)?;
    let base = stat(data)?;
    let mut worst = 0.0f64;
    for i in 0..data.n() {
        for p in pool.points() {
            let neighbor = data.with_row_replaced(i, p)?;
            worst = worst.max(distance(&base, &stat(&neighbor)?, norm));
        }
    }
    Ok(worst)
}

/// Pool-restricted truncated breakdown point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BreakdownSearch {
    /// Smallest number of replaced rows that moved the statistic by more
    /// than `eta`.
    Exactly(usize),
    /// No replacement of up to this many rows did.
    Exceeds(usize),
}

impl BreakdownSearch {
    /// Whether the breakdown point is certainly above `k`.
    pub fn exceeds(&self, k: f64) -> bool {
        match *self {
            BreakdownSearch::Exactly(a) => a as f64 > k,
            BreakdownSearch::Exceeds(k_max) => k_max as f64 >= k.floor(),
        }
    }
}

/// Smallest `k <= k_max` such that replacing some `k` rows by pool points
/// moves `stat` by more than `eta` in the sup norm.
///
/// Restricting replacements to a pool can only miss breaking replacements,
/// so the result is an upper bound on the true breakdown point.
pub fn brute_force_a_eta<F>(
    stat: F,
    data: &Dataset,
    eta: f64,
    pool: &ReplacementPool,
    k_max: usize,
) -> Result<BreakdownSearch>
where
    F: Fn(&Dataset) -> Result<Vec<f64>>,
{
    if !(eta > 0.0) {
        return Err(DepthError::invalid(format!(
            "eta must be positive, got {eta}"
        )));
    }
    let n = data.n();
    let k_max = k_max.min(n);
    let required = (1..=k_max).try_fold(0u128, |acc, k| {
        let assignments = (pool.len() as u128).checked_pow(k as u32)?;
        binomial(n, k)
            .checked_mul(assignments)
            .and_then(|c| acc.checked_add(c))
    });
    guard(required.unwrap_or(u128::MAX))?;

    let base = stat(data)?;
    for k in 1..=k_max {
        for rows in (0..n).combinations(k) {
            for assignment in std::iter::repeat_n(pool.points(), k).multi_cartesian_product() {
                let mut neighbor = data.clone();
                for (&i, p) in rows.iter().zip(&assignment) {
                    neighbor = neighbor.with_row_replaced(i, p)?;
                }
                if distance(&base, &stat(&neighbor)?, Norm::Sup) > eta {
                    return Ok(BreakdownSearch::Exactly(k));
                }
            }
        }
    }
    Ok(BreakdownSearch::Exceeds(k_max))
}

/// Exact halfspace depth in the plane: the count of rows in the closed
/// halfplane `{y : (y - x)^T u <= 0}` only changes at angles perpendicular to
/// some `X_i - x`, so its minimum is attained inside one of the arcs between
/// consecutive critical angles.
pub fn exact_halfspace_2d(x: &[f64], data: &Dataset) -> Result<DepthValue> {
    if data.d() != 2 || x.len() != 2 {
        return Err(DepthError::DimensionMismatch {
            expected: 2,
            got: if data.d() != 2 { data.d() } else { x.len() },
        });
    }
    let offsets: Vec<(f64, f64)> = data.rows().map(|r| (r[0] - x[0], r[1] - x[1])).collect();
    let mut critical: Vec<f64> = offsets
        .iter()
        .filter(|(a, b)| *a != 0.0 || *b != 0.0)
        .flat_map(|&(a, b)| {
            let theta = b.atan2(a);
            [theta + FRAC_PI_2, theta - FRAC_PI_2]
        })
        .map(|t| t.rem_euclid(2.0 * PI))
        .collect();
    let n = data.n();
    let value = if critical.is_empty() {
        1.0
    } else {
        critical.sort_by(f64::total_cmp);
        critical.dedup();
        let arcs = critical.len();
        (0..arcs)
            .map(|i| {
                let start = critical[i];
                let end = if i + 1 < arcs {
                    critical[i + 1]
                } else {
                    critical[0] + 2.0 * PI
                };
                let mid = 0.5 * (start + end);
                let (s, c) = mid.sin_cos();
                offsets.iter().filter(|(a, b)| a * c + b * s <= 0.0).count()
            })
            .min()
            .unwrap_or(n) as f64
            / n as f64
    };
    Ok(DepthValue {
        value,
        kind: DepthKind::Halfspace,
        point: x.to_vec(),
    })
}

/// Outcome of an empirical privacy-loss audit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioAudit {
    /// `max |log(c1/c2)|` over pairs and bins, smoothed counts.
    pub max_log_ratio: f64,
    pub worst_pair: usize,
    pub worst_bin: usize,
}

/// Bin edges over the central 99% of the pooled outputs; values outside land
/// in the first or last bin.
fn bin_of(v: f64, lo: f64, hi: f64, bins: usize) -> usize {
    if hi <= lo {
        return 0;
    }
    let pos = ((v - lo) / (hi - lo) * bins as f64).floor();
    pos.clamp(0.0, (bins - 1) as f64) as usize
}

fn pooled_quantile(sorted: &[f64], p: f64) -> f64 {
    let idx = ((sorted.len() as f64 * p).ceil() as usize).clamp(1, sorted.len()) - 1;
    sorted[idx]
}

/// Runs a one-dimensional mechanism `samples` times on each side of every
/// adjacent pair and reports the largest absolute log-ratio of binned
/// output frequencies, each count smoothed by `+0.5`. `None` outputs (a PTR
/// refusal) get their own bin.
///
/// `prepare` is called once per dataset and returns a sampler, so expensive
/// data summaries are computed once.
pub fn dp_ratio_audit<P, S>(
    prepare: P,
    pairs: &[(Dataset, Dataset)],
    samples: usize,
    bins: usize,
    seed: u64,
) -> Result<RatioAudit>
where
    P: Fn(&Dataset) -> Result<S>,
    S: FnMut(&mut RandomSource) -> Option<f64>,
{
    if samples == 0 || bins == 0 || pairs.is_empty() {
        return Err(DepthError::invalid(
            "audit needs samples, bins and at least one pair",
        ));
    }
    let mut worst = RatioAudit {
        max_log_ratio: 0.0,
        worst_pair: 0,
        worst_bin: 0,
    };
    for (pair_index, (left, right)) in pairs.iter().enumerate() {
        let draw = |data: &Dataset, label: &str| -> Result<Vec<Option<f64>>> {
            let mut sampler = prepare(data)?;
            let mut rng = RandomSource::derive(seed.wrapping_add(pair_index as u64), label);
            Ok((0..samples).map(|_| sampler(&mut rng)).collect())
        };
        let a = draw(left, "audit-left")?;
        let b = draw(right, "audit-right")?;
        let mut pooled: Vec<f64> = a.iter().chain(&b).flatten().copied().collect();
        pooled.sort_by(f64::total_cmp);
        let (lo, hi) = if pooled.is_empty() {
            (0.0, 0.0)
        } else {
            (
                pooled_quantile(&pooled, 0.005),
                pooled_quantile(&pooled, 0.995),
            )
        };
        let histogram = |outputs: &[Option<f64>]| {
            // last slot is the refusal bin
            let mut counts = vec![0.5f64; bins + 1];
            for o in outputs {
                match o {
                    Some(v) => counts[bin_of(*v, lo, hi, bins)] += 1.0,
                    None => counts[bins] += 1.0,
                }
            }
            counts
        };
        let (ca, cb) = (histogram(&a), histogram(&b));
        for (bin, (x, y)) in ca.iter().zip(&cb).enumerate() {
            let r = (x / y).ln().abs();
            if r > worst.max_log_ratio {
                worst = RatioAudit {
                    max_log_ratio: r,
                    worst_pair: pair_index,
                    worst_bin: bin,
                };
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{sample_directions, sample_median, NoiseSource};
    use crate::depth::halfspace_depth;
    use proptest::prelude::*;

    fn line(values: &[f64]) -> Dataset {
        Dataset::from_column(values).unwrap()
    }

    #[test]
    fn halfspace_point_sensitivity_attained() {
        let data = line(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let dirs = sample_directions(2, 1, 0).unwrap();
        let pool = ReplacementPool::from_values(&[-1e6, -1.0, 0.0, 1.0, 1e6]).unwrap();
        let s = brute_force_sensitivity(
            |d| Ok(vec![halfspace_depth(&[2.0], d, &dirs)?.value]),
            &data,
            &pool,
            Norm::L1,
        )
        .unwrap();
        assert!((s - 0.2).abs() < 1e-15);
    }

    #[test]
    fn constant_statistic_has_zero_sensitivity() {
        let data = line(&[0.0, 1.0, 2.0]);
        let pool = ReplacementPool::from_values(&[-1e6, 1e6]).unwrap();
        assert_eq!(
            brute_force_sensitivity(|_| Ok(vec![7.0]), &data, &pool, Norm::L2).unwrap(),
            0.0
        );
    }

    #[test]
    fn mean_sensitivity_grows_with_pool() {
        let data = line(&[0.0, 1.0, 2.0, 3.0]);
        let mean = |d: &Dataset| Ok(vec![d.rows().map(|r| r[0]).sum::<f64>() / d.n() as f64]);
        let small = brute_force_sensitivity(
            mean,
            &data,
            &ReplacementPool::from_values(&[-1e2, 1e2]).unwrap(),
            Norm::L1,
        )
        .unwrap();
        let large = brute_force_sensitivity(
            mean,
            &data,
            &ReplacementPool::from_values(&[-1e6, 1e6]).unwrap(),
            Norm::L1,
        )
        .unwrap();
        assert!(large > 1000.0 * small);
    }

    #[test]
    fn guard_rejects_large_enumerations() {
        let data = line(&(0..2000).map(f64::from).collect::<Vec<_>>());
        let pool = ReplacementPool::from_values(&vec![0.0; 600]).unwrap();
        let r = brute_force_sensitivity(|_| Ok(vec![0.0]), &data, &pool, Norm::L1);
        assert!(matches!(r, Err(DepthError::GuardExceeded { .. })));
    }

    #[test]
    fn median_breakdown_examples() {
        let data = line(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let median = |d: &Dataset| {
            Ok(vec![sample_median(
                &d.rows().map(|r| r[0]).collect::<Vec<_>>(),
            )?])
        };
        let pool = ReplacementPool::from_values(&[-1e6, 0.0, 1e6]).unwrap();
        assert_eq!(
            brute_force_a_eta(median, &data, 0.5, &pool, 2).unwrap(),
            BreakdownSearch::Exactly(1)
        );
        let bounded = ReplacementPool::from_values(&[0.0, 4.0]).unwrap();
        assert_eq!(
            brute_force_a_eta(median, &data, 1e6 + 1.0, &bounded, 2).unwrap(),
            BreakdownSearch::Exceeds(2)
        );
        assert_eq!(
            brute_force_a_eta(|_| Ok(vec![1.0]), &data, 1e-9, &pool, 3).unwrap(),
            BreakdownSearch::Exceeds(3)
        );
    }

    #[test]
    fn exact_planar_depth_examples() {
        let tri = Dataset::new(vec![vec![0.0, 0.0], vec![4.0, 0.0], vec![0.0, 4.0]]).unwrap();
        assert!((exact_halfspace_2d(&[1.0, 1.0], &tri).unwrap().value - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(exact_halfspace_2d(&[10.0, 10.0], &tri).unwrap().value, 0.0);
        let same = Dataset::new(vec![vec![2.0, 2.0]; 4]).unwrap();
        assert_eq!(exact_halfspace_2d(&[2.0, 2.0], &same).unwrap().value, 1.0);
        assert!(exact_halfspace_2d(&[0.0], &line(&[1.0])).is_err());
    }

    #[test]
    fn identical_pairs_audit_near_zero() {
        let data = line(&[0.0, 1.0, 2.0]);
        let audit = dp_ratio_audit(
            |_| Ok(|rng: &mut RandomSource| Some(rng.standard_laplace())),
            &[(data.clone(), data)],
            200_000,
            20,
            1,
        )
        .unwrap();
        assert!(audit.max_log_ratio < 0.15, "{audit:?}");
    }

    #[test]
    fn refusals_get_their_own_bin() {
        let a = line(&[0.0]);
        let b = line(&[1.0]);
        let audit = dp_ratio_audit(
            |d: &Dataset| {
                let refuse = d.row(0)[0] > 0.5;
                Ok(move |rng: &mut RandomSource| {
                    if refuse && rng.unit_uniform() < 0.5 {
                        None
                    } else {
                        Some(rng.unit_uniform())
                    }
                })
            },
            &[(a, b)],
            50_000,
            10,
            3,
        )
        .unwrap();
        assert_eq!(audit.worst_bin, 10);
        assert!(audit.max_log_ratio > 5.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn sampled_halfspace_never_below_exact(
            rows in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 2), 3..25),
            x in prop::collection::vec(-2.0f64..2.0, 2),
            seed in any::<u64>(),
        ) {
            let data = Dataset::new(rows).unwrap();
            let dirs = sample_directions(64, 2, seed).unwrap();
            let exact = exact_halfspace_2d(&x, &data).unwrap().value;
            let sampled = halfspace_depth(&x, &data, &dirs).unwrap().value;
            prop_assert!(sampled >= exact - 1e-12);
        }

        #[test]
        fn breakdown_search_monotone_in_eta(
            values in prop::collection::vec(-3i32..3, 3..6),
            eta_small in 0.1f64..2.0,
            factor in 1.0f64..4.0,
        ) {
            let data = line(&values.iter().map(|&v| f64::from(v)).collect::<Vec<_>>());
            let median = |d: &Dataset| Ok(vec![sample_median(&d.rows().map(|r| r[0]).collect::<Vec<_>>())?]);
            let pool = ReplacementPool::from_values(&[-1e3, -1.0, 0.0, 2.0, 1e3]).unwrap();
            let rank = |b: BreakdownSearch| match b {
                BreakdownSearch::Exactly(k) => k,
                BreakdownSearch::Exceeds(k) => k + 1,
            };
            let a_small = rank(brute_force_a_eta(median, &data, eta_small, &pool, 2).unwrap());
            let a_large = rank(brute_force_a_eta(median, &data, eta_small * factor, &pool, 2).unwrap());
            prop_assert!(a_large >= a_small);
        }
    }
}
