//! Seeded Monte Carlo sweeps producing tidy rows
//! `experiment,n,epsilon,seed,metric,value`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use crate::data::{
    sample_directions, Dataset, NoiseSource, NoiseVariant, PrivacyParams, RandomSource,
};
use crate::depth::{
    depth_vector, halfspace_depth, DepthKind, ProjectionProfile, Scale, SimplicialMode,
};
use crate::error::{DepthError, Result};
use crate::estimators::{
    default_eta, private_depth_point, private_projection_depth, private_projection_median_ptr,
    rank_sum_permutation_test, DepthSpec, RankVector, TruncatedOutlyingnessSpec,
};
use crate::mechanisms::{laplace_mechanism, BudgetLedger, CandidateGrid};
use crate::oracle::dp_ratio_audit;
use crate::sensitivity::{global_sensitivity, vector_global_sensitivity, Norm};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TidyRow {
    pub experiment: String,
    pub n: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub metric: String,
    pub value: f64,
}

impl TidyRow {
    fn new(
        experiment: Experiment,
        n: usize,
        epsilon: f64,
        seed: u64,
        metric: &str,
        value: f64,
    ) -> Self {
        Self {
            experiment: experiment.to_string(),
            n,
            epsilon,
            seed,
            metric: metric.to_string(),
            value,
        }
    }
}

pub fn write_tidy_csv<W: Write>(rows: &[TidyRow], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    for row in rows {
        out.serialize(row)
            .map_err(|e| DepthError::Io(e.to_string()))?;
    }
    out.flush().map_err(|e| DepthError::Io(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Consistency,
    Audit,
    Power,
    PtrDepth,
    PtrMedian,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::Consistency,
        Experiment::Audit,
        Experiment::Power,
        Experiment::PtrDepth,
        Experiment::PtrMedian,
    ];
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Experiment::Consistency => "consistency",
            Experiment::Audit => "audit",
            Experiment::Power => "power",
            Experiment::PtrDepth => "ptr-depth",
            Experiment::PtrMedian => "ptr-median",
        })
    }
}

impl FromStr for Experiment {
    type Err = DepthError;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.to_string() == s)
            .ok_or_else(|| DepthError::invalid(format!("unknown experiment {s:?}")))
    }
}

/// `n` rows of i.i.d. standard normal coordinates times `scale`.
pub fn gaussian_sample(n: usize, d: usize, scale: f64, rng: &mut RandomSource) -> Result<Dataset> {
    Dataset::new(
        (0..n)
            .map(|_| (0..d).map(|_| scale * rng.standard_gaussian()).collect())
            .collect(),
    )
}

/// Private halfspace depth of the origin for bivariate standard normal
/// samples; metric `abs_error = |D~ - 1/2|`, one row per `(n, rep)`.
pub fn consistency_sweep(
    ns: &[usize],
    epsilon: f64,
    reps: usize,
    directions: usize,
    seed: u64,
) -> Result<Vec<TidyRow>> {
    let params = PrivacyParams::laplace(epsilon)?;
    let mut rows = Vec::with_capacity(ns.len() * reps);
    for &n in ns {
        for rep in 0..reps as u64 {
            let s = seed.wrapping_add(rep);
            let data = gaussian_sample(n, 2, 1.0, &mut RandomSource::derive(s, "data"))?;
            let dirs = sample_directions(directions, 2, s)?;
            let report = private_depth_point(
                &[0.0, 0.0],
                &data,
                DepthSpec::new(DepthKind::Halfspace, &dirs),
                &params,
                &mut BudgetLedger::new(),
                &mut RandomSource::derive(s, "noise"),
            )?;
            let value = report.value().expect("additive mechanisms always release");
            rows.push(TidyRow::new(
                Experiment::Consistency,
                n,
                epsilon,
                s,
                "abs_error",
                (value - 0.5).abs(),
            ));
        }
    }
    Ok(rows)
}

/// Adjacent one-dimensional pairs for auditing private halfspace depth at the
/// origin: the neighbor moves the smallest row to the far right, which
/// changes the depth by exactly `1/n` unless the two sides tie.
pub fn audit_pairs(n: usize, count: usize, seed: u64) -> Result<Vec<(Dataset, Dataset)>> {
    (0..count as u64)
        .map(|p| {
            let data = gaussian_sample(
                n,
                1,
                1.0,
                &mut RandomSource::derive(seed.wrapping_add(p), "audit-data"),
            )?;
            let lowest = (0..n)
                .min_by(|&a, &b| data.row(a)[0].total_cmp(&data.row(b)[0]))
                .unwrap_or(0);
            let neighbor = data.with_row_replaced(lowest, &[1e3])?;
            Ok((data, neighbor))
        })
        .collect()
}

/// Empirical privacy-loss audit of the Laplace mechanism on halfspace depth
/// at the origin; one `max_log_ratio` row per pair. `noise_factor < 1`
/// shrinks the noise below the calibrated level (a negative control).
pub fn audit_experiment(
    n: usize,
    epsilon: f64,
    pairs: usize,
    samples: usize,
    bins: usize,
    noise_factor: f64,
    seed: u64,
) -> Result<Vec<TidyRow>> {
    let dirs = sample_directions(2, 1, 0)?;
    let gs = global_sensitivity(DepthKind::Halfspace, n, 1, Norm::L1)?;
    let scale = noise_factor * gs.value / epsilon;
    let pairs = audit_pairs(n, pairs, seed)?;
    pairs
        .iter()
        .enumerate()
        .map(|(i, pair)| {
            let audit = dp_ratio_audit(
                |data: &Dataset| {
                    let raw = halfspace_depth(&[0.0], data, &dirs)?.value;
                    Ok(move |rng: &mut RandomSource| Some(raw + scale * rng.standard_laplace()))
                },
                std::slice::from_ref(pair),
                samples,
                bins,
                seed.wrapping_add(i as u64),
            )?;
            Ok(TidyRow::new(
                Experiment::Audit,
                n,
                epsilon,
                i as u64,
                "max_log_ratio",
                audit.max_log_ratio,
            ))
        })
        .collect()
}

/// Rank-sum scale test power. Group A is bivariate standard normal, group B
/// the same scaled by `inflation`. Per rep: `reject_private`,
/// `reject_nonprivate` (0/1 at level `alpha`) and `p_private`.
#[allow(clippy::too_many_arguments)]
pub fn power_experiment(
    n1: usize,
    n2: usize,
    inflation: f64,
    epsilon: f64,
    kind: DepthKind,
    reps: usize,
    permutations: usize,
    alpha: f64,
    directions: usize,
    seed: u64,
) -> Result<Vec<TidyRow>> {
    let params = PrivacyParams::laplace(epsilon)?;
    let n = n1 + n2;
    let gs = vector_global_sensitivity(kind, n, 2, Norm::L1)?;
    let mut rows = Vec::with_capacity(3 * reps);
    for rep in 0..reps as u64 {
        let s = seed.wrapping_add(rep);
        let mut data_rng = RandomSource::derive(s, "data");
        let a = gaussian_sample(n1, 2, 1.0, &mut data_rng)?;
        let b = gaussian_sample(n2, 2, inflation, &mut data_rng)?;
        let pooled = a.concat(&b)?;
        let dirs = sample_directions(directions, 2, s)?;
        let exact = depth_vector(&pooled, kind, &dirs, &SimplicialMode::default())?;
        let released = laplace_mechanism(
            &exact.values,
            &gs,
            params.epsilon,
            &mut RandomSource::derive(s, "noise"),
        )?;
        let released = released
            .payload
            .values()
            .expect("laplace always releases")
            .to_vec();
        let mut perm = RandomSource::derive(s, "permutation");
        let (_, _, p_private) = rank_sum_permutation_test(
            &RankVector::from_released(&released),
            n1,
            permutations,
            &mut perm,
        );
        let (_, _, p_plain) = rank_sum_permutation_test(
            &RankVector::from_released(&exact.values),
            n1,
            permutations,
            &mut perm,
        );
        let reject = |p: f64| if p <= alpha { 1.0 } else { 0.0 };
        rows.push(TidyRow::new(
            Experiment::Power,
            n,
            epsilon,
            s,
            "reject_private",
            reject(p_private),
        ));
        rows.push(TidyRow::new(
            Experiment::Power,
            n,
            epsilon,
            s,
            "reject_nonprivate",
            reject(p_plain),
        ));
        rows.push(TidyRow::new(
            Experiment::Power,
            n,
            epsilon,
            s,
            "p_private",
            p_private,
        ));
    }
    Ok(rows)
}

/// PTR projection depth of the origin for bivariate standard normal data.
/// Per rep: `bottom` (0/1) and, on release, `depth` and `abs_error` against
/// `reference`.
#[allow(clippy::too_many_arguments)]
pub fn ptr_depth_experiment(
    n: usize,
    params: &PrivacyParams,
    eta: f64,
    directions: usize,
    reference: f64,
    reps: usize,
    seed: u64,
) -> Result<Vec<TidyRow>> {
    let mut rows = Vec::new();
    for rep in 0..reps as u64 {
        let s = seed.wrapping_add(rep);
        let data = gaussian_sample(n, 2, 1.0, &mut RandomSource::derive(s, "data"))?;
        let dirs = sample_directions(directions, 2, s)?;
        let report = private_projection_depth(
            &[0.0, 0.0],
            &data,
            &dirs,
            Scale::Iqr,
            eta,
            params,
            &mut BudgetLedger::new(),
            &mut RandomSource::derive(s, "noise"),
        )?;
        let eps = params.epsilon;
        match report.value() {
            Some(v) => {
                rows.push(TidyRow::new(Experiment::PtrDepth, n, eps, s, "bottom", 0.0));
                rows.push(TidyRow::new(Experiment::PtrDepth, n, eps, s, "depth", v));
                rows.push(TidyRow::new(
                    Experiment::PtrDepth,
                    n,
                    eps,
                    s,
                    "abs_error",
                    (v - reference).abs(),
                ));
            }
            None => rows.push(TidyRow::new(Experiment::PtrDepth, n, eps, s, "bottom", 1.0)),
        }
    }
    Ok(rows)
}

/// Projection depth of the origin for a large bivariate standard normal
/// sample, used as the population reference.
pub fn reference_projection_depth(n: usize, directions: usize, seed: u64) -> Result<f64> {
    let data = gaussian_sample(n, 2, 1.0, &mut RandomSource::derive(seed, "reference"))?;
    let dirs = sample_directions(directions, 2, seed)?;
    let o = ProjectionProfile::new(&data, &dirs, Scale::Iqr)?.outlyingness(&[0.0, 0.0]);
    Ok(1.0 / (1.0 + o))
}

/// PTR + exponential projection median for bivariate standard normal data
/// over a regular grid on `[-half_width, half_width]^2`. Per rep: `bottom`
/// and, on release, `distance` from the origin.
#[allow(clippy::too_many_arguments)]
pub fn ptr_median_experiment(
    n: usize,
    params: &PrivacyParams,
    eta: f64,
    m_n: f64,
    half_width: f64,
    points_per_axis: usize,
    directions: usize,
    reps: usize,
    seed: u64,
) -> Result<Vec<TidyRow>> {
    let grid = CandidateGrid::regular(&[-half_width; 2], &[half_width; 2], points_per_axis)?;
    let mut rows = Vec::new();
    for rep in 0..reps as u64 {
        let s = seed.wrapping_add(rep);
        let data = gaussian_sample(n, 2, 1.0, &mut RandomSource::derive(s, "data"))?;
        let trunc =
            TruncatedOutlyingnessSpec::new(m_n, Scale::Iqr, sample_directions(directions, 2, s)?)?;
        let report = private_projection_median_ptr(
            &data,
            &trunc,
            &grid,
            eta,
            params,
            &mut BudgetLedger::new(),
            &mut RandomSource::derive(s, "noise"),
        )?;
        let eps = params.epsilon;
        match report.payload.values() {
            Some(v) => {
                rows.push(TidyRow::new(
                    Experiment::PtrMedian,
                    n,
                    eps,
                    s,
                    "bottom",
                    0.0,
                ));
                rows.push(TidyRow::new(
                    Experiment::PtrMedian,
                    n,
                    eps,
                    s,
                    "distance",
                    v.iter().map(|c| c * c).sum::<f64>().sqrt(),
                ));
            }
            None => rows.push(TidyRow::new(
                Experiment::PtrMedian,
                n,
                eps,
                s,
                "bottom",
                1.0,
            )),
        }
    }
    Ok(rows)
}

/// Standard configuration of each experiment, scaled down by `reps`.
pub fn run_standard(experiment: Experiment, reps: usize, seed: u64) -> Result<Vec<TidyRow>> {
    match experiment {
        Experiment::Consistency => consistency_sweep(&[200, 1000, 5000], 1.0, reps, 200, seed),
        Experiment::Audit => audit_experiment(20, 1.0, reps, 200_000, 50, 1.0, seed),
        Experiment::Power => {
            power_experiment(50, 50, 3.0, 2.0, DepthKind::Irw, reps, 500, 0.05, 100, seed)
        }
        Experiment::PtrDepth => {
            let params = PrivacyParams::new(1.0, 1e-4, NoiseVariant::Laplace)?;
            let reference = reference_projection_depth(100_000, 200, seed)?;
            ptr_depth_experiment(2000, &params, default_eta(2000), 200, reference, reps, seed)
        }
        Experiment::PtrMedian => {
            let params = PrivacyParams::new(1.0, 1e-4, NoiseVariant::Laplace)?;
            ptr_median_experiment(
                2000,
                &params,
                default_eta(2000),
                10.0,
                2.0,
                21,
                100,
                reps,
                seed,
            )
        }
    }
}

/// Mean of `metric` over the rows that carry it.
pub fn metric_mean(rows: &[TidyRow], metric: &str) -> Option<f64> {
    let values: Vec<f64> = rows
        .iter()
        .filter(|r| r.metric == metric)
        .map(|r| r.value)
        .collect();
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::FixedNoise;

    #[test]
    fn experiment_names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.to_string().parse::<Experiment>().unwrap(), e);
        }
        assert!("nope".parse::<Experiment>().is_err());
    }

    #[test]
    fn consistency_shape() {
        let rows = consistency_sweep(&[50, 100], 1.0, 3, 16, 7).unwrap();
        assert_eq!(rows.len(), 6);
        assert!(rows
            .iter()
            .all(|r| r.metric == "abs_error" && r.value >= 0.0));
    }

    #[test]
    fn audit_pairs_shift_depth_by_one_over_n() {
        let dirs = sample_directions(2, 1, 0).unwrap();
        for (a, b) in audit_pairs(20, 5, 1).unwrap() {
            let da = halfspace_depth(&[0.0], &a, &dirs).unwrap().value;
            let db = halfspace_depth(&[0.0], &b, &dirs).unwrap().value;
            assert!((da - db).abs() <= 0.05 + 1e-15);
        }
    }

    #[test]
    fn tidy_csv_header() {
        let rows = vec![TidyRow::new(
            Experiment::Power,
            10,
            2.0,
            3,
            "p_private",
            0.5,
        )];
        let mut out = Vec::new();
        write_tidy_csv(&rows, &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "experiment,n,epsilon,seed,metric,value\npower,10,2.0,3,p_private,0.5\n"
        );
    }

    #[test]
    fn zero_noise_depth_is_noiseless() {
        let data = gaussian_sample(30, 2, 1.0, &mut RandomSource::new(2)).unwrap();
        let dirs = sample_directions(32, 2, 2).unwrap();
        let r = private_depth_point(
            &[0.0, 0.0],
            &data,
            DepthSpec::new(DepthKind::Halfspace, &dirs),
            &PrivacyParams::laplace(1.0).unwrap(),
            &mut BudgetLedger::new(),
            &mut FixedNoise::zero(),
        )
        .unwrap();
        assert_eq!(
            r.value(),
            Some(halfspace_depth(&[0.0, 0.0], &data, &dirs).unwrap().value)
        );
    }
}
