//! Private depth values, depth medians and a depth-rank scale test.
//!
//! Each call spends budget once and appends exactly one entry to the caller's
//! [`BudgetLedger`], including calls that end in a PTR refusal.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::data::{Dataset, DirectionSet, NoiseSource, NoiseVariant, PrivacyParams};
use crate::depth::{depth, depth_vector, DepthKind, ProjectionProfile, Scale, SimplicialMode};
use crate::error::{DepthError, Result};
use crate::mechanisms::{
    draw_index, exponential_probabilities, gaussian_mechanism, laplace_mechanism, ptr,
    ptr_exponential, Audit, BudgetLedger, CandidateGrid, GridSpec, LedgerEntry, MechanismOutcome,
    Payload, Prior, PrivacyCost,
};
use crate::sensitivity::{
    global_sensitivity, vector_global_sensitivity, BreakdownCertifier, Norm, SensitivityBound,
};

/// Depth kind together with the direction sample and simplicial evaluation
/// mode it is computed with.
#[derive(Debug, Clone, Copy)]
pub struct DepthSpec<'a> {
    pub kind: DepthKind,
    pub dirs: &'a DirectionSet,
    pub simplicial: SimplicialMode,
}

impl<'a> DepthSpec<'a> {
    pub fn new(kind: DepthKind, dirs: &'a DirectionSet) -> Self {
        Self {
            kind,
            dirs,
            simplicial: SimplicialMode::default(),
        }
    }

    pub fn with_simplicial(mut self, mode: SimplicialMode) -> Self {
        self.simplicial = mode;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportParams {
    pub epsilon: f64,
    pub delta: f64,
    pub variant: NoiseVariant,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sensitivity: Option<f64>,
}

/// Result of one private estimator call.
///
/// `payload` is the mechanism output exactly as released. `post_processed`
/// holds values derived from the payload alone (clamped to `[0, 1]`).
/// `audit` is computed from the raw data and is not serialized.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrivateDepthReport {
    pub estimator: &'static str,
    pub kind: String,
    pub params: ReportParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    pub payload: Payload,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub post_processed: Option<Vec<f64>>,
    pub ledger_entry: LedgerEntry,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_spec: Option<GridSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip)]
    pub audit: Audit,
}

impl PrivateDepthReport {
    pub fn is_bottom(&self) -> bool {
        self.payload.is_bottom()
    }

    /// First released value, if any.
    pub fn value(&self) -> Option<f64> {
        self.payload.values().and_then(|v| v.first().copied())
    }
}

/// Clamp released depths into `[0, 1]`.
pub fn clamp_unit(released: &[f64]) -> Vec<f64> {
    released.iter().map(|v| v.clamp(0.0, 1.0)).collect()
}

/// `1/(1 + max(O~, 0))` from a released outlyingness.
pub fn clamped_projection_depth(released_outlyingness: f64) -> f64 {
    1.0 / (1.0 + released_outlyingness.max(0.0))
}

/// Default PTR radius `c log(n) / n^(3/4 - r)` with `c = 1`, `r = 0.1`.
pub fn default_eta(n: usize) -> f64 {
    default_eta_with(n, 1.0, 0.1)
}

pub fn default_eta_with(n: usize, c: f64, r: f64) -> f64 {
    let n = n as f64;
    c * n.ln() / n.powf(0.75 - r)
}

fn point_mechanism(
    values: &[f64],
    gs: &SensitivityBound,
    params: &PrivacyParams,
    noise: &mut impl NoiseSource,
) -> Result<MechanismOutcome> {
    match params.variant {
        NoiseVariant::Laplace => laplace_mechanism(values, gs, params.epsilon, noise),
        NoiseVariant::Gaussian => {
            gaussian_mechanism(values, gs, params.epsilon, params.delta, noise)
        }
    }
}

fn record(
    ledger: &mut BudgetLedger,
    estimator: &str,
    outcome: &MechanismOutcome,
    variant: NoiseVariant,
) -> LedgerEntry {
    let entry = LedgerEntry::new(estimator, outcome.cost, Some(variant));
    ledger.record(entry.clone());
    entry
}

fn reject_projection(kind: DepthKind, operation: &'static str) -> Result<()> {
    if let DepthKind::Projection(_) = kind {
        return Err(DepthError::UnsupportedKind {
            kind: kind.to_string(),
            operation,
        });
    }
    Ok(())
}

/// Depth of a fixed point plus Laplace (`epsilon`-DP) or Gaussian
/// (`(epsilon, delta)`-DP) noise at the pointwise global sensitivity.
/// Projection depth has no useful global bound; use
/// [`private_projection_depth`].
pub fn private_depth_point(
    x: &[f64],
    data: &Dataset,
    spec: DepthSpec<'_>,
    params: &PrivacyParams,
    ledger: &mut BudgetLedger,
    noise: &mut impl NoiseSource,
) -> Result<PrivateDepthReport> {
    reject_projection(
        spec.kind,
        "private_depth_point (use private_projection_depth)",
    )?;
    let gs = global_sensitivity(spec.kind, data.n(), data.d(), Norm::L1)?;
    let raw = depth(x, data, spec.kind, spec.dirs, &spec.simplicial)?;
    let outcome = point_mechanism(&[raw.value], &gs, params, noise)?;
    let ledger_entry = record(ledger, "depth-point", &outcome, params.variant);
    let post = outcome.payload.values().map(clamp_unit);
    Ok(PrivateDepthReport {
        estimator: "depth-point",
        kind: spec.kind.to_string(),
        params: ReportParams {
            epsilon: params.epsilon,
            delta: params.delta,
            variant: params.variant,
            eta: None,
            sensitivity: Some(gs.value),
        },
        points: Some(vec![x.to_vec()]),
        payload: outcome.payload,
        post_processed: post,
        ledger_entry,
        grid_spec: None,
        note: None,
        audit: outcome.audit,
    })
}

/// Depths of all sample points with i.i.d. noise at the vector sensitivity:
/// the L1 bound for Laplace noise, the L2 bound for Gaussian noise.
pub fn private_depth_vector(
    data: &Dataset,
    spec: DepthSpec<'_>,
    params: &PrivacyParams,
    ledger: &mut BudgetLedger,
    noise: &mut impl NoiseSource,
) -> Result<PrivateDepthReport> {
    reject_projection(spec.kind, "private_depth_vector")?;
    let norm = match params.variant {
        NoiseVariant::Laplace => Norm::L1,
        NoiseVariant::Gaussian => Norm::L2,
    };
    let gs = vector_global_sensitivity(spec.kind, data.n(), data.d(), norm)?;
    let raw = depth_vector(data, spec.kind, spec.dirs, &spec.simplicial)?;
    let outcome = point_mechanism(&raw.values, &gs, params, noise)?;
    let ledger_entry = record(ledger, "depth-vector", &outcome, params.variant);
    let post = outcome.payload.values().map(clamp_unit);
    Ok(PrivateDepthReport {
        estimator: "depth-vector",
        kind: spec.kind.to_string(),
        params: ReportParams {
            epsilon: params.epsilon,
            delta: params.delta,
            variant: params.variant,
            eta: None,
            sensitivity: Some(gs.value),
        },
        points: None,
        payload: outcome.payload,
        post_processed: post,
        ledger_entry,
        grid_spec: None,
        note: Some("aggregate noise grows like sqrt(n) and dominates the sampling error".into()),
        audit: outcome.audit,
    })
}

/// Lower bound on the truncated breakdown point for PTR: `floor(k*) + 1`
/// when `certify(k*)` passes, otherwise 1. Any `k* < 1` passes trivially.
fn breakdown_bound(
    k_star: f64,
    n: usize,
    certify: impl FnOnce(f64) -> Result<bool>,
) -> Result<f64> {
    if k_star < 1.0 {
        return Ok(1.0);
    }
    if k_star >= n as f64 / 2.0 {
        return Ok(1.0);
    }
    Ok(if certify(k_star)? {
        k_star.floor() + 1.0
    } else {
        1.0
    })
}

fn require_iqr(scale: Scale, operation: &'static str) -> Result<()> {
    if scale != Scale::Iqr {
        return Err(DepthError::UnsupportedKind {
            kind: DepthKind::Projection(scale).to_string(),
            operation,
        });
    }
    Ok(())
}

/// Projection depth through PTR on the iqr-scaled outlyingness: when the
/// test passes, `O~ = O + eta a V / epsilon` is released together with
/// `1/(1 + O~)`.
///
/// The payload is `[1/(1 + O~), O~]`; the post-processed field is
/// `1/(1 + max(O~, 0))`.
#[allow(clippy::too_many_arguments)]
pub fn private_projection_depth(
    x: &[f64],
    data: &Dataset,
    dirs: &DirectionSet,
    scale: Scale,
    eta: f64,
    params: &PrivacyParams,
    ledger: &mut BudgetLedger,
    noise: &mut impl NoiseSource,
) -> Result<PrivateDepthReport> {
    require_iqr(scale, "private_projection_depth")?;
    if x.len() != data.d() {
        return Err(DepthError::DimensionMismatch {
            expected: data.d(),
            got: x.len(),
        });
    }
    let certifier = BreakdownCertifier::new(data, dirs)?;
    let o = ProjectionProfile::new(data, dirs, scale)?.outlyingness(x);
    let mut certificate_error = None;
    let outcome = ptr(
        |k_star| {
            breakdown_bound(k_star, data.n(), |k| certifier.holds(x, eta, k)).unwrap_or_else(|e| {
                certificate_error = Some(e);
                1.0
            })
        },
        &[o],
        eta,
        params,
        noise,
    )?;
    if let Some(e) = certificate_error {
        return Err(e);
    }
    let ledger_entry = record(ledger, "projection-depth-ptr", &outcome, params.variant);
    let (payload, post) = match &outcome.payload {
        Payload::Released(v) => {
            let o_tilde = v[0];
            (
                Payload::Released(vec![1.0 / (1.0 + o_tilde), o_tilde]),
                Some(vec![clamped_projection_depth(o_tilde)]),
            )
        }
        Payload::Bottom => (Payload::Bottom, None),
    };
    Ok(PrivateDepthReport {
        estimator: "projection-depth-ptr",
        kind: DepthKind::Projection(scale).to_string(),
        params: ReportParams {
            epsilon: params.epsilon,
            delta: params.delta,
            variant: params.variant,
            eta: Some(eta),
            sensitivity: None,
        },
        points: Some(vec![x.to_vec()]),
        payload,
        post_processed: post,
        ledger_entry,
        grid_spec: None,
        note: None,
        audit: outcome.audit,
    })
}

/// `C` in the depth sensitivity `C/n`.
fn depth_constant(kind: DepthKind, d: usize) -> Result<f64> {
    match kind {
        DepthKind::Halfspace | DepthKind::Irw => Ok(1.0),
        DepthKind::Simplicial => Ok((d + 1) as f64),
        DepthKind::Projection(_) => Err(DepthError::UnsupportedKind {
            kind: kind.to_string(),
            operation: "private_depth_median_exp",
        }),
    }
}

fn check_grid_dim(grid: &CandidateGrid, d: usize) -> Result<()> {
    if grid.dim() != d {
        return Err(DepthError::DimensionMismatch {
            expected: d,
            got: grid.dim(),
        });
    }
    Ok(())
}

/// Selection probabilities of the depth median over `grid`:
/// `prior(v) exp(n epsilon D(v) / (2 C))`.
pub fn depth_median_probabilities(
    data: &Dataset,
    spec: DepthSpec<'_>,
    grid: &CandidateGrid,
    prior: &Prior,
    epsilon: f64,
) -> Result<Vec<f64>> {
    let c = depth_constant(spec.kind, data.d())?;
    check_grid_dim(grid, data.d())?;
    let weights = prior.weights(grid)?;
    let utilities = grid
        .points()
        .iter()
        .map(|v| depth(v, data, spec.kind, spec.dirs, &spec.simplicial).map(|d| d.value))
        .collect::<Result<Vec<_>>>()?;
    exponential_probabilities(&utilities, c / data.n() as f64, epsilon, &weights, false)
}

/// Exponential-mechanism depth median on a data-independent grid,
/// `epsilon`-DP.
pub fn private_depth_median_exp(
    data: &Dataset,
    spec: DepthSpec<'_>,
    grid: &CandidateGrid,
    prior: &Prior,
    epsilon: f64,
    ledger: &mut BudgetLedger,
    noise: &mut impl NoiseSource,
) -> Result<PrivateDepthReport> {
    let probabilities = depth_median_probabilities(data, spec, grid, prior, epsilon)?;
    let i = draw_index(&probabilities, noise);
    let outcome = MechanismOutcome {
        payload: Payload::Released(grid.points()[i].clone()),
        audit: Audit {
            selected_index: Some(i),
            grid_resolution: grid.resolution(),
            ..Audit::default()
        },
        cost: PrivacyCost {
            epsilon,
            delta: 0.0,
        },
    };
    let entry = LedgerEntry::new("depth-median-exp", outcome.cost, None);
    ledger.record(entry.clone());
    Ok(PrivateDepthReport {
        estimator: "depth-median-exp",
        kind: spec.kind.to_string(),
        params: ReportParams {
            epsilon,
            delta: 0.0,
            variant: NoiseVariant::Laplace,
            eta: None,
            sensitivity: Some(depth_constant(spec.kind, data.d())? / data.n() as f64),
        },
        points: None,
        payload: outcome.payload,
        post_processed: None,
        ledger_entry: entry,
        grid_spec: grid.spec().cloned(),
        note: None,
        audit: outcome.audit,
    })
}

/// Projection outlyingness set to `+inf` outside the ball of radius `m_n`.
/// Built without reference to any dataset.
#[derive(Debug, Clone)]
pub struct TruncatedOutlyingnessSpec {
    m_n: f64,
    scale: Scale,
    dirs: DirectionSet,
}

impl TruncatedOutlyingnessSpec {
    pub fn new(m_n: f64, scale: Scale, dirs: DirectionSet) -> Result<Self> {
        if !(m_n > 0.0 && m_n.is_finite()) {
            return Err(DepthError::invalid(format!(
                "truncation radius must be positive, got {m_n}"
            )));
        }
        Ok(Self { m_n, scale, dirs })
    }

    pub fn radius(&self) -> f64 {
        self.m_n
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn dirs(&self) -> &DirectionSet {
        &self.dirs
    }

    pub fn inside(&self, v: &[f64]) -> bool {
        v.iter().map(|c| c * c).sum::<f64>().sqrt() < self.m_n
    }

    /// Truncated outlyingness of every candidate.
    pub fn costs(&self, profile: &ProjectionProfile, grid: &CandidateGrid) -> Vec<f64> {
        grid.points()
            .iter()
            .map(|v| {
                if self.inside(v) {
                    profile.outlyingness(v)
                } else {
                    f64::INFINITY
                }
            })
            .collect()
    }
}

/// PTR + exponential-mechanism projection median. The breakdown test must
/// certify every grid point inside the truncation ball; the draw has weights
/// `exp(-O(v) epsilon / (2 eta))`. Laplace: `(2 epsilon, delta)`, Gaussian:
/// `(2 epsilon, 2 delta)`.
pub fn private_projection_median_ptr(
    data: &Dataset,
    trunc: &TruncatedOutlyingnessSpec,
    grid: &CandidateGrid,
    eta: f64,
    params: &PrivacyParams,
    ledger: &mut BudgetLedger,
    noise: &mut impl NoiseSource,
) -> Result<PrivateDepthReport> {
    require_iqr(trunc.scale, "private_projection_median_ptr")?;
    let inside: Vec<&Vec<f64>> = grid.points().iter().filter(|v| trunc.inside(v)).collect();
    if inside.is_empty() {
        return Err(DepthError::AllWeightsZero);
    }
    check_grid_dim(grid, data.d())?;
    let certifier = BreakdownCertifier::new(data, &trunc.dirs)?;
    let mut certificate_error = None;
    let outcome = ptr_exponential(
        |k_star| {
            breakdown_bound(k_star, data.n(), |k| {
                for v in &inside {
                    if !certifier.holds(v, eta, k)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            })
            .unwrap_or_else(|e| {
                certificate_error = Some(e);
                1.0
            })
        },
        |g| {
            let profile = ProjectionProfile::new(data, &trunc.dirs, trunc.scale)?;
            Ok(trunc.costs(&profile, g))
        },
        grid,
        eta,
        params,
        noise,
    )?;
    if let Some(e) = certificate_error {
        return Err(e);
    }
    let ledger_entry = record(ledger, "projection-median-ptr", &outcome, params.variant);
    Ok(PrivateDepthReport {
        estimator: "projection-median-ptr",
        kind: DepthKind::Projection(trunc.scale).to_string(),
        params: ReportParams {
            epsilon: params.epsilon,
            delta: params.delta,
            variant: params.variant,
            eta: Some(eta),
            sensitivity: None,
        },
        points: None,
        payload: outcome.payload,
        post_processed: None,
        ledger_entry,
        grid_spec: grid.spec().cloned(),
        note: None,
        audit: outcome.audit,
    })
}

/// Ranks `#{j : D_j <= D_i}` of released depths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankVector(Vec<usize>);

impl RankVector {
    /// Ranks from released values only.
    pub fn from_released(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self(
            values
                .iter()
                .map(|&v| sorted.partition_point(|&s| s <= v))
                .collect(),
        )
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankSumReport {
    /// Sum of the ranks of group A in the pooled sample.
    pub statistic: f64,
    /// Mean of the statistic under random relabeling.
    pub null_mean: f64,
    pub p_value: f64,
    pub permutations: usize,
    pub n1: usize,
    pub n2: usize,
    pub ranks: RankVector,
    pub depth_report: PrivateDepthReport,
}

/// Two-sided Monte Carlo permutation p-value of the rank sum over the first
/// `n1` positions. Uses only the ranks, so it is post-processing.
pub fn rank_sum_permutation_test(
    ranks: &RankVector,
    n1: usize,
    permutations: usize,
    rng: &mut impl Rng,
) -> (f64, f64, f64) {
    let r: Vec<f64> = ranks.as_slice().iter().map(|&v| v as f64).collect();
    let statistic: f64 = r[..n1].iter().sum();
    let null_mean = n1 as f64 * r.iter().sum::<f64>() / r.len() as f64;
    let observed = (statistic - null_mean).abs();
    let mut shuffled = r.clone();
    let extreme = (0..permutations)
        .filter(|_| {
            shuffled.shuffle(rng);
            let t: f64 = shuffled[..n1].iter().sum();
            (t - null_mean).abs() >= observed - 1e-9
        })
        .count();
    let p_value = (1 + extreme) as f64 / (1 + permutations) as f64;
    (statistic, null_mean, p_value)
}

/// Private depth-rank test for a difference in scale between two groups:
/// privatize the pooled depth vector, rank the released values, and compare
/// the rank sum of group A with its permutation distribution.
#[allow(clippy::too_many_arguments)]
pub fn private_rank_sum_scale_test(
    group_a: &Dataset,
    group_b: &Dataset,
    spec: DepthSpec<'_>,
    params: &PrivacyParams,
    permutations: usize,
    ledger: &mut BudgetLedger,
    noise: &mut impl NoiseSource,
    perm_rng: &mut impl Rng,
) -> Result<RankSumReport> {
    if group_a.n() < 2 || group_b.n() < 2 {
        return Err(DepthError::invalid(format!(
            "each group needs at least 2 rows, got {} and {}",
            group_a.n(),
            group_b.n()
        )));
    }
    if permutations == 0 {
        return Err(DepthError::invalid("permutations must be positive"));
    }
    let pooled = group_a.concat(group_b)?;
    let depth_report = private_depth_vector(&pooled, spec, params, ledger, noise)?;
    let released = depth_report
        .payload
        .values()
        .expect("additive mechanisms always release");
    let ranks = RankVector::from_released(released);
    let (statistic, null_mean, p_value) =
        rank_sum_permutation_test(&ranks, group_a.n(), permutations, perm_rng);
    Ok(RankSumReport {
        statistic,
        null_mean,
        p_value,
        permutations,
        n1: group_a.n(),
        n2: group_b.n(),
        ranks,
        depth_report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{sample_directions, FixedNoise, RandomSource};
    use crate::depth::halfspace_depth;
    use proptest::prelude::*;

    fn line(values: &[f64]) -> Dataset {
        Dataset::from_column(values).unwrap()
    }

    #[test]
    fn zero_noise_point_release() {
        let data = line(&[1.0, 2.0, 3.0]);
        let dirs = sample_directions(2, 1, 0).unwrap();
        let mut ledger = BudgetLedger::new();
        let r = private_depth_point(
            &[2.0],
            &data,
            DepthSpec::new(DepthKind::Halfspace, &dirs),
            &PrivacyParams::laplace(1.0).unwrap(),
            &mut ledger,
            &mut FixedNoise::zero(),
        )
        .unwrap();
        assert!((r.value().unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(ledger.len(), 1);
    }

    #[test]
    fn point_audit_scale() {
        let data = Dataset::new(
            (0..100)
                .map(|i| vec![i as f64, (i * 7 % 13) as f64])
                .collect(),
        )
        .unwrap();
        let dirs = sample_directions(50, 2, 1).unwrap();
        let mut ledger = BudgetLedger::new();
        let r = private_depth_point(
            &[50.0, 6.0],
            &data,
            DepthSpec::new(DepthKind::Halfspace, &dirs),
            &PrivacyParams::laplace(0.5).unwrap(),
            &mut ledger,
            &mut FixedNoise::zero(),
        )
        .unwrap();
        assert!((r.audit.noise_scale.unwrap() - 0.02).abs() < 1e-15);
        let raw = halfspace_depth(&[50.0, 6.0], &data, &dirs).unwrap().value;
        assert_eq!(r.value(), Some(raw));
    }

    #[test]
    fn projection_routed_to_point_errors() {
        let data = line(&[1.0, 2.0, 3.0]);
        let dirs = sample_directions(2, 1, 0).unwrap();
        let err = private_depth_point(
            &[2.0],
            &data,
            DepthSpec::new(DepthKind::Projection(Scale::Iqr), &dirs),
            &PrivacyParams::laplace(1.0).unwrap(),
            &mut BudgetLedger::new(),
            &mut FixedNoise::zero(),
        );
        assert!(matches!(err, Err(DepthError::UnsupportedKind { .. })));
    }

    #[test]
    fn vector_release_scale_and_zero_noise() {
        let data = line(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let dirs = sample_directions(2, 1, 0).unwrap();
        let mut ledger = BudgetLedger::new();
        let r = private_depth_vector(
            &data,
            DepthSpec::new(DepthKind::Halfspace, &dirs),
            &PrivacyParams::laplace(1.0).unwrap(),
            &mut ledger,
            &mut FixedNoise::zero(),
        )
        .unwrap();
        assert!((r.audit.noise_scale.unwrap() - 0.8).abs() < 1e-15);
        let exact = depth_vector(
            &data,
            DepthKind::Halfspace,
            &dirs,
            &SimplicialMode::default(),
        )
        .unwrap();
        assert_eq!(r.payload.values().unwrap(), exact.values.as_slice());
    }

    #[test]
    fn projection_ptr_release_and_refusal() {
        let data = line(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let dirs = sample_directions(2, 1, 0).unwrap();
        // threshold 1 + ln(2/0.5)/4 < 2, so k* stays in [1, 2) at zero noise
        let params = PrivacyParams::new(4.0, 0.5, NoiseVariant::Laplace).unwrap();
        let mut ledger = BudgetLedger::new();
        let r = private_projection_depth(
            &[2.5],
            &data,
            &dirs,
            Scale::Iqr,
            6.0,
            &params,
            &mut ledger,
            &mut FixedNoise::zero(),
        )
        .unwrap();
        assert!(!r.is_bottom());
        let o = 0.5 / 2.0;
        assert_eq!(r.payload.values().unwrap(), &[1.0 / (1.0 + o), o]);
        assert_eq!(r.ledger_entry.epsilon, 8.0);

        let flat = line(&[1.0; 9]);
        let r = private_projection_depth(
            &[1.0],
            &flat,
            &dirs,
            Scale::Iqr,
            1.0,
            &params,
            &mut ledger,
            &mut FixedNoise::zero(),
        )
        .unwrap();
        assert!(r.is_bottom());
        assert_eq!(ledger.len(), 2);

        let mad = private_projection_depth(
            &[1.0],
            &data,
            &dirs,
            Scale::Mad,
            1.0,
            &params,
            &mut ledger,
            &mut FixedNoise::zero(),
        );
        assert!(matches!(mad, Err(DepthError::UnsupportedKind { .. })));
    }

    #[test]
    fn projection_post_processing() {
        assert_eq!(clamped_projection_depth(1.0), 0.5);
        assert_eq!(clamped_projection_depth(-0.4), 1.0);
    }

    #[test]
    fn median_exp_symmetric_weights() {
        let data = line(&[-2.0, -1.0, 0.0, 1.0, 2.0]);
        let dirs = sample_directions(2, 1, 0).unwrap();
        let grid = CandidateGrid::regular(&[-2.0], &[2.0], 5).unwrap();
        let p = depth_median_probabilities(
            &data,
            DepthSpec::new(DepthKind::Halfspace, &dirs),
            &grid,
            &Prior::Uniform,
            1.0,
        )
        .unwrap();
        // depths 1/5, 2/5, 3/5, 2/5, 1/5 with exponent n eps / 2 = 2.5
        let w: Vec<f64> = [1.0, 2.0, 3.0, 2.0, 1.0]
            .iter()
            .map(|k: &f64| (0.5 * k).exp())
            .collect();
        let total: f64 = w.iter().sum();
        for (a, b) in p.iter().zip(&w) {
            assert!((a - b / total).abs() < 1e-15);
        }
        assert_eq!(p[0], p[4]);
        assert_eq!(p[1], p[3]);
        assert!(p[2] > p[1]);
    }

    #[test]
    fn point_mass_prior_always_returns_its_candidate() {
        let data = line(&[-2.0, -1.0, 0.0, 1.0, 2.0]);
        let dirs = sample_directions(2, 1, 0).unwrap();
        let grid = CandidateGrid::regular(&[-2.0], &[2.0], 5).unwrap();
        let prior = Prior::Table {
            weights: vec![0.0, 0.0, 0.0, 0.0, 1.0],
        };
        let mut rng = RandomSource::new(4);
        let mut ledger = BudgetLedger::new();
        for _ in 0..200 {
            let r = private_depth_median_exp(
                &data,
                DepthSpec::new(DepthKind::Halfspace, &dirs),
                &grid,
                &prior,
                1.0,
                &mut ledger,
                &mut rng,
            )
            .unwrap();
            assert_eq!(r.payload, Payload::Released(vec![2.0]));
        }
        assert_eq!(ledger.len(), 200);
    }

    #[test]
    fn truncated_median_grid_outside_ball_errors() {
        let data = Dataset::new(
            (0..20)
                .map(|i| vec![i as f64 * 0.1, (i as f64).sin()])
                .collect(),
        )
        .unwrap();
        let dirs = sample_directions(8, 2, 3).unwrap();
        let trunc = TruncatedOutlyingnessSpec::new(1.0, Scale::Iqr, dirs).unwrap();
        let grid = CandidateGrid::regular(&[5.0, 5.0], &[6.0, 6.0], 3).unwrap();
        let params = PrivacyParams::new(1.0, 1e-4, NoiseVariant::Laplace).unwrap();
        let mut ledger = BudgetLedger::new();
        let r = private_projection_median_ptr(
            &data,
            &trunc,
            &grid,
            0.5,
            &params,
            &mut ledger,
            &mut FixedNoise::zero(),
        );
        assert_eq!(r, Err(DepthError::AllWeightsZero));
        assert!(ledger.is_empty());
    }

    #[test]
    fn ranks_count_ties_upward() {
        let r = RankVector::from_released(&[0.3, 0.1, 0.3, 0.9]);
        assert_eq!(r.as_slice(), &[3, 1, 3, 4]);
    }

    #[test]
    fn rank_test_zero_noise_matches_depth_ranks() {
        let a = Dataset::new(
            (0..6)
                .map(|i| vec![(i as f64 * 1.3).sin(), (i as f64 * 0.7).cos()])
                .collect(),
        )
        .unwrap();
        let b = Dataset::new(
            (0..5)
                .map(|i| vec![3.0 * (i as f64 * 2.1).sin(), 3.0 * (i as f64 * 1.9).cos()])
                .collect(),
        )
        .unwrap();
        let dirs = sample_directions(64, 2, 2).unwrap();
        let mut perm = RandomSource::new(0);
        let report = private_rank_sum_scale_test(
            &a,
            &b,
            DepthSpec::new(DepthKind::Irw, &dirs),
            &PrivacyParams::laplace(1.0).unwrap(),
            200,
            &mut BudgetLedger::new(),
            &mut FixedNoise::zero(),
            &mut perm,
        )
        .unwrap();
        let pooled = a.concat(&b).unwrap();
        let exact =
            depth_vector(&pooled, DepthKind::Irw, &dirs, &SimplicialMode::default()).unwrap();
        assert_eq!(report.ranks, RankVector::from_released(&exact.values));
        assert!(report.p_value > 0.0 && report.p_value <= 1.0);
    }

    #[test]
    fn rank_test_needs_two_per_group() {
        let a = line(&[1.0]);
        let b = line(&[1.0, 2.0, 3.0]);
        let dirs = sample_directions(2, 1, 0).unwrap();
        let r = private_rank_sum_scale_test(
            &a,
            &b,
            DepthSpec::new(DepthKind::Halfspace, &dirs),
            &PrivacyParams::laplace(1.0).unwrap(),
            10,
            &mut BudgetLedger::new(),
            &mut FixedNoise::zero(),
            &mut RandomSource::new(0),
        );
        assert!(r.is_err());
    }

    #[test]
    fn default_eta_shape() {
        let n = 2000f64;
        assert!((default_eta(2000) - n.ln() / n.powf(0.65)).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn noiseless_vector_is_permutation_equivariant(
            rows in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2), 4..12),
            shift in 1usize..11,
        ) {
            let n = rows.len();
            let data = Dataset::new(rows.clone()).unwrap();
            let mut rotated = rows.clone();
            rotated.rotate_left(shift % n);
            let permuted = Dataset::new(rotated).unwrap();
            let dirs = sample_directions(16, 2, 5).unwrap();
            let params = PrivacyParams::laplace(1.0).unwrap();
            let spec = DepthSpec::new(DepthKind::Halfspace, &dirs);
            let a = private_depth_vector(&data, spec, &params, &mut BudgetLedger::new(), &mut FixedNoise::zero()).unwrap();
            let b = private_depth_vector(&permuted, spec, &params, &mut BudgetLedger::new(), &mut FixedNoise::zero()).unwrap();
            let mut expected = a.payload.values().unwrap().to_vec();
            expected.rotate_left(shift % n);
            prop_assert_eq!(b.payload.values().unwrap(), expected.as_slice());
        }

        #[test]
        fn argmax_mass_grows_with_epsilon(seed in any::<u64>()) {
            let mut rng = RandomSource::new(seed);
            let values: Vec<f64> = (0..9).map(|_| rand::Rng::random_range(&mut rng, -3.0..3.0)).collect();
            let data = line(&values);
            let dirs = sample_directions(2, 1, 0).unwrap();
            let grid = CandidateGrid::regular(&[-3.0], &[3.0], 7).unwrap();
            let spec = DepthSpec::new(DepthKind::Halfspace, &dirs);
            let mut last = 0.0;
            for eps in [0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
                let p = depth_median_probabilities(&data, spec, &grid, &Prior::Uniform, eps).unwrap();
                let top = p.iter().cloned().fold(0.0, f64::max);
                let utilities: Vec<f64> = grid.points().iter().map(|v| halfspace_depth(v, &data, &dirs).unwrap().value).collect();
                let best = utilities.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mass: f64 = p.iter().zip(&utilities).filter(|(_, u)| **u == best).map(|(p, _)| p).sum();
                prop_assert!(mass >= last);
                prop_assert!(top > 0.0);
                last = mass;
            }
        }
    }
}
