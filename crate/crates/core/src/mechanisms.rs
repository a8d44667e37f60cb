//! Privacy primitives: additive Laplace/Gaussian noise, the discrete
//! exponential mechanism, propose-test-release (PTR), PTR followed by an
//! exponential-mechanism draw, and budget composition.

use serde::{Deserialize, Serialize, Serializer};

use crate::data::{NoiseSource, NoiseVariant, PrivacyParams};
use crate::error::{DepthError, Result};
use crate::sensitivity::SensitivityBound;

/// An `(epsilon, delta)` spend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyCost {
    pub epsilon: f64,
    pub delta: f64,
}

/// Released value(s), or the refusal symbol of PTR.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Released(Vec<f64>),
    Bottom,
}

impl Payload {
    pub fn values(&self) -> Option<&[f64]> {
        match self {
            Payload::Released(v) => Some(v),
            Payload::Bottom => None,
        }
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, Payload::Bottom)
    }
}

impl Serialize for Payload {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Payload::Released(v) => v.serialize(serializer),
            Payload::Bottom => serializer.serialize_str("bottom"),
        }
    }
}

/// Mechanism internals. Thresholds and breakdown values are computed from
/// the raw data, so this record is not itself differentially private and
/// must not be published alongside the payload.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Audit {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_scale: Option<f64>,
    /// Fixed PTR threshold `1 + b/epsilon`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// Noisy threshold `k*` the breakdown bound was compared against.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub realized_threshold: Option<f64>,
    /// Breakdown lower bound used in the test.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub breakdown_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<NoiseVariant>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selected_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_resolution: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MechanismOutcome {
    pub payload: Payload,
    pub audit: Audit,
    pub cost: PrivacyCost,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(DepthError::invalid(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    Ok(())
}

fn check_sensitivity(gs: &SensitivityBound) -> Result<()> {
    if !(gs.value >= 0.0 && gs.value.is_finite()) {
        return Err(DepthError::invalid(format!(
            "sensitivity must be finite and nonnegative, got {}",
            gs.value
        )));
    }
    Ok(())
}

/// `sqrt(2 log(1.25/delta))`.
pub fn gaussian_factor(delta: f64) -> f64 {
    (2.0 * (1.25 / delta).ln()).sqrt()
}

/// `T + (W_1..W_k) GS_1/epsilon`, pure epsilon-DP.
pub fn laplace_mechanism(
    values: &[f64],
    gs1: &SensitivityBound,
    epsilon: f64,
    noise: &mut impl NoiseSource,
) -> Result<MechanismOutcome> {
    check_epsilon(epsilon)?;
    check_sensitivity(gs1)?;
    let scale = gs1.value / epsilon;
    let released = values
        .iter()
        .map(|v| v + scale * noise.standard_laplace())
        .collect();
    Ok(MechanismOutcome {
        payload: Payload::Released(released),
        audit: Audit {
            noise_scale: Some(scale),
            variant: Some(NoiseVariant::Laplace),
            ..Audit::default()
        },
        cost: PrivacyCost {
            epsilon,
            delta: 0.0,
        },
    })
}

/// `T + Z sqrt(2 log(1.25/delta)) GS_2/epsilon` per coordinate,
/// `(epsilon, delta)`-DP.
pub fn gaussian_mechanism(
    values: &[f64],
    gs2: &SensitivityBound,
    epsilon: f64,
    delta: f64,
    noise: &mut impl NoiseSource,
) -> Result<MechanismOutcome> {
    check_epsilon(epsilon)?;
    check_sensitivity(gs2)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(DepthError::invalid(format!(
            "gaussian mechanism needs 0 < delta < 1, got {delta}"
        )));
    }
    let scale = gaussian_factor(delta) * gs2.value / epsilon;
    let released = values
        .iter()
        .map(|v| v + scale * noise.standard_gaussian())
        .collect();
    Ok(MechanismOutcome {
        payload: Payload::Released(released),
        audit: Audit {
            noise_scale: Some(scale),
            variant: Some(NoiseVariant::Gaussian),
            ..Audit::default()
        },
        cost: PrivacyCost { epsilon, delta },
    })
}

/// Bounds and resolution of a regular grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub points_per_axis: usize,
}

/// Finite candidate support for the exponential mechanism. Built only from
/// user-supplied bounds or points, never from a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateGrid {
    points: Vec<Vec<f64>>,
    spec: Option<GridSpec>,
    data_independent: bool,
}

impl CandidateGrid {
    /// Cartesian grid with `points_per_axis` evenly spaced values per axis,
    /// endpoints included.
    pub fn regular(lower: &[f64], upper: &[f64], points_per_axis: usize) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(DepthError::invalid(
                "grid bounds must be nonempty and of equal length",
            ));
        }
        if points_per_axis == 0 {
            return Err(DepthError::invalid(
                "grid needs at least one point per axis",
            ));
        }
        if lower
            .iter()
            .zip(upper)
            .any(|(l, u)| !(l.is_finite() && u.is_finite() && l <= u))
        {
            return Err(DepthError::invalid(
                "grid bounds must be finite with lower <= upper",
            ));
        }
        let d = lower.len();
        let axis = |j: usize, i: usize| {
            if points_per_axis == 1 {
                0.5 * (lower[j] + upper[j])
            } else {
                lower[j] + (upper[j] - lower[j]) * i as f64 / (points_per_axis - 1) as f64
            }
        };
        let total = points_per_axis
            .checked_pow(d as u32)
            .ok_or_else(|| DepthError::invalid("grid too large"))?;
        let points = (0..total)
            .map(|mut flat| {
                // first axis varies slowest
                let mut p = vec![0.0; d];
                for j in (0..d).rev() {
                    p[j] = axis(j, flat % points_per_axis);
                    flat /= points_per_axis;
                }
                p
            })
            .collect();
        Ok(Self {
            points,
            spec: Some(GridSpec {
                lower: lower.to_vec(),
                upper: upper.to_vec(),
                points_per_axis,
            }),
            data_independent: true,
        })
    }

    /// Explicit candidate list.
    pub fn from_points(points: Vec<Vec<f64>>) -> Result<Self> {
        let d = points
            .first()
            .map(Vec::len)
            .ok_or_else(|| DepthError::invalid("grid must have at least one candidate"))?;
        if d == 0
            || points
                .iter()
                .any(|p| p.len() != d || p.iter().any(|c| !c.is_finite()))
        {
            return Err(DepthError::invalid(
                "candidates must be finite and share one dimension",
            ));
        }
        Ok(Self {
            points,
            spec: None,
            data_independent: true,
        })
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

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn spec(&self) -> Option<&GridSpec> {
        self.spec.as_ref()
    }

    pub fn is_data_independent(&self) -> bool {
        self.data_independent
    }

    /// Spacing per axis for regular grids.
    pub fn resolution(&self) -> Option<Vec<f64>> {
        self.spec.as_ref().map(|s| {
            s.lower
                .iter()
                .zip(&s.upper)
                .map(|(l, u)| {
                    if s.points_per_axis > 1 {
                        (u - l) / (s.points_per_axis - 1) as f64
                    } else {
                        0.0
                    }
                })
                .collect()
        })
    }
}

/// Prior weights over a candidate grid, fixed before seeing data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Prior {
    Uniform,
    /// Isotropic Gaussian density (up to a constant).
    Gaussian {
        center: Vec<f64>,
        scale: f64,
    },
    /// One weight per candidate.
    Table {
        weights: Vec<f64>,
    },
}

impl Prior {
    pub fn weights(&self, grid: &CandidateGrid) -> Result<Vec<f64>> {
        let w = match self {
            Prior::Uniform => vec![1.0; grid.len()],
            Prior::Gaussian { center, scale } => {
                if center.len() != grid.dim() {
                    return Err(DepthError::DimensionMismatch {
                        expected: grid.dim(),
                        got: center.len(),
                    });
                }
                if !(*scale > 0.0) {
                    return Err(DepthError::invalid("gaussian prior scale must be positive"));
                }
                grid.points()
                    .iter()
                    .map(|p| {
                        let r2: f64 = p.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                        (-0.5 * r2 / (scale * scale)).exp()
                    })
                    .collect()
            }
            Prior::Table { weights } => {
                if weights.len() != grid.len() {
                    return Err(DepthError::invalid(format!(
                        "prior table has {} weights for {} candidates",
                        weights.len(),
                        grid.len()
                    )));
                }
                weights.clone()
            }
        };
        if w.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(DepthError::invalid(
                "prior weights must be finite and nonnegative",
            ));
        }
        if !(w.iter().sum::<f64>() > 0.0) {
            return Err(DepthError::AllWeightsZero);
        }
        Ok(w)
    }
}

/// Normalizes `exp(log_weights)` after shifting by the largest finite entry.
fn normalize_log_weights(log_weights: &[f64]) -> Result<Vec<f64>> {
    let max = log_weights
        .iter()
        .cloned()
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(DepthError::AllWeightsZero);
    }
    let w: Vec<f64> = log_weights.iter().map(|&l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    Ok(w.into_iter().map(|v| v / total).collect())
}

/// Draw an index from normalized probabilities; zero-probability entries are
/// never selected.
pub(crate) fn draw_index(probabilities: &[f64], noise: &mut impl NoiseSource) -> usize {
    let target = noise.unit_uniform();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probabilities.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last_positive = i;
        if target < acc {
            return i;
        }
    }
    last_positive
}

/// Selection probabilities of the discrete exponential mechanism:
/// `prior_i * exp(epsilon * u_i / (2 gs))`, or without the factor 2 when the
/// normalizing term is asserted to be independent of the sample.
pub fn exponential_probabilities(
    utilities: &[f64],
    gs_u: f64,
    epsilon: f64,
    prior_weights: &[f64],
    normalizer_data_independent: bool,
) -> Result<Vec<f64>> {
    check_epsilon(epsilon)?;
    if !(gs_u > 0.0 && gs_u.is_finite()) {
        return Err(DepthError::invalid(format!(
            "utility sensitivity must be positive, got {gs_u}"
        )));
    }
    if utilities.len() != prior_weights.len() || utilities.is_empty() {
        return Err(DepthError::invalid(
            "utilities and prior weights must align and be nonempty",
        ));
    }
    let divisor = if normalizer_data_independent {
        1.0
    } else {
        2.0
    };
    let log_weights: Vec<f64> = utilities
        .iter()
        .zip(prior_weights)
        .map(|(&u, &w)| {
            if w > 0.0 {
                w.ln() + epsilon * u / (divisor * gs_u)
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    normalize_log_weights(&log_weights)
}

/// Exact categorical draw from the exponential mechanism over `grid`.
pub fn exponential_mechanism_discrete(
    grid: &CandidateGrid,
    utilities: &[f64],
    gs_u: &SensitivityBound,
    epsilon: f64,
    prior: &Prior,
    normalizer_data_independent: bool,
    noise: &mut impl NoiseSource,
) -> Result<MechanismOutcome> {
    if utilities.len() != grid.len() {
        return Err(DepthError::invalid("one utility per candidate is required"));
    }
    let weights = prior.weights(grid)?;
    let probabilities = exponential_probabilities(
        utilities,
        gs_u.value,
        epsilon,
        &weights,
        normalizer_data_independent,
    )?;
    let i = draw_index(&probabilities, noise);
    Ok(MechanismOutcome {
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
    })
}

/// PTR noise calibration: `a_delta`, `b_delta` and the noise family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PtrCalibration {
    pub a: f64,
    pub b: f64,
    pub variant: NoiseVariant,
}

impl PtrCalibration {
    pub fn new(params: &PrivacyParams) -> Result<Self> {
        check_epsilon(params.epsilon)?;
        if !(params.delta > 0.0 && params.delta < 1.0) {
            return Err(DepthError::invalid(
                "propose-test-release needs 0 < delta < 1",
            ));
        }
        Ok(match params.variant {
            NoiseVariant::Laplace => Self {
                a: 1.0,
                b: (2.0 / params.delta).ln(),
                variant: NoiseVariant::Laplace,
            },
            NoiseVariant::Gaussian => {
                let a = gaussian_factor(params.delta);
                Self {
                    a,
                    b: a * a,
                    variant: NoiseVariant::Gaussian,
                }
            }
        })
    }

    /// `1 + b/epsilon`.
    pub fn threshold(&self, epsilon: f64) -> f64 {
        1.0 + self.b / epsilon
    }

    fn draw(&self, noise: &mut impl NoiseSource) -> f64 {
        match self.variant {
            NoiseVariant::Laplace => noise.standard_laplace(),
            NoiseVariant::Gaussian => noise.standard_gaussian(),
        }
    }
}

/// Advertised spend of [`ptr`]: Laplace `(2 eps, delta)`, Gaussian
/// `(2 eps, 2 e^eps delta + delta^2)`.
pub fn ptr_cost(params: &PrivacyParams) -> PrivacyCost {
    let (epsilon, delta) = (params.epsilon, params.delta);
    match params.variant {
        NoiseVariant::Laplace => PrivacyCost {
            epsilon: 2.0 * epsilon,
            delta,
        },
        NoiseVariant::Gaussian => PrivacyCost {
            epsilon: 2.0 * epsilon,
            delta: 2.0 * epsilon.exp() * delta + delta * delta,
        },
    }
}

/// Advertised spend of [`ptr_exponential`]: Laplace `(2 eps, delta)`,
/// Gaussian `(2 eps, 2 delta)`.
pub fn ptr_exponential_cost(params: &PrivacyParams) -> PrivacyCost {
    let factor = match params.variant {
        NoiseVariant::Laplace => 1.0,
        NoiseVariant::Gaussian => 2.0,
    };
    PrivacyCost {
        epsilon: 2.0 * params.epsilon,
        delta: factor * params.delta,
    }
}

struct TestResult {
    passed: bool,
    audit: Audit,
}

/// Runs the private test `A + (a/eps) V <= 1 + b/eps`. The callback receives
/// the realized `k* = 1 + b/eps - (a/eps) V` and returns a lower bound on the
/// breakdown point; the test fails (bottom) when that bound is `<= k*`.
fn propose_test<F: FnOnce(f64) -> f64>(
    breakdown_lower_bound: F,
    calibration: &PtrCalibration,
    epsilon: f64,
    noise: &mut impl NoiseSource,
) -> TestResult {
    let v = calibration.draw(noise);
    let threshold = calibration.threshold(epsilon);
    let k_star = threshold - calibration.a * v / epsilon;
    let bound = breakdown_lower_bound(k_star);
    TestResult {
        passed: bound > k_star,
        audit: Audit {
            threshold: Some(threshold),
            realized_threshold: Some(k_star),
            breakdown_bound: Some(bound),
            variant: Some(calibration.variant),
            ..Audit::default()
        },
    }
}

/// Propose-test-release for a statistic with a computable lower bound on its
/// truncated breakdown point. Laplace: `(2 eps, delta)`; Gaussian:
/// `(2 eps, 2 e^eps delta + delta^2)`.
pub fn ptr<F: FnOnce(f64) -> f64>(
    breakdown_lower_bound: F,
    statistic: &[f64],
    eta: f64,
    params: &PrivacyParams,
    noise: &mut impl NoiseSource,
) -> Result<MechanismOutcome> {
    if !(eta > 0.0) {
        return Err(DepthError::invalid(format!(
            "eta must be positive, got {eta}"
        )));
    }
    let calibration = PtrCalibration::new(params)?;
    let epsilon = params.epsilon;
    let cost = ptr_cost(params);
    let test = propose_test(breakdown_lower_bound, &calibration, epsilon, noise);
    let mut audit = test.audit;
    if !test.passed {
        return Ok(MechanismOutcome {
            payload: Payload::Bottom,
            audit,
            cost,
        });
    }
    let scale = eta * calibration.a / epsilon;
    audit.noise_scale = Some(scale);
    let released = statistic
        .iter()
        .map(|s| s + scale * calibration.draw(noise))
        .collect();
    Ok(MechanismOutcome {
        payload: Payload::Released(released),
        audit,
        cost,
    })
}

/// PTR on a cost function followed by an exponential-mechanism draw with
/// weights `exp(-cost(v) eps / (2 eta))` over `grid`. The cost is evaluated
/// only after the test passes. Laplace: `(2 eps, delta)`; Gaussian:
/// `(2 eps, 2 delta)`.
pub fn ptr_exponential<F, C>(
    breakdown_lower_bound: F,
    cost: C,
    grid: &CandidateGrid,
    eta: f64,
    params: &PrivacyParams,
    noise: &mut impl NoiseSource,
) -> Result<MechanismOutcome>
where
    F: FnOnce(f64) -> f64,
    C: FnOnce(&CandidateGrid) -> Result<Vec<f64>>,
{
    if !(eta > 0.0) {
        return Err(DepthError::invalid(format!(
            "eta must be positive, got {eta}"
        )));
    }
    let calibration = PtrCalibration::new(params)?;
    let epsilon = params.epsilon;
    let cost_spent = ptr_exponential_cost(params);
    let test = propose_test(breakdown_lower_bound, &calibration, epsilon, noise);
    let mut audit = test.audit;
    audit.grid_resolution = grid.resolution();
    if !test.passed {
        return Ok(MechanismOutcome {
            payload: Payload::Bottom,
            audit,
            cost: cost_spent,
        });
    }
    let costs = cost(grid)?;
    if costs.len() != grid.len() {
        return Err(DepthError::invalid("one cost per candidate is required"));
    }
    let probabilities = ptr_exponential_probabilities(&costs, eta, epsilon)?;
    let i = draw_index(&probabilities, noise);
    audit.selected_index = Some(i);
    Ok(MechanismOutcome {
        payload: Payload::Released(grid.points()[i].clone()),
        audit,
        cost: cost_spent,
    })
}

/// Draw probabilities `exp(-cost eps/(2 eta))` normalized over the grid.
pub fn ptr_exponential_probabilities(costs: &[f64], eta: f64, epsilon: f64) -> Result<Vec<f64>> {
    let log_weights: Vec<f64> = costs.iter().map(|c| -c * epsilon / (2.0 * eta)).collect();
    normalize_log_weights(&log_weights)
}

/// One spend in the budget ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub mechanism: String,
    pub epsilon: f64,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<NoiseVariant>,
}

impl LedgerEntry {
    pub fn new(
        mechanism: impl Into<String>,
        cost: PrivacyCost,
        variant: Option<NoiseVariant>,
    ) -> Self {
        Self {
            mechanism: mechanism.into(),
            epsilon: cost.epsilon,
            delta: cost.delta,
            timestamp: None,
            variant,
        }
    }
}

/// Append-only record of privacy spends.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BudgetLedger {
    entries: Vec<LedgerEntry>,
}

impl BudgetLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, entry: LedgerEntry) {
        self.entries.push(entry);
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sequential composition: coordinate-wise sums.
    pub fn basic_total(&self) -> PrivacyCost {
        let (epsilon, delta) = compose_basic(self);
        PrivacyCost { epsilon, delta }
    }

    /// Advanced composition over the recorded spends, using the largest
    /// per-mechanism `epsilon` and `delta`. Fails when the composed epsilon
    /// is not below 1.
    pub fn advanced_total(&self, delta_prime: f64) -> Result<PrivacyCost> {
        if !(delta_prime > 0.0 && delta_prime < 1.0) {
            return Err(DepthError::invalid("delta' must lie in (0, 1)"));
        }
        let k = self.entries.len();
        if k == 0 {
            return Ok(PrivacyCost {
                epsilon: 0.0,
                delta: 0.0,
            });
        }
        let eps_max = self.entries.iter().map(|e| e.epsilon).fold(0.0, f64::max);
        let delta_max = self.entries.iter().map(|e| e.delta).fold(0.0, f64::max);
        let epsilon = eps_max * 2.0 * (2.0 * k as f64 * (1.0 / delta_prime).ln()).sqrt();
        if epsilon >= 1.0 {
            return Err(DepthError::invalid(format!(
                "advanced composition needs a total epsilon below 1, got {epsilon}"
            )));
        }
        Ok(PrivacyCost {
            epsilon,
            delta: k as f64 * delta_max + delta_prime,
        })
    }

    /// Newline-delimited JSON, one entry per line.
    pub fn to_json_lines(&self) -> String {
        self.entries
            .iter()
            .map(|e| serde_json::to_string(e).expect("ledger entries serialize") + "\n")
            .collect()
    }

    pub fn from_json_lines(text: &str) -> Result<Self> {
        let entries = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str(l).map_err(|e| DepthError::Input {
                    row: i,
                    reason: format!("ledger line: {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { entries })
    }
}

/// `(sum epsilon_i, sum delta_i)`.
pub fn compose_basic(ledger: &BudgetLedger) -> (f64, f64) {
    ledger.entries.iter().fold((0.0, 0.0), |(e, d), entry| {
        (e + entry.epsilon, d + entry.delta)
    })
}

/// Per-mechanism budget under advanced composition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdvancedComposition {
    /// `epsilon / (2 sqrt(2 k log(1/delta')))`.
    pub per_mechanism_epsilon: f64,
    pub k: usize,
    pub epsilon: f64,
    pub delta_prime: f64,
    pub note: String,
}

impl AdvancedComposition {
    /// Total delta `k delta + delta'` for per-mechanism `delta`.
    pub fn total_delta(&self, per_mechanism_delta: f64) -> f64 {
        self.k as f64 * per_mechanism_delta + self.delta_prime
    }
}

/// Splits a target `epsilon < 1` across `k` mechanisms: each may spend
/// `epsilon / (2 sqrt(2 k log(1/delta')))`, and the composition is
/// `(epsilon, k delta + delta')`-DP.
pub fn compose_advanced(epsilon: f64, delta_prime: f64, k: usize) -> Result<AdvancedComposition> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(DepthError::invalid(format!(
            "advanced composition needs 0 < epsilon < 1, got {epsilon}"
        )));
    }
    if !(delta_prime > 0.0 && delta_prime < 1.0) {
        return Err(DepthError::invalid("delta' must lie in (0, 1)"));
    }
    if k == 0 {
        return Err(DepthError::invalid("k must be positive"));
    }
    let per = epsilon / (2.0 * (2.0 * k as f64 * (1.0 / delta_prime).ln()).sqrt());
    Ok(AdvancedComposition {
        per_mechanism_epsilon: per,
        k,
        epsilon,
        delta_prime,
        note: format!(
            "{k} mechanisms at ({per}, delta) compose to ({epsilon}, {k} delta + {delta_prime})"
        ),
    })
}
