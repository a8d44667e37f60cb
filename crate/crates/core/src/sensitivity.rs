//! Global sensitivities and the breakdown certificate for iqr-scaled projection
//! outlyingness.
//!
//! The certificate bounds, for every direction `u`, how far the directional
//! outlyingness `|x^T u - med| / iqr` can move when at most `k` rows of the
//! dataset are replaced arbitrarily. If every direction stays within `eta`,
//! the truncated breakdown point `A_eta` of the direction-sampled outlyingness
//! exceeds `k`.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Direction, DirectionSet, SortedSample};
use crate::depth::{directional_outlyingness, DepthKind};
use crate::error::{DepthError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
    Sup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Point,
    Vector,
    Function,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityBound {
    pub value: f64,
    pub norm: Norm,
    pub scope: Scope,
}

/// Sensitivity of the depth of a fixed point `x` (independent of the data).
///
/// Halfspace and IRW depth move by at most `1/n`, simplicial depth by
/// `(d+1)/n`; projection depth lives in `[0, 1)` with unbounded outlyingness
/// sensitivity, so its bound is 1. The same value holds in every norm.
pub fn global_sensitivity(
    kind: DepthKind,
    n: usize,
    d: usize,
    norm: Norm,
) -> Result<SensitivityBound> {
    if n == 0 {
        return Err(DepthError::invalid("sensitivity needs n >= 1"));
    }
    let n = n as f64;
    let value = match kind {
        DepthKind::Halfspace | DepthKind::Irw => 1.0 / n,
        DepthKind::Simplicial => ((d + 1) as f64 / n).min(1.0),
        DepthKind::Projection(_) => 1.0,
    };
    Ok(SensitivityBound {
        value,
        norm,
        scope: Scope::Point,
    })
}

/// Sensitivity of the vector of depths at the sample points.
///
/// For halfspace and IRW depth, with `h = floor((n+1)/2) - 1`:
/// `L1 = 2h/n`, `L2 = sqrt(h^2 + h)/n`. These rank-counting bounds assume the
/// rows are in general position (no tied projections); tied rows can move the
/// vector further.
///
/// For simplicial depth every unchanged entry moves by at most `(d+1)/n` and
/// the replaced entry by at most `1 - (d+1)/n`.
pub fn vector_global_sensitivity(
    kind: DepthKind,
    n: usize,
    d: usize,
    norm: Norm,
) -> Result<SensitivityBound> {
    if n < 2 {
        return Err(DepthError::invalid("vector sensitivity needs n >= 2"));
    }
    let nf = n as f64;
    let value = match kind {
        DepthKind::Halfspace | DepthKind::Irw => {
            let h = n.div_ceil(2) as f64 - 1.0;
            match norm {
                Norm::L1 => 2.0 * h / nf,
                Norm::L2 => (h * h + h).sqrt() / nf,
                Norm::Sup => h / nf,
            }
        }
        DepthKind::Simplicial => {
            let per_point = ((d + 1) as f64 / nf).min(1.0);
            let replaced = 1.0 - per_point;
            match norm {
                Norm::L1 => (nf - 1.0) * per_point + replaced,
                Norm::L2 => (replaced * replaced + nf * per_point * per_point).sqrt(),
                Norm::Sup => replaced.max(per_point),
            }
        }
        DepthKind::Projection(_) => {
            return Err(DepthError::UnsupportedKind {
                kind: kind.to_string(),
                operation: "vector_global_sensitivity",
            })
        }
    };
    Ok(SensitivityBound {
        value,
        norm,
        scope: Scope::Vector,
    })
}

/// Breakdown radius and the replacement count to certify against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreakdownQuery {
    pub eta: f64,
    pub k_star: f64,
}

impl BreakdownQuery {
    pub fn new(eta: f64, k_star: f64) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(DepthError::invalid(format!(
                "eta must be positive, got {eta}"
            )));
        }
        if !(k_star >= 0.0) {
            return Err(DepthError::invalid(format!(
                "k* must be nonnegative, got {k_star}"
            )));
        }
        Ok(Self { eta, k_star })
    }
}

/// Range of the directional outlyingness `O^u(x)` over all datasets obtained
/// by replacing at most `k` rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutlyingnessInterval {
    /// `lo(med)/up(iqr)`.
    pub lower: f64,
    /// `up(med)/lo(iqr)`; `+inf` when `lo(iqr) = 0`.
    pub upper: f64,
    /// Direct `O^u(x)` on the unmodified data.
    pub statistic: f64,
    pub med_lower: f64,
    pub med_upper: f64,
    pub iqr_lower: f64,
    pub iqr_upper: f64,
    /// Median after replacing the `k` smallest projections by `x^T u`.
    pub median_low_replaced: f64,
    /// Median after replacing the `k` largest projections by `x^T u`.
    pub median_high_replaced: f64,
    /// Set when `lo(iqr) = 0`.
    pub degenerate: bool,
}

impl OutlyingnessInterval {
    /// `max(O - lower, upper - O) < eta`, false whenever anything is infinite.
    pub fn within(&self, eta: f64) -> bool {
        if !self.statistic.is_finite() || !self.upper.is_finite() {
            return false;
        }
        (self.statistic - self.lower).max(self.upper - self.statistic) < eta
    }
}

fn replacement_count(k_star: f64, n: usize) -> Result<usize> {
    if !(k_star >= 1.0 && k_star < n as f64 / 2.0) {
        return Err(DepthError::invalid(format!(
            "k* = {k_star} outside [1, n/2) for n = {n}"
        )));
    }
    // A_eta is an integer, so A > k* exactly when no floor(k*)-row replacement breaks.
    Ok(k_star.floor() as usize)
}

/// Median (averaged convention) of the order statistics `X_(j + shift)`,
/// `j = 1..n`. Shifting by `-k` is "the `k` largest rows sent to `-inf`".
fn shifted_median(s: &SortedSample, shift: i64) -> f64 {
    let n = s.len() as i64;
    let at = |j: i64| {
        s.order_stat(j + shift).unwrap_or(if j + shift < 1 {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        })
    };
    if n % 2 == 1 {
        at((n + 1) / 2)
    } else {
        0.5 * (at(n / 2) + at(n / 2 + 1))
    }
}

/// Median of `s` with `k` values (the smallest when `low`, else the largest)
/// replaced by `t`.
fn replaced_median(s: &SortedSample, t: f64, k: usize, low: bool) -> f64 {
    let kept = if low {
        &s.as_slice()[k..]
    } else {
        &s.as_slice()[..s.len() - k]
    };
    let split = kept.partition_point(|&v| v < t);
    let n = s.len();
    // merged order: kept[..split], k copies of t, kept[split..]
    let at = |j: usize| {
        if j < split {
            kept[j]
        } else if j < split + k {
            t
        } else {
            kept[j - k]
        }
    };
    if n % 2 == 1 {
        at(n / 2)
    } else {
        0.5 * (at(n / 2 - 1) + at(n / 2))
    }
}

pub(crate) fn interval_from_sorted(s: &SortedSample, t: f64, k: usize) -> OutlyingnessInterval {
    let k_i = k as i64;
    let median = s.median();
    let iqr = s.iqr();

    // Replacing k rows moves each order statistic by at most k positions, so
    // the median ranges over [shifted(-k), shifted(+k)]. For odd n these are
    // the type-1 quantiles at 1/2 -+ k/n.
    let m_lo = shifted_median(s, -k_i);
    let m_hi = shifted_median(s, k_i);
    let med_upper = (t - m_lo).abs().max((t - m_hi).abs());
    let m1 = replaced_median(s, t, k, true);
    let m2 = replaced_median(s, t, k, false);
    let gap = if t < m_lo {
        m_lo - t
    } else if t > m_hi {
        t - m_hi
    } else {
        0.0
    };
    let med_lower = gap.min((t - m1).abs()).min((t - m2).abs());

    let j3 = s.quantile_index(0.75);
    let j1 = s.quantile_index(0.25);
    let (mut iqr_lo, mut iqr_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for k1 in -k_i..=k_i {
        let k2_abs = k_i - k1.abs();
        for k2 in [-k2_abs, k2_abs] {
            // an index that leaves 1..=n can be pushed to -+inf by the replaced rows
            let upper_q = s.order_stat(j3 + k1).unwrap_or(if j3 + k1 < 1 {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            });
            let lower_q = s.order_stat(j1 + k2).unwrap_or(if j1 + k2 < 1 {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            });
            let width = upper_q - lower_q;
            let width = if width.is_nan() { 0.0 } else { width };
            iqr_lo = iqr_lo.min(width);
            iqr_hi = iqr_hi.max(width);
        }
    }
    let iqr_lo = iqr_lo.max(0.0);
    let iqr_hi = iqr_hi.max(0.0);

    let degenerate = iqr_lo == 0.0;
    let upper = if degenerate {
        f64::INFINITY
    } else {
        med_upper / iqr_lo
    };
    let lower = if iqr_hi.is_infinite() {
        0.0
    } else if iqr_hi == 0.0 {
        if med_lower > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        med_lower / iqr_hi
    };
    OutlyingnessInterval {
        lower,
        upper,
        statistic: directional_outlyingness(t, median, iqr),
        med_lower,
        med_upper,
        iqr_lower: iqr_lo,
        iqr_upper: iqr_hi,
        median_low_replaced: m1,
        median_high_replaced: m2,
        degenerate,
    }
}

/// Interval for `O^u(x)` with iqr scale when up to `floor(k*)` rows change.
/// Requires `1 <= k* < n/2`.
pub fn outlyingness_interval(
    x: &[f64],
    data: &Dataset,
    u: &Direction,
    k_star: f64,
) -> Result<OutlyingnessInterval> {
    data.check_point(x)?;
    data.check_point(u.as_slice())?;
    let k = replacement_count(k_star, data.n())?;
    let projected: Vec<f64> = data.rows().map(|row| u.dot(row)).collect();
    let s = SortedSample::new(&projected)?;
    Ok(interval_from_sorted(&s, u.dot(x), k))
}

/// Sorted projections per direction, reused across many query points.
#[derive(Debug, Clone)]
pub struct BreakdownCertifier {
    directions: Vec<(Direction, SortedSample)>,
    n: usize,
    d: usize,
}

impl BreakdownCertifier {
    pub fn new(data: &Dataset, dirs: &DirectionSet) -> Result<Self> {
        dirs.check_dim(data.d())?;
        let directions = dirs
            .iter()
            .map(|u| {
                let projected: Vec<f64> = data.rows().map(|row| u.dot(row)).collect();
                Ok((u.clone(), SortedSample::new(&projected)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            directions,
            n: data.n(),
            d: data.d(),
        })
    }

    /// True certifies `A_eta(O_hat(x)) > k*` for the direction-sampled
    /// outlyingness: every direction stays within `eta`.
    pub fn holds(&self, x: &[f64], eta: f64, k_star: f64) -> Result<bool> {
        if x.len() != self.d {
            return Err(DepthError::DimensionMismatch {
                expected: self.d,
                got: x.len(),
            });
        }
        if !(eta > 0.0) {
            return Err(DepthError::invalid(format!(
                "eta must be positive, got {eta}"
            )));
        }
        let k = replacement_count(k_star, self.n)?;
        if eta.is_infinite() {
            return Ok(true);
        }
        Ok(self
            .directions
            .iter()
            .all(|(u, s)| interval_from_sorted(s, u.dot(x), k).within(eta)))
    }
}

/// Sufficient check that `floor(k*)` replaced rows cannot move the
/// direction-sampled iqr outlyingness of `x` by `eta` or more.
pub fn breakdown_holds(
    x: &[f64],
    data: &Dataset,
    dirs: &DirectionSet,
    eta: f64,
    k_star: f64,
) -> Result<bool> {
    BreakdownCertifier::new(data, dirs)?.holds(x, eta, k_star)
}
