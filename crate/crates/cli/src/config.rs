//! Flag parsing and validation. Everything here runs before the data file is
//! opened.

use depthguard::{
    CandidateGrid, DepthKind, NoiseVariant, Prior, PrivacyParams, Scale, SimplicialMode,
};

use crate::run::CliError;
use crate::{DepthOptions, Estimator, KindArg, NoiseArg, PrivateArgs, ScaleArg};

/// Values that would make a grid, prior or radius depend on the sample.
const DATA_DERIVED: [&str; 5] = ["auto", "data", "from-data", "data-derived", "sample"];

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn reject_data_derived(flag: &str, value: &str) -> Result<(), CliError> {
    if DATA_DERIVED.contains(&value.trim().to_ascii_lowercase().as_str()) {
        return Err(config(format!(
            "--{flag} must be fixed in advance, not derived from the data"
        )));
    }
    Ok(())
}

pub fn parse_list(flag: &str, s: &str) -> Result<Vec<f64>, CliError> {
    reject_data_derived(flag, s)?;
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| config(format!("--{flag}: {v:?} is not a finite number")))
        })
        .collect()
}

pub fn scale(variant: Option<ScaleArg>) -> Option<Scale> {
    variant.map(|v| match v {
        ScaleArg::O1 => Scale::Mad,
        ScaleArg::O2 => Scale::Iqr,
    })
}

pub fn kind(opts: &DepthOptions) -> Result<DepthKind, CliError> {
    match opts.kind.ok_or_else(|| config("--kind is required"))? {
        KindArg::Halfspace => Ok(DepthKind::Halfspace),
        KindArg::Irw => Ok(DepthKind::Irw),
        KindArg::Simplicial => Ok(DepthKind::Simplicial),
        KindArg::Projection => scale(opts.variant)
            .map(DepthKind::Projection)
            .ok_or_else(|| config("--kind projection requires --variant o1|o2")),
    }
}

pub fn simplicial_mode(opts: &DepthOptions) -> SimplicialMode {
    match opts.simplicial_draws {
        Some(draws) => SimplicialMode::MonteCarlo {
            draws,
            seed: opts.seed,
        },
        None => SimplicialMode::default(),
    }
}

pub fn check_directions(opts: &DepthOptions) -> Result<(), CliError> {
    if opts.directions == 0 {
        return Err(config("--directions must be positive"));
    }
    Ok(())
}

/// `lo:hi` per axis, comma separated.
pub fn parse_grid(bounds: &str, points: usize) -> Result<CandidateGrid, CliError> {
    reject_data_derived("grid-bounds", bounds)?;
    let (lower, upper): (Vec<f64>, Vec<f64>) = bounds
        .split(',')
        .map(|axis| {
            let (lo, hi) = axis
                .split_once(':')
                .ok_or_else(|| config(format!("--grid-bounds: expected lo:hi, got {axis:?}")))?;
            let lo = parse_list("grid-bounds", lo)?[0];
            let hi = parse_list("grid-bounds", hi)?[0];
            Ok((lo, hi))
        })
        .collect::<Result<Vec<_>, CliError>>()?
        .into_iter()
        .unzip();
    CandidateGrid::regular(&lower, &upper, points).map_err(|e| config(e.to_string()))
}

/// Validated settings for `private`.
#[derive(Debug)]
pub struct PrivateConfig {
    pub kind: Option<DepthKind>,
    pub params: PrivacyParams,
    pub point: Option<Vec<f64>>,
    pub eta: Option<f64>,
    pub m_n: Option<f64>,
    pub grid: Option<CandidateGrid>,
    pub prior: Prior,
}

impl PrivateConfig {
    pub fn from_args(args: &PrivateArgs) -> Result<Self, CliError> {
        check_directions(&args.depth)?;
        let variant = match args.noise {
            NoiseArg::Laplace => NoiseVariant::Laplace,
            NoiseArg::Gaussian => NoiseVariant::Gaussian,
        };
        let params = PrivacyParams::new(args.epsilon, args.delta, variant)
            .map_err(|e| config(e.to_string()))?;
        let needs_delta = matches!(args.estimator, Estimator::Projection | Estimator::MedianPtr);
        if needs_delta && !(args.delta > 0.0) {
            return Err(config("propose-test-release needs --delta > 0"));
        }
        let kind = match args.estimator {
            Estimator::Projection | Estimator::MedianPtr => {
                if matches!(args.depth.kind, Some(k) if k != KindArg::Projection) {
                    return Err(config("this estimator uses projection depth; drop --kind or pass --kind projection"));
                }
                Some(DepthKind::Projection(
                    scale(args.depth.variant).unwrap_or(Scale::Iqr),
                ))
            }
            _ => Some(kind(&args.depth)?),
        };
        let point = match (&args.point, args.estimator) {
            (Some(p), _) => Some(parse_list("point", p)?),
            (None, Estimator::Point | Estimator::Projection) => {
                return Err(config("--point is required for this estimator"))
            }
            (None, _) => None,
        };
        if let Some(eta) = args.eta {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(config("--eta must be positive"));
            }
        }
        let m_n = match (&args.m_n, args.estimator) {
            (Some(m), _) => {
                let m = parse_list("m-n", m)?[0];
                if !(m > 0.0) {
                    return Err(config("--m-n must be positive"));
                }
                Some(m)
            }
            (None, Estimator::MedianPtr) => return Err(config("--m-n is required for median-ptr")),
            (None, _) => None,
        };
        let grid = match (&args.grid_bounds, args.estimator) {
            (Some(b), _) => Some(parse_grid(b, args.grid_points)?),
            (None, Estimator::MedianExp | Estimator::MedianPtr) => {
                return Err(config(
                    "--grid-bounds is required: the candidate grid must not depend on the data",
                ))
            }
            (None, _) => None,
        };
        reject_data_derived("prior", &args.prior)?;
        let prior = match args.prior.as_str() {
            "uniform" => Prior::Uniform,
            "gaussian" => {
                let d = grid.as_ref().map(CandidateGrid::dim).unwrap_or(1);
                let center = match &args.prior_center {
                    Some(c) => parse_list("prior-center", c)?,
                    None => vec![0.0; d],
                };
                Prior::Gaussian {
                    center,
                    scale: args.prior_scale,
                }
            }
            other => return Err(config(format!("unknown prior {other:?}"))),
        };
        if let Some(grid) = &grid {
            prior.weights(grid).map_err(|e| config(e.to_string()))?;
        }
        if args.estimator == Estimator::RankTest && args.group_b.is_none() {
            return Err(config("rank-test requires --group-b"));
        }
        if args.permutations == 0 {
            return Err(config("--permutations must be positive"));
        }
        Ok(Self {
            kind,
            params,
            point,
            eta: args.eta,
            m_n,
            grid,
            prior,
        })
    }
}
