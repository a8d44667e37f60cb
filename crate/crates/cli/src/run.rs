use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::Path;

use depthguard::experiments::{
    audit_experiment, run_standard, write_tidy_csv, Experiment, TidyRow,
};
use depthguard::{
    compose_advanced, default_eta, depth_vector, load_dataset, private_depth_median_exp,
    private_depth_point, private_depth_vector, private_projection_depth,
    private_projection_median_ptr, private_rank_sum_scale_test, ptr_cost, ptr_exponential_cost,
    sample_directions, Audit, BudgetLedger, Dataset, DepthError, DepthKind, DepthSpec,
    DirectionSet, NoiseVariant, PrivacyCost, PrivacyParams, RandomSource, Scale,
    TruncatedOutlyingnessSpec,
};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{self, PrivateConfig};
use crate::{AuditArgs, BudgetArgs, DepthArgs, Estimator, ExperimentArgs, PrivateArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Budget(_) => 4,
        }
    }
}

impl From<DepthError> for CliError {
    fn from(e: DepthError) -> Self {
        match e {
            DepthError::Input { .. }
            | DepthError::Io(_)
            | DepthError::EmptyInput
            | DepthError::DimensionMismatch { .. } => CliError::Data(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

const SCHEMA: u32 = 1;

fn sink(output: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match output {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit(value: &Value, output: Option<&Path>) -> Result<(), CliError> {
    let mut out = sink(output)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn envelope(body: impl Serialize, audit: Option<&Audit>) -> Result<Value, CliError> {
    let mut value = json!({ "schema": SCHEMA });
    let map = value.as_object_mut().expect("object literal");
    match serde_json::to_value(body)? {
        Value::Object(fields) => map.extend(fields),
        other => {
            map.insert("result".into(), other);
        }
    }
    if let Some(audit) = audit {
        map.insert("audit".into(), serde_json::to_value(audit)?);
    }
    Ok(value)
}

fn directions(n: usize, d: usize, seed: u64) -> Result<DirectionSet, CliError> {
    Ok(sample_directions(n, d, seed)?)
}

pub fn depth(args: &DepthArgs) -> Result<(), CliError> {
    config::check_directions(&args.depth)?;
    let kind = config::kind(&args.depth)?;
    let point = args
        .point
        .as_deref()
        .map(|p| config::parse_list("point", p))
        .transpose()?;
    if point.is_none() && !args.vector {
        return Err(CliError::Config("pass --point or --vector".into()));
    }
    let mode = config::simplicial_mode(&args.depth);
    let data = load_dataset(&args.input.data, args.input.header)?;
    let dirs = directions(args.depth.directions, data.d(), args.depth.seed)?;
    let body = match point {
        Some(x) => json!({
            "schema": SCHEMA,
            "kind": kind.to_string(),
            "point": x,
            "value": depthguard::depth(&x, &data, kind, &dirs, &mode)?.value,
        }),
        None => json!({
            "schema": SCHEMA,
            "kind": kind.to_string(),
            "values": depth_vector(&data, kind, &dirs, &mode)?.values,
        }),
    };
    emit(&body, args.output.as_deref())
}

fn read_ledger(path: &Path) -> Result<BudgetLedger, CliError> {
    match std::fs::read_to_string(path) {
        Ok(text) => BudgetLedger::from_json_lines(&text)
            .map_err(|e| CliError::Runtime(format!("ledger {}: {e}", path.display()))),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(BudgetLedger::new()),
        Err(e) => Err(e.into()),
    }
}

fn prospective_cost(estimator: Estimator, params: &PrivacyParams) -> PrivacyCost {
    let delta = match params.variant {
        NoiseVariant::Laplace => 0.0,
        NoiseVariant::Gaussian => params.delta,
    };
    match estimator {
        Estimator::Projection => ptr_cost(params),
        Estimator::MedianPtr => ptr_exponential_cost(params),
        Estimator::MedianExp => PrivacyCost {
            epsilon: params.epsilon,
            delta: 0.0,
        },
        Estimator::Point | Estimator::Vector | Estimator::RankTest => PrivacyCost {
            epsilon: params.epsilon,
            delta,
        },
    }
}

fn check_caps(args: &PrivateArgs, spent: PrivacyCost, next: PrivacyCost) -> Result<(), CliError> {
    if let Some(cap) = args.budget_cap {
        let total = spent.epsilon + next.epsilon;
        if total > cap + 1e-12 {
            return Err(CliError::Budget(format!(
                "epsilon would reach {total} (spent {}, this call {}), cap {cap}",
                spent.epsilon, next.epsilon
            )));
        }
    }
    if let Some(cap) = args.delta_cap {
        let total = spent.delta + next.delta;
        if total > cap * (1.0 + 1e-12) {
            return Err(CliError::Budget(format!(
                "delta would reach {total} (spent {}, this call {}), cap {cap}",
                spent.delta, next.delta
            )));
        }
    }
    Ok(())
}

fn append_ledger(path: &Path, run: &BudgetLedger, timestamp: &str) -> Result<(), CliError> {
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    for entry in run.entries() {
        let mut entry = entry.clone();
        entry.timestamp = Some(timestamp.to_owned());
        writeln!(file, "{}", serde_json::to_string(&entry)?)?;
    }
    Ok(())
}

pub fn private(args: &PrivateArgs, ledger_path: &Path) -> Result<(), CliError> {
    let cfg = PrivateConfig::from_args(args)?;
    let spent = read_ledger(ledger_path)?.basic_total();
    check_caps(args, spent, prospective_cost(args.estimator, &cfg.params))?;

    let data = load_dataset(&args.input.data, args.input.header)?;
    let group_b = args
        .group_b
        .as_deref()
        .map(|p| load_dataset(p, args.input.header))
        .transpose()?;
    let dirs = directions(args.depth.directions, data.d(), args.depth.seed)?;
    let mut noise = RandomSource::derive(args.depth.seed, "noise");
    let mut run = BudgetLedger::new();
    let timestamp = chrono::Utc::now().to_rfc3339();
    let kind = cfg.kind.expect("validated");
    let spec = DepthSpec::new(kind, &dirs).with_simplicial(config::simplicial_mode(&args.depth));
    let eta = cfg.eta.unwrap_or_else(|| default_eta(data.n()));
    let scale = match kind {
        DepthKind::Projection(s) => s,
        _ => Scale::Iqr,
    };

    let result = match args.estimator {
        Estimator::Point => {
            let x = cfg.point.as_deref().expect("validated");
            private_depth_point(x, &data, spec, &cfg.params, &mut run, &mut noise)
                .map(|r| Outcome::Depth(Box::new(r)))
        }
        Estimator::Vector => private_depth_vector(&data, spec, &cfg.params, &mut run, &mut noise)
            .map(|r| Outcome::Depth(Box::new(r))),
        Estimator::Projection => {
            let x = cfg.point.as_deref().expect("validated");
            private_projection_depth(
                x,
                &data,
                &dirs,
                scale,
                eta,
                &cfg.params,
                &mut run,
                &mut noise,
            )
            .map(|r| Outcome::Depth(Box::new(r)))
        }
        Estimator::MedianExp => {
            let grid = cfg.grid.as_ref().expect("validated");
            private_depth_median_exp(
                &data,
                spec,
                grid,
                &cfg.prior,
                cfg.params.epsilon,
                &mut run,
                &mut noise,
            )
            .map(|r| Outcome::Depth(Box::new(r)))
        }
        Estimator::MedianPtr => {
            let grid = cfg.grid.as_ref().expect("validated");
            let trunc =
                TruncatedOutlyingnessSpec::new(cfg.m_n.expect("validated"), scale, dirs.clone())?;
            private_projection_median_ptr(
                &data,
                &trunc,
                grid,
                eta,
                &cfg.params,
                &mut run,
                &mut noise,
            )
            .map(|r| Outcome::Depth(Box::new(r)))
        }
        Estimator::RankTest => {
            let b: &Dataset = group_b.as_ref().expect("validated");
            let mut perm = RandomSource::derive(args.depth.seed, "permutations");
            private_rank_sum_scale_test(
                &data,
                b,
                spec,
                &cfg.params,
                args.permutations,
                &mut run,
                &mut noise,
                &mut perm,
            )
            .map(|r| Outcome::Rank(Box::new(r)))
        }
    };
    // Whatever ran has been spent, even if a later step failed.
    append_ledger(ledger_path, &run, &timestamp)?;
    let value = match result? {
        Outcome::Depth(mut report) => {
            report.ledger_entry.timestamp = Some(timestamp);
            let audit = args.unsafe_audit.then(|| report.audit.clone());
            envelope(&report, audit.as_ref())?
        }
        Outcome::Rank(mut report) => {
            report.depth_report.ledger_entry.timestamp = Some(timestamp);
            let audit = args.unsafe_audit.then(|| report.depth_report.audit.clone());
            envelope(&report, audit.as_ref())?
        }
    };
    emit(&value, args.output.as_deref())
}

enum Outcome {
    Depth(Box<depthguard::PrivateDepthReport>),
    Rank(Box<depthguard::RankSumReport>),
}

fn write_rows(rows: &[TidyRow], output: Option<&Path>) -> Result<(), CliError> {
    write_tidy_csv(rows, sink(output)?).map_err(|e| CliError::Runtime(e.to_string()))
}

pub fn experiment(args: &ExperimentArgs) -> Result<(), CliError> {
    let which: Experiment = args
        .name
        .parse()
        .map_err(|e: DepthError| CliError::Config(e.to_string()))?;
    if args.reps == 0 {
        return Err(CliError::Config("--reps must be positive".into()));
    }
    let rows = run_standard(which, args.reps, args.seed)?;
    write_rows(&rows, args.output.as_deref())
}

pub fn audit(args: &AuditArgs) -> Result<(), CliError> {
    let rows = audit_experiment(
        args.n,
        args.epsilon,
        args.pairs,
        args.samples,
        args.bins,
        args.noise_factor,
        args.seed,
    )?;
    write_rows(&rows, None)
}

pub fn budget(args: &BudgetArgs, ledger_path: &Path) -> Result<(), CliError> {
    if let (Some(epsilon), Some(k), Some(delta_prime)) = (args.split, args.k, args.delta_prime) {
        let split = compose_advanced(epsilon, delta_prime, k)?;
        return emit(&envelope(&split, None)?, None);
    }
    let ledger = read_ledger(ledger_path)?;
    let basic = ledger.basic_total();
    let mut body = json!({
        "schema": SCHEMA,
        "entries": ledger.len(),
        "basic": basic,
    });
    if let Some(delta_prime) = args.delta_prime {
        let advanced = ledger.advanced_total(delta_prime)?;
        body["advanced"] = serde_json::to_value(advanced)?;
    }
    emit(&body, None)
}
