use std::path::{Path, PathBuf};
use std::time::Instant;

use fkgrad::synth::random_configurations;
use fkgrad::{
    extract_chain, pose_from_transform, run_identification, FkEngine, IdentifyConfig,
    IdentifyStatus, KinematicChain, RobotModel,
};
use fkgrad_bench::{run_bench, EngineFactory, Measurement, WARMUP_CALLS};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::CliError;
use crate::io::{load_model, read_configurations, read_text, to_json};

pub const SCHEMA: u32 = 1;

#[derive(Serialize)]
pub struct ChainInfo {
    pub base: String,
    pub end: String,
    pub n: usize,
    pub m: usize,
}

impl From<&KinematicChain> for ChainInfo {
    fn from(c: &KinematicChain) -> Self {
        Self {
            base: c.base_link().to_string(),
            end: c.end_link().to_string(),
            n: c.n(),
            m: c.m(),
        }
    }
}

#[derive(Serialize)]
pub struct Timing {
    pub seconds: f64,
}

#[derive(Serialize)]
pub struct Document<R, D> {
    pub schema: u32,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub results: R,
    pub diagnostics: D,
}

/// Where joint configurations come from.
#[derive(Clone, Debug)]
pub enum ConfigSource {
    File(PathBuf),
    Random { count: usize },
}

pub struct ChainArgs<'a> {
    pub urdf: &'a Path,
    pub base: &'a str,
    pub end: &'a str,
}

fn load_chain(args: &ChainArgs<'_>) -> Result<(RobotModel, KinematicChain), CliError> {
    let model = load_model(args.urdf)?;
    let chain = extract_chain(&model, args.base, args.end)?;
    Ok((model, chain))
}

fn load_thetas(source: &ConfigSource, chain: &KinematicChain, seed: u64) -> Result<(usize, Vec<f64>), CliError> {
    match source {
        ConfigSource::File(path) => {
            let c = read_configurations(path, chain.m())?;
            Ok((c.rows, c.values))
        }
        ConfigSource::Random { count } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((*count, random_configurations(&mut rng, chain, *count)))
        }
    }
}

fn timing(start: Instant, enabled: bool) -> Option<Timing> {
    enabled.then(|| Timing {
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Serialize)]
struct FkResult {
    index: usize,
    transform: [f64; 16],
    pose: [f64; 6],
    #[serde(skip_serializing_if = "Option::is_none")]
    intermediates: Option<Vec<[f64; 16]>>,
}

#[derive(Serialize)]
struct Violation {
    configuration: usize,
    dof: usize,
    value: f64,
    lower: f64,
    upper: f64,
}

#[derive(Serialize)]
struct FkDiagnostics {
    degenerate: Vec<bool>,
    limit_violations: Vec<Violation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timing: Option<Timing>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

pub fn cmd_fk(
    chain_args: &ChainArgs<'_>,
    source: &ConfigSource,
    seed: u64,
    intermediates: bool,
    format: Format,
    with_timing: bool,
) -> Result<String, CliError> {
    if intermediates && format == Format::Csv {
        return Err(CliError::Usage(
            "--intermediates is only available with --format json".into(),
        ));
    }
    let (_, chain) = load_chain(chain_args)?;
    let (rows, thetas) = load_thetas(source, &chain, seed)?;
    let m = chain.m();

    let start = Instant::now();
    let (finals, frames) = if rows == 0 {
        (Vec::new(), None)
    } else {
        let engine = FkEngine::new(chain.clone(), rows)?;
        if intermediates {
            let all = engine.forward_intermediates(&thetas)?;
            (all.finals(), Some(all))
        } else {
            (engine.forward(&thetas)?, None)
        }
    };
    let poses: Vec<_> = finals.iter().map(pose_from_transform).collect();
    let elapsed = timing(start, with_timing);

    if format == Format::Csv {
        let mut out = String::from("index,x,y,z,alpha,beta,gamma,degenerate\n");
        for (k, p) in poses.iter().enumerate() {
            let cols: Vec<String> = p.to_array().iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&format!("{k},{},{}\n", cols.join(","), p.degenerate));
        }
        return Ok(out);
    }

    let results = finals
        .iter()
        .zip(&poses)
        .enumerate()
        .map(|(k, (t, p))| FkResult {
            index: k,
            transform: t.to_row_major(),
            pose: p.to_array(),
            intermediates: frames
                .as_ref()
                .map(|f| f.element(k).iter().map(|t| t.to_row_major()).collect()),
        })
        .collect::<Vec<_>>();
    let limit_violations = (0..rows)
        .flat_map(|k| {
            chain
                .limit_violations(&thetas[k * m..(k + 1) * m])
                .into_iter()
                .map(move |v| Violation {
                    configuration: k,
                    dof: v.dof,
                    value: v.value,
                    lower: v.lower,
                    upper: v.upper,
                })
        })
        .collect();
    to_json(&Document {
        schema: SCHEMA,
        command: "fk",
        chain: Some((&chain).into()),
        seed: Some(seed),
        results,
        diagnostics: FkDiagnostics {
            degenerate: poses.iter().map(|p| p.degenerate).collect(),
            limit_violations,
            timing: elapsed,
        },
    })
}

#[derive(Serialize)]
struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Serialize)]
struct JacobianResult {
    index: usize,
    pose: [f64; 6],
    jacobian: Matrix,
}

#[derive(Serialize)]
struct JacobianDiagnostics {
    degenerate: Vec<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timing: Option<Timing>,
}

pub fn cmd_jacobian(
    chain_args: &ChainArgs<'_>,
    source: &ConfigSource,
    seed: u64,
    with_timing: bool,
) -> Result<String, CliError> {
    let (_, chain) = load_chain(chain_args)?;
    let (rows, thetas) = load_thetas(source, &chain, seed)?;

    let start = Instant::now();
    let (poses, jacobians) = if rows == 0 {
        (Vec::new(), Vec::new())
    } else {
        let engine = FkEngine::new(chain.clone(), rows)?;
        (engine.poses(&thetas)?, engine.pose_jacobians(&thetas)?)
    };
    let elapsed = timing(start, with_timing);

    let results = poses
        .iter()
        .zip(&jacobians)
        .enumerate()
        .map(|(k, (p, j))| JacobianResult {
            index: k,
            pose: p.to_array(),
            jacobian: Matrix {
                rows: j.rows(),
                cols: j.cols(),
                data: j.as_slice().to_vec(),
            },
        })
        .collect::<Vec<_>>();
    to_json(&Document {
        schema: SCHEMA,
        command: "jacobian",
        chain: Some((&chain).into()),
        seed: Some(seed),
        results,
        diagnostics: JacobianDiagnostics {
            degenerate: poses.iter().map(|p| p.degenerate).collect(),
            timing: elapsed,
        },
    })
}

#[derive(Serialize)]
struct IdentifyResult {
    target_link: String,
    status: IdentifyStatus,
    steps: usize,
    final_loss: f64,
    estimated: [f64; 6],
    ground_truth: [f64; 6],
    pose_error: [f64; 6],
    param_error: [f64; 6],
}

#[derive(Serialize)]
struct IdentifyDiagnostics {
    num_configurations: usize,
    batch_size: usize,
    learning_rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    timing: Option<Timing>,
}

/// Returns the document and whether the run converged.
pub fn cmd_identify(urdf: &Path, config: &Path, with_timing: bool) -> Result<(String, bool), CliError> {
    let model = load_model(urdf)?;
    let config: IdentifyConfig =
        serde_json::from_str(&read_text(config)?).map_err(|e| CliError::Parse {
            path: config.to_path_buf(),
            message: e.to_string(),
        })?;
    let chain = extract_chain(&model, &config.base, &config.end)?;

    let start = Instant::now();
    let report = run_identification(&model, &config)?;
    let elapsed = timing(start, with_timing);

    let doc = to_json(&Document {
        schema: SCHEMA,
        command: "identify",
        chain: Some((&chain).into()),
        seed: Some(config.seed),
        results: IdentifyResult {
            target_link: config.target_link.clone(),
            status: report.status,
            steps: report.steps,
            final_loss: report.final_loss,
            estimated: report.estimated.0,
            ground_truth: report.ground_truth.0,
            pose_error: report.pose_error,
            param_error: report.param_error,
        },
        diagnostics: IdentifyDiagnostics {
            num_configurations: config.num_configurations,
            batch_size: config.batch_size,
            learning_rate: config.learning_rate,
            timing: elapsed,
        },
    })?;
    Ok((doc, report.converged()))
}

#[derive(Serialize)]
struct BenchRow {
    #[serde(flatten)]
    measurement: Measurement,
    baseline_ratio: f64,
}

#[derive(Serialize)]
struct BenchResult {
    measurements: Vec<BenchRow>,
    baseline: Measurement,
}

#[derive(Serialize)]
struct BenchDiagnostics {
    machine: String,
    threads: usize,
    op: &'static str,
    warmup_calls: usize,
    min_seconds: f64,
}

pub fn cmd_bench(chain_args: &ChainArgs<'_>, batch_sizes: &[usize], seconds: f64) -> Result<String, CliError> {
    if !(seconds.is_finite() && seconds > 0.0) {
        return Err(CliError::Usage("--seconds must be positive".into()));
    }
    let model = load_model(chain_args.urdf)?;
    let factory = EngineFactory::new(model, chain_args.base, chain_args.end)?;
    let report = run_bench(&factory, batch_sizes, seconds)?;
    let base = report.baseline_ops_per_sec();
    to_json(&Document {
        schema: SCHEMA,
        command: "bench",
        chain: Some(factory.chain().into()),
        seed: Some(0),
        results: BenchResult {
            measurements: report
                .measurements
                .iter()
                .map(|m| BenchRow {
                    measurement: m.clone(),
                    baseline_ratio: m.ops_per_sec / base,
                })
                .collect(),
            baseline: report.baseline.clone(),
        },
        diagnostics: BenchDiagnostics {
            machine: report.machine.clone(),
            threads: report.threads,
            op: report.op,
            warmup_calls: WARMUP_CALLS,
            min_seconds: seconds,
        },
    })
}

#[derive(Serialize)]
struct JointSummary {
    name: String,
    #[serde(rename = "type")]
    kind: String,
    parent: String,
    child: String,
    dof: usize,
    limits: Option<[f64; 2]>,
}

#[derive(Serialize)]
struct ValidateResult {
    robot: String,
    root: String,
    links: usize,
    joints: Vec<JointSummary>,
    total_dof: usize,
    leaf_chains: Vec<ChainInfo>,
}

pub fn cmd_validate(urdf: &Path) -> Result<String, CliError> {
    let model = load_model(urdf)?;
    let joints = model
        .joints()
        .iter()
        .map(|j| JointSummary {
            name: j.name.clone(),
            kind: j.joint_type.to_string(),
            parent: j.parent_link.clone(),
            child: j.child_link.clone(),
            dof: j.dof(),
            limits: j.limits.map(|l| [l.lower, l.upper]),
        })
        .collect();
    to_json(&Document {
        schema: SCHEMA,
        command: "validate",
        chain: None,
        seed: None,
        results: ValidateResult {
            robot: model.name().to_string(),
            root: model.root_link().to_string(),
            links: model.links().len(),
            joints,
            total_dof: model.total_dof(),
            leaf_chains: model.leaf_chains().iter().map(ChainInfo::from).collect(),
        },
        diagnostics: serde_json::json!({}),
    })
}
