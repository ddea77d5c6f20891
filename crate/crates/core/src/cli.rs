//! The `heatreg` command line.
//!
//! Every subcommand validates all flags before computing anything and writes
//! its output file only once the full result is available, so a failed run
//! never leaves a partial file behind. Exit codes: 0 on success, 2 on invalid
//! arguments, 1 on numerical, format or I/O failures.
//!
//! `--config FILE` reads `key = value` lines (keys are flag names, with `_`
//! or `-`) that act as defaults; flags on the command line override them.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::datasets::{
    dataset_to_csv_string, generate_ring, generate_spiral, generate_two_clusters,
    generate_two_moons, label_k_per_class, load_idx, read_dataset_csv, LabeledDataset,
};
use crate::diffusion::{contiguity_violations, propagate_with, PropagationState};
use crate::error::{Error, Result};
use crate::eval::{
    boundary_grid, error_rate, predict_signs, sweep_labeled_counts, Bounds, SweepTask,
    DEFAULT_COUNTS,
};
use crate::pipeline::{diffusion_transition, geometry, train, ModelKind};
use crate::solvers::{Classifier, DiffusionMetric, ModelParams};

#[derive(Parser, Debug)]
#[command(
    name = "heatreg",
    version,
    about = "Semi-supervised classification with geodesic diffusion and heat-kernel regularization",
    args_override_self = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a synthetic or MNIST dataset as CSV (x1..xd,label,true_class).
    Generate(GenerateArgs),
    /// Run clamped label propagation and write the per-step trace.
    Propagate(PropagateArgs),
    /// Train one model and write it as JSON.
    Train(TrainArgs),
    /// Error rates over labelled counts and trials, as CSV (and JSON).
    Sweep(SweepArgs),
    /// Classify random points around a 2-D dataset to trace the boundary.
    Boundary(BoundaryArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DatasetKind {
    TwoMoons,
    Ring,
    TwoClusters,
    Spiral,
    Mnist,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Geodesic,
    Euclidean,
}

impl From<MetricArg> for DiffusionMetric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Geodesic => DiffusionMetric::Geodesic,
            MetricArg::Euclidean => DiffusionMetric::Euclidean,
        }
    }
}

/// Model hyperparameters; flag names follow [`ModelParams`] fields.
#[derive(Args, Debug, Clone)]
pub struct ParamArgs {
    /// Weight of the kernel norm (> 0).
    #[arg(long = "gamma-a", default_value_t = 0.00025)]
    pub gamma_a: f64,
    /// Weight of the manifold penalty (>= 0).
    #[arg(long = "gamma-i", default_value_t = 0.925)]
    pub gamma_i: f64,
    /// Kernel bandwidth; default is the median squared pairwise distance.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Diffusion steps t.
    #[arg(long = "steps", visible_alias = "diffusion-steps", default_value_t = 1)]
    pub steps: usize,
    /// Neighbours per point in the k-NN graph.
    #[arg(long = "knn", visible_alias = "knn-k", default_value_t = 10)]
    pub knn: usize,
    /// Relabel threshold on |u| after propagation, in (0, 1).
    #[arg(long, default_value_t = 1e-4)]
    pub tau: f64,
    /// Diagonal shift tried once if the system is ill-conditioned.
    #[arg(long = "ridge-jitter", default_value_t = 0.0)]
    pub ridge_jitter: f64,
    /// Applications of P per diffusion step; default round(1/epsilon), >= 1.
    #[arg(long = "steps-per-unit")]
    pub steps_per_unit: Option<usize>,
    /// Distance used by the diffusion transition matrix.
    #[arg(long, value_enum, default_value_t = MetricArg::Geodesic)]
    pub metric: MetricArg,
    /// Floyd–Warshall intermediates (matrix form); default relaxes all.
    #[arg(long = "fw-passes")]
    pub fw_passes: Option<usize>,
}

impl ParamArgs {
    pub fn to_params(&self) -> ModelParams {
        ModelParams {
            gamma_a: self.gamma_a,
            gamma_i: self.gamma_i,
            epsilon: self.epsilon,
            diffusion_steps: self.steps,
            knn_k: self.knn,
            tau: self.tau,
            ridge_jitter: self.ridge_jitter,
            steps_per_unit: self.steps_per_unit,
            diffusion_metric: self.metric.into(),
            fw_passes: self.fw_passes,
        }
    }
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub dataset: DatasetKind,
    /// Number of points (synthetic sets).
    #[arg(long, default_value_t = 400)]
    pub n: usize,
    /// Noise standard deviation; default 0.1 (moons, ring) or 0.5 (clusters).
    #[arg(long)]
    pub noise: Option<f64>,
    /// Spiral turns.
    #[arg(long, default_value_t = 3.0)]
    pub turns: f64,
    /// Label this many samples per side (0 leaves everything unlabelled).
    #[arg(long = "labels-per-class", default_value_t = 0)]
    pub labels_per_class: usize,
    /// Class labelled +1; every other class is labelled -1.
    #[arg(long = "positive-class", default_value_t = 0)]
    pub positive_class: usize,
    /// IDX image file (mnist).
    #[arg(long)]
    pub images: Option<PathBuf>,
    /// IDX label file (mnist).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Digits to keep (mnist); default all.
    #[arg(long, value_delimiter = ',')]
    pub digits: Vec<usize>,
    /// Images kept per digit (mnist); default all.
    #[arg(long = "per-class")]
    pub per_class: Option<usize>,
    /// Images of each digit skipped before keeping `per-class` (mnist).
    #[arg(long, default_value_t = 0)]
    pub offset: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct PropagateArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Clamp these indices instead of the file's labels: `i` (value +1) or
    /// `i:-1`.
    #[arg(long, value_delimiter = ',')]
    pub clamp: Vec<String>,
    /// A point counts as coloured when |u| exceeds this.
    #[arg(long, default_value_t = 1e-2)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, value_parser = parse_model)]
    pub model: ModelKind,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Class counted as +1 when reporting the training error.
    #[arg(long = "positive-class", default_value_t = 0)]
    pub positive_class: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Training pool; its labels are ignored.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Held-out points; default evaluates on the training pool.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', value_parser = parse_model, default_value = "nhkrls,laprls,ls")]
    pub models: Vec<ModelKind>,
    /// Labelled samples per side; default 2,4,...,256.
    #[arg(long, value_delimiter = ',')]
    pub counts: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long = "positive-class", default_value_t = 0)]
    pub positive_class: usize,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Record wall times in the seconds column (output is then no longer
    /// reproducible byte for byte).
    #[arg(long)]
    pub timings: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub output: PathBuf,
    /// Also write the rows as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BoundaryArgs {
    /// Labelled 2-D training set.
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, value_parser = parse_model, default_value = "nhkrls")]
    pub model: ModelKind,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 6000)]
    pub samples: usize,
    /// Padding around the data's bounding box.
    #[arg(long, default_value_t = 0.5)]
    pub margin: f64,
    /// Explicit x_min,x_max,y_min,y_max.
    #[arg(long, value_delimiter = ',', num_args = 4)]
    pub bounds: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub output: PathBuf,
}

fn parse_model(s: &str) -> std::result::Result<ModelKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Parses `key = value` lines into command-line arguments.
fn config_args(text: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::invalid(format!("config line {}: expected key = value", no + 1))
        })?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() {
            return Err(Error::invalid(format!("config line {}: empty key", no + 1)));
        }
        match value {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            _ => {
                out.push(format!("--{key}"));
                out.push(value.to_string());
            }
        }
    }
    Ok(out)
}

/// Removes `--config FILE` and splices the file's arguments in right after
/// the subcommand, so later command-line flags override them.
fn expand_config(mut args: Vec<String>) -> Result<Vec<String>> {
    let mut path = None;
    let mut i = 1;
    while i < args.len() {
        if args[i] == "--config" {
            if i + 1 >= args.len() {
                return Err(Error::invalid("--config needs a file path"));
            }
            path = Some(args.remove(i + 1));
            args.remove(i);
        } else if let Some(p) = args[i].strip_prefix("--config=") {
            path = Some(p.to_string());
            args.remove(i);
        } else {
            i += 1;
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| Error::invalid(format!("cannot read config {path}: {e}")))?;
    let extra = config_args(&text)?;
    let at = args
        .iter()
        .skip(1)
        .position(|a| !a.starts_with('-'))
        .map_or(args.len(), |p| p + 2);
    args.splice(at..at, extra);
    Ok(args)
}

/// Writes through a sibling temporary file so the target only ever holds a
/// complete result.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

fn load_csv(path: &Path) -> Result<LabeledDataset> {
    let file = fs::File::open(path)
        .map_err(|e| Error::invalid(format!("cannot open {}: {e}", path.display())))?;
    read_dataset_csv(std::io::BufReader::new(file))
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<String> {
    let ds = match a.dataset {
        DatasetKind::TwoMoons => generate_two_moons(a.n, a.noise.unwrap_or(0.1), a.seed)?,
        DatasetKind::Ring => generate_ring(a.n, a.noise.unwrap_or(0.1), a.seed)?,
        DatasetKind::TwoClusters => generate_two_clusters(a.n, a.noise.unwrap_or(0.5), a.seed)?,
        DatasetKind::Spiral => generate_spiral(a.n, a.turns)?,
        DatasetKind::Mnist => {
            let (Some(images), Some(labels)) = (&a.images, &a.labels) else {
                return Err(Error::invalid("mnist needs --images and --labels"));
            };
            let (points, digits) = load_idx(images, labels)?;
            let mut seen = [0usize; 256];
            let mut keep = Vec::new();
            for (i, &d) in digits.iter().enumerate() {
                if !a.digits.is_empty() && !a.digits.contains(&d) {
                    continue;
                }
                let rank = seen[d];
                seen[d] += 1;
                if rank >= a.offset && a.per_class.is_none_or(|k| rank < a.offset + k) {
                    keep.push(i);
                }
            }
            if keep.is_empty() {
                return Err(Error::invalid("no images match the digit selection"));
            }
            let pts = keep.iter().map(|&i| points[i].clone()).collect();
            let cls = keep.iter().map(|&i| digits[i]).collect();
            LabeledDataset::unlabeled(pts, cls)?
        }
    };
    let ds = if a.labels_per_class > 0 {
        let classes = ds.classes().to_vec();
        label_k_per_class(&ds, &classes, a.labels_per_class, a.positive_class, a.seed)?
    } else {
        ds
    };
    dataset_to_csv_string(&ds)
}

fn parse_clamps(specs: &[String], n: usize) -> Result<(Vec<usize>, Vec<f64>)> {
    let mut idx = Vec::new();
    let mut vals = Vec::new();
    for s in specs {
        let (i, v) = match s.split_once(':') {
            Some((i, v)) => (i, v),
            None => (s.as_str(), "1"),
        };
        let i: usize = i
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad clamp index {s:?}")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad clamp value {s:?}")))?;
        if i >= n {
            return Err(Error::invalid(format!(
                "clamp index {i} out of range for {n} points"
            )));
        }
        idx.push(i);
        vals.push(v);
    }
    Ok((idx, vals))
}

/// Per-step summary of a propagation run.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceSummary {
    /// `(step, coloured count, contiguity violations)` for steps 0..=t.
    pub steps: Vec<(usize, usize, usize)>,
}

impl TraceSummary {
    pub fn first_violation(&self) -> Option<usize> {
        self.steps.iter().find(|s| s.2 > 0).map(|s| s.0)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (step, colored, viol) in &self.steps {
            let _ = writeln!(out, "step {step}: colored {colored}, violations {viol}");
        }
        match self.first_violation() {
            None => out.push_str("contiguous at every step\n"),
            Some(s) => {
                let _ = writeln!(out, "NOT contiguous: first violation at step {s}");
            }
        }
        out
    }
}

/// Returns the trace CSV and its summary.
pub fn cmd_propagate(a: &PropagateArgs) -> Result<(String, TraceSummary)> {
    let mut params = a.params.to_params();
    params.diffusion_steps = params.diffusion_steps.max(1);
    params.validate()?;
    if !(a.threshold >= 0.0 && a.threshold.is_finite()) {
        return Err(Error::invalid("threshold must be finite and >= 0"));
    }
    let ds = load_csv(&a.input)?;
    let mut state = if a.clamp.is_empty() {
        PropagationState::from_dataset(&ds)
    } else {
        let (idx, vals) = parse_clamps(&a.clamp, ds.len())?;
        PropagationState::new(ds.len(), idx, vals)?
    };
    let geo = geometry(&ds, &params)?;
    let p = diffusion_transition(&geo, &params)?;

    let mut csv = String::from("step,index,u\n");
    let mut summary = TraceSummary { steps: Vec::new() };
    let mut record = |s: &PropagationState| {
        for (i, v) in s.values().iter().enumerate() {
            let _ = writeln!(csv, "{},{},{}", s.t(), i, v);
        }
        let colored = s.values().iter().filter(|v| v.abs() > a.threshold).count();
        summary.steps.push((
            s.t(),
            colored,
            contiguity_violations(s.values(), a.threshold),
        ));
    };
    record(&state);
    propagate_with(&p, &mut state, a.params.steps, &mut record)?;
    Ok((csv, summary))
}

#[derive(Serialize)]
struct TrainOutput<'a> {
    model: ModelKind,
    params: &'a ModelParams,
    epsilon: Option<f64>,
    labeled_before: usize,
    labeled_after: usize,
    condition: Option<f64>,
    train_error: f64,
    classifier: &'a Classifier,
}

pub fn cmd_train(a: &TrainArgs) -> Result<String> {
    let params = a.params.to_params();
    params.validate()?;
    let ds = load_csv(&a.input)?;
    let report = train(&ds, a.model, &params)?;
    let preds = predict_signs(&report.classifier, ds.points())?;
    let train_error = error_rate(&preds, &ds.truth_signs(a.positive_class))?;
    let out = TrainOutput {
        model: a.model,
        params: &params,
        epsilon: report.epsilon,
        labeled_before: report.labeled_before,
        labeled_after: report.labeled_after,
        condition: report.condition,
        train_error,
        classifier: &report.classifier,
    };
    let mut s = serde_json::to_string_pretty(&out).map_err(|e| Error::Format(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Returns the CSV and JSON renderings.
pub fn cmd_sweep(a: &SweepArgs) -> Result<(String, String)> {
    let params = a.params.to_params();
    params.validate()?;
    if a.trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    let counts: Vec<usize> = if a.counts.is_empty() {
        DEFAULT_COUNTS.to_vec()
    } else {
        a.counts.clone()
    };
    let ds = load_csv(&a.input)?;
    let test = a.test.as_deref().map(load_csv).transpose()?;
    let eval_set = test.as_ref().unwrap_or(&ds);
    let truths = eval_set.truth_signs(a.positive_class);
    let task = SweepTask {
        train: &ds,
        positive_class: a.positive_class,
        test_points: eval_set.points(),
        test_truths: &truths,
    };
    let result = sweep_labeled_counts(
        task, &a.models, &counts, a.trials, a.seed, &params, a.timings,
    )?;
    let mut json = result.to_json();
    json.push('\n');
    Ok((result.to_csv(), json))
}

pub fn cmd_boundary(a: &BoundaryArgs) -> Result<String> {
    let params = a.params.to_params();
    params.validate()?;
    if !(a.margin >= 0.0 && a.margin.is_finite()) {
        return Err(Error::invalid("margin must be finite and >= 0"));
    }
    let ds = load_csv(&a.input)?;
    if ds.dim() != 2 {
        return Err(Error::invalid(format!(
            "boundary needs a 2-D dataset, got dimension {}",
            ds.dim()
        )));
    }
    let bounds = match &a.bounds {
        Some(b) => Bounds {
            x_min: b[0],
            x_max: b[1],
            y_min: b[2],
            y_max: b[3],
        },
        None => Bounds::around(ds.points(), a.margin)?,
    };
    let report = train(&ds, a.model, &params)?;
    Ok(boundary_grid(&report.classifier, bounds, a.samples, a.seed)?.to_csv())
}

fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(a) => write_atomic(&a.output, &cmd_generate(a)?),
        Command::Propagate(a) => {
            let (csv, summary) = cmd_propagate(a)?;
            write_atomic(&a.output, &csv)?;
            print!("{}", summary.render());
            Ok(())
        }
        Command::Train(a) => write_atomic(&a.output, &cmd_train(a)?),
        Command::Sweep(a) => {
            let (csv, json) = cmd_sweep(a)?;
            write_atomic(&a.output, &csv)?;
            if let Some(path) = &a.json {
                write_atomic(path, &json)?;
            }
            Ok(())
        }
        Command::Boundary(a) => write_atomic(&a.output, &cmd_boundary(a)?),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<String> = args
        .into_iter()
        .map(|a| a.into().to_string_lossy().into_owned())
        .collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
