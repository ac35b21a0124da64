//! The `ranklab` command line: dataset generation, training with CSV
//! trajectories, the oracle suites, and the built-in experiment recipes.
//!
//! Exit codes: `0` success, `1` failing oracle or other runtime error,
//! `2` uncertifiable dataset parameters (and command-line usage errors),
//! `3` training divergence, `4` recipe rank assertion failed.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use crate::datagen::{
    dataset_to_bytes, default_init_rank, low_rank_init, read_dataset, synth_certified,
    synth_dataset, InitScale,
};
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, RankTolerance};
use crate::netcore::{Activation, ActivationKind, Dataset, LayerDims, NetworkWeights};
use crate::noisekit::{NoiseMode, NoiseSpec};
use crate::oracle::{run_suite, Suite, SuiteConfig};
use crate::trainer::{train, RankTrajectory, TrainConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_UNCERTIFIABLE: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;
pub const EXIT_RANK_ASSERTION: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "ranklab",
    version,
    about = "Rank trajectories of multi-layer networks trained with noise"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a certified synthetic dataset.
    GenData(GenDataArgs),
    /// Train a network and write its rank trajectory as CSV.
    Train(TrainArgs),
    /// Run oracle suites; exit 1 if any fails.
    Verify(VerifyArgs),
    /// Run a named experiment recipe; exit 4 if the final rank is off.
    Recipe(RecipeArgs),
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[arg(long)]
    pub dx: usize,
    #[arg(long)]
    pub dy: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; the certificate is still printed when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Dataset file written by `gen-data`.
    #[arg(long)]
    pub data: PathBuf,
    /// Layer widths from input to output, e.g. `1000x500x250`.
    #[arg(long)]
    pub dims: LayerDims,
    #[arg(long, default_value = "linear")]
    pub act: ActivationKind,
    /// Apply the activation at the output layer too.
    #[arg(long)]
    pub act_output: bool,
    /// none | grad:σ | input:β | output:σ | dropout-b:p | dropout-g:σ
    #[arg(long, default_value = "none")]
    pub noise: NoiseMode,
    #[arg(long)]
    pub lr: f64,
    #[arg(long)]
    pub iters: usize,
    /// Mini-batch size; 0 for full batch.
    #[arg(long, default_value_t = 0)]
    pub batch: usize,
    /// Rank of each initial layer; defaults to ⌊0.4·min(d_x, d_y)⌋.
    #[arg(long)]
    pub init_rank: Option<usize>,
    /// Multiplier on the fan-in initial scale.
    #[arg(long, default_value_t = 1.0)]
    pub init_gain: f64,
    /// Seeds initialisation, noise and batch order.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value = "all")]
    pub suite: Suite,
    /// Overrides every check's default trial count.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Run the harness against a rank bump that does nothing.
    #[arg(long, hide = true)]
    pub tamper_rank_bump: bool,
}

#[derive(Debug, Args)]
pub struct RecipeArgs {
    /// One of fig1, fig2, fig3, fig4a, fig4b.
    pub name: String,
    /// Load the recipe from this file instead of the built-in one.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Override the iteration count.
    #[arg(long)]
    pub iters: Option<usize>,
    /// Reseed data, initialisation and noise.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write a gnuplot script plotting the arms.
    #[arg(long)]
    pub gnuplot: bool,
}

/// Writes `bytes` to a temporary file next to `path`, then renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        file_name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

/// Checksum over the layer shapes and row-major little-endian entries.
pub fn weights_sha256(w: &NetworkWeights) -> String {
    let mut h = Sha256::new();
    for layer in w.layers() {
        h.update((layer.rows() as u64).to_le_bytes());
        h.update((layer.cols() as u64).to_le_bytes());
        for v in layer.as_slice() {
            h.update(v.to_le_bytes());
        }
    }
    hex(&h.finalize())
}

/// `iter,loss,rank_product,rank_w1,…,rank_wH`, one row per record. Layer
/// rank columns are left empty for records without them.
pub fn trajectory_csv(traj: &RankTrajectory, depth: usize) -> String {
    let mut s = String::from("iter,loss,rank_product");
    for i in 1..=depth {
        let _ = write!(s, ",rank_w{i}");
    }
    s.push('\n');
    for r in &traj.records {
        let _ = write!(s, "{},{},{}", r.iteration, r.loss, r.rank_product);
        for i in 0..depth {
            s.push(',');
            if let Some(v) = r.layer_ranks.as_ref().and_then(|l| l.get(i)) {
                let _ = write!(s, "{v}");
            }
        }
        s.push('\n');
    }
    s
}

/// Parsed `key = value` lines; `#` starts a comment line.
#[derive(Clone, Debug, Default)]
struct KeyValues(Vec<(String, String, usize)>);

impl KeyValues {
    fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<(String, String, usize)> = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            let key = k.trim().to_string();
            if entries.iter().any(|(e, _, _)| *e == key) {
                return Err(Error::Config(format!(
                    "line {}: duplicate key '{key}'",
                    n + 1
                )));
            }
            entries.push((key, v.trim().to_string(), n + 1));
        }
        Ok(Self(entries))
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.0
            .iter()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, _)| v.as_str())
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::Config(format!("{key}: {e}")))
            })
            .transpose()
    }

    fn require<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?
            .ok_or_else(|| Error::Config(format!("missing key '{key}'")))
    }
}

pub const RECIPE_VERSION: u32 = 1;
pub const RECIPE_NAMES: [&str; 5] = ["fig1", "fig2", "fig3", "fig4a", "fig4b"];

#[derive(Clone, Debug, PartialEq)]
pub struct RecipeArm {
    pub label: String,
    pub config: TrainConfig,
}

/// A named experiment: shared dataset and initial weights, several training
/// arms, and the final rank one arm must reach.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRecipe {
    pub name: String,
    pub dims: LayerDims,
    pub activation: Activation,
    pub samples: usize,
    pub data_seed: u64,
    pub init_rank: usize,
    pub init_scale: InitScale,
    pub init_seed: u64,
    pub arms: Vec<RecipeArm>,
    pub expected_arm: String,
    pub expected_final_rank: usize,
    /// Arm that must finish below full rank, if any.
    pub below_full_arm: Option<String>,
}

impl ExperimentRecipe {
    pub fn builtin(name: &str) -> Result<Self> {
        let text = match name {
            "fig1" => include_str!("../recipes/fig1.conf"),
            "fig2" => include_str!("../recipes/fig2.conf"),
            "fig3" => include_str!("../recipes/fig3.conf"),
            "fig4a" => include_str!("../recipes/fig4a.conf"),
            "fig4b" => include_str!("../recipes/fig4b.conf"),
            other => {
                return Err(Error::Config(format!(
                    "unknown recipe '{other}' (known: {})",
                    RECIPE_NAMES.join(", ")
                )))
            }
        };
        Self::parse(text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let kv = KeyValues::parse(text)?;
        let version: u32 = kv.require("version")?;
        if version != RECIPE_VERSION {
            return Err(Error::Config(format!(
                "unsupported recipe version {version}"
            )));
        }
        let dims: LayerDims = kv.require("dims")?;
        let kind: ActivationKind = kv.require("activation")?;
        let at_output: bool = kv.get("activation_at_output")?.unwrap_or(false);
        let activation = Activation { kind, at_output };
        let data_seed: u64 = kv.require("data_seed")?;
        let init_rank = kv
            .get("init_rank")?
            .unwrap_or_else(|| default_init_rank(&dims));
        let gain: f64 = kv.get("init_gain")?.unwrap_or(1.0);
        let base = TrainConfig {
            learning_rate: kv.require("learning_rate")?,
            iterations: kv.require("iterations")?,
            batch_size: kv.get("batch_size")?.unwrap_or(0),
            noise: NoiseSpec::none(),
            rank_tol: RankTolerance::DEFAULT,
            record_layer_ranks: kv.get("record_layer_ranks")?.unwrap_or(true),
            seed: data_seed,
        };
        let noise_seed: u64 = kv.get("noise_seed")?.unwrap_or(data_seed);
        let labels: String = kv.require("arms")?;
        let mut arms = Vec::new();
        for label in labels.split(',').map(str::trim).filter(|l| !l.is_empty()) {
            let mode: NoiseMode = kv.require(&format!("arm.{label}.noise"))?;
            let mut config = base.clone();
            config.noise = NoiseSpec::new(mode, noise_seed)?;
            if let Some(lr) = kv.get(&format!("arm.{label}.learning_rate"))? {
                config.learning_rate = lr;
            }
            arms.push(RecipeArm {
                label: label.to_string(),
                config,
            });
        }
        let known = |key: &str| {
            matches!(
                key,
                "version"
                    | "name"
                    | "dims"
                    | "activation"
                    | "activation_at_output"
                    | "samples"
                    | "data_seed"
                    | "init_rank"
                    | "init_gain"
                    | "init_seed"
                    | "learning_rate"
                    | "iterations"
                    | "batch_size"
                    | "record_layer_ranks"
                    | "noise_seed"
                    | "arms"
                    | "expected_arm"
                    | "expected_final_rank"
                    | "below_full_arm"
            ) || arms.iter().any(|a| {
                key == format!("arm.{}.noise", a.label)
                    || key == format!("arm.{}.learning_rate", a.label)
            })
        };
        if let Some((key, _, line)) = kv.0.iter().find(|(k, _, _)| !known(k)) {
            return Err(Error::Config(format!("line {line}: unknown key '{key}'")));
        }
        let recipe = Self {
            name: kv.require("name")?,
            samples: kv.require("samples")?,
            data_seed,
            init_rank,
            init_scale: InitScale::FanIn { gain },
            init_seed: kv.get("init_seed")?.unwrap_or(data_seed),
            expected_arm: kv.require("expected_arm")?,
            expected_final_rank: kv.require("expected_final_rank")?,
            below_full_arm: kv.get("below_full_arm")?,
            dims,
            activation,
            arms,
        };
        recipe.validate()?;
        Ok(recipe)
    }

    fn validate(&self) -> Result<()> {
        if self.arms.is_empty() {
            return Err(Error::Config("recipe has no arms".into()));
        }
        for label in std::iter::once(&self.expected_arm).chain(&self.below_full_arm) {
            if !self.arms.iter().any(|a| &a.label == label) {
                return Err(Error::Config(format!("no arm named '{label}'")));
            }
        }
        if self.expected_final_rank > self.full_rank() {
            return Err(Error::Config(format!(
                "expected_final_rank {} exceeds min(d_x, d_y) = {}",
                self.expected_final_rank,
                self.full_rank()
            )));
        }
        Ok(())
    }

    pub fn full_rank(&self) -> usize {
        self.dims.input().min(self.dims.output())
    }

    /// Uses `seed` for the data, the initial weights, batches and noise.
    pub fn reseed(&mut self, seed: u64) {
        self.data_seed = seed;
        self.init_seed = seed;
        for arm in &mut self.arms {
            arm.config.seed = seed;
            arm.config.noise.seed = seed;
        }
    }

    pub fn set_iterations(&mut self, iterations: usize) {
        for arm in &mut self.arms {
            arm.config.iterations = iterations;
        }
    }

    pub fn dataset(&self) -> Result<Dataset> {
        synth_dataset(
            self.dims.input(),
            self.dims.output(),
            self.samples,
            self.data_seed,
        )
    }

    pub fn initial_weights(&self) -> Result<NetworkWeights> {
        low_rank_init(&self.dims, self.init_rank, self.init_scale, self.init_seed)
    }

    pub fn arm(&self, label: &str) -> Option<&RecipeArm> {
        self.arms.iter().find(|a| a.label == label)
    }
}

#[derive(Clone, Debug)]
pub struct ArmOutcome {
    pub label: String,
    pub trajectory: RankTrajectory,
    pub diverged: bool,
}

#[derive(Clone, Debug)]
pub struct RecipeOutcome {
    pub dataset_sha256: String,
    pub init_sha256: String,
    pub arms: Vec<ArmOutcome>,
    /// Every rank assertion of the recipe held.
    pub rank_ok: bool,
    /// Human-readable log, also written next to the CSVs.
    pub log: String,
}

impl RecipeOutcome {
    pub fn arm(&self, label: &str) -> Option<&ArmOutcome> {
        self.arms.iter().find(|a| a.label == label)
    }
}

#[derive(Clone, Debug, Default)]
pub struct RecipeOutput {
    /// Where to write `<name>_<arm>.csv` and `<name>.log`; nothing is
    /// written when `None`.
    pub dir: Option<PathBuf>,
    pub gnuplot: bool,
}

fn gnuplot_script(recipe: &ExperimentRecipe) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set xlabel 'iteration'");
    let _ = writeln!(s, "set ylabel 'rank of product'");
    let _ = writeln!(s, "set title '{} ({})'", recipe.name, recipe.dims);
    let plots: Vec<String> = recipe
        .arms
        .iter()
        .map(|a| {
            format!(
                "'{}_{}.csv' using 1:3 with lines title '{}'",
                recipe.name, a.label, a.label
            )
        })
        .collect();
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    s
}

/// Trains every arm of `recipe` from the same data and initial weights and
/// checks the expected ranks.
pub fn run_recipe(recipe: &ExperimentRecipe, output: &RecipeOutput) -> Result<RecipeOutcome> {
    let (dataset, cert) = synth_certified(
        recipe.dims.input(),
        recipe.dims.output(),
        recipe.samples,
        recipe.data_seed,
    )?;
    let w0 = recipe.initial_weights()?;
    let dataset_sha256 = sha256_hex(&dataset_to_bytes(&dataset));
    let init_sha256 = weights_sha256(&w0);

    let mut log = String::new();
    let _ = writeln!(log, "recipe {}", recipe.name);
    let _ = writeln!(log, "dims {}", recipe.dims);
    let _ = writeln!(
        log,
        "activation {} at_output {}",
        recipe.activation.kind, recipe.activation.at_output
    );
    let _ = writeln!(log, "certified {}", cert.certified());
    let _ = writeln!(log, "dataset_sha256 {dataset_sha256}");
    let _ = writeln!(log, "init_sha256 {init_sha256}");

    if let Some(dir) = &output.dir {
        fs::create_dir_all(dir)?;
    }
    let mut arms = Vec::new();
    for arm in &recipe.arms {
        let start = w0.clone();
        let arm_init = weights_sha256(&start);
        let (trajectory, diverged) = match train(&start, recipe.activation, &dataset, &arm.config) {
            Ok((_, t)) => (t, false),
            Err(Error::Divergence { trajectory, .. }) => (*trajectory, true),
            Err(e) => return Err(e),
        };
        let _ = writeln!(
            log,
            "arm {} noise {} lr {} iterations {} init_sha256 {} final_rank {} first_full {} diverged {}",
            arm.label,
            arm.config.noise.mode,
            arm.config.learning_rate,
            arm.config.iterations,
            arm_init,
            trajectory.final_rank().unwrap_or(0),
            trajectory
                .first_reaching(recipe.full_rank())
                .map_or("none".to_string(), |t| t.to_string()),
            diverged
        );
        if let Some(dir) = &output.dir {
            let csv = trajectory_csv(&trajectory, recipe.dims.depth());
            write_atomic(
                &dir.join(format!("{}_{}.csv", recipe.name, arm.label)),
                csv.as_bytes(),
            )?;
        }
        arms.push(ArmOutcome {
            label: arm.label.clone(),
            trajectory,
            diverged,
        });
    }

    let final_of = |label: &str| {
        arms.iter()
            .find(|a| a.label == label)
            .and_then(|a| a.trajectory.final_rank())
    };
    let expected_ok = final_of(&recipe.expected_arm) == Some(recipe.expected_final_rank);
    let _ = writeln!(
        log,
        "assert {} final_rank == {}: {}",
        recipe.expected_arm,
        recipe.expected_final_rank,
        if expected_ok { "ok" } else { "FAILED" }
    );
    let mut rank_ok = expected_ok;
    if let Some(label) = &recipe.below_full_arm {
        let ok = final_of(label).is_some_and(|r| r < recipe.full_rank());
        let _ = writeln!(
            log,
            "assert {label} final_rank < {}: {}",
            recipe.full_rank(),
            if ok { "ok" } else { "FAILED" }
        );
        rank_ok &= ok;
    }

    if let Some(dir) = &output.dir {
        write_atomic(&dir.join(format!("{}.log", recipe.name)), log.as_bytes())?;
        if output.gnuplot {
            write_atomic(
                &dir.join(format!("{}.gp", recipe.name)),
                gnuplot_script(recipe).as_bytes(),
            )?;
        }
    }
    Ok(RecipeOutcome {
        dataset_sha256,
        init_sha256,
        arms,
        rank_ok,
        log,
    })
}

fn cmd_gen_data(args: &GenDataArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match synth_certified(args.dx, args.dy, args.m, args.seed) {
        Ok((d, cert)) => {
            if let Some(path) = &args.out {
                write_atomic(path, &dataset_to_bytes(&d))?;
            }
            writeln!(
                out,
                "d_x {}\nd_y {}\nm {}\nseed {}",
                args.dx, args.dy, args.m, args.seed
            )?;
            writeln!(out, "{cert}")?;
            Ok(EXIT_OK)
        }
        Err(e @ (Error::AssumptionViolated(_) | Error::GenerationFailed { .. })) => {
            writeln!(err, "error: {e}")?;
            Ok(EXIT_UNCERTIFIABLE)
        }
        Err(e) => Err(e),
    }
}

fn cmd_train(args: &TrainArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let d = read_dataset(io::BufReader::new(fs::File::open(&args.data)?))?;
    if args.dims.input() != d.input_dim() || args.dims.output() != d.output_dim() {
        return Err(Error::invalid(format!(
            "dims {} do not match the dataset ({} -> {})",
            args.dims,
            d.input_dim(),
            d.output_dim()
        )));
    }
    let act = Activation {
        kind: args.act,
        at_output: args.act_output,
    };
    let r0 = args
        .init_rank
        .unwrap_or_else(|| default_init_rank(&args.dims));
    let w0 = low_rank_init(
        &args.dims,
        r0,
        InitScale::FanIn {
            gain: args.init_gain,
        },
        args.seed,
    )?;
    let cfg = TrainConfig {
        learning_rate: args.lr,
        iterations: args.iters,
        batch_size: args.batch,
        noise: NoiseSpec::new(args.noise, args.seed)?,
        rank_tol: RankTolerance::DEFAULT,
        record_layer_ranks: true,
        seed: args.seed,
    };
    let (trajectory, code) = match train(&w0, act, &d, &cfg) {
        Ok((_, t)) => (t, EXIT_OK),
        Err(Error::Divergence {
            iteration,
            loss,
            trajectory,
        }) => {
            writeln!(
                err,
                "error: training diverged at iteration {iteration} (loss {loss:e})"
            )?;
            (*trajectory, EXIT_DIVERGED)
        }
        Err(e) => return Err(e),
    };
    let csv = trajectory_csv(&trajectory, args.dims.depth());
    match &args.out {
        Some(path) => write_atomic(path, csv.as_bytes())?,
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(code)
}

fn tampered_bump(a: &DenseMatrix, _eps: f64) -> Result<DenseMatrix> {
    Ok(a.clone())
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let mut cfg = SuiteConfig::new(args.suite, args.seed);
    cfg.trials = args.trials;
    if args.tamper_rank_bump {
        cfg.bump = tampered_bump;
    }
    let reports = run_suite(&cfg)?;
    for r in &reports {
        writeln!(out, "{r}")?;
    }
    Ok(if reports.iter().all(|r| r.pass) {
        EXIT_OK
    } else {
        EXIT_FAILURE
    })
}

fn cmd_recipe(args: &RecipeArgs, out: &mut dyn Write) -> Result<i32> {
    let mut recipe = match &args.config {
        Some(path) => ExperimentRecipe::parse(&fs::read_to_string(path)?)?,
        None => ExperimentRecipe::builtin(&args.name)?,
    };
    if let Some(seed) = args.seed {
        recipe.reseed(seed);
    }
    if let Some(iters) = args.iters {
        recipe.set_iterations(iters);
    }
    let outcome = run_recipe(
        &recipe,
        &RecipeOutput {
            dir: Some(args.out_dir.clone()),
            gnuplot: args.gnuplot,
        },
    )?;
    out.write_all(outcome.log.as_bytes())?;
    Ok(if outcome.arms.iter().any(|a| a.diverged) {
        EXIT_DIVERGED
    } else if outcome.rank_ok {
        EXIT_OK
    } else {
        EXIT_RANK_ASSERTION
    })
}

/// Runs a parsed command, returning the process exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::GenData(a) => cmd_gen_data(a, out, err),
        Command::Train(a) => cmd_train(a, out, err),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Recipe(a) => cmd_recipe(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_FAILURE
        }
    }
}

/// Parses `args` (program name first) and runs the command. Usage errors
/// print clap's message and return its exit code.
pub fn run_from_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, out, err),
        Err(e) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trainer::TrajectoryRecord;

    #[test]
    fn csv_layout() {
        let traj = RankTrajectory {
            records: vec![
                TrajectoryRecord {
                    iteration: 0,
                    loss: 1.5,
                    rank_product: 2,
                    layer_ranks: Some(vec![2, 3]),
                },
                TrajectoryRecord {
                    iteration: 1,
                    loss: 0.25,
                    rank_product: 3,
                    layer_ranks: None,
                },
            ],
        };
        assert_eq!(
            trajectory_csv(&traj, 2),
            "iter,loss,rank_product,rank_w1,rank_w2\n0,1.5,2,2,3\n1,0.25,3,,\n"
        );
    }

    #[test]
    fn builtin_recipes_parse() {
        for name in RECIPE_NAMES {
            let r = ExperimentRecipe::builtin(name).unwrap();
            assert_eq!(r.name, name);
            assert!(r.expected_final_rank <= r.full_rank());
        }
        assert!(ExperimentRecipe::builtin("fig9").is_err());
    }

    #[test]
    fn recipe_rejects_bad_config() {
        let good = include_str!("../recipes/fig1.conf");
        assert!(ExperimentRecipe::parse(good).is_ok());
        assert!(ExperimentRecipe::parse(&format!("{good}\nbogus = 1\n")).is_err());
        assert!(ExperimentRecipe::parse(&good.replace("version = 1", "version = 2")).is_err());
        assert!(ExperimentRecipe::parse(&format!("{good}\nname = again\n")).is_err());
        assert!(ExperimentRecipe::parse("version = 1\nno equals sign\n").is_err());
    }

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = std::env::temp_dir().join(format!("ranklab-cli-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("x.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(&dir).unwrap().count(), 1);
        fs::remove_dir_all(&dir).unwrap();
    }
}
