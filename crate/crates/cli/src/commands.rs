use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use logcoreset::{
    build_base, build_base_eps, build_recursive, build_uniform, fold_labels, load_dataset,
    mu_bruteforce, mu_lp, write_labeled, CoresetMethod, Dataset, GridSpec, InputFormat,
    InstanceSpec, RecursionConfig, SampleSizeParams, SketchConfig,
};
use logcoreset::data::write_labeled_to;
use serde::Serialize;

use crate::harness::{default_sizes, run_bench, BenchConfig};

#[derive(Debug, Parser)]
#[command(name = "logcoreset", version, about = "Coresets for logistic regression")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a weighted coreset and write it as CSV plus a JSON sidecar.
    Coreset(CoresetArgs),
    /// Estimate the complexity measure mu of a dataset.
    Mu(MuArgs),
    /// Run the relative-error benchmark over methods and sizes.
    Bench(BenchArgs),
    /// Generate a synthetic instance.
    Gen(GenArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Libsvm,
    Csv,
}

impl From<FormatArg> for InputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Libsvm => InputFormat::Libsvm,
            FormatArg::Csv => InputFormat::Csv,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Uniform,
    Qr,
    QrSketch,
}

impl From<MethodArg> for CoresetMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Uniform => CoresetMethod::Uniform,
            MethodArg::Qr => CoresetMethod::Qr,
            MethodArg::QrSketch => CoresetMethod::QrSketch,
        }
    }
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Labeled data file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "libsvm")]
    pub format: FormatArg,
    /// Zero-based label column for CSV input (default: last).
    #[arg(long)]
    pub label_column: Option<usize>,
    /// Do not append an intercept column.
    #[arg(long)]
    pub no_intercept: bool,
    /// Center and scale every feature before folding.
    #[arg(long)]
    pub standardize: bool,
}

impl InputArgs {
    pub fn load(&self) -> Result<Dataset> {
        let mut data = load_dataset(&self.input, self.format.into(), self.label_column)
            .with_context(|| format!("loading {}", self.input.display()))?;
        if self.standardize {
            data.standardize();
        }
        Ok(fold_labels(&data, !self.no_intercept))
    }
}

fn positive_size(s: &str) -> std::result::Result<usize, String> {
    let k: usize = s.parse().map_err(|e| format!("{e}"))?;
    if k == 0 {
        return Err("size must be ≥ 1".into());
    }
    Ok(k)
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("sizing").required(true).args(["size", "epsilon"]))]
pub struct CoresetArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Fixed coreset size.
    #[arg(long, value_parser = positive_size)]
    pub size: Option<usize>,
    /// Derive the size from an error target (needs --mu and --delta).
    #[arg(long, requires_all = ["mu", "delta"])]
    pub epsilon: Option<f64>,
    /// Assumed complexity of the data (at least 1).
    #[arg(long)]
    pub mu: Option<f64>,
    /// Failure probability.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Multiplier on the theoretical sample size.
    #[arg(long, default_value_t = SampleSizeParams::DEFAULT_SCALE)]
    pub scale_const: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Coreset CSV; the sidecar goes to <OUTPUT>.meta.json.
    #[arg(long)]
    pub output: PathBuf,
    /// Shrink the data in several stages before the final sample.
    #[arg(long, requires = "epsilon")]
    pub recursive: bool,
    /// Reduction stages (default: ceil(log2 log2 n)).
    #[arg(long, requires = "recursive")]
    pub levels: Option<usize>,
    /// CountSketch buckets for qr-sketch.
    #[arg(long)]
    pub sketch_rows: Option<usize>,
    /// Gaussian projection width for qr-sketch.
    #[arg(long)]
    pub jl_dim: Option<usize>,
    /// Independent projections, combined by the median.
    #[arg(long, default_value_t = 1)]
    pub sketch_repeats: usize,
}

impl CoresetArgs {
    fn sketch_config(&self, ds: &Dataset) -> SketchConfig {
        let mut cfg = SketchConfig::for_shape(ds.n(), ds.d(), self.seed.wrapping_add(0x5ca1ab1e));
        if let Some(r) = self.sketch_rows {
            cfg.sketch_rows = r;
        }
        if let Some(m) = self.jl_dim {
            cfg.jl_dim = m;
        }
        cfg.repeats = self.sketch_repeats;
        cfg
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MuMethodArg {
    Lp,
    Bruteforce,
}

#[derive(Debug, Args)]
pub struct MuArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "lp")]
    pub method: MuMethodArg,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["uniform", "qr", "qr-sketch"])]
    pub methods: Vec<MethodArg>,
    /// Coreset sizes (default: thirty sizes between 2 sqrt(n) and n / 16).
    #[arg(long, value_delimiter = ',', value_parser = positive_size)]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON report path (default: standard output).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Long-format CSV of individual runs.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(subcommand)]
    pub kind: GenKind,
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "libsvm", global = true)]
    pub format: FormatArg,
}

#[derive(Debug, Subcommand)]
pub enum GenKind {
    /// 2n + 2 points on a line with two far-out points of opposite classes.
    AppendixD {
        #[arg(long)]
        n: usize,
    },
    /// n unit-circle points labelled +1, optionally with one inner point labelled -1.
    Circle {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        hole: Option<usize>,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        /// Circle points (1-based) to leave out.
        #[arg(long, value_delimiter = ',')]
        omit: Vec<usize>,
    },
    /// Two unit-covariance Gaussian classes.
    Mixture {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1.0)]
        separation: f64,
        /// Store sparsely, keeping each non-signal coordinate with this probability.
        #[arg(long)]
        density: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Coreset(a) => cmd_coreset(&a),
        Command::Mu(a) => cmd_mu(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Gen(a) => cmd_gen(&a),
    }
}

pub fn cmd_coreset(a: &CoresetArgs) -> Result<()> {
    let ds = a.input.load()?;
    let method: CoresetMethod = a.method.into();
    let sketch = a.sketch_config(&ds);
    let c = match (a.size, method.score_method()) {
        (Some(k), None) => build_uniform(&ds, k, a.seed)?,
        (Some(k), Some(sm)) => build_base(&ds, k, sm, &sketch, a.seed)?,
        (None, None) => anyhow::bail!("the uniform method needs --size"),
        (None, Some(sm)) => {
            let eps = a.epsilon.expect("clap enforces --size or --epsilon");
            let mu = a.mu.expect("clap enforces --mu with --epsilon");
            let delta = a.delta.expect("clap enforces --delta with --epsilon");
            if a.recursive {
                let cfg = RecursionConfig {
                    levels: a.levels,
                    delta: Some(delta),
                    scale_const: a.scale_const,
                    ..RecursionConfig::new(eps, mu, ds.d(), a.seed)
                };
                build_recursive(&ds, &cfg, sm, &sketch)?
            } else {
                let p = SampleSizeParams::new(eps, delta)?.with_scale(a.scale_const)?;
                build_base_eps(&ds, &p, mu, sm, &sketch, a.seed)?
            }
        }
    };
    c.write(&a.output)
        .with_context(|| format!("writing {}", a.output.display()))?;
    eprintln!("wrote {} rows to {}", c.k(), a.output.display());
    Ok(())
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

pub fn cmd_mu(a: &MuArgs) -> Result<()> {
    let ds = a.input.load()?;
    let est = match a.method {
        MuMethodArg::Lp => mu_lp(&ds)?,
        MuMethodArg::Bruteforce => mu_bruteforce(&ds, &GridSpec::default())?,
    };
    print_json(&est)
}

pub fn cmd_bench(a: &BenchArgs) -> Result<()> {
    let ds = a.input.load()?;
    let sizes = if a.sizes.is_empty() {
        default_sizes(ds.n())
    } else {
        a.sizes.clone()
    };
    let methods = a.methods.iter().map(|&m| m.into()).collect();
    let report = run_bench(&ds, &BenchConfig::new(methods, sizes, a.reps, a.seed))?;
    if let Some(path) = &a.csv {
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(f);
        report.write_csv(&mut w)?;
        w.flush()?;
    }
    match &a.output {
        Some(path) => write_json(path, &report),
        None => print_json(&report),
    }
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, v)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn cmd_gen(a: &GenArgs) -> Result<()> {
    let spec = match &a.kind {
        GenKind::AppendixD { n } => InstanceSpec::AppendixD { n: *n },
        GenKind::Circle { n, hole, delta, omit } => InstanceSpec::Circle {
            n: *n,
            hole_index: *hole,
            delta: *delta,
            omit: omit.clone(),
        },
        GenKind::Mixture {
            n,
            d,
            separation,
            density,
            seed,
        } => InstanceSpec::GaussianMixture {
            n: *n,
            d: *d,
            separation: *separation,
            density: *density,
            seed: *seed,
        },
    };
    let data = spec.generate()?;
    match &a.output {
        Some(path) => write_labeled(path, &data, a.format.into())?,
        None => {
            let mut out = BufWriter::new(std::io::stdout().lock());
            write_labeled_to(&mut out, &data, a.format.into())?;
            out.flush()?;
        }
    }
    Ok(())
}
