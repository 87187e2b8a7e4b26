//! Benchmark harness: full-data fit, then coreset build + weighted fit per
//! (method, k, rep), scored by relative loss error on the full data.

use std::io::Write;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use logcoreset::rng::derive_seed;
use logcoreset::{
    build_base, build_uniform, fit_mle, nll, Coreset, CoresetMethod, Dataset, FitConfig,
    ScoreMethod, SketchConfig,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Norm cap used for every fit inside the harness, so separable samples stop.
pub const HARNESS_BETA_CAP: f64 = 1e4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub methods: Vec<CoresetMethod>,
    pub sizes: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    /// Sketch geometry for `qr_sketch`; per-rep seeds replace its seed.
    pub sketch: Option<SketchConfig>,
}

impl BenchConfig {
    pub fn new(methods: Vec<CoresetMethod>, sizes: Vec<usize>, reps: usize, seed: u64) -> Self {
        Self {
            methods,
            sizes,
            reps,
            seed,
            sketch: None,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.methods.is_empty() {
            bail!("at least one method is required");
        }
        if self.sizes.is_empty() {
            bail!("at least one size is required");
        }
        if let Some(&k) = self.sizes.iter().find(|&&k| k == 0 || k > n) {
            bail!("size {k} outside 1..={n}");
        }
        if self.reps == 0 {
            bail!("reps must be >= 1");
        }
        Ok(())
    }
}

/// Thirty geometrically spaced sizes in `[floor(2 sqrt n), ceil(n / 16)]`,
/// deduplicated after rounding.
pub fn default_sizes(n: usize) -> Vec<usize> {
    let lo = ((2.0 * (n as f64).sqrt()).floor() as usize).clamp(1, n.max(1));
    let hi = n.div_ceil(16).clamp(lo, n.max(1));
    let mut out: Vec<usize> = (0..30)
        .map(|i| {
            let t = i as f64 / 29.0;
            ((lo as f64).ln() * (1.0 - t) + (hi as f64).ln() * t).exp().round() as usize
        })
        .map(|k| k.clamp(lo, hi))
        .collect();
    out.dedup();
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub nll_opt: f64,
    pub time_opt_ms: f64,
    pub converged: bool,
    pub beta: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: CoresetMethod,
    pub k: usize,
    pub rep: usize,
    pub rel_error: Option<f64>,
    pub build_ms: f64,
    pub fit_ms: f64,
    pub total_ms: f64,
    pub fit_converged: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub method: CoresetMethod,
    pub k: usize,
    pub reps: usize,
    pub failed: usize,
    pub mean_rel_error: Option<f64>,
    pub std_rel_error: Option<f64>,
    pub median_rel_error: Option<f64>,
    pub mean_ms: f64,
    pub std_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    pub baseline: Baseline,
    pub cells: Vec<CellSummary>,
    pub runs: Vec<RunRecord>,
}

impl BenchReport {
    pub fn cell(&self, method: CoresetMethod, k: usize) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.method == method && c.k == k)
    }

    /// Long-format CSV `method,k,rep,rel_error,build_ms,fit_ms`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "method,k,rep,rel_error,build_ms,fit_ms")?;
        for r in &self.runs {
            let err = r.rel_error.map_or_else(|| "nan".to_string(), |e| format!("{e:e}"));
            writeln!(
                out,
                "{},{},{},{},{:.3},{:.3}",
                r.method.name(),
                r.k,
                r.rep,
                err,
                r.build_ms,
                r.fit_ms
            )?;
        }
        Ok(())
    }
}

pub fn harness_fit_config() -> FitConfig {
    FitConfig {
        beta_norm_cap: Some(HARNESS_BETA_CAP),
        ..FitConfig::default()
    }
}

fn method_id(m: CoresetMethod) -> u64 {
    match m {
        CoresetMethod::Uniform => 0,
        CoresetMethod::Qr => 1,
        CoresetMethod::QrSketch => 2,
    }
}

/// Seed of one repetition, independent of scheduling.
pub fn rep_seed(seed: u64, method: CoresetMethod, k: usize, rep: usize) -> u64 {
    derive_seed(seed, &[method_id(method), k as u64, rep as u64])
}

/// Build one coreset with the harness conventions.
pub fn build_for(
    ds: &Dataset,
    method: CoresetMethod,
    k: usize,
    seed: u64,
    sketch: Option<&SketchConfig>,
) -> logcoreset::Result<Coreset> {
    match method {
        CoresetMethod::Uniform => build_uniform(ds, k, seed),
        CoresetMethod::Qr => {
            let cfg = SketchConfig::for_shape(ds.n(), ds.d(), seed);
            build_base(ds, k, ScoreMethod::ExactQr, &cfg, seed)
        }
        CoresetMethod::QrSketch => {
            let cfg = match sketch {
                Some(s) => SketchConfig {
                    seed: derive_seed(seed, &[u64::MAX]),
                    ..s.clone()
                },
                None => SketchConfig::for_shape(ds.n(), ds.d(), derive_seed(seed, &[u64::MAX])),
            };
            build_base(ds, k, ScoreMethod::Sketched, &cfg, seed)
        }
    }
}

fn run_one(
    ds: &Dataset,
    baseline: &Baseline,
    cfg: &BenchConfig,
    method: CoresetMethod,
    k: usize,
    rep: usize,
) -> RunRecord {
    let start = Instant::now();
    let seed = rep_seed(cfg.seed, method, k, rep);
    let mut rec = RunRecord {
        method,
        k,
        rep,
        rel_error: None,
        build_ms: 0.0,
        fit_ms: 0.0,
        total_ms: 0.0,
        fit_converged: false,
        error: None,
    };
    let outcome = (|| -> logcoreset::Result<()> {
        let t = Instant::now();
        let c = build_for(ds, method, k, seed, cfg.sketch.as_ref())?;
        let sample = c.to_dataset()?;
        rec.build_ms = t.elapsed().as_secs_f64() * 1e3;
        let t = Instant::now();
        let fit = fit_mle(&sample, &harness_fit_config())?;
        rec.fit_ms = t.elapsed().as_secs_f64() * 1e3;
        rec.fit_converged = fit.converged;
        let l = nll(ds, &fit.params)?;
        rec.rel_error = Some((baseline.nll_opt - l).abs() / baseline.nll_opt);
        Ok(())
    })();
    if let Err(e) = outcome {
        rec.error = Some(e.to_string());
    }
    rec.total_ms = start.elapsed().as_secs_f64() * 1e3;
    rec
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = if xs.len() > 1 {
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (m, v.sqrt())
}

pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

fn summarize(method: CoresetMethod, k: usize, runs: &[RunRecord]) -> CellSummary {
    let errs: Vec<f64> = runs.iter().filter_map(|r| r.rel_error).collect();
    let times: Vec<f64> = runs.iter().map(|r| r.build_ms + r.fit_ms).collect();
    let (me, se) = mean_std(&errs);
    let (mt, st) = mean_std(&times);
    let finite = |x: f64| x.is_finite().then_some(x);
    CellSummary {
        method,
        k,
        reps: runs.len(),
        failed: runs.iter().filter(|r| r.error.is_some()).count(),
        mean_rel_error: finite(me),
        std_rel_error: finite(se),
        median_rel_error: median(&errs),
        mean_ms: mt,
        std_ms: st,
    }
}

/// Fit the full data once, then every (method, k, rep) cell.
pub fn run_bench(ds: &Dataset, cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.validate(ds.n())?;
    let t = Instant::now();
    let full = fit_mle(ds, &harness_fit_config()).context("full-data fit failed")?;
    let baseline = Baseline {
        nll_opt: full.nll,
        time_opt_ms: t.elapsed().as_secs_f64() * 1e3,
        converged: full.converged,
        beta: full.params.beta,
    };
    if !(baseline.nll_opt > 0.0) {
        bail!("full-data optimum is {} (separable data), relative error undefined", baseline.nll_opt);
    }

    let jobs: Vec<(CoresetMethod, usize, usize)> = cfg
        .methods
        .iter()
        .flat_map(|&m| cfg.sizes.iter().flat_map(move |&k| (0..cfg.reps).map(move |r| (m, k, r))))
        .collect();
    let runs: Vec<RunRecord> = jobs
        .par_iter()
        .map(|&(m, k, r)| run_one(ds, &baseline, cfg, m, k, r))
        .collect();

    let cells = runs
        .chunks(cfg.reps)
        .map(|chunk| summarize(chunk[0].method, chunk[0].k, chunk))
        .collect();
    Ok(BenchReport {
        n: ds.n(),
        d: ds.d(),
        seed: cfg.seed,
        baseline,
        cells,
        runs,
    })
}
