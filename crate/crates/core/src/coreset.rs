//! Coreset builders: the sensitivity-sampling base algorithm, its recursive
//! size reduction, and the uniform baseline.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::{write_weighted_csv, Dataset};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::derive_seed;
use crate::sampler::{
    reservoir_stream, round_pow2, sample_iid, sample_iid_weights, sample_size_unclamped,
    RoundedScores, SampleSizeParams,
};
use crate::scores::{sqrt_leverage_exact, sqrt_leverage_sketched, ScoreMethod, SketchConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoresetMethod {
    Uniform,
    Qr,
    QrSketch,
}

impl CoresetMethod {
    pub fn score_method(self) -> Option<ScoreMethod> {
        match self {
            Self::Uniform => None,
            Self::Qr => Some(ScoreMethod::ExactQr),
            Self::QrSketch => Some(ScoreMethod::Sketched),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::Qr => "qr",
            Self::QrSketch => "qr_sketch",
        }
    }
}

impl std::str::FromStr for CoresetMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "qr" => Ok(Self::Qr),
            "qr-sketch" | "qr_sketch" => Ok(Self::QrSketch),
            other => Err(Error::InvalidArgument(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoresetMeta {
    pub method: CoresetMethod,
    pub k: usize,
    pub seed: u64,
    pub epsilon: Option<f64>,
    /// Reduction levels actually sampled (0 for a plain base build).
    pub levels: usize,
    pub score_method: Option<ScoreMethod>,
    pub passes: usize,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Coreset {
    /// Source rows, with repetition.
    pub indices: Vec<usize>,
    pub points: Matrix,
    pub u: Vec<f64>,
    pub has_intercept: bool,
    pub meta: CoresetMeta,
}

impl Coreset {
    pub fn k(&self) -> usize {
        self.indices.len()
    }

    /// The coreset as a weighted dataset, ready for fitting.
    pub fn to_dataset(&self) -> Result<Dataset> {
        Dataset::new(self.points.clone(), self.u.clone(), self.has_intercept)
    }

    /// Coreset CSV plus `<path>.meta.json`.
    pub fn write(&self, path: &Path) -> Result<()> {
        write_weighted_csv(path, &self.indices, &self.u, &self.points)?;
        let meta_path = meta_path(path);
        let json = serde_json::to_string_pretty(&self.meta)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        std::fs::write(&meta_path, json + "\n").map_err(|source| Error::Io {
            path: meta_path,
            source,
        })
    }
}

pub fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Rounded scores of the rows of `ds`.
pub fn rounded_scores(
    ds: &Dataset,
    score_method: ScoreMethod,
    sketch_cfg: &SketchConfig,
) -> Result<RoundedScores> {
    let sv = match score_method {
        ScoreMethod::ExactQr => sqrt_leverage_exact(ds),
        ScoreMethod::Sketched => sqrt_leverage_sketched(ds, sketch_cfg)?,
    };
    Ok(round_pow2(&sv, ds.weights()))
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("size must be >= 1".into()));
    }
    Ok(())
}

fn check_nonempty(ds: &Dataset) -> Result<()> {
    if ds.n() == 0 {
        return Err(Error::Empty("dataset has no rows".into()));
    }
    Ok(())
}

/// Draw `k` rows from precomputed rounded scores and attach the weights
/// `u = S' w_j / (s'_j k)`.
fn sample_stage(
    ds: &Dataset,
    rs: &RoundedScores,
    k: usize,
    score_method: ScoreMethod,
    seed: u64,
) -> Result<(Vec<usize>, Vec<f64>)> {
    let idx = match score_method {
        ScoreMethod::ExactQr => sample_iid(rs, k, seed)?,
        ScoreMethod::Sketched => {
            reservoir_stream(rs.s_prime.iter().copied().enumerate(), k, seed)?
        }
    };
    let w = ds.weights();
    let kf = k as f64;
    let u = idx
        .iter()
        .map(|&j| rs.total_prime * w[j] / (rs.s_prime[j] * kf))
        .collect();
    Ok((idx, u))
}

fn passes(score_method: ScoreMethod) -> usize {
    match score_method {
        ScoreMethod::ExactQr => 1,
        ScoreMethod::Sketched => 2,
    }
}

fn method_of(score_method: ScoreMethod) -> CoresetMethod {
    match score_method {
        ScoreMethod::ExactQr => CoresetMethod::Qr,
        ScoreMethod::Sketched => CoresetMethod::QrSketch,
    }
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Sensitivity-sampling coreset of fixed size `k`.
pub fn build_base(
    ds: &Dataset,
    k: usize,
    score_method: ScoreMethod,
    sketch_cfg: &SketchConfig,
    seed: u64,
) -> Result<Coreset> {
    check_k(k)?;
    check_nonempty(ds)?;
    let start = Instant::now();
    let rs = rounded_scores(ds, score_method, sketch_cfg)?;
    let (indices, u) = sample_stage(ds, &rs, k, score_method, seed)?;
    Ok(Coreset {
        points: ds.x().select_rows(&indices),
        indices,
        u,
        has_intercept: ds.has_intercept(),
        meta: CoresetMeta {
            method: method_of(score_method),
            k,
            seed,
            epsilon: None,
            levels: 0,
            score_method: Some(score_method),
            passes: passes(score_method),
            wall_ms: elapsed_ms(start),
        },
    })
}

/// Base coreset with `k` derived from `(epsilon, delta, mu)`. When the bound
/// asks for at least `n` rows the whole dataset is returned unchanged.
pub fn build_base_eps(
    ds: &Dataset,
    params: &SampleSizeParams,
    mu: f64,
    score_method: ScoreMethod,
    sketch_cfg: &SketchConfig,
    seed: u64,
) -> Result<Coreset> {
    params.validate()?;
    check_mu(mu)?;
    check_nonempty(ds)?;
    let start = Instant::now();
    let rs = rounded_scores(ds, score_method, sketch_cfg)?;
    let k_raw = sample_size_unclamped(&rs, params, mu, ds.d());
    let n = ds.n();
    let (indices, u) = if k_raw >= n as f64 {
        ((0..n).collect(), ds.weights().to_vec())
    } else {
        let k = (k_raw as usize).clamp((ds.d() + 1).min(n), n);
        sample_stage(ds, &rs, k, score_method, seed)?
    };
    Ok(Coreset {
        points: ds.x().select_rows(&indices),
        meta: CoresetMeta {
            method: method_of(score_method),
            k: indices.len(),
            seed,
            epsilon: Some(params.epsilon),
            levels: 0,
            score_method: Some(score_method),
            passes: passes(score_method),
            wall_ms: elapsed_ms(start),
        },
        indices,
        u,
        has_intercept: ds.has_intercept(),
    })
}

/// Uniform baseline: `k` rows i.i.d. uniform, `u = n w_j / k`.
pub fn build_uniform(ds: &Dataset, k: usize, seed: u64) -> Result<Coreset> {
    check_k(k)?;
    check_nonempty(ds)?;
    let start = Instant::now();
    let n = ds.n();
    let indices = sample_iid_weights(&vec![1.0; n], k, seed)?;
    let w = ds.weights();
    let scale = n as f64 / k as f64;
    let u = indices.iter().map(|&j| scale * w[j]).collect();
    Ok(Coreset {
        points: ds.x().select_rows(&indices),
        indices,
        u,
        has_intercept: ds.has_intercept(),
        meta: CoresetMeta {
            method: CoresetMethod::Uniform,
            k,
            seed,
            epsilon: None,
            levels: 0,
            score_method: None,
            passes: 1,
            wall_ms: elapsed_ms(start),
        },
    })
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu >= 1.0 && mu.is_finite()) {
        return Err(Error::InvalidArgument(format!("mu must be a finite value >= 1, got {mu}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecursionConfig {
    pub epsilon: f64,
    pub mu_hint: f64,
    /// Default `ceil(log2 log2 n)`, at least 1.
    pub levels: Option<usize>,
    /// Stop recursing once the working set has at most this many rows.
    pub min_size: usize,
    pub seed: u64,
    /// Per-level failure probability, default `n^-2`.
    pub delta: Option<f64>,
    pub scale_const: f64,
}

impl RecursionConfig {
    pub fn new(epsilon: f64, mu_hint: f64, d: usize, seed: u64) -> Self {
        Self {
            epsilon,
            mu_hint,
            levels: None,
            min_size: d + 1,
            seed,
            delta: None,
            scale_const: SampleSizeParams::DEFAULT_SCALE,
        }
    }

    pub fn default_levels(n: usize) -> usize {
        let lg = (n.max(2) as f64).log2();
        (lg.log2().ceil().max(1.0)) as usize
    }

    fn delta_for(&self, n: usize) -> f64 {
        self.delta
            .unwrap_or_else(|| (1.0 / (n as f64 * n as f64)).min(0.5))
    }

    /// Error budget of reduction level `i` out of `l`.
    pub fn level_epsilon(&self, i: usize, l: usize) -> f64 {
        let g = (1.0 + self.epsilon).powi(i as i32);
        let mu_i = self.mu_hint * g;
        self.epsilon / (2.0 * l as f64 * (mu_i + 1.0).sqrt() * g)
    }

    fn validate(&self, d: usize) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::InvalidArgument("epsilon must lie in (0, 1/2)".into()));
        }
        check_mu(self.mu_hint)?;
        if self.min_size < d + 1 {
            return Err(Error::InvalidArgument(format!(
                "min_size must be at least d + 1 = {}",
                d + 1
            )));
        }
        if self.levels == Some(0) {
            return Err(Error::InvalidArgument("levels must be >= 1".into()));
        }
        Ok(())
    }
}

/// Stage 0 uses the caller's seed, so a recursion that never reduces
/// reproduces the single-stage build.
fn stage_seed(seed: u64, stage: usize) -> u64 {
    if stage == 0 {
        seed
    } else {
        derive_seed(seed, &[stage as u64])
    }
}

/// Repeated base builds on the shrinking weighted sample, finished by one
/// stage at the original epsilon.
pub fn build_recursive(
    ds: &Dataset,
    cfg: &RecursionConfig,
    score_method: ScoreMethod,
    sketch_cfg: &SketchConfig,
) -> Result<Coreset> {
    check_nonempty(ds)?;
    cfg.validate(ds.d())?;
    let start = Instant::now();
    let d = ds.d();
    let l = cfg.levels.unwrap_or_else(|| RecursionConfig::default_levels(ds.n()));
    let delta = cfg.delta_for(ds.n());

    let mut current = ds.clone();
    let mut origin: Vec<usize> = (0..ds.n()).collect();
    let mut done = 0;
    let stage_sketch = |stage: usize| SketchConfig {
        seed: stage_seed(sketch_cfg.seed, stage),
        ..sketch_cfg.clone()
    };

    for i in 0..l {
        if current.n() <= cfg.min_size {
            break;
        }
        let eps_i = cfg.level_epsilon(i, l);
        let mu_i = cfg.mu_hint * (1.0 + cfg.epsilon).powi(i as i32);
        let params = SampleSizeParams {
            epsilon: eps_i,
            delta,
            scale_const: cfg.scale_const,
        };
        params.validate()?;
        let rs = rounded_scores(&current, score_method, &stage_sketch(i))?;
        let k_raw = sample_size_unclamped(&rs, &params, mu_i, d);
        if k_raw >= current.n() as f64 {
            break;
        }
        let k = (k_raw as usize).max(d + 1);
        let (idx, u) = sample_stage(&current, &rs, k, score_method, stage_seed(cfg.seed, i))?;
        origin = idx.iter().map(|&j| origin[j]).collect();
        current = current.subset(&idx, u)?;
        done += 1;
    }

    let mu_f = cfg.mu_hint * (1.0 + cfg.epsilon).powi(done as i32);
    let params = SampleSizeParams {
        epsilon: cfg.epsilon,
        delta,
        scale_const: cfg.scale_const,
    };
    params.validate()?;
    let rs = rounded_scores(&current, score_method, &stage_sketch(done))?;
    let k_raw = sample_size_unclamped(&rs, &params, mu_f, d);
    let (indices, u) = if k_raw >= current.n() as f64 {
        (origin, current.weights().to_vec())
    } else {
        let k = (k_raw as usize).clamp((d + 1).min(current.n()), current.n());
        let (idx, u) = sample_stage(
            &current,
            &rs,
            k,
            score_method,
            stage_seed(cfg.seed, done),
        )?;
        (idx.iter().map(|&j| origin[j]).collect(), u)
    };

    Ok(Coreset {
        points: ds.x().select_rows(&indices),
        meta: CoresetMeta {
            method: method_of(score_method),
            k: indices.len(),
            seed: cfg.seed,
            epsilon: Some(cfg.epsilon),
            levels: done,
            score_method: Some(score_method),
            passes: passes(score_method),
            wall_ms: elapsed_ms(start),
        },
        indices,
        u,
        has_intercept: ds.has_intercept(),
    })
}
