//! Per-row sensitivity upper bounds `s_i = ||U_i||_2 + w_i / W`, where `U` is an
//! orthonormal basis of the column space of `D_w X` and `W` the total weight.
//!
//! Two routes compute `||U_i||_2`: an exact thin QR of `D_w X`, and a two-pass
//! sketch (CountSketch + QR of the sketch, then a Gaussian projection of
//! `x_i R^{-1}`). The `(20 + 2 mu)` factor from the sensitivity bound is not
//! applied here; it cancels in the sampling probabilities.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{solve_upper_in_place, ColPivQr, DenseMatrix, RowView};
use crate::rng::{derive_seed, keyed_u64, stream_rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMethod {
    ExactQr,
    Sketched,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector {
    /// Raw scores `||U_i||_2 + w_i / W`.
    pub s: Vec<f64>,
    pub total: f64,
    pub method: ScoreMethod,
    /// Numerical rank of the factor used for the basis.
    pub rank: usize,
}

impl ScoreVector {
    fn from_scores(s: Vec<f64>, method: ScoreMethod, rank: usize) -> Self {
        let total = crate::logreg::pairwise_sum(&s);
        Self {
            s,
            total,
            method,
            rank,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SketchConfig {
    /// Number of CountSketch buckets.
    pub sketch_rows: usize,
    /// Columns of the Gaussian projection.
    pub jl_dim: usize,
    pub seed: u64,
    /// Independent sketches combined by a per-row median.
    pub repeats: usize,
}

impl SketchConfig {
    /// `sketch_rows = max(100, 20 d^2)`, `jl_dim = max(20, ceil(8 ln n))`.
    pub fn for_shape(n: usize, d: usize, seed: u64) -> Self {
        Self {
            sketch_rows: (20 * d * d).max(100),
            jl_dim: ((8.0 * (n.max(2) as f64).ln()).ceil() as usize).max(20),
            seed,
            repeats: 1,
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        if self.sketch_rows < d {
            return Err(Error::InvalidArgument(format!(
                "sketch_rows ({}) must be at least d ({d})",
                self.sketch_rows
            )));
        }
        if self.jl_dim == 0 || self.repeats == 0 {
            return Err(Error::InvalidArgument("jl_dim and repeats must be >= 1".into()));
        }
        Ok(())
    }
}

const SKETCH_CHUNK: usize = 1 << 16;

#[inline]
fn bucket_and_sign(seed: u64, i: usize, buckets: usize) -> (usize, f64) {
    let h = keyed_u64(seed, 0, i as u64);
    let sign = if keyed_u64(seed, 1, i as u64) & 1 == 0 { 1.0 } else { -1.0 };
    ((h % buckets as u64) as usize, sign)
}

/// CountSketch of `D_w X`: row `i` scaled by `sign(i) w_i` is added to bucket `h(i)`.
pub fn sketch_matrix(ds: &Dataset, cfg: &SketchConfig) -> DenseMatrix {
    let (n, d, m) = (ds.n(), ds.d(), cfg.sketch_rows);
    let w = ds.weights();
    let chunks: Vec<DenseMatrix> = (0..n.div_ceil(SKETCH_CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = DenseMatrix::zeros(m, d);
            for i in c * SKETCH_CHUNK..((c + 1) * SKETCH_CHUNK).min(n) {
                let (b, sign) = bucket_and_sign(cfg.seed, i, m);
                ds.row(i).axpy_into(sign * w[i], acc.row_mut(b));
            }
            acc
        })
        .collect();
    let mut iter = chunks.into_iter();
    let mut out = iter.next().unwrap_or_else(|| DenseMatrix::zeros(m, d));
    for c in iter {
        out.as_mut_slice()
            .iter_mut()
            .zip(c.as_slice())
            .for_each(|(a, b)| *a += b);
    }
    out
}

/// Exact square-root leverage scores from a thin QR of `D_w X`.
pub fn sqrt_leverage_exact(ds: &Dataset) -> ScoreVector {
    let a = ds.x().scaled_rows_dense(ds.weights());
    let qr = ColPivQr::new(&a);
    let total_w = ds.total_weight();
    let s = qr
        .q_row_norms()
        .into_iter()
        .zip(ds.weights())
        .map(|(q, w)| q + w / total_w)
        .collect();
    ScoreVector::from_scores(s, ScoreMethod::ExactQr, qr.rank())
}

/// Pass-1 state of the sketched route: the `d x m` matrix `R^{-1} G`
/// (rows placed back in original column order).
#[derive(Clone, Debug)]
pub struct SketchedScorer {
    projections: Vec<DenseMatrix>,
    total_weight: f64,
    rank: usize,
}

impl SketchedScorer {
    /// First pass: sketch, factor, and precompute the projections.
    pub fn fit(ds: &Dataset, cfg: &SketchConfig) -> Result<Self> {
        cfg.validate(ds.d())?;
        let d = ds.d();
        let mut projections = Vec::with_capacity(cfg.repeats);
        let mut rank = usize::MAX;
        for rep in 0..cfg.repeats {
            let seed = if rep == 0 {
                cfg.seed
            } else {
                derive_seed(cfg.seed, &[rep as u64])
            };
            let sk = sketch_matrix(
                ds,
                &SketchConfig {
                    seed,
                    ..cfg.clone()
                },
            );
            let qr = ColPivQr::new(&sk);
            let r = qr.rank();
            if r == 0 {
                return Err(Error::SketchFailed);
            }
            rank = rank.min(r);
            let r_lead = qr.r_leading();

            let mut rng = stream_rng(seed.wrapping_add(1), 0);
            let scale = 1.0 / (cfg.jl_dim as f64).sqrt();
            let g: Vec<f64> = (0..d * cfg.jl_dim)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z * scale
                })
                .collect();

            let mut proj = DenseMatrix::zeros(d, cfg.jl_dim);
            let mut col = vec![0.0; r];
            for c in 0..cfg.jl_dim {
                for k in 0..r {
                    col[k] = g[k * cfg.jl_dim + c];
                }
                solve_upper_in_place(&r_lead, &mut col);
                for k in 0..r {
                    proj.set(qr.perm()[k], c, col[k]);
                }
            }
            projections.push(proj);
        }
        Ok(Self {
            projections,
            total_weight: ds.total_weight(),
            rank,
        })
    }

    /// Score of one row in the second pass.
    pub fn score_row(&self, row: RowView<'_>, w: f64) -> f64 {
        let mut norms: Vec<f64> = self
            .projections
            .iter()
            .map(|p| {
                let mut v = vec![0.0; p.cols()];
                row.for_each_nonzero(|j, x| {
                    v.iter_mut().zip(p.row(j)).for_each(|(a, b)| *a += x * b);
                });
                w * v.iter().map(|a| a * a).sum::<f64>().sqrt()
            })
            .collect();
        median_in_place(&mut norms) + w / self.total_weight
    }

    pub fn rank(&self) -> usize {
        self.rank
    }
}

fn median_in_place(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Sketched square-root leverage scores (two passes over the rows).
pub fn sqrt_leverage_sketched(ds: &Dataset, cfg: &SketchConfig) -> Result<ScoreVector> {
    let scorer = SketchedScorer::fit(ds, cfg)?;
    let w = ds.weights();
    let s: Vec<f64> = (0..ds.n())
        .into_par_iter()
        .map(|i| scorer.score_row(ds.row(i), w[i]))
        .collect();
    Ok(ScoreVector::from_scores(s, ScoreMethod::Sketched, scorer.rank()))
}

/// Self-check `(20 + 2 mu) S <= 44 mu sqrt(n d)`.
pub fn sensitivity_total_bound(sv: &ScoreVector, mu: f64, n: usize, d: usize) -> bool {
    (20.0 + 2.0 * mu) * sv.total <= 44.0 * mu * ((n * d) as f64).sqrt()
}
