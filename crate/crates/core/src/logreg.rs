//! Weighted logistic loss `f_w(X beta) = sum_i w_i ln(1 + exp(x_i beta))` and its minimizer.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Rows per parallel work unit. Partial sums are combined in a fixed
/// pairwise order, so results do not depend on the thread count.
const CHUNK: usize = 4096;

/// `ln(1 + e^z)` without overflow.
#[inline]
pub fn softplus(z: f64) -> f64 {
    if z <= 0.0 {
        z.exp().ln_1p()
    } else {
        z + (-z).exp().ln_1p()
    }
}

/// `1 / (1 + e^{-z})` without overflow.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Sum in a fixed binary-tree order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub beta: Vec<f64>,
}

impl ModelParams {
    pub fn zeros(d: usize) -> Self {
        Self { beta: vec![0.0; d] }
    }

    pub fn norm2(&self) -> f64 {
        self.beta.iter().map(|b| b * b).sum::<f64>().sqrt()
    }
}

fn check_dims(ds: &Dataset, params: &ModelParams) -> Result<()> {
    if params.beta.len() != ds.d() {
        return Err(Error::DimensionMismatch {
            expected: ds.d(),
            got: params.beta.len(),
        });
    }
    Ok(())
}

fn chunk_ranges(n: usize) -> Vec<(usize, usize)> {
    (0..n.div_ceil(CHUNK))
        .map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(n)))
        .collect()
}

/// Negative log-likelihood `sum_i w_i softplus(x_i beta)` (an unnormalized sum).
pub fn nll(ds: &Dataset, params: &ModelParams) -> Result<f64> {
    check_dims(ds, params)?;
    let w = ds.weights();
    let beta = &params.beta;
    let partial: Vec<f64> = chunk_ranges(ds.n())
        .into_par_iter()
        .map(|(a, b)| {
            let mut s = 0.0;
            for i in a..b {
                s += w[i] * softplus(ds.row(i).dot(beta));
            }
            s
        })
        .collect();
    Ok(pairwise_sum(&partial))
}

/// Gradient `sum_i w_i sigmoid(x_i beta) x_i`.
pub fn nll_grad(ds: &Dataset, params: &ModelParams) -> Result<Vec<f64>> {
    Ok(nll_and_grad(ds, params)?.1)
}

/// Loss and gradient in one pass over the rows.
pub fn nll_and_grad(ds: &Dataset, params: &ModelParams) -> Result<(f64, Vec<f64>)> {
    check_dims(ds, params)?;
    let d = ds.d();
    let w = ds.weights();
    let beta = &params.beta;
    let partial: Vec<(f64, Vec<f64>)> = chunk_ranges(ds.n())
        .into_par_iter()
        .map(|(a, b)| {
            let mut f = 0.0;
            let mut g = vec![0.0; d];
            for i in a..b {
                let row = ds.row(i);
                let z = row.dot(beta);
                f += w[i] * softplus(z);
                row.axpy_into(w[i] * sigmoid(z), &mut g);
            }
            (f, g)
        })
        .collect();
    let fs: Vec<f64> = partial.iter().map(|p| p.0).collect();
    let grad = (0..d)
        .map(|j| pairwise_sum(&partial.iter().map(|p| p.1[j]).collect::<Vec<_>>()))
        .collect();
    Ok((pairwise_sum(&fs), grad))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Init {
    Zero,
    Given(ModelParams),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Stop when `||grad||_inf <= grad_tol * total_weight`.
    pub grad_tol: f64,
    pub max_iters: usize,
    /// Stop (unconverged) once `||beta||_2` exceeds this.
    pub beta_norm_cap: Option<f64>,
    pub init: Init,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            grad_tol: 1e-8,
            max_iters: 10_000,
            beta_norm_cap: None,
            init: Init::Zero,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: ModelParams,
    pub nll: f64,
    pub iters: usize,
    pub converged: bool,
}

const LBFGS_MEMORY: usize = 10;
const ARMIJO_C1: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MIN_STEP: f64 = 1e-20;
// consecutive steps whose decrease is lost in rounding before giving up
const STALL_LIMIT: usize = 20;
// a stalled fit still counts as converged when the gradient is this close
const STALL_GRAD_SLACK: f64 = 100.0;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// L-BFGS two-loop recursion: returns `-H g`.
fn lbfgs_direction(g: &[f64], hist: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(hist.len());
    for (s, y, rho) in hist.iter().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    if let Some((s, y, _)) = hist.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|qi| *qi *= gamma);
    }
    for ((s, y, rho), a) in hist.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|qi| *qi = -*qi);
    q
}

/// Weighted maximum-likelihood fit by L-BFGS with Armijo backtracking.
pub fn fit_mle(ds: &Dataset, cfg: &FitConfig) -> Result<FitResult> {
    if !(cfg.grad_tol > 0.0) {
        return Err(Error::InvalidArgument("grad_tol must be positive".into()));
    }
    let mut params = match &cfg.init {
        Init::Zero => ModelParams::zeros(ds.d()),
        Init::Given(p) => p.clone(),
    };
    let thresh = cfg.grad_tol * ds.total_weight();
    let (mut f, mut g) = nll_and_grad(ds, &params)?;
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut stalled = 0usize;

    for iter in 0..cfg.max_iters {
        if !f.is_finite() {
            return Err(Error::NonFinite(format!("loss became {f} at iteration {iter}")));
        }
        if inf_norm(&g) <= thresh {
            return Ok(FitResult {
                params,
                nll: f,
                iters: iter,
                converged: true,
            });
        }

        let mut dir = lbfgs_direction(&g, &hist);
        let mut slope = dot(&g, &dir);
        if hist.is_empty() || !(slope < 0.0) {
            hist.clear();
            let scale = 1.0 / dot(&g, &g).sqrt().max(1.0);
            dir = g.iter().map(|x| -x * scale).collect();
            slope = dot(&g, &dir);
        }

        let mut step = 1.0;
        let accepted = loop {
            let trial = ModelParams {
                beta: params.beta.iter().zip(&dir).map(|(b, p)| b + step * p).collect(),
            };
            let ft = nll(ds, &trial)?;
            if ft.is_finite() && ft <= f + ARMIJO_C1 * step * slope {
                break Some(trial);
            }
            step *= BACKTRACK;
            if step < MIN_STEP {
                break None;
            }
        };

        let Some(next) = accepted else {
            if hist.is_empty() {
                // no progress along steepest descent either
                return Ok(FitResult {
                    params,
                    nll: f,
                    iters: iter,
                    converged: false,
                });
            }
            hist.clear();
            continue;
        };

        let (f_new, g_new) = nll_and_grad(ds, &next)?;
        if f - f_new <= 8.0 * f64::EPSILON * f.abs() {
            stalled += 1;
        } else {
            stalled = 0;
        }
        let s: Vec<f64> = next.beta.iter().zip(&params.beta).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
            if hist.len() == LBFGS_MEMORY {
                hist.pop_front();
            }
            hist.push_back((s, y, 1.0 / sy));
        }
        params = next;
        f = f_new;
        g = g_new;

        if stalled >= STALL_LIMIT {
            return Ok(FitResult {
                converged: inf_norm(&g) <= STALL_GRAD_SLACK * thresh,
                params,
                nll: f,
                iters: iter + 1,
            });
        }

        if let Some(cap) = cfg.beta_norm_cap {
            if params.norm2() > cap {
                return Ok(FitResult {
                    params,
                    nll: f,
                    iters: iter + 1,
                    converged: false,
                });
            }
        }
    }

    Ok(FitResult {
        params,
        nll: f,
        iters: cfg.max_iters,
        converged: false,
    })
}
