//! Estimates of the complexity measure
//! `mu_w(X) = sup_beta ||(D_w X beta)^+||_1 / ||(D_w X beta)^-||_1`.
//!
//! `mu_lp` minimizes `||(U beta)^-||_1` over `||beta||_1 >= 1` for an
//! orthonormal basis `U` of `D_w X`. The norm constraint is not convex, so the
//! problem is split into one LP per sign orthant of `beta` (exact up to
//! `d = 10`); above that, one LP per pinned coordinate `±beta_j >= 1` gives a
//! value within a factor `d` of the optimum. `mu_bruteforce` evaluates the
//! ratio on a grid of directions and only certifies a lower bound.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{ColPivQr, DenseMatrix};

/// Values of `t` below this are treated as zero (separable data).
pub const T_ZERO: f64 = 1e-10;
/// Largest rank solved by orthant enumeration.
pub const MAX_ORTHANT_DIM: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuMethod {
    Lp,
    Bruteforce,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    QrOrthonormal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuEstimate {
    /// LP optimum; absent for the brute-force oracle.
    pub t: Option<f64>,
    #[serde(serialize_with = "ser_extended", deserialize_with = "de_extended")]
    pub mu_lower: f64,
    #[serde(serialize_with = "ser_extended", deserialize_with = "de_extended")]
    pub mu_upper: f64,
    pub method: MuMethod,
    pub basis_kind: BasisKind,
}

/// Infinite values are written as the string `"inf"`.
fn ser_extended<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() && *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

fn de_extended<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }
    match Repr::deserialize(d)? {
        Repr::Num(v) => Ok(v),
        Repr::Str(s) if s == "inf" => Ok(f64::INFINITY),
        Repr::Str(s) => Err(serde::de::Error::custom(format!("expected number or \"inf\", got {s:?}"))),
    }
}

/// The LP over an orthonormal basis `U` (`n x r`), in the variables
/// `a, b in R^n`, `c, d_bar in R^r` (all nonnegative) and free `beta`:
/// `U beta = a - b`, `beta = c - d_bar`, `sum(c + d_bar) >= 1`, minimize `sum(b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    pub u: DenseMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d_bar: Vec<f64>,
    pub beta: Vec<f64>,
    pub objective: f64,
}

impl LpProblem {
    pub fn from_dataset(ds: &Dataset) -> Result<Self> {
        let a = ds.x().scaled_rows_dense(ds.weights());
        let qr = ColPivQr::new(&a);
        if qr.rank() == 0 {
            return Err(Error::Degenerate("all rows of D_w X are zero".into()));
        }
        Ok(Self { u: qr.thin_q() })
    }

    pub fn n(&self) -> usize {
        self.u.rows()
    }

    pub fn rank(&self) -> usize {
        self.u.cols()
    }

    fn u_beta(&self, beta: &[f64]) -> Vec<f64> {
        (0..self.n())
            .map(|i| self.u.row(i).iter().zip(beta).map(|(x, y)| x * y).sum())
            .collect()
    }

    /// Complete a `beta` into a full LP point with the smallest `b`.
    pub fn complete(&self, beta: Vec<f64>) -> LpSolution {
        let v = self.u_beta(&beta);
        let a: Vec<f64> = v.iter().map(|x| x.max(0.0)).collect();
        let b: Vec<f64> = v.iter().map(|x| (-x).max(0.0)).collect();
        LpSolution {
            objective: b.iter().sum(),
            c: beta.iter().map(|x| x.max(0.0)).collect(),
            d_bar: beta.iter().map(|x| (-x).max(0.0)).collect(),
            a,
            b,
            beta,
        }
    }

    /// Largest violation of any constraint or sign condition.
    pub fn max_violation(&self, s: &LpSolution) -> f64 {
        let v = self.u_beta(&s.beta);
        let mut worst: f64 = 0.0;
        for i in 0..self.n() {
            worst = worst.max((v[i] - (s.a[i] - s.b[i])).abs());
            worst = worst.max(-s.a[i]).max(-s.b[i]);
        }
        for j in 0..self.rank() {
            worst = worst.max((s.beta[j] - (s.c[j] - s.d_bar[j])).abs());
            worst = worst.max(-s.c[j]).max(-s.d_bar[j]);
        }
        let l1: f64 = s.c.iter().chain(&s.d_bar).sum();
        worst.max(1.0 - l1)
    }

    /// `min sum(b)` subject to `b + U beta >= 0` with `beta` tied to `dirs`:
    /// `beta = sum_j dirs_j g_j` for nonnegative `g` with `sum(g) >= 1`.
    fn solve_cone(&self, dirs: &[Vec<f64>]) -> Result<Vec<f64>> {
        let r = self.rank();
        let mut p = Problem::new(OptimizationDirection::Minimize);
        let g: Vec<_> = dirs.iter().map(|_| p.add_var(0.0, (0.0, f64::INFINITY))).collect();
        let b: Vec<_> = (0..self.n()).map(|_| p.add_var(1.0, (0.0, f64::INFINITY))).collect();
        for i in 0..self.n() {
            let row = self.u.row(i);
            let mut expr = vec![(b[i], 1.0)];
            for (k, dir) in dirs.iter().enumerate() {
                let coef: f64 = row.iter().zip(dir).map(|(x, y)| x * y).sum();
                if coef != 0.0 {
                    expr.push((g[k], coef));
                }
            }
            p.add_constraint(expr, ComparisonOp::Ge, 0.0);
        }
        p.add_constraint(
            g.iter().map(|&v| (v, 1.0)).collect::<Vec<_>>(),
            ComparisonOp::Ge,
            1.0,
        );
        let sol = p
            .solve()
            .map_err(|e| Error::Lp(e.to_string()))?
            .into_solution()
            .map_err(|e| Error::Lp(format!("{e:?}")))?;
        let mut beta = vec![0.0; r];
        for (k, dir) in dirs.iter().enumerate() {
            let gk = sol.var_value(g[k]);
            beta.iter_mut().zip(dir).for_each(|(bj, dj)| *bj += gk * dj);
        }
        Ok(beta)
    }

    /// Minimizer over `||beta||_1 >= 1` by orthant enumeration.
    fn solve_orthants(&self) -> Result<LpSolution> {
        let r = self.rank();
        let results: Vec<Result<LpSolution>> = (0..1usize << r)
            .into_par_iter()
            .map(|mask| {
                let dirs: Vec<Vec<f64>> = (0..r)
                    .map(|j| {
                        let mut e = vec![0.0; r];
                        e[j] = if mask >> j & 1 == 1 { -1.0 } else { 1.0 };
                        e
                    })
                    .collect();
                Ok(self.complete(normalize_l1(self.solve_cone(&dirs)?)))
            })
            .collect();
        best(results)
    }

    /// Minimizer over `||beta||_inf >= 1`, one LP per pinned coordinate.
    fn solve_pinned(&self) -> Result<LpSolution> {
        let r = self.rank();
        let results: Vec<Result<LpSolution>> = (0..2 * r)
            .into_par_iter()
            .map(|case| {
                let (j, sign) = (case / 2, if case % 2 == 0 { 1.0 } else { -1.0 });
                // beta_j = sign * pin with pin >= 1; other coordinates are free.
                let mut p = Problem::new(OptimizationDirection::Minimize);
                let pin = p.add_var(0.0, (1.0, f64::INFINITY));
                let free: Vec<_> = (0..r)
                    .map(|k| {
                        if k == j {
                            None
                        } else {
                            Some((
                                p.add_var(0.0, (0.0, f64::INFINITY)),
                                p.add_var(0.0, (0.0, f64::INFINITY)),
                            ))
                        }
                    })
                    .collect();
                let b: Vec<_> = (0..self.n()).map(|_| p.add_var(1.0, (0.0, f64::INFINITY))).collect();
                for i in 0..self.n() {
                    let row = self.u.row(i);
                    let mut expr = vec![(b[i], 1.0), (pin, sign * row[j])];
                    for (k, f) in free.iter().enumerate() {
                        if let Some((pos, neg)) = f {
                            expr.push((*pos, row[k]));
                            expr.push((*neg, -row[k]));
                        }
                    }
                    p.add_constraint(expr, ComparisonOp::Ge, 0.0);
                }
                let sol = p
                    .solve()
                    .map_err(|e| Error::Lp(e.to_string()))?
                    .into_solution()
                    .map_err(|e| Error::Lp(format!("{e:?}")))?;
                let beta: Vec<f64> = (0..r)
                    .map(|k| match free[k] {
                        None => sign * sol.var_value(pin),
                        Some((pos, neg)) => sol.var_value(pos) - sol.var_value(neg),
                    })
                    .collect();
                Ok(self.complete(beta))
            })
            .collect();
        best(results)
    }
}

fn normalize_l1(mut beta: Vec<f64>) -> Vec<f64> {
    let l1: f64 = beta.iter().map(|x| x.abs()).sum();
    if l1 > 0.0 {
        beta.iter_mut().for_each(|x| *x /= l1);
    }
    beta
}

fn best(results: Vec<Result<LpSolution>>) -> Result<LpSolution> {
    let mut out: Option<LpSolution> = None;
    for r in results {
        let s = r?;
        if out.as_ref().is_none_or(|o| s.objective < o.objective) {
            out = Some(s);
        }
    }
    out.ok_or_else(|| Error::Lp("no LP was solved".into()))
}

fn pos_neg(v: &[f64]) -> (f64, f64) {
    v.iter().fold((0.0, 0.0), |(p, n), &x| {
        if x > 0.0 {
            (p + x, n)
        } else {
            (p, n - x)
        }
    })
}

fn ratio(pos: f64, neg: f64) -> Option<f64> {
    if neg > 0.0 {
        Some(pos / neg)
    } else if pos > 0.0 {
        Some(f64::INFINITY)
    } else {
        None
    }
}

/// LP estimate plus the minimizing point, for feasibility checks.
pub fn mu_lp_with_solution(ds: &Dataset) -> Result<(MuEstimate, LpProblem, LpSolution)> {
    let lp = LpProblem::from_dataset(ds)?;
    let r = lp.rank();
    let pinned = r > MAX_ORTHANT_DIM;
    let sol = if pinned { lp.solve_pinned()? } else { lp.solve_orthants()? };
    let (pos, neg) = pos_neg(&lp.u_beta(&sol.beta));
    let l1: f64 = sol.beta.iter().map(|x| x.abs()).sum();
    let t = neg / l1;
    // Lower bound on the true optimum: exact for orthants; the pinned value
    // over ||beta||_inf >= 1 overshoots it by at most a factor r.
    let t_floor = if pinned {
        let linf = sol.beta.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        neg / linf / r as f64
    } else {
        t
    };
    let cond = ((lp.n() * ds.d()) as f64).sqrt();
    let (mu_lower, mu_upper) = if t_floor < T_ZERO {
        // a negative mass at rounding level means the data is separable
        let lower = if neg <= T_ZERO * pos {
            f64::INFINITY
        } else {
            ratio(pos, neg).unwrap_or(1.0).max(1.0)
        };
        (lower, f64::INFINITY)
    } else {
        ((pos / neg).max(1.0), cond / t_floor)
    };
    let est = MuEstimate {
        t: Some(if t_floor < T_ZERO { 0.0 } else { t }),
        mu_lower,
        mu_upper: mu_upper.max(mu_lower),
        method: MuMethod::Lp,
        basis_kind: BasisKind::QrOrthonormal,
    };
    Ok((est, lp, sol))
}

/// Bracket for `mu` from the LP over an orthonormal basis.
pub fn mu_lp(ds: &Dataset) -> Result<MuEstimate> {
    mu_lp_with_solution(ds).map(|(e, _, _)| e)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Angles for `d = 2`.
    pub angles: usize,
    /// Sphere points for `d >= 3`.
    pub sphere_points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            angles: 10_000,
            sphere_points: 100_000,
        }
    }
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Direction `i` of the grid for dimension `d`.
fn grid_direction(d: usize, grid: &GridSpec, i: usize) -> Vec<f64> {
    match d {
        1 => vec![if i == 0 { 1.0 } else { -1.0 }],
        2 => {
            let th = std::f64::consts::TAU * i as f64 / grid.angles as f64;
            vec![th.cos(), th.sin()]
        }
        _ => {
            // Halton points pushed through Box-Muller are low-discrepancy
            // Gaussian vectors; normalizing lands them on the sphere.
            let mut g = Vec::with_capacity(d + 1);
            for pair in 0..d.div_ceil(2) {
                let u1 = radical_inverse(i as u64 + 1, PRIMES[2 * pair]).max(f64::MIN_POSITIVE);
                let u2 = radical_inverse(i as u64 + 1, PRIMES[2 * pair + 1]);
                let rad = (-2.0 * u1.ln()).sqrt();
                let th = std::f64::consts::TAU * u2;
                g.push(rad * th.cos());
                g.push(rad * th.sin());
            }
            g.truncate(d);
            let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            g.iter().map(|x| x / norm).collect()
        }
    }
}

fn grid_size(d: usize, grid: &GridSpec) -> usize {
    match d {
        1 => 2,
        2 => grid.angles,
        _ => grid.sphere_points,
    }
}

/// Largest ratio over a grid of directions: a lower bound on `mu` (exact for `d = 1`).
pub fn mu_bruteforce(ds: &Dataset, grid: &GridSpec) -> Result<MuEstimate> {
    let d = ds.d();
    if d > 2 * PRIMES.len() {
        return Err(Error::InvalidArgument(format!(
            "brute-force grid supports d <= {}, got {d}",
            2 * PRIMES.len()
        )));
    }
    let w = ds.weights();
    let best = (0..grid_size(d, grid))
        .into_par_iter()
        .map(|k| {
            let beta = grid_direction(d, grid, k);
            let (mut pos, mut neg) = (0.0, 0.0);
            for i in 0..ds.n() {
                let v = w[i] * ds.row(i).dot(&beta);
                if v > 0.0 {
                    pos += v;
                } else {
                    neg -= v;
                }
            }
            ratio(pos, neg).unwrap_or(0.0)
        })
        .reduce(|| 0.0, f64::max);
    Ok(MuEstimate {
        t: None,
        mu_lower: best,
        mu_upper: f64::INFINITY,
        method: MuMethod::Bruteforce,
        basis_kind: BasisKind::QrOrthonormal,
    })
}
