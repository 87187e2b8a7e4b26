//! Synthetic instances: the two-extreme-points construction that defeats
//! uniform sampling, the points-on-an-arc construction, and Gaussian mixtures.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::LabeledData;
use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, DenseMatrix, Matrix};
use crate::rng::stream_rng;

/// `2n + 2` one-dimensional points. Class -1 is `-n` followed by `n` copies of
/// `1`; class +1 is `+n` followed by `n` copies of `-1`. The two extreme rows
/// sit at indices `0` and `n + 1`.
pub fn gen_appendix_d(n: usize) -> Result<LabeledData> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    let nf = n as f64;
    let mut z = Vec::with_capacity(2 * n + 2);
    let mut y = Vec::with_capacity(2 * n + 2);
    z.push(-nf);
    y.push(-1.0);
    z.extend(std::iter::repeat_n(1.0, n));
    y.extend(std::iter::repeat_n(-1.0, n));
    z.push(nf);
    y.push(1.0);
    z.extend(std::iter::repeat_n(-1.0, n));
    y.extend(std::iter::repeat_n(1.0, n));
    LabeledData::new(Matrix::Dense(DenseMatrix::from_row_major(2 * n + 2, 1, z)), y)
}

/// Indices of the two extreme rows of [`gen_appendix_d`].
pub fn appendix_d_extremes(n: usize) -> [usize; 2] {
    [0, n + 1]
}

#[derive(Clone, Debug, PartialEq)]
pub struct CircleInstance {
    pub data: LabeledData,
    /// Whether a line (with intercept) separates the two classes.
    pub separable: bool,
}

/// Points `p_j = (cos(j/n), sin(j/n))`, `j = 1..=n`, labelled +1, except those
/// listed in `omit`. With `hole_index = Some(i)` the point `(1 - delta) p_i`
/// is appended with label -1.
pub fn gen_circle(
    n: usize,
    hole_index: Option<usize>,
    delta: f64,
    omit: &[usize],
) -> Result<CircleInstance> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    if let Some(i) = hole_index {
        if !(1..=n).contains(&i) {
            return Err(Error::InvalidArgument(format!(
                "hole_index {i} out of range 1..={n}"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidArgument(format!("delta must lie in (0, 1), got {delta}")));
        }
    }
    if let Some(&j) = omit.iter().find(|&&j| !(1..=n).contains(&j)) {
        return Err(Error::InvalidArgument(format!("omitted index {j} out of range 1..={n}")));
    }
    let point = |j: usize| {
        let a = j as f64 / n as f64;
        [a.cos(), a.sin()]
    };
    let present: Vec<[f64; 2]> = (1..=n).filter(|j| !omit.contains(j)).map(point).collect();
    let mut rows: Vec<Vec<f64>> = present.iter().map(|p| p.to_vec()).collect();
    let mut y = vec![1.0; rows.len()];
    let separable = match hole_index {
        None => true,
        Some(i) => {
            let q = point(i).map(|c| (1.0 - delta) * c);
            rows.push(q.to_vec());
            y.push(-1.0);
            !in_arc_hull(&present, q)
        }
    };
    if rows.is_empty() {
        return Err(Error::Empty("every circle point was omitted".into()));
    }
    Ok(CircleInstance {
        data: LabeledData::new(Matrix::Dense(DenseMatrix::from_rows(&rows)), y)?,
        separable,
    })
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Closed convex hull test for points already in counter-clockwise order on
/// an arc shorter than a half circle.
fn in_arc_hull(poly: &[[f64; 2]], q: [f64; 2]) -> bool {
    match poly.len() {
        0 => false,
        1 => poly[0] == q,
        2 => {
            cross(poly[0], poly[1], q) == 0.0
                && (0..2).all(|c| {
                    q[c] >= poly[0][c].min(poly[1][c]) && q[c] <= poly[0][c].max(poly[1][c])
                })
        }
        m => (0..m).all(|k| cross(poly[k], poly[(k + 1) % m], q) >= 0.0),
    }
}

const MIX_CHUNK: usize = 4096;

/// `n / 2` points per class from unit-covariance Gaussians centred at
/// `±(separation / 2) e_1`. Even rows are class +1.
pub fn gen_mixture(n: usize, d: usize, separation: f64, seed: u64) -> Result<LabeledData> {
    check_mixture(n, d)?;
    let chunks: Vec<Vec<f64>> = (0..n.div_ceil(MIX_CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c as u64);
            let rows = MIX_CHUNK.min(n - c * MIX_CHUNK);
            let mut out = Vec::with_capacity(rows * d);
            for r in 0..rows {
                let label = label_of(c * MIX_CHUNK + r);
                for j in 0..d {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    out.push(if j == 0 { z + label * separation / 2.0 } else { z });
                }
            }
            out
        })
        .collect();
    let z = DenseMatrix::from_row_major(n, d, chunks.concat());
    LabeledData::new(Matrix::Dense(z), (0..n).map(label_of).collect())
}

/// Sparse variant: coordinate 0 is always stored, each other coordinate is
/// present with probability `density`.
pub fn gen_mixture_sparse(
    n: usize,
    d: usize,
    separation: f64,
    density: f64,
    seed: u64,
) -> Result<LabeledData> {
    check_mixture(n, d)?;
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidArgument(format!("density must lie in (0, 1], got {density}")));
    }
    let chunks: Vec<Vec<Vec<(usize, f64)>>> = (0..n.div_ceil(MIX_CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c as u64);
            let rows = MIX_CHUNK.min(n - c * MIX_CHUNK);
            (0..rows)
                .map(|r| {
                    let label = label_of(c * MIX_CHUNK + r);
                    let z0: f64 = StandardNormal.sample(&mut rng);
                    let mut row = vec![(0, z0 + label * separation / 2.0)];
                    for j in 1..d {
                        if rng.random::<f64>() < density {
                            row.push((j, StandardNormal.sample(&mut rng)));
                        }
                    }
                    row
                })
                .collect()
        })
        .collect();
    let rows: Vec<Vec<(usize, f64)>> = chunks.into_iter().flatten().collect();
    let z = CsrMatrix::from_row_entries(d, &rows);
    LabeledData::new(Matrix::Sparse(z), (0..n).map(label_of).collect())
}

fn check_mixture(n: usize, d: usize) -> Result<()> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!("n must be even and positive, got {n}")));
    }
    if d == 0 {
        return Err(Error::InvalidArgument("d must be >= 1".into()));
    }
    Ok(())
}

fn label_of(i: usize) -> f64 {
    if i % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceSpec {
    AppendixD {
        n: usize,
    },
    Circle {
        n: usize,
        hole_index: Option<usize>,
        delta: f64,
        #[serde(default)]
        omit: Vec<usize>,
    },
    GaussianMixture {
        n: usize,
        d: usize,
        separation: f64,
        density: Option<f64>,
        seed: u64,
    },
}

impl InstanceSpec {
    pub fn generate(&self) -> Result<LabeledData> {
        match self {
            Self::AppendixD { n } => gen_appendix_d(*n),
            Self::Circle {
                n,
                hole_index,
                delta,
                omit,
            } => gen_circle(*n, *hole_index, *delta, omit).map(|c| c.data),
            Self::GaussianMixture {
                n,
                d,
                separation,
                density: None,
                seed,
            } => gen_mixture(*n, *d, *separation, *seed),
            Self::GaussianMixture {
                n,
                d,
                separation,
                density: Some(p),
                seed,
            } => gen_mixture_sparse(*n, *d, *separation, *p, *seed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{fold_labels, Dataset};
    use crate::logreg::{fit_mle, nll, FitConfig, ModelParams};
    use crate::mu::{mu_bruteforce, GridSpec};

    #[test]
    fn appendix_d_n1() {
        let d = gen_appendix_d(1).unwrap();
        let z: Vec<f64> = (0..4).map(|i| d.z().row(i).to_dense(1)[0]).collect();
        assert_eq!(z, vec![-1.0, 1.0, 1.0, -1.0]);
        assert_eq!(d.y(), &[-1.0, -1.0, 1.0, 1.0]);
    }

    #[test]
    fn appendix_d_shape_and_loss_at_zero() {
        for n in [1, 3, 50] {
            let d = gen_appendix_d(n).unwrap();
            let mags: Vec<f64> = (0..2 * n + 2).map(|i| d.z().row(i).to_dense(1)[0].abs()).collect();
            assert_eq!(mags.iter().filter(|&&m| m == n as f64).count(), if n == 1 { 2 * n + 2 } else { 2 });
            assert_eq!(d.y().iter().filter(|&&y| y > 0.0).count(), n + 1);
            for e in appendix_d_extremes(n) {
                assert_eq!(mags[e], n as f64);
            }
            let ds = fold_labels(&d, true);
            let l = nll(&ds, &ModelParams::zeros(2)).unwrap();
            assert!((l - (2 * n + 2) as f64 * std::f64::consts::LN_2).abs() < 1e-9);
        }
    }

    #[test]
    fn appendix_d_has_mu_one() {
        let ds = fold_labels(&gen_appendix_d(20).unwrap(), true);
        let e = mu_bruteforce(&ds, &GridSpec::default()).unwrap();
        assert!((e.mu_lower - 1.0).abs() < 1e-6, "{}", e.mu_lower);
    }

    #[test]
    fn circle_norms_and_flags() {
        let c = gen_circle(3, None, 0.5, &[]).unwrap();
        assert!(c.separable);
        assert_eq!(c.data.n(), 3);
        let c = gen_circle(100, Some(7), 0.01, &[]).unwrap();
        for i in 0..100 {
            let p = c.data.z().row(i).to_dense(2);
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-12);
        }
        let q = c.data.z().row(100).to_dense(2);
        assert!((q[0].hypot(q[1]) - 0.99).abs() < 1e-12);
        assert!(!c.separable);
        let c = gen_circle(100, Some(7), 0.01, &[7]).unwrap();
        assert_eq!(c.data.n(), 100);
        assert!(c.separable == (0.01 < 1.0 - (1.0f64 / 100.0).cos()));
        assert!(gen_circle(5, Some(6), 0.1, &[]).is_err());
        assert!(gen_circle(5, Some(2), 1.0, &[]).is_err());
    }

    #[test]
    fn circle_hole_forces_ln2() {
        let c = gen_circle(100, Some(7), 0.01, &[]).unwrap();
        let ds = fold_labels(&c.data, true);
        let fit = fit_mle(&ds, &FitConfig::default()).unwrap();
        assert!(fit.nll >= std::f64::consts::LN_2 - 1e-6, "{}", fit.nll);
    }

    #[test]
    fn circle_without_p_i_is_separable() {
        let c = gen_circle(10, Some(4), 0.002, &[4]).unwrap();
        assert!(c.separable);
        let ds = fold_labels(&c.data, true);
        let cfg = FitConfig {
            beta_norm_cap: Some(1e4),
            ..FitConfig::default()
        };
        let fit = fit_mle(&ds, &cfg).unwrap();
        assert!(fit.nll < 0.01, "{}", fit.nll);
    }

    #[test]
    fn mixture_is_deterministic_and_centred() {
        let a = gen_mixture(4000, 3, 2.0, 7).unwrap();
        assert_eq!(a, gen_mixture(4000, 3, 2.0, 7).unwrap());
        let (mut mp, mut mn) = (0.0, 0.0);
        for i in 0..4000 {
            let x = a.z().row(i).to_dense(3)[0];
            if a.y()[i] > 0.0 {
                mp += x / 2000.0;
            } else {
                mn += x / 2000.0;
            }
        }
        assert!((mp - mn - 2.0).abs() < 5.0 / (4000f64).sqrt());
        assert!(gen_mixture(3, 2, 1.0, 0).is_err());
    }

    #[test]
    fn sparse_mixture_density() {
        let a = gen_mixture_sparse(2000, 11, 1.0, 0.2, 3).unwrap();
        assert!(a.z().is_sparse());
        let stored = match a.z() {
            Matrix::Sparse(s) => s.stored(),
            _ => unreachable!(),
        };
        let expect = 2000.0 * (1.0 + 10.0 * 0.2);
        assert!((stored as f64 - expect).abs() < 0.05 * expect);
        assert_eq!(a, gen_mixture_sparse(2000, 11, 1.0, 0.2, 3).unwrap());
    }

    #[test]
    fn zero_separation_gives_small_beta() {
        let a = gen_mixture(20_000, 2, 0.0, 5).unwrap();
        let ds: Dataset = fold_labels(&a, false);
        let fit = fit_mle(&ds, &FitConfig::default()).unwrap();
        assert!(fit.params.norm2() < 0.05, "{:?}", fit.params);
    }

    #[test]
    fn wide_separation_has_large_mu() {
        let a = gen_mixture(200, 2, 100.0, 1).unwrap();
        let ds = fold_labels(&a, false);
        let e = mu_bruteforce(&ds, &GridSpec::default()).unwrap();
        assert!(e.mu_lower > 10.0);
    }

    #[test]
    fn spec_round_trips_through_json() {
        let s = InstanceSpec::Circle {
            n: 5,
            hole_index: Some(2),
            delta: 0.1,
            omit: vec![],
        };
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<InstanceSpec>(&j).unwrap(), s);
        assert_eq!(s.generate().unwrap().n(), 6);
    }
}
