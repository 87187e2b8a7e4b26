//! Power-of-two rounding of scores, sample sizes, and the two index samplers
//! (i.i.d. over a prefix table, and k single-slot weighted reservoirs).

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logreg::pairwise_sum;
use crate::rng::{keyed_unit, stream_rng};
use crate::scores::ScoreVector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundedScores {
    pub s_prime: Vec<f64>,
    pub total_prime: f64,
    /// Number of distinct values of `s'_i / w_i`.
    pub num_classes: usize,
}

/// Smallest `e` with `w * 2^e >= s`. Scaling by a power of two is exact, so the
/// comparison is exact too.
fn ceil_exponent(s: f64, w: f64) -> i32 {
    let mut e = (s / w).log2().ceil() as i32;
    while w * 2f64.powi(e) < s {
        e += 1;
    }
    while w * 2f64.powi(e - 1) >= s {
        e -= 1;
    }
    e
}

/// `s'_i = w_i 2^{ceil(log2(s_i / w_i))}`.
pub fn round_pow2(sv: &ScoreVector, w: &[f64]) -> RoundedScores {
    round_pow2_raw(&sv.s, w)
}

pub fn round_pow2_raw(s: &[f64], w: &[f64]) -> RoundedScores {
    assert_eq!(s.len(), w.len(), "score and weight lengths differ");
    let exps: Vec<i32> = s.iter().zip(w).map(|(&s, &w)| ceil_exponent(s, w)).collect();
    let s_prime: Vec<f64> = exps.iter().zip(w).map(|(&e, &w)| w * 2f64.powi(e)).collect();
    let mut distinct = exps.clone();
    distinct.sort_unstable();
    distinct.dedup();
    RoundedScores {
        total_prime: pairwise_sum(&s_prime),
        s_prime,
        num_classes: distinct.len(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSizeParams {
    pub epsilon: f64,
    pub delta: f64,
    /// Absolute constant hidden in the sample-size bound.
    pub scale_const: f64,
}

impl SampleSizeParams {
    pub const DEFAULT_SCALE: f64 = 0.5;

    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        let p = Self {
            epsilon,
            delta,
            scale_const: Self::DEFAULT_SCALE,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_scale(mut self, scale_const: f64) -> Result<Self> {
        self.scale_const = scale_const;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must lie in (0, 1/2), got {}",
                self.epsilon
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        if !(self.scale_const > 0.0 && self.scale_const.is_finite()) {
            return Err(Error::InvalidArgument("scale_const must be positive".into()));
        }
        Ok(())
    }

    /// VC dimension bound `t (d + 1)` of the weighted range space.
    pub fn vc_dim(rs: &RoundedScores, d: usize) -> usize {
        rs.num_classes * (d + 1)
    }
}

/// Sample size before clamping, as a real number (may be astronomically large).
pub fn sample_size_unclamped(rs: &RoundedScores, p: &SampleSizeParams, mu: f64, d: usize) -> f64 {
    let s_eff = (20.0 + 2.0 * mu) * rs.total_prime;
    let vc = SampleSizeParams::vc_dim(rs, d) as f64;
    let k = p.scale_const * s_eff / (p.epsilon * p.epsilon)
        * (vc * s_eff.max(std::f64::consts::E).ln() + (1.0 / p.delta).ln());
    k.ceil()
}

/// Sample size clamped to `[d + 1, n]`.
pub fn sample_size(rs: &RoundedScores, p: &SampleSizeParams, mu: f64, d: usize) -> usize {
    let n = rs.s_prime.len();
    let k = sample_size_unclamped(rs, p, mu, d);
    let lo = (d + 1).min(n);
    if k >= n as f64 {
        n
    } else {
        (k as usize).clamp(lo, n)
    }
}

/// `k` i.i.d. indices with `P(i) = s'_i / S'`.
pub fn sample_iid(rs: &RoundedScores, k: usize, seed: u64) -> Result<Vec<usize>> {
    sample_iid_weights(&rs.s_prime, k, seed)
}

pub(crate) fn sample_iid_weights(p: &[f64], k: usize, seed: u64) -> Result<Vec<usize>> {
    if p.is_empty() {
        return Err(Error::Empty("no rows to sample from".into()));
    }
    let dist = WeightedIndex::new(p).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut rng = stream_rng(seed, 0);
    Ok((0..k).map(|_| dist.sample(&mut rng)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Threshold(f64);

impl Eq for Threshold {}

impl PartialOrd for Threshold {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Threshold {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// `k` independent single-slot weighted reservoirs fed by one stream.
///
/// Reservoir `j` keeps its current index until the running score sum reaches
/// `W / U`, with `W` the sum at its last replacement and `U` uniform on `(0, 1]`.
/// This has the same law as flipping a coin with probability `s_i / W_i` at
/// every row, while only touching the reservoirs that actually change.
#[derive(Clone, Debug)]
pub struct WeightedReservoir {
    seed: u64,
    held: Vec<usize>,
    draws: Vec<u64>,
    heap: BinaryHeap<Reverse<(Threshold, usize)>>,
    total: f64,
    seen: usize,
}

impl WeightedReservoir {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            seed,
            held: vec![0; k],
            draws: vec![0; k],
            heap: BinaryHeap::with_capacity(k),
            total: 0.0,
            seen: 0,
        }
    }

    fn next_threshold(&mut self, j: usize) -> Threshold {
        let u = 1.0 - keyed_unit(self.seed, j as u64, self.draws[j]);
        self.draws[j] += 1;
        Threshold(self.total / u)
    }

    pub fn push(&mut self, index: usize, score: f64) -> Result<()> {
        if !(score > 0.0 && score.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "reservoir score must be positive, got {score} at row {index}"
            )));
        }
        self.total += score;
        self.seen += 1;
        if self.seen == 1 {
            for j in 0..self.held.len() {
                self.held[j] = index;
                let t = self.next_threshold(j);
                self.heap.push(Reverse((t, j)));
            }
            return Ok(());
        }
        while let Some(&Reverse((t, j))) = self.heap.peek() {
            if t.0 > self.total {
                break;
            }
            self.heap.pop();
            self.held[j] = index;
            let t = self.next_threshold(j);
            self.heap.push(Reverse((t, j)));
        }
        Ok(())
    }

    pub fn finish(self) -> Result<Vec<usize>> {
        if self.seen == 0 {
            return Err(Error::Empty("reservoir stream was empty".into()));
        }
        Ok(self.held)
    }
}

/// Run `k` reservoirs over a stream of `(index, s'_i)` pairs.
pub fn reservoir_stream<I>(rows: I, k: usize, seed: u64) -> Result<Vec<usize>>
where
    I: IntoIterator<Item = (usize, f64)>,
{
    let mut r = WeightedReservoir::new(k, seed);
    for (i, s) in rows {
        r.push(i, s)?;
    }
    r.finish()
}
