//! Coresets for weighted logistic regression.
//!
//! Rows are sampled with probability proportional to an upper bound on their
//! sensitivity (square-root leverage score plus a uniform term) and reweighted
//! so that the weighted loss on the sample tracks the loss on the full data for
//! every parameter vector.
//!
//! ```
//! use logcoreset::{build_base, fold_labels, gen_mixture, ScoreMethod, SketchConfig};
//!
//! let data = gen_mixture(2_000, 3, 1.0, 7).unwrap();
//! let ds = fold_labels(&data, true);
//! let cfg = SketchConfig::for_shape(ds.n(), ds.d(), 1);
//! let c = build_base(&ds, 200, ScoreMethod::ExactQr, &cfg, 42).unwrap();
//! assert_eq!(c.k(), 200);
//! ```

pub mod coreset;
pub mod data;
pub mod error;
pub mod instances;
pub mod linalg;
pub mod logreg;
pub mod mu;
pub mod rng;
pub mod sampler;
pub mod scores;

pub use coreset::{
    build_base, build_base_eps, build_recursive, build_uniform, rounded_scores, Coreset,
    CoresetMeta, CoresetMethod, RecursionConfig,
};
pub use data::{
    fold_labels, load_dataset, read_weighted_csv, write_labeled, Dataset, DatasetStats,
    InputFormat, LabeledData, WeightedRows,
};
pub use error::{Error, Result};
pub use instances::{gen_appendix_d, gen_circle, gen_mixture, gen_mixture_sparse, InstanceSpec};
pub use linalg::{CsrMatrix, DenseMatrix, Matrix};
pub use logreg::{fit_mle, nll, nll_grad, FitConfig, FitResult, Init, ModelParams};
pub use mu::{mu_bruteforce, mu_lp, GridSpec, MuEstimate, MuMethod};
pub use sampler::{
    reservoir_stream, round_pow2, sample_iid, sample_size, sample_size_unclamped, RoundedScores,
    SampleSizeParams,
};
pub use scores::{
    sqrt_leverage_exact, sqrt_leverage_sketched, ScoreMethod, ScoreVector, SketchConfig,
};
