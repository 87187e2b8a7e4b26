//! Fixtures shared by the benchmarks.

use logcoreset::{fold_labels, gen_mixture, gen_mixture_sparse, Dataset, SketchConfig};

/// Folded dense Gaussian mixture with an intercept column.
pub fn dense_fixture(n: usize, d: usize) -> Dataset {
    fold_labels(&gen_mixture(n, d, 1.0, 17).expect("valid mixture shape"), true)
}

/// Folded sparse mixture, each noise coordinate stored with probability 0.1.
pub fn sparse_fixture(n: usize, d: usize) -> Dataset {
    fold_labels(
        &gen_mixture_sparse(n, d, 1.0, 0.1, 17).expect("valid mixture shape"),
        true,
    )
}

pub fn sketch_for(ds: &Dataset) -> SketchConfig {
    SketchConfig::for_shape(ds.n(), ds.d(), 5)
}
