//! Fixtures shared by the benchmarks.

use logshrink::simulation::{model_sigma, mvn_sample};
use logshrink::{sample_cov, ModelId, SymmetricMatrix};

/// Training and validation sample covariances drawn from the AR(1) model.
pub fn ar1_samples(q: usize, n: usize, seed: u64) -> (SymmetricMatrix, SymmetricMatrix) {
    let sigma = model_sigma(ModelId::Ar1, q).expect("valid model");
    let draw = |s| sample_cov(&mvn_sample(&sigma, n, s).expect("sampler"), true).expect("covariance");
    (draw(seed), draw(seed + 1))
}
