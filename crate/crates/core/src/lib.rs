//! Diagnostics for reconstruction failures of stepwise molecular-graph
//! generative models: molecule handling, motif decomposition, trace replay
//! and first-error classification, similarity metrics and latent
//! distinguishability.

pub mod chem;
pub mod classify;
pub mod distinguish;
pub mod fingerprint;
pub mod histogram;
pub mod metrics;
pub mod motif;
pub mod num;
pub mod subiso;
pub mod trace;

pub use num::Real;

pub type Gaussian = distinguish::DiagGaussian<f64>;
pub type Gaussian32 = distinguish::DiagGaussian<f32>;
pub type Distinguishability = distinguish::DistinguishabilityResult<f64>;
pub type Distinguishability32 = distinguish::DistinguishabilityResult<f32>;

/// Count-vector Tanimoto similarity in `f64`.
pub fn tanimoto<K: Ord>(x: &fingerprint::CountVector<K>, y: &fingerprint::CountVector<K>) -> f64 {
    fingerprint::tanimoto_count(x, y)
}

/// Count-vector Tanimoto similarity in `f32`.
pub fn tanimoto32<K: Ord>(x: &fingerprint::CountVector<K>, y: &fingerprint::CountVector<K>) -> f32 {
    fingerprint::tanimoto_count(x, y)
}
