//! Gaussian sketching: compression matrices, samples, partial QRCP of a
//! sample, the sample update, and the posterior uncertainty of sampled norms.

mod bayes;
mod rng;
mod sample;

pub use bayes::{expected_norm_sq, jl_bound, scaling_cdf, scaling_pdf};
pub use rng::{giid, giid_stream, NormalStream};
pub use sample::{sample_build, sample_qrcp, sample_update, SampleState, SketchConfig};
pub(crate) use sample::{sample_build_counted, sample_qrcp_with_floor};
