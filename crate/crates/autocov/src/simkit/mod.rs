//! Monte Carlo side: MA(q)/IVAR simulation, sample autocovariance matrices,
//! matrix polynomial evaluation, spectra and ECDFs, trace statistics and CSV
//! export. Reproducibility is by counter-based substreams: a replicate's
//! generator is keyed by (seed, replicate index) and never overlaps others.

mod ecdf;
mod models;
mod sample;
mod stats;

pub use crate::linalg::{symmetric_eigen_jacobi, symmetric_eigenvalues, Mat};
pub use ecdf::{ks_distance, Ecdf};
pub use models::{builtin_model, BuiltinModel};
pub use sample::{
    esd, eval_sym_poly, rng_for, sample_autocov, simulate_ivar, simulate_ma,
    simulate_ma_substream, AutocovMatrix, SampleMatrix,
};
pub use stats::{sample_moments, trace_statistic, write_ecdf_csv, write_trace_csv, TraceStats};
