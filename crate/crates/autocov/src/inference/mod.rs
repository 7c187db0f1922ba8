//! Statistical procedures built on the spectral limits: MA order
//! determination from ECDF coincidence beyond the true order, AR order
//! determination from residual spectra, and trace-based white-noise tests.

mod order;
mod tracetest;

pub use order::{
    ar_order_estimate, ar_order_estimate_calibrated, calibrate_ar, calibrate_ma,
    ma_order_estimate, ma_order_estimate_calibrated, ArCalibration, ArEstimator,
    BandedLsEstimator, MaCalibration, OrderReport, ThresholdConfig,
};
pub use tracetest::{white_noise_trace_test, TraceStatKind, TraceTestReport};

/// Complementary error function (fractional error below 1.2e-7), used for
/// normal tail probabilities.
pub(crate) fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let ans = t * (-z * z - 1.26551223
        + t * (1.00002368
            + t * (0.37409196
                + t * (0.09678418
                    + t * (-0.18628806
                        + t * (0.27886807
                            + t * (-1.13520398
                                + t * (1.48851587
                                    + t * (-0.82215223 + t * 0.17087277)))))))))
        .exp();
    if x >= 0.0 {
        ans
    } else {
        2.0 - ans
    }
}

/// Two-sided normal p-value for a z-score.
pub(crate) fn p_two_sided(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2)
}
