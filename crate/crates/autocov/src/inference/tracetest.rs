use super::p_two_sided;
use crate::error::{Error, Result};
use crate::simkit::{sample_autocov, SampleMatrix};
use serde::Serialize;

/// Which trace statistic the white-noise test uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TraceStatKind {
    /// tr of the lag-0 autocovariance.
    Gamma0,
    /// tr of the lag-1 Gram product.
    Lag1Product,
    /// tr of the lag-1 additive symmetrization.
    Lag1Symmetrized,
}

impl TraceStatKind {
    pub fn name(&self) -> &'static str {
        match self {
            TraceStatKind::Gamma0 => "tr(G0)",
            TraceStatKind::Lag1Product => "tr(G1 G1*)",
            TraceStatKind::Lag1Symmetrized => "tr(G1 + G1*)",
        }
    }

    /// Null mean and variance under white noise at n = p.
    fn null_params(&self, n: usize) -> (f64, f64) {
        match self {
            TraceStatKind::Gamma0 => (n as f64, 2.0),
            TraceStatKind::Lag1Product => ((n - 1) as f64, 10.0),
            TraceStatKind::Lag1Symmetrized => (0.0, 4.0),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceTestReport {
    pub version: String,
    pub statistic: String,
    pub value: f64,
    pub null_mean: f64,
    pub null_variance: f64,
    pub z_score: f64,
    pub p_two_sided: f64,
    /// One-sided decision at the 5% level: large values reject.
    pub reject_one_sided_5pct: bool,
    pub h0: String,
    pub h1: String,
}

/// Trace-based white-noise test: compares the chosen statistic against its
/// asymptotic null law under X_t = eps_t. Null mean/variance come from the
/// built-in n = p asymptotics unless supplied explicitly.
pub fn white_noise_trace_test(
    x: &SampleMatrix,
    stat: TraceStatKind,
    null_params: Option<(f64, f64)>,
) -> Result<TraceTestReport> {
    let (n, p) = (x.n(), x.p());
    let (null_mean, null_var) = match null_params {
        Some((m, v)) => {
            if v <= 0.0 {
                return Err(Error::Domain("null variance must be positive".into()));
            }
            (m, v)
        }
        None => {
            if n != p {
                return Err(Error::Domain(format!(
                    "built-in null law needs n = p (got n={n}, p={p}); pass null parameters explicitly"
                )));
            }
            stat.null_params(n)
        }
    };
    let value = match stat {
        TraceStatKind::Gamma0 => x.raw().iter().map(|v| v * v).sum::<f64>() / n as f64,
        TraceStatKind::Lag1Product => sample_autocov(x, 1)?.mat.frobenius_sq(),
        TraceStatKind::Lag1Symmetrized => {
            let mut acc = 0.0;
            for t in 0..n - 1 {
                let a = x.col(t);
                let b = x.col(t + 1);
                acc += a.iter().zip(b.iter()).map(|(p, q)| p * q).sum::<f64>();
            }
            2.0 * acc / n as f64
        }
    };
    let z = (value - null_mean) / null_var.sqrt();
    Ok(TraceTestReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        statistic: stat.name().to_string(),
        value,
        null_mean,
        null_variance: null_var,
        z_score: z,
        p_two_sided: p_two_sided(z),
        reject_one_sided_5pct: z > 1.6448536269514722,
        h0: "X_t = eps_t (white noise)".into(),
        h1: "X_t = eps_t + eps_{t-1}".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat_int, Rat};
    use crate::simkit::builtin_model;

    fn white_noise(p: usize, n: usize, seed: u64) -> SampleMatrix {
        builtin_model(1, Rat::from_integer(1))
            .unwrap()
            .simulate(p, n, seed)
            .unwrap()
    }

    #[test]
    fn null_acceptance_and_alternative_rejection() {
        let x = white_noise(200, 200, 8);
        let rep = white_noise_trace_test(&x, TraceStatKind::Gamma0, None).unwrap();
        assert!(rep.z_score.abs() < 4.0, "z = {}", rep.z_score);
        // MA(1) with psi = I: tr G0 near 2n, enormous z against N(n, 2)
        let m = crate::freelimit::ModelSpec::scalar(rat_int(1), vec![rat_int(1), rat_int(1)])
            .unwrap();
        let x = crate::simkit::simulate_ma(&m, 200, 200, 8).unwrap();
        let rep = white_noise_trace_test(&x, TraceStatKind::Gamma0, None).unwrap();
        assert!(rep.z_score > 50.0, "z = {}", rep.z_score);
        assert!(rep.reject_one_sided_5pct);
        assert!(rep.p_two_sided < 1e-12);
    }

    #[test]
    fn degenerate_zero_data() {
        let x = SampleMatrix::from_columns(10, 10, vec![0.0; 100], 0, "zeros".into()).unwrap();
        let rep = white_noise_trace_test(&x, TraceStatKind::Gamma0, None).unwrap();
        assert_eq!(rep.value, 0.0);
        let want = -(10.0 / 2.0f64.sqrt());
        assert!((rep.z_score - want).abs() < 1e-12);
        assert!(!rep.reject_one_sided_5pct);
    }

    #[test]
    fn component_permutation_invariance() {
        let x = white_noise(40, 60, 3);
        let perm: Vec<usize> = (0..40).rev().collect();
        let y = x.permute_rows(&perm).unwrap();
        for stat in [
            TraceStatKind::Gamma0,
            TraceStatKind::Lag1Product,
            TraceStatKind::Lag1Symmetrized,
        ] {
            let a = white_noise_trace_test(&x, stat, Some((0.0, 1.0))).unwrap();
            let b = white_noise_trace_test(&y, stat, Some((0.0, 1.0))).unwrap();
            assert!(
                (a.value - b.value).abs() <= 1e-9 * a.value.abs().max(1.0),
                "{stat:?}"
            );
        }
    }

    #[test]
    fn rectangular_needs_explicit_null() {
        let x = white_noise(30, 50, 2);
        assert!(white_noise_trace_test(&x, TraceStatKind::Gamma0, None).is_err());
        assert!(white_noise_trace_test(&x, TraceStatKind::Gamma0, Some((30.0, 2.0))).is_ok());
        assert!(white_noise_trace_test(&x, TraceStatKind::Gamma0, Some((30.0, -1.0))).is_err());
    }

    #[test]
    fn p_value_in_unit_interval() {
        let x = white_noise(50, 50, 9);
        for stat in [
            TraceStatKind::Gamma0,
            TraceStatKind::Lag1Product,
            TraceStatKind::Lag1Symmetrized,
        ] {
            let rep = white_noise_trace_test(&x, stat, None).unwrap();
            assert!((0.0..=1.0).contains(&rep.p_two_sided), "{stat:?}");
        }
    }
}
