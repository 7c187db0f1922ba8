use crate::error::{Error, Result};
use crate::freelimit::{Atom, Coefficients, GammaPolynomial, ModelSpec};
use crate::scalar::Scalar;
use crate::simkit::ecdf::Ecdf;
use crate::simkit::sample::{eval_sym_poly, sample_autocov, simulate_ma_substream, SampleMatrix};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::io::Write;

/// Mean, unbiased variance, skewness and excess kurtosis of a sample.
pub fn sample_moments(values: &[f64]) -> (f64, f64, f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for v in values {
        let d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let var = if n > 1.0 { m2 * n / (n - 1.0) } else { 0.0 };
    let sd = m2.sqrt();
    let skew = if sd > 0.0 { m3 / (sd * sd * sd) } else { 0.0 };
    let kurt = if m2 > 0.0 { m4 / (m2 * m2) - 3.0 } else { 0.0 };
    (mean, var, skew, kurt)
}

/// Replicated trace statistics of a symmetric autocovariance polynomial.
#[derive(Clone, Debug)]
pub struct TraceStats {
    pub values: Vec<f64>,
    /// Analytic centering constant when the model admits one, else the
    /// empirical mean.
    pub center: f64,
    pub center_is_analytic: bool,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

enum TraceKind {
    Gamma0,
    LagProduct(u32),
    SymmetrizedSum(u32),
    General(Vec<u32>),
}

fn classify(poly: &GammaPolynomial) -> TraceKind {
    if *poly == GammaPolynomial::gamma(0) {
        return TraceKind::Gamma0;
    }
    let lags: Vec<u32> = {
        let mut ls: Vec<u32> = poly
            .terms()
            .flat_map(|(_, w)| w.iter().map(Atom::lag))
            .collect();
        ls.sort_unstable();
        ls.dedup();
        ls
    };
    if let Some(&u) = lags.first() {
        if lags.len() == 1 {
            if *poly == GammaPolynomial::lag_product(u) {
                return TraceKind::LagProduct(u);
            }
            let sum = GammaPolynomial::gamma(u).add(&GammaPolynomial::gamma_star(u));
            if *poly == sum {
                return TraceKind::SymmetrizedSum(u);
            }
        }
    }
    TraceKind::General(lags)
}

fn trace_of(kind: &TraceKind, poly: &GammaPolynomial, x: &SampleMatrix) -> Result<f64> {
    let n = x.n() as f64;
    match kind {
        TraceKind::Gamma0 => {
            Ok(x.raw().iter().map(|v| v * v).sum::<f64>() / n)
        }
        TraceKind::LagProduct(u) => {
            let g = sample_autocov(x, *u as usize)?;
            Ok(g.mat.frobenius_sq())
        }
        TraceKind::SymmetrizedSum(u) => {
            let u = *u as usize;
            let mut acc = 0.0;
            for t in 0..x.n() - u {
                let a = x.col(t);
                let b = x.col(t + u);
                acc += a.iter().zip(b.iter()).map(|(p, q)| p * q).sum::<f64>();
            }
            Ok(2.0 * acc / n)
        }
        TraceKind::General(lags) => {
            let mut gammas = BTreeMap::new();
            for &u in lags {
                gammas.insert(u, sample_autocov(x, u as usize)?);
            }
            Ok(eval_sym_poly(poly, &gammas)?.trace())
        }
    }
}

/// Analytic mean of the statistic under the model when one is available.
fn analytic_center(kind: &TraceKind, model: &ModelSpec, n: usize, p: usize) -> Option<f64> {
    let scalars: Option<Vec<f64>> = match model.coefficients() {
        Coefficients::Scalar(l) => Some(l.iter().map(Scalar::to_f64).collect()),
        Coefficients::Matrix(_) => None,
    };
    match kind {
        TraceKind::Gamma0 => {
            // E tr Gamma_0 = sum_j tr(psi_j psi_j^T); exact under the
            // pre-sample convention.
            match model.coefficients() {
                Coefficients::Scalar(l) => {
                    let s: f64 = l.iter().map(|v| Scalar::to_f64(v).powi(2)).sum();
                    Some(p as f64 * s)
                }
                Coefficients::Matrix(_) => None,
            }
        }
        TraceKind::LagProduct(u) => {
            // known for white noise: (n-u) p^2 / n^2
            let l = scalars?;
            if l.len() == 1 {
                Some((n - *u as usize) as f64 * (p * p) as f64 / (n * n) as f64)
            } else {
                None
            }
        }
        TraceKind::SymmetrizedSum(u) => {
            // E tr(G_u + G_u^T) = 2 (n-u)/n * p * sum_j lambda_j lambda_{j+u}
            let l = scalars?;
            let u = *u as usize;
            let s: f64 = (0..l.len().saturating_sub(u)).map(|j| l[j] * l[j + u]).sum();
            Some(2.0 * (n - u) as f64 / n as f64 * p as f64 * s)
        }
        TraceKind::General(_) => None,
    }
}

/// Simulates `replications` samples of the model and collects the trace of
/// the polynomial for each; replicate r uses substream (seed, r).
pub fn trace_statistic(
    poly: &GammaPolynomial,
    model: &ModelSpec,
    n: usize,
    p: usize,
    replications: usize,
    seed: u64,
) -> Result<TraceStats> {
    if replications < 2 {
        return Err(Error::Domain("need at least 2 replications".into()));
    }
    poly.require_symmetric()?;
    let kind = classify(poly);
    let values: Result<Vec<f64>> = (0..replications as u64)
        .into_par_iter()
        .map(|rep| {
            let x = simulate_ma_substream(model, p, n, seed, rep)?;
            trace_of(&kind, poly, &x)
        })
        .collect();
    let values = values?;
    let (mean, variance, skewness, excess_kurtosis) = sample_moments(&values);
    let (center, center_is_analytic) = match analytic_center(&kind, model, n, p) {
        Some(c) => (c, true),
        None => (mean, false),
    };
    Ok(TraceStats {
        values,
        center,
        center_is_analytic,
        mean,
        variance,
        skewness,
        excess_kurtosis,
    })
}

/// CSV export of an ECDF: header `x,F`, one row per jump point, floats with
/// 17 significant digits.
pub fn write_ecdf_csv<W: Write>(ecdf: &Ecdf, mut w: W) -> Result<()> {
    writeln!(w, "x,F")?;
    let n = ecdf.len() as f64;
    let mut i = 0usize;
    let xs = ecdf.values();
    while i < xs.len() {
        let x = xs[i];
        while i < xs.len() && xs[i] == x {
            i += 1;
        }
        writeln!(w, "{:.16e},{:.16e}", x, i as f64 / n)?;
    }
    Ok(())
}

/// CSV export of replicate traces: header `replicate,trace`.
pub fn write_trace_csv<W: Write>(stats: &TraceStats, mut w: W) -> Result<()> {
    writeln!(w, "replicate,trace")?;
    for (i, v) in stats.values.iter().enumerate() {
        writeln!(w, "{},{:.16e}", i, v)?;
    }
    Ok(())
}
