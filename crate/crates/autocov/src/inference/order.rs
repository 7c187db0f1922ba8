use crate::error::{Error, Result};
use crate::freelimit::PolyShape;
use crate::linalg::{solve_spd, Mat};
use crate::simkit::{
    esd, eval_sym_poly, sample_autocov, simulate_ma_substream, Ecdf, SampleMatrix,
};
use crate::scalar::rat_int;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

/// Calibration of the ECDF-coincidence threshold: the decision statistic for
/// a candidate order is the maximum pairwise distance among the lags beyond
/// it, and its threshold is the `quantile` of the same maximum simulated
/// under the white-noise null at the same (n, p).
#[derive(Clone, Debug, Serialize)]
pub struct ThresholdConfig {
    pub null_replicates: usize,
    pub quantile: f64,
    /// Multiplier on the calibrated quantile. The coincidence being tested
    /// is the paper-style visual one; lags just beyond the true order carry
    /// genuine but tiny spectral differences (they vanish only beyond
    /// h * q), so the threshold keeps a slack factor above the pure
    /// sampling-noise quantile.
    pub margin: f64,
    pub seed: u64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            null_replicates: 50,
            quantile: 0.95,
            margin: 1.5,
            seed: 1,
        }
    }
}

/// Outcome of an order-determination run. For the MA method the distance
/// matrix is pairwise over `lags`; for the AR method each row holds the
/// single distance between the lag-1 and lag-2 residual spectra at one
/// candidate order.
#[derive(Clone, Debug, Serialize)]
pub struct OrderReport {
    pub version: String,
    pub method: String,
    pub n: usize,
    pub p: usize,
    pub data_seed: u64,
    pub threshold: ThresholdConfig,
    pub lags: Vec<u32>,
    pub candidate_orders: Vec<usize>,
    pub distance_matrix: Vec<Vec<f64>>,
    /// Per-candidate calibrated thresholds (same order as
    /// `candidate_orders`).
    pub per_candidate_threshold: Vec<f64>,
    /// Per-candidate observed decision statistic.
    pub per_candidate_statistic: Vec<f64>,
    pub skipped: Vec<(usize, String)>,
    pub estimated_order: Option<usize>,
    /// Plot-data files written by the caller, if any.
    pub ecdf_files: Vec<String>,
}

fn quantile_of(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let idx = ((sorted.len() as f64 * q).ceil() as usize)
        .saturating_sub(1)
        .min(sorted.len() - 1);
    sorted[idx]
}

fn shape_esd(shape: PolyShape, x: &SampleMatrix, u: u32) -> Result<Ecdf> {
    let mut gammas = BTreeMap::new();
    gammas.insert(u, sample_autocov(x, u as usize)?);
    let m = eval_sym_poly(&shape.at(u), &gammas)?;
    esd(&m)
}

fn white_noise_model() -> crate::freelimit::ModelSpec {
    crate::freelimit::ModelSpec::scalar(rat_int(1), vec![rat_int(1)])
        .expect("white noise model is valid")
}

/// ECDF distances of the polynomial shape across a lag set, for one sample.
fn pairwise_distances(shape: PolyShape, x: &SampleMatrix, lags: &[u32]) -> Result<Vec<Vec<f64>>> {
    let ecdfs: Result<Vec<Ecdf>> = lags.iter().map(|&u| shape_esd(shape, x, u)).collect();
    let ecdfs = ecdfs?;
    let k = lags.len();
    let mut d = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let v = crate::simkit::ks_distance(&ecdfs[i], &ecdfs[j]);
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    Ok(d)
}

fn max_over_pairs(d: &[Vec<f64>], idx: &[usize]) -> f64 {
    let mut best = 0.0f64;
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            best = best.max(d[i][j]);
        }
    }
    best
}

/// Reusable null calibration for the MA method: the pairwise distance
/// matrices of `null_replicates` simulated white-noise samples at one
/// (n, p, shape, lag-set) configuration. Calibration depends only on these,
/// so one calibration serves any number of datasets of the same size.
pub struct MaCalibration {
    n: usize,
    p: usize,
    shape: PolyShape,
    lags: Vec<u32>,
    null_distances: Vec<Vec<Vec<f64>>>,
    thr: ThresholdConfig,
}

pub fn calibrate_ma(
    n: usize,
    p: usize,
    u_max: usize,
    shape: PolyShape,
    thr: &ThresholdConfig,
) -> Result<MaCalibration> {
    if u_max < 2 {
        return Err(Error::Domain("u_max must be >= 2".into()));
    }
    if u_max + 1 >= n {
        return Err(Error::Domain(format!("n = {n} too small for u_max = {u_max}")));
    }
    if thr.null_replicates < 2 || !(0.0..=1.0).contains(&thr.quantile) {
        return Err(Error::Config("bad threshold configuration".into()));
    }
    let lags: Vec<u32> = (1..=(u_max as u32 + 1)).collect();
    let null_model = white_noise_model();
    let null_distances: Result<Vec<Vec<Vec<f64>>>> = (0..thr.null_replicates as u64)
        .into_par_iter()
        .map(|rep| {
            let xn = simulate_ma_substream(&null_model, p, n, thr.seed, rep)?;
            pairwise_distances(shape, &xn, &lags)
        })
        .collect();
    Ok(MaCalibration {
        n,
        p,
        shape,
        lags,
        null_distances: null_distances?,
        thr: thr.clone(),
    })
}

/// Estimates the MA order: the smallest candidate q-hat such that the ECDFs
/// of the shape at all lags beyond q-hat coincide, where "coincide" means
/// the maximum pairwise KS distance stays below the null-calibrated
/// threshold for that lag set.
pub fn ma_order_estimate(
    x: &SampleMatrix,
    u_max: usize,
    shape: PolyShape,
    thr: &ThresholdConfig,
) -> Result<OrderReport> {
    let calib = calibrate_ma(x.n(), x.p(), u_max, shape, thr)?;
    ma_order_estimate_calibrated(x, &calib)
}

/// MA order estimate against a precomputed calibration (sizes must match).
pub fn ma_order_estimate_calibrated(
    x: &SampleMatrix,
    calib: &MaCalibration,
) -> Result<OrderReport> {
    if x.n() != calib.n || x.p() != calib.p {
        return Err(Error::Config(format!(
            "calibration is for {}x{}, data is {}x{}",
            calib.p,
            calib.n,
            x.p(),
            x.n()
        )));
    }
    let lags = &calib.lags;
    let u_max = lags.len() - 1;
    let data_d = pairwise_distances(calib.shape, x, lags)?;

    let candidates: Vec<usize> = (0..=u_max).collect();
    let mut per_thr = Vec::with_capacity(candidates.len());
    let mut per_stat = Vec::with_capacity(candidates.len());
    let mut estimated = None;
    for &cand in &candidates {
        // lags strictly beyond the candidate order
        let idx: Vec<usize> = lags
            .iter()
            .enumerate()
            .filter(|(_, &u)| u as usize > cand)
            .map(|(i, _)| i)
            .collect();
        let stat = max_over_pairs(&data_d, &idx);
        let mut null_stat: Vec<f64> = calib
            .null_distances
            .iter()
            .map(|d| max_over_pairs(d, &idx))
            .collect();
        null_stat.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let threshold = calib.thr.margin * quantile_of(&null_stat, calib.thr.quantile);
        per_thr.push(threshold);
        per_stat.push(stat);
        if estimated.is_none() && stat <= threshold {
            estimated = Some(cand);
        }
    }

    Ok(OrderReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        method: "ma-ecdf-coincidence".into(),
        n: calib.n,
        p: calib.p,
        data_seed: x.seed(),
        threshold: calib.thr.clone(),
        lags: lags.clone(),
        candidate_orders: candidates,
        distance_matrix: data_d,
        per_candidate_threshold: per_thr,
        per_candidate_statistic: per_stat,
        skipped: Vec::new(),
        estimated_order: estimated,
        ecdf_files: Vec::new(),
    })
}

/// Pluggable AR coefficient estimator: returns A_1..A_s estimates for a
/// given order.
pub trait ArEstimator: Sync {
    fn estimate(&self, x: &SampleMatrix, s: usize) -> Result<Vec<Mat>>;
    fn describe(&self) -> String;
}

/// Banded least squares: each component is regressed on the lagged values
/// of the components within `band` of it, so every row of each estimated
/// coefficient matrix is supported on a band. Default band is
/// ceil(n^{1/4}).
pub struct BandedLsEstimator {
    pub band: Option<usize>,
}

impl BandedLsEstimator {
    pub fn new() -> Self {
        BandedLsEstimator { band: None }
    }

    fn band_for(&self, n: usize) -> usize {
        self.band.unwrap_or_else(|| (n as f64).powf(0.25).ceil() as usize)
    }
}

impl Default for BandedLsEstimator {
    fn default() -> Self {
        Self::new()
    }
}

impl ArEstimator for BandedLsEstimator {
    fn estimate(&self, x: &SampleMatrix, s: usize) -> Result<Vec<Mat>> {
        if s == 0 {
            return Ok(Vec::new());
        }
        let (p, n) = (x.p(), x.n());
        if s >= n {
            return Err(Error::Domain(format!("order {s} too large for n = {n}")));
        }
        let b = self.band_for(n);
        let rows: Result<Vec<Vec<(usize, Vec<f64>)>>> = (0..p)
            .into_par_iter()
            .map(|i| {
                let lo = i.saturating_sub(b);
                let hi = (i + b).min(p - 1);
                let w = hi - lo + 1;
                let d = s * w;
                let mut g = Mat::zeros(d, d);
                let mut rhs = vec![0.0; d];
                let mut reg = vec![0.0; d];
                for t in s..n {
                    for l in 1..=s {
                        let src = x.col(t - l);
                        let dst = &mut reg[(l - 1) * w..l * w];
                        dst.copy_from_slice(&src[lo..=hi]);
                    }
                    let y = x.col(t)[i];
                    for a in 0..d {
                        let ra = reg[a];
                        if ra == 0.0 {
                            continue;
                        }
                        rhs[a] += ra * y;
                        let grow = g.row_mut(a);
                        for (gv, &rb) in grow.iter_mut().zip(reg.iter()) {
                            *gv += ra * rb;
                        }
                    }
                }
                let beta = solve_spd(&g, &rhs)?;
                let mut out = Vec::with_capacity(s);
                for l in 1..=s {
                    out.push((lo, beta[(l - 1) * w..l * w].to_vec()));
                }
                Ok(out)
            })
            .collect();
        let rows = rows?;
        let mut mats = vec![Mat::zeros(p, p); s];
        for (i, per_lag) in rows.into_iter().enumerate() {
            for (l, (lo, coefs)) in per_lag.into_iter().enumerate() {
                for (off, c) in coefs.into_iter().enumerate() {
                    mats[l].set(i, lo + off, c);
                }
            }
        }
        Ok(mats)
    }

    fn describe(&self) -> String {
        match self.band {
            Some(b) => format!("banded least squares (band {b})"),
            None => "banded least squares (band ceil(n^1/4))".into(),
        }
    }
}

/// Residual process after fitting an AR(s) model: eps_t = X_t - sum A_i
/// X_{t-i} for t > s.
fn residuals(x: &SampleMatrix, a: &[Mat]) -> Result<SampleMatrix> {
    let s = a.len();
    if s == 0 {
        return x.drop_leading(0);
    }
    let (p, n) = (x.p(), x.n());
    let mut cols = vec![0.0; p * (n - s)];
    let mut scratch = vec![0.0; p];
    for t in s..n {
        let out = &mut cols[(t - s) * p..(t - s + 1) * p];
        out.copy_from_slice(x.col(t));
        for (l, al) in a.iter().enumerate() {
            al.matvec(x.col(t - l - 1), &mut scratch);
            for (o, v) in out.iter_mut().zip(scratch.iter()) {
                *o -= *v;
            }
        }
    }
    SampleMatrix::from_columns(p, n - s, cols, x.seed(), format!("{}-resid{}", x.tag(), s))
}

/// Reusable null calibration for the AR method.
///
/// The decision statistic for a candidate order s is how far the residual
/// process is from white noise spectrally: the larger of the KS distances
/// between the residual lag-1/lag-2 Gram spectra and a pooled white-noise
/// reference spectrum at the same (n, p). Its per-candidate threshold is
/// the quantile of the same statistic for white-noise samples pushed
/// through the same estimate-then-residual pipeline, which absorbs the
/// estimation noise of over-fitted AR coefficients.
pub struct ArCalibration {
    n: usize,
    p: usize,
    reference: Vec<Ecdf>,
    per_candidate_threshold: Vec<Option<f64>>,
    thr: ThresholdConfig,
}

const AR_LAGS: [u32; 2] = [1, 2];
/// White replicates pooled into the reference spectra.
const AR_REFERENCE_POOL: usize = 20;

fn ar_lag_ecdfs(x: &SampleMatrix) -> Result<Vec<Ecdf>> {
    AR_LAGS
        .iter()
        .map(|&u| shape_esd(PolyShape::LagProduct, x, u))
        .collect()
}

fn ar_whiteness_stat(resid: &SampleMatrix, reference: &[Ecdf]) -> Result<f64> {
    let es = ar_lag_ecdfs(resid)?;
    Ok(es
        .iter()
        .zip(reference.iter())
        .map(|(e, r)| crate::simkit::ks_distance(e, r))
        .fold(0.0f64, f64::max))
}

pub fn calibrate_ar(
    n: usize,
    p: usize,
    s_max: usize,
    estimator: &dyn ArEstimator,
    thr: &ThresholdConfig,
) -> Result<ArCalibration> {
    if n <= s_max + 2 {
        return Err(Error::Domain("n too small for s_max".into()));
    }
    if thr.null_replicates < 2 || !(0.0..=1.0).contains(&thr.quantile) {
        return Err(Error::Config("bad threshold configuration".into()));
    }
    let candidates: Vec<usize> = (0..=s_max).collect();
    let null_model = white_noise_model();

    // pooled white-noise reference spectra (distinct substream block)
    let pool_base = thr.null_replicates as u64;
    let pooled: Result<Vec<Vec<Vec<f64>>>> = (0..AR_REFERENCE_POOL as u64)
        .into_par_iter()
        .map(|k| {
            let xw = simulate_ma_substream(&null_model, p, n, thr.seed, pool_base + k)?;
            let es = ar_lag_ecdfs(&xw)?;
            Ok(es.into_iter().map(|e| e.values().to_vec()).collect())
        })
        .collect();
    let pooled = pooled?;
    let mut reference = Vec::with_capacity(AR_LAGS.len());
    for li in 0..AR_LAGS.len() {
        let mut vals = Vec::with_capacity(AR_REFERENCE_POOL * p);
        for rep in &pooled {
            vals.extend_from_slice(&rep[li]);
        }
        reference.push(Ecdf::from_values(vals)?);
    }

    let null_rows: Result<Vec<Vec<Option<f64>>>> = (0..thr.null_replicates as u64)
        .into_par_iter()
        .map(|rep| {
            let xn = simulate_ma_substream(&null_model, p, n, thr.seed, rep)?;
            let mut row = Vec::with_capacity(candidates.len());
            for &s in &candidates {
                let fit = if s == 0 {
                    Ok(Vec::new())
                } else {
                    estimator.estimate(&xn, s)
                };
                match fit.and_then(|a| residuals(&xn, &a)) {
                    Ok(resid) => row.push(Some(ar_whiteness_stat(&resid, &reference)?)),
                    Err(_) => row.push(None),
                }
            }
            Ok(row)
        })
        .collect();
    let null_rows = null_rows?;
    let per_candidate_threshold: Vec<Option<f64>> = (0..candidates.len())
        .map(|ci| {
            let mut v: Vec<f64> = Vec::new();
            for r in &null_rows {
                v.push(r[ci]?);
            }
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            Some(thr.margin * quantile_of(&v, thr.quantile))
        })
        .collect();
    Ok(ArCalibration {
        n,
        p,
        reference,
        per_candidate_threshold,
        thr: thr.clone(),
    })
}

/// Estimates the AR order: the smallest s whose residual process has
/// coinciding lag-1 and lag-2 product spectra (below the null-calibrated
/// threshold). Estimator failures skip the order with a recorded warning.
pub fn ar_order_estimate(
    x: &SampleMatrix,
    s_max: usize,
    estimator: &dyn ArEstimator,
    thr: &ThresholdConfig,
) -> Result<OrderReport> {
    let calib = calibrate_ar(x.n(), x.p(), s_max, estimator, thr)?;
    ar_order_estimate_calibrated(x, estimator, &calib)
}

/// AR order estimate against a precomputed calibration (sizes must match).
pub fn ar_order_estimate_calibrated(
    x: &SampleMatrix,
    estimator: &dyn ArEstimator,
    calib: &ArCalibration,
) -> Result<OrderReport> {
    if x.n() != calib.n || x.p() != calib.p {
        return Err(Error::Config(format!(
            "calibration is for {}x{}, data is {}x{}",
            calib.p,
            calib.n,
            x.p(),
            x.n()
        )));
    }
    let lags: Vec<u32> = AR_LAGS.to_vec();
    let (n, p) = (x.n(), x.p());
    let candidates: Vec<usize> = (0..calib.per_candidate_threshold.len()).collect();
    let per_thr = &calib.per_candidate_threshold;
    let thr = &calib.thr;

    let mut distance_matrix = Vec::new();
    let mut per_stat = Vec::new();
    let mut skipped = Vec::new();
    let mut estimated = None;
    for (ci, &s) in candidates.iter().enumerate() {
        let threshold = match per_thr[ci] {
            Some(t) => t,
            None => {
                distance_matrix.push(vec![f64::NAN]);
                per_stat.push(f64::NAN);
                skipped.push((s, "estimator failed during null calibration".into()));
                continue;
            }
        };
        let fit = if s == 0 {
            Ok(Vec::new())
        } else {
            estimator.estimate(x, s)
        };
        match fit.and_then(|a| residuals(x, &a)) {
            Ok(resid) => {
                let stat = ar_whiteness_stat(&resid, &calib.reference)?;
                distance_matrix.push(vec![stat]);
                per_stat.push(stat);
                if estimated.is_none() && stat <= threshold {
                    estimated = Some(s);
                }
            }
            Err(e) => {
                distance_matrix.push(vec![f64::NAN]);
                per_stat.push(f64::NAN);
                skipped.push((s, e.to_string()));
            }
        }
    }

    Ok(OrderReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        method: "ar-residual-whiteness".into(),
        n,
        p,
        data_seed: x.seed(),
        threshold: thr.clone(),
        lags,
        candidate_orders: candidates,
        distance_matrix,
        per_candidate_threshold: per_thr
            .iter()
            .map(|o| o.unwrap_or(f64::NAN))
            .collect(),
        per_candidate_statistic: per_stat,
        skipped,
        estimated_order: estimated,
        ecdf_files: Vec::new(),
    })
}
