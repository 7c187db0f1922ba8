use super::cfp::{cfp_cumulant, cfp_moments, mp_moment};
use crate::error::{Error, Result};
use crate::scalar::{Rat, Scalar};
use num_complex::Complex64;

/// A candidate point of a Stieltjes transform: z in the upper half-plane
/// and a value m = m(z). The orientation throughout is
/// m(z) = integral of (x - z)^{-1} d mu(x), under which the truncated moment
/// series is m_N(z) = -sum_{h=0..N} beta_h z^{-h-1} with beta_0 = 1.
#[derive(Clone, Copy, Debug)]
pub struct StieltjesPoint {
    pub z: Complex64,
    pub m: Complex64,
}

impl StieltjesPoint {
    pub fn new(z: Complex64, m: Complex64) -> Result<Self> {
        if z.im <= 0.0 {
            return Err(Error::Domain(format!(
                "Stieltjes points need Im(z) > 0, got {z}"
            )));
        }
        Ok(StieltjesPoint { z, m })
    }

    /// Builds the point from a truncated moment series: `moments[h-1]` holds
    /// the h-th moment, beta_0 = 1 is implied.
    pub fn from_moments(z: Complex64, moments: &[f64]) -> Result<Self> {
        let m = truncated_stieltjes(moments, z)?;
        StieltjesPoint::new(z, m)
    }
}

/// m_N(z) = -sum_{h=0}^{N} beta_h z^{-h-1} with beta_0 = 1 and beta_h from
/// the slice (so N = moments.len()).
pub fn truncated_stieltjes(moments: &[f64], z: Complex64) -> Result<Complex64> {
    if z.im <= 0.0 {
        return Err(Error::Domain(format!(
            "Stieltjes points need Im(z) > 0, got {z}"
        )));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut zpow = 1.0 / z;
    acc += zpow; // beta_0 = 1
    for b in moments {
        zpow /= z;
        acc += b * zpow;
    }
    Ok(-acc)
}

/// Residual of the bi-quadratic fixed-point equation satisfied by the
/// Stieltjes transform of the LSD of the half-symmetrized lagged
/// autocovariance under white noise:
/// (1 - y^2 m^2)(y z m + y - 1)^2 - 1.
pub fn biquadratic_residual(pt: &StieltjesPoint, y: f64) -> Complex64 {
    let m = pt.m;
    let z = pt.z;
    (1.0 - y * y * m * m) * num_traits::pow(y * z * m + (y - 1.0), 2) - 1.0
}

/// Which form of the spectrum fixed-point equation to evaluate.
///
/// `Conventional` is the form consistent with the m = int (x-z)^{-1} dmu
/// orientation used everywhere else in this module; with a point mass at 1
/// it reduces exactly to the Marchenko-Pastur fixed point
/// m = 1/(1 - y - z - yzm). `AsPrinted` keeps the z - t(1-y-yzm)
/// denominator orientation seen in some displays of the same equation; the
/// two differ by the sign of the denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Orientation {
    #[default]
    Conventional,
    AsPrinted,
}

/// Residual of the general-covariance fixed-point equation
/// m = sum_t w_t / (t(1 - y - yzm) - z) (conventional orientation) for a
/// discrete spectrum `sigma_spectrum` of (atom, weight) pairs with weights
/// summing to 1.
pub fn silverstein_residual(
    pt: &StieltjesPoint,
    y: f64,
    sigma_spectrum: &[(f64, f64)],
    orientation: Orientation,
) -> Result<Complex64> {
    if sigma_spectrum.is_empty() {
        return Err(Error::Domain("sigma spectrum must be nonempty".into()));
    }
    let total: f64 = sigma_spectrum.iter().map(|(_, w)| w).sum();
    if (total - 1.0).abs() > 1e-12 || sigma_spectrum.iter().any(|(_, w)| *w <= 0.0) {
        return Err(Error::Domain(format!(
            "spectrum weights must be positive and sum to 1 (sum = {total})"
        )));
    }
    let m = pt.m;
    let z = pt.z;
    let shift = 1.0 - y - y * z * m;
    let mut acc = Complex64::new(0.0, 0.0);
    for &(t, w) in sigma_spectrum {
        let denom = match orientation {
            Orientation::Conventional => t * shift - z,
            Orientation::AsPrinted => z - t * shift,
        };
        if denom.norm() < 1e-14 {
            return Err(Error::Singular(format!(
                "fixed-point denominator vanished at atom {t}"
            )));
        }
        acc += w / denom;
    }
    Ok(m - acc)
}

/// Residual of the cumulant-generating-function identity
/// -C(-m_N(z)) = z m_N(z), where C(w) = 1 + sum_r k_r w^r uses the
/// compound-free-Poisson cumulants of the half-symmetrized lag-u law and
/// m_N the truncated moment series from the same cumulants.
pub fn cgf_stieltjes_check(
    u: usize,
    lambdas: &[Rat],
    y: &Rat,
    z: Complex64,
    n_trunc: usize,
) -> Result<Complex64> {
    if n_trunc == 0 {
        return Err(Error::Domain("truncation order must be >= 1".into()));
    }
    let ks: Result<Vec<Rat>> = (1..=n_trunc)
        .map(|r| cfp_cumulant(u, r, lambdas, y))
        .collect();
    let ks = ks?;
    let betas: Vec<f64> = cfp_moments(u, lambdas, y, n_trunc)?
        .iter()
        .map(Scalar::to_f64)
        .collect();
    let m = truncated_stieltjes(&betas, z)?;
    let mut c = Complex64::new(1.0, 0.0);
    let mut wpow = Complex64::new(1.0, 0.0);
    for k in &ks {
        wpow *= -m;
        c += Scalar::to_f64(k) * wpow;
    }
    Ok(-c - z * m)
}

/// Convenience: MP moment series in f64 (used by the fixed-point tests and
/// the CLI law checks).
pub fn mp_moments_f64(y: &Rat, h_max: usize) -> Vec<f64> {
    (1..=h_max).map(|h| Scalar::to_f64(&mp_moment(h, y))).collect()
}
