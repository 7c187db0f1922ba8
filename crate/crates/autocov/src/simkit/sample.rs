use crate::error::{Error, Result};
use crate::freelimit::{CoeffMatrix, Coefficients, GammaPolynomial, ModelSpec};
use crate::linalg::{symmetric_eigenvalues, Mat};
use crate::scalar::Scalar;
use crate::simkit::ecdf::Ecdf;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::collections::BTreeMap;

/// Generator for one replicate: ChaCha8 keyed by the experiment seed with the
/// replicate index as the stream counter, so replicates are independent and
/// any subset can be regenerated in isolation.
pub fn rng_for(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// A simulated p x n sample, columns X_1..X_n stored contiguously.
#[derive(Clone, Debug)]
pub struct SampleMatrix {
    p: usize,
    n: usize,
    cols: Vec<f64>,
    seed: u64,
    tag: String,
}

impl SampleMatrix {
    pub fn from_columns(p: usize, n: usize, cols: Vec<f64>, seed: u64, tag: String) -> Result<Self> {
        if cols.len() != p * n {
            return Err(Error::Config(format!(
                "sample storage {} does not match {p}x{n}",
                cols.len()
            )));
        }
        if cols.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("sample contains non-finite entries".into()));
        }
        Ok(SampleMatrix {
            p,
            n,
            cols,
            seed,
            tag,
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    #[inline]
    pub fn col(&self, t: usize) -> &[f64] {
        &self.cols[t * self.p..(t + 1) * self.p]
    }

    pub fn raw(&self) -> &[f64] {
        &self.cols
    }

    /// Rows reordered by `perm` (component relabeling).
    pub fn permute_rows(&self, perm: &[usize]) -> Result<SampleMatrix> {
        if perm.len() != self.p {
            return Err(Error::Config("permutation length mismatch".into()));
        }
        let mut cols = vec![0.0; self.cols.len()];
        for t in 0..self.n {
            let src = self.col(t);
            let dst = &mut cols[t * self.p..(t + 1) * self.p];
            for (i, &pi) in perm.iter().enumerate() {
                dst[i] = src[pi];
            }
        }
        SampleMatrix::from_columns(self.p, self.n, cols, self.seed, self.tag.clone())
    }

    /// Drops the first `skip` columns (used for AR residual alignment).
    pub fn drop_leading(&self, skip: usize) -> Result<SampleMatrix> {
        if skip >= self.n {
            return Err(Error::Domain(format!(
                "cannot drop {skip} of {} columns",
                self.n
            )));
        }
        SampleMatrix::from_columns(
            self.p,
            self.n - skip,
            self.cols[skip * self.p..].to_vec(),
            self.seed,
            self.tag.clone(),
        )
    }
}

enum CoeffApply {
    Scalar(Vec<f64>),
    Matrices(Vec<CoeffMatrix>),
}

impl CoeffApply {
    fn from_model(model: &ModelSpec, p: usize) -> Result<Self> {
        Ok(match model.coefficients() {
            Coefficients::Scalar(l) => CoeffApply::Scalar(l.iter().map(Scalar::to_f64).collect()),
            Coefficients::Matrix(_) => CoeffApply::Matrices(model.coefficient_matrices(p)?),
        })
    }

    /// acc += psi_j * src
    fn accumulate(&self, j: usize, src: &[f64], acc: &mut [f64], scratch: &mut [f64]) {
        match self {
            CoeffApply::Scalar(l) => {
                let lj = l[j];
                if lj != 0.0 {
                    for (a, s) in acc.iter_mut().zip(src.iter()) {
                        *a += lj * s;
                    }
                }
            }
            CoeffApply::Matrices(ms) => {
                ms[j].matvec(src, scratch);
                for (a, s) in acc.iter_mut().zip(scratch.iter()) {
                    *a += *s;
                }
            }
        }
    }
}

/// Simulates an MA(q) sample X_t = sum_j psi_j eps_{t-j}, t = 1..n, with
/// standard normal innovations and q pre-sample innovation columns so the
/// recursion holds exactly from t = 1. Deterministic given (model, p, n,
/// seed); equals substream 0 of the replicate scheme.
pub fn simulate_ma(model: &ModelSpec, p: usize, n: usize, seed: u64) -> Result<SampleMatrix> {
    simulate_ma_substream(model, p, n, seed, 0)
}

/// Replicate variant: the innovation stream is keyed by (seed, replicate).
pub fn simulate_ma_substream(
    model: &ModelSpec,
    p: usize,
    n: usize,
    seed: u64,
    replicate: u64,
) -> Result<SampleMatrix> {
    let q = model.q();
    if n == 0 || p == 0 {
        return Err(Error::Domain("need n >= 1 and p >= 1".into()));
    }
    if q >= n {
        return Err(Error::Domain(format!("need q < n, got q={q}, n={n}")));
    }
    let apply = CoeffApply::from_model(model, p)?;
    let mut rng = rng_for(seed, replicate);
    // ring buffer of the last q+1 innovation columns
    let mut ring: Vec<Vec<f64>> = vec![vec![0.0; p]; q + 1];
    let mut draw = |col: &mut Vec<f64>| {
        for v in col.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
    };
    // pre-sample innovations eps_{1-q}..eps_0 in time order
    for k in 0..q {
        let mut col = vec![0.0; p];
        draw(&mut col);
        ring[k] = col;
    }
    let mut cols = vec![0.0; p * n];
    let mut scratch = vec![0.0; p];
    for t in 0..n {
        let mut col = vec![0.0; p];
        draw(&mut col);
        let slot = (q + t) % (q + 1);
        ring[slot] = col;
        let x = &mut cols[t * p..(t + 1) * p];
        for j in 0..=q {
            // eps_{t-j} lives at slot (q + t - j) mod (q+1)
            let idx = (q + t - j) % (q + 1);
            apply.accumulate(j, &ring[idx], x, &mut scratch);
        }
    }
    SampleMatrix::from_columns(p, n, cols, seed, model.describe())
}

/// Estimated spectral radius of the IVAR companion operator by normalized
/// power iteration; used as the stationarity check.
fn companion_spectral_radius(a: &[CoeffMatrix], p: usize, seed: u64) -> f64 {
    let k = a.len();
    let mut rng = rng_for(seed, u64::MAX);
    let mut state: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..p).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    let mut scratch = vec![0.0; p];
    let mut log_growth = 0.0;
    let steps = 300;
    let warmup = 60;
    for step in 0..steps {
        let mut next = vec![0.0; p];
        for (i, ai) in a.iter().enumerate() {
            ai.matvec(&state[i], &mut scratch);
            for (n, s) in next.iter_mut().zip(scratch.iter()) {
                *n += *s;
            }
        }
        state.rotate_right(1);
        state[0] = next;
        let norm: f64 = state
            .iter()
            .flat_map(|v| v.iter())
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        for v in state.iter_mut().flat_map(|v| v.iter_mut()) {
            *v /= norm;
        }
        if step >= warmup {
            log_growth += norm.ln();
        }
    }
    (log_growth / (steps - warmup) as f64).exp()
}

/// Simulates a stationary IVAR(k) sample X_t = eps_t + sum_i A_i X_{t-i}
/// after discarding `burn_in` initial steps (zero initial state). The
/// companion spectral radius is checked numerically; nonstationary
/// coefficients are refused.
pub fn simulate_ivar(
    a: &[CoeffMatrix],
    n: usize,
    p: usize,
    seed: u64,
    burn_in: usize,
) -> Result<SampleMatrix> {
    simulate_ivar_substream(a, n, p, seed, burn_in, 0)
}

pub(crate) fn simulate_ivar_substream(
    a: &[CoeffMatrix],
    n: usize,
    p: usize,
    seed: u64,
    burn_in: usize,
    replicate: u64,
) -> Result<SampleMatrix> {
    if a.is_empty() {
        // no autoregression: white noise
        let model = ModelSpec::scalar(crate::scalar::rat_int(1), vec![crate::scalar::rat_int(1)])?;
        return simulate_ma_substream(&model, p, n, seed, replicate);
    }
    for (i, ai) in a.iter().enumerate() {
        let d = ai.dim()?;
        if d != p {
            return Err(Error::Config(format!(
                "AR coefficient {} is {d}x{d}, expected {p}x{p}",
                i + 1
            )));
        }
    }
    let rho = companion_spectral_radius(a, p, seed);
    if rho >= 0.999 {
        return Err(Error::Domain(format!(
            "AR coefficients look nonstationary: estimated companion spectral radius {rho:.4}"
        )));
    }
    let burn_in = burn_in.max(200);
    let k = a.len();
    let mut rng = rng_for(seed, replicate);
    let mut history: Vec<Vec<f64>> = vec![vec![0.0; p]; k];
    let mut cols = vec![0.0; p * n];
    let mut scratch = vec![0.0; p];
    for t in 0..burn_in + n {
        let mut x: Vec<f64> = (0..p).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        for (i, ai) in a.iter().enumerate() {
            ai.matvec(&history[i], &mut scratch);
            for (xv, s) in x.iter_mut().zip(scratch.iter()) {
                *xv += *s;
            }
        }
        history.rotate_right(1);
        history[0] = x.clone();
        if t >= burn_in {
            cols[(t - burn_in) * p..(t - burn_in + 1) * p].copy_from_slice(&x);
        }
    }
    SampleMatrix::from_columns(p, n, cols, seed, format!("ivar({k})"))
}

/// The lag-u sample autocovariance with divisor n (not n-u).
#[derive(Clone, Debug)]
pub struct AutocovMatrix {
    pub u: u32,
    pub mat: Mat,
}

pub fn sample_autocov(x: &SampleMatrix, u: usize) -> Result<AutocovMatrix> {
    let (p, n) = (x.p(), x.n());
    if u >= n {
        return Err(Error::Domain(format!("lag {u} out of range for n={n}")));
    }
    let mut c = Mat::zeros(p, p);
    for t in 0..(n - u) {
        let xt = x.col(t);
        let xtu = x.col(t + u);
        for i in 0..p {
            let w = xt[i];
            if w == 0.0 {
                continue;
            }
            let row = c.row_mut(i);
            for (r, &v) in row.iter_mut().zip(xtu.iter()) {
                *r += w * v;
            }
        }
    }
    c.scale(1.0 / n as f64);
    Ok(AutocovMatrix { u: u as u32, mat: c })
}

/// Evaluates a symmetric polynomial at the supplied autocovariance matrices
/// (keyed by lag; adjoints are transposes). The result is checked to be
/// symmetric to roundoff and explicitly symmetrized.
pub fn eval_sym_poly(
    poly: &GammaPolynomial,
    gammas: &BTreeMap<u32, AutocovMatrix>,
) -> Result<Mat> {
    poly.require_symmetric()?;
    let p = gammas
        .values()
        .next()
        .map(|g| g.mat.rows())
        .ok_or_else(|| Error::Domain("no autocovariance matrices supplied".into()))?;
    let mut transposes: BTreeMap<u32, Mat> = BTreeMap::new();
    let mut out = Mat::zeros(p, p);
    let mut any = false;
    for (coeff, word) in poly.terms() {
        let cf = Scalar::to_f64(coeff);
        if word.is_empty() {
            for i in 0..p {
                out.set(i, i, out.get(i, i) + cf);
            }
            any = true;
            continue;
        }
        let mut acc: Option<Mat> = None;
        for atom in word {
            let g = gammas
                .get(&atom.lag())
                .ok_or_else(|| Error::Domain(format!("missing lag {} matrix", atom.lag())))?;
            if g.mat.rows() != p {
                return Err(Error::Config("autocovariance matrices differ in size".into()));
            }
            let factor: &Mat = if atom.is_star() {
                transposes
                    .entry(atom.lag())
                    .or_insert_with(|| g.mat.transpose())
            } else {
                &g.mat
            };
            acc = Some(match acc {
                None => factor.clone(),
                Some(m) => m.matmul(factor)?,
            });
        }
        out.add_assign_scaled(&acc.unwrap(), cf);
        any = true;
    }
    if !any {
        return Err(Error::Domain("empty polynomial".into()));
    }
    let scale = out.max_abs().max(1e-300);
    let dev = out.asymmetry();
    if dev > 1e-8 * scale {
        return Err(Error::Domain(format!(
            "polynomial value is not symmetric: deviation {dev:.3e} at scale {scale:.3e}"
        )));
    }
    out.symmetrize();
    Ok(out)
}

/// Empirical spectral distribution of a symmetric matrix.
pub fn esd(m: &Mat) -> Result<Ecdf> {
    Ecdf::from_values(symmetric_eigenvalues(m)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freelimit::SignedPerm;
    use crate::scalar::{rat, rat_int};

    fn ma0() -> ModelSpec {
        ModelSpec::scalar(rat_int(1), vec![rat_int(1)]).unwrap()
    }

    fn ma1_half() -> ModelSpec {
        ModelSpec::scalar(rat_int(1), vec![rat_int(1), rat(1, 2)]).unwrap()
    }

    #[test]
    fn reproducible_given_seed() {
        let m = ma1_half();
        let a = simulate_ma(&m, 40, 60, 77).unwrap();
        let b = simulate_ma(&m, 40, 60, 77).unwrap();
        assert_eq!(a.raw(), b.raw());
        let c = simulate_ma(&m, 40, 60, 78).unwrap();
        assert_ne!(a.raw(), c.raw());
        let d = simulate_ma_substream(&m, 40, 60, 77, 1).unwrap();
        assert_ne!(a.raw(), d.raw());
    }

    #[test]
    fn ma0_is_innovations() {
        // with q=0 the sample is exactly the innovation matrix; its column
        // variance is ~1
        let x = simulate_ma(&ma0(), 200, 300, 5).unwrap();
        let var: f64 = x.raw().iter().map(|v| v * v).sum::<f64>() / (200.0 * 300.0);
        assert!((var - 1.0).abs() < 0.02, "variance {var}");
    }

    #[test]
    fn ma1_column_variance() {
        // X_t = eps_t + 0.5 eps_{t-1}: entry variance 1.25
        let x = simulate_ma(&ma1_half(), 150, 400, 9).unwrap();
        let var: f64 = x.raw().iter().map(|v| v * v).sum::<f64>() / (150.0 * 400.0);
        assert!((var - 1.25).abs() < 0.03, "variance {var}");
    }

    #[test]
    fn autocov_single_column() {
        // all columns zero except column 3 = v: Gamma_0 = v v^T / n
        let p = 4;
        let n = 8;
        let mut cols = vec![0.0; p * n];
        let v = [1.0, -2.0, 0.5, 3.0];
        cols[3 * p..4 * p].copy_from_slice(&v);
        let x = SampleMatrix::from_columns(p, n, cols, 0, "test".into()).unwrap();
        let g0 = sample_autocov(&x, 0).unwrap();
        for i in 0..p {
            for j in 0..p {
                assert!((g0.mat.get(i, j) - v[i] * v[j] / n as f64).abs() < 1e-15);
            }
        }
        // transpose identity: autocov(u)^T = (1/n) sum X_{t+u} X_t^T
        let x = simulate_ma(&ma0(), 6, 30, 3).unwrap();
        let g2 = sample_autocov(&x, 2).unwrap();
        let mut direct = Mat::zeros(6, 6);
        for t in 0..28 {
            let a = x.col(t + 2);
            let b = x.col(t);
            for i in 0..6 {
                for j in 0..6 {
                    direct.set(i, j, direct.get(i, j) + a[i] * b[j] / 30.0);
                }
            }
        }
        let gt = g2.mat.transpose();
        for i in 0..6 {
            for j in 0..6 {
                assert!((gt.get(i, j) - direct.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn autocov_psd_and_range() {
        let x = simulate_ma(&ma1_half(), 30, 50, 21).unwrap();
        let g0 = sample_autocov(&x, 0).unwrap();
        let vals = symmetric_eigenvalues(&g0.mat).unwrap();
        assert!(vals.iter().all(|&v| v >= -1e-10));
        assert!(sample_autocov(&x, 50).is_err());
        assert!(sample_autocov(&x, 49).is_ok());
    }

    #[test]
    fn expected_trace_of_gamma0() {
        // E tr Gamma_0 = p for white noise; check within MC error
        let p = 120;
        let n = 120;
        let mut traces = Vec::new();
        for rep in 0..12 {
            let x = simulate_ma_substream(&ma0(), p, n, 1000, rep).unwrap();
            let g0 = sample_autocov(&x, 0).unwrap();
            traces.push(g0.mat.trace());
        }
        let mean: f64 = traces.iter().sum::<f64>() / traces.len() as f64;
        assert!((mean - p as f64).abs() < 3.0, "mean {mean}");
    }

    #[test]
    fn eval_sym_poly_shapes() {
        let x = simulate_ma(&ma1_half(), 12, 40, 13).unwrap();
        let mut gammas = BTreeMap::new();
        for u in 0..=2u32 {
            gammas.insert(u, sample_autocov(&x, u as usize).unwrap());
        }
        // identity polynomial returns Gamma_0 unchanged
        let m = eval_sym_poly(&GammaPolynomial::gamma(0), &gammas).unwrap();
        for i in 0..12 {
            for j in 0..12 {
                assert!((m.get(i, j) - gammas[&0].mat.get(i, j)).abs() < 1e-12);
            }
        }
        // Gram form is PSD
        let m = eval_sym_poly(&GammaPolynomial::lag_product(1), &gammas).unwrap();
        let vals = symmetric_eigenvalues(&m).unwrap();
        assert!(vals.iter().all(|&v| v >= -1e-9));
        // symmetrized lag equals (G1 + G1^T)/2 entrywise
        let m = eval_sym_poly(&GammaPolynomial::symmetrized_half(1), &gammas).unwrap();
        let g1 = &gammas[&1].mat;
        for i in 0..12 {
            for j in 0..12 {
                let want = 0.5 * (g1.get(i, j) + g1.get(j, i));
                assert!((m.get(i, j) - want).abs() < 1e-12);
            }
        }
        // missing lag is an error
        assert!(eval_sym_poly(&GammaPolynomial::lag_product(5), &gammas).is_err());
        // non-symmetric polynomial refused
        assert!(eval_sym_poly(&GammaPolynomial::gamma(1), &gammas).is_err());
    }

    #[test]
    fn ivar_stationarity_gate() {
        let p = 10;
        let stable = vec![CoeffMatrix::Perm(SignedPerm::scaled_identity(p, 0.5))];
        assert!(simulate_ivar(&stable, 50, p, 3, 200).is_ok());
        let unstable = vec![CoeffMatrix::Perm(SignedPerm::scaled_identity(p, 1.05))];
        assert!(matches!(
            simulate_ivar(&unstable, 50, p, 3, 200),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn ivar_zero_coefficients_is_white_noise() {
        let x = simulate_ivar(&[], 50, 20, 11, 200).unwrap();
        assert_eq!(x.n(), 50);
        let var: f64 = x.raw().iter().map(|v| v * v).sum::<f64>() / (20.0 * 50.0);
        assert!((var - 1.0).abs() < 0.1);
    }

    #[test]
    fn ivar_marginal_variance_matches_ar1() {
        // AR(1) with a=0.5: stationary variance 1/(1-0.25) = 4/3
        let p = 80;
        let a = vec![CoeffMatrix::Perm(SignedPerm::scaled_identity(p, 0.5))];
        let x = simulate_ivar(&a, 400, p, 17, 300).unwrap();
        let var: f64 = x.raw().iter().map(|v| v * v).sum::<f64>() / (p as f64 * 400.0);
        assert!((var - 4.0 / 3.0).abs() < 0.05, "variance {var}");
    }

    #[test]
    fn row_permutation_helper() {
        let x = simulate_ma(&ma0(), 5, 7, 2).unwrap();
        let perm = [4usize, 3, 2, 1, 0];
        let y = x.permute_rows(&perm).unwrap();
        for t in 0..7 {
            for i in 0..5 {
                assert_eq!(y.col(t)[i], x.col(t)[4 - i]);
            }
        }
    }
}
