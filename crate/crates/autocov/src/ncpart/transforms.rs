use super::partition::SetPartition;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Moments indexed from 1 (`seq[k-1]` holds the k-th moment).
pub type MomentSequence<S> = Vec<S>;
/// Free cumulants indexed from 1.
pub type CumulantSequence<S> = Vec<S>;

/// Product over the blocks of `pi` of `values` applied to each block's
/// elements in increasing order. Oracle failures propagate with the
/// offending block attached.
pub fn multiplicative_functional<S, F>(pi: &SetPartition, mut values: F) -> Result<S>
where
    S: Scalar,
    F: FnMut(&[usize]) -> Result<S>,
{
    let mut acc = S::one();
    for block in pi.blocks() {
        let v = values(block).map_err(|e| Error::Oracle {
            block: format!("{block:?}"),
            message: e.to_string(),
        })?;
        acc = acc * v;
    }
    Ok(acc)
}

/// Moments from free cumulants: the unique sequence with
/// `m_n = sum over pi in NC(n) of prod over blocks V of k_{|V|}`.
///
/// Computed degree-by-degree from the series identity
/// `M(x) = 1 + sum_s k_s x^s M(x)^s`, which is the first-block decomposition
/// of the non-crossing sum; the brute-force NC(n) evaluation is kept as a
/// test oracle.
pub fn free_cumulants_to_moments<S: Scalar>(k: &CumulantSequence<S>) -> MomentSequence<S> {
    let h = k.len();
    // m[d] = coefficient of x^d in M(x); m[0] = 1
    let mut m: Vec<S> = vec![S::one()];
    for n in 1..=h {
        let mut tot = S::zero();
        for s in 1..=n {
            // [x^{n-s}] M(x)^s, using coefficients up to degree n-1
            tot = tot + k[s - 1].clone() * series_power_coeff(&m, s, n - s);
        }
        m.push(tot);
    }
    m.remove(0);
    m
}

/// Free cumulants from moments; exact inverse of
/// [`free_cumulants_to_moments`].
pub fn moments_to_free_cumulants<S: Scalar>(m: &MomentSequence<S>) -> CumulantSequence<S> {
    let h = m.len();
    let mut k: Vec<S> = Vec::with_capacity(h);
    for n in 1..=h {
        // With k_1..k_{n-1} fixed, m_n = k_n + (terms free of k_n); solve.
        k.push(S::zero());
        let predicted = free_cumulants_to_moments(&k)[n - 1].clone();
        let kn = m[n - 1].clone() - predicted;
        *k.last_mut().unwrap() = kn;
    }
    k
}

/// `[x^target] M(x)^s` where `m` holds the coefficients of M from degree 0.
fn series_power_coeff<S: Scalar>(m: &[S], s: usize, target: usize) -> S {
    // dp over the s factors
    let mut dp: Vec<S> = vec![S::zero(); target + 1];
    dp[0] = S::one();
    for _ in 0..s {
        let mut next = vec![S::zero(); target + 1];
        for (deg, v) in dp.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            for (d2, coeff) in m.iter().enumerate().take(target - deg + 1) {
                next[deg + d2] = next[deg + d2].clone() + v.clone() * coeff.clone();
            }
        }
        dp = next;
    }
    dp[target].clone()
}
