use crate::error::{Error, Result};
use crate::ncpart::free_cumulants_to_moments;
use crate::scalar::{binomial, rat_int, Rat};
use num_traits::Zero;
use std::collections::BTreeMap;

/// h-th moment of the Marchenko-Pastur law with ratio y (unit scale):
/// sum over k of the Narayana numbers N(h,k) = C(h,k) C(h,k-1)/h times
/// y^{k-1}. At y = 1 these are the Catalan numbers.
pub fn mp_moment(h: usize, y: &Rat) -> Rat {
    let mut acc = rat_int(0);
    for k in 1..=h {
        let narayana = binomial(h as u64, k as u64) * binomial(h as u64, k as u64 - 1)
            / rat_int(h as i128);
        acc += narayana * num_traits::pow(*y, k - 1);
    }
    acc
}

/// h-th moment of the free Bessel law with parameters (2, 1/y):
/// sum over k of C(h-1,k-1) C(2h,k-1)/k times y^{-k}.
pub fn free_bessel_moment(h: usize, y: &Rat) -> Rat {
    let mut acc = rat_int(0);
    let yinv = rat_int(1) / *y;
    for k in 1..=h {
        let coeff = binomial(h as u64 - 1, k as u64 - 1) * binomial(2 * h as u64, k as u64 - 1)
            / rat_int(k as i128);
        acc += coeff * num_traits::pow(yinv, k);
    }
    acc
}

/// A Laurent polynomial sum c_k z^k with exact rational coefficients,
/// representing trigonometric polynomials via z = e^{i theta}.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LaurentPoly {
    coeffs: BTreeMap<i64, Rat>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly {
            coeffs: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::monomial(0, rat_int(1))
    }

    pub fn monomial(k: i64, c: Rat) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(k, c);
        }
        LaurentPoly { coeffs }
    }

    /// cos(u theta) = (z^u + z^{-u})/2.
    pub fn cosine(u: i64) -> Self {
        if u == 0 {
            return Self::one();
        }
        let mut coeffs = BTreeMap::new();
        coeffs.insert(u, crate::scalar::rat(1, 2));
        coeffs.insert(-u, crate::scalar::rat(1, 2));
        LaurentPoly { coeffs }
    }

    pub fn coeff(&self, k: i64) -> Rat {
        self.coeffs.get(&k).copied().unwrap_or_else(|| rat_int(0))
    }

    pub fn support(&self) -> impl Iterator<Item = (&i64, &Rat)> {
        self.coeffs.iter()
    }

    pub fn add(&self, other: &LaurentPoly) -> LaurentPoly {
        let mut coeffs = self.coeffs.clone();
        for (k, c) in &other.coeffs {
            let e = coeffs.entry(*k).or_insert_with(|| rat_int(0));
            *e += *c;
        }
        coeffs.retain(|_, c| !c.is_zero());
        LaurentPoly { coeffs }
    }

    pub fn mul(&self, other: &LaurentPoly) -> LaurentPoly {
        let mut coeffs: BTreeMap<i64, Rat> = BTreeMap::new();
        for (k1, c1) in &self.coeffs {
            for (k2, c2) in &other.coeffs {
                let e = coeffs.entry(k1 + k2).or_insert_with(|| rat_int(0));
                *e += *c1 * *c2;
            }
        }
        coeffs.retain(|_, c| !c.is_zero());
        LaurentPoly { coeffs }
    }

    pub fn pow(&self, r: usize) -> LaurentPoly {
        let mut acc = LaurentPoly::one();
        for _ in 0..r {
            acc = acc.mul(self);
        }
        acc
    }

    /// True when the function is real on the unit circle, i.e. c_{-k} = c_k
    /// for real coefficients.
    pub fn is_real_on_circle(&self) -> bool {
        self.coeffs.iter().all(|(k, c)| self.coeff(-k) == *c)
    }
}

/// The spectral weight |sum_j lambda_j z^j|^2 as a Laurent polynomial
/// (lambda_0 = 1 by convention, enforced by the model constructors).
pub fn htilde(lambdas: &[Rat]) -> LaurentPoly {
    let mut fwd = LaurentPoly::zero();
    let mut bwd = LaurentPoly::zero();
    for (j, l) in lambdas.iter().enumerate() {
        fwd = fwd.add(&LaurentPoly::monomial(j as i64, *l));
        bwd = bwd.add(&LaurentPoly::monomial(-(j as i64), *l));
    }
    fwd.mul(&bwd)
}

/// Exact value of E_theta[(cos(u theta) * h(theta))^r] for a Laurent
/// polynomial h: expand the r-th power and take the constant coefficient.
/// No quadrature grid is involved.
pub fn trig_expectation(u: usize, hpoly: &LaurentPoly, r: usize) -> Rat {
    let base = LaurentPoly::cosine(u as i64).mul(hpoly);
    base.pow(r).coeff(0)
}

/// r-th free cumulant of the LSD of the half-symmetrized lag-u
/// autocovariance for a scalar-coefficient model:
/// y^{r-1} E_theta[(cos(u theta) htilde(theta))^r].
pub fn cfp_cumulant(u: usize, r: usize, lambdas: &[Rat], y: &Rat) -> Result<Rat> {
    if r == 0 {
        return Err(Error::Domain("cumulant order r must be >= 1".into()));
    }
    if lambdas.is_empty() || lambdas[0] != rat_int(1) {
        return Err(Error::Domain(
            "compound free Poisson form requires scalar coefficients with lambda_0 = 1".into(),
        ));
    }
    Ok(num_traits::pow(*y, r - 1) * trig_expectation(u, &htilde(lambdas), r))
}

/// First H moments of the LSD of (G(u) + G(u)*)/2 for a scalar model:
/// the moment transform of the compound-free-Poisson cumulants.
pub fn cfp_moments(u: usize, lambdas: &[Rat], y: &Rat, h_max: usize) -> Result<Vec<Rat>> {
    let ks: Result<Vec<Rat>> = (1..=h_max).map(|r| cfp_cumulant(u, r, lambdas, y)).collect();
    Ok(free_cumulants_to_moments(&ks?))
}
