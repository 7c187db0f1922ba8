use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::{rat_int, Rat};
use num_traits::One;
use std::sync::Arc;

/// A scaled signed permutation: `M e_j = scale * sign[j] * e_{perm[j]}`.
///
/// Covers every coefficient matrix of the built-in models except the
/// all-ones one: identities, scaled identities, the split-sign diagonal and
/// the reversal permutation. Products, transposes and traces are O(p), which
/// is what makes trace functionals at p = 4096 cheap.
#[derive(Clone, Debug)]
pub struct SignedPerm {
    scale: f64,
    perm: Vec<u32>,
    sign: Vec<i8>,
}

impl SignedPerm {
    pub fn identity(p: usize) -> Self {
        SignedPerm {
            scale: 1.0,
            perm: (0..p as u32).collect(),
            sign: vec![1; p],
        }
    }

    pub fn scaled_identity(p: usize, scale: f64) -> Self {
        SignedPerm {
            scale,
            ..Self::identity(p)
        }
    }

    /// Diagonal +1 on the first floor(p/2) entries, -1 after.
    pub fn split_sign_diagonal(p: usize) -> Self {
        let half = p / 2;
        SignedPerm {
            scale: 1.0,
            perm: (0..p as u32).collect(),
            sign: (0..p).map(|i| if i < half { 1 } else { -1 }).collect(),
        }
    }

    /// Anti-diagonal of ones (the index-reversal involution).
    pub fn reversal(p: usize) -> Self {
        SignedPerm {
            scale: 1.0,
            perm: (0..p).map(|i| (p - 1 - i) as u32).collect(),
            sign: vec![1; p],
        }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// self * other as linear maps.
    pub fn compose(&self, other: &SignedPerm) -> SignedPerm {
        debug_assert_eq!(self.dim(), other.dim());
        let p = self.dim();
        let mut perm = vec![0u32; p];
        let mut sign = vec![0i8; p];
        for j in 0..p {
            let mid = other.perm[j] as usize;
            perm[j] = self.perm[mid];
            sign[j] = other.sign[j] * self.sign[mid];
        }
        SignedPerm {
            scale: self.scale * other.scale,
            perm,
            sign,
        }
    }

    pub fn transpose(&self) -> SignedPerm {
        let p = self.dim();
        let mut perm = vec![0u32; p];
        let mut sign = vec![0i8; p];
        for j in 0..p {
            perm[self.perm[j] as usize] = j as u32;
            sign[self.perm[j] as usize] = self.sign[j];
        }
        SignedPerm {
            scale: self.scale,
            perm,
            sign,
        }
    }

    pub fn trace(&self) -> f64 {
        let fixed: i64 = (0..self.dim())
            .filter(|&j| self.perm[j] as usize == j)
            .map(|j| self.sign[j] as i64)
            .sum();
        self.scale * fixed as f64
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim());
        debug_assert_eq!(out.len(), self.dim());
        out.fill(0.0);
        for j in 0..self.dim() {
            out[self.perm[j] as usize] += self.scale * self.sign[j] as f64 * x[j];
        }
    }

    pub fn to_dense(&self) -> Mat {
        let p = self.dim();
        let mut m = Mat::zeros(p, p);
        for j in 0..p {
            m.set(self.perm[j] as usize, j, self.scale * self.sign[j] as f64);
        }
        m
    }
}

/// A coefficient matrix in one of two representations.
#[derive(Clone, Debug)]
pub enum CoeffMatrix {
    Perm(SignedPerm),
    Dense(Mat),
}

impl CoeffMatrix {
    pub fn dim(&self) -> Result<usize> {
        match self {
            CoeffMatrix::Perm(sp) => Ok(sp.dim()),
            CoeffMatrix::Dense(m) => {
                if m.is_square() {
                    Ok(m.rows())
                } else {
                    Err(Error::Config(format!(
                        "coefficient matrix is {}x{}, expected square",
                        m.rows(),
                        m.cols()
                    )))
                }
            }
        }
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        match self {
            CoeffMatrix::Perm(sp) => sp.matvec(x, out),
            CoeffMatrix::Dense(m) => m.matvec(x, out),
        }
    }
}

/// Produces the coefficient matrices psi_0 = I, psi_1..psi_q at any size p.
pub trait CoeffGenerator: Send + Sync {
    fn order(&self) -> usize;
    fn coefficient(&self, j: usize, p: usize) -> Result<CoeffMatrix>;
    fn describe(&self) -> String;
}

/// Scalar coefficients lifted to scaled identity matrices.
pub struct ScalarAsMatrices {
    pub lambdas: Vec<Rat>,
}

impl CoeffGenerator for ScalarAsMatrices {
    fn order(&self) -> usize {
        self.lambdas.len().saturating_sub(1)
    }

    fn coefficient(&self, j: usize, p: usize) -> Result<CoeffMatrix> {
        let l = self
            .lambdas
            .get(j)
            .ok_or_else(|| Error::Config(format!("coefficient index {j} beyond order")))?;
        Ok(CoeffMatrix::Perm(SignedPerm::scaled_identity(
            p,
            crate::scalar::Scalar::to_f64(l),
        )))
    }

    fn describe(&self) -> String {
        format!("scaled identities {:?}", self.lambdas)
    }
}

/// The MA(2) coefficient pair: psi_1 = split-sign diagonal, psi_2 = reversal
/// permutation. The two do not commute, which is the point of the model.
pub struct SplitSignReversal;

impl CoeffGenerator for SplitSignReversal {
    fn order(&self) -> usize {
        2
    }

    fn coefficient(&self, j: usize, p: usize) -> Result<CoeffMatrix> {
        match j {
            0 => Ok(CoeffMatrix::Perm(SignedPerm::identity(p))),
            1 => Ok(CoeffMatrix::Perm(SignedPerm::split_sign_diagonal(p))),
            2 => Ok(CoeffMatrix::Perm(SignedPerm::reversal(p))),
            _ => Err(Error::Config(format!("coefficient index {j} beyond q=2"))),
        }
    }

    fn describe(&self) -> String {
        "MA(2): split-sign diagonal + reversal permutation".into()
    }
}

/// MA(1) with psi_1 = s*(I + J), J the all-ones matrix. Dense; its operator
/// norm grows with p, so it is a simulation model, not a trace-functional
/// model.
pub struct ScaledIdentityPlusOnes {
    pub s: f64,
}

impl CoeffGenerator for ScaledIdentityPlusOnes {
    fn order(&self) -> usize {
        1
    }

    fn coefficient(&self, j: usize, p: usize) -> Result<CoeffMatrix> {
        match j {
            0 => Ok(CoeffMatrix::Perm(SignedPerm::identity(p))),
            1 => {
                let mut m = Mat::zeros(p, p);
                for i in 0..p {
                    for k in 0..p {
                        m.set(i, k, if i == k { 2.0 * self.s } else { self.s });
                    }
                }
                Ok(CoeffMatrix::Dense(m))
            }
            _ => Err(Error::Config(format!("coefficient index {j} beyond q=1"))),
        }
    }

    fn describe(&self) -> String {
        format!("MA(1): {}*(I + ones)", self.s)
    }
}

/// Model coefficients: exact scalars or a matrix generator.
#[derive(Clone)]
pub enum Coefficients {
    /// lambda_0 = 1, lambda_1..lambda_q.
    Scalar(Vec<Rat>),
    Matrix(Arc<dyn CoeffGenerator>),
}

/// An MA(q) model description: order, coefficients and aspect ratio
/// y = lim p/n.
#[derive(Clone)]
pub struct ModelSpec {
    q: usize,
    y: Rat,
    coeffs: Coefficients,
}

impl ModelSpec {
    pub fn scalar(y: Rat, lambdas: Vec<Rat>) -> Result<Self> {
        if y <= rat_int(0) {
            return Err(Error::Domain(format!("aspect ratio y must be > 0, got {y}")));
        }
        if lambdas.is_empty() || !lambdas[0].is_one() {
            return Err(Error::Domain(
                "scalar coefficients must start with lambda_0 = 1".into(),
            ));
        }
        Ok(ModelSpec {
            q: lambdas.len() - 1,
            y,
            coeffs: Coefficients::Scalar(lambdas),
        })
    }

    pub fn matrix(y: Rat, gen: Arc<dyn CoeffGenerator>) -> Result<Self> {
        if y <= rat_int(0) {
            return Err(Error::Domain(format!("aspect ratio y must be > 0, got {y}")));
        }
        Ok(ModelSpec {
            q: gen.order(),
            y,
            coeffs: Coefficients::Matrix(gen),
        })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn y(&self) -> Rat {
        self.y
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coeffs
    }

    pub fn scalar_lambdas(&self) -> Option<&[Rat]> {
        match &self.coeffs {
            Coefficients::Scalar(l) => Some(l),
            Coefficients::Matrix(_) => None,
        }
    }

    /// Materializes the coefficient matrices psi_0..psi_q at size p.
    pub fn coefficient_matrices(&self, p: usize) -> Result<Vec<CoeffMatrix>> {
        match &self.coeffs {
            Coefficients::Scalar(l) => Ok(l
                .iter()
                .map(|lj| {
                    CoeffMatrix::Perm(SignedPerm::scaled_identity(
                        p,
                        crate::scalar::Scalar::to_f64(lj),
                    ))
                })
                .collect()),
            Coefficients::Matrix(gen) => {
                let mut out = Vec::with_capacity(self.q + 1);
                for j in 0..=self.q {
                    let m = gen.coefficient(j, p)?;
                    let d = m.dim()?;
                    if d != p {
                        return Err(Error::Config(format!(
                            "generator returned a {d}x{d} matrix for requested size {p}"
                        )));
                    }
                    out.push(m);
                }
                Ok(out)
            }
        }
    }

    pub fn describe(&self) -> String {
        match &self.coeffs {
            Coefficients::Scalar(l) => format!("MA({}) scalar {:?}, y={}", self.q, l, self.y),
            Coefficients::Matrix(g) => format!("MA({}) {}, y={}", self.q, g.describe(), self.y),
        }
    }
}
