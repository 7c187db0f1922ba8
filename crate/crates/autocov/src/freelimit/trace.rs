use super::model::{CoeffGenerator, CoeffMatrix, ModelSpec};
use crate::error::{Error, Result};
use crate::scalar::{rat_int, Rat, Scalar};
use std::collections::HashMap;
use std::sync::RwLock;

/// One coefficient symbol psi_j or psi_j* inside a trace word.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct PsiAtom {
    pub j: u16,
    pub star: bool,
}

impl PsiAtom {
    pub fn plain(j: usize) -> Self {
        PsiAtom {
            j: j as u16,
            star: false,
        }
    }

    pub fn star(j: usize) -> Self {
        PsiAtom {
            j: j as u16,
            star: true,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Provenance {
    ExactScalar,
    NumericMatrix { p: usize },
}

/// The limit of p^{-1} Tr over words in the coefficient symbols.
///
/// Invariants: the empty word evaluates to 1; the value is invariant under
/// cyclic rotation of the word; for real coefficient matrices it is also
/// invariant under the star map (reverse and transpose).
pub trait TraceFunctional<S: Scalar>: Send + Sync {
    fn trace(&self, word: &[PsiAtom]) -> Result<S>;
    fn provenance(&self) -> Provenance;
}

/// Exact trace for scalar coefficients psi_j = lambda_j I: the value of a
/// word is the product of its lambdas.
pub struct ScalarTrace {
    lambdas: Vec<Rat>,
}

impl ScalarTrace {
    pub fn new(lambdas: Vec<Rat>) -> Self {
        ScalarTrace { lambdas }
    }

    pub fn from_model(model: &ModelSpec) -> Result<Self> {
        model
            .scalar_lambdas()
            .map(|l| ScalarTrace::new(l.to_vec()))
            .ok_or_else(|| {
                Error::Config("model has matrix coefficients; use a matrix trace functional".into())
            })
    }

    fn product(&self, word: &[PsiAtom]) -> Result<Rat> {
        let mut acc = rat_int(1);
        for a in word {
            let l = self.lambdas.get(a.j as usize).ok_or_else(|| {
                Error::Config(format!("symbol psi_{} beyond model order", a.j))
            })?;
            acc *= *l;
        }
        Ok(acc)
    }
}

impl TraceFunctional<Rat> for ScalarTrace {
    fn trace(&self, word: &[PsiAtom]) -> Result<Rat> {
        self.product(word)
    }

    fn provenance(&self) -> Provenance {
        Provenance::ExactScalar
    }
}

impl TraceFunctional<f64> for ScalarTrace {
    fn trace(&self, word: &[PsiAtom]) -> Result<f64> {
        Ok(Scalar::to_f64(&self.product(word)?))
    }

    fn provenance(&self) -> Provenance {
        Provenance::ExactScalar
    }
}

/// Numeric trace functional: p^{-1} Tr of the requested word evaluated on
/// materialized coefficient matrices at a fixed p. Words over signed
/// permutations cost O(p * length); dense coefficients fall back to matrix
/// products and are intended for moderate p.
///
/// Values are memoized keyed by the cyclically minimal rotation of the word
/// (traces are invariant under rotation).
pub struct MatrixTrace {
    p: usize,
    psis: Vec<CoeffMatrix>,
    memo: RwLock<HashMap<Vec<u32>, f64>>,
}

impl MatrixTrace {
    /// Builds the functional from a generator at size p. psi_0 must be the
    /// identity per the model convention; the generator's output dimensions
    /// are validated.
    pub fn new(gen: &dyn CoeffGenerator, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::Config("matrix trace functional needs p >= 1".into()));
        }
        let mut psis = Vec::with_capacity(gen.order() + 1);
        for j in 0..=gen.order() {
            let m = gen.coefficient(j, p)?;
            let d = m.dim()?;
            if d != p {
                return Err(Error::Config(format!(
                    "generator returned dimension {d} at requested p={p} (symbol {j})"
                )));
            }
            psis.push(m);
        }
        Ok(MatrixTrace {
            p,
            psis,
            memo: RwLock::new(HashMap::new()),
        })
    }

    pub fn from_model(model: &ModelSpec, p: usize) -> Result<Self> {
        let psis = model.coefficient_matrices(p)?;
        Ok(MatrixTrace {
            p,
            psis,
            memo: RwLock::new(HashMap::new()),
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    fn encode(a: &PsiAtom) -> u32 {
        ((a.j as u32) << 1) | a.star as u32
    }

    /// Cyclically minimal rotation of the encoded word.
    fn canonical_key(word: &[PsiAtom]) -> Vec<u32> {
        let enc: Vec<u32> = word.iter().map(Self::encode).collect();
        if enc.is_empty() {
            return enc;
        }
        let n = enc.len();
        let mut best = 0usize;
        for start in 1..n {
            for k in 0..n {
                let a = enc[(start + k) % n];
                let b = enc[(best + k) % n];
                if a < b {
                    best = start;
                    break;
                }
                if a > b {
                    break;
                }
            }
        }
        (0..n).map(|k| enc[(best + k) % n]).collect()
    }

    fn materialize(&self, a: &PsiAtom) -> Result<CoeffMatrix> {
        let m = self
            .psis
            .get(a.j as usize)
            .ok_or_else(|| Error::Config(format!("symbol psi_{} beyond model order", a.j)))?;
        Ok(match (m, a.star) {
            (CoeffMatrix::Perm(sp), false) => CoeffMatrix::Perm(sp.clone()),
            (CoeffMatrix::Perm(sp), true) => CoeffMatrix::Perm(sp.transpose()),
            (CoeffMatrix::Dense(d), false) => CoeffMatrix::Dense(d.clone()),
            (CoeffMatrix::Dense(d), true) => CoeffMatrix::Dense(d.transpose()),
        })
    }

    fn compute(&self, word: &[PsiAtom]) -> Result<f64> {
        if word.is_empty() {
            return Ok(1.0);
        }
        let mut acc = self.materialize(&word[0])?;
        for a in &word[1..] {
            let next = self.materialize(a)?;
            acc = match (acc, next) {
                (CoeffMatrix::Perm(l), CoeffMatrix::Perm(r)) => CoeffMatrix::Perm(l.compose(&r)),
                (CoeffMatrix::Perm(l), CoeffMatrix::Dense(r)) => {
                    CoeffMatrix::Dense(l.to_dense().matmul(&r)?)
                }
                (CoeffMatrix::Dense(l), CoeffMatrix::Perm(r)) => {
                    CoeffMatrix::Dense(l.matmul(&r.to_dense())?)
                }
                (CoeffMatrix::Dense(l), CoeffMatrix::Dense(r)) => CoeffMatrix::Dense(l.matmul(&r)?),
            };
        }
        let tr = match &acc {
            CoeffMatrix::Perm(sp) => sp.trace(),
            CoeffMatrix::Dense(d) => d.trace(),
        };
        Ok(tr / self.p as f64)
    }
}

impl TraceFunctional<f64> for MatrixTrace {
    fn trace(&self, word: &[PsiAtom]) -> Result<f64> {
        let key = Self::canonical_key(word);
        if let Some(v) = self.memo.read().expect("memo poisoned").get(&key) {
            return Ok(*v);
        }
        let v = self.compute(word)?;
        self.memo.write().expect("memo poisoned").insert(key, v);
        Ok(v)
    }

    fn provenance(&self) -> Provenance {
        Provenance::NumericMatrix { p: self.p }
    }
}

/// Convenience wrapper matching the operation name: numeric trace functional
/// over a coefficient generator at size p.
pub fn matrix_trace_functional(gen: &dyn CoeffGenerator, p: usize) -> Result<MatrixTrace> {
    MatrixTrace::new(gen, p)
}
