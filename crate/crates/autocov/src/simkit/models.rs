use crate::error::{Error, Result};
use crate::freelimit::{
    CoeffMatrix, ModelSpec, ScaledIdentityPlusOnes, SignedPerm, SplitSignReversal,
};
use crate::scalar::{rat, rat_int, Rat};
use crate::simkit::sample::{simulate_ivar_substream, simulate_ma_substream, SampleMatrix};
use std::sync::Arc;

/// The six built-in experiment models exposed by the CLI and the test
/// suites.
///
/// 1: white noise. 2: MA(1) with psi_1 = 0.5 I. 3: MA(1) with
/// psi_1 = 0.5 (I + ones). 4: MA(2) with the split-sign diagonal and the
/// reversal permutation. 5: IVAR(1) with A_1 = 0.5 I. 6: IVAR(2) with
/// A_1 = 0.5 I, A_2 = 0.2 I.
#[derive(Clone)]
pub enum BuiltinModel {
    Ma { index: usize, spec: ModelSpec },
    Ivar { index: usize, scalars: Vec<f64> },
}

/// Builds a built-in model; the aspect ratio y of the MA specs is the
/// caller's intended p/n limit.
pub fn builtin_model(index: usize, y: Rat) -> Result<BuiltinModel> {
    let spec = match index {
        1 => ModelSpec::scalar(y, vec![rat_int(1)])?,
        2 => ModelSpec::scalar(y, vec![rat_int(1), rat(1, 2)])?,
        3 => ModelSpec::matrix(y, Arc::new(ScaledIdentityPlusOnes { s: 0.5 }))?,
        4 => ModelSpec::matrix(y, Arc::new(SplitSignReversal))?,
        5 => return Ok(BuiltinModel::Ivar { index, scalars: vec![0.5] }),
        6 => {
            return Ok(BuiltinModel::Ivar {
                index,
                scalars: vec![0.5, 0.2],
            })
        }
        _ => {
            return Err(Error::Config(format!(
                "model index {index} outside 1..=6"
            )))
        }
    };
    Ok(BuiltinModel::Ma { index, spec })
}

impl BuiltinModel {
    pub fn index(&self) -> usize {
        match self {
            BuiltinModel::Ma { index, .. } | BuiltinModel::Ivar { index, .. } => *index,
        }
    }

    /// The MA model spec when the model is a moving average (the limit
    /// calculus applies only to these).
    pub fn ma_spec(&self) -> Option<&ModelSpec> {
        match self {
            BuiltinModel::Ma { spec, .. } => Some(spec),
            BuiltinModel::Ivar { .. } => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            BuiltinModel::Ma { index, spec } => format!("model {index}: {}", spec.describe()),
            BuiltinModel::Ivar { index, scalars } => {
                format!("model {index}: IVAR{scalars:?}")
            }
        }
    }

    pub fn simulate(&self, p: usize, n: usize, seed: u64) -> Result<SampleMatrix> {
        self.simulate_substream(p, n, seed, 0)
    }

    pub fn simulate_substream(
        &self,
        p: usize,
        n: usize,
        seed: u64,
        replicate: u64,
    ) -> Result<SampleMatrix> {
        match self {
            BuiltinModel::Ma { spec, .. } => simulate_ma_substream(spec, p, n, seed, replicate),
            BuiltinModel::Ivar { scalars, .. } => {
                let a: Vec<CoeffMatrix> = scalars
                    .iter()
                    .map(|&s| CoeffMatrix::Perm(SignedPerm::scaled_identity(p, s)))
                    .collect();
                simulate_ivar_substream(&a, n, p, seed, 200, replicate)
            }
        }
    }
}
