//! The limit calculus: symmetric polynomials in the autocovariance symbols
//! expand into alternating free words, which are evaluated under the limit
//! state by summing over non-crossing partitions of the c-positions with
//! Kreweras-complement coefficient blocks.

mod model;
mod poly;
mod trace;
mod words;

pub use model::{
    CoeffGenerator, CoeffMatrix, Coefficients, ModelSpec, ScalarAsMatrices,
    ScaledIdentityPlusOnes, SignedPerm, SplitSignReversal,
};
pub use poly::{Atom, GammaPolynomial};
pub use trace::{matrix_trace_functional, MatrixTrace, Provenance, PsiAtom, ScalarTrace, TraceFunctional};
pub use words::{
    a_state, c_state, evaluate_free_word, expand_gamma_polynomial, limit_moment,
    limit_moment_exact, lsd_equal_beyond_q_check, semicircle_moment, EvalOptions, FreeWord,
    PolyShape,
};
