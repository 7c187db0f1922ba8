//! Closed-form laws and analytic consistency checks: Marchenko-Pastur and
//! free Bessel moments, compound-free-Poisson cumulants via exact
//! trigonometric expectations, and residuals of the Stieltjes fixed-point
//! equations evaluated on truncated moment series.

mod cfp;
mod stieltjes;

pub use cfp::{
    cfp_cumulant, cfp_moments, free_bessel_moment, htilde, mp_moment, trig_expectation,
    LaurentPoly,
};
pub use stieltjes::{
    biquadratic_residual, cgf_stieltjes_check, mp_moments_f64, silverstein_residual,
    truncated_stieltjes, Orientation, StieltjesPoint,
};
