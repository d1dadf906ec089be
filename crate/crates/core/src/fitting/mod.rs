//! Nonlinear least-squares fits of measured reflection traces.
//!
//! [`fit_reflection`] extracts the cavity (`omega_c`, `kappa_in`,
//! `kappa_ex`) together with the line parameters (`A`, `tau`, `phi`,
//! `delta`). [`fit_omit`] then holds those fixed and extracts the
//! mechanical coupling from an OMIT trace.

mod guess;
pub mod lm;
mod model;
mod omit;
mod reflect;
mod trace;

pub use guess::{initial_guess, wrap_phase};
pub use model::{reflection_model, reflection_model_hz, ReflectionModelParams};
pub use omit::{fit_omit, omit_initial_guess, omit_model, omit_model_hz, OmitFree, OmitMechanics};
pub use reflect::{fit_reflection, fit_reflection_with, reflection_cost, FitResult};
pub use trace::{
    linear_grid, load_trace, read_trace, save_trace, synthesize_trace, write_trace, ComplexTrace, TraceFormat,
    MIN_SAMPLES,
};
