//! Numerical certificates for the finite-stage towers: the norm and moment
//! inequalities on boundary measures, the nontriviality gap, density residuals
//! for log-moduli, generator coefficients, and the halving identity on
//! square-root towers.

pub mod certificate;
pub mod density;
pub mod gap;
pub mod generators;
pub mod halving;

pub use certificate::{certify_conditions, Certificate};
pub use density::{dirichlet_residual, DensityFit, FitNorm};
pub use gap::{nontriviality_gap, NontrivialityReport};
pub use generators::{generator_coefficients, CaseTag, GeneratorReport};
pub use halving::{halving_identity_check, HalvingReport};
