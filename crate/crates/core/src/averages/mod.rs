//! Multiple ergodic averages, uniform-density limits, Banach density,
//! the Potts product law and the `j*` embeddings.

mod embed;
mod integrals;
mod observable;
mod potts;
mod uniform;

pub use embed::{gtilde_star_conjugation_check, gtilde_star_membership, jstar_embed, Membership};
pub use integrals::{
    integrate_haar, monte_carlo, multi_average_i, nilfunction_prediction, nilfunction_residual,
    Estimate, NilResidual, TimeTrig,
};
pub use observable::{check_observable, e, Callback, Observable, TrigPolynomial};
pub use potts::{
    default_step, oscillatory_integral, potts_average, PottsOptions, PottsReport, TimeQuadrature,
};
pub use uniform::{
    banach_density, sweep_windows, ud_sup, DensityEstimate, TimeSeries, UdReport, WindowAverage,
    DEFAULT_HIT_HALF_WIDTH,
};
