//! Regional proximality of order `d`, dynamical cubes, `N_d` sets,
//! commuting-action transfer, return times and fiber coverage.

mod cube;
mod density;
mod transfer;
mod witness;

pub use cube::{check_alphas, cube_orbit_sample, nd_sample, DEFAULT_HORIZON};
pub use density::{
    fiber_coverage, poly_orbit_density, return_set, rp_return_first, rp_return_intersection,
    Projection,
};
pub use transfer::{commutation_gap, commuting_rp_transfer, COMMUTATION_SAMPLES, COMMUTATION_TOL};
pub use witness::{
    default_quantum, face_times, rp_witness_search, rp_witness_verify, RPWitness, SearchOptions,
    SearchOutcome, SearchStats,
};
