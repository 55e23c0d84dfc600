//! Torus rotations and flows, the Heisenberg nilmanifold, and minimality tests.

mod dd;
mod handle;
mod heisenberg;
mod minimality;
mod torus;

pub use handle::{Space, SystemHandle, SystemTag, TIME_TOL};
pub use heisenberg::{
    heis_base_dist, heis_conjugate_power_identity, heis_directed_dist, heis_dist, heis_multiply,
    heis_power, heis_reduce, nil_evolve, HeisenbergElement, LatticeElement, Nilflow,
    LATTICE_WINDOW,
};
pub use minimality::{
    flow_decision, flow_minimal, map_decision, map_minimal, time_t_decision, time_t_minimal,
};
pub use torus::{
    circle_dist, torus_dist, torus_evolve, wrap, ExactShadow, TorusFlow, TorusMap, TorusPoint,
};
