//! The rare-events loss model with its Poissonization, and random sums with
//! coupling bounds.

mod coupling;
mod pmf;
mod rare;
mod sample;
mod transport;

pub use coupling::{
    coupling_cost, optimal_coupling, optimal_coupling_with, quantile_coupling, BoundType, Coupling,
    CouplingBoundSpec, DEFAULT_SUPPORT_CAP, MARGINAL_TOL,
};
pub use pmf::{random_sum, IntegerPmf};
pub use rare::{
    exact_d, exact_g, simulate_s, simulate_t, simulate_t_with_counts, PoissonizedDraws, RareEvent,
    RareEventModel,
};
pub use sample::{dkw_bound, EmpiricalSample};
