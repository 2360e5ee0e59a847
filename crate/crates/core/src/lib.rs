//! Entropic mirror descent over products of scaled simplexes, applied to
//! equilibrium route choice in congestible networks, together with the
//! population-level imitative logit dynamics that mirror it.
//!
//! The crate is organised around five engines sharing one geometry:
//!
//! * [`simplex`] — the feasible set `Q = Π_j S_{n_j}(d_j)` (block sizes and
//!   masses), entropy radius and sampling helpers.
//! * [`network`] — directed networks with edge latency functions, path flows,
//!   path costs `G(x)` and the congestion potential `Ψ(x)` with `∇Ψ = G`.
//! * [`md`] — mirror descent steps in entropic geometry, step-size rules,
//!   inexact gradient oracles, regret ledgers and certified regret bounds.
//! * [`sampler`] — multiplicative-weights vertex sampling against an
//!   adaptive adversary (the single-agent route-choice strategy).
//! * [`dynamics`] — the imitative logit ODE and its finite-population Markov
//!   revision process.
//! * [`reference`] — independent equilibrium oracles (grid search and long
//!   mirror-descent refinement) that certify `Ψ*` and `x*`.

pub mod dynamics;
pub mod md;
pub mod network;
pub mod reference;
pub mod sampler;
pub mod simplex;

pub use dynamics::{
    concentration_study, integrate_ode, lyapunov_series, markov_run, ode_rhs, ConcentrationCell,
    DynamicsError, MarkovTrajectory, OdeMethod, OdeTrajectory, PopulationState,
};
pub use md::{
    certified_bound_general, certified_bound_product, certified_bound_simplex,
    certified_bound_vertex_sampling, dual_norm, entropy_value, bregman, fixed_step_bound,
    md_step_product, md_step_simplex, iterate_from_cumulative, per_block_step_bound, run_md,
    step_size_general, step_size_product, step_size_simplex, BoundReport, GradientOracle,
    MdError, MdRun, MdState, NoiseModel, NoisyOracle, PotentialOracle, RegretLedger,
};
pub use network::{
    CostFunction, DerivedBounds, Edge, Network, NetworkError, OdPair, PathFlow, FEASIBILITY_TOL,
};
pub use reference::{grid_equilibrium, md_refine, wardrop_residual, EquilibriumCertificate, ReferenceError};
pub use sampler::{
    run_expert_game, sample_vertex, mwu_update, Adversary, ChargeLeaderAdversary, ExpertGameRecord,
    ExpertState, GameHistory, IidAdversary, ObliviousAdversary, SamplerError,
};
pub use simplex::{ProductSimplex, SimplexError};
