//! Variational solvers for the p-Laplace equation
//! `−Δ_p u + ρ|u|^{p−2}u = ψ(x, u⁺)` on connected weighted graphs.
//!
//! Every numerical routine is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the bottom of this file fix the double-precision instances
//! used by the command-line harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod energy;
pub mod error;
pub mod function;
pub mod graph;
pub mod lambda;
pub mod mountain_pass;
pub mod nehari;
pub mod nonlinearity;
pub mod par;
pub mod scalar;
pub mod solver;
pub mod verify;
pub mod well;

pub use calculus::{
    check_integration_by_parts, grad_norm, grad_norms, gradient_vector, hp_norm, hp_norm_pow,
    integral, integration_by_parts_with, lq_norm, omega_norm, p_laplacian, w1p_norm,
    IntegrationByParts, LqExponent,
};
pub use energy::EnergyModel;
pub use error::{Error, Result};
pub use function::VertexFunction;
pub use graph::{DomainSubset, GraphBuilder, WeightedGraph};
pub use lambda::{dense_lambda_p2, estimate_lambda_p, LambdaConfig, LambdaEstimate};
pub use mountain_pass::{
    best_spike, find_negative_endpoint, mpa_solve, MountainPassPath, MpaConfig, MpaOutcome,
};
pub use nehari::{
    brute_force_ground_state, gamma, nehari_project, verify_positivity, BruteForceGrid,
    BruteForceResult, NehariProjection, Positivity,
};
pub use nonlinearity::{Coefficient, Family, Nonlinearity, PowerTerm};
pub use scalar::Scalar;
pub use solver::{
    ground_state_solve, ground_state_solve_with, spike_seeds, vertex_classes, SeedKind,
    SolveConfig, SolveResult, TraceEntry,
};
pub use verify::{run_suite, run_suite_with, CheckOutcome, VerifyReport};
pub use well::{
    dirichlet_energy, dirichlet_ground_state, dirichlet_model, theta_ground_state, theta_model,
    theta_sweep, Sweep, SweepRow, WellConfig,
};

pub type Graph = WeightedGraph<f64>;
pub type Graph32 = WeightedGraph<f32>;
pub type Function = VertexFunction<f64>;
pub type Function32 = VertexFunction<f32>;
pub type Model = EnergyModel<f64>;
pub type Model32 = EnergyModel<f32>;
pub type Solution = SolveResult<f64>;
pub type Solution32 = SolveResult<f32>;
pub type Well = WellConfig<f64>;
