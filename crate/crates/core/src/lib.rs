//! Exact solver and verification toolkit for selecting the k-th best of
//! `n` sequentially observed candidates.
//!
//! Values are exact rationals throughout. The dynamic program in
//! [`dp_solver`] is the reference; [`closed_form`] gives explicit rules for
//! k = 1, 2, 3, [`policy_eval`] scores any stage-set policy exactly, and
//! [`simulator`] estimates it by seeded Monte Carlo.

pub mod analysis;
pub mod closed_form;
pub mod dp_solver;
pub mod error;
pub mod exact_math;
pub mod policy;
pub mod policy_eval;
pub mod reward;
pub mod simulator;

pub use closed_form::{
    asymptotic_constants, h_value, k3_thresholds, p1, p2, p3, r_threshold, rprime_threshold, tau_policy,
    AsymptoticConstants, K3Thresholds, ThresholdKind, ThresholdPolicyDescriptor,
};
pub use dp_solver::{optimal_value, p_value, solve, PValueCache, ValueTable};
pub use error::{Error, Result};
pub use exact_math::{binomial, decimal_string, harmonic_shift_sum, to_f64, Rational};
pub use policy::{PolicyFile, StagePolicy};
pub use policy_eval::{conditional_value, conditional_values, evaluate, ConditionalValues};
pub use reward::{reward, reward_k3, support, Goal, RelativeRankObservation};
pub use simulator::{simulate, SimulationReport, RNG_ID};
