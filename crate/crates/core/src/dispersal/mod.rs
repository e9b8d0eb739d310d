//! Probability bounds and the two-phase dispersal planner.

mod plan;
mod prob;
mod validity;

pub use plan::{
    inverse_permutation, is_securely_dispersed, plan_dispersal, plan_secure_phase, plan_valid_phase,
    relabel_sets, secure_permutation, DispersalPlan, Holdings, OracleParams, Phases, SecureAssignment,
    SecurePhase,
};
pub use prob::{
    binom, chi_group_coupon, d_threshold, entropy_he, k_f_min, k_star, k_star_scan, ln_biguint,
    ln_prob_not_ss_valid_ub, n_upper_bound, p_fail, prob_not_ss_valid_ub, prob_ub_random, KStar,
};
pub use validity::{check_ss_valid, estimate, ValidityMode, ValidityVerdict};
