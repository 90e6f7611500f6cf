//! Cycles of specified normalized length in random permutations.
//!
//! Let `X^{(n)}` count the cycles of a uniform random permutation of [n]
//! whose length lies in `[γn, δn]`. This crate computes the distribution of
//! `X^{(n)}` three ways:
//!
//! * exactly for finite n ([`exact_finite`]): a dynamic program over the
//!   cycle through a fixed element, a brute-force enumerator, and the
//!   multinomial expansion of falling moments;
//! * in the n → ∞ limit ([`limit`]): falling moments as integrals over
//!   sliced hypercubes, a one-dimensional recurrence for the δ = 1 case,
//!   dilogarithm closed forms, and moment inversion ([`quasi_poisson`]);
//! * empirically ([`sampler`]): seeded Monte Carlo over uniform and Ewens
//!   cycle types.

pub(crate) mod chebyshev;
pub mod error;
pub mod exact_finite;
pub mod limit;
pub mod quadrature;
pub mod quasi_poisson;
pub mod sampler;
pub mod special_fn;

pub use error::{Error, Result};
pub use exact_finite::{
    brute_force_pmf, exact_falling_moment, exact_pmf, exact_pmf_rational, joint_falling_moment, normalized_window,
    normalized_window_exact, CycleSpec, IntWindow, RationalPmf,
};
pub use limit::{
    argmax_p, ewens_lambda, gamma_star, limit_moments, p1_derivative, p_limit, q2_closed_form, q_limit, q_recurrence,
    sliced_cube_integral, small_simplex_ratio, Interval,
};
pub use quadrature::{Estimate, PanelRule, QuadratureConfig};
pub use quasi_poisson::{
    binomial_matrices, falling_moment, int_mat_mul, pmf_from_falling_moments, qp_pmf, IntMatrix, MomentVector, Pmf,
};
pub use sampler::{estimate_pmf, estimate_window_pmf, sample_cycle_lengths, CycleLengths, EstimateResult};
pub use special_fn::{buchstab, dilog, Buchstab, RealInterval};
