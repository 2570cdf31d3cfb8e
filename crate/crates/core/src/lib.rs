//! Exact and asymptotic distributions of the maximum of exponentially many
//! independent sums of i.i.d. integer-valued random variables.
//!
//! For a lattice law ξ with top mass P(ξ=ω) < 1/b, the centered distribution
//! of M_n = max over b^n independent copies of S_n = ξ₁ + … + ξ_n does not
//! converge to a single limit: it is attracted to a helix of discretized
//! Gumbel distributions F^a, 1-periodic up to an integer shift, and every
//! point of the helix turn is a subsequential limit. This crate computes the
//! exact law of M_n in log domain, solves for the tilt constants that
//! parametrize the helix, and measures the distances that make the cyclic
//! behavior visible at desk scale.
//!
//! - [`lattice`]: exact arithmetic on finitely supported integer laws.
//! - [`cumulant`]: L(γ) and derivatives, the entropy gap, the tilt solver.
//! - [`exactmax`]: the exact law of M_n via ln P(M_n<m) = bⁿ ln P(S_n<m).
//! - [`helix`]: the Gumbel helix family, centerings, CDF distances, reports.
//! - [`largedev`]: the lattice large-deviation tail estimate for P(S_n ≥ m).
//! - [`bernoulli`]: closed-form constants for the {0,1} Bernoulli law.
//! - [`check`]: the runtime invariant suite, including a seeded Monte Carlo
//!   cross-check.

pub mod bernoulli;
pub mod check;
pub mod cumulant;
pub mod exactmax;
pub mod helix;
pub mod kahan;
pub mod largedev;
pub mod lattice;

pub use bernoulli::{solve_bernoulli, BernoulliError, BernoulliProfile};
pub use cumulant::{solve_profile, CumulantProfile, SolveError};
pub use exactmax::{centered_law, max_law, ExactMaxError, MaxLaw};
pub use helix::{
    centering, cyclic_report, helix_point, kolmogorov_distance, total_variation_distance,
    CyclicRow, HelixPoint, IntegerCdf,
};
pub use largedev::{tail_approx, tilt_for_level, LargeDevError, TailEstimate};
pub use lattice::{convolution_power, convolve, LatticeError, LatticePMF, PmfParseError};
