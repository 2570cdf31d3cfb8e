//! The cumulant generating function L(γ) = ln E exp(γξ), its first two
//! derivatives, the entropy gap g(γ) = L(γ) - γL'(γ), and the solver for the
//! tilt γ* defined by g(γ*) = -ln b.
//!
//! Everything is evaluated in tilted form: exponents are shifted by γ·ω
//! before exponentiating, so no intermediate overflows regardless of γ, and
//! L'' is computed as a tilted variance (a sum of non-negative terms, hence
//! never negative).

use thiserror::Error;

use crate::kahan::KahanSum;
use crate::lattice::LatticePMF;

/// Default tolerance for [`solve_profile`]: |g(γ*) + ln b| at termination.
pub const DEFAULT_SOLVER_TOL: f64 = 1e-12;

/// Bracket expansion for the tilt solvers stops at this γ.
const BRACKET_CAP: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SolveError {
    #[error(
        "degenerate distribution: support is a single point, the gap equation has no solution"
    )]
    DegenerateDistribution,
    #[error("no solution: P(ξ=ω) = {p_omega} ≥ 1/{base} — condition (ii) fails in base {base}")]
    NoSolution { p_omega: f64, base: f64 },
}

/// Solved tilt constants of a lattice law for copy-count base `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CumulantProfile {
    /// Positive solution of L(γ) - γL'(γ) = -ln b.
    pub gamma_star: f64,
    /// Tilted mean ρ* = L'(γ*).
    pub rho_star: f64,
    /// Tilted standard deviation σ* = sqrt(L''(γ*)).
    pub sigma_star: f64,
    /// Top of the support.
    pub omega: i64,
    /// Mass at the top of the support.
    pub p_omega: f64,
    /// Copy-count base b > 1.
    pub base: f64,
    /// The solver target -ln b.
    pub target: f64,
    /// |g(γ*) - target| at termination.
    pub residual: f64,
}

/// L(γ), L'(γ), L''(γ).
///
/// The exponent is shifted by γ·ω (or γ·support_min for negative γ) before
/// exponentiating; terms that underflow to zero are harmless since the top
/// term always has exponent zero.
pub fn cumulant(pmf: &LatticePMF, gamma: f64) -> (f64, f64, f64) {
    assert!(gamma.is_finite(), "tilt must be finite");
    let shift_at = if gamma >= 0.0 {
        pmf.omega()
    } else {
        pmf.support_min()
    };
    let mut z = KahanSum::new();
    let mut weighted = Vec::with_capacity(pmf.len());
    for (v, w) in pmf.iter() {
        let t = w * (gamma * (v - shift_at) as f64).exp();
        weighted.push((v, t));
        z.add(t);
    }
    let z = z.value();
    let log_mgf = z.ln() + gamma * shift_at as f64;

    let mut mean = KahanSum::new();
    for &(v, t) in &weighted {
        mean.add(t * v as f64);
    }
    let mean = mean.value() / z;

    let mut var = KahanSum::new();
    for &(v, t) in &weighted {
        let d = v as f64 - mean;
        var.add(t * d * d);
    }
    (log_mgf, mean, var.value() / z)
}

/// The entropy gap g(γ) = L(γ) - γL'(γ); g(0) = 0 exactly.
///
/// g is non-increasing (g'(γ) = -γL''(γ) ≤ 0) and, for a finite support,
/// tends to ln P(ξ=ω) as γ → ∞.
pub fn entropy_gap(pmf: &LatticePMF, gamma: f64) -> f64 {
    if gamma == 0.0 {
        return 0.0;
    }
    let (l, l1, _) = cumulant(pmf, gamma);
    l - gamma * l1
}

/// The γ → ∞ limit of the entropy gap, read off the stored top weight.
pub fn gap_limit(pmf: &LatticePMF) -> f64 {
    pmf.top_mass().ln()
}

/// Solve g(γ*) = -ln `base` for the unique γ* > 0 and populate the profile.
///
/// Monotone safeguarded Newton with a bisection fallback on an expanding
/// bracket. Requires a non-degenerate law with P(ξ=ω) < 1/base.
pub fn solve_profile(pmf: &LatticePMF, base: f64, tol: f64) -> Result<CumulantProfile, SolveError> {
    assert!(base.is_finite() && base > 1.0, "base must be > 1");
    assert!(tol > 0.0, "tolerance must be positive");
    if pmf.positive_support_points() < 2 {
        return Err(SolveError::DegenerateDistribution);
    }
    let p_omega = pmf.top_mass();
    let target = -base.ln();
    if p_omega.ln() >= target {
        return Err(SolveError::NoSolution { p_omega, base });
    }

    // Expand the upper bracket until g(hi) drops at or below the target.
    let mut lo = 0.0_f64; // g(0) = 0 > target
    let mut hi = 1.0_f64;
    while entropy_gap(pmf, hi) > target {
        lo = hi;
        hi *= 2.0;
        if hi > BRACKET_CAP {
            // g approaches ln p_omega only asymptotically; not reaching the
            // target by γ = 1e4 means p_omega is numerically at the 1/base
            // boundary.
            return Err(SolveError::NoSolution { p_omega, base });
        }
    }

    let mut x = 0.5 * (lo + hi);
    let mut residual = f64::INFINITY;
    for _ in 0..200 {
        let (l, l1, l2) = cumulant(pmf, x);
        let h = (l - x * l1) - target;
        residual = h.abs();
        if residual <= tol {
            break;
        }
        if h > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
        let dh = -x * l2;
        let newton = x - h / dh;
        x = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }

    let (_, rho_star, l2) = cumulant(pmf, x);
    Ok(CumulantProfile {
        gamma_star: x,
        rho_star,
        sigma_star: l2.max(0.0).sqrt(),
        omega: pmf.omega(),
        p_omega,
        base,
        target,
        residual,
    })
}
