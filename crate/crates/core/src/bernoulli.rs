//! Closed-form constants for the {0,1}-valued Bernoulli specialization:
//! the shift coefficient ρ* from the relative-entropy equation
//! 2 p^ρ q^{1-ρ} = ρ^ρ (1-ρ)^{1-ρ}, the geometric ratio κ = p(1-ρ*)/(qρ*),
//! β = 2πρ*(1-ρ*), γ* = |ln κ| and σ* = sqrt(ρ*(1-ρ*)).
//!
//! These duplicate, in closed form, what the generic solver produces for the
//! two-point law — the two routes are cross-validated against each other.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum BernoulliError {
    #[error("p = {p} outside (0, 1/2): the closed-form constants need p < 1/2")]
    OutOfRange { p: f64 },
}

/// Closed-form Bernoulli constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernoulliProfile {
    pub p: f64,
    pub q: f64,
    /// Root of ρ ln(ρ/p) + (1-ρ) ln((1-ρ)/q) = ln 2 in (p, 1).
    pub rho_star: f64,
    /// κ = p(1-ρ*)/(q ρ*), in (0, 1).
    pub kappa: f64,
    /// β = 2π ρ*(1-ρ*).
    pub beta: f64,
    /// γ* = |ln κ|.
    pub gamma_star: f64,
    /// σ* = sqrt(ρ*(1-ρ*)).
    pub sigma_star: f64,
}

/// exp(x·y) with the product's rounding residual restored through a fused
/// multiply-add, so the result keeps full relative accuracy even when the
/// exponent is several units large.
fn exp_prod(x: f64, y: f64) -> f64 {
    let hi = x * y;
    let lo = x.mul_add(y, -hi);
    hi.exp() * (1.0 + lo)
}

impl BernoulliProfile {
    /// The closed-form tail constant κ^z/(1-κ) at integer offset z.
    pub fn tail_constant_closed(&self, z: i32) -> f64 {
        self.kappa.powi(z) / (1.0 - self.kappa)
    }

    /// The generic-form tail constant exp(-γ*z₁)/(sqrt(2π)σ*(1-e^{-γ*}))
    /// at real offset z₁.
    pub fn tail_constant_generic(&self, z1: f64) -> f64 {
        exp_prod(-self.gamma_star, z1)
            / ((2.0 * std::f64::consts::PI).sqrt()
                * self.sigma_star
                * (1.0 - (-self.gamma_star).exp()))
    }

    /// The offset substitution z₁ = z - ln β/(2γ*) aligning the two
    /// centerings; under it the two tail constants coincide.
    pub fn offset_shift(&self) -> f64 {
        self.beta.ln() / (2.0 * self.gamma_star)
    }
}

/// Relative entropy of Bernoulli(rho) against Bernoulli(p), the monotone
/// form of the defining equation; the rho -> 1 endpoint is evaluated by its
/// limit -ln p.
fn kl_divergence(rho: f64, p: f64, q: f64) -> f64 {
    let upper = rho * (rho / p).ln();
    let lower = if rho == 1.0 {
        0.0
    } else {
        (1.0 - rho) * ((1.0 - rho) / q).ln()
    };
    upper + lower
}

/// Solve the defining equation for ρ* by bisection on the KL form over
/// (p, 1), then populate the derived constants.
pub fn solve_bernoulli(p: f64) -> Result<BernoulliProfile, BernoulliError> {
    if !p.is_finite() || p <= 0.0 || p >= 0.5 {
        return Err(BernoulliError::OutOfRange { p });
    }
    let q = 1.0 - p;
    let ln2 = std::f64::consts::LN_2;

    // KL increases from 0 at rho = p to -ln p > ln 2 at rho = 1; bisection is
    // endpoint-robust where the derivative blows up logarithmically.
    let mut lo = p;
    let mut hi = 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if kl_divergence(mid, p, q) < ln2 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let rho_star = 0.5 * (lo + hi);

    let kappa = p * (1.0 - rho_star) / (q * rho_star);
    Ok(BernoulliProfile {
        p,
        q,
        rho_star,
        kappa,
        beta: 2.0 * std::f64::consts::PI * rho_star * (1.0 - rho_star),
        gamma_star: -kappa.ln(),
        sigma_star: (rho_star * (1.0 - rho_star)).sqrt(),
    })
}

/// The closed-form centering ρ*·n - ln(βn) / (2|ln κ|).
///
/// This differs from the generic helix centering a_n by the constant
/// ln(1-κ)/γ*: it pairs with the tail constant κ^z/(1-κ) instead of 1.
pub fn centering(profile: &BernoulliProfile, n: u32) -> f64 {
    profile.rho_star * n as f64 - (profile.beta * n as f64).ln() / (2.0 * profile.gamma_star)
}

/// Componentwise |Δρ*|, |Δγ*|, |Δσ*| between the closed form and the
/// generic solver run on the matching {0,1} law in base 2.
pub fn generic_deltas(
    profile: &BernoulliProfile,
) -> Result<(f64, f64, f64), crate::cumulant::SolveError> {
    let pmf =
        crate::lattice::LatticePMF::bernoulli(profile.p).expect("profile p is a valid probability");
    let generic = crate::cumulant::solve_profile(&pmf, 2.0, crate::cumulant::DEFAULT_SOLVER_TOL)?;
    Ok((
        (profile.rho_star - generic.rho_star).abs(),
        (profile.gamma_star - generic.gamma_star).abs(),
        (profile.sigma_star - generic.sigma_star).abs(),
    ))
}
