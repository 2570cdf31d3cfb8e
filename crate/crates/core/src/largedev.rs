//! First-order large-deviation tail asymptotics for lattice sums: the
//! Bahadur-Rao-type estimate of P(S_n >= m) with Gaussian prefactor
//! 1/sqrt(2π L''(γ) n) and lattice factor (1 - e^{-γ})^{-1}, at the tilt γ
//! solving L'(γ) = m/n.

use thiserror::Error;

use crate::cumulant::cumulant;
use crate::lattice::{self, LatticePMF};

const LEVEL_TOL: f64 = 1e-12;
const BRACKET_CAP: f64 = 1e4;

/// The estimate is a large-deviation statement; below this rate it is
/// reported as outside its regime.
const RELIABLE_RATE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum LargeDevError {
    #[error("level x = {x} outside the open tilt range ({mean}, {omega})")]
    OutOfRange { x: f64, mean: f64, omega: i64 },
}

/// Tail estimate of P(S_n >= m) at level x = m/n.
#[derive(Debug, Clone, Copy)]
pub struct TailEstimate {
    pub n: u32,
    /// Per-summand level m/n.
    pub x: f64,
    /// Tilt: the unique solution of L'(γ) = x.
    pub gamma: f64,
    /// Large-deviation exponent n(γx - L(γ)) >= 0.
    pub rate: f64,
    pub log_estimate: f64,
    pub estimate: f64,
}

impl TailEstimate {
    /// Whether the rate is large enough for the asymptotic to be meaningful.
    pub fn in_asymptotic_regime(&self) -> bool {
        self.rate >= RELIABLE_RATE
    }

    /// estimate / exact, for comparison against an exact tail.
    pub fn ratio_to(&self, exact: f64) -> f64 {
        self.estimate / exact
    }
}

/// Solve L'(γ) = x for γ > 0. Requires mean < x < ω strictly.
pub fn tilt_for_level(pmf: &LatticePMF, x: f64) -> Result<f64, LargeDevError> {
    let mean = pmf.mean();
    let omega = pmf.omega();
    let out_of_range = LargeDevError::OutOfRange { x, mean, omega };
    if !x.is_finite() || x <= mean || x >= omega as f64 {
        return Err(out_of_range);
    }

    // L' is strictly increasing from the mean towards ω.
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    while cumulant(pmf, hi).1 < x {
        lo = hi;
        hi *= 2.0;
        if hi > BRACKET_CAP {
            return Err(out_of_range); // tilt diverges: x at the top of support
        }
    }

    let mut gamma = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (_, l1, l2) = cumulant(pmf, gamma);
        let h = l1 - x;
        if h.abs() <= LEVEL_TOL {
            break;
        }
        if h < 0.0 {
            lo = gamma;
        } else {
            hi = gamma;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
        let newton = gamma - h / l2;
        gamma = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Ok(gamma)
}

/// The tail estimate of P(S_n >= m):
/// exp(-n(γx - L(γ))) / (sqrt(2π L''(γ) n) (1 - e^{-γ})) at γ = tilt(m/n).
///
/// No continuity correction beyond the lattice factor already present.
pub fn tail_approx(pmf: &LatticePMF, n: u32, m: i64) -> Result<TailEstimate, LargeDevError> {
    assert!(n >= 1, "tail_approx needs n >= 1");
    let n_f = n as f64;
    let x = m as f64 / n_f;
    let gamma = tilt_for_level(pmf, x)?;
    let (l, _, l2) = cumulant(pmf, gamma);
    let rate = gamma * m as f64 - n_f * l;
    let one_minus_exp = -(-gamma).exp_m1(); // 1 - e^{-γ}
    let log_estimate =
        -rate - 0.5 * (2.0 * std::f64::consts::PI * l2 * n_f).ln() - one_minus_exp.ln();
    Ok(TailEstimate {
        n,
        x,
        gamma,
        rate,
        log_estimate,
        estimate: log_estimate.exp(),
    })
}

/// Exact tail P(S_n >= m) through the convolution pipeline, for validating
/// the estimate.
pub fn exact_tail(pmf: &LatticePMF, n: u32, m: i64) -> Result<f64, lattice::LatticeError> {
    Ok(lattice::convolution_power(pmf, n)?.tail(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cumulant::solve_profile;
    use approx::assert_abs_diff_eq;

    fn bern(p: f64) -> LatticePMF {
        LatticePMF::bernoulli(p).unwrap()
    }

    #[test]
    fn bernoulli_tilt_closed_form() {
        // e^γ = xq / (p(1-x)) for the {0,1} Bernoulli.
        let b = bern(0.3);
        for x in [0.5, 0.6, 0.8, 0.95] {
            let gamma = tilt_for_level(&b, x).unwrap();
            let expected = (x * 0.7 / (0.3 * (1.0 - x))).ln();
            assert_abs_diff_eq!(gamma, expected, epsilon = 1e-11);
        }
    }

    #[test]
    fn tiny_levels_give_tiny_tilts() {
        let b = bern(0.3);
        let gamma = tilt_for_level(&b, b.mean() + 1e-6).unwrap();
        assert!(gamma > 0.0 && gamma <= 1e-4);
    }

    #[test]
    fn out_of_range_levels() {
        let b = bern(0.3);
        assert!(matches!(
            tilt_for_level(&b, 1.0),
            Err(LargeDevError::OutOfRange { .. })
        ));
        assert!(matches!(
            tilt_for_level(&b, 1.5),
            Err(LargeDevError::OutOfRange { .. })
        ));
        assert!(matches!(
            tilt_for_level(&b, 0.3),
            Err(LargeDevError::OutOfRange { .. })
        ));
        assert!(matches!(
            tilt_for_level(&b, 0.1),
            Err(LargeDevError::OutOfRange { .. })
        ));
    }

    #[test]
    fn estimate_accuracy_against_exact_tail() {
        let b = bern(0.3);
        let prof = solve_profile(&b, 2.0, 1e-12).unwrap();
        let m100 = (prof.rho_star * 100.0).round() as i64;
        let est100 = tail_approx(&b, 100, m100).unwrap();
        let ratio100 = est100.ratio_to(exact_tail(&b, 100, m100).unwrap());
        assert!(
            (0.95..=1.05).contains(&ratio100),
            "ratio at n=100: {ratio100}"
        );
        let m400 = (prof.rho_star * 400.0).round() as i64;
        let est400 = tail_approx(&b, 400, m400).unwrap();
        let ratio400 = est400.ratio_to(exact_tail(&b, 400, m400).unwrap());
        assert!(
            (ratio400 - 1.0).abs() < (ratio100 - 1.0).abs(),
            "O(1/n): {ratio400} vs {ratio100}"
        );
    }

    #[test]
    fn binomial_ratio_tends_to_one() {
        // Fixed level x = 0.5 for Binomial(n, 0.3): the ratio to the exact
        // tail approaches 1 along n.
        let b = bern(0.3);
        let mut errs = Vec::new();
        for n in [100u32, 200, 400] {
            let m = (0.5 * n as f64).round() as i64;
            let est = tail_approx(&b, n, m).unwrap();
            errs.push((est.ratio_to(exact_tail(&b, n, m).unwrap()) - 1.0).abs());
        }
        assert!(errs[0] > errs[1] && errs[1] > errs[2]);
        assert!(errs[2] < 0.01);
    }

    #[test]
    fn rate_nonnegative_and_estimate_decreasing() {
        let b = bern(0.3);
        let mut prev = f64::INFINITY;
        for m in 40..=90 {
            let est = tail_approx(&b, 100, m).unwrap();
            assert!(est.rate >= 0.0);
            assert!(est.estimate < prev, "estimate must decrease in m");
            assert!(est.estimate > 0.0 && est.estimate < 1.0);
            assert!(est.log_estimate.is_finite());
            prev = est.estimate;
        }
    }

    #[test]
    fn regime_guard() {
        let b = bern(0.3);
        // One step above the mean at small n: rate below the guard.
        let shallow = tail_approx(&b, 10, 4).unwrap();
        assert!(!shallow.in_asymptotic_regime());
        let deep = tail_approx(&b, 100, 60).unwrap();
        assert!(deep.in_asymptotic_regime());
    }

    #[test]
    fn tail_bridge_constant() {
        // With m near ρ*n - ln n/(2γ*), the estimate times b^n reproduces
        // exp(-γ* z)/(sqrt(2π L''(γ*)) (1-e^{-γ*})) up to (1+o(1)). The o(1)
        // term is still ~50% at n=64; it falls within 10% by n=1024.
        let b = bern(0.3);
        let prof = solve_profile(&b, 2.0, 1e-12).unwrap();
        let k = 1.0
            / ((2.0 * std::f64::consts::PI).sqrt()
                * prof.sigma_star
                * -(-prof.gamma_star).exp_m1());
        let worst_for = |n: u32| -> f64 {
            let n_f = n as f64;
            let c_n = prof.rho_star * n_f - n_f.ln() / (2.0 * prof.gamma_star);
            let mut worst = 0.0_f64;
            for z in -2..=4 {
                let m = c_n.round() as i64 + z;
                let z_eff = m as f64 - c_n;
                let est = tail_approx(&b, n, m).unwrap();
                let lhs = (est.log_estimate + n_f * 2.0_f64.ln()).exp();
                let pred = (-prof.gamma_star * z_eff).exp() * k;
                worst = worst.max((lhs / pred - 1.0).abs());
            }
            worst
        };
        let w64 = worst_for(64);
        let w256 = worst_for(256);
        let w1024 = worst_for(1024);
        assert!(w64 > w256 && w256 > w1024, "o(1) must shrink with n");
        assert!(w1024 <= 0.10, "bridge at n=1024: worst {w1024}");
    }
}
