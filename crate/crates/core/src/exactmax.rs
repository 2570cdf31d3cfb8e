//! The exact law of M_n = max of b^n independent copies of S_n, computed
//! entirely in log domain through the identity
//! ln P(M_n < m) = b^n · ln P(S_n < m).
//!
//! No simulation: P(M_n < m) is a deterministic functional of the CDF of
//! S_n. The law is materialized on an integer window around the centering
//! sequence a_n, chosen so the window edges carry CDF mass below 1e-12 and
//! above 1 - 1e-12.

use thiserror::Error;

use crate::cumulant::{self, CumulantProfile, SolveError};
use crate::helix;
use crate::kahan::KahanSum;
use crate::lattice::{self, LatticeError, LatticePMF};

/// Smallest S_n weight the double-precision pipeline is allowed to carry.
const MIN_RETAINED_WEIGHT: f64 = 1e-300;

/// Window edges: P(M_n < m_lo) <= WINDOW_EPS, P(M_n < m_hi) >= 1 - WINDOW_EPS.
const WINDOW_EPS: f64 = 1e-12;

/// Below this tail mass, ln(1 - T) switches to the explicit series
/// -(T + T²/2 + T³/3) to preserve relative accuracy.
const SERIES_SWITCH: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExactMaxError {
    #[error("underflow risk: the law of S_n at n = {n} holds weights below 1e-300")]
    UnderflowRisk { n: u32 },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// The exact integer-supported law of M_n, stored as log-CDF values over a
/// window `[m_lo, m_hi]` that captures essentially all the mass.
#[derive(Debug, Clone)]
pub struct MaxLaw {
    n: u32,
    base: f64,
    copies_log: f64,
    m_lo: i64,
    log_cdf: Vec<f64>,
    profile: CumulantProfile,
}

impl MaxLaw {
    pub(crate) fn from_raw(
        n: u32,
        base: f64,
        m_lo: i64,
        log_cdf: Vec<f64>,
        profile: CumulantProfile,
    ) -> Self {
        let copies_log = n as f64 * base.ln();
        Self {
            n,
            base,
            copies_log,
            m_lo,
            log_cdf,
            profile,
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    /// n · ln b, the log of the copy count.
    pub fn copies_log(&self) -> f64 {
        self.copies_log
    }

    /// The stored window `(m_lo, m_hi)`, inclusive.
    pub fn window(&self) -> (i64, i64) {
        (self.m_lo, self.m_lo + self.log_cdf.len() as i64 - 1)
    }

    pub fn profile(&self) -> &CumulantProfile {
        &self.profile
    }

    pub fn log_cdf_values(&self) -> &[f64] {
        &self.log_cdf
    }

    /// ln P(M_n < m), clamped to the window edges outside the window (the
    /// clamping error is below the 1e-12 edge mass).
    pub fn log_cdf(&self, m: i64) -> f64 {
        let idx = (m - self.m_lo).clamp(0, self.log_cdf.len() as i64 - 1) as usize;
        self.log_cdf[idx]
    }

    /// P(M_n < m).
    pub fn cdf_strict(&self, m: i64) -> f64 {
        self.log_cdf(m).exp()
    }

    /// P(M_n = m).
    pub fn pmf(&self, m: i64) -> f64 {
        self.cdf_strict(m + 1) - self.cdf_strict(m)
    }
}

/// ln P(M_n < m) from the tail T = P(S_n >= m) and the log copy count:
/// -exp(copies_log + ln(-ln(1 - T))).
fn log_cdf_from_tail(tail: f64, copies_log: f64) -> f64 {
    let ln_u = if tail >= SERIES_SWITCH {
        (-(-tail).ln_1p()).ln()
    } else if tail > 0.0 {
        tail.ln() + (tail / 2.0 + tail * tail / 3.0).ln_1p()
    } else {
        return 0.0;
    };
    let lc = -(copies_log + ln_u).exp();
    if lc == 0.0 {
        0.0
    } else {
        lc
    }
}

/// Compute the exact law of M_n = max over b^n copies of S_n.
///
/// Solves the tilt profile (used for the window anchor a_n), raises the law
/// to the n-th convolution power, and evaluates the log-CDF over a window
/// around a_n. Any base b > 1 is accepted; for non-integer b^n the law is
/// the natural interpolation with copy count exp(n ln b).
pub fn max_law(pmf: &LatticePMF, n: u32, base: f64) -> Result<MaxLaw, ExactMaxError> {
    let profile = cumulant::solve_profile(pmf, base, cumulant::DEFAULT_SOLVER_TOL)?;
    max_law_with_profile(pmf, n, &profile)
}

/// [`max_law`] with an already-solved profile (the base is taken from it).
pub fn max_law_with_profile(
    pmf: &LatticePMF,
    n: u32,
    profile: &CumulantProfile,
) -> Result<MaxLaw, ExactMaxError> {
    assert!(n >= 1, "max_law needs n >= 1");
    let sum_law = lattice::convolution_power(pmf, n)?;
    if sum_law
        .probs()
        .iter()
        .any(|&w| w > 0.0 && w < MIN_RETAINED_WEIGHT)
    {
        return Err(ExactMaxError::UnderflowRisk { n });
    }
    let copies_log = n as f64 * profile.base.ln();

    // Suffix tails T(m) = P(S_n >= m) in one compensated top-down pass,
    // clamped monotone against sub-ulp accumulator wiggle.
    let s_min = sum_law.support_min();
    let s_max = sum_law.support_max();
    let len = sum_law.len();
    let mut tails = vec![0.0_f64; len + 1]; // tails[i] = P(S_n >= s_min + i)
    let mut acc = KahanSum::new();
    let mut prev = 0.0;
    for i in (0..len).rev() {
        acc.add(sum_law.probs()[i]);
        let t = acc.value().max(prev);
        tails[i] = t;
        prev = t;
    }
    let tail_at = |m: i64| -> f64 {
        if m <= s_min {
            1.0
        } else if m > s_max {
            0.0
        } else {
            tails[(m - s_min) as usize]
        }
    };

    let anchor = (helix::centering(profile, n).floor() as i64).clamp(s_min, s_max + 1);
    let lo_stop = WINDOW_EPS.ln();
    let hi_stop = (-WINDOW_EPS).ln_1p(); // ln(1 - eps)

    let mut below = Vec::new(); // anchor downwards
    let mut m = anchor;
    loop {
        let lc = log_cdf_from_tail(tail_at(m), copies_log);
        below.push(lc);
        if lc <= lo_stop {
            break;
        }
        m -= 1;
    }
    let m_lo = m;
    below.reverse();

    let mut log_cdf = below;
    let mut m = anchor + 1;
    while *log_cdf.last().unwrap() < hi_stop {
        log_cdf.push(log_cdf_from_tail(tail_at(m), copies_log));
        m += 1;
    }

    // Guard the non-decreasing invariant against sub-ulp rounding in the
    // ln/exp chain.
    for i in 1..log_cdf.len() {
        if log_cdf[i] < log_cdf[i - 1] {
            log_cdf[i] = log_cdf[i - 1];
        }
    }

    Ok(MaxLaw::from_raw(n, profile.base, m_lo, log_cdf, *profile))
}

/// Relabel the law of M_n as the law of M_n - shift. Pure reindexing.
pub fn centered_law(law: &MaxLaw, shift: i64) -> MaxLaw {
    MaxLaw {
        n: law.n,
        base: law.base,
        copies_log: law.copies_log,
        m_lo: law.m_lo - shift,
        log_cdf: law.log_cdf.clone(),
        profile: law.profile,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bern(p: f64) -> LatticePMF {
        LatticePMF::bernoulli(p).unwrap()
    }

    #[test]
    fn single_summand_two_copies() {
        let law = max_law(&bern(0.3), 1, 2.0).unwrap();
        assert_abs_diff_eq!(law.cdf_strict(1), 0.49, epsilon = 1e-12);
        assert_eq!(law.cdf_strict(0), 0.0);
        assert_eq!(law.cdf_strict(2), 1.0);
    }

    #[test]
    fn matches_naive_cdf_power_up_to_n6() {
        let b = bern(0.3);
        for n in 1..=6u32 {
            let law = max_law(&b, n, 2.0).unwrap();
            let s = lattice::convolution_power(&b, n).unwrap();
            let copies = 2.0_f64.powi(n as i32);
            let (lo, hi) = law.window();
            for m in lo..=hi {
                let naive = s.cdf_strict(m).powf(copies);
                if naive >= 1e-300 {
                    assert!(
                        (law.cdf_strict(m) - naive).abs() <= 1e-12,
                        "n={n} m={m}: {} vs {naive}",
                        law.cdf_strict(m)
                    );
                }
            }
        }
    }

    #[test]
    fn window_invariants() {
        for n in [1u32, 4, 16, 32, 64] {
            let law = max_law(&bern(0.3), n, 2.0).unwrap();
            let (lo, hi) = law.window();
            assert!(law.cdf_strict(lo) <= 1e-12);
            assert!(law.cdf_strict(hi) >= 1.0 - 1e-12);
            let values = law.log_cdf_values();
            for w in values.windows(2) {
                assert!(w[0] <= w[1], "log-CDF must be non-decreasing");
            }
            assert!(values.iter().all(|&v| v <= 0.0));
        }
    }

    #[test]
    fn window_width_stays_small() {
        for n in [16u32, 32, 64] {
            let law = max_law(&bern(0.3), n, 2.0).unwrap();
            let (lo, hi) = law.window();
            let interior = (lo..=hi)
                .filter(|&m| {
                    let f = law.cdf_strict(m);
                    f > 1e-12 && f < 1.0 - 1e-12
                })
                .count();
            assert!(interior < 40, "n={n}: interior width {interior}");
        }
    }

    #[test]
    fn centering_by_floor_a_n_puts_median_near_origin() {
        let law = max_law(&bern(0.3), 32, 2.0).unwrap();
        let a_n = helix::centering(law.profile(), 32);
        let centered = centered_law(&law, a_n.floor() as i64);
        let (lo, hi) = centered.window();
        let median = (lo..=hi)
            .find(|&m| centered.cdf_strict(m + 1) >= 0.5)
            .expect("median inside the window");
        assert!(median.abs() <= 3, "centered median {median}");
    }

    #[test]
    fn centered_law_is_pure_relabeling() {
        let law = max_law(&bern(0.3), 8, 2.0).unwrap();
        let same = centered_law(&law, 0);
        assert_eq!(law.window(), same.window());
        assert_eq!(law.log_cdf_values(), same.log_cdf_values());
        let round_trip = centered_law(&centered_law(&law, 11), -11);
        assert_eq!(law.window(), round_trip.window());
        assert_eq!(law.log_cdf_values(), round_trip.log_cdf_values());
        let shifted = centered_law(&law, 3);
        for m in law.window().0..=law.window().1 {
            assert_eq!(law.log_cdf(m), shifted.log_cdf(m - 3));
        }
    }

    #[test]
    fn underflow_guard_triggers() {
        // 0.3^600 < 1e-300: the convolution pipeline must refuse.
        assert!(matches!(
            max_law(&bern(0.3), 600, 2.0),
            Err(ExactMaxError::UnderflowRisk { n: 600 })
        ));
    }

    #[test]
    fn solver_errors_propagate() {
        assert!(matches!(
            max_law(&bern(0.6), 4, 2.0),
            Err(ExactMaxError::Solve(SolveError::NoSolution { .. }))
        ));
    }

    #[test]
    fn non_integer_base_accepted() {
        let law = max_law(&bern(0.3), 8, 1.5).unwrap();
        assert_abs_diff_eq!(law.copies_log(), 8.0 * 1.5_f64.ln(), epsilon = 0.0);
        let (lo, hi) = law.window();
        assert!(law.cdf_strict(lo) <= 1e-12 && law.cdf_strict(hi) >= 1.0 - 1e-12);
    }

    #[test]
    fn deep_tail_series_branch_is_accurate() {
        // T = 1e-12 exercises the series branch; compare against ln1p.
        let lc_series = log_cdf_from_tail(1e-12, 10.0 * 2.0_f64.ln());
        let expected = 2.0_f64.powi(10) * (-1e-12_f64).ln_1p();
        assert!((lc_series - expected).abs() <= expected.abs() * 1e-12);
        assert_eq!(log_cdf_from_tail(0.0, 100.0), 0.0);
        assert!(log_cdf_from_tail(0.0, 100.0).is_sign_positive());
    }
}
