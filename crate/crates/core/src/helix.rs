//! The limiting helix family of discretized Gumbel laws, the centering
//! sequence a_n, CDF distances between integer-supported laws, and the
//! cyclic-convergence report.
//!
//! A helix point F^a has strict CDF exp(-exp(-γ*(m - a))) on the integers.
//! The family is 1-periodic up to an integer shift: F^{a+1}{m+1} = F^a{m}.
//! The shift is kept structural — the parameter is stored as an integer part
//! plus a fractional part, so shifting by an integer relabels the support and
//! periodicity holds bit-exactly.

use std::io::{self, Write};

use crate::cumulant::{CumulantProfile, SolveError};
use crate::exactmax::{self, ExactMaxError, MaxLaw};
use crate::lattice::LatticePMF;

const WINDOW_EPS: f64 = 1e-12;

/// Margin of integers added around essential windows when comparing CDFs.
const DISTANCE_MARGIN: i64 = 5;

/// Anything with a strict CDF on the integers and a window outside which the
/// CDF is within 1e-12 of its limits.
pub trait IntegerCdf {
    /// P(X < m).
    fn cdf_strict(&self, m: i64) -> f64;
    /// `(lo, hi)` with `cdf_strict(lo) <= 1e-12` and
    /// `cdf_strict(hi) >= 1 - 1e-12`.
    fn essential_window(&self) -> (i64, i64);
}

/// One distribution F^a from the helix family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HelixPoint {
    gamma_star: f64,
    a_int: i64,
    a_frac: f64,
}

impl HelixPoint {
    pub fn new(gamma_star: f64, a: f64) -> Self {
        assert!(
            gamma_star.is_finite() && gamma_star > 0.0,
            "helix decay rate must be positive"
        );
        assert!(a.is_finite());
        let a_int = a.floor() as i64;
        Self {
            gamma_star,
            a_int,
            a_frac: a - a.floor(),
        }
    }

    pub fn gamma_star(&self) -> f64 {
        self.gamma_star
    }

    /// The location parameter a.
    pub fn a(&self) -> f64 {
        self.a_int as f64 + self.a_frac
    }

    /// The fractional part of a, in [0, 1): the position on the helix turn.
    pub fn a_frac(&self) -> f64 {
        self.a_frac
    }

    /// The helix point at parameter a + k. The shift enters through the
    /// integer part only, so `shifted(k).pmf(m + k)` is bit-identical to
    /// `pmf(m)`.
    pub fn shifted(&self, k: i64) -> Self {
        Self {
            a_int: self.a_int + k,
            ..*self
        }
    }

    /// P(X < m) = exp(-exp(-γ*(m - a))).
    pub fn cdf_strict(&self, m: i64) -> f64 {
        let t = (m - self.a_int) as f64 - self.a_frac;
        (-(-self.gamma_star * t).exp()).exp()
    }

    /// P(X = m).
    pub fn pmf(&self, m: i64) -> f64 {
        self.cdf_strict(m + 1) - self.cdf_strict(m)
    }

    /// Smallest window holding all mass except `eps` at each side.
    pub fn window_for_mass(&self, eps: f64) -> (i64, i64) {
        let mut lo = self.a_int;
        while self.cdf_strict(lo) > eps {
            lo -= 1;
        }
        let mut hi = lo + 1;
        while self.cdf_strict(hi) < 1.0 - eps {
            hi += 1;
        }
        (lo, hi)
    }
}

impl IntegerCdf for HelixPoint {
    fn cdf_strict(&self, m: i64) -> f64 {
        HelixPoint::cdf_strict(self, m)
    }

    fn essential_window(&self) -> (i64, i64) {
        self.window_for_mass(WINDOW_EPS)
    }
}

impl IntegerCdf for MaxLaw {
    fn cdf_strict(&self, m: i64) -> f64 {
        MaxLaw::cdf_strict(self, m)
    }

    fn essential_window(&self) -> (i64, i64) {
        self.window()
    }
}

/// The centering sequence
/// a_n = ρ*·n - ln(sqrt(2πn)·σ*·(1 - e^{-γ*})) / γ*.
pub fn centering(profile: &CumulantProfile, n: u32) -> f64 {
    let n_f = n as f64;
    let one_minus_exp = -(-profile.gamma_star).exp_m1();
    profile.rho_star * n_f
        - ((2.0 * std::f64::consts::PI * n_f).sqrt() * profile.sigma_star * one_minus_exp).ln()
            / profile.gamma_star
}

/// The helix point F^a for a solved profile.
pub fn helix_point(profile: &CumulantProfile, a: f64) -> HelixPoint {
    HelixPoint::new(profile.gamma_star, a)
}

/// Fractional part a - floor(a), in [0, 1).
pub fn frac(a: f64) -> f64 {
    a - a.floor()
}

/// Kolmogorov (sup-CDF) distance between two integer-supported laws,
/// evaluated over the union of their essential windows plus a margin.
pub fn kolmogorov_distance<X, Y>(x: &X, y: &Y) -> f64
where
    X: IntegerCdf + ?Sized,
    Y: IntegerCdf + ?Sized,
{
    let (xlo, xhi) = x.essential_window();
    let (ylo, yhi) = y.essential_window();
    let lo = xlo.min(ylo) - DISTANCE_MARGIN;
    let hi = xhi.max(yhi) + DISTANCE_MARGIN;
    let mut sup = 0.0_f64;
    for m in lo..=hi {
        sup = sup.max((x.cdf_strict(m) - y.cdf_strict(m)).abs());
    }
    sup
}

/// Total-variation distance, the secondary metric: half the sum of absolute
/// point-mass differences over the union window.
pub fn total_variation_distance<X, Y>(x: &X, y: &Y) -> f64
where
    X: IntegerCdf + ?Sized,
    Y: IntegerCdf + ?Sized,
{
    let (xlo, xhi) = x.essential_window();
    let (ylo, yhi) = y.essential_window();
    let lo = xlo.min(ylo) - DISTANCE_MARGIN;
    let hi = xhi.max(yhi) + DISTANCE_MARGIN;
    let mut sum = 0.0_f64;
    for m in lo..=hi {
        let px = x.cdf_strict(m + 1) - x.cdf_strict(m);
        let py = y.cdf_strict(m + 1) - y.cdf_strict(m);
        sum += (px - py).abs();
    }
    0.5 * sum
}

/// One row of the cyclic-convergence report.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicRow {
    pub n: u32,
    pub a_n: f64,
    pub frac_a_n: f64,
    /// Kolmogorov distance between the exact law of M_n and F^{a_n};
    /// `None` when the exact law is out of reach for this n.
    pub d_raw: Option<f64>,
    /// Distance between the floor(a_n)-centered law and F^{frac(a_n)}.
    pub d_centered: Option<f64>,
}

/// For each n: the exact law of M_n, its centering a_n, and the distances to
/// the matching helix points, raw and centered. Rows whose exact law hits
/// the underflow or support guards carry `None` distances.
pub fn cyclic_report(
    pmf: &LatticePMF,
    base: f64,
    n_list: &[u32],
) -> Result<Vec<CyclicRow>, SolveError> {
    let profile = crate::cumulant::solve_profile(pmf, base, crate::cumulant::DEFAULT_SOLVER_TOL)?;
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let a_n = centering(&profile, n);
        let frac_a_n = frac(a_n);
        let (d_raw, d_centered) = match exactmax::max_law_with_profile(pmf, n, &profile) {
            Ok(law) => {
                let raw = kolmogorov_distance(&law, &helix_point(&profile, a_n));
                let centered = exactmax::centered_law(&law, a_n.floor() as i64);
                let cen = kolmogorov_distance(&centered, &helix_point(&profile, frac_a_n));
                (Some(raw), Some(cen))
            }
            Err(ExactMaxError::Solve(e)) => return Err(e),
            Err(_) => (None, None),
        };
        rows.push(CyclicRow {
            n,
            a_n,
            frac_a_n,
            d_raw,
            d_centered,
        });
    }
    Ok(rows)
}

fn csv_cell(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v:.14e}"),
        None => "NA".to_string(),
    }
}

/// Serialize report rows as CSV with columns n, a_n, frac_a_n, d_raw,
/// d_centered; unavailable cells are "NA".
pub fn write_cyclic_csv<W: Write>(rows: &[CyclicRow], mut out: W) -> io::Result<()> {
    writeln!(out, "n,a_n,frac_a_n,d_raw,d_centered")?;
    for row in rows {
        writeln!(
            out,
            "{},{:.14e},{:.14e},{},{}",
            row.n,
            row.a_n,
            row.frac_a_n,
            csv_cell(row.d_raw),
            csv_cell(row.d_centered)
        )?;
    }
    Ok(())
}
