//! Exact arithmetic on finitely supported integer-lattice probability
//! distributions: construction, convolution, convolution powers, CDFs and
//! tails.
//!
//! Distributions are stored densely over consecutive integers with explicit
//! zeros for gaps; convolution powers fill gaps quickly and the dense layout
//! keeps accumulation simple. Tails are always summed from the top of the
//! support downward so that values of magnitude down to 1e-300 retain
//! relative accuracy.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::kahan::KahanSum;

/// Default cap on the support length produced by a convolution.
pub const DEFAULT_SUPPORT_CAP: usize = 10_000_000;

/// Raw-mass deviation from 1 accepted without an explicit renormalize request.
const MASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error("weight {weight} at value {value} is not a finite non-negative number")]
    NegativeWeight { value: i64, weight: f64 },
    #[error("no positive weight in the input")]
    AllZero,
    #[error(
        "weights sum to {total}, more than 1e-9 away from 1; renormalization was not requested"
    )]
    NotNormalized { total: f64 },
    #[error("convolution support would hold {len} points, above the cap of {cap}")]
    Overflow { len: usize, cap: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {reason}")]
pub struct PmfParseError {
    pub line: usize,
    pub reason: String,
}

/// A finitely supported probability mass function on the integers.
///
/// Weights are stored for the consecutive integers `support_min..=support_max`
/// (explicit zeros for gaps). The representation is trimmed: the first and
/// last stored weights are strictly positive, and the weights sum to 1 within
/// `1e-12`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticePMF {
    support_min: i64,
    probs: Vec<f64>,
}

impl LatticePMF {
    /// Build a PMF from `(value, weight)` pairs. Duplicate values are summed,
    /// the representation is trimmed to the first/last positive weight, and
    /// the weights are normalized. A raw mass further than `1e-9` from 1 is
    /// rejected; use [`LatticePMF::from_pairs_renormalized`] to accept it.
    pub fn from_pairs<I>(pairs: I) -> Result<Self, LatticeError>
    where
        I: IntoIterator<Item = (i64, f64)>,
    {
        Self::build(pairs, false)
    }

    /// Like [`LatticePMF::from_pairs`], but renormalizes any positive raw mass.
    pub fn from_pairs_renormalized<I>(pairs: I) -> Result<Self, LatticeError>
    where
        I: IntoIterator<Item = (i64, f64)>,
    {
        Self::build(pairs, true)
    }

    fn build<I>(pairs: I, renormalize: bool) -> Result<Self, LatticeError>
    where
        I: IntoIterator<Item = (i64, f64)>,
    {
        let mut by_value: BTreeMap<i64, f64> = BTreeMap::new();
        for (value, weight) in pairs {
            if !weight.is_finite() || weight < 0.0 {
                return Err(LatticeError::NegativeWeight { value, weight });
            }
            *by_value.entry(value).or_insert(0.0) += weight;
        }
        let lo = match by_value.iter().find(|(_, &w)| w > 0.0) {
            Some((&v, _)) => v,
            None => return Err(LatticeError::AllZero),
        };
        let hi = *by_value.iter().rev().find(|(_, &w)| w > 0.0).unwrap().0;

        let mut probs = vec![0.0; (hi - lo) as usize + 1];
        for (&v, &w) in by_value.range(lo..=hi) {
            probs[(v - lo) as usize] = w;
        }
        let total = KahanSum::sum_iter(probs.iter().copied());
        if !renormalize && (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(LatticeError::NotNormalized { total });
        }
        for w in &mut probs {
            *w /= total;
        }
        Ok(Self {
            support_min: lo,
            probs,
        })
    }

    /// Internal constructor for already-normalized weight vectors
    /// (convolution outputs). Trims zero edges, never renormalizes.
    pub(crate) fn from_trusted(support_min: i64, probs: Vec<f64>) -> Self {
        let first = probs.iter().position(|&w| w > 0.0).expect("empty pmf");
        let last = probs.iter().rposition(|&w| w > 0.0).unwrap();
        let trimmed: Vec<f64> = probs[first..=last].to_vec();
        Self {
            support_min: support_min + first as i64,
            probs: trimmed,
        }
    }

    /// Point mass at `value`.
    pub fn delta(value: i64) -> Self {
        Self {
            support_min: value,
            probs: vec![1.0],
        }
    }

    /// The `{0,1}`-valued Bernoulli law with success probability `p`.
    pub fn bernoulli(p: f64) -> Result<Self, LatticeError> {
        Self::from_pairs([(0, 1.0 - p), (1, p)])
    }

    pub fn support_min(&self) -> i64 {
        self.support_min
    }

    pub fn support_max(&self) -> i64 {
        self.support_min + self.probs.len() as i64 - 1
    }

    /// Top of the support: the largest value with positive mass.
    pub fn omega(&self) -> i64 {
        self.support_max()
    }

    /// Mass at the top of the support.
    pub fn top_mass(&self) -> f64 {
        *self.probs.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// P(X = m); zero outside the stored support.
    pub fn prob(&self, m: i64) -> f64 {
        if m < self.support_min || m > self.support_max() {
            0.0
        } else {
            self.probs[(m - self.support_min) as usize]
        }
    }

    /// Number of strictly positive weights.
    pub fn positive_support_points(&self) -> usize {
        self.probs.iter().filter(|&&w| w > 0.0).count()
    }

    /// Iterate over `(value, weight)` pairs of the stored support.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, &w)| (self.support_min + i as i64, w))
    }

    /// Total stored mass (1 within rounding; useful for diagnostics).
    pub fn total_mass(&self) -> f64 {
        KahanSum::sum_iter(self.probs.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        let mut acc = KahanSum::new();
        for (v, w) in self.iter() {
            acc.add(w * v as f64);
        }
        acc.value()
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        let mut acc = KahanSum::new();
        for (v, w) in self.iter() {
            let d = v as f64 - mu;
            acc.add(w * d * d);
        }
        acc.value()
    }

    /// Strict CDF P(X < m). Exactly 0 for `m <= support_min` and exactly 1
    /// for `m > support_max`; otherwise a compensated sum from the bottom of
    /// the support upward.
    pub fn cdf_strict(&self, m: i64) -> f64 {
        if m <= self.support_min {
            return 0.0;
        }
        if m > self.support_max() {
            return 1.0;
        }
        let upper = (m - self.support_min) as usize;
        KahanSum::sum_iter(self.probs[..upper].iter().copied())
    }

    /// Upper tail P(X >= m), summed from the top of the support downward
    /// (never as 1 - CDF), so that tails of magnitude down to 1e-300 keep
    /// relative accuracy.
    pub fn tail(&self, m: i64) -> f64 {
        if m <= self.support_min {
            return 1.0;
        }
        if m > self.support_max() {
            return 0.0;
        }
        let lower = (m - self.support_min) as usize;
        KahanSum::sum_iter(self.probs[lower..].iter().rev().copied())
    }
}

/// Exact law of X + Y for independent X ~ `a`, Y ~ `b`, with the default
/// support cap.
pub fn convolve(a: &LatticePMF, b: &LatticePMF) -> Result<LatticePMF, LatticeError> {
    convolve_with_cap(a, b, DEFAULT_SUPPORT_CAP)
}

/// [`convolve`] with an explicit cap on the output support length.
pub fn convolve_with_cap(
    a: &LatticePMF,
    b: &LatticePMF,
    cap: usize,
) -> Result<LatticePMF, LatticeError> {
    let out_len = a.probs.len() + b.probs.len() - 1;
    if out_len > cap {
        return Err(LatticeError::Overflow { len: out_len, cap });
    }
    let (short, long) = if a.probs.len() <= b.probs.len() {
        (&a.probs, &b.probs)
    } else {
        (&b.probs, &a.probs)
    };
    let mut out = Vec::with_capacity(out_len);
    for k in 0..out_len {
        // out[k] = sum over i of short[i] * long[k - i], compensated.
        let i_lo = k.saturating_sub(long.len() - 1);
        let i_hi = (short.len() - 1).min(k);
        let mut acc = KahanSum::new();
        for i in i_lo..=i_hi {
            acc.add(short[i] * long[k - i]);
        }
        out.push(acc.value());
    }
    Ok(LatticePMF::from_trusted(a.support_min + b.support_min, out))
}

/// Exact law of S_n = X_1 + ... + X_n for i.i.d. X_i ~ `a`, by binary
/// powering. Matches the n-fold iterated convolution within 1e-12 per weight.
pub fn convolution_power(a: &LatticePMF, n: u32) -> Result<LatticePMF, LatticeError> {
    convolution_power_with_cap(a, n, DEFAULT_SUPPORT_CAP)
}

pub fn convolution_power_with_cap(
    a: &LatticePMF,
    n: u32,
    cap: usize,
) -> Result<LatticePMF, LatticeError> {
    assert!(n >= 1, "convolution power needs n >= 1");
    let mut result: Option<LatticePMF> = None;
    let mut base = a.clone();
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => convolve_with_cap(&r, &base, cap)?,
            });
        }
        k >>= 1;
        if k > 0 {
            base = convolve_with_cap(&base, &base, cap)?;
        }
    }
    Ok(result.unwrap())
}

/// Parse the PMF text format: one `<integer value> <decimal probability>`
/// record per line, `#` comments and blank lines ignored, values in any
/// order, duplicates summed (by [`LatticePMF::from_pairs`] downstream).
pub fn parse_pmf_pairs(text: &str) -> Result<Vec<(i64, f64)>, PmfParseError> {
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let mut fields = content.split_whitespace();
        let (value_tok, weight_tok) = match (fields.next(), fields.next(), fields.next()) {
            (Some(v), Some(w), None) => (v, w),
            _ => {
                return Err(PmfParseError {
                    line,
                    reason: "expected exactly two fields: <integer value> <probability>".into(),
                })
            }
        };
        let value: i64 = value_tok.parse().map_err(|_| PmfParseError {
            line,
            reason: format!("invalid integer value {value_tok:?}"),
        })?;
        let weight: f64 = weight_tok.parse().map_err(|_| PmfParseError {
            line,
            reason: format!("invalid probability {weight_tok:?}"),
        })?;
        pairs.push((value, weight));
    }
    Ok(pairs)
}
