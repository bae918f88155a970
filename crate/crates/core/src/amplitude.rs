use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Squared-norm tolerance for normalized amplitude sets.
pub const NORM_TOL: f64 = 1e-12;

/// Inclusive range of integer quantum numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexRange {
    pub lo: i64,
    pub hi: i64,
}

impl IndexRange {
    pub fn new(lo: i64, hi: i64) -> Self {
        assert!(lo <= hi, "empty index range [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> + Clone {
        self.lo..=self.hi
    }

    pub fn contains(&self, q: i64) -> bool {
        (self.lo..=self.hi).contains(&q)
    }
}

/// Normalized real amplitudes over a window of consecutive integers.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeVector {
    offset: i64,
    values: Vec<f64>,
    /// Probability mass dropped by truncating to this window, before renormalization.
    discarded_mass: f64,
}

impl AmplitudeVector {
    /// Validates and wraps already-normalized amplitudes.
    pub fn new(offset: i64, values: Vec<f64>) -> Result<Self> {
        Self::check_values(&values)?;
        let norm_sqr: f64 = values.iter().map(|v| v * v).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self {
            offset,
            values,
            discarded_mass: 0.0,
        })
    }

    /// Rescales `values` to unit norm, recording the truncated mass.
    pub(crate) fn renormalized(
        offset: i64,
        mut values: Vec<f64>,
        discarded_mass: f64,
    ) -> Result<Self> {
        Self::check_values(&values)?;
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized {
                norm_sqr: norm * norm,
            });
        }
        values.iter_mut().for_each(|v| *v /= norm);
        if discarded_mass > 1e-8 {
            log::warn!(
                "renormalized truncated amplitudes on [{}, {}]: discarded mass {:.3e}",
                offset,
                offset + values.len() as i64 - 1,
                discarded_mass
            );
        }
        Ok(Self {
            offset,
            values,
            discarded_mass,
        })
    }

    fn check_values(values: &[f64]) -> Result<()> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("empty amplitude vector".into()));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "amplitudes must be finite and non-negative, found {bad}"
            )));
        }
        Ok(())
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn range(&self) -> IndexRange {
        IndexRange::new(self.offset, self.offset + self.values.len() as i64 - 1)
    }

    pub fn discarded_mass(&self) -> f64 {
        self.discarded_mass
    }

    /// Amplitude at quantum number `q`; zero outside the window.
    pub fn get(&self, q: i64) -> f64 {
        let i = q - self.offset;
        if i < 0 {
            return 0.0;
        }
        self.values.get(i as usize).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.offset + i as i64, v))
    }

    /// Mean and variance of the distribution `|amplitude|^2`.
    pub fn moments(&self) -> (f64, f64) {
        let mean: f64 = self.iter().map(|(q, v)| q as f64 * v * v).sum();
        let var = self
            .iter()
            .map(|(q, v)| (q as f64 - mean).powi(2) * v * v)
            .sum();
        (mean, var)
    }
}

/// Field amplitudes `P[s, n]` over photon-number sum `s` and difference `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoIndexFieldAmplitudes {
    entries: BTreeMap<(u64, i64), Complex64>,
}

impl TwoIndexFieldAmplitudes {
    /// Rejects keys with `|n| > s` or `s - n` odd, and unnormalized input.
    pub fn new(entries: impl IntoIterator<Item = ((u64, i64), Complex64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for ((s, n), p) in entries {
            if !parity_ok(s, n) {
                return Err(Error::ParityViolation { s: s as i64, n });
            }
            *map.entry((s, n)).or_insert(Complex64::new(0.0, 0.0)) += p;
        }
        let norm_sqr: f64 = map.values().map(|p| p.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { entries: map })
    }

    /// Product of coherent states in the two circular polarizations with
    /// mean photon numbers `mean_plus` and `mean_minus`, truncated to at
    /// most `max_photons` per mode and renormalized.
    ///
    /// Returns the amplitudes with the probability mass lost to truncation.
    pub fn dual_coherent(mean_plus: f64, mean_minus: f64, max_photons: u64) -> Result<(Self, f64)> {
        for (name, v) in [("mean_plus", mean_plus), ("mean_minus", mean_minus)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        let plus = log_poisson_column(mean_plus, max_photons);
        let minus = log_poisson_column(mean_minus, max_photons);
        let mut raw = Vec::new();
        let mut kept = 0.0;
        for (np, lp) in plus.iter().enumerate() {
            for (nm, lm) in minus.iter().enumerate() {
                let prob = (lp + lm).exp();
                if prob == 0.0 {
                    continue;
                }
                kept += prob;
                let s = (np + nm) as u64;
                let n = np as i64 - nm as i64;
                raw.push(((s, n), prob));
            }
        }
        let entries = raw
            .into_iter()
            .map(|(key, prob)| (key, Complex64::new((prob / kept).sqrt(), 0.0)));
        Ok((Self::new(entries)?, (1.0 - kept).max(0.0)))
    }

    pub fn entries(&self) -> impl Iterator<Item = (u64, i64, Complex64)> + '_ {
        self.entries.iter().map(|(&(s, n), &p)| (s, n, p))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn parity_ok(s: u64, n: i64) -> bool {
    n.unsigned_abs() <= s && (s as i64 - n).rem_euclid(2) == 0
}

/// `ln Poisson(k; mean)` for `k = 0..=max`.
fn log_poisson_column(mean: f64, max: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(max as usize + 1);
    if mean == 0.0 {
        out.push(0.0);
        return out;
    }
    let ln_mean = mean.ln();
    let mut acc = -mean;
    out.push(acc);
    for k in 1..=max {
        acc += ln_mean - (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Collapses `P[s, n]` onto the photon-number difference:
/// `F[n] = sqrt(sum over s of |P[s, n]|^2)`.
pub fn collapse_field_amplitudes(p: &TwoIndexFieldAmplitudes) -> AmplitudeVector {
    let mut mass: BTreeMap<i64, f64> = BTreeMap::new();
    for (_, n, amp) in p.entries() {
        *mass.entry(n).or_default() += amp.norm_sqr();
    }
    let lo = *mass
        .keys()
        .next()
        .expect("normalized amplitudes are non-empty");
    let hi = *mass.keys().next_back().unwrap();
    let values = (lo..=hi)
        .map(|n| mass.get(&n).copied().unwrap_or(0.0).sqrt())
        .collect();
    AmplitudeVector::renormalized(lo, values, 0.0).expect("collapsed amplitudes are finite")
}
