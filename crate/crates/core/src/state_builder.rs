//! Initial amplitudes for atoms and field, and the time-evolved joint state.
//!
//! The joint coefficient matrix is `C[m, n] = A[m] F[n] exp(-2i tau m n)`
//! with `tau = g t / 2`. Rows run over the atom-number difference `m`,
//! columns over the photon-number difference `n`.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;

use crate::amplitude::{
    collapse_field_amplitudes, AmplitudeVector, IndexRange, TwoIndexFieldAmplitudes,
};
use crate::error::{invalid, Error, Result};

pub const DEFAULT_WINDOW_MULT: f64 = 5.0;
pub const MIN_WINDOW_MULT: f64 = 3.0;

/// Peak and width parameters of the Gaussian amplitude class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSpec {
    /// Atomic peak in units of atom-number difference.
    pub m0: f64,
    pub sigma_a: f64,
    /// Peak of the photon-number difference.
    pub n0: f64,
    pub sigma_f: f64,
    /// Total atom number; even so that `m` is integer.
    pub n_atoms: u32,
    /// Coupling rate in units of inverse time.
    pub g: f64,
}

impl GaussianSpec {
    /// Width-only spec with unit coupling and `N_A = 2 sigma_A^2` rounded to even.
    pub fn centered(sigma_a: f64, sigma_f: f64) -> Self {
        Self {
            m0: 0.0,
            sigma_a,
            n0: 0.0,
            sigma_f,
            n_atoms: even_atom_count(2.0 * sigma_a * sigma_a),
            g: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sigma_A", self.sigma_a),
            ("sigma_F", self.sigma_f),
            ("g", self.g),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        for (name, v) in [("m0", self.m0), ("n0", self.n0)] {
            if !v.is_finite() {
                return Err(invalid(format!("{name} must be finite, got {v}")));
            }
        }
        check_atom_number(self.n_atoms)?;
        let half_count = f64::from(self.n_atoms) / 2.0;
        let required = 2.0 * self.sigma_a + self.m0.abs();
        if half_count <= required {
            return Err(Error::GaussianOutsideGrid {
                half_count,
                required,
            });
        }
        Ok(())
    }

    pub fn atomic_grid(&self) -> IndexRange {
        let j = i64::from(self.n_atoms / 2);
        IndexRange::new(-j, j)
    }

    pub fn field_grid(&self, window_mult: f64) -> IndexRange {
        centered_window(self.n0, self.sigma_f, window_mult)
    }
}

/// Rounds `x` to the nearest even integer, at least 2.
pub fn even_atom_count(x: f64) -> u32 {
    let n = (x / 2.0).round().max(1.0) * 2.0;
    n as u32
}

fn check_atom_number(n_atoms: u32) -> Result<()> {
    if n_atoms == 0 || n_atoms % 2 == 1 {
        return Err(Error::OddAtomNumber(n_atoms));
    }
    Ok(())
}

fn check_window_mult(window_mult: f64) -> Result<()> {
    if !(window_mult.is_finite() && window_mult >= MIN_WINDOW_MULT) {
        return Err(invalid(format!(
            "window_mult must be >= {MIN_WINDOW_MULT}, got {window_mult}"
        )));
    }
    Ok(())
}

fn centered_window(center: f64, sigma: f64, window_mult: f64) -> IndexRange {
    let c = center.round() as i64;
    let w = (window_mult * sigma).ceil() as i64;
    IndexRange::new(c - w, c + w)
}

fn gaussian_amplitude(q: i64, center: f64, sigma: f64) -> f64 {
    let d = q as f64 - center;
    (-d * d / (sigma * sigma)).exp()
}

/// Fraction of the full-line squared mass of `exp(-(q-c)^2/sigma^2)` lying
/// outside `range`.
fn gaussian_tail_mass(range: IndexRange, center: f64, sigma: f64) -> f64 {
    let sq = |q: i64| gaussian_amplitude(q, center, sigma).powi(2);
    let inside: f64 = range.iter().map(sq).sum();
    let ext = (20.0 * sigma).ceil() as i64 + 1;
    let outside: f64 = (range.lo - ext..range.lo)
        .chain(range.hi + 1..=range.hi + ext)
        .map(sq)
        .sum();
    outside / (inside + outside)
}

fn sampled_gaussian(range: IndexRange, center: f64, sigma: f64) -> Result<AmplitudeVector> {
    let values = range
        .iter()
        .map(|q| gaussian_amplitude(q, center, sigma))
        .collect();
    let lost = gaussian_tail_mass(range, center, sigma);
    AmplitudeVector::renormalized(range.lo, values, lost)
}

/// `A[m] ∝ exp(-(m - m0)^2 / sigma_A^2)` over `m ∈ [-N_A/2, N_A/2]`.
pub fn build_atomic_gaussian(spec: &GaussianSpec) -> Result<AmplitudeVector> {
    spec.validate()?;
    sampled_gaussian(spec.atomic_grid(), spec.m0, spec.sigma_a)
}

/// `F[n] ∝ exp(-(n - n0)^2 / sigma_F^2)` over
/// `n ∈ round(n0) ± ceil(window_mult * sigma_F)`.
pub fn build_field_gaussian(spec: &GaussianSpec, window_mult: f64) -> Result<AmplitudeVector> {
    if !(spec.sigma_f.is_finite() && spec.sigma_f > 0.0) {
        return Err(invalid(format!(
            "sigma_F must be > 0, got {}",
            spec.sigma_f
        )));
    }
    if !spec.n0.is_finite() {
        return Err(invalid("n0 must be finite"));
    }
    check_window_mult(window_mult)?;
    sampled_gaussian(spec.field_grid(window_mult), spec.n0, spec.sigma_f)
}

/// Coherent states in both polarizations, collapsed onto the photon-number
/// difference. `|F[n]|^2` is the Skellam distribution with means
/// `mean_plus`, `mean_minus`.
///
/// The window is centred on `round(mean_plus - mean_minus)` with half-width
/// `ceil(window_mult * sigma_F)`, where `sigma_F = 2 sqrt(mean_plus + mean_minus)`
/// is the Gaussian width with the same variance.
pub fn preset_dual_coherent(
    mean_plus: f64,
    mean_minus: f64,
    window_mult: f64,
) -> Result<AmplitudeVector> {
    check_window_mult(window_mult)?;
    let big = mean_plus.max(mean_minus);
    if !big.is_finite() {
        return Err(invalid("coherent-state means must be finite"));
    }
    let max_photons = (big + 15.0 * big.sqrt() + 40.0).ceil() as u64;
    let (p, lost_to_cutoff) =
        TwoIndexFieldAmplitudes::dual_coherent(mean_plus, mean_minus, max_photons)?;
    let collapsed = collapse_field_amplitudes(&p);

    let sigma_f = 2.0 * (mean_plus + mean_minus).sqrt();
    let window = centered_window(mean_plus - mean_minus, sigma_f, window_mult);
    let values: Vec<f64> = window.iter().map(|n| collapsed.get(n)).collect();
    let kept: f64 = values.iter().map(|v| v * v).sum();
    let lost = lost_to_cutoff + (1.0 - kept).max(0.0);
    AmplitudeVector::renormalized(window.lo, values, lost)
}

/// Equatorial spin coherent state:
/// `A[m] = sqrt(binomial(N_A, N_A/2 + m) / 2^N_A)` for `m ∈ [-N_A/2, N_A/2]`.
pub fn preset_spin_coherent(n_atoms: u32) -> Result<AmplitudeVector> {
    check_atom_number(n_atoms)?;
    let n = u64::from(n_atoms);
    let ln_norm = n as f64 * std::f64::consts::LN_2;
    let mut ln_binom = 0.0;
    let mut values = Vec::with_capacity(n as usize + 1);
    for k in 0..=n {
        if k > 0 {
            ln_binom += ((n - k + 1) as f64).ln() - (k as f64).ln();
        }
        values.push((0.5 * (ln_binom - ln_norm)).exp());
    }
    AmplitudeVector::renormalized(-((n / 2) as i64), values, 0.0)
}

/// Time-evolved joint coefficient matrix with its index grids.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub m_grid: IndexRange,
    pub n_grid: IndexRange,
    /// Rows indexed by `m - m_grid.lo`, columns by `n - n_grid.lo`.
    pub coeffs: Mat<Complex64>,
    /// Dimensionless time `g t / 2`.
    pub tau: f64,
}

impl JointState {
    pub fn frobenius_norm(&self) -> f64 {
        self.coeffs.norm_l2()
    }

    /// Frobenius distance between two coefficient matrices on the same grids.
    pub fn frobenius_distance(&self, other: &JointState) -> f64 {
        assert_eq!((self.m_grid, self.n_grid), (other.m_grid, other.n_grid));
        (&self.coeffs - &other.coeffs).norm_l2()
    }

    pub fn get(&self, m: i64, n: i64) -> Complex64 {
        self.coeffs[((m - self.m_grid.lo) as usize, (n - self.n_grid.lo) as usize)]
    }

    /// Builds a state from a coefficient function `(m, n) -> C[m, n]`.
    pub fn from_fn(
        m_grid: IndexRange,
        n_grid: IndexRange,
        tau: f64,
        f: impl Fn(i64, i64) -> Complex64,
    ) -> Self {
        let coeffs = Mat::from_fn(m_grid.len(), n_grid.len(), |i, j| {
            f(m_grid.lo + i as i64, n_grid.lo + j as i64)
        });
        Self {
            m_grid,
            n_grid,
            coeffs,
            tau,
        }
    }
}

/// `C[m, n] = A[m] F[n] exp(-2i tau m n)`.
///
/// `tau` is reduced modulo π first; for integer `m` the phase has period π
/// in `tau`, and the reduction keeps `tau = π` bit-identical to `tau = 0`.
pub fn assemble_joint(atoms: &AmplitudeVector, field: &AmplitudeVector, tau: f64) -> JointState {
    let reduced = tau.rem_euclid(PI);
    JointState::from_fn(atoms.range(), field.range(), tau, |m, n| {
        let phase = -2.0 * reduced * (m * n) as f64;
        Complex64::from_polar(atoms.get(m) * field.get(n), phase)
    })
}
