//! Closed-form Schmidt decomposition of the Gaussian amplitude class.
//!
//! A Gaussian kernel with bilinear phase `exp(-2i tau x y)` factorizes into
//! Hermite-Gaussian modes with geometric weights `(1 - μ²) μ^(2k)`. The
//! mode widths shrink by the factor `ξ` as entanglement builds up.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::amplitude::IndexRange;
use crate::error::{invalid, Error, Result};
use crate::hermite::hermite_functions;
use crate::state_builder::GaussianSpec;

/// Tail mass below which the analytic spectrum is truncated.
pub const SPECTRUM_TAIL_TOL: f64 = 1e-12;

/// Time-law triplet `(τ, μ, ξ)` with `x = σ_A σ_F τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MehlerParams {
    pub tau: f64,
    pub x: f64,
    /// `(sqrt(1 + x²) - 1) / x`, in `[0, 1)`.
    pub mu: f64,
    /// `sqrt(2) (1 + x²)^(1/4)`.
    pub xi: f64,
    /// `1 - μ²`, computed as `2 / (sqrt(1 + x²) + 1)` to stay accurate as μ → 1.
    one_minus_mu_sq: f64,
}

impl MehlerParams {
    pub fn from_x(tau: f64, x: f64) -> Self {
        let s = x.hypot(1.0);
        // x / (s + 1) is the cancellation-free form of (s - 1) / x and
        // equals the series limit x / 2 as x -> 0.
        let mu = x / (s + 1.0);
        Self {
            tau,
            x,
            mu,
            xi: SQRT_2 * s.sqrt(),
            one_minus_mu_sq: 2.0 / (s + 1.0),
        }
    }

    pub fn one_minus_mu_sq(&self) -> f64 {
        self.one_minus_mu_sq
    }

    pub fn mu_sq(&self) -> f64 {
        self.mu * self.mu
    }
}

fn check_width(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite and > 0, got {v}")))
    }
}

pub fn mehler_params(sigma_a: f64, sigma_f: f64, tau: f64) -> Result<MehlerParams> {
    check_width("sigma_A", sigma_a)?;
    check_width("sigma_F", sigma_f)?;
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(invalid(format!("tau must be finite and >= 0, got {tau}")));
    }
    Ok(MehlerParams::from_x(tau, sigma_a * sigma_f * tau))
}

/// Geometric Schmidt spectrum `λ_k = (1 - μ²) μ^(2k)`, `k = 0..=k_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticSpectrum {
    pub params: MehlerParams,
    pub k_max: usize,
}

impl AnalyticSpectrum {
    /// `k_max` is the smallest `K` with `μ^(2(K+1)) < 1e-12`.
    pub fn new(params: MehlerParams) -> Self {
        let mu_sq = params.mu_sq();
        let mut k_max = if mu_sq == 0.0 {
            0
        } else {
            (SPECTRUM_TAIL_TOL.ln() / mu_sq.ln()).floor().max(1.0) as usize - 1
        };
        while mu_sq.powi(k_max as i32 + 1) >= SPECTRUM_TAIL_TOL {
            k_max += 1;
        }
        while k_max > 0 && mu_sq.powi(k_max as i32) < SPECTRUM_TAIL_TOL {
            k_max -= 1;
        }
        Self { params, k_max }
    }

    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.params.one_minus_mu_sq * self.params.mu_sq().powi(k as i32)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        (0..=self.k_max).map(|k| self.eigenvalue(k)).collect()
    }

    /// Mass beyond `k_max`: `μ^(2(k_max+1))`.
    pub fn tail(&self) -> f64 {
        self.params.mu_sq().powi(self.k_max as i32 + 1)
    }
}

/// `S = -[μ²/(1-μ²) ln μ² + ln(1-μ²)]`.
pub fn analytic_entropy(params: &MehlerParams) -> f64 {
    if params.mu == 0.0 {
        return 0.0;
    }
    let s = params.x.hypot(1.0);
    // μ²/(1-μ²) = x²/(2(s+1)) and -ln(1-μ²) = ln(1 + μ²/(1-μ²))
    let ratio = params.x * params.x / (2.0 * (s + 1.0));
    ratio.ln_1p() - 2.0 * ratio * params.mu.ln()
}

/// `K = sqrt(1 + x²)`.
pub fn analytic_schmidt_number(params: &MehlerParams) -> f64 {
    let k = params.x.hypot(1.0);
    debug_assert!((k - schmidt_number_dual_form(params)).abs() <= 1e-12 * k);
    k
}

/// `(1 + μ²) / (1 - μ²)`, the same quantity through the spectrum.
pub fn schmidt_number_dual_form(params: &MehlerParams) -> f64 {
    let c = params.one_minus_mu_sq;
    (2.0 - c) / c
}

/// `τ_B = 1 / max(σ_A, σ_F)`.
pub fn break_time(sigma_a: f64, sigma_f: f64) -> Result<f64> {
    check_width("sigma_A", sigma_a)?;
    check_width("sigma_F", sigma_f)?;
    Ok(1.0 / sigma_a.max(sigma_f))
}

/// Half-wavelength, in grid units, of the fastest oscillation of mode `k`
/// near its centre.
pub fn mode_half_wavelength(k: usize, width: f64, scale_xi: f64) -> f64 {
    PI * width / (scale_xi * ((2 * k + 1) as f64).sqrt())
}

/// `(-i)^(k/2)` on the principal branch, `exp(-iπk/4)`.
pub fn mode_phase(k: usize) -> Complex64 {
    Complex64::from_polar(1.0, -PI * k as f64 / 4.0)
}

/// Continuum-normalized oscillator mode
/// `sqrt(ξ/w) (-i)^(k/2) h_k(ξ (z - c) / w)` sampled on `grid`.
///
/// Fails once the mode oscillates faster than the integer grid can resolve.
pub fn hermite_mode(
    k: usize,
    width: f64,
    scale_xi: f64,
    center: f64,
    grid: IndexRange,
) -> Result<Vec<Complex64>> {
    check_width("width", width)?;
    check_width("scale_xi", scale_xi)?;
    let half_wavelength = mode_half_wavelength(k, width, scale_xi);
    if half_wavelength < 1.0 {
        return Err(Error::ModeUnresolved { k, half_wavelength });
    }
    let amp = (scale_xi / width).sqrt();
    let phase = mode_phase(k);
    Ok(grid
        .iter()
        .map(|z| {
            let arg = scale_xi * (z as f64 - center) / width;
            phase * (amp * hermite_functions(k, arg)[k])
        })
        .collect())
}

/// Whether to apply the peak-dependent local phases to analytic modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseTwist {
    Applied,
    /// Bare Hermite modes; only for ablation against the numeric modes.
    Omitted,
}

/// Analytic atomic and field Schmidt modes of order `k`.
///
/// Atomic: `U_k(m - m0) exp(i n0 (m0 - 2m) τ)`;
/// field: `V_k(n - n0) exp(i m0 (n0 - 2n) τ)`.
pub fn analytic_schmidt_modes(
    spec: &GaussianSpec,
    m_grid: IndexRange,
    n_grid: IndexRange,
    tau: f64,
    k: usize,
    twist: PhaseTwist,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let params = mehler_params(spec.sigma_a, spec.sigma_f, tau)?;
    let mut atomic = hermite_mode(k, spec.sigma_a, params.xi, spec.m0, m_grid)?;
    let mut field = hermite_mode(k, spec.sigma_f, params.xi, spec.n0, n_grid)?;
    if twist == PhaseTwist::Applied {
        for (u, m) in atomic.iter_mut().zip(m_grid.iter()) {
            *u *= Complex64::from_polar(1.0, spec.n0 * (spec.m0 - 2.0 * m as f64) * tau);
        }
        for (v, n) in field.iter_mut().zip(n_grid.iter()) {
            *v *= Complex64::from_polar(1.0, spec.m0 * (spec.n0 - 2.0 * n as f64) * tau);
        }
    }
    Ok((atomic, field))
}

/// Number of Mehler terms whose geometric tail bound falls below `tol`.
///
/// Uses `|U_k V_k| <= ξ / sqrt(π σ_A σ_F)`, so the tail after `N` terms is
/// at most `sqrt(1-μ²) ξ / sqrt(π σ_A σ_F) μ^N / (1 - μ)`.
pub fn mehler_terms_for(params: &MehlerParams, sigma_a: f64, sigma_f: f64, tol: f64) -> usize {
    if params.mu == 0.0 {
        return 1;
    }
    let bound = params.one_minus_mu_sq.sqrt() * params.xi
        / (PI * sigma_a * sigma_f).sqrt()
        / (1.0 - params.mu);
    let n = ((tol / bound).ln() / params.mu.ln()).ceil();
    n.max(1.0) as usize
}

/// `|LHS - RHS|` of the Mehler factorization at `(x, y)`, with the
/// right-hand side truncated to `terms` modes.
///
/// LHS: `sqrt(2/(π σ_A σ_F)) exp(-x²/σ_A² - y²/σ_F²) exp(-2i τ x y)`;
/// RHS: `sqrt(1-μ²) Σ_{k<terms} μ^k U_k(x) V_k(y)`.
pub fn mehler_identity_check(
    x: f64,
    y: f64,
    tau: f64,
    sigma_a: f64,
    sigma_f: f64,
    terms: usize,
) -> Result<f64> {
    if terms == 0 {
        return Err(invalid("terms must be >= 1"));
    }
    let p = mehler_params(sigma_a, sigma_f, tau)?;
    let lhs = Complex64::from_polar(
        (2.0 / (PI * sigma_a * sigma_f)).sqrt()
            * (-x * x / (sigma_a * sigma_a) - y * y / (sigma_f * sigma_f)).exp(),
        -2.0 * tau * x * y,
    );
    let hu = hermite_functions(terms - 1, p.xi * x / sigma_a);
    let hv = hermite_functions(terms - 1, p.xi * y / sigma_f);
    let scale = p.xi / (sigma_a * sigma_f).sqrt();
    let mut rhs = Complex64::new(0.0, 0.0);
    let mut weight = 1.0;
    for k in 0..terms {
        // (-i)^(k/2) on each side multiplies to (-i)^k
        rhs += mode_phase(k) * mode_phase(k) * (weight * hu[k] * hv[k]);
        weight *= p.mu;
    }
    rhs *= p.one_minus_mu_sq.sqrt() * scale;
    Ok((lhs - rhs).norm())
}
