//! Leaky-cavity input-output phases and the entanglement of the output field.
//!
//! For atom-number difference `m` the `±` polarization sees the cavity
//! resonance shifted by `± g m`, so the reflected field picks up
//! `exp(2i θ_±(ω; m))` with
//! `exp(2i θ_±) = (κ + iδ ∓ i g m) / (κ - iδ ± i g m)`,
//! `δ = ω - ω_c - g N_A / 2`.

use num_complex::Complex64;

use crate::amplitude::AmplitudeVector;
use crate::analytic::{analytic_schmidt_number, MehlerParams};
use crate::error::{invalid, Error, Result};
use crate::state_builder::JointState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    /// Cavity field decay rate.
    pub kappa_c: f64,
    /// Cavity resonance frequency.
    pub omega_c: f64,
    pub g: f64,
    pub n_atoms: u32,
}

impl CavityParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa_c.is_finite() && self.kappa_c > 0.0) {
            return Err(invalid(format!(
                "kappa_c must be > 0, got {}",
                self.kappa_c
            )));
        }
        if !(self.g.is_finite() && self.g > 0.0) {
            return Err(invalid(format!("g must be > 0, got {}", self.g)));
        }
        if !self.omega_c.is_finite() {
            return Err(invalid("omega_c must be finite"));
        }
        if self.n_atoms % 2 == 1 {
            return Err(Error::OddAtomNumber(self.n_atoms));
        }
        Ok(())
    }

    /// `δ = ω - ω_c - g N_A / 2`.
    pub fn detuning(&self, omega: f64) -> f64 {
        omega - self.omega_c - self.g * f64::from(self.n_atoms) / 2.0
    }

    /// The `ω` at which `δ = 0`.
    pub fn resonant_omega(&self) -> f64 {
        self.omega_c + self.g * f64::from(self.n_atoms) / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    Plus,
    Minus,
}

impl Polarization {
    fn sign(self) -> f64 {
        match self {
            Polarization::Plus => 1.0,
            Polarization::Minus => -1.0,
        }
    }
}

/// The unimodular reflection factor `exp(2i θ_±(ω; m))`.
pub fn phase_factor(params: &CavityParams, omega: f64, m: i64, pol: Polarization) -> Complex64 {
    let delta = params.detuning(omega);
    let shift = pol.sign() * params.g * m as f64;
    let num = Complex64::new(params.kappa_c, delta - shift);
    num / num.conj()
}

/// `θ_±(ω; m)`, half the argument of [`phase_factor`].
///
/// The ratio is `z / z̄` with `z = κ + i(δ ∓ g m)`, so `θ = arg z`. With
/// `κ > 0` this lies in `(-π/2, π/2)`, is continuous in `δ` and `m`, and
/// vanishes at `δ = g m = 0`.
pub fn exact_phase(params: &CavityParams, omega: f64, m: i64, pol: Polarization) -> f64 {
    let delta = params.detuning(omega);
    let shift = pol.sign() * params.g * m as f64;
    (delta - shift).atan2(params.kappa_c)
}

/// `θ_0(ω) = atan(δ / κ)`.
pub fn theta0(params: &CavityParams, omega: f64) -> f64 {
    params.detuning(omega).atan2(params.kappa_c)
}

/// Bad-cavity approximation `θ_± ≈ θ_0(ω) ∓ g m / κ`.
///
/// Valid for `κ ≫ g|m|` and `κ² ≫ δ²`; see [`bad_cavity_regime`].
pub fn bad_cavity_phase(params: &CavityParams, omega: f64, m: i64, pol: Polarization) -> f64 {
    theta0(params, omega) - pol.sign() * params.g * m as f64 / params.kappa_c
}

/// `(g|m|/κ, |δ|/κ)`; both should be small for the bad-cavity phase to hold.
pub fn bad_cavity_regime(params: &CavityParams, omega: f64, m: i64) -> (f64, f64) {
    (
        params.g * m.unsigned_abs() as f64 / params.kappa_c,
        params.detuning(omega).abs() / params.kappa_c,
    )
}

/// Largest `|bad_cavity_phase - exact_phase|` over `|m| <= m_max`, both polarizations.
pub fn max_bad_cavity_error(params: &CavityParams, omega: f64, m_max: i64) -> f64 {
    (-m_max..=m_max)
        .flat_map(|m| [Polarization::Plus, Polarization::Minus].map(|p| (m, p)))
        .map(|(m, p)| {
            (bad_cavity_phase(params, omega, m, p) - exact_phase(params, omega, m, p)).abs()
        })
        .fold(0.0, f64::max)
}

/// The atom-field correlated output phase `exp(-2i g m n / κ)`.
pub fn correlated_phase(params: &CavityParams, m: i64, n: i64) -> Complex64 {
    Complex64::from_polar(1.0, -2.0 * params.g * (m * n) as f64 / params.kappa_c)
}

/// Output phase acquired by `|N+, N-⟩|m⟩` with `n = N+ - N-`, `s = N+ + N-`:
/// `exp(2i θ_0(ω) s - 2i g m n / κ)`.
pub fn output_phase_map(
    params: &CavityParams,
    omega: f64,
    m: i64,
    n: i64,
    s: u64,
) -> Result<Complex64> {
    if n.unsigned_abs() > s || (s as i64 - n).rem_euclid(2) != 0 {
        return Err(Error::ParityViolation { s: s as i64, n });
    }
    let local = Complex64::from_polar(1.0, 2.0 * theta0(params, omega) * s as f64);
    Ok(local * correlated_phase(params, m, n))
}

/// Joint atom-field state after all input photons have left the cavity.
///
/// Only the correlated phase is applied; the `s`-dependent factor is a
/// field-local phase and leaves every Schmidt quantity unchanged.
pub fn output_joint_state(
    params: &CavityParams,
    atoms: &AmplitudeVector,
    field: &AmplitudeVector,
) -> JointState {
    JointState::from_fn(
        atoms.range(),
        field.range(),
        effective_tau(params),
        |m, n| correlated_phase(params, m, n) * (atoms.get(m) * field.get(n)),
    )
}

/// Dimensionless interaction time `g t / 2` at `t = 2 / κ`.
pub fn effective_tau(params: &CavityParams) -> f64 {
    params.g / params.kappa_c
}

/// Two readings of the output Schmidt number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputConvention {
    /// `sqrt(1 + (2 σ_A σ_F g / κ)²)`, as printed alongside the phase map.
    Doubled,
    /// The ideal-cavity law at `τ = g / κ`: `sqrt(1 + (σ_A σ_F g / κ)²)`.
    TauSubstitution,
}

impl OutputConvention {
    pub const ALL: [OutputConvention; 2] =
        [OutputConvention::Doubled, OutputConvention::TauSubstitution];

    pub fn name(self) -> &'static str {
        match self {
            OutputConvention::Doubled => "doubled",
            OutputConvention::TauSubstitution => "tau_substitution",
        }
    }
}

impl std::str::FromStr for OutputConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "doubled" | "eq27" => Ok(OutputConvention::Doubled),
            "tau_substitution" | "tau_sub" => Ok(OutputConvention::TauSubstitution),
            other => Err(Error::Config(format!(
                "unknown output convention '{other}'"
            ))),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite and > 0, got {v}")))
    }
}

/// Schmidt number of the output state for interaction phase `g t` with `t = 2/κ`.
pub fn output_schmidt_number(
    sigma_a: f64,
    sigma_f: f64,
    g: f64,
    kappa_c: f64,
    convention: OutputConvention,
) -> Result<f64> {
    positive("kappa_c", kappa_c)?;
    positive("g", g)?;
    schmidt_number_for_phase(sigma_a, sigma_f, 2.0 * g / kappa_c, convention)
}

/// Output Schmidt number with `g` and `t = 2/κ` replaced by free-space
/// coupling `g_f` and single-pass time `t_f`.
pub fn free_space_estimate(
    sigma_a: f64,
    sigma_f: f64,
    g_f: f64,
    t_f: f64,
    convention: OutputConvention,
) -> Result<f64> {
    positive("g_f", g_f)?;
    positive("t_f", t_f)?;
    schmidt_number_for_phase(sigma_a, sigma_f, g_f * t_f, convention)
}

/// Cavity-to-free-space ratio of interaction phases `(g · 2/κ) / (g_f t_f)`.
pub fn cavity_enhancement(g: f64, kappa_c: f64, g_f: f64, t_f: f64) -> Result<f64> {
    for (name, v) in [("g", g), ("kappa_c", kappa_c), ("g_f", g_f), ("t_f", t_f)] {
        positive(name, v)?;
    }
    Ok((g * 2.0 / kappa_c) / (g_f * t_f))
}

fn schmidt_number_for_phase(
    sigma_a: f64,
    sigma_f: f64,
    g_t: f64,
    convention: OutputConvention,
) -> Result<f64> {
    positive("sigma_A", sigma_a)?;
    positive("sigma_F", sigma_f)?;
    let tau = g_t / 2.0;
    let x = match convention {
        OutputConvention::Doubled => 2.0 * sigma_a * sigma_f * tau,
        OutputConvention::TauSubstitution => sigma_a * sigma_f * tau,
    };
    Ok(analytic_schmidt_number(&MehlerParams::from_x(tau, x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state_builder::{
        assemble_joint, build_atomic_gaussian, build_field_gaussian, GaussianSpec,
    };

    fn params(kappa_c: f64) -> CavityParams {
        CavityParams {
            kappa_c,
            omega_c: 3.0,
            g: 0.7,
            n_atoms: 18,
        }
    }

    #[test]
    fn resonant_balanced_phase_is_zero() {
        let p = params(5.0);
        let p = CavityParams { omega_c: 0.0, ..p };
        let w = p.resonant_omega();
        assert_eq!(p.detuning(w), 0.0);
        assert_eq!(exact_phase(&p, w, 0, Polarization::Plus), 0.0);
        assert_eq!(bad_cavity_phase(&p, w, 0, Polarization::Minus), 0.0);
    }

    #[test]
    fn phase_factor_is_unimodular_and_consistent() {
        let p = params(2.0);
        for m in -9..=9 {
            for &w in &[-40.0, 0.0, 9.3, 100.0] {
                for pol in [Polarization::Plus, Polarization::Minus] {
                    let z = phase_factor(&p, w, m, pol);
                    assert!((z.norm() - 1.0).abs() < 1e-15);
                    let theta = exact_phase(&p, w, m, pol);
                    assert!((Complex64::from_polar(1.0, 2.0 * theta) - z).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn mirror_symmetry() {
        let p = params(1.3);
        for m in -9..=9 {
            for &w in &[-5.0, 0.1, 6.0, 11.0] {
                assert_eq!(
                    exact_phase(&p, w, -m, Polarization::Minus),
                    exact_phase(&p, w, m, Polarization::Plus)
                );
            }
        }
    }

    #[test]
    fn phase_is_continuous_across_detuning_sweep() {
        let p = params(0.5);
        let mut prev = exact_phase(&p, -1e3, 4, Polarization::Plus);
        for i in 1..=20_000 {
            let w = -1e3 + i as f64 * 0.1;
            let th = exact_phase(&p, w, 4, Polarization::Plus);
            assert!((th - prev).abs() < 0.2);
            assert!(th.abs() < std::f64::consts::FRAC_PI_2);
            prev = th;
        }
    }

    #[test]
    fn bad_cavity_limit_is_accurate_for_large_kappa() {
        let m_max = 9;
        let p = params(100.0 * 0.7 * m_max as f64);
        let err = max_bad_cavity_error(&p, p.resonant_omega(), m_max);
        assert!(err < 1e-3, "{err}");
        // odd arctangent expansion: error ~ (g m / κ)^3 / 3
        assert!((err - (0.01f64 - 0.01f64.atan())).abs() < 1e-12);
    }

    #[test]
    fn bad_cavity_error_grows_as_kappa_shrinks() {
        let mut prev = 0.0;
        for ratio in [1000.0, 300.0, 100.0, 30.0, 10.0, 3.0, 1.0] {
            let p = params(ratio * 0.7 * 9.0);
            let err = max_bad_cavity_error(&p, p.resonant_omega(), 9);
            assert!(err > prev);
            prev = err;
        }
    }

    #[test]
    fn correlated_phase_structure() {
        let p = params(10.0);
        assert_eq!(correlated_phase(&p, 0, 7), Complex64::new(1.0, 0.0));
        assert_eq!(correlated_phase(&p, 3, 0), Complex64::new(1.0, 0.0));
        let z = correlated_phase(&p, 3, 5);
        assert!((correlated_phase(&p, -3, 5) - z.conj()).norm() < 1e-15);
        assert!((correlated_phase(&p, 3, -5) - z.conj()).norm() < 1e-15);
    }

    #[test]
    fn output_phase_map_validates_parity() {
        let p = params(10.0);
        assert!(output_phase_map(&p, 0.0, 1, 3, 4).is_err());
        assert!(output_phase_map(&p, 0.0, 1, 5, 3).is_err());
        let z = output_phase_map(&p, p.resonant_omega(), 2, 2, 4).unwrap();
        assert!((z - correlated_phase(&p, 2, 2)).norm() < 1e-15);
    }

    #[test]
    fn output_state_is_ideal_state_at_effective_tau() {
        let spec = GaussianSpec::centered(3.0, 8.0);
        let a = build_atomic_gaussian(&spec).unwrap();
        let f = build_field_gaussian(&spec, 5.0).unwrap();
        let p = params(30.0);
        let out = output_joint_state(&p, &a, &f);
        let ideal = assemble_joint(&a, &f, effective_tau(&p));
        let diff = out.frobenius_distance(&ideal);
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn conventions() {
        for conv in OutputConvention::ALL {
            let k = output_schmidt_number(3.0, 24.0, 1e-9, 1.0, conv).unwrap();
            assert!((k - 1.0).abs() < 1e-12);
        }
        // sigma_A sigma_F g / kappa = 0.5
        let k = output_schmidt_number(2.0, 2.5, 1.0, 10.0, OutputConvention::Doubled).unwrap();
        assert!((k - std::f64::consts::SQRT_2).abs() < 1e-14);
        let k =
            output_schmidt_number(2.0, 2.5, 1.0, 10.0, OutputConvention::TauSubstitution).unwrap();
        assert!((k - 1.25f64.sqrt()).abs() < 1e-14);
        assert_eq!(
            "eq27".parse::<OutputConvention>().unwrap(),
            OutputConvention::Doubled
        );
        assert!("other".parse::<OutputConvention>().is_err());
    }

    #[test]
    fn free_space_matches_cavity_for_equal_phase() {
        let (g, kappa) = (0.4, 20.0);
        for conv in OutputConvention::ALL {
            let cav = output_schmidt_number(3.0, 24.0, g, kappa, conv).unwrap();
            let free = free_space_estimate(3.0, 24.0, 0.1, g * 2.0 / kappa / 0.1, conv).unwrap();
            assert!((cav - free).abs() < 1e-14);
        }
        assert!((cavity_enhancement(g, kappa, 0.1, 0.4).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cavity_enhancement_raises_schmidt_number() {
        let t = 0.5;
        for conv in OutputConvention::ALL {
            let k_cav = free_space_estimate(3.0, 24.0, 0.3, t, conv).unwrap();
            let k_free = free_space_estimate(3.0, 24.0, 0.1, t, conv).unwrap();
            assert!(k_cav >= k_free);
        }
    }

    #[test]
    fn doubling_phase_doubles_linear_growth() {
        // well into the linear regime K ≈ x
        let conv = OutputConvention::TauSubstitution;
        let k1 = free_space_estimate(18.0, 24.0, 1.0, 1.0, conv).unwrap();
        let k2 = free_space_estimate(18.0, 24.0, 1.0, 2.0, conv).unwrap();
        assert!(((k2 - 1.0) / (k1 - 1.0) - 2.0).abs() < 0.01);
    }
}
