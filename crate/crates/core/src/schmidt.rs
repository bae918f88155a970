//! Exact Schmidt decomposition of a joint state by dense SVD.

use faer::Mat;
use num_complex::Complex64;

use crate::amplitude::{AmplitudeVector, IndexRange};
use crate::error::{Error, Result};
use crate::parallel::{map_ordered, Execution};
use crate::state_builder::{assemble_joint, JointState};

/// Eigenvalues below this are treated as zero by the entanglement measures.
pub const EIGENVALUE_FLOOR: f64 = 1e-14;

/// `⟨a|b⟩ = Σ conj(a_i) b_i`.
pub fn inner_product(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Schmidt eigenvalues in descending order with their paired modes.
///
/// The state is `Σ_k sqrt(λ_k) |u_k⟩|v_k⟩`, so `field_modes[k]` is the
/// complex conjugate of the k-th right singular vector.
#[derive(Debug, Clone)]
pub struct SchmidtSpectrum {
    pub eigenvalues: Vec<f64>,
    pub atomic_modes: Vec<Vec<Complex64>>,
    pub field_modes: Vec<Vec<Complex64>>,
    /// Number of eigenvalues at or above [`EIGENVALUE_FLOOR`].
    pub rank_kept: usize,
    pub m_grid: IndexRange,
    pub n_grid: IndexRange,
}

impl SchmidtSpectrum {
    /// Eigenvalues that contribute to entropy and Schmidt number.
    pub fn kept(&self) -> &[f64] {
        &self.eigenvalues[..self.rank_kept]
    }

    /// `Σ_k sqrt(λ_k) u_k v_kᵀ` over the retained modes.
    pub fn reconstruct(&self) -> JointState {
        JointState::from_fn(self.m_grid, self.n_grid, f64::NAN, |m, n| {
            let i = (m - self.m_grid.lo) as usize;
            let j = (n - self.n_grid.lo) as usize;
            self.eigenvalues
                .iter()
                .zip(&self.atomic_modes)
                .zip(&self.field_modes)
                .map(|((l, u), v)| u[i] * v[j] * l.sqrt())
                .sum()
        })
    }
}

fn mass_check(coeffs: &Mat<Complex64>, singular_values: impl Iterator<Item = f64>) -> Result<()> {
    let mass = coeffs.norm_l2().powi(2);
    let captured: f64 = singular_values.map(|s| s * s).sum();
    if (captured - mass).abs() > 1e-10 * mass.max(1.0) {
        return Err(Error::Factorization {
            rows: coeffs.nrows(),
            cols: coeffs.ncols(),
        });
    }
    Ok(())
}

fn check_normalized(state: &JointState) -> Result<()> {
    let norm_sqr = state.frobenius_norm().powi(2);
    if (norm_sqr - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm_sqr });
    }
    Ok(())
}

/// Squared singular values of the coefficient matrix, descending, with
/// their left (atomic) and conjugated right (field) singular vectors.
///
/// `rank_cut` keeps at most that many leading modes.
pub fn schmidt_decompose(state: &JointState, rank_cut: Option<usize>) -> Result<SchmidtSpectrum> {
    check_normalized(state)?;
    let c = &state.coeffs;
    let svd = c.thin_svd().map_err(|_| Error::Factorization {
        rows: c.nrows(),
        cols: c.ncols(),
    })?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let sv: Vec<f64> = s.iter().map(|z| z.re).collect();
    mass_check(c, sv.iter().copied())?;

    // Stable sort: ties keep factorization order.
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    if let Some(cut) = rank_cut {
        order.truncate(cut);
    }

    let eigenvalues: Vec<f64> = order.iter().map(|&k| sv[k] * sv[k]).collect();
    let atomic_modes = order
        .iter()
        .map(|&k| (0..u.nrows()).map(|i| u[(i, k)]).collect())
        .collect();
    let field_modes = order
        .iter()
        .map(|&k| (0..v.nrows()).map(|j| v[(j, k)].conj()).collect())
        .collect();
    let rank_kept = eigenvalues
        .iter()
        .take_while(|&&l| l >= EIGENVALUE_FLOOR)
        .count();
    Ok(SchmidtSpectrum {
        eigenvalues,
        atomic_modes,
        field_modes,
        rank_kept,
        m_grid: state.m_grid,
        n_grid: state.n_grid,
    })
}

/// Schmidt eigenvalues only, descending. Skips the singular vectors.
pub fn schmidt_eigenvalues(state: &JointState) -> Result<Vec<f64>> {
    check_normalized(state)?;
    let c = &state.coeffs;
    let sv = c.singular_values().map_err(|_| Error::Factorization {
        rows: c.nrows(),
        cols: c.ncols(),
    })?;
    mass_check(c, sv.iter().copied())?;
    let mut lambdas: Vec<f64> = sv.iter().map(|s| s * s).collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok(lambdas)
}

/// `-Σ λ ln λ` over eigenvalues at or above the floor.
pub fn entropy_of(eigenvalues: &[f64]) -> f64 {
    let s: f64 = eigenvalues
        .iter()
        .filter(|&&l| l >= EIGENVALUE_FLOOR)
        .map(|&l| -l * l.ln())
        .sum();
    s.max(0.0)
}

/// `1 / Σ λ²`.
pub fn schmidt_number_of(eigenvalues: &[f64]) -> f64 {
    1.0 / eigenvalues.iter().map(|l| l * l).sum::<f64>()
}

pub fn entropy(spectrum: &SchmidtSpectrum) -> f64 {
    entropy_of(spectrum.kept())
}

pub fn schmidt_number(spectrum: &SchmidtSpectrum) -> f64 {
    schmidt_number_of(&spectrum.eigenvalues)
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub tau: f64,
    pub entropy: f64,
    pub schmidt_number: f64,
    pub spectrum: SchmidtSpectrum,
}

/// Decomposes the joint state at each `tau`, in input order.
pub fn time_sweep(
    atoms: &AmplitudeVector,
    field: &AmplitudeVector,
    taus: &[f64],
    exec: Execution,
) -> Result<Vec<SweepPoint>> {
    if let Some(&bad) = taus.iter().find(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite tau {bad}")));
    }
    map_ordered(taus, exec, |&tau| {
        let state = assemble_joint(atoms, field, tau);
        let spectrum = schmidt_decompose(&state, None).map_err(|e| e.at_tau(tau))?;
        Ok(SweepPoint {
            tau,
            entropy: entropy(&spectrum),
            schmidt_number: schmidt_number(&spectrum),
            spectrum,
        })
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state_builder::{build_atomic_gaussian, build_field_gaussian, GaussianSpec};

    fn small_spec() -> GaussianSpec {
        GaussianSpec {
            m0: 0.0,
            sigma_a: 2.0,
            n0: 0.0,
            sigma_f: 4.0,
            n_atoms: 10,
            g: 1.0,
        }
    }

    fn small_state(tau: f64) -> JointState {
        let spec = small_spec();
        let a = build_atomic_gaussian(&spec).unwrap();
        let f = build_field_gaussian(&spec, 5.0).unwrap();
        assemble_joint(&a, &f, tau)
    }

    #[test]
    fn product_state_has_unit_leading_eigenvalue() {
        let s = schmidt_decompose(&small_state(0.0), None).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-10);
        assert_eq!(s.rank_kept, 1);
        assert!(entropy(&s).abs() < 1e-10);
        assert!((schmidt_number(&s) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn explicit_rank_one_matrix() {
        let state =
            JointState::from_fn(IndexRange::new(0, 1), IndexRange::new(0, 2), 0.0, |m, n| {
                let a = [0.6, 0.8][m as usize];
                let f = [0.0, 0.6, 0.8][n as usize];
                Complex64::new(a * f, 0.0)
            });
        let s = schmidt_decompose(&state, None).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!(s.eigenvalues[1].abs() < 1e-14);
    }

    #[test]
    fn bell_like_state_spectrum() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let state =
            JointState::from_fn(IndexRange::new(0, 1), IndexRange::new(0, 1), 0.0, |m, n| {
                Complex64::new(if m == n { h } else { 0.0 }, 0.0)
            });
        let s = schmidt_decompose(&state, None).unwrap();
        assert!((entropy(&s) - std::f64::consts::LN_2).abs() < 1e-14);
        assert!((schmidt_number(&s) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn spectrum_is_sorted_normalized_and_orthonormal() {
        let s = schmidt_decompose(&small_state(0.13), None).unwrap();
        let total: f64 = s.eigenvalues.iter().sum();
        assert!((total - 1.0).abs() < 1e-10);
        assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        for modes in [&s.atomic_modes, &s.field_modes] {
            for (i, a) in modes.iter().enumerate() {
                for (j, b) in modes.iter().enumerate() {
                    let ip = inner_product(a, b);
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - Complex64::new(expected, 0.0)).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn full_rank_reconstruction() {
        let state = small_state(0.21);
        let s = schmidt_decompose(&state, None).unwrap();
        let err = s.reconstruct().frobenius_distance(&state);
        assert!(err < 1e-8, "reconstruction error {err}");
    }

    #[test]
    fn rank_cut_limits_modes() {
        let s = schmidt_decompose(&small_state(0.21), Some(3)).unwrap();
        assert_eq!(s.eigenvalues.len(), 3);
        assert_eq!(s.atomic_modes.len(), 3);
        assert_eq!(s.field_modes.len(), 3);
    }

    #[test]
    fn unnormalized_state_is_a_validation_error() {
        let mut state = small_state(0.1);
        state.coeffs = faer::Scale(Complex64::new(2.0, 0.0)) * &state.coeffs;
        let err = schmidt_decompose(&state, None).unwrap_err();
        assert!(matches!(err, Error::NotNormalized { .. }));
        assert_eq!(err.kind(), crate::error::ErrorKind::Config);
    }

    #[test]
    fn eigenvalue_only_path_agrees() {
        let state = small_state(0.3);
        let full = schmidt_decompose(&state, None).unwrap();
        let lambdas = schmidt_eigenvalues(&state).unwrap();
        for (a, b) in full.eigenvalues.iter().zip(&lambdas) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn entropy_of_geometric_spectrum() {
        // Direct evaluation of the closed form at mu^2 = 0.171573 is 0.5533.
        let mu2: f64 = 0.171573;
        let lambdas: Vec<f64> = (0..200).map(|k| (1.0 - mu2) * mu2.powi(k)).collect();
        assert!((entropy_of(&lambdas) - 0.5533).abs() < 1e-4);
    }

    #[test]
    fn geometric_schmidt_number_at_unit_x() {
        let mu = std::f64::consts::SQRT_2 - 1.0;
        let mu2 = mu * mu;
        let lambdas: Vec<f64> = (0..200).map(|k| (1.0 - mu2) * mu2.powi(k)).collect();
        assert!((schmidt_number_of(&lambdas) - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn sweep_matches_single_calls_in_order() {
        let spec = small_spec();
        let a = build_atomic_gaussian(&spec).unwrap();
        let f = build_field_gaussian(&spec, 5.0).unwrap();
        let taus = [0.3, 0.0, 0.05, 0.2];
        for exec in [Execution::Sequential, Execution::Parallel] {
            let sweep = time_sweep(&a, &f, &taus, exec).unwrap();
            for (point, &tau) in sweep.iter().zip(&taus) {
                assert_eq!(point.tau, tau);
                let single = schmidt_decompose(&assemble_joint(&a, &f, tau), None).unwrap();
                assert_eq!(point.entropy, entropy(&single));
                assert_eq!(point.spectrum.eigenvalues, single.eigenvalues);
            }
        }
    }

    #[test]
    fn sweep_rejects_non_finite_tau() {
        let spec = small_spec();
        let a = build_atomic_gaussian(&spec).unwrap();
        let f = build_field_gaussian(&spec, 5.0).unwrap();
        assert!(time_sweep(&a, &f, &[0.1, f64::NAN], Execution::Sequential).is_err());
    }
}
