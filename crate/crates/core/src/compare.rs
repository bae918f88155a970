//! Side-by-side numeric and analytic Schmidt quantities over a time grid.

use num_complex::Complex64;

use crate::amplitude::AmplitudeVector;
use crate::analytic::{
    analytic_entropy, analytic_schmidt_modes, analytic_schmidt_number, break_time, mehler_params,
    AnalyticSpectrum, PhaseTwist,
};
use crate::error::{Error, Result};
use crate::parallel::Execution;
use crate::schmidt::{inner_product, time_sweep, SchmidtSpectrum};
use crate::state_builder::{build_atomic_gaussian, build_field_gaussian, GaussianSpec};

/// Relative entropy deviation tolerated inside the break window.
pub const ENTROPY_REL_TOL: f64 = 0.05;
/// Entropy floor in the relative-deviation denominator.
pub const ENTROPY_DENOM_FLOOR: f64 = 0.01;
/// Eigenvalues this close are treated as one degenerate subspace.
pub const DEGENERACY_TOL: f64 = 1e-10;
/// Mode orders reported per row.
pub const COMPARED_MODES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeOverlap {
    pub k: usize,
    /// `None` when the numeric mode is below the eigenvalue floor or the
    /// analytic mode is not representable on the grid.
    pub atomic: Option<f64>,
    pub field: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub tau: f64,
    pub s_numeric: f64,
    pub s_analytic: f64,
    pub k_numeric: f64,
    pub k_analytic: f64,
    pub lambda0_numeric: f64,
    pub lambda0_analytic: f64,
    pub inside_break_window: bool,
    pub overlaps: Vec<ModeOverlap>,
}

impl CompareRow {
    /// `|S_num - S_ana| / max(S_num, 0.01)`.
    pub fn entropy_rel_dev(&self) -> f64 {
        (self.s_numeric - self.s_analytic).abs() / self.s_numeric.max(ENTROPY_DENOM_FLOOR)
    }

    pub fn schmidt_number_rel_dev(&self) -> f64 {
        (self.k_numeric - self.k_analytic).abs() / self.k_numeric
    }

    pub fn entropy_within_tolerance(&self) -> bool {
        self.entropy_rel_dev() < ENTROPY_REL_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub spec: GaussianSpec,
    pub break_time: f64,
    pub rows: Vec<CompareRow>,
}

/// Modulus of the projection of a normalized analytic mode onto the numeric
/// modes whose eigenvalues lie within [`DEGENERACY_TOL`] of `lambdas[k]`.
pub fn subspace_overlap(
    analytic: &[Complex64],
    numeric: &[Vec<Complex64>],
    lambdas: &[f64],
    k: usize,
) -> f64 {
    let norm = analytic.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let target = lambdas[k];
    lambdas
        .iter()
        .zip(numeric)
        .filter(|(l, _)| (*l - target).abs() <= DEGENERACY_TOL)
        .map(|(_, mode)| inner_product(mode, analytic).norm_sqr())
        .sum::<f64>()
        .sqrt()
        / norm
}

/// Overlaps of the order-`k` analytic modes with the numeric spectrum.
pub fn mode_overlap(
    spec: &GaussianSpec,
    spectrum: &SchmidtSpectrum,
    tau: f64,
    k: usize,
    twist: PhaseTwist,
) -> Result<ModeOverlap> {
    let none = ModeOverlap {
        k,
        atomic: None,
        field: None,
    };
    if k >= spectrum.rank_kept {
        return Ok(none);
    }
    let (u, v) = match analytic_schmidt_modes(spec, spectrum.m_grid, spectrum.n_grid, tau, k, twist)
    {
        Ok(modes) => modes,
        Err(Error::ModeUnresolved { .. }) => return Ok(none),
        Err(e) => return Err(e),
    };
    let lambdas = spectrum.kept();
    Ok(ModeOverlap {
        k,
        atomic: Some(subspace_overlap(&u, &spectrum.atomic_modes, lambdas, k)),
        field: Some(subspace_overlap(&v, &spectrum.field_modes, lambdas, k)),
    })
}

/// Compares the exact decomposition of the state built from `atoms` and
/// `field` against the closed form for the widths in `spec`.
pub fn compare(
    spec: &GaussianSpec,
    atoms: &AmplitudeVector,
    field: &AmplitudeVector,
    taus: &[f64],
    exec: Execution,
) -> Result<CompareReport> {
    let tau_b = break_time(spec.sigma_a, spec.sigma_f)?;
    let sweep = time_sweep(atoms, field, taus, exec)?;
    let rows = sweep
        .into_iter()
        .map(|point| {
            let tau = point.tau;
            let params =
                mehler_params(spec.sigma_a, spec.sigma_f, tau).map_err(|e| e.at_tau(tau))?;
            let overlaps = (0..COMPARED_MODES)
                .map(|k| mode_overlap(spec, &point.spectrum, tau, k, PhaseTwist::Applied))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| e.at_tau(tau))?;
            Ok(CompareRow {
                tau,
                s_numeric: point.entropy,
                s_analytic: analytic_entropy(&params),
                k_numeric: point.schmidt_number,
                k_analytic: analytic_schmidt_number(&params),
                lambda0_numeric: point.spectrum.eigenvalues[0],
                lambda0_analytic: AnalyticSpectrum::new(params).eigenvalue(0),
                inside_break_window: tau <= tau_b,
                overlaps,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CompareReport {
        spec: *spec,
        break_time: tau_b,
        rows,
    })
}

/// [`compare`] with Gaussian amplitudes built from `spec`.
pub fn compare_gaussian(
    spec: &GaussianSpec,
    window_mult: f64,
    taus: &[f64],
    exec: Execution,
) -> Result<CompareReport> {
    let atoms = build_atomic_gaussian(spec)?;
    let field = build_field_gaussian(spec, window_mult)?;
    compare(spec, &atoms, &field, taus, exec)
}
