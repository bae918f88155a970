//! Scenario runs: sweeps, cavity reports, CSV and manifest output.
//!
//! Every run computes all of its results before touching the output
//! directory, and each file is written under a temporary name and renamed,
//! so a failed run leaves no partial CSV behind.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::amplitude::AmplitudeVector;
use crate::analytic::break_time;
use crate::cavity::{
    effective_tau, max_bad_cavity_error, output_joint_state, output_schmidt_number, CavityParams,
    OutputConvention,
};
use crate::compare::{compare, CompareReport};
use crate::config::{AtomPreset, CavityConfig, FieldPreset, ScenarioConfig};
use crate::error::{Error, Result};
use crate::parallel::{map_ordered, Execution};
use crate::schmidt::{schmidt_eigenvalues, schmidt_number_of};
use crate::state_builder::{
    build_atomic_gaussian, build_field_gaussian, preset_dual_coherent, preset_spin_coherent,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const SWEEP_HEADER: &str =
    "tau,S_numeric,S_analytic,K_numeric,K_analytic,lambda0_numeric,lambda0_analytic,inside_break_window";

pub const CAVITY_HEADER: &str =
    "kappa_over_g,tau_eff,K_doubled,K_tau_substitution,K_numeric,matched_convention,bad_cavity_phase_error,inside_break_window";

/// Initial amplitudes selected by the config presets.
#[derive(Debug, Clone)]
pub struct Amplitudes {
    pub atoms: AmplitudeVector,
    pub field: AmplitudeVector,
}

impl Amplitudes {
    pub fn build(cfg: &ScenarioConfig) -> Result<Self> {
        let atoms = match cfg.atom_preset {
            AtomPreset::Gaussian => build_atomic_gaussian(&cfg.spec)?,
            AtomPreset::SpinCoherent => preset_spin_coherent(cfg.spec.n_atoms)?,
        };
        let field = match cfg.field_preset {
            FieldPreset::Gaussian => build_field_gaussian(&cfg.spec, cfg.window_mult)?,
            FieldPreset::DualCoherent => {
                let (plus, minus) = cfg.coherent_means();
                preset_dual_coherent(plus, minus, cfg.window_mult)?
            }
        };
        Ok(Self { atoms, field })
    }
}

/// Gaussian-equivalent width `2 sqrt(Var)` of `|a|^2`.
fn effective_sigma(a: &AmplitudeVector) -> f64 {
    2.0 * a.moments().1.sqrt()
}

/// One row of the cavity report.
#[derive(Debug, Clone, PartialEq)]
pub struct CavityRow {
    pub kappa_over_g: f64,
    pub tau_eff: f64,
    pub k_doubled: f64,
    pub k_tau_substitution: f64,
    pub k_numeric: f64,
    /// Conventions within tolerance of the numeric value.
    pub matched: Vec<OutputConvention>,
    pub bad_cavity_phase_error: f64,
    /// `tau_eff <= tau_B`, where the closed-form laws apply.
    pub inside_break_window: bool,
}

impl CavityRow {
    pub fn matched_label(&self) -> &'static str {
        match self.matched.as_slice() {
            [one] => one.name(),
            [] => "none",
            _ => "both",
        }
    }
}

pub fn run_sweep(cfg: &ScenarioConfig, exec: Execution) -> Result<(Amplitudes, CompareReport)> {
    cfg.validate()?;
    let amps = Amplitudes::build(cfg)?;
    log::info!(
        "{}: {} tau points on a {}x{} grid",
        cfg.name,
        cfg.tau.count,
        amps.atoms.len(),
        amps.field.len()
    );
    let report = compare(&cfg.spec, &amps.atoms, &amps.field, &cfg.tau.points(), exec)?;
    Ok((amps, report))
}

pub fn run_cavity(cfg: &ScenarioConfig, exec: Execution) -> Result<(Amplitudes, Vec<CavityRow>)> {
    cfg.validate()?;
    let cavity = cfg.cavity.as_ref().ok_or_else(|| {
        Error::Config("no cavity block in config (set cavity.kappa_over_g)".into())
    })?;
    let amps = Amplitudes::build(cfg)?;
    let rows = cavity_rows(cfg, cavity, &amps, exec)?;
    Ok((amps, rows))
}

fn cavity_rows(
    cfg: &ScenarioConfig,
    cavity: &CavityConfig,
    amps: &Amplitudes,
    exec: Execution,
) -> Result<Vec<CavityRow>> {
    let spec = &cfg.spec;
    let tau_b = break_time(spec.sigma_a, spec.sigma_f)?;
    let m_max = amps.atoms.range().hi.max(-amps.atoms.range().lo);
    let rows = map_ordered(&cavity.kappa_over_g, exec, |&ratio| -> Result<CavityRow> {
        let params = CavityParams {
            kappa_c: ratio * spec.g,
            omega_c: cavity.omega_c,
            g: spec.g,
            n_atoms: spec.n_atoms,
        };
        params.validate()?;
        let omega = cavity.omega.unwrap_or_else(|| params.resonant_omega());
        let state = output_joint_state(&params, &amps.atoms, &amps.field);
        let k_numeric = schmidt_number_of(&schmidt_eigenvalues(&state)?);
        let k_of =
            |conv| output_schmidt_number(spec.sigma_a, spec.sigma_f, spec.g, params.kappa_c, conv);
        let k_doubled = k_of(OutputConvention::Doubled)?;
        let k_tau_substitution = k_of(OutputConvention::TauSubstitution)?;
        let matched = OutputConvention::ALL
            .into_iter()
            .zip([k_doubled, k_tau_substitution])
            .filter(|(_, k)| (k_numeric - k).abs() <= cfg.cavity_match_tol * k)
            .map(|(c, _)| c)
            .collect();
        Ok(CavityRow {
            kappa_over_g: ratio,
            tau_eff: effective_tau(&params),
            k_doubled,
            k_tau_substitution,
            k_numeric,
            matched,
            bad_cavity_phase_error: max_bad_cavity_error(&params, omega, m_max),
            inside_break_window: effective_tau(&params) <= tau_b,
        })
    });
    rows.into_iter().collect()
}

fn fmt(v: f64) -> String {
    format!("{v:.11e}")
}

pub fn sweep_csv(report: &CompareReport) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in &report.rows {
        let fields = [
            r.tau,
            r.s_numeric,
            r.s_analytic,
            r.k_numeric,
            r.k_analytic,
            r.lambda0_numeric,
            r.lambda0_analytic,
        ]
        .map(fmt);
        let _ = writeln!(out, "{},{}", fields.join(","), r.inside_break_window);
    }
    out
}

pub fn cavity_csv(rows: &[CavityRow]) -> String {
    let mut out = String::from(CAVITY_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt(r.kappa_over_g),
            fmt(r.tau_eff),
            fmt(r.k_doubled),
            fmt(r.k_tau_substitution),
            fmt(r.k_numeric),
            r.matched_label(),
            fmt(r.bad_cavity_phase_error),
            r.inside_break_window
        );
    }
    out
}

/// Resolved parameters, library version and truncation bookkeeping.
pub fn manifest(
    cfg: &ScenarioConfig,
    amps: &Amplitudes,
    files: &[&str],
    extra: &[(String, String)],
) -> String {
    let mut out = format!("faraday-core {VERSION}\n\n[resolved parameters]\n");
    out.push_str(&cfg.to_text());
    out.push_str("\n[amplitudes]\n");
    let atoms = &amps.atoms;
    let field = &amps.field;
    let _ = writeln!(
        out,
        "atom.grid = {}..{}",
        atoms.range().lo,
        atoms.range().hi
    );
    let _ = writeln!(out, "atom.discarded_mass = {:.3e}", atoms.discarded_mass());
    let _ = writeln!(out, "atom.sigma_effective = {:.6}", effective_sigma(atoms));
    let _ = writeln!(
        out,
        "field.grid = {}..{}",
        field.range().lo,
        field.range().hi
    );
    let _ = writeln!(out, "field.discarded_mass = {:.3e}", field.discarded_mass());
    let _ = writeln!(out, "field.sigma_effective = {:.6}", effective_sigma(field));
    if !extra.is_empty() {
        out.push_str("\n[results]\n");
        for (k, v) in extra {
            let _ = writeln!(out, "{k} = {v}");
        }
    }
    out.push_str("\n[files]\n");
    for f in files {
        out.push_str(f);
        out.push('\n');
    }
    out
}

fn write_all(dir: &Path, files: &[(String, String)]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let path = dir.join(name);
        let tmp = dir.join(format!(".{name}.tmp"));
        fs::write(&tmp, contents)?;
        fs::rename(&tmp, &path)?;
        log::info!("wrote {}", path.display());
        written.push(path);
    }
    Ok(written)
}

fn sweep_summary(report: &CompareReport, cfg: &ScenarioConfig) -> Vec<(String, String)> {
    let inside: Vec<_> = report
        .rows
        .iter()
        .filter(|r| r.tau > 0.0 && r.inside_break_window)
        .collect();
    let worst = inside
        .iter()
        .map(|r| r.entropy_rel_dev())
        .fold(0.0, f64::max);
    vec![
        ("break_time".into(), fmt(report.break_time)),
        (
            "points_inside_break_window".into(),
            inside.len().to_string(),
        ),
        ("max_entropy_rel_dev_inside_break_window".into(), fmt(worst)),
        (
            "entropy_within_tolerance_inside_break_window".into(),
            (worst < cfg.entropy_tol).to_string(),
        ),
    ]
}

/// Writes `<name>_sweep.csv`, plus `<name>_cavity.csv` when the config has a
/// cavity block, and `<name>_manifest.txt`.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: &Path, exec: Execution) -> Result<Vec<PathBuf>> {
    let (amps, report) = run_sweep(cfg, exec)?;
    let cavity = match &cfg.cavity {
        Some(cav) => Some(cavity_rows(cfg, cav, &amps, exec)?),
        None => None,
    };
    let mut files = vec![(format!("{}_sweep.csv", cfg.name), sweep_csv(&report))];
    let mut extra = sweep_summary(&report, cfg);
    if let Some(rows) = &cavity {
        files.push((format!("{}_cavity.csv", cfg.name), cavity_csv(rows)));
        extra.extend(cavity_summary(rows));
    }
    let names: Vec<&str> = files.iter().map(|(n, _)| n.as_str()).collect();
    let manifest = manifest(cfg, &amps, &names, &extra);
    files.push((format!("{}_manifest.txt", cfg.name), manifest));
    write_all(out_dir, &files)
}

/// Which convention the numeric Schmidt number follows, judged on rows inside
/// the break window where the two conventions are distinguishable.
fn cavity_summary(rows: &[CavityRow]) -> Vec<(String, String)> {
    let mut labels: Vec<&str> = rows
        .iter()
        .filter(|r| r.inside_break_window)
        .map(CavityRow::matched_label)
        .filter(|l| *l != "both")
        .collect();
    labels.dedup();
    let verdict = match labels.as_slice() {
        [one] => one.to_string(),
        [] => "undetermined".into(),
        _ => "inconsistent".into(),
    };
    vec![("cavity.numeric_matches".into(), verdict)]
}

/// Writes `<name>_cavity.csv` and `<name>_manifest.txt`.
pub fn run_cavity_report(
    cfg: &ScenarioConfig,
    out_dir: &Path,
    exec: Execution,
) -> Result<Vec<PathBuf>> {
    let (amps, rows) = run_cavity(cfg, exec)?;
    let csv_name = format!("{}_cavity.csv", cfg.name);
    let manifest = manifest(cfg, &amps, &[&csv_name], &cavity_summary(&rows));
    write_all(
        out_dir,
        &[
            (csv_name, cavity_csv(&rows)),
            (format!("{}_manifest.txt", cfg.name), manifest),
        ],
    )
}
