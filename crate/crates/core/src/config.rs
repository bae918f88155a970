//! Scenario configuration: flat `section.key = value` text and the built-in
//! scenarios.
//!
//! ```text
//! # comments start with '#'
//! scenario.name = fig2a
//! atom.sigma = 3
//! field.sigma = 24
//! tau.stop = 0.125
//! tau.count = 61
//! ```
//!
//! `scenario.base = <builtin>` starts from a built-in scenario and applies
//! the remaining keys on top.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::cavity::OutputConvention;
use crate::compare::ENTROPY_REL_TOL;
use crate::error::{Error, Result};
use crate::state_builder::{even_atom_count, GaussianSpec, DEFAULT_WINDOW_MULT};

pub const BUILTIN_SCENARIOS: [&str; 5] = ["fig2a", "fig2b", "fig2c", "fig3a", "fig3b"];

/// Relative tolerance for a numeric Schmidt number to match an output convention.
pub const CAVITY_MATCH_TOL: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomPreset {
    Gaussian,
    SpinCoherent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldPreset {
    Gaussian,
    DualCoherent,
}

impl FromStr for AtomPreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "spin_coherent" => Ok(Self::SpinCoherent),
            _ => Err(Error::Config(format!("unknown atom preset '{s}'"))),
        }
    }
}

impl FromStr for FieldPreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "dual_coherent" => Ok(Self::DualCoherent),
            _ => Err(Error::Config(format!("unknown field preset '{s}'"))),
        }
    }
}

impl AtomPreset {
    pub fn name(self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::SpinCoherent => "spin_coherent",
        }
    }
}

impl FieldPreset {
    pub fn name(self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::DualCoherent => "dual_coherent",
        }
    }
}

/// Evenly spaced `count` points on `[start, stop]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl TauGrid {
    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::Config("tau grid is empty (tau.count = 0)".into()));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) || self.start < 0.0 {
            return Err(Error::Config(format!(
                "tau grid bounds must be finite with start >= 0, got [{}, {}]",
                self.start, self.stop
            )));
        }
        if self.count > 1 && self.stop <= self.start {
            return Err(Error::Config(format!(
                "tau grid must be strictly increasing, got start {} >= stop {}",
                self.start, self.stop
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| self.start + step * i as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CavityConfig {
    /// Decay rates to sweep, in units of `g`.
    pub kappa_over_g: Vec<f64>,
    pub omega_c: f64,
    /// Input frequency; `None` means on resonance (`δ = 0`).
    pub omega: Option<f64>,
    /// Convention reported as the primary prediction.
    pub convention: OutputConvention,
}

impl Default for CavityConfig {
    fn default() -> Self {
        Self {
            kappa_over_g: vec![10.0, 30.0, 50.0, 100.0, 300.0, 1000.0, 1e5],
            omega_c: 0.0,
            omega: None,
            convention: OutputConvention::TauSubstitution,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub spec: GaussianSpec,
    pub atom_preset: AtomPreset,
    pub field_preset: FieldPreset,
    /// Coherent-state means for [`FieldPreset::DualCoherent`]; derived from
    /// `sigma_F` and `n0` when absent.
    pub mean_plus: Option<f64>,
    pub mean_minus: Option<f64>,
    pub tau: TauGrid,
    pub cavity: Option<CavityConfig>,
    pub window_mult: f64,
    pub entropy_tol: f64,
    pub cavity_match_tol: f64,
    pub output_dir: Option<String>,
}

impl ScenarioConfig {
    /// Built-in scenario: sigma_F = 24, N_A = 2 sigma_A^2, tau up to three break times.
    pub fn builtin(name: &str) -> Result<Self> {
        let (sigma_a, m0, n0) = match name {
            "fig2a" => (3.0, 0.0, 0.0),
            "fig2b" => (10.0, 2.0, 12.0),
            "fig2c" => (18.0, 0.0, 0.0),
            "fig3a" => (6.0, 0.0, 0.0),
            "fig3b" => (18.0, 0.0, 0.0),
            other => {
                return Err(Error::Config(format!(
                    "unknown scenario '{other}' (built-ins: {})",
                    BUILTIN_SCENARIOS.join(", ")
                )))
            }
        };
        let sigma_f = 24.0;
        let spec = GaussianSpec {
            m0,
            n0,
            ..GaussianSpec::centered(sigma_a, sigma_f)
        };
        Ok(Self {
            name: name.to_string(),
            spec,
            atom_preset: AtomPreset::Gaussian,
            field_preset: FieldPreset::Gaussian,
            mean_plus: None,
            mean_minus: None,
            // up to three break times, tau_B = 1/24
            tau: TauGrid {
                start: 0.0,
                stop: 0.125,
                count: 61,
            },
            cavity: Some(CavityConfig::default()),
            window_mult: DEFAULT_WINDOW_MULT,
            entropy_tol: ENTROPY_REL_TOL,
            cavity_match_tol: CAVITY_MATCH_TOL,
            output_dir: None,
        })
    }

    /// Parses `section.key = value` lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim().to_string();
            if entries
                .insert(key.clone(), value.trim().to_string())
                .is_some()
            {
                return Err(Error::Config(format!(
                    "line {}: duplicate key '{key}'",
                    lineno + 1
                )));
            }
        }

        let mut cfg = match entries.remove("scenario.base") {
            Some(base) => Self::builtin(&base)?,
            None => Self::builtin("fig2a").map(|mut c| {
                c.cavity = None;
                c
            })?,
        };
        let mut explicit_count = false;
        let mut cavity = cfg.cavity.clone();

        for (key, value) in &entries {
            let v = value.as_str();
            match key.as_str() {
                "scenario.name" => cfg.name = v.to_string(),
                "atom.preset" => cfg.atom_preset = v.parse()?,
                "atom.sigma" => cfg.spec.sigma_a = num(key, v)?,
                "atom.m0" => cfg.spec.m0 = num(key, v)?,
                "atom.count" => {
                    cfg.spec.n_atoms = v.parse().map_err(|_| {
                        Error::Config(format!("{key}: expected a positive integer, got '{v}'"))
                    })?;
                    explicit_count = true;
                }
                "field.preset" => cfg.field_preset = v.parse()?,
                "field.sigma" => cfg.spec.sigma_f = num(key, v)?,
                "field.n0" => cfg.spec.n0 = num(key, v)?,
                "field.mean_plus" => cfg.mean_plus = Some(num(key, v)?),
                "field.mean_minus" => cfg.mean_minus = Some(num(key, v)?),
                "field.window_mult" => cfg.window_mult = num(key, v)?,
                "coupling.g" => cfg.spec.g = num(key, v)?,
                "tau.start" => cfg.tau.start = num(key, v)?,
                "tau.stop" => cfg.tau.stop = num(key, v)?,
                "tau.count" => {
                    cfg.tau.count = v.parse().map_err(|_| {
                        Error::Config(format!("{key}: expected an integer, got '{v}'"))
                    })?
                }
                "cavity.kappa_over_g" => {
                    cavity
                        .get_or_insert_with(CavityConfig::default)
                        .kappa_over_g = v
                        .split(',')
                        .map(|item| num(key, item.trim()))
                        .collect::<Result<_>>()?
                }
                "cavity.omega_c" => {
                    cavity.get_or_insert_with(CavityConfig::default).omega_c = num(key, v)?
                }
                "cavity.omega" => {
                    cavity.get_or_insert_with(CavityConfig::default).omega = Some(num(key, v)?)
                }
                "cavity.convention" => {
                    cavity.get_or_insert_with(CavityConfig::default).convention = v.parse()?
                }
                "tolerance.entropy" => cfg.entropy_tol = num(key, v)?,
                "tolerance.cavity_match" => cfg.cavity_match_tol = num(key, v)?,
                "output.dir" => cfg.output_dir = Some(v.to_string()),
                other => return Err(Error::Config(format!("unknown key '{other}'"))),
            }
        }
        cfg.cavity = cavity;
        let sigma_changed = entries.contains_key("atom.sigma");
        if !explicit_count && (sigma_changed || cfg.atom_preset == AtomPreset::SpinCoherent) {
            cfg.spec.n_atoms = even_atom_count(2.0 * cfg.spec.sigma_a * cfg.spec.sigma_a);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Rejects invalid combinations before any computation runs.
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::Config(format!(
                "invalid scenario name '{}'",
                self.name
            )));
        }
        self.spec
            .validate()
            .map_err(|e| Error::Config(format!("scenario '{}': {e}", self.name)))?;
        self.tau.validate()?;
        if !(self.window_mult.is_finite()
            && self.window_mult >= crate::state_builder::MIN_WINDOW_MULT)
        {
            return Err(Error::Config(format!(
                "field.window_mult must be >= {}, got {}",
                crate::state_builder::MIN_WINDOW_MULT,
                self.window_mult
            )));
        }
        if self.field_preset == FieldPreset::Gaussian
            && (self.mean_plus.is_some() || self.mean_minus.is_some())
        {
            return Err(Error::Config(
                "field.mean_plus/mean_minus require field.preset = dual_coherent".into(),
            ));
        }
        let (plus, minus) = self.coherent_means();
        if self.field_preset == FieldPreset::DualCoherent && !(plus >= 0.0 && minus >= 0.0) {
            return Err(Error::Config(format!(
                "coherent means must be >= 0, got ({plus}, {minus}); \
                 check field.sigma and field.n0 (need sigma_F^2/4 >= |n0|)"
            )));
        }
        for (name, tol) in [
            ("tolerance.entropy", self.entropy_tol),
            ("tolerance.cavity_match", self.cavity_match_tol),
        ] {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(Error::Config(format!("{name} must be > 0, got {tol}")));
            }
        }
        if let Some(cav) = &self.cavity {
            if cav.kappa_over_g.is_empty()
                || cav
                    .kappa_over_g
                    .iter()
                    .any(|k| !(k.is_finite() && *k > 0.0))
            {
                return Err(Error::Config(
                    "cavity.kappa_over_g must be a list of positive numbers".into(),
                ));
            }
            if !cav.omega_c.is_finite() || cav.omega.is_some_and(|w| !w.is_finite()) {
                return Err(Error::Config("cavity frequencies must be finite".into()));
            }
        }
        Ok(())
    }

    /// `(mean_plus, mean_minus)` for the dual coherent preset. By default the
    /// total mean photon number is `sigma_F^2 / 4` and the difference is `n0`.
    pub fn coherent_means(&self) -> (f64, f64) {
        let total = self.spec.sigma_f * self.spec.sigma_f / 4.0;
        let plus = self.mean_plus.unwrap_or((total + self.spec.n0) / 2.0);
        let minus = self.mean_minus.unwrap_or((total - self.spec.n0) / 2.0);
        (plus, minus)
    }

    /// Flat `key = value` rendering of every resolved parameter.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        line("scenario.name", self.name.clone());
        line("atom.preset", self.atom_preset.name().into());
        line("atom.sigma", fmt_num(self.spec.sigma_a));
        line("atom.m0", fmt_num(self.spec.m0));
        line("atom.count", self.spec.n_atoms.to_string());
        line("field.preset", self.field_preset.name().into());
        line("field.sigma", fmt_num(self.spec.sigma_f));
        line("field.n0", fmt_num(self.spec.n0));
        if self.field_preset == FieldPreset::DualCoherent {
            let (p, m) = self.coherent_means();
            line("field.mean_plus", fmt_num(p));
            line("field.mean_minus", fmt_num(m));
        }
        line("field.window_mult", fmt_num(self.window_mult));
        line("coupling.g", fmt_num(self.spec.g));
        line("tau.start", fmt_num(self.tau.start));
        line("tau.stop", fmt_num(self.tau.stop));
        line("tau.count", self.tau.count.to_string());
        if let Some(cav) = &self.cavity {
            let list: Vec<String> = cav.kappa_over_g.iter().map(|k| fmt_num(*k)).collect();
            line("cavity.kappa_over_g", list.join(","));
            line("cavity.omega_c", fmt_num(cav.omega_c));
            if let Some(w) = cav.omega {
                line("cavity.omega", fmt_num(w));
            }
            line("cavity.convention", cav.convention.name().into());
        }
        line("tolerance.entropy", fmt_num(self.entropy_tol));
        line("tolerance.cavity_match", fmt_num(self.cavity_match_tol));
        if let Some(dir) = &self.output_dir {
            line("output.dir", dir.clone());
        }
        out
    }
}

fn num(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| Error::Config(format!("{key}: expected a number, got '{v}'")))
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_parameters() {
        let c = ScenarioConfig::builtin("fig2b").unwrap();
        assert_eq!(
            (c.spec.sigma_a, c.spec.sigma_f, c.spec.m0, c.spec.n0),
            (10.0, 24.0, 2.0, 12.0)
        );
        assert_eq!(c.spec.n_atoms, 200);
        assert_eq!(ScenarioConfig::builtin("fig2a").unwrap().spec.n_atoms, 18);
        assert_eq!(ScenarioConfig::builtin("fig3b").unwrap().spec.n_atoms, 648);
        for name in BUILTIN_SCENARIOS {
            ScenarioConfig::builtin(name).unwrap().validate().unwrap();
        }
        assert!(ScenarioConfig::builtin("fig9").is_err());
    }

    #[test]
    fn parse_overrides_and_round_trips() {
        let text = "\
            # sweep\n\
            scenario.name = custom\n\
            atom.sigma = 4\n\
            field.sigma = 12   # photons\n\
            tau.stop = 0.2\n\
            tau.count = 5\n\
            cavity.kappa_over_g = 20, 40\n";
        let c = ScenarioConfig::parse(text).unwrap();
        assert_eq!(c.name, "custom");
        assert_eq!(c.spec.sigma_a, 4.0);
        assert_eq!(c.spec.n_atoms, 32);
        assert_eq!(
            c.tau.points(),
            vec![0.0, 0.05, 0.1, 0.15000000000000002, 0.2]
        );
        assert_eq!(c.cavity.as_ref().unwrap().kappa_over_g, vec![20.0, 40.0]);
        let again = ScenarioConfig::parse(&c.to_text()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn base_scenario_is_extended() {
        let c = ScenarioConfig::parse("scenario.base = fig3a\ntau.count = 3\n").unwrap();
        assert_eq!(c.name, "fig3a");
        assert_eq!(c.spec.sigma_a, 6.0);
        assert_eq!(c.spec.n_atoms, 72);
        assert_eq!(c.tau.count, 3);
    }

    #[test]
    fn spin_coherent_defaults_atom_count() {
        let c = ScenarioConfig::parse("atom.preset = spin_coherent\natom.sigma = 5\n").unwrap();
        assert_eq!(c.spec.n_atoms, 50);
        let c = ScenarioConfig::parse("atom.preset = spin_coherent\natom.count = 60\n").unwrap();
        assert_eq!(c.spec.n_atoms, 60);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let cases = [
            "tau.count = 0",
            "tau.start = 0.2\ntau.stop = 0.1",
            "atom.count = 19",
            "atom.count = 10",
            "field.window_mult = 2",
            "bogus.key = 1",
            "atom.sigma = abc",
            "atom.preset = thermal",
            "field.mean_plus = 3",
            "cavity.kappa_over_g = 10,-1",
            "cavity.convention = whatever",
            "no equals sign",
            "atom.sigma = 3\natom.sigma = 4",
            "field.preset = dual_coherent\nfield.sigma = 2\nfield.n0 = 5",
        ];
        for text in cases {
            let err = ScenarioConfig::parse(text).unwrap_err();
            assert_eq!(err.kind(), crate::error::ErrorKind::Config, "{text}: {err}");
        }
    }

    #[test]
    fn coherent_means_match_gaussian_moments() {
        let mut c = ScenarioConfig::builtin("fig2a").unwrap();
        c.field_preset = FieldPreset::DualCoherent;
        assert_eq!(c.coherent_means(), (72.0, 72.0));
        c.spec.n0 = 12.0;
        assert_eq!(c.coherent_means(), (78.0, 66.0));
    }
}
