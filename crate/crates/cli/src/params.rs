//! Initial-data flags, the flat `key = value` config file, and their merge.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use xpoint_core::model::{InitialData, VorticitySpec};

use crate::CliError;

/// Default `c`, the value used throughout the phase-portrait figures.
pub const DEFAULT_C: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Branch {
    /// Orbit inside the potential well (bounded for 0 ≤ ε < 1).
    Inner,
    /// Orbit outside the barrier (unbounded).
    Outer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NuRegion {
    /// Above the barrier, `ε = cosh²ν`.
    A,
    /// Negative energy, `ε = −sinh²ν`.
    C,
}

/// Flat `key = value` settings; `#` starts a comment, keys accept `-` or `_`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: HashMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = HashMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Invalid(format!("config line {}: expected key = value", n + 1))
            })?;
            values.insert(key.trim().replace('_', "-"), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::Invalid(format!("cannot read config {}: {e}", p.display()))
                })?;
                Self::parse(&text)
            }
        }
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Invalid(format!("config key {key}: cannot parse {v:?}"))),
        }
    }

    /// The flag value if given, otherwise the config entry.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    pub fn pick_enum<T: ValueEnum>(
        &self,
        flag: Option<T>,
        key: &str,
    ) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => T::from_str(v, true)
                .map(Some)
                .map_err(|_| CliError::Invalid(format!("config key {key}: unknown value {v:?}"))),
        }
    }
}

/// Initial data, either as reduced oscillator data or as coefficients.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// Oscillator coefficient c (reduced mode; default 0.5)
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// Normalised energy ε = 2E/c²
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon: Option<f64>,
    /// Region-B angle μ ∈ [0, π/2], ε = sin²μ
    #[arg(long)]
    pub mu: Option<f64>,
    /// Region-A or region-C angle ν ≥ 0
    #[arg(long)]
    pub nu: Option<f64>,
    /// Which region --nu refers to
    #[arg(long, value_enum)]
    pub region: Option<NuRegion>,
    /// Initial q
    #[arg(long, allow_hyphen_values = true)]
    pub q0: Option<f64>,
    /// Initial dq/dt
    #[arg(long, allow_hyphen_values = true)]
    pub qdot0: Option<f64>,
    /// Region-B branch selected by --epsilon or --mu
    #[arg(long, value_enum)]
    pub branch: Option<Branch>,
    /// Orientation of the canonical orbit (sign of q, or of dq/dt at q = 0)
    #[arg(long, allow_hyphen_values = true)]
    pub sign: Option<f64>,
    /// Ion skin depth
    #[arg(long = "d-i")]
    pub d_i: Option<f64>,
    /// Electron skin depth
    #[arg(long = "d-e")]
    pub d_e: Option<f64>,
    #[arg(long = "alpha1-0", allow_hyphen_values = true)]
    pub alpha1_0: Option<f64>,
    #[arg(long = "alpha2-0", allow_hyphen_values = true)]
    pub alpha2_0: Option<f64>,
    #[arg(long = "beta1-0", allow_hyphen_values = true)]
    pub beta1_0: Option<f64>,
    #[arg(long = "beta2-0", allow_hyphen_values = true)]
    pub beta2_0: Option<f64>,
    #[arg(long = "b-0", allow_hyphen_values = true)]
    pub b_0: Option<f64>,
    /// Constant vorticity coefficient γ
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// Flat key = value file; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Reduced oscillator data for the given energy and branch; `sign` orients it.
pub fn canonical_point(c: f64, epsilon: f64, branch: Branch, sign: f64) -> (f64, f64) {
    let root = (2.0 * c).sqrt();
    if epsilon > 1.0 {
        (0.0, sign * c * epsilon.sqrt())
    } else if epsilon == 1.0 {
        (0.0, sign * c)
    } else if epsilon >= 0.0 {
        let half = 0.5 * epsilon.sqrt().asin();
        match branch {
            Branch::Inner => (sign * root * half.sin(), 0.0),
            Branch::Outer => (sign * root * half.cos(), 0.0),
        }
    } else {
        let nu = (-epsilon).sqrt().asinh();
        (sign * root * (0.5 * nu).cosh(), 0.0)
    }
}

impl ParamArgs {
    /// Merges the config file and resolves the initial data.
    pub fn resolve(&self, cfg: &ConfigFile) -> Result<InitialData, CliError> {
        let d_i = cfg.pick(self.d_i, "d-i")?.unwrap_or(1.0);
        let d_e = cfg.pick(self.d_e, "d-e")?.unwrap_or(0.0);
        let gamma = match cfg.pick(self.gamma, "gamma")? {
            None => VorticitySpec::Zero,
            Some(g) => VorticitySpec::Constant(g),
        };
        let coeffs = [
            cfg.pick(self.alpha1_0, "alpha1-0")?,
            cfg.pick(self.alpha2_0, "alpha2-0")?,
            cfg.pick(self.beta1_0, "beta1-0")?,
            cfg.pick(self.beta2_0, "beta2-0")?,
            cfg.pick(self.b_0, "b-0")?,
        ];
        let q0 = cfg.pick(self.q0, "q0")?;
        let qdot0 = cfg.pick(self.qdot0, "qdot0")?;
        let epsilon = cfg.pick(self.epsilon, "epsilon")?;
        let mu = cfg.pick(self.mu, "mu")?;
        let nu = cfg.pick(self.nu, "nu")?;
        let c = cfg.pick(self.c, "c")?;
        let sign = cfg.pick(self.sign, "sign")?.unwrap_or(1.0);
        let sign = if sign < 0.0 { -1.0 } else { 1.0 };
        let branch = cfg
            .pick_enum(self.branch, "branch")?
            .unwrap_or(Branch::Inner);
        let region = cfg.pick_enum(self.region, "region")?.unwrap_or(NuRegion::A);

        let reduced_sources = [
            q0.is_some() || qdot0.is_some(),
            epsilon.is_some(),
            mu.is_some(),
            nu.is_some(),
        ];
        let n_reduced = reduced_sources.iter().filter(|&&b| b).count();
        let coefficient_mode = coeffs.iter().any(Option::is_some);

        if coefficient_mode {
            if n_reduced > 0 || c.is_some() {
                return Err(CliError::Invalid(
                    "give either coefficient data (--alpha1-0 ... --b-0) or reduced data (--c with --q0/--qdot0, --epsilon, --mu or --nu), not both".into(),
                ));
            }
            let [a1, a2, b1, b2, b] = coeffs.map(|v| v.unwrap_or(0.0));
            let init = InitialData {
                alpha1_0: a1,
                alpha2_0: a2,
                beta1_0: b1,
                beta2_0: b2,
                b_0: b,
                d_i,
                d_e,
                gamma,
            };
            init.validate()
                .map_err(|e| CliError::Invalid(e.to_string()))?;
            return Ok(init);
        }

        if n_reduced > 1 {
            return Err(CliError::Invalid(
                "choose one of --q0/--qdot0, --epsilon, --mu, --nu".into(),
            ));
        }
        let c = c.unwrap_or(DEFAULT_C);
        if !(c > 0.0) || !c.is_finite() {
            return Err(CliError::Invalid(format!(
                "unsupported parameters: c = {c} <= 0 (turning-point analysis needs c > 0)"
            )));
        }
        let (q, qd) = if let Some(eps) = epsilon {
            if !eps.is_finite() {
                return Err(CliError::Invalid(format!("epsilon = {eps} is not finite")));
            }
            canonical_point(c, eps, branch, sign)
        } else if let Some(mu) = mu {
            if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&mu) {
                return Err(CliError::Invalid(format!("mu = {mu} outside [0, pi/2]")));
            }
            canonical_point(c, mu.sin().powi(2), branch, sign)
        } else if let Some(nu) = nu {
            if !(nu >= 0.0) || !nu.is_finite() {
                return Err(CliError::Invalid(format!("nu = {nu} must be non-negative")));
            }
            let eps = match region {
                NuRegion::A => nu.cosh().powi(2),
                NuRegion::C => -nu.sinh().powi(2),
            };
            canonical_point(c, eps, branch, sign)
        } else if n_reduced == 1 {
            (q0.unwrap_or(0.0), qdot0.unwrap_or(0.0))
        } else {
            return Err(CliError::Invalid(
                "no initial data: give --q0/--qdot0, --epsilon, --mu, --nu or coefficient flags"
                    .into(),
            ));
        };
        let mut init = InitialData::from_reduced(c, q, qd, d_i, d_e);
        init.gamma = gamma;
        init.validate()
            .map_err(|e| CliError::Invalid(e.to_string()))?;
        Ok(init)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use xpoint_core::model::compute_c;

    #[test]
    fn config_parsing_and_precedence() {
        let cfg = ConfigFile::parse("# comment\nc = 0.25\nq0=0.1 # trailing\nd_i = 2\n").unwrap();
        assert_eq!(cfg.get::<f64>("c").unwrap(), Some(0.25));
        assert_eq!(cfg.get::<f64>("d-i").unwrap(), Some(2.0));
        assert_eq!(cfg.pick(Some(0.5), "c").unwrap(), Some(0.5));
        assert!(ConfigFile::parse("novalue\n").is_err());
        assert!(cfg.get::<f64>("missing").unwrap().is_none());
        let bad = ConfigFile::parse("c = abc").unwrap();
        assert!(bad.get::<f64>("c").is_err());
    }

    #[test]
    fn reduced_data_round_trip() {
        let args = ParamArgs {
            q0: Some(0.0),
            qdot0: Some(0.5),
            ..Default::default()
        };
        let init = args.resolve(&ConfigFile::default()).unwrap();
        assert!((compute_c(&init) - 0.5).abs() < 1e-15);
        assert_eq!(init.q0(), 0.0);
        assert!((init.qdot0() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn conflicting_sources_are_rejected() {
        let args = ParamArgs {
            epsilon: Some(0.5),
            mu: Some(0.3),
            ..Default::default()
        };
        assert!(args.resolve(&ConfigFile::default()).is_err());
        let args = ParamArgs {
            b_0: Some(1.0),
            c: Some(0.5),
            ..Default::default()
        };
        assert!(args.resolve(&ConfigFile::default()).is_err());
        assert!(ParamArgs::default()
            .resolve(&ConfigFile::default())
            .is_err());
        let args = ParamArgs {
            b_0: Some(1.0),
            d_i: Some(0.0),
            ..Default::default()
        };
        assert!(args.resolve(&ConfigFile::default()).is_err());
    }

    #[test]
    fn canonical_points_have_requested_energy() {
        let c = 0.5;
        for &eps in &[-1.0, 0.0, 0.3, 0.99, 1.0, 1.7] {
            for branch in [Branch::Inner, Branch::Outer] {
                let (q, qd) = canonical_point(c, eps, branch, 1.0);
                let e = 0.5 * qd * qd + c * q * q - 0.5 * q.powi(4);
                assert!((2.0 * e / (c * c) - eps).abs() < 1e-13, "{eps} {branch:?}");
            }
        }
    }
}
