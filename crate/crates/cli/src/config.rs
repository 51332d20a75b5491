//! Flat `key=value` scenario files.
//!
//! ```text
//! # figure-scale hybrid run
//! scheme=hybrid
//! mod=3
//! m=6
//! dt=0.01
//! T=4
//! ```
//!
//! Recognised keys: `scheme`, `beta`, `gamma`, `e`, `mod`, `m`, `dt`, `T`,
//! `outputs`. Anything after `#` is a comment. Command-line overrides use the
//! same syntax and replace values from the file.

use std::collections::BTreeMap;
use std::fmt;

use contact_bar::assembly::WeightMode;
use contact_bar::experiments::{Outputs, ScenarioConfig};
use contact_bar::integrators::{SchemeKind, SchemeParams};

pub const KEYS: [&str; 9] = ["scheme", "beta", "gamma", "e", "mod", "m", "dt", "T", "outputs"];

/// Where a setting came from, for error messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Override(usize),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Override(n) => write!(f, "override {n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("{origin}: {message}")]
    At { origin: Origin, message: String },
    #[error("{0}")]
    Scenario(String),
}

fn at(origin: Origin, message: impl Into<String>) -> ConfigError {
    ConfigError::At {
        origin,
        message: message.into(),
    }
}

/// Scheme names accepted by the `scheme` key.
pub const SCHEMES: [&str; 6] = [
    "crank_nicolson",
    "newmark",
    "backward_euler",
    "paoli_schatzman",
    "hybrid",
    "semidiscrete_cn",
];

/// Collected settings before they are turned into a [`ScenarioConfig`].
#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<&'static str, (String, Origin)>,
}

fn split_pair(raw: &str, origin: Origin) -> Result<(&'static str, String), ConfigError> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| at(origin, format!("expected key=value, got '{raw}'")))?;
    let key = key.trim();
    let known = KEYS
        .iter()
        .find(|k| **k == key)
        .ok_or_else(|| at(origin, format!("unknown key '{key}' (known keys: {})", KEYS.join(", "))))?;
    Ok((known, value.trim().to_string()))
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut s = Settings::default();
        for (idx, line) in text.lines().enumerate() {
            let origin = Origin::Line(idx + 1);
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = split_pair(body, origin)?;
            if let Some((_, first)) = s.values.get(key) {
                return Err(at(origin, format!("duplicate key '{key}' (first set at {first})")));
            }
            s.values.insert(key, (value, origin));
        }
        Ok(s)
    }

    /// Applies `key=value` overrides on top of the file settings.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<(), ConfigError> {
        for (idx, raw) in overrides.iter().enumerate() {
            let origin = Origin::Override(idx + 1);
            let (key, value) = split_pair(raw.as_ref().trim(), origin)?;
            self.values.insert(key, (value, origin));
        }
        Ok(())
    }

    fn get(&self, key: &str) -> Option<(&str, Origin)> {
        self.values.get(key).map(|(v, o)| (v.as_str(), *o))
    }

    fn number(&self, key: &str) -> Result<Option<(f64, Origin)>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some((v, o)) => {
                let x: f64 = v.parse().map_err(|_| at(o, format!("{key}: not a number: '{v}'")))?;
                if !x.is_finite() {
                    return Err(at(o, format!("{key} must be finite")));
                }
                Ok(Some((x, o)))
            }
        }
    }

    /// Builds and validates the scenario, starting from the defaults
    /// (Crank–Nicolson, mod 3, `m = 6`, `dt = 0.01`, `T = 4`).
    pub fn build(&self) -> Result<ScenarioConfig, ConfigError> {
        let mut cfg = ScenarioConfig::default();

        if let Some((v, o)) = self.get("mod") {
            cfg.mode = parse_mode(v).ok_or_else(|| at(o, format!("unknown mod '{v}' (expected 1, 2 or 3)")))?;
        }
        if let Some((v, o)) = self.get("m") {
            let m: usize = v.parse().map_err(|_| at(o, format!("m: not a positive integer: '{v}'")))?;
            if m < 3 {
                return Err(at(o, format!("m must be at least 3, got {m}")));
            }
            cfg.m = m;
        }
        if let Some((dt, o)) = self.number("dt")? {
            if dt <= 0.0 {
                return Err(at(o, format!("dt must be positive, got {dt}")));
            }
            cfg.dt = dt;
        }
        if let Some((t, o)) = self.number("T")? {
            if t < 0.0 {
                return Err(at(o, format!("T must be nonnegative, got {t}")));
            }
            cfg.t_final = t;
        }
        if let Some((v, o)) = self.get("outputs") {
            cfg.outputs = parse_outputs(v).map_err(|m| at(o, m))?;
        }

        let name = self.get("scheme").map(|(v, _)| v).unwrap_or("crank_nicolson");
        let scheme_origin = self.get("scheme").map(|(_, o)| o);
        let dt = cfg.dt;
        let mut scheme = match name {
            "crank_nicolson" => SchemeParams::crank_nicolson(dt),
            "newmark" => SchemeParams::crank_nicolson(dt),
            "backward_euler" => SchemeParams::backward_euler(dt),
            "paoli_schatzman" => SchemeParams::paoli_schatzman(0.25, 1.0, dt),
            "hybrid" => SchemeParams::hybrid(dt),
            "semidiscrete_cn" => SchemeParams::semidiscrete_cn(dt),
            other => {
                return Err(at(
                    scheme_origin.unwrap_or(Origin::Line(0)),
                    format!("unknown scheme '{other}' (expected one of {})", SCHEMES.join(", ")),
                ))
            }
        };
        let takes = |key: &str| match key {
            "beta" => matches!(name, "newmark" | "paoli_schatzman"),
            "gamma" => name == "newmark",
            _ => name == "paoli_schatzman",
        };
        for key in ["beta", "gamma", "e"] {
            if let Some((x, o)) = self.number(key)? {
                if !takes(key) {
                    return Err(at(o, format!("{key} does not apply to scheme {name}")));
                }
                match key {
                    "beta" => scheme.beta = x,
                    "gamma" => scheme.gamma = x,
                    _ => scheme.e = x,
                }
            }
        }
        cfg.scheme = scheme;
        cfg.validate().map_err(|e| ConfigError::Scenario(e.to_string()))?;
        Ok(cfg)
    }
}

pub fn parse_mode(v: &str) -> Option<WeightMode> {
    match v.to_ascii_lowercase().as_str() {
        "1" | "mod1" => Some(WeightMode::Mod1),
        "2" | "mod2" => Some(WeightMode::Mod2),
        "3" | "mod3" => Some(WeightMode::Mod3),
        _ => None,
    }
}

fn parse_outputs(v: &str) -> Result<Outputs, String> {
    let mut out = Outputs {
        trajectory: false,
        energy: false,
        errors: false,
    };
    for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item {
            "trajectory" => out.trajectory = true,
            "energy" => out.energy = true,
            "errors" => out.errors = true,
            other => return Err(format!("unknown output '{other}' (expected trajectory, energy, errors)")),
        }
    }
    Ok(out)
}

/// Parses a scenario file with no overrides.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    Settings::parse(text)?.build()
}

/// Name under which `kind` is written in scenario files. Newmark with
/// `(1/4, 1/2)` is reported as `crank_nicolson`.
pub fn scheme_name(params: &SchemeParams) -> &'static str {
    match params.kind {
        SchemeKind::Newmark if params.beta == 0.25 && params.gamma == 0.5 => "crank_nicolson",
        SchemeKind::Newmark => "newmark",
        SchemeKind::BackwardEuler => "backward_euler",
        SchemeKind::PaoliSchatzman => "paoli_schatzman",
        SchemeKind::Hybrid => "hybrid",
        SchemeKind::SemiDiscreteCn => "semidiscrete_cn",
    }
}
