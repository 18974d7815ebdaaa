use serde::{Deserialize, Serialize};

use super::SystemSpec;
use crate::error::ModelError;
use crate::expression::parse;

/// Either a registry name or a fully specified custom system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SystemConfig {
    Named(String),
    Custom(CustomSystem),
}

impl SystemConfig {
    pub fn named(name: &str) -> Self {
        SystemConfig::Named(name.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSystem {
    pub name: String,
    pub i1: f64,
    pub i2: f64,
    pub i_alpha: Vec<f64>,
    /// Constraint coefficients `A_α(r1)` as expression strings.
    pub a_alpha: Vec<String>,
    /// Potential `V(r2)` as an expression string.
    #[serde(default)]
    pub potential: Option<String>,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
}

struct Entry {
    name: &'static str,
    about: &'static str,
    i1: f64,
    i2: f64,
    i_alpha: &'static [f64],
    a_alpha: &'static [&'static str],
    potential: Option<&'static str>,
    labels: &'static [&'static str],
}

// Sign convention: ṡ_α = −A_α(r1) ṙ2 everywhere.
const REGISTRY: &[Entry] = &[
    Entry {
        name: "particle",
        about: "free particle with ż + x ẏ = 0; (r1, r2, s) = (x, y, z)",
        i1: 1.0,
        i2: 1.0,
        i_alpha: &[1.0],
        a_alpha: &["x"],
        potential: None,
        labels: &["x", "y", "z"],
    },
    Entry {
        name: "knife_edge",
        about: "knife edge, ẋ sin φ = ẏ cos φ, m = J = 1; (r1, r2, s) = (φ, x, y)",
        i1: 1.0,
        i2: 1.0,
        i_alpha: &[1.0],
        a_alpha: &["-tan(phi)"],
        potential: None,
        labels: &["phi", "x", "y"],
    },
    Entry {
        name: "disk",
        about: "vertically rolling disk, M = R = 1, I = 1/2, J = 1/4; (r1, r2, s) = (φ, θ, x, y)",
        i1: 0.25,
        i2: 0.5,
        i_alpha: &[1.0, 1.0],
        a_alpha: &["-cos(phi)", "-sin(phi)"],
        potential: None,
        labels: &["phi", "theta", "x", "y"],
    },
    Entry {
        name: "mobile_robot",
        about: "mobile robot with fixed orientation, m = I = J = R = 1, V = 10 sin ψ; (r1, r2, s) = (θ, ψ, x, y)",
        i1: 1.0,
        i2: 3.0,
        i_alpha: &[1.0, 1.0],
        a_alpha: &["-cos(theta)", "-sin(theta)"],
        potential: Some("10*sin(psi)"),
        labels: &["theta", "psi", "x", "y"],
    },
    Entry {
        name: "knife_edge_inclined",
        about: "knife edge on a plane inclined by π/6, m = J = 1, g = 9.81, V = −m g sin(π/6) x; (r1, r2, s) = (φ, x, y)",
        i1: 1.0,
        i2: 1.0,
        i_alpha: &[1.0],
        a_alpha: &["-tan(phi)"],
        potential: Some("-4.905*x"),
        labels: &["phi", "x", "y"],
    },
];

/// Registry names with a one-line description each.
pub fn registry_names() -> Vec<(&'static str, &'static str)> {
    REGISTRY.iter().map(|e| (e.name, e.about)).collect()
}

pub fn build_system(config: &SystemConfig) -> Result<SystemSpec, ModelError> {
    match config {
        SystemConfig::Named(name) => {
            let entry = REGISTRY
                .iter()
                .find(|e| e.name == name)
                .ok_or_else(|| ModelError::UnknownSystem(name.clone()))?;
            SystemSpec::new(
                entry.name,
                entry.i1,
                entry.i2,
                entry.i_alpha.to_vec(),
                entry.a_alpha.iter().map(|s| parse(s)).collect::<Result<_, _>>()?,
                entry.potential.map(parse).transpose()?,
                entry.labels.iter().map(|s| s.to_string()).collect(),
            )
        }
        SystemConfig::Custom(c) => {
            let m = c.a_alpha.len();
            let labels = c.labels.clone().unwrap_or_else(|| {
                let mut l = vec!["r1".to_string(), "r2".to_string()];
                l.extend((1..=m).map(|a| format!("s{a}")));
                l
            });
            SystemSpec::new(
                c.name.clone(),
                c.i1,
                c.i2,
                c.i_alpha.clone(),
                c.a_alpha.iter().map(|s| parse(s)).collect::<Result<_, _>>()?,
                c.potential.as_deref().map(parse).transpose()?,
                labels,
            )
        }
    }
}
