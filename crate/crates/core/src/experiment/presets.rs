//! Built-in parameter sets, one per figure panel pair.
//!
//! Figures 1 to 5 each show a strong-coupling (γ = 0.005) and a
//! weak-coupling (γ = 0.5) panel pair with g = 0.1. `fig1a`…`fig1d` select
//! single panels of figure 1 (a and b share a run, as do c and d); `fig2`
//! to `fig5` run both couplings.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

use crate::entanglement::{BellFamily, ZetaSource};
use crate::error::{Error, Result};

use super::config::{
    EnginesConfig, ExperimentConfig, GridConfig, ModelConfig, ModelKind, OutputConfig, QubitConfig, StateConfig,
};

pub const STRONG_GAMMA: f64 = 0.005;
pub const WEAK_GAMMA: f64 = 0.5;
pub const COUPLING: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    /// One configuration per panel; output names are the panel names.
    pub panels: Vec<ExperimentConfig>,
}

const NAMES: [(&str, &str); 8] = [
    ("fig1a", "Phi+, noise on A, theta = 0, strong coupling: eigenvalues"),
    ("fig1b", "Phi+, noise on A, theta = 0, strong coupling: |n| and concurrence"),
    ("fig1c", "Phi+, noise on A, theta = 0, weak coupling: eigenvalues"),
    ("fig1d", "Phi+, noise on A, theta = 0, weak coupling: |n| and concurrence"),
    ("fig2", "Phi+, noise on A, theta = pi/3, phi = pi/2, both couplings"),
    ("fig3", "Werner r = 0.5, noise on A, theta = 0, both couplings"),
    ("fig4", "Werner r = 0.5, noise on A, theta = pi/3, phi = pi/2, both couplings"),
    ("fig5", "Phi+, noise on both qubits, theta = 0, both couplings"),
];

pub fn preset_names() -> Vec<&'static str> {
    NAMES.iter().map(|(n, _)| *n).collect()
}

fn panel(name: String, model: ModelKind, theta: f64, phi: f64, gamma: f64, r: f64) -> ExperimentConfig {
    let noisy = QubitConfig {
        b0: 1.0,
        g: COUPLING,
        theta,
        phi,
        gamma,
    };
    ExperimentConfig {
        model: ModelConfig { kind: model },
        qubit_a: noisy,
        qubit_b: match model {
            ModelKind::TwoOne => QubitConfig::noise_free(1.0),
            ModelKind::TwoTwo => noisy,
        },
        state: StateConfig {
            family: BellFamily::Phi,
            r,
            ..StateConfig::default()
        },
        grid: GridConfig {
            t_max: 500.0,
            n_points: 501,
        },
        engines: EnginesConfig {
            analytic_zeta: ZetaSource::ClosedForm,
            ..EnginesConfig::default()
        },
        output: OutputConfig {
            name,
            ..OutputConfig::default()
        },
    }
}

fn both(name: &str, model: ModelKind, theta: f64, phi: f64, r: f64) -> Vec<ExperimentConfig> {
    vec![
        panel(format!("{name}_strong"), model, theta, phi, STRONG_GAMMA, r),
        panel(format!("{name}_weak"), model, theta, phi, WEAK_GAMMA, r),
    ]
}

pub fn preset(name: &str) -> Result<Preset> {
    let (name, description) = NAMES
        .iter()
        .find(|(n, _)| *n == name)
        .copied()
        .ok_or_else(|| Error::Config(format!("unknown preset `{name}`; see list-presets")))?;
    let single = |gamma| vec![panel(name.to_string(), ModelKind::TwoOne, 0.0, 0.0, gamma, 1.0)];
    let panels = match name {
        "fig1a" | "fig1b" => single(STRONG_GAMMA),
        "fig1c" | "fig1d" => single(WEAK_GAMMA),
        "fig2" => both(name, ModelKind::TwoOne, FRAC_PI_3, FRAC_PI_2, 1.0),
        "fig3" => both(name, ModelKind::TwoOne, 0.0, 0.0, 0.5),
        "fig4" => both(name, ModelKind::TwoOne, FRAC_PI_3, FRAC_PI_2, 0.5),
        "fig5" => both(name, ModelKind::TwoTwo, 0.0, 0.0, 1.0),
        _ => unreachable!("name comes from NAMES"),
    };
    Ok(Preset {
        name,
        description,
        panels,
    })
}

/// Every preset panel, deduplicated by parameters.
pub fn all_panels() -> Vec<ExperimentConfig> {
    let mut out: Vec<ExperimentConfig> = Vec::new();
    for name in preset_names() {
        for p in preset(name).expect("known preset").panels {
            let same = |q: &ExperimentConfig| {
                q.model == p.model && q.qubit_a == p.qubit_a && q.qubit_b == p.qubit_b && q.state == p.state
            };
            if !out.iter().any(same) {
                out.push(p);
            }
        }
    }
    out
}
