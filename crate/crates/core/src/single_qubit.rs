//! Closed-form single-qubit dephasing and relaxation under one telegraph
//! fluctuator.
//!
//! Weak coupling (`γ > g cosθ`) gives exponential dephasing `e^{-Γ₂t}`;
//! strong coupling (`γ < g cosθ`) gives damped oscillations with isolated
//! zeros. At `θ = 0` an exact form is available for any ratio.

use log::warn;

use crate::error::{Error, Result};
use crate::noise::RtnSource;

/// Relative width around `g = γ` where the exact pure-dephasing form is
/// replaced by its limit `e^{-γt}(1 + γt)`.
pub const CRITICAL_DAMPING_WIDTH: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingRegime {
    Weak,
    Strong,
}

/// Which closed form a profile evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DephasingRegime {
    WeakCoupling,
    StrongCoupling,
    PureDephasingExact,
}

/// `Weak` iff `γ ≥ g cosθ`. Equality is a boundary where neither
/// expansion holds; it is classified weak with a warning.
pub fn coupling_regime(src: &RtnSource) -> CouplingRegime {
    let gz = src.longitudinal_coupling();
    if src.gamma > gz {
        CouplingRegime::Weak
    } else if src.gamma < gz {
        CouplingRegime::Strong
    } else {
        warn!(
            "g cos(theta) = gamma = {}: on the regime boundary, using weak-coupling forms",
            src.gamma
        );
        CouplingRegime::Weak
    }
}

/// Weak-coupling longitudinal rate `2γg²sin²θ / (4γ² + B₀²)`.
pub fn gamma1_weak(src: &RtnSource, b0: f64) -> f64 {
    let s = src.theta.sin();
    2.0 * src.gamma * src.g * src.g * s * s / (4.0 * src.gamma * src.gamma + b0 * b0)
}

/// Strong-coupling longitudinal rate `2γ ε₂² sin²θ`, `ε₂ = g/B₀`.
pub fn gamma1_strong(src: &RtnSource, b0: f64) -> f64 {
    let s = src.theta.sin();
    let eps2 = src.g / b0;
    2.0 * src.gamma * eps2 * eps2 * s * s
}

/// Regime-appropriate Γ₁.
pub fn gamma1(src: &RtnSource, b0: f64) -> f64 {
    match coupling_regime(src) {
        CouplingRegime::Weak => gamma1_weak(src, b0),
        CouplingRegime::Strong => gamma1_strong(src, b0),
    }
}

/// `Γ₂ = Γ₁/2 + g²cos²θ/(2γ)` with the weak-coupling Γ₁.
pub fn gamma2(src: &RtnSource, b0: f64) -> f64 {
    let gz = src.longitudinal_coupling();
    let pure = if gz == 0.0 { 0.0 } else { gz * gz / (2.0 * src.gamma) };
    gamma1_weak(src, b0) / 2.0 + pure
}

fn warn_regime(src: &RtnSource, expected: CouplingRegime, what: &str) {
    if coupling_regime(src) != expected {
        warn!(
            "{what} evaluated outside its regime (g cos(theta) = {}, gamma = {})",
            src.longitudinal_coupling(),
            src.gamma
        );
    }
}

/// Weak-coupling dephasing `e^{-Γ₂t}`.
pub fn zeta_weak(src: &RtnSource, b0: f64, t: f64) -> f64 {
    warn_regime(src, CouplingRegime::Weak, "weak-coupling dephasing");
    (-gamma2(src, b0) * t).exp()
}

/// Strong-coupling dephasing `e^{-γt}[cos(g cosθ t) + ε₁ sin(g cosθ t)]`.
pub fn zeta_strong(src: &RtnSource, t: f64) -> f64 {
    warn_regime(src, CouplingRegime::Strong, "strong-coupling dephasing");
    let gz = src.longitudinal_coupling();
    let eps1 = src.gamma / gz;
    let (s, c) = (gz * t).sin_cos();
    (-src.gamma * t).exp() * (c + eps1 * s)
}

/// Exact dephasing at `θ = 0` for any coupling ratio.
///
/// The hyperbolic branch is rearranged as
/// `½e^{-(γ-η)t}[(1 + e^{-2ηt}) + (γ/η)(1 - e^{-2ηt})]`, `η = √(γ² - g²)`,
/// which stays finite at large `t`.
pub fn zeta_pure_dephasing_exact(g: f64, gamma: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    if (g - gamma).abs() <= CRITICAL_DAMPING_WIDTH * gamma {
        return (-gamma * t).exp() * (1.0 + gamma * t);
    }
    if g < gamma {
        let eta = ((gamma - g) * (gamma + g)).sqrt();
        let slow = g * g / (gamma + eta);
        let fast = (-2.0 * eta * t).exp();
        0.5 * (-slow * t).exp() * ((1.0 + fast) + gamma / eta * -(-2.0 * eta * t).exp_m1())
    } else {
        let omega = ((g - gamma) * (g + gamma)).sqrt();
        let (s, c) = (omega * t).sin_cos();
        (-gamma * t).exp() * (c + gamma / omega * s)
    }
}

/// Zeros `t_ℓ`, `ℓ = 1..=count`, of the strong-coupling dephasing function.
///
/// At `θ = 0` the zeros of the exact form are returned; otherwise those of
/// the strong-coupling approximation.
pub fn zeta_zeros(src: &RtnSource, count: usize) -> Result<Vec<f64>> {
    let gz = src.longitudinal_coupling();
    if src.gamma >= gz {
        return Err(Error::NoZeros {
            coupling: gz,
            gamma: src.gamma,
        });
    }
    if count == 0 {
        return Err(Error::param("count", "must be >= 1"));
    }
    let pi = std::f64::consts::PI;
    let zeros = if src.theta == 0.0 {
        let g = src.g;
        let omega = ((g - src.gamma) * (g + src.gamma)).sqrt();
        let shift = (omega / src.gamma).atan();
        (1..=count).map(|l| (pi * l as f64 - shift) / omega).collect()
    } else {
        let shift = (gz / src.gamma).atan();
        (1..=count).map(|l| (pi * l as f64 - shift) / gz).collect()
    };
    Ok(zeros)
}

/// Rates and small parameters of one fluctuator acting on one qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingProfile {
    pub regime: DephasingRegime,
    /// Γ₂; only meaningful in the weak regime.
    pub gamma2: f64,
    pub gamma1: f64,
    /// `ε₁ = γ / (g cosθ)`.
    pub eps1: f64,
    /// `ε₂ = g / B₀`.
    pub eps2: f64,
    source: RtnSource,
}

impl DephasingProfile {
    pub fn new(src: &RtnSource, b0: f64) -> Self {
        let coupling = coupling_regime(src);
        let regime = if src.theta == 0.0 {
            DephasingRegime::PureDephasingExact
        } else {
            match coupling {
                CouplingRegime::Weak => DephasingRegime::WeakCoupling,
                CouplingRegime::Strong => DephasingRegime::StrongCoupling,
            }
        };
        DephasingProfile {
            regime,
            gamma2: gamma2(src, b0),
            gamma1: gamma1(src, b0),
            eps1: src.gamma / src.longitudinal_coupling(),
            eps2: src.g / b0,
            source: *src,
        }
    }

    pub fn coupling(&self) -> CouplingRegime {
        coupling_regime(&self.source)
    }

    /// ζ(t) from the form selected by `regime`.
    pub fn zeta(&self, t: f64) -> f64 {
        let s = &self.source;
        match self.regime {
            DephasingRegime::PureDephasingExact => zeta_pure_dephasing_exact(s.g, s.gamma, t),
            DephasingRegime::WeakCoupling => (-self.gamma2 * t).exp(),
            DephasingRegime::StrongCoupling => {
                let gz = s.longitudinal_coupling();
                let (sn, cs) = (gz * t).sin_cos();
                (-s.gamma * t).exp() * (cs + self.eps1 * sn)
            }
        }
    }

    /// `e^{-Γ₁t}`.
    pub fn relaxation(&self, t: f64) -> f64 {
        (-self.gamma1 * t).exp()
    }
}

/// Closed-form ζ(t): exact at `θ = 0`, regime expansion otherwise.
pub fn zeta_closed_form(src: &RtnSource, b0: f64, t: f64) -> f64 {
    DephasingProfile::new(src, b0).zeta(t)
}

/// Free-induction signal `cos(B₀t) ζ(t)`.
pub fn fid_signal(src: &RtnSource, b0: f64, t: f64) -> f64 {
    (b0 * t).cos() * zeta_closed_form(src, b0, t)
}
