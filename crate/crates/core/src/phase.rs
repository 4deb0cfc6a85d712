//! Revival versus single-death regions in `(g/γ, θ)` space.
//!
//! A point is classified from the concurrence of the two-one model (noise on
//! qubit A only) and compared with the boundary `g/γ = sec θ`: above it the
//! dephasing oscillates and entanglement dies and revives, below it there is
//! at most one terminal death.

use std::io::Write;

use rayon::prelude::*;

use crate::entanglement::{esd_times, BellFamily, ConcurrenceCurve, InitialState, ZetaSource};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::noise::{QubitPair, QubitSpec, RtnSource};
use crate::single_qubit::{coupling_regime, gamma2, CouplingRegime};

/// Half-width of the band `|ln((g/γ) cosθ)| < BOUNDARY_BAND` in which the
/// numerical label is not compared with the boundary.
pub const BOUNDARY_BAND: f64 = 0.1;

/// Probe horizon in units of the slowest decay time.
pub const HORIZON_DECAY_TIMES: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    EsdWithRevival,
    SingleDeath,
    NoEsd,
}

impl Region {
    pub fn as_str(&self) -> &'static str {
        match self {
            Region::EsdWithRevival => "esd_with_revival",
            Region::SingleDeath => "single_death",
            Region::NoEsd => "no_esd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionLabel {
    pub label: Region,
    /// `g/γ − sec θ`; positive above the boundary.
    pub boundary_distance: f64,
    /// Inside the band around the boundary.
    pub in_band: bool,
}

impl RegionLabel {
    /// Revivals are predicted above the boundary.
    pub fn predicts_revival(&self) -> bool {
        self.boundary_distance > 0.0
    }

    /// Numerical label consistent with the boundary, or inside the band.
    pub fn agrees_with_boundary(&self) -> bool {
        self.in_band || (self.label == Region::EsdWithRevival) == self.predicts_revival()
    }
}

/// Slowest decay rate of `ζ`: `γ` in strong coupling, `min(γ, Γ₂)` in weak.
pub fn gamma_effective(src: &RtnSource, b0: f64) -> f64 {
    match coupling_regime(src) {
        CouplingRegime::Strong => src.gamma,
        CouplingRegime::Weak => src.gamma.min(gamma2(src, b0)),
    }
}

/// Horizon `20/γ_eff` needed to see a terminal death.
pub fn required_horizon(src: &RtnSource, b0: f64) -> f64 {
    HORIZON_DECAY_TIMES / gamma_effective(src, b0)
}

/// Uniform grid over [`required_horizon`] fine enough for [`esd_times`].
pub fn probe_grid(src: &RtnSource, b0: f64) -> Result<TimeGrid> {
    let horizon = required_horizon(src, b0);
    if !horizon.is_finite() {
        return Err(Error::Inconclusive {
            horizon: f64::INFINITY,
            required: horizon,
        });
    }
    let gz = src.longitudinal_coupling();
    let mut spacing = horizon / 2000.0;
    if gz > 0.0 {
        spacing = spacing.min(std::f64::consts::PI / (20.0 * gz));
    }
    let n = (horizon / spacing).ceil() as usize + 1;
    TimeGrid::uniform(horizon, n)
}

/// `g/γ − sec θ` and the band flag.
pub fn boundary_distance(src: &RtnSource) -> (f64, bool) {
    let cos = src.theta.cos();
    let ratio = src.g / src.gamma;
    (ratio - 1.0 / cos, (ratio * cos).ln().abs() < BOUNDARY_BAND)
}

/// Classifies one point of the two-one model on `grid`.
///
/// Fails with [`Error::Inconclusive`] if the grid ends before
/// [`required_horizon`].
pub fn classify(src: &RtnSource, state: &InitialState, b0: f64, grid: &TimeGrid) -> Result<RegionLabel> {
    let required = required_horizon(src, b0);
    if !(grid.last() >= required * (1.0 - 1e-12)) {
        return Err(Error::Inconclusive {
            horizon: grid.last(),
            required,
        });
    }
    let pair = QubitPair::new(QubitSpec::noisy(b0, *src)?, QubitSpec::noise_free(b0)?);
    let curve = ConcurrenceCurve::compute(state, &pair, grid, ZetaSource::Exact)?;
    let deaths = esd_times(&curve)?;
    let label = if deaths.is_empty() {
        Region::NoEsd
    } else if deaths.iter().any(|d| d.revival.is_some()) {
        Region::EsdWithRevival
    } else {
        Region::SingleDeath
    };
    let (boundary_distance, in_band) = boundary_distance(src);
    Ok(RegionLabel {
        label,
        boundary_distance,
        in_band,
    })
}

/// `sec θ` for each `θ ∈ [0, π/2)`.
pub fn boundary_curve(thetas: &[f64]) -> Result<Vec<f64>> {
    thetas
        .iter()
        .map(|&th| {
            if (0.0..std::f64::consts::FRAC_PI_2).contains(&th) {
                Ok(1.0 / th.cos())
            } else {
                Err(Error::param("theta", format!("boundary needs theta in [0, pi/2), got {th}")))
            }
        })
        .collect()
}

/// Zero-concurrence test for a Bell pair with noise on A, from the Bloch
/// length `ρ_A ∈ [0, 1]` and polar angle `θ_A` of qubit A:
/// `2ρ_A|sin θ_A| + ρ_A cos θ_A ≤ 1`.
pub fn bloch_cone_test(rho_a: f64, theta_a: f64) -> Result<bool> {
    if !(0.0..=1.0).contains(&rho_a) {
        return Err(Error::param("rho_a", format!("must lie in [0, 1], got {rho_a}")));
    }
    Ok(2.0 * rho_a * theta_a.sin().abs() + rho_a * theta_a.cos() <= 1.0)
}

/// Grid and state for [`phase_scan`].
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseScanSpec {
    pub g: f64,
    pub b0: f64,
    pub phi: f64,
    pub state: InitialState,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub n_ratio: usize,
    pub theta_min: f64,
    pub theta_max: f64,
    pub n_theta: usize,
}

impl Default for PhaseScanSpec {
    fn default() -> Self {
        PhaseScanSpec {
            g: 0.01,
            b0: 1.0,
            phi: 0.0,
            state: InitialState::bell(BellFamily::Phi, 1.0).expect("valid state"),
            ratio_min: 0.2,
            ratio_max: 20.0,
            n_ratio: 20,
            theta_min: 0.0,
            theta_max: 1.4,
            n_theta: 20,
        }
    }
}

impl PhaseScanSpec {
    /// Log-spaced `g/γ` values.
    pub fn ratios(&self) -> Vec<f64> {
        spaced(self.ratio_min.ln(), self.ratio_max.ln(), self.n_ratio)
            .into_iter()
            .map(f64::exp)
            .collect()
    }

    pub fn thetas(&self) -> Vec<f64> {
        spaced(self.theta_min, self.theta_max, self.n_theta)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g > 0.0 && self.g.is_finite()) {
            return Err(Error::param("g", "must be > 0"));
        }
        if !(self.ratio_min > 0.0 && self.ratio_max >= self.ratio_min) {
            return Err(Error::param("ratio", "need 0 < ratio_min <= ratio_max"));
        }
        if self.n_ratio == 0 || self.n_theta == 0 {
            return Err(Error::param("n", "grid needs at least one point per axis"));
        }
        if !(self.theta_min >= 0.0 && self.theta_max >= self.theta_min) {
            return Err(Error::param("theta", "need 0 <= theta_min <= theta_max"));
        }
        if self.theta_max >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::param(
                "theta",
                format!("theta = pi/2 column has no boundary, got theta_max = {}", self.theta_max),
            ));
        }
        Ok(())
    }
}

fn spaced(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub theta: f64,
    pub ratio: f64,
    pub region: RegionLabel,
}

/// Classifies every `(θ, g/γ)` point, θ-major.
pub fn phase_scan(spec: &PhaseScanSpec) -> Result<Vec<PhasePoint>> {
    spec.validate()?;
    let points: Vec<(f64, f64)> = spec
        .thetas()
        .into_iter()
        .flat_map(|th| spec.ratios().into_iter().map(move |r| (th, r)))
        .collect();
    points
        .par_iter()
        .map(|&(theta, ratio)| {
            let src = RtnSource::new(spec.g, theta, spec.phi, spec.g / ratio)?;
            let grid = probe_grid(&src, spec.b0)?;
            let region = classify(&src, &spec.state, spec.b0, &grid)?;
            Ok(PhasePoint { theta, ratio, region })
        })
        .collect()
}

/// CSV with columns `theta, g_over_gamma, label, boundary_distance`.
pub fn write_phase_csv<W: Write>(points: &[PhasePoint], mut out: W) -> Result<()> {
    writeln!(out, "theta,g_over_gamma,label,boundary_distance")?;
    for p in points {
        writeln!(
            out,
            "{:.11e},{:.11e},{},{:.11e}",
            p.theta,
            p.ratio,
            p.region.label.as_str(),
            p.region.boundary_distance
        )?;
    }
    Ok(())
}
