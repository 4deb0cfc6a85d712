//! TOML experiment and phase-scan configuration.
//!
//! See `configs/example.toml` and `configs/phase_scan.toml` in the
//! repository for commented examples.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::entanglement::{BellFamily, InitialState, ZetaSource};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::noise::{NoiseModel, QubitPair, QubitSpec, RtnSource};
use crate::phase::PhaseScanSpec;
use crate::single_qubit::{coupling_regime, CouplingRegime};
use crate::entanglement::ESD_SAMPLES_PER_HALF_PERIOD;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Analytic,
    QuasiHamiltonian,
    MonteCarlo,
}

impl Engine {
    pub const ALL: [Engine; 3] = [Engine::Analytic, Engine::QuasiHamiltonian, Engine::MonteCarlo];

    pub fn as_str(&self) -> &'static str {
        match self {
            Engine::Analytic => "analytic",
            Engine::QuasiHamiltonian => "quasi_hamiltonian",
            Engine::MonteCarlo => "monte_carlo",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Engine::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown engine `{s}`")))
    }
}

/// Monte Carlo run count and comparison tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceTier {
    /// 40,000 runs, tolerance 0.02.
    #[default]
    Full,
    /// 4,000 runs, tolerance 0.07.
    Smoke,
}

impl ToleranceTier {
    pub fn runs(&self) -> usize {
        match self {
            ToleranceTier::Full => 40_000,
            ToleranceTier::Smoke => 4_000,
        }
    }

    pub fn tolerance(&self) -> f64 {
        match self {
            ToleranceTier::Full => 0.02,
            ToleranceTier::Smoke => 0.07,
        }
    }
}

impl FromStr for ToleranceTier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(ToleranceTier::Full),
            "smoke" => Ok(ToleranceTier::Smoke),
            _ => Err(Error::Config(format!("unknown tolerance tier `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    TwoOne,
    TwoTwo,
}

impl From<ModelKind> for NoiseModel {
    fn from(k: ModelKind) -> Self {
        match k {
            ModelKind::TwoOne => NoiseModel::TwoOne,
            ModelKind::TwoTwo => NoiseModel::TwoTwo,
        }
    }
}

/// One qubit; `g = 0` means no noise source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitConfig {
    #[serde(default = "one")]
    pub b0: f64,
    #[serde(default)]
    pub g: f64,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub phi: f64,
    #[serde(default)]
    pub gamma: f64,
}

impl QubitConfig {
    pub fn noise_free(b0: f64) -> Self {
        QubitConfig {
            b0,
            g: 0.0,
            theta: 0.0,
            phi: 0.0,
            gamma: 0.0,
        }
    }

    fn spec(&self, name: &str) -> Result<QubitSpec> {
        let wrap = |e: Error| Error::Config(format!("{name}: {e}"));
        if self.g == 0.0 {
            return QubitSpec::noise_free(self.b0).map_err(wrap);
        }
        if !(self.gamma > 0.0) {
            return Err(Error::Config(format!("{name}: gamma must be > 0 for a noisy qubit")));
        }
        let src = RtnSource::new(self.g, self.theta, self.phi, self.gamma).map_err(wrap)?;
        QubitSpec::noisy(self.b0, src).map_err(wrap)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    pub family: BellFamily,
    #[serde(default = "inv_sqrt2")]
    pub alpha: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default = "one")]
    pub r: f64,
}

impl StateConfig {
    pub fn state(&self) -> Result<InitialState> {
        InitialState::new(self.family, self.alpha, self.delta, self.r)
            .map_err(|e| Error::Config(format!("state: {e}")))
    }
}

impl Default for StateConfig {
    fn default() -> Self {
        StateConfig {
            family: BellFamily::Phi,
            alpha: inv_sqrt2(),
            delta: 0.0,
            r: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t_max: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnginesConfig {
    #[serde(default = "all_engines")]
    pub list: Vec<Engine>,
    /// Overrides the tier's run count; the tolerance becomes `4/√runs`.
    #[serde(default)]
    pub runs: Option<usize>,
    #[serde(default = "one_u64")]
    pub seed: u64,
    #[serde(default)]
    pub tier: ToleranceTier,
    /// Dephasing factors used by the analytic engine.
    #[serde(default = "closed_form")]
    pub analytic_zeta: ZetaSource,
}

impl Default for EnginesConfig {
    fn default() -> Self {
        EnginesConfig {
            list: all_engines(),
            runs: None,
            seed: 1,
            tier: ToleranceTier::Full,
            analytic_zeta: ZetaSource::ClosedForm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "dot")]
    pub dir: PathBuf,
    #[serde(default = "default_name")]
    pub name: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: dot(),
            name: default_name(),
        }
    }
}

fn one() -> f64 {
    1.0
}
fn one_u64() -> u64 {
    1
}
fn inv_sqrt2() -> f64 {
    std::f64::consts::FRAC_1_SQRT_2
}
fn all_engines() -> Vec<Engine> {
    Engine::ALL.to_vec()
}
fn closed_form() -> ZetaSource {
    ZetaSource::ClosedForm
}
fn dot() -> PathBuf {
    PathBuf::from(".")
}
fn default_name() -> String {
    "experiment".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub qubit_a: QubitConfig,
    #[serde(default = "default_qubit_b")]
    pub qubit_b: QubitConfig,
    pub state: StateConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub engines: EnginesConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_qubit_b() -> QubitConfig {
    QubitConfig::noise_free(1.0)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

impl ExperimentConfig {
    /// Parses and validates.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml(&read(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn pair(&self) -> Result<QubitPair> {
        Ok(QubitPair::new(self.qubit_a.spec("qubit_a")?, self.qubit_b.spec("qubit_b")?))
    }

    pub fn state(&self) -> Result<InitialState> {
        self.state.state()
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::uniform(self.grid.t_max, self.grid.n_points).map_err(|e| Error::Config(format!("grid: {e}")))
    }

    pub fn runs(&self) -> usize {
        self.engines.runs.unwrap_or(self.engines.tier.runs())
    }

    /// Monte Carlo comparison tolerance.
    pub fn mc_tolerance(&self) -> f64 {
        match self.engines.runs {
            Some(n) => 4.0 / (n as f64).sqrt(),
            None => self.engines.tier.tolerance(),
        }
    }

    /// Checks ranges, model/qubit consistency and grid resolution.
    pub fn validate(&self) -> Result<()> {
        let pair = self.pair()?;
        self.state()?;
        let grid = self.grid()?;
        match (self.model.kind, pair.a.is_noisy(), pair.b.is_noisy()) {
            (ModelKind::TwoOne, true, false) | (ModelKind::TwoTwo, true, true) => {}
            (ModelKind::TwoOne, _, _) => {
                return Err(Error::Config("two_one model needs g > 0 on qubit_a and g = 0 on qubit_b".into()))
            }
            (ModelKind::TwoTwo, _, _) => return Err(Error::Config("two_two model needs g > 0 on both qubits".into())),
        }
        if self.engines.list.is_empty() {
            return Err(Error::Config("engines.list is empty".into()));
        }
        if self.runs() == 0 {
            return Err(Error::Config("engines.runs must be >= 1".into()));
        }
        // Nyquist for the fastest two-qubit precession
        let fastest: f64 = [self.qubit_a, self.qubit_b].iter().map(|q| q.b0.abs() + q.g).sum();
        grid.check_resolves(fastest, 1.0, "precession")
            .map_err(|e| Error::Config(e.to_string()))?;
        let looping: f64 = [pair.a, pair.b]
            .iter()
            .filter_map(|q| q.source)
            .filter(|s| coupling_regime(s) == CouplingRegime::Strong)
            .map(|s| s.longitudinal_coupling())
            .sum();
        grid.check_resolves(looping, ESD_SAMPLES_PER_HALF_PERIOD, "strong-coupling oscillation")
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseScanSection {
    #[serde(default = "scan_g")]
    pub g: f64,
    #[serde(default = "one")]
    pub b0: f64,
    #[serde(default)]
    pub phi: f64,
    #[serde(default = "ratio_min")]
    pub ratio_min: f64,
    #[serde(default = "ratio_max")]
    pub ratio_max: f64,
    #[serde(default = "twenty")]
    pub n_ratio: usize,
    #[serde(default)]
    pub theta_min: f64,
    #[serde(default = "theta_max")]
    pub theta_max: f64,
    #[serde(default = "twenty")]
    pub n_theta: usize,
}

fn scan_g() -> f64 {
    PhaseScanSpec::default().g
}
fn ratio_min() -> f64 {
    PhaseScanSpec::default().ratio_min
}
fn ratio_max() -> f64 {
    PhaseScanSpec::default().ratio_max
}
fn theta_max() -> f64 {
    PhaseScanSpec::default().theta_max
}
fn twenty() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseScanConfig {
    pub phase_scan: PhaseScanSection,
    #[serde(default)]
    pub state: StateConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl PhaseScanConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: PhaseScanConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.spec()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml(&read(path)?)
    }

    pub fn spec(&self) -> Result<PhaseScanSpec> {
        let p = &self.phase_scan;
        let spec = PhaseScanSpec {
            g: p.g,
            b0: p.b0,
            phi: p.phi,
            state: self.state.state()?,
            ratio_min: p.ratio_min,
            ratio_max: p.ratio_max,
            n_ratio: p.n_ratio,
            theta_min: p.theta_min,
            theta_max: p.theta_max,
            n_theta: p.n_theta,
        };
        spec.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(spec)
    }
}
