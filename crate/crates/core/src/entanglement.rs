//! Wootters concurrence and the closed-form Bloch vectors, λ spectra and
//! concurrences of generalized Bell / extended Werner states when one or
//! both qubits see telegraph noise.
//!
//! Every closed form here is driven by two per-qubit numbers at time `t`:
//! the complex transverse amplitude `z = ζ e^{iB₀t}` and the longitudinal
//! factor `e^{-Γ₁t}` (see [`QubitDecay`]). A noise-free qubit has
//! `z = e^{iB₀t}` and no relaxation.

use nalgebra::{Matrix2, Matrix4, Vector4};

use crate::bloch::{from_bloch, purity_norm, to_bloch, BlochVector2Q, DensityMatrix, POSITIVITY_TOL};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linalg::{c, hermiticity_defect, kron2, pauli, psd_sqrt, C64};
use crate::noise::{transfer_series, NoiseModel, QubitPair, QubitSpec};
use crate::single_qubit::{coupling_regime, zeta_pure_dephasing_exact, CouplingRegime, DephasingProfile};

/// Concurrence must exceed this after a death to count as a revival.
pub const REVIVAL_THRESHOLD: f64 = 1e-6;

/// Minimum samples per half loop period required by [`esd_times`].
pub const ESD_SAMPLES_PER_HALF_PERIOD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BellFamily {
    /// `α|00⟩ + β|11⟩`
    Phi,
    /// `α|01⟩ + β|10⟩`
    Psi,
}

/// Extended Werner state `r|ψ⟩⟨ψ| + (1 - r) I₄/4` built on a generalized
/// Bell state with `β = √(1-α²) e^{iδ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    pub family: BellFamily,
    pub alpha: f64,
    pub delta: f64,
    pub r: f64,
}

impl InitialState {
    pub fn new(family: BellFamily, alpha: f64, delta: f64, r: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::param("alpha", format!("must lie in [0, 1], got {alpha}")));
        }
        if !delta.is_finite() {
            return Err(Error::param("delta", "must be finite"));
        }
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::param("r", format!("must lie in [0, 1], got {r}")));
        }
        Ok(InitialState {
            family,
            alpha,
            delta,
            r,
        })
    }

    /// `(|00⟩ + |11⟩)/√2` or `(|01⟩ + |10⟩)/√2` mixed with weight `r`.
    pub fn bell(family: BellFamily, r: f64) -> Result<Self> {
        Self::new(family, std::f64::consts::FRAC_1_SQRT_2, 0.0, r)
    }

    pub fn beta(&self) -> C64 {
        C64::from_polar(self.beta_abs(), self.delta)
    }

    pub fn beta_abs(&self) -> f64 {
        (1.0 - self.alpha * self.alpha).max(0.0).sqrt()
    }

    pub fn state_vector(&self) -> Vector4<C64> {
        let a = c(self.alpha, 0.0);
        let b = self.beta();
        let z = c(0.0, 0.0);
        match self.family {
            BellFamily::Phi => Vector4::new(a, z, z, b),
            BellFamily::Psi => Vector4::new(z, a, b, z),
        }
    }

    pub fn density_matrix(&self) -> DensityMatrix {
        let psi = self.state_vector();
        let rho = psi * psi.adjoint() * c(self.r, 0.0)
            + Matrix4::<C64>::identity() * c((1.0 - self.r) / 4.0, 0.0);
        DensityMatrix::new_unchecked(rho)
    }

    pub fn bloch(&self) -> BlochVector2Q {
        to_bloch(&self.density_matrix()).expect("Werner states are valid density matrices")
    }

    /// `2α|β|`, the concurrence of the underlying pure state.
    pub fn pure_concurrence(&self) -> f64 {
        2.0 * self.alpha * self.beta_abs()
    }

    fn is_degenerate(&self) -> bool {
        self.r == 0.0 || self.alpha == 0.0 || self.beta_abs() == 0.0
    }

    /// `⟨σ_z^A⟩` and `⟨σ_z^B⟩` of the pure state, and `⟨σ_z^A σ_z^B⟩`.
    fn polarizations(&self) -> (f64, f64, f64) {
        let s = 2.0 * self.alpha * self.alpha - 1.0;
        match self.family {
            BellFamily::Phi => (s, s, 1.0),
            BellFamily::Psi => (s, -s, -1.0),
        }
    }

    /// Pure-state `[[n₅, n₆], [n₉, n₁₀]]` (rows: σ_x, σ_y on A).
    fn transverse_block(&self) -> Matrix2<f64> {
        let b = self.beta() * (2.0 * self.alpha);
        match self.family {
            BellFamily::Phi => Matrix2::new(b.re, b.im, b.im, -b.re),
            BellFamily::Psi => Matrix2::new(b.re, -b.im, b.im, b.re),
        }
    }

    /// The coherence product entering the state's off-diagonal block:
    /// `z_A z_B` for Φ, `z_A z̄_B` for Ψ.
    fn pair_product(&self, a: C64, b: C64) -> C64 {
        match self.family {
            BellFamily::Phi => a * b,
            BellFamily::Psi => a * b.conj(),
        }
    }
}

/// Per-qubit decay factors at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitDecay {
    /// `T₁₁ + i T₁₂` of the single-qubit transfer matrix, `ζ e^{iB₀t}`.
    pub coherence: C64,
    /// `T₃₃`, `e^{-Γ₁t}`.
    pub relax: f64,
}

impl QubitDecay {
    pub fn free(b0: f64, t: f64) -> Self {
        QubitDecay {
            coherence: C64::from_polar(1.0, b0 * t),
            relax: 1.0,
        }
    }

    /// From a real dephasing function and relaxation factor.
    pub fn from_zeta(zeta: f64, relax: f64, b0: f64, t: f64) -> Self {
        QubitDecay {
            coherence: C64::from_polar(1.0, b0 * t) * zeta,
            relax,
        }
    }

    /// |ζ|
    pub fn zeta_abs(&self) -> f64 {
        self.coherence.norm()
    }

    /// 2×2 transverse block `[[Re z, Im z], [-Im z, Re z]]`.
    fn transverse(&self) -> Matrix2<f64> {
        let (a, b) = (self.coherence.re, self.coherence.im);
        Matrix2::new(a, b, -b, a)
    }
}

/// Where the dephasing and relaxation factors come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZetaSource {
    /// Exact pure-dephasing form at `θ = 0`, quasi-Hamiltonian otherwise.
    #[default]
    Exact,
    /// Regime expansions (weak/strong coupling) with their Γ₁; exact form
    /// at `θ = 0`.
    ClosedForm,
    /// Quasi-Hamiltonian transfer matrix for every source.
    QuasiHamiltonian,
}

/// Decay factors of one qubit on every grid time.
pub fn decay_series(spec: &QubitSpec, grid: &TimeGrid, source: ZetaSource) -> Result<Vec<QubitDecay>> {
    let times = grid.times();
    let Some(src) = spec.source else {
        return Ok(times.iter().map(|&t| QubitDecay::free(spec.b0, t)).collect());
    };
    let from_transfer = || -> Result<Vec<QubitDecay>> {
        Ok(transfer_series(spec, grid)?
            .iter()
            .map(|r| QubitDecay {
                coherence: r.coherence(),
                relax: r.relaxation(),
            })
            .collect())
    };
    match source {
        ZetaSource::QuasiHamiltonian => from_transfer(),
        ZetaSource::Exact if src.theta == 0.0 => Ok(times
            .iter()
            .map(|&t| QubitDecay::from_zeta(zeta_pure_dephasing_exact(src.g, src.gamma, t), 1.0, spec.b0, t))
            .collect()),
        ZetaSource::Exact => from_transfer(),
        ZetaSource::ClosedForm => {
            let p = DephasingProfile::new(&src, spec.b0);
            Ok(times
                .iter()
                .map(|&t| QubitDecay::from_zeta(p.zeta(t), p.relaxation(t), spec.b0, t))
                .collect())
        }
    }
}

/// Decay factors of one qubit at a single time.
pub fn qubit_decay(spec: &QubitSpec, t: f64, source: ZetaSource) -> Result<QubitDecay> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    if t == 0.0 {
        return Ok(QubitDecay::free(spec.b0, 0.0));
    }
    let grid = TimeGrid::from_times(vec![t])?;
    Ok(decay_series(spec, &grid, source)?[0])
}

/// Bloch vector of the evolved state: transverse block `M_A N M_Bᵀ`,
/// `n₃ ∝ e^{-Γ₁^B t}`, `n₁₂ ∝ e^{-Γ₁^A t}`, `n₁₅ ∝ e^{-(Γ₁^A+Γ₁^B)t}`.
pub fn analytic_bloch(state: &InitialState, a: &QubitDecay, b: &QubitDecay) -> BlochVector2Q {
    let evolved = a.transverse() * state.transverse_block() * b.transverse().transpose();
    let (s_a, s_b, zz) = state.polarizations();
    let mut comps = [0.0; 15];
    comps[3 - 1] = s_b * b.relax;
    comps[12 - 1] = s_a * a.relax;
    comps[15 - 1] = zz * a.relax * b.relax;
    comps[5 - 1] = evolved[(0, 0)];
    comps[6 - 1] = evolved[(0, 1)];
    comps[9 - 1] = evolved[(1, 0)];
    comps[10 - 1] = evolved[(1, 1)];
    BlochVector2Q::from_components(&comps).scaled(state.r)
}

/// Two-one model: only qubit A is noisy; qubit B precesses freely at `b0_b`.
pub fn analytic_bloch_two_one(
    state: &InitialState,
    spec_a: &QubitSpec,
    b0_b: f64,
    t: f64,
    source: ZetaSource,
) -> Result<BlochVector2Q> {
    let a = qubit_decay(spec_a, t, source)?;
    Ok(analytic_bloch(state, &a, &QubitDecay::free(b0_b, t)))
}

/// Two-two model: independent sources on both qubits.
pub fn analytic_bloch_two_two(
    state: &InitialState,
    spec_a: &QubitSpec,
    spec_b: &QubitSpec,
    t: f64,
    source: ZetaSource,
) -> Result<BlochVector2Q> {
    let a = qubit_decay(spec_a, t, source)?;
    let b = qubit_decay(spec_b, t, source)?;
    Ok(analytic_bloch(state, &a, &b))
}

/// Square roots of the eigenvalues of `ρ ρ̃`, descending, and
/// `q = λ₁ - λ₂ - λ₃ - λ₄`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaSpectrum {
    pub lambdas: [f64; 4],
    pub q: f64,
}

impl LambdaSpectrum {
    pub fn from_unsorted(mut values: [f64; 4]) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        let q = values[0] - values[1] - values[2] - values[3];
        LambdaSpectrum { lambdas: values, q }
    }

    pub fn concurrence(&self) -> f64 {
        self.q.max(0.0)
    }
}

/// Wootters concurrence `max{0, λ₁ - λ₂ - λ₃ - λ₄}`.
///
/// The λ's are the singular values of `√ρ (σ_y⊗σ_y) √ρ*`, whose squares are
/// the eigenvalues of `ρ ρ̃`.
pub fn concurrence_wootters(rho: &DensityMatrix) -> Result<(f64, LambdaSpectrum)> {
    let m = rho.matrix();
    let herm = hermiticity_defect(m);
    if herm > 1e-12 {
        return Err(Error::InvalidDensityMatrix(format!("not Hermitian (defect {herm:e})")));
    }
    if (m.trace() - c(1.0, 0.0)).norm() > 1e-12 {
        return Err(Error::InvalidDensityMatrix(format!("trace {} differs from 1", m.trace())));
    }
    let lowest = rho.eigenvalues()[0];
    if lowest < -POSITIVITY_TOL {
        return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {lowest:e}")));
    }
    let yy = kron2(&pauli(2), &pauli(2));
    let root = psd_sqrt(m);
    let a = root * yy * root.conjugate();
    let sv = a.singular_values();
    let spec = LambdaSpectrum::from_unsorted([sv[0], sv[1], sv[2], sv[3]]);
    Ok((spec.concurrence(), spec))
}

/// The two relaxation functions `(ξ̃, ξ)` of a Werner state under
/// longitudinal factors `e_A`, `e_B`.
pub fn relaxation_functions(state: &InitialState, relax_a: f64, relax_b: f64) -> Result<(f64, f64)> {
    if state.is_degenerate() {
        return Err(Error::DegenerateState {
            alpha: state.alpha,
            r: state.r,
        });
    }
    let r = state.r;
    let s = 2.0 * state.alpha * state.alpha - 1.0;
    let denom = 4.0 * r * state.alpha * state.beta_abs();
    let prod = relax_a * relax_b;
    let radical = |sign: f64| {
        let d = relax_a + sign * relax_b;
        ((1.0 + sign * r * prod).powi(2) - (r * s * d).powi(2)).max(0.0).sqrt()
    };
    Ok((radical(1.0) / denom, radical(-1.0) / denom))
}

/// `λ = rα|β| (ξ̃ + |ζ^AB|, ξ̃ - |ζ^AB|, ξ, ξ)` in that order, with
/// `|ζ^AB| = |ζ^A||ζ^B|`.
pub fn lambda_labelled(state: &InitialState, a: &QubitDecay, b: &QubitDecay) -> Result<[f64; 4]> {
    let (xi_t, xi) = relaxation_functions(state, a.relax, b.relax)?;
    let z = a.zeta_abs() * b.zeta_abs();
    let w = state.r * state.alpha * state.beta_abs();
    Ok([w * (xi_t + z), w * (xi_t - z), w * xi, w * xi])
}

/// The λ's of [`lambda_labelled`] sorted descending. Once `ξ̃ - |ζ^AB|`
/// drops below `ξ` the degenerate pair moves up to positions 2 and 3; `q`
/// is unaffected.
pub fn lambda_spectrum_analytic(state: &InitialState, a: &QubitDecay, b: &QubitDecay) -> Result<LambdaSpectrum> {
    let l = lambda_labelled(state, a, b)?;
    Ok(LambdaSpectrum::from_unsorted([l[0], l[1].abs(), l[2], l[3]]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConcurrenceRoute {
    Analytic,
    /// Degenerate α or r: evaluated on the reconstructed density matrix.
    Wootters,
}

/// Concurrence at one time with its "race" decomposition
/// `C = max{0, 2rα|β| (|ζ^AB| - ξ)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcurrencePoint {
    pub concurrence: f64,
    pub spectrum: LambdaSpectrum,
    /// `|ζ^A ζ^B|` (two-one: `|ζ^A|`).
    pub zeta_ab: f64,
    pub xi: f64,
    pub xi_tilde: f64,
    /// `2rα|β|`.
    pub prefactor: f64,
    pub route: ConcurrenceRoute,
}

impl ConcurrencePoint {
    /// `2rα|β| (|ζ^AB| - ξ)`, before clipping at zero.
    pub fn race(&self) -> f64 {
        self.prefactor * (self.zeta_ab - self.xi)
    }
}

pub fn concurrence_analytic(state: &InitialState, a: &QubitDecay, b: &QubitDecay) -> ConcurrencePoint {
    let zeta_ab = a.zeta_abs() * b.zeta_abs();
    match lambda_spectrum_analytic(state, a, b) {
        Ok(spectrum) => {
            let (xi_tilde, xi) = relaxation_functions(state, a.relax, b.relax).expect("checked above");
            let prefactor = 2.0 * state.r * state.alpha * state.beta_abs();
            ConcurrencePoint {
                concurrence: (prefactor * (zeta_ab - xi)).max(0.0),
                spectrum,
                zeta_ab,
                xi,
                xi_tilde,
                prefactor,
                route: ConcurrenceRoute::Analytic,
            }
        }
        Err(_) => {
            let rho = from_bloch(&analytic_bloch(state, a, b));
            let (conc, spectrum) = concurrence_wootters(&rho)
                .unwrap_or((0.0, LambdaSpectrum::from_unsorted([0.0; 4])));
            ConcurrencePoint {
                concurrence: conc,
                spectrum,
                zeta_ab,
                xi: f64::NAN,
                xi_tilde: f64::NAN,
                prefactor: 0.0,
                route: ConcurrenceRoute::Wootters,
            }
        }
    }
}

/// Concurrence of `state` under `pair` at time `t`.
pub fn concurrence_at(state: &InitialState, pair: &QubitPair, t: f64, source: ZetaSource) -> Result<ConcurrencePoint> {
    let a = qubit_decay(&pair.a, t, source)?;
    let b = qubit_decay(&pair.b, t, source)?;
    Ok(concurrence_analytic(state, &a, &b))
}

/// Closed-form concurrence data along a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcurrenceCurve {
    pub times: Vec<f64>,
    pub c: Vec<f64>,
    pub xi: Vec<f64>,
    pub xi_tilde: Vec<f64>,
    /// Signed `ζ^A ζ^B`: the magnitude carries the sign picked up each time
    /// the coherence product passes through zero.
    pub zeta_ab: Vec<f64>,
    pub n_norm: Vec<f64>,
    pub lambdas: Vec<[f64; 4]>,
    pub bloch: Vec<BlochVector2Q>,
    /// Sum of `g cosθ` over strongly coupled sources; 0 when none.
    pub loop_frequency: f64,
}

impl ConcurrenceCurve {
    pub fn compute(state: &InitialState, pair: &QubitPair, grid: &TimeGrid, source: ZetaSource) -> Result<Self> {
        let da = decay_series(&pair.a, grid, source)?;
        let db = decay_series(&pair.b, grid, source)?;
        let nominal = match state.family {
            BellFamily::Phi => pair.a.b0 + pair.b.b0,
            BellFamily::Psi => pair.a.b0 - pair.b.b0,
        };
        let times = grid.times().to_vec();
        let n = times.len();
        let mut out = ConcurrenceCurve {
            times,
            c: Vec::with_capacity(n),
            xi: Vec::with_capacity(n),
            xi_tilde: Vec::with_capacity(n),
            zeta_ab: Vec::with_capacity(n),
            n_norm: Vec::with_capacity(n),
            lambdas: Vec::with_capacity(n),
            bloch: Vec::with_capacity(n),
            loop_frequency: loop_frequency(pair),
        };
        let mut sign = 1.0;
        let mut prev: Option<(f64, C64)> = None;
        for i in 0..n {
            let t = out.times[i];
            let product = state.pair_product(da[i].coherence, db[i].coherence);
            if let Some((t_prev, p_prev)) = prev {
                let advance = C64::from_polar(1.0, -nominal * (t - t_prev));
                if (product * p_prev.conj() * advance).re < 0.0 {
                    sign = -sign;
                }
            }
            prev = Some((t, product));
            let point = concurrence_analytic(state, &da[i], &db[i]);
            let bloch = analytic_bloch(state, &da[i], &db[i]);
            out.c.push(point.concurrence);
            out.xi.push(point.xi);
            out.xi_tilde.push(point.xi_tilde);
            out.zeta_ab.push(sign * product.norm());
            out.n_norm.push(purity_norm(&bloch));
            out.lambdas.push(point.spectrum.lambdas);
            out.bloch.push(bloch);
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn loop_frequency(pair: &QubitPair) -> f64 {
    [pair.a, pair.b]
        .iter()
        .filter_map(|q| q.source)
        .filter(|s| coupling_regime(s) == CouplingRegime::Strong)
        .map(|s| s.longitudinal_coupling())
        .sum()
}

/// One maximal stretch with `C = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsdInterval {
    pub death: f64,
    /// Time the concurrence becomes positive again; `None` for a terminal
    /// death or one that lasts to the end of the grid.
    pub revival: Option<f64>,
    /// `C` touches zero at a single instant.
    pub point: bool,
}

impl EsdInterval {
    pub fn is_terminal(&self) -> bool {
        self.revival.is_none()
    }
}

/// Sub-interval of `[0, 1]` where `f(s) = f0 + (f1 - f0) s ≤ 0`.
fn nonpositive_part(f0: f64, f1: f64) -> Option<(f64, f64)> {
    match (f0 <= 0.0, f1 <= 0.0) {
        (true, true) => Some((0.0, 1.0)),
        (false, false) => None,
        (true, false) => Some((0.0, f0 / (f0 - f1))),
        (false, true) => Some((f0 / (f0 - f1), 1.0)),
    }
}

/// Death/revival intervals of a concurrence curve.
///
/// Between samples the signed `ζ^AB` and `ξ` are interpolated linearly and
/// the set `|ζ^AB| ≤ ξ` is solved exactly on each segment, so a sign change
/// of `ζ^AB` with `ξ = 0` is reported as a point death. Deaths separated by
/// stretches where `C` never exceeds [`REVIVAL_THRESHOLD`] are merged.
pub fn esd_times(curve: &ConcurrenceCurve) -> Result<Vec<EsdInterval>> {
    if curve.len() < 2 {
        return Err(Error::InvalidGrid("need at least two samples".into()));
    }
    let grid = TimeGrid::from_times(curve.times.clone())?;
    grid.check_resolves(curve.loop_frequency, ESD_SAMPLES_PER_HALF_PERIOD, "loop frequency")?;
    if curve.xi.iter().any(|x| x.is_nan()) {
        return esd_from_samples(curve);
    }

    let t = &curve.times;
    let mut raw: Vec<(f64, f64)> = Vec::new();
    for i in 0..t.len() - 1 {
        let (u0, u1) = (curve.zeta_ab[i], curve.zeta_ab[i + 1]);
        let (x0, x1) = (curve.xi[i], curve.xi[i + 1]);
        let upper = nonpositive_part(u0 - x0, u1 - x1);
        let lower = nonpositive_part(-u0 - x0, -u1 - x1);
        if let (Some((a0, a1)), Some((b0, b1))) = (upper, lower) {
            let (lo, hi) = (a0.max(b0), a1.min(b1));
            if lo <= hi {
                let dt = t[i + 1] - t[i];
                let start = t[i] + lo * dt;
                let end = t[i] + hi * dt;
                match raw.last_mut() {
                    Some(last) if start <= last.1 => last.1 = last.1.max(end),
                    _ => raw.push((start, end)),
                }
            }
        }
    }

    // merge across stretches that never rise above the revival threshold
    let peak_between = |a: f64, b: f64| {
        t.iter()
            .zip(&curve.c)
            .filter(|(&ti, _)| ti > a && ti < b)
            .map(|(_, &ci)| ci)
            .fold(0.0, f64::max)
    };
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (start, end) in raw {
        match merged.last_mut() {
            Some(last) if peak_between(last.1, start) <= REVIVAL_THRESHOLD => last.1 = end,
            _ => merged.push((start, end)),
        }
    }

    let t_end = grid.last();
    let scale = t_end.max(1.0);
    Ok(merged
        .iter()
        .map(|&(death, end)| {
            let revives = end < t_end && peak_between(end, f64::INFINITY) > REVIVAL_THRESHOLD;
            EsdInterval {
                death,
                revival: revives.then_some(end),
                point: end - death <= 1e-12 * scale,
            }
        })
        .collect())
}

/// Fallback for degenerate states: dead wherever the sampled `C` is zero.
fn esd_from_samples(curve: &ConcurrenceCurve) -> Result<Vec<EsdInterval>> {
    let mut out: Vec<EsdInterval> = Vec::new();
    let mut open: Option<f64> = None;
    for (&t, &c) in curve.times.iter().zip(&curve.c) {
        match (open, c <= REVIVAL_THRESHOLD) {
            (None, true) => open = Some(t),
            (Some(d), false) => {
                out.push(EsdInterval {
                    death: d,
                    revival: Some(t),
                    point: false,
                });
                open = None;
            }
            _ => {}
        }
    }
    if let Some(d) = open {
        out.push(EsdInterval {
            death: d,
            revival: None,
            point: false,
        });
    }
    Ok(out)
}

/// `|n⃗|(t)`: the closed-form expression for two noisy qubits, the norm of
/// the analytic Bloch vector otherwise.
pub fn purity_curve(state: &InitialState, pair: &QubitPair, grid: &TimeGrid, source: ZetaSource) -> Result<Vec<f64>> {
    let da = decay_series(&pair.a, grid, source)?;
    let db = decay_series(&pair.b, grid, source)?;
    let two_two = pair.model() == Some(NoiseModel::TwoTwo);
    Ok(da
        .iter()
        .zip(&db)
        .map(|(a, b)| {
            if two_two {
                purity_norm_two_two(state, a, b)
            } else {
                purity_norm(&analytic_bloch(state, a, b))
            }
        })
        .collect())
}

/// `r √(8α²(1-α²)(ζ^AB)² + e^{-2(Γ₁^A+Γ₁^B)t} + (1-2α²)²[e^{-2Γ₁^A t} + e^{-2Γ₁^B t}])`.
pub fn purity_norm_two_two(state: &InitialState, a: &QubitDecay, b: &QubitDecay) -> f64 {
    let a2 = state.alpha * state.alpha;
    let z = a.zeta_abs() * b.zeta_abs();
    let (ea, eb) = (a.relax, b.relax);
    state.r
        * (8.0 * a2 * (1.0 - a2) * z * z
            + (ea * eb).powi(2)
            + (1.0 - 2.0 * a2).powi(2) * (ea * ea + eb * eb))
            .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{two_qubit_transfer, RtnSource};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_3, PI};

    fn noisy(g: f64, theta: f64, gamma: f64) -> QubitSpec {
        QubitSpec::noisy(1.0, RtnSource::new(g, theta, 0.0, gamma).unwrap()).unwrap()
    }

    fn free() -> QubitSpec {
        QubitSpec::noise_free(1.0).unwrap()
    }

    fn phi_plus(r: f64) -> InitialState {
        InitialState::bell(BellFamily::Phi, r).unwrap()
    }

    #[test]
    fn wootters_examples() {
        let (c1, s) = concurrence_wootters(&phi_plus(1.0).density_matrix()).unwrap();
        assert!((c1 - 1.0).abs() < 1e-12);
        assert!((s.lambdas[0] - 1.0).abs() < 1e-12);
        let product = InitialState::new(BellFamily::Phi, 1.0, 0.0, 1.0).unwrap();
        assert!(concurrence_wootters(&product.density_matrix()).unwrap().0 < 1e-12);
        let (cw, _) = concurrence_wootters(&phi_plus(0.5).density_matrix()).unwrap();
        assert!((cw - 0.25).abs() < 1e-12);
        // same value from the closed form with ξ(0) = (1 - r)/(2r)
        let d = QubitDecay::free(1.0, 0.0);
        let p = concurrence_analytic(&phi_plus(0.5), &d, &d);
        assert!((p.xi - 0.5).abs() < 1e-15);
        assert!((p.concurrence - 0.25).abs() < 1e-15);
    }

    #[test]
    fn wootters_rejects_invalid_input() {
        let m = Matrix4::<C64>::identity() * c(0.3, 0.0);
        assert!(concurrence_wootters(&DensityMatrix::new_unchecked(m)).is_err());
    }

    #[test]
    fn printed_phi_components_two_one() {
        // n₃, n₅, n₆, n₉, n₁₀, n₁₂, n₁₅ for |Φ⟩ with a complex β
        let state = InitialState::new(BellFamily::Phi, 0.6, 0.7, 1.0).unwrap();
        let spec = noisy(0.1, FRAC_PI_3, 0.5);
        let b = state.beta();
        for &t in &[0.0, 3.0, 40.0] {
            let n = analytic_bloch_two_one(&state, &spec, 1.0, t, ZetaSource::ClosedForm).unwrap();
            let p = DephasingProfile::new(&spec.source.unwrap(), 1.0);
            let (zeta, e1) = (p.zeta(t), p.relaxation(t));
            let a = state.alpha;
            let (s2, c2) = (2.0 * t).sin_cos();
            let n5 = 2.0 * a * zeta * (c2 * b.re + s2 * b.im);
            let n6 = 2.0 * a * zeta * (c2 * b.im - s2 * b.re);
            let expected = [
                (3, 2.0 * a * a - 1.0),
                (5, n5),
                (6, n6),
                (9, n6),
                (10, -n5),
                (12, (2.0 * a * a - 1.0) * e1),
                (15, e1),
            ];
            for i in 1..16 {
                let want = expected.iter().find(|(k, _)| *k == i).map_or(0.0, |(_, v)| *v);
                assert!((n.get(i) - want).abs() < 1e-14, "t={t} n{i}");
            }
        }
    }

    #[test]
    fn printed_psi_components_two_two() {
        let state = InitialState::new(BellFamily::Psi, 0.8, -1.1, 0.7).unwrap();
        let spec_a = noisy(0.1, 0.4, 0.5);
        let spec_b = noisy(0.07, 0.9, 0.02);
        let b = state.beta();
        let pa = DephasingProfile::new(&spec_a.source.unwrap(), 1.0);
        let pb = DephasingProfile::new(&spec_b.source.unwrap(), 1.0);
        for &t in &[0.0, 5.0, 60.0] {
            let n = analytic_bloch_two_two(&state, &spec_a, &spec_b, t, ZetaSource::ClosedForm).unwrap();
            let (r, a) = (state.r, state.alpha);
            let zz = pa.zeta(t) * pb.zeta(t);
            let (ea, eb) = (pa.relaxation(t), pb.relaxation(t));
            let n5 = 2.0 * r * a * b.re * zz;
            let n6 = -2.0 * r * a * b.im * zz;
            let expected = [
                (3, r * (1.0 - 2.0 * a * a) * eb),
                (5, n5),
                (6, n6),
                (9, -n6),
                (10, n5),
                (12, r * (2.0 * a * a - 1.0) * ea),
                (15, -r * ea * eb),
            ];
            for i in 1..16 {
                let want = expected.iter().find(|(k, _)| *k == i).map_or(0.0, |(_, v)| *v);
                assert!((n.get(i) - want).abs() < 1e-14, "t={t} n{i}");
            }
        }
    }

    #[test]
    fn psi_components_do_not_depend_on_b0() {
        let state = InitialState::new(BellFamily::Psi, 0.55, 0.3, 0.9).unwrap();
        let src = RtnSource::new(0.1, 0.0, 0.0, 0.05).unwrap();
        let s1 = QubitSpec::noisy(1.0, src).unwrap();
        let s2 = QubitSpec::noisy(2.7, src).unwrap();
        for &t in &[1.0, 17.0, 90.0] {
            let n1 = analytic_bloch_two_one(&state, &s1, 1.0, t, ZetaSource::Exact).unwrap();
            let n2 = analytic_bloch_two_one(&state, &s2, 2.7, t, ZetaSource::Exact).unwrap();
            assert!(n1.max_abs_diff(&n2) < 1e-12);
            let m1 = analytic_bloch_two_two(&state, &s1, &s1, t, ZetaSource::Exact).unwrap();
            let m2 = analytic_bloch_two_two(&state, &s2, &s2, t, ZetaSource::Exact).unwrap();
            assert!(m1.max_abs_diff(&m2) < 1e-12);
        }
    }

    #[test]
    fn pure_dephasing_two_one_keeps_longitudinal_part() {
        let state = InitialState::new(BellFamily::Phi, 0.7, 0.2, 1.0).unwrap();
        let spec = noisy(0.1, 0.0, 0.005);
        for &t in &[0.0, 50.0, 400.0] {
            let n = analytic_bloch_two_one(&state, &spec, 1.0, t, ZetaSource::Exact).unwrap();
            assert_eq!(n.get(12), n.get(3));
            assert_eq!(n.get(15), 1.0);
        }
    }

    #[test]
    fn bloch_at_t0_matches_state() {
        let state = phi_plus(1.0);
        let n = analytic_bloch_two_two(&state, &noisy(0.1, 0.3, 0.1), &noisy(0.2, 0.0, 0.4), 0.0, ZetaSource::Exact)
            .unwrap();
        assert!(n.max_abs_diff(&state.bloch()) < 1e-15);
        assert_eq!(n.get(5), 1.0);
        assert_eq!(n.get(10), -1.0);
        assert_eq!(n.get(15), 1.0);
    }

    #[test]
    fn exact_bloch_matches_transfer_matrix_at_pure_dephasing() {
        for family in [BellFamily::Phi, BellFamily::Psi] {
            let state = InitialState::new(family, 0.6, 0.9, 0.8).unwrap();
            let (a, b) = (noisy(0.1, 0.0, 0.005), noisy(0.05, 0.0, 0.3));
            for &t in &[0.0, 7.0, 33.3, 200.0] {
                let direct = state.bloch().evolve(&two_qubit_transfer(&a, &b, t).unwrap());
                let closed = analytic_bloch_two_two(&state, &a, &b, t, ZetaSource::Exact).unwrap();
                assert!(direct.max_abs_diff(&closed) < 1e-12, "{family:?} t={t}");
                let direct = state.bloch().evolve(&two_qubit_transfer(&a, &free(), t).unwrap());
                let closed = analytic_bloch_two_one(&state, &a, 1.0, t, ZetaSource::Exact).unwrap();
                assert!(direct.max_abs_diff(&closed) < 1e-12, "{family:?} t={t}");
            }
        }
    }

    #[test]
    fn two_two_bell_against_transfer_matrix_within_closed_form_tolerance() {
        let state = phi_plus(1.0);
        let s = noisy(0.1, FRAC_PI_3, 0.5);
        for i in 0..=50 {
            let t = 10.0 * i as f64;
            let direct = state.bloch().evolve(&two_qubit_transfer(&s, &s, t).unwrap());
            let closed = analytic_bloch_two_two(&state, &s, &s, t, ZetaSource::Exact).unwrap();
            assert!(direct.max_abs_diff(&closed) < 0.02, "t={t}");
        }
    }

    #[test]
    fn degenerate_states_fall_back_to_wootters() {
        let d = qubit_decay(&noisy(0.1, 0.5, 0.05), 20.0, ZetaSource::Exact).unwrap();
        for state in [
            InitialState::new(BellFamily::Phi, 1.0, 0.0, 0.7).unwrap(),
            InitialState::new(BellFamily::Psi, 0.0, 0.0, 1.0).unwrap(),
            InitialState::new(BellFamily::Phi, 0.6, 0.0, 0.0).unwrap(),
        ] {
            assert!(matches!(
                lambda_spectrum_analytic(&state, &d, &d),
                Err(Error::DegenerateState { .. })
            ));
            let p = concurrence_analytic(&state, &d, &d);
            assert_eq!(p.route, ConcurrenceRoute::Wootters);
            assert!(p.concurrence < 1e-12);
        }
    }

    #[test]
    fn lambda_examples() {
        let state = InitialState::new(BellFamily::Phi, 0.6, 0.0, 1.0).unwrap();
        let d = QubitDecay::free(1.0, 0.0);
        let s = lambda_spectrum_analytic(&state, &d, &d).unwrap();
        assert!((s.lambdas[0] - 2.0 * 0.6 * 0.8).abs() < 1e-15);
        assert!(s.lambdas[1..].iter().all(|l| l.abs() < 1e-15));

        // long-time two-one limit: all λ → α√(1-α²)/2
        let late = QubitDecay {
            coherence: c(0.0, 0.0),
            relax: 0.0,
        };
        let s = lambda_spectrum_analytic(&state, &late, &QubitDecay::free(1.0, 1e4)).unwrap();
        for l in s.lambdas {
            assert!((l - 0.6 * 0.8 / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn xi_long_time_limits() {
        let state = InitialState::new(BellFamily::Phi, 0.65, 0.0, 0.8).unwrap();
        let (a, r) = (state.alpha, state.r);
        let denom = 4.0 * r * a * (1.0 - a * a).sqrt();
        let s = 2.0 * a * a - 1.0;
        let spec = noisy(0.1, FRAC_PI_3, 0.5);
        let g1 = DephasingProfile::new(&spec.source.unwrap(), 1.0).gamma1;
        let t = 20.0 / g1;
        let decay = qubit_decay(&spec, t, ZetaSource::ClosedForm).unwrap();
        let (_, xi_21) = relaxation_functions(&state, decay.relax, 1.0).unwrap();
        assert!((xi_21 - (1.0 - r * r * s * s).sqrt() / denom).abs() < 1e-6);
        let (_, xi_22) = relaxation_functions(&state, decay.relax, decay.relax).unwrap();
        assert!((xi_22 - 1.0 / denom).abs() < 1e-6);
        let (_, xi_pd) = relaxation_functions(&state, 1.0, 1.0).unwrap();
        assert!((xi_pd - (1.0 - r) / denom).abs() < 1e-15);
    }

    #[test]
    fn weak_pure_dephasing_bell_never_dies() {
        let pair = QubitPair::new(noisy(0.1, 0.0, 0.5), free());
        let grid = TimeGrid::uniform(500.0, 501).unwrap();
        let curve = ConcurrenceCurve::compute(&phi_plus(1.0), &pair, &grid, ZetaSource::Exact).unwrap();
        assert!(curve.c.iter().all(|&c| c > 0.0));
        assert!(esd_times(&curve).unwrap().is_empty());
    }

    #[test]
    fn strong_pure_dephasing_has_point_deaths_at_exact_zeros() {
        let pair = QubitPair::new(noisy(0.1, 0.0, 0.005), free());
        let grid = TimeGrid::uniform(500.0, 5001).unwrap();
        let curve = ConcurrenceCurve::compute(&phi_plus(1.0), &pair, &grid, ZetaSource::Exact).unwrap();
        let deaths = esd_times(&curve).unwrap();
        let zeros = crate::single_qubit::zeta_zeros(&pair.a.source.unwrap(), deaths.len()).unwrap();
        assert!(deaths.len() >= 15);
        for (d, z) in deaths.iter().zip(&zeros) {
            assert!(d.point);
            assert!(d.revival.is_some());
            assert!((d.death - z).abs() < 1e-3, "{} vs {z}", d.death);
        }
        // C vanishes at the zeros themselves
        for &z in zeros.iter().take(3) {
            let p = concurrence_at(&phi_plus(1.0), &pair, z, ZetaSource::Exact).unwrap();
            assert!(p.concurrence < 1e-8);
        }
    }

    #[test]
    fn werner_pure_dephasing_death_time() {
        // envelope e^{-γt}√(1+ε₁²) meets ξ = 0.5
        let pair = QubitPair::new(noisy(0.1, 0.0, 0.005), free());
        let grid = TimeGrid::uniform(400.0, 8001).unwrap();
        let curve = ConcurrenceCurve::compute(&phi_plus(0.5), &pair, &grid, ZetaSource::Exact).unwrap();
        let deaths = esd_times(&curve).unwrap();
        let last = deaths.last().unwrap();
        assert!(last.is_terminal());
        let envelope_root = (2.0 * (1.0f64 + 0.05 * 0.05).sqrt()).ln() / 0.005;
        assert!((envelope_root - 138.8).abs() < 0.1);
        // the final death happens within one loop period of the envelope root
        assert!((last.death - envelope_root).abs() < PI / 0.1);
        assert!(deaths.iter().all(|d| !d.point));
    }

    #[test]
    fn weak_intermediate_point_single_terminal_death() {
        let pair = QubitPair::new(noisy(0.1, FRAC_PI_3, 0.5), free());
        let grid = TimeGrid::uniform(2000.0, 2001).unwrap();
        let curve = ConcurrenceCurve::compute(&phi_plus(1.0), &pair, &grid, ZetaSource::Exact).unwrap();
        let deaths = esd_times(&curve).unwrap();
        assert_eq!(deaths.len(), 1);
        assert!(deaths[0].is_terminal());
    }

    #[test]
    fn strong_intermediate_point_finite_revivals() {
        let pair = QubitPair::new(noisy(0.1, FRAC_PI_3, 0.005), free());
        let grid = TimeGrid::uniform(1500.0, 15001).unwrap();
        let curve = ConcurrenceCurve::compute(&phi_plus(1.0), &pair, &grid, ZetaSource::Exact).unwrap();
        let deaths = esd_times(&curve).unwrap();
        assert!(deaths.len() >= 2);
        assert!(deaths.last().unwrap().is_terminal());
        assert!(deaths[..deaths.len() - 1].iter().all(|d| d.revival.is_some() && !d.point));
    }

    #[test]
    fn two_two_pure_dephasing_bell_has_no_esd() {
        for gamma in [0.005, 0.5] {
            let s = noisy(0.1, 0.0, gamma);
            let pair = QubitPair::new(s, s);
            let grid = TimeGrid::uniform(500.0, 5001).unwrap();
            let curve = ConcurrenceCurve::compute(&phi_plus(1.0), &pair, &grid, ZetaSource::Exact).unwrap();
            assert!(esd_times(&curve).unwrap().is_empty(), "gamma = {gamma}");
        }
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let pair = QubitPair::new(noisy(0.1, 0.0, 0.005), free());
        let grid = TimeGrid::uniform(500.0, 51).unwrap();
        let curve = ConcurrenceCurve::compute(&phi_plus(1.0), &pair, &grid, ZetaSource::Exact).unwrap();
        assert!(matches!(esd_times(&curve), Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn purity_examples() {
        let grid = TimeGrid::uniform(100.0, 11).unwrap();
        for r in [1.0, 0.5] {
            let state = InitialState::new(BellFamily::Phi, 0.3, 0.0, r).unwrap();
            let pair = QubitPair::new(noisy(0.1, 0.2, 0.1), noisy(0.05, 0.7, 0.01));
            let p = purity_curve(&state, &pair, &grid, ZetaSource::Exact).unwrap();
            assert!((p[0] - 3f64.sqrt() * r).abs() < 1e-12);
        }
        // Γ₁ = 0 two-one: |n| tends to the conserved longitudinal part
        let state = InitialState::new(BellFamily::Phi, 0.3, 0.0, 1.0).unwrap();
        let pair = QubitPair::new(noisy(0.1, 0.0, 0.5), free());
        let grid = TimeGrid::uniform(5000.0, 11).unwrap();
        let p = purity_curve(&state, &pair, &grid, ZetaSource::Exact).unwrap();
        let s: f64 = 2.0 * 0.09 - 1.0;
        assert!((p.last().unwrap() - (2.0 * s * s + 1.0).sqrt()).abs() < 1e-12);
    }

    fn arb_state() -> impl Strategy<Value = InitialState> {
        (any::<bool>(), 0.05f64..0.95, -PI..PI, 0.05f64..=1.0).prop_map(|(phi, a, d, r)| {
            let family = if phi { BellFamily::Phi } else { BellFamily::Psi };
            InitialState::new(family, a, d, r).unwrap()
        })
    }

    fn arb_spec() -> impl Strategy<Value = QubitSpec> {
        (0.01f64..0.3, 0.0f64..1.5, 0.0f64..6.0, 0.002f64..1.0, 0.5f64..2.0)
            .prop_map(|(g, th, ph, ga, b0)| QubitSpec::noisy(b0, RtnSource::new(g, th, ph, ga).unwrap()).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn analytic_matches_wootters(state in arb_state(), a in arb_spec(), b in arb_spec(),
                                     two_two in any::<bool>(), t in 0.0f64..400.0) {
            let b = if two_two { b } else { QubitSpec::noise_free(b.b0).unwrap() };
            let da = qubit_decay(&a, t, ZetaSource::Exact).unwrap();
            let db = qubit_decay(&b, t, ZetaSource::Exact).unwrap();
            let point = concurrence_analytic(&state, &da, &db);
            let rho = from_bloch(&analytic_bloch(&state, &da, &db));
            let (cw, sw) = concurrence_wootters(&rho).unwrap();
            prop_assert!((point.concurrence - cw).abs() < 1e-10);
            for k in 0..4 {
                prop_assert!((point.spectrum.lambdas[k] - sw.lambdas[k]).abs() < 1e-10);
            }
            // the eigenvalue route also shows the degenerate pair λ₃ = λ₄
            let l = lambda_labelled(&state, &da, &db).unwrap();
            let hits = sw.lambdas.iter().filter(|x| (*x - l[2]).abs() < 1e-10).count();
            prop_assert!(hits >= 2);
            let structure = point.spectrum.q / point.prefactor + point.xi;
            prop_assert!((structure - point.zeta_ab).abs() < 1e-10);
        }

        #[test]
        fn werner_scaling_is_exact(state in arb_state(), a in arb_spec(), t in 0.0f64..300.0) {
            let da = qubit_decay(&a, t, ZetaSource::ClosedForm).unwrap();
            let db = QubitDecay::free(1.0, t);
            let pure = InitialState { r: 1.0, ..state };
            let n_r = analytic_bloch(&state, &da, &db);
            let n_1 = analytic_bloch(&pure, &da, &db);
            for i in 1..16 {
                prop_assert_eq!(n_r.get(i), state.r * n_1.get(i));
            }
        }

        #[test]
        fn two_two_purity_closed_form(state in arb_state(), a in arb_spec(), b in arb_spec(), t in 0.0f64..300.0) {
            let da = qubit_decay(&a, t, ZetaSource::Exact).unwrap();
            let db = qubit_decay(&b, t, ZetaSource::Exact).unwrap();
            let norm = purity_norm(&analytic_bloch(&state, &da, &db));
            prop_assert!((purity_norm_two_two(&state, &da, &db) - norm).abs() < 1e-12);
        }
    }

    #[test]
    fn two_one_bell_initial_concurrence() {
        let d = QubitDecay::free(1.0, 0.0);
        let s = InitialState::new(BellFamily::Psi, FRAC_1_SQRT_2, 0.0, 1.0).unwrap();
        assert!((concurrence_analytic(&s, &d, &d).concurrence - 1.0).abs() < 1e-15);
    }

    #[test]
    fn only_weak_pure_dephasing_bell_escapes_sudden_death() {
        let grid = TimeGrid::uniform(2000.0, 20001).unwrap();
        for r in [1.0, 0.8] {
            for theta in [0.0, FRAC_PI_3] {
                for gamma in [0.5, 0.005] {
                    let pair = QubitPair::new(noisy(0.1, theta, gamma), free());
                    let curve = ConcurrenceCurve::compute(&phi_plus(r), &pair, &grid, ZetaSource::Exact).unwrap();
                    let survives = esd_times(&curve).unwrap().is_empty();
                    let expected = r == 1.0 && theta == 0.0 && gamma == 0.5;
                    assert_eq!(survives, expected, "r={r} theta={theta} gamma={gamma}");
                }
            }
        }
    }
}
