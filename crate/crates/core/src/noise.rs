//! Telegraph-noise sources, qubit parameters and noise-averaged transfer
//! matrices computed through the quasi-Hamiltonian.
//!
//! Conventions: the single-qubit Bloch vector is `n = Tr(ρ σ)`, the qubit
//! Hamiltonian is `H = -½[B₀σ_z + s(t) g⃗·σ⃗]` and the free evolution is the
//! clockwise precession
//!
//! ```text
//! n₁ → cos(B₀t) n₁ + sin(B₀t) n₂
//! n₂ → -sin(B₀t) n₁ + cos(B₀t) n₂
//! ```
//!
//! The quasi-Hamiltonian lives on (fluctuator ⊗ Bloch) space, index
//! `3·f + m` with `f = 0` the `s = +1` branch. The rotation generators are
//! `(L_k)_{mn} = i ε_{kmn}`; with this sign `-i B₀ L_z` generates exactly the
//! precession above, so `g = 0` reproduces [`free_transfer`].

use nalgebra::{DMatrix, Matrix3, Matrix6};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linalg::{c, cross_matrix, levi_civita, C64};

/// One telegraph fluctuator: coupling magnitude `g`, polar angle `theta`
/// between the coupling direction and the energy axis, azimuth `phi` and
/// switching rate `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RtnSource {
    pub g: f64,
    pub theta: f64,
    pub phi: f64,
    pub gamma: f64,
}

impl RtnSource {
    pub fn new(g: f64, theta: f64, phi: f64, gamma: f64) -> Result<Self> {
        if !(g.is_finite() && g >= 0.0) {
            return Err(Error::param("g", format!("must be >= 0, got {g}")));
        }
        if !(0.0..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(&theta) {
            return Err(Error::param("theta", format!("must lie in [0, pi/2], got {theta}")));
        }
        if !phi.is_finite() {
            return Err(Error::param("phi", "must be finite"));
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::param("gamma", format!("must be >= 0, got {gamma}")));
        }
        Ok(RtnSource {
            g,
            theta,
            phi: phi.rem_euclid(std::f64::consts::TAU),
            gamma,
        })
    }

    /// g⃗ = g (sinθ cosφ, sinθ sinφ, cosθ).
    pub fn coupling_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [self.g * st * cp, self.g * st * sp, self.g * ct]
    }

    /// g cosθ, the coupling component along the energy axis.
    pub fn longitudinal_coupling(&self) -> f64 {
        self.g * self.theta.cos()
    }

    /// g cosθ / γ; above 1 the source is strongly coupled (non-Markovian).
    pub fn coupling_ratio(&self) -> f64 {
        self.longitudinal_coupling() / self.gamma
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitSpec {
    pub b0: f64,
    pub source: Option<RtnSource>,
}

impl QubitSpec {
    pub fn new(b0: f64, source: Option<RtnSource>) -> Result<Self> {
        if !(b0.is_finite() && b0 > 0.0) {
            return Err(Error::param("b0", format!("must be > 0, got {b0}")));
        }
        Ok(QubitSpec { b0, source })
    }

    pub fn noise_free(b0: f64) -> Result<Self> {
        Self::new(b0, None)
    }

    pub fn noisy(b0: f64, source: RtnSource) -> Result<Self> {
        Self::new(b0, Some(source))
    }

    pub fn is_noisy(&self) -> bool {
        self.source.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseModel {
    /// Only qubit A sees a fluctuator.
    TwoOne,
    /// Both qubits see independent fluctuators.
    TwoTwo,
}

/// Qubit A (left tensor factor) and qubit B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitPair {
    pub a: QubitSpec,
    pub b: QubitSpec,
}

impl QubitPair {
    pub fn new(a: QubitSpec, b: QubitSpec) -> Self {
        QubitPair { a, b }
    }

    /// `None` when neither qubit is noisy or only qubit B is.
    pub fn model(&self) -> Option<NoiseModel> {
        match (self.a.is_noisy(), self.b.is_noisy()) {
            (true, false) => Some(NoiseModel::TwoOne),
            (true, true) => Some(NoiseModel::TwoTwo),
            _ => None,
        }
    }
}

/// Real linear map on extended Bloch vectors (dimension 4 or 16); row 0
/// keeps `n₀ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    entries: DMatrix<f64>,
}

impl TransferMatrix {
    pub fn identity(dim: usize) -> Self {
        TransferMatrix {
            entries: DMatrix::identity(dim, dim),
        }
    }

    /// Pads a 3×3 single-qubit Bloch map to the extended 4×4 form.
    pub fn from_bloch_block(block: &Matrix3<f64>) -> Self {
        let mut m = DMatrix::identity(4, 4);
        for i in 0..3 {
            for j in 0..3 {
                m[(i + 1, j + 1)] = block[(i, j)];
            }
        }
        TransferMatrix { entries: m }
    }

    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || !matches!(entries.nrows(), 4 | 16) {
            return Err(Error::param(
                "transfer matrix",
                format!("must be 4x4 or 16x16, got {}x{}", entries.nrows(), entries.ncols()),
            ));
        }
        Ok(TransferMatrix { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// The block acting on n₁… (everything but row and column 0).
    pub fn bloch_block(&self) -> DMatrix<f64> {
        let d = self.dim() - 1;
        self.entries.view((1, 1), (d, d)).into_owned()
    }

    /// max(|T₀₀ − 1|, |T₀ⱼ|) over j ≥ 1.
    pub fn row0_defect(&self) -> f64 {
        let mut worst = (self.entries[(0, 0)] - 1.0).abs();
        for j in 1..self.dim() {
            worst = worst.max(self.entries[(0, j)].abs());
        }
        worst
    }

    /// Kronecker product in base-4 order: the left factor acts on qubit A.
    pub fn kron(&self, other: &TransferMatrix) -> TransferMatrix {
        TransferMatrix {
            entries: self.entries.kronecker(&other.entries),
        }
    }

    pub fn compose(&self, other: &TransferMatrix) -> TransferMatrix {
        TransferMatrix {
            entries: &self.entries * &other.entries,
        }
    }

    pub fn apply(&self, n: &[f64]) -> Vec<f64> {
        assert_eq!(n.len(), self.dim(), "vector length must match transfer dimension");
        let v = nalgebra::DVector::from_column_slice(n);
        (&self.entries * v).iter().copied().collect()
    }

    /// Complex transverse amplitude `T₁₁ + i T₁₂` of a 4×4 single-qubit map.
    ///
    /// For a map of the form `ζ·rot(Ωt)` in the (1,2) block this is
    /// `ζ e^{iΩt}`.
    pub fn coherence(&self) -> C64 {
        debug_assert_eq!(self.dim(), 4);
        c(self.entries[(1, 1)], self.entries[(1, 2)])
    }

    /// Longitudinal factor `T₃₃` of a 4×4 single-qubit map.
    pub fn relaxation(&self) -> f64 {
        debug_assert_eq!(self.dim(), 4);
        self.entries[(3, 3)]
    }
}

/// Rotation generator `L_k` (k = 0, 1, 2 for x, y, z) with `(L_k)_{mn} = i ε_{kmn}`.
pub fn rotation_generator(k: usize) -> Matrix3<C64> {
    Matrix3::from_fn(|m, n| c(0.0, levi_civita(k, m, n)))
}

/// 3×3 free precession block about ẑ.
pub fn free_rotation(b0: f64, t: f64) -> Matrix3<f64> {
    let (s, co) = (b0 * t).sin_cos();
    Matrix3::new(co, s, 0.0, -s, co, 0.0, 0.0, 0.0, 1.0)
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    Ok(())
}

/// Extended transfer matrix of a noise-free qubit.
pub fn free_transfer(b0: f64, t: f64) -> Result<TransferMatrix> {
    check_time(t)?;
    Ok(TransferMatrix::from_bloch_block(&free_rotation(b0, t)))
}

/// `H_q = -iγ + iγ τ₁ + B₀ L_z + τ₃ g⃗·L⃗` on (fluctuator ⊗ Bloch) space.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiHamiltonian {
    matrix: Matrix6<C64>,
    generator: Matrix6<f64>,
}

impl QuasiHamiltonian {
    pub fn build(spec: &QubitSpec) -> Result<Self> {
        let src = spec.source.ok_or(Error::MissingSource)?;
        let gv = src.coupling_vector();
        let gamma = src.gamma;
        let mut h = Matrix6::<C64>::zeros();
        let g_dot_l: Matrix3<C64> = (0..3).fold(Matrix3::zeros(), |acc, k| {
            acc + rotation_generator(k) * c(gv[k], 0.0)
        });
        let lz = rotation_generator(2) * c(spec.b0, 0.0);
        for f in 0..2 {
            let tau3 = if f == 0 { 1.0 } else { -1.0 };
            for m in 0..3 {
                for n in 0..3 {
                    h[(3 * f + m, 3 * f + n)] = lz[(m, n)] + g_dot_l[(m, n)] * tau3;
                }
                h[(3 * f + m, 3 * f + m)] += c(0.0, -gamma);
                // τ₁ couples the two fluctuator branches.
                h[(3 * f + m, 3 * (1 - f) + m)] += c(0.0, gamma);
            }
        }

        // -i H_q is real: -γ + γτ₁ - [B₀ẑ + τ₃ g⃗]×.
        let mut generator = Matrix6::<f64>::zeros();
        for f in 0..2 {
            let s = if f == 0 { 1.0 } else { -1.0 };
            let field = [s * gv[0], s * gv[1], spec.b0 + s * gv[2]];
            let rot = -cross_matrix(field);
            for m in 0..3 {
                for n in 0..3 {
                    generator[(3 * f + m, 3 * f + n)] = rot[(m, n)];
                }
                generator[(3 * f + m, 3 * f + m)] -= gamma;
                generator[(3 * f + m, 3 * (1 - f) + m)] += gamma;
            }
        }
        debug_assert!({
            let direct = h.map(|z| c(z.im, -z.re));
            direct.iter().map(|z| z.im.abs()).fold(0.0, f64::max) < 1e-15
                && (direct.map(|z| z.re) - generator).abs().max() < 1e-14
        });

        Ok(QuasiHamiltonian {
            matrix: h,
            generator,
        })
    }

    pub fn matrix(&self) -> &Matrix6<C64> {
        &self.matrix
    }

    /// The real generator `-i H_q`.
    pub fn generator(&self) -> &Matrix6<f64> {
        &self.generator
    }

    /// `exp(-i H_q t)`.
    pub fn propagator(&self, t: f64) -> Matrix6<f64> {
        (self.generator * t).exp()
    }

    /// `⟨x_f| M |i_f⟩` with `|i_f⟩ = |x_f⟩ = [1;1]/√2 ⊗ I₃`.
    pub fn contract(m: &Matrix6<f64>) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| {
            0.5 * (m[(i, j)] + m[(i, j + 3)] + m[(i + 3, j)] + m[(i + 3, j + 3)])
        })
    }

    pub fn transfer(&self, t: f64) -> Result<TransferMatrix> {
        check_time(t)?;
        Ok(TransferMatrix::from_bloch_block(&Self::contract(
            &self.propagator(t),
        )))
    }
}

/// Noise-averaged extended transfer matrix `⟨x_f| exp(-iH_q t) |i_f⟩`.
pub fn rtn_transfer(spec: &QubitSpec, t: f64) -> Result<TransferMatrix> {
    QuasiHamiltonian::build(spec)?.transfer(t)
}

/// Free or noisy transfer matrix depending on whether a source is attached.
pub fn transfer(spec: &QubitSpec, t: f64) -> Result<TransferMatrix> {
    match spec.source {
        Some(_) => rtn_transfer(spec, t),
        None => free_transfer(spec.b0, t),
    }
}

/// `T(t) = R^A(t) ⊗ R^B(t)` for independent sources.
pub fn two_qubit_transfer(a: &QubitSpec, b: &QubitSpec, t: f64) -> Result<TransferMatrix> {
    Ok(transfer(a, t)?.kron(&transfer(b, t)?))
}

/// Single-qubit transfer matrices on every grid time.
///
/// On uniform grids the noisy case steps with one exact propagator
/// `exp(-iH_q Δt)`; otherwise each time is exponentiated independently.
pub fn transfer_series(spec: &QubitSpec, grid: &TimeGrid) -> Result<Vec<TransferMatrix>> {
    let times = grid.times();
    let Some(_) = spec.source else {
        return times.iter().map(|&t| free_transfer(spec.b0, t)).collect();
    };
    let qh = QuasiHamiltonian::build(spec)?;
    if let Some(dt) = uniform_step(times) {
        let step = qh.propagator(dt);
        let mut current = qh.propagator(times[0]);
        let mut out = Vec::with_capacity(times.len());
        for i in 0..times.len() {
            if i > 0 {
                current = step * current;
            }
            out.push(TransferMatrix::from_bloch_block(&QuasiHamiltonian::contract(
                &current,
            )));
        }
        Ok(out)
    } else {
        times.par_iter().map(|&t| qh.transfer(t)).collect()
    }
}

fn uniform_step(times: &[f64]) -> Option<f64> {
    if times.len() < 3 {
        return None;
    }
    let dt = times[1] - times[0];
    let uniform = times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.max(1.0));
    uniform.then_some(dt)
}

/// Right-multiplies by the inverse free rotation so that a map of the form
/// `ζ(t)·rot(B₀t)` becomes `ζ(t)·I` in the transverse block.
pub fn rotating_frame(r: &TransferMatrix, b0: f64, t: f64) -> TransferMatrix {
    let inv = TransferMatrix::from_bloch_block(&free_rotation(b0, t).transpose());
    r.compose(&inv)
}

/// Rotating-frame (1,1) entry of the quasi-Hamiltonian transfer matrix.
pub fn zeta_rotating(spec: &QubitSpec, t: f64) -> Result<f64> {
    let r = rtn_transfer(spec, t)?;
    Ok(rotating_frame(&r, spec.b0, t).entry(1, 1))
}

/// Modulus of the transverse amplitude, independent of the rotating-frame
/// frequency.
pub fn zeta_amplitude(spec: &QubitSpec, t: f64) -> Result<f64> {
    Ok(rtn_transfer(spec, t)?.coherence().norm())
}
