//! Two-qubit density matrices and their generalized Bloch vectors in the
//! basis `μ_{4a+b} = σ_a ⊗ σ_b` (qubit A is the left factor).

use std::sync::OnceLock;

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::linalg::{c, hermiticity_defect, hermitian_eigenvalues, kron2, pauli, C64};
use crate::noise::TransferMatrix;

/// Default eigenvalue floor for [`is_physical`].
pub const POSITIVITY_TOL: f64 = 1e-10;
const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;

/// The sixteen matrices `μ_i = σ_a ⊗ σ_b`, `i = 4a + b`, with `μ₀ = I₄`.
#[derive(Debug)]
pub struct GeneratorBasis {
    mu: [Matrix4<C64>; 16],
}

impl GeneratorBasis {
    pub fn get() -> &'static GeneratorBasis {
        static BASIS: OnceLock<GeneratorBasis> = OnceLock::new();
        BASIS.get_or_init(|| GeneratorBasis {
            mu: std::array::from_fn(|i| kron2(&pauli(i / 4), &pauli(i % 4))),
        })
    }

    pub fn mu(&self, i: usize) -> &Matrix4<C64> {
        &self.mu[i]
    }

    /// `(a, b)` with `μ_i = σ_a ⊗ σ_b`.
    pub fn factors(i: usize) -> (usize, usize) {
        (i / 4, i % 4)
    }
}

/// Extended Bloch vector: `n[0] = 1`, `n[1..16]` the components `Tr(ρ μ_i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector2Q {
    n: [f64; 16],
}

impl BlochVector2Q {
    /// The maximally mixed state.
    pub fn zero() -> Self {
        let mut n = [0.0; 16];
        n[0] = 1.0;
        BlochVector2Q { n }
    }

    /// Builds from the fifteen components `n₁ … n₁₅`.
    pub fn from_components(components: &[f64; 15]) -> Self {
        let mut n = [0.0; 16];
        n[0] = 1.0;
        n[1..].copy_from_slice(components);
        BlochVector2Q { n }
    }

    /// Builds from a full extended vector; `n[0]` must equal 1.
    pub fn from_extended(n: &[f64]) -> Result<Self> {
        if n.len() != 16 {
            return Err(Error::param("bloch vector", format!("expected 16 entries, got {}", n.len())));
        }
        if (n[0] - 1.0).abs() > 1e-12 {
            return Err(Error::param("bloch vector", format!("n0 must be 1, got {}", n[0])));
        }
        let mut out = [0.0; 16];
        out.copy_from_slice(n);
        out[0] = 1.0;
        Ok(BlochVector2Q { n: out })
    }

    pub fn extended(&self) -> &[f64; 16] {
        &self.n
    }

    pub fn components(&self) -> &[f64] {
        &self.n[1..]
    }

    /// Component `n_i`, `0 ≤ i < 16`.
    pub fn get(&self, i: usize) -> f64 {
        self.n[i]
    }

    pub fn scaled(&self, r: f64) -> Self {
        let mut n = self.n.map(|x| r * x);
        n[0] = 1.0;
        BlochVector2Q { n }
    }

    /// `T · n` for a 16×16 transfer matrix.
    pub fn evolve(&self, t: &TransferMatrix) -> Self {
        assert_eq!(t.dim(), 16, "two-qubit vectors need a 16x16 transfer matrix");
        let out = t.apply(&self.n);
        let mut n = [0.0; 16];
        n.copy_from_slice(&out);
        BlochVector2Q { n }
    }

    /// Largest componentwise difference over `n₁ … n₁₅`.
    pub fn max_abs_diff(&self, other: &BlochVector2Q) -> f64 {
        self.components()
            .iter()
            .zip(other.components())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// 4×4 two-qubit density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    rho: Matrix4<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(rho: Matrix4<C64>) -> Result<Self> {
        let d = DensityMatrix { rho };
        d.validate_shape()?;
        let lowest = d.eigenvalues()[0];
        if lowest < -POSITIVITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {lowest:e}"
            )));
        }
        Ok(d)
    }

    /// Wraps a matrix without any checks, for reconstructed or averaged
    /// states whose positivity is tested separately.
    pub fn new_unchecked(rho: Matrix4<C64>) -> Self {
        DensityMatrix { rho }
    }

    /// `|ψ⟩⟨ψ|` for a normalized state vector.
    pub fn pure(psi: &Vector4<C64>) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDensityMatrix(format!(
                "state vector norm {norm} differs from 1"
            )));
        }
        Ok(DensityMatrix {
            rho: psi * psi.adjoint(),
        })
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix {
            rho: Matrix4::identity() * c(0.25, 0.0),
        }
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.rho
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    /// Ascending eigenvalues of the Hermitian part.
    pub fn eigenvalues(&self) -> Vector4<f64> {
        hermitian_eigenvalues(&self.rho)
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        (self.rho * self.rho).trace().re
    }

    fn validate_shape(&self) -> Result<()> {
        let herm = hermiticity_defect(&self.rho);
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (defect {herm:e})"
            )));
        }
        let tr = self.trace();
        if (tr - c(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} differs from 1")));
        }
        Ok(())
    }
}

/// `n_i = Tr(ρ μ_i)`. Rejects non-Hermitian or non-unit-trace input;
/// positivity is not required.
pub fn to_bloch(rho: &DensityMatrix) -> Result<BlochVector2Q> {
    rho.validate_shape()?;
    Ok(to_bloch_unchecked(rho.matrix()))
}

pub(crate) fn to_bloch_unchecked(rho: &Matrix4<C64>) -> BlochVector2Q {
    let basis = GeneratorBasis::get();
    let mut n = [0.0; 16];
    n[0] = 1.0;
    for (i, slot) in n.iter_mut().enumerate().skip(1) {
        *slot = (rho * basis.mu(i)).trace().re;
    }
    BlochVector2Q { n }
}

/// `ρ = ¼(I₄ + Σ n_i μ_i)`; positivity is not enforced.
pub fn from_bloch(n: &BlochVector2Q) -> DensityMatrix {
    let basis = GeneratorBasis::get();
    let mut rho = Matrix4::<C64>::identity();
    for i in 1..16 {
        let w = n.get(i);
        if w != 0.0 {
            rho += basis.mu(i) * c(w, 0.0);
        }
    }
    DensityMatrix::new_unchecked(rho * c(0.25, 0.0))
}

/// Closest state with nonnegative spectrum: negative eigenvalues are
/// clamped to zero and the trace restored to one.
pub fn nearest_physical(rho: &DensityMatrix) -> DensityMatrix {
    let h = (rho.rho + rho.rho.adjoint()) * c(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let total: f64 = eig.eigenvalues.iter().map(|w| w.max(0.0)).sum();
    let mut out = Matrix4::zeros();
    for k in 0..4 {
        let w = eig.eigenvalues[k].max(0.0) / total;
        if w > 0.0 {
            let v = eig.eigenvectors.column(k);
            out += v * v.adjoint() * c(w, 0.0);
        }
    }
    DensityMatrix::new_unchecked(out)
}

/// `|n⃗|`, the Euclidean norm of `n₁ … n₁₅`; `Tr(ρ - ρ²) = ¾ - ¼|n⃗|²`.
pub fn purity_norm(n: &BlochVector2Q) -> f64 {
    n.components().iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// True iff every eigenvalue of `from_bloch(n)` is at least `-tol`.
pub fn is_physical(n: &BlochVector2Q, tol: f64) -> bool {
    from_bloch(n).eigenvalues()[0] >= -tol
}
