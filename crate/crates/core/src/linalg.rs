//! Small dense complex helpers shared by the engines.

use nalgebra::{Matrix2, Matrix3, Matrix4, Vector4};
use num_complex::Complex64;

pub type C64 = Complex64;

pub const fn c(re: f64, im: f64) -> C64 {
    Complex64::new(re, im)
}

/// Pauli matrix σ_k for k ∈ {0,1,2,3} (σ_0 = identity).
pub fn pauli(k: usize) -> Matrix2<C64> {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match k {
        0 => Matrix2::new(one, z, z, one),
        1 => Matrix2::new(z, one, one, z),
        2 => Matrix2::new(z, -i, i, z),
        3 => Matrix2::new(one, z, z, -one),
        _ => panic!("pauli index {k} out of range"),
    }
}

/// A ⊗ B with A acting on the left (most significant) qubit.
pub fn kron2(a: &Matrix2<C64>, b: &Matrix2<C64>) -> Matrix4<C64> {
    let mut out = Matrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Levi-Civita symbol on indices 0..3.
pub fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Matrix of the linear map `n ↦ v × n`.
pub fn cross_matrix(v: [f64; 3]) -> Matrix3<f64> {
    Matrix3::new(0.0, -v[2], v[1], v[2], 0.0, -v[0], -v[1], v[0], 0.0)
}

pub fn hermiticity_defect(m: &Matrix4<C64>) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Ascending eigenvalues of a Hermitian matrix (the anti-Hermitian part is ignored).
pub fn hermitian_eigenvalues(m: &Matrix4<C64>) -> Vector4<f64> {
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Vector4::from_column_slice(&ev)
}

/// Principal square root of a Hermitian positive semidefinite matrix;
/// eigenvalues below zero are clamped.
pub fn psd_sqrt(m: &Matrix4<C64>) -> Matrix4<C64> {
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let mut out = Matrix4::zeros();
    for k in 0..4 {
        let w = eig.eigenvalues[k].max(0.0).sqrt();
        if w == 0.0 {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        out += v * v.adjoint() * c(w, 0.0);
    }
    out
}
