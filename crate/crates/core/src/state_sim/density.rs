use nalgebra::DMatrix;
use num_complex::Complex64;

use super::PureState;
use crate::error::{Error, Result};

/// Dense density matrix on a handful of qubits. Used as an oracle only.
///
/// Qubit `q` is bit `q` of the row/column index (little-endian).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    m: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        let dim = m.nrows();
        if dim != m.ncols() || !dim.is_power_of_two() {
            return Err(Error::contract(format!(
                "density matrix must be square with power-of-two dimension, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(DensityMatrix {
            num_qubits: dim.trailing_zeros() as usize,
            m,
        })
    }

    pub fn from_pure(state: &PureState) -> Self {
        let v = state.amplitudes();
        let dim = v.len();
        let m = DMatrix::from_fn(dim, dim, |i, j| v[i] * v[j].conj());
        DensityMatrix {
            num_qubits: state.num_qubits(),
            m,
        }
    }

    pub fn maximally_mixed(num_qubits: usize) -> Self {
        let dim = 1usize << num_qubits;
        let m = DMatrix::from_diagonal_element(dim, dim, Complex64::new(1.0 / dim as f64, 0.0));
        DensityMatrix { num_qubits, m }
    }

    /// Uniform average of equally sized density matrices.
    pub fn mixture(parts: &[DensityMatrix]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::contract("mixture of zero states"))?;
        let mut acc = DMatrix::zeros(first.dim(), first.dim());
        for p in parts {
            if p.dim() != first.dim() {
                return Err(Error::contract("mixture dimension mismatch"));
            }
            acc += &p.m;
        }
        acc /= Complex64::new(parts.len() as f64, 0.0);
        DensityMatrix::from_matrix(acc)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.m[(row, col)]
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    /// `self ⊗ other` with `self` on the low positions and `other` above it.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let ds = self.dim();
        let dim = ds * other.dim();
        let m = DMatrix::from_fn(dim, dim, |i, j| {
            self.m[(i % ds, j % ds)] * other.m[(i / ds, j / ds)]
        });
        DensityMatrix {
            num_qubits: self.num_qubits + other.num_qubits,
            m,
        }
    }

    /// Moves qubit `q` to position `perm[q]`.
    pub fn permute_qubits(&self, perm: &[usize]) -> Result<DensityMatrix> {
        if perm.len() != self.num_qubits {
            return Err(Error::contract("permutation length mismatch"));
        }
        let mut seen = vec![false; perm.len()];
        for &p in perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::contract("not a permutation"));
            }
        }
        let map = |i: usize| -> usize {
            perm.iter()
                .enumerate()
                .fold(0, |acc, (q, &dst)| acc | (((i >> q) & 1) << dst))
        };
        let dim = self.dim();
        let targets: Vec<usize> = (0..dim).map(map).collect();
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(targets[i], targets[j])] = self.m[(i, j)];
            }
        }
        Ok(DensityMatrix {
            num_qubits: self.num_qubits,
            m,
        })
    }

    pub fn trace(&self) -> Complex64 {
        self.m.trace()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| (self.m[(i, j)] - self.m[(j, i)].conj()).norm() <= tol))
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.m + self.m.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Hermitian, unit trace and positive semidefinite within the given tolerances.
    pub fn is_valid(&self, trace_tol: f64, psd_tol: f64) -> bool {
        self.is_hermitian(trace_tol)
            && (self.trace() - Complex64::new(1.0, 0.0)).norm() <= trace_tol
            && self.eigenvalues().first().is_none_or(|&l| l >= -psd_tol)
    }

    /// `½‖self − other‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::contract("trace distance dimension mismatch"));
        }
        let diff = DensityMatrix {
            num_qubits: self.num_qubits,
            m: &self.m - &other.m,
        };
        Ok(0.5 * diff.eigenvalues().iter().map(|l| l.abs()).sum::<f64>())
    }

    /// Uhlmann fidelity `(Tr √(√a b √a))²`.
    pub fn fidelity(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::contract("fidelity dimension mismatch"));
        }
        let sqrt_a = psd_sqrt(&self.m);
        let inner = &sqrt_a * &other.m * &sqrt_a;
        let inner = (&inner + inner.adjoint()) * Complex64::new(0.5, 0.0);
        let root_sum: f64 = inner
            .symmetric_eigenvalues()
            .iter()
            .map(|&l| l.max(0.0).sqrt())
            .sum();
        Ok((root_sum * root_sum).clamp(0.0, 1.0))
    }

    /// `⟨ψ|ρ|ψ⟩`, the fidelity against a pure state.
    pub fn fidelity_with_pure(&self, state: &PureState) -> Result<f64> {
        let v = state.amplitudes();
        if v.len() != self.dim() {
            return Err(Error::contract("fidelity dimension mismatch"));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..v.len() {
            for j in 0..v.len() {
                acc += v[i].conj() * self.m[(i, j)] * v[j];
            }
        }
        Ok(acc.re.clamp(0.0, 1.0))
    }
}

fn psd_sqrt(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let roots = eig
        .eigenvalues
        .map(|l| Complex64::new(l.max(0.0).sqrt(), 0.0));
    &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.adjoint()
}
