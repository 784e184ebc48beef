//! Dense symmetric linear algebra: Jacobi eigendecomposition, definiteness
//! classification, minimum-norm least-squares solves and range-membership
//! tests.
//!
//! Everything here targets small dense matrices (dimensions up to a few
//! dozen); the cyclic Jacobi method is simple, dependency-free and
//! accurate to machine precision for symmetric input, which is all this
//! crate ever feeds it.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::tol::Tolerances;

/// Dot product.
#[inline]
pub fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(&a, &b)| a * b).sum()
}

/// Euclidean norm.
#[inline]
pub fn norm2<T: Scalar>(x: &[T]) -> T {
    dot(x, x).sqrt()
}

/// `y += a·x`.
#[inline]
pub fn axpy<T: Scalar>(a: T, x: &[T], y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// `x − y` as a new vector.
#[inline]
pub fn sub<T: Scalar>(x: &[T], y: &[T]) -> Vec<T> {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(&a, &b)| a - b).collect()
}

/// Dense symmetric matrix, symmetrized on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix<T> {
    n: usize,
    /// Row-major `n × n` storage; `data[i*n+j] == data[j*n+i]` exactly.
    data: Vec<T>,
}

impl<T: Scalar> SymMatrix<T> {
    /// Builds from row-major entries, averaging the two triangles so the
    /// stored matrix is exactly symmetric.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let n = rows.len();
        assert!(n >= 1, "matrix dimension must be at least 1");
        assert!(
            rows.iter().all(|r| r.len() == n),
            "matrix rows must have length n"
        );
        let mut data = vec![T::zero(); n * n];
        let half = T::of(0.5);
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = half * (rows[i][j] + rows[j][i]);
            }
        }
        SymMatrix { n, data }
    }

    /// Builds from a flat row-major slice of length `n²`, symmetrizing.
    pub fn from_flat(n: usize, entries: &[T]) -> Self {
        assert!(n >= 1, "matrix dimension must be at least 1");
        assert_eq!(entries.len(), n * n, "flat storage must have n² entries");
        let mut data = vec![T::zero(); n * n];
        let half = T::of(0.5);
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = half * (entries[i * n + j] + entries[j * n + i]);
            }
        }
        SymMatrix { n, data }
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1);
        SymMatrix {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    /// Sets entry `(i, j)` and its mirror `(j, i)`.
    #[inline]
    pub fn set_sym(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    /// Matrix-vector product `M·x`.
    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n, "vector length must match dimension");
        let n = self.n;
        self.data.chunks_exact(n).map(|row| dot(row, x)).collect()
    }

    /// `self += a·other`.
    pub fn scaled_add(&mut self, a: T, other: &SymMatrix<T>) {
        assert_eq!(self.n, other.n, "dimension mismatch");
        for (s, &o) in self.data.iter_mut().zip(&other.data) {
            *s += a * o;
        }
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> T {
        self.data.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, &v| acc.max(v.abs()))
    }
}

/// Eigendecomposition `M = V diag(w) Vᵀ` of a symmetric matrix.
///
/// Eigenvalues ascend; `eigenvector(j)` is the unit eigenvector for
/// `values[j]`, and the stored basis is orthonormal.
#[derive(Debug, Clone)]
pub struct EigSym<T> {
    /// Eigenvalues in ascending order.
    pub values: Vec<T>,
    /// Row `j` holds the eigenvector for `values[j]`.
    vectors: Vec<T>,
    n: usize,
}

impl<T: Scalar> EigSym<T> {
    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn eigenvector(&self, j: usize) -> &[T] {
        &self.vectors[j * self.n..(j + 1) * self.n]
    }

    /// Spectral norm `max |w|`.
    pub fn spectral_norm(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, &w| acc.max(w.abs()))
    }

    /// Smallest and largest eigenvalues (first and last of the sorted list).
    #[inline]
    pub fn min_eig(&self) -> T {
        self.values[0]
    }

    #[inline]
    pub fn max_eig(&self) -> T {
        self.values[self.n - 1]
    }

    /// Applies the pseudoinverse: `Σ_{|w_j| > zero_band} ⟨v_j, rhs⟩/w_j · v_j`.
    pub fn apply_pinv(&self, rhs: &[T], zero_band: T) -> Vec<T> {
        assert_eq!(rhs.len(), self.n);
        let mut x = vec![T::zero(); self.n];
        for j in 0..self.n {
            let w = self.values[j];
            if w.abs() > zero_band {
                let coeff = dot(self.eigenvector(j), rhs) / w;
                axpy(coeff, self.eigenvector(j), &mut x);
            }
        }
        x
    }

    /// Indices of eigenvalues inside the zero band (the numerical kernel).
    pub fn kernel_indices(&self, zero_band: T) -> Vec<usize> {
        (0..self.n)
            .filter(|&j| self.values[j].abs() <= zero_band)
            .collect()
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Always converges for symmetric input; the sweep cap is a defect guard,
/// not an error path.
pub fn eig_sym<T: Scalar>(m: &SymMatrix<T>) -> EigSym<T> {
    const MAX_SWEEPS: usize = 64;
    let n = m.dim();
    let mut a = m.data().to_vec();
    // V starts as the identity; columns accumulate the rotations.
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }

    let fro = m.norm_fro();
    let off_tol = fro * T::epsilon() * T::of_usize(n);

    if n > 1 {
        for _sweep in 0..MAX_SWEEPS {
            let mut off = T::zero();
            for p in 0..n - 1 {
                for q in p + 1..n {
                    off += a[p * n + q] * a[p * n + q];
                }
            }
            if off.sqrt() <= off_tol || off == T::zero() {
                break;
            }
            debug_assert!(_sweep + 1 < MAX_SWEEPS, "Jacobi sweep cap reached");

            for p in 0..n - 1 {
                for q in p + 1..n {
                    let apq = a[p * n + q];
                    // Skip rotations that cannot change the matrix.
                    if apq.abs() <= (a[p * n + p].abs() + a[q * n + q].abs()) * T::epsilon() {
                        a[p * n + q] = T::zero();
                        a[q * n + p] = T::zero();
                        continue;
                    }
                    let theta = (a[q * n + q] - a[p * n + p]) / (T::of(2.0) * apq);
                    let t = {
                        let s = if theta >= T::zero() { T::one() } else { -T::one() };
                        s / (theta.abs() + (T::one() + theta * theta).sqrt())
                    };
                    let c = T::one() / (T::one() + t * t).sqrt();
                    let s = t * c;
                    let tau = s / (T::one() + c);

                    a[p * n + p] -= t * apq;
                    a[q * n + q] += t * apq;
                    a[p * n + q] = T::zero();
                    a[q * n + p] = T::zero();
                    for i in 0..n {
                        if i != p && i != q {
                            let aip = a[i * n + p];
                            let aiq = a[i * n + q];
                            let new_p = aip - s * (aiq + tau * aip);
                            let new_q = aiq + s * (aip - tau * aiq);
                            a[i * n + p] = new_p;
                            a[p * n + i] = new_p;
                            a[i * n + q] = new_q;
                            a[q * n + i] = new_q;
                        }
                    }
                    for i in 0..n {
                        let vip = v[i * n + p];
                        let viq = v[i * n + q];
                        v[i * n + p] = vip - s * (viq + tau * vip);
                        v[i * n + q] = viq + s * (vip - tau * viq);
                    }
                }
            }
        }
    }

    // Sort ascending, storing eigenvectors as rows.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[i * n + i]
            .partial_cmp(&a[j * n + j])
            .expect("eigenvalues of a finite symmetric matrix are finite")
    });
    let mut values = Vec::with_capacity(n);
    let mut vectors = vec![T::zero(); n * n];
    for (row, &col) in order.iter().enumerate() {
        values.push(a[col * n + col]);
        for i in 0..n {
            vectors[row * n + i] = v[i * n + col];
        }
    }
    EigSym { values, vectors, n }
}

/// Definiteness class of a symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DefClass {
    PosDef,
    PosSemiDefSingular,
    NegDef,
    NegSemiDefSingular,
    Indefinite,
}

/// Definiteness classification with the extreme eigenvalues that decided it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Definiteness<T> {
    pub class: DefClass,
    pub min_eig: T,
    pub max_eig: T,
}

impl<T: Scalar> Definiteness<T> {
    #[inline]
    pub fn is_psd(&self) -> bool {
        matches!(self.class, DefClass::PosDef | DefClass::PosSemiDefSingular)
    }

    #[inline]
    pub fn is_nsd(&self) -> bool {
        matches!(self.class, DefClass::NegDef | DefClass::NegSemiDefSingular)
    }
}

pub(crate) fn classify_from_extremes<T: Scalar>(
    min_eig: T,
    max_eig: T,
    tol: &Tolerances<T>,
) -> Definiteness<T> {
    let band = tol.eig_zero_band(min_eig.abs().max(max_eig.abs()));
    // Boundary eigenvalues inside ±band count as zero, resolving ties
    // toward the semidefinite classes (positive side first for the zero
    // matrix).
    let class = if min_eig > band {
        DefClass::PosDef
    } else if max_eig < -band {
        DefClass::NegDef
    } else if min_eig >= -band {
        DefClass::PosSemiDefSingular
    } else if max_eig <= band {
        DefClass::NegSemiDefSingular
    } else {
        DefClass::Indefinite
    };
    Definiteness {
        class,
        min_eig,
        max_eig,
    }
}

/// Classifies a symmetric matrix as PD / PSD-singular / ND / NSD-singular /
/// indefinite, with eigenvalues inside the zero band counting as zero.
pub fn classify_definiteness<T: Scalar>(m: &SymMatrix<T>, tol: &Tolerances<T>) -> Definiteness<T> {
    let eig = eig_sym(m);
    classify_from_extremes(eig.min_eig(), eig.max_eig(), tol)
}

/// Minimum-norm least-squares solution of `M x = rhs`.
#[derive(Debug, Clone)]
pub struct MinNormSolution<T> {
    /// `M⁺ rhs`; orthogonal to the kernel of `M`.
    pub x: Vec<T>,
    /// `‖M x − rhs‖₂`; nonzero exactly when `rhs ∉ Im M` (numerically).
    pub residual: T,
}

pub(crate) fn solve_minnorm_with<T: Scalar>(
    eig: &EigSym<T>,
    m: &SymMatrix<T>,
    rhs: &[T],
    tol: &Tolerances<T>,
) -> MinNormSolution<T> {
    let band = tol.eig_zero_band(eig.spectral_norm());
    let x = eig.apply_pinv(rhs, band);
    let residual = norm2(&sub(&m.mul_vec(&x), rhs));
    MinNormSolution { x, residual }
}

/// Solves `M x = rhs` in the minimum-norm least-squares sense via the
/// eigendecomposition, zeroing reciprocals of eigenvalues in the zero band.
pub fn solve_minnorm<T: Scalar>(
    m: &SymMatrix<T>,
    rhs: &[T],
    tol: &Tolerances<T>,
) -> MinNormSolution<T> {
    let eig = eig_sym(m);
    solve_minnorm_with(&eig, m, rhs, tol)
}

pub(crate) fn in_range_with<T: Scalar>(
    eig: &EigSym<T>,
    sol: &MinNormSolution<T>,
    rhs: &[T],
    tol: &Tolerances<T>,
) -> bool {
    let scale = eig.spectral_norm() * norm2(&sol.x) + norm2(rhs) + T::one();
    sol.residual <= tol.rng * scale
}

/// Whether `rhs` lies in the column space of `M`.
pub fn in_range<T: Scalar>(m: &SymMatrix<T>, rhs: &[T], tol: &Tolerances<T>) -> bool {
    let eig = eig_sym(m);
    let sol = solve_minnorm_with(&eig, m, rhs, tol);
    in_range_with(&eig, &sol, rhs, tol)
}
