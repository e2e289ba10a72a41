//! Dense complex linear algebra for small qubit registers.
//!
//! Everything here works on `nalgebra` dynamic matrices. Tensor products use
//! the usual convention where the left factor carries the most significant
//! index, so in a chain state `|s_1 s_2 ... s_n>` the first spin selects the
//! upper or lower half of the amplitude vector.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Default tolerance for unitarity and hermiticity predicates.
pub const STRUCTURE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

pub fn pauli(axis: Axis) -> CMatrix {
    let entries = match axis {
        Axis::X => [ZERO, ONE, ONE, ZERO],
        Axis::Y => [ZERO, -I, I, ZERO],
        Axis::Z => [ONE, ZERO, ZERO, -ONE],
    };
    CMatrix::from_row_slice(2, 2, &entries)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn hadamard() -> CMatrix {
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    CMatrix::from_row_slice(2, 2, &[s, s, s, -s])
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `op` acting on site `site` (0-based) of an `n`-qubit register.
pub fn embed_single(op: &CMatrix, site: usize, n: usize) -> CMatrix {
    assert!(site < n, "site {site} out of range for {n} qubits");
    let left = identity(1 << site);
    let right = identity(1 << (n - site - 1));
    kron(&kron(&left, op), &right)
}

/// Computational basis vector `|index>` of dimension `dim`.
pub fn basis_state(dim: usize, index: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[index] = ONE;
    v
}

pub fn density(psi: &CVector) -> CMatrix {
    psi * psi.adjoint()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `max |U^dagger U - I|`.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(&(u.adjoint() * u), &identity(u.nrows()))
}

/// `max |H - H^dagger|`.
pub fn hermiticity_error(h: &CMatrix) -> f64 {
    if !h.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(h, &h.adjoint())
}

pub fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    unitarity_error(u) < tol
}

pub fn is_hermitian(h: &CMatrix, tol: f64) -> bool {
    hermiticity_error(h) < tol
}

pub fn det2(u: &CMatrix) -> C64 {
    assert_eq!(u.shape(), (2, 2));
    u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)]
}

/// Number of qubits for a power-of-two dimension.
pub fn qubit_count(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Spectral decomposition `H = V diag(E) V^dagger` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: DVector<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(h: &CMatrix) -> Result<Self> {
        let deviation = hermiticity_error(h);
        if deviation >= STRUCTURE_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        // symmetric_eigen reads only one triangle; symmetrize so both agree.
        let sym = (h + h.adjoint()).scale(0.5);
        let eig = sym.symmetric_eigen();
        Ok(Self {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V f(E) V^dagger` for a complex function of the eigenvalues.
    pub fn apply(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (j, &e) in self.values.iter().enumerate() {
            let fe = f(e);
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= fe);
        }
        scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply(|e| C64::new(e, 0.0))
    }

    /// `exp(-i t H)`.
    pub fn propagator(&self, t: f64) -> CMatrix {
        self.apply(|e| C64::from_polar(1.0, -t * e))
    }

    /// Divided-difference kernel of `E -> exp(-i t E)`.
    ///
    /// For a perturbation `H + h A`, the derivative of `exp(-i t (H + h A))`
    /// in `h` at `h = 0` is `V (K o (V^dagger A V)) V^dagger`, where `o` is the
    /// elementwise product and `K` is this matrix.
    pub fn frechet_kernel(&self, t: f64) -> CMatrix {
        let d = self.dim();
        CMatrix::from_fn(d, d, |j, k| {
            let (ej, ek) = (self.values[j], self.values[k]);
            let mean = 0.5 * (ej + ek);
            let half = 0.5 * t * (ej - ek);
            let sinc = if half.abs() < 1e-8 {
                1.0 - half * half / 6.0
            } else {
                half.sin() / half
            };
            C64::new(0.0, -t) * C64::from_polar(1.0, -t * mean) * sinc
        })
    }
}

/// `exp(-i t H)` for Hermitian `H`, through its eigendecomposition.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> Result<CMatrix> {
    Ok(HermitianEigen::new(h)?.propagator(t))
}

/// Reduced density matrix of the first qubit of a `2^n`-dimensional state.
pub fn partial_trace_keep_first(rho: &CMatrix) -> Result<CMatrix> {
    if !rho.is_square() {
        return Err(Error::DimensionMismatch {
            expected: rho.nrows(),
            found: rho.ncols(),
        });
    }
    let dim = rho.nrows();
    qubit_count(dim)?;
    let rest = dim / 2;
    Ok(CMatrix::from_fn(2, 2, |a, b| {
        (0..rest).map(|r| rho[(a * rest + r, b * rest + r)]).sum()
    }))
}

/// Probability of finding the first qubit of `psi` in `|1>`.
///
/// Equal to `<1| tr_rest(|psi><psi|) |1>` but skips forming the density matrix.
pub fn first_qubit_one_probability(psi: &CVector) -> f64 {
    let half = psi.len() / 2;
    psi.rows(half, half).iter().map(|z| z.norm_sqr()).sum()
}
