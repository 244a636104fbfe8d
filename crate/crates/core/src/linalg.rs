//! Dense complex linear algebra on small square matrices: Hermitian
//! eigendecomposition by cyclic Jacobi rotations, spectral function
//! application, and seeded random instance generation.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::evolution::PureState;
use crate::{Error, Result};

/// Relative Hermiticity tolerance enforced by [`eig_hermitian`].
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Off-diagonal Frobenius threshold for Jacobi convergence, relative to the
/// Frobenius norm of the input.
const JACOBI_OFF_TOL: f64 = 1e-14;

/// Maximum number of cyclic Jacobi sweeps.
const JACOBI_MAX_SWEEPS: usize = 100;

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a `dim x dim` matrix from row-major entries, rejecting
    /// non-finite values.
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                left: dim * dim,
                right: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dim, data })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::ONE);
        }
        m
    }

    /// Diagonal matrix from real entries.
    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &x) in diag.iter().enumerate() {
            m.set(i, i, Complex64::new(x, 0.0));
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.data[i * self.dim + j] = value;
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.set(i, j, self.get(j, i).conj());
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a == Complex64::ZERO {
                    continue;
                }
                for j in 0..d {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: v.len(),
            });
        }
        let d = self.dim;
        let mut out = vec![Complex64::ZERO; d];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut acc = Complex64::ZERO;
            for (j, vj) in v.iter().enumerate() {
                acc += self.get(i, j) * vj;
            }
            *slot = acc;
        }
        Ok(out)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Kronecker product `self (x) other`.
    pub fn kron(&self, other: &Self) -> Self {
        let da = self.dim;
        let db = other.dim;
        let d = da * db;
        let mut out = Self::zeros(d);
        for ia in 0..da {
            for ja in 0..da {
                let a = self.get(ia, ja);
                if a == Complex64::ZERO {
                    continue;
                }
                for ib in 0..db {
                    for jb in 0..db {
                        out.set(ia * db + ib, ja * db + jb, a * other.get(ib, jb));
                    }
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry-wise deviation from `self == self^dagger`.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }
}

/// Inner product `<a|b>`, conjugate-linear in the first argument.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Euclidean norm of a complex vector.
pub fn vec_norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian generator of a one-parameter unitary evolution, stored with its
/// spectral decomposition. Eigenvalues ascend; eigenvectors are orthonormal
/// and `eigenvector(i)` pairs with `eigenvalue(i)`.
#[derive(Debug, Clone)]
pub struct Generator {
    matrix: ComplexMatrix,
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<Vec<Complex64>>,
}

impl Generator {
    pub(crate) fn from_parts(
        matrix: ComplexMatrix,
        eigenvalues: Vec<f64>,
        eigenvectors: Vec<Vec<Complex64>>,
    ) -> Self {
        debug_assert_eq!(matrix.dim(), eigenvalues.len());
        debug_assert!(eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        Self {
            matrix,
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, i: usize) -> f64 {
        self.eigenvalues[i]
    }

    pub fn eigenvector(&self, i: usize) -> &[Complex64] {
        &self.eigenvectors[i]
    }

    /// Smallest eigenvalue.
    pub fn k_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Largest eigenvalue.
    pub fn k_max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// Coefficients `<v_i|psi>` of a state in the eigenbasis.
    pub(crate) fn eigenbasis_coefficients(&self, psi: &[Complex64]) -> Vec<Complex64> {
        self.eigenvectors.iter().map(|v| inner(v, psi)).collect()
    }

    /// Eigenvalues paired with the occupation probabilities `|<v_i|psi>|^2`.
    pub fn spectral_weights(&self, psi: &PureState) -> Result<Vec<(f64, f64)>> {
        if self.dim() != psi.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: psi.dim(),
            });
        }
        Ok(self
            .eigenvalues
            .iter()
            .zip(&self.eigenvectors)
            .map(|(lambda, v)| (*lambda, inner(v, psi.amplitudes()).norm_sqr()))
            .collect())
    }
}

/// Global numerical settings.
#[derive(Debug, Clone)]
pub struct Config {
    /// Reduced Planck constant carried symbolically through every formula.
    pub hbar: f64,
    /// Step of the central finite difference used for rate oracles.
    pub fd_step: f64,
    /// Exclusion band around `s = 0` and `s = pi` for the singular bound.
    pub sing_margin: f64,
    /// Additive tolerance when comparing a measured rate against a bound.
    pub tol_bound: f64,
    /// Default seed for randomized campaigns.
    pub rng_seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            fd_step: 1e-6,
            sing_margin: 0.01,
            tol_bound: 1e-4,
            rng_seed: 42,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        let ok = self.hbar > 0.0
            && self.fd_step > 0.0
            && self.sing_margin > 0.0
            && self.sing_margin < std::f64::consts::FRAC_PI_2
            && self.tol_bound > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSpec(
                "config fields must be positive with sing_margin < pi/2".into(),
            ))
        }
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Rejects inputs whose Hermiticity residual exceeds
/// `HERMITICITY_TOL * max_abs`. Eigenvalues are returned ascending; for
/// degenerate eigenvalues the eigenvectors form an arbitrary orthonormal
/// basis of the eigenspace.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<Generator> {
    let tolerance = HERMITICITY_TOL * m.max_abs();
    let residual = m.hermiticity_residual();
    if residual > tolerance {
        return Err(Error::NotHermitian {
            residual,
            tolerance,
        });
    }
    let (eigenvalues, eigenvectors) = jacobi_hermitian(m)?;
    Ok(Generator::from_parts(m.clone(), eigenvalues, eigenvectors))
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let d = a.dim();
    let mut sum = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                sum += a.get(i, j).norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// Cyclic Jacobi for Hermitian matrices. Each rotation annihilates one
/// off-diagonal pair with a complex plane rotation; the accumulated product
/// of rotations yields the eigenvectors.
fn jacobi_hermitian(m: &ComplexMatrix) -> Result<(Vec<f64>, Vec<Vec<Complex64>>)> {
    let d = m.dim();
    let mut a = m.clone();
    let mut v = ComplexMatrix::identity(d);
    let threshold = JACOBI_OFF_TOL * m.frobenius_norm();

    let mut converged = off_diagonal_norm(&a) <= threshold;
    let mut sweeps = 0;
    while !converged {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence(JACOBI_MAX_SWEEPS));
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a.get(p, q);
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                // phase = e^{i arg(a_pq)}; the rotation acts in the (p,q)
                // plane as [[c, s*phase], [-s*conj(phase), c]].
                let phase = apq / r;
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // A <- J^dagger A
                for j in 0..d {
                    let apj = a.get(p, j);
                    let aqj = a.get(q, j);
                    a.set(p, j, c * apj - s * phase * aqj);
                    a.set(q, j, s * phase.conj() * apj + c * aqj);
                }
                // A <- A J
                for i in 0..d {
                    let aip = a.get(i, p);
                    let aiq = a.get(i, q);
                    a.set(i, p, c * aip - s * phase.conj() * aiq);
                    a.set(i, q, s * phase * aip + c * aiq);
                }
                // V <- V J
                for i in 0..d {
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, c * vip - s * phase.conj() * viq);
                    v.set(i, q, s * phase * vip + c * viq);
                }
                a.set(p, q, Complex64::ZERO);
                a.set(q, p, Complex64::ZERO);
            }
        }
        sweeps += 1;
        converged = off_diagonal_norm(&a) <= threshold;
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a.get(i, i).re.partial_cmp(&a.get(j, j).re).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a.get(i, i).re).collect();
    let eigenvectors: Vec<Vec<Complex64>> = order
        .iter()
        .map(|&col| (0..d).map(|row| v.get(row, col)).collect())
        .collect();
    Ok((eigenvalues, eigenvectors))
}

/// Applies a scalar function to the generator through its spectrum:
/// `sum_i f(lambda_i) |v_i><v_i|`.
pub fn spectral_function<F>(g: &Generator, f: F) -> ComplexMatrix
where
    F: Fn(f64) -> Complex64,
{
    let d = g.dim();
    let mut out = ComplexMatrix::zeros(d);
    for (lambda, v) in g.eigenvalues().iter().zip(&g.eigenvectors) {
        let fl = f(*lambda);
        if fl == Complex64::ZERO {
            continue;
        }
        for (i, vi) in v.iter().enumerate() {
            let left = fl * vi;
            for (j, vj) in v.iter().enumerate() {
                let val = out.get(i, j) + left * vj.conj();
                out.set(i, j, val);
            }
        }
    }
    out
}

/// Seeded GUE-style random generator: `(A + A^dagger)/2` with independent
/// standard complex Gaussian entries of `A`. Deterministic per seed.
pub fn random_hermitian(dim: usize, seed: u64) -> Generator {
    assert!(dim >= 2, "random_hermitian requires dim >= 2");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            a.set(i, j, Complex64::new(re, im));
        }
    }
    let mut h = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            h.set(i, j, 0.5 * (a.get(i, j) + a.get(j, i).conj()));
        }
    }
    eig_hermitian(&h).expect("symmetrized Gaussian matrix is Hermitian")
}

/// Seeded Haar-like random pure state: normalized standard complex Gaussian
/// amplitudes. Deterministic per seed.
pub fn random_pure_state(dim: usize, seed: u64) -> PureState {
    assert!(dim >= 2, "random_pure_state requires dim >= 2");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let amplitudes: Vec<Complex64> = (0..dim)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im)
            })
            .collect();
        if vec_norm(&amplitudes) > 1e-6 {
            return PureState::from_unnormalized(amplitudes)
                .expect("Gaussian draw with non-negligible norm normalizes");
        }
    }
}
