//! Dense complex linear algebra helpers: Hermitian eigensolver wrappers,
//! spectral matrix functions, commutators and a Gram-Schmidt span tracker.

use nalgebra::ComplexField;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::{cplx, CMatrix, Real, C};

const EIGEN_MAX_ITER: usize = 0; // 0 = unbounded in nalgebra

/// Eigenpairs of a Hermitian matrix, eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T: Real> {
    pub values: Vec<T>,
    /// Column `k` is the normalized eigenvector for `values[k]`.
    pub vectors: CMatrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V f(Λ) V†`.
    pub fn apply<F>(&self, f: F) -> CMatrix<T>
    where
        F: Fn(T) -> C<T>,
    {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for (k, &lambda) in self.values.iter().enumerate() {
            let fk = f(lambda);
            for i in 0..n {
                scaled[(i, k)] *= fk;
            }
        }
        &scaled * self.vectors.adjoint()
    }
}

pub fn max_abs<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
}

pub fn hermiticity_defect<T: Real>(m: &CMatrix<T>) -> T {
    let n = m.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).modulus());
        }
    }
    worst
}

pub fn commutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a * b - b * a
}

pub fn trace<T: Real>(m: &CMatrix<T>) -> C<T> {
    m.diagonal().iter().fold(cplx(T::zero()), |acc, &z| acc + z)
}

/// `Tr[A B]` without forming the product.
pub fn trace_product<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> C<T> {
    let n = a.nrows();
    let mut acc = cplx(T::zero());
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// `U ρ U†`.
pub fn conjugate<T: Real>(u: &CMatrix<T>, rho: &CMatrix<T>) -> CMatrix<T> {
    u * rho * u.adjoint()
}

/// Hermitian part `(M + M†)/2`, used to scrub rounding asymmetry.
pub fn hermitian_part<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    (m + m.adjoint()).scale(T::lit(0.5))
}

pub fn unitarity_defect<T: Real>(u: &CMatrix<T>) -> T {
    let n = u.nrows();
    let prod = u.adjoint() * u;
    max_abs(&(prod - CMatrix::<T>::identity(n, n)))
}

/// Full Hermitian eigendecomposition with descending eigenvalues.
pub fn hermitian_eigen<T: Real>(m: &CMatrix<T>) -> Result<HermitianEigen<T>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::InvalidInput(format!(
            "eigensolver needs a square matrix, got {}x{}",
            n,
            m.ncols()
        )));
    }
    if n == 0 {
        return Ok(HermitianEigen {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        });
    }
    let herm = hermitian_part(m);
    let eig = herm
        .clone()
        .try_symmetric_eigen(T::default_epsilon(), EIGEN_MAX_ITER)
        .ok_or_else(|| Error::Numerical {
            context: "hermitian eigensolver".into(),
            detail: format!(
                "no convergence for {n}x{n} matrix, max-abs entry {:.3e}, hermiticity defect {:.3e}",
                max_abs(&herm).as_f64(),
                hermiticity_defect(m).as_f64()
            ),
        })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, k| eig.eigenvectors[(i, order[k])]);
    Ok(HermitianEigen { values, vectors })
}

/// Connected components of the sparsity graph of `m` (entries with modulus
/// above `threshold`), each sorted ascending, ordered by smallest member.
pub fn components<T: Real>(m: &CMatrix<T>, threshold: T) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut label = vec![usize::MAX; n];
    let mut out = Vec::new();
    for seed in 0..n {
        if label[seed] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut stack = vec![seed];
        let mut members = Vec::new();
        label[seed] = id;
        while let Some(i) = stack.pop() {
            members.push(i);
            for j in 0..n {
                if label[j] == usize::MAX
                    && (m[(i, j)].modulus() > threshold || m[(j, i)].modulus() > threshold)
                {
                    label[j] = id;
                    stack.push(j);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

pub fn submatrix<T: Real>(m: &CMatrix<T>, idx: &[usize]) -> CMatrix<T> {
    CMatrix::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])])
}

/// One eigenpair with its vector embedded in the full space.
#[derive(Debug, Clone)]
pub struct LocalizedEigenpair<T: Real> {
    pub value: T,
    pub vector: nalgebra::DVector<C<T>>,
    /// Smallest flattened index in the support block.
    pub anchor: usize,
}

/// Eigenpairs computed component by component, so each eigenvector lives in
/// one sparsity component. Degenerate eigenvalues spread over different
/// components therefore stay separated in basis order.
pub fn localized_eigenpairs<T: Real>(m: &CMatrix<T>) -> Result<Vec<LocalizedEigenpair<T>>> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n);
    for comp in components(m, T::zero()) {
        let eig = hermitian_eigen(&submatrix(m, &comp))?;
        for k in 0..comp.len() {
            let mut v = nalgebra::DVector::<C<T>>::zeros(n);
            for (a, &i) in comp.iter().enumerate() {
                v[i] = eig.vectors[(a, k)];
            }
            out.push(LocalizedEigenpair {
                value: eig.values[k],
                vector: v,
                anchor: comp[0],
            });
        }
    }
    Ok(out)
}

/// Flattens a complex matrix into a real vector `[re..., im...]`, so that the
/// Euclidean inner product equals `Re Tr[X† Y]`.
pub fn realify<T: Real>(m: &CMatrix<T>) -> Vec<T> {
    let mut v = Vec::with_capacity(2 * m.len());
    v.extend(m.iter().map(|z| z.re));
    v.extend(m.iter().map(|z| z.im));
    v
}

pub fn unrealify<T: Real>(v: &[T], n: usize) -> CMatrix<T> {
    let half = n * n;
    DMatrix::from_iterator(n, n, (0..half).map(|k| C::new(v[k], v[half + k])))
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Incrementally grown orthonormal basis of a real vector space.
///
/// A candidate is accepted when its residual after two passes of modified
/// Gram-Schmidt exceeds `rel_tol` times the largest candidate norm seen so far.
#[derive(Debug, Clone)]
pub struct SpanTracker<T: Real> {
    vectors: Vec<Vec<T>>,
    rel_tol: T,
    scale: T,
}

impl<T: Real> SpanTracker<T> {
    pub fn new(rel_tol: T) -> Self {
        Self {
            vectors: Vec::new(),
            rel_tol,
            scale: T::zero(),
        }
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<T>] {
        &self.vectors
    }

    /// Returns the index of the new basis vector, or `None` if `v` was
    /// already in the span (numerically).
    pub fn insert(&mut self, mut v: Vec<T>) -> Option<usize> {
        let n0 = norm(&v);
        self.scale = self.scale.max(n0);
        if n0 <= T::zero() {
            return None;
        }
        for _ in 0..2 {
            for q in &self.vectors {
                let c = dot(q, &v);
                for (x, &qi) in v.iter_mut().zip(q) {
                    *x -= c * qi;
                }
            }
        }
        let r = norm(&v);
        if r <= self.rel_tol * self.scale {
            return None;
        }
        for x in v.iter_mut() {
            *x /= r;
        }
        self.vectors.push(v);
        Some(self.vectors.len() - 1)
    }

    /// Gram matrix of the stored basis (identity up to rounding).
    pub fn gram(&self) -> DMatrix<T> {
        let k = self.dim();
        DMatrix::from_fn(k, k, |a, b| dot(&self.vectors[a], &self.vectors[b]))
    }
}
