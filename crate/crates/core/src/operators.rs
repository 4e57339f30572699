//! Rotor operators over a truncated basis: `H₀ = J²`, `cos θ`, `cos² θ`, the
//! thermal state, and spectral matrix functions.
//!
//! Units: ħ = 1, energies in units of the rotational constant `B`, times in
//! units of `1/B`. The rotational period is then `π`.

use nalgebra::ComplexField;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::basis::{block_decomposition, build_basis, Basis, ProcessKind};
use crate::error::{Error, Result};
use crate::linalg::{self, HermitianEigen};
use crate::scalar::{cplx, CMatrix, Real, C};

/// Rotational period in internal time units.
pub const ROTATIONAL_PERIOD: f64 = std::f64::consts::PI;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const POSITIVITY_TOL: f64 = 1e-10;

/// Dense Hermitian matrix over a rotor basis.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator<T: Real> {
    matrix: CMatrix<T>,
    structure: Option<ProcessKind>,
}

impl<T: Real> HermitianOperator<T> {
    pub fn new(matrix: CMatrix<T>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidInput("operator matrix must be square".into()));
        }
        let scale = T::one().max(linalg::max_abs(&matrix));
        let defect = linalg::hermiticity_defect(&matrix);
        if defect > T::lit(HERMITIAN_TOL) * scale {
            return Err(Error::InvalidInput(format!(
                "matrix is not Hermitian (defect {:.3e})",
                defect.as_f64()
            )));
        }
        Ok(Self {
            matrix,
            structure: None,
        })
    }

    /// Tags the operator as respecting the invariant blocks of `kind` on
    /// `basis`. Fails unless every off-block entry is exactly zero.
    pub fn with_structure(mut self, basis: &Basis, kind: ProcessKind) -> Result<Self> {
        check_block_diagonal(&self.matrix, basis, kind)?;
        self.structure = Some(kind);
        Ok(self)
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn structure(&self) -> Option<ProcessKind> {
        self.structure
    }

    pub fn eigen(&self) -> Result<HermitianEigen<T>> {
        linalg::hermitian_eigen(&self.matrix)
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.matrix[(i, j)] == cplx(T::zero())))
    }

    pub fn diagonal(&self) -> Vec<T> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }

    /// Restriction to the given basis indices.
    pub fn restrict(&self, idx: &[usize]) -> CMatrix<T> {
        linalg::submatrix(&self.matrix, idx)
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            matrix: self.matrix.scale(s),
            structure: self.structure,
        }
    }

    /// Dense row-major export: `{"dim": n, "data": [[[re, im], ...], ...]}`.
    pub fn to_json(&self) -> serde_json::Value {
        matrix_to_json(&self.matrix)
    }

    /// One CSV row per matrix row, columns `re,im` pairs.
    pub fn to_csv(&self) -> String {
        let n = self.dim();
        let mut out = String::new();
        let header: Vec<String> = (0..n).flat_map(|j| [format!("re_{j}"), format!("im_{j}")]).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for i in 0..n {
            let row: Vec<String> = (0..n)
                .flat_map(|j| {
                    let z = self.matrix[(i, j)];
                    [crate::output::fmt_num(z.re.as_f64()), crate::output::fmt_num(z.im.as_f64())]
                })
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

pub(crate) fn matrix_to_json<T: Real>(m: &CMatrix<T>) -> serde_json::Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re.as_f64(), m[(i, j)].im.as_f64()])
                .collect()
        })
        .collect();
    serde_json::json!({ "dim": m.nrows(), "data": rows })
}

pub(crate) fn check_block_diagonal<T: Real>(
    m: &CMatrix<T>,
    basis: &Basis,
    kind: ProcessKind,
) -> Result<()> {
    if m.nrows() != basis.dim() {
        return Err(Error::Structure(format!(
            "operator dimension {} does not match basis dimension {}",
            m.nrows(),
            basis.dim()
        )));
    }
    let labels = block_decomposition(basis, kind).block_of(basis.dim());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if labels[i] != labels[j] && m[(i, j)] != cplx(T::zero()) {
                return Err(Error::Structure(format!(
                    "entry ({i}, {j}) couples different {kind} blocks"
                )));
            }
        }
    }
    Ok(())
}

/// Hermitian, positive semidefinite operator with a declared trace (1 for a
/// normalized state, less than 1 for a projected thermal state).
#[derive(Debug, Clone)]
pub struct DensityMatrix<T: Real> {
    matrix: CMatrix<T>,
    declared_trace: T,
    spectrum: OnceLock<Vec<T>>,
}

impl<T: Real> PartialEq for DensityMatrix<T> {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix && self.declared_trace == other.declared_trace
    }
}

impl<T: Real> DensityMatrix<T> {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(matrix: CMatrix<T>, declared_trace: T) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(matrix, declared_trace);
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix<T>, declared_trace: T) -> Self {
        Self {
            matrix,
            declared_trace,
            spectrum: OnceLock::new(),
        }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let w = T::one() / T::of_usize(n);
        Self::from_matrix_unchecked(CMatrix::from_diagonal_element(n, n, cplx(w)), T::one())
    }

    /// Pure state `|ψ⟩⟨ψ|` for a normalized `ψ`.
    pub fn pure(psi: &crate::scalar::CVector<T>) -> Self {
        Self::from_matrix_unchecked(psi * psi.adjoint(), T::one())
    }

    pub fn validate(&self) -> Result<()> {
        let scale = T::one().max(linalg::max_abs(&self.matrix));
        let defect = linalg::hermiticity_defect(&self.matrix);
        if defect > T::lit(HERMITIAN_TOL) * scale {
            return Err(Error::InvalidInput(format!(
                "density matrix not Hermitian (defect {:.3e})",
                defect.as_f64()
            )));
        }
        let tr = self.trace();
        if (tr - self.declared_trace).abs() > T::lit(TRACE_TOL) {
            return Err(Error::InvalidInput(format!(
                "trace {} differs from declared {}",
                tr.as_f64(),
                self.declared_trace.as_f64()
            )));
        }
        let spec = self.spectrum()?;
        if let Some(&min) = spec.last() {
            if min < -T::lit(POSITIVITY_TOL) {
                return Err(Error::InvalidInput(format!(
                    "negative eigenvalue {:.3e}",
                    min.as_f64()
                )));
            }
        }
        if let Some(&max) = spec.first() {
            if max > T::one() + T::lit(POSITIVITY_TOL) {
                return Err(Error::InvalidInput(format!(
                    "eigenvalue {} exceeds 1",
                    max.as_f64()
                )));
            }
        }
        Ok(())
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn declared_trace(&self) -> T {
        self.declared_trace
    }

    pub fn trace(&self) -> T {
        linalg::trace(&self.matrix).re
    }

    pub fn purity(&self) -> T {
        linalg::trace_product(&self.matrix, &self.matrix).re
    }

    /// Eigenvalues in descending order, computed once.
    pub fn spectrum(&self) -> Result<&[T]> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s);
        }
        let values = linalg::hermitian_eigen(&self.matrix)?.values;
        Ok(self.spectrum.get_or_init(|| values))
    }

    /// `Tr[ρ B]`, real part.
    pub fn expectation(&self, op: &CMatrix<T>) -> T {
        linalg::trace_product(&self.matrix, op).re
    }

    /// Divides by the actual trace, yielding a unit-trace state.
    pub fn renormalized(&self) -> Self {
        let tr = self.trace();
        Self::from_matrix_unchecked(self.matrix.unscale(tr), T::one())
    }

    /// `U ρ U†`, keeping the declared trace.
    pub fn conjugated(&self, u: &CMatrix<T>) -> Self {
        let m = linalg::hermitian_part(&linalg::conjugate(u, &self.matrix));
        Self::from_matrix_unchecked(m, self.declared_trace)
    }

    /// Zero-pads into a larger basis.
    pub fn embed(&self, from: &Basis, into: &Basis) -> Self {
        let map = from.embedding_into(into);
        let mut m = CMatrix::zeros(into.dim(), into.dim());
        for (a, &ia) in map.iter().enumerate() {
            for (b, &ib) in map.iter().enumerate() {
                m[(ia, ib)] = self.matrix[(a, b)];
            }
        }
        Self::from_matrix_unchecked(m, self.declared_trace)
    }

    /// Population in basis states with `j` above `j_cut`.
    pub fn population_above(&self, basis: &Basis, j_cut: u32) -> T {
        basis
            .states()
            .iter()
            .enumerate()
            .filter(|(_, s)| s.j > j_cut)
            .fold(T::zero(), |acc, (k, _)| acc + self.matrix[(k, k)].re)
    }

    pub fn to_json(&self) -> serde_json::Value {
        matrix_to_json(&self.matrix)
    }
}

/// `H₀ = J²`, diagonal with entries `j(j+1)`.
pub fn h0_matrix<T: Real>(basis: &Basis) -> HermitianOperator<T> {
    let n = basis.dim();
    let mut m = CMatrix::zeros(n, n);
    for (k, s) in basis.states().iter().enumerate() {
        m[(k, k)] = cplx(T::lit(s.energy() as f64));
    }
    HermitianOperator {
        matrix: m,
        structure: Some(ProcessKind::Alignment),
    }
}

/// `⟨j+1, m| cos θ |j, m⟩`.
pub fn cos_theta_element<T: Real>(j: u32, m: i32) -> T {
    let j = j as f64;
    let m = m as f64;
    T::lit((((j + 1.0) * (j + 1.0) - m * m) / ((2.0 * j + 1.0) * (2.0 * j + 3.0))).sqrt())
}

pub fn cos_theta_matrix<T: Real>(basis: &Basis) -> HermitianOperator<T> {
    let n = basis.dim();
    let mut m = CMatrix::zeros(n, n);
    for (k, s) in basis.states().iter().enumerate() {
        if let Some(up) = basis.index_of(s.j + 1, s.m) {
            let c = cplx(cos_theta_element::<T>(s.j, s.m));
            m[(up, k)] = c;
            m[(k, up)] = c;
        }
    }
    HermitianOperator {
        matrix: m,
        structure: Some(ProcessKind::Orientation),
    }
}

/// `P cos² θ P`, obtained by squaring `cos θ` on the basis with one extra
/// `j`-shell and projecting back. Exact because `cos θ` only couples
/// neighbouring shells.
pub fn cos2_theta_matrix<T: Real>(basis: &Basis) -> HermitianOperator<T> {
    let big = build_basis(basis.j_max() + 1);
    let c = cos_theta_matrix::<T>(&big);
    let sq = c.matrix() * c.matrix();
    let map = basis.embedding_into(&big);
    let m = CMatrix::from_fn(basis.dim(), basis.dim(), |a, b| sq[(map[a], map[b])]);
    HermitianOperator {
        matrix: m,
        structure: Some(ProcessKind::Alignment),
    }
}

/// The observable measuring the given process.
pub fn observable<T: Real>(basis: &Basis, kind: ProcessKind) -> HermitianOperator<T> {
    match kind {
        ProcessKind::Orientation => cos_theta_matrix(basis),
        ProcessKind::Alignment => cos2_theta_matrix(basis),
    }
}

/// How the thermal partition function is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ZMode {
    /// Sum over every rotational level; the projected state has trace ≤ 1.
    #[default]
    Full,
    /// Sum only over the truncated basis; the state has unit trace.
    Truncated,
}

const PARTITION_TAIL_TOL: f64 = 1e-12;

/// Partition function `Σ_j (2j+1) exp(-β j(j+1))` over all levels.
pub fn full_partition_function<T: Real>(beta: T) -> T {
    let mut z = T::zero();
    let mut j: u64 = 0;
    // Terms grow until roughly j ~ 1/sqrt(2β) before decaying.
    let peak = (T::one() / (T::lit(2.0) * beta)).sqrt().as_f64().ceil() as u64 + 1;
    loop {
        let jj = T::lit(j as f64);
        let term = T::lit((2 * j + 1) as f64) * (-beta * jj * (jj + T::one())).exp();
        z += term;
        if j > peak && term <= T::lit(PARTITION_TAIL_TOL) * z {
            break;
        }
        j += 1;
    }
    z
}

/// Canonical state `exp(-β H₀)/Z` with `β = B/(k_B T)`.
pub fn thermal_state<T: Real>(basis: &Basis, beta: T, z_mode: ZMode) -> Result<DensityMatrix<T>> {
    if beta <= T::zero() || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "beta must be positive and finite, got {}",
            beta.as_f64()
        )));
    }
    let n = basis.dim();
    let boltz: Vec<T> = basis
        .states()
        .iter()
        .map(|s| (-beta * T::lit(s.energy() as f64)).exp())
        .collect();
    let z = match z_mode {
        ZMode::Full => full_partition_function(beta),
        ZMode::Truncated => boltz.iter().fold(T::zero(), |a, &b| a + b),
    };
    let mut m = CMatrix::zeros(n, n);
    let mut tr = T::zero();
    for (k, &b) in boltz.iter().enumerate() {
        m[(k, k)] = cplx(b / z);
        tr += b / z;
    }
    let declared = match z_mode {
        ZMode::Full => tr,
        ZMode::Truncated => T::one(),
    };
    Ok(DensityMatrix::from_matrix_unchecked(m, declared))
}

/// `f(op)` through the spectral decomposition of `op`.
pub fn hermitian_function<T, F>(op: &HermitianOperator<T>, f: F) -> Result<CMatrix<T>>
where
    T: Real,
    F: Fn(T) -> C<T>,
{
    Ok(op.eigen()?.apply(f))
}

/// `exp(i A op)`.
pub fn exp_i<T: Real>(op: &HermitianOperator<T>, amplitude: T) -> Result<CMatrix<T>> {
    hermitian_function(op, |x| C::new(T::zero(), amplitude * x).exp())
}
