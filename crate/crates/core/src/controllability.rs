//! Dynamical Lie algebra dimensions, simultaneous-controllability counts and
//! the fixed-point (set S) analysis of the kick strategies.

use nalgebra::ComplexField;
use serde::{Deserialize, Serialize};

use crate::basis::{block_decomposition, build_basis, ProcessKind};
use crate::error::{Error, Result};
use crate::linalg::{self, realify, unrealify, SpanTracker};
use crate::operators::{cos_theta_matrix, h0_matrix, observable, DensityMatrix, HermitianOperator};
use crate::scalar::{CMatrix, Real, C};

pub const LIE_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct LieClosure<T: Real> {
    pub dim: usize,
    /// Orthonormal basis under `Re Tr[X† Y]`.
    pub basis: Vec<CMatrix<T>>,
    pub gram: nalgebra::DMatrix<T>,
}

/// Real Lie algebra generated by skew-Hermitian `generators`: commutators of
/// basis pairs are orthogonalized in until the span stops growing.
pub fn lie_closure<T: Real>(generators: &[CMatrix<T>], rel_tol: T) -> Result<LieClosure<T>> {
    let n = generators.first().map_or(0, |g| g.nrows());
    for g in generators {
        if g.nrows() != n || g.ncols() != n {
            return Err(Error::InvalidInput("generators must share one square shape".into()));
        }
        let defect = linalg::max_abs(&(g + g.adjoint()));
        if defect > T::lit(1e-12) * T::one().max(linalg::max_abs(g)) {
            return Err(Error::InvalidInput(format!(
                "generator is not skew-Hermitian (defect {:.3e})",
                defect.as_f64()
            )));
        }
    }
    let mut span = SpanTracker::new(rel_tol);
    for g in generators {
        span.insert(realify(g));
    }
    let mut mats: Vec<CMatrix<T>> = span.vectors().iter().map(|v| unrealify(v, n)).collect();
    // Element k has been commuted with all elements before it.
    let mut next = 0;
    while next < mats.len() {
        for i in 0..next {
            let c = linalg::commutator(&mats[i], &mats[next]);
            if span.insert(realify(&c)).is_some() {
                mats.push(unrealify(span.vectors().last().unwrap(), n));
            }
        }
        next += 1;
    }
    Ok(LieClosure {
        dim: span.dim(),
        gram: span.gram(),
        basis: mats,
    })
}

/// `i H` for Hermitian `H`.
pub fn skew<T: Real>(h: &CMatrix<T>) -> CMatrix<T> {
    h * C::new(T::zero(), T::one())
}

/// `dim L` for generators `i H₀` and `i O` of the process at `j_max`.
pub fn rotor_lie_dimension(j_max: u32, kind: ProcessKind) -> Result<usize> {
    let basis = build_basis(j_max);
    let h0 = h0_matrix::<f64>(&basis);
    let obs = observable::<f64>(&basis, kind);
    Ok(lie_closure(&[skew(h0.matrix()), skew(obs.matrix())], LIE_REL_TOL)?.dim)
}

/// Numerical rank of the per-block trace matrix with rows
/// `(Tr[H₀]_block, Tr[O]_block)`.
pub fn rank_t(j_max: u32, kind: ProcessKind) -> Result<usize> {
    Ok(numerical_rank(&trace_matrix(j_max, kind), 1e-10))
}

pub fn trace_matrix(j_max: u32, kind: ProcessKind) -> nalgebra::DMatrix<f64> {
    let basis = build_basis(j_max);
    let h0 = h0_matrix::<f64>(&basis);
    let obs = observable::<f64>(&basis, kind);
    let blocks = block_decomposition(&basis, kind).blocks;
    let mut t = nalgebra::DMatrix::zeros(blocks.len(), 2);
    for (r, b) in blocks.iter().rev().enumerate() {
        t[(r, 0)] = b.members.iter().map(|&k| h0.matrix()[(k, k)].re).sum();
        t[(r, 1)] = b.members.iter().map(|&k| obs.matrix()[(k, k)].re).sum();
    }
    t
}

fn numerical_rank(m: &nalgebra::DMatrix<f64>, rel_tol: f64) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}

/// Required algebra dimensions `(D, D′)` for general and `m ↔ −m` restricted
/// simultaneous controllability.
///
/// `D = r + (j+1)² − 1 + 2 Σ_{m=1}^{j} [(j−m+1)² − 1]` for both processes.
/// `D′` counts `n² − 1` over the invariant blocks with `m ≥ 0`; for
/// orientation this is `(j+1)² − 1 + Σ_{m≥1}[(j−m+1)² − 1]`, for alignment the
/// blocks are additionally split by parity of `j`.
pub fn dims_required(j_max: u32, r: usize, kind: ProcessKind) -> (u64, u64) {
    let j = j_max as u64;
    let r = r as u64;
    let tail: u64 = (1..=j).map(|m| (j - m + 1).pow(2) - 1).sum();
    let d = r + (j + 1).pow(2) - 1 + 2 * tail;
    let blocks = block_decomposition(&build_basis(j_max), kind).blocks;
    let d_prime = r + blocks
        .iter()
        .filter(|b| b.m >= 0)
        .map(|b| (b.len() as u64).pow(2) - 1)
        .sum::<u64>();
    (d, d_prime)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LieAlgebraReport {
    pub j_max: u32,
    pub process: ProcessKind,
    #[serde(rename = "dim_L")]
    pub dim_l: usize,
    pub r: usize,
    #[serde(rename = "D")]
    pub d: u64,
    #[serde(rename = "D_prime")]
    pub d_prime: u64,
    pub simultaneous: bool,
    pub restricted_simultaneous: bool,
}

pub fn lie_report(j_max: u32, kind: ProcessKind) -> Result<LieAlgebraReport> {
    if j_max < 1 {
        return Err(Error::InvalidParameter("controllability needs j_max >= 1".into()));
    }
    let dim_l = rotor_lie_dimension(j_max, kind)?;
    let r = rank_t(j_max, kind)?;
    let (d, d_prime) = dims_required(j_max, r, kind);
    Ok(LieAlgebraReport {
        j_max,
        process: kind,
        dim_l,
        r,
        d,
        d_prime,
        simultaneous: dim_l as u64 == d,
        restricted_simultaneous: dim_l as u64 == d_prime,
    })
}

/// The two decoupled two-level systems at `m = ±(j_max − 1)` whose equal
/// gaps block simultaneous controllability of orientation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelReport {
    pub j_max: u32,
    pub coupling_plus: f64,
    pub coupling_minus: f64,
    pub coupling_expected: f64,
    pub energies_plus: [f64; 2],
    pub energies_minus: [f64; 2],
    pub gap_plus: f64,
    pub gap_minus: f64,
    pub equal_gaps: bool,
}

pub fn two_level_obstruction(j_max: u32) -> Result<TwoLevelReport> {
    if j_max <= 1 {
        return Err(Error::NotApplicable(format!(
            "two-level witness needs j_max > 1, got {j_max}"
        )));
    }
    let basis = build_basis(j_max);
    let c = cos_theta_matrix::<f64>(&basis);
    let h0 = h0_matrix::<f64>(&basis);
    let pick = |m: i32| {
        let lo = basis.index_of(j_max - 1, m).unwrap();
        let hi = basis.index_of(j_max, m).unwrap();
        let coupling = c.matrix()[(hi, lo)].re;
        let e = [h0.matrix()[(lo, lo)].re, h0.matrix()[(hi, hi)].re];
        (coupling, e)
    };
    let m = j_max as i32 - 1;
    let (cp, ep) = pick(m);
    let (cm, em) = pick(-m);
    let gap_plus = ep[1] - ep[0];
    let gap_minus = em[1] - em[0];
    Ok(TwoLevelReport {
        j_max,
        coupling_plus: cp,
        coupling_minus: cm,
        coupling_expected: 1.0 / ((2 * j_max + 1) as f64).sqrt(),
        energies_plus: ep,
        energies_minus: em,
        gap_plus,
        gap_minus,
        equal_gaps: gap_plus == gap_minus,
    })
}

/// Kick amplitudes used to sample `U_A† [H₀, B] U_A`: `points` values evenly
/// spread over `[0, 4π]`.
pub fn amplitude_grid(points: usize) -> Vec<f64> {
    let top = 4.0 * std::f64::consts::PI;
    if points <= 1 {
        return vec![0.0];
    }
    (0..points).map(|k| top * k as f64 / (points - 1) as f64).collect()
}

pub const DEFAULT_GRID_POINTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub dim: usize,
    #[serde(rename = "dim_V")]
    pub dim_v: usize,
    /// `N² − Σ nᵢ²`.
    pub bound: usize,
    pub multiplicities: Vec<usize>,
    /// Rank with the amplitude grid doubled; equal to `dim_v` when saturated.
    #[serde(rename = "dim_V_doubled_grid")]
    pub dim_v_doubled: usize,
    /// Commuting states are the only members of S exactly when `dim V` hits the bound.
    pub commuting_states_only: bool,
}

/// Eigenvalue multiplicities of `b`, clustering within `1e-12 ‖b‖`.
pub fn multiplicities<T: Real>(b: &CMatrix<T>) -> Result<Vec<usize>> {
    let vals = linalg::hermitian_eigen(b)?.values;
    let scale = vals.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    let tol = T::lit(1e-12) * scale;
    let mut out: Vec<usize> = Vec::new();
    for (k, v) in vals.iter().enumerate() {
        if k > 0 && vals[k - 1] - *v <= tol {
            *out.last_mut().unwrap() += 1;
        } else {
            out.push(1);
        }
    }
    Ok(out)
}

/// Everything needed to sample the kick family `U_A = exp(iA G)`.
pub struct KickFamily<T: Real> {
    generator: linalg::HermitianEigen<T>,
    pub amplitudes: Vec<f64>,
}

impl<T: Real> KickFamily<T> {
    pub fn new(generator: &HermitianOperator<T>, amplitudes: Vec<f64>) -> Result<Self> {
        Ok(Self {
            generator: generator.eigen()?,
            amplitudes,
        })
    }

    pub fn unitary(&self, a: f64) -> CMatrix<T> {
        let a = T::lit(a);
        self.generator.apply(|x| C::new(T::zero(), a * x).exp())
    }

    fn check_commutes(&self, b: &CMatrix<T>) -> Result<()> {
        for &a in &self.amplitudes {
            let u = self.unitary(a);
            let d = linalg::max_abs(&linalg::commutator(&u, b));
            if d > T::lit(1e-10) {
                return Err(Error::InvalidInput(format!(
                    "kick at amplitude {a} does not commute with B (defect {:.3e})",
                    d.as_f64()
                )));
            }
        }
        Ok(())
    }

    /// `[H₀, B]` followed by `U_A† [H₀, B] U_A` over the grid.
    fn slope_operators(&self, h0: &CMatrix<T>, b: &CMatrix<T>) -> Vec<CMatrix<T>> {
        let k = linalg::commutator(h0, b);
        let mut out = vec![k.clone()];
        out.extend(self.amplitudes.iter().map(|&a| {
            let u = self.unitary(a);
            u.adjoint() * &k * u
        }));
        out
    }
}

fn span_dim<T: Real>(ops: &[CMatrix<T>]) -> usize {
    let mut span = SpanTracker::new(T::lit(1e-10));
    for op in ops {
        span.insert(realify(op));
    }
    span.dim()
}

/// Dimension of `V = span{U_A† [H₀, B] U_A}` against `N² − Σ nᵢ²`.
pub fn fixed_point_analysis<T: Real>(
    h0: &HermitianOperator<T>,
    b: &CMatrix<T>,
    generator: &HermitianOperator<T>,
    grid_points: usize,
) -> Result<FixedPointReport> {
    let n = h0.dim();
    let family = KickFamily::new(generator, amplitude_grid(grid_points))?;
    family.check_commutes(b)?;
    let dim_v = span_dim(&family.slope_operators(h0.matrix(), b));
    let doubled = KickFamily::new(generator, amplitude_grid(2 * grid_points))?;
    let dim_v_doubled = span_dim(&doubled.slope_operators(h0.matrix(), b));
    let mult = multiplicities(b)?;
    let bound = n * n - mult.iter().map(|k| k * k).sum::<usize>();
    Ok(FixedPointReport {
        dim: n,
        dim_v,
        bound,
        multiplicities: mult,
        dim_v_doubled,
        commuting_states_only: dim_v == bound,
    })
}

/// Membership in S: the slope of `Tr[B ρ(t)]` vanishes before the kick and
/// after every kick of the family.
pub fn in_s<T: Real>(
    rho: &DensityMatrix<T>,
    h0: &HermitianOperator<T>,
    b: &CMatrix<T>,
    generator: &HermitianOperator<T>,
    grid_points: usize,
) -> Result<bool> {
    let family = KickFamily::new(generator, amplitude_grid(grid_points))?;
    let tol = T::lit(1e-10);
    Ok(family
        .slope_operators(h0.matrix(), b)
        .iter()
        .all(|c| linalg::trace_product(rho.matrix(), c).modulus() < tol))
}
