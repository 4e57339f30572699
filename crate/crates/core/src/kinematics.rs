//! Kinematically optimal targets: the state unitarily equivalent to `ρ₀`
//! that maximizes `Tr[O ρ]`, either over all unitaries or over unitaries that
//! respect the invariant blocks of linearly polarized driving.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{block_decomposition, build_basis, Basis, ProcessKind};
use crate::error::{Error, Result};
use crate::linalg::{self, localized_eigenpairs};
use crate::operators::{
    check_block_diagonal, h0_matrix, observable, thermal_state, DensityMatrix, HermitianOperator,
    ZMode, ROTATIONAL_PERIOD,
};
use crate::scalar::{CMatrix, Real};
use crate::signal::{diagonal_energies, TrigSignal};

#[derive(Debug, Clone, PartialEq)]
pub struct PairingResult<T> {
    /// `permutation[k]` is the index (into the input weights) paired with
    /// eigenvalue `k`.
    pub permutation: Vec<usize>,
    pub value: T,
}

fn descending_order<T: Real>(xs: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[b].partial_cmp(&xs[a]).unwrap_or(std::cmp::Ordering::Equal));
    idx
}

/// Pairs the k-th largest weight with the k-th largest eigenvalue.
pub fn optimal_pairing<T: Real>(weights: &[T], eigenvalues: &[T]) -> Result<PairingResult<T>> {
    if weights.len() != eigenvalues.len() {
        return Err(Error::InvalidInput(format!(
            "{} weights vs {} eigenvalues",
            weights.len(),
            eigenvalues.len()
        )));
    }
    let tol = T::lit(1e-10);
    if let Some(w) = weights.iter().find(|&&w| w < -tol || w > T::one() + tol) {
        return Err(Error::InvalidInput(format!("weight {} outside [0, 1]", w.as_f64())));
    }
    let wi = descending_order(weights);
    let ei = descending_order(eigenvalues);
    let mut permutation = vec![0; weights.len()];
    let mut value = T::zero();
    for (&e, &w) in ei.iter().zip(&wi) {
        permutation[e] = w;
        value += eigenvalues[e] * weights[w];
    }
    Ok(PairingResult { permutation, value })
}

/// Which unitaries the target is optimal over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetScope {
    /// All unitaries on the truncated space (`ρ_opt`).
    Global,
    /// Unitaries that are block diagonal for the process (`ρ_lin`).
    Linear(ProcessKind),
}

#[derive(Debug, Clone)]
pub struct TargetState<T: Real> {
    pub rho: DensityMatrix<T>,
    pub scope: TargetScope,
    pub observable: HermitianOperator<T>,
    /// `Tr[O ρ_F]`.
    pub expectation: T,
}

/// Eigenpairs sorted by descending value; near-equal values are ordered by
/// their position in the basis.
fn sorted_eigenpairs<T: Real>(m: &CMatrix<T>) -> Result<Vec<linalg::LocalizedEigenpair<T>>> {
    let mut pairs = localized_eigenpairs(m)?;
    pairs.sort_by(|a, b| b.value.partial_cmp(&a.value).unwrap());
    let scale = pairs
        .iter()
        .fold(T::zero(), |acc, p| acc.max(p.value.abs()))
        .max(T::one());
    let tol = T::lit(1e-12) * scale;
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        while end < pairs.len() && pairs[end - 1].value - pairs[end].value <= tol {
            end += 1;
        }
        pairs[start..end].sort_by_key(|p| p.anchor);
        start = end;
    }
    Ok(pairs)
}

fn assemble<T: Real>(
    n: usize,
    weights: &[T],
    pairs: &[linalg::LocalizedEigenpair<T>],
    into: &mut CMatrix<T>,
) -> T {
    let mut value = T::zero();
    for (w, p) in weights.iter().zip(pairs) {
        let proj = &p.vector * p.vector.adjoint();
        for i in 0..n {
            for j in 0..n {
                into[(i, j)] += proj[(i, j)].scale(*w);
            }
        }
        value += *w * p.value;
    }
    value
}

/// `ρ_F = Σ_k w_{σ_k} |χ_k⟩⟨χ_k|` over the requested scope.
pub fn build_target<T: Real>(
    rho0: &DensityMatrix<T>,
    obs: &HermitianOperator<T>,
    basis: &Basis,
    scope: TargetScope,
) -> Result<TargetState<T>> {
    let n = basis.dim();
    if rho0.dim() != n || obs.dim() != n {
        return Err(Error::InvalidInput("state, observable and basis dimensions differ".into()));
    }
    let mut target = CMatrix::zeros(n, n);
    let expectation = match scope {
        TargetScope::Global => {
            let weights = rho0.spectrum()?.to_vec();
            let pairs = sorted_eigenpairs(obs.matrix())?;
            assemble(n, &weights, &pairs, &mut target)
        }
        TargetScope::Linear(kind) => {
            check_block_diagonal(rho0.matrix(), basis, kind)?;
            check_block_diagonal(obs.matrix(), basis, kind)?;
            let mut total = T::zero();
            for block in &block_decomposition(basis, kind).blocks {
                let idx = &block.members;
                let weights = linalg::hermitian_eigen(&linalg::submatrix(rho0.matrix(), idx))?.values;
                let sub_pairs = sorted_eigenpairs(&obs.restrict(idx))?;
                let mut sub = CMatrix::zeros(idx.len(), idx.len());
                total += assemble(idx.len(), &weights, &sub_pairs, &mut sub);
                for (a, &ia) in idx.iter().enumerate() {
                    for (b, &ib) in idx.iter().enumerate() {
                        target[(ia, ib)] = sub[(a, b)];
                    }
                }
            }
            total
        }
    };
    let rho = DensityMatrix::from_matrix_unchecked(linalg::hermitian_part(&target), rho0.declared_trace());
    Ok(TargetState {
        rho,
        scope,
        observable: obs.clone(),
        expectation,
    })
}

/// Persistence of `Tr[O ρ(t)] ≥ threshold` under free evolution, in units of
/// the rotational period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Duration {
    /// Summed measure of all super-threshold intervals in one period.
    pub total: f64,
    /// Longest contiguous super-threshold interval.
    pub longest: f64,
}

pub const DURATION_SAMPLES: usize = 8192;
pub const CROSSING_TOL: f64 = 1e-10;

pub fn duration_above<T: Real>(
    rho: &DensityMatrix<T>,
    obs: &HermitianOperator<T>,
    h0: &HermitianOperator<T>,
    threshold: T,
) -> Result<Duration> {
    let eig = obs.eigen()?;
    let (hi, lo) = (eig.values[0], eig.values[eig.dim() - 1]);
    if !(threshold > lo && threshold < hi) {
        return Err(Error::InvalidParameter(format!(
            "threshold {} outside the observable spectrum ({}, {})",
            threshold.as_f64(),
            lo.as_f64(),
            hi.as_f64()
        )));
    }
    let energies = diagonal_energies(h0.matrix())?;
    let signal = TrigSignal::new(rho.matrix(), obs.matrix(), &energies);
    let period = T::lit(ROTATIONAL_PERIOD);
    let peak = signal.global_max(T::zero(), period, 4096, T::lit(CROSSING_TOL));
    let cov = signal.coverage_above(threshold, peak.time, period, DURATION_SAMPLES, T::lit(CROSSING_TOL));
    Ok(Duration {
        total: (cov.total / period).as_f64(),
        longest: (cov.longest / period).as_f64(),
    })
}

/// One row of the bound table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub process: ProcessKind,
    pub j_max: u32,
    pub temperature_k: f64,
    pub optimal: f64,
    pub linear: f64,
    pub duration_linear: f64,
    pub duration_linear_longest: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SweepSettings {
    pub rotational_constant_cm: f64,
    pub boltzmann_cm_per_k: f64,
    pub z_mode: ZMode,
    pub renormalize: bool,
    pub threshold: f64,
}

/// Kinematic bounds with and without the block restriction, plus the
/// persistence of the blockwise target, for every `(j_max, T)` pair.
pub fn bound_row(kind: ProcessKind, j_max: u32, temperature_k: f64, s: &SweepSettings) -> Result<BoundRow> {
    let basis = build_basis(j_max);
    let beta = s.rotational_constant_cm / (s.boltzmann_cm_per_k * temperature_k);
    let mut rho0 = thermal_state::<f64>(&basis, beta, s.z_mode)?;
    if s.renormalize {
        rho0 = rho0.renormalized();
    }
    let obs = observable::<f64>(&basis, kind);
    let h0 = h0_matrix::<f64>(&basis);
    let opt = build_target(&rho0, &obs, &basis, TargetScope::Global)?;
    let lin = build_target(&rho0, &obs, &basis, TargetScope::Linear(kind))?;
    let eig = obs.eigen()?;
    let (hi, lo) = (eig.values[0], eig.values[eig.dim() - 1]);
    let dur = if s.threshold > lo && s.threshold < hi {
        duration_above(&lin.rho, &obs, &h0, s.threshold)?
    } else if s.threshold <= lo {
        Duration { total: 1.0, longest: 1.0 }
    } else {
        Duration { total: 0.0, longest: 0.0 }
    };
    Ok(BoundRow {
        process: kind,
        j_max,
        temperature_k,
        optimal: opt.expectation,
        linear: lin.expectation,
        duration_linear: dur.total,
        duration_linear_longest: dur.longest,
    })
}

/// Rows ordered by temperature, then `j_max`. Grid points run in parallel.
pub fn bound_sweep(
    kind: ProcessKind,
    j_range: std::ops::RangeInclusive<u32>,
    temperatures_k: &[f64],
    s: &SweepSettings,
) -> Result<Vec<BoundRow>> {
    let grid: Vec<(f64, u32)> = temperatures_k
        .iter()
        .flat_map(|&t| j_range.clone().map(move |j| (t, j)))
        .collect();
    grid.par_iter()
        .map(|&(t, j)| bound_row(kind, j, t, s))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, max_abs};
    use crate::operators::cos_theta_matrix;

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn pairing_three_levels() {
        let w = [0.5, 0.3, 0.2];
        let chi = [1.0, 0.0, -1.0];
        let brute = permutations(3)
            .into_iter()
            .map(|p| (0..3).map(|k| chi[k] * w[p[k]]).sum::<f64>())
            .fold(f64::MIN, f64::max);
        let r = optimal_pairing(&w, &chi).unwrap();
        assert!((brute - 0.3).abs() < 1e-15);
        assert!((r.value - brute).abs() < 1e-15);
    }

    #[test]
    fn pairing_edge_cases() {
        let r = optimal_pairing(&[1.0, 0.0], &[0.7, -0.2]).unwrap();
        assert_eq!(r.value, 0.7);
        let u = optimal_pairing(&[0.25f64; 4], &[3.0, 1.0, -1.0, 0.5]).unwrap();
        assert!((u.value - 3.5 / 4.0).abs() < 1e-15);
        assert!(optimal_pairing(&[0.5, 0.5], &[1.0]).is_err());
    }

    #[test]
    fn pure_state_target_is_top_projector() {
        let basis = build_basis(3);
        let rho0 = thermal_state::<f64>(&basis, 1e3, ZMode::Truncated).unwrap();
        let obs = cos_theta_matrix::<f64>(&basis);
        let t = build_target(&rho0, &obs, &basis, TargetScope::Global).unwrap();
        let eig = obs.eigen().unwrap();
        assert!((t.expectation - eig.values[0]).abs() < 1e-12);
        let v = eig.vectors.column(0);
        let proj = v * v.adjoint();
        assert!(max_abs(&(t.rho.matrix() - proj)) < 1e-10);
    }

    #[test]
    fn jmax1_orientation_blockwise() {
        let basis = build_basis(1);
        let beta = 0.3;
        let rho0 = thermal_state::<f64>(&basis, beta, ZMode::Full).unwrap();
        let obs = cos_theta_matrix::<f64>(&basis);
        let t = build_target(&rho0, &obs, &basis, TargetScope::Linear(ProcessKind::Orientation)).unwrap();
        let i00 = basis.index_of(0, 0).unwrap();
        let i10 = basis.index_of(1, 0).unwrap();
        let w00 = rho0.matrix()[(i00, i00)].re;
        let w10 = rho0.matrix()[(i10, i10)].re;
        assert!((t.expectation - (w00 - w10) / 3f64.sqrt()).abs() < 1e-14);
        assert!(max_abs(&commutator(t.rho.matrix(), obs.matrix())) < 1e-12);
    }

    #[test]
    fn global_dominates_linear() {
        for j_max in 0..=6 {
            let basis = build_basis(j_max);
            for beta in [0.1, 0.2, 1.0] {
                let rho0 = thermal_state::<f64>(&basis, beta, ZMode::Full).unwrap();
                for kind in [ProcessKind::Orientation, ProcessKind::Alignment] {
                    let obs = observable::<f64>(&basis, kind);
                    let g = build_target(&rho0, &obs, &basis, TargetScope::Global).unwrap();
                    let l = build_target(&rho0, &obs, &basis, TargetScope::Linear(kind)).unwrap();
                    assert!(g.expectation >= l.expectation - 1e-12);
                }
            }
        }
    }

    #[test]
    fn blockwise_rejects_unstructured_state() {
        let basis = build_basis(2);
        let mut m = thermal_state::<f64>(&basis, 0.5, ZMode::Truncated).unwrap().matrix().clone();
        m[(0, 4)] = crate::scalar::cplx(0.01);
        m[(4, 0)] = crate::scalar::cplx(0.01);
        let rho = DensityMatrix::from_matrix_unchecked(m, 1.0);
        let obs = cos_theta_matrix::<f64>(&basis);
        let err = build_target(&rho, &obs, &basis, TargetScope::Linear(ProcessKind::Orientation));
        assert!(matches!(err, Err(Error::Structure(_))));
    }

    #[test]
    fn mixed_state_duration_is_zero_or_one() {
        let basis = build_basis(3);
        let obs = cos_theta_matrix::<f64>(&basis);
        let h0 = h0_matrix::<f64>(&basis);
        let rho = DensityMatrix::maximally_mixed(basis.dim());
        // Tr[cos θ]/N = 0.
        assert_eq!(duration_above(&rho, &obs, &h0, 0.1).unwrap().total, 0.0);
        assert_eq!(duration_above(&rho, &obs, &h0, -0.1).unwrap().total, 1.0);
        assert!(duration_above(&rho, &obs, &h0, 5.0).is_err());
    }
}
