//! Free evolution, sudden kicks and the greedy pulse-train strategies.

mod kick;
mod strategy;

pub use kick::{apply_kick, leakage, post_kick_slope, ControlSpace, KickMode, KickResult, KickSpec};
pub use strategy::{
    find_next_global_max, replay_train, run_strategy, Functional, KickEntry, PulseTrainRecord,
    Strategy, StrategyOptions, StrategyRun, TimeSeries, MAX_SEARCH_SAMPLES, SERIES_SAMPLES_PER_PERIOD,
};

use nalgebra::ComplexField;
use crate::error::Result;
use crate::operators::{DensityMatrix, HermitianOperator};
use crate::scalar::{CMatrix, Real, C};
use crate::signal::diagonal_energies;

/// `ρ(t)_ab = ρ_ab e^{-i(E_a - E_b)t}` for diagonal `H₀`. Exact, no stepping.
pub fn free_propagate<T: Real>(
    rho: &DensityMatrix<T>,
    h0: &HermitianOperator<T>,
    t: T,
) -> Result<DensityMatrix<T>> {
    let e = diagonal_energies(h0.matrix())?;
    Ok(propagate_with_energies(rho, &e, t))
}

pub(crate) fn propagate_with_energies<T: Real>(rho: &DensityMatrix<T>, e: &[T], t: T) -> DensityMatrix<T> {
    let n = e.len();
    let phases: Vec<C<T>> = e.iter().map(|&ea| C::new(T::zero(), -ea * t).exp()).collect();
    let src = rho.matrix();
    let m = CMatrix::from_fn(n, n, |a, b| src[(a, b)] * phases[a] * phases[b].conj());
    DensityMatrix::from_matrix_unchecked(m, rho.declared_trace())
}
