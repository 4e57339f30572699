use nalgebra::ComplexField;
use crate::basis::{build_basis, Basis, ProcessKind};
use crate::error::{Error, Result};
use crate::linalg::{self, HermitianEigen};
use crate::operators::{h0_matrix, observable, DensityMatrix, HermitianOperator};
use crate::scalar::{CMatrix, Real, C};

/// Population in the top two `j`-shells of the simulation space above which a
/// leakage warning is raised.
pub const LEAKAGE_WARN: f64 = 1e-4;

/// Where a kick's generator lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KickMode {
    /// `exp(iA O^(N))` with `O^(N)` the truncated observable.
    Idealized,
    /// `exp(iA O)` with `O` built on the enlarged basis `j ≤ j_sim`.
    Physical { j_sim: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KickSpec<T> {
    pub amplitude: T,
    pub kind: ProcessKind,
    pub mode: KickMode,
}

/// Everything needed to propagate in one Hilbert space: the basis, `H₀`, the
/// observable and its spectral data for fast kick exponentials.
#[derive(Debug, Clone)]
pub struct ControlSpace<T: Real> {
    pub kind: ProcessKind,
    pub mode: KickMode,
    /// Truncation defining the control problem.
    pub control_basis: Basis,
    /// Basis the state actually lives in (equal to `control_basis` when idealized).
    pub basis: Basis,
    pub h0: HermitianOperator<T>,
    pub observable: HermitianOperator<T>,
    pub energies: Vec<T>,
    generator: HermitianEigen<T>,
}

impl<T: Real> ControlSpace<T> {
    pub fn new(j_max: u32, kind: ProcessKind, mode: KickMode) -> Result<Self> {
        let control_basis = build_basis(j_max);
        let basis = match mode {
            KickMode::Idealized => control_basis.clone(),
            KickMode::Physical { j_sim } => {
                if j_sim < j_max {
                    return Err(Error::InvalidParameter(format!(
                        "j_sim = {j_sim} is smaller than j_max = {j_max}"
                    )));
                }
                build_basis(j_sim)
            }
        };
        let h0 = h0_matrix(&basis);
        let obs = observable(&basis, kind);
        let generator = obs.eigen()?;
        let energies = h0.diagonal();
        Ok(Self {
            kind,
            mode,
            control_basis,
            basis,
            h0,
            observable: obs,
            energies,
            generator,
        })
    }

    pub fn idealized(j_max: u32, kind: ProcessKind) -> Result<Self> {
        Self::new(j_max, kind, KickMode::Idealized)
    }

    pub fn physical(j_max: u32, j_sim: u32, kind: ProcessKind) -> Result<Self> {
        Self::new(j_max, kind, KickMode::Physical { j_sim })
    }

    pub fn is_physical(&self) -> bool {
        matches!(self.mode, KickMode::Physical { .. })
    }

    pub fn spec(&self, amplitude: T) -> KickSpec<T> {
        KickSpec {
            amplitude,
            kind: self.kind,
            mode: self.mode,
        }
    }

    /// `exp(iA O)` in this space.
    pub fn kick_unitary(&self, amplitude: T) -> CMatrix<T> {
        self.generator.apply(|x| C::new(T::zero(), amplitude * x).exp())
    }

    /// Brings a state of the control basis into this space.
    pub fn lift(&self, rho: &DensityMatrix<T>) -> DensityMatrix<T> {
        if rho.dim() == self.basis.dim() {
            rho.clone()
        } else {
            rho.embed(&self.control_basis, &self.basis)
        }
    }
}

#[derive(Debug, Clone)]
pub struct KickResult<T: Real> {
    pub state: DensityMatrix<T>,
    /// Population in the top two shells when it exceeds the warning level.
    pub leakage_warning: Option<T>,
}

/// `ρ → U ρ U†` with `U = exp(iA O)`.
pub fn apply_kick<T: Real>(
    rho: &DensityMatrix<T>,
    kick: &KickSpec<T>,
    space: &ControlSpace<T>,
) -> Result<KickResult<T>> {
    if kick.kind != space.kind || kick.mode != space.mode {
        return Err(Error::InvalidInput("kick does not match the control space".into()));
    }
    if rho.dim() != space.basis.dim() {
        return Err(Error::InvalidInput(format!(
            "state dimension {} does not match space dimension {}",
            rho.dim(),
            space.basis.dim()
        )));
    }
    let state = rho.conjugated(&space.kick_unitary(kick.amplitude));
    Ok(KickResult {
        leakage_warning: top_shell_warning(&state, space),
        state,
    })
}

pub(crate) fn top_shell_warning<T: Real>(rho: &DensityMatrix<T>, space: &ControlSpace<T>) -> Option<T> {
    if !space.is_physical() {
        return None;
    }
    let j_top = space.basis.j_max();
    let pop = rho.population_above(&space.basis, j_top.saturating_sub(2));
    (pop > T::lit(LEAKAGE_WARN)).then_some(pop)
}

/// Slope of `Tr[B ρ(t)]` just after the kick: `i Tr[ρ U†[H₀, B] U]`.
pub fn post_kick_slope<T: Real>(
    rho: &DensityMatrix<T>,
    u: &CMatrix<T>,
    h0: &HermitianOperator<T>,
    b: &CMatrix<T>,
) -> T {
    let comm = linalg::commutator(h0.matrix(), b);
    slope_with_commutator(&linalg::conjugate(u, rho.matrix()), &comm)
}

/// `i Tr[ρ' K]` with `K = [H₀, B]` skew-Hermitian.
pub(crate) fn slope_with_commutator<T: Real>(kicked: &CMatrix<T>, comm: &CMatrix<T>) -> T {
    -linalg::trace_product(kicked, comm).im
}

/// Population above `j_max` of a state living on a larger basis.
pub fn leakage<T: Real>(rho_sim: &DensityMatrix<T>, sim_basis: &Basis, j_max: u32) -> Result<T> {
    if sim_basis.j_max() <= j_max {
        return Err(Error::InvalidParameter(format!(
            "simulation basis j_sim = {} must exceed j_max = {j_max}",
            sim_basis.j_max()
        )));
    }
    Ok(rho_sim.population_above(sim_basis, j_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, max_abs};
    use crate::operators::{thermal_state, ZMode};
    use crate::signal::TrigSignal;

    #[test]
    fn zero_amplitude_is_identity() {
        let space = ControlSpace::<f64>::idealized(4, ProcessKind::Orientation).unwrap();
        let rho = thermal_state(&space.basis, 0.2, ZMode::Full).unwrap();
        let out = apply_kick(&rho, &space.spec(0.0), &space).unwrap();
        assert!(max_abs(&(out.state.matrix() - rho.matrix())) < 1e-14);
    }

    #[test]
    fn idealized_kick_keeps_expectation_and_purity() {
        for kind in [ProcessKind::Orientation, ProcessKind::Alignment] {
            let space = ControlSpace::<f64>::idealized(5, kind).unwrap();
            let rho = thermal_state(&space.basis, 0.25, ZMode::Truncated).unwrap();
            let rho = apply_kick(&rho, &space.spec(1.1), &space).unwrap().state;
            let rho = crate::dynamics::free_propagate(&rho, &space.h0, 0.37).unwrap();
            let out = apply_kick(&rho, &space.spec(2.0), &space).unwrap().state;
            let o = space.observable.matrix();
            assert!((rho.expectation(o) - out.expectation(o)).abs() < 1e-12);
            assert!((rho.purity() - out.purity()).abs() < 1e-10);
            let u = space.kick_unitary(2.0);
            assert!(max_abs(&commutator(&u, o)) < 1e-12);
        }
    }

    #[test]
    fn slope_vanishes_for_commuting_state() {
        let space = ControlSpace::<f64>::idealized(3, ProcessKind::Orientation).unwrap();
        let o = space.observable.matrix().clone();
        let eig = space.observable.eigen().unwrap();
        let rho = DensityMatrix::from_matrix_unchecked(
            eig.apply(|x| crate::scalar::cplx((-(x * 2.0)).exp())),
            1.0,
        )
        .renormalized();
        for a in [0.0, 0.7, 2.0, 5.0] {
            let u = space.kick_unitary(a);
            assert!(post_kick_slope(&rho, &u, &space.h0, &o).abs() < 1e-12);
        }
    }

    #[test]
    fn slope_matches_finite_difference() {
        let space = ControlSpace::<f64>::idealized(4, ProcessKind::Orientation).unwrap();
        let o = space.observable.matrix().clone();
        let rho = thermal_state(&space.basis, 0.2, ZMode::Full).unwrap();
        let rho = apply_kick(&rho, &space.spec(2.0), &space).unwrap().state;
        let rho = crate::dynamics::free_propagate(&rho, &space.h0, 0.4).unwrap();
        let u = space.kick_unitary(2.0);
        let slope = post_kick_slope(&rho, &u, &space.h0, &o);
        let after = rho.conjugated(&u);
        let sig = TrigSignal::new(after.matrix(), &o, &space.energies);
        let h = 1e-5;
        let fd = (sig.value(h) - sig.value(-h)) / (2.0 * h);
        assert!(slope.abs() > 1e-3);
        assert!((fd - slope).abs() < 1e-6);
    }

    #[test]
    fn single_kick_from_ground_state_stays_low() {
        let space = ControlSpace::<f64>::physical(8, 24, ProcessKind::Orientation).unwrap();
        let rho = thermal_state(&space.basis, 1e3, ZMode::Truncated).unwrap();
        let out = apply_kick(&rho, &space.spec(2.0), &space).unwrap();
        assert!(leakage(&out.state, &space.basis, 8).unwrap() < 1e-3);
        assert!(out.leakage_warning.is_none());
        assert!(leakage(&rho, &space.basis, 8).unwrap() < 1e-12);
    }

    #[test]
    fn thermal_tail_is_negligible() {
        let b = build_basis(16);
        let rho = thermal_state::<f64>(&b, 0.2, ZMode::Full).unwrap();
        assert!(leakage(&rho, &b, 12).unwrap() < 1e-6);
        assert!(leakage(&rho, &b, 16).is_err());
    }
}
