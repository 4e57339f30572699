use serde::{Deserialize, Serialize};

use super::kick::{apply_kick, slope_with_commutator, top_shell_warning, ControlSpace};
use super::propagate_with_energies;
use crate::error::{Error, Result};
use crate::kinematics::{duration_above, Duration, TargetState};
use crate::linalg;
use crate::operators::{DensityMatrix, HermitianOperator, ROTATIONAL_PERIOD};
use crate::scalar::{CMatrix, Real};
use crate::signal::{diagonal_energies, Peak, TrigSignal};

pub const MAX_SEARCH_SAMPLES: usize = 4096;
pub const SERIES_SAMPLES_PER_PERIOD: usize = 2048;
const ARGMAX_TOL: f64 = 1e-10;
const SLOPE_ZERO: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    /// Kick at global maxima of `Tr[O ρ(t)]`.
    S1,
    /// Kick at global maxima of `Tr[ρ_F ρ(t)] / Tr[ρ_F²]`.
    S2,
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "S1" => Ok(Strategy::S1),
            "S2" => Ok(Strategy::S2),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

/// The operator `B` whose trace against `ρ(t)` a strategy maximizes.
#[derive(Debug, Clone)]
pub struct Functional<T: Real> {
    pub strategy: Strategy,
    pub matrix: CMatrix<T>,
}

impl<T: Real> Functional<T> {
    /// `B = O` for S1, `B = ρ_F / Tr[ρ_F²]` for S2, expressed in `space`.
    pub fn for_strategy(strategy: Strategy, space: &ControlSpace<T>, target: &TargetState<T>) -> Self {
        let matrix = match strategy {
            Strategy::S1 => space.observable.matrix().clone(),
            Strategy::S2 => projection_operator(space, target),
        };
        Self { strategy, matrix }
    }

    pub fn value(&self, rho: &DensityMatrix<T>) -> T {
        rho.expectation(&self.matrix)
    }
}

fn projection_operator<T: Real>(space: &ControlSpace<T>, target: &TargetState<T>) -> CMatrix<T> {
    let rf = space.lift(&target.rho);
    rf.matrix().unscale(rf.purity())
}

/// Earliest global maximum of `Tr[B ρ(t)]` over `[t_start, t_start + π)`,
/// where `rho` is the state at `t_start`.
pub fn find_next_global_max<T: Real>(
    rho: &DensityMatrix<T>,
    functional: &CMatrix<T>,
    h0: &HermitianOperator<T>,
    t_start: T,
) -> Result<Peak<T>> {
    let e = diagonal_energies(h0.matrix())?;
    let sig = TrigSignal::new(rho.matrix(), functional, &e);
    let p = sig.global_max(T::zero(), T::lit(ROTATIONAL_PERIOD), MAX_SEARCH_SAMPLES, T::lit(ARGMAX_TOL));
    Ok(Peak {
        time: t_start + p.time,
        ..p
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyOptions {
    pub strategy: Strategy,
    pub amplitude: f64,
    pub max_kicks: usize,
    pub gain_tol: f64,
    /// Flip the kick sign when that turns a negative post-kick slope positive.
    pub sign_flip: bool,
}

impl StrategyOptions {
    pub fn new(strategy: Strategy, amplitude: f64) -> Self {
        Self {
            strategy,
            amplitude,
            max_kicks: match strategy {
                Strategy::S1 => 15,
                Strategy::S2 => 9,
            },
            gain_tol: 1e-4,
            sign_flip: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KickEntry {
    /// Kick instant, internal time units (`1/B`).
    pub time: f64,
    pub amplitude: f64,
    /// Strategy functional at the kick instant (a free-evolution maximum).
    pub value_before: f64,
    pub slope_after: f64,
}

#[derive(Debug, Clone)]
pub struct PulseTrainRecord<T: Real> {
    pub strategy: Strategy,
    pub physical: bool,
    pub entries: Vec<KickEntry>,
    /// State immediately after the last kick (or the initial state).
    pub final_state: DensityMatrix<T>,
    /// Time at which `final_state` is given.
    pub final_time: f64,
    /// Maximum of the strategy functional within one period after the train.
    pub final_functional_max: f64,
    /// Maximum of `Tr[O ρ(t)]` within one period after the train.
    pub final_efficiency: f64,
    pub final_duration: Duration,
    /// Population above the control `j_max` (physical mode only).
    pub leakage: Option<f64>,
    pub warnings: Vec<String>,
}

impl<T: Real> PulseTrainRecord<T> {
    pub fn maxima(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value_before).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let period = ROTATIONAL_PERIOD;
        serde_json::json!({
            "strategy": self.strategy,
            "mode": if self.physical { "physical" } else { "idealized" },
            "times_over_Trot": self.entries.iter().map(|e| e.time / period).collect::<Vec<_>>(),
            "amplitudes": self.entries.iter().map(|e| e.amplitude).collect::<Vec<_>>(),
            "maxima": self.maxima(),
            "slopes": self.entries.iter().map(|e| e.slope_after).collect::<Vec<_>>(),
            "kicks": self.entries.len(),
            "final_functional_max": self.final_functional_max,
            "final_efficiency": self.final_efficiency,
            "final_duration_above_0_5": self.final_duration.total,
            "final_duration_above_0_5_longest": self.final_duration.longest,
            "leakage": self.leakage,
            "warnings": self.warnings,
        })
    }
}

/// Sampled `Tr[O ρ(t)]` and `Tr[ρ_F ρ(t)]/Tr[ρ_F²]`.
#[derive(Debug, Clone, Default)]
pub struct TimeSeries {
    /// Internal time units.
    pub times: Vec<f64>,
    pub expectation: Vec<f64>,
    pub projection: Vec<f64>,
    pub kick: Vec<bool>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct StrategyRun<T: Real> {
    pub record: PulseTrainRecord<T>,
    pub series: TimeSeries,
}

struct Segment<T: Real> {
    start: T,
    state: DensityMatrix<T>,
    kicked: bool,
}

/// Greedy pulse train: wait for the next global maximum of the strategy
/// functional, kick, repeat.
pub fn run_strategy<T: Real>(
    space: &ControlSpace<T>,
    rho0: &DensityMatrix<T>,
    target: &TargetState<T>,
    opts: &StrategyOptions,
) -> Result<StrategyRun<T>> {
    if !opts.amplitude.is_finite() {
        return Err(Error::InvalidParameter("kick amplitude must be finite".into()));
    }
    let rho0 = space.lift(rho0);
    let functional = Functional::for_strategy(opts.strategy, space, target);
    let comm = linalg::commutator(space.h0.matrix(), &functional.matrix);
    // Kinematic ceiling of the functional, known in the control space only.
    let ceiling = if space.is_physical() {
        None
    } else {
        Some(match opts.strategy {
            Strategy::S1 => target.expectation,
            Strategy::S2 => T::one(),
        })
    };

    let period = T::lit(ROTATIONAL_PERIOD);
    let search = |rho: &DensityMatrix<T>, t: T| {
        let sig = TrigSignal::new(rho.matrix(), &functional.matrix, &space.energies);
        let p = sig.global_max(T::zero(), period, MAX_SEARCH_SAMPLES, T::lit(ARGMAX_TOL));
        Peak {
            time: t + p.time,
            ..p
        }
    };

    let mut warnings = Vec::new();
    let mut rho = rho0.clone();
    let mut t = T::zero();
    let mut peak = search(&rho, t);
    let mut entries = Vec::new();
    let mut segments = vec![Segment {
        start: T::zero(),
        state: rho0.clone(),
        kicked: false,
    }];
    let amp = T::lit(opts.amplitude);

    while entries.len() < opts.max_kicks {
        let v = peak.value;
        if let Some(c) = ceiling {
            if c - v <= T::lit(opts.gain_tol) * c.abs().max(T::lit(1e-300)) {
                break;
            }
        }
        let at_peak = propagate_with_energies(&rho, &space.energies, peak.time - t);
        let plus = at_peak.conjugated(&space.kick_unitary(amp));
        let s_plus = slope_with_commutator(plus.matrix(), &comm);
        let (kicked, a, slope) = if opts.sign_flip && s_plus < -T::lit(SLOPE_ZERO) {
            let minus = at_peak.conjugated(&space.kick_unitary(-amp));
            let s_minus = slope_with_commutator(minus.matrix(), &comm);
            if s_minus > s_plus {
                (minus, -amp, s_minus)
            } else {
                (plus, amp, s_plus)
            }
        } else {
            (plus, amp, s_plus)
        };
        if let Some(pop) = top_shell_warning(&kicked, space) {
            warnings.push(format!(
                "kick {}: population {:.3e} in the top two shells of the simulation space",
                entries.len() + 1,
                pop.as_f64()
            ));
        }
        entries.push(KickEntry {
            time: peak.time.as_f64(),
            amplitude: a.as_f64(),
            value_before: v.as_f64(),
            slope_after: slope.as_f64(),
        });
        rho = kicked;
        t = peak.time;
        segments.push(Segment {
            start: t,
            state: rho.clone(),
            kicked: true,
        });
        let next = search(&rho, t);
        let gain = (next.value - v) / v.abs().max(T::lit(1e-300));
        peak = next;
        if gain < T::lit(opts.gain_tol) {
            break;
        }
    }

    let record = finish_record(space, opts.strategy, entries, rho, t, peak, warnings)?;
    let series = sample_series(space, target, &segments);
    Ok(StrategyRun { record, series })
}

/// Re-applies a recorded train (kick times and signed amplitudes) in another
/// space, e.g. to propagate a train designed in the truncated space exactly.
pub fn replay_train<T: Real>(
    space: &ControlSpace<T>,
    rho0: &DensityMatrix<T>,
    target: &TargetState<T>,
    strategy: Strategy,
    train: &[KickEntry],
) -> Result<StrategyRun<T>> {
    let rho0 = space.lift(rho0);
    let functional = Functional::for_strategy(strategy, space, target);
    let comm = linalg::commutator(space.h0.matrix(), &functional.matrix);
    let mut rho = rho0.clone();
    let mut t = T::zero();
    let mut warnings = Vec::new();
    let mut entries = Vec::with_capacity(train.len());
    let mut segments = vec![Segment {
        start: T::zero(),
        state: rho0,
        kicked: false,
    }];
    for (k, e) in train.iter().enumerate() {
        let tk = T::lit(e.time);
        if tk < t {
            return Err(Error::InvalidInput("kick times must be non-decreasing".into()));
        }
        let at = propagate_with_energies(&rho, &space.energies, tk - t);
        let value = functional.value(&at);
        let kicked = apply_kick(&at, &space.spec(T::lit(e.amplitude)), space)?;
        if let Some(pop) = kicked.leakage_warning {
            warnings.push(format!(
                "kick {}: population {:.3e} in the top two shells of the simulation space",
                k + 1,
                pop.as_f64()
            ));
        }
        entries.push(KickEntry {
            time: e.time,
            amplitude: e.amplitude,
            value_before: value.as_f64(),
            slope_after: slope_with_commutator(kicked.state.matrix(), &comm).as_f64(),
        });
        rho = kicked.state;
        t = tk;
        segments.push(Segment {
            start: t,
            state: rho.clone(),
            kicked: true,
        });
    }
    let sig = TrigSignal::new(rho.matrix(), &functional.matrix, &space.energies);
    let p = sig.global_max(T::zero(), T::lit(ROTATIONAL_PERIOD), MAX_SEARCH_SAMPLES, T::lit(ARGMAX_TOL));
    let peak = Peak { time: t + p.time, ..p };
    let record = finish_record(space, strategy, entries, rho, t, peak, warnings)?;
    let series = sample_series(space, target, &segments);
    Ok(StrategyRun { record, series })
}

fn finish_record<T: Real>(
    space: &ControlSpace<T>,
    strategy: Strategy,
    entries: Vec<KickEntry>,
    final_state: DensityMatrix<T>,
    final_time: T,
    functional_peak: Peak<T>,
    warnings: Vec<String>,
) -> Result<PulseTrainRecord<T>> {
    let obs = space.observable.matrix();
    let sig = TrigSignal::new(final_state.matrix(), obs, &space.energies);
    let eff = sig.global_max(T::zero(), T::lit(ROTATIONAL_PERIOD), MAX_SEARCH_SAMPLES, T::lit(ARGMAX_TOL));
    let final_duration = saturating_duration(&final_state, &space.observable, &space.h0, 0.5)?;
    let leakage = if space.is_physical() {
        Some(
            final_state
                .population_above(&space.basis, space.control_basis.j_max())
                .as_f64(),
        )
    } else {
        None
    };
    Ok(PulseTrainRecord {
        strategy,
        physical: space.is_physical(),
        entries,
        final_state,
        final_time: final_time.as_f64(),
        final_functional_max: functional_peak.value.as_f64(),
        final_efficiency: eff.value.as_f64(),
        final_duration,
        leakage,
        warnings,
    })
}

/// `duration_above`, reporting 0 or 1 when the threshold lies outside the
/// observable's spectrum instead of failing.
pub(crate) fn saturating_duration<T: Real>(
    rho: &DensityMatrix<T>,
    obs: &HermitianOperator<T>,
    h0: &HermitianOperator<T>,
    threshold: f64,
) -> Result<Duration> {
    let eig = obs.eigen()?;
    let (hi, lo) = (eig.values[0].as_f64(), eig.values[eig.dim() - 1].as_f64());
    if threshold >= hi {
        Ok(Duration { total: 0.0, longest: 0.0 })
    } else if threshold <= lo {
        Ok(Duration { total: 1.0, longest: 1.0 })
    } else {
        duration_above(rho, obs, h0, T::lit(threshold))
    }
}

/// Samples from the first kick (or `t = 0` without kicks) to one rotational
/// period after the last kick, on a uniform grid plus the kick instants.
fn sample_series<T: Real>(space: &ControlSpace<T>, target: &TargetState<T>, segments: &[Segment<T>]) -> TimeSeries {
    let period = ROTATIONAL_PERIOD;
    let proj = projection_operator(space, target);
    let signals: Vec<(f64, TrigSignal<T>, TrigSignal<T>)> = segments
        .iter()
        .map(|s| {
            (
                s.start.as_f64(),
                TrigSignal::new(s.state.matrix(), space.observable.matrix(), &space.energies),
                TrigSignal::new(s.state.matrix(), &proj, &space.energies),
            )
        })
        .collect();
    let kick_times: Vec<f64> = segments.iter().filter(|s| s.kicked).map(|s| s.start.as_f64()).collect();
    let begin = kick_times.first().copied().unwrap_or(0.0);
    let end = segments.last().map_or(0.0, |s| s.start.as_f64()) + period;
    // At least the nominal density, with the grid landing exactly on `end`.
    let n = ((end - begin) / period * SERIES_SAMPLES_PER_PERIOD as f64 - 1e-9).ceil() as usize;
    let step = (end - begin) / n as f64;

    let mut rows: Vec<(f64, bool)> = (0..=n).map(|k| (begin + step * k as f64, false)).collect();
    rows.extend(kick_times.iter().map(|&t| (t, true)));
    // Kick rows sort after a grid row at the same instant.
    rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    rows.dedup_by(|b, a| a.0 == b.0 && a.1 == b.1);

    let mut out = TimeSeries::default();
    for (t, flag) in rows {
        let seg = signals.iter().rposition(|(s, _, _)| *s <= t).unwrap_or(0);
        let (s0, o, p) = &signals[seg];
        let dt = T::lit(t - s0);
        out.times.push(t);
        out.expectation.push(o.value(dt).as_f64());
        out.projection.push(p.value(dt).as_f64());
        out.kick.push(flag);
    }
    out
}
