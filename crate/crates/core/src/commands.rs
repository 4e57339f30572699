//! Subcommand drivers shared by the binary and the test suites. Each one
//! computes its results, writes them under an output directory and returns
//! them for inspection.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{build_basis, ProcessKind};
use crate::config::RunConfig;
use crate::controllability::{
    fixed_point_analysis, in_s, lie_report, FixedPointReport, LieAlgebraReport, DEFAULT_GRID_POINTS,
};
use crate::dynamics::{run_strategy, ControlSpace, Functional, StrategyRun, TimeSeries};
use crate::error::{Error, Result};
use crate::kinematics::{bound_sweep, build_target, BoundRow, TargetScope};
use crate::operators::{h0_matrix, observable, thermal_state, DensityMatrix, ROTATIONAL_PERIOD};
use crate::output::{fmt_num, to_sorted_json, write_atomic, Csv};

/// Largest Hilbert-space dimension `fixedpoints` accepts without `force`.
pub const FIXEDPOINT_MAX_DIM: usize = 12;

fn thermal(cfg: &RunConfig, j_max: u32) -> Result<DensityMatrix<f64>> {
    let rho = thermal_state(&build_basis(j_max), cfg.beta(), cfg.z_mode)?;
    Ok(if cfg.renormalize { rho.renormalized() } else { rho })
}

fn temperature_tag(t: f64) -> String {
    format!("{t}").replace('.', "p")
}

pub struct BoundsOutput {
    pub rows: Vec<BoundRow>,
    pub files: Vec<PathBuf>,
}

pub const BOUNDS_HEADER: [&str; 7] = [
    "process",
    "j_max",
    "T_K",
    "optimal",
    "linear",
    "duration_linear",
    "duration_linear_longest",
];

/// Bound and persistence tables, one CSV per temperature.
pub fn cmd_bounds(cfg: &RunConfig, out: &Path) -> Result<BoundsOutput> {
    let settings = cfg.sweep_settings();
    let rows = bound_sweep(
        cfg.process,
        cfg.sweep.j_max_from..=cfg.sweep.j_max_to,
        &cfg.sweep.temperatures_k,
        &settings,
    )?;
    let hash = cfg.hash();
    let mut files = Vec::new();
    for &t in &cfg.sweep.temperatures_k {
        let mut csv = Csv::new(&hash, &BOUNDS_HEADER);
        for r in rows.iter().filter(|r| r.temperature_k == t) {
            csv.row(&[
                r.process.to_string(),
                r.j_max.to_string(),
                fmt_num(r.temperature_k),
                fmt_num(r.optimal),
                fmt_num(r.linear),
                fmt_num(r.duration_linear),
                fmt_num(r.duration_linear_longest),
            ]);
        }
        let path = out.join(format!("bounds_{}_T{}K.csv", cfg.process, temperature_tag(t)));
        write_atomic(&path, csv.as_str())?;
        files.push(path);
    }
    Ok(BoundsOutput { rows, files })
}

pub struct SimulationOutput {
    pub idealized: StrategyRun<f64>,
    pub physical: StrategyRun<f64>,
    pub linear_bound: f64,
    pub optimal_bound: f64,
    pub files: Vec<PathBuf>,
}

pub const SERIES_HEADER: [&str; 4] = ["t_over_Trot", "expectation", "projection", "kick_flag"];

pub fn series_csv(series: &TimeSeries, hash: &str) -> String {
    let mut csv = Csv::new(hash, &SERIES_HEADER);
    for k in 0..series.len() {
        csv.row(&[
            fmt_num(series.times[k] / ROTATIONAL_PERIOD),
            fmt_num(series.expectation[k]),
            fmt_num(series.projection[k]),
            (series.kick[k] as u8).to_string(),
        ]);
    }
    csv.as_str().to_string()
}

/// Runs the configured strategy in the truncated control space and, with the
/// same rules, on the enlarged `j_sim` basis.
pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<SimulationOutput> {
    cfg.validate()?;
    let basis = build_basis(cfg.j_max);
    let rho0 = thermal(cfg, cfg.j_max)?;
    let obs = observable::<f64>(&basis, cfg.process);
    let target = build_target(&rho0, &obs, &basis, TargetScope::Linear(cfg.process))?;
    let optimal = build_target(&rho0, &obs, &basis, TargetScope::Global)?;
    let opts = cfg.strategy_options();

    let ideal_space = ControlSpace::idealized(cfg.j_max, cfg.process)?;
    let idealized = run_strategy(&ideal_space, &rho0, &target, &opts)?;

    let phys_space = ControlSpace::physical(cfg.j_max, cfg.j_sim, cfg.process)?;
    let rho0_sim = thermal(cfg, cfg.j_sim)?;
    let physical = run_strategy(&phys_space, &rho0_sim, &target, &opts)?;

    let hash = cfg.hash();
    let mut files = Vec::new();
    for (tag, run) in [("idealized", &idealized), ("physical", &physical)] {
        let path = out.join(format!("series_{tag}.csv"));
        write_atomic(&path, &series_csv(&run.series, &hash))?;
        files.push(path);
        let mut json = run.record.to_json();
        let obj = json.as_object_mut().expect("record is an object");
        obj.insert("config_hash".into(), hash.clone().into());
        obj.insert("process".into(), cfg.process.to_string().into());
        obj.insert("j_max".into(), cfg.j_max.into());
        obj.insert("j_space".into(), (if run.record.physical { cfg.j_sim } else { cfg.j_max }).into());
        obj.insert("linear_bound".into(), target.expectation.into());
        obj.insert("optimal_bound".into(), optimal.expectation.into());
        let path = out.join(format!("train_{tag}.json"));
        write_atomic(&path, &to_sorted_json(&json))?;
        files.push(path);
    }
    Ok(SimulationOutput {
        idealized,
        physical,
        linear_bound: target.expectation,
        optimal_bound: optimal.expectation,
        files,
    })
}

pub struct ControllabilityOutput {
    pub reports: Vec<LieAlgebraReport>,
    pub files: Vec<PathBuf>,
}

/// One report per `j_max`, plus the table layout `(j_max, dim L, D, D′)`.
pub fn cmd_controllability(
    j_values: &[u32],
    process: ProcessKind,
    config_hash: &str,
    out: &Path,
) -> Result<ControllabilityOutput> {
    let reports = j_values
        .par_iter()
        .map(|&j| lie_report(j, process))
        .collect::<Result<Vec<_>>>()?;
    let mut files = Vec::new();
    let json = serde_json::to_value(&reports).expect("reports serialize");
    let path = out.join(format!("controllability_{process}.json"));
    write_atomic(&path, &to_sorted_json(&json))?;
    files.push(path);

    let mut csv = Csv::new(config_hash, &["j_max", "dim_L", "D", "D_prime"]);
    for r in &reports {
        csv.row(&[
            r.j_max.to_string(),
            r.dim_l.to_string(),
            r.d.to_string(),
            r.d_prime.to_string(),
        ]);
    }
    let path = out.join(format!("table_{process}.csv"));
    write_atomic(&path, csv.as_str())?;
    files.push(path);
    Ok(ControllabilityOutput { reports, files })
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedPointsOutput {
    pub report: FixedPointReport,
    pub target_in_s: bool,
    pub maximally_mixed_in_s: bool,
    pub thermal_in_s: bool,
    #[serde(skip)]
    pub files: Vec<PathBuf>,
}

/// Fixed-point analysis for the configured process and strategy functional.
pub fn cmd_fixedpoints(cfg: &RunConfig, force: bool, out: &Path) -> Result<FixedPointsOutput> {
    cfg.validate()?;
    let basis = build_basis(cfg.j_max);
    if basis.dim() > FIXEDPOINT_MAX_DIM && !force {
        return Err(Error::Config(format!(
            "N = {} exceeds {FIXEDPOINT_MAX_DIM}; the N²-dimensional rank computation is costly, pass --force to run anyway",
            basis.dim()
        )));
    }
    let rho0 = thermal(cfg, cfg.j_max)?;
    let obs = observable::<f64>(&basis, cfg.process);
    let h0 = h0_matrix::<f64>(&basis);
    let target = build_target(&rho0, &obs, &basis, TargetScope::Linear(cfg.process))?;
    let space = ControlSpace::idealized(cfg.j_max, cfg.process)?;
    let b = Functional::for_strategy(cfg.strategy, &space, &target).matrix;

    let report = fixed_point_analysis(&h0, &b, &obs, DEFAULT_GRID_POINTS)?;
    let check = |rho: &DensityMatrix<f64>| in_s(rho, &h0, &b, &obs, DEFAULT_GRID_POINTS);
    let result = FixedPointsOutput {
        report,
        target_in_s: check(&target.rho)?,
        maximally_mixed_in_s: check(&DensityMatrix::maximally_mixed(basis.dim()))?,
        thermal_in_s: check(&rho0)?,
        files: Vec::new(),
    };
    let mut json = serde_json::to_value(&result).expect("serializes");
    let obj = json.as_object_mut().expect("object");
    obj.insert("config_hash".into(), cfg.hash().into());
    obj.insert("process".into(), cfg.process.to_string().into());
    obj.insert("strategy".into(), serde_json::to_value(cfg.strategy).expect("enum"));
    obj.insert("j_max".into(), cfg.j_max.into());
    let path = out.join("fixedpoints.json");
    write_atomic(&path, &to_sorted_json(&json))?;
    Ok(FixedPointsOutput {
        files: vec![path],
        ..result
    })
}
