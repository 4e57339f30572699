//! Run configuration, presets and provenance hashing.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::basis::ProcessKind;
use crate::dynamics::{Strategy, StrategyOptions};
use crate::error::{Error, Result};
use crate::kinematics::SweepSettings;
use crate::molecule::{MoleculeParams, BOLTZMANN_CM_PER_K};
use crate::operators::ZMode;
use crate::output::{sha256_hex, to_sorted_json};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Inclusive `j_max` range; empty when `j_max_from > j_max_to`.
    pub j_max_from: u32,
    pub j_max_to: u32,
    pub temperatures_k: Vec<f64>,
    /// Threshold for the persistence columns.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub molecule: MoleculeParams,
    pub process: ProcessKind,
    pub j_max: u32,
    pub j_sim: u32,
    pub kick_amplitude: f64,
    pub strategy: Strategy,
    pub max_kicks: usize,
    pub gain_tol: f64,
    pub z_mode: ZMode,
    pub renormalize: bool,
    pub sign_flip: bool,
    pub boltzmann_cm_per_k: f64,
    pub output_dir: PathBuf,
    /// Only used for randomized property checks.
    pub seed: u64,
    pub sweep: SweepConfig,
}

pub const PRESETS: &[&str] = &[
    "licl-5K",
    "licl-10K",
    "licl-5K-s2",
    "licl-5K-alignment",
    "licl-10K-alignment",
];

/// False for NaN as well as for non-positive values.
fn positive(x: f64) -> bool {
    x > 0.0
}

impl RunConfig {
    /// LiCl at the given temperature with the reference kick parameters
    /// (`A = 2`, `j_max = 8`, `j_sim = 16`).
    pub fn licl(temperature_k: f64, process: ProcessKind, strategy: Strategy) -> Self {
        let opts = StrategyOptions::new(strategy, 2.0);
        Self {
            molecule: MoleculeParams::licl(temperature_k),
            process,
            j_max: 8,
            j_sim: 16,
            kick_amplitude: opts.amplitude,
            strategy,
            max_kicks: opts.max_kicks,
            gain_tol: opts.gain_tol,
            z_mode: ZMode::Full,
            renormalize: false,
            sign_flip: true,
            boltzmann_cm_per_k: BOLTZMANN_CM_PER_K,
            output_dir: PathBuf::from("out"),
            seed: 0,
            sweep: SweepConfig {
                j_max_from: 1,
                j_max_to: 12,
                temperatures_k: vec![5.0, 10.0],
                threshold: 0.5,
            },
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        use ProcessKind::*;
        use Strategy::*;
        match name {
            "licl-5K" => Ok(Self::licl(5.0, Orientation, S1)),
            "licl-10K" => Ok(Self::licl(10.0, Orientation, S1)),
            "licl-5K-s2" => Ok(Self::licl(5.0, Orientation, S2)),
            "licl-5K-alignment" => Ok(Self::licl(5.0, Alignment, S1)),
            "licl-10K-alignment" => Ok(Self::licl(10.0, Alignment, S1)),
            other => Err(Error::Config(format!(
                "unknown preset `{other}` (known: {})",
                PRESETS.join(", ")
            ))),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.molecule
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        let bad = |msg: String| Err(Error::Config(msg));
        if self.j_sim < self.j_max {
            return bad(format!("j_sim ({}) must be >= j_max ({})", self.j_sim, self.j_max));
        }
        if !self.kick_amplitude.is_finite() {
            return bad("kick_amplitude must be finite".into());
        }
        if !positive(self.gain_tol) {
            return bad("gain_tol must be positive".into());
        }
        if !positive(self.boltzmann_cm_per_k) {
            return bad("boltzmann_cm_per_k must be positive".into());
        }
        if self.sweep.temperatures_k.iter().any(|&t| !positive(t)) {
            return bad("sweep temperatures must be positive".into());
        }
        Ok(())
    }

    /// Canonical serialization: pretty JSON with sorted keys.
    pub fn to_json_string(&self) -> String {
        to_sorted_json(&serde_json::to_value(self).expect("config serializes"))
    }

    pub fn hash(&self) -> String {
        sha256_hex(self.to_json_string().as_bytes())
    }

    pub fn beta(&self) -> f64 {
        self.molecule.beta_with(self.boltzmann_cm_per_k)
    }

    pub fn beta_at(&self, temperature_k: f64) -> f64 {
        self.molecule.rotational_constant_cm / (self.boltzmann_cm_per_k * temperature_k)
    }

    pub fn sweep_settings(&self) -> SweepSettings {
        SweepSettings {
            rotational_constant_cm: self.molecule.rotational_constant_cm,
            boltzmann_cm_per_k: self.boltzmann_cm_per_k,
            z_mode: self.z_mode,
            renormalize: self.renormalize,
            threshold: self.sweep.threshold,
        }
    }

    pub fn strategy_options(&self) -> StrategyOptions {
        StrategyOptions {
            strategy: self.strategy,
            amplitude: self.kick_amplitude,
            max_kicks: self.max_kicks,
            gain_tol: self.gain_tol,
            sign_flip: self.sign_flip,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_roundtrip_byte_identical() {
        for name in PRESETS {
            let c = RunConfig::preset(name).unwrap();
            let s = c.to_json_string();
            let back = RunConfig::from_json_str(&s).unwrap();
            assert_eq!(back, c);
            assert_eq!(back.to_json_string(), s);
        }
    }

    #[test]
    fn reference_parameters() {
        let c = RunConfig::preset("licl-5K").unwrap();
        assert_eq!(c.molecule.rotational_constant_cm, 0.70652);
        assert_eq!(c.kick_amplitude, 2.0);
        assert_eq!(c.j_max, 8);
        assert_eq!(c.molecule.epsilon, 0.01);
        assert_eq!(RunConfig::preset("licl-5K-s2").unwrap().max_kicks, 9);
        assert_eq!(RunConfig::preset("licl-10K").unwrap().molecule.temperature_k, 10.0);
        assert!(RunConfig::preset("nope").is_err());
    }

    #[test]
    fn validation_errors() {
        let mut c = RunConfig::preset("licl-5K").unwrap();
        c.j_sim = 4;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = RunConfig::preset("licl-5K").unwrap();
        c.gain_tol = 0.0;
        assert!(c.validate().is_err());
        assert!(RunConfig::from_json_str("{\"j_max\": 3}").is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::preset("licl-5K").unwrap();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.kick_amplitude = 1.5;
        assert_ne!(a.hash(), b.hash());
    }
}
