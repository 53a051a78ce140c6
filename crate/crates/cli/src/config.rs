//! Experiment configuration: one JSON document drives every subcommand.
//!
//! The config references a medium model file and fixes the chord fan, the
//! integrator step, the inversion lattice, and the solver. Loading validates
//! everything up front so that a bad config never produces partial output;
//! the struct round-trips losslessly through serde.

use std::path::{Path, PathBuf};

use elastic_rays::medium::{MediumModel, ScalarField};
use elastic_rays::WaveMode;
use serde::{Deserialize, Serialize};

/// Chord-fan parameters passed to `geometry::generate_chords`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChordConfig {
    pub n_points: usize,
    pub n_dirs: usize,
    pub theta_max: f64,
    pub seed: u64,
}

/// Regularized least-squares solver parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub alpha: f64,
    pub max_iter: usize,
    pub tol: f64,
    #[serde(default)]
    pub seed: u64,
}

/// The experiment document. Paths are resolved relative to the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Medium model JSON file (kind/params/domain document).
    pub model: String,
    /// Density perturbation f in ρ = ρ₀e^{2f}; doubles as ground truth.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<ScalarField>,
    pub chords: ChordConfig,
    /// RK4 / quadrature step (g-arc length).
    pub step: f64,
    /// Trapped-ray guard on travel time.
    #[serde(default = "default_max_length")]
    pub max_length: f64,
    /// Wave mode for check/trace; the dataset pipeline is S-mode.
    #[serde(default = "default_mode")]
    pub mode: String,
    /// Inversion lattice nodes per axis.
    pub lattice_n: usize,
    pub solver: SolverSection,
    /// Replace measured data with the discrete operator applied to the
    /// discretized perturbation (requires `perturbation`).
    #[serde(default)]
    pub inverse_crime: bool,
    /// Output directory, resolved relative to the config file.
    pub out_dir: String,
}

fn default_max_length() -> f64 {
    20.0
}

fn default_mode() -> String {
    "S".to_string()
}

/// A config *failure* is distinct from a *validation* failure: the former is
/// a malformed or unreadable document (exit 2), the latter a well-formed
/// experiment whose hypotheses or data do not hold (exit 1).
#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Config(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Config(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Config(m) => m,
        }
    }
}

pub fn config_err(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

pub fn validation_err(msg: impl Into<String>) -> Failure {
    Failure::Validation(msg.into())
}

/// Loaded, validated experiment: config plus the resolved model and paths.
pub struct Experiment {
    pub cfg: ExperimentConfig,
    pub model: MediumModel,
    pub model_hash: String,
    pub mode: WaveMode,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_str(text: &str) -> Result<Self, Failure> {
        serde_json::from_str(text).map_err(|e| config_err(format!("bad config: {e}")))
    }

    /// Field-level validation; referenced files are checked by `load`.
    pub fn validate(&self) -> Result<(), Failure> {
        let pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(config_err(format!("{name} must be positive and finite, got {v}")))
            }
        };
        pos("step", self.step)?;
        pos("max_length", self.max_length)?;
        pos("chords.theta_max", self.chords.theta_max)?;
        if self.chords.theta_max >= std::f64::consts::FRAC_PI_2 {
            return Err(config_err("chords.theta_max must be below pi/2"));
        }
        if self.chords.n_points == 0 || self.chords.n_dirs == 0 {
            return Err(config_err("chord counts must be at least 1"));
        }
        if self.lattice_n < 5 {
            return Err(config_err(format!(
                "lattice_n must be at least 5, got {}",
                self.lattice_n
            )));
        }
        if !(self.solver.alpha.is_finite() && self.solver.alpha >= 0.0) {
            return Err(config_err("solver.alpha must be nonnegative and finite"));
        }
        if self.solver.max_iter == 0 {
            return Err(config_err("solver.max_iter must be at least 1"));
        }
        pos("solver.tol", self.solver.tol)?;
        if self.mode != "P" && self.mode != "S" {
            return Err(config_err(format!("mode must be \"P\" or \"S\", got {:?}", self.mode)));
        }
        if self.inverse_crime && self.perturbation.is_none() {
            return Err(config_err("inverse_crime requires a perturbation field"));
        }
        Ok(())
    }
}

/// FNV-1a 64-bit hash, hex-encoded; stable fingerprint for small documents.
pub fn fnv1a_hex(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

/// Load and validate the experiment; applies CLI overrides first. Nothing is
/// written to disk here, so any failure leaves the filesystem untouched.
pub fn load(
    config_path: &Path,
    out_override: Option<&Path>,
    mode_override: Option<&str>,
    seed_override: Option<u64>,
) -> Result<Experiment, Failure> {
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| config_err(format!("cannot read config {}: {e}", config_path.display())))?;
    let mut cfg = ExperimentConfig::from_str(&text)?;
    if let Some(mode) = mode_override {
        cfg.mode = mode.to_string();
    }
    if let Some(seed) = seed_override {
        cfg.chords.seed = seed;
    }
    cfg.validate()?;

    let base = config_path.parent().unwrap_or(Path::new("."));
    let model_path = base.join(&cfg.model);
    let model_text = std::fs::read_to_string(&model_path)
        .map_err(|e| config_err(format!("cannot read model {}: {e}", model_path.display())))?;
    let model = MediumModel::from_json(&model_text)
        .map_err(|e| config_err(format!("bad model {}: {e}", model_path.display())))?;
    let model_hash = model_fingerprint(&model)?;

    let mode = match cfg.mode.as_str() {
        "P" => WaveMode::P,
        _ => WaveMode::S,
    };
    let out_dir = match out_override {
        Some(p) => p.to_path_buf(),
        None => base.join(&cfg.out_dir),
    };
    Ok(Experiment {
        cfg,
        model,
        model_hash,
        mode,
        out_dir,
    })
}

/// Whitespace-insensitive model fingerprint: hash of the canonical
/// serde_json serialization rather than the raw file bytes.
pub fn model_fingerprint(model: &MediumModel) -> Result<String, Failure> {
    let canon = serde_json::to_string(model)
        .map_err(|e| config_err(format!("cannot serialize model: {e}")))?;
    Ok(fnv1a_hex(canon.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentConfig {
        ExperimentConfig {
            model: "model.json".into(),
            perturbation: Some(ScalarField::constant(0.0)),
            chords: ChordConfig {
                n_points: 10,
                n_dirs: 1,
                theta_max: 0.9,
                seed: 7,
            },
            step: 5e-3,
            max_length: 20.0,
            mode: "S".into(),
            lattice_n: 12,
            solver: SolverSection {
                alpha: 1e-8,
                max_iter: 400,
                tol: 1e-10,
                seed: 0,
            },
            inverse_crime: false,
            out_dir: "out".into(),
        }
    }

    #[test]
    fn config_round_trips_losslessly() {
        let cfg = sample();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back = ExperimentConfig::from_str(&text).unwrap();
        assert_eq!(cfg, back);
        let again = serde_json::to_string_pretty(&back).unwrap();
        assert_eq!(text, again);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let mut v: serde_json::Value =
            serde_json::to_value(sample()).unwrap();
        v["surprise"] = serde_json::json!(1);
        let text = serde_json::to_string(&v).unwrap();
        assert!(ExperimentConfig::from_str(&text).is_err());
    }

    #[test]
    fn bad_numerics_are_rejected() {
        let mut cfg = sample();
        cfg.step = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = sample();
        cfg.lattice_n = 4;
        assert!(cfg.validate().is_err());
        let mut cfg = sample();
        cfg.solver.alpha = -1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = sample();
        cfg.mode = "Q".into();
        assert!(cfg.validate().is_err());
        let mut cfg = sample();
        cfg.inverse_crime = true;
        cfg.perturbation = None;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn fnv_hash_is_stable() {
        // Reference value for the empty string and a known vector.
        assert_eq!(fnv1a_hex(b""), "cbf29ce484222325");
        assert_eq!(fnv1a_hex(b"a"), "af63dc4c8601ec8c");
    }
}
