//! Run configuration: a sectioned key/value file with explicit unit
//! suffixes in the key names, plus command-line overrides.

use crate::atomic::{LevelRef, QuantumDefectTable};
use crate::dynamics::SampleGeometry;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSection {
    /// Rydberg-atom density in cm^-3.
    pub density_cm3: f64,
    /// Spherical sample diameter in metres; mutually exclusive with
    /// `atom_count`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diameter_m: Option<f64>,
    /// Atom count fixing the diameter at the given density.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atom_count: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelsSection {
    /// Initial level label, e.g. "40p".
    pub initial: String,
    pub n_min: u32,
    pub n_max: u32,
    /// Optional external quantum-defect table (TOML key/value).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub defect_table_path: Option<PathBuf>,
    /// Inline defect overrides: series letter -> defect value.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub defects: Option<std::collections::BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rydberg_cm1: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CascadeSection {
    /// Minimal detected principal quantum number.
    pub detection_floor: u32,
    /// Atoms present at t0.
    pub n0_atoms: f64,
    pub t0_us: f64,
    pub t_end_us: f64,
    /// Channels retained per level.
    pub cap: usize,
    /// Output grid points over the time window.
    pub grid_points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSection {
    pub rtol: f64,
    pub atol: f64,
    /// Trajectory length in units of the channel vacuum lifetime.
    pub tau_end: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSection {
    pub rho_min: f64,
    pub rho_max: f64,
    pub grid_points: usize,
    /// Relative bisection tolerance on the critical cooperativity.
    pub bisect_tol: f64,
}

/// Full run configuration; deterministic by construction (no stochastic
/// elements anywhere in the pipeline).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub sample: SampleSection,
    pub levels: LevelsSection,
    pub cascade: CascadeSection,
    pub dynamics: DynamicsSection,
    pub map: MapSection,
    /// Worker threads for the parallel stages (0 = all cores).
    pub workers: usize,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            sample: SampleSection {
                density_cm3: 5e8,
                diameter_m: None,
                atom_count: Some(1400.0),
            },
            levels: LevelsSection {
                initial: "40p".into(),
                n_min: 5,
                n_max: 40,
                defect_table_path: None,
                defects: None,
                rydberg_cm1: None,
            },
            cascade: CascadeSection {
                detection_floor: 27,
                n0_atoms: 1400.0,
                t0_us: 6.0,
                t_end_us: 36.0,
                cap: 2,
                grid_points: 601,
            },
            dynamics: DynamicsSection {
                rtol: 1e-8,
                atol: 1e-12,
                tau_end: 12.0,
            },
            map: MapSection {
                rho_min: 1e-2,
                rho_max: 1e3,
                grid_points: 40,
                bisect_tol: 1e-2,
            },
            workers: 0,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {path:?}: {e}")))?;
        let cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("bad config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        match (self.sample.diameter_m, self.sample.atom_count) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "give exactly one of sample.diameter_m / sample.atom_count".into(),
                ))
            }
            (None, None) => {
                return Err(Error::Config(
                    "one of sample.diameter_m / sample.atom_count is required".into(),
                ))
            }
            _ => {}
        }
        if self.sample.density_cm3 < 0.0 {
            return Err(Error::Config("sample.density_cm3 must be >= 0".into()));
        }
        if self.cascade.t_end_us <= self.cascade.t0_us {
            return Err(Error::Config("cascade window needs t_end_us > t0_us".into()));
        }
        if self.cascade.detection_floor < 5 {
            return Err(Error::Config("detection_floor must be >= 5".into()));
        }
        if self.levels.n_min < 5 || self.levels.n_max < self.levels.n_min {
            return Err(Error::Config("need 5 <= n_min <= n_max".into()));
        }
        LevelRef::parse(&self.levels.initial)?;
        Ok(())
    }

    pub fn density_m3(&self) -> f64 {
        // exact factor: 1 cm^-3 = 1e6 m^-3
        self.sample.density_cm3 * 1e6
    }

    pub fn initial_level(&self) -> Result<LevelRef> {
        let lv = LevelRef::parse(&self.levels.initial)?;
        if lv.n < self.levels.n_min || lv.n > self.levels.n_max {
            return Err(Error::Config(format!(
                "initial level {lv} outside table range [{}, {}]",
                self.levels.n_min, self.levels.n_max
            )));
        }
        Ok(lv)
    }

    pub fn geometry(&self) -> Result<SampleGeometry> {
        let density = self.density_m3();
        match (self.sample.diameter_m, self.sample.atom_count) {
            (Some(d), None) => SampleGeometry::new(density, d),
            (None, Some(n)) => SampleGeometry::from_atom_count(density, n),
            _ => Err(Error::Config("sample geometry under-determined".into())),
        }
    }

    /// Assembles the defect table: file, then inline overrides, then range.
    pub fn defect_table(&self) -> Result<QuantumDefectTable> {
        let mut table = match &self.levels.defect_table_path {
            Some(path) => QuantumDefectTable::load(path)?,
            None => QuantumDefectTable::rb_defaults(),
        };
        if let Some(overrides) = &self.levels.defects {
            for (series, value) in overrides {
                let letter = series.chars().next().unwrap_or(' ');
                let l = crate::atomic::SERIES_LETTERS
                    .iter()
                    .position(|&c| c == letter)
                    .filter(|_| series.len() == 1)
                    .ok_or_else(|| Error::Config(format!("unknown series '{series}'")))?;
                table.set_defect(l as u32, *value)?;
            }
        }
        if let Some(r) = self.levels.rydberg_cm1 {
            table.set_rydberg_cm(r);
        }
        Ok(table.with_range(self.levels.n_min, self.levels.n_max))
    }

    /// Builds the rayon pool honoring the configured worker count.
    pub fn thread_pool(&self) -> Result<rayon::ThreadPool> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if self.workers > 0 {
            b = b.num_threads(self.workers);
        }
        b.build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_round_trips() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        let text = cfg.to_toml();
        let back: RunConfig = toml::from_str(&text).unwrap();
        back.validate().unwrap();
        assert_eq!(back.sample.density_cm3, 5e8);
        assert_eq!(back.cascade.cap, 2);
    }

    #[test]
    fn diameter_and_atom_count_are_mutually_exclusive() {
        let mut cfg = RunConfig::default();
        cfg.sample.diameter_m = Some(1.7e-4);
        assert!(cfg.validate().is_err());
        cfg.sample.atom_count = None;
        assert!(cfg.validate().is_ok());
        cfg.sample.diameter_m = None;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn density_conversion_is_exactly_1e6() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.density_m3(), 5e8 * 1e6);
    }

    #[test]
    fn geometry_matches_the_configured_atom_count() {
        let cfg = RunConfig::default();
        let geo = cfg.geometry().unwrap();
        approx::assert_relative_eq!(geo.atom_count, 1400.0, max_relative = 1e-12);
        approx::assert_relative_eq!(geo.diameter_m, 1.74855e-4, max_relative = 1e-4);
    }

    #[test]
    fn defect_overrides_apply() {
        let mut cfg = RunConfig::default();
        let mut map = std::collections::BTreeMap::new();
        map.insert("s".to_string(), 0.0);
        cfg.levels.defects = Some(map);
        let table = cfg.defect_table().unwrap();
        assert_eq!(table.defect(0), 0.0);
        assert_eq!(table.defect(1), 2.6548);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = "[sample]\ndensity_cm3 = 1.0\nbogus = 2.0\n";
        assert!(toml::from_str::<RunConfig>(text).is_err());
    }
}
