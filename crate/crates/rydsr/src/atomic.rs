//! Rb Rydberg level structure from quantum defects.
//!
//! Levels are labelled by (n, l) with fine structure collapsed; energies are
//! E(n,l) = -R_Rb / (n - delta_l)^2 in cm^-1 relative to the ionization
//! threshold. The defect table ships editable defaults for the s/p/d/f
//! series and is read-only after load.

use crate::constants::{RYDBERG_RB_CM, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

pub const SERIES_LETTERS: [char; 7] = ['s', 'p', 'd', 'f', 'g', 'h', 'i'];

/// A Rydberg level (n, l).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LevelRef {
    pub n: u32,
    pub l: u32,
}

impl LevelRef {
    pub fn new(n: u32, l: u32) -> Result<Self> {
        if l >= n {
            return Err(Error::Domain(format!("l = {l} must be < n = {n}")));
        }
        Ok(LevelRef { n, l })
    }

    pub fn series_letter(&self) -> char {
        SERIES_LETTERS
            .get(self.l as usize)
            .copied()
            .unwrap_or('x')
    }

    /// Parses compact level labels like "40p" or "6s".
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim().to_ascii_lowercase();
        let split = text
            .find(|c: char| c.is_ascii_alphabetic())
            .ok_or_else(|| Error::Config(format!("bad level label '{text}'")))?;
        let n: u32 = text[..split]
            .parse()
            .map_err(|_| Error::Config(format!("bad principal quantum number in '{text}'")))?;
        let letter = text[split..]
            .chars()
            .next()
            .filter(|_| text[split..].len() == 1)
            .ok_or_else(|| Error::Config(format!("bad series letter in '{text}'")))?;
        let l = SERIES_LETTERS
            .iter()
            .position(|&c| c == letter)
            .ok_or_else(|| Error::Config(format!("unknown series letter '{letter}'")))?
            as u32;
        LevelRef::new(n, l).map_err(|e| Error::Config(e.to_string()))
    }
}

impl fmt::Display for LevelRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.n, self.series_letter())
    }
}

/// Series-resolved quantum defects plus the mass-corrected Rydberg constant.
///
/// Defects are energy-independent; l >= 4 defaults to zero unless overridden.
#[derive(Debug, Clone)]
pub struct QuantumDefectTable {
    defects: BTreeMap<u32, f64>,
    rydberg_cm: f64,
    n_min: u32,
    n_max: u32,
}

impl Default for QuantumDefectTable {
    fn default() -> Self {
        QuantumDefectTable::rb_defaults()
    }
}

impl QuantumDefectTable {
    /// Rb defaults: delta_s = 3.1311, delta_p = 2.6548, delta_d = 1.3463,
    /// delta_f = 0.0165, zero beyond f.
    pub fn rb_defaults() -> Self {
        let mut defects = BTreeMap::new();
        defects.insert(0, 3.1311);
        defects.insert(1, 2.6548);
        defects.insert(2, 1.3463);
        defects.insert(3, 0.0165);
        QuantumDefectTable {
            defects,
            rydberg_cm: RYDBERG_RB_CM,
            n_min: 5,
            n_max: 60,
        }
    }

    /// Hydrogenic table (all defects zero), mainly for validation runs.
    pub fn hydrogenic(rydberg_cm: f64) -> Self {
        let mut t = QuantumDefectTable::rb_defaults();
        for v in t.defects.values_mut() {
            *v = 0.0;
        }
        t.rydberg_cm = rydberg_cm;
        t.n_min = 1;
        t
    }

    pub fn with_range(mut self, n_min: u32, n_max: u32) -> Self {
        self.n_min = n_min;
        self.n_max = n_max;
        self
    }

    pub fn set_defect(&mut self, l: u32, value: f64) -> Result<()> {
        if value < 0.0 {
            return Err(Error::Config(format!("defect for l = {l} must be >= 0")));
        }
        self.defects.insert(l, value);
        Ok(())
    }

    pub fn set_rydberg_cm(&mut self, value: f64) {
        self.rydberg_cm = value;
    }

    pub fn rydberg_cm(&self) -> f64 {
        self.rydberg_cm
    }

    pub fn n_range(&self) -> (u32, u32) {
        (self.n_min, self.n_max)
    }

    pub fn defect(&self, l: u32) -> f64 {
        // populated series carry explicit entries; high l is hydrogenic
        self.defects.get(&l).copied().unwrap_or(0.0)
    }

    /// Highest series (l value) with an explicit defect entry; the level
    /// table is populated up to this l.
    pub fn max_series_l(&self) -> u32 {
        self.defects.keys().copied().max().unwrap_or(0)
    }

    fn check_range(&self, level: LevelRef) -> Result<()> {
        if level.n < self.n_min || level.n > self.n_max {
            return Err(Error::Domain(format!(
                "level {level} outside configured table range [{}, {}]",
                self.n_min, self.n_max
            )));
        }
        Ok(())
    }

    /// All levels in the configured range, ordered by (n, l).
    pub fn levels(&self) -> Vec<LevelRef> {
        let lmax = self.max_series_l();
        let mut out = Vec::new();
        for n in self.n_min..=self.n_max {
            for l in 0..=lmax.min(n - 1) {
                out.push(LevelRef { n, l });
            }
        }
        out
    }

    /// Loads a table from key/value text: series letter -> defect, plus
    /// `rydberg_cm1` and optional `n_min`/`n_max`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read defect table {path:?}: {e}")))?;
        Self::parse_toml(&text)
    }

    pub fn parse_toml(text: &str) -> Result<Self> {
        let value: toml::Value = text
            .parse()
            .map_err(|e| Error::Config(format!("bad defect table: {e}")))?;
        let table = value
            .as_table()
            .ok_or_else(|| Error::Config("defect table must be key = value lines".into()))?;
        let mut out = QuantumDefectTable {
            defects: BTreeMap::new(),
            rydberg_cm: RYDBERG_RB_CM,
            n_min: 5,
            n_max: 60,
        };
        for (key, val) in table {
            let num = |v: &toml::Value| -> Result<f64> {
                v.as_float()
                    .or_else(|| v.as_integer().map(|i| i as f64))
                    .ok_or_else(|| Error::Config(format!("defect table key '{key}' must be numeric")))
            };
            match key.as_str() {
                "rydberg_cm1" => out.rydberg_cm = num(val)?,
                "n_min" => out.n_min = num(val)? as u32,
                "n_max" => out.n_max = num(val)? as u32,
                k if k.len() == 1 => {
                    let letter = k.chars().next().unwrap();
                    let l = SERIES_LETTERS
                        .iter()
                        .position(|&c| c == letter)
                        .ok_or_else(|| Error::Config(format!("unknown series letter '{letter}'")))?;
                    let d = num(val)?;
                    if d < 0.0 {
                        return Err(Error::Config(format!("defect for '{letter}' must be >= 0")));
                    }
                    out.defects.insert(l as u32, d);
                }
                other => {
                    return Err(Error::Config(format!("unknown defect table key '{other}'")));
                }
            }
        }
        if out.defects.is_empty() {
            return Err(Error::Config("defect table has no series entries".into()));
        }
        Ok(out)
    }

    /// Effective quantum number n* = n - delta_l.
    pub fn effective_n(&self, level: LevelRef) -> Result<f64> {
        self.check_range(level)?;
        if level.l <= self.max_series_l() && !self.defects.contains_key(&level.l) {
            return Err(Error::Config(format!(
                "no quantum defect entry for the {} series",
                level.series_letter()
            )));
        }
        let ns = level.n as f64 - self.defect(level.l);
        if ns <= 0.0 {
            return Err(Error::Numerical(format!(
                "non-positive effective quantum number for {level}"
            )));
        }
        Ok(ns)
    }

    /// Level energy in cm^-1, negative relative to the ionization threshold.
    pub fn energy_cm(&self, level: LevelRef) -> Result<f64> {
        let ns = self.effective_n(level)?;
        Ok(-self.rydberg_cm / (ns * ns))
    }

    /// Transition wavelength in metres for a downward pair.
    pub fn transition_wavelength_m(&self, upper: LevelRef, lower: LevelRef) -> Result<f64> {
        let de = self.energy_cm(upper)? - self.energy_cm(lower)?;
        if de <= 0.0 {
            return Err(Error::Domain(format!(
                "{upper} -> {lower} is not a downward transition"
            )));
        }
        Ok(0.01 / de)
    }

    /// Angular frequency in rad/s for a downward pair.
    pub fn angular_frequency(&self, upper: LevelRef, lower: LevelRef) -> Result<f64> {
        Ok(2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / self.transition_wavelength_m(upper, lower)?)
    }
}
