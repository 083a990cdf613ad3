//! Radiative transition channels: wavelengths, dipole moments, Einstein A
//! coefficients and the dipole-dipole exchange splitting.

use crate::atomic::{LevelRef, QuantumDefectTable};
use crate::constants::{
    BOHR_RADIUS, ELEMENTARY_CHARGE, HBAR, SPEED_OF_LIGHT, VACUUM_PERMITTIVITY,
};
use crate::error::{Error, Result};
use crate::numerov::{RadialWavefunction, GRID_STEP};
use std::collections::HashMap;

/// One radiative decay channel between two bound levels.
#[derive(Debug, Clone, Copy)]
pub struct TransitionChannel {
    pub upper: LevelRef,
    pub lower: LevelRef,
    /// Transition wavelength, m.
    pub wavelength_m: f64,
    /// Angular frequency, rad/s.
    pub angular_frequency: f64,
    /// Radial matrix element, atomic units of length.
    pub radial_au: f64,
    /// Line dipole moment sqrt(<p^2>) including the angular factor, C m.
    pub dipole_cm: f64,
    /// Vacuum spontaneous rate, 1/s.
    pub einstein_a: f64,
}

/// Vacuum Einstein A coefficient from the channel geometry-free data:
/// A = omega^3 p_line^2 / (3 pi eps0 hbar c^3) with
/// p_line^2 = (e a0 R)^2 max(l_u, l_d) / (2 l_u + 1).
pub fn einstein_a(omega: f64, radial_au: f64, l_upper: u32, l_lower: u32) -> f64 {
    let p2 = line_dipole_squared(radial_au, l_upper, l_lower);
    omega.powi(3) * p2
        / (3.0 * std::f64::consts::PI * VACUUM_PERMITTIVITY * HBAR * SPEED_OF_LIGHT.powi(3))
}

fn line_dipole_squared(radial_au: f64, l_upper: u32, l_lower: u32) -> f64 {
    let angular = l_upper.max(l_lower) as f64 / (2 * l_upper + 1) as f64;
    (ELEMENTARY_CHARGE * BOHR_RADIUS * radial_au).powi(2) * angular
}

/// Exchange splitting Omega = p^2 / (4 pi eps0 hbar r^3) between the
/// symmetric and antisymmetric single-excitation pair states (so the energy
/// gap is 2 hbar Omega).
pub fn exchange_splitting(dipole_cm: f64, separation_m: f64) -> Result<f64> {
    if separation_m <= 0.0 {
        return Err(Error::Domain(format!(
            "pair separation must be positive, got {separation_m}"
        )));
    }
    if dipole_cm <= 0.0 {
        return Err(Error::Domain(format!(
            "dipole moment must be positive, got {dipole_cm}"
        )));
    }
    Ok(dipole_cm * dipole_cm
        / (4.0 * std::f64::consts::PI * VACUUM_PERMITTIVITY * HBAR * separation_m.powi(3)))
}

/// Builds transition channels with memoized radial wavefunctions, shared by
/// the lifetime table and the cascade network.
pub struct ChannelBuilder<'a> {
    table: &'a QuantumDefectTable,
    cache: HashMap<LevelRef, RadialWavefunction>,
}

impl<'a> ChannelBuilder<'a> {
    pub fn new(table: &'a QuantumDefectTable) -> Self {
        ChannelBuilder {
            table,
            cache: HashMap::new(),
        }
    }

    pub fn table(&self) -> &QuantumDefectTable {
        self.table
    }

    fn wavefunction(&mut self, level: LevelRef) -> Result<&RadialWavefunction> {
        if !self.cache.contains_key(&level) {
            let wf = RadialWavefunction::solve(self.table.effective_n(level)?, level.l, GRID_STEP)?;
            self.cache.insert(level, wf);
        }
        Ok(&self.cache[&level])
    }

    /// Builds one downward channel; errors on non-dipole or non-downward pairs.
    pub fn channel(&mut self, upper: LevelRef, lower: LevelRef) -> Result<TransitionChannel> {
        if upper.l.abs_diff(lower.l) != 1 {
            return Err(Error::Domain(format!(
                "{upper} -> {lower} is not dipole-allowed"
            )));
        }
        let wavelength_m = self.table.transition_wavelength_m(upper, lower)?;
        let angular_frequency = 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / wavelength_m;
        self.wavefunction(upper)?;
        self.wavefunction(lower)?;
        let radial_au = self.cache[&upper].dipole_integral(&self.cache[&lower]);
        let a = einstein_a(angular_frequency, radial_au, upper.l, lower.l);
        Ok(TransitionChannel {
            upper,
            lower,
            wavelength_m,
            angular_frequency,
            radial_au,
            dipole_cm: line_dipole_squared(radial_au, upper.l, lower.l).sqrt(),
            einstein_a: a,
        })
    }

    /// All dipole-allowed in-table channels downward from `upper`,
    /// ordered by target (n, l).
    pub fn downward_channels(&mut self, upper: LevelRef) -> Result<Vec<TransitionChannel>> {
        let e_up = self.table.energy_cm(upper)?;
        let (n_min, n_max) = self.table.n_range();
        let l_top = self.table.max_series_l();
        let mut out = Vec::new();
        let lowers: Vec<u32> = match upper.l {
            0 => vec![1],
            l => vec![l - 1, l + 1],
        };
        for ld in lowers {
            if ld > l_top {
                continue;
            }
            for nd in n_min..=n_max {
                if ld >= nd {
                    continue;
                }
                let lower = LevelRef { n: nd, l: ld };
                if self.table.energy_cm(lower)? < e_up {
                    out.push(self.channel(upper, lower)?);
                }
            }
        }
        out.sort_by_key(|c| (c.lower.n, c.lower.l));
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn einstein_a_scales_as_omega_cubed() {
        let a1 = einstein_a(1.0e12, 100.0, 1, 0);
        let a2 = einstein_a(2.0e12, 100.0, 1, 0);
        assert_relative_eq!(a2 / a1, 8.0, max_relative = 1e-12);
    }

    #[test]
    fn vacuum_lifetime_of_40p_is_near_210_us() {
        let table = QuantumDefectTable::rb_defaults().with_range(5, 45);
        let mut builder = ChannelBuilder::new(&table);
        let sum: f64 = builder
            .downward_channels(LevelRef::parse("40p").unwrap())
            .unwrap()
            .iter()
            .map(|c| c.einstein_a)
            .sum();
        let tau_us = 1e6 / sum;
        assert!(
            (147.0..=273.0).contains(&tau_us),
            "vacuum tau_total(40p) = {tau_us:.1} us, outside 210 us +- 30%"
        );
    }

    #[test]
    fn lowest_n_channels_outpace_neighbor_channels_in_vacuum() {
        let table = QuantumDefectTable::rb_defaults();
        let mut builder = ChannelBuilder::new(&table);
        let p40 = LevelRef::parse("40p").unwrap();
        let a_5s = builder.channel(p40, LevelRef::parse("5s").unwrap()).unwrap().einstein_a;
        let a_6s = builder.channel(p40, LevelRef::parse("6s").unwrap()).unwrap().einstein_a;
        let a_39s = builder.channel(p40, LevelRef::parse("39s").unwrap()).unwrap().einstein_a;
        let a_40s = builder.channel(p40, LevelRef::parse("40s").unwrap()).unwrap().einstein_a;
        assert!(a_5s > a_39s);
        assert!(a_6s > 5.0 * a_39s);
        assert!(a_6s > 5.0 * a_40s);
    }

    #[test]
    fn exchange_splitting_follows_the_cubic_and_quadratic_laws() {
        let p = 1.0e-26;
        let r = 2.0e-6;
        let base = exchange_splitting(p, r).unwrap();
        assert_relative_eq!(exchange_splitting(p, 2.0 * r).unwrap(), base / 8.0, max_relative = 1e-12);
        assert_relative_eq!(exchange_splitting(2.0 * p, r).unwrap(), 4.0 * base, max_relative = 1e-12);
        assert!(exchange_splitting(p, 0.0).is_err());
        assert!(exchange_splitting(0.0, r).is_err());
    }

    #[test]
    fn downward_channel_enumeration_respects_selection_rules() {
        let table = QuantumDefectTable::rb_defaults();
        let mut builder = ChannelBuilder::new(&table);
        let chans = builder.downward_channels(LevelRef::parse("40p").unwrap()).unwrap();
        // ns targets n = 5..=40 (40s lies below 40p), nd targets n = 5..=38
        assert_eq!(chans.iter().filter(|c| c.lower.l == 0).count(), 36);
        assert_eq!(chans.iter().filter(|c| c.lower.l == 2).count(), 34);
        for c in &chans {
            assert_eq!(c.upper.l.abs_diff(c.lower.l), 1);
            assert!(c.wavelength_m > 0.0);
            assert!(c.einstein_a > 0.0);
            assert_relative_eq!(
                c.angular_frequency * c.wavelength_m,
                2.0 * std::f64::consts::PI * SPEED_OF_LIGHT,
                max_relative = 1e-12
            );
        }
    }
}
