//! Coulomb-approximation radial wavefunctions and dipole matrix elements.
//!
//! The radial equation for u(r) = r R(r) at energy -1/(2 n*^2) a.u.,
//!
//! ```text
//! u'' = [ l(l+1)/r^2 - 2/r + 1/n*^2 ] u
//! ```
//!
//! is integrated inward by the Numerov scheme on a grid uniform in
//! x = sqrt(r). With chi(x) = u(x^2)/sqrt(x) the transformed equation is
//! chi'' = G(x) chi with
//!
//! ```text
//! G(x) = 4 x^2 / n*^2 + (4 l(l+1) + 3/4) / x^2 - 8
//! ```
//!
//! Integration starts at r_outer = 2 n* (n* + 15) where the bound solution
//! is negligible and runs down to the core cutoff r = 0.05 a.u. For
//! non-integer n* the solution that decays at infinity diverges as r^-l
//! toward the origin; the divergent tail inside the classical inner turning
//! point is chopped at the amplitude minimum, which reproduces the
//! turning-point cutoff exactly when the divergence exists and leaves
//! integer-n* (hydrogenic) states untouched.

use crate::atomic::{LevelRef, QuantumDefectTable};
use crate::error::{Error, Result};

/// Inner grid edge in atomic units of length.
pub const R_INNER_AU: f64 = 0.05;
/// Grid step in sqrt(a.u.).
pub const GRID_STEP: f64 = 0.01;

/// A radial solution chi(x) on the common sqrt-scaled lattice.
///
/// Grid node k sits at x = x0 + k h with the same x0 and h for every level,
/// so two wavefunctions can be combined index by index.
#[derive(Debug, Clone)]
pub struct RadialWavefunction {
    pub chi: Vec<f64>,
    pub x0: f64,
    pub h: f64,
    norm: f64,
}

impl RadialWavefunction {
    /// Integrates the level's radial equation inward. `n_star` must be
    /// positive; `l` is the orbital quantum number.
    pub fn solve(n_star: f64, l: u32, h: f64) -> Result<Self> {
        if n_star <= 0.0 {
            return Err(Error::Numerical(format!("non-positive n* = {n_star}")));
        }
        let x0 = R_INNER_AU.sqrt();
        let r_outer = 2.0 * n_star * (n_star + 15.0);
        let x_outer = r_outer.sqrt();
        let count = ((x_outer - x0) / h).ceil() as usize + 1;
        if count < 16 {
            return Err(Error::Numerical(format!(
                "Numerov grid underflow: only {count} nodes between r = {R_INNER_AU} and r = {r_outer:.3} a.u. (n* = {n_star:.3}, l = {l})"
            )));
        }
        let ll = (4 * l * (l + 1)) as f64 + 0.75;
        let inv_ns2 = 1.0 / (n_star * n_star);
        let g_at = |k: usize| {
            let x = x0 + k as f64 * h;
            4.0 * x * x * inv_ns2 + ll / (x * x) - 8.0
        };
        let h2_12 = h * h / 12.0;

        let mut chi = vec![0.0_f64; count];
        let top = count - 1;
        chi[top] = 1e-12;
        chi[top - 1] = 1e-12 * (1.0 + h * g_at(top).max(0.0).sqrt());
        let mut f_next = 1.0 - h2_12 * g_at(top);
        let mut f_here = 1.0 - h2_12 * g_at(top - 1);
        for k in (1..top).rev() {
            let f_prev = 1.0 - h2_12 * g_at(k - 1);
            chi[k - 1] = ((12.0 - 10.0 * f_here) * chi[k] - f_next * chi[k + 1]) / f_prev;
            if !chi[k - 1].is_finite() {
                return Err(Error::Numerical(format!(
                    "Numerov blow-up at node {k} (n* = {n_star:.3}, l = {l})"
                )));
            }
            if chi[k - 1].abs() > 1e100 {
                let scale = 1e-100;
                for c in chi[k - 1..].iter_mut() {
                    *c *= scale;
                }
            }
            f_next = f_here;
            f_here = f_prev;
        }

        chop_core_divergence(&mut chi, x0, h, n_star, l);

        let mut wf = RadialWavefunction { chi, x0, h, norm: 1.0 };
        let n2 = wf.overlap_with_weight(&wf, 2);
        if n2 <= 0.0 || !n2.is_finite() {
            return Err(Error::Numerical(format!(
                "zero-norm radial solution (n* = {n_star:.3}, l = {l})"
            )));
        }
        wf.norm = n2.sqrt();
        Ok(wf)
    }

    /// integral of chi_a chi_b x^power * 2 dx over the shared grid range
    /// (trapezoid; power 2 gives the norm, power 4 the dipole integrand).
    fn overlap_with_weight(&self, other: &RadialWavefunction, power: i32) -> f64 {
        let count = self.chi.len().min(other.chi.len());
        let mut acc = 0.0;
        for k in 0..count {
            let x = self.x0 + k as f64 * self.h;
            let w = if k == 0 || k == count - 1 { 0.5 } else { 1.0 };
            acc += w * 2.0 * x.powi(power) * self.chi[k] * other.chi[k];
        }
        acc * self.h
    }

    /// <a| r |b> in atomic units, both sides unit-normalized.
    pub fn dipole_integral(&self, other: &RadialWavefunction) -> f64 {
        self.overlap_with_weight(other, 4) / (self.norm * other.norm)
    }
}

/// Zeroes the divergent inward tail below the |chi| minimum inside the
/// classical inner turning point r- = n*^2 (1 - sqrt(1 - l(l+1)/n*^2)).
fn chop_core_divergence(chi: &mut [f64], x0: f64, h: f64, n_star: f64, l: u32) {
    if l == 0 {
        return; // s states have no inner turning point
    }
    let ll = (l * (l + 1)) as f64;
    let disc = 1.0 - ll / (n_star * n_star);
    let r_ctp = if disc > 0.0 {
        n_star * n_star * (1.0 - disc.sqrt())
    } else {
        n_star * n_star
    };
    let k_ctp = (((r_ctp.sqrt() - x0) / h).floor() as isize).clamp(0, chi.len() as isize - 1) as usize;
    if k_ctp < 2 {
        return;
    }
    let mut k_min = 0;
    for k in 0..=k_ctp {
        if chi[k].abs() < chi[k_min].abs() {
            k_min = k;
        }
    }
    if chi[0].abs() > 10.0 * chi[k_min].abs() {
        for c in chi[..k_min].iter_mut() {
            *c = 0.0;
        }
    }
}

/// Coulomb-approximation radial matrix element <upper| r |lower> in a.u.
pub fn radial_matrix_element(
    table: &QuantumDefectTable,
    upper: LevelRef,
    lower: LevelRef,
) -> Result<f64> {
    if upper.l.abs_diff(lower.l) != 1 {
        return Err(Error::Domain(format!(
            "{upper} -> {lower} is not dipole-allowed (|dl| != 1)"
        )));
    }
    let wf_u = RadialWavefunction::solve(table.effective_n(upper)?, upper.l, GRID_STEP)?;
    let wf_d = RadialWavefunction::solve(table.effective_n(lower)?, lower.l, GRID_STEP)?;
    Ok(wf_u.dipole_integral(&wf_d))
}
