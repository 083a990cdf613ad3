//! Reduced two-atom collective decay dynamics for a single transition.
//!
//! Everything here is dimensionless: rates are measured in units of the
//! channel's vacuum rate gamma and time as tau = gamma t, so the dynamics
//! depend only on the cooperative parameter C and the sample size rho_size.
//! Physical units are restored at the trajectory boundary.
//!
//! The collective rates are highly nonlinear and implicit (P is the sample
//! size, q = gamma/(Gamma + gamma/2) the saturation factor):
//!
//! ```text
//! Gamma  = gamma rho/(2 rho - 1) (e^{2 zeta} - 1) + 2 gamma C^2 P^4 q rho_egge I(zeta, P)
//! Gammab = 3 gamma C P q rho_ee I(zeta, P)        + 2 gamma C^2 P^4 q rho_egge I(zeta, P)
//! zeta   = (C P / 2) q (2 rho_ee - 1)
//! ```
//!
//! Gamma is found by safeguarded bracketing bisection plus damped Newton on
//! the residual Gamma - f(Gamma); f is monotone decreasing in Gamma for
//! inverted states, so the bracket is robust where plain fixed-point
//! iteration oscillates at large C.

use crate::constants::{RATE_HUGE, ZETA_CAP};
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Residual target for the rate solve, in units of gamma.
pub const RATE_TOL: f64 = 1e-10;
/// Gas sample: density, spherical diameter, derived atom count.
#[derive(Debug, Clone, Copy)]
pub struct SampleGeometry {
    /// Number density, m^-3.
    pub density_m3: f64,
    /// Sphere diameter, m.
    pub diameter_m: f64,
    /// Atom count N = density * (pi/6) d^3.
    pub atom_count: f64,
}

impl SampleGeometry {
    pub fn new(density_m3: f64, diameter_m: f64) -> Result<Self> {
        if density_m3 < 0.0 || diameter_m <= 0.0 {
            return Err(Error::Domain(format!(
                "need density >= 0 and diameter > 0 (got {density_m3}, {diameter_m})"
            )));
        }
        let atom_count = density_m3 * std::f64::consts::FRAC_PI_6 * diameter_m.powi(3);
        Ok(SampleGeometry {
            density_m3,
            diameter_m,
            atom_count,
        })
    }

    /// Chooses the diameter so that the sphere holds `atom_count` atoms.
    pub fn from_atom_count(density_m3: f64, atom_count: f64) -> Result<Self> {
        if density_m3 <= 0.0 || atom_count <= 0.0 {
            return Err(Error::Domain(format!(
                "need density > 0 and atom count > 0 (got {density_m3}, {atom_count})"
            )));
        }
        let d = (atom_count / (density_m3 * std::f64::consts::FRAC_PI_6)).cbrt();
        SampleGeometry::new(density_m3, d)
    }
}

/// Per-channel dimensionless inputs of the collective dynamics.
#[derive(Debug, Clone, Copy)]
pub struct ChannelParameters {
    /// Vacuum decay rate of the channel, 1/s.
    pub gamma: f64,
    /// Cooperative parameter C = density lambda^3 / (4 pi^2).
    pub cooperativity: f64,
    /// Sample size rho_size = pi d / lambda.
    pub sample_size: f64,
}

impl ChannelParameters {
    pub fn new(gamma: f64, wavelength_m: f64, geometry: &SampleGeometry) -> Result<Self> {
        if gamma <= 0.0 || wavelength_m <= 0.0 {
            return Err(Error::Domain(format!(
                "need gamma > 0 and wavelength > 0 (got {gamma}, {wavelength_m})"
            )));
        }
        Ok(ChannelParameters {
            gamma,
            cooperativity: geometry.density_m3 * wavelength_m.powi(3)
                / (4.0 * std::f64::consts::PI * std::f64::consts::PI),
            sample_size: std::f64::consts::PI * geometry.diameter_m / wavelength_m,
        })
    }

    /// Abstract point in the (C, rho_size) plane, for map scans.
    pub fn abstract_point(gamma: f64, cooperativity: f64, sample_size: f64) -> Self {
        ChannelParameters {
            gamma,
            cooperativity,
            sample_size,
        }
    }
}

/// Dynamical variables of the reduced two-atom state at one instant.
#[derive(Debug, Clone, Copy)]
pub struct TwoAtomState {
    /// Time, s.
    pub t: f64,
    /// Upper-level population.
    pub rho_ee: f64,
    /// Inversion product, evolved by its own equation of motion.
    pub m: f64,
    /// Two-atom off-diagonal coupling <eg|rho|ge>.
    pub rho_egge: f64,
}

impl TwoAtomState {
    /// Fully inverted start: coherence builds dynamically from zero.
    pub fn fully_inverted() -> Self {
        TwoAtomState {
            t: 0.0,
            rho_ee: 1.0,
            m: 1.0,
            rho_egge: 0.0,
        }
    }
}

/// Solved collective rates at one state (physical units).
#[derive(Debug, Clone, Copy)]
pub struct RateSnapshot {
    /// Single-atom collective rate Gamma, 1/s.
    pub gamma_coll: f64,
    /// Cross-atom rate Gamma-bar, 1/s.
    pub gamma_cross: f64,
    /// Gain exponent zeta (shares the sign of 2 rho_ee - 1).
    pub zeta: f64,
    /// Value of I(zeta, rho_size).
    pub i_val: f64,
}

/// |((1 - xi) e^xi - 1) / xi^2|^2 at xi = zeta + i rho_size.
///
/// Near xi = 0 the numerator is -xi^2/2 (1 + 2 xi/3 + ...), so the limit is
/// exactly 1/4 and the series branch avoids the 0/0 cancellation. For large
/// positive zeta the modulus is evaluated in log form; the result is always
/// finite.
pub fn dicke_i(zeta: f64, sample_size: f64) -> f64 {
    let xi = Complex64::new(zeta, sample_size);
    let r2 = xi.norm_sqr();
    if r2 <= 1e-2 {
        // ((1-xi)e^xi - 1)/xi^2 = -sum_k xi^k (k+1)/(k+2)!; the direct form
        // cancels to O(xi^2) and loses ~|xi|^-2 digits, so the series keeps
        // full precision out to |xi| = 0.1 (truncation < 1e-15 there)
        const COEFF: [f64; 9] = [
            1.0 / 2.0,
            1.0 / 3.0,
            1.0 / 8.0,
            1.0 / 30.0,
            1.0 / 144.0,
            1.0 / 840.0,
            1.0 / 5760.0,
            1.0 / 45360.0,
            1.0 / 403200.0,
        ];
        let mut val = Complex64::new(0.0, 0.0);
        let mut pow = Complex64::new(1.0, 0.0);
        for c in COEFF {
            val += pow * c;
            pow *= xi;
        }
        return val.norm_sqr();
    }
    if zeta > ZETA_CAP / 2.0 {
        let one_minus = Complex64::new(1.0 - zeta, -sample_size);
        let log_mag = 2.0 * zeta + one_minus.norm_sqr().ln() - 2.0 * r2.ln();
        if log_mag > RATE_HUGE.ln() {
            return RATE_HUGE;
        }
        return log_mag.exp();
    }
    let num = (Complex64::new(1.0, 0.0) - xi) * xi.exp() - 1.0;
    num.norm_sqr() / (r2 * r2)
}

/// (e^y - 1)/y with the removable singularity filled in.
fn exprel(y: f64) -> f64 {
    if y.abs() < 1e-5 {
        1.0 + y / 2.0 + y * y / 6.0
    } else {
        y.exp_m1() / y
    }
}

/// Dimensionless pieces of the implicit rate equation at trial g = Gamma/gamma.
/// Returns (term1, term2, zeta, I). Overflow is capped at RATE_HUGE.
fn rate_terms(g: f64, rho_ee: f64, rho_egge: f64, coop: f64, size: f64) -> (f64, f64, f64, f64) {
    let q = 1.0 / (g + 0.5);
    let cp = coop * size;
    let zeta = 0.5 * cp * q * (2.0 * rho_ee - 1.0);
    let i_val = dicke_i(zeta, size);
    // term1 = rho/(2 rho - 1) (e^{2 zeta} - 1)  ==  rho cp q exprel(2 zeta)
    let two_zeta = 2.0 * zeta;
    let term1 = if two_zeta > ZETA_CAP {
        let log_t1 = (rho_ee * cp * q).ln() + two_zeta - two_zeta.ln();
        if log_t1 > RATE_HUGE.ln() {
            RATE_HUGE
        } else {
            log_t1.exp()
        }
    } else {
        rho_ee * cp * q * exprel(two_zeta)
    };
    let term2 = 2.0 * coop * coop * size.powi(4) * q * rho_egge * i_val;
    (term1.min(RATE_HUGE), term2.clamp(-RATE_HUGE, RATE_HUGE), zeta, i_val)
}

/// Residual g - f(g) of the implicit equation, in units of gamma.
pub fn rate_residual(g: f64, rho_ee: f64, rho_egge: f64, coop: f64, size: f64) -> f64 {
    let (t1, t2, _, _) = rate_terms(g, rho_ee, rho_egge, coop, size);
    g - (t1 + t2)
}

/// Acceptance tolerance at trial g: the nominal target, or the
/// double-precision floor of evaluating g - f(g) when the rates are huge.
fn accept_tol(g: f64) -> f64 {
    RATE_TOL.max(1e-13 * (g.abs() + 1.0))
}

/// Solves the implicit collective rates at one state.
///
/// A warm start from the previous accepted step cuts the solve to a few
/// Newton iterations during trajectory integration.
#[derive(Debug, Default, Clone)]
pub struct RateSolver {
    warm: Option<f64>,
}

impl RateSolver {
    pub fn new() -> Self {
        RateSolver { warm: None }
    }

    pub fn reset(&mut self) {
        self.warm = None;
    }

    /// Solves for Gamma and evaluates Gamma-bar at the solution; the state's
    /// `t` is ignored. The residual at return is <= RATE_TOL in units of
    /// gamma, unless the double-precision floor of the expression is larger,
    /// which only happens at extreme C * rho_size.
    pub fn solve(&mut self, state: &TwoAtomState, params: &ChannelParameters) -> Result<RateSnapshot> {
        let rho = state.rho_ee;
        let egge = state.rho_egge;
        let coop = params.cooperativity;
        let size = params.sample_size;
        if !(rho.is_finite() && egge.is_finite()) {
            return Err(Error::Numerical("non-finite state in rate solve".into()));
        }

        let g = if coop == 0.0 {
            0.0
        } else {
            self.solve_dimensionless(rho, egge, coop, size)?
        };
        self.warm = Some(g);

        let (_, t2, zeta, i_val) = rate_terms(g, rho, egge, coop, size);
        let q = 1.0 / (g + 0.5);
        let cross = 3.0 * coop * size * q * rho * i_val + t2;
        Ok(RateSnapshot {
            gamma_coll: g * params.gamma,
            gamma_cross: cross * params.gamma,
            zeta,
            i_val,
        })
    }

    fn solve_dimensionless(&self, rho: f64, egge: f64, coop: f64, size: f64) -> Result<f64> {
        let res = |g: f64| rate_residual(g, rho, egge, coop, size);

        // cheap path: damped Newton from the previous step's solution
        if let Some(g0) = self.warm {
            if let Some(g) = newton_polish(&res, g0, 16) {
                return Ok(g);
            }
        }

        let r0 = res(0.0);
        if r0 >= 0.0 {
            // f(0) <= 0: no positive root; the rate floors at zero (only
            // reachable through tiny negative rho_egge wobble)
            return Ok(0.0);
        }
        // hi bound: zeta(hi) < 1e-3 makes term1 ~ rho C P q -> residual > 0
        // once g dominates; expand geometrically if the coherent term still wins
        let mut hi = (500.0 * coop * size * (2.0 * rho - 1.0).abs()).max(1.0);
        let mut r_hi = res(hi);
        let mut guard = 0;
        while r_hi < 0.0 {
            hi *= 8.0;
            r_hi = res(hi);
            guard += 1;
            if guard > 80 || !hi.is_finite() {
                return Err(Error::Solver {
                    gamma_max: hi,
                    res_lo: r0,
                    res_hi: r_hi,
                });
            }
        }

        // bisect down to a narrow bracket, then polish with damped Newton
        let (mut lo, mut r_lo) = (0.0, r0);
        for _ in 0..200 {
            if hi - lo <= 1e3 && hi - lo <= 0.125 * hi.max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let r_mid = res(mid);
            if r_mid.abs() <= accept_tol(mid) {
                return Ok(mid);
            }
            if (r_mid < 0.0) == (r_lo < 0.0) {
                lo = mid;
                r_lo = r_mid;
            } else {
                hi = mid;
            }
        }
        if let Some(g) = newton_in_bracket(&res, lo, hi) {
            return Ok(g);
        }
        Err(Error::Numerical(format!(
            "rate solve stalled in [{lo:.6e}, {hi:.6e}] (C = {coop:.3e}, size = {size:.3e})"
        )))
    }
}

/// Newton with step damping; succeeds only if the residual meets the
/// acceptance tolerance.
fn newton_polish(res: &dyn Fn(f64) -> f64, start: f64, max_iter: usize) -> Option<f64> {
    let mut g = start.max(0.0);
    let mut r = res(g);
    for _ in 0..max_iter {
        if r.abs() <= accept_tol(g) {
            return Some(g);
        }
        let dg = (g.abs() * 1e-7).max(1e-9);
        let slope = (res(g + dg) - res(g - dg.min(g))) / (dg + dg.min(g));
        if !slope.is_finite() || slope == 0.0 {
            return None;
        }
        let mut step = -r / slope;
        if !step.is_finite() {
            return None;
        }
        // damping: halve until the residual actually shrinks
        let mut accepted = false;
        for _ in 0..10 {
            let cand = (g + step).max(0.0);
            let rc = res(cand);
            if rc.abs() < r.abs() {
                g = cand;
                r = rc;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    if r.abs() <= accept_tol(g) {
        Some(g)
    } else {
        None
    }
}

/// Safeguarded Newton: falls back to bisection whenever the Newton step
/// leaves the bracket or fails to shrink the residual.
fn newton_in_bracket(res: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Option<f64> {
    let mut r_lo = res(lo);
    if r_lo.abs() <= accept_tol(lo) {
        return Some(lo);
    }
    let mut g = 0.5 * (lo + hi);
    for _ in 0..120 {
        let r = res(g);
        if r.abs() <= accept_tol(g) {
            return Some(g);
        }
        if (r < 0.0) == (r_lo < 0.0) {
            lo = g;
            r_lo = r;
        } else {
            hi = g;
        }
        let dg = (g.abs() * 1e-7).max(1e-12);
        let slope = (res(g + dg) - r) / dg;
        let newton = if slope.is_finite() && slope != 0.0 {
            g - r / slope
        } else {
            f64::NAN
        };
        g = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < f64::EPSILON * hi.max(1.0) {
            break;
        }
    }
    let r = res(g);
    if r.abs() <= accept_tol(g) {
        Some(g)
    } else {
        None
    }
}

/// Time derivatives of (rho_ee, m, rho_egge) in dimensionless time tau.
pub fn rhs_dimensionless(rho_ee: f64, m: f64, rho_egge: f64, g: f64, gbar: f64) -> (f64, f64, f64) {
    let total = 2.0 * g + 1.0;
    (
        -total * rho_ee + g,
        -2.0 * total * m - 2.0 * (2.0 * rho_ee - 1.0) + 8.0 * gbar * rho_egge,
        -total * rho_egge + gbar * m,
    )
}

/// Physical-units right-hand side of the three coupled equations.
pub fn rhs(state: &TwoAtomState, rates: &RateSnapshot, gamma: f64) -> (f64, f64, f64) {
    let g = rates.gamma_coll / gamma;
    let gbar = rates.gamma_cross / gamma;
    let (dr, dm, de) = rhs_dimensionless(state.rho_ee, state.m, state.rho_egge, g, gbar);
    (dr * gamma, dm * gamma, de * gamma)
}
