//! Adaptive trajectory integration of the two-atom dynamics.
//!
//! A Dormand-Prince 5(4) embedded pair with PI step control drives the
//! dimensionless system (rho_ee, m, rho_egge, emitted); the implicit
//! collective rates are re-solved at every stage evaluation with a warm
//! start from the previous solution. A fourth component accumulates the
//! emitted fraction so the intensity bookkeeping is part of the solution
//! rather than an after-the-fact quadrature.

use crate::dynamics::{
    rhs_dimensionless, ChannelParameters, RateSolver, SampleGeometry, TwoAtomState,
};
use crate::error::{Error, Result};

/// One accepted integration point (dimensionless internals).
#[derive(Debug, Clone, Copy)]
pub struct Sample {
    /// Dimensionless time tau = gamma t.
    pub tau: f64,
    pub rho_ee: f64,
    pub m: f64,
    pub rho_egge: f64,
    /// Collective rate Gamma/gamma at this state.
    pub g: f64,
    /// Cross rate Gamma-bar/gamma.
    pub gbar: f64,
    pub zeta: f64,
    pub i_val: f64,
    /// Emission rate -d rho_ee/d tau, from the right-hand side.
    pub emission: f64,
    /// Integrated emitted fraction rho_ee(0) - rho_ee(tau).
    pub emitted: f64,
}

/// Model-breakdown and resolution diagnostics for one trajectory.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrajectoryDiagnostics {
    /// |m| exceeded 1 + 1e-6 somewhere (recorded, not fatal).
    pub m_excursion: bool,
    /// rho_ee or rho_egge left their unit bounds by more than 1e-6.
    pub bound_violation: bool,
    /// Accepted points before rho_ee first fell below 1/2.
    pub pre_half_points: usize,
    /// Number of rejected steps.
    pub rejected_steps: usize,
}

/// Time-ordered solution of one channel integration.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: ChannelParameters,
    pub geometry: SampleGeometry,
    pub samples: Vec<Sample>,
    pub diagnostics: TrajectoryDiagnostics,
}

impl Trajectory {
    /// Physical time of sample k, seconds.
    pub fn time_s(&self, k: usize) -> f64 {
        self.samples[k].tau / self.params.gamma
    }

    /// Photon emission rate of sample k, photons/s, scaled to the sample's
    /// atom count: intensity = -N d rho_ee/dt.
    pub fn intensity_per_s(&self, k: usize) -> f64 {
        self.geometry.atom_count * self.params.gamma * self.samples[k].emission
    }

    pub fn state(&self, k: usize) -> TwoAtomState {
        let s = &self.samples[k];
        TwoAtomState {
            t: self.time_s(k),
            rho_ee: s.rho_ee,
            m: s.m,
            rho_egge: s.rho_egge,
        }
    }
}

/// Integration controls; defaults match the acceptance tolerances.
#[derive(Debug, Clone, Copy)]
pub struct IntegrateOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Required accepted points before rho_ee first falls below 1/2.
    pub min_pre_half_points: usize,
    /// Diagnostic mode: clamp rho_egge to zero at every evaluation,
    /// reducing the model to single-atom form.
    pub single_atom: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            rtol: 1e-8,
            atol: 1e-12,
            min_pre_half_points: 200,
            single_atom: false,
        }
    }
}

/// Early-stop population floor.
const RHO_FLOOR: f64 = 1e-6;

/// Dormand-Prince 5(4) coefficients.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

type State = [f64; 4];

struct RhsEval {
    solver: RateSolver,
    params: ChannelParameters,
    single_atom: bool,
}

struct RatePoint {
    g: f64,
    gbar: f64,
    zeta: f64,
    i_val: f64,
}

impl RhsEval {
    fn eval(&mut self, y: &State) -> Result<(State, RatePoint)> {
        let egge = if self.single_atom { 0.0 } else { y[2] };
        let state = TwoAtomState {
            t: 0.0,
            rho_ee: y[0],
            m: y[1],
            rho_egge: egge,
        };
        let snap = self.solver.solve(&state, &self.params)?;
        let g = snap.gamma_coll / self.params.gamma;
        let gbar = snap.gamma_cross / self.params.gamma;
        let (dr, dm, de) = rhs_dimensionless(y[0], y[1], egge, g, gbar);
        let de = if self.single_atom { 0.0 } else { de };
        Ok((
            [dr, dm, de, -dr],
            RatePoint {
                g,
                gbar,
                zeta: snap.zeta,
                i_val: snap.i_val,
            },
        ))
    }
}

/// Integrates one channel from `init` to physical time `t_end_s`, stopping
/// early once the population falls below 1e-6. Reruns once with a capped
/// pre-burst step when the accepted-point density rule is not met.
pub fn integrate_channel(
    params: &ChannelParameters,
    geometry: &SampleGeometry,
    init: &TwoAtomState,
    t_end_s: f64,
    options: &IntegrateOptions,
) -> Result<Trajectory> {
    if t_end_s <= 0.0 {
        return Err(Error::Domain("t_end must be positive".into()));
    }
    if !(0.0..=1.0).contains(&init.rho_ee) {
        return Err(Error::Domain(format!(
            "initial rho_ee = {} outside [0, 1]",
            init.rho_ee
        )));
    }
    let tau_end = t_end_s * params.gamma;
    let mut traj = run_once(params, geometry, init, tau_end, options, None)?;
    let crossed_half = traj.samples.iter().any(|s| s.rho_ee < 0.5);
    if crossed_half && traj.diagnostics.pre_half_points < options.min_pre_half_points {
        let tau_half = traj
            .samples
            .iter()
            .find(|s| s.rho_ee < 0.5)
            .map(|s| s.tau)
            .unwrap_or(tau_end);
        let cap = tau_half / (options.min_pre_half_points as f64 * 1.05);
        traj = run_once(params, geometry, init, tau_end, options, Some(cap))?;
    }
    Ok(traj)
}

fn run_once(
    params: &ChannelParameters,
    geometry: &SampleGeometry,
    init: &TwoAtomState,
    tau_end: f64,
    options: &IntegrateOptions,
    h_cap_pre_half: Option<f64>,
) -> Result<Trajectory> {
    let mut rhs = RhsEval {
        solver: RateSolver::new(),
        params: *params,
        single_atom: options.single_atom,
    };
    let mut y: State = [init.rho_ee, init.m, init.rho_egge, 0.0];
    let mut tau = 0.0;
    let mut diagnostics = TrajectoryDiagnostics::default();
    let mut samples = Vec::with_capacity(1024);

    let (mut k1, rates) = rhs.eval(&y)?;
    push_sample(&mut samples, tau, &y, &k1, &rates, &mut diagnostics);

    let h_max_global = tau_end / 50.0;
    let mut below_half = y[0] < 0.5;
    let mut h = initial_step(&y, &k1, options, tau_end).min(h_max_global);
    if let Some(cap) = h_cap_pre_half {
        h = h.min(cap);
    }

    let mut err_old: f64 = 1e-4;
    let mut solver_failures = 0usize;
    let mut finished = false;
    let max_steps = 4_000_000usize;
    for _ in 0..max_steps {
        if tau >= tau_end || y[0] < RHO_FLOOR {
            finished = true;
            break;
        }
        let h_cap = if !below_half {
            h_cap_pre_half.unwrap_or(h_max_global).min(h_max_global)
        } else {
            h_max_global
        };
        h = h.min(h_cap).min(tau_end - tau);
        // underflow means no forward progress is possible any more
        if h < 1e-14 * tau || h < 1e-280 {
            if std::env::var_os("RYDSR_DEBUG_STEPS").is_some() {
                eprintln!(
                    "underflow: tau={tau:.6e} h={h:.3e} y={y:?} rejected={} solver_fail={}",
                    diagnostics.rejected_steps, solver_failures
                );
            }
            return Err(Error::Stiffness {
                t: tau / params.gamma,
            });
        }

        // six stage evaluations; the last stage lands on y_new (FSAL), so
        // its rate solve doubles as the accepted sample's rates
        let mut k = [[0.0; 4]; 7];
        k[0] = k1;
        let mut y_new = y;
        let mut new_rates = None;
        let mut failed = false;
        for stage in 0..6 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(stage + 1) {
                let a = A[stage][j];
                if a != 0.0 {
                    for i in 0..4 {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            match rhs.eval(&ys) {
                Ok((ks, rates)) => {
                    k[stage + 1] = ks;
                    if stage == 5 {
                        y_new = ys;
                        new_rates = Some(rates);
                    }
                }
                Err(_) => {
                    failed = true;
                    break;
                }
            }
        }
        if failed {
            h *= 0.25;
            diagnostics.rejected_steps += 1;
            solver_failures += 1;
            continue;
        }

        let mut err = 0.0;
        for i in 0..4 {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            e *= h;
            let sc = options.atol + options.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / sc) * (e / sc);
        }
        err = (err / 4.0).sqrt();

        if err <= 1.0 && y_new.iter().all(|v| v.is_finite()) {
            tau += h;
            y = y_new;
            k1 = k[6];
            if !below_half && y[0] < 0.5 {
                below_half = true;
            }
            let rates = new_rates.expect("stage 6 always evaluated on success");
            push_sample(&mut samples, tau, &y, &k1, &rates, &mut diagnostics);
            // PI controller (Hairer's beta = 0.04)
            let fac = 0.9 * err.powf(-0.17) * err_old.powf(0.04);
            h *= fac.clamp(0.2, 5.0);
            err_old = err.max(1e-12);
        } else {
            diagnostics.rejected_steps += 1;
            h *= if err.is_finite() {
                (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
            } else {
                0.1
            };
        }
    }

    if !finished {
        return Err(Error::Stiffness {
            t: tau / params.gamma,
        });
    }

    Ok(Trajectory {
        params: *params,
        geometry: *geometry,
        samples,
        diagnostics,
    })
}

fn push_sample(
    samples: &mut Vec<Sample>,
    tau: f64,
    y: &State,
    k: &State,
    rates: &RatePoint,
    diagnostics: &mut TrajectoryDiagnostics,
) {
    if y[1].abs() > 1.0 + 1e-6 {
        diagnostics.m_excursion = true;
    }
    if !(-1e-6..=1.0 + 1e-6).contains(&y[0]) || y[2].abs() > 1.0 + 1e-6 {
        diagnostics.bound_violation = true;
    }
    if y[0] >= 0.5 {
        diagnostics.pre_half_points += 1;
    }
    samples.push(Sample {
        tau,
        rho_ee: y[0],
        m: y[1],
        rho_egge: y[2],
        g: rates.g,
        gbar: rates.gbar,
        zeta: rates.zeta,
        i_val: rates.i_val,
        emission: -k[0],
        emitted: y[3],
    });
}

fn initial_step(y: &State, f: &State, options: &IntegrateOptions, tau_end: f64) -> f64 {
    let mut d0: f64 = 0.0;
    let mut d1: f64 = 0.0;
    for i in 0..4 {
        let sc = options.atol + options.rtol * y[i].abs();
        d0 += (y[i] / sc) * (y[i] / sc);
        d1 += (f[i] / sc) * (f[i] / sc);
    }
    let (d0, d1) = (d0.sqrt(), d1.sqrt());
    if d1 < 1e-10 {
        (tau_end * 1e-6).max(1e-10)
    } else {
        (0.01 * d0 / d1).min(tau_end / 10.0).max(1e-14)
    }
}

/// SR/ASE label of one trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Superradiant,
    Ase,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Classification::Superradiant => write!(f, "Superradiant"),
            Classification::Ase => write!(f, "ASE"),
        }
    }
}

/// Superradiant iff the intensity peak exceeds the t = 0+ intensity by more
/// than 1% relative; the margin keeps the classifier deterministic on the
/// admittedly smooth SR/ASE boundary.
pub fn classify(traj: &Trajectory) -> Result<Classification> {
    if traj.samples.len() < 3 {
        return Err(Error::Domain(format!(
            "classification needs >= 3 samples, got {}",
            traj.samples.len()
        )));
    }
    let s0 = traj.samples[0].emission;
    let peak = traj
        .samples
        .iter()
        .map(|s| s.emission)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(if peak > 1.01 * s0 {
        Classification::Superradiant
    } else {
        Classification::Ase
    })
}

/// Time of the intensity maximum, seconds.
pub fn peak_time(traj: &Trajectory) -> f64 {
    let mut best = 0;
    for (k, s) in traj.samples.iter().enumerate() {
        if s.emission > traj.samples[best].emission {
            best = k;
        }
    }
    traj.time_s(best)
}

/// Effective decay time of the channel, seconds: the inverse initial
/// logarithmic decay rate -rho_ee(0)/rho_ee'(0). In the dilute limit this is
/// exactly 1/gamma, i.e. the inverse Einstein A coefficient of the channel.
pub fn effective_decay_time(traj: &Trajectory) -> Result<f64> {
    let first = traj
        .samples
        .first()
        .ok_or_else(|| Error::Domain("empty trajectory".into()))?;
    if first.emission <= 0.0 {
        return Err(Error::Domain(format!(
            "initial state is not decaying (emission {:.3e})",
            first.emission
        )));
    }
    Ok(first.rho_ee / first.emission / traj.params.gamma)
}

/// Effective decay time computed without integrating a trajectory: the rates
/// are solved once at the initial state. Equals
/// [`effective_decay_time`] on the trajectory of the same channel.
pub fn initial_decay_time(
    params: &ChannelParameters,
    init: &TwoAtomState,
) -> Result<f64> {
    let mut solver = RateSolver::new();
    let snap = solver.solve(init, params)?;
    let g = snap.gamma_coll / params.gamma;
    let gbar = snap.gamma_cross / params.gamma;
    let (dr, _, _) = rhs_dimensionless(init.rho_ee, init.m, init.rho_egge, g, gbar);
    if dr >= 0.0 {
        return Err(Error::Domain("initial state is not decaying".into()));
    }
    Ok(init.rho_ee / (-dr) / params.gamma)
}

/// First crossing of rho_ee(0)/e, seconds, located by cubic Hermite
/// interpolation between the bracketing samples. For strongly collective
/// channels the population pins just below 1/2 and never reaches 1/e; that
/// case surfaces as a truncation error carrying the last value.
pub fn rho_efold_crossing(traj: &Trajectory) -> Result<f64> {
    let samples = &traj.samples;
    let first = samples
        .first()
        .ok_or_else(|| Error::Domain("empty trajectory".into()))?;
    let target = first.rho_ee / std::f64::consts::E;
    for k in 1..samples.len() {
        if samples[k].rho_ee <= target {
            let (a, b) = (&samples[k - 1], &samples[k]);
            let h = b.tau - a.tau;
            // Hermite basis on [0, 1] with derivatives -emission
            let (p0, p1) = (a.rho_ee, b.rho_ee);
            let (d0, d1) = (-a.emission * h, -b.emission * h);
            let mut s = (p0 - target) / (p0 - p1);
            for _ in 0..40 {
                let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
                let h10 = s * (1.0 - s) * (1.0 - s);
                let h01 = s * s * (3.0 - 2.0 * s);
                let h11 = s * s * (s - 1.0);
                let val = h00 * p0 + h10 * d0 + h01 * p1 + h11 * d1 - target;
                let dh00 = 6.0 * s * s - 6.0 * s;
                let dh10 = 3.0 * s * s - 4.0 * s + 1.0;
                let dh01 = -dh00;
                let dh11 = 3.0 * s * s - 2.0 * s;
                let der = dh00 * p0 + dh10 * d0 + dh01 * p1 + dh11 * d1;
                if der == 0.0 {
                    break;
                }
                let step = val / der;
                s = (s - step).clamp(0.0, 1.0);
                if step.abs() < 1e-14 {
                    break;
                }
            }
            return Ok((a.tau + s * h) / traj.params.gamma);
        }
    }
    let last = samples.last().unwrap();
    Err(Error::Truncated {
        t_end: last.tau / traj.params.gamma,
        last: last.rho_ee,
    })
}

/// Harmonic combination 1/tau = sum 1/tau_i.
pub fn total_lifetime(taus: &[f64]) -> Result<f64> {
    if taus.is_empty() {
        return Err(Error::Domain("total lifetime of an empty channel list".into()));
    }
    if let Some(bad) = taus.iter().find(|t| **t <= 0.0) {
        return Err(Error::Domain(format!("non-positive lifetime {bad}")));
    }
    Ok(1.0 / taus.iter().map(|t| 1.0 / t).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn geometry() -> SampleGeometry {
        SampleGeometry::from_atom_count(5e14, 1400.0).unwrap()
    }

    fn run(gamma: f64, coop: f64, size: f64, tau_end: f64) -> Trajectory {
        let params = ChannelParameters::abstract_point(gamma, coop, size);
        integrate_channel(
            &params,
            &geometry(),
            &TwoAtomState::fully_inverted(),
            tau_end / gamma,
            &IntegrateOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn dilute_limit_is_the_closed_form_exponential() {
        let traj = run(25.0, 0.0, 2.0, 12.0);
        for s in &traj.samples {
            assert!(
                (s.rho_ee - (-s.tau).exp()).abs() < 1e-6,
                "rho deviates from e^-tau at tau = {}",
                s.tau
            );
        }
        let te = effective_decay_time(&traj).unwrap();
        assert_relative_eq!(te, 1.0 / 25.0, max_relative = 1e-12);
        let cross = rho_efold_crossing(&traj).unwrap();
        assert_relative_eq!(cross, 1.0 / 25.0, max_relative = 1e-4);
        assert_eq!(classify(&traj).unwrap(), Classification::Ase);
    }

    #[test]
    fn point_density_rule_is_enforced() {
        let traj = run(1.0, 0.0, 1.0, 12.0);
        assert!(
            traj.diagnostics.pre_half_points >= 200,
            "only {} points before the half crossing",
            traj.diagnostics.pre_half_points
        );
    }

    #[test]
    fn strongly_collective_channel_bursts_and_pins() {
        // parameters of the 40p -> 39s channel at the default density
        let traj = run(6.246, 4.385e4, 0.3631, 12.0);
        assert_eq!(classify(&traj).unwrap(), Classification::Superradiant);
        let last = traj.samples.last().unwrap();
        assert!(last.rho_ee > 0.45 && last.rho_ee < 0.51, "pin at {}", last.rho_ee);
        assert!(matches!(
            rho_efold_crossing(&traj),
            Err(Error::Truncated { .. })
        ));
        // speed-up of the initial decay rate
        let te = effective_decay_time(&traj).unwrap();
        assert!(1.0 / (6.246 * te) > 100.0);
        // intensity positivity and the zeta sign invariant
        for s in &traj.samples {
            assert!(s.emission >= -1e-12);
            assert!(s.g >= 0.0);
            if (s.rho_ee - 0.5).abs() > 1e-9 {
                assert_eq!(s.zeta > 0.0, s.rho_ee > 0.5);
            }
        }
    }

    #[test]
    fn emitted_bookkeeping_closes() {
        for (gamma, coop, size) in [(25.0, 0.0, 2.0), (6.246, 4.385e4, 0.3631), (93.56, 5.44e-6, 728.1)] {
            let traj = run(gamma, coop, size, 10.0);
            let first = traj.samples.first().unwrap();
            let last = traj.samples.last().unwrap();
            let drop = first.rho_ee - last.rho_ee;
            assert!(drop > 0.0);
            assert_relative_eq!(last.emitted, drop, max_relative = 1e-6);
        }
    }

    #[test]
    fn single_atom_mode_freezes_the_coherence() {
        let params = ChannelParameters::abstract_point(10.0, 500.0, 0.5);
        let opts = IntegrateOptions {
            single_atom: true,
            ..Default::default()
        };
        let traj = integrate_channel(
            &params,
            &geometry(),
            &TwoAtomState::fully_inverted(),
            0.8,
            &opts,
        )
        .unwrap();
        for s in &traj.samples {
            assert_eq!(s.rho_egge, 0.0);
            // Gamma reduces to its first (coherence-free) term:
            // g = rho CP q exprel(2 zeta)
            let q = 1.0 / (s.g + 0.5);
            let cp = 500.0 * 0.5;
            let zeta = 0.5 * cp * q * (2.0 * s.rho_ee - 1.0);
            let expect = if zeta.abs() > 1e-8 {
                s.rho_ee / (2.0 * s.rho_ee - 1.0) * (2.0 * zeta).exp_m1()
            } else {
                s.rho_ee * cp * q
            };
            assert_relative_eq!(s.g, expect, max_relative = 1e-6);
        }
    }

    #[test]
    fn gamma_rescaling_leaves_dimensionless_solution_unchanged() {
        // tau_end = 6 round-trips exactly through both gammas, so the two
        // dimensionless integrations are bit-identical
        let t1 = run(4.0, 2.0e3, 0.8, 6.0);
        let t2 = run(8.0, 2.0e3, 0.8, 6.0);
        assert_eq!(t1.samples.len(), t2.samples.len());
        for (a, b) in t1.samples.iter().zip(t2.samples.iter()) {
            assert_eq!(a.tau, b.tau);
            assert_eq!(a.rho_ee, b.rho_ee);
            assert_eq!(a.g, b.g);
        }
        let k = t1.samples.len() - 1;
        assert_relative_eq!(t1.time_s(k), 2.0 * t2.time_s(k), max_relative = 1e-14);

        // a 10x pair whose tau_end round-trip is inexact still agrees to
        // integrator tolerance and rescales the derived times exactly
        let t3 = run(40.0, 2.0e3, 0.8, 6.0);
        assert_eq!(classify(&t1).unwrap(), classify(&t3).unwrap());
        let e1 = effective_decay_time(&t1).unwrap();
        let e3 = effective_decay_time(&t3).unwrap();
        assert_relative_eq!(e1, 10.0 * e3, max_relative = 1e-12);
        let end1 = t1.samples.last().unwrap().rho_ee;
        let end3 = t3.samples.last().unwrap().rho_ee;
        assert_relative_eq!(end1, end3, epsilon = 1e-7);
    }

    #[test]
    fn initial_decay_time_matches_the_trajectory_value() {
        let params = ChannelParameters::abstract_point(6.246, 4.385e4, 0.3631);
        let traj = run(6.246, 4.385e4, 0.3631, 2.0);
        let a = effective_decay_time(&traj).unwrap();
        let b = initial_decay_time(&params, &TwoAtomState::fully_inverted()).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-9);
    }

    #[test]
    fn harmonic_total_behaves() {
        assert_relative_eq!(total_lifetime(&[7.5]).unwrap(), 7.5);
        assert_relative_eq!(total_lifetime(&[2.0, 2.0]).unwrap(), 1.0);
        let t = total_lifetime(&[1.0, 3.0, 0.5]).unwrap();
        assert!(t <= 0.5);
        assert!(total_lifetime(&[]).is_err());
        assert!(total_lifetime(&[1.0, -2.0]).is_err());
    }
}
