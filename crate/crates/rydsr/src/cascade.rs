//! Multi-level decay cascade through the Rydberg manifold.
//!
//! Every level of the table gets its dipole-allowed downward channels
//! evaluated at the dense-gas effective decay time; the `cap` fastest per
//! level are kept and the populations then evolve by linear rate equations
//! with those fixed rates. The observable is the number of atoms left in
//! levels with n above the detection floor.

use crate::atomic::{LevelRef, QuantumDefectTable};
use crate::channels::ChannelBuilder;
use crate::dynamics::{ChannelParameters, SampleGeometry, TwoAtomState};
use crate::error::{Error, Result};
use crate::integrate::initial_decay_time;
use rayon::prelude::*;

/// One retained decay edge.
#[derive(Debug, Clone, Copy)]
pub struct CascadeEdge {
    pub upper: LevelRef,
    pub lower: LevelRef,
    /// Dense-gas effective decay time of the channel, s.
    pub tau_eff_s: f64,
}

impl CascadeEdge {
    pub fn rate(&self) -> f64 {
        1.0 / self.tau_eff_s
    }
}

/// Directed level graph with per-level selected channels.
#[derive(Debug, Clone)]
pub struct CascadeNetwork {
    /// Levels ordered by (n, l); index is the population slot.
    pub levels: Vec<LevelRef>,
    /// Retained edges, grouped per upper level in `levels` order.
    pub edges: Vec<Vec<CascadeEdge>>,
    pub detection_floor: u32,
}

impl CascadeNetwork {
    pub fn level_index(&self, level: LevelRef) -> Option<usize> {
        self.levels.binary_search(&level).ok()
    }

    pub fn all_edges(&self) -> impl Iterator<Item = &CascadeEdge> {
        self.edges.iter().flatten()
    }

    /// Total out-rate of one level (sum of its retained edge rates).
    pub fn out_rate(&self, level: LevelRef) -> f64 {
        self.level_index(level)
            .map(|i| self.edges[i].iter().map(|e| e.rate()).sum())
            .unwrap_or(0.0)
    }
}

/// Builds the network: per level, all dipole-allowed downward channels are
/// evaluated through the collective dynamics at the fully inverted initial
/// state, and the `cap` fastest are retained.
pub fn build_network(
    table: &QuantumDefectTable,
    geometry: &SampleGeometry,
    cap: usize,
) -> Result<CascadeNetwork> {
    if cap == 0 {
        return Err(Error::Config("channel cap must be >= 1".into()));
    }
    let levels = table.levels();
    let ground = levels
        .iter()
        .copied()
        .min_by(|a, b| {
            let ea = table.energy_cm(*a).unwrap_or(f64::INFINITY);
            let eb = table.energy_cm(*b).unwrap_or(f64::INFINITY);
            ea.partial_cmp(&eb).unwrap()
        })
        .ok_or_else(|| Error::Config("empty level table".into()))?;

    // channel construction is independent per level; each worker carries its
    // own wavefunction cache, cheap next to the rate solves
    let edges: Vec<Vec<CascadeEdge>> = levels
        .par_iter()
        .map(|&upper| -> Result<Vec<CascadeEdge>> {
            let mut builder = ChannelBuilder::new(table);
            let channels = builder.downward_channels(upper)?;
            if channels.is_empty() {
                if upper == ground {
                    return Ok(Vec::new());
                }
                return Err(Error::Config(format!(
                    "level {upper} has no downward channel in the table"
                )));
            }
            let mut rated: Vec<CascadeEdge> = channels
                .iter()
                .map(|ch| -> Result<CascadeEdge> {
                    let params = ChannelParameters::new(ch.einstein_a, ch.wavelength_m, geometry)?;
                    let tau = initial_decay_time(&params, &TwoAtomState::fully_inverted())?;
                    Ok(CascadeEdge {
                        upper,
                        lower: ch.lower,
                        tau_eff_s: tau,
                    })
                })
                .collect::<Result<_>>()?;
            rated.sort_by(|a, b| {
                a.tau_eff_s
                    .partial_cmp(&b.tau_eff_s)
                    .unwrap()
                    .then(a.lower.cmp(&b.lower))
            });
            rated.truncate(cap);
            Ok(rated)
        })
        .collect::<Result<_>>()?;

    Ok(CascadeNetwork {
        levels,
        edges,
        detection_floor: 27,
    })
}

/// Populations on a uniform output grid.
#[derive(Debug, Clone)]
pub struct PopulationTrajectory {
    /// Output times, s (absolute, starting at t0).
    pub times_s: Vec<f64>,
    /// Per-level populations in atoms, `levels` order per time point.
    pub populations: Vec<Vec<f64>>,
    /// Atoms in levels with n >= detection_floor at each time.
    pub detected: Vec<f64>,
    /// Atoms in levels below the detection floor at each time.
    pub sink: Vec<f64>,
    pub levels: Vec<LevelRef>,
}

impl PopulationTrajectory {
    pub fn total(&self, k: usize) -> f64 {
        self.detected[k] + self.sink[k]
    }

    /// First time the detected signal falls to detected(t0)/e, s.
    pub fn efold_time(&self) -> Option<f64> {
        let target = self.detected[0] / std::f64::consts::E;
        for k in 1..self.detected.len() {
            if self.detected[k] <= target {
                let (t0, t1) = (self.times_s[k - 1], self.times_s[k]);
                let (d0, d1) = (self.detected[k - 1], self.detected[k]);
                let f = if d0 > d1 { (d0 - target) / (d0 - d1) } else { 1.0 };
                return Some(t0 + f * (t1 - t0));
            }
        }
        None
    }
}

/// Evolves the network populations from `n0` atoms in `initial` at `t0_s`
/// to `t_end_s` on a uniform grid of `points` outputs.
///
/// The generator is a linear rate matrix; every outflow lands in another
/// tracked level, so any Runge-Kutta step conserves the total population to
/// rounding. Substeps are capped well inside the stability bound of the
/// fastest retained rate.
pub fn evolve(
    network: &CascadeNetwork,
    initial: LevelRef,
    n0: f64,
    t0_s: f64,
    t_end_s: f64,
    points: usize,
) -> Result<PopulationTrajectory> {
    if n0 <= 0.0 {
        return Err(Error::Domain("initial atom count must be positive".into()));
    }
    if t_end_s <= t0_s {
        return Err(Error::Domain("t_end must exceed t0".into()));
    }
    let n = network.levels.len();
    let start = network
        .level_index(initial)
        .ok_or_else(|| Error::Config(format!("initial level {initial} not in the network")))?;

    // per-level total out rate and flattened in-edges
    let mut out_rate = vec![0.0; n];
    let mut inflows: Vec<(usize, usize, f64)> = Vec::new();
    for (i, edges) in network.edges.iter().enumerate() {
        for e in edges {
            let j = network
                .level_index(e.lower)
                .ok_or_else(|| Error::Config(format!("edge target {} missing", e.lower)))?;
            out_rate[i] += e.rate();
            inflows.push((j, i, e.rate()));
        }
    }
    let max_rate = out_rate.iter().cloned().fold(0.0, f64::max);

    let points = points.max(2);
    let dt_out = (t_end_s - t0_s) / (points - 1) as f64;
    let substeps = (dt_out * max_rate / 0.2).ceil().max(1.0) as usize;
    let h = dt_out / substeps as f64;

    let deriv = |p: &[f64], dp: &mut [f64]| {
        for i in 0..n {
            dp[i] = -out_rate[i] * p[i];
        }
        for &(j, i, rate) in &inflows {
            dp[j] += rate * p[i];
        }
    };

    let mut p = vec![0.0; n];
    p[start] = 1.0;
    let mask: Vec<bool> = network
        .levels
        .iter()
        .map(|lv| lv.n >= network.detection_floor)
        .collect();

    let mut times = Vec::with_capacity(points);
    let mut detected = Vec::with_capacity(points);
    let mut sink = Vec::with_capacity(points);
    let mut populations = Vec::with_capacity(points);
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];

    for step in 0..points {
        let det: f64 = p
            .iter()
            .zip(&mask)
            .filter_map(|(v, keep)| keep.then_some(*v))
            .sum();
        let tot: f64 = p.iter().sum();
        times.push(t0_s + step as f64 * dt_out);
        detected.push(n0 * det);
        sink.push(n0 * (tot - det));
        populations.push(p.iter().map(|v| n0 * v).collect());
        if step + 1 == points {
            break;
        }
        for _ in 0..substeps {
            deriv(&p, &mut k1);
            for i in 0..n {
                tmp[i] = p[i] + 0.5 * h * k1[i];
            }
            deriv(&tmp, &mut k2);
            for i in 0..n {
                tmp[i] = p[i] + 0.5 * h * k2[i];
            }
            deriv(&tmp, &mut k3);
            for i in 0..n {
                tmp[i] = p[i] + h * k3[i];
            }
            deriv(&tmp, &mut k4);
            for i in 0..n {
                p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
    }

    Ok(PopulationTrajectory {
        times_s: times,
        populations,
        detected,
        sink,
        levels: network.levels.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn small_table() -> QuantumDefectTable {
        QuantumDefectTable::rb_defaults().with_range(5, 14)
    }

    fn geometry() -> SampleGeometry {
        SampleGeometry::from_atom_count(5e14, 1400.0).unwrap()
    }

    #[test]
    fn cap_limits_the_out_degree() {
        let table = small_table();
        let geo = geometry();
        for cap in [1usize, 2, 3] {
            let net = build_network(&table, &geo, cap).unwrap();
            for (lv, edges) in net.levels.iter().zip(&net.edges) {
                assert!(edges.len() <= cap, "{lv} has {} edges", edges.len());
                if *lv != LevelRef::new(5, 0).unwrap() {
                    assert!(!edges.is_empty(), "{lv} lost all channels");
                }
            }
        }
    }

    #[test]
    fn edges_point_strictly_downward() {
        let table = small_table();
        let net = build_network(&table, &geometry(), 2).unwrap();
        for e in net.all_edges() {
            let eu = table.energy_cm(e.upper).unwrap();
            let ed = table.energy_cm(e.lower).unwrap();
            assert!(ed < eu, "{} -> {} is not downward", e.upper, e.lower);
            assert!(e.tau_eff_s > 0.0);
        }
    }

    #[test]
    fn single_level_single_edge_decays_exponentially() {
        // hand-built chain: one hot level feeding one absorber
        let hot = LevelRef::new(10, 1).unwrap();
        let cold = LevelRef::new(5, 0).unwrap();
        let rate = 2.5e5;
        let net = CascadeNetwork {
            levels: vec![cold, hot],
            edges: vec![
                Vec::new(),
                vec![CascadeEdge {
                    upper: hot,
                    lower: cold,
                    tau_eff_s: 1.0 / rate,
                }],
            ],
            detection_floor: 8,
        };
        let pops = evolve(&net, hot, 1000.0, 0.0, 20e-6, 201).unwrap();
        for (k, t) in pops.times_s.iter().enumerate() {
            let expect = 1000.0 * (-rate * t).exp();
            assert_relative_eq!(pops.detected[k], expect, max_relative = 1e-6, epsilon = 1e-6);
            assert_relative_eq!(pops.total(k), 1000.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn rate_scaling_rescales_time() {
        let hot = LevelRef::new(10, 1).unwrap();
        let mid = LevelRef::new(8, 0).unwrap();
        let cold = LevelRef::new(5, 0).unwrap();
        let mk = |scale: f64| CascadeNetwork {
            levels: vec![cold, mid, hot],
            edges: vec![
                Vec::new(),
                vec![CascadeEdge {
                    upper: mid,
                    lower: cold,
                    tau_eff_s: 1.0 / (1.0e5 * scale),
                }],
                vec![CascadeEdge {
                    upper: hot,
                    lower: mid,
                    tau_eff_s: 1.0 / (3.0e5 * scale),
                }],
            ],
            detection_floor: 7,
        };
        let base = evolve(&mk(1.0), hot, 100.0, 0.0, 40e-6, 161).unwrap();
        let fast = evolve(&mk(2.0), hot, 100.0, 0.0, 20e-6, 161).unwrap();
        for k in 0..base.times_s.len() {
            assert_relative_eq!(
                base.detected[k],
                fast.detected[k],
                max_relative = 1e-8,
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn population_is_conserved_and_detected_monotone() {
        let table = small_table();
        let net = build_network(&table, &geometry(), 2).unwrap();
        let pops = evolve(&net, LevelRef::new(14, 1).unwrap(), 500.0, 0.0, 50e-6, 301).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..pops.times_s.len() {
            assert!((pops.total(k) - 500.0).abs() < 1e-9 * 500.0);
            assert!(pops.detected[k] <= prev + 1e-9);
            prev = pops.detected[k];
            for lv in &pops.populations[k] {
                assert!(*lv >= -1e-9);
            }
        }
    }

    #[test]
    fn initial_out_rate_is_the_sum_of_retained_edges() {
        let table = small_table();
        let net = build_network(&table, &geometry(), 2).unwrap();
        let top = LevelRef::new(14, 1).unwrap();
        let idx = net.level_index(top).unwrap();
        let expect: f64 = net.edges[idx].iter().map(|e| e.rate()).sum();
        assert_relative_eq!(net.out_rate(top), expect, max_relative = 1e-15);

        // early log-slope of the top-level population matches the retained sum
        let pops = evolve(&net, top, 1.0, 0.0, 1e-8, 2).unwrap();
        let p_top_end = pops.populations[1][idx];
        let slope = -(p_top_end.ln()) / 1e-8;
        assert_relative_eq!(slope, expect, max_relative = 1e-4);
    }
}
