//! Command pipelines: channel tables, trajectories, lifetime tables, the
//! cascade observable and the parameter map, all emitted as deterministic
//! CSV (comma separator, '.' decimals, header row, LF endings). The run
//! manifest is the only file that carries a clock.

use crate::atomic::{LevelRef, QuantumDefectTable};
use crate::cascade::{build_network, evolve, CascadeNetwork};
use crate::channels::{ChannelBuilder, TransitionChannel};
use crate::config::RunConfig;
use crate::dynamics::{ChannelParameters, SampleGeometry, TwoAtomState};
use crate::error::{Error, Result};
use crate::integrate::{
    classify, effective_decay_time, integrate_channel, peak_time, total_lifetime, Classification,
    IntegrateOptions, Trajectory,
};
use crate::map::{boundary_flip_count, critical_curve, map_channels, ChannelPlacement};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

fn num(v: f64) -> String {
    format!("{v:.12e}")
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

/// Files and human-readable notes produced by one command.
#[derive(Debug, Default)]
pub struct CommandOutput {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
    pub summary: Vec<String>,
}

impl CommandOutput {
    fn merge(&mut self, other: CommandOutput) {
        self.files.extend(other.files);
        self.warnings.extend(other.warnings);
        self.summary.extend(other.summary);
    }
}

/// Level energies and the channel table out of the initial level.
pub fn cmd_levels(cfg: &RunConfig) -> Result<CommandOutput> {
    let table = cfg.defect_table()?;
    let mut out = CommandOutput::default();

    let mut text = String::from("n,l,series,n_star,energy_cm1\n");
    for lv in table.levels() {
        let ns = table.effective_n(lv)?;
        let e = table.energy_cm(lv)?;
        writeln!(text, "{},{},{},{},{}", lv.n, lv.l, lv.series_letter(), num(ns), num(e)).ok();
    }
    out.files.push(write_file(&cfg.output_dir, "levels.csv", &text)?);

    let initial = cfg.initial_level()?;
    let mut builder = ChannelBuilder::new(&table);
    let channels = builder.downward_channels(initial)?;
    let mut text = String::from("n_u,l_u,n_d,l_d,lambda_m,omega_rad_s,radial_au,A_s\n");
    for ch in &channels {
        writeln!(
            text,
            "{},{},{},{},{},{},{},{}",
            ch.upper.n,
            ch.upper.l,
            ch.lower.n,
            ch.lower.l,
            num(ch.wavelength_m),
            num(ch.angular_frequency),
            num(ch.radial_au),
            num(ch.einstein_a)
        )
        .ok();
    }
    out.files.push(write_file(&cfg.output_dir, "channels.csv", &text)?);
    out.summary.push(format!(
        "levels: {} levels, {} channels out of {initial}",
        table.levels().len(),
        channels.len()
    ));

    // diagnostic: exchange splitting for the nearest-neighbour pair at the
    // mean interparticle spacing
    let density = cfg.density_m3();
    if density > 0.0 {
        let longest = channels
            .iter()
            .filter(|c| c.dipole_cm > 0.0)
            .max_by(|a, b| a.wavelength_m.partial_cmp(&b.wavelength_m).unwrap());
        if let Some(ch) = longest {
            let spacing = density.powf(-1.0 / 3.0);
            let omega = crate::channels::exchange_splitting(ch.dipole_cm, spacing)?;
            out.summary.push(format!(
                "exchange splitting of the {}->{} pair at mean spacing {spacing:.2e} m: Omega = {omega:.3e} rad/s",
                ch.upper, ch.lower
            ));
        }
    }
    Ok(out)
}

/// Integrates one channel and returns the trajectory plus its channel data.
pub fn channel_trajectory(
    cfg: &RunConfig,
    upper: LevelRef,
    lower: LevelRef,
) -> Result<(TransitionChannel, Trajectory)> {
    let table = cfg.defect_table()?;
    let geometry = cfg.geometry()?;
    let mut builder = ChannelBuilder::new(&table);
    let ch = builder.channel(upper, lower)?;
    let params = ChannelParameters::new(ch.einstein_a, ch.wavelength_m, &geometry)?;
    let opts = IntegrateOptions {
        rtol: cfg.dynamics.rtol,
        atol: cfg.dynamics.atol,
        ..Default::default()
    };
    let traj = integrate_channel(
        &params,
        &geometry,
        &TwoAtomState::fully_inverted(),
        cfg.dynamics.tau_end / ch.einstein_a,
        &opts,
    )?;
    Ok((ch, traj))
}

/// Trajectory, classification record and plot-ready intensity file for one
/// channel.
pub fn cmd_channel(cfg: &RunConfig, upper: LevelRef, lower: LevelRef) -> Result<CommandOutput> {
    let (_, traj) = channel_trajectory(cfg, upper, lower)?;
    let mut out = CommandOutput::default();
    let tag = format!("{upper}_{lower}");

    let mut text =
        String::from("t_s,rho_ee,m,rho_egge,Gamma_s,Gammabar_s,zeta,intensity_per_s\n");
    for (k, s) in traj.samples.iter().enumerate() {
        writeln!(
            text,
            "{},{},{},{},{},{},{},{}",
            num(traj.time_s(k)),
            num(s.rho_ee),
            num(s.m),
            num(s.rho_egge),
            num(s.g * traj.params.gamma),
            num(s.gbar * traj.params.gamma),
            num(s.zeta),
            num(traj.intensity_per_s(k))
        )
        .ok();
    }
    out.files
        .push(write_file(&cfg.output_dir, &format!("trajectory_{tag}.csv"), &text)?);

    let mut text = String::from("t_s,intensity_per_s\n");
    for (k, _) in traj.samples.iter().enumerate() {
        writeln!(text, "{},{}", num(traj.time_s(k)), num(traj.intensity_per_s(k))).ok();
    }
    out.files
        .push(write_file(&cfg.output_dir, &format!("intensity_{tag}.csv"), &text)?);

    let class = classify(&traj)?;
    let tau_eff = effective_decay_time(&traj)?;
    let record = format!(
        "{upper}->{lower},{class},{},{}\n",
        num(peak_time(&traj)),
        num(tau_eff)
    );
    out.files.push(write_file(
        &cfg.output_dir,
        &format!("classification_{tag}.txt"),
        &record,
    )?);
    if traj.diagnostics.m_excursion {
        out.warnings
            .push(format!("{upper}->{lower}: |m| exceeded 1 + 1e-6 (model-breakdown diagnostic)"));
    }
    out.summary
        .push(format!("channel {upper}->{lower}: {class}, tau_eff = {tau_eff:.3e} s"));
    Ok(out)
}

/// One row of the lifetime table.
#[derive(Debug, Clone)]
pub struct ChannelLifetime {
    pub channel: TransitionChannel,
    pub cooperativity: f64,
    pub sample_size: f64,
    pub tau_vacuum_s: f64,
    pub tau_dense_s: f64,
    pub class: Classification,
    pub m_excursion: bool,
}

/// Vacuum and dense effective decay times for every channel out of `initial`.
pub fn lifetime_table(
    table: &QuantumDefectTable,
    geometry: &SampleGeometry,
    initial: LevelRef,
    opts: &IntegrateOptions,
    tau_end: f64,
) -> Result<Vec<ChannelLifetime>> {
    let mut builder = ChannelBuilder::new(table);
    let channels = builder.downward_channels(initial)?;
    channels
        .par_iter()
        .map(|ch| -> Result<ChannelLifetime> {
            let params = ChannelParameters::new(ch.einstein_a, ch.wavelength_m, geometry)?;
            let traj = integrate_channel(
                &params,
                geometry,
                &TwoAtomState::fully_inverted(),
                tau_end / ch.einstein_a,
                opts,
            )?;
            Ok(ChannelLifetime {
                channel: *ch,
                cooperativity: params.cooperativity,
                sample_size: params.sample_size,
                tau_vacuum_s: 1.0 / ch.einstein_a,
                tau_dense_s: effective_decay_time(&traj)?,
                class: classify(&traj)?,
                m_excursion: traj.diagnostics.m_excursion,
            })
        })
        .collect()
}

/// Harmonic totals over a lifetime table: (all channels, ns-series subset).
pub fn lifetime_totals(rows: &[ChannelLifetime], dense: bool) -> Result<(f64, f64)> {
    let pick = |r: &ChannelLifetime| if dense { r.tau_dense_s } else { r.tau_vacuum_s };
    let all: Vec<f64> = rows.iter().map(&pick).collect();
    let ns: Vec<f64> = rows
        .iter()
        .filter(|r| r.channel.lower.l == 0)
        .map(&pick)
        .collect();
    Ok((total_lifetime(&all)?, total_lifetime(&ns)?))
}

/// Per-channel dense and vacuum lifetimes plus both harmonic totals.
pub fn cmd_lifetimes(cfg: &RunConfig) -> Result<CommandOutput> {
    let table = cfg.defect_table()?;
    let geometry = cfg.geometry()?;
    let initial = cfg.initial_level()?;
    let opts = IntegrateOptions {
        rtol: cfg.dynamics.rtol,
        atol: cfg.dynamics.atol,
        ..Default::default()
    };
    let rows = lifetime_table(&table, &geometry, initial, &opts, cfg.dynamics.tau_end)?;
    let mut out = CommandOutput::default();

    let mut text =
        String::from("n_u,l_u,n_d,l_d,lambda_m,C,rho,tau_vacuum_s,tau_dense_s,ratio,class\n");
    for r in &rows {
        writeln!(
            text,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.channel.upper.n,
            r.channel.upper.l,
            r.channel.lower.n,
            r.channel.lower.l,
            num(r.channel.wavelength_m),
            num(r.cooperativity),
            num(r.sample_size),
            num(r.tau_vacuum_s),
            num(r.tau_dense_s),
            num(r.tau_vacuum_s / r.tau_dense_s),
            r.class
        )
        .ok();
    }
    out.files.push(write_file(&cfg.output_dir, "lifetimes.csv", &text)?);

    let (vac_all, vac_ns) = lifetime_totals(&rows, false)?;
    let (dense_all, dense_ns) = lifetime_totals(&rows, true)?;
    let mut text = String::new();
    writeln!(text, "tau_total_vacuum_all_s,{}", num(vac_all)).ok();
    writeln!(text, "tau_total_vacuum_ns_s,{}", num(vac_ns)).ok();
    writeln!(text, "tau_total_dense_all_s,{}", num(dense_all)).ok();
    writeln!(text, "tau_total_dense_ns_s,{}", num(dense_ns)).ok();
    out.files
        .push(write_file(&cfg.output_dir, "lifetime_totals.csv", &text)?);
    out.summary.push(format!(
        "lifetimes out of {initial}: vacuum total {:.1} us (all channels), dense total {:.2} us (ns set {:.2} us)",
        vac_all * 1e6,
        dense_all * 1e6,
        dense_ns * 1e6
    ));
    if rows.iter().any(|r| r.m_excursion) {
        out.warnings.push("some channels recorded |m| > 1 + 1e-6".into());
    }
    Ok(out)
}

/// Truncates a network built with a larger cap down to `cap` edges per
/// level (edges are stored fastest-first).
pub fn truncate_network(network: &CascadeNetwork, cap: usize) -> CascadeNetwork {
    let mut out = network.clone();
    for edges in &mut out.edges {
        edges.truncate(cap);
    }
    out
}

/// Network construction plus the detected-signal evolution, for one cap.
pub fn cascade_detected(
    cfg: &RunConfig,
    cap: usize,
) -> Result<(CascadeNetwork, crate::cascade::PopulationTrajectory)> {
    let table = cfg.defect_table()?;
    let geometry = cfg.geometry()?;
    let mut network = build_network(&table, &geometry, cap)?;
    network.detection_floor = cfg.cascade.detection_floor;
    let pops = evolve_window(cfg, &network)?;
    Ok((network, pops))
}

fn evolve_window(
    cfg: &RunConfig,
    network: &CascadeNetwork,
) -> Result<crate::cascade::PopulationTrajectory> {
    evolve(
        network,
        cfg.initial_level()?,
        cfg.cascade.n0_atoms,
        cfg.cascade.t0_us * 1e-6,
        cfg.cascade.t_end_us * 1e-6,
        cfg.cascade.grid_points,
    )
}

/// Detected-signal file, edge list and the cap-sensitivity note.
pub fn cmd_cascade(cfg: &RunConfig) -> Result<CommandOutput> {
    // one network build at cap + 1 serves both curves
    let (network_next, pops_next) = cascade_detected(cfg, cfg.cascade.cap + 1)?;
    let network = truncate_network(&network_next, cfg.cascade.cap);
    let pops = evolve_window(cfg, &network)?;
    let mut out = CommandOutput::default();

    let mut text = String::from("t_us,detected_atoms\n");
    for (k, t) in pops.times_s.iter().enumerate() {
        writeln!(text, "{},{}", num(t * 1e6), num(pops.detected[k])).ok();
    }
    out.files
        .push(write_file(&cfg.output_dir, "cascade_detected.csv", &text)?);

    let mut text = String::from("upper,lower,tau_eff_s\n");
    for e in network.all_edges() {
        writeln!(text, "{},{},{}", e.upper, e.lower, num(e.tau_eff_s)).ok();
    }
    out.files
        .push(write_file(&cfg.output_dir, "cascade_edges.csv", &text)?);

    let mut dev: f64 = 0.0;
    for k in 0..pops.detected.len().min(pops_next.detected.len()) {
        let base = pops.detected[k].max(1e-9);
        dev = dev.max((pops.detected[k] - pops_next.detected[k]).abs() / base);
    }
    let efold = pops.efold_time();
    let mut text = String::new();
    writeln!(
        text,
        "cap_deviation,cap={} vs cap={},max_relative,{}",
        cfg.cascade.cap,
        cfg.cascade.cap + 1,
        num(dev)
    )
    .ok();
    match efold {
        Some(t) => {
            writeln!(text, "efold_time_us,{}", num((t - cfg.cascade.t0_us * 1e-6) * 1e6)).ok()
        }
        None => writeln!(text, "efold_time_us,not-reached").ok(),
    };
    out.files
        .push(write_file(&cfg.output_dir, "cascade_cap_note.csv", &text)?);
    out.summary.push(format!(
        "cascade: detected starts at {:.0} atoms, cap {} vs {} deviates {:.2}%",
        pops.detected[0],
        cfg.cascade.cap,
        cfg.cascade.cap + 1,
        dev * 100.0
    ));
    Ok(out)
}

/// Critical curve, channel placement and the minimal superradiant target.
pub fn cmd_map(cfg: &RunConfig) -> Result<CommandOutput> {
    let table = cfg.defect_table()?;
    let geometry = cfg.geometry()?;
    let initial = cfg.initial_level()?;
    let mut out = CommandOutput::default();

    let curve = critical_curve(
        cfg.map.rho_min,
        cfg.map.rho_max,
        cfg.map.grid_points,
        1.0,
        cfg.map.bisect_tol,
    )?;
    let mut text = String::from("rho,C_crit\n");
    for (s, c) in &curve.points {
        writeln!(text, "{},{}", num(*s), num(*c)).ok();
    }
    out.files.push(write_file(&cfg.output_dir, "map_curve.csv", &text)?);
    if !curve.open_above.is_empty() {
        out.warnings.push(format!(
            "no superradiance below C = 1e12 at {} grid sizes",
            curve.open_above.len()
        ));
    }

    let mut builder = ChannelBuilder::new(&table);
    let channels = builder.downward_channels(initial)?;
    let placements = map_channels(&channels, &geometry)?;
    let mut text = String::from("n_upper,l_upper,n_lower,l_lower,C,rho,class\n");
    for p in &placements {
        writeln!(
            text,
            "{},{},{},{},{},{},{}",
            p.upper.n,
            p.upper.l,
            p.lower.n,
            p.lower.l,
            num(p.cooperativity),
            num(p.sample_size),
            p.class
        )
        .ok();
    }
    out.files
        .push(write_file(&cfg.output_dir, "map_channels.csv", &text)?);

    // boundary sanity: the classification flips exactly once around each
    // located point (subsampled grid to keep the scan cheap)
    let mut flips_ok = true;
    for (s, c) in curve.points.iter().step_by(8) {
        if boundary_flip_count(*s, *c, 1.0)? != 1 {
            flips_ok = false;
        }
    }
    let min_sr = minimal_superradiant_ns(&placements);
    let mut text = String::new();
    writeln!(
        text,
        "boundary_single_flip,{}",
        if flips_ok { "pass" } else { "fail" }
    )
    .ok();
    match min_sr {
        Some(n) => writeln!(text, "minimal_superradiant_ns,{n}").ok(),
        None => writeln!(text, "minimal_superradiant_ns,none").ok(),
    };
    out.files
        .push(write_file(&cfg.output_dir, "map_summary.csv", &text)?);
    out.summary.push(match min_sr {
        Some(n) => format!("map: superradiance into ns targets from n = {n} upward"),
        None => "map: no superradiant ns target at this density".into(),
    });
    Ok(out)
}

/// Smallest n among superradiant ns targets such that every ns channel at or
/// above it is superradiant.
pub fn minimal_superradiant_ns(placements: &[ChannelPlacement]) -> Option<u32> {
    let mut ns: Vec<(u32, Classification)> = placements
        .iter()
        .filter(|p| p.lower.l == 0)
        .map(|p| (p.lower.n, p.class))
        .collect();
    ns.sort_by_key(|(n, _)| *n);
    let mut min = None;
    for (n, class) in ns.iter().rev() {
        if *class == Classification::Superradiant {
            min = Some(*n);
        } else {
            break;
        }
    }
    min
}

/// Runs every pipeline with shared configuration.
pub fn run_all(cfg: &RunConfig) -> Result<CommandOutput> {
    let mut out = CommandOutput::default();
    out.merge(cmd_levels(cfg)?);
    let initial = cfg.initial_level()?;
    let table = cfg.defect_table()?;
    // flagship channels: nearest ns neighbour and the optical 6s target
    let mut builder = ChannelBuilder::new(&table);
    for lower in builder
        .downward_channels(initial)?
        .iter()
        .filter(|c| c.lower.l == 0)
        .map(|c| c.lower)
        .filter(|lv| lv.n == initial.n - 1 || lv.n == 6)
    {
        out.merge(cmd_channel(cfg, initial, lower)?);
    }
    out.merge(cmd_lifetimes(cfg)?);
    out.merge(cmd_cascade(cfg)?);
    out.merge(cmd_map(cfg)?);
    Ok(out)
}

/// Run manifest: config snapshot, outputs, wall clock and warnings.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub density_cm3: f64,
    pub density_m3: f64,
    pub config: RunConfig,
    pub outputs: Vec<String>,
    pub duration_ms: u128,
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, cfg: &RunConfig, out: &CommandOutput, duration_ms: u128) -> Self {
        RunManifest {
            tool: "rydsr".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            density_cm3: cfg.sample.density_cm3,
            density_m3: cfg.density_m3(),
            config: cfg.clone(),
            outputs: out.files.iter().map(|p| p.display().to_string()).collect(),
            warnings: out.warnings.clone(),
            duration_ms,
        }
    }

    /// Verifies the output contract and writes manifest.json.
    pub fn write(&self, cfg: &RunConfig, out: &CommandOutput) -> Result<PathBuf> {
        for f in &out.files {
            let meta = fs::metadata(f)
                .map_err(|_| Error::Numerical(format!("missing output file {f:?}")))?;
            if meta.len() == 0 {
                return Err(Error::Numerical(format!("empty output file {f:?}")));
            }
        }
        let path = cfg.output_dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Numerical(format!("manifest serialization: {e}")))?;
        fs::write(&path, text)?;
        Ok(path)
    }
}
