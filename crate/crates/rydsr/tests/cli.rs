//! End-to-end checks of the command-line contract: determinism, unit
//! round-trips and exit codes.

use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rydsr"))
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap_or_else(|_| panic!("missing {name}"))
}

#[test]
fn identical_configs_give_byte_identical_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let status = bin().args(["levels", "--out"]).arg(dir).status().unwrap();
        assert!(status.success());
    }
    assert_eq!(read(&a, "levels.csv"), read(&b, "levels.csv"));
    assert_eq!(read(&a, "channels.csv"), read(&b, "channels.csv"));

    // LF endings and a header row
    let text = String::from_utf8(read(&a, "channels.csv")).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.starts_with("n_u,l_u,n_d,l_d,lambda_m,omega_rad_s,radial_au,A_s\n"));
    // flagship channel present
    assert!(text.lines().any(|l| l.starts_with("40,1,39,0,")));
}

#[test]
fn worker_count_does_not_change_results() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("w1"), tmp.path().join("w4"));
    for (dir, workers) in [(&a, "1"), (&b, "4")] {
        let status = bin()
            .args(["lifetimes", "--workers", workers, "--out"])
            .arg(dir)
            .status()
            .unwrap();
        assert!(status.success());
    }
    assert_eq!(read(&a, "lifetimes.csv"), read(&b, "lifetimes.csv"));
    assert_eq!(read(&a, "lifetime_totals.csv"), read(&b, "lifetime_totals.csv"));
}

#[test]
fn manifest_reports_exact_unit_conversion_and_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("out");
    let status = bin().args(["levels", "--out"]).arg(&dir).status().unwrap();
    assert!(status.success());
    let manifest: serde_json::Value =
        serde_json::from_slice(&read(&dir, "manifest.json")).unwrap();
    let cm3 = manifest["density_cm3"].as_f64().unwrap();
    let m3 = manifest["density_m3"].as_f64().unwrap();
    assert_eq!(m3, cm3 * 1e6);
    for f in manifest["outputs"].as_array().unwrap() {
        let path = Path::new(f.as_str().unwrap());
        assert!(path.exists(), "listed output {path:?} missing");
        assert!(fs::metadata(path).unwrap().len() > 0);
    }
}

#[test]
fn bad_inputs_exit_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    // unknown level label
    let status = bin()
        .args(["channel", "40x", "39s", "--out"])
        .arg(tmp.path().join("x"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // invalid config: both diameter and atom count
    let cfg = tmp.path().join("bad.toml");
    fs::write(
        &cfg,
        "workers = 0\noutput_dir = \"out\"\n\n[sample]\ndensity_cm3 = 5e8\ndiameter_m = 1.7e-4\natom_count = 1400.0\n\n[levels]\ninitial = \"40p\"\nn_min = 5\nn_max = 40\n\n[cascade]\ndetection_floor = 27\nn0_atoms = 1400.0\nt0_us = 6.0\nt_end_us = 36.0\ncap = 2\ngrid_points = 601\n\n[dynamics]\nrtol = 1e-8\natol = 1e-12\ntau_end = 12.0\n\n[map]\nrho_min = 1e-2\nrho_max = 1e3\ngrid_points = 40\nbisect_tol = 1e-2\n",
    )
    .unwrap();
    let status = bin()
        .args(["levels", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(tmp.path().join("y"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn zero_density_channel_reports_the_vacuum_lifetime() {
    let tmp = tempfile::tempdir().unwrap();
    // zero density leaves the diameter as the only geometry input
    let cfg = tmp.path().join("dilute.toml");
    fs::write(
        &cfg,
        "workers = 0\noutput_dir = \"out\"\n\n[sample]\ndensity_cm3 = 5e8\ndiameter_m = 1.74855e-4\n\n[levels]\ninitial = \"40p\"\nn_min = 5\nn_max = 40\n\n[cascade]\ndetection_floor = 27\nn0_atoms = 1400.0\nt0_us = 6.0\nt_end_us = 36.0\ncap = 2\ngrid_points = 601\n\n[dynamics]\nrtol = 1e-8\natol = 1e-12\ntau_end = 12.0\n\n[map]\nrho_min = 1e-2\nrho_max = 1e3\ngrid_points = 40\nbisect_tol = 1e-2\n",
    )
    .unwrap();
    let dir = tmp.path().join("vac");
    let status = bin()
        .args(["channel", "40p", "39s", "--density-cm3", "0", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    let record = String::from_utf8(read(&dir, "classification_40p_39s.txt")).unwrap();
    let fields: Vec<&str> = record.trim().split(',').collect();
    assert_eq!(fields[1], "ASE");
    let tau: f64 = fields[3].parse().unwrap();
    // vacuum Einstein A of the 40p -> 39s channel (frozen)
    let a = 6.2461522;
    assert!(
        (tau * a - 1.0).abs() < 1e-4,
        "tau_eff = {tau} vs 1/A = {}",
        1.0 / a
    );
}

#[test]
fn zero_defect_override_gives_hydrogenic_energies() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("hyd.toml");
    fs::write(
        &cfg,
        "workers = 0\noutput_dir = \"out\"\n\n[sample]\ndensity_cm3 = 5e8\natom_count = 1400.0\n\n[levels]\ninitial = \"40p\"\nn_min = 5\nn_max = 40\n\n[levels.defects]\ns = 0.0\np = 0.0\nd = 0.0\nf = 0.0\n\n[cascade]\ndetection_floor = 27\nn0_atoms = 1400.0\nt0_us = 6.0\nt_end_us = 36.0\ncap = 2\ngrid_points = 601\n\n[dynamics]\nrtol = 1e-8\natol = 1e-12\ntau_end = 12.0\n\n[map]\nrho_min = 1e-2\nrho_max = 1e3\ngrid_points = 40\nbisect_tol = 1e-2\n",
    )
    .unwrap();
    let dir = tmp.path().join("out");
    let status = bin()
        .args(["levels", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    let text = String::from_utf8(read(&dir, "levels.csv")).unwrap();
    let rydberg = 109736.605;
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let n: f64 = f[0].parse().unwrap();
        let e: f64 = f[4].parse().unwrap();
        let hydrogenic = -rydberg / (n * n);
        assert!(
            (e / hydrogenic - 1.0).abs() < 1e-9,
            "level {} energy {e} vs hydrogenic {hydrogenic}",
            f[0]
        );
    }
}

#[test]
fn cascade_with_floor_five_detects_everything() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("floor5.toml");
    fs::write(
        &cfg,
        "workers = 0\noutput_dir = \"out\"\n\n[sample]\ndensity_cm3 = 5e8\natom_count = 1400.0\n\n[levels]\ninitial = \"14p\"\nn_min = 5\nn_max = 14\n\n[cascade]\ndetection_floor = 5\nn0_atoms = 1400.0\nt0_us = 6.0\nt_end_us = 36.0\ncap = 2\ngrid_points = 61\n\n[dynamics]\nrtol = 1e-8\natol = 1e-12\ntau_end = 12.0\n\n[map]\nrho_min = 1e-2\nrho_max = 1e3\ngrid_points = 40\nbisect_tol = 1e-2\n",
    )
    .unwrap();
    let dir = tmp.path().join("out");
    let status = bin()
        .args(["cascade", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    let text = String::from_utf8(read(&dir, "cascade_detected.csv")).unwrap();
    for line in text.lines().skip(1) {
        let detected: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(
            (detected - 1400.0).abs() < 1e-6,
            "population left the window: {detected}"
        );
    }
}

#[test]
fn range_restriction_filters_channels() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("narrow.toml");
    // n restricted to [38, 40]: channels out of 40p only reach 38..40
    fs::write(
        &cfg,
        "workers = 0\noutput_dir = \"out\"\n\n[sample]\ndensity_cm3 = 5e8\natom_count = 1400.0\n\n[levels]\ninitial = \"40p\"\nn_min = 38\nn_max = 40\n\n[cascade]\ndetection_floor = 27\nn0_atoms = 1400.0\nt0_us = 6.0\nt_end_us = 36.0\ncap = 2\ngrid_points = 61\n\n[dynamics]\nrtol = 1e-8\natol = 1e-12\ntau_end = 12.0\n\n[map]\nrho_min = 1e-2\nrho_max = 1e3\ngrid_points = 40\nbisect_tol = 1e-2\n",
    )
    .unwrap();
    let dir = tmp.path().join("out");
    let status = bin()
        .args(["levels", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    let text = String::from_utf8(read(&dir, "channels.csv")).unwrap();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[0], "40");
        let nd: u32 = f[2].parse().unwrap();
        assert!((38..=40).contains(&nd), "target n = {nd} outside range");
    }
}
