use std::path::Path;
use std::process::{Command, Output};

fn vns(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vns")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL: &str = "N = 16\nvelocity = taylor_green\nvelocity_amplitude = 0.5\nparticle_profile = maxwellian_gaussian\n\
                     particles = 1000\nparticle_x_width = 0.8\nparticle_v_temp = 0.1\nt_end = 0.2\ndt = 0.02\n\
                     record_every = 1\nsnapshot_format = binary\n";

#[test]
fn run_writes_outputs_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.cfg", SMALL);
    let out = dir.path().join("out");
    let o = vns(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let brief: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(brief["records"], 11);
    for f in ["energy.csv", "summary.json", "final_u.vnsf", "final_particles.vnsp"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert!(!out.join("final_u.ndjson").exists());

    let csv = out.join("energy.csv");
    let o = vns(&["fit", csv.to_str().unwrap(), "--window", "0.01:0.2"]);
    assert_eq!(o.status.code(), Some(0));
    let fits: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(fits[0]["column"], "E0");
    assert_eq!(fits[1]["column"], "E1");
}

#[test]
fn configuration_problems_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = vns(&["run", dir.path().join("missing.cfg").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let cfg = write(dir.path(), "bad.cfg", "N = 16\nviscosity = 2\n");
    let o = vns(&["run", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("viscosity"));
    let cfg = write(dir.path(), "dup.cfg", "N = 16\nN = 32\n");
    assert_eq!(vns(&["run", &cfg]).status.code(), Some(2));
    let cfg = write(dir.path(), "steps.cfg", "N = 16\nt_end = 1\ndt = 0.3\n");
    assert_eq!(vns(&["run", &cfg]).status.code(), Some(2));
}

#[test]
fn fit_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(dir.path(), "s.csv", "t,E0\n1,1\n2,0.5\n");
    let o = vns(&["fit", &csv, "--window", "1:2"]);
    assert_eq!(o.status.code(), Some(1));
    let o = vns(&["fit", &csv, "--window", "3:1"]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn guard_trip_exits_three_with_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "blow.cfg",
        "N = 16\nvelocity = random\nvelocity_amplitude = 40\nvelocity_band = 6\ndt = 0.5\nt_end = 20\nrecord_every = 1\n",
    );
    let out = dir.path().join("out");
    let o = vns(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(out.join("last_good_u.vnsf").exists());
    assert!(out.join("energy.csv").exists());
}

#[test]
fn twin_picard_and_heat_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "twin.cfg", SMALL);
    let out = dir.path().join("twin");
    let o = vns(&["twin", &cfg, "--eps", "1e-3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("twin.csv").exists() && out.join("twin.json").exists());
    let o = vns(&["twin", &cfg, "--eps", "nan"]);
    assert_eq!(o.status.code(), Some(2));

    let cfg = write(dir.path(), "picard.cfg", "N = 16\ncutoff = 4\nvelocity = random\nvelocity_amplitude = 0.2\nvelocity_norm = l2\npicard_constant = 0.01\ndt = 0.01\n");
    let o = vns(&["picard", &cfg, "--out", dir.path().join("p").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["status"], "converged");

    let cfg = write(dir.path(), "heat.cfg", "N = 32\nL = 100\nheat_window = 1:20\n");
    let o = vns(&["heat-decay", &cfg, "--out", dir.path().join("h").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["expected_l2"], -1.0);
}
