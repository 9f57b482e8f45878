//! End-to-end contract tests for the `nemasim` binary: exit codes,
//! line-anchored diagnostics, output shapes, and determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

/// Small scenario that runs in milliseconds: twenty age cells, twenty days.
/// `OUTDIR` is substituted per test.
const SMALL: &str = "[parameters]
recruitment_m = 300
beta_max = 7e-5
a_opt = 5.5
sigma_p = 2.5
d_max = 1e-4
eta = 2.5
mu_alpha0 = 1
mu_exp = 3
mu_f = 0.0495
mu_i = 0.045
alpha = 100
e_reinfect = 0.0002
gamma = 1000
rho = 400
k_cap = 1000
k_d = 60
a_max = 20
b_floor = 100
theta_max = 35
a_star = 10
a_0 = 15

[solver]
h = 1
t_end = 20

[initial]
profile = spike-at-zero
value = 100
n_f0 = 10000
n_i0 = 0

[analysis]
thresholds = false
audit = false

[output]
dir = OUTDIR
";

fn preset(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../presets/{name}.cfg"))
}

fn write_cfg(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn small_cfg(dir: &Path, name: &str, edit: impl Fn(String) -> String) -> PathBuf {
    let out = dir.join(name.trim_end_matches(".cfg"));
    let text = edit(SMALL.replace("OUTDIR", out.to_str().unwrap()));
    write_cfg(dir, name, &text)
}

fn nemasim(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nemasim"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary should spawn")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process should exit normally")
}

#[test]
fn rejects_unknown_key_with_its_line() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_cfg(tmp.path(), "bad.cfg", |t| {
        t.replace("[solver]\n", "[solver]\nbogus = 1\n")
    });
    let line = fs::read_to_string(&cfg)
        .unwrap()
        .lines()
        .position(|l| l == "bogus = 1")
        .unwrap()
        + 1;
    let out = nemasim(&["simulate", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(exit_code(&out), 2, "{}", stderr_of(&out));
    let err = stderr_of(&out);
    assert!(err.contains(&format!("line {line}")), "{err}");
    assert!(err.contains("bogus"), "{err}");
}

#[test]
fn names_the_missing_parameter_key() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_cfg(tmp.path(), "missing.cfg", |t| t.replace("k_d = 60\n", ""));
    let out = nemasim(&["simulate", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(exit_code(&out), 2, "{}", stderr_of(&out));
    assert!(stderr_of(&out).contains("k_d"), "{}", stderr_of(&out));
}

#[test]
fn unreadable_config_is_an_input_error() {
    let tmp = TempDir::new().unwrap();
    let out = nemasim(&["simulate", "no-such-file.cfg"], tmp.path());
    assert_eq!(exit_code(&out), 2, "{}", stderr_of(&out));
    assert!(stderr_of(&out).contains("cannot read"), "{}", stderr_of(&out));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let out = nemasim(&["frobnicate"], tmp.path());
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn step_must_tile_the_age_span() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_cfg(tmp.path(), "badstep.cfg", |t| t.replace("h = 1\n", "h = 0.7\n"));
    let out = nemasim(&["simulate", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(exit_code(&out), 3, "{}", stderr_of(&out));
    assert!(stderr_of(&out).contains("does not tile"), "{}", stderr_of(&out));
}

#[test]
fn mortality_ordering_is_enforced() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_cfg(tmp.path(), "badmu.cfg", |t| {
        t.replace("mu_f = 0.0495\n", "mu_f = 0.01\n")
    });
    let out = nemasim(&["simulate", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(exit_code(&out), 3, "{}", stderr_of(&out));
    assert!(
        stderr_of(&out).contains("mu_f must exceed mu_i"),
        "{}",
        stderr_of(&out)
    );
}

#[test]
fn vanishing_inoculum_stops_at_the_biomass_floor() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_cfg(tmp.path(), "tiny.cfg", |t| {
        t.replace("value = 100\n", "value = 1e-15\n")
    });
    let out = nemasim(&["simulate", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(exit_code(&out), 4, "{}", stderr_of(&out));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_cfg(tmp.path(), "run.cfg", |t| t);
    let outdir = tmp.path().join("run");
    let files = ["timeseries.csv", "healthy.csv", "infected.csv", "production.csv"];

    let out = nemasim(&["simulate", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(exit_code(&out), 0, "{}", stderr_of(&out));
    let first: Vec<Vec<u8>> = files.iter().map(|f| fs::read(outdir.join(f)).unwrap()).collect();

    let out = nemasim(&["simulate", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(exit_code(&out), 0, "{}", stderr_of(&out));
    for (name, before) in files.iter().zip(&first) {
        let after = fs::read(outdir.join(name)).unwrap();
        assert_eq!(&after, before, "{name} changed between identical runs");
    }
}

#[test]
fn record_every_controls_the_row_counts() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_cfg(tmp.path(), "sparse.cfg", |t| {
        t.replace("[solver]\n", "[solver]\nrecord_every = 7\n")
    });
    let out = nemasim(&["simulate", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(exit_code(&out), 0, "{}", stderr_of(&out));

    let outdir = tmp.path().join("sparse");
    // Twenty steps kept every seventh level, plus the forced final level:
    // t = 0, 7, 14, 20, so a header and four rows.
    for name in ["timeseries.csv", "healthy.csv", "infected.csv"] {
        let text = fs::read_to_string(outdir.join(name)).unwrap();
        assert_eq!(text.lines().count(), 5, "{name}");
    }
    // The production series stays day-indexed regardless of recording.
    let text = fs::read_to_string(outdir.join("production.csv")).unwrap();
    assert_eq!(text.lines().count(), 22);
}

#[test]
fn initial_profile_file_round_trips_bitwise() {
    let tmp = TempDir::new().unwrap();
    let cells = 20usize;
    let s: Vec<f64> = (0..=cells)
        .map(|j| 100.0 + (j as f64 * 0.137).sin() * 25.0)
        .collect();
    let i: Vec<f64> = (0..=cells)
        .map(|j| (j as f64 * 0.311).cos().abs() * 3.0)
        .collect();
    let mut table = String::from("age,S,I\n");
    for j in 0..=cells {
        table.push_str(&format!("{},{},{}\n", j, s[j], i[j]));
    }
    let init_path = tmp.path().join("fields.csv");
    fs::write(&init_path, table).unwrap();

    let cfg = small_cfg(tmp.path(), "fromfile.cfg", |t| {
        t.replace("t_end = 20\n", "t_end = 1\n").replace(
            "profile = spike-at-zero\nvalue = 100\n",
            &format!("profile = file\npath = {}\n", init_path.display()),
        )
    });
    let out = nemasim(&["simulate", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(exit_code(&out), 0, "{}", stderr_of(&out));

    let outdir = tmp.path().join("fromfile");
    for (name, expected) in [("healthy.csv", &s), ("infected.csv", &i)] {
        let text = fs::read_to_string(outdir.join(name)).unwrap();
        let level0 = text.lines().nth(1).unwrap();
        let parsed: Vec<f64> = level0.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(parsed.len(), cells + 1, "{name}");
        for j in 0..=cells {
            assert_eq!(
                parsed[j].to_bits(),
                expected[j].to_bits(),
                "{name} cell {j} drifted through the round trip"
            );
        }
    }
}

#[test]
fn zero_control_matches_absent_control() {
    let tmp = TempDir::new().unwrap();
    let plain = small_cfg(tmp.path(), "plain.cfg", |t| t);
    let zeroed = small_cfg(tmp.path(), "zeroed.cfg", |t| {
        t.replace(
            "[initial]\n",
            "[control]\nu_max = 0\nperiod = 16\npulse_width = 1\n\n[initial]\n",
        )
    });
    for cfg in [&plain, &zeroed] {
        let out = nemasim(&["simulate", cfg.to_str().unwrap()], tmp.path());
        assert_eq!(exit_code(&out), 0, "{}", stderr_of(&out));
    }
    for name in ["timeseries.csv", "production.csv", "healthy.csv", "infected.csv"] {
        let a = fs::read(tmp.path().join("plain").join(name)).unwrap();
        let b = fs::read(tmp.path().join("zeroed").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs under an all-zero schedule");
    }
}

#[test]
fn analyze_reports_the_threshold_verdicts() {
    let tmp = TempDir::new().unwrap();

    let out = nemasim(&["analyze", preset("dfe").to_str().unwrap()], tmp.path());
    assert_eq!(exit_code(&out), 0, "{}", stderr_of(&out));
    let text = fs::read_to_string(tmp.path().join("out/dfe/thresholds.txt")).unwrap();
    assert!(text.contains("verdict = stable"), "{text}");
    let n_basic: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("n_basic = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((0.11..=0.15).contains(&n_basic), "{n_basic}");

    let out = nemasim(&["analyze", preset("endemic").to_str().unwrap()], tmp.path());
    assert_eq!(exit_code(&out), 0, "{}", stderr_of(&out));
    let text = fs::read_to_string(tmp.path().join("out/endemic/thresholds.txt")).unwrap();
    assert!(text.contains("verdict = unstable"), "{text}");
}

#[test]
fn verify_convergence_exits_clean_and_writes_the_ladder() {
    let tmp = TempDir::new().unwrap();
    let out = nemasim(
        &["verify", "convergence", preset("endemic").to_str().unwrap()],
        tmp.path(),
    );
    assert_eq!(exit_code(&out), 0, "{}", stderr_of(&out));
    let text = fs::read_to_string(tmp.path().join("out/endemic/convergence.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5, "{text}");
    assert_eq!(lines[0], "h,error_inf,error_l1");
    for row in &lines[1..] {
        assert_eq!(row.split(',').count(), 3, "{row}");
    }
}

#[test]
fn compare_lays_out_loss_and_gain_columns() {
    let tmp = TempDir::new().unwrap();
    let baseline = small_cfg(tmp.path(), "clean.cfg", |t| t.replace("n_f0 = 10000\n", "n_f0 = 0\n"));
    let infested = small_cfg(tmp.path(), "infested.cfg", |t| t);
    let treated = small_cfg(tmp.path(), "treated.cfg", |t| {
        t.replace(
            "[initial]\n",
            "[control]\nu_max = 2\nperiod = 16\npulse_width = 1\n\n[initial]\n",
        )
    });

    let out = Command::new(env!("CARGO_BIN_EXE_nemasim"))
        .args([
            "compare",
            baseline.to_str().unwrap(),
            infested.to_str().unwrap(),
            treated.to_str().unwrap(),
        ])
        .env("NEMASIM_THREADS", "2")
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "{}", stderr_of(&out));

    let text = fs::read_to_string(tmp.path().join("clean/comparison.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4, "{text}");
    assert_eq!(
        lines[0],
        "scenario,final_cumulative,loss_vs_baseline_pct,gain_over_baseline_pct,gain_recovered_loss_pct,gain_over_uncontrolled_pct"
    );

    let rows: Vec<Vec<&str>> = lines[1..].iter().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0][0], "clean");
    assert_eq!(rows[1][0], "infested");
    assert_eq!(rows[2][0], "treated");
    for row in &rows {
        assert_eq!(row.len(), 6);
        assert!(row[1].parse::<f64>().unwrap() > 0.0, "production should be positive");
    }
    // Baseline loses nothing against itself; gains are defined only for the
    // controlled scenario.
    assert_eq!(rows[0][2].parse::<f64>().unwrap(), 0.0);
    assert!(rows[0][3].is_empty() && rows[0][4].is_empty() && rows[0][5].is_empty());
    assert!(rows[1][2].parse::<f64>().unwrap() >= 0.0);
    assert!(rows[1][3].is_empty() && rows[1][4].is_empty() && rows[1][5].is_empty());
    for cell in &rows[2][3..] {
        cell.parse::<f64>().expect("controlled row should carry all gain columns");
    }
}

#[test]
fn compare_rejects_mismatched_grids() {
    let tmp = TempDir::new().unwrap();
    let baseline = small_cfg(tmp.path(), "base.cfg", |t| t);
    let other = small_cfg(tmp.path(), "coarse.cfg", |t| {
        t.replace("h = 1\n", "h = 2\n")
    });
    let out = nemasim(
        &["compare", baseline.to_str().unwrap(), other.to_str().unwrap()],
        tmp.path(),
    );
    assert_eq!(exit_code(&out), 3, "{}", stderr_of(&out));
}
