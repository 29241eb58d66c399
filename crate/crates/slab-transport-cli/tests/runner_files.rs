//! Process-level checks of the binary: exit codes, artifact schemas, and
//! error reporting, all on coarse grids so each spawn stays sub-second.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn run_cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slab-transport"))
        .args(args)
        .output()
        .expect("binary spawns")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("slab-cli-{tag}"));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

/// Every data line of a CSV parses into finite numbers where expected.
fn check_csv(path: &Path, schema: &str, columns: usize, numeric_from: usize) -> usize {
    let text = std::fs::read_to_string(path).expect("csv readable");
    let mut lines = text.lines();
    assert_eq!(
        lines.next().expect("schema line"),
        format!("# schema: {schema}"),
        "{}",
        path.display()
    );
    let header = lines.next().expect("header line");
    assert_eq!(header.split(',').count(), columns, "{header}");
    let mut rows = 0;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), columns, "{line}");
        for field in &fields[numeric_from..] {
            let value: f64 = field.parse().expect("numeric field");
            assert!(value.is_finite(), "{line}");
        }
        rows += 1;
    }
    rows
}

#[test]
fn help_and_config_errors_use_their_exit_codes() {
    let help = run_cli(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    let text = String::from_utf8_lossy(&help.stdout);
    for flag in ["--case", "--eps", "--out", "--plots", "--config", "--threads"] {
        assert!(text.contains(flag), "usage misses {flag}");
    }

    let unknown = run_cli(&["--frobnicate"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("unknown flag"));

    let bad_eps = run_cli(&["--eps", "7/3"]);
    assert_eq!(bad_eps.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_eps.stderr).contains("outside (0, 1)"));

    let missing = run_cli(&["--config", "/nonexistent/run.conf"]);
    assert_eq!(missing.status.code(), Some(2));

    let dir = temp_dir("badkey");
    std::fs::create_dir_all(&dir).unwrap();
    let conf = dir.join("run.conf");
    std::fs::write(&conf, "eps = 1/4\nkinetic.mystery = 3\n").unwrap();
    let bad_key = run_cli(&["--config", conf.to_str().unwrap()]);
    assert_eq!(bad_key.status.code(), Some(2));
    let err = String::from_utf8_lossy(&bad_key.stderr);
    assert!(err.contains("line 2"), "{err}");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn a_configured_run_emits_schema_checked_artifacts() {
    let dir = temp_dir("emit");
    std::fs::create_dir_all(&dir).unwrap();
    let conf = dir.join("run.conf");
    std::fs::write(
        &conf,
        "# coarse smoke configuration\n\
         cases = pure2\n\
         eps = 1/4, 1/8\n\
         kinetic.n_mu = 8\n\
         kinetic.dx = 2e-2\n\
         halfspace.n = 6\n\
         heat.dx = 1e-2   # 200 cells\n\
         heat.dt = 1e-3\n\
         plots = true\n",
    )
    .unwrap();
    let out = dir.join("results");
    let run = run_cli(&["--config", conf.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0), "{:?}", run);
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.contains("errors.csv"), "{stdout}");

    let rows = check_csv(&out.join("errors.csv"), "slab-transport/errors v1", 6, 1);
    assert_eq!(rows, 2);
    let fits = check_csv(&out.join("slopes.csv"), "slab-transport/slopes v1", 4, 2);
    assert_eq!(fits, 4);
    for eps in ["1_4", "1_8"] {
        let profile = out.join(format!("profiles_pure2_{eps}.csv"));
        let rows = check_csv(&profile, "slab-transport/profiles v1", 3, 0);
        assert_eq!(rows, 200, "{} rows", profile.display());
    }
    for chart in ["convergence_pure2.svg", "profiles_pure2.svg"] {
        let svg = std::fs::read_to_string(out.join(chart)).expect("chart written");
        assert!(svg.starts_with("<svg "), "{chart}");
        assert!(svg.trim_end().ends_with("</svg>"), "{chart}");
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn the_stability_case_writes_its_deviation_history() {
    let dir = temp_dir("stability");
    let run = run_cli(&[
        "--case",
        "stability",
        "--eps",
        "1/4",
        "--out",
        dir.to_str().unwrap(),
        "--config",
        "/dev/null",
    ]);
    // /dev/null reads as an empty config, so defaults apply except the
    // flags; shrink the grids through a second run if this gets slow.
    assert_eq!(run.status.code(), Some(0), "{:?}", run);
    let rows = check_csv(
        &dir.join("deviation_vs_time.csv"),
        "slab-transport/deviation v1",
        3,
        0,
    );
    assert!(rows > 10, "only {rows} history rows");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn an_unusable_output_directory_exits_with_a_run_failure() {
    // /dev/null is a file, so nothing can be created beneath it.
    let broken = run_cli(&["--case", "pure1", "--eps", "1/4", "--out", "/dev/null/results"]);
    assert_eq!(broken.status.code(), Some(1), "{:?}", broken);
    let err = String::from_utf8_lossy(&broken.stderr);
    assert!(err.contains("output directory"), "{err}");
}
