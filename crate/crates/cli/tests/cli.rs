use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mdir_cli::report::{CliReport, SCHEMA_VERSION};

fn gtsg() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/gtsg.csv")
}

fn mdir(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mdir"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("MDIR_THREADS", t),
        None => cmd.env_remove("MDIR_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn fixture_has_two_groups_of_45() {
    let o = mdir(
        &[
            "test",
            "--input",
            gtsg().to_str().unwrap(),
            "--nperm",
            "200",
            "--format",
            "json",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r: CliReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!((r.n, r.n1, r.n2), (90, 45, 45));
    assert_eq!(r.weights, vec!["w(0,0)", "cross"]);
    assert_eq!(r.df, 2);
}

#[test]
fn json_round_trips_and_is_versioned() {
    let o = mdir(
        &[
            "test",
            "--input",
            gtsg().to_str().unwrap(),
            "--nperm",
            "500",
            "--format",
            "json",
            "--randomized",
        ],
        None,
    );
    let text = stdout(&o);
    let r: CliReport = serde_json::from_str(&text).unwrap();
    assert_eq!(r.schema_version, SCHEMA_VERSION);
    assert!(r.randomized.is_some());
    assert_eq!(r.to_json(), text);
    let back: CliReport = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(back, r);
}

#[test]
fn text_report_has_both_p_values() {
    let o = mdir(&["test", "--input", gtsg().to_str().unwrap(), "--nperm", "200"], None);
    let text = stdout(&o);
    for key in ["permutation p", "chi-square p", "S_n", "per direction", "cross"] {
        assert!(text.contains(key), "missing {key} in\n{text}");
    }
}

#[test]
fn same_seed_same_bytes_across_worker_counts() {
    let input = gtsg();
    let args = [
        "test",
        "--input",
        input.to_str().unwrap(),
        "--nperm",
        "3000",
        "--seed",
        "11",
        "--format",
        "json",
    ];
    let one = mdir(&args, Some("1"));
    let four = mdir(&args, Some("4"));
    let default = mdir(&args, None);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.stdout, default.stdout);
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let o = mdir(&["test", "--input", gtsg().to_str().unwrap()], Some("zero"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("MDIR_THREADS"));
}

#[test]
fn pruning_warns_on_stderr() {
    let o = mdir(
        &[
            "test",
            "--input",
            gtsg().to_str().unwrap(),
            "--nperm",
            "100",
            "--rg",
            "0,0",
            "--rg",
            "0,0",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("dropped linearly dependent weights: w(0,0)"));
    assert!(stdout(&o).contains("pruned"));
}

#[test]
fn unknown_flag_exits_2_without_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = mdir(
        &[
            "test",
            "--input",
            gtsg().to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--bogus",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    assert_eq!(mdir(&["--help"], None).status.code(), Some(0));
}

#[test]
fn malformed_csv_exits_3_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "bad.csv", "time,status,group\n1,1,A\n2,1,B\nthree,0,A\n");
    let out = dir.path().join("report.json");
    let o = mdir(
        &[
            "test",
            "--input",
            input.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
    assert!(!out.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn single_group_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "one.csv", "time,status,group\n1,1,A\n2,0,A\n");
    let o = mdir(&["test", "--input", input.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("EmptyGroup"), "{}", stderr(&o));
}

#[test]
fn missing_file_and_bad_alpha() {
    let o = mdir(&["test", "--input", "/no/such/file.csv"], None);
    assert_eq!(o.status.code(), Some(3));
    let o = mdir(&["test", "--input", gtsg().to_str().unwrap(), "--alpha", "1.5"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn writes_report_and_km_plot() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.txt");
    let svg = dir.path().join("km.svg");
    let o = mdir(
        &[
            "test",
            "--input",
            gtsg().to_str().unwrap(),
            "--nperm",
            "100",
            "--out",
            out.to_str().unwrap(),
            "--km-svg",
            svg.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    assert!(std::fs::read_to_string(&out).unwrap().contains("chi-square p"));
    assert!(std::fs::read_to_string(&svg)
        .unwrap()
        .contains("Chemotherapy+Radiation"));
}

const STUDY: &str = r#"
seed = 3
n_sim = 40
n_perm = 50

[[scenario]]
id = "small"
n1 = 20
n2 = 20
censoring = { kind = "equal", p = 0.15 }

[scenario.alternative]
weight = "cross"
theta_max = 0.9
grid_points = 3

[[asymptotic]]
id = "prop-uncensored"
eta = 0.5
censoring = { kind = "none" }
direction = "prop"
menu = "prop"
"#;

#[test]
fn simulate_power_type1_and_asymptotic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "study.toml", STUDY);
    let cfg = cfg.to_str().unwrap();

    let svg_dir = dir.path().join("plots");
    let o = mdir(
        &["simulate", "power", "--config", cfg, "--svg", svg_dir.to_str().unwrap()],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = stdout(&o);
    assert!(csv.starts_with("scenario_id,theta,method,rejection_rate,se,n_sim\n"));
    // three grid points, four permutation and four chi-square lines each
    assert_eq!(csv.lines().count(), 1 + 3 * 8);
    assert!(svg_dir.join("small.svg").exists());

    let o = mdir(&["simulate", "type1", "--config", cfg], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 1 + 4);

    let out = dir.path().join("asym.csv");
    let o = mdir(
        &["simulate", "asympt", "--config", cfg, "--out", out.to_str().unwrap()],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "prop-uncensored");
    assert!((row[5].parse::<f64>().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn simulate_rejects_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        "seed = 1\nalpha = 1.0\n[[scenario]]\nid = \"x\"\nn1 = 5\nn2 = 5\ncensoring = { kind = \"none\" }\n",
    );
    let out = dir.path().join("o.csv");
    let o = mdir(
        &[
            "simulate",
            "type1",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(!out.exists());
    let cfg = write(dir.path(), "typo.toml", "seed = 1\nsede = 2\n");
    let o = mdir(&["simulate", "type1", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn shipped_configs_parse() {
    use mdir_core::simstudy::scenario;
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for (name, scenarios, asymptotic) in [("type1.toml", 12, 0), ("power.toml", 8, 0), ("asymptotic.toml", 0, 5)] {
        let text = std::fs::read_to_string(dir.join(name)).unwrap();
        let cfg = scenario::StudyConfig::from_toml(&text).unwrap();
        for sc in scenario::type1_scenarios(&cfg, false).unwrap() {
            sc.validate().unwrap();
        }
        if name == "power.toml" {
            assert!(scenario::power_scenarios(&cfg, false).unwrap().len() > scenarios);
        }
        assert_eq!(
            (cfg.scenario.len(), cfg.asymptotic.len()),
            (scenarios, asymptotic),
            "{name}"
        );
    }
}
