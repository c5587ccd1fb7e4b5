use std::path::Path;
use std::process::{Command, Output};

use collider_lab_cli::table::{read_rows, HEADER};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_collider-lab"));
    c.env_remove("COLLIDER_LAB_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn compute_fig3_text() {
    let o = run(&["compute", "--preset", "fig3-base"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("alpha_0  -2.25"), "{s}");
    assert!(s.contains("beta_0   -3.375"));
    assert!(
        s.lines()
            .any(|l| l.starts_with("ce") && l.ends_with("2.313241")),
        "{s}"
    );
}

#[test]
fn compute_csv_is_exact() {
    let o = run(&["compute", "--preset", "fig3", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let rows = read_rows(o.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 1);
    let r = &rows[0];
    assert!((r.field("delta_as").unwrap() + 0.078_282_209_364_334_1).abs() < 1e-15);
    assert!((r.field("or_ce").unwrap() - 2.3132413992026384).abs() < 1e-14);
    assert_eq!(r.value, None);
}

#[test]
fn negative_flag_values_parse() {
    let o = run(&[
        "compute",
        "--alpha-a",
        "-2",
        "--beta-m",
        "1.5",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = &read_rows(o.stdout.as_slice()).unwrap()[0];
    // No path from U or A to Y other than through M: only the association is nonzero.
    assert!(r.field("delta_ce").unwrap().abs() > 1e-3);
    assert_eq!(r.field("delta_cde"), Some(0.0));
}

#[test]
fn validation_errors_exit_2() {
    for args in [
        &["compute", "--p-a", "1.0"][..],
        &["compute", "--p-u", "0"],
        &["compute", "--alpha-0", "1"],
        &["compute", "--preset", "fig9"],
        &["compute", "--format", "xml"],
        &["sweep", "--preset", "fig3", "--vary", "alpha_A"],
        &["sweep", "--vary", "gamma"],
        &["sweep"],
        &["sweep", "--vary", "beta_M", "--steps", "1"],
        &["sweep", "--vary", "beta_M", "--from", "1", "--to", "1"],
        &["mc-check", "--n", "9999"],
        &["plot"],
        &["nonsense"],
        &["compute", "--alpha-a", "abc"],
    ] {
        let o = run(args);
        assert_eq!(
            code(&o),
            2,
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn degenerate_model_exits_3() {
    let o = run(&["compute", "--alpha-0", "-800", "--beta-0", "0"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("probability zero"));
}

#[test]
fn thin_simulated_subset_exits_3() {
    let o = run(&[
        "mc-check",
        "--alpha-0",
        "-9",
        "--beta-0",
        "0",
        "--n",
        "10000",
    ]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn help_exits_0() {
    let o = run(&["--help"]);
    assert_eq!(code(&o), 0);
    for sub in ["compute", "sweep", "mc-check", "plot"] {
        assert!(stdout(&o).contains(sub));
    }
}

#[test]
fn sweep_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let svg = dir.path().join("s.svg");
    let o = run(&[
        "sweep",
        "--preset",
        "fig3",
        "--vary",
        "beta-aum",
        "--out",
        p(&csv),
        "--svg",
        p(&svg),
    ]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), HEADER.join(","));
    let rows = read_rows(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 61);
    assert_eq!(rows[0].value, Some(-3.0));
    assert_eq!(rows[30].value, Some(0.0));
    assert_eq!(rows[60].value, Some(3.0));
    assert!(rows.iter().all(|r| r.param == "beta_AUM"));
    let chart = std::fs::read_to_string(&svg).unwrap();
    assert!(chart.starts_with("<svg") && chart.contains(r#"class="reference""#));
}

#[test]
fn sweep_to_stdout_with_degenerate_slots() {
    let o = run(&[
        "sweep",
        "--alpha-0",
        "-800",
        "--beta-0",
        "0",
        "--vary",
        "alpha_U",
        "--from",
        "0",
        "--to",
        "1600",
        "--steps",
        "3",
    ]);
    assert_eq!(code(&o), 0);
    let rows = read_rows(o.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].fields.iter().all(Option::is_none));
    assert!(rows[2].field("delta_cde").is_some());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn plot_reads_sweep_output() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let svg = dir.path().join("p.svg");
    assert_eq!(
        code(&run(&[
            "sweep",
            "--preset",
            "fig2-bottom",
            "--vary",
            "alpha_A",
            "--out",
            p(&csv)
        ])),
        0
    );
    let o = run(&[
        "plot",
        "--input",
        p(&csv),
        "--out",
        p(&svg),
        "--scale",
        "both",
    ]);
    assert_eq!(code(&o), 0);
    let chart = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(chart.matches(r#"class="reference""#).count(), 2);
    assert!(chart.contains("alpha_A"));

    std::fs::write(&csv, "a,b\n1,2\n").unwrap();
    assert_eq!(code(&run(&["plot", "--input", p(&csv)])), 2);
    assert_eq!(
        code(&run(&[
            "plot",
            "--input",
            p(&dir.path().join("missing.csv"))
        ])),
        2
    );
}

#[test]
fn mc_check_passes_and_fails_by_tolerance() {
    let o = run(&["mc-check", "--preset", "fig3", "--n", "100000"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).lines().last().unwrap().starts_with("PASS"));
    let o = run(&[
        "mc-check",
        "--preset",
        "fig3",
        "--n",
        "100000",
        "--tolerance",
        "0.000001",
    ]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).lines().last().unwrap().starts_with("FAIL"));
}

#[test]
fn seed_precedence() {
    let base = ["mc-check", "--preset", "fig2-top", "--n", "20000"];
    let with_flag = run(&[&base[..], &["--seed", "7"]].concat());
    let from_env = bin()
        .args(base)
        .env("COLLIDER_LAB_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(stdout(&with_flag), stdout(&from_env));
    assert!(stdout(&from_env).starts_with("n = 20000, seed = 7,"));
    let default = run(&base);
    assert!(stdout(&default).starts_with("n = 20000, seed = 42,"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "seed = 9\n").unwrap();
    let from_file = bin()
        .args(base)
        .args(["--config", p(&cfg)])
        .env("COLLIDER_LAB_SEED", "7")
        .output()
        .unwrap();
    assert!(stdout(&from_file).starts_with("n = 20000, seed = 9,"));

    let bad_env = bin()
        .args(base)
        .env("COLLIDER_LAB_SEED", "x")
        .output()
        .unwrap();
    assert_eq!(code(&bad_env), 2);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# model\npreset = fig3\nbeta_m = 2   # overridden below\nformat = csv\n",
    )
    .unwrap();
    let o = run(&["compute", "--config", p(&cfg), "--beta-m", "-1"]);
    let direct = run(&[
        "compute", "--preset", "fig3", "--beta-m", "-1", "--format", "csv",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), stdout(&direct));

    std::fs::write(&cfg, "colour = red\n").unwrap();
    assert_eq!(code(&run(&["compute", "--config", p(&cfg)])), 2);
}

#[test]
fn saved_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("saved.cfg");
    let args = [
        "sweep", "--preset", "fig2-top", "--vary", "alpha_U", "--steps", "7", "--nu", "0.25",
    ];
    let first = run(&[&args[..], &["--save-config", p(&cfg)]].concat());
    assert_eq!(code(&first), 0);
    let text = std::fs::read_to_string(&cfg).unwrap();
    assert!(
        text.contains("preset = fig2-top") && text.contains("nu = 0.25"),
        "{text}"
    );
    let again = run(&["sweep", "--config", p(&cfg)]);
    assert_eq!(stdout(&first), stdout(&again));
}

#[test]
fn unwritable_output_exits_2() {
    let o = run(&["compute", "--out", "/nonexistent-dir/x.txt"]);
    assert_eq!(code(&o), 2);
}
