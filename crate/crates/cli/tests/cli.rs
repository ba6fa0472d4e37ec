use std::path::Path;
use std::process::{Command, Output};

use relrate_cli::{MISMATCH_HEADER, SWEEP_HEADER};

fn relrate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relrate")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn epsn_prints_twelve_significant_digits() {
    let o = relrate(&[
        "epsn",
        "--family",
        "rayleigh",
        "--constraint",
        "ar",
        "--eps",
        "1e-3",
        "--n",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "1.00050016662e-3");

    let o = relrate(&[
        "epsn",
        "--family",
        "powerlaw-asym",
        "--constraint",
        "ar",
        "--eps",
        "0.02",
        "--n",
        "50",
    ]);
    assert_eq!(stdout(&o).trim(), "2.00000000000e-2");
}

#[test]
fn epsn_usage_errors_exit_2() {
    let o = relrate(&[
        "epsn",
        "--family",
        "rayleigh",
        "--constraint",
        "pcr",
        "--eps",
        "1e-3",
        "--n",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--xi"));
    assert_eq!(relrate(&["epsn", "--family", "gauss"]).status.code(), Some(2));
    let o = relrate(&[
        "epsn",
        "--family",
        "rayleigh",
        "--constraint",
        "ar",
        "--eps",
        "1.5",
        "--n",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = relrate(&[
        "epsn",
        "--family",
        "powerlaw-nonasym",
        "--constraint",
        "ar",
        "--eps",
        "0.01",
        "--n",
        "1000",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn epsn_nonasymptotic_needs_tail_data() {
    let o = relrate(&[
        "epsn",
        "--family",
        "powerlaw-nonasym",
        "--constraint",
        "pcr",
        "--eps",
        "0.01",
        "--xi",
        "0.1",
        "--n",
        "100",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn rate_command_contract() {
    let dir = tempfile::tempdir().unwrap();
    let unit = write(dir.path(), "unit.txt", &"1.0\n".repeat(100));
    let o = relrate(&[
        "rate",
        "--selector",
        "plugin-rayleigh",
        "--constraint",
        "ar",
        "--eps",
        "1e-3",
        "--sample",
        &unit,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r: f64 = stdout(&o).trim().parse().unwrap();
    assert!((r - 0.0014427).abs() < 5e-8, "{r}");

    let many = write(dir.path(), "many.txt", &"0.5\n".repeat(500));
    let o = relrate(&[
        "rate",
        "--selector",
        "nonparametric",
        "--constraint",
        "ar",
        "--eps",
        "1e-3",
        "--sample",
        &many,
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim().parse::<f64>().unwrap(), 0.0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("zero rate"));

    let o = relrate(&[
        "rate",
        "--selector",
        "powerlaw-asym",
        "--constraint",
        "ar",
        "--eps",
        "1e-3",
        "--sample",
        &unit,
    ]);
    assert_eq!(o.status.code(), Some(3));

    let bad = write(dir.path(), "bad.txt", "1.0\n2.0\n\nx\n");
    let o = relrate(&[
        "rate",
        "--selector",
        "rayleigh",
        "--constraint",
        "ar",
        "--eps",
        "1e-3",
        "--sample",
        &bad,
    ]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));

    let missing = dir.path().join("absent.txt");
    let o = relrate(&[
        "rate",
        "--selector",
        "rayleigh",
        "--constraint",
        "ar",
        "--eps",
        "1e-3",
        "--sample",
        missing.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(4));
}

const SMOKE: &str = r#"
channel = "rayleigh"
selector = "nonparametric"
constraint = "ar"
epsilon = 0.05
trials = 1
seed = 1
axis = "n"
values = [20, 50, 100]
"#;

#[test]
fn sweep_smoke_has_golden_header_and_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "smoke.toml", SMOKE);
    let o = relrate(&["sweep", &cfg, "-o", "-"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(
        text.lines().next().unwrap(),
        "axis_name,axis_value,rate_mean,rate_stddev,mean_outage,mean_outage_ci_lo,mean_outage_ci_hi,\
         meta_prob,meta_prob_ci_lo,meta_prob_ci_hi,omega,omega_ci_lo,omega_ci_hi,zero_rate_fraction,trials,seed"
    );
    assert_eq!(text.lines().next().unwrap(), SWEEP_HEADER.join(","));
    let rows = rows(&text);
    assert_eq!(rows.len(), 4);
    for (row, n) in rows[1..]
        .iter()
        .zip(["2.00000000000e1", "5.00000000000e1", "1.00000000000e2"])
    {
        assert_eq!(row.len(), 16);
        assert_eq!(row[0], "n");
        assert_eq!(row[1], n);
        assert_eq!(row[14], "1");
        assert_eq!(row[15], "1");
    }
    assert!(!text.contains("\r\n"));
}

#[test]
fn sweep_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        r#"
channel = "nakagami"
m = 2.0
selector = "powerlaw-asym"
beta = 0.05
constraint = "pcr"
epsilon = 0.05
xi = 0.2
trials = 200
seed = 77
axis = "n"
values = [100, 400]
"#,
    );
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    assert_eq!(
        relrate(&["sweep", &cfg, "-o", a.to_str().unwrap(), "--workers", "1"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        relrate(&["sweep", &cfg, "-o", b.to_str().unwrap(), "--workers", "4"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        relrate(&["sweep", &cfg, "-o", c.to_str().unwrap()]).status.code(),
        Some(0)
    );
    let a = std::fs::read(a).unwrap();
    assert_eq!(a, std::fs::read(b).unwrap());
    assert_eq!(a, std::fs::read(c).unwrap());
}

#[test]
fn parametric_throughput_trend_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "fig1.toml",
        r#"
channel = "rayleigh"
selector = "rayleigh"
constraint = "ar"
epsilon = 1e-2
trials = 4000
seed = 5
axis = "n"
values = [2, 10, 100, 1000]
"#,
    );
    let o = relrate(&["sweep", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    let rows = rows(&stdout(&o));
    let omega: Vec<f64> = rows[1..].iter().map(|r| r[10].parse().unwrap()).collect();
    let lo: Vec<f64> = rows[1..].iter().map(|r| r[11].parse().unwrap()).collect();
    let hi: Vec<f64> = rows[1..].iter().map(|r| r[12].parse().unwrap()).collect();
    for i in 1..omega.len() {
        assert!(hi[i] >= lo[i - 1], "{omega:?}");
    }
    assert!(omega[0] < omega[3]);
    assert!(omega[3] > 0.98);
}

#[test]
fn sweep_schema_violations_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "u.toml", &format!("{SMOKE}colour = \"red\"\n"));
    let o = relrate(&["sweep", &unknown]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));

    let missing = write(dir.path(), "m.toml", &SMOKE.replace("seed = 1\n", ""));
    assert_eq!(relrate(&["sweep", &missing]).status.code(), Some(2));

    let axis = write(dir.path(), "a.toml", &SMOKE.replace("axis = \"n\"", "axis = \"k\""));
    assert_eq!(relrate(&["sweep", &axis]).status.code(), Some(2));

    let typed = write(dir.path(), "t.toml", &SMOKE.replace("trials = 1", "trials = \"many\""));
    assert_eq!(relrate(&["sweep", &typed]).status.code(), Some(2));

    let no_xi = write(dir.path(), "x.toml", &SMOKE.replace("\"ar\"", "\"pcr\""));
    assert_eq!(relrate(&["sweep", &no_xi]).status.code(), Some(2));

    let absent = dir.path().join("none.toml");
    assert_eq!(relrate(&["sweep", absent.to_str().unwrap()]).status.code(), Some(4));
}

#[test]
fn mismatch_rows_follow_the_mismatch_direction() {
    let dir = tempfile::tempdir().unwrap();
    let rician = write(
        dir.path(),
        "k.toml",
        r#"
channel = "rician"
values = [0, 1, 3, 7]
selectors = ["rayleigh", "nonparametric"]
epsilon = 1e-3
xi = 1e-2
n = 2000
"#,
    );
    let o = relrate(&["mismatch", &rician]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), MISMATCH_HEADER.join(","));
    let table = rows(&text);
    assert_eq!(table.len(), 9);
    for r in &table[1..] {
        assert_eq!(r[0], "k");
        let k: f64 = r[1].parse().unwrap();
        let mean: f64 = r[3].parse().unwrap();
        match r[2].as_str() {
            "rayleigh" if k == 0.0 => assert!((mean - 1e-3).abs() < 1e-9, "{mean}"),
            "rayleigh" => {
                assert!(mean < 1e-3);
                assert!(!r[4].is_empty() && !r[6].is_empty());
            }
            // distribution-free: the same for every k
            "nonparametric" => {
                assert!((mean - 2.0 / 2001.0).abs() < 1e-14, "{mean}");
                assert!(r[4].is_empty() && r[6].is_empty());
            }
            other => panic!("{other}"),
        }
    }

    let nakagami = write(
        dir.path(),
        "m.toml",
        r#"
channel = "nakagami"
values = [0.5, 0.7, 0.9]
selectors = ["rayleigh"]
epsilon = 1e-3
n = 1000
"#,
    );
    let o = relrate(&["mismatch", &nakagami]);
    assert_eq!(o.status.code(), Some(0));
    for r in &rows(&stdout(&o))[1..] {
        assert_eq!(r[0], "m");
        assert!(r[3].parse::<f64>().unwrap() > 1e-3);
        // no xi, no meta-probability columns
        assert!(r[5].is_empty() && r[6].is_empty());
    }
}

#[test]
fn mismatch_power_law_rows_are_simulated() {
    let dir = tempfile::tempdir().unwrap();
    let base = r#"
channel = "rician"
values = [1]
selectors = ["powerlaw-asym", "powerlaw-nonasym"]
beta = 0.02
epsilon = 1e-2
xi = 0.2
n = 500
"#;
    let missing = write(dir.path(), "a.toml", base);
    assert_eq!(relrate(&["mismatch", &missing]).status.code(), Some(2));
    let cfg = write(dir.path(), "b.toml", &format!("{base}trials = 200\nseed = 3\n"));
    let first = relrate(&["mismatch", &cfg]);
    assert_eq!(first.status.code(), Some(0));
    let rows = rows(&stdout(&first));
    assert_eq!(rows[1][2], "powerlaw-asym");
    assert!(rows[1][3..6].iter().all(|c| !c.is_empty()));
    assert!(rows[1][6].is_empty());
    // the non-asymptotic rule has no averaged design
    assert_eq!(rows[2][2], "powerlaw-nonasym");
    assert!(rows[2][3].is_empty() && rows[2][4].is_empty() && !rows[2][5].is_empty());
    assert_eq!(first.stdout, relrate(&["mismatch", &cfg, "--workers", "3"]).stdout);

    let rayleigh = write(dir.path(), "c.toml", &base.replace("rician", "rayleigh"));
    assert_eq!(relrate(&["mismatch", &rayleigh]).status.code(), Some(2));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("toml") {
            continue;
        }
        let text = std::fs::read_to_string(&path).unwrap();
        if text.contains("selectors") {
            relrate_cli::MismatchConfig::load(&path).unwrap();
        } else {
            relrate_cli::SweepConfig::load(&path).unwrap().experiment().unwrap();
        }
        seen += 1;
    }
    assert!(seen >= 5);
}
