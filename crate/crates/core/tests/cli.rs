use semiorbit::report::SystemConfig;
use std::path::Path;
use std::process::{Command, Output};

const POWERS: &str = "\
# two monomials of coprime degree
map = [1,0,0] / [1]
map = [1,0,0,0] / [1]
point = (2, 1)
x_grid = [2, 10, 40]
weight_max = 1000
weight_grid = [10, 100, 1000]
mode = rho, count-words, constants, classify, preperiodic, orbit-census, theta
";

const GENERIC: &str = "\
map = [1,0,1,0,-1] / [1,2,-1,0]
map = [-2,-2,0,-1,-1,-2] / [2,0,2,-1,2]
point = (10001, 3)
x = 3000
x_grid = [1000, 3000]
depth = 8
assume_free = true
mode = crit-check, beta, predict
";

fn run(args: &[&str], config: &str) -> Output {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("system.cfg");
    std::fs::write(&path, config).unwrap();
    run_at(args, &path)
}

fn run_at(args: &[&str], path: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semiorbit"))
        .args(args)
        .arg("--config")
        .arg(path)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn repeated_runs_are_byte_identical() {
    for format in ["csv", "jsonl"] {
        let a = run(&["run", "--format", format], POWERS);
        let b = run(&["run", "--format", format], POWERS);
        assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn out_flag_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    let out = dir.path().join("out.csv");
    std::fs::write(&cfg, POWERS).unwrap();
    let piped = run_at(&["run"], &cfg);
    let written = Command::new(env!("CARGO_BIN_EXE_semiorbit"))
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(written.status.code(), Some(0));
    assert!(written.stdout.is_empty());
    assert_eq!(std::fs::read(&out).unwrap(), piped.stdout);
}

#[test]
fn csv_layout() {
    let o = run(&["run"], POWERS);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# semiorbit 0.1.0");
    assert!(lines[1].starts_with("# determinism:"));
    assert!(lines.contains(&"# config: map = [1, 0, 0] / [1]"));
    for table in ["rho", "word_counts", "constants", "classification", "preperiodic", "orbit", "theta", "warnings"] {
        let header = format!("# table: {table}");
        assert!(lines.contains(&header.as_str()), "missing {header}");
    }
    let at = lines.iter().position(|l| *l == "# table: rho").unwrap();
    assert_eq!(lines[at + 1], "degrees,rho,residual");
    assert!(lines[at + 2].starts_with("\"(2,3)\",0.787884911026,"));
    let at = lines.iter().position(|l| *l == "# table: word_counts").unwrap();
    let rows: Vec<&str> = lines[at + 2..at + 5].to_vec();
    assert!(rows[2].contains(",1000,") && rows[2].contains(",350"), "{rows:?}");
}

#[test]
fn jsonl_records_have_sorted_keys() {
    let o = run(&["run", "--format", "jsonl"], GENERIC);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut tables = Vec::new();
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let obj = v.as_object().unwrap();
        // the parsed map iterates in sorted order; the raw text must agree
        let positions: Vec<usize> = obj.keys().map(|k| line.find(&format!("\"{k}\":")).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]), "{line}");
        if let Some(t) = obj.get("table") {
            tables.push(t.as_str().unwrap().to_string());
        }
    }
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["record"], "metadata");
    for t in ["crit_maps", "crit_pairs", "beta", "beta_summary", "predict"] {
        assert!(tables.iter().any(|x| x == t), "missing table {t}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["rho"], POWERS).status.code(), Some(0));
    let unknown = run(&["rho"], "degrees = [2, 3]\ncolour = blue\n");
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("line 2"));
    assert_eq!(run(&["rho"], "map = [1,0] / [1]\nmap = [1,0,0] / [1]\n").status.code(), Some(2));
    assert_eq!(run(&["orbit-census"], "degrees = [2, 3]\n").status.code(), Some(2));
    let missing = Command::new(env!("CARGO_BIN_EXE_semiorbit")).args(["rho"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
    assert_eq!(run(&["rho"], "degrees = [5]\n").status.code(), Some(1));
    let starved = run(&["orbit-census", "--budget", "5"], POWERS);
    assert_eq!(starved.status.code(), Some(3));
    assert!(stdout(&starved).contains("budget_exhausted"));
}

#[test]
fn preperiodic_points_are_reported() {
    let cfg = "map = [1,0,-1] / [1]\nmap = [1,0,0] / [1]\npoint = (0, 1)\nx_grid = [1, 5]\n";
    let o = run(&["preperiodic"], cfg);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("(0:1),true,phi1,phi1∘phi1"));
    let o = run(&["orbit-census"], cfg);
    assert!(stdout(&o).contains("preperiodic_base_point"));
}

#[test]
fn config_echo_round_trips() {
    for text in [POWERS, GENERIC, "degrees = [2, 3, 7]\nweight_max = 50\ntol = 1e-10\n"] {
        let cfg = SystemConfig::parse(text).unwrap();
        assert_eq!(SystemConfig::parse(&cfg.to_config_string()).unwrap(), cfg);
    }
}
