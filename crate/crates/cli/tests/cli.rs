use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn recipe(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../recipes").join(format!("{name}.toml"))
}

fn varosc(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_varosc"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn write_config(dir: &TempDir, text: &str) -> PathBuf {
    let p = dir.path().join("run.toml");
    std::fs::write(&p, text).unwrap();
    p
}

/// (header, rows of raw fields) with `#` lines skipped.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn quartic_recipe_ground_state() {
    let out = tempfile::tempdir().unwrap();
    let o = varosc(&["spectrum"], &recipe("quartic_mei97"), out.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out.path().join("levels.csv"));
    assert_eq!(header, ["n", "energy"]);
    assert_eq!(rows.len(), 100);
    let e0: f64 = rows[0][1].parse().unwrap();
    assert!(format!("{:.10}", 2.0 * e0).starts_with("13.3884417010"), "{}", 2.0 * e0);
}

#[test]
fn asym_recipe_pms_parameters() {
    let out = tempfile::tempdir().unwrap();
    let o = varosc(&["spectrum"], &recipe("asym_n40"), out.path());
    assert!(o.status.success());
    let p = json(&out.path().join("pms.json"));
    let sigma = p["sigma"].as_f64().unwrap();
    let omega = p["omega"].as_f64().unwrap();
    assert!((sigma + 3.583).abs() <= 5e-3 && (omega - 27.431).abs() <= 5e-2, "{p}");
}

#[test]
fn empty_potential_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "[potential]\n\n[solver]\ndim = 10\n");
    let o = varosc(&["spectrum"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("potential.kind"));
}

#[test]
fn unknown_field_and_bad_values_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    for text in [
        "[potential]\nkind = \"asym_demo\"\n[solver]\ndim = 10\ntolerance = 1\n",
        "[potential]\nkind = \"quartic\"\nm2 = 1.0\ng = 0.0\n[solver]\ndim = 10\n",
        "[potential]\nkind = \"coefficients\"\ncoeffs = [0.0, 1.0, 0.0, 1.0]\n[solver]\ndim = 10\n",
        "not toml at all [",
    ] {
        let cfg = write_config(&dir, text);
        let o = varosc(&["spectrum"], &cfg, &dir.path().join("out"));
        assert_eq!(o.status.code(), Some(2), "{text}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = varosc(&["spectrum"], &dir.path().join("missing.toml"), &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn module_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "[potential]\nkind = \"quartic\"\nm2 = 1.0\ng = 1.0\n[solver]\ndim = 10\ndims = [5, 10]\nn_ref = 20\n",
    );
    let o = varosc(&["convergence", "--levels", "0..50"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn harmonic_trace_scan_minimum_at_mass() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "[potential]\nkind = \"coefficients\"\ncoeffs = [0.0, 0.0, 0.5]\n[solver]\ndim = 5\n\
         [scan]\nomega_min = 0.1\nomega_max = 10.0\npoints = 201\ndims = [1, 5]\n",
    );
    let out = dir.path().join("out");
    let o = varosc(&["trace-scan"], &cfg, &out);
    assert!(o.status.success());
    assert!(!String::from_utf8_lossy(&o.stderr).contains("warning"));
    let (header, rows) = read_csv(&out.join("trace_scan.csv"));
    assert_eq!(header, ["N", "omega", "trace_over_n", "pms_omega", "is_pms"]);
    for n in ["1", "5"] {
        let block: Vec<&Vec<String>> = rows.iter().filter(|r| r[0] == n).collect();
        assert_eq!(block.len(), 201);
        let marked: Vec<f64> = block.iter().filter(|r| r[4] == "1").map(|r| r[1].parse().unwrap()).collect();
        assert_eq!(marked.len(), 1);
        assert!((marked[0] - 1.0).abs() < 1e-12, "{marked:?}");
        let pms: f64 = block[0][3].parse().unwrap();
        assert!((pms - 1.0).abs() < 1e-8);
    }
}

#[test]
fn quartic_trace_scan_has_interior_minima() {
    let out = tempfile::tempdir().unwrap();
    let o = varosc(&["trace-scan"], &recipe("quartic_trace_scan"), out.path());
    assert!(o.status.success());
    assert!(!String::from_utf8_lossy(&o.stderr).contains("warning"));
    let (_, rows) = read_csv(&out.path().join("trace_scan.csv"));
    for n in ["2", "10", "20", "30"] {
        let t: Vec<f64> = rows.iter().filter(|r| r[0] == n).map(|r| r[2].parse().unwrap()).collect();
        let local_minima = (1..t.len() - 1).filter(|&i| t[i] < t[i - 1] && t[i] <= t[i + 1]).count();
        assert_eq!(local_minima, 1, "N={n}");
    }
}

#[test]
fn scan_missing_minimum_warns_but_writes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "[potential]\nkind = \"coefficients\"\ncoeffs = [0.0, 0.0, 0.5]\n[solver]\ndim = 5\n\
         [scan]\nomega_min = 2.0\nomega_max = 10.0\npoints = 20\n",
    );
    let out = dir.path().join("out");
    let o = varosc(&["trace-scan"], &cfg, &out);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let (_, rows) = read_csv(&out.join("trace_scan.csv"));
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| r[4] == "0"));
}

#[test]
fn centered_evolution_starts_at_gaussian_width() {
    let out = tempfile::tempdir().unwrap();
    let o = varosc(&["evolve"], &recipe("slowroll_centered"), out.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.path().join("observables.csv")).unwrap();
    assert!(text.starts_with("# truncation_loss = "));
    let (header, rows) = read_csv(&out.path().join("observables.csv"));
    assert_eq!(header, ["t", "x_mean", "x2_mean", "sqrt_x2"]);
    assert_eq!(rows.len(), 2001);
    let s0: f64 = rows[0][3].parse().unwrap();
    assert!((s0 - 2.2134).abs() < 1e-4, "{s0}");
    for t in ["0", "15", "35"] {
        assert!(out.path().join(format!("wavefunction_t{t}.csv")).exists());
    }
}

#[test]
fn zero_duration_gives_analytic_moments() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "[potential]\nkind = \"double_well\"\nlambda = 0.01\na = 5.0\n[solver]\ndim = 80\n\
         [evolution]\nkind = \"shifted\"\nwidth = 0.4\nx0 = 1.5\nt_max = 0.0\n",
    );
    let out = dir.path().join("out");
    let o = varosc(&["evolve"], &cfg, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = read_csv(&out.join("observables.csv"));
    assert_eq!(rows.len(), 1);
    let x: f64 = rows[0][1].parse().unwrap();
    let x2: f64 = rows[0][2].parse().unwrap();
    assert!((x - 1.5).abs() < 1e-8, "{x}");
    assert!((x2 - (1.5 * 1.5 + 1.0 / 0.4)).abs() < 1e-8, "{x2}");
}

#[test]
fn shifted_sweep_writes_one_file_per_width() {
    let out = tempfile::tempdir().unwrap();
    let o = varosc(&["evolve", "--threads", "2"], &recipe("slowroll_shifted"), out.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for k in 0..4 {
        let path = out.path().join(format!("observables_mu{k}.csv"));
        let text = std::fs::read_to_string(&path).unwrap();
        let loss: f64 = text
            .lines()
            .next()
            .and_then(|l| l.strip_prefix("# truncation_loss = "))
            .unwrap()
            .parse()
            .unwrap();
        let (_, rows) = read_csv(&path);
        assert_eq!(rows.len(), 2000);
        let x0: f64 = rows[0][1].parse().unwrap();
        // the packet is reproduced only where the basis holds it
        if loss <= 1e-8 {
            assert!((x0 - 5.0).abs() < 1e-6, "mu{k}: {x0}");
        }
    }
    assert_eq!(json(&out.path().join("evolve.json"))["packets"].as_array().unwrap().len(), 4);
}

#[test]
fn convergence_table_and_level_flag() {
    let out = tempfile::tempdir().unwrap();
    let o = varosc(&["convergence", "--levels", "0..2"], &recipe("quartic_convergence"), out.path());
    assert!(o.status.success());
    let (header, rows) = read_csv(&out.path().join("convergence.csv"));
    assert_eq!(header, ["N", "n", "delta", "energy", "reference", "omega"]);
    assert_eq!(rows.len(), 12);
    let d0: Vec<f64> = rows.iter().filter(|r| r[1] == "0").map(|r| r[2].parse().unwrap()).collect();
    assert!(d0[0] > 1e3 * d0[d0.len() - 1].max(1e-16));
}

#[test]
fn reruns_are_bit_identical_and_round_trip() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for out in [&a, &b] {
        assert!(varosc(&["spectrum"], &recipe("asym_n10"), out.path()).status.success());
    }
    for f in ["levels.csv", "pms.json"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
    let (_, rows) = read_csv(&a.path().join("levels.csv"));
    for r in rows {
        let v: f64 = r[1].parse().unwrap();
        assert_eq!(format!("{v:.16e}"), r[1]);
    }
}

#[test]
fn json_format_mirrors_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "[potential]\nkind = \"quartic\"\nm2 = 1.0\ng = 1.0\n[solver]\ndim = 12\nlevels = [0, 3]\n\
         [output]\nformats = [\"csv\", \"json\"]\n",
    );
    let out = dir.path().join("out");
    assert!(varosc(&["spectrum"], &cfg, &out).status.success());
    let (_, rows) = read_csv(&out.join("levels.csv"));
    let j = json(&out.join("levels.json"));
    let jr = j["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for (r, v) in rows.iter().zip(jr) {
        assert_eq!(r[1].parse::<f64>().unwrap(), v["energy"].as_f64().unwrap());
    }
}
