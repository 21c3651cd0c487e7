//! End-to-end tests of the `casimir` binary: exit codes, file formats and
//! the cross-policy/configuration contracts.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_casimir")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const AU_DRUDE: &str = r#"
[material]
model = "drude"
plasma_frequency_ev = 9.0
relaxation_ev = 0.035
carrier_concentration_cm3 = 5.9e22

[geometry]
gap_range_nm = { min = 200.0, max = 400.0, points = 3 }

[run]
temperature_k = 300.0
screening = "none"
tolerance = 1e-8
"#;

fn observable_column(stdout: &[u8]) -> Vec<f64> {
    String::from_utf8_lossy(stdout)
        .lines()
        .skip(1)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split(',').nth(4).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn pressure_sweep_has_header_and_three_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "au.toml", AU_DRUDE);
    let out = run(&["pressure", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(
        lines[0],
        "d_nm,F_te,F_tm,F_total,P_pa_or_F_newton,n_max,err_estimate"
    );
    for row in &lines[1..] {
        assert_eq!(row.split(',').count(), 7);
    }
}

#[test]
fn missing_material_section_exits_2_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.toml",
        "[geometry]\ngap_nm = 200.0\n\n[run]\ntemperature_k = 300.0\n",
    );
    let out = run(&["pressure", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("material"), "stderr: {err}");
}

#[test]
fn missing_model_parameter_exits_2_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.toml",
        "[material]\nmodel = \"drude\"\nrelaxation_ev = 0.035\n\n[geometry]\ngap_nm = 200.0\n\n[run]\ntemperature_k = 300.0\n",
    );
    let out = run(&["pressure", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("plasma_frequency_ev"), "stderr: {err}");
}

#[test]
fn screening_policies_obey_magnitude_ordering_per_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "au.toml", AU_DRUDE);
    let p_none = observable_column(
        &run(&[
            "pressure",
            "--config",
            cfg.to_str().unwrap(),
            "--screening",
            "none",
        ])
        .stdout,
    );
    let p_n0 = observable_column(
        &run(&[
            "pressure",
            "--config",
            cfg.to_str().unwrap(),
            "--screening",
            "n0",
        ])
        .stdout,
    );
    assert_eq!(p_none.len(), 3);
    for (a, b) in p_none.iter().zip(&p_n0) {
        assert!(a.abs() < b.abs(), "ordering violated: {a} vs {b}");
    }
}

#[test]
fn force_is_linear_in_sphere_radius() {
    let dir = tempfile::tempdir().unwrap();
    let base = AU_DRUDE.replace(
        "[run]",
        "sphere_radius_um = 50.0\n\n[run]",
    );
    let cfg50 = write_config(dir.path(), "r50.toml", &base);
    let cfg100 = write_config(
        dir.path(),
        "r100.toml",
        &base.replace("sphere_radius_um = 50.0", "sphere_radius_um = 100.0"),
    );
    let f50 = observable_column(&run(&["force", "--config", cfg50.to_str().unwrap()]).stdout);
    let f100 = observable_column(&run(&["force", "--config", cfg100.to_str().unwrap()]).stdout);
    for (a, b) in f50.iter().zip(&f100) {
        assert!(a < &0.0);
        assert!((b / a - 2.0).abs() < 1e-9, "R-linearity: {a} vs {b}");
    }
}

#[test]
fn force_refines_consistently_with_tighter_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let body = AU_DRUDE.replace("[run]", "sphere_radius_um = 100.0\n\n[run]");
    let cfg = write_config(dir.path(), "force.toml", &body);
    let coarse = run(&[
        "force",
        "--config",
        cfg.to_str().unwrap(),
        "--tolerance",
        "1e-6",
    ]);
    let fine = run(&[
        "force",
        "--config",
        cfg.to_str().unwrap(),
        "--tolerance",
        "1e-10",
    ]);
    let fc = observable_column(&coarse.stdout);
    let ff = observable_column(&fine.stdout);
    for (a, b) in fc.iter().zip(&ff) {
        assert!((a - b).abs() <= 1e-5 * b.abs(), "{a} vs {b}");
    }
}

fn err_column(stdout: &[u8]) -> Vec<f64> {
    String::from_utf8_lossy(stdout)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(6).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn tighter_tolerance_never_increases_error_estimates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "au.toml", AU_DRUDE);
    let run_tol = |tol: &str| {
        err_column(
            &run(&[
                "pressure",
                "--config",
                cfg.to_str().unwrap(),
                "--tolerance",
                tol,
            ])
            .stdout,
        )
    };
    let loose = run_tol("1e-5");
    let tight = run_tol("1e-9");
    for (l, t) in loose.iter().zip(&tight) {
        assert!(t <= l, "tightening raised the estimate: {t} > {l}");
    }
}

const ENTROPY_IDEAL: &str = r#"
[material]
model = "ideal"

[geometry]
gap_nm = 200.0

[run]
temperature_k = 300.0
tolerance = 1e-9

[entropy]
temperatures_k = [40.0, 32.0, 24.0, 16.0]
verdict = true
closed_form = true
"#;

#[test]
fn entropy_ideal_metal_verdict_satisfies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ideal.toml", ENTROPY_IDEAL);
    let out = run(&["entropy", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("T_K,S,method,err\n"));
    assert!(text.contains("closed-form"));
    let verdict_line = text
        .lines()
        .find(|l| l.starts_with("verdict="))
        .expect("verdict record present");
    assert!(verdict_line.contains("verdict=SATISFIES"), "{verdict_line}");
    assert!(verdict_line.contains("S0_extrapolated="));
    assert!(verdict_line.contains("S0_closed_form="));
    assert!(verdict_line.contains("discrepancy="));
}

#[test]
fn entropy_closed_form_row_matches_library_value() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
[material]
model = "drude"
plasma_frequency_ev = 9.0
relaxation_ev = 0.035
relaxation_exponent = 6.0
carrier_concentration_cm3 = 5.9e22

[geometry]
gap_nm = 200.0

[run]
temperature_k = 300.0
screening = "all"
screening_length = "thomas-fermi"
tolerance = 1e-9

[entropy]
temperatures_k = [40.0, 32.0]
closed_form = true
"#;
    let cfg = write_config(dir.path(), "drude.toml", body);
    let out = run(&["entropy", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let closed: f64 = text
        .lines()
        .find(|l| l.contains("closed-form"))
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    // thermo oracle value for these parameters (committed fixture)
    let expect = -1.2291454251e-20;
    assert!(
        (closed - expect).abs() < 1e-4 * expect.abs(),
        "closed-form row {closed:.6e} vs {expect:.6e}"
    );
}

fn compare_config(dir: &Path, dataset: &Path) -> PathBuf {
    write_config(
        dir,
        "cmp.toml",
        &format!(
            r#"
[material]
model = "drude"
plasma_frequency_ev = 9.0
relaxation_ev = 0.035
carrier_concentration_cm3 = 5.9e22

[geometry]
gap_nm = 200.0

[run]
temperature_k = 300.0
screening = "none"
tolerance = 1e-9

[compare]
dataset = "{}"
kind = "pressure"
"#,
            dataset.display()
        ),
    )
}

#[test]
fn compare_self_consistent_dataset_has_no_exclusion() {
    // dataset generated from the same theory: differences ~ 0
    let dir = tempfile::tempdir().unwrap();
    let cfg0 = write_config(dir.path(), "gen.toml", AU_DRUDE);
    let sweep = run(&["pressure", "--config", cfg0.to_str().unwrap()]);
    let mut dataset = String::from("d_nm,value,ci95,ci70,unit\n");
    for line in String::from_utf8_lossy(&sweep.stdout).lines().skip(1) {
        let mut fields = line.split(',');
        let d: f64 = fields.next().unwrap().parse().unwrap();
        let p: f64 = fields.nth(3).unwrap().parse().unwrap();
        dataset.push_str(&format!("{d},{p},{},{},Pa\n", p.abs() * 1e-3, p.abs() * 5e-4));
    }
    let data_path = dir.path().join("self.csv");
    std::fs::write(&data_path, dataset).unwrap();
    let cfg = compare_config(dir.path(), &data_path);
    let out = run(&["compare", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# excluded95: \n") || text.ends_with("# excluded70: \n"));
    assert!(!text.contains(".."), "no intervals expected:\n{text}");
}

#[test]
fn compare_offset_dataset_excludes_full_range_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg0 = write_config(dir.path(), "gen.toml", AU_DRUDE);
    let sweep = run(&["pressure", "--config", cfg0.to_str().unwrap()]);
    let mut dataset = String::from("d_nm,value,ci95,ci70,unit\n");
    let mut first_d = 0.0;
    let mut last_d = 0.0;
    for (i, line) in String::from_utf8_lossy(&sweep.stdout)
        .lines()
        .skip(1)
        .enumerate()
    {
        let mut fields = line.split(',');
        let d: f64 = fields.next().unwrap().parse().unwrap();
        if i == 0 {
            first_d = d;
        }
        last_d = d;
        let p: f64 = fields.nth(3).unwrap().parse().unwrap();
        // offset far beyond the bands
        dataset.push_str(&format!(
            "{d},{},{},{},Pa\n",
            p + 0.1 * p.abs(),
            p.abs() * 1e-3,
            p.abs() * 5e-4
        ));
    }
    let data_path = dir.path().join("offset.csv");
    std::fs::write(&data_path, dataset).unwrap();
    let cfg = compare_config(dir.path(), &data_path);
    let out = run(&["compare", "--config", cfg.to_str().unwrap()]);
    // exclusion is a result, not an error
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let line95 = text
        .lines()
        .find(|l| l.starts_with("# excluded95:"))
        .unwrap();
    let expect = format!(
        "# excluded95: {}..{}",
        casimir_core::sweep::fmt_sci(first_d),
        casimir_core::sweep::fmt_sci(last_d)
    );
    assert_eq!(line95, expect);
}

#[test]
fn compare_bad_dataset_exits_2_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let data_path = dir.path().join("bad.csv");
    std::fs::write(
        &data_path,
        "d_nm,value,ci95,ci70,unit\n200.0,-0.5,0.01,0.02,Pa\n",
    )
    .unwrap();
    let cfg = compare_config(dir.path(), &data_path);
    let out = run(&["compare", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "stderr: {err}");
}

#[test]
fn compare_shipped_synthetic_fixture_parses() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/synthetic_pressure.csv");
    let cfg = compare_config(dir.path(), &fixture);
    let out = run(&["compare", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("d_nm")).count(), 5);
}

#[test]
fn print_constants_lists_codata_values() {
    let out = run(&["print-constants"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("hbar = 1.05457181700e-34 J s"));
    assert!(text.contains("k_B = 1.38064900000e-23 J/K"));
    assert!(text.contains("zeta(3)"));
}
