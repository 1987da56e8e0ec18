use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mmsec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmsec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn emitted(preset: &str) -> Value {
    let o = mmsec(&["--preset", preset, "--emit-config"]);
    assert!(o.status.success(), "{}", stderr(&o));
    serde_json::from_str(&stdout(&o)).unwrap()
}

fn write_config(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn lists_the_figure_presets() {
    let o = mmsec(&["--list-presets"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for name in ["fig3", "fig5", "fig6", "fig8", "two-sector"] {
        assert!(
            text.lines()
                .any(|l| l.split_whitespace().next() == Some(name)),
            "{name}"
        );
    }
}

#[test]
fn parity_violation_exits_2_naming_the_rule() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = emitted("fig5");
    spec["experiment"]["m"] = serde_json::json!([4, 7]);
    let path = write_config(dir.path(), "bad.json", &spec);
    let o = mmsec(&["--config", &path]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.contains("N_T - M must be even"), "{err}");
    assert!(err.contains("experiment.m"), "{err}");
}

#[test]
fn unknown_field_exits_2_with_its_path() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = emitted("fig3");
    spec["array"]["spacing"] = serde_json::json!(0.5);
    let path = write_config(dir.path(), "bad.json", &spec);
    let o = mmsec(&["--config", &path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("array.spacing"), "{}", stderr(&o));
}

#[test]
fn singular_gram_exits_3_naming_the_module() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = emitted("two-sector");
    spec["array"]["spacing_ratio"] = serde_json::json!(0.005);
    let path = write_config(dir.path(), "dense.json", &spec);
    let o = mmsec(&["--config", &path]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(
        stderr(&o).contains("numerical failure in"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn output_is_independent_of_lanes() {
    let one = mmsec(&["--preset", "fig4-n16", "--seed", "5", "--lanes", "1"]);
    let four = mmsec(&["--preset", "fig4-n16", "--seed", "5", "--lanes", "4"]);
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn emitted_config_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "fig8.json", &emitted("fig8"));
    let from_preset = mmsec(&["--preset", "fig8"]);
    let from_file = mmsec(&["--config", &path]);
    assert!(from_file.status.success(), "{}", stderr(&from_file));
    assert_eq!(from_preset.stdout, from_file.stdout);
}

#[test]
fn fig3_and_fig5_columns() {
    let o = mmsec(&["--preset", "fig3"]);
    assert!(o.status.success());
    let header = stdout(&o).lines().next().unwrap().to_string();
    assert_eq!(
        header,
        "x,cdf_real_emp,cdf_real_theory,cdf_imag_emp,cdf_imag_theory"
    );

    let o = mmsec(&["--preset", "fig5", "--format", "json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let cols: Vec<&str> = v["meta"]["columns"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap())
        .collect();
    assert_eq!(cols, ["M", "rate_sim", "rate_bound", "rate_conventional"]);
    assert_eq!(v["rows"].as_array().unwrap().len(), 16);
}

#[test]
fn files_sidecar_and_svg_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig6.csv");
    let svg = dir.path().join("fig6.svg");
    let o = mmsec(&[
        "--preset",
        "fig6",
        "--out",
        out.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(std::fs::read_to_string(&out)
        .unwrap()
        .starts_with("theta_deg,"));
    let meta: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("fig6.csv.meta.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(meta["seed"], 2024);
    assert!(meta["version"].as_str().unwrap().contains('+'));
    assert_eq!(meta["config"]["array"]["n_rf"], 8);
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn published_schema_is_current() {
    let o = mmsec(&["--print-schema"]);
    let live: Value = serde_json::from_slice(&o.stdout).unwrap();
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/experiment.schema.json");
    let published: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(
        live, published,
        "regenerate with `mmsec --print-schema > docs/experiment.schema.json`"
    );
}
