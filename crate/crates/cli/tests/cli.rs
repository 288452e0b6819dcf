//! End-to-end CLI checks: exit codes, pinned output lines, determinism.

use std::io::Write;
use std::path::Path;

use cbam_cli::run_cli;
use cbam_core::RunReport;

fn run(args: &[&str]) -> (i32, String, String) {
    run_with_env(args, None)
}

fn run_with_env(args: &[&str], env_config: Option<String>) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("cbam").chain(args.iter().copied());
    let code = run_cli(argv, env_config, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).expect("stdout is UTF-8"),
        String::from_utf8(err).expect("stderr is UTF-8"),
    )
}

fn write_file(dir: &Path, name: &str, contents: &str) -> String {
    let path = dir.join(name);
    let mut f = std::fs::File::create(&path).unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    path.to_string_lossy().into_owned()
}

const REGISTRY: &str = r#"{"goods": [
    {"id": "steel", "cn_code": "7208", "direct_intensity": 2.3},
    {"id": "pipe", "cn_code": "7305", "direct_intensity": 0.1,
     "inputs": [{"id": "steel", "qty": 1.02}]},
    {"id": "frame", "cn_code": "7308", "direct_intensity": 0.05,
     "inputs": [{"id": "pipe", "qty": 0.9}]},
    {"id": "table", "cn_code": "9403", "direct_intensity": 0.02,
     "inputs": [{"id": "frame", "qty": 0.6}]}
]}"#;

const PRICES: &str = "country,valid_from,price_eur\nEU,2022-01-01,80\n";

#[test]
fn rate_prints_the_pinned_value() {
    let (code, out, _) = run(&["rate", "--cp-eu", "80", "--cp-i", "0", "--beta", "2.3"]);
    assert_eq!(code, 0);
    assert_eq!(out, "184.00\n");
}

#[test]
fn rate_rejects_negative_inputs_as_usage() {
    let (code, _, err) = run(&["rate", "--cp-eu", "-80", "--cp-i", "0", "--beta", "2.3"]);
    assert_eq!(code, 2);
    assert!(err.contains("non-negative"));
}

#[test]
fn classify_covered_and_uncovered() {
    let (code, out, _) = run(&["classify", "25232100"]);
    assert_eq!(code, 0);
    assert_eq!(out, "covered, sector=Cement\n");

    let (code, out, _) = run(&["classify", "48010000"]);
    assert_eq!(code, 0);
    assert_eq!(out, "not covered, sector=Other\n");

    let (code, _, err) = run(&["classify", "25232"]);
    assert_eq!(code, 1);
    assert!(err.contains("25232"));
}

#[test]
fn assess_missing_file_is_fatal() {
    let (code, _, err) = run(&["assess", "definitely-not-here.csv"]);
    assert_eq!(code, 1);
    assert!(err.contains("definitely-not-here.csv"));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let (code, _, _) = run(&["frobnicate"]);
    assert_eq!(code, 2);
}

#[test]
fn assess_pipeline_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let registry = write_file(dir.path(), "registry.json", REGISTRY);
    let prices = write_file(dir.path(), "prices.csv", PRICES);
    let decls = write_file(
        dir.path(),
        "declarations.csv",
        "id,date,origin,good,quantity_t,declared_intensity,foreign_price_eur\n\
         D1,2030-03-01,RU,7208,100,,\n\
         D2,2030-03-01,XX,oops,1,,\n",
    );

    let args = [
        "--registry",
        registry.as_str(),
        "--prices",
        prices.as_str(),
        "assess",
        decls.as_str(),
    ];
    let (code, out, _) = run(&args);
    assert_eq!(code, 0);
    assert!(out.contains("9200.00"), "{out}");
    assert!(out.contains("errors: 1"));

    // identical argv + files give identical bytes
    let (_, out2, _) = run(&args);
    assert_eq!(out, out2);

    // the JSON form re-parses into the same report shape
    let (code, json_out, _) = run(&[
        "--registry",
        registry.as_str(),
        "--prices",
        prices.as_str(),
        "--format",
        "json",
        "assess",
        decls.as_str(),
    ]);
    assert_eq!(code, 0);
    let report: RunReport = serde_json::from_str(&json_out).unwrap();
    assert_eq!(report.rows.len(), 1);
    assert!((report.rows[0].cost - 9200.0).abs() < 1e-6);
    assert_eq!(report.errors.len(), 1);
}

#[test]
fn monitor_finds_the_substitution_pattern() {
    let dir = tempfile::tempdir().unwrap();
    let registry = write_file(dir.path(), "registry.json", REGISTRY);
    let mut flows = String::from("country,cn_code,month,quantity_t\n");
    for (i, qty) in [(1, 10000), (2, 10000), (3, 10000), (4, 10000), (5, 10000), (6, 10000),
                     (7, 6000), (8, 6000), (9, 6000), (10, 6000), (11, 6000), (12, 6000)]
    {
        flows.push_str(&format!("TR,7305,2029-{i:02},{qty}\n"));
    }
    for (i, qty) in [(1, 2000), (2, 2000), (3, 2000), (4, 2000), (5, 2000), (6, 2000),
                     (7, 3000), (8, 3000), (9, 3000), (10, 3000), (11, 3000), (12, 3000)]
    {
        flows.push_str(&format!("TR,9403,2029-{i:02},{qty}\n"));
    }
    let flows = write_file(dir.path(), "flows.csv", &flows);

    let (code, out, _) = run(&["--registry", registry.as_str(), "monitor", flows.as_str()]);
    assert_eq!(code, 0);
    assert!(out.contains("score=0.400000"), "{out}");
    assert!(out.contains("alerts: 1"));

    let (code, json_out, _) = run(&[
        "--registry",
        registry.as_str(),
        "--format",
        "json",
        "monitor",
        flows.as_str(),
    ]);
    assert_eq!(code, 0);
    let result: cbam_core::ScanResult = serde_json::from_str(&json_out).unwrap();
    assert_eq!(result.alerts.len(), 1);
    assert!((result.alerts[0].score - 0.40).abs() < 1e-9);
    assert_eq!(result.summary.candidate_pairs, 1);
}

#[test]
fn schedule_table_shows_the_phase_in() {
    let (code, out, _) = run(&["schedule"]);
    assert_eq!(code, 0);
    assert!(out.contains("2025  0.0000"));
    assert!(out.contains("2030  0.5000"));
    assert!(out.contains("2035  1.0000"));
    // operator-overridden endpoints move the line
    let (_, out, _) = run(&["--levy-start", "2028", "--full-year", "2037", "schedule"]);
    assert!(out.contains("2028  0.1000"));
    assert!(out.contains("2037  1.0000"));
}

#[test]
fn config_file_and_env_fallback() {
    let dir = tempfile::tempdir().unwrap();
    write_file(dir.path(), "registry.json", REGISTRY);
    write_file(dir.path(), "prices.csv", PRICES);
    let config = write_file(
        dir.path(),
        "config.json",
        r#"{"registry": "registry.json", "prices": "prices.csv", "format": "json"}"#,
    );
    let decls = write_file(
        dir.path(),
        "declarations.csv",
        "id,date,origin,good,quantity_t,declared_intensity,foreign_price_eur\n\
         D1,2030-03-01,RU,pipe,10,,\n",
    );

    // via --config: relative paths resolve against the config file
    let (code, out, _) = run(&["--config", config.as_str(), "assess", decls.as_str()]);
    assert_eq!(code, 0);
    let report: RunReport = serde_json::from_str(&out).unwrap();
    assert_eq!(report.rows[0].status, cbam_core::ObligationStatus::Priced);

    // via the environment fallback
    let (code, out_env, _) = run_with_env(&["assess", decls.as_str()], Some(config.clone()));
    assert_eq!(code, 0);
    assert_eq!(out, out_env);

    // flags override config fields
    let (code, out_text, _) = run(&[
        "--config",
        config.as_str(),
        "--format",
        "text",
        "assess",
        decls.as_str(),
    ]);
    assert_eq!(code, 0);
    assert!(out_text.starts_with("== Obligations =="));

    // a config referencing a missing file is fatal
    let bad = write_file(dir.path(), "bad.json", r#"{"registry": "nope.json"}"#);
    let (code, _, err) = run(&["--config", bad.as_str(), "classify", "72"]);
    assert_eq!(code, 1);
    assert!(err.contains("nope.json"));
}

#[test]
fn emissions_breakdown_walks_the_bom() {
    let dir = tempfile::tempdir().unwrap();
    let registry = write_file(dir.path(), "registry.json", REGISTRY);
    let (code, out, _) = run(&["--registry", registry.as_str(), "emissions", "table"]);
    assert_eq!(code, 0);
    assert!(out.contains("direct: 0.020000"));
    assert!(out.contains("steel"));
    assert!(out.contains("total: 1.370840 tCO2e/t"), "{out}");

    let (code, _, err) = run(&["--registry", registry.as_str(), "emissions", "ghost"]);
    assert_eq!(code, 1);
    assert!(err.contains("ghost"));
}
