use std::process::{Command, Output};

use serde_json::Value;

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gfp-lab"));
    cmd.args(args).env_remove("GFP_LAB_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn run(args: &[&str]) -> Output {
    run_env(args, &[])
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout(&run(args))).unwrap()
}

#[test]
fn registry_lists_the_classic_families() {
    let v = json(&["registry"]);
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 13);
    assert_eq!(rows[0]["name"], "Fibonacci");
    assert_eq!(rows[0]["d"], serde_json::json!(["0", "1"]));
    assert_eq!(rows[12]["name"], "Vieta-Lucas");
    assert_eq!(rows[12]["p0"], "2");
    assert_eq!(json(&["registry", "--all"]).as_array().unwrap().len(), 15);
}

#[test]
fn classify_fibonacci_is_not_orthogonal() {
    let v = json(&["classify", "--family", "fibonacci", "--n", "10", "--tol", "1e-8"]);
    assert_eq!(v["verdict"], "NotOrthogonal");
    assert_eq!(v["criterion"], "LinearDPositiveG");
    let v = json(&["classify", "--family", "Chebyshev first kind"]);
    assert_eq!(v["verdict"], "Orthogonal");
    assert_eq!(v["weight"]["density_kind"], "LucasWeight");
}

#[test]
fn walk_prints_matrix_and_potentials() {
    let v = json(&["walk", "--c", "16", "--h", "-14", "--rows", "4"]);
    let matrix: Vec<Vec<String>> = serde_json::from_value(v["matrix"].clone()).unwrap();
    assert_eq!(
        matrix,
        [
            ["7/8", "1/8", "0", "0"],
            ["1/16", "7/8", "1/16", "0"],
            ["0", "1/16", "7/8", "1/16"],
            ["0", "0", "1/16", "7/8"],
        ]
    );
    assert_eq!(v["potentials"]["pi"], serde_json::json!(["1", "2", "2", "2"]));
    assert_eq!(v["ergodicity"]["verdict"], "NotErgodic");
    let g = json(&["generator", "--c", "-1", "--k", "8"]);
    assert_eq!(g["chain"]["mu0"], "1");
    assert_eq!(g["ergodicity"]["verdict"], "Ergodic");
}

#[test]
fn roots_are_sorted_and_family_json_round_trips() {
    let v = json(&["roots", "--family", "Chebyshev second kind", "--n", "6"]);
    let roots = v["roots"].as_array().unwrap();
    assert_eq!(roots.len(), 5);
    let re: Vec<f64> = roots.iter().map(|r| r["re"].as_f64().unwrap()).collect();
    assert!(re.windows(2).all(|w| w[0] <= w[1]));
    assert!(roots
        .iter()
        .all(|r| r["residual"].as_f64().unwrap() <= 1e-8 && r["im"] == 0.0));

    let family = v["family"].to_string();
    let again = json(&["roots", "--family", &family, "--n", "6"]);
    assert_eq!(again["roots"], v["roots"]);

    let path = std::env::temp_dir().join(format!("gfp-lab-family-{}.json", std::process::id()));
    std::fs::write(&path, r#"{"kind":"fibonacci","d":["0","3"],"g":["-2"]}"#).unwrap();
    let from_file = json(&["roots", "--family-file", path.to_str().unwrap(), "--n", "4"]);
    std::fs::remove_file(&path).ok();
    assert_eq!(
        from_file["roots"],
        json(&["roots", "--family", "Fermat", "--n", "4"])["roots"]
    );
}

#[test]
fn expand_and_binet_agree_with_recurrence() {
    let v = json(&["expand", "--family", "Morgan-Voyce C", "--n", "9"]);
    assert_eq!(v["identical"], true);
    let v = json(&["binet", "--family", "Pell", "--n", "12", "--x", "0.3", "--im", "-1.1"]);
    assert!(v["relative_error"].as_f64().unwrap() < 1e-12);
    let v = json(&["generate", "--family", "Fibonacci", "--n", "4"]);
    assert_eq!(v["terms"][4]["coeffs"], serde_json::json!(["0", "2", "0", "1"]));
}

#[test]
fn gram_defaults_to_csv() {
    let text = stdout(&run(&["gram", "--family", "Vieta-Lucas", "--n", "3"]));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,0,1,2,3"));
    assert_eq!(lines.count(), 4);
    let v = json(&["gram", "--family", "Vieta-Lucas", "--n", "3", "--format", "json"]);
    assert!(v["max_off_diagonal"].as_f64().unwrap() < 1e-10);
}

#[test]
fn km_matches_its_oracles() {
    let v = json(&[
        "km", "--c", "16", "--h", "-14", "--i", "0", "--j", "0", "--n", "10", "--oracle", "power",
    ]);
    let results = v.as_array().unwrap();
    assert_eq!(results[0]["method"], "KarlinMcGregor");
    assert_eq!(results[1]["method"], "MatrixPower");
    assert_eq!(results[0]["horizon"], serde_json::json!({"steps": 10}));
    let diff = results[0]["value"].as_f64().unwrap() - results[1]["value"].as_f64().unwrap();
    assert!(diff.abs() < 1e-8);

    let v = json(&[
        "km", "--c", "-2", "--k", "4", "--i", "2", "--j", "1", "--t", "0.5", "--oracle", "exp",
    ]);
    let diff = v[0]["value"].as_f64().unwrap() - v[1]["value"].as_f64().unwrap();
    assert!(diff.abs() < 1e-6);

    let v = json(&[
        "km", "--c", "2", "--h", "0", "--i", "0", "--j", "0", "--n", "10", "--oracle", "mc", "--trials", "200000",
    ]);
    let err = v[1]["error_bar"].as_f64().unwrap();
    assert!((v[0]["value"].as_f64().unwrap() - v[1]["value"].as_f64().unwrap()).abs() < 4.0 * err);
}

#[test]
fn simulate_is_deterministic_given_seed() {
    let args = ["simulate", "--trials", "100000", "--seed", "42"];
    let a = stdout(&run(&args));
    let b = stdout(&run_env(&args, &[("GFP_LAB_THREADS", "1")]));
    let c = stdout(&run_env(&args, &[("GFP_LAB_THREADS", "3")]));
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert!(a.starts_with("state,count,frequency,standard_error,predicted\n"));
    assert!(a.trim_end().ends_with(",0,0,0,0"), "reflecting chain absorbs nothing");
    let other = stdout(&run(&["simulate", "--trials", "100000", "--seed", "43"]));
    assert_ne!(a, other);
}

#[test]
fn ergodicity_reports_windows() {
    let v = json(&["ergodicity", "--c", "8", "--h", "-3"]);
    assert_eq!(v["verdict"], "Ergodic");
    assert_eq!(v["series_exact"], "5/3");
    assert_eq!(v["strict_window"], true);
    let v = json(&["ergodicity", "--c", "-1", "--k", "6"]);
    assert_eq!(v["verdict"], "Ergodic");
    assert_eq!(v["strict_window"], false);
}

#[test]
fn table_format_is_aligned() {
    let text = stdout(&run(&[
        "walk", "--c", "16", "--h", "-14", "--rows", "2", "--format", "table",
    ]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "state  down  hold  up    pi");
    assert_eq!(lines[2], "0      0     7/8   1/8   1");
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| run(args).status.code();
    assert_eq!(code(&["classify", "--family", "no-such-family"]), Some(2));
    assert_eq!(code(&["walk", "--c", "1", "--h", "0"]), Some(2));
    assert_eq!(code(&["generator", "--c", "-1", "--k", "3"]), Some(2));
    assert_eq!(
        code(&["roots", "--family", "Fibonacci", "--n", "4", "--unknown-flag"]),
        Some(2)
    );
    assert_eq!(code(&["gram", "--family", "Lucas"]), Some(2));
    assert_eq!(
        code(&["km", "--c", "2", "--h", "0", "--i", "0", "--j", "0", "--n", "3", "--oracle", "exp"]),
        Some(2)
    );
    assert_eq!(
        code(&["roots", "--family", "{\"kind\":\"lucas\"}", "--n", "3"]),
        Some(2)
    );
    assert_eq!(
        run_env(&["registry"], &[("GFP_LAB_THREADS", "0")]).status.code(),
        Some(2)
    );
    let err = String::from_utf8(run(&["walk", "--c", "3", "--h", "1"]).stderr).unwrap();
    assert!(err.contains("h <= 0 fails"), "{err}");
}

#[test]
fn help_lists_every_flag() {
    let text = stdout(&run(&["km", "--help"]));
    for flag in [
        "--c", "--h", "--k", "--i", "--j", "--n", "--t", "--oracle", "--trials", "--seed", "--format",
    ] {
        assert!(text.contains(flag), "missing {flag}");
    }
    let text = stdout(&run(&["--help"]));
    for sub in [
        "generate",
        "expand",
        "binet",
        "roots",
        "classify",
        "gram",
        "walk",
        "generator",
        "km",
        "simulate",
        "ergodicity",
        "registry",
    ] {
        assert!(text.contains(sub), "missing {sub}");
    }
}
