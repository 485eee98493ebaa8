use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ordchoice(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ordchoice"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn simulate(dir: &Path, family: &str, beta: &str, cuts: Option<&str>, n: &str) {
    let mut args = vec![
        "simulate",
        "--out",
        "data.csv",
        "--schema",
        "schema.txt",
        "--family",
        family,
        "--beta",
        beta,
        "--n",
        n,
        "--seed",
        "11",
    ];
    if let Some(c) = cuts {
        args.extend(["--cutpoints", c]);
    }
    let out = ordchoice(dir, &args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

/// `name value value …` rows of a text report, keyed by their first column.
fn text_rows(text: &str) -> Vec<(String, Vec<f64>)> {
    text.lines()
        .filter_map(|l| {
            let mut parts = l.split_whitespace();
            let name = parts.next()?.to_string();
            let nums: Vec<f64> = parts
                .skip_while(|p| p.parse::<f64>().is_err())
                .map_while(|p| p.parse().ok())
                .collect();
            (!nums.is_empty()).then_some((name, nums))
        })
        .collect()
}

fn close4(text: f64, json: f64) -> bool {
    (text - json).abs() <= 0.5e-4 + 1e-12
}

#[test]
fn fit_reports_agree() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    simulate(d, "ordinal", "0.5,-1,0.25", Some("1.0"), "1500");
    let out = ordchoice(
        d,
        &[
            "fit",
            "--data",
            "data.csv",
            "--schema",
            "schema.txt",
            "--out",
            "fit",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let json: Value =
        serde_json::from_str(&fs::read_to_string(d.join("fit.json")).unwrap()).unwrap();
    let rows = text_rows(&fs::read_to_string(d.join("fit.txt")).unwrap());
    let mut checked = 0;
    for entry in json["coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .chain(json["cutpoints"].as_array().unwrap())
    {
        let name = entry["name"].as_str().unwrap();
        let (_, nums) = rows.iter().find(|(n, _)| n == name).unwrap();
        for (c, key) in ["estimate", "std_error", "z", "p_value"].iter().enumerate() {
            assert!(
                close4(nums[c], entry[key].as_f64().unwrap()),
                "{name} {key}"
            );
        }
        checked += 1;
    }
    assert_eq!(checked, 4);
    let find = |label: &str| rows.iter().find(|(n, _)| n == label).unwrap().1[0];
    assert!(close4(
        find("McFadden"),
        json["mcfadden_r2"].as_f64().unwrap()
    ));
    assert!(close4(find("hit-rate"), json["hit_rate"].as_f64().unwrap()));
    assert_eq!(json["converged"], Value::Bool(true));
}

#[test]
fn effects_reports_agree_and_honour_options() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    simulate(d, "binary", "0.2,0.9,0.0", None, "1200");
    let out = ordchoice(
        d,
        &[
            "effects",
            "--data",
            "data.csv",
            "--schema",
            "schema.txt",
            "--out",
            "eff",
            "--scale",
            "x1=10",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json: Value =
        serde_json::from_str(&fs::read_to_string(d.join("eff.json")).unwrap()).unwrap();
    let text = fs::read_to_string(d.join("eff.txt")).unwrap();
    let json_rows = json["rows"].as_array().unwrap();
    assert_eq!(json_rows.len(), 2);
    assert_eq!(json_rows[0]["label"], "x1, 10 units");
    for row in json_rows {
        let label = row["label"].as_str().unwrap();
        let line = text.lines().find(|l| l.starts_with(label)).unwrap();
        let nums: Vec<f64> = line[label.len()..]
            .split_whitespace()
            .map(|v| v.parse().unwrap())
            .collect();
        let effects = row["effects"].as_array().unwrap();
        assert_eq!(nums.len(), effects.len());
        for (t, e) in nums.iter().zip(effects) {
            assert!(close4(*t, e.as_f64().unwrap()));
        }
    }

    // x2 has no effect in the simulation, so a tight filter drops it
    let out = ordchoice(
        d,
        &[
            "effects",
            "--data",
            "data.csv",
            "--schema",
            "schema.txt",
            "--out",
            "eff2",
            "--pfilter",
            "1e-6",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let json: Value =
        serde_json::from_str(&fs::read_to_string(d.join("eff2.json")).unwrap()).unwrap();
    let names: Vec<&str> = json["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["covariate"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["x1"]);

    let out = ordchoice(
        d,
        &[
            "effects",
            "--data",
            "data.csv",
            "--schema",
            "schema.txt",
            "--out",
            "eff3",
            "--covariate",
            "intercept",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("intercept"));
}

#[test]
fn missing_schema_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    simulate(d, "binary", "0.2,0.9", None, "100");
    let out = ordchoice(
        d,
        &[
            "fit",
            "--data",
            "data.csv",
            "--schema",
            "nowhere.txt",
            "--out",
            "fit",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere.txt"));
    assert!(!d.join("fit.json").exists());
}

#[test]
fn bad_data_names_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("data.csv"), "y,income\n1,20000\n2,-5\n1,31000\n").unwrap();
    fs::write(
        d.join("schema.txt"),
        "response = y\nlabels = 1 | 2\ncovariate.income = log\n",
    )
    .unwrap();
    let out = ordchoice(
        d,
        &[
            "fit",
            "--data",
            "data.csv",
            "--schema",
            "schema.txt",
            "--out",
            "fit",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("data.csv") && err.contains("income"), "{err}");
}

#[test]
fn separation_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut csv = String::from("y,x\n");
    for i in 0..30 {
        let x = f64::from(i) / 10.0 - 1.45;
        csv.push_str(&format!("{},{x}\n", if x > 0.0 { "yes" } else { "no" }));
    }
    fs::write(d.join("data.csv"), csv).unwrap();
    fs::write(
        d.join("schema.txt"),
        "response = y\nlabels = no | yes\ncovariate.x = continuous\n",
    )
    .unwrap();
    for link in ["probit", "logit"] {
        let out = ordchoice(
            d,
            &[
                "fit",
                "--data",
                "data.csv",
                "--schema",
                "schema.txt",
                "--link",
                link,
                "--out",
                "fit",
            ],
        );
        assert_eq!(out.status.code(), Some(1));
        assert!(
            String::from_utf8_lossy(&out.stderr).contains("separation"),
            "{link}"
        );
    }
}

#[test]
fn iteration_cap_exits_two_with_reports() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    simulate(d, "ordinal", "0.5,-1,0.25", Some("1.0"), "800");
    let out = ordchoice(
        d,
        &[
            "fit",
            "--data",
            "data.csv",
            "--schema",
            "schema.txt",
            "--out",
            "fit",
            "--max-iter",
            "1",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    let json: Value =
        serde_json::from_str(&fs::read_to_string(d.join("fit.json")).unwrap()).unwrap();
    assert_eq!(json["converged"], Value::Bool(false));
}

#[test]
fn reruns_are_byte_identical() {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path();
        simulate(d, "ordinal", "0.5,-1,0.25", Some("1.0"), "600");
        for cmd in ["fit", "effects"] {
            let out = ordchoice(
                d,
                &[
                    cmd,
                    "--data",
                    "data.csv",
                    "--schema",
                    "schema.txt",
                    "--out",
                    cmd,
                ],
            );
            assert_eq!(out.status.code(), Some(0));
        }
        let out = ordchoice(
            d,
            &[
                "bayes",
                "--data",
                "data.csv",
                "--schema",
                "schema.txt",
                "--out",
                "post",
                "--draws",
                "600",
                "--burn",
                "100",
            ],
        );
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        [
            "data.csv",
            "schema.txt",
            "fit.txt",
            "fit.json",
            "effects.txt",
            "effects.json",
            "post.chain.csv",
            "post.summary.txt",
            "post.summary.json",
        ]
        .map(|f| fs::read(d.join(f)).unwrap())
    };
    assert_eq!(run(), run());
}

#[test]
fn bayes_rejects_logit() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    simulate(d, "binary", "0.2,0.9", None, "100");
    let out = ordchoice(
        d,
        &[
            "bayes",
            "--data",
            "data.csv",
            "--schema",
            "schema.txt",
            "--link",
            "logit",
            "--out",
            "post",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = ordchoice(dir.path(), &["fit", "--data", "x.csv"]);
    assert_eq!(out.status.code(), Some(1));
    let out = ordchoice(dir.path(), &["--help"]);
    assert_eq!(out.status.code(), Some(0));
}
