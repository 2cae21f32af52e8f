use std::process::{Command, Output};

use serde_json::Value;

fn polyprod(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyprod"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

fn rows<'a>(doc: &'a Value, kind: &str) -> Vec<&'a Value> {
    doc["rows"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["kind"] == kind)
        .collect()
}

#[test]
fn analyze_reports_profiles() {
    let out = polyprod(&["analyze", "--poly", "0,1,1"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    let row = rows(&doc, "profile")[0];
    assert_eq!(row["eligible"], true);
    assert_eq!(row["e_p"], 1);
    assert_eq!(row["disc_q"], 1);
    assert_eq!(doc["tool_version"], env!("CARGO_PKG_VERSION"));

    let doc = json(&polyprod(&["analyze", "--poly", "0,0,1,1"]));
    assert_eq!(rows(&doc, "profile")[0]["e_p"], 2);

    let out = polyprod(&["analyze", "--poly", "9,-12,4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(rows(&json(&out), "profile")[0]["eligible"], false);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(
        polyprod(&["analyze", "--poly", "x*(x+"]).status.code(),
        Some(2)
    );
    assert_eq!(polyprod(&["analyze", "--poly", "7"]).status.code(), Some(2));
    assert_eq!(
        polyprod(&["count", "--poly", "9,-12,4", "--N", "5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        polyprod(&["count", "--poly", "0,1,1", "--N-grid", "20,10"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        polyprod(&["count", "--poly", "0,1,1", "--N", "abc"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn count_table() {
    let doc = json(&polyprod(&[
        "count", "--poly", "x(x+1)", "--k", "2", "--N-grid", "10",
    ]));
    let row = rows(&doc, "count")[0];
    assert_eq!(row["A"], 202);
    assert_eq!(row["A_over_Nk"], 2.02);

    let doc = json(&polyprod(&[
        "count", "--poly", "x(x+1)", "--k", "1", "--N-grid", "5,10,20",
    ]));
    for row in rows(&doc, "count") {
        assert_eq!(row["nontrivial"], 0);
        assert_eq!(row["A_over_Nk"], 1.0);
    }

    let doc = json(&polyprod(&[
        "count",
        "--poly",
        "x(x+1)",
        "--N-grid",
        "100,200,400,800",
    ]));
    let ratios: Vec<f64> = rows(&doc, "count")
        .iter()
        .map(|r| r["nontrivial_over_Nk"].as_f64().unwrap())
        .collect();
    assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
}

#[test]
fn csv_and_json_agree() {
    let args = ["count", "--poly", "x^2+1", "--N-grid", "10,20", "--k", "2"];
    let doc = json(&polyprod(&args));
    let csv_out = polyprod(&[&args[..], &["--format", "csv"]].concat());
    let mut reader = csv::Reader::from_reader(&csv_out.stdout[..]);
    let headers = reader.headers().unwrap().clone();
    let records: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    let json_rows = doc["rows"].as_array().unwrap();
    assert_eq!(records.len(), json_rows.len());
    for (rec, row) in records.iter().zip(json_rows) {
        for (h, cell) in headers.iter().zip(rec.iter()) {
            let expected = match &row[h] {
                Value::Null => String::new(),
                Value::String(s) => s.clone(),
                v => v.to_string(),
            };
            assert_eq!(cell, expected, "column {h}");
        }
    }
}

#[test]
fn bounds_battery_holds() {
    let out = polyprod(&[
        "bounds",
        "--poly",
        "x(x+1)",
        "--l-max",
        "300",
        "--z-max",
        "300",
        "--recursion-max",
        "8",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["assertions"]["failed"], Value::Array(vec![]));
    let first = rows(&doc, "roots")[0];
    assert_eq!(first["inputs"]["l"], 1);
    assert_eq!(first["exact"], 1);
    assert_eq!(first["bound"], 1.0);
    for row in rows(&doc, "tuple_divisibility") {
        assert_eq!(row["advisory"], true);
        assert_eq!(row["inputs"]["C"], "1");
    }
    assert_eq!(rows(&doc, "detector").len(), 45);
}

#[test]
fn resource_errors_flush_partial_rows() {
    // growth threshold of this polynomial is far beyond the scan limit
    let out = polyprod(&[
        "bounds",
        "--poly",
        "x^2 + x + 10^26",
        "--l-max",
        "3",
        "--z-max",
        "2",
        "--N-grid",
        "100",
        "--recursion-max",
        "2",
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc = json(&out);
    assert_eq!(rows(&doc, "roots").len(), 3);
    assert!(rows(&doc, "tuple_divisibility").is_empty());
}

#[test]
fn rmf_report() {
    let out = polyprod(&[
        "rmf", "--poly", "x(x+1)", "--N", "100", "--trials", "2000", "--mixed", "1:2,2:1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    let m = rows(&doc, "moment");
    assert_eq!(m[0]["exact_target"], 1.0);
    assert_eq!(m[1]["k"], 2);
    for row in rows(&doc, "mixed_moment") {
        assert_eq!(row["count"], 4);
    }
    assert_eq!(
        polyprod(&["rmf", "--poly", "x(x+1)", "--trials", "50"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn curves_report() {
    let doc = json(&polyprod(&[
        "curves", "--poly", "x(x+1)", "--N", "10", "--ab-max", "3",
    ]));
    let curves = rows(&doc, "curve");
    let find = |a: u64, b: u64| curves.iter().find(|r| r["a"] == a && r["b"] == b).unwrap();
    assert_eq!(find(1, 2)["point_list"], serde_json::json!([[2, 3]]));
    assert_eq!(find(2, 3)["point_list"], serde_json::json!([[4, 5]]));
    assert_eq!(rows(&doc, "gcd_aggregate")[0]["lambda"], 1);
    assert_eq!(rows(&doc, "gcd_aggregate")[0]["aggregate"], 0);
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("polyprod-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("a.json");
    let out = polyprod(&[
        "analyze",
        "--poly",
        "x^2+1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(rows(&doc, "profile")[0]["disc_q"], -4);
    std::fs::remove_dir_all(&dir).unwrap();
}
