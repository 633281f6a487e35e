mod common;

use common::{ellband, run, stderr, stdout, write_values};
use ellband::output::{parse_rows_csv, BandDocument};
use ellband::table_file::parse_table;

fn band_doc(args: &[&str]) -> BandDocument {
    let out = run(args);
    assert!(out.status.success(), "{}", stderr(&out));
    serde_json::from_str(&stdout(&out)).unwrap()
}

#[test]
fn band_json_bracketed_by_bonferroni() {
    let doc = band_doc(&[
        "band", "--n", "100", "--alpha", "0.05", "--dist", "uniform", "--method", "ell",
    ]);
    let eta = doc.eta.unwrap();
    assert!(0.0005 < eta && eta < 0.05);
    assert_eq!(doc.generated_by_path.as_deref(), Some("table"));
    assert_eq!(doc.family, "uniform");
    assert_eq!(doc.lower.len(), 100);
}

#[test]
fn band_single_point() {
    let doc = band_doc(&["band", "--n", "1", "--alpha", "0.05", "--dist", "uniform"]);
    assert!((doc.lower[0].unwrap() - 0.025).abs() < 1e-15);
    assert!((doc.upper[0].unwrap() - 0.975).abs() < 1e-15);
}

#[test]
fn band_reports_eta_on_stderr() {
    let out = run(&[
        "band", "--n", "50", "--dist", "uniform", "--policy", "exact",
    ]);
    assert!(stderr(&out).starts_with("eta="), "{}", stderr(&out));
    assert!(stderr(&out).contains("path=exact"));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["band", "--alpha", "1.5", "--n", "10"][..],
        &["band", "--n", "10", "--bogus"],
        &["band"],
        &["band", "--n", "10", "--neff", "5"],
        &["band", "--n", "0"],
        &["band", "--n", "10", "--dist", "student-t"],
        &["local-level"],
        &["frobnicate"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn unsupported_combinations_exit_3() {
    for args in [
        &["band", "--n", "1000000", "--alpha", "0.07"][..],
        &["band", "--n", "30000", "--side", "one"],
        &[
            "local-level",
            "--n",
            "500",
            "--alpha",
            "0.2",
            "--policy",
            "table",
        ],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(3), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn band_csv_has_header_and_rows() {
    let out = run(&["band", "--n", "5", "--dist", "uniform", "--format", "csv"]);
    let rows = parse_rows_csv(&stdout(&out)).unwrap();
    assert_eq!(rows.len(), 5);
    assert!(rows
        .iter()
        .all(|r| r.observed.is_none() && r.lower < r.upper));
}

#[test]
fn help_lists_flags() {
    let out = run(&["plot", "--help"]);
    let text = stdout(&out);
    for flag in [
        "--difference",
        "--log10",
        "--overlay",
        "--pp",
        "--col",
        "--neff",
        "--alpha",
        "--dist",
    ] {
        assert!(text.contains(flag), "{flag}");
    }
}

#[test]
fn unreadable_data_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.txt");
    let out = run(&["plot", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "1\n2\nthree\n").unwrap();
    let out = run(&["plot", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains(":3:"));
}

#[test]
fn log10_domain_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("p.txt");
    write_values(&data, &[0.2, 0.5, -0.25, 0.9]);
    let out = run(&[
        "plot",
        data.to_str().unwrap(),
        "--dist",
        "uniform",
        "--log10",
    ]);
    assert_eq!(out.status.code(), Some(5));
    assert!(stderr(&out).contains("-0.25"));
}

fn count(svg: &str, tag: &str) -> usize {
    let doc = roxmltree::Document::parse(svg).expect("strict XML");
    doc.descendants().filter(|n| n.has_tag_name(tag)).count()
}

#[test]
fn three_point_plot_structure() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("x.txt");
    write_values(&data, &[0.3, 0.1, 0.8]);
    let out = run(&["plot", data.to_str().unwrap(), "--dist", "uniform"]);
    assert!(out.status.success());
    let svg = stdout(&out);
    assert_eq!(count(&svg, "polygon"), 1);
    assert_eq!(count(&svg, "polyline"), 1);
    assert_eq!(count(&svg, "circle"), 3);
}

#[test]
fn overlay_shares_one_band() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    write_values(&a, &[0.05, 0.2, 0.4, 0.6, 0.8, 0.95]);
    write_values(&b, &[0.01, 0.02, 0.3, 0.5, 0.55, 0.99]);
    let out = run(&[
        "plot",
        a.to_str().unwrap(),
        "--overlay",
        b.to_str().unwrap(),
        "--dist",
        "uniform",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let svg = stdout(&out);
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let groups = doc
        .descendants()
        .filter(|n| n.has_tag_name("g") && n.attribute("class") == Some("points"))
        .count();
    assert_eq!(groups, 2);
    assert_eq!(count(&svg, "polygon"), 1);
    assert_eq!(count(&svg, "circle"), 12);
}

#[test]
fn difference_of_on_line_data_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let band = band_doc(&["band", "--n", "12", "--dist", "uniform"]);
    let data = dir.path().join("x.txt");
    let expected: Vec<f64> = band.expected.iter().map(|v| v.unwrap()).collect();
    write_values(&data, &expected);
    let table = dir.path().join("t.csv");
    let out = run(&[
        "plot",
        data.to_str().unwrap(),
        "--dist",
        "uniform",
        "--difference",
        "--table-out",
        table.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = parse_rows_csv(&std::fs::read_to_string(&table).unwrap()).unwrap();
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().all(|r| r.observed == Some(0.0)));
    assert!(rows.iter().all(|r| r.lower < 0.0 && r.upper > 0.0));
}

#[test]
fn log10_calibration_plot() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.txt");
    let out = run(&[
        "simulate",
        "chisq",
        "--s",
        "20",
        "--tables",
        "1000",
        "--seed",
        "4",
        "-o",
        p.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let out = run(&["plot", p.to_str().unwrap(), "--dist", "uniform", "--log10"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let svg = stdout(&out);
    assert_eq!(count(&svg, "polygon"), 1);
    assert_eq!(count(&svg, "circle"), 1000);
    assert!(svg.contains("-log10 expected uniform quantile"));
}

#[test]
fn local_level_single_point() {
    let out = run(&[
        "local-level",
        "--n",
        "1",
        "--alpha",
        "0.05",
        "--side",
        "two",
    ]);
    assert_eq!(stdout(&out), "0.05\n");
}

#[test]
fn local_level_from_bounds_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "local-level",
        "--n",
        "3",
        "--alpha",
        "0.05",
        "--policy",
        "exact",
        "--tol",
        "1e-10",
    ]);
    let eta: f64 = stdout(&out).trim().parse().unwrap();
    let b = ellband_core::ell_two_sided::bounds_from_eta_two_sided(3, eta).unwrap();
    let (h, g) = (dir.path().join("h.txt"), dir.path().join("g.txt"));
    write_values(&h, &b.h);
    write_values(&g, &b.g);
    let out = run(&[
        "local-level",
        "--from-bounds",
        h.to_str().unwrap(),
        g.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let alpha: f64 = stdout(&out).trim().parse().unwrap();
    assert!((alpha - 0.05).abs() < 1e-10 * 0.05, "{alpha}");

    let out = run(&["local-level", "--from-bounds", h.to_str().unwrap()]);
    let one: f64 = stdout(&out).trim().parse().unwrap();
    assert!(one < alpha);
}

#[test]
fn table_round_trip_and_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("custom.tsv");
    let out = run(&[
        "table",
        "--alpha",
        "0.1",
        "--grid",
        "10:100:10",
        "--tol",
        "1e-6",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(&path).unwrap();
    let table = parse_table(&text).unwrap();
    assert_eq!(table.grid().len(), 10);
    assert_eq!(ellband::table_file::format_table(&table), text);

    let out = ellband()
        .env("ELLBAND_TABLE_DIR", dir.path())
        .args(["local-level", "--n", "55", "--alpha", "0.1"])
        .output()
        .unwrap();
    assert!(stderr(&out).contains("path=table"), "{}", stderr(&out));
    let out = ellband()
        .env("ELLBAND_TABLE_DIR", dir.path())
        .args(["local-level", "--n", "55", "--alpha", "0.05"])
        .output()
        .unwrap();
    assert!(stderr(&out).contains("path=exact"), "{}", stderr(&out));
}

#[test]
fn check_reports_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("x.txt");
    write_values(&data, &[0.99]);
    let out = run(&[
        "check",
        data.to_str().unwrap(),
        "--dist",
        "uniform",
        "--estimation",
        "known",
    ]);
    assert_eq!(stdout(&out), "exited index=1 direction=high\n");
    write_values(&data, &[0.5]);
    let out = run(&["check", data.to_str().unwrap(), "--dist", "uniform"]);
    assert_eq!(stdout(&out), "inside\n");
}

#[test]
fn csv_input_column() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("x.csv");
    std::fs::write(&data, "id,p\na,0.2\nb,0.7\nc,0.4\n").unwrap();
    let out = run(&[
        "check",
        data.to_str().unwrap(),
        "--col",
        "p",
        "--dist",
        "uniform",
    ]);
    assert_eq!(stdout(&out), "inside\n", "{}", stderr(&out));
}

#[test]
fn simulate_reports() {
    let out = run(&[
        "simulate",
        "type1",
        "--n",
        "30",
        "--replicates",
        "200",
        "--seed",
        "9",
        "--workers",
        "2",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["replicates"], 200);
    let r = v["rejection_rate"].as_f64().unwrap();
    assert_eq!(
        v["standard_error"].as_f64().unwrap(),
        (r * (1.0 - r) / 200.0).sqrt()
    );

    let out = run(&["simulate", "power", "--replicates", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["simulate", "chisq", "--s", "1"]);
    assert_eq!(out.status.code(), Some(2));
}
