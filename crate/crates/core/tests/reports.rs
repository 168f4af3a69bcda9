use std::fs;

use polyconv::harness::{
    read_report_tables, render_svg, write_reports, Band, Check, DistanceMode, ExperimentReport, RateTable,
    TableEntry, Verdict,
};

fn report() -> ExperimentReport {
    let rows: Vec<(f64, f64, f64)> = [8.0, 16.0, 32.0, 64.0].iter().map(|&n| (n, 1.0 / n, 1e-12)).collect();
    let t = RateTable::new("cp", "demo", "n", rows, DistanceMode::Exact).unwrap();
    let mut r = ExperimentReport::new("demo");
    r.input("family", "demo");
    r.tables.push(TableEntry::grade(t, "rho(F^n, e(nF))", Some(Band::INVERSE)));
    r.checks.push(Check::new("info", "reported only".into(), None));
    r
}

#[test]
fn csv_layout() {
    let r = report();
    let csv = r.tables[0].table.to_csv();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# family=demo"));
    assert_eq!(lines.next().unwrap(), "parameter,distance,mode,error_bound");
    assert_eq!(lines.next().unwrap(), "8.0,0.125,exact,1e-12");
    assert_eq!(RateTable::from_csv("cp", &csv).unwrap(), r.tables[0].table);
}

#[test]
fn svg_is_well_formed() {
    let r = report();
    let svg = render_svg(&r.tables[0]);
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    let markers = doc.descendants().filter(|n| n.tag_name().name() == "circle").count();
    assert_eq!(markers, 4);
    assert!(doc.descendants().any(|n| n.tag_name().name() == "text" && n.text().is_some_and(|t| t.contains("slope"))));
}

#[test]
fn reports_are_written_atomically_and_read_back() {
    let tmp = tempfile::tempdir().unwrap();
    let r = report();
    assert_eq!(r.verdict(), Verdict::Pass);
    let placed = write_reports(tmp.path(), std::slice::from_ref(&r)).unwrap();
    assert_eq!(placed, vec![tmp.path().join("demo")]);
    let names: Vec<String> = fs::read_dir(tmp.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    assert_eq!(names, vec!["demo".to_string()]);
    let tables = read_report_tables(&placed[0]).unwrap();
    assert_eq!(tables, vec![r.tables[0].table.clone()]);
    let summary = fs::read_to_string(placed[0].join("summary.txt")).unwrap();
    assert!(summary.contains("verdict pass"));
    write_reports(tmp.path(), &[r]).unwrap();
    assert_eq!(fs::read_dir(tmp.path()).unwrap().count(), 1);
}
