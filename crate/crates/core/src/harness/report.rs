//! Rate tables, verdicts and report files.
//!
//! Each report is written to `<out>/<id>/`:
//!
//! - `<table>.csv`: a `# family=..; parameter=..` comment line, then the
//!   header `parameter,distance,mode,error_bound` and one row per grid value;
//! - `<table>.svg`: a log-log line chart of the positive distances;
//! - `summary.txt`: inputs, fits, checks and the verdict.
//!
//! Floats are printed in shortest round-trip form, so identical inputs give
//! identical bytes and CSV files parse back to the same table.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::fit::{fit_slope, SlopeFit};
use crate::error::{invalid, parse_err, Error, Result};

/// Fraction of zero distances above which a table fails its configuration check.
pub const MAX_ZERO_FRACTION: f64 = 0.3;

/// Provenance of the distances in a table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistanceMode {
    Exact,
    CertifiedLowerBound,
    MonteCarlo { samples: usize, dkw_bound: f64 },
}

impl DistanceMode {
    pub fn label(&self) -> String {
        match self {
            DistanceMode::Exact => "exact".into(),
            DistanceMode::CertifiedLowerBound => "certified-lower-bound".into(),
            DistanceMode::MonteCarlo { samples, dkw_bound } => {
                format!("monte-carlo(N={samples};dkw={dkw_bound:?})")
            }
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "exact" => Some(DistanceMode::Exact),
            "certified-lower-bound" => Some(DistanceMode::CertifiedLowerBound),
            _ => {
                let inner = s.strip_prefix("monte-carlo(N=")?.strip_suffix(')')?;
                let (n, d) = inner.split_once(";dkw=")?;
                Some(DistanceMode::MonteCarlo {
                    samples: n.parse().ok()?,
                    dkw_bound: d.parse().ok()?,
                })
            }
        }
    }
}

/// Distances along a strictly increasing parameter grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub id: String,
    pub family_id: String,
    /// Name of the grid parameter (`n`, `p`, `k`).
    pub parameter: String,
    pub grid: Vec<f64>,
    pub distances: Vec<f64>,
    pub error_bounds: Vec<f64>,
    pub mode: DistanceMode,
}

impl RateTable {
    pub fn new(
        id: &str,
        family_id: &str,
        parameter: &str,
        rows: Vec<(f64, f64, f64)>,
        mode: DistanceMode,
    ) -> Result<Self> {
        let grid: Vec<f64> = rows.iter().map(|r| r.0).collect();
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return invalid(format!("table {id}: grid must be strictly increasing"));
        }
        if rows.iter().any(|r| !(0.0..=1.0).contains(&r.1)) {
            return invalid(format!("table {id}: distances must lie in [0, 1]"));
        }
        if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return invalid(format!("table id {id:?} is not a plain file stem"));
        }
        Ok(RateTable {
            id: id.into(),
            family_id: family_id.into(),
            parameter: parameter.into(),
            grid,
            distances: rows.iter().map(|r| r.1).collect(),
            error_bounds: rows.iter().map(|r| r.2).collect(),
            mode,
        })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn zero_count(&self) -> usize {
        self.distances.iter().filter(|&&d| d == 0.0).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# family={}; parameter={}", self.family_id, self.parameter).unwrap();
        writeln!(out, "parameter,distance,mode,error_bound").unwrap();
        let mode = self.mode.label();
        for i in 0..self.len() {
            writeln!(
                out,
                "{:?},{:?},{mode},{:?}",
                self.grid[i], self.distances[i], self.error_bounds[i]
            )
            .unwrap();
        }
        out
    }

    /// Inverse of [`to_csv`](Self::to_csv); `id` is the file stem.
    pub fn from_csv(id: &str, text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (family, parameter) = match lines.next() {
            Some((_, l)) => {
                let meta = l.strip_prefix("# ").ok_or(Error::Parse {
                    line: 1,
                    msg: "expected `# family=..; parameter=..`".into(),
                })?;
                let mut family = None;
                let mut parameter = None;
                for part in meta.split("; ") {
                    match part.split_once('=') {
                        Some(("family", v)) => family = Some(v.to_string()),
                        Some(("parameter", v)) => parameter = Some(v.to_string()),
                        _ => return parse_err(1, format!("unknown metadata {part:?}")),
                    }
                }
                match (family, parameter) {
                    (Some(f), Some(p)) => (f, p),
                    _ => return parse_err(1, "metadata needs family and parameter"),
                }
            }
            None => return parse_err(1, "empty table"),
        };
        match lines.next() {
            Some((_, "parameter,distance,mode,error_bound")) => {}
            _ => return parse_err(2, "expected the column header"),
        }
        let mut rows = Vec::new();
        let mut mode: Option<DistanceMode> = None;
        for (i, line) in lines {
            let ln = i + 1;
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return parse_err(ln, "expected 4 columns");
            }
            let num = |s: &str| {
                s.parse::<f64>().map_err(|_| Error::Parse {
                    line: ln,
                    msg: format!("bad number {s:?}"),
                })
            };
            let m = DistanceMode::parse(cols[2]).ok_or(Error::Parse {
                line: ln,
                msg: format!("unknown mode {:?}", cols[2]),
            })?;
            if mode.is_some_and(|prev| prev != m) {
                return parse_err(ln, "mixed modes in one table");
            }
            mode = Some(m);
            rows.push((num(cols[0])?, num(cols[1])?, num(cols[3])?));
        }
        RateTable::new(id, &family, &parameter, rows, mode.unwrap_or(DistanceMode::Exact))
    }
}

/// Expected fitted slope range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
    pub min_r_squared: Option<f64>,
}

impl Band {
    /// Rate `x^-1`.
    pub const INVERSE: Band = Band {
        lo: -1.25,
        hi: -0.80,
        min_r_squared: None,
    };
    /// Rate `x^-1/2`.
    pub const INVERSE_SQRT: Band = Band {
        lo: -0.62,
        hi: -0.40,
        min_r_squared: None,
    };
    /// Linear growth.
    pub const LINEAR: Band = Band {
        lo: 0.85,
        hi: 1.15,
        min_r_squared: None,
    };

    pub fn with_r_squared(self, r2: f64) -> Band {
        Band {
            min_r_squared: Some(r2),
            ..self
        }
    }

    pub fn contains(&self, fit: &SlopeFit) -> bool {
        (self.lo..=self.hi).contains(&fit.slope) && self.min_r_squared.is_none_or(|r| fit.r_squared >= r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verdict {
    Informational,
    Pass,
    Fail,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Informational => "informational",
        }
    }

    /// Process exit status: 1 for fail, 0 otherwise.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Fail => 1,
            _ => 0,
        }
    }
}

/// A table with its fit and, when a rate is predicted, the band it must meet.
#[derive(Debug, Clone, PartialEq)]
pub struct TableEntry {
    pub table: RateTable,
    pub title: String,
    pub fit: Option<SlopeFit>,
    pub band: Option<Band>,
    pub outcome: Verdict,
    pub remark: String,
}

impl TableEntry {
    /// Fits the table and grades it: all-zero tables are informational, more
    /// than [`MAX_ZERO_FRACTION`] zeros fail, otherwise the fit is checked
    /// against `band` when one is given.
    pub fn grade(table: RateTable, title: &str, band: Option<Band>) -> Self {
        let zeros = table.zero_count();
        let mut fit = None;
        let (outcome, remark) = if table.is_empty() {
            (Verdict::Informational, "empty table".to_string())
        } else if zeros == table.len() {
            (Verdict::Informational, "all distances are zero".to_string())
        } else if zeros as f64 > MAX_ZERO_FRACTION * table.len() as f64 {
            (
                Verdict::Fail,
                format!("{zeros} of {} distances are zero; degenerate family", table.len()),
            )
        } else {
            match fit_slope(&table.grid, &table.distances) {
                Ok(f) => {
                    fit = Some(f);
                    match band {
                        Some(b) if b.contains(&f) => (Verdict::Pass, "slope within band".to_string()),
                        Some(_) => (Verdict::Fail, "slope outside band".to_string()),
                        None => (Verdict::Informational, "no predicted rate".to_string()),
                    }
                }
                Err(e) => (Verdict::Informational, format!("no fit: {e}")),
            }
        };
        TableEntry {
            table,
            title: title.into(),
            fit,
            band,
            outcome,
            remark,
        }
    }
}

/// A named scalar check; `passed == None` marks an informational value.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub detail: String,
    pub passed: Option<bool>,
}

impl Check {
    pub fn new(name: &str, detail: String, passed: Option<bool>) -> Self {
        Check {
            name: name.into(),
            detail,
            passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub id: String,
    pub inputs: Vec<(String, String)>,
    pub tables: Vec<TableEntry>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn new(id: &str) -> Self {
        ExperimentReport {
            id: id.into(),
            inputs: vec![("version".into(), env!("CARGO_PKG_VERSION").into())],
            tables: Vec::new(),
            checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn input(&mut self, key: &str, value: impl std::fmt::Display) {
        self.inputs.push((key.into(), value.to_string()));
    }

    pub fn table(&self, id: &str) -> Option<&TableEntry> {
        self.tables.iter().find(|t| t.table.id == id)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Worst outcome over graded tables and checks; informational when
    /// nothing was graded.
    pub fn verdict(&self) -> Verdict {
        let tables = self.tables.iter().map(|t| t.outcome);
        let checks = self.checks.iter().filter_map(|c| {
            c.passed.map(|ok| if ok { Verdict::Pass } else { Verdict::Fail })
        });
        tables.chain(checks).max().unwrap_or(Verdict::Informational)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        writeln!(s, "experiment {}", self.id).unwrap();
        writeln!(s, "verdict {}", self.verdict().as_str()).unwrap();
        for (k, v) in &self.inputs {
            writeln!(s, "input {k} = {v}").unwrap();
        }
        for t in &self.tables {
            writeln!(s, "table {}: {}", t.table.id, t.title).unwrap();
            writeln!(s, "  family {}", t.table.family_id).unwrap();
            writeln!(s, "  mode {}", t.table.mode.label()).unwrap();
            writeln!(s, "  rows {} (zero distances {})", t.table.len(), t.table.zero_count()).unwrap();
            if let Some(f) = &t.fit {
                writeln!(
                    s,
                    "  fit slope {:?} intercept {:?} r2 {:?} points {} excluded {}",
                    f.slope, f.intercept, f.r_squared, f.points, f.excluded_zeros
                )
                .unwrap();
            }
            if let Some(b) = &t.band {
                match b.min_r_squared {
                    Some(r) => writeln!(s, "  expected slope in [{:?}, {:?}], r2 >= {r:?}", b.lo, b.hi).unwrap(),
                    None => writeln!(s, "  expected slope in [{:?}, {:?}]", b.lo, b.hi).unwrap(),
                }
            }
            writeln!(s, "  outcome {} ({})", t.outcome.as_str(), t.remark).unwrap();
        }
        for c in &self.checks {
            let status = match c.passed {
                Some(true) => "pass",
                Some(false) => "fail",
                None => "info",
            };
            writeln!(s, "check {} [{status}]: {}", c.name, c.detail).unwrap();
        }
        for n in &self.notes {
            writeln!(s, "note {n}").unwrap();
        }
        s
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Self-contained SVG 1.1 log-log chart of the positive distances.
pub fn render_svg(entry: &TableEntry) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const L: f64 = 70.0;
    const R: f64 = 20.0;
    const T: f64 = 40.0;
    const B: f64 = 50.0;
    let t = &entry.table;
    let pts: Vec<(f64, f64)> = t
        .grid
        .iter()
        .zip(&t.distances)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    let mut s = String::new();
    writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    )
    .unwrap();
    writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        W / 2.0,
        xml_escape(&format!("{} ({})", entry.title, t.family_id))
    )
    .unwrap();
    writeln!(
        s,
        r#"<rect x="{L}" y="{T}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - L - R,
        H - T - B
    )
    .unwrap();
    if pts.is_empty() {
        writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">no positive distances</text>"#,
            W / 2.0,
            H / 2.0
        )
        .unwrap();
        s.push_str("</svg>\n");
        return s;
    }
    let span = |f: fn(&(f64, f64)) -> f64| {
        let lo = pts.iter().map(f).fold(f64::INFINITY, f64::min).floor();
        let hi = pts.iter().map(f).fold(f64::NEG_INFINITY, f64::max).ceil();
        (lo, if hi > lo { hi } else { lo + 1.0 })
    };
    let (x0, x1) = span(|p| p.0);
    let (y0, y1) = span(|p| p.1);
    let px = |x: f64| L + (x - x0) / (x1 - x0) * (W - L - R);
    let py = |y: f64| H - B - (y - y0) / (y1 - y0) * (H - T - B);
    for e in (x0 as i32)..=(x1 as i32) {
        let x = px(e as f64);
        writeln!(s, r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, H - B, H - B + 5.0).unwrap();
        writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">1e{e}</text>"#,
            H - B + 18.0
        )
        .unwrap();
    }
    for e in (y0 as i32)..=(y1 as i32) {
        let y = py(e as f64);
        writeln!(s, r#"<line x1="{:.2}" y1="{y:.2}" x2="{L:.2}" y2="{y:.2}" stroke="black"/>"#, L - 5.0).unwrap();
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">1e{e}</text>"#,
            L - 8.0,
            y + 4.0
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
        L + (W - L - R) / 2.0,
        H - 10.0,
        xml_escape(&t.parameter)
    )
    .unwrap();
    if let Some(fit) = &entry.fit {
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="end">slope {:.3}, r2 {:.4}</text>"#,
            W - R - 8.0,
            T + 18.0,
            fit.slope,
            fit.r_squared
        )
        .unwrap();
    }
    let poly: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
    writeln!(s, r#"<polyline fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#, poly.join(" ")).unwrap();
    for &(x, y) in &pts {
        writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#, px(x), py(y)).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn write_into(dir: &Path, report: &ExperimentReport) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for t in &report.tables {
        if t.table.is_empty() {
            continue;
        }
        let csv = dir.join(format!("{}.csv", t.table.id));
        fs::write(&csv, t.table.to_csv())?;
        let svg = dir.join(format!("{}.svg", t.table.id));
        fs::write(&svg, render_svg(t))?;
        written.push(csv);
        written.push(svg);
    }
    let summary = dir.join("summary.txt");
    fs::write(&summary, report.summary())?;
    written.push(summary);
    Ok(written)
}

/// Writes every report under `out/<id>/`. Files are staged in a temporary
/// directory inside `out` and moved into place only once all of them are
/// written; an existing `out/<id>` is replaced.
pub fn write_reports(out: &Path, reports: &[ExperimentReport]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out)?;
    let staging = tempfile::Builder::new().prefix(".staging-").tempdir_in(out)?;
    for r in reports {
        write_into(&staging.path().join(&r.id), r)?;
    }
    let mut placed = Vec::new();
    for r in reports {
        let target = out.join(&r.id);
        if target.exists() {
            fs::remove_dir_all(&target)?;
        }
        fs::rename(staging.path().join(&r.id), &target)?;
        placed.push(target);
    }
    Ok(placed)
}

/// Writes a single report; see [`write_reports`].
pub fn emit_report(report: &ExperimentReport, out: &Path) -> Result<PathBuf> {
    Ok(write_reports(out, std::slice::from_ref(report))?.remove(0))
}

/// Reads every `*.csv` table in a report directory, sorted by file name.
pub fn read_report_tables(dir: &Path) -> Result<Vec<RateTable>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "csv"));
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let id = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            RateTable::from_csv(id, &fs::read_to_string(p)?)
        })
        .collect()
}
