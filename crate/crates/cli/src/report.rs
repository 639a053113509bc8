//! Quality-report rows and their JSON/CSV forms.
//!
//! A report is a list of per-image rows plus one mean row. Metric
//! fields are optional: an image without visible edges has no defined
//! edge metrics, and a row for an unreadable file has nothing but its
//! error entry. The mean row averages whatever is defined.

use std::io;
use std::path::Path;

use dustclear_core::iqa::QualityReport;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimingsMs {
    pub cast: f64,
    pub dehaze: f64,
    pub clahe: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_bar: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_o: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_r: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_s: Option<u64>,
    /// Absent exactly when processing failed before the pipeline ran.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<TimingsMs>,
    pub errors: Vec<String>,
}

/// Column means over the rows that define each column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanRow {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_bar: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_o: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<TimingsMs>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchReport {
    pub images: Vec<ReportRow>,
    pub mean: MeanRow,
}

pub fn row_from_report(name: String, rep: &QualityReport) -> ReportRow {
    let mut errors = Vec::new();
    if rep.e.is_none() {
        errors.push("e undefined: the original image has no visible edges".to_string());
    }
    if rep.r_bar.is_none() {
        errors.push("r_bar undefined: no visible edges to compare".to_string());
    }
    if rep.guard_hits > 0 {
        errors.push(format!(
            "gradient guard engaged on {} edge pixels",
            rep.guard_hits
        ));
    }
    ReportRow {
        name,
        e: rep.e,
        r_bar: rep.r_bar,
        sigma: Some(rep.sigma),
        n_o: Some(rep.n_o as u64),
        n_r: Some(rep.n_r as u64),
        n_s: Some(rep.n_s as u64),
        timings_ms: Some(TimingsMs {
            cast: rep.timings.cast_ms,
            dehaze: rep.timings.dehaze_ms,
            clahe: rep.timings.clahe_ms,
            total: rep.timings.total_ms,
        }),
        errors,
    }
}

pub fn failed_row(name: String, error: String) -> ReportRow {
    ReportRow {
        name,
        e: None,
        r_bar: None,
        sigma: None,
        n_o: None,
        n_r: None,
        n_s: None,
        timings_ms: None,
        errors: vec![error],
    }
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let defined: Vec<f64> = values.flatten().collect();
    if defined.is_empty() {
        None
    } else {
        Some(defined.iter().sum::<f64>() / defined.len() as f64)
    }
}

pub fn mean_row(rows: &[ReportRow]) -> MeanRow {
    let timed: Vec<TimingsMs> = rows.iter().filter_map(|r| r.timings_ms).collect();
    let timings_ms = if timed.is_empty() {
        None
    } else {
        let n = timed.len() as f64;
        Some(TimingsMs {
            cast: timed.iter().map(|t| t.cast).sum::<f64>() / n,
            dehaze: timed.iter().map(|t| t.dehaze).sum::<f64>() / n,
            clahe: timed.iter().map(|t| t.clahe).sum::<f64>() / n,
            total: timed.iter().map(|t| t.total).sum::<f64>() / n,
        })
    };
    MeanRow {
        e: mean_of(rows.iter().map(|r| r.e)),
        r_bar: mean_of(rows.iter().map(|r| r.r_bar)),
        sigma: mean_of(rows.iter().map(|r| r.sigma)),
        n_o: mean_of(rows.iter().map(|r| r.n_o.map(|v| v as f64))),
        n_r: mean_of(rows.iter().map(|r| r.n_r.map(|v| v as f64))),
        n_s: mean_of(rows.iter().map(|r| r.n_s.map(|v| v as f64))),
        timings_ms,
    }
}

pub fn batch_report(images: Vec<ReportRow>) -> BatchReport {
    BatchReport {
        mean: mean_row(&images),
        images,
    }
}

pub fn to_json(report: &BatchReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report types serialize");
    s.push('\n');
    s
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn to_csv(report: &BatchReport) -> String {
    let mut out =
        String::from("name,e,r_bar,sigma,n_o,n_r,n_s,cast_ms,dehaze_ms,clahe_ms,total_ms,errors\n");
    let mut push_row = |name: &str,
                        e: Option<f64>,
                        r_bar: Option<f64>,
                        sigma: Option<f64>,
                        n_o: Option<f64>,
                        n_r: Option<f64>,
                        n_s: Option<f64>,
                        t: Option<TimingsMs>,
                        errors: &[String]| {
        let t_cols = match t {
            Some(t) => [Some(t.cast), Some(t.dehaze), Some(t.clahe), Some(t.total)],
            None => [None; 4],
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            csv_field(name),
            fmt_opt(e),
            fmt_opt(r_bar),
            fmt_opt(sigma),
            fmt_opt(n_o),
            fmt_opt(n_r),
            fmt_opt(n_s),
            fmt_opt(t_cols[0]),
            fmt_opt(t_cols[1]),
            fmt_opt(t_cols[2]),
            fmt_opt(t_cols[3]),
            csv_field(&errors.join("; ")),
        ));
    };
    for r in &report.images {
        push_row(
            &r.name,
            r.e,
            r.r_bar,
            r.sigma,
            r.n_o.map(|v| v as f64),
            r.n_r.map(|v| v as f64),
            r.n_s.map(|v| v as f64),
            r.timings_ms,
            &r.errors,
        );
    }
    let m = &report.mean;
    push_row(
        "mean",
        m.e,
        m.r_bar,
        m.sigma,
        m.n_o,
        m.n_r,
        m.n_s,
        m.timings_ms,
        &[],
    );
    out
}

/// Writes the report in the format implied by the extension: `.csv`
/// for CSV, anything else JSON.
pub fn write_report(path: &Path, report: &BatchReport) -> io::Result<()> {
    let text = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("csv") => to_csv(report),
        _ => to_json(report),
    };
    std::fs::write(path, text)
}
