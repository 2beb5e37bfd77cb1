use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::stats_suite::{bin_index, describe, histogram_over, Bin, Sample};

use super::{ExperimentReport, HarnessError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    /// The whole report, reloadable with [`load_report`].
    Json,
    /// Summary table: `model,mean,std_dev,variance`.
    Csv,
    /// Overlaid relative-frequency histograms of the waiting times.
    SvgHistogram,
}

pub fn emit_report(report: &ExperimentReport, format: ReportFormat, path: &Path) -> Result<(), HarnessError> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut out = BufWriter::new(file);
    match format {
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut out, report).map_err(|e| HarnessError::io(path, e))?;
            out.write_all(b"\n").map_err(|e| HarnessError::io(path, e))?;
        }
        ReportFormat::Csv => write_table_csv(report, &mut out).map_err(|e| HarnessError::io(path, e))?,
        ReportFormat::SvgHistogram => out
            .write_all(histogram_svg(report).as_bytes())
            .map_err(|e| HarnessError::io(path, e))?,
    }
    out.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn load_report(path: &Path) -> Result<ExperimentReport, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// One row per sample in the comparison unit: the reference first (when
/// present), then each paradigm. Statistics that need two values are left
/// blank for smaller samples.
pub fn write_table_csv<W: Write>(report: &ExperimentReport, out: W) -> csv::Result<()> {
    let unit = report.provenance.spec.comparison_unit;
    let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
    if let Some(r) = &report.reference {
        rows.push(("Reference".to_string(), r.values.clone()));
    }
    for p in &report.paradigms {
        rows.push((p.paradigm.label().to_string(), p.comparison_values(unit)));
    }

    let mut w = csv::Writer::from_writer(out);
    w.write_record(["model", "mean", "std_dev", "variance"])?;
    for (label, values) in rows {
        let stats = Sample::new(label.clone(), values).ok().and_then(|s| describe(&s).ok());
        match stats {
            Some(d) => w.write_record([
                label,
                format!("{:.6}", d.mean),
                format!("{:.6}", d.std_dev),
                format!("{:.6}", d.variance),
            ])?,
            None => w.write_record([label, String::new(), String::new(), String::new()])?,
        }
    }
    w.flush()?;
    Ok(())
}

const COLOURS: [&str; 3] = ["#444444", "#1f77b4", "#d62728"];

fn histogram_svg(report: &ExperimentReport) -> String {
    let width = report.provenance.spec.histogram_bin_width;
    let mut series: Vec<(String, Vec<f64>)> = Vec::new();
    if let Some(r) = &report.reference {
        series.push(("Reference".into(), r.values.clone()));
    }
    for p in &report.paradigms {
        series.push((p.paradigm.label().into(), p.pooled_waits()));
    }

    let indices = series.iter().flat_map(|(_, v)| v.iter().map(|&x| bin_index(x, width, 0.0)));
    let (first, last) = indices.fold((i64::MAX, i64::MIN), |(lo, hi), k| (lo.min(k), hi.max(k)));
    let binned: Vec<(String, Vec<Bin>, usize)> = series
        .into_iter()
        .map(|(label, v)| {
            let bins = histogram_over(&v, width, 0.0, first, last).unwrap_or_default();
            (label, bins, v.len())
        })
        .collect();

    let (w, h, margin) = (800.0, 420.0, 50.0);
    let plot_w = w - 2.0 * margin;
    let plot_h = h - 2.0 * margin;
    let max_freq = binned
        .iter()
        .flat_map(|(_, bins, n)| bins.iter().map(move |b| b.count as f64 / (*n).max(1) as f64))
        .fold(0.0, f64::max)
        .max(1e-9);
    let n_bins = binned.first().map_or(0, |(_, b, _)| b.len()).max(1);
    let bar_w = plot_w / n_bins as f64;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    for (i, (label, bins, n)) in binned.iter().enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        let _ = writeln!(svg, r#"<g fill="{colour}" fill-opacity="0.35" stroke="{colour}">"#);
        for (k, b) in bins.iter().enumerate() {
            let freq = b.count as f64 / (*n).max(1) as f64;
            let bh = freq / max_freq * plot_h;
            let _ = writeln!(
                svg,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"/>"#,
                margin + k as f64 * bar_w,
                margin + plot_h - bh,
                bar_w,
                bh
            );
        }
        let _ = writeln!(svg, "</g>");
        let ly = margin + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<rect x="{:.2}" y="{:.2}" width="12" height="12" fill="{colour}" fill-opacity="0.6"/><text x="{:.2}" y="{:.2}">{label} (n = {n})</text>"#,
            w - margin - 150.0,
            ly,
            w - margin - 132.0,
            ly + 10.0
        );
    }
    let axis_y = margin + plot_h;
    let _ = writeln!(
        svg,
        r#"<line x1="{margin}" y1="{axis_y}" x2="{:.2}" y2="{axis_y}" stroke="black"/><line x1="{margin}" y1="{margin}" x2="{margin}" y2="{axis_y}" stroke="black"/>"#,
        margin + plot_w
    );
    if let Some((_, bins, _)) = binned.first() {
        if let (Some(f), Some(l)) = (bins.first(), bins.last()) {
            let _ = writeln!(
                svg,
                r#"<text x="{margin}" y="{:.2}">{:.1}</text><text x="{:.2}" y="{:.2}" text-anchor="end">{:.1}</text>"#,
                axis_y + 16.0,
                f.start,
                margin + plot_w,
                axis_y + 16.0,
                l.end
            );
        }
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">waiting time (minutes)</text>"#,
        margin + plot_w / 2.0,
        h - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{:.2}" transform="rotate(-90 14 {:.2})" text-anchor="middle">relative frequency (max {:.3})</text>"#,
        margin + plot_h / 2.0,
        margin + plot_h / 2.0,
        max_freq
    );
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{run_experiment_with_reference, ExperimentSpec};

    fn report() -> ExperimentReport {
        let spec = ExperimentSpec {
            replications: 2,
            ..Default::default()
        };
        let reference = Sample::new("reference", vec![0.0, 1.0, 2.5, 4.0]).unwrap();
        run_experiment_with_reference(&spec, Some(("test".into(), vec![], reference))).unwrap()
    }

    #[test]
    fn table_has_three_rows() {
        let mut buf = Vec::new();
        write_table_csv(&report(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "model,mean,std_dev,variance");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("Reference,1.875000,"));
        assert!(lines[2].starts_with("DES,"));
        assert!(lines[3].starts_with("ABS,"));
    }

    #[test]
    fn svg_mentions_every_series() {
        let svg = histogram_svg(&report());
        assert!(svg.starts_with("<svg"));
        for label in ["Reference (n = 4)", "DES (n = ", "ABS (n = "] {
            assert!(svg.contains(label), "{label}");
        }
    }
}
