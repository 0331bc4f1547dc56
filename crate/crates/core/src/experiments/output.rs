use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::StatsSeries;

/// Shortest decimal that parses back to the same `f64`, switching to exponent
/// notation for very small or very large magnitudes.
pub fn format_real(v: f64) -> String {
    let a = v.abs();
    if v != 0.0 && v.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    if path.as_os_str().is_empty() {
        return Err(Error::Io {
            context: "cannot write",
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::InvalidInput, "empty path"),
        });
    }
    fs::write(path, body).map_err(|source| Error::Io { context: "cannot write", path: path.to_path_buf(), source })
}

pub fn write_csv(series: &StatsSeries, path: &Path) -> Result<()> {
    let mut body = String::from("t,mse,ncp\n");
    for (t, (m, p)) in series.mse.iter().zip(&series.ncp).enumerate() {
        let _ = writeln!(body, "{t},{},{}", format_real(*m), format_real(*p));
    }
    write_file(path, &body)
}

const WIDTH: f64 = 720.0;
const PANEL: f64 = 300.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 40.0;

fn panel(out: &mut String, title: &str, values: &[f64], top: f64) {
    let logs: Vec<Option<f64>> = values
        .iter()
        .map(|&v| (v > 0.0 && v.is_finite()).then(|| v.log10()))
        .collect();
    let (lo, hi) = logs.iter().flatten().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let (lo, hi) = if lo.is_finite() { (lo.floor(), hi.ceil().max(lo.floor() + 1.0)) } else { (-1.0, 0.0) };
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = PANEL - MARGIN_T - MARGIN_B;
    let x0 = MARGIN_L;
    let y0 = top + MARGIN_T;
    let n = values.len().saturating_sub(1).max(1) as f64;
    let px = |t: usize| x0 + plot_w * t as f64 / n;
    let py = |v: f64| y0 + plot_h * (hi - v) / (hi - lo);

    let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="14" text-anchor="middle">{title}</text>"#, WIDTH / 2.0, top + 18.0);
    let _ = writeln!(out, r#"<rect x="{x0}" y="{y0}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#);
    let step = ((hi - lo) / 8.0).ceil().max(1.0);
    let mut e = lo;
    while e <= hi {
        let y = py(e);
        let _ = writeln!(out, r##"<line x1="{x0}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##, x0 + plot_w);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">1e{}</text>"#, x0 - 6.0, y + 4.0, e as i64);
        e += step;
    }
    let last = values.len().saturating_sub(1);
    for t in [0, last / 2, last] {
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{t}</text>"#, px(t), y0 + plot_h + 16.0);
    }
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">iteration</text>"#, x0 + plot_w / 2.0, y0 + plot_h + 32.0);

    let mut segment = String::new();
    let flush = |segment: &mut String, out: &mut String| {
        if !segment.is_empty() {
            let _ = writeln!(out, r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#, segment.trim_end());
            segment.clear();
        }
    };
    for (t, v) in logs.iter().enumerate() {
        match v {
            Some(v) => {
                let _ = write!(segment, "{:.2},{:.2} ", px(t), py(*v));
            }
            None => flush(&mut segment, out),
        }
    }
    flush(&mut segment, out);
}

/// Two stacked log-y charts: MSE and N-CP against the iteration. Zero entries leave gaps.
pub fn write_svg(series: &StatsSeries, path: &Path) -> Result<()> {
    let mut out = String::new();
    let height = 2.0 * PANEL;
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" font-family="sans-serif">"#);
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    panel(&mut out, "MSE", &series.mse, 0.0);
    panel(&mut out, "N-CP", &series.ncp, PANEL);
    out.push_str("</svg>\n");
    write_file(path, &out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series() -> StatsSeries {
        StatsSeries { mse: vec![4.0, 1.0], ncp: vec![1.0, 0.0], trials: 1, diverged: 0 }
    }

    #[test]
    fn csv_format_contract() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        write_csv(&series(), &p).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "t,mse,ncp\n0,4,1\n1,1,0\n");
    }

    #[test]
    fn empty_path_is_io_error() {
        assert!(matches!(write_csv(&series(), Path::new("")), Err(Error::Io { .. })));
        assert!(matches!(write_svg(&series(), Path::new("")), Err(Error::Io { .. })));
    }

    #[test]
    fn reals_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 123456.789, 2.5e-7, 0.0, 1e20, 5e-324] {
            assert_eq!(format_real(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(format_real(4.0), "4");
        assert_eq!(format_real(1e-7), "1e-7");
    }

    #[test]
    fn svg_has_two_panels() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.svg");
        write_svg(&series(), &p).unwrap();
        let body = fs::read_to_string(&p).unwrap();
        assert!(body.starts_with("<svg"));
        assert_eq!(body.matches("<rect x=").count(), 2);
    }
}
