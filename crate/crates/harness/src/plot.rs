//! SVG line charts generated from sweep CSV files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{HarnessError, Result};
use crate::runner::write_file;

pub const AGGREGATE_COLUMNS: [&str; 4] = ["k", "cell", "mean_dist_sq", "median_dist_sq"];
pub const SUMMARY_COLUMNS: [&str; 10] = [
    "param",
    "cell",
    "seeds",
    "converged",
    "completed",
    "diverged",
    "failed",
    "median_iterations_to_rtol",
    "mean_inner_per_step",
    "final_mean_dist_sq",
];

/// Values below this are drawn at this height on the log axis.
pub const PLOT_FLOOR: f64 = 1e-16;
const MAX_POINTS: usize = 2000;
const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

/// Keeps at most `MAX_POINTS` points, always including the last one.
fn downsample(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    if points.len() <= MAX_POINTS {
        return points.to_vec();
    }
    let stride = points.len().div_ceil(MAX_POINTS - 1);
    let mut out: Vec<_> = points.iter().step_by(stride).copied().collect();
    if out.last() != points.last() {
        out.push(*points.last().unwrap());
    }
    out
}

pub fn render_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let floor_log = PLOT_FLOOR.log10();
    let logs = series
        .iter()
        .flat_map(|s| &s.points)
        .map(|&(_, y)| if y > PLOT_FLOOR { y.log10() } else { floor_log })
        .filter(|v| v.is_finite());
    let (mut y_lo, mut y_hi) = logs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !y_lo.is_finite() {
        (y_lo, y_hi) = (floor_log, 0.0);
    }
    let (y_lo, mut y_hi) = (y_lo.floor(), y_hi.ceil());
    if y_hi <= y_lo {
        y_hi = y_lo + 1.0;
    }
    let x_hi = series
        .iter()
        .flat_map(|s| &s.points)
        .map(|p| p.0)
        .fold(1.0_f64, f64::max);

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + x / x_hi * plot_w;
    let py = |y: f64| {
        let v = if y > PLOT_FLOOR { y.log10().min(y_hi) } else { floor_log.max(y_lo) };
        TOP + (y_hi - v) / (y_hi - y_lo) * plot_h
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(title)
    );

    // Decade grid on the y axis, at most about a dozen labels.
    let decades = (y_hi - y_lo) as usize;
    let label_every = decades.div_ceil(12).max(1);
    for (j, e) in (y_lo as i64..=y_hi as i64).enumerate() {
        let y = TOP + (y_hi - e as f64) / (y_hi - y_lo) * plot_h;
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#dddddd"/>"##,
            LEFT + plot_w
        );
        if j % label_every == 0 {
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">1e{e}</text>"#,
                LEFT - 6.0,
                y + 4.0
            );
        }
    }
    for j in 0..=5 {
        let x = x_hi * j as f64 / 5.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            px(x),
            TOP + plot_h + 18.0,
            x.round()
        );
    }
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w:.1}" height="{plot_h:.1}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(y_label)
    );

    for (idx, s) in series.iter().enumerate() {
        let color = COLORS[idx % COLORS.len()];
        let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let mut pts = String::new();
        for &(x, y) in &downsample(&s.points) {
            if !y.is_finite() {
                continue;
            }
            if !pts.is_empty() {
                pts.push(' ');
            }
            let _ = write!(pts, "{:.2},{:.2}", px(x), py(y));
        }
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{pts}"/>"#
        );
        let ly = TOP + 10.0 + 20.0 * idx as f64;
        let lx = LEFT + plot_w + 15.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"{dash}/>"#,
            lx + 25.0
        );
        let label = if s.dashed { format!("{} (diverged)", s.label) } else { s.label.clone() };
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 32.0,
            ly + 4.0,
            escape(&label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn open_csv(path: &Path, expected: &[&str]) -> Result<(csv::StringRecord, Vec<csv::StringRecord>)> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => HarnessError::Io { path: path.to_path_buf(), source: io },
        other => HarnessError::input(path, format!("{other:?}")),
    })?;
    let headers = reader
        .headers()
        .map_err(|e| HarnessError::input(path, e.to_string()))?
        .clone();
    let missing: Vec<_> = expected
        .iter()
        .filter(|c| !headers.iter().any(|h| h == **c))
        .collect();
    if !missing.is_empty() {
        return Err(HarnessError::input(
            path,
            format!(
                "missing columns {missing:?}; expected schema: {}",
                expected.join(",")
            ),
        ));
    }
    let rows = reader
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| HarnessError::input(path, e.to_string()))?;
    Ok((headers, rows))
}

fn column(headers: &csv::StringRecord, name: &str) -> usize {
    headers.iter().position(|h| h == name).expect("checked by open_csv")
}

fn parse<T: std::str::FromStr>(path: &Path, row: usize, name: &str, text: &str) -> Result<T> {
    text.parse()
        .map_err(|_| HarnessError::input(path, format!("row {row}: bad {name} value {text:?}")))
}

/// Renders one family from its aggregate CSV and, if present, its summary
/// CSV (used for the sweep parameter name and to mark diverged cells).
pub fn plot_family(aggregate: &Path, summary: Option<&Path>) -> Result<String> {
    let (headers, rows) = open_csv(aggregate, &AGGREGATE_COLUMNS)?;
    let (ck, ccell, cmean) = (
        column(&headers, "k"),
        column(&headers, "cell"),
        column(&headers, "mean_dist_sq"),
    );
    // Cells keep their order of first appearance.
    let mut order: Vec<String> = Vec::new();
    let mut data: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for (i, row) in rows.iter().enumerate() {
        let cell = row[ccell].to_owned();
        let k: f64 = parse(aggregate, i + 1, "k", &row[ck])?;
        let v: f64 = parse(aggregate, i + 1, "mean_dist_sq", &row[cmean])?;
        if !data.contains_key(&cell) {
            order.push(cell.clone());
        }
        data.entry(cell).or_default().push((k, v));
    }

    let mut param = String::from("cell");
    let mut diverged: BTreeMap<String, bool> = BTreeMap::new();
    if let Some(summary) = summary {
        let (h, rows) = open_csv(summary, &SUMMARY_COLUMNS)?;
        let (cp, cc, cd) = (column(&h, "param"), column(&h, "cell"), column(&h, "diverged"));
        for (i, row) in rows.iter().enumerate() {
            param = row[cp].to_owned();
            let count: usize = parse(summary, i + 1, "diverged", &row[cd])?;
            diverged.insert(row[cc].to_owned(), count > 0);
        }
    }

    let series: Vec<Series> = order
        .iter()
        .map(|cell| {
            let pts = &data[cell];
            let base = pts.first().map_or(1.0, |p| p.1);
            let scale = if base > 0.0 && base.is_finite() { base } else { 1.0 };
            Series {
                label: format!("{param} = {cell}"),
                points: pts.iter().map(|&(k, v)| (k, v / scale)).collect(),
                dashed: diverged.get(cell).copied().unwrap_or(false),
            }
        })
        .collect();
    let title = aggregate
        .file_stem()
        .and_then(|s| s.to_str())
        .and_then(|s| s.strip_prefix("aggregate_"))
        .unwrap_or("sweep")
        .to_owned();
    Ok(render_svg(&title, "iteration k", "dist_sq / dist_sq(0)", &series))
}

/// Regenerates `<family>.svg` for every `aggregate_<family>.csv` in `dir`.
pub fn plot_dir(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(HarnessError::io(dir))?;
    let mut families = Vec::new();
    for entry in entries {
        let entry = entry.map_err(HarnessError::io(dir))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if let Some(family) = name.strip_prefix("aggregate_").and_then(|n| n.strip_suffix(".csv")) {
            families.push(family.to_owned());
        }
    }
    if families.is_empty() {
        return Err(HarnessError::Io {
            path: dir.to_path_buf(),
            source: std::io::Error::new(
                std::io::ErrorKind::NotFound,
                "no aggregate_<family>.csv files to plot",
            ),
        });
    }
    families.sort();
    let mut written = Vec::new();
    for family in families {
        let aggregate = dir.join(format!("aggregate_{family}.csv"));
        let summary = dir.join(format!("summary_{family}.csv"));
        let summary = summary.exists().then_some(summary);
        let svg = plot_family(&aggregate, summary.as_deref())?;
        let out = dir.join(format!("{family}.svg"));
        write_file(&out, svg.as_bytes())?;
        written.push(out);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn downsample_keeps_endpoints() {
        let pts: Vec<_> = (0..10_001).map(|k| (k as f64, 1.0)).collect();
        let d = downsample(&pts);
        assert!(d.len() <= MAX_POINTS);
        assert_eq!(d.first(), pts.first());
        assert_eq!(d.last(), pts.last());
    }

    #[test]
    fn zero_values_sit_on_the_floor() {
        let s = Series { label: "a".into(), points: vec![(0.0, 1.0), (1.0, 0.0)], dashed: false };
        let svg = render_svg("t", "k", "y", &[s]);
        assert!(svg.contains("1e-16"));
        assert_eq!(svg.matches("<polyline").count(), 1);
    }
}
