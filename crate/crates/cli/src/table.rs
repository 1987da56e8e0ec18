//! Result tables and their CSV, JSON and SVG renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Columns drawn against the first one when plotting.
    pub plot_columns: Vec<usize>,
    /// Scalar diagnostics of the run (KS distances, design constants, ...).
    pub meta: BTreeMap<String, Value>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            rows: Vec::new(),
            plot_columns: (1..columns.len()).collect(),
            meta: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn plot(mut self, names: &[&str]) -> Self {
        self.plot_columns = names
            .iter()
            .filter_map(|n| self.columns.iter().position(|c| c == n))
            .collect();
        self
    }

    pub fn set_meta(&mut self, key: &str, value: impl Into<Value>) {
        self.meta.insert(key.to_string(), value.into());
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// Header row plus one line per row; NaN becomes an empty field.
    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let out = |e: csv::Error| CliError::Output(format!("csv: {e}"));
        w.write_record(&self.columns).map_err(out)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&v| format_value(v)))
                .map_err(out)?;
        }
        w.into_inner()
            .map_err(|e| CliError::Output(format!("csv: {}", e.error())))
    }

    /// `{"meta": {...}, "rows": [{column: value, ...}, ...]}`; NaN becomes null.
    pub fn to_json(&self) -> Result<Vec<u8>, CliError> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, &v)| (c.clone(), json_number(v)))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut meta: Map<String, Value> = self.meta.clone().into_iter().collect();
        meta.insert(
            "columns".into(),
            Value::Array(self.columns.iter().cloned().map(Value::String).collect()),
        );
        let doc = serde_json::json!({ "meta": meta, "rows": rows });
        let mut bytes =
            serde_json::to_vec_pretty(&doc).map_err(|e| CliError::Output(format!("json: {e}")))?;
        bytes.push(b'\n');
        Ok(bytes)
    }

    /// Line chart of the plot columns against the first column.
    pub fn to_svg(&self, title: &str, log_y: bool) -> String {
        let series: Vec<(String, Vec<(f64, f64)>)> = self
            .plot_columns
            .iter()
            .map(|&j| {
                let pts = self
                    .rows
                    .iter()
                    .map(|r| (r[0], r[j]))
                    .filter(|(x, y)| x.is_finite() && y.is_finite() && (!log_y || *y > 0.0))
                    .map(|(x, y)| (x, if log_y { y.log10() } else { y }))
                    .collect();
                (self.columns[j].clone(), pts)
            })
            .collect();
        render_svg(title, &self.columns[0], &series, log_y)
    }
}

pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

fn json_number(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 460.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 40.0, 50.0); // left, right, top, bottom
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 * (1.0 + lo.abs()) {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn render_svg(
    title: &str,
    x_label: &str,
    series: &[(String, Vec<(f64, f64)>)],
    log_y: bool,
) -> String {
    let (ml, mr, mt, mb) = MARGIN;
    let (pw, ph) = (WIDTH - ml - mr, HEIGHT - mt - mb);
    let (x0, x1) = bounds(series.iter().flat_map(|s| s.1.iter().map(|p| p.0)));
    let (y0, y1) = bounds(series.iter().flat_map(|s| s.1.iter().map(|p| p.1)));
    let sx = |x: f64| ml + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| mt + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r##"<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##
    );
    for t in ticks(x0, x1) {
        let x = sx(t);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="#333"/><text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"##,
            mt + ph,
            mt + ph + 5.0,
            mt + ph + 18.0,
            tick_label(t, false)
        );
    }
    for t in ticks(y0, y1) {
        let y = sy(t);
        let _ = writeln!(
            s,
            r##"<line x1="{}" y1="{y:.2}" x2="{ml}" y2="{y:.2}" stroke="#333"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
            ml - 5.0,
            ml - 8.0,
            y + 4.0,
            tick_label(t, log_y)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        ml + pw / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    for (k, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        let ly = mt + 16.0 + 16.0 * k as f64;
        let lx = ml + pw - 170.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn tick_label(v: f64, log: bool) -> String {
    if log {
        format!("1e{}", v.round() as i64)
    } else {
        let r = (v * 1e6).round() / 1e6;
        format!("{}", if r == 0.0 { 0.0 } else { r })
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["x", "y_db"]);
        t.push(vec![1.0, 0.5]);
        t.push(vec![2.0, f64::NAN]);
        t.set_meta("ks", 0.01);
        t
    }

    #[test]
    fn csv_has_header_and_blank_nan() {
        let csv = String::from_utf8(sample().to_csv().unwrap()).unwrap();
        assert_eq!(csv, "x,y_db\n1,0.5\n2,\n");
    }

    #[test]
    fn json_has_meta_and_rows() {
        let v: Value = serde_json::from_slice(&sample().to_json().unwrap()).unwrap();
        assert_eq!(v["meta"]["ks"], 0.01);
        assert_eq!(v["rows"][0]["y_db"], 0.5);
        assert!(v["rows"][1]["y_db"].is_null());
    }

    #[test]
    fn svg_is_well_formed() {
        let svg = sample().to_svg("t <1>", true);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("t &lt;1&gt;"));
        assert_eq!(svg.matches("<polyline").count(), 1);
    }

    #[test]
    fn tick_steps_are_round() {
        assert_eq!(ticks(0.0, 1.0).len(), 6);
        assert_eq!(ticks(0.0, 180.0), vec![0.0, 50.0, 100.0, 150.0]);
    }
}
