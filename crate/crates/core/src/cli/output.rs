//! Tables and their CSV, JSON and SVG renderings.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

/// Nine significant digits, fixed notation for `1e-4 ≤ |v| < 1e9` (always
/// with a fractional part), scientific otherwise.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0.0".into();
    }
    let a = v.abs();
    if (1e-4..1e9).contains(&a) {
        let exp = a.log10().floor() as i32;
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if decimals == 0 {
            return format!("{s}.0");
        }
        let s = s.trim_end_matches('0');
        if s.ends_with('.') {
            format!("{s}0")
        } else {
            s.to_string()
        }
    } else {
        let s = format!("{v:.8e}");
        let (mant, exp) = s.split_once('e').expect("scientific format");
        let mant = mant.trim_end_matches('0');
        let mant = if mant.ends_with('.') { format!("{mant}0") } else { mant.to_string() };
        format!("{mant}e{exp}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => fmt_num(*v),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => fmt_num(*v).parse::<f64>().map(Value::from).unwrap_or(Value::Null),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

/// Column-labelled rows; the first column is the abscissa for plots.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra key/value notes carried into JSON output.
    pub meta: Vec<(String, String)>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new(), meta: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut m = Map::new();
                for (c, v) in self.columns.iter().zip(r) {
                    m.insert(c.clone(), v.json());
                }
                Value::Object(m)
            })
            .collect();
        let meta: Map<String, Value> = self.meta.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        let doc = json!({ "columns": self.columns, "rows": rows, "meta": meta });
        let mut s = serde_json::to_string_pretty(&doc).expect("table serializes");
        s.push('\n');
        s
    }

    /// One polyline per numeric column against the first column.
    pub fn to_svg(&self) -> String {
        const W: f64 = 640.0;
        const H: f64 = 400.0;
        const PAD: f64 = 40.0;
        const COLORS: [&str; 8] =
            ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

        let num = |r: &Vec<Cell>, j: usize| match r.get(j) {
            Some(Cell::Num(v)) if v.is_finite() => Some(*v),
            _ => None,
        };
        let plotted: Vec<usize> =
            (1..self.columns.len()).filter(|&j| self.rows.iter().any(|r| num(r, j).is_some())).collect();
        let xs: Vec<f64> = self.rows.iter().filter_map(|r| num(r, 0)).collect();
        let ys: Vec<f64> = plotted.iter().flat_map(|&j| self.rows.iter().filter_map(move |r| num(r, j))).collect();
        let range = |v: &[f64]| {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if hi - lo <= 0.0 {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo, hi)
            }
        };
        let (x0, x1) = range(&xs);
        let (y0, y1) = range(&ys);
        let px = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
        let py = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ =
            writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
        let _ = writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            W - 2.0 * PAD,
            H - 2.0 * PAD
        );
        for (i, &j) in plotted.iter().enumerate() {
            let pts: Vec<String> = self
                .rows
                .iter()
                .filter_map(|r| Some((num(r, 0)?, num(r, j)?)))
                .map(|(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            let color = COLORS[i % COLORS.len()];
            let _ = writeln!(
                s,
                r#"<polyline data-column="{}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                xml_escape(&self.columns[j]),
                pts.join(" ")
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" font-size="12" fill="{color}">{}</text>"#,
                W - PAD + 4.0 - 120.0,
                PAD + 14.0 * (i as f64 + 1.0),
                xml_escape(&self.columns[j])
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12">{}</text>"#,
            W / 2.0,
            H - 10.0,
            xml_escape(&self.columns[0])
        );
        s.push_str("</svg>\n");
        s
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
