//! File writers: CSV with 17 significant digits, `key = value` manifests and plain SVG.

use crate::error::Result;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

/// 17 significant digits; round-trips every `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(v) => fmt_f64(*v),
            Cell::I(v) => v.to_string(),
            Cell::S(s) => s.clone(),
        }
    }
}

pub fn csv_string(header: &[&str], rows: &[Vec<Cell>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.iter().map(Cell::render).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
    std::fs::write(path, csv_string(header, rows))?;
    Ok(())
}

/// Sorted `key = value` lines.
#[derive(Default)]
pub struct Manifest(pub BTreeMap<String, String>);

impl Manifest {
    pub fn set(&mut self, key: &str, val: impl ToString) {
        self.0.insert(key.to_string(), val.to_string());
    }

    pub fn num(&mut self, key: &str, v: f64) {
        self.set(key, fmt_f64(v));
    }

    pub fn render(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }

    pub fn parse(text: &str) -> BTreeMap<String, String> {
        text.lines()
            .filter_map(|l| l.split_once(" = "))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }
}

const W: f64 = 640.0;
const H: f64 = 480.0;
const M: f64 = 56.0;

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        M + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * M)
    }
    fn py(&self, y: f64) -> f64 {
        H - M - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * M)
    }
}

fn open(svg: &mut String, f: &Frame, xlabel: &str, ylabel: &str, title: &str) {
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{title}</text>"#, W / 2.0);
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{xlabel}</text>"#, W / 2.0, H - 12.0);
    let _ = writeln!(svg, r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{ylabel}</text>"#, H / 2.0, H / 2.0);
    let _ = writeln!(svg, r#"<rect x="{M}" y="{M}" width="{}" height="{}" fill="none" stroke="black"/>"#, W - 2.0 * M, H - 2.0 * M);
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let xv = f.x.0 + t * (f.x.1 - f.x.0);
        let yv = f.y.0 + t * (f.y.1 - f.y.0);
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#, f.px(xv), H - M + 16.0, tick(xv));
        let _ = writeln!(svg, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, M - 4.0, f.py(yv) + 4.0, tick(yv));
    }
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Line plot of several named series sharing one frame.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[(&str, &[(f64, f64)])]) -> String {
    const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];
    let pts = series.iter().flat_map(|s| s.1.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        (x0, x1) = (x0 - 1.0, x0 + 1.0);
    }
    y0 = y0.min(0.0);
    if !(y1 > y0) {
        y1 = y0 + 1.0;
    }
    let f = Frame { x: (x0, x1), y: (y0, y1 + 0.05 * (y1 - y0)) };
    let mut svg = String::new();
    open(&mut svg, &f, xlabel, ylabel, title);
    for (k, (name, data)) in series.iter().enumerate() {
        let c = COLORS[k % COLORS.len()];
        let path: Vec<String> = data
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y)))
            .collect();
        let _ = writeln!(svg, r#"<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        let ly = M + 16.0 + 16.0 * k as f64;
        let _ = writeln!(svg, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{c}" stroke-width="2"/>"#, W - M - 120.0, W - M - 100.0);
        let _ = writeln!(svg, r#"<text x="{}" y="{}">{name}</text>"#, W - M - 94.0, ly + 4.0);
    }
    svg.push_str("</svg>\n");
    svg
}

/// Heat map with one rectangle per grid point, colored by label, and overlaid curves.
pub fn heat_map(
    title: &str,
    xs: &[f64],
    ys: &[f64],
    label: impl Fn(usize, usize) -> String,
    palette: &[(&str, &str)],
    curves: &[(&str, Vec<(f64, f64)>)],
) -> String {
    let step = |v: &[f64]| if v.len() > 1 { v[1] - v[0] } else { 1.0 };
    let (dx, dy) = (step(xs), step(ys));
    let f = Frame {
        x: (xs[0] - dx / 2.0, xs[xs.len() - 1] + dx / 2.0),
        y: (ys[0] - dy / 2.0, ys[ys.len() - 1] + dy / 2.0),
    };
    let mut svg = String::new();
    open(&mut svg, &f, "alpha", "tau", title);
    let _ = writeln!(svg, r#"<g id="cells">"#);
    for i in 0..xs.len() {
        for j in 0..ys.len() {
            let l = label(i, j);
            let color = palette.iter().find(|p| p.0 == l).map_or("#bbbbbb", |p| p.1);
            let (x0, y0) = (f.px(xs[i] - dx / 2.0), f.py(ys[j] + dy / 2.0));
            let (w, h) = (f.px(xs[i] + dx / 2.0) - x0, f.py(ys[j] - dy / 2.0) - y0);
            let _ = writeln!(
                svg,
                r#"<rect class="cell" x="{x0:.2}" y="{y0:.2}" width="{w:.2}" height="{h:.2}" fill="{color}" stroke="white" stroke-width="0.5"><title>{l} at ({}, {})</title></rect>"#,
                tick(xs[i]),
                tick(ys[j])
            );
            let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10">{l}</text>"#, x0 + w / 2.0, y0 + h / 2.0 + 4.0);
        }
    }
    let _ = writeln!(svg, "</g>");
    for (name, pts) in curves {
        let inside: Vec<String> = pts
            .iter()
            .filter(|p| p.0 >= f.x.0 && p.0 <= f.x.1 && p.1 >= f.y.0 && p.1 <= f.y.1)
            .map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y)))
            .collect();
        let _ = writeln!(svg, r#"<polyline fill="none" stroke="black" stroke-width="2" points="{}"><title>{name}</title></polyline>"#, inside.join(" "));
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(csv_string(&["a", "b"], &[vec![Cell::I(1), Cell::S("x".into())]]), "a,b\n1,x\n");
    }

    #[test]
    fn one_rect_per_grid_point() {
        let svg = heat_map("t", &[0.0, 1.0, 2.0], &[1.0, 2.0], |i, j| format!("{}", i + j), &[("0", "red")], &[]);
        assert_eq!(svg.matches(r#"class="cell""#).count(), 6);
    }
}
