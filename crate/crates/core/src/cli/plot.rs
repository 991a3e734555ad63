//! Minimal SVG line charts drawn from the CSV tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::analysis::Observable;
use crate::cli::csvio::Table;
use crate::error::Result;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 210.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

#[derive(Clone, Debug, Default)]
pub struct PlotSeries {
    pub label: String,
    pub color: usize,
    pub dashed: bool,
    pub line: bool,
    pub markers: bool,
    /// (x, y, error bar half-width)
    pub points: Vec<(f64, f64, Option<f64>)>,
}

#[derive(Clone, Debug, Default)]
pub struct Chart {
    pub title: String,
    pub xlabel: String,
    pub ylabel: String,
    pub series: Vec<PlotSeries>,
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let f = raw / mag;
    let nice = if f < 1.5 {
        1.0
    } else if f < 3.5 {
        2.0
    } else if f < 7.5 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if lo > hi {
        return None;
    }
    if hi - lo < 1e-12 * (1.0 + lo.abs()) {
        let pad = 0.5 * (1.0 + lo.abs());
        return Some((lo - pad, hi + pad));
    }
    Some((lo, hi))
}

fn fmt_tick(v: f64, step: f64) -> String {
    let digits = (-step.log10().floor()).max(0.0) as usize;
    let s = format!("{v:.digits$}");
    if s.starts_with('-') && s.trim_start_matches(['-', '0', '.']).is_empty() {
        s[1..].to_string()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Chart {
    /// None when no series holds a finite point.
    pub fn render(&self) -> Option<String> {
        let finite = |s: &PlotSeries| s.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()).copied().collect::<Vec<_>>();
        let pts: Vec<Vec<(f64, f64, Option<f64>)>> = self.series.iter().map(finite).collect();
        let all = || pts.iter().flatten();
        let (x0, x1) = range(all().map(|p| p.0))?;
        let (y0, y1) = range(all().flat_map(|p| {
            let e = p.2.filter(|e| e.is_finite()).unwrap_or(0.0);
            [p.1 - e, p.1 + e]
        }))?;
        let (xstep, ystep) = (nice_step(x1 - x0), nice_step(y1 - y0));
        let (x0, x1) = ((x0 / xstep).floor() * xstep, (x1 / xstep).ceil() * xstep);
        let (y0, y1) = ((y0 / ystep).floor() * ystep, (y1 / ystep).ceil() * ystep);
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>"#, LEFT + pw / 2.0, escape(&self.title));

        let nx = ((x1 - x0) / xstep).round() as i64;
        for k in 0..=nx {
            let x = x0 + k as f64 * xstep;
            let px = sx(x);
            let _ = writeln!(svg, r##"<line x1="{px:.1}" y1="{:.1}" x2="{px:.1}" y2="{:.1}" stroke="#e0e0e0"/>"##, TOP, TOP + ph);
            let _ = writeln!(svg, r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, TOP + ph + 16.0, fmt_tick(x, xstep));
        }
        let ny = ((y1 - y0) / ystep).round() as i64;
        for k in 0..=ny {
            let y = y0 + k as f64 * ystep;
            let py = sy(y);
            let _ = writeln!(svg, r##"<line x1="{LEFT:.1}" y1="{py:.1}" x2="{:.1}" y2="{py:.1}" stroke="#e0e0e0"/>"##, LEFT + pw);
            let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, LEFT - 6.0, py + 4.0, fmt_tick(y, ystep));
        }
        let _ = writeln!(svg, r#"<rect x="{LEFT:.1}" y="{TOP:.1}" width="{pw:.1}" height="{ph:.1}" fill="none" stroke="black"/>"#);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, HEIGHT - 12.0, escape(&self.xlabel));
        let _ = writeln!(
            svg,
            r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&self.ylabel)
        );

        for (k, (s, p)) in self.series.iter().zip(&pts).enumerate() {
            let color = PALETTE[s.color % PALETTE.len()];
            let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            if s.line && p.len() > 1 {
                let path: Vec<String> = p.iter().map(|q| format!("{:.2},{:.2}", sx(q.0), sy(q.1))).collect();
                let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.6"{dash}/>"#, path.join(" "));
            }
            if s.markers {
                for q in p {
                    if let Some(e) = q.2.filter(|e| e.is_finite() && *e > 0.0) {
                        let _ = writeln!(
                            svg,
                            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{color}"/>"#,
                            sy(q.1 - e),
                            sy(q.1 + e),
                            x = sx(q.0)
                        );
                    }
                    let fill = if s.dashed { "white" } else { color };
                    let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{fill}" stroke="{color}"/>"#, sx(q.0), sy(q.1));
                }
            }
            let ly = TOP + 10.0 + 18.0 * k as f64;
            let lx = LEFT + pw + 12.0;
            let _ = writeln!(svg, r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="1.6"{dash}/>"#, lx + 24.0);
            let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, lx + 30.0, ly + 4.0, escape(&s.label));
        }
        svg.push_str("</svg>\n");
        Some(svg)
    }
}

/// (n, ensemble) → (x, y, err) rows of one table column.
fn grouped(t: &Table, x: &str, y: &str, err: Option<&str>, filter: Option<(&str, &str)>) -> Result<BTreeMap<(usize, String), Vec<(f64, f64, Option<f64>)>>> {
    let (cn, ce, cx, cy) = (t.col("n")?, t.col("ensemble")?, t.col(x)?, t.col(y)?);
    let cerr = err.map(|e| t.col(e)).transpose()?;
    let cfilter = filter.map(|(c, v)| t.col(c).map(|c| (c, v))).transpose()?;
    let mut out: BTreeMap<(usize, String), Vec<_>> = BTreeMap::new();
    for row in 0..t.rows.len() {
        if let Some((c, v)) = cfilter {
            if t.rows[row][c] != v {
                continue;
            }
        }
        let e = match cerr {
            Some(c) => Some(t.get::<f64>(row, c)?),
            None => None,
        };
        out.entry((t.get(row, cn)?, t.get(row, ce)?)).or_default().push((t.get(row, cx)?, t.get(row, cy)?, e));
    }
    Ok(out)
}

fn add_group(chart: &mut Chart, colors: &mut Vec<usize>, source: &str, groups: BTreeMap<(usize, String), Vec<(f64, f64, Option<f64>)>>, line: bool, markers: bool) {
    for ((n, ens), points) in groups {
        let color = match colors.iter().position(|&m| m == n) {
            Some(k) => k,
            None => {
                colors.push(n);
                colors.len() - 1
            }
        };
        chart.series.push(PlotSeries {
            label: format!("{source} n={n} {ens}"),
            color,
            dashed: ens == "labeled",
            line,
            markers,
            points,
        });
    }
}

fn read_if_present(dir: &Path, name: &str) -> Result<Option<Table>> {
    let path = dir.join(name);
    if path.exists() {
        Table::read(&path).map(Some)
    } else {
        Ok(None)
    }
}

/// Writes `plots/<observable>.svg` and `plots/tau.svg`; returns the number written.
pub fn render_directory(dir: &Path) -> Result<usize> {
    let exact = read_if_present(dir, "exact.csv")?;
    let estimates = read_if_present(dir, "estimates.csv")?;
    let rew = read_if_present(dir, "reweight.csv")?;
    let manifest = read_if_present(dir, "manifest.csv")?;
    let plots = dir.join("plots");
    let mut written = 0;
    let mut save = |name: &str, chart: &Chart| -> Result<()> {
        if let Some(svg) = chart.render() {
            fs::create_dir_all(&plots)?;
            fs::write(plots.join(format!("{name}.svg")), svg)?;
            written += 1;
        }
        Ok(())
    };
    for obs in Observable::ALL {
        let name = obs.name();
        let mut chart = Chart { title: name.to_string(), xlabel: "beta".into(), ylabel: name.into(), series: Vec::new() };
        let mut colors = Vec::new();
        if let Some(t) = &exact {
            add_group(&mut chart, &mut colors, "exact", grouped(t, "beta", name, None, None)?, true, false);
        }
        if let Some(t) = &rew {
            add_group(&mut chart, &mut colors, "reweight", grouped(t, "beta", name, None, None)?, true, false);
        }
        if let Some(t) = &estimates {
            add_group(&mut chart, &mut colors, "mc", grouped(t, "beta", "value", Some("stderr"), Some(("observable", name)))?, false, true);
        }
        save(name, &chart)?;
    }
    if let Some(t) = &manifest {
        let mut chart = Chart { title: "integrated autocorrelation time".into(), xlabel: "beta".into(), ylabel: "tau (sweeps)".into(), series: Vec::new() };
        add_group(&mut chart, &mut Vec::new(), "tau", grouped(t, "beta", "tau", None, None)?, true, true);
        save("tau", &chart)?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_deterministic_svg() {
        let chart = Chart {
            title: "c".into(),
            xlabel: "beta".into(),
            ylabel: "c".into(),
            series: vec![
                PlotSeries { label: "a".into(), line: true, points: vec![(0.0, 0.0, None), (1.0, 2.0, None)], ..Default::default() },
                PlotSeries { label: "b".into(), dashed: true, markers: true, points: vec![(0.5, 1.0, Some(0.1)), (0.7, f64::NAN, None)], ..Default::default() },
            ],
        };
        let a = chart.render().unwrap();
        assert_eq!(a, chart.render().unwrap());
        assert!(a.starts_with("<svg") && a.contains("stroke-dasharray") && a.contains("<polyline"));
        assert!(Chart::default().render().is_none());
    }

    #[test]
    fn ticks() {
        assert_eq!(nice_step(10.0), 2.0);
        assert_eq!(fmt_tick(-0.0, 0.5), "0.0");
        assert_eq!(fmt_tick(2.5, 0.5), "2.5");
    }
}
