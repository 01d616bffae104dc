//! Self-contained SVG renderings of the tables this tool writes.

use std::fmt::Write;

use crate::csvio::{Table, TableKind};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Heatmap,
    Lines,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;

const PHASE_COLORS: [(&str, &str); 5] =
    [("MI", "#7b3294"), ("DW", "#d7191c"), ("SF", "#2c7bb6"), ("SS", "#f2c80f"), ("none", "#bdbdbd")];
const MISSING: &str = "#bdbdbd";
const LINE_COLORS: [&str; 6] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"];
// viridis at 0, 1/4, ..., 1
const RAMP: [[f64; 3]; 5] = [
    [68.0, 1.0, 84.0],
    [59.0, 82.0, 139.0],
    [33.0, 145.0, 140.0],
    [94.0, 201.0, 98.0],
    [253.0, 231.0, 37.0],
];

fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0) * 4.0;
    let k = (t.floor() as usize).min(3);
    let f = t - k as f64;
    let c: Vec<u8> = (0..3).map(|i| (RAMP[k][i] + f * (RAMP[k + 1][i] - RAMP[k][i])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn sorted_unique(v: &[f64]) -> Vec<f64> {
    let mut u: Vec<f64> = v.iter().copied().filter(|x| x.is_finite()).collect();
    u.sort_by(f64::total_cmp);
    u.dedup();
    u
}

fn finite_range(v: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = v.filter(|x| x.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if lo > hi {
        None
    } else if lo == hi {
        Some((lo - 0.5, hi + 0.5))
    } else {
        Some((lo, hi))
    }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn open(svg: &mut String) {
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    );
}

fn axes(svg: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        svg,
        "<rect x=\"{x0}\" y=\"{y1}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"black\"/>",
        x1 - x0,
        y0 - y1
    );
    let _ = writeln!(svg, "<text x=\"{x0}\" y=\"{:.2}\" text-anchor=\"start\">{:.4}</text>", y0 + 16.0, f.x.0);
    let _ = writeln!(svg, "<text x=\"{x1}\" y=\"{:.2}\" text-anchor=\"end\">{:.4}</text>", y0 + 16.0, f.x.1);
    let _ = writeln!(svg, "<text x=\"{:.2}\" y=\"{y0}\" text-anchor=\"end\">{:.4}</text>", x0 - 4.0, f.y.0);
    let _ = writeln!(svg, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{:.4}</text>", x0 - 4.0, y1 + 12.0, f.y.1);
    let _ = writeln!(svg, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{x_label}</text>", 0.5 * (x0 + x1), HEIGHT - 12.0);
    let _ = writeln!(
        svg,
        "<text x=\"16\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">{y_label}</text>",
        0.5 * (y0 + y1),
        0.5 * (y0 + y1)
    );
}

fn legend(svg: &mut String, entries: &[(String, String)]) {
    for (k, (label, color)) in entries.iter().enumerate() {
        let y = TOP + 18.0 * k as f64;
        let _ = writeln!(svg, "<rect x=\"{:.2}\" y=\"{y:.2}\" width=\"12\" height=\"12\" fill=\"{color}\"/>", WIDTH - RIGHT + 12.0);
        let _ = writeln!(svg, "<text x=\"{:.2}\" y=\"{:.2}\">{label}</text>", WIDTH - RIGHT + 30.0, y + 10.0);
    }
}

fn column(table: &Table, name: &str) -> Result<usize, CliError> {
    table.column(name).ok_or_else(|| CliError::Schema(format!("no column {name:?} in this table")))
}

pub fn render(table: &Table, kind: PlotKind, column_name: Option<&str>) -> Result<String, CliError> {
    match kind {
        PlotKind::Heatmap => heatmap(table, column_name.unwrap_or("phase")),
        PlotKind::Lines => lines(table, column_name),
    }
}

fn heatmap(table: &Table, name: &str) -> Result<String, CliError> {
    if table.kind != TableKind::Scan {
        return Err(CliError::Schema("heatmaps need a scan table".into()));
    }
    if table.rows.iter().any(|r| r[2] == "none") {
        return Err(CliError::Schema("heatmaps need a two-axis scan".into()));
    }
    let col = column(table, name)?;
    let xs = table.floats(1);
    let ys = table.floats(3);
    let (ux, uy) = (sorted_unique(&xs), sorted_unique(&ys));
    let half_step = |u: &[f64]| if u.len() > 1 { 0.5 * (u[u.len() - 1] - u[0]) / (u.len() - 1) as f64 } else { 0.5 };
    let (hx, hy) = (half_step(&ux), half_step(&uy));
    let f = Frame { x: (ux[0] - hx, ux[ux.len() - 1] + hx), y: (uy[0] - hy, uy[uy.len() - 1] + hy) };

    let categorical = name == "phase";
    let numeric = if categorical { Vec::new() } else { table.floats(col) };
    let range = finite_range(numeric.iter().copied());
    let mut svg = String::new();
    open(&mut svg);
    for (i, row) in table.rows.iter().enumerate() {
        let (x, y) = (xs[i], ys[i]);
        if !(x.is_finite() && y.is_finite()) {
            continue;
        }
        let color = if categorical {
            PHASE_COLORS.iter().find(|(k, _)| *k == row[col]).map_or(MISSING.to_owned(), |(_, c)| (*c).to_owned())
        } else {
            match (range, numeric[i].is_finite()) {
                (Some((lo, hi)), true) => ramp((numeric[i] - lo) / (hi - lo)),
                _ => MISSING.to_owned(),
            }
        };
        let (px0, px1) = (f.px(x - hx), f.px(x + hx));
        let (py0, py1) = (f.py(y + hy), f.py(y - hy));
        let _ = writeln!(
            svg,
            "<rect x=\"{px0:.2}\" y=\"{py0:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{color}\"/>",
            px1 - px0,
            py1 - py0
        );
    }
    axes(&mut svg, &f, &table.rows[0][0], &table.rows[0][2]);
    let entries: Vec<(String, String)> = if categorical {
        PHASE_COLORS.iter().map(|(k, c)| ((*k).to_owned(), (*c).to_owned())).collect()
    } else if let Some((lo, hi)) = range {
        (0..5).map(|k| {
            let t = k as f64 / 4.0;
            (format!("{:.4}", lo + t * (hi - lo)), ramp(t))
        }).collect()
    } else {
        Vec::new()
    };
    legend(&mut svg, &entries);
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn lines(table: &Table, name: Option<&str>) -> Result<String, CliError> {
    // (x column, y column, series key column, axis labels)
    let (xc, yc, key, x_label, y_label) = match table.kind {
        TableKind::Boundary => (1, 3, None, table.rows[0][0].clone(), table.rows[0][2].clone()),
        TableKind::Fss => (0, 1, None, "L".to_owned(), "mu_c".to_owned()),
        TableKind::Scan => {
            let c = column(table, name.unwrap_or("energy"))?;
            if matches!(c, 0 | 2 | 5 | 10 | 11) {
                return Err(CliError::Schema("line plots need a numeric column".into()));
            }
            let key = if table.rows[0][2] == "none" { None } else { Some(3) };
            (1, c, key, table.rows[0][0].clone(), table.kind.columns()[c].to_owned())
        }
    };
    let xs = table.floats(xc);
    let ys = table.floats(yc);
    let keys: Vec<f64> = key.map_or(vec![0.0], |k| sorted_unique(&table.floats(k)));
    let key_vals = key.map(|k| table.floats(k));
    let fx = finite_range(xs.iter().copied()).ok_or_else(|| CliError::Schema("no finite x values".into()))?;
    let fy = finite_range(ys.iter().copied()).unwrap_or((0.0, 1.0));
    let f = Frame { x: fx, y: fy };

    let mut svg = String::new();
    open(&mut svg);
    let mut entries = Vec::new();
    for (s, &kv) in keys.iter().enumerate() {
        let color = LINE_COLORS[s % LINE_COLORS.len()];
        let mut pts: Vec<(f64, f64)> = (0..xs.len())
            .filter(|&i| key_vals.as_ref().is_none_or(|k| k[i] == kv))
            .map(|i| (xs[i], ys[i]))
            .filter(|(x, _)| x.is_finite())
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        // NaN values split the series into separate polylines
        for seg in pts.split(|(_, y)| !y.is_finite()).filter(|s| !s.is_empty()) {
            let coords: Vec<String> = seg.iter().map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y))).collect();
            let _ = writeln!(
                svg,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
                coords.join(" ")
            );
            for &(x, y) in seg {
                let _ = writeln!(svg, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2\" fill=\"{color}\"/>", f.px(x), f.py(y));
            }
        }
        if key.is_some() {
            entries.push((format!("{} = {kv:.4}", table.rows[0][2]), color.to_owned()));
        }
    }
    axes(&mut svg, &f, &x_label, &y_label);
    legend(&mut svg, &entries);
    svg.push_str("</svg>\n");
    Ok(svg)
}
