//! Static error-vs-bound line chart on a log scale.

use std::fmt::Write;

use rewb_core::engine::Row;

const W: f64 = 800.0;
const H: f64 = 500.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const MAX_POINTS: usize = 2000;

fn polyline(pts: &[(f64, f64)], color: &str) -> String {
    let mut s = String::new();
    for (x, y) in pts {
        let _ = write!(s, "{x:.2},{y:.2} ");
    }
    format!(
        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
        s.trim_end()
    )
}

pub fn error_bound_chart(rows: &[Row<f64>]) -> String {
    let step = rows.len().div_ceil(MAX_POINTS).max(1);
    let picked: Vec<&Row<f64>> = rows
        .iter()
        .enumerate()
        .filter(|(i, _)| i % step == 0 || *i + 1 == rows.len())
        .map(|(_, r)| r)
        .collect();

    let positive = picked
        .iter()
        .flat_map(|r| [r.error_l2, r.bound])
        .filter(|v| *v > 0.0 && v.is_finite());
    let (lo, hi) = positive.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    let (lo, hi) = if lo.is_finite() {
        (lo, hi)
    } else {
        (1.0, 10.0)
    };
    let y_min = lo.log10().floor();
    let y_max = hi.log10().ceil().max(y_min + 1.0);
    let t_max = picked.last().map_or(1.0, |r| r.t.max(1) as f64);

    let px = |t: u64| LEFT + (t as f64 / t_max) * (W - LEFT - RIGHT);
    let py = |v: f64| {
        let l = v.max(lo).log10();
        TOP + (y_max - l) / (y_max - y_min) * (H - TOP - BOTTOM)
    };
    let err: Vec<(f64, f64)> = picked.iter().map(|r| (px(r.t), py(r.error_l2))).collect();
    let bound: Vec<(f64, f64)> = picked.iter().map(|r| (px(r.t), py(r.bound))).collect();

    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(
        s,
        "<rect x=\"{x0}\" y=\"{y0}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        x1 - x0,
        y1 - y0
    );
    let mut d = y_min;
    while d <= y_max {
        let y = py(10f64.powf(d));
        let _ = writeln!(
            s,
            "<line x1=\"{x0}\" y1=\"{y:.2}\" x2=\"{x1}\" y2=\"{y:.2}\" stroke=\"#ddd\"/>"
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">1e{d}</text>",
            x0 - 6.0,
            y + 4.0
        );
        d += 1.0;
    }
    for k in 0..=4 {
        let t = (t_max * k as f64 / 4.0).round() as u64;
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\">{t}</text>",
            px(t),
            y1 + 18.0
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">t</text>",
        (x0 + x1) / 2.0,
        H - 8.0
    );
    s.push_str(&polyline(&bound, "#d62728"));
    s.push_str(&polyline(&err, "#1f77b4"));
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" fill=\"#1f77b4\">error</text>",
        x1 - 120.0,
        y0 + 18.0
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" fill=\"#d62728\">bound</text>",
        x1 - 120.0,
        y0 + 34.0
    );
    s.push_str("</svg>\n");
    s
}
