//! Static SVG emission: a series panel and a statistic panel, estimated
//! change-points as red verticals, the critical value as a blue horizontal.

use snseg::TimeSeriesMatrix;

const WIDTH: f64 = 960.0;
const PANEL_H: f64 = 280.0;
const MARGIN: f64 = 46.0;
const GAP: f64 = 40.0;
const SERIES_COLORS: [&str; 5] = ["#333333", "#7a7a7a", "#4a7ba6", "#7ba64a", "#a67b4a"];

struct Panel {
    top: f64,
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
}

impl Panel {
    fn x(&self, v: f64) -> f64 {
        MARGIN + (v - self.xmin) / (self.xmax - self.xmin) * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, v: f64) -> f64 {
        let span = if self.ymax > self.ymin {
            self.ymax - self.ymin
        } else {
            1.0
        };
        self.top + PANEL_H - (v - self.ymin) / span * PANEL_H
    }
}

fn polyline(panel: &Panel, values: impl Iterator<Item = (f64, f64)>, color: &str) -> String {
    let pts: Vec<String> = values
        .map(|(x, y)| format!("{:.2},{:.2}", panel.x(x), panel.y(y)))
        .collect();
    format!(
        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1\" points=\"{}\"/>\n",
        pts.join(" ")
    )
}

fn frame(panel: &Panel, title: &str) -> String {
    format!(
        "<rect x=\"{m}\" y=\"{t:.1}\" width=\"{w:.1}\" height=\"{h}\" fill=\"none\" stroke=\"#999\"/>\n\
         <text x=\"{m}\" y=\"{ty:.1}\" font-family=\"sans-serif\" font-size=\"14\" fill=\"#222\">{title}</text>\n\
         <text x=\"{lx:.1}\" y=\"{by:.1}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#555\" text-anchor=\"end\">{ymin:.4}</text>\n\
         <text x=\"{lx:.1}\" y=\"{uy:.1}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#555\" text-anchor=\"end\">{ymax:.4}</text>\n",
        m = MARGIN,
        t = panel.top,
        w = WIDTH - 2.0 * MARGIN,
        h = PANEL_H,
        ty = panel.top - 8.0,
        lx = MARGIN - 4.0,
        by = panel.top + PANEL_H,
        uy = panel.top + 12.0,
        ymin = panel.ymin,
        ymax = panel.ymax,
    )
}

/// Two-panel plot: the observed series (at most the first five columns)
/// over the estimated change-points, and the per-anchor maximal statistics
/// against the threshold.
pub fn render_segmentation(
    ts: &TimeSeriesMatrix,
    est_cp: &[usize],
    max_stats: &[f64],
    threshold: f64,
) -> String {
    let n = ts.n();
    let shown = ts.p().min(SERIES_COLORS.len());
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for s in 0..shown {
        for &v in ts.column(s) {
            ymin = ymin.min(v);
            ymax = ymax.max(v);
        }
    }
    let series_panel = Panel {
        top: MARGIN,
        xmin: 1.0,
        xmax: n as f64,
        ymin,
        ymax,
    };
    let smax = max_stats.iter().cloned().fold(threshold, f64::max) * 1.05;
    let stat_panel = Panel {
        top: MARGIN + PANEL_H + GAP,
        xmin: 1.0,
        xmax: n as f64,
        ymin: 0.0,
        ymax: smax,
    };
    let height = 2.0 * PANEL_H + GAP + 2.0 * MARGIN;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{height}\" viewBox=\"0 0 {WIDTH} {height}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    ));
    let title = if shown < ts.p() {
        format!("series (first {shown} of {})", ts.p())
    } else {
        "series".to_string()
    };
    out.push_str(&frame(&series_panel, &title));
    for s in 0..shown {
        out.push_str(&polyline(
            &series_panel,
            ts.column(s)
                .iter()
                .enumerate()
                .map(|(t, &v)| ((t + 1) as f64, v)),
            SERIES_COLORS[s],
        ));
    }
    out.push_str(&frame(&stat_panel, "maximal SN statistic"));
    out.push_str(&polyline(
        &stat_panel,
        max_stats
            .iter()
            .enumerate()
            .map(|(t, &v)| ((t + 1) as f64, v)),
        "#333333",
    ));
    // Critical value: blue horizontal line across the statistic panel.
    let ty = stat_panel.y(threshold);
    out.push_str(&format!(
        "<line x1=\"{:.2}\" y1=\"{ty:.2}\" x2=\"{:.2}\" y2=\"{ty:.2}\" stroke=\"#1f4fd8\" stroke-width=\"1.5\"/>\n",
        stat_panel.x(1.0),
        stat_panel.x(n as f64)
    ));
    // Change-points: red verticals through both panels.
    for &cp in est_cp {
        let x = series_panel.x(cp as f64);
        for panel in [&series_panel, &stat_panel] {
            out.push_str(&format!(
                "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#d0342c\" stroke-width=\"1.5\"/>\n",
                panel.top,
                panel.top + PANEL_H
            ));
        }
    }
    out.push_str("</svg>\n");
    out
}
