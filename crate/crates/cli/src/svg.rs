//! Self-contained static SVG plots: sweep line charts and radar-image
//! heatmaps. No external assets, stylesheets, or scripts; every file is a
//! single `<svg>` element that any viewer can render offline.

use afdm_core::image::RadarImage;

/// One named curve on a line chart.
#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 42.0;
const MARGIN_B: f64 = 52.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Tick label: enough digits to separate adjacent ticks, no trailing noise.
fn tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-2..1e4).contains(&a) {
        let s = format!("{v:.2}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.1e}")
    }
}

fn bounds(series: &[Series]) -> ((f64, f64), (f64, f64)) {
    let mut x = (f64::INFINITY, f64::NEG_INFINITY);
    let mut y = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for &(px, py) in &s.points {
            x = (x.0.min(px), x.1.max(px));
            y = (y.0.min(py), y.1.max(py));
        }
    }
    if !x.0.is_finite() {
        return ((0.0, 1.0), (0.0, 1.0));
    }
    // Degenerate spans still need a nonzero plotting range.
    if x.1 - x.0 < 1e-12 {
        x = (x.0 - 1.0, x.1 + 1.0);
    }
    if y.1 - y.0 < 1e-12 {
        y = (y.0 - 1.0, y.1 + 1.0);
    }
    let pad = (y.1 - y.0) * 0.05;
    (x, (y.0 - pad, y.1 + pad))
}

/// Render one line chart with axes, grid, legend, and point markers.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let ((x0, x1), (y0, y1)) = bounds(series);
    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |v: f64| MARGIN_L + (v - x0) / (x1 - x0) * pw;
    let sy = |v: f64| MARGIN_T + (1.0 - (v - y0) / (y1 - y0)) * ph;

    let mut out = String::with_capacity(8192);
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    out.push_str(&format!(
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        MARGIN_L + pw / 2.0,
        esc(title)
    ));

    // Grid and tick labels, five divisions per axis.
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let gx = MARGIN_L + t * pw;
        let gy = MARGIN_T + t * ph;
        out.push_str(&format!(
            "<line x1=\"{gx:.1}\" y1=\"{MARGIN_T}\" x2=\"{gx:.1}\" y2=\"{:.1}\" stroke=\"#ddd\"/>\n",
            MARGIN_T + ph
        ));
        out.push_str(&format!(
            "<line x1=\"{MARGIN_L}\" y1=\"{gy:.1}\" x2=\"{:.1}\" y2=\"{gy:.1}\" stroke=\"#ddd\"/>\n",
            MARGIN_L + pw
        ));
        out.push_str(&format!(
            "<text x=\"{gx:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
            MARGIN_T + ph + 16.0,
            tick(x0 + t * (x1 - x0))
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            MARGIN_L - 6.0,
            MARGIN_T + (1.0 - t) * ph + 4.0,
            tick(y0 + t * (y1 - y0))
        ));
    }
    out.push_str(&format!(
        "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{pw:.1}\" height=\"{ph:.1}\" \
         fill=\"none\" stroke=\"#333\"/>\n"
    ));
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
        MARGIN_L + pw / 2.0,
        HEIGHT - 12.0,
        esc(x_label)
    ));
    out.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
        MARGIN_T + ph / 2.0,
        MARGIN_T + ph / 2.0,
        esc(y_label)
    ));

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(px, py)| format!("{:.1},{:.1}", sx(px), sy(py)))
            .collect();
        if pts.len() > 1 {
            out.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n",
                pts.join(" ")
            ));
        }
        for &(px, py) in &s.points {
            out.push_str(&format!(
                "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"{color}\"/>\n",
                sx(px),
                sy(py)
            ));
        }
        let ly = MARGIN_T + 14.0 + 16.0 * i as f64;
        out.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n",
            MARGIN_L + pw - 120.0,
            MARGIN_L + pw - 96.0
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\">{}</text>\n",
            MARGIN_L + pw - 90.0,
            ly + 4.0,
            esc(&s.name)
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Color anchors from dark blue through orange to yellow; `t` in [0, 1].
fn colormap(t: f64) -> String {
    const ANCHORS: [(f64, [f64; 3]); 5] = [
        (0.00, [13.0, 8.0, 135.0]),
        (0.25, [126.0, 3.0, 168.0]),
        (0.50, [204.0, 71.0, 120.0]),
        (0.75, [248.0, 149.0, 64.0]),
        (1.00, [240.0, 249.0, 33.0]),
    ];
    let t = t.clamp(0.0, 1.0);
    let mut rgb = ANCHORS[4].1;
    for w in ANCHORS.windows(2) {
        let (t0, c0) = w[0];
        let (t1, c1) = w[1];
        if t <= t1 {
            let u = (t - t0) / (t1 - t0);
            rgb = [
                c0[0] + u * (c1[0] - c0[0]),
                c0[1] + u * (c1[1] - c0[1]),
                c0[2] + u * (c1[2] - c0[2]),
            ];
            break;
        }
    }
    format!(
        "#{:02x}{:02x}{:02x}",
        rgb[0].round() as u8, rgb[1].round() as u8, rgb[2].round() as u8
    )
}

/// Max-pooled magnitude heatmap of a radar image on a 40 dB dynamic range.
/// Large images are pooled down to at most 128 cells per axis so the file
/// stays small; pooling keeps peaks visible because it takes the maximum.
pub fn heatmap(title: &str, img: &RadarImage) -> String {
    const MAX_CELLS: usize = 128;
    const FLOOR_DB: f64 = -40.0;
    let (rows, cols) = (img.n_range_bins(), img.n_doppler_bins());
    let pool_r = rows.div_ceil(MAX_CELLS);
    let pool_c = cols.div_ceil(MAX_CELLS);
    let prows = rows.div_ceil(pool_r);
    let pcols = cols.div_ceil(pool_c);

    let mut pooled = vec![0.0f64; prows * pcols];
    for ((r, c), v) in img.data.indexed_iter() {
        let cell = &mut pooled[(r / pool_r) * pcols + c / pool_c];
        *cell = cell.max(v.norm());
    }
    let peak = pooled.iter().cloned().fold(0.0f64, f64::max).max(1e-300);

    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = HEIGHT - MARGIN_T - MARGIN_B;
    let cw = pw / pcols as f64;
    let ch = ph / prows as f64;

    let mut out = String::with_capacity(pooled.len() * 64 + 2048);
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    out.push_str(&format!(
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        MARGIN_L + pw / 2.0,
        esc(title)
    ));
    // Row 0 (zero range) is drawn at the bottom edge.
    for pr in 0..prows {
        for pc in 0..pcols {
            let mag = pooled[pr * pcols + pc];
            let db = 20.0 * (mag / peak).max(1e-300).log10();
            let t = (db - FLOOR_DB) / -FLOOR_DB;
            out.push_str(&format!(
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>\n",
                MARGIN_L + pc as f64 * cw,
                MARGIN_T + ph - (pr + 1) as f64 * ch,
                cw + 0.05,
                ch + 0.05,
                colormap(t)
            ));
        }
    }
    out.push_str(&format!(
        "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{pw:.1}\" height=\"{ph:.1}\" \
         fill=\"none\" stroke=\"#333\"/>\n"
    ));
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">Doppler, {:.1} Hz per bin (zero at center)</text>\n",
        MARGIN_L + pw / 2.0,
        HEIGHT - 12.0,
        img.doppler_bin_hz
    ));
    out.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">Range, {:.2} m per bin</text>\n",
        MARGIN_T + ph / 2.0,
        MARGIN_T + ph / 2.0,
        img.range_bin_m
    ));
    out.push_str("</svg>\n");
    out
}
