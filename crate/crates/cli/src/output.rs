//! File emission: guarded creation, provenance headers, CSV helpers, and
//! dependency-free SVG plots. Output bytes are a pure function of the
//! inputs — no timestamps — so identical invocations reproduce identical
//! files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use hdlda::{Error, Result};
use sha2::{Digest, Sha256};

/// Provenance stamped into every output file as `#` comment lines.
#[derive(Debug, Clone)]
pub struct Provenance {
    /// Hex digest (truncated) of the primary input file.
    pub config_hash: String,
    pub seed: u64,
}

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

impl Provenance {
    pub fn header_lines(&self) -> String {
        format!(
            "# config-hash: {}\n# seed: {}\n# artifact-version: {}\n",
            self.config_hash, self.seed, ARTIFACT_VERSION
        )
    }
}

/// Truncated SHA-256 of a file's raw bytes.
pub fn file_hash(path: &Path) -> Result<String> {
    let bytes = fs::read(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let digest = Sha256::digest(&bytes);
    Ok(hex_prefix(&digest, 16))
}

fn hex_prefix(digest: &[u8], chars: usize) -> String {
    let mut s = String::with_capacity(chars);
    for byte in digest {
        s.push_str(&format!("{byte:02x}"));
        if s.len() >= chars {
            break;
        }
    }
    s.truncate(chars);
    s
}

/// Resolves `name` inside the output directory, creating the directory if
/// absent and refusing to overwrite an existing file unless forced.
pub fn prepare_path(out_dir: &Path, name: &str, force: bool) -> Result<PathBuf> {
    fs::create_dir_all(out_dir)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", out_dir.display())))?;
    let path = out_dir.join(name);
    if path.exists() && !force {
        return Err(Error::Config(format!(
            "{} already exists; pass --force to overwrite",
            path.display()
        )));
    }
    Ok(path)
}

/// Writes a provenance-stamped CSV: `#` comments, a header row, then rows.
pub fn write_csv(
    path: &Path,
    provenance: &Provenance,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    let mut body = String::new();
    body.push_str(&provenance.header_lines());
    body.push_str(&header.join(","));
    body.push('\n');
    for row in rows {
        body.push_str(&row.join(","));
        body.push('\n');
    }
    write_bytes(path, body.as_bytes())
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut file = fs::File::create(path)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", path.display())))?;
    file.write_all(bytes)
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

/// Formats a float with full round-trip precision, or empty for NaN/None.
pub fn fmt_num(value: f64) -> String {
    if value.is_nan() {
        String::new()
    } else {
        format!("{value}")
    }
}

pub fn fmt_opt(value: Option<f64>) -> String {
    value.map(fmt_num).unwrap_or_default()
}

// ---------------------------------------------------------------------------
// SVG plots
// ---------------------------------------------------------------------------

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 560.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 56.0;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// One named curve of (x, y) points.
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Renders a multi-series line plot; x may be log-scaled (all x > 0).
pub fn line_plot_svg(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
    log_x: bool,
) -> Result<String> {
    let points: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().copied()).collect();
    if points.is_empty() {
        return Err(Error::Validation("nothing to plot: all series empty".into()));
    }
    if log_x && points.iter().any(|&(x, _)| x <= 0.0) {
        return Err(Error::Validation("log-scaled x axis needs positive x values".into()));
    }
    let tx = |x: f64| if log_x { x.ln() } else { x };
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &points {
        x_min = x_min.min(tx(x));
        x_max = x_max.max(tx(x));
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    if x_max == x_min {
        x_max = x_min + 1.0;
    }
    if y_max == y_min {
        y_max = y_min + 1.0;
    }
    let pad = 0.04 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = move |x: f64| MARGIN_LEFT + (tx(x) - x_min) / (x_max - x_min) * plot_w;
    let sy = move |y: f64| MARGIN_TOP + (y_max - y) / (y_max - y_min) * plot_h;

    let mut svg = svg_open(title);
    // Axes.
    svg.push_str(&format!(
        "<line x1='{l}' y1='{b}' x2='{r}' y2='{b}' stroke='black'/>\n<line x1='{l}' y1='{t}' x2='{l}' y2='{b}' stroke='black'/>\n",
        l = MARGIN_LEFT,
        r = WIDTH - MARGIN_RIGHT,
        t = MARGIN_TOP,
        b = HEIGHT - MARGIN_BOTTOM
    ));
    // Ticks and grid.
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let xv = x_min + f * (x_max - x_min);
        let xpix = MARGIN_LEFT + f * plot_w;
        let shown = if log_x { xv.exp() } else { xv };
        svg.push_str(&format!(
            "<line x1='{xpix}' y1='{b}' x2='{xpix}' y2='{b2}' stroke='black'/>\n<text x='{xpix}' y='{ty}' font-size='12' text-anchor='middle'>{}</text>\n",
            trim_tick(shown),
            b = HEIGHT - MARGIN_BOTTOM,
            b2 = HEIGHT - MARGIN_BOTTOM + 5.0,
            ty = HEIGHT - MARGIN_BOTTOM + 20.0
        ));
        let yv = y_min + f * (y_max - y_min);
        let ypix = sy(yv);
        svg.push_str(&format!(
            "<line x1='{x2}' y1='{ypix}' x2='{l}' y2='{ypix}' stroke='black'/>\n<text x='{tx2}' y='{typ}' font-size='12' text-anchor='end'>{}</text>\n",
            trim_tick(yv),
            l = MARGIN_LEFT,
            x2 = MARGIN_LEFT - 5.0,
            tx2 = MARGIN_LEFT - 8.0,
            typ = ypix + 4.0
        ));
    }
    // Axis labels.
    svg.push_str(&format!(
        "<text x='{cx}' y='{by}' font-size='14' text-anchor='middle'>{x_label}</text>\n",
        cx = MARGIN_LEFT + plot_w / 2.0,
        by = HEIGHT - 12.0
    ));
    svg.push_str(&format!(
        "<text x='16' y='{cy}' font-size='14' text-anchor='middle' transform='rotate(-90 16 {cy})'>{y_label}</text>\n",
        cy = MARGIN_TOP + plot_h / 2.0
    ));
    // Curves.
    for (i, s) in series.iter().enumerate() {
        if s.points.is_empty() {
            continue;
        }
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill='none' stroke='{color}' stroke-width='1.8' points='{}'/>\n",
            path.join(" ")
        ));
        // Legend entry.
        let ly = MARGIN_TOP + 16.0 + 18.0 * i as f64;
        svg.push_str(&format!(
            "<line x1='{lx}' y1='{ly}' x2='{lx2}' y2='{ly}' stroke='{color}' stroke-width='1.8'/>\n<text x='{tx3}' y='{ty3}' font-size='12'>{}</text>\n",
            escape(&s.label),
            lx = WIDTH - MARGIN_RIGHT - 150.0,
            lx2 = WIDTH - MARGIN_RIGHT - 126.0,
            tx3 = WIDTH - MARGIN_RIGHT - 120.0,
            ty3 = ly + 4.0
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Renders a heat-map over (ρ rows, p columns) with a fixed [0, 0.5]
/// color domain: linear interpolation dark blue → yellow, clamped.
pub fn heatmap_svg(
    title: &str,
    rho_grid: &[f64],
    p_grid: &[usize],
    values: &[Vec<f64>],
) -> Result<String> {
    if values.len() != rho_grid.len() || values.iter().any(|row| row.len() != p_grid.len()) {
        return Err(Error::Validation(
            "heat-map value matrix does not match the (rho, p) grid".into(),
        ));
    }
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT - 60.0;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let cell_w = plot_w / p_grid.len() as f64;
    let cell_h = plot_h / rho_grid.len() as f64;

    let mut svg = svg_open(title);
    for (i, row) in values.iter().enumerate() {
        for (j, &value) in row.iter().enumerate() {
            let x = MARGIN_LEFT + j as f64 * cell_w;
            let y = MARGIN_TOP + i as f64 * cell_h;
            svg.push_str(&format!(
                "<rect x='{x:.1}' y='{y:.1}' width='{cell_w:.1}' height='{cell_h:.1}' fill='{}' stroke='white' stroke-width='0.5'/>\n",
                error_color(value)
            ));
            if value.is_finite() {
                svg.push_str(&format!(
                    "<text x='{cx:.1}' y='{cy:.1}' font-size='11' text-anchor='middle' fill='white'>{value:.3}</text>\n",
                    cx = x + cell_w / 2.0,
                    cy = y + cell_h / 2.0 + 4.0
                ));
            }
        }
    }
    // Axis labels: p along the bottom, ρ along the left.
    for (j, p) in p_grid.iter().enumerate() {
        svg.push_str(&format!(
            "<text x='{x:.1}' y='{y:.1}' font-size='12' text-anchor='middle'>p={p}</text>\n",
            x = MARGIN_LEFT + (j as f64 + 0.5) * cell_w,
            y = HEIGHT - MARGIN_BOTTOM + 18.0
        ));
    }
    for (i, rho) in rho_grid.iter().enumerate() {
        svg.push_str(&format!(
            "<text x='{x:.1}' y='{y:.1}' font-size='12' text-anchor='end'>ρ={rho}</text>\n",
            x = MARGIN_LEFT - 8.0,
            y = MARGIN_TOP + (i as f64 + 0.5) * cell_h + 4.0
        ));
    }
    // Color bar for the fixed [0, 0.5] domain.
    let bar_x = WIDTH - MARGIN_RIGHT - 40.0;
    let steps = 20;
    for s in 0..steps {
        let v = 0.5 * (steps - 1 - s) as f64 / (steps - 1) as f64;
        svg.push_str(&format!(
            "<rect x='{bar_x:.1}' y='{y:.1}' width='18' height='{h:.1}' fill='{}'/>\n",
            error_color(v),
            y = MARGIN_TOP + s as f64 * plot_h / steps as f64,
            h = plot_h / steps as f64 + 0.5
        ));
    }
    svg.push_str(&format!(
        "<text x='{bar_x:.1}' y='{t:.1}' font-size='11'>0.5</text>\n<text x='{bar_x:.1}' y='{b:.1}' font-size='11'>0.0</text>\n",
        t = MARGIN_TOP - 6.0,
        b = HEIGHT - MARGIN_BOTTOM + 14.0
    ));
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Color for an error value on the fixed [0, 0.5] domain; NaN is gray.
fn error_color(value: f64) -> String {
    if !value.is_finite() {
        return "#808080".into();
    }
    let t = (value / 0.5).clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + t * (b - a)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(20.0, 250.0), lerp(50.0, 220.0), lerp(140.0, 60.0))
}

fn svg_open(title: &str) -> String {
    format!(
        "<svg xmlns='http://www.w3.org/2000/svg' width='{WIDTH}' height='{HEIGHT}' viewBox='0 0 {WIDTH} {HEIGHT}'>\n<rect width='100%' height='100%' fill='white'/>\n<text x='{cx}' y='24' font-size='16' text-anchor='middle'>{}</text>\n",
        escape(title),
        cx = WIDTH / 2.0
    )
}

fn trim_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if a >= 0.01 && a < 10_000.0 {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.1e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
