//! File emitters: CSV paths, minimal SVG quick-look plots, JSON reports.

use std::path::Path;

use mstab_core::PathResult;

/// Static plot of one path: axes, a single polyline, a title. Point count
/// equals the grid length.
pub fn path_svg(path: &PathResult, title: &str) -> String {
    let (w, h) = (900.0, 500.0);
    let (ml, mr, mt, mb) = (60.0, 20.0, 40.0, 40.0);
    let (pw, ph) = (w - ml - mr, h - mt - mb);

    let (t0, t1) = (
        path.grid.first().copied().unwrap_or(0.0),
        path.grid.last().copied().unwrap_or(1.0),
    );
    let mut v0 = f64::INFINITY;
    let mut v1 = f64::NEG_INFINITY;
    for &v in &path.values {
        v0 = v0.min(v);
        v1 = v1.max(v);
    }
    if !v0.is_finite() || v0 == v1 {
        v0 -= 1.0;
        v1 += 1.0;
    }
    let sx = |t: f64| ml + pw * (t - t0) / (t1 - t0).max(f64::MIN_POSITIVE);
    let sy = |v: f64| mt + ph * (1.0 - (v - v0) / (v1 - v0));

    let mut points = String::new();
    for (t, v) in path.grid.iter().zip(&path.values) {
        points.push_str(&format!("{:.3},{:.3} ", sx(*t), sy(*v)));
    }
    let points = points.trim_end();

    format!(
        concat!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n",
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" ",
            "viewBox=\"0 0 {w} {h}\">\n",
            "  <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "  <text x=\"{tx}\" y=\"24\" text-anchor=\"middle\" ",
            "font-family=\"monospace\" font-size=\"16\">{title}</text>\n",
            "  <line x1=\"{ml}\" y1=\"{yb}\" x2=\"{xr}\" y2=\"{yb}\" stroke=\"black\"/>\n",
            "  <line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{yb}\" stroke=\"black\"/>\n",
            "  <text x=\"{ml}\" y=\"{ylab}\" font-family=\"monospace\" font-size=\"11\" ",
            "text-anchor=\"start\">t in [{t0}, {t1}], value in [{v0:.4}, {v1:.4}]</text>\n",
            "  <polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1\" ",
            "points=\"{points}\"/>\n",
            "</svg>\n"
        ),
        w = w,
        h = h,
        tx = w / 2.0,
        title = title,
        ml = ml,
        mt = mt,
        yb = h - mb,
        xr = w - mr,
        ylab = h - mb + 16.0,
        t0 = t0,
        t1 = t1,
        v0 = v0,
        v1 = v1,
        points = points,
    )
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), String> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)
                .map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
        }
    }
    std::fs::write(path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))
}
