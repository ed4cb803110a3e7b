//! CSV, JSON and SVG artifacts.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::curve::{ProfileCurve, SingularEventKind};

pub const CSV_HEADER: &str = "s,x,y,xp,yp,segment,chart";

/// Samples as CSV; floats carry 17 significant digits.
pub fn curve_to_csv(curve: &ProfileCurve) -> String {
    let mut out = String::with_capacity(64 * 1024);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (seg, chart, p) in curve.tagged_samples() {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
            p.s,
            p.x,
            p.y,
            p.xp,
            p.yp,
            seg,
            chart.label()
        );
    }
    out
}

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub xp: f64,
    pub yp: f64,
    pub segment: usize,
    pub chart: String,
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        Some(h) => return Err(format!("unexpected CSV header '{h}'")),
        None => return Err("empty CSV".into()),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(format!("row {}: expected 7 fields, got {}", i + 2, f.len()));
        }
        let num = |k: usize| {
            f[k].trim()
                .parse::<f64>()
                .map_err(|e| format!("row {}: field {}: {e}", i + 2, k + 1))
        };
        rows.push(CsvRow {
            s: num(0)?,
            x: num(1)?,
            y: num(2)?,
            xp: num(3)?,
            yp: num(4)?,
            segment: f[5]
                .trim()
                .parse()
                .map_err(|e| format!("row {}: segment: {e}", i + 2))?,
            chart: f[6].trim().to_string(),
        });
    }
    if rows.is_empty() {
        return Err("CSV has no samples".into());
    }
    Ok(rows)
}

/// Event record as written to `<stem>.events.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub kind: SingularEventKind,
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub slope_sq: f64,
}

pub fn event_records(curve: &ProfileCurve) -> Vec<EventRecord> {
    curve
        .events
        .iter()
        .map(|e| EventRecord {
            kind: e.kind,
            s: e.s_event,
            x: e.contact_point.0,
            y: e.contact_point.1,
            slope_sq: e.incoming_slope_sq,
        })
        .collect()
}

const PALETTE: [&str; 4] = ["#1f4e79", "#2e7d32", "#8e24aa", "#c62828"];

/// Static SVG of the profile in the `(x, y)` plane.
pub fn render_svg(rows: &[CsvRow], events: &[EventRecord], overlay: Option<&[(f64, f64)]>) -> String {
    let (w, h, pad) = (640.0, 480.0, 40.0);
    let pts = rows
        .iter()
        .map(|r| (r.x, r.y))
        .chain(events.iter().map(|e| (e.x, e.y)))
        .chain(overlay.unwrap_or(&[]).iter().copied());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    y0 = y0.min(0.0);
    let span = (x1 - x0).max(y1 - y0).max(1e-9);
    let scale = ((w - 2.0 * pad) / span).min((h - 2.0 * pad) / span);
    let map = |x: f64, y: f64| (pad + (x - x0) * scale, h - pad - (y - y0) * scale);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (ax0, ay) = map(x0, 0.0);
    let (ax1, _) = map(x1, 0.0);
    let _ = writeln!(
        svg,
        r##"<line x1="{ax0:.2}" y1="{ay:.2}" x2="{ax1:.2}" y2="{ay:.2}" stroke="#999" stroke-dasharray="4 3"/>"##
    );
    if let Some(ov) = overlay {
        let path: Vec<String> = ov
            .iter()
            .map(|&(x, y)| {
                let (px, py) = map(x, y);
                format!("{px:.2},{py:.2}")
            })
            .collect();
        let _ = writeln!(
            svg,
            r##"<polyline class="overlay" fill="none" stroke="#f57c00" stroke-width="1" stroke-dasharray="6 4" points="{}"/>"##,
            path.join(" ")
        );
    }
    let mut start = 0;
    while start < rows.len() {
        let seg = rows[start].segment;
        let end = rows[start..]
            .iter()
            .position(|r| r.segment != seg)
            .map_or(rows.len(), |k| start + k);
        // overlap one point so consecutive segments join
        let stop = (end + 1).min(rows.len());
        let path: Vec<String> = rows[start..stop]
            .iter()
            .map(|r| {
                let (px, py) = map(r.x, r.y);
                format!("{px:.2},{py:.2}")
            })
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="segment" fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            PALETTE[seg % PALETTE.len()],
            path.join(" ")
        );
        start = end;
    }
    for e in events {
        let (px, py) = map(e.x, e.y);
        let _ = writeln!(
            svg,
            r##"<circle class="event" cx="{px:.2}" cy="{py:.2}" r="4" fill="#c62828"><title>{:?} at s = {:.6}</title></circle>"##,
            e.kind, e.s
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_rejects_empty_and_bad_header() {
        assert!(parse_csv("").is_err());
        assert!(parse_csv(&format!("{CSV_HEADER}\n")).is_err());
        assert!(parse_csv("a,b\n1,2\n").is_err());
    }

    #[test]
    fn svg_has_markers_and_overlay() {
        let rows = vec![
            CsvRow { s: 0.0, x: 0.0, y: 1.0, xp: 1.0, yp: 0.0, segment: 0, chart: "arc-length".into() },
            CsvRow { s: 1.0, x: 1.0, y: 0.1, xp: 0.0, yp: -1.0, segment: 0, chart: "arc-length".into() },
        ];
        let ev = vec![EventRecord { kind: SingularEventKind::AxisContact, s: 1.1, x: 1.0, y: 0.0, slope_sq: 0.0 }];
        let svg = render_svg(&rows, &ev, Some(&[(0.0, 0.5), (0.5, 0.5)]));
        assert_eq!(svg.matches("class=\"event\"").count(), 1);
        assert!(svg.contains("class=\"overlay\""));
    }
}
