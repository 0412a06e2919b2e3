//! Static SVG boxplots, one box per summary, side by side on a shared axis.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::engine::BoxplotSummary;
use crate::error::{Error, Result};

const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 16.0;
const MARGIN_TOP: f64 = 16.0;
const MARGIN_BOTTOM: f64 = 40.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderOptions {
    pub width_px: u32,
    pub height_px: u32,
    /// Labels to draw, in order; empty keeps the input order.
    pub methods: Vec<String>,
    pub show_fences: bool,
    pub y_domain: Option<(f64, f64)>,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self { width_px: 720, height_px: 480, methods: Vec::new(), show_fences: true, y_domain: None }
    }
}

impl RenderOptions {
    pub fn validate(&self) -> Result<()> {
        if self.width_px < 100 || self.height_px < 100 {
            return Err(Error::Render(format!("canvas {}x{} is below 100x100", self.width_px, self.height_px)));
        }
        if let Some((lo, hi)) = self.y_domain {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Render(format!("invalid y domain ({lo}, {hi})")));
            }
        }
        Ok(())
    }
}

/// Maps data values to pixel rows; larger values sit higher.
#[derive(Debug, Clone, Copy)]
pub struct YScale {
    lo: f64,
    hi: f64,
    top: f64,
    bottom: f64,
}

impl YScale {
    pub fn new(lo: f64, hi: f64, top: f64, bottom: f64) -> Self {
        Self { lo, hi, top, bottom }
    }

    pub fn map(&self, v: f64) -> f64 {
        self.bottom - (v - self.lo) / (self.hi - self.lo) * (self.bottom - self.top)
    }
}

fn default_domain(summaries: &[&BoxplotSummary], show_fences: bool) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in summaries {
        let extremes =
            s.outlier_values.iter().chain([&s.whisker_low, &s.whisker_high, &s.quartiles.q1, &s.quartiles.q3]);
        for &v in extremes {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if show_fences {
            if let Some(l) = s.fences.lower {
                lo = lo.min(l);
            }
            if let Some(u) = s.fences.upper {
                hi = hi.max(u);
            }
        }
    }
    let span = hi - lo;
    if span > 0.0 {
        (lo - 0.05 * span, hi + 0.05 * span)
    } else {
        (lo - 1.0, hi + 1.0)
    }
}

/// Roughly five ticks at 1/2/5 multiples of a power of ten.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|&s| s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn check_finite(summary: &BoxplotSummary) -> Result<()> {
    let q = &summary.quartiles;
    let fences = summary.fences.lower.iter().chain(&summary.fences.upper);
    let all = [q.q1, q.median, q.q3, summary.whisker_low, summary.whisker_high]
        .into_iter()
        .chain(summary.outlier_values.iter().copied())
        .chain(fences.copied());
    for v in all {
        if !v.is_finite() {
            return Err(Error::Render(format!("non-finite coordinate {v} in {}", summary.label)));
        }
    }
    Ok(())
}

pub fn render_svg(summaries: &[BoxplotSummary], options: &RenderOptions) -> Result<String> {
    options.validate()?;
    let selected: Vec<&BoxplotSummary> = if options.methods.is_empty() {
        summaries.iter().collect()
    } else {
        options
            .methods
            .iter()
            .map(|m| {
                summaries
                    .iter()
                    .find(|s| &s.label == m)
                    .ok_or_else(|| Error::Render(format!("no summary labelled {m:?}")))
            })
            .collect::<Result<_>>()?
    };
    if selected.is_empty() {
        return Err(Error::Render("nothing to draw".into()));
    }
    for s in &selected {
        check_finite(s)?;
    }

    let (w, h) = (options.width_px as f64, options.height_px as f64);
    let (lo, hi) = options.y_domain.unwrap_or_else(|| default_domain(&selected, options.show_fences));
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::Render(format!("degenerate y domain ({lo}, {hi})")));
    }
    let y = YScale::new(lo, hi, MARGIN_TOP, h - MARGIN_BOTTOM);
    let plot_w = w - MARGIN_LEFT - MARGIN_RIGHT;
    let slot = plot_w / selected.len() as f64;
    let box_w = (0.5 * slot).min(80.0);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif" font-size="11">"#,
        options.width_px, options.height_px, options.width_px, options.height_px
    );

    let _ = writeln!(svg, r#"<g class="axis" stroke="black">"#);
    let _ = writeln!(
        svg,
        r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}"/>"#,
        MARGIN_LEFT,
        MARGIN_TOP,
        h - MARGIN_BOTTOM
    );
    for t in ticks(lo, hi) {
        let ty = y.map(t);
        let _ = writeln!(
            svg,
            r#"<line class="tick" x1="{:.2}" y1="{ty:.2}" x2="{:.2}" y2="{ty:.2}"/>"#,
            MARGIN_LEFT - 5.0,
            MARGIN_LEFT
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" stroke="none">{}</text>"#,
            MARGIN_LEFT - 8.0,
            ty + 4.0,
            tick_label(t)
        );
    }
    let _ = writeln!(svg, "</g>");

    for (i, s) in selected.iter().enumerate() {
        let cx = MARGIN_LEFT + slot * (i as f64 + 0.5);
        let (x0, x1) = (cx - 0.5 * box_w, cx + 0.5 * box_w);
        let (cap0, cap1) = (cx - 0.25 * box_w, cx + 0.25 * box_w);
        let q = &s.quartiles;
        let (yq1, yq3, ymed) = (y.map(q.q1), y.map(q.q3), y.map(q.median));
        let (ylo, yhi) = (y.map(s.whisker_low), y.map(s.whisker_high));

        let _ = writeln!(svg, r#"<g class="boxplot" data-index="{i}" stroke="black" fill="none">"#);
        let _ = writeln!(svg, "<title>{}</title>", escape(&s.label));
        let _ = writeln!(
            svg,
            r##"<rect x="{x0:.2}" y="{yq3:.2}" width="{:.2}" height="{:.2}" fill="#dde6f0"/>"##,
            box_w,
            (yq1 - yq3).max(0.0)
        );
        let _ = writeln!(
            svg,
            r#"<line class="median" x1="{x0:.2}" y1="{ymed:.2}" x2="{x1:.2}" y2="{ymed:.2}" stroke-width="2"/>"#
        );
        let _ = writeln!(svg, r#"<line class="whisker" x1="{cx:.2}" y1="{yq3:.2}" x2="{cx:.2}" y2="{yhi:.2}"/>"#);
        let _ = writeln!(svg, r#"<line class="whisker" x1="{cx:.2}" y1="{yq1:.2}" x2="{cx:.2}" y2="{ylo:.2}"/>"#);
        let _ = writeln!(svg, r#"<line class="cap" x1="{cap0:.2}" y1="{yhi:.2}" x2="{cap1:.2}" y2="{yhi:.2}"/>"#);
        let _ = writeln!(svg, r#"<line class="cap" x1="{cap0:.2}" y1="{ylo:.2}" x2="{cap1:.2}" y2="{ylo:.2}"/>"#);
        if options.show_fences {
            for f in s.fences.lower.iter().chain(&s.fences.upper) {
                let fy = y.map(*f);
                let _ = writeln!(
                    svg,
                    r#"<line class="fence" x1="{:.2}" y1="{fy:.2}" x2="{:.2}" y2="{fy:.2}" stroke="firebrick" stroke-dasharray="4 3"/>"#,
                    cx - 0.45 * slot,
                    cx + 0.45 * slot
                );
            }
        }
        for &v in &s.outlier_values {
            let _ = writeln!(
                svg,
                r#"<circle class="outlier" cx="{cx:.2}" cy="{:.2}" r="3" fill="firebrick" stroke="none"/>"#,
                y.map(v)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle" stroke="none" fill="black">{}</text>"#,
            h - MARGIN_BOTTOM + 18.0,
            escape(&s.label)
        );
        let _ = writeln!(svg, "</g>");
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
