//! Self-contained SVG scatter plot of a trajectory, with an optional fitted
//! line overlay. Pure string building: identical input gives identical
//! bytes, no display server involved.

use std::fmt::Write as _;

use odokit_core::{RegressionFit, TrajectoryPoint};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlotError {
    #[error("cannot plot an empty trajectory")]
    EmptyTrajectory,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn to_px(&self, x: f64, y: f64) -> (f64, f64) {
        let sx = MARGIN + (x - self.x_min) / (self.x_max - self.x_min) * (WIDTH - 2.0 * MARGIN);
        let sy = HEIGHT
            - MARGIN
            - (y - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - 2.0 * MARGIN);
        (sx, sy)
    }
}

/// Render the (x, y) positions, axes labelled in mm, and at most one line
/// element (the fit).
pub fn emit_plot(
    points: &[TrajectoryPoint],
    fit: Option<&RegressionFit>,
) -> Result<String, PlotError> {
    if points.is_empty() {
        return Err(PlotError::EmptyTrajectory);
    }

    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for p in points {
        x_min = x_min.min(p.pose.x);
        x_max = x_max.max(p.pose.x);
        y_min = y_min.min(p.pose.y);
        y_max = y_max.max(p.pose.y);
    }
    if let Some(f) = fit {
        // keep the overlay inside the frame
        let at_min = f.slope * x_min + f.intercept;
        let at_max = f.slope * x_max + f.intercept;
        y_min = y_min.min(at_min).min(at_max);
        y_max = y_max.max(at_min).max(at_max);
    }
    // pad degenerate extents so the mapping stays finite
    if x_max - x_min < 1e-9 {
        x_min -= 1.0;
        x_max += 1.0;
    }
    if y_max - y_min < 1e-9 {
        y_min -= 1.0;
        y_max += 1.0;
    }
    let frame = Frame {
        x_min,
        x_max,
        y_min,
        y_max,
    };

    let mut svg = String::with_capacity(1024 + 64 * points.len());
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(
        svg,
        "  <rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{:.2}\" height=\"{:.2}\" \
         fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>",
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );

    // axis captions and extent labels
    let _ = writeln!(
        svg,
        "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"14\" \
         font-family=\"sans-serif\">x [mm]</text>",
        WIDTH / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        svg,
        "  <text x=\"14\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"14\" \
         font-family=\"sans-serif\" transform=\"rotate(-90 14 {:.2})\">y [mm]</text>",
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    let _ = writeln!(
        svg,
        "  <text x=\"{MARGIN}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"11\" \
         font-family=\"sans-serif\">{:.1}</text>",
        HEIGHT - MARGIN + 16.0,
        frame.x_min
    );
    let _ = writeln!(
        svg,
        "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"11\" \
         font-family=\"sans-serif\">{:.1}</text>",
        WIDTH - MARGIN,
        HEIGHT - MARGIN + 16.0,
        frame.x_max
    );
    let _ = writeln!(
        svg,
        "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-size=\"11\" \
         font-family=\"sans-serif\">{:.1}</text>",
        MARGIN - 6.0,
        HEIGHT - MARGIN + 4.0,
        frame.y_min
    );
    let _ = writeln!(
        svg,
        "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-size=\"11\" \
         font-family=\"sans-serif\">{:.1}</text>",
        MARGIN - 6.0,
        MARGIN + 4.0,
        frame.y_max
    );

    for p in points {
        let (sx, sy) = frame.to_px(p.pose.x, p.pose.y);
        let color = if p.flagged { "#d62728" } else { "#1f77b4" };
        let _ = writeln!(
            svg,
            "  <circle cx=\"{sx:.2}\" cy=\"{sy:.2}\" r=\"2\" fill=\"{color}\"/>"
        );
    }

    if let Some(f) = fit {
        let (x1, y1) = frame.to_px(frame.x_min, f.slope * frame.x_min + f.intercept);
        let (x2, y2) = frame.to_px(frame.x_max, f.slope * frame.x_max + f.intercept);
        let _ = writeln!(
            svg,
            "  <line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" \
             stroke=\"#ff7f0e\" stroke-width=\"1.5\"/>"
        );
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}
