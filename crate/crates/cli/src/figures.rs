//! Deterministic standalone SVG figures. Coordinates are printed with two
//! decimals so identical inputs give identical bytes.

use std::fmt::Write;

use tastekit_core::stats::summary::quantile;
use tastekit_core::stats::{Coefficient, CorrMatrix, INTERCEPT};

use crate::artifacts::ScoreTable;

const STYLE: &str = "text{font-family:sans-serif;font-size:11px;fill:#222}\
.title{font-size:13px;font-weight:bold}\
.axis{stroke:#444;stroke-width:1}\
.grid{stroke:#bbb;stroke-width:1;stroke-dasharray:3 3}\
.pos-sig{stroke:#1b6ca8;fill:#1b6ca8}\
.neg-sig{stroke:#c0392b;fill:#c0392b}\
.ns{stroke:#8a8a8a;fill:#8a8a8a}\
.box{fill:#d9e6f2;stroke:#2c3e50}\
.whisker{stroke:#2c3e50}\
.median{stroke:#c0392b;stroke-width:2}\
.point{fill:#1b6ca8;fill-opacity:0.7}\
.fit{stroke:#c0392b;stroke-width:2}";

struct Svg {
    body: String,
    width: f64,
    height: f64,
}

pub fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

impl Svg {
    fn new(width: f64, height: f64) -> Self {
        Self {
            body: String::new(),
            width,
            height,
        }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, class: &str) {
        let _ = writeln!(
            self.body,
            r#"<line class="{class}" x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#
        );
    }

    fn circle(&mut self, cx: f64, cy: f64, r: f64, class: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle class="{class}" cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}"/>"#
        );
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, attrs: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" {attrs}/>"#
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, attrs: &str, content: &str) {
        let sep = if attrs.is_empty() { "" } else { " " };
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}"{sep}{attrs}>{}</text>"#,
            escape(content)
        );
    }

    fn finish(self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
             <svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n\
             <style>{STYLE}</style>\n\
             <rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height
        )
    }
}

/// Linear map from data range `[d0, d1]` to pixels `[p0, p1]`.
#[derive(Clone, Copy)]
struct Scale {
    d0: f64,
    d1: f64,
    p0: f64,
    p1: f64,
}

impl Scale {
    fn new(mut d0: f64, mut d1: f64, p0: f64, p1: f64) -> Self {
        if !(d0.is_finite() && d1.is_finite()) {
            d0 = -1.0;
            d1 = 1.0;
        }
        if d1 - d0 < 1e-12 {
            d0 -= 0.5;
            d1 += 0.5;
        }
        let pad = 0.05 * (d1 - d0);
        Self {
            d0: d0 - pad,
            d1: d1 + pad,
            p0,
            p1,
        }
    }

    fn at(&self, v: f64) -> f64 {
        let v = v.clamp(self.d0, self.d1);
        self.p0 + (v - self.d0) / (self.d1 - self.d0) * (self.p1 - self.p0)
    }
}

/// Style class of a coefficient: significant positive, significant
/// negative, or not significant at `alpha`.
pub fn coefficient_class(c: &Coefficient, alpha: f64) -> &'static str {
    let spans_zero = c.ci_lo <= 0.0 && c.ci_hi >= 0.0;
    if !(c.p < alpha) || spans_zero {
        "ns"
    } else if c.beta > 0.0 {
        "pos-sig"
    } else {
        "neg-sig"
    }
}

/// Point estimates with 95% intervals, one row per non-intercept term.
pub fn forest_plot(title: &str, coefficients: &[Coefficient], alpha: f64) -> String {
    let terms: Vec<&Coefficient> = coefficients.iter().filter(|c| c.name != INTERCEPT).collect();
    let row_h = 24.0;
    let (left, right, top) = (170.0, 30.0, 40.0);
    let width = 560.0;
    let height = top + row_h * terms.len().max(1) as f64 + 50.0;
    let mut svg = Svg::new(width, height);
    svg.text(width / 2.0, 20.0, "middle", r#"class="title""#, title);
    let finite = |v: f64| if v.is_finite() { Some(v) } else { None };
    let lo = terms.iter().filter_map(|c| finite(c.ci_lo)).fold(0.0, f64::min);
    let hi = terms.iter().filter_map(|c| finite(c.ci_hi)).fold(0.0, f64::max);
    let x = Scale::new(lo, hi, left, width - right);
    let bottom = top + row_h * terms.len().max(1) as f64;
    svg.line(x.at(0.0), top - 8.0, x.at(0.0), bottom, "grid");
    svg.line(left, bottom, width - right, bottom, "axis");
    for v in [x.d0, 0.0, x.d1] {
        svg.line(x.at(v), bottom, x.at(v), bottom + 4.0, "axis");
        svg.text(x.at(v), bottom + 16.0, "middle", "", &format!("{v:.2}"));
    }
    svg.text(
        (left + width - right) / 2.0,
        bottom + 34.0,
        "middle",
        "",
        "β with 95% CI",
    );
    if terms.is_empty() {
        svg.text(left, top + 14.0, "start", "", "no predictors");
    }
    for (i, c) in terms.iter().enumerate() {
        let y = top + row_h * (i as f64 + 0.5);
        let class = coefficient_class(c, alpha);
        svg.text(left - 8.0, y + 4.0, "end", "", &c.name);
        let _ = writeln!(svg.body, r#"<g class="{class}" data-term="{}">"#, escape(&c.name));
        svg.line(x.at(c.ci_lo), y, x.at(c.ci_hi), y, class);
        svg.line(x.at(c.ci_lo), y - 4.0, x.at(c.ci_lo), y + 4.0, class);
        svg.line(x.at(c.ci_hi), y - 4.0, x.at(c.ci_hi), y + 4.0, class);
        svg.circle(x.at(c.beta), y, 4.0, class);
        svg.body.push_str("</g>\n");
    }
    svg.finish()
}

/// Box plots of BT scores per style, whiskers at the most extreme values
/// within 1.5 IQR and outliers drawn as points.
pub fn box_plot(scores: &ScoreTable) -> String {
    let n = scores.len().max(1) as f64;
    let (left, top, bottom_pad) = (60.0, 40.0, 50.0);
    let col_w = 90.0;
    let width = left + col_w * n + 20.0;
    let height = 360.0;
    let bottom = height - bottom_pad;
    let mut svg = Svg::new(width, height);
    svg.text(
        width / 2.0,
        20.0,
        "middle",
        r#"class="title""#,
        "Distributions of Bradley-Terry scores",
    );
    let all: Vec<f64> = scores.values().flat_map(|m| m.values().copied()).collect();
    let lo = all.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let y = Scale::new(lo, hi, bottom, top);
    svg.line(left, top, left, bottom, "axis");
    svg.line(left, bottom, width - 20.0, bottom, "axis");
    for v in [y.d0, 0.0, y.d1] {
        svg.line(left - 4.0, y.at(v), left, y.at(v), "axis");
        svg.text(left - 6.0, y.at(v) + 4.0, "end", "", &format!("{v:.2}"));
    }
    for (i, (style, m)) in scores.iter().enumerate() {
        let cx = left + col_w * (i as f64 + 0.5);
        let mut v: Vec<f64> = m.values().copied().collect();
        v.sort_by(f64::total_cmp);
        let (q1, med, q3) = (quantile(&v, 0.25), quantile(&v, 0.5), quantile(&v, 0.75));
        let iqr = q3 - q1;
        let (fence_lo, fence_hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
        let w_lo = v.iter().copied().find(|x| *x >= fence_lo).unwrap_or(q1);
        let w_hi = v.iter().rev().copied().find(|x| *x <= fence_hi).unwrap_or(q3);
        let _ = writeln!(svg.body, r#"<g data-style="{}">"#, escape(style));
        svg.line(cx, y.at(w_lo), cx, y.at(q1), "whisker");
        svg.line(cx, y.at(q3), cx, y.at(w_hi), "whisker");
        svg.line(cx - 12.0, y.at(w_lo), cx + 12.0, y.at(w_lo), "whisker");
        svg.line(cx - 12.0, y.at(w_hi), cx + 12.0, y.at(w_hi), "whisker");
        svg.rect(
            cx - 25.0,
            y.at(q3),
            50.0,
            (y.at(q1) - y.at(q3)).max(0.5),
            r#"class="box""#,
        );
        svg.line(cx - 25.0, y.at(med), cx + 25.0, y.at(med), "median");
        for x in v.iter().filter(|x| **x < fence_lo || **x > fence_hi) {
            svg.circle(cx, y.at(*x), 3.0, "point");
        }
        svg.body.push_str("</g>\n");
        svg.text(cx, bottom + 18.0, "middle", "", style);
    }
    svg.text(
        16.0,
        (top + bottom) / 2.0,
        "middle",
        r#"transform="rotate(-90 16 200)""#,
        "BT score",
    );
    svg.finish()
}

/// Diverging blue–white–red fill for a correlation in [−1, 1].
pub fn corr_color(v: f64) -> String {
    let t = v.clamp(-1.0, 1.0);
    let (r, g, b) = if t >= 0.0 {
        (255.0, 255.0 - 155.0 * t, 255.0 - 175.0 * t)
    } else {
        (255.0 + 200.0 * t, 255.0 + 130.0 * t, 255.0)
    };
    format!("#{:02x}{:02x}{:02x}", r.round() as u8, g.round() as u8, b.round() as u8)
}

/// Correlation heat map with the value printed in every cell.
pub fn heatmap(m: &CorrMatrix) -> String {
    let n = m.names.len() as f64;
    let cell = 56.0;
    let (left, top) = (100.0, 50.0);
    let width = left + cell * n + 20.0;
    let height = top + cell * n + 90.0;
    let mut svg = Svg::new(width, height);
    svg.text(
        width / 2.0,
        20.0,
        "middle",
        r#"class="title""#,
        "Correlation of BT scores",
    );
    for (i, row) in m.values.iter().enumerate() {
        let y = top + cell * i as f64;
        svg.text(left - 6.0, y + cell / 2.0 + 4.0, "end", "", &m.names[i]);
        for (j, v) in row.iter().enumerate() {
            let x = left + cell * j as f64;
            svg.rect(
                x,
                y,
                cell,
                cell,
                &format!(r##"fill="{}" stroke="#ffffff""##, corr_color(*v)),
            );
            svg.text(
                x + cell / 2.0,
                y + cell / 2.0 + 4.0,
                "middle",
                &format!(r#"class="cell" data-row="{i}" data-col="{j}""#),
                &format!("{v:.2}"),
            );
        }
    }
    for (j, name) in m.names.iter().enumerate() {
        let x = left + cell * (j as f64 + 0.5);
        let y = top + cell * n + 12.0;
        svg.text(x, y, "end", &format!(r#"transform="rotate(-45 {x:.2} {y:.2})""#), name);
    }
    svg.finish()
}

pub struct ScatterPanel {
    pub style: String,
    /// (alignment, BT score).
    pub points: Vec<(f64, f64)>,
    pub intercept: f64,
    pub slope: f64,
}

/// Text of a panel's slope annotation.
pub fn slope_label(slope: f64) -> String {
    format!("β = {slope:.3}")
}

/// One panel per style: BT score against mean caption↔response cosine,
/// with the fitted line and its slope.
pub fn scatter(panels: &[ScatterPanel]) -> String {
    let cols = panels.len().clamp(1, 3);
    let rows = panels.len().div_ceil(cols).max(1);
    let (pw, ph) = (240.0, 200.0);
    let width = pw * cols as f64 + 20.0;
    let height = ph * rows as f64 + 40.0;
    let mut svg = Svg::new(width, height);
    svg.text(
        width / 2.0,
        20.0,
        "middle",
        r#"class="title""#,
        "Semantic alignment and BT scores",
    );
    for (k, p) in panels.iter().enumerate() {
        let ox = 10.0 + pw * (k % cols) as f64;
        let oy = 30.0 + ph * (k / cols) as f64;
        let (l, r, t, b) = (ox + 40.0, ox + pw - 10.0, oy + 24.0, oy + ph - 36.0);
        let xs = p.points.iter().map(|q| q.0);
        let ys = p.points.iter().map(|q| q.1);
        let x = Scale::new(
            xs.clone().fold(f64::INFINITY, f64::min),
            xs.fold(f64::NEG_INFINITY, f64::max),
            l,
            r,
        );
        let y = Scale::new(
            ys.clone().fold(f64::INFINITY, f64::min),
            ys.fold(f64::NEG_INFINITY, f64::max),
            b,
            t,
        );
        let _ = writeln!(svg.body, r#"<g data-style="{}">"#, escape(&p.style));
        svg.text((l + r) / 2.0, oy + 14.0, "middle", "", &p.style);
        svg.line(l, b, r, b, "axis");
        svg.line(l, t, l, b, "axis");
        svg.text(l, b + 14.0, "middle", "", &format!("{:.3}", x.d0));
        svg.text(r, b + 14.0, "middle", "", &format!("{:.3}", x.d1));
        svg.text(l - 4.0, b, "end", "", &format!("{:.2}", y.d0));
        svg.text(l - 4.0, t + 8.0, "end", "", &format!("{:.2}", y.d1));
        for (a, s) in &p.points {
            svg.circle(x.at(*a), y.at(*s), 3.0, "point");
        }
        let (x0, x1) = (x.d0, x.d1);
        svg.line(
            x.at(x0),
            y.at(p.intercept + p.slope * x0),
            x.at(x1),
            y.at(p.intercept + p.slope * x1),
            "fit",
        );
        svg.text(r, t + 4.0, "end", r#"class="slope""#, &slope_label(p.slope));
        svg.text((l + r) / 2.0, b + 28.0, "middle", "", "mean cosine similarity");
        svg.body.push_str("</g>\n");
    }
    svg.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coef(beta: f64, lo: f64, hi: f64, p: f64) -> Coefficient {
        Coefficient {
            name: "x".into(),
            beta,
            std_err: 1.0,
            t: 0.0,
            p,
            ci_lo: lo,
            ci_hi: hi,
        }
    }

    #[test]
    fn classes_follow_interval() {
        assert_eq!(coefficient_class(&coef(0.5, -0.1, 1.1, 0.2), 0.05), "ns");
        assert_eq!(coefficient_class(&coef(0.5, 0.1, 0.9, 0.01), 0.05), "pos-sig");
        assert_eq!(coefficient_class(&coef(-0.5, -0.9, -0.1, 0.01), 0.05), "neg-sig");
    }

    #[test]
    fn colors_at_extremes() {
        assert_eq!(corr_color(0.0), "#ffffff");
        assert_eq!(corr_color(1.0), "#ff6450");
        assert_eq!(corr_color(-1.0), "#377dff");
    }
}
