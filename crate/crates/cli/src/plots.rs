//! Static SVG plots.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
];

pub fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn header(title: &str, digest: &str) -> String {
    let mut s = String::new();
    writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(s, "<!-- run_digest: {digest} -->").unwrap();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    )
    .unwrap();
    s
}

fn axes(s: &mut String, x_label: &str, y_label: &str, x_range: (f64, f64)) {
    let (x0, y0, x1, y1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN / 2.0, MARGIN);
    writeln!(
        s,
        r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#
    )
    .unwrap();
    writeln!(
        s,
        r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#
    )
    .unwrap();
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let x = x0 + t * (x1 - x0);
        let v = x_range.0 + t * (x_range.1 - x_range.0);
        writeln!(
            s,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{v:.2}</text>"#,
            y0 + 16.0
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    )
    .unwrap();
}

fn pooled_range(series: &[(&str, &[f64])]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (_, xs) in series {
        for &x in *xs {
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

/// Overlaid density-normalized step histograms on shared bins.
pub fn histogram_svg(
    title: &str,
    x_label: &str,
    series: &[(&str, &[f64])],
    bins: usize,
    digest: &str,
) -> String {
    let bins = bins.max(1);
    let (lo, hi) = pooled_range(series);
    let width = (hi - lo) / bins as f64;
    let fractions: Vec<Vec<f64>> = series
        .iter()
        .map(|(_, xs)| {
            let mut counts = vec![0usize; bins];
            for &x in *xs {
                let b = (((x - lo) / width) as usize).min(bins - 1);
                counts[b] += 1;
            }
            let n = xs.len().max(1) as f64;
            counts.into_iter().map(|c| c as f64 / n).collect()
        })
        .collect();
    let ymax = fractions
        .iter()
        .flatten()
        .copied()
        .fold(0.0, f64::max)
        .max(1e-12);
    let mut s = header(title, digest);
    axes(&mut s, x_label, "fraction", (lo, hi));
    let (x0, y0, x1, y1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN / 2.0, MARGIN + 20.0);
    let sx = |v: f64| x0 + (v - lo) / (hi - lo) * (x1 - x0);
    let sy = |f: f64| y0 - f / ymax * (y0 - y1);
    for (k, ((label, xs), fr)) in series.iter().zip(&fractions).enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut d = format!("M{:.2},{:.2}", sx(lo), y0);
        for (b, &f) in fr.iter().enumerate() {
            let l = lo + b as f64 * width;
            write!(
                d,
                " L{:.2},{:.2} L{:.2},{:.2}",
                sx(l),
                sy(f),
                sx(l + width),
                sy(f)
            )
            .unwrap();
        }
        write!(d, " L{:.2},{:.2}", sx(hi), y0).unwrap();
        writeln!(
            s,
            r#"<path d="{d}" fill="{color}" fill-opacity="0.25" stroke="{color}"/>"#
        )
        .unwrap();
        let ly = MARGIN + 14.0 * k as f64;
        writeln!(
            s,
            r#"<rect x="{:.1}" y="{:.1}" width="10" height="10" fill="{color}"/>"#,
            x1 - 170.0,
            ly - 9.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.1}" y="{ly:.1}">{} (n={})</text>"#,
            x1 - 155.0,
            escape(label),
            xs.len()
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn silverman_bandwidth(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let h = 1.06 * sd * n.powf(-0.2);
    if h > 0.0 {
        h
    } else {
        0.1
    }
}

/// Violin of a reference distribution with its points as a strip and one
/// highlighted value.
pub fn violin_svg(
    title: &str,
    y_label: &str,
    reference: &[f64],
    highlight: Option<(&str, f64)>,
    digest: &str,
) -> String {
    let mut all: Vec<f64> = reference.to_vec();
    if let Some((_, v)) = highlight {
        all.push(v);
    }
    let (mut lo, mut hi) = pooled_range(&[("", &all)]);
    let pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
    let mut s = header(title, digest);
    let (x0, y0, x1, y1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN / 2.0, MARGIN);
    writeln!(
        s,
        r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#
    )
    .unwrap();
    let sy = |v: f64| y0 - (v - lo) / (hi - lo) * (y0 - y1);
    for k in 0..=4 {
        let v = lo + k as f64 / 4.0 * (hi - lo);
        writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.2}</text>"#,
            x0 - 4.0,
            sy(v) + 4.0
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    )
    .unwrap();
    let cx = (x0 + x1) / 2.0;
    if !reference.is_empty() {
        let h = silverman_bandwidth(reference);
        let steps = 80;
        let dens: Vec<(f64, f64)> = (0..=steps)
            .map(|i| {
                let y = lo + i as f64 / steps as f64 * (hi - lo);
                let d: f64 = reference
                    .iter()
                    .map(|&x| (-0.5 * ((y - x) / h).powi(2)).exp())
                    .sum();
                (y, d)
            })
            .collect();
        let dmax = dens.iter().map(|p| p.1).fold(0.0, f64::max).max(1e-12);
        let half = 0.3 * (x1 - x0);
        let mut d = String::new();
        for (i, &(y, v)) in dens.iter().enumerate() {
            write!(
                d,
                "{}{:.2},{:.2} ",
                if i == 0 { "M" } else { "L" },
                cx + v / dmax * half,
                sy(y)
            )
            .unwrap();
        }
        for &(y, v) in dens.iter().rev() {
            write!(d, "L{:.2},{:.2} ", cx - v / dmax * half, sy(y)).unwrap();
        }
        d.push('Z');
        writeln!(
            s,
            r##"<path d="{d}" fill="#1f77b4" fill-opacity="0.3" stroke="#1f77b4"/>"##
        )
        .unwrap();
        for (i, &x) in reference.iter().enumerate() {
            let jitter = ((i as f64 * 0.618_033_988_75).fract() - 0.5) * 0.2 * (x1 - x0);
            writeln!(
                s,
                r##"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="#333333" fill-opacity="0.6"/>"##,
                cx + jitter,
                sy(x)
            )
            .unwrap();
        }
    }
    if let Some((label, v)) = highlight {
        let y = sy(v);
        writeln!(s, r##"<line x1="{x0}" y1="{y:.2}" x2="{x1}" y2="{y:.2}" stroke="#d62728" stroke-dasharray="4 3"/>"##)
            .unwrap();
        writeln!(
            s,
            r##"<circle cx="{cx:.2}" cy="{y:.2}" r="6" fill="#d62728"/>"##
        )
        .unwrap();
        writeln!(
            s,
            r##"<text x="{:.2}" y="{:.2}" fill="#d62728">{} ({v:.2})</text>"##,
            cx + 10.0,
            y - 8.0,
            escape(label)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escapes_markup() {
        assert_eq!(escape("a<b & \"c\">"), "a&lt;b &amp; &quot;c&quot;&gt;");
    }

    #[test]
    fn degenerate_inputs_render() {
        let h = histogram_svg("t", "x", &[("a", &[1.0, 1.0]), ("b", &[])], 10, "d");
        assert!(h.ends_with("</svg>\n"));
        let v = violin_svg("t", "y", &[], Some(("c", 5.0)), "d");
        assert!(v.contains("<circle"));
    }
}
