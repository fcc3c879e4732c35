use std::collections::BTreeMap;
use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 150.0, 40.0, 60.0); // left, right, top, bottom
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub n: f64,
    pub median: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Series keyed by `"kind β"` from a summary CSV
/// (`beta,kind,n,N,median,median_lo,median_hi,...`).
pub fn read_summary(text: &str) -> Result<BTreeMap<String, Vec<Point>>, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next().ok_or("empty summary file")?.split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).ok_or(format!("summary lacks column {name}"));
    let (cb, ck, cn, cm, cl, ch) =
        (col("beta")?, col("kind")?, col("n")?, col("median")?, col("median_lo")?, col("median_hi")?);
    let mut series: BTreeMap<String, Vec<Point>> = BTreeMap::new();
    for (i, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != header.len() {
            return Err(format!("line {}: expected {} fields", i + 2, header.len()));
        }
        if f[cb] == "beta" {
            continue;
        }
        let num = |k: usize| f[k].parse::<f64>().map_err(|_| format!("line {}: bad number {:?}", i + 2, f[k]));
        series.entry(format!("{} β={}", f[ck], f[cb])).or_default().push(Point {
            n: num(cn)?,
            median: num(cm)?,
            lo: num(cl)?,
            hi: num(ch)?,
        });
    }
    Ok(series)
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-9);
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * span {
        out.push(t);
        t += step;
    }
    out
}

/// Line chart of `ln(median)` against `n` with a ribbon for the median CI.
pub fn render_svg(series: &BTreeMap<String, Vec<Point>>, title: &str) -> String {
    let finite = |p: &&Point| p.median > 0.0 && p.median.is_finite();
    let pts: Vec<&Point> = series.values().flatten().filter(finite).collect();
    let (mut x0, mut x1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.n), b.max(p.n)));
    let ys = pts.iter().flat_map(|p| [p.lo, p.median, p.hi]).filter(|y| *y > 0.0 && y.is_finite()).map(f64::ln);
    let (mut y0, mut y1) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-9 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-9 {
        y1 = y0 + 1.0;
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let (ml, mr, mt, mb) = MARGIN;
    let (pw, ph) = (WIDTH - ml - mr, HEIGHT - mt - mb);
    let sx = |x: f64| ml + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| mt + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        ml + pw / 2.0,
        escape(title)
    );
    let _ = writeln!(s, r##"<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##);
    for t in ticks(x0, x1) {
        let x = sx(t);
        let _ =
            writeln!(s, r##"<line x1="{x:.1}" y1="{}" x2="{x:.1}" y2="{}" stroke="#333"/>"##, mt + ph, mt + ph + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{}" text-anchor="middle">{t}</text>"#, mt + ph + 19.0);
    }
    for t in ticks(y0, y1) {
        let y = sy(t);
        let _ = writeln!(s, r##"<line x1="{}" y1="{y:.1}" x2="{ml}" y2="{y:.1}" stroke="#333"/>"##, ml - 5.0);
        let _ = writeln!(s, r##"<line x1="{ml}" y1="{y:.1}" x2="{}" y2="{y:.1}" stroke="#ddd"/>"##, ml + pw);
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, ml - 8.0, y + 4.0, trim(t));
    }
    let _ =
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">n  (N = 2^n)</text>"#, ml + pw / 2.0, HEIGHT - 15.0);
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">ln median resistance</text>"#,
        mt + ph / 2.0,
        mt + ph / 2.0
    );
    for (k, (name, points)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let good: Vec<&Point> = points.iter().filter(finite).collect();
        let band: Vec<&Point> = good.iter().copied().filter(|p| p.lo > 0.0 && p.hi.is_finite()).collect();
        if band.len() >= 2 {
            let mut poly: Vec<String> = band.iter().map(|p| format!("{:.1},{:.1}", sx(p.n), sy(p.hi.ln()))).collect();
            poly.extend(band.iter().rev().map(|p| format!("{:.1},{:.1}", sx(p.n), sy(p.lo.ln()))));
            let _ = writeln!(
                s,
                r#"<polygon points="{}" fill="{color}" fill-opacity="0.18" stroke="none"/>"#,
                poly.join(" ")
            );
        }
        let line: Vec<String> = good.iter().map(|p| format!("{:.1},{:.1}", sx(p.n), sy(p.median.ln()))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, line.join(" "));
        for p in &good {
            let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>"#, sx(p.n), sy(p.median.ln()));
        }
        let ly = mt + 12.0 + 20.0 * k as f64;
        let lx = ml + pw + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(name));
    }
    s.push_str("</svg>\n");
    s
}

fn trim(x: f64) -> String {
    let s = format!("{x:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSV: &str = "beta,kind,n,N,median,median_lo,median_hi,q25,q75,replicas,infinite\n\
        1,point,6,64,2,1.5,2.5,1,3,10,0\n1,point,7,128,3,2,4,2,4,10,0\n2,point,6,64,1,0.8,1.2,1,2,10,0\n";

    #[test]
    fn parses_series() {
        let s = read_summary(CSV).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s["point β=1"].len(), 2);
        assert!(read_summary("beta,kind\n1").is_err());
    }

    #[test]
    fn renders_wellformed_svg() {
        let svg = render_svg(&read_summary(CSV).unwrap(), "test <plot>");
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<polygon").count(), 1);
        assert!(svg.contains("test &lt;plot&gt;"));
    }

    #[test]
    fn ticks_cover_range() {
        let t = ticks(0.3, 2.7);
        assert!(t.first().unwrap() >= &0.3 && t.last().unwrap() <= &2.7);
        assert!(t.len() >= 3);
    }
}
