//! Deterministic SVG rendering of [`PlotData`]. Layout constants are fixed
//! and no clock or environment value reaches the output, so equal data
//! gives equal bytes. Every drawn statistic is also attached as a `data-*`
//! attribute carrying the exact number.

use std::fmt::Write as _;

use plannerbench_core::stats::MissingRow;

use crate::plot::{PerformanceMode, PerformancePlot, PlotData, ProgressPlot, RegressionPlot};

const WIDTH: f64 = 760.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 620.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 350.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
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

/// Coordinates are rounded to hundredths.
fn c(v: f64) -> String {
    format!("{v:.2}")
}

/// Tick labels with at most four significant digits.
fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let mag = v.abs().log10().floor() as i32;
    if !(-3..6).contains(&mag) {
        return format!("{v:.3e}");
    }
    let decimals = (3 - mag).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[derive(Debug, Clone, Copy)]
struct Scale {
    lo: f64,
    hi: f64,
    a: f64,
    b: f64,
}

impl Scale {
    /// Maps `[lo, hi]` (padded when degenerate) onto `[a, b]`.
    fn new(values: impl IntoIterator<Item = f64>, a: f64, b: f64, pad: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.into_iter().filter(|v| v.is_finite()) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo <= f64::EPSILON * lo.abs().max(1.0) {
            lo -= 1.0;
            hi += 1.0;
        } else if pad {
            let p = 0.05 * (hi - lo);
            lo -= p;
            hi += p;
        }
        Scale { lo, hi, a, b }
    }

    fn fixed(lo: f64, hi: f64, a: f64, b: f64) -> Self {
        Scale { lo, hi, a, b }
    }

    fn at(&self, v: f64) -> f64 {
        self.a + (v - self.lo) / (self.hi - self.lo) * (self.b - self.a)
    }

    fn ticks(&self) -> Vec<f64> {
        (0..=4)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / 4.0)
            .collect()
    }
}

struct Doc {
    out: String,
}

impl Doc {
    fn new(height: f64, title: &str) -> Self {
        let mut out = String::new();
        let _ = write!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\" font-size=\"12\">\n",
            w = WIDTH,
            h = height
        );
        let _ = writeln!(out, "<rect width=\"{WIDTH}\" height=\"{height}\" fill=\"white\"/>");
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">{}</text>",
            c((LEFT + RIGHT) / 2.0),
            esc(title)
        );
        Doc { out }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, extra: &str) {
        let _ = writeln!(
            self.out,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{stroke}\"{extra}/>",
            c(x1),
            c(y1),
            c(x2),
            c(y2)
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, s: &str) {
        let _ = writeln!(
            self.out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"{anchor}\">{}</text>",
            c(x),
            c(y),
            esc(s)
        );
    }

    fn y_axis(&mut self, scale: &Scale, label: &str) {
        self.line(LEFT, TOP, LEFT, BOTTOM, "black", "");
        for t in scale.ticks() {
            let y = scale.at(t);
            self.line(LEFT - 4.0, y, LEFT, y, "black", "");
            self.line(LEFT, y, RIGHT, y, "#dddddd", "");
            self.text(LEFT - 7.0, y + 4.0, "end", &tick_label(t));
        }
        let _ = writeln!(
            self.out,
            "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>",
            c((TOP + BOTTOM) / 2.0),
            c((TOP + BOTTOM) / 2.0),
            esc(label)
        );
    }

    fn x_axis(&mut self, scale: Option<&Scale>, label: &str) {
        self.line(LEFT, BOTTOM, RIGHT, BOTTOM, "black", "");
        if let Some(scale) = scale {
            for t in scale.ticks() {
                let x = scale.at(t);
                self.line(x, BOTTOM, x, BOTTOM + 4.0, "black", "");
                self.text(x, BOTTOM + 16.0, "middle", &tick_label(t));
            }
        }
        self.text((LEFT + RIGHT) / 2.0, BOTTOM + 34.0, "middle", label);
    }

    fn legend(&mut self, names: &[&str]) {
        for (i, n) in names.iter().enumerate() {
            let y = TOP + 8.0 + 18.0 * i as f64;
            let _ = writeln!(
                self.out,
                "<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\"/>",
                c(RIGHT + 14.0),
                c(y - 10.0),
                color(i)
            );
            self.text(RIGHT + 32.0, y, "start", n);
        }
    }

    fn missing_table(&mut self, rows: &[MissingRow], top: f64) {
        self.text(LEFT, top, "start", "planner: missing / total runs");
        for (i, r) in rows.iter().enumerate() {
            let y = top + 16.0 * (i + 1) as f64;
            let _ = writeln!(
                self.out,
                "<text x=\"{}\" y=\"{}\" data-planner=\"{}\" data-n-total=\"{}\" data-n-missing=\"{}\">{}: {} / {}</text>",
                c(LEFT),
                c(y),
                esc(&r.planner),
                r.n_total,
                r.n_missing,
                esc(&r.planner),
                r.n_missing,
                r.n_total
            );
        }
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

fn table_height(rows: usize) -> f64 {
    BOTTOM + 60.0 + 16.0 * (rows + 1) as f64 + 10.0
}

pub fn render(plot: &PlotData) -> String {
    match plot {
        PlotData::Performance(p) => performance(p),
        PlotData::Progress(p) => progress(p),
        PlotData::Regression(p) => regression(p),
    }
}

fn slots(n: usize) -> impl Fn(usize) -> f64 {
    let width = (RIGHT - LEFT) / n.max(1) as f64;
    move |i| LEFT + width * (i as f64 + 0.5)
}

fn performance(p: &PerformancePlot) -> String {
    let title = format!("{} ({}): {}", p.problem, p.version, p.attribute);
    let mut d = Doc::new(table_height(p.missing.len()), &title);
    match p.mode {
        PerformanceMode::Boxplot => {
            let values = p.planners.iter().filter_map(|e| e.box_stats.as_ref()).flat_map(|b| {
                [b.whisker_low, b.whisker_high, b.notch_low, b.notch_high]
                    .into_iter()
                    .flatten()
                    .chain(b.outliers.iter().copied())
            });
            let y = Scale::new(values, BOTTOM, TOP, true);
            d.y_axis(&y, &p.y_label);
            d.x_axis(None, &p.x_label);
            let slot = slots(p.planners.len());
            let half = ((RIGHT - LEFT) / p.planners.len().max(1) as f64 * 0.3).min(40.0);
            for (i, e) in p.planners.iter().enumerate() {
                let x = slot(i);
                d.text(x, BOTTOM + 16.0, "middle", &e.name);
                let Some(b) = e.box_stats.as_ref().filter(|b| b.n > 0) else {
                    d.text(x, (TOP + BOTTOM) / 2.0, "middle", "no data");
                    continue;
                };
                let (q1, med, q3) = (b.q1.unwrap(), b.median.unwrap(), b.q3.unwrap());
                let (wl, wh) = (b.whisker_low.unwrap(), b.whisker_high.unwrap());
                let (nl, nh) = (b.notch_low.unwrap(), b.notch_high.unwrap());
                let _ = writeln!(
                    d.out,
                    "<g class=\"box\" data-planner=\"{}\" data-n=\"{}\" data-median=\"{med}\" data-q1=\"{q1}\" data-q3=\"{q3}\" data-whisker-low=\"{wl}\" data-whisker-high=\"{wh}\" data-notch-low=\"{nl}\" data-notch-high=\"{nh}\">",
                    esc(&e.name),
                    b.n
                );
                d.line(x, y.at(wl), x, y.at(q1), "black", "");
                d.line(x, y.at(q3), x, y.at(wh), "black", "");
                d.line(x - half / 2.0, y.at(wl), x + half / 2.0, y.at(wl), "black", "");
                d.line(x - half / 2.0, y.at(wh), x + half / 2.0, y.at(wh), "black", "");
                let _ = writeln!(
                    d.out,
                    "<polygon points=\"{},{} {},{} {},{} {},{} {},{} {},{} {},{} {},{} {},{} {},{}\" fill=\"{}\" fill-opacity=\"0.35\" stroke=\"{}\"/>",
                    c(x - half), c(y.at(q1)),
                    c(x + half), c(y.at(q1)),
                    c(x + half), c(y.at(nl.max(q1))),
                    c(x + half * 0.6), c(y.at(med)),
                    c(x + half), c(y.at(nh.min(q3))),
                    c(x + half), c(y.at(q3)),
                    c(x - half), c(y.at(q3)),
                    c(x - half), c(y.at(nh.min(q3))),
                    c(x - half * 0.6), c(y.at(med)),
                    c(x - half), c(y.at(nl.max(q1))),
                    color(i),
                    color(i)
                );
                d.line(
                    x - half * 0.6,
                    y.at(med),
                    x + half * 0.6,
                    y.at(med),
                    "black",
                    " stroke-width=\"2\"",
                );
                for o in &b.outliers {
                    let _ = writeln!(
                        d.out,
                        "<circle cx=\"{}\" cy=\"{}\" r=\"2.5\" fill=\"none\" stroke=\"black\" data-value=\"{o}\"/>",
                        c(x),
                        c(y.at(*o))
                    );
                }
                d.out.push_str("</g>\n");
            }
        }
        PerformanceMode::Ecdf => {
            let xs = p.planners.iter().flat_map(|e| e.ecdf.iter().flatten().map(|pt| pt.x));
            let x = Scale::new(xs, LEFT, RIGHT, true);
            let y = Scale::fixed(0.0, 1.0, BOTTOM, TOP);
            d.y_axis(&y, &p.y_label);
            d.x_axis(Some(&x), &p.x_label);
            for (i, e) in p.planners.iter().enumerate() {
                let pts = e.ecdf.as_deref().unwrap_or_default();
                let mut path = format!("{},{}", c(LEFT), c(BOTTOM));
                let mut prev = 0.0;
                for pt in pts {
                    let _ = write!(
                        path,
                        " {},{} {},{}",
                        c(x.at(pt.x)),
                        c(y.at(prev)),
                        c(x.at(pt.x)),
                        c(y.at(pt.f))
                    );
                    prev = pt.f;
                }
                let _ = write!(path, " {},{}", c(RIGHT), c(y.at(prev)));
                let data: Vec<String> = pts.iter().map(|pt| format!("{}:{}", pt.x, pt.f)).collect();
                let _ = writeln!(
                    d.out,
                    "<polyline class=\"ecdf\" data-planner=\"{}\" data-points=\"{}\" points=\"{path}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>",
                    esc(&e.name),
                    data.join(" "),
                    color(i)
                );
            }
            let names: Vec<&str> = p.planners.iter().map(|e| e.name.as_str()).collect();
            d.legend(&names);
        }
        PerformanceMode::Fraction => {
            let y = Scale::fixed(0.0, 1.0, BOTTOM, TOP);
            d.y_axis(&y, &p.y_label);
            d.x_axis(None, &p.x_label);
            let slot = slots(p.planners.len());
            let half = ((RIGHT - LEFT) / p.planners.len().max(1) as f64 * 0.3).min(40.0);
            for (i, e) in p.planners.iter().enumerate() {
                let x = slot(i);
                d.text(x, BOTTOM + 16.0, "middle", &e.name);
                let Some(f) = &e.fraction else {
                    d.text(x, (TOP + BOTTOM) / 2.0, "middle", "no data");
                    continue;
                };
                let _ = writeln!(
                    d.out,
                    "<rect class=\"fraction\" data-planner=\"{}\" data-fraction=\"{}\" data-low=\"{}\" data-high=\"{}\" data-n=\"{}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" fill-opacity=\"0.6\"/>",
                    esc(&e.name),
                    f.fraction,
                    f.low,
                    f.high,
                    f.n,
                    c(x - half),
                    c(y.at(f.fraction)),
                    c(2.0 * half),
                    c(BOTTOM - y.at(f.fraction)),
                    color(i)
                );
                d.line(x, y.at(f.low), x, y.at(f.high), "black", "");
                d.line(x - 5.0, y.at(f.low), x + 5.0, y.at(f.low), "black", "");
                d.line(x - 5.0, y.at(f.high), x + 5.0, y.at(f.high), "black", "");
            }
        }
    }
    d.missing_table(&p.missing, BOTTOM + 60.0);
    d.finish()
}

/// Maximal runs of consecutive indices where `f` is defined.
fn segments<T>(n: usize, f: impl Fn(usize) -> Option<T>) -> Vec<Vec<(usize, T)>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    for i in 0..n {
        match f(i) {
            Some(v) => cur.push((i, v)),
            None if !cur.is_empty() => out.push(std::mem::take(&mut cur)),
            None => {}
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn progress(p: &ProgressPlot) -> String {
    let title = format!("{} ({}): {} over time", p.problem, p.version, p.attribute);
    let counts_top = BOTTOM + 50.0;
    let counts_bottom = counts_top + 60.0;
    let mut d = Doc::new(table_height(p.missing.len()) + 90.0, &title);
    let x = Scale::fixed(0.0, p.time_limit, LEFT, RIGHT);
    let values = p.planners.iter().flat_map(|e| {
        let a = &e.aggregate;
        a.mean
            .iter()
            .chain(&a.ci_low)
            .chain(&a.ci_high)
            .flatten()
            .copied()
            .chain(e.points.iter().flatten().map(|pt| pt[1]))
            .collect::<Vec<_>>()
    });
    let y = Scale::new(values, BOTTOM, TOP, true);
    d.y_axis(&y, &p.y_label);
    d.x_axis(Some(&x), &p.x_label);
    for (i, e) in p.planners.iter().enumerate() {
        let a = &e.aggregate;
        let _ = writeln!(
            d.out,
            "<g class=\"progress\" data-planner=\"{}\" data-runs=\"{}\">",
            esc(&e.name),
            e.runs
        );
        for seg in segments(a.grid.len(), |k| a.ci_low[k].zip(a.ci_high[k])) {
            let mut pts: Vec<String> = seg
                .iter()
                .map(|(k, (_, hi))| format!("{},{}", c(x.at(a.grid[*k])), c(y.at(*hi))))
                .collect();
            pts.extend(
                seg.iter()
                    .rev()
                    .map(|(k, (lo, _))| format!("{},{}", c(x.at(a.grid[*k])), c(y.at(*lo)))),
            );
            let data: Vec<String> = seg
                .iter()
                .map(|(k, (lo, hi))| format!("{}:{}:{}", a.grid[*k], lo, hi))
                .collect();
            let _ = writeln!(
                d.out,
                "<polygon class=\"band\" data-values=\"{}\" points=\"{}\" fill=\"{}\" fill-opacity=\"0.2\" stroke=\"none\"/>",
                data.join(" "),
                pts.join(" "),
                color(i)
            );
        }
        for seg in segments(a.grid.len(), |k| a.mean[k]) {
            let pts: Vec<String> = seg
                .iter()
                .map(|(k, m)| format!("{},{}", c(x.at(a.grid[*k])), c(y.at(*m))))
                .collect();
            let data: Vec<String> = seg.iter().map(|(k, m)| format!("{}:{}", a.grid[*k], m)).collect();
            let _ = writeln!(
                d.out,
                "<polyline class=\"mean\" data-values=\"{}\" points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>",
                data.join(" "),
                pts.join(" "),
                color(i)
            );
        }
        for pt in e.points.iter().flatten() {
            let _ = writeln!(
                d.out,
                "<circle cx=\"{}\" cy=\"{}\" r=\"1.5\" fill=\"{}\" fill-opacity=\"0.3\"/>",
                c(x.at(pt[0])),
                c(y.at(pt[1])),
                color(i)
            );
        }
        d.out.push_str("</g>\n");
    }
    let names: Vec<&str> = p.planners.iter().map(|e| e.name.as_str()).collect();
    d.legend(&names);

    // data points per one-second interval
    let max_count = p
        .planners
        .iter()
        .flat_map(|e| e.aggregate.counts_1s.iter().copied())
        .max()
        .unwrap_or(0)
        .max(1);
    d.text(LEFT, counts_top - 6.0, "start", "runs with data per second");
    d.line(LEFT, counts_bottom, RIGHT, counts_bottom, "black", "");
    let groups = p.planners.len().max(1) as f64;
    for (i, e) in p.planners.iter().enumerate() {
        for (s, n) in e.aggregate.counts_1s.iter().enumerate() {
            let x0 = x.at(s as f64);
            let x1 = x.at((s + 1) as f64).min(RIGHT);
            let w = (x1 - x0) / groups;
            let h = (counts_bottom - counts_top) * *n as f64 / max_count as f64;
            let _ = writeln!(
                d.out,
                "<rect class=\"count\" data-planner=\"{}\" data-second=\"{s}\" data-count=\"{n}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>",
                esc(&e.name),
                c(x0 + w * i as f64),
                c(counts_bottom - h),
                c(w.max(0.0)),
                c(h),
                color(i)
            );
        }
    }
    d.missing_table(&p.missing, counts_bottom + 30.0);
    d.finish()
}

fn regression(p: &RegressionPlot) -> String {
    let title = format!("{}: {} by version", p.problem, p.attribute);
    let mut d = Doc::new(BOTTOM + 60.0, &title);
    let values = p.planners.iter().flat_map(|e| {
        e.bars.iter().flat_map(|b| {
            let se = b.std_error.unwrap_or(0.0);
            [0.0, b.mean - se, b.mean + se]
        })
    });
    let y = Scale::new(values, BOTTOM, TOP, true);
    d.y_axis(&y, &p.y_label);
    d.x_axis(None, &p.x_label);
    let slot = slots(p.versions.len());
    let group = (RIGHT - LEFT) / p.versions.len().max(1) as f64 * 0.8;
    let bar = group / p.planners.len().max(1) as f64;
    let base = y.at(0.0_f64.clamp(y.lo, y.hi));
    for (v, version) in p.versions.iter().enumerate() {
        d.text(slot(v), BOTTOM + 16.0, "middle", version);
    }
    for (i, e) in p.planners.iter().enumerate() {
        for b in &e.bars {
            let Some(v) = p.versions.iter().position(|x| *x == b.version) else {
                continue;
            };
            let x0 = slot(v) - group / 2.0 + bar * i as f64;
            let top = y.at(b.mean);
            let se = b.std_error.map_or(String::new(), |s| s.to_string());
            let _ = writeln!(
                d.out,
                "<rect class=\"bar\" data-planner=\"{}\" data-version=\"{}\" data-mean=\"{}\" data-std-error=\"{se}\" data-n=\"{}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" fill-opacity=\"0.7\"/>",
                esc(&e.name),
                esc(&b.version),
                b.mean,
                b.n,
                c(x0),
                c(top.min(base)),
                c(bar * 0.9),
                c((base - top).abs()),
                color(i)
            );
            if let Some(s) = b.std_error {
                let xm = x0 + bar * 0.45;
                d.line(xm, y.at(b.mean - s), xm, y.at(b.mean + s), "black", "");
                d.line(xm - 3.0, y.at(b.mean - s), xm + 3.0, y.at(b.mean - s), "black", "");
                d.line(xm - 3.0, y.at(b.mean + s), xm + 3.0, y.at(b.mean + s), "black", "");
            }
        }
    }
    let names: Vec<&str> = p.planners.iter().map(|e| e.name.as_str()).collect();
    d.legend(&names);
    d.finish()
}
