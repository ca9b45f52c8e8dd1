//! `export-plots`: static SVG line charts of yearly rank positions.

use std::fmt::Write as _;
use std::io::Write;

use anyhow::Result;
use kosrel::fusion::{top_k_by_average, Ranks};
use kosrel::{RelevanceRanking, TreeCode};

use crate::config::Loaded;
use crate::output::{self, create};
use crate::{fuse, trend};

const COLORS: [&str; 10] =
    ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];
const W: f64 = 800.0;
const H: f64 = 480.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Rank (y, 1 at the top) against year (x) for each code in `codes`.
pub fn render(title: &str, hash: &str, years: &[i32], positions: &[&Ranks], codes: &[TreeCode]) -> String {
    let max_rank = positions.iter().flat_map(|p| codes.iter().filter_map(|c| p.get(c))).copied().max().unwrap_or(1);
    let plot_w = W - LEFT - RIGHT;
    let plot_h = H - TOP - BOTTOM;
    let x = |i: usize| {
        if years.len() > 1 { LEFT + plot_w * i as f64 / (years.len() - 1) as f64 } else { LEFT + plot_w / 2.0 }
    };
    let y = |r: u32| {
        if max_rank > 1 { TOP + plot_h * (r - 1) as f64 / (max_rank - 1) as f64 } else { TOP + plot_h / 2.0 }
    };

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(s, "<!-- config_hash={hash} -->");
    let _ = writeln!(s, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">");
    let _ = writeln!(s, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(s, "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>", W / 2.0, esc(title));
    let _ = writeln!(
        s,
        "<line x1=\"{LEFT}\" y1=\"{TOP}\" x2=\"{LEFT}\" y2=\"{}\" stroke=\"black\"/><line x1=\"{LEFT}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        TOP + plot_h,
        TOP + plot_h,
        LEFT + plot_w,
        TOP + plot_h
    );
    for (i, year) in years.iter().enumerate() {
        let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{}\" text-anchor=\"middle\">{year}</text>", x(i), H - BOTTOM + 20.0);
    }
    for r in [1, max_rank.div_ceil(2), max_rank] {
        let _ = writeln!(s, "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\">{r}</text>", LEFT - 8.0, y(r) + 4.0);
    }
    let _ = writeln!(s, "<text x=\"16\" y=\"{}\" transform=\"rotate(-90 16 {})\" text-anchor=\"middle\">rank</text>", TOP + plot_h / 2.0, TOP + plot_h / 2.0);

    for (n, code) in codes.iter().enumerate() {
        let color = COLORS[n % COLORS.len()];
        let points: Vec<String> = positions
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.get(code).map(|&r| format!("{:.1},{:.1}", x(i), y(r))))
            .collect();
        if points.len() > 1 {
            let _ = writeln!(s, "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>", points.join(" "));
        }
        for p in &points {
            let (px, py) = p.split_once(',').unwrap();
            let _ = writeln!(s, "<circle cx=\"{px}\" cy=\"{py}\" r=\"3\" fill=\"{color}\"/>");
        }
        let ly = TOP + 16.0 * n as f64;
        let _ = writeln!(
            s,
            "<rect x=\"{}\" y=\"{:.1}\" width=\"12\" height=\"3\" fill=\"{color}\"/><text x=\"{}\" y=\"{:.1}\">{}</text>",
            W - RIGHT + 15.0,
            ly - 4.0,
            W - RIGHT + 32.0,
            ly,
            esc(code.as_str())
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn run(l: &Loaded) -> Result<()> {
    let rankings = fuse::load(l)?;
    let grouped = trend::by_level_and_year(&rankings);
    let positions = trend::yearly_positions(&rankings);
    output::replace_dir(&l.output_dir().join("plots"), |dir| {
        for (level, per_year) in &grouped {
            let all: Vec<RelevanceRanking> = per_year.values().flatten().cloned().collect();
            let codes: Vec<TreeCode> = top_k_by_average(&all, l.cfg.top_k.min(COLORS.len()))
                .into_iter()
                .map(|(c, _)| c)
                .collect();
            let years: Vec<i32> = per_year.keys().copied().collect();
            let pos: Vec<&Ranks> = positions[level].values().collect();
            let svg = render(&format!("Rank trajectories, level {level}"), &l.hash, &years, &pos, &codes);
            let mut w = create(&dir.join(format!("rank_trajectories_level-{level}.svg")))?;
            w.write_all(svg.as_bytes())?;
            w.flush()?;
        }
        Ok(())
    })
}
