//! Lag × predicted-week AUC matrices as TSV and SVG.

use std::fmt::Write as _;

use crate::eval::grid::{CellStatus, EvaluationGrid};
use crate::tsv::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// AUC on the held-out test split.
    Test,
    /// Mean cross-validation AUC on the training split.
    Cv,
}

impl Metric {
    pub fn file_stem(self) -> &'static str {
        match self {
            Metric::Test => "test_auc",
            Metric::Cv => "cv_auc",
        }
    }
}

pub struct HeatmapFiles {
    pub matrix_tsv: String,
    pub svg: String,
}

/// Value matrix indexed `[lag - 1][predicted_week - 2]`. `None` marks cells
/// that are invalid (predicted week not after the lag), missing from the
/// grid, or not evaluated successfully.
pub fn value_matrix(grid: &EvaluationGrid, metric: Metric) -> Vec<Vec<Option<f64>>> {
    let n = grid.num_weeks;
    (1..n)
        .map(|lag| {
            (2..=n)
                .map(|week| {
                    let cell = grid.get(lag, week)?;
                    if cell.status != CellStatus::Ok {
                        return None;
                    }
                    match metric {
                        Metric::Test => cell.test_auc,
                        Metric::Cv => cell.cv_mean_auc,
                    }
                })
                .collect()
        })
        .collect()
}

pub fn matrix_tsv(values: &[Vec<Option<f64>>]) -> String {
    let width = values.first().map_or(0, Vec::len);
    let mut out = String::from("lag");
    for w in 0..width {
        let _ = write!(out, "\t{}", w + 2);
    }
    out.push('\n');
    for (i, row) in values.iter().enumerate() {
        let _ = write!(out, "{}", i + 1);
        for v in row {
            out.push('\t');
            if let Some(v) = v {
                out.push_str(&fmt_f64(*v));
            }
        }
        out.push('\n');
    }
    out
}

/// Inverse of [`matrix_tsv`].
pub fn parse_matrix_tsv(text: &str) -> Result<Vec<Vec<Option<f64>>>, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty matrix")?;
    let width = header.split('\t').count() - 1;
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            if f.len() != width + 1 {
                return Err(format!("row {l:?} has {} fields", f.len()));
            }
            f[1..]
                .iter()
                .map(|v| crate::tsv::parse_opt_f64(v))
                .collect()
        })
        .collect()
}

const RAMP: [(f64, [f64; 3]); 3] = [
    (0.5, [255.0, 255.0, 217.0]),
    (0.75, [65.0, 182.0, 196.0]),
    (1.0, [8.0, 29.0, 88.0]),
];

/// Fill colour for an AUC. Values below 0.5 share the lightest colour.
pub fn ramp_color(auc: f64) -> [u8; 3] {
    let v = auc.clamp(RAMP[0].0, RAMP[2].0);
    let (lo, hi) = if v <= RAMP[1].0 { (RAMP[0], RAMP[1]) } else { (RAMP[1], RAMP[2]) };
    let t = (v - lo.0) / (hi.0 - lo.0);
    let mut out = [0u8; 3];
    for c in 0..3 {
        out[c] = (lo.1[c] + t * (hi.1[c] - lo.1[c])).round() as u8;
    }
    out
}

const CELL: usize = 40;
const MARGIN: usize = 60;

pub fn render_svg(values: &[Vec<Option<f64>>], title: &str) -> String {
    let rows = values.len();
    let cols = values.first().map_or(0, Vec::len);
    let width = MARGIN + cols * CELL + 20;
    let height = MARGIN + rows * CELL + 40;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" font-family=\"sans-serif\" font-size=\"11\">\n"
    );
    let _ = writeln!(s, "<text x=\"{MARGIN}\" y=\"20\" font-size=\"14\">{}</text>", escape(title));
    for c in 0..cols {
        let x = MARGIN + c * CELL + CELL / 2;
        let _ = writeln!(s, "<text x=\"{x}\" y=\"{}\" text-anchor=\"middle\">{}</text>", MARGIN - 8, c + 2);
    }
    for (r, row) in values.iter().enumerate() {
        let y = MARGIN + r * CELL;
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
            MARGIN - 8,
            y + CELL / 2 + 4,
            r + 1
        );
        for (c, v) in row.iter().enumerate() {
            let x = MARGIN + c * CELL;
            match v {
                Some(auc) => {
                    let [red, green, blue] = ramp_color(*auc);
                    let _ = writeln!(
                        s,
                        "<rect class=\"cell\" x=\"{x}\" y=\"{y}\" width=\"{CELL}\" height=\"{CELL}\" fill=\"rgb({red},{green},{blue})\" data-lag=\"{}\" data-week=\"{}\" data-auc=\"{auc:.4}\"/>",
                        r + 1,
                        c + 2
                    );
                }
                None => {
                    let _ = writeln!(
                        s,
                        "<rect class=\"blank\" x=\"{x}\" y=\"{y}\" width=\"{CELL}\" height=\"{CELL}\" fill=\"#ffffff\" stroke=\"#dddddd\"/>"
                    );
                }
            }
        }
    }
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">predicted week</text>",
        MARGIN + cols * CELL / 2,
        MARGIN + rows * CELL + 25
    );
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render_heatmap(grid: &EvaluationGrid, metric: Metric) -> HeatmapFiles {
    let values = value_matrix(grid, metric);
    HeatmapFiles {
        matrix_tsv: matrix_tsv(&values),
        svg: render_svg(&values, &format!("{} {}", grid.cohort, metric.file_stem())),
    }
}
