//! Plain-text CSV persistence for trajectories and analysis tables.
//!
//! Floats are written in scientific notation with 17 significant digits so
//! that a save/load round trip reproduces every position bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::dataset::{Configuration, TrajectoryDataset};
use crate::error::{Error, Result};
use crate::geom::{Boundary, Vec2};
use crate::manifold::{DenseMatrix, EmbeddingReport};
use crate::observables::ObservableSeries;
use crate::segment::PhaseSegmentation;

/// Lossless float formatting.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Renders a trajectory as `t,id,x,y` rows preceded by `# key = value`
/// metadata lines (boundary, track kind, plus any caller extras).
pub fn trajectory_csv(dataset: &TrajectoryDataset, extra: &[(&str, String)]) -> String {
    let mut out = String::new();
    if let Some(b) = dataset.boundary() {
        let _ = writeln!(out, "# half_width = {}", fmt_f64(b.half_width));
        let _ = writeln!(out, "# half_height = {}", fmt_f64(b.half_height));
    }
    let _ = writeln!(out, "# wrapped = {}", dataset.is_wrapped());
    for (k, v) in extra {
        let _ = writeln!(out, "# {k} = {v}");
    }
    out.push_str("t,id,x,y\n");
    for (t, frame) in dataset.frames().iter().enumerate() {
        for (i, p) in frame.positions().iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{}", t + 1, i + 1, fmt_f64(p.x), fmt_f64(p.y));
        }
    }
    out
}

pub fn save_trajectory_csv(dataset: &TrajectoryDataset, path: &Path, extra: &[(&str, String)]) -> Result<()> {
    write_text(path, &trajectory_csv(dataset, extra))
}

pub fn load_trajectory_csv(path: &Path) -> Result<TrajectoryDataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trajectory_csv(&text, path)
}

/// Parses `t,x,y` or `t,id,x,y` rows. Frames must appear in order with
/// contiguous `t` starting at 1. With an id column, agents are ordered by id
/// within each frame; otherwise row order is kept.
pub fn parse_trajectory_csv(text: &str, origin: &Path) -> Result<TrajectoryDataset> {
    let parse_err = |line: usize, reason: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        reason,
    };
    let (mut half_width, mut half_height, mut wrapped) = (None, None, false);
    let mut columns: Option<usize> = None;
    // (t, rows of (id, position))
    let mut frames: Vec<(usize, Vec<(f64, Vec2)>)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once('=') {
                let v = v.trim();
                let num = || {
                    v.parse::<f64>()
                        .map_err(|_| parse_err(line_no, format!("bad metadata value `{v}`")))
                };
                match k.trim() {
                    "half_width" => half_width = Some(num()?),
                    "half_height" => half_height = Some(num()?),
                    "wrapped" => wrapped = v == "true",
                    _ => {}
                }
            }
            continue;
        }
        if line.starts_with('t') {
            continue; // header
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 && fields.len() != 4 {
            return Err(parse_err(line_no, format!("expected 3 or 4 fields, found {}", fields.len())));
        }
        match columns {
            None => columns = Some(fields.len()),
            Some(c) if c != fields.len() => {
                return Err(parse_err(line_no, format!("expected {c} fields, found {}", fields.len())))
            }
            _ => {}
        }
        let number = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| parse_err(line_no, format!("non-numeric field `{s}`")))
        };
        let t: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad time index `{}`", fields[0])))?;
        let (id, x, y) = if fields.len() == 4 {
            (number(fields[1])?, number(fields[2])?, number(fields[3])?)
        } else {
            (0.0, number(fields[1])?, number(fields[2])?)
        };
        if !(x.is_finite() && y.is_finite()) {
            return Err(parse_err(line_no, "non-finite position".into()));
        }
        match frames.last_mut() {
            Some((last, rows)) if *last == t => rows.push((id, Vec2::new(x, y))),
            prev => {
                let expected = prev.map_or(1, |(last, _)| *last + 1);
                if t != expected {
                    return Err(parse_err(line_no, format!("time index {t} out of order, expected {expected}")));
                }
                frames.push((t, vec![(id, Vec2::new(x, y))]));
            }
        }
    }

    let boundary = match (half_width, half_height) {
        (Some(w), Some(h)) if w > 0.0 && h > 0.0 => Some(Boundary::new(w, h)),
        _ => None,
    };
    let configs = frames
        .into_iter()
        .map(|(_, mut rows)| {
            if columns == Some(4) {
                rows.sort_by(|a, b| a.0.total_cmp(&b.0));
            }
            Configuration::new(rows.into_iter().map(|(_, p)| p).collect())
        })
        .collect();
    TrajectoryDataset::new(configs, boundary, wrapped && boundary.is_some())
}

pub fn observables_csv(series: &ObservableSeries) -> String {
    let mut out = String::from("t,speed,P,C,X\n");
    for k in 0..series.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            k + 1,
            fmt_f64(series.speed[k]),
            fmt_f64(series.polarization[k]),
            series.components[k],
            fmt_f64(series.x[k])
        );
    }
    out
}

/// Segment table. `dimensions[j]` is the d* of segment `j`, if computed.
pub fn segments_csv(segmentation: &PhaseSegmentation, dimensions: &[Option<usize>]) -> String {
    let mut out = String::from("start,end,mean_x,label,d_star\n");
    for (j, s) in segmentation.segments.iter().enumerate() {
        let d = dimensions
            .get(j)
            .copied()
            .flatten()
            .map_or_else(String::new, |d| d.to_string());
        let _ = writeln!(out, "{},{},{},{},{}", s.start, s.end, fmt_f64(s.mean_x), s.label, d);
    }
    out
}

pub fn residual_csv(report: &EmbeddingReport) -> String {
    let mut out = String::from("d,r\n");
    for (d, r) in report.residuals.iter().enumerate() {
        let _ = writeln!(out, "{},{}", d + 1, fmt_f64(*r));
    }
    out
}

/// Embedding coordinates, one point per row: `point,x1,...,xd`.
pub fn embedding_csv(coords: &DenseMatrix) -> String {
    let mut out = String::from("point");
    for c in 0..coords.cols() {
        let _ = write!(out, ",x{}", c + 1);
    }
    out.push('\n');
    for i in 0..coords.rows() {
        let _ = write!(out, "{}", i + 1);
        for v in coords.row(i) {
            let _ = write!(out, ",{}", fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}
