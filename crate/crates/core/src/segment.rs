//! Phase segmentation of the coarse observable and manifold labelling.

use rayon::prelude::*;

use crate::dataset::Configuration;
use crate::error::{Error, Result};
use crate::manifold::{isomap_configurations, EmbeddingReport, IsomapParams};

pub const DEFAULT_MIN_LEN: usize = 10;
pub const DEFAULT_MERGE_TOLERANCE: f64 = 0.1;

const MAX_TWO_MEANS_ITERATIONS: usize = 100;

/// Contiguous run of steps, 1-based and inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    pub mean_x: f64,
    /// Manifold label, numbered from 1. Zero until labelled.
    pub label: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }

    /// Zero-based indices into the observable series (and into the frames,
    /// since step `t` starts at frame `t`).
    pub fn range(&self) -> std::ops::Range<usize> {
        self.start - 1..self.end
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSegmentation {
    pub segments: Vec<Segment>,
    pub min_len: usize,
    pub merge_tolerance: f64,
}

impl PhaseSegmentation {
    pub fn label_count(&self) -> usize {
        self.segments.iter().map(|s| s.label).max().unwrap_or(0)
    }

    pub fn labels(&self) -> Vec<usize> {
        self.segments.iter().map(|s| s.label).collect()
    }

    /// Interior boundaries: the first step of every segment after the first.
    pub fn boundaries(&self) -> Vec<usize> {
        self.segments.iter().skip(1).map(|s| s.start).collect()
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Threshold separating the two classes of a 1-D two-means clustering,
/// or `None` for a constant series.
pub fn two_means_threshold(values: &[f64]) -> Option<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return None;
    }
    let (mut c0, mut c1) = (lo, hi);
    let mut threshold = 0.5 * (c0 + c1);
    for _ in 0..MAX_TWO_MEANS_ITERATIONS {
        let (mut s0, mut n0, mut s1, mut n1) = (0.0, 0usize, 0.0, 0usize);
        for &v in values {
            if v > threshold {
                s1 += v;
                n1 += 1;
            } else {
                s0 += v;
                n0 += 1;
            }
        }
        // both classes stay populated: lo is always <= threshold < hi
        c0 = s0 / n0 as f64;
        c1 = s1 / n1 as f64;
        let next = 0.5 * (c0 + c1);
        if next == threshold {
            break;
        }
        threshold = next;
    }
    Some(threshold)
}

#[derive(Debug, Clone, Copy)]
struct Run {
    start: usize,
    end: usize,
    class: bool,
}

/// Splits the series into contiguous phases. Segments are unlabelled.
pub fn segment_series(x: &[f64], min_len: usize) -> Result<Vec<Segment>> {
    if min_len == 0 {
        return Err(Error::config("min_len", "must be a positive integer"));
    }
    if x.len() < 2 * min_len {
        return Err(Error::Segment(format!(
            "series of length {} is shorter than 2 * min_len = {}",
            x.len(),
            2 * min_len
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Segment("series contains non-finite values".into()));
    }
    let mut runs: Vec<Run> = Vec::new();
    match two_means_threshold(x) {
        None => runs.push(Run {
            start: 0,
            end: x.len() - 1,
            class: false,
        }),
        Some(threshold) => {
            for (i, &v) in x.iter().enumerate() {
                let class = v > threshold;
                match runs.last_mut() {
                    Some(r) if r.class == class => r.end = i,
                    _ => runs.push(Run {
                        start: i,
                        end: i,
                        class,
                    }),
                }
            }
        }
    }

    let run_mean = |r: &Run| mean(&x[r.start..=r.end]);
    loop {
        // coalesce neighbours of equal class
        let mut merged: Vec<Run> = Vec::with_capacity(runs.len());
        for r in runs {
            match merged.last_mut() {
                Some(last) if last.class == r.class => last.end = r.end,
                _ => merged.push(r),
            }
        }
        runs = merged;
        if runs.len() == 1 {
            break;
        }
        let short = runs
            .iter()
            .enumerate()
            .filter(|(_, r)| r.end + 1 - r.start < min_len)
            .min_by_key(|(i, r)| (r.end + 1 - r.start, *i))
            .map(|(i, _)| i);
        let Some(i) = short else { break };
        let m = run_mean(&runs[i]);
        let into_left = match (i.checked_sub(1), runs.get(i + 1)) {
            (Some(l), Some(right)) => (run_mean(&runs[l]) - m).abs() <= (run_mean(right) - m).abs(),
            (Some(_), None) => true,
            _ => false,
        };
        let target = if into_left { i - 1 } else { i + 1 };
        runs[i].class = runs[target].class;
    }

    Ok(runs
        .iter()
        .map(|r| Segment {
            start: r.start + 1,
            end: r.end + 1,
            mean_x: run_mean(r),
            label: 0,
        })
        .collect())
}

/// Greedy labelling: each segment joins the first existing label whose
/// members all lie within `tolerance` of its mean, else opens a new one.
pub fn label_manifolds(segments: &[Segment], tolerance: f64) -> Result<Vec<Segment>> {
    if !(tolerance >= 0.0) {
        return Err(Error::config("merge_tol", format!("must be non-negative, got {tolerance}")));
    }
    let mut groups: Vec<Vec<f64>> = Vec::new();
    let mut out = segments.to_vec();
    for seg in &mut out {
        let found = groups
            .iter()
            .position(|g| g.iter().all(|&m| (m - seg.mean_x).abs() <= tolerance));
        let label = match found {
            Some(g) => {
                groups[g].push(seg.mean_x);
                g
            }
            None => {
                groups.push(vec![seg.mean_x]);
                groups.len() - 1
            }
        };
        seg.label = label + 1;
    }
    Ok(out)
}

/// Segments and labels an observable series in one go.
pub fn segment_and_label(x: &[f64], min_len: usize, merge_tolerance: f64) -> Result<PhaseSegmentation> {
    let segments = label_manifolds(&segment_series(x, min_len)?, merge_tolerance)?;
    Ok(PhaseSegmentation {
        segments,
        min_len,
        merge_tolerance,
    })
}

#[derive(Debug, Clone)]
pub struct SegmentReports {
    /// One entry per segment; `None` when the segment was too short.
    pub segments: Vec<Option<EmbeddingReport>>,
    /// Report over every step of the series.
    pub full: EmbeddingReport,
}

/// Runs Isomap on the configurations of each segment and of the whole
/// series. `frames[k]` is the source configuration of step `k + 1`; frames
/// past the last segment are ignored.
pub fn per_segment_isomap(
    frames: &[Configuration],
    segmentation: &PhaseSegmentation,
    params: &IsomapParams,
) -> Result<SegmentReports> {
    let steps = segmentation.segments.last().map_or(0, |s| s.end);
    if frames.len() < steps {
        return Err(Error::Segment(format!(
            "segmentation covers {steps} steps but only {} frames were given",
            frames.len()
        )));
    }
    let segments = segmentation
        .segments
        .par_iter()
        .map(|seg| {
            if seg.len() < 3 {
                log::warn!(
                    "segment [{}, {}] has fewer than 3 configurations; skipping isomap",
                    seg.start,
                    seg.end
                );
                return Ok(None);
            }
            isomap_configurations(&frames[seg.range()], params).map(Some)
        })
        .collect::<Result<Vec<_>>>()?;
    let full = isomap_configurations(&frames[..steps], params)?;
    Ok(SegmentReports { segments, full })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bounds(segs: &[Segment]) -> Vec<(usize, usize)> {
        segs.iter().map(|s| (s.start, s.end)).collect()
    }

    #[test]
    fn constant_series_is_one_segment() {
        let segs = segment_series(&[0.4; 30], 10).unwrap();
        assert_eq!(bounds(&segs), vec![(1, 30)]);
    }

    #[test]
    fn step_series_splits_in_three() {
        let x: Vec<f64> = (0..150).map(|i| if (50..100).contains(&i) { 1.0 } else { 0.0 }).collect();
        let segs = segment_series(&x, 10).unwrap();
        assert_eq!(bounds(&segs), vec![(1, 50), (51, 100), (101, 150)]);
        let labelled = label_manifolds(&segs, 0.1).unwrap();
        assert_eq!(labelled.iter().map(|s| s.label).collect::<Vec<_>>(), vec![1, 2, 1]);
    }

    #[test]
    fn short_spike_is_absorbed() {
        let mut x = vec![0.2; 40];
        x[20..23].fill(0.9);
        let segs = segment_series(&x, 10).unwrap();
        assert_eq!(bounds(&segs), vec![(1, 40)]);
    }

    #[test]
    fn short_series_rejected() {
        assert!(segment_series(&[0.0; 15], 10).is_err());
        assert!(segment_series(&[0.0; 15], 0).is_err());
    }

    #[test]
    fn labels_by_first_appearance() {
        let seg = |mean_x| Segment {
            start: 1,
            end: 1,
            mean_x,
            label: 0,
        };
        let labels = |segs: Vec<Segment>| segs.iter().map(|s| s.label).collect::<Vec<_>>();
        let segs = vec![seg(0.3), seg(0.8), seg(0.3)];
        assert_eq!(labels(label_manifolds(&segs, 0.1).unwrap()), vec![1, 2, 1]);
        assert_eq!(labels(label_manifolds(&segs, 1.0).unwrap()), vec![1, 1, 1]);
        let distinct = vec![seg(0.1), seg(0.2), seg(0.3)];
        assert_eq!(labels(label_manifolds(&distinct, 0.0).unwrap()), vec![1, 2, 3]);
    }

    #[test]
    fn shift_invariant_boundaries() {
        let x: Vec<f64> = (0..90)
            .map(|i| if (30..60).contains(&i) { 0.7 } else { 0.3 } + 0.01 * ((i * 7 % 5) as f64))
            .collect();
        let shifted: Vec<f64> = x.iter().map(|v| v + 0.25).collect();
        assert_eq!(
            bounds(&segment_series(&x, 10).unwrap()),
            bounds(&segment_series(&shifted, 10).unwrap())
        );
    }
}
