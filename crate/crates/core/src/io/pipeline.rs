//! End-to-end orchestration: simulate or load, correspond, observe,
//! segment, and run Isomap per phase.

use std::fmt::Write as _;
use std::path::PathBuf;

use super::config::{PipelineConfig, Source, Track};
use super::csv::{
    embedding_csv, load_trajectory_csv, observables_csv, residual_csv, save_trajectory_csv,
    segments_csv, write_text,
};
use super::pgm::save_distance_image;
use crate::dataset::{Configuration, TrajectoryDataset};
use crate::error::{Error, Result};
use crate::mapping::{track, Metric, Tracking};
use crate::observables::{distance_matrix, observe, DistanceMatrix, ObservableSeries};
use crate::segment::{per_segment_isomap, segment_and_label, PhaseSegmentation, SegmentReports};
use crate::sim::simulate;

/// Everything the analysis produced, plus the files it wrote.
#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub dataset: TrajectoryDataset,
    pub tracking: Tracking,
    pub observables: ObservableSeries,
    pub delta: DistanceMatrix,
    pub segmentation: PhaseSegmentation,
    pub reports: Option<SegmentReports>,
    pub summary: String,
    pub artifacts: Vec<PathBuf>,
}

/// Produces the dataset named by the config, simulating if needed.
pub fn acquire_dataset(config: &PipelineConfig) -> Result<TrajectoryDataset> {
    match &config.source {
        Some(Source::Input(path)) => load_trajectory_csv(path),
        Some(Source::Scenario(sc)) => {
            let mut scenario = sc.clone();
            scenario.set_seed(config.seed);
            let run = simulate(&scenario.build()?)?;
            Ok(match config.track {
                Track::Unwrapped => run.unwrapped,
                Track::Wrapped => run.wrapped,
            })
        }
        None => Err(Error::config("scenario", "one of `scenario` or `input` is required")),
    }
}

/// Wrapped data is matched with minimum-image displacements.
pub fn metric_for(dataset: &TrajectoryDataset) -> Metric {
    match dataset.boundary() {
        Some(b) if dataset.is_wrapped() => Metric::MinImage(b),
        _ => Metric::Euclidean,
    }
}

/// Analysis stages without Isomap or file output.
pub fn analyze_dataset(
    dataset: &TrajectoryDataset,
    config: &PipelineConfig,
) -> Result<(Tracking, ObservableSeries, DistanceMatrix, PhaseSegmentation)> {
    dataset.require_frames(2)?;
    let tracking = track(dataset, metric_for(dataset))?;
    let observables = observe(dataset, &tracking, &config.observables)?;
    let delta = distance_matrix(&observables.x)?;
    let segmentation = segment_and_label(&observables.x, config.min_len, config.merge_tolerance)?;
    Ok((tracking, observables, delta, segmentation))
}

/// Frames handed to Isomap: identity-ordered unless disabled.
pub fn isomap_frames(dataset: &TrajectoryDataset, tracking: &Tracking, canonical: bool) -> Vec<Configuration> {
    if canonical {
        tracking.canonical_frames(dataset)
    } else {
        dataset.frames().to_vec()
    }
}

fn summary_text(
    config: &PipelineConfig,
    dataset: &TrajectoryDataset,
    observables: &ObservableSeries,
    segmentation: &PhaseSegmentation,
    reports: Option<&SegmentReports>,
) -> String {
    let mut s = String::new();
    match &config.source {
        Some(Source::Scenario(sc)) => {
            let _ = writeln!(s, "scenario: {}", sc.name());
            let _ = writeln!(s, "seed: {}", config.seed);
        }
        Some(Source::Input(p)) => {
            let _ = writeln!(s, "input: {}", p.display());
        }
        None => {}
    }
    let _ = writeln!(s, "agents: {}", dataset.agent_count());
    let _ = writeln!(s, "frames: {}", dataset.frame_count());
    let w = config.observables.weights;
    let _ = writeln!(s, "weights: xi1 = {}, xi2 = {}", w.speed, w.polarization);
    let _ = writeln!(
        s,
        "epsilon: {} ({})",
        observables.epsilon,
        config.observables.epsilon_mode.as_str()
    );
    let _ = writeln!(
        s,
        "segments: {} (labels: {})",
        segmentation.segments.len(),
        segmentation.label_count()
    );
    for (j, seg) in segmentation.segments.iter().enumerate() {
        let _ = write!(
            s,
            "  segment {}: steps {}-{}, mean X {:.6}, label {}",
            j + 1,
            seg.start,
            seg.end,
            seg.mean_x,
            seg.label
        );
        match reports.and_then(|r| r.segments[j].as_ref()) {
            Some(rep) => {
                let _ = writeln!(s, ", d* {} (k {})", rep.dimension, rep.k);
            }
            None if reports.is_some() => {
                let _ = writeln!(s, ", d* skipped");
            }
            None => s.push('\n'),
        }
    }
    if let Some(r) = reports {
        let _ = writeln!(s, "full dataset: d* {} (k {})", r.full.dimension, r.full.k);
    }
    s
}

/// Runs every stage and writes the artifact set into `config.out_dir`.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineOutcome> {
    config.validate()?;
    let dataset = acquire_dataset(config)?;
    let (tracking, observables, delta, segmentation) = analyze_dataset(&dataset, config)?;
    let frames = isomap_frames(&dataset, &tracking, config.canonical_order);
    let reports = per_segment_isomap(&frames, &segmentation, &config.isomap)?;

    let out = &config.out_dir;
    let mut artifacts = Vec::new();
    let mut emit = |name: &str, text: &str| -> Result<()> {
        let path = out.join(name);
        write_text(&path, text)?;
        artifacts.push(path);
        Ok(())
    };

    let extra: Vec<(&str, String)> = match config.scenario() {
        Some(sc) => vec![("scenario", sc.name().to_string()), ("seed", config.seed.to_string())],
        None => Vec::new(),
    };
    let trajectory = out.join("trajectory.csv");
    save_trajectory_csv(&dataset, &trajectory, &extra)?;
    emit("observables.csv", &observables_csv(&observables))?;
    for (j, rep) in reports.segments.iter().enumerate() {
        if let Some(rep) = rep {
            emit(&format!("residual_segment_{}.csv", j + 1), &residual_csv(rep))?;
        }
    }
    emit("residual_full.csv", &residual_csv(&reports.full))?;
    emit(
        "embedding_full.csv",
        &embedding_csv(&reports.full.coordinates(reports.full.dimension)),
    )?;
    let dims: Vec<Option<usize>> = reports
        .segments
        .iter()
        .map(|r| r.as_ref().map(|r| r.dimension))
        .collect();
    emit("segments.csv", &segments_csv(&segmentation, &dims))?;
    let summary = summary_text(config, &dataset, &observables, &segmentation, Some(&reports));
    emit("summary.txt", &summary)?;
    let image = out.join("delta.pgm");
    save_distance_image(&delta, &image)?;
    artifacts.insert(0, trajectory);
    artifacts.push(image);

    Ok(PipelineOutcome {
        dataset,
        tracking,
        observables,
        delta,
        segmentation,
        reports: Some(reports),
        summary,
        artifacts,
    })
}

/// Correspondence, observables, Δ and segmentation only (no Isomap).
pub fn run_analysis(config: &PipelineConfig) -> Result<PipelineOutcome> {
    config.validate()?;
    let dataset = acquire_dataset(config)?;
    let (tracking, observables, delta, segmentation) = analyze_dataset(&dataset, config)?;
    let out = &config.out_dir;
    let observables_path = out.join("observables.csv");
    write_text(&observables_path, &observables_csv(&observables))?;
    let segments_path = out.join("segments.csv");
    write_text(&segments_path, &segments_csv(&segmentation, &[]))?;
    let image = out.join("delta.pgm");
    save_distance_image(&delta, &image)?;
    let summary = summary_text(config, &dataset, &observables, &segmentation, None);
    let summary_path = out.join("summary.txt");
    write_text(&summary_path, &summary)?;
    Ok(PipelineOutcome {
        dataset,
        tracking,
        observables,
        delta,
        segmentation,
        reports: None,
        summary,
        artifacts: vec![observables_path, segments_path, image, summary_path],
    })
}
