//! Detections in, raw and filtered ambulatograms out.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ambulatogram::{self, Ambulatogram, AmbulatogramError};
use crate::filter::{self, BridgeConfig, FilterConfig, FilterError, FilterVerdict};
use crate::ingestion::{self, Detection, IngestError, SegmentConfig};
use crate::track::TrackSequence;
use crate::transform::TransformTree;
use crate::zones::ZoneMap;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Ambulatogram(#[from] AmbulatogramError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub filter: FilterConfig,
    /// seconds
    pub gap_threshold: f64,
    /// seconds
    pub bin_width: f64,
    /// Join kept sequences across short undetected stretches.
    pub bridge: Option<BridgeConfig>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self { filter: FilterConfig::default(), gap_threshold: 2.0, bin_width: 5.0, bridge: None }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PipelineCounts {
    pub detections: usize,
    pub projection_dropped: usize,
    pub sequences: usize,
    pub kept: usize,
    pub removed_static: usize,
    pub removed_acceleration: usize,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub sequences: Vec<TrackSequence>,
    pub verdicts: Vec<FilterVerdict>,
    /// Sequences feeding the filtered ambulatogram.
    pub kept: Vec<TrackSequence>,
    pub raw: Ambulatogram,
    pub filtered: Ambulatogram,
    pub counts: PipelineCounts,
}

/// Projects, segments and filters a stamp-ordered detection stream, then
/// bins both the unfiltered and the filtered sequences over `span`.
pub fn run(
    detections: &[Detection],
    tree: &TransformTree<f64>,
    map: &ZoneMap,
    span: (f64, f64),
    cfg: &PipelineConfig,
) -> Result<PipelineOutput, PipelineError> {
    cfg.filter.validate()?;
    let (samples, projection_dropped) = ingestion::project_all(detections, tree);
    let seg = SegmentConfig { gap_threshold: cfg.gap_threshold, ..SegmentConfig::default() };
    let mut sequences = ingestion::segment(&samples, &seg)?;
    if cfg.filter.split_on_spike {
        sequences = sequences.iter().flat_map(|s| filter::split_at_spikes(s, cfg.filter.accel_threshold)).collect();
    }
    let verdicts = filter::apply_filter(&sequences, &cfg.filter);
    let kept = match &cfg.bridge {
        Some(b) => filter::bridge_gaps(&sequences, &verdicts, map, b),
        None => filter::kept_sequences(&sequences, &verdicts),
    };
    let raw = ambulatogram::build(&sequences, map, cfg.bin_width, span)?;
    let filtered = ambulatogram::build(&kept, map, cfg.bin_width, span)?;
    let counts = PipelineCounts {
        detections: detections.len(),
        projection_dropped,
        sequences: sequences.len(),
        kept: verdicts.iter().filter(|v| v.kept()).count(),
        removed_static: verdicts.iter().filter(|v| v.reason == filter::Reason::StaticPerimeter).count(),
        removed_acceleration: verdicts.iter().filter(|v| v.reason == filter::Reason::HighAcceleration).count(),
    };
    Ok(PipelineOutput { sequences, verdicts, kept, raw, filtered, counts })
}
