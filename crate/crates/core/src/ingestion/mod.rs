//! Detection streams: topics, file replay, projection into the apartment
//! frame and cutting into gap-free sequences.

pub mod jsonl;
mod topic;

use std::collections::BTreeMap;
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

pub use topic::{Message, PublishError, Subscription, Topic, TopicBus, TopicConfig, TopicStats};

use crate::geometry::Vec3;
use crate::track::{PersonKey, Sample, TrackSample, TrackSequence};
use crate::transform::{transform_point, TransformError, TransformTree, APARTMENT_FRAME};

/// Conventional topic name for raw detections.
pub const DETECTIONS_TOPIC: &str = "detections";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("{key}: stamp {stamp} is more than {window}s behind {latest}")]
    OutOfOrder { key: PersonKey, stamp: f64, latest: f64, window: f64 },
    #[error("{key}: two samples at stamp {stamp}")]
    DuplicateStamp { key: PersonKey, stamp: f64 },
    #[error("stream not sorted by stamp at index {0}")]
    Unsorted(usize),
    #[error("invalid replay speed {0}")]
    Speed(f64),
}

/// A center of mass reported by one sensor, in that sensor's frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub sensor: String,
    pub local_id: u32,
    pub stamp: f64,
    pub position: Vec3<f64>,
}

impl Detection {
    pub fn person_key(&self) -> PersonKey {
        PersonKey::new(self.sensor.clone(), self.local_id)
    }
}

impl Message for Detection {
    fn stamp(&self) -> f64 {
        self.stamp
    }

    fn capacity_slot(&self) -> Option<(&str, u32)> {
        Some((&self.sensor, self.local_id))
    }
}

/// Position in the apartment frame via the sensor's pose at the detection
/// stamp.
pub fn project(det: &Detection, tree: &TransformTree<f64>) -> Result<TrackSample, TransformError> {
    let pose = tree.lookup(APARTMENT_FRAME, &det.sensor, det.stamp)?;
    Ok(TrackSample { person_key: det.person_key(), stamp: det.stamp, position: transform_point(&pose, det.position) })
}

/// Projects a whole stream. Failed lookups drop the detection; the count of
/// dropped detections is returned alongside.
pub fn project_all(dets: &[Detection], tree: &TransformTree<f64>) -> (Vec<TrackSample>, usize) {
    let mut out = Vec::with_capacity(dets.len());
    let mut dropped = 0;
    for d in dets {
        match project(d, tree) {
            Ok(s) => out.push(s),
            Err(_) => dropped += 1,
        }
    }
    (out, dropped)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentConfig {
    /// seconds
    pub gap_threshold: f64,
    /// Samples of one key may arrive this far out of order.
    pub reorder_window: f64,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        Self { gap_threshold: 2.0, reorder_window: 0.2 }
    }
}

/// Splits samples into per-key runs whose inner gaps are at most
/// `gap_threshold`. Output is ordered by start stamp, then key.
pub fn segment(samples: &[TrackSample], cfg: &SegmentConfig) -> Result<Vec<TrackSequence>, IngestError> {
    let mut by_key: BTreeMap<&PersonKey, (f64, Vec<Sample>)> = BTreeMap::new();
    for s in samples {
        let (latest, list) = by_key.entry(&s.person_key).or_insert((f64::NEG_INFINITY, Vec::new()));
        if s.stamp < *latest - cfg.reorder_window {
            return Err(IngestError::OutOfOrder {
                key: s.person_key.clone(),
                stamp: s.stamp,
                latest: *latest,
                window: cfg.reorder_window,
            });
        }
        *latest = latest.max(s.stamp);
        list.push(Sample { stamp: s.stamp, position: s.position });
    }

    let mut out = Vec::new();
    for (key, (_, mut list)) in by_key {
        list.sort_by(|a, b| a.stamp.total_cmp(&b.stamp));
        if let Some(w) = list.windows(2).find(|w| w[0].stamp == w[1].stamp) {
            return Err(IngestError::DuplicateStamp { key: key.clone(), stamp: w[0].stamp });
        }
        let mut run: Vec<Sample> = Vec::new();
        for s in list {
            if run.last().is_some_and(|l| s.stamp - l.stamp > cfg.gap_threshold) {
                out.push(TrackSequence::new(key.clone(), std::mem::take(&mut run)));
            }
            run.push(s);
        }
        if !run.is_empty() {
            out.push(TrackSequence::new(key.clone(), run));
        }
    }
    out.sort_by(|a, b| a.t_start().total_cmp(&b.t_start()).then_with(|| a.person_key.cmp(&b.person_key)));
    Ok(out)
}

/// Publishes a stamp-sorted stream onto a topic. With `speed` set, each
/// detection waits until wall-clock time since start, multiplied by
/// `speed`, reaches its stamp (measured from the first stamp). `None` sends
/// as fast as possible. Rejected publishes are counted by the topic and
/// otherwise ignored. The topic is flushed at the end, not closed.
pub fn replay(stream: &[Detection], topic: &Topic<Detection>, speed: Option<f64>) -> Result<(), IngestError> {
    if let Some(i) = stream.windows(2).position(|w| w[1].stamp < w[0].stamp) {
        return Err(IngestError::Unsorted(i + 1));
    }
    if let Some(s) = speed {
        if !(s > 0.0) {
            return Err(IngestError::Speed(s));
        }
    }
    let speed = speed.filter(|s| s.is_finite());
    let start = Instant::now();
    let t0 = stream.first().map_or(0.0, |d| d.stamp);
    for d in stream {
        if let Some(s) = speed {
            let due = Duration::from_secs_f64((d.stamp - t0) / s);
            let elapsed = start.elapsed();
            if due > elapsed {
                thread::sleep(due - elapsed);
            }
        }
        let _ = topic.publish(d.clone());
    }
    topic.flush();
    Ok(())
}
