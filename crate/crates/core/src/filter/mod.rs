//! Removal of false detections: static non-human tracks (small hull
//! perimeter) and mixed-up tracks (implausible center-of-mass acceleration).
//! Whole sequences are removed, never individual samples.

mod accel;
mod hull;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use accel::{accelerations, max_acceleration, max_acceleration_of};
pub use hull::{convex_hull, hull_perimeter, ring_length, HullError};

use crate::format::sig6;
use crate::track::{PersonKey, Sample, TrackSequence};
use crate::zones::ZoneMap;

#[derive(Debug, Error, PartialEq)]
pub enum FilterError {
    #[error("perimeter threshold must be > 0, got {0}")]
    PerimeterThreshold(f64),
    #[error("acceleration threshold must be > 0, got {0}")]
    AccelThreshold(f64),
}

/// Which criterion is checked first. Only affects the reported reason for
/// sequences failing both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriteriaOrder {
    #[default]
    PerimeterFirst,
    AccelerationFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    /// meters
    pub perimeter_threshold: f64,
    /// m/s²
    pub accel_threshold: f64,
    pub order: CriteriaOrder,
    /// Cut sequences at acceleration spikes before filtering instead of
    /// dropping the whole sequence.
    pub split_on_spike: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self { perimeter_threshold: 1.0, accel_threshold: 50.0, order: CriteriaOrder::PerimeterFirst, split_on_spike: false }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<(), FilterError> {
        if !(self.perimeter_threshold > 0.0) {
            return Err(FilterError::PerimeterThreshold(self.perimeter_threshold));
        }
        if !(self.accel_threshold > 0.0) {
            return Err(FilterError::AccelThreshold(self.accel_threshold));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Reason {
    None,
    StaticPerimeter,
    HighAcceleration,
}

impl Reason {
    pub fn as_str(&self) -> &'static str {
        match self {
            Reason::None => "none",
            Reason::StaticPerimeter => "static-perimeter",
            Reason::HighAcceleration => "high-acceleration",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterVerdict {
    /// Position of the sequence in the filtered input.
    pub index: usize,
    pub person_key: PersonKey,
    pub t_start: f64,
    pub t_end: f64,
    pub reason: Reason,
    pub hull_perimeter: f64,
    pub max_accel: f64,
}

impl FilterVerdict {
    pub fn kept(&self) -> bool {
        self.reason == Reason::None
    }
}

pub fn judge(index: usize, seq: &TrackSequence, cfg: &FilterConfig) -> FilterVerdict {
    let perimeter = hull_perimeter(&seq.floor_points()).unwrap_or(0.0);
    let accel = max_acceleration(seq);
    let is_static = perimeter < cfg.perimeter_threshold;
    let is_jumpy = accel > cfg.accel_threshold;
    let reason = match cfg.order {
        CriteriaOrder::PerimeterFirst if is_static => Reason::StaticPerimeter,
        CriteriaOrder::PerimeterFirst if is_jumpy => Reason::HighAcceleration,
        CriteriaOrder::AccelerationFirst if is_jumpy => Reason::HighAcceleration,
        CriteriaOrder::AccelerationFirst if is_static => Reason::StaticPerimeter,
        _ => Reason::None,
    };
    FilterVerdict {
        index,
        person_key: seq.person_key.clone(),
        t_start: seq.t_start(),
        t_end: seq.t_end(),
        reason,
        hull_perimeter: perimeter,
        max_accel: accel,
    }
}

/// One verdict per input sequence, in input order.
pub fn apply_filter(seqs: &[TrackSequence], cfg: &FilterConfig) -> Vec<FilterVerdict> {
    seqs.iter().enumerate().map(|(i, s)| judge(i, s, cfg)).collect()
}

pub fn kept_sequences(seqs: &[TrackSequence], verdicts: &[FilterVerdict]) -> Vec<TrackSequence> {
    verdicts.iter().filter(|v| v.kept()).map(|v| seqs[v.index].clone()).collect()
}

/// Cuts a sequence between the two samples around every acceleration spike
/// above `threshold`. The cut goes through the faster of the two steps
/// adjacent to the spike.
pub fn split_at_spikes(seq: &TrackSequence, threshold: f64) -> Vec<TrackSequence> {
    let stamps: Vec<f64> = seq.samples.iter().map(|s| s.stamp).collect();
    let positions: Vec<_> = seq.samples.iter().map(|s| s.position).collect();
    let acc = accelerations(&stamps, &positions);
    let speed = |j: usize| positions[j + 1].distance(&positions[j]) / (stamps[j + 1] - stamps[j]);
    let mut cuts: Vec<usize> = acc
        .iter()
        .enumerate()
        .filter(|(_, a)| **a > threshold)
        .map(|(k, _)| {
            let i = k + 1;
            if speed(i - 1) >= speed(i) { i } else { i + 1 }
        })
        .collect();
    cuts.sort_unstable();
    cuts.dedup();
    let mut out = Vec::with_capacity(cuts.len() + 1);
    let mut start = 0;
    for c in cuts.into_iter().chain(std::iter::once(seq.samples.len())) {
        if c > start {
            out.push(TrackSequence::new(seq.person_key.clone(), seq.samples[start..c].to_vec()));
        }
        start = c;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BridgeConfig {
    /// seconds
    pub max_gap: f64,
    /// meters
    pub max_displacement: f64,
    /// Spacing of the synthetic samples inserted in a bridged gap.
    pub fill_period: f64,
}

impl Default for BridgeConfig {
    fn default() -> Self {
        Self { max_gap: 600.0, max_displacement: 0.5, fill_period: 0.1 }
    }
}

/// Joins consecutive kept sequences of one person key across an undetected
/// stretch when the person plausibly stayed put: the gap is short enough,
/// the boundary positions are close, and both classify into the same zone.
/// The gap is filled with synthetic samples holding the last position before
/// the gap, then the first position after it.
///
/// Returns the kept sequences, merged where the rule applies, ordered by
/// start time then key.
pub fn bridge_gaps(
    seqs: &[TrackSequence],
    verdicts: &[FilterVerdict],
    zones: &ZoneMap,
    cfg: &BridgeConfig,
) -> Vec<TrackSequence> {
    let mut by_key: BTreeMap<PersonKey, Vec<TrackSequence>> = BTreeMap::new();
    for v in verdicts.iter().filter(|v| v.kept()) {
        by_key.entry(v.person_key.clone()).or_default().push(seqs[v.index].clone());
    }
    let mut out = Vec::new();
    for (_, mut list) in by_key {
        list.sort_by(|a, b| a.t_start().total_cmp(&b.t_start()));
        let mut iter = list.into_iter();
        let mut current = iter.next().expect("non-empty group");
        for next in iter {
            if bridgeable(&current, &next, zones, cfg) {
                let last = *current.samples.last().expect("non-empty");
                let first = next.samples[0];
                let mid = 0.5 * (last.stamp + first.stamp);
                let mut t = last.stamp + cfg.fill_period;
                while t < first.stamp - 0.5 * cfg.fill_period {
                    let position = if t < mid { last.position } else { first.position };
                    current.samples.push(Sample { stamp: t, position });
                    t += cfg.fill_period;
                }
                current.samples.extend(next.samples);
            } else {
                out.push(std::mem::replace(&mut current, next));
            }
        }
        out.push(current);
    }
    out.sort_by(|a, b| a.t_start().total_cmp(&b.t_start()).then_with(|| a.person_key.cmp(&b.person_key)));
    out
}

fn bridgeable(a: &TrackSequence, b: &TrackSequence, zones: &ZoneMap, cfg: &BridgeConfig) -> bool {
    let last = a.samples.last().expect("non-empty");
    let first = &b.samples[0];
    let gap = first.stamp - last.stamp;
    if gap <= 0.0 || gap > cfg.max_gap {
        return false;
    }
    if last.position.xy().distance(&first.position.xy()) > cfg.max_displacement {
        return false;
    }
    match (zones.classify_index(last.position.xy()), zones.classify_index(first.position.xy())) {
        (Some(i), Some(j)) => i == j,
        _ => false,
    }
}

pub const VERDICT_CSV_HEADER: &str = "person_key,t_start,t_end,kept,reason,hull_perimeter_m,max_accel_mps2";

pub fn verdicts_csv(verdicts: &[FilterVerdict]) -> String {
    let mut s = String::from(VERDICT_CSV_HEADER);
    s.push('\n');
    for v in verdicts {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            v.person_key,
            sig6(v.t_start),
            sig6(v.t_end),
            v.kept(),
            v.reason.as_str(),
            sig6(v.hull_perimeter),
            sig6(v.max_accel)
        );
    }
    s
}
