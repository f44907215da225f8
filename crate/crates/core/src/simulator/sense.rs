//! Turns ground truth into what the sensors report, artifacts included.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::compile::GroundTruth;
use super::script::{parse_daytime, Posture};
use super::sensors::SensorConfig;
use super::SimError;
use crate::geometry::{Point2, Vec3};
use crate::ingestion::Detection;
use crate::zones::ZoneMap;

pub const DEFAULT_NOISE_JSON: &str = include_str!("../../data/noise.json");

/// A static object reported as a person.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GhostSpawn {
    pub zone: String,
    pub position: [f64; 3],
    /// `HH:MM` day clock
    pub start: String,
    pub end: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    /// Stationary standard deviation of position error per axis, meters.
    pub position_sigma: f64,
    /// Frame-to-frame correlation of the position error, in [0, 1).
    pub noise_correlation: f64,
    /// Jitter of ghost detections, meters.
    pub ghost_sigma: f64,
    pub ghosts: Vec<GhostSpawn>,
    /// Chance that two tracks coming within `swap_distance` exchange ids.
    pub swap_rate: f64,
    /// meters
    pub swap_distance: f64,
    /// Chance that a person staying put goes unreported for one window.
    pub dropout_static: f64,
    /// Same for a lying person.
    pub dropout_lying: f64,
    /// seconds
    pub dropout_window: f64,
    /// Chance per sample that a seated person's track gets a new id.
    pub fragmentation: f64,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            position_sigma: 0.05,
            noise_correlation: 0.9,
            ghost_sigma: 0.02,
            ghosts: Vec::new(),
            swap_rate: 0.5,
            swap_distance: 1.0,
            dropout_static: 0.05,
            dropout_lying: 0.2,
            dropout_window: 5.0,
            fragmentation: 0.002,
            seed: 42,
        }
    }
}

impl NoiseModel {
    pub fn from_json(text: &str) -> Result<Self, SimError> {
        serde_json::from_str(text).map_err(|e| SimError::Parse(format!("noise: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The shipped model: defaults plus a fridge and a shelf.
    pub fn default_livinlab() -> Self {
        Self::from_json(DEFAULT_NOISE_JSON).expect("bundled noise model parses")
    }

    /// No error, no artifacts.
    pub fn off() -> Self {
        Self {
            position_sigma: 0.0,
            noise_correlation: 0.0,
            ghost_sigma: 0.0,
            ghosts: Vec::new(),
            swap_rate: 0.0,
            swap_distance: 0.0,
            dropout_static: 0.0,
            dropout_lying: 0.0,
            dropout_window: 5.0,
            fragmentation: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self, map: &ZoneMap) -> Result<(), SimError> {
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(SimError::Invalid(format!("{name} must be in [0, 1], got {p}")))
            }
        };
        prob("swap_rate", self.swap_rate)?;
        prob("dropout_static", self.dropout_static)?;
        prob("dropout_lying", self.dropout_lying)?;
        prob("fragmentation", self.fragmentation)?;
        if !(0.0..1.0).contains(&self.noise_correlation) {
            return Err(SimError::Invalid(format!("noise_correlation must be in [0, 1), got {}", self.noise_correlation)));
        }
        if !(self.position_sigma >= 0.0 && self.ghost_sigma >= 0.0 && self.swap_distance >= 0.0) {
            return Err(SimError::Invalid("sigmas and swap_distance must be >= 0".into()));
        }
        if !(self.dropout_window > 0.0) {
            return Err(SimError::Invalid(format!("dropout_window must be > 0, got {}", self.dropout_window)));
        }
        for g in &self.ghosts {
            let zone = map.get(&g.zone).ok_or_else(|| SimError::UnknownZone(g.zone.clone()))?;
            if !zone.contains(Point2::new(g.position[0], g.position[1])) {
                return Err(SimError::Invalid(format!("ghost at {:?} is outside zone `{}`", g.position, g.zone)));
            }
            parse_daytime(&g.start)?;
            parse_daytime(&g.end)?;
        }
        Ok(())
    }
}

/// What happened while sensing, for the run report.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SenseStats {
    pub detections: u64,
    pub ghost_detections: u64,
    pub dropout_suppressed: u64,
    pub capacity_truncated: u64,
    pub swaps: u64,
    pub fragmentations: u64,
}

struct SensorState {
    ids: Vec<Option<u32>>,
    noise: Vec<Option<Vec3<f64>>>,
    near: BTreeSet<(usize, usize)>,
    next_id: u32,
}

#[derive(Clone, Copy)]
struct Entity {
    position: Vec3<f64>,
    /// None for ghosts
    posture: Option<Posture>,
    idle: bool,
}

fn gaussian3<R: Rng + ?Sized>(rng: &mut R) -> Vec3<f64> {
    Vec3::new(rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Samples every sensor at the truth's frame rate. Per frame and sensor:
/// entities inside the field of view get or keep a slot (up to
/// `max_tracks`; the rest go unreported), pairs that just came within
/// `swap_distance` may exchange slots, seated people may get a fresh slot,
/// and people staying put may be dropped for the current window. Reported
/// positions carry temporally correlated Gaussian error and are expressed in
/// the sensor frame. The output is sorted by stamp, then sensor order, then
/// slot.
pub fn sense<R: Rng + ?Sized>(
    truth: &GroundTruth,
    sensors: &[SensorConfig],
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<(Vec<Detection>, SenseStats), SimError> {
    let n_persons = truth.persons.len();
    let ghosts: Vec<(Vec3<f64>, f64, f64)> = noise
        .ghosts
        .iter()
        .map(|g| {
            let start = truth.clock.stamp(parse_daytime(&g.start)?, false);
            let end = truth.clock.stamp(parse_daytime(&g.end)?, true);
            Ok((Vec3::new(g.position[0], g.position[1], g.position[2]), start, end))
        })
        .collect::<Result<_, SimError>>()?;
    let n_entities = n_persons + ghosts.len();
    let inverse: Vec<_> = sensors.iter().map(|s| s.pose.inverse()).collect();
    let mut states: Vec<SensorState> = sensors
        .iter()
        .map(|_| SensorState { ids: vec![None; n_entities], noise: vec![None; n_entities], near: BTreeSet::new(), next_id: 0 })
        .collect();
    let rho = noise.noise_correlation;
    let innovation = (1.0 - rho * rho).sqrt();
    let mut dropped: HashMap<(usize, i64), bool> = HashMap::new();
    let mut cursors = vec![0usize; n_persons];
    let mut stats = SenseStats::default();
    let mut out = Vec::new();

    for k in 0..truth.n_frames() {
        let t = truth.frame_stamp(k);
        let mut ents: Vec<Option<Entity>> = Vec::with_capacity(n_entities);
        for (p, person) in truth.persons.iter().enumerate() {
            let c = &mut cursors[p];
            while *c < person.samples.len() && person.samples[*c].stamp < t {
                *c += 1;
            }
            ents.push(person.samples.get(*c).filter(|s| s.stamp == t).map(|s| Entity {
                position: s.position,
                posture: Some(s.posture),
                idle: s.idle,
            }));
        }
        for &(pos, start, end) in &ghosts {
            ents.push((start <= t && t < end).then_some(Entity { position: pos, posture: None, idle: true }));
        }

        for (si, sensor) in sensors.iter().enumerate() {
            let st = &mut states[si];
            let visible: Vec<bool> = ents.iter().map(|e| e.is_some_and(|e| sensor.sees(e.position.xy()))).collect();
            for e in 0..n_entities {
                if !visible[e] {
                    st.ids[e] = None;
                    st.noise[e] = None;
                }
            }
            st.near.retain(|&(a, b)| visible[a] && visible[b]);

            let mut active = st.ids.iter().filter(|i| i.is_some()).count();
            for e in 0..n_entities {
                if visible[e] && st.ids[e].is_none() {
                    if active < sensor.max_tracks {
                        st.ids[e] = Some(st.next_id);
                        st.next_id += 1;
                        active += 1;
                    } else {
                        stats.capacity_truncated += 1;
                    }
                }
            }

            for a in 0..n_entities {
                for b in a + 1..n_entities {
                    let (Some(ea), Some(eb)) = (ents[a], ents[b]) else { continue };
                    if st.ids[a].is_none() || st.ids[b].is_none() {
                        continue;
                    }
                    if ea.position.xy().distance(&eb.position.xy()) < noise.swap_distance {
                        if st.near.insert((a, b)) && rng.random::<f64>() < noise.swap_rate {
                            st.ids.swap(a, b);
                            stats.swaps += 1;
                        }
                    } else {
                        st.near.remove(&(a, b));
                    }
                }
            }

            let mut frame: Vec<Detection> = Vec::new();
            for e in 0..n_entities {
                let (Some(ent), Some(_)) = (ents[e], st.ids[e]) else { continue };
                if ent.posture == Some(Posture::Seated) && ent.idle && noise.fragmentation > 0.0 && rng.random::<f64>() < noise.fragmentation {
                    st.ids[e] = Some(st.next_id);
                    st.next_id += 1;
                    stats.fragmentations += 1;
                }
                if let (Some(posture), true) = (ent.posture, ent.idle) {
                    let window = ((t - truth.span.0) / noise.dropout_window).floor() as i64;
                    let p = if posture == Posture::Lying { noise.dropout_lying } else { noise.dropout_static };
                    let gone = *dropped.entry((e, window)).or_insert_with(|| p > 0.0 && rng.random::<f64>() < p);
                    if gone {
                        stats.dropout_suppressed += 1;
                        continue;
                    }
                }
                let sigma = if ent.posture.is_some() { noise.position_sigma } else { noise.ghost_sigma };
                let err = if sigma > 0.0 {
                    let fresh = gaussian3(rng) * sigma;
                    let next = match st.noise[e] {
                        Some(prev) => prev * rho + fresh * innovation,
                        None => fresh,
                    };
                    st.noise[e] = Some(next);
                    next
                } else {
                    Vec3::zero()
                };
                if ent.posture.is_none() {
                    stats.ghost_detections += 1;
                }
                frame.push(Detection {
                    sensor: sensor.id.clone(),
                    local_id: st.ids[e].expect("slot checked above"),
                    stamp: t,
                    position: inverse[si].apply(ent.position + err),
                });
            }
            frame.sort_by_key(|d| d.local_id);
            stats.detections += frame.len() as u64;
            out.extend(frame);
        }
    }
    Ok((out, stats))
}
