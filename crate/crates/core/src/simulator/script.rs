//! Shrunk-day scenario scripts: who does what, where and when.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::geometry::Point2;
use crate::zones::ZoneMap;

pub const DEFAULT_SCENARIO_JSON: &str = include_str!("../../data/scenario.json");

const DAY: f64 = 86_400.0;

/// Parses `HH:MM` (or `HH:MM:SS`) into seconds after midnight. `24:00` is
/// accepted as the end of the day.
pub fn parse_daytime(s: &str) -> Result<f64, SimError> {
    let bad = || SimError::Daytime(s.to_string());
    let parts: Vec<&str> = s.trim().split(':').collect();
    if !(2..=3).contains(&parts.len()) {
        return Err(bad());
    }
    let num = |p: &str| p.parse::<u32>().map_err(|_| bad());
    let (h, m) = (num(parts[0])?, num(parts[1])?);
    let sec = if parts.len() == 3 { num(parts[2])? } else { 0 };
    if m >= 60 || sec >= 60 || h > 24 || (h == 24 && (m, sec) != (0, 0)) {
        return Err(bad());
    }
    Ok(f64::from(h * 3600 + m * 60 + sec))
}

/// Maps day-clock times onto the compressed scenario clock, which starts at
/// 0 at `start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clock {
    /// day seconds
    pub start: f64,
    /// day seconds covered, in (0, 86400]
    pub length: f64,
    /// day seconds per scenario second
    pub compression: f64,
}

impl Clock {
    pub fn new(start: f64, end: f64, compression: f64) -> Result<Self, SimError> {
        if !(compression > 0.0 && compression.is_finite()) {
            return Err(SimError::Compression(compression));
        }
        let mut length = (end - start).rem_euclid(DAY);
        if length == 0.0 {
            length = DAY;
        }
        Ok(Self { start, length, compression })
    }

    /// Scenario time of a day-clock instant. `is_end` maps an instant equal
    /// to the start onto the end of the span rather than 0.
    pub fn stamp(&self, daytime: f64, is_end: bool) -> f64 {
        let mut off = (daytime - self.start).rem_euclid(DAY);
        if is_end && off == 0.0 {
            off = DAY;
        }
        off / self.compression
    }

    pub fn span(&self) -> (f64, f64) {
        (0.0, self.length / self.compression)
    }

    /// Day-clock hour at scenario time 0.
    pub fn start_hours(&self) -> f64 {
        self.start / 3600.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Posture {
    #[default]
    Standing,
    Seated,
    Lying,
}

impl Posture {
    /// Height of the center of mass, meters.
    pub fn height(&self) -> f64 {
        match self {
            Posture::Standing => 1.0,
            Posture::Seated => 0.7,
            Posture::Lying => 0.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Activity {
    pub person: String,
    #[serde(default)]
    pub name: String,
    pub zone: String,
    /// `HH:MM` day clock
    pub start: String,
    pub end: String,
    /// Where the person stays; defaults to the zone centroid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<[f64; 2]>,
    #[serde(default)]
    pub posture: Posture,
    /// Points passed on the way here from the previous activity.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub waypoints: Vec<[f64; 2]>,
}

fn default_compression() -> f64 {
    60.0
}
fn default_start() -> String {
    "01:00".into()
}
fn default_rate() -> f64 {
    10.0
}
fn default_speed() -> f64 {
    1.2
}
fn default_idle_sigma() -> f64 {
    0.05
}
fn default_idle_tau() -> f64 {
    5.0
}
fn default_ramp() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioScript {
    /// day seconds per scenario second
    #[serde(default = "default_compression")]
    pub compression: f64,
    #[serde(default = "default_start")]
    pub start: String,
    /// Defaults to `start`, i.e. a full day.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<String>,
    /// Samples per scenario second for trajectories and sensors.
    #[serde(default = "default_rate")]
    pub sample_rate: f64,
    /// m/s on the scenario clock
    #[serde(default = "default_speed")]
    pub walking_speed: f64,
    /// Spread of the wandering around an anchor, meters.
    #[serde(default = "default_idle_sigma")]
    pub idle_sigma: f64,
    /// Correlation time of that wandering, seconds.
    #[serde(default = "default_idle_tau")]
    pub idle_tau: f64,
    /// Seconds over which wandering and posture height fade in and out at
    /// either end of a stay.
    #[serde(default = "default_ramp")]
    pub posture_ramp: f64,
    pub persons: Vec<String>,
    pub activities: Vec<Activity>,
}

/// An activity with its times on the scenario clock and anchor resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct TimedActivity {
    pub person: usize,
    pub name: String,
    pub zone: String,
    pub start: f64,
    pub end: f64,
    pub anchor: Point2<f64>,
    pub posture: Posture,
    pub waypoints: Vec<Point2<f64>>,
}

impl ScenarioScript {
    pub fn from_json(text: &str) -> Result<Self, SimError> {
        serde_json::from_str(text).map_err(|e| SimError::Parse(format!("scenario: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn default_day() -> Self {
        Self::from_json(DEFAULT_SCENARIO_JSON).expect("bundled scenario parses")
    }

    pub fn clock(&self) -> Result<Clock, SimError> {
        let start = parse_daytime(&self.start)?;
        let end = match &self.end {
            Some(e) => parse_daytime(e)?,
            None => start,
        };
        Clock::new(start, end, self.compression)
    }

    /// Checks the script against the map and returns activities on the
    /// scenario clock, per person, in time order.
    pub fn resolve(&self, map: &ZoneMap) -> Result<Vec<Vec<TimedActivity>>, SimError> {
        let clock = self.clock()?;
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(SimError::Invalid(format!("sample_rate must be > 0, got {}", self.sample_rate)));
        }
        if !(self.walking_speed > 0.0) {
            return Err(SimError::Invalid(format!("walking_speed must be > 0, got {}", self.walking_speed)));
        }
        if !(self.idle_sigma >= 0.0 && self.idle_tau > 0.0 && self.posture_ramp >= 0.0) {
            return Err(SimError::Invalid("idle_sigma, idle_tau and posture_ramp must be non-negative".into()));
        }
        let (_, t_end) = clock.span();
        let mut per: Vec<Vec<TimedActivity>> = vec![Vec::new(); self.persons.len()];
        for a in &self.activities {
            let person = self
                .persons
                .iter()
                .position(|p| *p == a.person)
                .ok_or_else(|| SimError::UnknownPerson(a.person.clone()))?;
            let zone = map.get(&a.zone).ok_or_else(|| SimError::UnknownZone(a.zone.clone()))?;
            let start = clock.stamp(parse_daytime(&a.start)?, false);
            let end = clock.stamp(parse_daytime(&a.end)?, true);
            if !(start < end) || end > t_end + 1e-9 {
                return Err(SimError::Invalid(format!(
                    "activity `{}` of {} ({}-{}) does not fit the scenario window",
                    a.name, a.person, a.start, a.end
                )));
            }
            let anchor = match a.anchor {
                Some(p) => Point2::from(p),
                None => zone.centroid(),
            };
            if !zone.contains(anchor) {
                return Err(SimError::Invalid(format!(
                    "anchor ({}, {}) of `{}` is outside zone `{}`",
                    anchor.x, anchor.y, a.name, a.zone
                )));
            }
            per[person].push(TimedActivity {
                person,
                name: a.name.clone(),
                zone: a.zone.clone(),
                start,
                end,
                anchor,
                posture: a.posture,
                waypoints: a.waypoints.iter().map(|&w| Point2::from(w)).collect(),
            });
        }
        for (p, list) in per.iter_mut().enumerate() {
            list.sort_by(|a, b| a.start.total_cmp(&b.start));
            if let Some(w) = list.windows(2).find(|w| w[1].start < w[0].end) {
                return Err(SimError::Overlap { person: self.persons[p].clone(), first: w[0].name.clone(), second: w[1].name.clone() });
            }
        }
        Ok(per)
    }
}
