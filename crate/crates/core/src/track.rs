//! Per-person position samples in the apartment frame.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::{Point2, Vec3};

/// Identity of a tracked person: the sensor that saw them and the slot the
/// sensor assigned. No re-identification across sensors.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PersonKey {
    pub sensor: String,
    pub local_id: u32,
}

impl PersonKey {
    pub fn new(sensor: impl Into<String>, local_id: u32) -> Self {
        Self { sensor: sensor.into(), local_id }
    }
}

impl fmt::Display for PersonKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::transform::user_frame(&self.sensor, self.local_id))
    }
}

/// One projected center-of-mass sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackSample {
    pub person_key: PersonKey,
    pub stamp: f64,
    pub position: Vec3<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub stamp: f64,
    pub position: Vec3<f64>,
}

/// A gap-free run of samples for one person key, stamps strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackSequence {
    pub person_key: PersonKey,
    pub samples: Vec<Sample>,
}

impl TrackSequence {
    pub fn new(person_key: PersonKey, samples: Vec<Sample>) -> Self {
        debug_assert!(!samples.is_empty());
        debug_assert!(samples.windows(2).all(|w| w[0].stamp < w[1].stamp));
        Self { person_key, samples }
    }

    pub fn t_start(&self) -> f64 {
        self.samples.first().map_or(f64::NAN, |s| s.stamp)
    }

    pub fn t_end(&self) -> f64 {
        self.samples.last().map_or(f64::NAN, |s| s.stamp)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn floor_points(&self) -> Vec<Point2<f64>> {
        self.samples.iter().map(|s| s.position.xy()).collect()
    }
}
