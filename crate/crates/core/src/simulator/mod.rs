//! Seeded shrunk-day scenarios: ground truth plus a noisy multi-sensor
//! detection stream.

mod compile;
mod script;
mod sense;
mod sensors;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use compile::{compile, GroundTruth, PersonTruth, TruthSample};
pub use script::{parse_daytime, Activity, Clock, Posture, ScenarioScript, TimedActivity, DEFAULT_SCENARIO_JSON};
pub use sense::{sense, GhostSpawn, NoiseModel, SenseStats, DEFAULT_NOISE_JSON};
pub use sensors::{coverage_mismatches, SensorConfig, SensorSpec, SensorsFile, DEFAULT_SENSORS_JSON};

use crate::ingestion::{self, Detection, IngestError, Topic};
use crate::zones::ZoneMap;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("bad day time `{0}` (expected HH:MM)")]
    Daytime(String),
    #[error("compression must be > 0, got {0}")]
    Compression(f64),
    #[error("unknown zone `{0}`")]
    UnknownZone(String),
    #[error("unknown person `{0}`")]
    UnknownPerson(String),
    #[error("activities `{first}` and `{second}` of {person} overlap")]
    Overlap { person: String, first: String, second: String },
    #[error("{0}")]
    Invalid(String),
    #[error("parsing {0}")]
    Parse(String),
    #[error("reading {0}")]
    Io(String),
}

/// One simulated run.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub truth: GroundTruth,
    pub detections: Vec<Detection>,
    pub stats: SenseStats,
}

/// Compiles the script and senses it, drawing all randomness from one
/// generator seeded with `seed`.
pub fn simulate(
    script: &ScenarioScript,
    map: &ZoneMap,
    sensors: &[SensorConfig],
    noise: &NoiseModel,
    seed: u64,
) -> Result<Simulation, SimError> {
    noise.validate(map)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth = compile(script, map, &mut rng)?;
    let (detections, stats) = sense(&truth, sensors, noise, &mut rng)?;
    Ok(Simulation { truth, detections, stats })
}

/// Seed of run `k` (0-based) under base seed `base`: the `k+1`-th output of
/// a SplitMix64 generator started at `base`.
pub fn derive_seed(base: u64, k: u64) -> u64 {
    let mut z = base.wrapping_add((k + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Publishes a stamp-sorted stream at `speed` scenario seconds per wall
/// second; `f64::INFINITY` publishes as fast as possible.
pub fn replay_realtime(stream: &[Detection], speed: f64, topic: &Topic<Detection>) -> Result<(), IngestError> {
    ingestion::replay(stream, topic, Some(speed))
}
