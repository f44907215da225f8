//! Run configuration: file, environment and flags merged into one value,
//! plus the inputs it points at.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use copresence::pipeline::PipelineConfig;
use copresence::simulator::{
    NoiseModel, ScenarioScript, SensorConfig, SensorsFile, DEFAULT_NOISE_JSON, DEFAULT_SCENARIO_JSON,
    DEFAULT_SENSORS_JSON,
};
use copresence::transform::TransformTree;
use copresence::zones::{ZoneMap, DEFAULT_ZONES_JSON};

/// Bad input: missing or invalid files, mismatched spans. Exits with 2.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

pub fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Invalid(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Batch,
    Realtime,
}

/// Everything a run needs. Input paths left out use the bundled files.
/// Relative paths in a config file are taken relative to that file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub zones: Option<PathBuf>,
    pub sensors: Option<PathBuf>,
    pub scenario: Option<PathBuf>,
    pub noise: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    pub runs: usize,
    pub strict: bool,
    pub mode: Mode,
    /// Scenario seconds per wall second in realtime mode.
    pub speed: f64,
    pub pipeline: PipelineConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            zones: None,
            sensors: None,
            scenario: None,
            noise: None,
            out: PathBuf::from("out"),
            seed: 42,
            runs: 1,
            strict: false,
            mode: Mode::Batch,
            speed: 1.0,
            pipeline: PipelineConfig::default(),
        }
    }
}

/// Values from flags or the environment; `None` leaves the file value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub zones: Option<PathBuf>,
    pub sensors: Option<PathBuf>,
    pub scenario: Option<PathBuf>,
    pub noise: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub runs: Option<usize>,
    pub strict: bool,
    pub realtime: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("config {}: {e}", path.display())))?;
        let mut cfg: Self =
            serde_json::from_str(&text).map_err(|e| invalid(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.zones, &mut cfg.sensors, &mut cfg.scenario, &mut cfg.noise].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: Overrides) {
        macro_rules! take {
            ($($f:ident),*) => { $(if let Some(v) = o.$f { self.$f = v.into(); })* };
        }
        take!(zones, sensors, scenario, noise, out, seed, runs);
        self.strict |= o.strict;
        if let Some(speed) = o.realtime {
            self.mode = Mode::Realtime;
            self.speed = speed;
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.runs == 0 {
            return Err(invalid("runs must be >= 1"));
        }
        if self.mode == Mode::Realtime && !(self.speed > 0.0) {
            return Err(invalid(format!("realtime speed must be > 0, got {}", self.speed)));
        }
        if !(self.pipeline.bin_width > 0.0) {
            return Err(invalid(format!("bin_width must be > 0, got {}", self.pipeline.bin_width)));
        }
        if !(self.pipeline.gap_threshold > 0.0) {
            return Err(invalid(format!("gap_threshold must be > 0, got {}", self.pipeline.gap_threshold)));
        }
        self.pipeline.filter.validate().map_err(|e| invalid(e.to_string()))
    }

    /// `None` for batch mode, which replays as fast as possible.
    pub fn replay_speed(&self) -> Option<f64> {
        (self.mode == Mode::Realtime).then_some(self.speed)
    }

    pub fn run_dir(&self, k: usize) -> PathBuf {
        self.out.join(format!("run-{}", k + 1))
    }
}

fn read_input(path: &Option<PathBuf>, bundled: &str, what: &str) -> anyhow::Result<String> {
    match path {
        None => Ok(bundled.to_string()),
        Some(p) => std::fs::read_to_string(p).map_err(|e| invalid(format!("{what} file {}: {e}", p.display()))),
    }
}

/// Parsed and validated inputs.
pub struct Inputs {
    pub map: ZoneMap,
    pub sensors: Vec<SensorConfig>,
    pub tree: TransformTree<f64>,
    pub script: ScenarioScript,
    pub noise: NoiseModel,
    /// sha256 over the input files and the pipeline settings.
    pub config_hash: String,
}

impl Inputs {
    pub fn load(cfg: &RunConfig) -> anyhow::Result<Self> {
        let texts = [
            ("zones", read_input(&cfg.zones, DEFAULT_ZONES_JSON, "zones")?),
            ("sensors", read_input(&cfg.sensors, DEFAULT_SENSORS_JSON, "sensors")?),
            ("scenario", read_input(&cfg.scenario, DEFAULT_SCENARIO_JSON, "scenario")?),
            ("noise", read_input(&cfg.noise, DEFAULT_NOISE_JSON, "noise")?),
        ];
        let bad = |e: &dyn fmt::Display| invalid(e.to_string());
        let map = ZoneMap::from_json(&texts[0].1).map_err(|e| bad(&e))?;
        map.ensure_valid().map_err(|e| bad(&e))?;
        let sensors_file = SensorsFile::from_json(&texts[1].1).map_err(|e| bad(&e))?;
        let sensors = sensors_file.configs().map_err(|e| bad(&e))?;
        let tree = TransformTree::default();
        sensors_file.build_tree(&tree).map_err(|e| bad(&e))?;
        let script = ScenarioScript::from_json(&texts[2].1).map_err(|e| bad(&e))?;
        script.resolve(&map).map_err(|e| bad(&e))?;
        let noise = NoiseModel::from_json(&texts[3].1).map_err(|e| bad(&e))?;
        noise.validate(&map).map_err(|e| bad(&e))?;

        let mut h = Sha256::new();
        for (name, text) in &texts {
            h.update(name.as_bytes());
            h.update([0]);
            h.update(text.as_bytes());
            h.update([0]);
        }
        h.update(serde_json::to_vec(&cfg.pipeline)?);
        let config_hash = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
        Ok(Self { map, sensors, tree, script, noise, config_hash })
    }

    /// Scenario time covered by the script.
    pub fn span(&self) -> anyhow::Result<(f64, f64)> {
        Ok(self.script.clock().map_err(|e| invalid(e.to_string()))?.span())
    }
}
