//! Ground-truth trajectories and presence intervals from a script.

use rand::Rng;
use rand_distr::StandardNormal;

use super::script::{Clock, Posture, ScenarioScript, TimedActivity};
use super::SimError;
use crate::ambulatogram::PresenceInterval;
use crate::geometry::{Point2, Vec3};
use crate::zones::ZoneMap;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthSample {
    pub stamp: f64,
    pub position: Vec3<f64>,
    pub posture: Posture,
    /// Staying at an activity anchor rather than walking.
    pub idle: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersonTruth {
    pub name: String,
    /// On the global sample grid, only where the person is present.
    pub samples: Vec<TruthSample>,
}

/// Compiled scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub clock: Clock,
    pub span: (f64, f64),
    pub sample_rate: f64,
    pub persons: Vec<PersonTruth>,
    /// Zone occupancy read off the trajectories, the evaluation reference.
    pub intervals: Vec<PresenceInterval>,
}

impl GroundTruth {
    pub fn n_frames(&self) -> usize {
        ((self.span.1 - self.span.0) * self.sample_rate).round() as usize
    }

    /// Stamp of frame `k`. Computed by division so multiples of the period
    /// land on their shortest decimal.
    pub fn frame_stamp(&self, k: usize) -> f64 {
        self.span.0 + k as f64 / self.sample_rate
    }
}

#[derive(Debug, Clone)]
enum Phase {
    Idle { t0: f64, t1: f64, anchor: Point2<f64>, posture: Posture },
    Walk { t0: f64, t1: f64, path: Vec<Point2<f64>> },
}

impl Phase {
    fn end(&self) -> f64 {
        match self {
            Phase::Idle { t1, .. } | Phase::Walk { t1, .. } => *t1,
        }
    }
    fn start(&self) -> f64 {
        match self {
            Phase::Idle { t0, .. } | Phase::Walk { t0, .. } => *t0,
        }
    }
}

fn path_length(path: &[Point2<f64>]) -> f64 {
    path.windows(2).map(|w| w[0].distance(&w[1])).sum()
}

fn point_along(path: &[Point2<f64>], mut d: f64) -> Point2<f64> {
    for w in path.windows(2) {
        let len = w[0].distance(&w[1]);
        if d <= len && len > 0.0 {
            let s = d / len;
            return Point2::new(w[0].x + (w[1].x - w[0].x) * s, w[0].y + (w[1].y - w[0].y) * s);
        }
        d -= len;
    }
    *path.last().expect("non-empty path")
}

/// Splits one person's day into stays and walks. A walk joins two activities
/// that follow each other without a gap and is centered on the boundary
/// between them.
fn phases(acts: &[TimedActivity], speed: f64, person: &str) -> Result<Vec<Phase>, SimError> {
    let n = acts.len();
    // (depart, arrive, path) for the boundary before activity i
    let mut walks: Vec<Option<(f64, f64, Vec<Point2<f64>>)>> = vec![None; n];
    for i in 1..n {
        let (prev, cur) = (&acts[i - 1], &acts[i]);
        if (cur.start - prev.end).abs() > 1e-9 {
            continue;
        }
        let mut path = vec![prev.anchor];
        path.extend(cur.waypoints.iter().copied());
        path.push(cur.anchor);
        let len = path_length(&path);
        if len == 0.0 {
            continue;
        }
        let half = 0.5 * len / speed;
        walks[i] = Some((cur.start - half, cur.start + half, path));
    }
    let mut out = Vec::new();
    for (i, a) in acts.iter().enumerate() {
        if let Some((t0, t1, path)) = walks[i].take() {
            out.push(Phase::Walk { t0, t1, path });
        }
        let t0 = out.last().filter(|_| i > 0 && (a.start - acts[i - 1].end).abs() <= 1e-9).map_or(a.start, Phase::end);
        let t1 = walks.get(i + 1).and_then(|w| w.as_ref()).map_or(a.end, |w| w.0);
        if t1 < t0 {
            return Err(SimError::Invalid(format!(
                "activity `{}` of {person} is too short for the walks around it",
                a.name
            )));
        }
        out.push(Phase::Idle { t0, t1, anchor: a.anchor, posture: a.posture });
    }
    Ok(out)
}

/// Builds trajectories on the script's sample grid. People walk straight
/// lines through any waypoints at the script's walking speed and, during a
/// stay, wander around the anchor (Ornstein-Uhlenbeck, `idle_sigma`,
/// `idle_tau`). Presence intervals are the runs of samples classified into
/// one zone; a sample at `t` stands for `[t, t + 1/rate)`.
pub fn compile<R: Rng + ?Sized>(script: &ScenarioScript, map: &ZoneMap, rng: &mut R) -> Result<GroundTruth, SimError> {
    let per = script.resolve(map)?;
    let clock = script.clock()?;
    let span = clock.span();
    let rate = script.sample_rate;
    let n_frames = ((span.1 - span.0) * rate).round() as usize;
    let dt = 1.0 / rate;
    let rho = (-dt / script.idle_tau).exp();
    let kick = script.idle_sigma * (1.0 - rho * rho).sqrt();
    let standing = Posture::Standing.height();

    let mut persons = Vec::with_capacity(per.len());
    let mut intervals = Vec::new();
    for (pi, acts) in per.iter().enumerate() {
        let name = &script.persons[pi];
        let phases = phases(acts, script.walking_speed, name)?;
        let mut samples = Vec::new();
        let mut cursor = 0;
        let mut sway = (0.0, 0.0);
        let mut current_idle: Option<usize> = None;
        for k in 0..n_frames {
            let t = span.0 + k as f64 / rate;
            while cursor < phases.len() && phases[cursor].end() <= t {
                cursor += 1;
            }
            let Some(phase) = phases.get(cursor).filter(|p| p.start() <= t) else {
                continue;
            };
            let sample = match phase {
                Phase::Walk { t0, path, .. } => {
                    let p = point_along(path, script.walking_speed * (t - t0));
                    TruthSample { stamp: t, position: Vec3::new(p.x, p.y, standing), posture: Posture::Standing, idle: false }
                }
                Phase::Idle { t0, t1, anchor, posture } => {
                    if current_idle != Some(cursor) {
                        current_idle = Some(cursor);
                        sway = (0.0, 0.0);
                    }
                    let ex: f64 = rng.sample(StandardNormal);
                    let ey: f64 = rng.sample(StandardNormal);
                    sway = (rho * sway.0 + kick * ex, rho * sway.1 + kick * ey);
                    let w = if script.posture_ramp > 0.0 {
                        ((t - t0).min(t1 - t) / script.posture_ramp).clamp(0.0, 1.0)
                    } else {
                        1.0
                    };
                    let z = standing + w * (posture.height() - standing);
                    TruthSample {
                        stamp: t,
                        position: Vec3::new(anchor.x + w * sway.0, anchor.y + w * sway.1, z),
                        posture: *posture,
                        idle: true,
                    }
                }
            };
            samples.push((k, sample));
        }

        // runs of consecutive frames in one zone
        let mut run: Option<(usize, usize, usize)> = None; // (zone, first k, last k)
        let close = |run: Option<(usize, usize, usize)>, out: &mut Vec<PresenceInterval>| {
            if let Some((z, a, b)) = run {
                out.push(PresenceInterval {
                    person: name.clone(),
                    zone: map.zones[z].name.clone(),
                    t_start: span.0 + a as f64 / rate,
                    t_end: span.0 + (b + 1) as f64 / rate,
                });
            }
        };
        for (k, s) in &samples {
            let z = map.classify_index(s.position.xy());
            match (run, z) {
                (Some((rz, a, b)), Some(z)) if rz == z && b + 1 == *k => run = Some((rz, a, *k)),
                (_, z) => {
                    close(run, &mut intervals);
                    run = z.map(|z| (z, *k, *k));
                }
            }
        }
        close(run, &mut intervals);
        persons.push(PersonTruth { name: name.clone(), samples: samples.into_iter().map(|(_, s)| s).collect() });
    }
    Ok(GroundTruth { clock, span, sample_rate: rate, persons, intervals })
}
