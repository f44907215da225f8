use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::RwLock;

use thiserror::Error;

use super::rigid::RigidTransform;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("unknown frame `{0}`")]
    UnknownFrame(String),
    #[error("frames `{target}` and `{origin}` are not connected")]
    Disconnected { target: String, origin: String },
    #[error("lookup of `{parent}` -> `{child}` at t={t} outside buffer [{first}, {last}] beyond margin")]
    Extrapolation { parent: String, child: String, t: f64, first: f64, last: f64 },
    #[error("interpolation time {t} outside [{t0}, {t1}]")]
    OutOfInterval { t: f64, t0: f64, t1: f64 },
    #[error("two different transforms share stamp {stamp}")]
    AmbiguousSample { stamp: f64 },
    #[error("samples belong to different edges")]
    EdgeMismatch,
    #[error("a frame cannot be its own parent (`{0}`)")]
    SelfLoop(String),
    #[error("frame `{child}` already has parent `{existing}`, cannot attach to `{requested}`")]
    ParentConflict { child: String, existing: String, requested: String },
    #[error("attaching `{child}` under `{parent}` would create a cycle")]
    Cycle { parent: String, child: String },
    #[error("edge `{parent}` -> `{child}` mixes static and dynamic samples")]
    StaticDynamicMix { parent: String, child: String },
    #[error("invalid stamp {0}")]
    InvalidStamp(f64),
}

/// A transform between two named frames, valid at `stamp` (scenario seconds).
/// `xform` maps child-frame coordinates into the parent frame.
#[derive(Debug, Clone, PartialEq)]
pub struct StampedTransform<T> {
    pub parent: String,
    pub child: String,
    pub stamp: f64,
    pub xform: RigidTransform<T>,
}

impl<T: Scalar> StampedTransform<T> {
    pub fn new(parent: impl Into<String>, child: impl Into<String>, stamp: f64, xform: RigidTransform<T>) -> Self {
        Self { parent: parent.into(), child: child.into(), stamp, xform }
    }
}

/// Interpolates between two samples of the same edge. Exact at either stamp.
pub fn interpolate<T: Scalar>(
    t0: &StampedTransform<T>,
    t1: &StampedTransform<T>,
    t: f64,
) -> Result<RigidTransform<T>, TransformError> {
    if t0.parent != t1.parent || t0.child != t1.child {
        return Err(TransformError::EdgeMismatch);
    }
    interpolate_samples((t0.stamp, &t0.xform), (t1.stamp, &t1.xform), t)
}

fn interpolate_samples<T: Scalar>(
    (s0, x0): (f64, &RigidTransform<T>),
    (s1, x1): (f64, &RigidTransform<T>),
    t: f64,
) -> Result<RigidTransform<T>, TransformError> {
    if s0 == s1 {
        return if x0 == x1 { Ok(*x0) } else { Err(TransformError::AmbiguousSample { stamp: s0 }) };
    }
    let (lo, hi) = if s0 < s1 { (s0, s1) } else { (s1, s0) };
    if !(lo..=hi).contains(&t) {
        return Err(TransformError::OutOfInterval { t, t0: s0, t1: s1 });
    }
    if t == s0 {
        return Ok(*x0);
    }
    if t == s1 {
        return Ok(*x1);
    }
    let s = T::lit((t - s0) / (s1 - s0));
    Ok(x0.lerp(x1, s))
}

/// How long dynamic samples are kept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Retention {
    /// Offline mode: keep everything.
    Unbounded,
    /// Streaming mode: keep samples newer than `latest - seconds`.
    Window(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeConfig {
    /// Lookups within this many seconds outside a dynamic buffer clamp to
    /// the nearest endpoint; beyond it they fail.
    pub extrapolation_margin: f64,
    pub retention: Retention,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self { extrapolation_margin: 0.5, retention: Retention::Unbounded }
    }
}

impl TreeConfig {
    pub fn streaming() -> Self {
        Self { retention: Retention::Window(300.0), ..Self::default() }
    }
}

#[derive(Debug, Clone)]
enum Buffer<T> {
    Static(RigidTransform<T>),
    Dynamic(VecDeque<(f64, RigidTransform<T>)>),
}

#[derive(Debug, Clone)]
struct Edge<T> {
    parent: String,
    buffer: Buffer<T>,
}

#[derive(Debug, Clone, Default)]
struct TreeState<T> {
    /// child -> edge to its parent
    edges: BTreeMap<String, Edge<T>>,
    frames: BTreeSet<String>,
}

/// Forest of timestamped transforms between named frames.
///
/// All methods take `&self`; an internal lock gives a single total order over
/// insertions and lookups.
#[derive(Debug)]
pub struct TransformTree<T> {
    state: RwLock<TreeState<T>>,
    config: TreeConfig,
}

impl<T: Scalar> Default for TransformTree<T> {
    fn default() -> Self {
        Self::new(TreeConfig::default())
    }
}

impl<T: Scalar> TransformTree<T> {
    pub fn new(config: TreeConfig) -> Self {
        Self { state: RwLock::new(TreeState { edges: BTreeMap::new(), frames: BTreeSet::new() }), config }
    }

    pub fn config(&self) -> TreeConfig {
        self.config
    }

    pub fn frames(&self) -> Vec<String> {
        self.read().frames.iter().cloned().collect()
    }

    pub fn has_frame(&self, frame: &str) -> bool {
        self.read().frames.contains(frame)
    }

    fn read(&self) -> std::sync::RwLockReadGuard<'_, TreeState<T>> {
        self.state.read().unwrap_or_else(|e| e.into_inner())
    }

    fn write(&self) -> std::sync::RwLockWriteGuard<'_, TreeState<T>> {
        self.state.write().unwrap_or_else(|e| e.into_inner())
    }

    /// Registers an edge valid for all time.
    pub fn set_static(&self, parent: &str, child: &str, xform: RigidTransform<T>) -> Result<(), TransformError> {
        let mut st = self.write();
        Self::check_attach(&st, parent, child)?;
        if let Some(Edge { buffer: Buffer::Dynamic(_), .. }) = st.edges.get(child) {
            return Err(TransformError::StaticDynamicMix { parent: parent.into(), child: child.into() });
        }
        st.edges.insert(child.to_string(), Edge { parent: parent.to_string(), buffer: Buffer::Static(xform) });
        st.frames.insert(parent.to_string());
        st.frames.insert(child.to_string());
        Ok(())
    }

    /// Adds one sample to a dynamic edge.
    pub fn insert(&self, sample: StampedTransform<T>) -> Result<(), TransformError> {
        if !sample.stamp.is_finite() || sample.stamp < 0.0 {
            return Err(TransformError::InvalidStamp(sample.stamp));
        }
        let retention = self.config.retention;
        let mut st = self.write();
        Self::check_attach(&st, &sample.parent, &sample.child)?;
        let StampedTransform { parent, child, stamp, xform } = sample;
        let edge = st
            .edges
            .entry(child.clone())
            .or_insert_with(|| Edge { parent: parent.clone(), buffer: Buffer::Dynamic(VecDeque::new()) });
        let buf = match &mut edge.buffer {
            Buffer::Dynamic(b) => b,
            Buffer::Static(_) => return Err(TransformError::StaticDynamicMix { parent, child }),
        };
        match buf.binary_search_by(|(s, _)| s.partial_cmp(&stamp).expect("finite stamps")) {
            Ok(i) => {
                if buf[i].1 != xform {
                    return Err(TransformError::AmbiguousSample { stamp });
                }
            }
            Err(i) => buf.insert(i, (stamp, xform)),
        }
        if let Retention::Window(w) = retention {
            let latest = buf.back().map(|(s, _)| *s).unwrap_or(stamp);
            while buf.len() > 1 && buf.front().is_some_and(|(s, _)| *s < latest - w) {
                buf.pop_front();
            }
        }
        st.frames.insert(parent);
        st.frames.insert(child);
        Ok(())
    }

    fn check_attach(st: &TreeState<T>, parent: &str, child: &str) -> Result<(), TransformError> {
        if parent == child {
            return Err(TransformError::SelfLoop(parent.into()));
        }
        if let Some(e) = st.edges.get(child) {
            if e.parent != parent {
                return Err(TransformError::ParentConflict {
                    child: child.into(),
                    existing: e.parent.clone(),
                    requested: parent.into(),
                });
            }
            return Ok(());
        }
        // Walking up from the new parent must not reach the child.
        let mut cur = parent;
        while let Some(e) = st.edges.get(cur) {
            if e.parent == child {
                return Err(TransformError::Cycle { parent: parent.into(), child: child.into() });
            }
            cur = &e.parent;
        }
        Ok(())
    }

    /// Transform mapping `source`-frame coordinates into the `target` frame at `t`.
    pub fn lookup(&self, target: &str, source: &str, t: f64) -> Result<RigidTransform<T>, TransformError> {
        let st = self.read();
        for f in [target, source] {
            if !st.frames.contains(f) {
                return Err(TransformError::UnknownFrame(f.into()));
            }
        }
        if target == source {
            return Ok(RigidTransform::identity());
        }
        let up_source = Self::ancestors(&st, source);
        let up_target = Self::ancestors(&st, target);
        let common = up_source
            .iter()
            .find(|f| up_target.contains(f))
            .cloned()
            .ok_or_else(|| TransformError::Disconnected { target: target.into(), origin: source.into() })?;

        // root <- ... <- source, collapsed to common <- source
        let from_source = self.chain(&st, source, &common, t)?;
        let from_target = self.chain(&st, target, &common, t)?;
        Ok(from_target.inverse().compose(&from_source))
    }

    fn ancestors(st: &TreeState<T>, frame: &str) -> Vec<String> {
        let mut out = vec![frame.to_string()];
        let mut cur = frame;
        while let Some(e) = st.edges.get(cur) {
            out.push(e.parent.clone());
            cur = &e.parent;
        }
        out
    }

    /// Composite transform taking `frame` coordinates into `ancestor`.
    fn chain(&self, st: &TreeState<T>, frame: &str, ancestor: &str, t: f64) -> Result<RigidTransform<T>, TransformError> {
        let mut acc = RigidTransform::identity();
        let mut cur = frame.to_string();
        while cur != ancestor {
            let e = st.edges.get(&cur).expect("ancestor chain");
            let x = self.edge_at(&e.parent, &cur, &e.buffer, t)?;
            acc = x.compose(&acc);
            cur = e.parent.clone();
        }
        Ok(acc)
    }

    fn edge_at(&self, parent: &str, child: &str, buffer: &Buffer<T>, t: f64) -> Result<RigidTransform<T>, TransformError> {
        let buf = match buffer {
            Buffer::Static(x) => return Ok(*x),
            Buffer::Dynamic(b) => b,
        };
        let (first, last) = match (buf.front(), buf.back()) {
            (Some(f), Some(l)) => (f.0, l.0),
            _ => return Err(TransformError::Extrapolation { parent: parent.into(), child: child.into(), t, first: f64::NAN, last: f64::NAN }),
        };
        let eps = self.config.extrapolation_margin;
        if t < first - eps || t > last + eps {
            return Err(TransformError::Extrapolation { parent: parent.into(), child: child.into(), t, first, last });
        }
        if t <= first {
            return Ok(buf.front().expect("non-empty").1);
        }
        if t >= last {
            return Ok(buf.back().expect("non-empty").1);
        }
        let i = buf.partition_point(|(s, _)| *s <= t);
        let (s0, x0) = &buf[i - 1];
        if *s0 == t {
            return Ok(*x0);
        }
        let (s1, x1) = &buf[i];
        interpolate_samples((*s0, x0), (*s1, x1), t)
    }
}
