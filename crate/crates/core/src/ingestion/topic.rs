//! Named in-process channels with a bounded reordering window.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap, VecDeque};
use std::cmp::{Ordering, Reverse};
use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::{Arc, Mutex, MutexGuard};

use thiserror::Error;

/// Anything carried on a topic. `capacity_slot` names the (sensor, slot)
/// pair counted against the per-sensor track limit, if any.
pub trait Message: Clone + Send + 'static {
    fn stamp(&self) -> f64;

    fn capacity_slot(&self) -> Option<(&str, u32)> {
        None
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PublishError {
    #[error("sensor `{sensor}` already reports {limit} tracks at t={stamp}; slot {local_id} rejected")]
    Capacity { sensor: String, local_id: u32, stamp: f64, limit: usize },
    #[error("message at t={stamp} arrived after the stream moved past t={floor}")]
    Late { stamp: f64, floor: f64 },
    #[error("invalid stamp {0}")]
    InvalidStamp(f64),
    #[error("topic `{0}` is closed")]
    Closed(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopicConfig {
    /// Messages may arrive up to this many seconds behind the newest stamp
    /// seen and are still delivered in order.
    pub reorder_window: f64,
    /// Messages kept for subscribers that join late.
    pub retain: usize,
    /// Distinct slots per sensor allowed at one stamp.
    pub max_tracks: usize,
    /// Stamps closer than this belong to the same frame for the capacity
    /// check.
    pub frame_tolerance: f64,
}

impl Default for TopicConfig {
    fn default() -> Self {
        Self { reorder_window: 0.2, retain: 4096, max_tracks: 6, frame_tolerance: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct TopicStats {
    pub published: u64,
    pub delivered: u64,
    pub late_dropped: u64,
    pub capacity_rejected: u64,
    pub reordered: u64,
}

struct Pending<M> {
    stamp: f64,
    seq: u64,
    msg: M,
}

impl<M> PartialEq for Pending<M> {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl<M> Eq for Pending<M> {}
impl<M> PartialOrd for Pending<M> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<M> Ord for Pending<M> {
    fn cmp(&self, o: &Self) -> Ordering {
        self.stamp.total_cmp(&o.stamp).then(self.seq.cmp(&o.seq))
    }
}

struct State<M> {
    pending: BinaryHeap<Reverse<Pending<M>>>,
    retained: VecDeque<M>,
    subscribers: Vec<Sender<M>>,
    /// sensor -> frame key -> slots seen in that frame
    frames: HashMap<String, BTreeMap<i64, BTreeSet<u32>>>,
    newest: f64,
    released: f64,
    seq: u64,
    stats: TopicStats,
    closed: bool,
}

/// A named channel. Publishers may be on any thread; every subscriber sees
/// one stamp-sorted stream.
pub struct Topic<M: Message> {
    name: String,
    config: TopicConfig,
    state: Mutex<State<M>>,
}

/// Receiving end of a subscription. Iteration ends once the topic is closed
/// and drained.
pub struct Subscription<M> {
    rx: Receiver<M>,
}

impl<M> Subscription<M> {
    pub fn recv(&self) -> Option<M> {
        self.rx.recv().ok()
    }

    pub fn try_recv(&self) -> Option<M> {
        self.rx.try_recv().ok()
    }

    /// Everything currently queued, without blocking.
    pub fn drain(&self) -> Vec<M> {
        self.rx.try_iter().collect()
    }
}

impl<M> Iterator for Subscription<M> {
    type Item = M;
    fn next(&mut self) -> Option<M> {
        self.recv()
    }
}

impl<M: Message> Topic<M> {
    pub fn new(name: impl Into<String>, config: TopicConfig) -> Self {
        Self {
            name: name.into(),
            config,
            state: Mutex::new(State {
                pending: BinaryHeap::new(),
                retained: VecDeque::new(),
                subscribers: Vec::new(),
                frames: HashMap::new(),
                newest: f64::NEG_INFINITY,
                released: f64::NEG_INFINITY,
                seq: 0,
                stats: TopicStats::default(),
                closed: false,
            }),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    fn lock(&self) -> MutexGuard<'_, State<M>> {
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn publish(&self, msg: M) -> Result<(), PublishError> {
        let stamp = msg.stamp();
        if !stamp.is_finite() {
            return Err(PublishError::InvalidStamp(stamp));
        }
        let mut st = self.lock();
        if st.closed {
            return Err(PublishError::Closed(self.name.clone()));
        }
        let floor = st.released.max(st.newest - self.config.reorder_window);
        if stamp < floor {
            st.stats.late_dropped += 1;
            return Err(PublishError::Late { stamp, floor });
        }
        if let Some((sensor, slot)) = msg.capacity_slot() {
            let key = (stamp / self.config.frame_tolerance).round() as i64;
            let frames = st.frames.entry(sensor.to_string()).or_default();
            let ids = frames.entry(key).or_default();
            if !ids.contains(&slot) && ids.len() >= self.config.max_tracks {
                let err = PublishError::Capacity {
                    sensor: sensor.to_string(),
                    local_id: slot,
                    stamp,
                    limit: self.config.max_tracks,
                };
                st.stats.capacity_rejected += 1;
                return Err(err);
            }
            ids.insert(slot);
        }
        st.stats.published += 1;
        if stamp < st.newest {
            st.stats.reordered += 1;
        }
        st.newest = st.newest.max(stamp);
        let seq = st.seq;
        st.seq += 1;
        st.pending.push(Reverse(Pending { stamp, seq, msg }));
        let horizon = st.newest - self.config.reorder_window;
        self.release(&mut st, horizon);
        Ok(())
    }

    /// Delivers everything still held in the reordering window.
    pub fn flush(&self) {
        let mut st = self.lock();
        self.release(&mut st, f64::INFINITY);
    }

    /// Flushes and disconnects subscribers. Later publishes fail.
    pub fn close(&self) {
        let mut st = self.lock();
        self.release(&mut st, f64::INFINITY);
        st.closed = true;
        st.subscribers.clear();
    }

    /// New subscription. Retained messages are replayed first.
    pub fn subscribe(&self) -> Subscription<M> {
        let (tx, rx) = mpsc::channel();
        let mut st = self.lock();
        for m in &st.retained {
            let _ = tx.send(m.clone());
        }
        if !st.closed {
            st.subscribers.push(tx);
        }
        Subscription { rx }
    }

    /// Copy of the retained buffer, oldest first.
    pub fn retained(&self) -> Vec<M> {
        self.lock().retained.iter().cloned().collect()
    }

    pub fn stats(&self) -> TopicStats {
        self.lock().stats
    }

    fn release(&self, st: &mut State<M>, horizon: f64) {
        while st.pending.peek().is_some_and(|Reverse(p)| p.stamp <= horizon) {
            let Reverse(p) = st.pending.pop().expect("peeked");
            st.released = p.stamp;
            st.subscribers.retain(|tx| tx.send(p.msg.clone()).is_ok());
            st.stats.delivered += 1;
            if self.config.retain > 0 {
                if st.retained.len() == self.config.retain {
                    st.retained.pop_front();
                }
                st.retained.push_back(p.msg);
            }
        }
        // frames older than anything that can still be accepted are settled
        let floor = ((st.released - self.config.frame_tolerance) / self.config.frame_tolerance).floor() as i64;
        if st.released.is_finite() {
            for frames in st.frames.values_mut() {
                *frames = frames.split_off(&floor);
            }
        }
    }
}

/// Registry of topics by name.
pub struct TopicBus<M: Message> {
    config: TopicConfig,
    topics: Mutex<BTreeMap<String, Arc<Topic<M>>>>,
}

impl<M: Message> TopicBus<M> {
    pub fn new(config: TopicConfig) -> Self {
        Self { config, topics: Mutex::new(BTreeMap::new()) }
    }

    /// The topic called `name`, created on first use.
    pub fn topic(&self, name: &str) -> Arc<Topic<M>> {
        let mut topics = self.topics.lock().unwrap_or_else(|e| e.into_inner());
        topics.entry(name.to_string()).or_insert_with(|| Arc::new(Topic::new(name, self.config))).clone()
    }

    pub fn names(&self) -> Vec<String> {
        self.topics.lock().unwrap_or_else(|e| e.into_inner()).keys().cloned().collect()
    }

    pub fn close_all(&self) {
        for t in self.topics.lock().unwrap_or_else(|e| e.into_inner()).values() {
            t.close();
        }
    }
}

impl<M: Message> Default for TopicBus<M> {
    fn default() -> Self {
        Self::new(TopicConfig::default())
    }
}
