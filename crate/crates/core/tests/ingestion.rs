use std::collections::BTreeMap;
use std::sync::Arc;
use std::thread;

use copresence::geometry::Vec3;
use copresence::ingestion::{self, jsonl, segment, Detection, SegmentConfig, Topic, TopicConfig};
use copresence::simulator::{simulate, NoiseModel, ScenarioScript, SensorsFile};
use copresence::track::{PersonKey, TrackSample};
use copresence::transform::TransformTree;
use copresence::zones::ZoneMap;
use proptest::prelude::*;

fn samples() -> impl Strategy<Value = Vec<TrackSample>> {
    // per key: sorted distinct stamps with occasional long gaps
    prop::collection::vec(prop::collection::vec((1u32..30, prop::bool::weighted(0.1)), 1..60), 1..5).prop_map(|keys| {
        let mut out = Vec::new();
        for (id, steps) in keys.into_iter().enumerate() {
            let mut t = 0.0;
            for (dt, long) in steps {
                t += dt as f64 * 0.1 + if long { 5.0 } else { 0.0 };
                out.push(TrackSample {
                    person_key: PersonKey::new("k", id as u32),
                    stamp: t,
                    position: Vec3::new(t, id as f64, 1.0),
                });
            }
        }
        out.sort_by(|a, b| a.stamp.total_cmp(&b.stamp));
        out
    })
}

proptest! {
    #[test]
    fn segmentation_partitions_the_samples(s in samples(), gap in 0.5f64..4.0) {
        let cfg = SegmentConfig { gap_threshold: gap, ..SegmentConfig::default() };
        let seqs = segment(&s, &cfg).unwrap();
        let mut seen: BTreeMap<(PersonKey, u64), usize> = BTreeMap::new();
        for q in &seqs {
            for w in q.samples.windows(2) {
                prop_assert!(w[1].stamp > w[0].stamp);
                prop_assert!(w[1].stamp - w[0].stamp <= gap);
            }
            for smp in &q.samples {
                *seen.entry((q.person_key.clone(), smp.stamp.to_bits())).or_default() += 1;
            }
        }
        prop_assert_eq!(seen.len(), s.len());
        prop_assert!(seen.values().all(|&c| c == 1));
        for x in &s {
            prop_assert!(seen.contains_key(&(x.person_key.clone(), x.stamp.to_bits())));
        }
        // consecutive sequences of one key are split by more than the gap
        let mut by_key: BTreeMap<&PersonKey, Vec<(f64, f64)>> = BTreeMap::new();
        for q in &seqs {
            by_key.entry(&q.person_key).or_default().push((q.t_start(), q.t_end()));
        }
        for spans in by_key.values() {
            for w in spans.windows(2) {
                prop_assert!(w[1].0 - w[0].1 > gap);
            }
        }
    }

    #[test]
    fn jsonl_round_trip_within_resolution(stamp in 0.0f64..1e5, p in [-50.0f64..50.0, -50.0f64..50.0, -5.0f64..5.0], id in 0u32..1000) {
        let d = Detection { sensor: "kinect2".into(), local_id: id, stamp, position: Vec3::new(p[0], p[1], p[2]) };
        let back = jsonl::parse_line(&jsonl::to_line(&d)).unwrap();
        prop_assert_eq!(&back.sensor, &d.sensor);
        prop_assert_eq!(back.local_id, id);
        prop_assert!((back.stamp - stamp).abs() <= 0.5e-3 + 1e-9);
        prop_assert!(back.position.distance(&d.position) <= 0.5e-4 * 3f64.sqrt() + 1e-9);
    }
}

fn replay_once(stream: &[Detection]) -> Vec<Detection> {
    let topic = Topic::new("detections", TopicConfig::default());
    let sub = topic.subscribe();
    ingestion::replay(stream, &topic, None).unwrap();
    topic.close();
    sub.collect()
}

#[test]
fn replaying_a_file_twice_gives_identical_sequences() {
    let map = ZoneMap::livinlab();
    let sf = SensorsFile::default_livinlab();
    let sensors = sf.configs().unwrap();
    let sim = simulate(&ScenarioScript::default_day(), &map, &sensors, &NoiseModel::default_livinlab(), 9).unwrap();
    let mut buf = Vec::new();
    jsonl::write(&mut buf, &sim.detections).unwrap();
    let tree = TransformTree::default();
    sf.build_tree(&tree).unwrap();

    let run = || {
        let read = jsonl::read(buf.as_slice(), true).unwrap();
        let got = replay_once(&read.detections);
        let (samples, dropped) = ingestion::project_all(&got, &tree);
        assert_eq!(dropped, 0);
        segment(&samples, &SegmentConfig::default()).unwrap()
    };
    let (a, b) = (run(), run());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn concurrent_publishers_deliver_one_sorted_stream() {
    let topic = Arc::new(Topic::new("detections", TopicConfig { reorder_window: 1e9, ..TopicConfig::default() }));
    let sub = topic.subscribe();
    let handles: Vec<_> = (0..4u32)
        .map(|s| {
            let topic = Arc::clone(&topic);
            thread::spawn(move || {
                for k in 0..500 {
                    let d = Detection {
                        sensor: format!("kinect{s}"),
                        local_id: 0,
                        stamp: k as f64 * 0.1,
                        position: Vec3::zero(),
                    };
                    topic.publish(d).unwrap();
                }
            })
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    topic.flush();
    topic.close();
    let got: Vec<Detection> = sub.collect();
    assert_eq!(got.len(), 2000);
    assert!(got.windows(2).all(|w| w[0].stamp <= w[1].stamp));
    assert_eq!(topic.stats().late_dropped, 0);
}
