use std::collections::{BTreeMap, BTreeSet};

use copresence::ambulatogram::{build, reference_ambulatogram, Ambulatogram, PresenceInterval};
use copresence::evaluation::{evaluate, pooled};
use copresence::geometry::{Point2, Vec3};
use copresence::track::{PersonKey, Sample, TrackSequence};
use copresence::zones::ZoneMap;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SPAN: (f64, f64) = (0.0, 120.0);
const BIN: f64 = 5.0;

/// Random 10 Hz sequences hopping between zone anchors.
fn sequences(seed: u64, map: &ZoneMap) -> Vec<TrackSequence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let anchors: Vec<Point2<f64>> = map.zones.iter().map(|z| z.centroid()).collect();
    (0..rng.random_range(1..8u32))
        .map(|id| {
            let start = rng.random_range(0..1000usize);
            let n = rng.random_range(1..200usize);
            let mut zone = rng.random_range(0..anchors.len());
            let samples = (start..start + n)
                .map(|k| {
                    if rng.random_bool(0.03) {
                        zone = rng.random_range(0..anchors.len());
                    }
                    let a = anchors[zone];
                    Sample { stamp: k as f64 / 10.0, position: Vec3::new(a.x, a.y, 1.0) }
                })
                .collect();
            TrackSequence::new(PersonKey::new(["k1", "k2"][id as usize % 2], id), samples)
        })
        .collect()
}

/// Per bin and key, the zone holding most of the key's samples (ties to the
/// earlier zone); counts distinct keys per zone.
fn majority_oracle(seqs: &[TrackSequence], map: &ZoneMap) -> Vec<Vec<u32>> {
    let n = ((SPAN.1 - SPAN.0) / BIN).ceil() as usize;
    let mut votes: BTreeMap<(PersonKey, usize), Vec<usize>> = BTreeMap::new();
    for s in seqs {
        for smp in &s.samples {
            if smp.stamp < SPAN.0 || smp.stamp >= SPAN.1 {
                continue;
            }
            let Some(z) = map.classify_index(smp.position.xy()) else { continue };
            let bin = ((smp.stamp - SPAN.0) / BIN).floor() as usize;
            votes.entry((s.person_key.clone(), bin)).or_insert_with(|| vec![0; map.len()])[z] += 1;
        }
    }
    let mut counts = vec![vec![0u32; n]; map.len()];
    for ((_, bin), v) in votes {
        let best = v.iter().copied().max().unwrap();
        let z = v.iter().position(|&c| c == best).unwrap();
        counts[z][bin] += 1;
    }
    counts
}

fn intervals(seed: u64, map: &ZoneMap) -> Vec<PresenceInterval> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = map.names();
    let mut out = Vec::new();
    for p in 0..rng.random_range(1..5) {
        let mut t = rng.random_range(0.0..20.0);
        while t < SPAN.1 {
            let len = rng.random_range(0.5..30.0);
            if rng.random_bool(0.8) {
                out.push(PresenceInterval {
                    person: format!("p{p}"),
                    zone: names[rng.random_range(0..names.len())].clone(),
                    t_start: t,
                    t_end: (t + len).min(SPAN.1),
                });
            }
            t += len;
        }
    }
    out
}

/// Distinct persons whose interval overlaps the bin by a positive length.
fn overlap_oracle(ivs: &[PresenceInterval], map: &ZoneMap) -> Vec<Vec<u32>> {
    let n = ((SPAN.1 - SPAN.0) / BIN).ceil() as usize;
    let names = map.names();
    (0..names.len())
        .map(|z| {
            (0..n)
                .map(|b| {
                    let (lo, hi) = (b as f64 * BIN, ((b + 1) as f64 * BIN).min(SPAN.1));
                    ivs.iter()
                        .filter(|iv| iv.zone == names[z] && iv.t_start.max(lo) < iv.t_end.min(hi))
                        .map(|iv| iv.person.as_str())
                        .collect::<BTreeSet<_>>()
                        .len() as u32
                })
                .collect()
        })
        .collect()
}

fn random_amb(rng: &mut ChaCha8Rng, zones: &[String]) -> Ambulatogram {
    let mut a = Ambulatogram::zeros(zones.to_vec(), BIN, SPAN).unwrap();
    for row in &mut a.counts {
        for c in row.iter_mut() {
            *c = if rng.random_bool(0.4) { rng.random_range(1..4) } else { 0 };
        }
    }
    a
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn build_matches_majority_oracle_and_ignores_order(seed in any::<u64>()) {
        let map = ZoneMap::livinlab();
        let mut seqs = sequences(seed, &map);
        let a = build(&seqs, &map, BIN, SPAN).unwrap();
        prop_assert_eq!(&a.counts, &majority_oracle(&seqs, &map));
        seqs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 1));
        prop_assert_eq!(build(&seqs, &map, BIN, SPAN).unwrap(), a);
    }

    #[test]
    fn reference_matches_overlap_oracle_and_ignores_order(seed in any::<u64>()) {
        let map = ZoneMap::livinlab();
        let mut ivs = intervals(seed, &map);
        let a = reference_ambulatogram(&ivs, &map, BIN, SPAN).unwrap();
        prop_assert_eq!(&a.counts, &overlap_oracle(&ivs, &map));
        ivs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 2));
        prop_assert_eq!(reference_ambulatogram(&ivs, &map, BIN, SPAN).unwrap(), a);
    }

    #[test]
    fn swapping_inputs_swaps_fp_and_fn(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let zones: Vec<String> = (0..4).map(|i| format!("z{i}")).collect();
        let (m, r) = (random_amb(&mut rng, &zones), random_amb(&mut rng, &zones));
        let covered = &zones[..3];
        let mr = evaluate(&m, &r, covered).unwrap();
        let rm = evaluate(&r, &m, covered).unwrap();
        prop_assert_eq!(mr.totals.tp, rm.totals.tp);
        prop_assert_eq!(mr.totals.tn, rm.totals.tn);
        prop_assert_eq!(mr.totals.fp, rm.totals.fn_);
        prop_assert_eq!(mr.totals.fn_, rm.totals.fp);

        // durations by direct count
        let (mut tp, mut fp, mut tn, mut fn_) = (0.0, 0.0, 0.0, 0.0);
        for z in 0..3 {
            for b in 0..m.n_bins() {
                let slot = match (m.counts[z][b] > 0, r.counts[z][b] > 0) {
                    (true, true) => &mut tp,
                    (true, false) => &mut fp,
                    (false, false) => &mut tn,
                    (false, true) => &mut fn_,
                };
                *slot += BIN;
            }
        }
        prop_assert_eq!((mr.totals.tp, mr.totals.fp, mr.totals.tn, mr.totals.fn_), (tp, fp, tn, fn_));
        prop_assert_eq!(mr.sensitivity, (tp + fn_ > 0.0).then(|| tp / (tp + fn_)));
        prop_assert_eq!(mr.specificity, (tn + fp > 0.0).then(|| tn / (tn + fp)));
    }

    #[test]
    fn identities(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let zones: Vec<String> = (0..3).map(|i| format!("z{i}")).collect();
        let x = random_amb(&mut rng, &zones);
        let occupied = x.counts.iter().flatten().any(|&c| c > 0);
        let empty_bins = x.counts.iter().flatten().any(|&c| c == 0);
        prop_assume!(occupied && empty_bins);
        let same = evaluate(&x, &x, &zones).unwrap();
        prop_assert_eq!((same.sensitivity, same.specificity), (Some(1.0), Some(1.0)));
        let nothing = Ambulatogram::zeros(zones.clone(), BIN, SPAN).unwrap();
        let none = evaluate(&nothing, &x, &zones).unwrap();
        prop_assert_eq!((none.sensitivity, none.specificity), (Some(0.0), Some(1.0)));
    }

    #[test]
    fn pooling_sums_durations(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let zones: Vec<String> = (0..3).map(|i| format!("z{i}")).collect();
        let reports: Vec<_> = (0..3)
            .map(|_| evaluate(&random_amb(&mut rng, &zones), &random_amb(&mut rng, &zones), &zones).unwrap())
            .collect();
        let p = pooled(&reports, "all");
        let tp: f64 = reports.iter().map(|r| r.totals.tp).sum();
        let fn_: f64 = reports.iter().map(|r| r.totals.fn_).sum();
        prop_assert!((p.totals.tp - tp).abs() < 1e-9);
        prop_assert!((p.totals.fn_ - fn_).abs() < 1e-9);
    }

    #[test]
    fn csv_round_trip(seed in any::<u64>()) {
        let map = ZoneMap::livinlab();
        let a = build(&sequences(seed, &map), &map, BIN, SPAN).unwrap();
        prop_assert_eq!(Ambulatogram::from_csv(&a.to_csv(), BIN, SPAN).unwrap(), a);
    }
}
