//! Per-zone people-count timelines, measured and reference, and the
//! co-presence runs read off them.

mod svg;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use svg::{render_svg, SvgStyle};

use crate::format::sig6;
use crate::track::{PersonKey, TrackSequence};
use crate::zones::ZoneMap;

pub const CSV_HEADER: &str = "zone,bin_start_s,count";

#[derive(Debug, Error)]
pub enum AmbulatogramError {
    #[error("bin width must be > 0, got {0}")]
    BinWidth(f64),
    #[error("span [{0}, {1}] is empty or not finite")]
    Span(f64, f64),
    #[error("unknown zone `{0}`")]
    UnknownZone(String),
    #[error("interval for `{person}` in `{zone}` has t_start {t_start} >= t_end {t_end}")]
    EmptyInterval { person: String, zone: String, t_start: f64, t_end: f64 },
    #[error("intervals for `{person}` overlap around t={at}")]
    Overlap { person: String, at: f64 },
    #[error("ambulatograms differ in span, bin width or zones")]
    Mismatch,
    #[error("CSV line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
}

/// Distinct-people count per zone per time bin. Bins are `[t0 + k·w,
/// t0 + (k+1)·w)`; the last one is cut at `t1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ambulatogram {
    pub bin_width: f64,
    pub t0: f64,
    pub t1: f64,
    pub zones: Vec<String>,
    /// `counts[zone][bin]`, zones in map order.
    pub counts: Vec<Vec<u32>>,
}

impl Ambulatogram {
    pub fn zeros(zones: Vec<String>, bin_width: f64, span: (f64, f64)) -> Result<Self, AmbulatogramError> {
        let (t0, t1) = span;
        if !(bin_width > 0.0) || !bin_width.is_finite() {
            return Err(AmbulatogramError::BinWidth(bin_width));
        }
        if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
            return Err(AmbulatogramError::Span(t0, t1));
        }
        let n = bin_count(bin_width, t0, t1);
        Ok(Self { bin_width, t0, t1, counts: vec![vec![0; n]; zones.len()], zones })
    }

    pub fn n_bins(&self) -> usize {
        self.counts.first().map_or_else(|| bin_count(self.bin_width, self.t0, self.t1), Vec::len)
    }

    pub fn bin_start(&self, bin: usize) -> f64 {
        self.t0 + bin as f64 * self.bin_width
    }

    pub fn bin_end(&self, bin: usize) -> f64 {
        (self.t0 + (bin + 1) as f64 * self.bin_width).min(self.t1)
    }

    pub fn bin_duration(&self, bin: usize) -> f64 {
        self.bin_end(bin) - self.bin_start(bin)
    }

    /// Bin holding stamp `t`, if inside the span.
    pub fn bin_of(&self, t: f64) -> Option<usize> {
        if t < self.t0 || t >= self.t1 {
            return None;
        }
        Some((((t - self.t0) / self.bin_width).floor() as usize).min(self.n_bins() - 1))
    }

    pub fn zone_index(&self, zone: &str) -> Option<usize> {
        self.zones.iter().position(|z| z == zone)
    }

    pub fn row(&self, zone: &str) -> Option<&[u32]> {
        self.zone_index(zone).map(|i| self.counts[i].as_slice())
    }

    /// Same bins and zones.
    pub fn same_shape(&self, o: &Self) -> bool {
        self.bin_width == o.bin_width && self.t0 == o.t0 && self.t1 == o.t1 && self.zones == o.zones
    }

    pub fn max_count(&self) -> u32 {
        self.counts.iter().flatten().copied().max().unwrap_or(0)
    }

    /// One row per zone and bin, zones in map order.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(32 * self.zones.len() * self.n_bins() + 32);
        s.push_str(CSV_HEADER);
        s.push('\n');
        for (zone, row) in self.zones.iter().zip(&self.counts) {
            for (bin, c) in row.iter().enumerate() {
                let _ = writeln!(s, "{zone},{},{c}", sig6(self.bin_start(bin)));
            }
        }
        s
    }

    /// Reads what [`Ambulatogram::to_csv`] wrote. The bin grid is not
    /// recoverable from the rows alone, so it is passed in and every row has
    /// to sit on it; each zone needs one row per bin.
    pub fn from_csv(text: &str, bin_width: f64, span: (f64, f64)) -> Result<Self, AmbulatogramError> {
        let mut amb = Self::zeros(Vec::new(), bin_width, span)?;
        let n = amb.n_bins();
        let mut seen: Vec<Vec<bool>> = Vec::new();
        let bad = |line: usize, message: String| AmbulatogramError::Csv { line, message };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == CSV_HEADER => {}
            _ => return Err(bad(1, format!("expected header `{CSV_HEADER}`"))),
        }
        for (i, line) in lines {
            let ln = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 3 {
                return Err(bad(ln, format!("expected 3 fields, got {}", f.len())));
            }
            let start: f64 = f[1].parse().map_err(|_| bad(ln, format!("bad bin start `{}`", f[1])))?;
            let count: u32 = f[2].parse().map_err(|_| bad(ln, format!("bad count `{}`", f[2])))?;
            let k = ((start - amb.t0) / bin_width).round();
            let on_grid = k >= 0.0 && (k as usize) < n && {
                let expect = amb.bin_start(k as usize);
                (expect - start).abs() <= 1e-6 * expect.abs().max(1.0)
            };
            if !on_grid {
                return Err(bad(ln, format!("bin start {start} is not on the grid")));
            }
            let z = match amb.zone_index(f[0]) {
                Some(z) => z,
                None => {
                    amb.zones.push(f[0].to_string());
                    amb.counts.push(vec![0; n]);
                    seen.push(vec![false; n]);
                    amb.zones.len() - 1
                }
            };
            if std::mem::replace(&mut seen[z][k as usize], true) {
                return Err(bad(ln, format!("zone `{}` bin {start} repeated", f[0])));
            }
            amb.counts[z][k as usize] = count;
        }
        if let Some(z) = seen.iter().position(|r| r.iter().any(|s| !s)) {
            return Err(bad(0, format!("zone `{}` is missing bins", amb.zones[z])));
        }
        Ok(amb)
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), AmbulatogramError> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Keeps only the named zones, in the given order.
    pub fn restricted(&self, zones: &[String]) -> Result<Self, AmbulatogramError> {
        let counts = zones
            .iter()
            .map(|z| self.row(z).map(<[u32]>::to_vec).ok_or_else(|| AmbulatogramError::UnknownZone(z.clone())))
            .collect::<Result<_, _>>()?;
        Ok(Self { zones: zones.to_vec(), counts, ..self.clone() })
    }
}

fn bin_count(w: f64, t0: f64, t1: f64) -> usize {
    let n = ((t1 - t0) / w).ceil() as usize;
    // guard against (t1 - t0) / w landing a hair above an integer
    if n > 1 && t0 + (n - 1) as f64 * w >= t1 {
        n - 1
    } else {
        n.max(1)
    }
}

/// Index of the largest value, first on ties.
fn argmax<T: PartialOrd + Copy>(xs: &[T]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &x) in xs.iter().enumerate() {
        if best.is_none_or(|b| x > xs[b]) {
            best = Some(i);
        }
    }
    best
}

/// Counts, for each zone and bin, the person keys with at least one sample in
/// that zone during the bin. A key sampled in several zones within one bin is
/// counted once, in the zone holding most of its samples (ties go to the
/// zone listed first in the map). Samples outside every zone or outside the
/// span are ignored.
pub fn build(
    seqs: &[TrackSequence],
    map: &ZoneMap,
    bin_width: f64,
    span: (f64, f64),
) -> Result<Ambulatogram, AmbulatogramError> {
    let mut amb = Ambulatogram::zeros(map.names(), bin_width, span)?;
    let nz = map.len();
    let mut votes: BTreeMap<(&PersonKey, usize), Vec<u32>> = BTreeMap::new();
    for seq in seqs {
        for s in &seq.samples {
            let (Some(bin), Some(z)) = (amb.bin_of(s.stamp), map.classify_index(s.position.xy())) else {
                continue;
            };
            votes.entry((&seq.person_key, bin)).or_insert_with(|| vec![0; nz])[z] += 1;
        }
    }
    for ((_, bin), v) in votes {
        if let Some(z) = argmax(&v) {
            amb.counts[z][bin] += 1;
        }
    }
    Ok(amb)
}

/// Ground truth: one person in one zone over `[t_start, t_end)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresenceInterval {
    pub person: String,
    pub zone: String,
    pub t_start: f64,
    pub t_end: f64,
}

/// Checks zones exist, intervals are non-empty and no person is in two
/// places at once.
pub fn validate_intervals(intervals: &[PresenceInterval], map: &ZoneMap) -> Result<(), AmbulatogramError> {
    let mut by_person: BTreeMap<&str, Vec<&PresenceInterval>> = BTreeMap::new();
    for iv in intervals {
        if map.index_of(&iv.zone).is_none() {
            return Err(AmbulatogramError::UnknownZone(iv.zone.clone()));
        }
        if !(iv.t_start < iv.t_end) {
            return Err(AmbulatogramError::EmptyInterval {
                person: iv.person.clone(),
                zone: iv.zone.clone(),
                t_start: iv.t_start,
                t_end: iv.t_end,
            });
        }
        by_person.entry(&iv.person).or_default().push(iv);
    }
    for (person, mut list) in by_person {
        list.sort_by(|a, b| a.t_start.total_cmp(&b.t_start));
        if let Some(w) = list.windows(2).find(|w| w[1].t_start < w[0].t_end) {
            return Err(AmbulatogramError::Overlap { person: person.to_string(), at: w[1].t_start });
        }
    }
    Ok(())
}

/// Counts from ground-truth intervals. A person counts in every zone they
/// occupied for any part of the bin, so a bin in which someone crosses from
/// one zone into another shows them in both.
pub fn reference_ambulatogram(
    intervals: &[PresenceInterval],
    map: &ZoneMap,
    bin_width: f64,
    span: (f64, f64),
) -> Result<Ambulatogram, AmbulatogramError> {
    validate_intervals(intervals, map)?;
    let mut amb = Ambulatogram::zeros(map.names(), bin_width, span)?;
    let mut present: BTreeSet<(&str, usize, usize)> = BTreeSet::new();
    for iv in intervals {
        let z = map.index_of(&iv.zone).expect("validated");
        let a = iv.t_start.max(amb.t0);
        let b = iv.t_end.min(amb.t1);
        if a >= b {
            continue;
        }
        let first = amb.bin_of(a).expect("inside span");
        let last = amb.bin_of(b).unwrap_or(amb.n_bins() - 1);
        for bin in first..=last {
            let overlap = b.min(amb.bin_end(bin)) - a.max(amb.bin_start(bin));
            if overlap > 0.0 {
                present.insert((&iv.person, z, bin));
            }
        }
    }
    for (_, z, bin) in present {
        amb.counts[z][bin] += 1;
    }
    Ok(amb)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CopresenceRun {
    pub t_start: f64,
    pub t_end: f64,
    pub max_count: u32,
}

/// Maximal runs of bins where at least two people share `zone`, kept when
/// they last at least `min_duration` seconds.
pub fn copresence(amb: &Ambulatogram, zone: &str, min_duration: f64) -> Result<Vec<CopresenceRun>, AmbulatogramError> {
    let row = amb.row(zone).ok_or_else(|| AmbulatogramError::UnknownZone(zone.to_string()))?;
    let mut out = Vec::new();
    let mut bin = 0;
    while bin < row.len() {
        if row[bin] < 2 {
            bin += 1;
            continue;
        }
        let start = bin;
        while bin < row.len() && row[bin] >= 2 {
            bin += 1;
        }
        let run = CopresenceRun {
            t_start: amb.bin_start(start),
            t_end: amb.bin_end(bin - 1),
            max_count: row[start..bin].iter().copied().max().expect("non-empty run"),
        };
        if run.t_end - run.t_start >= min_duration - 1e-9 * amb.bin_width {
            out.push(run);
        }
    }
    Ok(out)
}

/// Writes `<stem>.csv` with the measured counts and `<stem>.svg` with
/// measured above reference.
pub fn render(
    measured: &Ambulatogram,
    reference: &Ambulatogram,
    stem: &Path,
    style: &SvgStyle,
) -> Result<(), AmbulatogramError> {
    let svg = render_svg(measured, reference, style)?;
    measured.write_csv(&stem.with_extension("csv"))?;
    std::fs::write(stem.with_extension("svg"), svg)?;
    Ok(())
}
