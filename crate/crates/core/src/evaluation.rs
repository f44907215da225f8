//! Duration-weighted sensitivity and specificity of zone occupancy.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::ambulatogram::Ambulatogram;
use crate::format::{percent_half_up, sig6};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("measured and reference ambulatograms differ in span, bin width or zones")]
    Mismatch,
    #[error("no covered zone to evaluate")]
    NoCoveredZones,
    #[error("zone `{0}` is not covered")]
    Uncovered(String),
    #[error("unknown zone `{0}`")]
    UnknownZone(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Label {
    TP,
    FP,
    TN,
    FN,
}

impl Label {
    pub fn of(measured: bool, reference: bool) -> Self {
        match (measured, reference) {
            (true, true) => Label::TP,
            (true, false) => Label::FP,
            (false, false) => Label::TN,
            (false, true) => Label::FN,
        }
    }
}

/// Seconds spent in each confusion cell.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Durations {
    pub tp: f64,
    pub fp: f64,
    pub tn: f64,
    #[serde(rename = "fn")]
    pub fn_: f64,
}

impl Durations {
    pub fn add(&mut self, label: Label, secs: f64) {
        match label {
            Label::TP => self.tp += secs,
            Label::FP => self.fp += secs,
            Label::TN => self.tn += secs,
            Label::FN => self.fn_ += secs,
        }
    }

    pub fn merged(&self, o: &Self) -> Self {
        Self { tp: self.tp + o.tp, fp: self.fp + o.fp, tn: self.tn + o.tn, fn_: self.fn_ + o.fn_ }
    }

    /// TP / (TP + FN); `None` without reference-occupied time.
    pub fn sensitivity(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// TN / (TN + FP); `None` without reference-empty time.
    pub fn specificity(&self) -> Option<f64> {
        ratio(self.tn, self.tn + self.fp)
    }
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num / den)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZoneBreakdown {
    pub zone: String,
    pub durations: Durations,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub label: String,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub totals: Durations,
    pub zones: Vec<ZoneBreakdown>,
}

impl EvalReport {
    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    fn from_zones(label: String, zones: Vec<ZoneBreakdown>) -> Self {
        let totals = zones.iter().fold(Durations::default(), |acc, z| acc.merged(&z.durations));
        Self { label, sensitivity: totals.sensitivity(), specificity: totals.specificity(), totals, zones }
    }
}

fn check(measured: &Ambulatogram, reference: &Ambulatogram, zone: &str) -> Result<usize, EvalError> {
    let i = measured.zone_index(zone).ok_or_else(|| EvalError::UnknownZone(zone.to_string()))?;
    if reference.zone_index(zone) != Some(i) {
        return Err(EvalError::Mismatch);
    }
    Ok(i)
}

fn same_bins(measured: &Ambulatogram, reference: &Ambulatogram) -> bool {
    measured.bin_width == reference.bin_width && measured.t0 == reference.t0 && measured.t1 == reference.t1
}

/// Per-bin confusion labels for one covered zone (occupied = count > 0).
pub fn confusion_timeline(
    measured: &Ambulatogram,
    reference: &Ambulatogram,
    zone: &str,
    covered: &[String],
) -> Result<Vec<Label>, EvalError> {
    if !same_bins(measured, reference) {
        return Err(EvalError::Mismatch);
    }
    let i = check(measured, reference, zone)?;
    if !covered.iter().any(|c| c == zone) {
        return Err(EvalError::Uncovered(zone.to_string()));
    }
    Ok(measured.counts[i].iter().zip(&reference.counts[i]).map(|(&m, &r)| Label::of(m > 0, r > 0)).collect())
}

/// Confusion durations over the covered zones, and the two ratios.
pub fn evaluate(measured: &Ambulatogram, reference: &Ambulatogram, covered: &[String]) -> Result<EvalReport, EvalError> {
    if !same_bins(measured, reference) {
        return Err(EvalError::Mismatch);
    }
    if covered.is_empty() {
        return Err(EvalError::NoCoveredZones);
    }
    let mut zones = Vec::with_capacity(covered.len());
    for zone in covered {
        let labels = confusion_timeline(measured, reference, zone, covered)?;
        let mut d = Durations::default();
        for (bin, l) in labels.into_iter().enumerate() {
            d.add(l, measured.bin_duration(bin));
        }
        zones.push(ZoneBreakdown { zone: zone.clone(), durations: d });
    }
    Ok(EvalReport::from_zones(String::new(), zones))
}

/// Sums durations zone by zone across runs and recomputes the ratios.
pub fn pooled(reports: &[EvalReport], label: &str) -> EvalReport {
    let mut zones: Vec<ZoneBreakdown> = Vec::new();
    for r in reports {
        for z in &r.zones {
            match zones.iter_mut().find(|x| x.zone == z.zone) {
                Some(x) => x.durations = x.durations.merged(&z.durations),
                None => zones.push(z.clone()),
            }
        }
    }
    EvalReport::from_zones(label.to_string(), zones)
}

/// Mean and sample standard deviation of the defined values. `None` when no
/// value is defined; the deviation is 0 for a single value.
pub fn mean_sd(values: &[Option<f64>]) -> Option<(f64, f64)> {
    let xs: Vec<f64> = values.iter().flatten().copied().collect();
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = if xs.len() > 1 { (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
    Some((mean, sd))
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{}%", percent_half_up(x)))
}

/// Two-column text table, integer percentages rounded half up.
pub fn table_text(rows: &[&EvalReport]) -> String {
    let w = rows.iter().map(|r| r.label.len()).max().unwrap_or(0).max(8);
    let mut s = format!("{:<w$}  {:>11}  {:>11}\n", "", "sensitivity", "specificity");
    for r in rows {
        let _ = writeln!(s, "{:<w$}  {:>11}  {:>11}", r.label, pct(r.sensitivity), pct(r.specificity));
    }
    s
}

pub const REPORT_CSV_HEADER: &str = "run,label,sensitivity,specificity,tp_s,fp_s,tn_s,fn_s";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), sig6)
}

/// One CSV row for a report. `run` is free text (a run number, `pooled`).
pub fn report_csv_row(run: &str, r: &EvalReport) -> String {
    let d = &r.totals;
    format!(
        "{run},{},{},{},{},{},{},{}",
        r.label,
        opt(r.sensitivity),
        opt(r.specificity),
        sig6(d.tp),
        sig6(d.fp),
        sig6(d.tn),
        sig6(d.fn_)
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn amb(rows: &[&[u32]]) -> Ambulatogram {
        let names = (0..rows.len()).map(|i| format!("z{i}")).collect();
        let mut a = Ambulatogram::zeros(names, 10.0, (0.0, 10.0 * rows[0].len() as f64)).unwrap();
        a.counts = rows.iter().map(|r| r.to_vec()).collect();
        a
    }

    fn cov(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("z{i}")).collect()
    }

    #[test]
    fn identical_is_perfect() {
        let x = amb(&[&[0, 1, 2, 0], &[1, 0, 0, 0]]);
        let r = evaluate(&x, &x, &cov(2)).unwrap();
        assert_eq!((r.sensitivity, r.specificity), (Some(1.0), Some(1.0)));
    }

    #[test]
    fn empty_measurement() {
        let reference = amb(&[&[0, 1, 1, 0]]);
        let measured = amb(&[&[0, 0, 0, 0]]);
        let r = evaluate(&measured, &reference, &cov(1)).unwrap();
        assert_eq!((r.sensitivity, r.specificity), (Some(0.0), Some(1.0)));
        assert_eq!(r.totals, Durations { tp: 0.0, fp: 0.0, tn: 20.0, fn_: 20.0 });
    }

    #[test]
    fn undefined_ratio_is_absent() {
        let x = amb(&[&[0, 0]]);
        let r = evaluate(&x, &x, &cov(1)).unwrap();
        assert_eq!((r.sensitivity, r.specificity), (None, Some(1.0)));
        assert!(table_text(&[&r.clone().labeled("raw")]).contains("NA"));
    }

    #[test]
    fn only_covered_zones_count() {
        let m = amb(&[&[1, 0], &[1, 1]]);
        let r = amb(&[&[1, 0], &[0, 0]]);
        let rep = evaluate(&m, &r, &cov(1)).unwrap();
        assert_eq!(rep.specificity, Some(1.0));
        assert!(matches!(confusion_timeline(&m, &r, "z1", &cov(1)), Err(EvalError::Uncovered(_))));
        assert_eq!(evaluate(&m, &r, &[]), Err(EvalError::NoCoveredZones));
    }

    #[test]
    fn timeline_labels() {
        let m = amb(&[&[1, 1, 0, 0]]);
        let r = amb(&[&[1, 0, 0, 1]]);
        assert_eq!(confusion_timeline(&m, &r, "z0", &cov(1)).unwrap(), vec![Label::TP, Label::FP, Label::TN, Label::FN]);
    }

    #[test]
    fn pooled_and_mean() {
        let a = evaluate(&amb(&[&[1, 1, 0, 0]]), &amb(&[&[1, 0, 0, 1]]), &cov(1)).unwrap();
        let b = evaluate(&amb(&[&[1, 1, 1, 1]]), &amb(&[&[1, 1, 1, 1]]), &cov(1)).unwrap();
        let p = pooled(&[a.clone(), b.clone()], "pooled");
        // TP 10+40, FN 10, TN 10, FP 10
        assert_eq!(p.sensitivity, Some(50.0 / 60.0));
        assert_eq!(p.specificity, Some(0.5));
        let (m, sd) = mean_sd(&[a.sensitivity, b.sensitivity]).unwrap();
        assert!((m - 0.75).abs() < 1e-12);
        assert!((sd - (0.125f64).sqrt()).abs() < 1e-12);
        assert_eq!(mean_sd(&[None]), None);
    }

    #[test]
    fn table_layout() {
        let mut raw = evaluate(&amb(&[&[1, 1, 0, 0]]), &amb(&[&[1, 0, 0, 1]]), &cov(1)).unwrap().labeled("raw");
        raw.sensitivity = Some(0.785);
        let t = table_text(&[&raw]);
        assert_eq!(t.lines().nth(1).unwrap(), "raw               79%          50%");
        assert_eq!(report_csv_row("1", &raw), "1,raw,0.785,0.5,10,10,10,10");
    }
}
