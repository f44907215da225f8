//! Line-delimited JSON detection records.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{Detection, IngestError};
use crate::geometry::Vec3;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    sensor: String,
    local_id: u32,
    stamp: f64,
    x: f64,
    y: f64,
    z: f64,
}

/// One record, fixed decimals: stamps to the millisecond, positions to a
/// tenth of a millimeter.
pub fn to_line(d: &Detection) -> String {
    let sensor = serde_json::to_string(&d.sensor).expect("string serializes");
    format!(
        "{{\"sensor\":{sensor},\"local_id\":{},\"stamp\":{:.3},\"x\":{:.4},\"y\":{:.4},\"z\":{:.4}}}",
        d.local_id,
        d.stamp,
        fix_zero(d.position.x),
        fix_zero(d.position.y),
        fix_zero(d.position.z)
    )
}

// keeps "-0.0000" out of the files
fn fix_zero(v: f64) -> f64 {
    if v.abs() < 5e-5 {
        0.0
    } else {
        v
    }
}

pub fn parse_line(line: &str) -> Result<Detection, serde_json::Error> {
    let r: Record = serde_json::from_str(line)?;
    Ok(Detection { sensor: r.sensor, local_id: r.local_id, stamp: r.stamp, position: Vec3::new(r.x, r.y, r.z) })
}

pub fn write<W: Write>(mut out: W, dets: &[Detection]) -> std::io::Result<()> {
    for d in dets {
        writeln!(out, "{}", to_line(d))?;
    }
    out.flush()
}

/// Detections read from a stream plus the number of malformed lines skipped.
#[derive(Debug, Clone, Default)]
pub struct ReadOutcome {
    pub detections: Vec<Detection>,
    pub malformed: usize,
}

/// Reads every line. Blank lines are ignored. Malformed lines are counted and
/// skipped, or abort the read when `strict`.
pub fn read<R: BufRead>(input: R, strict: bool) -> Result<ReadOutcome, IngestError> {
    let mut out = ReadOutcome::default();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(&line) {
            Ok(d) if d.stamp.is_finite() && d.stamp >= 0.0 => out.detections.push(d),
            Ok(d) if strict => {
                return Err(IngestError::Malformed { line: i + 1, message: format!("bad stamp {}", d.stamp) })
            }
            Err(e) if strict => return Err(IngestError::Malformed { line: i + 1, message: e.to_string() }),
            _ => out.malformed += 1,
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(stamp: f64, x: f64) -> Detection {
        Detection { sensor: "kinect1".into(), local_id: 2, stamp, position: Vec3::new(x, -0.00001, 1.0) }
    }

    #[test]
    fn line_format() {
        assert_eq!(
            to_line(&det(12.3, 0.5)),
            r#"{"sensor":"kinect1","local_id":2,"stamp":12.300,"x":0.5000,"y":0.0000,"z":1.0000}"#
        );
    }

    #[test]
    fn round_trip_within_resolution() {
        let d = det(12.34567, 1.23456789);
        let back = parse_line(&to_line(&d)).unwrap();
        assert!((back.stamp - d.stamp).abs() <= 5e-4);
        assert!((back.position.x - d.position.x).abs() <= 5e-5);
    }

    #[test]
    fn malformed_lines_skip_or_abort() {
        let text = format!("{}\nnot json\n\n{}\n", to_line(&det(0.0, 1.0)), to_line(&det(0.1, 1.0)));
        let r = read(text.as_bytes(), false).unwrap();
        assert_eq!((r.detections.len(), r.malformed), (2, 1));
        assert!(matches!(read(text.as_bytes(), true), Err(IngestError::Malformed { line: 2, .. })));
    }
}
