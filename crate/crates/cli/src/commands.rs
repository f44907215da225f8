use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::thread;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use copresence::ambulatogram::{self, render_svg, Ambulatogram, PresenceInterval, SvgStyle};
use copresence::evaluation::{self, mean_sd, EvalReport, REPORT_CSV_HEADER};
use copresence::filter;
use copresence::ingestion::{self, jsonl, Detection, Topic, TopicConfig, TopicStats, DETECTIONS_TOPIC};
use copresence::pipeline::{self, PipelineCounts};
use copresence::simulator::{self, derive_seed, SenseStats};

use crate::config::{invalid, Inputs, RunConfig};

pub const DETECTIONS_FILE: &str = "detections.jsonl";
pub const INTERVALS_FILE: &str = "intervals.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const VERDICTS_FILE: &str = "verdicts.csv";
pub const RUN_REPORT_FILE: &str = "run_report.json";
pub const EVAL_FILE: &str = "eval.csv";
pub const REPORT_CSV: &str = "report.csv";
pub const REPORT_TXT: &str = "report.txt";

fn amb_file(kind: &str, ext: &str) -> String {
    format!("ambulatogram_{kind}.{ext}")
}

pub struct Ctx {
    pub cfg: RunConfig,
    pub inputs: Inputs,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct IntervalsFile {
    pub span: (f64, f64),
    pub intervals: Vec<PresenceInterval>,
}

#[derive(Debug, Serialize)]
struct InputPaths {
    zones: String,
    sensors: String,
    scenario: String,
    noise: String,
}

#[derive(Debug, Serialize)]
struct Manifest {
    run: usize,
    runs: usize,
    seed: u64,
    derived_seed: u64,
    config_sha256: String,
    inputs: InputPaths,
    sense: SenseStats,
}

#[derive(Debug, Serialize)]
struct RunReport {
    stream_lines_malformed: usize,
    topic: TopicStats,
    pipeline: PipelineCounts,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn shown(p: &Option<PathBuf>) -> String {
    p.as_ref().map_or_else(|| "bundled".to_string(), |p| p.display().to_string())
}

/// Runs `f` for every run index on its own thread; results come back in
/// run order and the first error wins.
pub fn for_each_run<T: Send>(runs: usize, f: impl Fn(usize) -> anyhow::Result<T> + Sync) -> anyhow::Result<Vec<T>> {
    thread::scope(|s| {
        let f = &f;
        let handles: Vec<_> = (0..runs).map(|k| s.spawn(move || f(k))).collect();
        handles.into_iter().map(|h| h.join().expect("run thread panicked")).collect()
    })
}

/// Simulates run `k` and writes its stream, reference and manifest.
pub fn simulate_run(ctx: &Ctx, k: usize) -> anyhow::Result<PathBuf> {
    let (cfg, inp) = (&ctx.cfg, &ctx.inputs);
    let derived = derive_seed(cfg.seed, k as u64);
    let sim = simulator::simulate(&inp.script, &inp.map, &inp.sensors, &inp.noise, derived)
        .map_err(|e| invalid(e.to_string()))?;
    let dir = cfg.run_dir(k);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;

    let path = dir.join(DETECTIONS_FILE);
    let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    jsonl::write(&mut w, &sim.detections)?;
    w.flush()?;
    write_json(&dir.join(INTERVALS_FILE), &IntervalsFile { span: sim.truth.span, intervals: sim.truth.intervals })?;
    let manifest = Manifest {
        run: k + 1,
        runs: cfg.runs,
        seed: cfg.seed,
        derived_seed: derived,
        config_sha256: inp.config_hash.clone(),
        inputs: InputPaths {
            zones: shown(&cfg.zones),
            sensors: shown(&cfg.sensors),
            scenario: shown(&cfg.scenario),
            noise: shown(&cfg.noise),
        },
        sense: sim.stats,
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;
    Ok(dir)
}

/// Pushes a stream through the detections topic, one publisher thread and
/// this thread consuming.
pub fn ingest(stream: &[Detection], speed: Option<f64>) -> anyhow::Result<(Vec<Detection>, TopicStats)> {
    let topic = Topic::new(DETECTIONS_TOPIC, TopicConfig::default());
    let sub = topic.subscribe();
    let received = thread::scope(|s| {
        let publisher = s.spawn(|| {
            let r = ingestion::replay(stream, &topic, speed);
            topic.close();
            r
        });
        let got: Vec<Detection> = sub.collect();
        publisher.join().expect("publisher panicked").map(|()| got)
    })
    .map_err(|e| invalid(e.to_string()))?;
    Ok((received, topic.stats()))
}

/// Runs the pipeline on one stream file and writes verdicts, raw and
/// filtered ambulatograms and the run report into `dir`.
pub fn run_stream(ctx: &Ctx, stream: &Path, dir: &Path) -> anyhow::Result<()> {
    let (cfg, inp) = (&ctx.cfg, &ctx.inputs);
    let file = File::open(stream).map_err(|e| invalid(format!("stream {}: {e}", stream.display())))?;
    let read = jsonl::read(BufReader::new(file), cfg.strict)
        .map_err(|e| invalid(format!("stream {}: {e}", stream.display())))?;
    let (dets, topic) = ingest(&read.detections, cfg.replay_speed())?;
    let out = pipeline::run(&dets, &inp.tree, &inp.map, inp.span()?, &cfg.pipeline)?;

    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_text(&dir.join(VERDICTS_FILE), &filter::verdicts_csv(&out.verdicts))?;
    out.raw.write_csv(&dir.join(amb_file("raw", "csv")))?;
    out.filtered.write_csv(&dir.join(amb_file("filtered", "csv")))?;
    let report = RunReport { stream_lines_malformed: read.malformed, topic, pipeline: out.counts };
    write_json(&dir.join(RUN_REPORT_FILE), &report)
}

fn load_intervals(dir: &Path) -> anyhow::Result<IntervalsFile> {
    let path = dir.join(INTERVALS_FILE);
    serde_json::from_str(&read_text(&path)?).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn load_measured(ctx: &Ctx, dir: &Path, kind: &str, span: (f64, f64)) -> anyhow::Result<Ambulatogram> {
    let path = dir.join(amb_file(kind, "csv"));
    let amb = Ambulatogram::from_csv(&read_text(&path)?, ctx.cfg.pipeline.bin_width, span)
        .map_err(|e| invalid(format!("{}: {e} (span or bin width mismatch?)", path.display())))?;
    if amb.zones != ctx.inputs.map.names() {
        return Err(invalid(format!("{}: zones differ from the zone map", path.display())));
    }
    Ok(amb)
}

fn reference(ctx: &Ctx, dir: &Path) -> anyhow::Result<Ambulatogram> {
    let ivs = load_intervals(dir)?;
    let map = &ctx.inputs.map;
    ambulatogram::validate_intervals(&ivs.intervals, map).map_err(|e| invalid(e.to_string()))?;
    ambulatogram::reference_ambulatogram(&ivs.intervals, map, ctx.cfg.pipeline.bin_width, ivs.span)
        .map_err(|e| invalid(e.to_string()))
}

/// Raw and filtered reports for the run in `dir`; also writes the
/// reference ambulatogram and a per-run CSV.
pub fn eval_run(ctx: &Ctx, dir: &Path, run: &str) -> anyhow::Result<(EvalReport, EvalReport)> {
    let reference = reference(ctx, dir)?;
    let span = (reference.t0, reference.t1);
    let covered = ctx.inputs.map.covered_names();
    let mut reports = Vec::with_capacity(2);
    for kind in ["raw", "filtered"] {
        let measured = load_measured(ctx, dir, kind, span)?;
        let r = evaluation::evaluate(&measured, &reference, &covered).map_err(|e| invalid(e.to_string()))?;
        reports.push(r.labeled(kind));
    }
    reference.write_csv(&dir.join(amb_file("reference", "csv")))?;
    let mut csv = format!("{REPORT_CSV_HEADER}\n");
    for r in &reports {
        csv.push_str(&evaluation::report_csv_row(run, r));
        csv.push('\n');
    }
    write_text(&dir.join(EVAL_FILE), &csv)?;
    let filtered = reports.pop().expect("two reports");
    Ok((reports.pop().expect("two reports"), filtered))
}

/// Measured-over-reference SVGs for the raw and filtered ambulatograms.
pub fn render_run(ctx: &Ctx, dir: &Path, run: &str) -> anyhow::Result<()> {
    let reference = reference(ctx, dir)?;
    let clock = ctx.inputs.script.clock().map_err(|e| invalid(e.to_string()))?;
    for kind in ["raw", "filtered"] {
        let measured = load_measured(ctx, dir, kind, (reference.t0, reference.t1))?;
        let style = SvgStyle {
            title: format!("run {run}, {kind}"),
            day_start_hours: clock.start_hours(),
            compression: clock.compression,
            ..SvgStyle::default()
        };
        let svg = render_svg(&measured, &reference, &style).map_err(|e| invalid(e.to_string()))?;
        write_text(&dir.join(amb_file(kind, "svg")), &svg)?;
    }
    Ok(())
}

fn pct1(v: Option<(f64, f64)>) -> String {
    v.map_or_else(|| "NA".to_string(), |(m, s)| format!("{:.1}% ± {:.1}%", 100.0 * m, 100.0 * s))
}

/// Writes `report.csv` and `report.txt` under the output directory and
/// returns the text.
pub fn write_report(cfg: &RunConfig, per_run: &[(EvalReport, EvalReport)]) -> anyhow::Result<String> {
    let raw: Vec<EvalReport> = per_run.iter().map(|r| r.0.clone()).collect();
    let filtered: Vec<EvalReport> = per_run.iter().map(|r| r.1.clone()).collect();
    let pooled_raw = evaluation::pooled(&raw, "raw");
    let pooled_filtered = evaluation::pooled(&filtered, "filtered");

    let mut csv = format!("{REPORT_CSV_HEADER}\n");
    for (k, (r, f)) in per_run.iter().enumerate() {
        for rep in [r, f] {
            csv.push_str(&evaluation::report_csv_row(&(k + 1).to_string(), rep));
            csv.push('\n');
        }
    }
    for rep in [&pooled_raw, &pooled_filtered] {
        csv.push_str(&evaluation::report_csv_row("pooled", rep));
        csv.push('\n');
    }

    let mut txt = format!("seed {}, {} run(s), pooled\n", cfg.seed, per_run.len());
    txt.push_str(&evaluation::table_text(&[&pooled_raw, &pooled_filtered]));
    if per_run.len() > 1 {
        let labeled: Vec<EvalReport> = per_run
            .iter()
            .enumerate()
            .flat_map(|(k, (r, f))| [r.clone().labeled(format!("run {} raw", k + 1)), f.clone().labeled(format!("run {} filtered", k + 1))])
            .collect();
        txt.push_str("\nper run\n");
        txt.push_str(&evaluation::table_text(&labeled.iter().collect::<Vec<_>>()));
        txt.push_str("\nmean ± sd over runs\n");
        for (label, reps) in [("raw", &raw), ("filtered", &filtered)] {
            let sens: Vec<_> = reps.iter().map(|r| r.sensitivity).collect();
            let spec: Vec<_> = reps.iter().map(|r| r.specificity).collect();
            txt.push_str(&format!(
                "{label:<8}  sensitivity {}  specificity {}\n",
                pct1(mean_sd(&sens)),
                pct1(mean_sd(&spec))
            ));
        }
    }
    fs::create_dir_all(&cfg.out)?;
    write_text(&cfg.out.join(REPORT_CSV), &csv)?;
    write_text(&cfg.out.join(REPORT_TXT), &txt)?;
    Ok(txt)
}
