//! Command-line front end: run the tracker over an image sequence, generate
//! synthetic scenarios, and score results against ground truth.
//!
//! Exit codes: 0 success, 1 failed `--assert` quality check, 2 usage or
//! input error.

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand};
use gentrack::eval::{evaluate, MetricsReport};
use gentrack::io;
use gentrack::synth;
use gentrack::track::{Detection, FrameInput, TrackOutput, TrackStatus};
use gentrack::{GrayImage, Tracker, Variant};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gentrack", about = "Hybrid stochastic/deterministic multi-object tracker")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Track detections over an image sequence and write a results file.
    Track {
        /// Directory of numbered PGM/PPM frames.
        #[arg(long)]
        frames: PathBuf,
        /// Detection file (frame,id,left,top,w,h,conf,x,y,z).
        #[arg(long)]
        dets: PathBuf,
        /// Configuration file (key = value).
        #[arg(long)]
        config: PathBuf,
        /// Output results file.
        #[arg(long)]
        out: PathBuf,
        /// Override the configured variant (basic | pso | pso_social).
        #[arg(long)]
        variant: Option<String>,
        /// Override the configured RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write per-frame annotated PGM renderings into this directory.
        #[arg(long)]
        annotate: Option<PathBuf>,
    },
    /// Generate a synthetic scenario: frames/, gt.txt and det.txt.
    Synth {
        /// Preset name: crossing | occlusion5 | churn10.
        #[arg(long)]
        preset: String,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Score a results file against ground truth (MOTA / IDF1 / IDSW).
    Eval {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        hyp: PathBuf,
        /// IoU threshold for box matching.
        #[arg(long, default_value_t = 0.5)]
        iou_thresh: f64,
        /// Comma-separated quality assertions, e.g. "mota>=95,idsw<=1".
        /// Violations exit with code 1.
        #[arg(long)]
        assert: Option<String>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Track { frames, dets, config, out, variant, seed, annotate } => {
            cmd_track(&frames, &dets, &config, &out, variant.as_deref(), seed, annotate.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Synth { preset, out, seed } => {
            cmd_synth(&preset, &out, seed)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval { gt, hyp, iou_thresh, assert } => cmd_eval(&gt, &hyp, iou_thresh, assert.as_deref()),
    }
}

fn cmd_track(
    frames_dir: &Path,
    dets_path: &Path,
    config_path: &Path,
    out_path: &Path,
    variant: Option<&str>,
    seed: Option<u64>,
    annotate: Option<&Path>,
) -> anyhow::Result<()> {
    let variant = variant
        .map(|v| Variant::parse(v).ok_or_else(|| anyhow!("unknown variant '{v}'")))
        .transpose()?;
    let mut cfg = io::read_config(config_path, variant)
        .with_context(|| format!("reading config {}", config_path.display()))?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let sequence = io::load_frames(frames_dir)
        .with_context(|| format!("loading frames from {}", frames_dir.display()))?;
    if sequence.is_empty() {
        bail!("no frames found in {}", frames_dir.display());
    }
    let detections = io::read_detections(dets_path)
        .with_context(|| format!("reading detections {}", dets_path.display()))?;

    if let Some(dir) = annotate {
        std::fs::create_dir_all(dir)?;
    }

    let mut tracker = Tracker::new(cfg)?;
    let mut outputs: Vec<TrackOutput> = Vec::new();
    for (index, image) in sequence.iter().enumerate() {
        let image = image?;
        let frame = FrameInput {
            index: index as u64,
            image,
            detections: detections.get(&(index as u64)).cloned().unwrap_or_default(),
        };
        let frame_outputs = tracker.step(&frame)?;
        if let Some(dir) = annotate {
            let rendered =
                annotate_frame(&frame.image, &frame_outputs, tracker.unmatched_detections());
            io::write_pgm(&dir.join(format!("{:06}.pgm", index + 1)), &rendered)?;
        }
        outputs.extend(frame_outputs);
    }
    io::write_results(out_path, &outputs)?;
    Ok(())
}

/// Box outlines in status-coded gray levels: strong 255, recovered weak 200,
/// weak 140, unmatched detections 60.
fn annotate_frame(
    image: &GrayImage,
    outputs: &[TrackOutput],
    unmatched: &[Detection],
) -> GrayImage {
    let mut img = image.clone();
    for det in unmatched {
        draw_box(&mut img, &det.bbox, 60);
    }
    for t in outputs {
        let level = match (t.status, t.recovered) {
            (TrackStatus::Weak, true) => 200,
            (TrackStatus::Weak, false) => 140,
            _ => 255,
        };
        draw_box(&mut img, &t.bbox, level);
    }
    img
}

fn draw_box(img: &mut GrayImage, bbox: &gentrack::BBox, level: u8) {
    let clamp_x = |x: f64| (x.round() as i64).clamp(0, img.width() as i64 - 1) as u32;
    let clamp_y = |y: f64| (y.round() as i64).clamp(0, img.height() as i64 - 1) as u32;
    let (x0, x1) = (clamp_x(bbox.left()), clamp_x(bbox.right()));
    let (y0, y1) = (clamp_y(bbox.top()), clamp_y(bbox.bottom()));
    for x in x0..=x1 {
        img.set(x, y0, level);
        img.set(x, y1, level);
    }
    for y in y0..=y1 {
        img.set(x0, y, level);
        img.set(x1, y, level);
    }
}

fn cmd_synth(preset: &str, out_dir: &Path, seed: u64) -> anyhow::Result<()> {
    let scenario = synth::preset(preset, seed)?;
    let generated = synth::generate(&scenario);
    let frames_dir = out_dir.join("frames");
    std::fs::create_dir_all(&frames_dir)?;
    for (i, frame) in generated.frames.iter().enumerate() {
        io::write_pgm(&frames_dir.join(format!("{:06}.pgm", i + 1)), frame)?;
    }
    io::write_track_map(&out_dir.join("gt.txt"), &generated.gt)?;
    io::write_detection_map(&out_dir.join("det.txt"), &generated.detections)?;
    println!(
        "wrote {} frames, gt.txt and det.txt to {}",
        generated.frames.len(),
        out_dir.display()
    );
    Ok(())
}

fn cmd_eval(
    gt_path: &Path,
    hyp_path: &Path,
    iou_thresh: f64,
    assertions: Option<&str>,
) -> anyhow::Result<ExitCode> {
    let gt = io::read_tracks(gt_path)
        .with_context(|| format!("reading ground truth {}", gt_path.display()))?;
    let hyp = io::read_tracks(hyp_path)
        .with_context(|| format!("reading hypothesis {}", hyp_path.display()))?;
    let report = evaluate(&gt, &hyp, iou_thresh)?;
    println!("{report}");
    println!("csv,{}", MetricsReport::csv_header());
    println!("csv,{}", report.to_csv());

    if let Some(assertions) = assertions {
        let failures = check_assertions(&report, assertions)?;
        if !failures.is_empty() {
            for failure in &failures {
                eprintln!("assertion failed: {failure}");
            }
            return Ok(ExitCode::from(1));
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Evaluate "metric op value" clauses against a report; returns the failed
/// clauses.
fn check_assertions(report: &MetricsReport, spec: &str) -> anyhow::Result<Vec<String>> {
    let mut failures = Vec::new();
    for clause in spec.split(',').map(str::trim).filter(|c| !c.is_empty()) {
        let (name, op, value) = parse_clause(clause)?;
        let actual = match name {
            "mota" => report.mota,
            "idf1" => report.idf1,
            "idsw" => report.idsw as f64,
            "fp" => report.false_positives as f64,
            "fn" => report.misses as f64,
            "matches" => report.matches as f64,
            other => bail!("unknown metric '{other}' in assertion"),
        };
        let holds = match op {
            ">=" => actual >= value,
            "<=" => actual <= value,
            ">" => actual > value,
            "<" => actual < value,
            "==" => actual == value,
            _ => unreachable!(),
        };
        if !holds {
            failures.push(format!("{clause} (actual {actual:.3})"));
        }
    }
    Ok(failures)
}

fn parse_clause(clause: &str) -> anyhow::Result<(&str, &str, f64)> {
    for op in [">=", "<=", "==", ">", "<"] {
        if let Some((name, value)) = clause.split_once(op) {
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| anyhow!("bad number in assertion '{clause}'"))?;
            return Ok((name.trim(), op, value));
        }
    }
    bail!("assertion '{clause}' must look like 'mota>=95'")
}
