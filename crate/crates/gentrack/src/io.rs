//! File formats: MOT-style detection/track CSV files, PGM/PPM image
//! sequences, and `key = value` configuration files.
//!
//! CSV schema (one line per box, frames 1-indexed on disk):
//! `frame,id,bb_left,bb_top,bb_width,bb_height,conf,x,y,z`
//! The trailing three fields are `-1` placeholders. Numbers are written via
//! shortest round-trip formatting, so re-reading a written file recovers
//! the exact values.

use crate::bbox::BBox;
use crate::config::{InitMode, ResampleMode, TrackerConfig, Variant};
use crate::image::{luminance, GrayImage};
use crate::track::{Detection, TrackOutput};
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

/// Per-frame detections, keyed by 0-based frame index.
pub type DetectionMap = BTreeMap<u64, Vec<Detection>>;
/// Per-frame identified boxes (ground truth or tracker hypotheses).
pub type TrackMap = BTreeMap<u64, Vec<(u64, BBox)>>;

fn parse_line(path: &Path, lineno: usize, line: &str) -> Result<Option<(u64, i64, BBox, f64)>> {
    let trimmed = line.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let err = |msg: String| Error::Parse { path: path.to_path_buf(), line: lineno, msg };
    let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
    if fields.len() != 10 {
        return Err(err(format!("expected 10 comma-separated fields, got {}", fields.len())));
    }
    let frame: u64 = fields[0]
        .parse()
        .map_err(|_| err(format!("bad frame number '{}'", fields[0])))?;
    if frame == 0 {
        return Err(err("frame numbers are 1-indexed".into()));
    }
    let id: i64 = fields[1].parse().map_err(|_| err(format!("bad id '{}'", fields[1])))?;
    let mut nums = [0.0f64; 5];
    for (slot, field) in nums.iter_mut().zip(&fields[2..7]) {
        *slot = field.parse().map_err(|_| err(format!("bad number '{field}'")))?;
    }
    let [left, top, w, h, conf] = nums;
    if !(w > 0.0 && h > 0.0) {
        return Err(err(format!("box dimensions must be positive, got {w}x{h}")));
    }
    Ok(Some((frame - 1, id, BBox::from_tlwh(left, top, w, h), conf)))
}

/// Read a detection file. The id column is ignored; confidences outside
/// `[0, 1]` are clamped with a warning on stderr.
pub fn read_detections(path: &Path) -> Result<DetectionMap> {
    let content = fs::read_to_string(path)?;
    let mut map = DetectionMap::new();
    for (lineno, line) in content.lines().enumerate() {
        if let Some((frame, _, bbox, conf)) = parse_line(path, lineno + 1, line)? {
            if !(0.0..=1.0).contains(&conf) {
                eprintln!(
                    "warning: {}:{}: confidence {} clamped to [0, 1]",
                    path.display(),
                    lineno + 1,
                    conf
                );
            }
            map.entry(frame).or_default().push(Detection::new(bbox, conf.clamp(0.0, 1.0)));
        }
    }
    Ok(map)
}

/// Read an identified-box file (ground truth or tracker results). The id
/// column must be non-negative; the confidence column is ignored.
pub fn read_tracks(path: &Path) -> Result<TrackMap> {
    let content = fs::read_to_string(path)?;
    let mut map = TrackMap::new();
    for (lineno, line) in content.lines().enumerate() {
        if let Some((frame, id, bbox, _)) = parse_line(path, lineno + 1, line)? {
            if id < 0 {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    msg: format!("track id must be non-negative, got {id}"),
                });
            }
            map.entry(frame).or_default().push((id as u64, bbox));
        }
    }
    Ok(map)
}

/// Shortest-round-trip number formatting: integers print bare (`10`, not
/// `10.000000`).
fn fmt_num(x: f64) -> String {
    format!("{x}")
}

/// Write tracker outputs in the CSV schema, sorted by (frame, id), frames
/// 1-indexed, with `conf = 1 - penalty`.
pub fn write_results(path: &Path, outputs: &[TrackOutput]) -> Result<()> {
    let mut sorted: Vec<&TrackOutput> = outputs.iter().collect();
    sorted.sort_by_key(|t| (t.frame, t.id));
    let mut out = BufWriter::new(fs::File::create(path)?);
    for t in sorted {
        writeln!(
            out,
            "{},{},{},{},{},{},{},-1,-1,-1",
            t.frame + 1,
            t.id,
            fmt_num(t.bbox.left()),
            fmt_num(t.bbox.top()),
            fmt_num(t.bbox.w),
            fmt_num(t.bbox.h),
            fmt_num(1.0 - t.penalty),
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Write per-frame ground-truth boxes in the same schema with conf 1.
pub fn write_track_map(path: &Path, tracks: &TrackMap) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for (frame, boxes) in tracks {
        let mut boxes: Vec<&(u64, BBox)> = boxes.iter().collect();
        boxes.sort_by_key(|(id, _)| *id);
        for (id, b) in boxes {
            writeln!(
                out,
                "{},{},{},{},{},{},1,-1,-1,-1",
                frame + 1,
                id,
                fmt_num(b.left()),
                fmt_num(b.top()),
                fmt_num(b.w),
                fmt_num(b.h),
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Write detections in the same schema with id -1.
pub fn write_detection_map(path: &Path, dets: &DetectionMap) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for (frame, list) in dets {
        for d in list {
            writeln!(
                out,
                "{},-1,{},{},{},{},{},-1,-1,-1",
                frame + 1,
                fmt_num(d.bbox.left()),
                fmt_num(d.bbox.top()),
                fmt_num(d.bbox.w),
                fmt_num(d.bbox.h),
                fmt_num(d.conf),
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Lazily decoded, numerically ordered image sequence from a directory of
/// PGM (P5/P2) or PPM (P6) files.
#[derive(Debug)]
pub struct FrameSequence {
    paths: Vec<PathBuf>,
}

impl FrameSequence {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Result<GrayImage>> + '_ {
        self.paths.iter().map(|p| read_image(p))
    }
}

/// Scan a directory for numbered image files and verify the indices form a
/// contiguous run.
pub fn load_frames(dir: &Path) -> Result<FrameSequence> {
    let mut indexed: Vec<(u64, PathBuf)> = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        if !matches!(ext, "pgm" | "ppm") {
            continue;
        }
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
        if let Ok(index) = stem.parse::<u64>() {
            indexed.push((index, path.clone()));
        }
    }
    indexed.sort();
    for pair in indexed.windows(2) {
        if pair[1].0 != pair[0].0 + 1 {
            return Err(Error::FrameGap {
                dir: dir.to_path_buf(),
                missing: pair[0].0 + 1,
                prev: pair[0].0,
                next: pair[1].0,
            });
        }
    }
    Ok(FrameSequence { paths: indexed.into_iter().map(|(_, p)| p).collect() })
}

/// Next non-comment token in a netpbm header; advances `pos` past it.
fn netpbm_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a str> {
    while *pos < bytes.len() {
        let b = bytes[*pos];
        if b == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
        } else if b.is_ascii_whitespace() {
            *pos += 1;
        } else {
            break;
        }
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    (*pos > start).then(|| std::str::from_utf8(&bytes[start..*pos]).unwrap_or(""))
}

/// Decode a PGM (P5 binary / P2 ascii) or PPM (P6, converted to luminance)
/// file with maxval <= 255.
pub fn read_image(path: &Path) -> Result<GrayImage> {
    let bytes = fs::read(path)?;
    let fail = |msg: &str| Error::Image { path: path.to_path_buf(), msg: msg.into() };

    let mut pos = 0usize;
    let magic = netpbm_token(&bytes, &mut pos).ok_or_else(|| fail("empty file"))?.to_string();
    let mut header = [0u64; 3];
    for slot in header.iter_mut() {
        *slot = netpbm_token(&bytes, &mut pos)
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| fail("bad or truncated header"))?;
    }
    let [width, height, maxval] = header;
    if width == 0 || height == 0 {
        return Err(fail("zero image dimension"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(fail("only 8-bit images supported"));
    }
    let npix = (width * height) as usize;

    match magic.as_str() {
        "P5" => {
            let data_start = pos + 1; // single whitespace after maxval
            if bytes.len() < data_start + npix {
                return Err(fail("truncated pixel data"));
            }
            Ok(GrayImage::from_raw(
                width as u32,
                height as u32,
                bytes[data_start..data_start + npix].to_vec(),
            ))
        }
        "P2" => {
            let mut data = Vec::with_capacity(npix);
            for _ in 0..npix {
                let value: u64 = netpbm_token(&bytes, &mut pos)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| fail("bad or truncated pixel data"))?;
                data.push(value.min(255) as u8);
            }
            Ok(GrayImage::from_raw(width as u32, height as u32, data))
        }
        "P6" => {
            let data_start = pos + 1;
            if bytes.len() < data_start + 3 * npix {
                return Err(fail("truncated pixel data"));
            }
            let rgb = &bytes[data_start..data_start + 3 * npix];
            let data = rgb.chunks_exact(3).map(|px| luminance(px[0], px[1], px[2])).collect();
            Ok(GrayImage::from_raw(width as u32, height as u32, data))
        }
        _ => Err(fail("unsupported format (expected P2, P5 or P6)")),
    }
}

/// Encode a grayscale image as binary PGM (P5).
pub fn write_pgm(path: &Path, image: &GrayImage) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    write!(out, "P5\n{} {}\n255\n", image.width(), image.height())?;
    out.write_all(image.data())?;
    out.flush()?;
    Ok(())
}

/// Parse a `key = value` configuration file: `#` comments, case-insensitive
/// keys, unknown keys rejected. `variant_override` (e.g. from a CLI flag)
/// takes precedence over the file's `variant` key and re-derives
/// variant-dependent defaults before the remaining keys apply.
pub fn read_config(path: &Path, variant_override: Option<Variant>) -> Result<TrackerConfig> {
    let content = fs::read_to_string(path)?;
    parse_config(&content, variant_override)
        .map_err(|(line, msg)| Error::Parse { path: path.to_path_buf(), line, msg })
}

fn parse_config(
    content: &str,
    variant_override: Option<Variant>,
) -> std::result::Result<TrackerConfig, (usize, String)> {
    let mut entries: Vec<(usize, String, String)> = Vec::new();
    for (lineno, raw) in content.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or((lineno + 1, format!("expected 'key = value', got '{line}'")))?;
        entries.push((lineno + 1, key.trim().to_ascii_lowercase(), value.trim().to_string()));
    }

    // The variant decides particle-count and sigma defaults, so resolve it
    // before any other key applies.
    let mut variant = variant_override.unwrap_or(Variant::PsoSocial);
    for (lineno, key, value) in &entries {
        if key == "variant" {
            let parsed = Variant::parse(value)
                .ok_or((*lineno, format!("unknown variant '{value}'")))?;
            if variant_override.is_none() {
                variant = parsed;
            }
        }
    }
    let mut cfg = TrackerConfig::default_for(variant);

    for (lineno, key, value) in &entries {
        let bad = |what: &str| (*lineno, format!("bad {what} '{value}' for key '{key}'"));
        let parse_f64 = || value.parse::<f64>().map_err(|_| bad("number"));
        match key.as_str() {
            "variant" => {}
            "particles" => {
                cfg.particles = value.parse().map_err(|_| bad("integer"))?;
            }
            "pso_iters" => {
                cfg.pso_iters = value.parse().map_err(|_| bad("integer"))?;
            }
            "eta" => cfg.eta = parse_f64()?,
            "phi_p" => cfg.phi_p = parse_f64()?,
            "phi_g" => cfg.phi_g = parse_f64()?,
            "lambda_p" => cfg.lambda_p = parse_f64()?,
            "lambda_d" => cfg.lambda_d = parse_f64()?,
            "lambda_h" => cfg.lambda_h = parse_f64()?,
            "lambda_s" => cfg.lambda_s = parse_f64()?,
            "lambda_m" => cfg.lambda_m = parse_f64()?,
            "sigma_h" => cfg.sigma_h = parse_f64()?,
            "sigma_p" => cfg.sigma_p = parse_f64()?,
            "sigma_i" => cfg.sigma_i = parse_f64()?,
            "xi_p" => cfg.xi_p = parse_f64()?,
            "xi_v" => cfg.xi_v = parse_f64()?,
            "rho_re" => cfg.rho_re = parse_f64()?,
            "age_max" | "delta_max" => {
                cfg.age_max = value.parse().map_err(|_| bad("integer"))?;
            }
            "sigma_0" => cfg.sigma_0 = parse_f64()?,
            "sigma_s" => cfg.sigma_s = parse_f64()?,
            "eps_x" => cfg.eps_x = parse_f64()?,
            "eps_v" => cfg.eps_v = parse_f64()?,
            "lambda_x" => cfg.lambda_x = parse_f64()?,
            "lambda_v" => cfg.lambda_v = parse_f64()?,
            "pos_noise_scale" => cfg.pos_noise_scale = parse_f64()?,
            "vel_noise_scale" => cfg.vel_noise_scale = parse_f64()?,
            "size_noise_damp" => cfg.size_noise_damp = parse_f64()?,
            "gate_cost" => cfg.gate_cost = parse_f64()?,
            "entrance_margin" => cfg.entrance_margin = Some(parse_f64()?),
            "seed" => {
                cfg.seed = value.parse().map_err(|_| bad("integer"))?;
            }
            "resample_mode" => {
                cfg.resample_mode = ResampleMode::parse(value)
                    .ok_or((*lineno, format!("unknown resample_mode '{value}'")))?;
            }
            "init_mode" => {
                cfg.init_mode = InitMode::parse(value)
                    .ok_or((*lineno, format!("unknown init_mode '{value}'")))?;
            }
            _ => return Err((*lineno, format!("unknown key '{key}'"))),
        }
    }

    cfg.validate().map_err(|e| (0, e.to_string()))?;
    Ok(cfg)
}
