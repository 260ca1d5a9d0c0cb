//! Hit/miss scoring against ground-truth boxes, per-sequence accuracy, and
//! detector-only latency benchmarking.
//!
//! A frame counts as a hit when at least one set pixel of the detection
//! mask lies inside the ground-truth box (bounds inclusive, no IoU).
//! Latency covers the detector call only; range-azimuth maps are always
//! formed outside the timed region so all detectors share the same input
//! cost, and benchmarking runs strictly single-threaded in frame order.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cfar::{ca_cfar_2d, os_cfar_2d, CfarParams};
use crate::error::{Error, Result};
use crate::lump::{detect_lump, LumpParams};
use crate::synth::GroundTruth;
use crate::types::{BinaryMask, RaImage};

/// A detection stage that maps a range-azimuth image to a mask.
pub trait Detector {
    fn name(&self) -> &str;
    fn detect(&self, image: &RaImage) -> BinaryMask;
}

/// Cell-averaging CFAR as a [`Detector`].
pub struct CaCfarDetector(pub CfarParams);

impl Detector for CaCfarDetector {
    fn name(&self) -> &str {
        "ca"
    }

    fn detect(&self, image: &RaImage) -> BinaryMask {
        ca_cfar_2d(image, &self.0)
    }
}

/// Order-statistics CFAR as a [`Detector`].
pub struct OsCfarDetector(pub CfarParams);

impl Detector for OsCfarDetector {
    fn name(&self) -> &str {
        "os"
    }

    fn detect(&self, image: &RaImage) -> BinaryMask {
        os_cfar_2d(image, &self.0)
    }
}

/// Percentile-gated lump detector as a [`Detector`].
pub struct LumpDetector(pub LumpParams);

impl Detector for LumpDetector {
    fn name(&self) -> &str {
        "lump"
    }

    fn detect(&self, image: &RaImage) -> BinaryMask {
        detect_lump(image, &self.0).mask
    }
}

/// Per-frame evaluation result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub frame: usize,
    pub detector: String,
    pub hit: bool,
    pub latency_s: f64,
    pub mask_area: usize,
}

/// Aggregate latency and accuracy statistics for one detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub detector: String,
    pub mean_latency_s: f64,
    pub p50_latency_s: f64,
    pub p95_latency_s: f64,
    pub fps: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    /// Mean latency of the named detector divided by this detector's mean;
    /// > 1 means this detector is faster.
    pub speedup_vs: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub peak_rss_mb: Option<f64>,
}

/// True when any set mask pixel falls inside the ground-truth box.
pub fn hit_test(mask: &BinaryMask, gt: &GroundTruth) -> bool {
    let b = gt.bbox;
    let row_hi = b.row_max.min(mask.height().saturating_sub(1));
    let col_hi = b.col_max.min(mask.width().saturating_sub(1));
    for i in b.row_min..=row_hi {
        for j in b.col_min..=col_hi {
            if mask.get(i, j) {
                return true;
            }
        }
    }
    false
}

/// Nearest-rank percentile of a latency sample.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let idx = ((q / 100.0 * sorted.len() as f64).ceil() as usize).max(1) - 1;
    sorted[idx.min(sorted.len() - 1)]
}

fn summarize(detector: &str, latencies: &[f64], accuracy: Option<f64>) -> BenchSummary {
    let mut sorted = latencies.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite latencies"));
    let mean = if sorted.is_empty() {
        0.0
    } else {
        sorted.iter().sum::<f64>() / sorted.len() as f64
    };
    BenchSummary {
        detector: detector.to_string(),
        mean_latency_s: mean,
        p50_latency_s: percentile(&sorted, 50.0),
        p95_latency_s: percentile(&sorted, 95.0),
        fps: if mean > 0.0 { 1.0 / mean } else { f64::INFINITY },
        accuracy,
        speedup_vs: BTreeMap::new(),
        peak_rss_mb: peak_rss_mb(),
    }
}

/// Run one detector over an aligned sequence of frames and ground truths,
/// timing the detector call only.
pub fn evaluate_sequence(
    frames: &[RaImage],
    truths: &[GroundTruth],
    detector: &dyn Detector,
) -> Result<(Vec<EvalRecord>, BenchSummary)> {
    if frames.len() != truths.len() {
        return Err(Error::DimMismatch {
            expected: format!("{} ground truths", frames.len()),
            got: format!("{}", truths.len()),
        });
    }
    let mut records = Vec::with_capacity(frames.len());
    let mut latencies = Vec::with_capacity(frames.len());
    let mut hits = 0usize;
    for (idx, (frame, gt)) in frames.iter().zip(truths).enumerate() {
        let start = Instant::now();
        let mask = detector.detect(frame);
        let latency_s = start.elapsed().as_secs_f64();
        let hit = hit_test(&mask, gt);
        hits += hit as usize;
        latencies.push(latency_s);
        records.push(EvalRecord {
            frame: idx,
            detector: detector.name().to_string(),
            hit,
            latency_s,
            mask_area: mask.area(),
        });
    }
    let accuracy = if frames.is_empty() {
        None
    } else {
        Some(hits as f64 / frames.len() as f64)
    };
    let summary = summarize(detector.name(), &latencies, accuracy);
    Ok((records, summary))
}

/// Benchmark each detector over the frame sequence: `warmup` discarded
/// iterations, then `repeats` full timed passes, single-threaded and in
/// frame order. Speedup ratios are filled in for every benchmarked pair.
pub fn benchmark_detectors(
    frames: &[RaImage],
    detectors: &[&dyn Detector],
    warmup: usize,
    repeats: usize,
) -> Result<Vec<BenchSummary>> {
    if repeats == 0 {
        return Err(Error::invalid("repeats", "must be >= 1"));
    }
    if frames.is_empty() {
        return Err(Error::invalid("frames", "need at least one frame"));
    }
    let mut summaries = Vec::with_capacity(detectors.len());
    for det in detectors {
        for i in 0..warmup {
            let _ = det.detect(&frames[i % frames.len()]);
        }
        let mut latencies = Vec::with_capacity(repeats * frames.len());
        for _ in 0..repeats {
            for frame in frames {
                let start = Instant::now();
                let mask = det.detect(frame);
                latencies.push(start.elapsed().as_secs_f64());
                std::hint::black_box(&mask);
            }
        }
        summaries.push(summarize(det.name(), &latencies, None));
    }

    let means: Vec<(String, f64)> = summaries
        .iter()
        .map(|s| (s.detector.clone(), s.mean_latency_s))
        .collect();
    for summary in &mut summaries {
        for (other, other_mean) in &means {
            let ratio = if summary.mean_latency_s > 0.0 {
                other_mean / summary.mean_latency_s
            } else {
                f64::INFINITY
            };
            summary.speedup_vs.insert(other.clone(), ratio);
        }
    }
    Ok(summaries)
}

/// Append records as line-delimited JSON, one object per frame.
pub fn write_records_jsonl(records: &[EvalRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(|e| Error::Format(e.to_string()))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Write all summaries as one JSON document.
pub fn write_summaries_json(summaries: &[BenchSummary], path: impl AsRef<Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(summaries)
        .map_err(|e| Error::Format(e.to_string()))?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Plain-text latency table: method, latency, FPS, RAM, speedup against
/// `baseline`.
pub fn format_bench_table(summaries: &[BenchSummary], baseline: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<8} {:>13} {:>9} {:>10} {:>16}\n",
        "Method", "Latency (ms)", "FPS", "RAM (MB)", &format!("Speedup (vs {baseline})")
    ));
    for s in summaries {
        let ram = s
            .peak_rss_mb
            .map(|m| format!("{m:.1}"))
            .unwrap_or_else(|| "n/a".to_string());
        let speedup = s
            .speedup_vs
            .get(baseline)
            .map(|r| format!("{r:.1}x"))
            .unwrap_or_else(|| "n/a".to_string());
        out.push_str(&format!(
            "{:<8} {:>13.3} {:>9.1} {:>10} {:>16}\n",
            s.detector,
            s.mean_latency_s * 1e3,
            s.fps,
            ram,
            speedup
        ));
    }
    out
}

/// Peak resident set size in MB, when the platform exposes it
/// (`VmHWM` in `/proc/self/status` on Linux).
pub fn peak_rss_mb() -> Option<f64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    for line in status.lines() {
        if let Some(rest) = line.strip_prefix("VmHWM:") {
            let kb: f64 = rest.trim().trim_end_matches("kB").trim().parse().ok()?;
            return Some(kb / 1024.0);
        }
    }
    None
}
