//! Deterministic, seeded synthetic scenes with ground truth, at two levels:
//! ready-made range-azimuth images (clutter ridge + human-like lump +
//! half-normal noise) and raw IQ point-target cubes that exercise the whole
//! pipeline.
//!
//! All randomness flows through the portable generator in [`crate::rng`].
//! Noise draws come from a per-frame substream while clutter and target
//! phases use frame-independent substreams, so changing the noise level
//! never perturbs scene geometry and static content stays static.

use std::str::FromStr;

use num_complex::Complex32;

use crate::beamform::build_steering_table;
use crate::error::{Error, Result};
use crate::rng::Xoshiro256pp;
use crate::types::{BBox, FrameCube, RaImage, RadarConfig};

/// Substream identifiers; stable so that generated datasets are stable.
const STREAM_NOISE: u64 = 1;
const STREAM_CLUTTER: u64 = 2;
const STREAM_TARGET: u64 = 3;

/// Breathing-style micro-motion frequency in Hz.
const MICRO_MOTION_HZ: f64 = 0.25;

/// What a scenario generates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SceneKind {
    /// Range-azimuth images directly (no pipeline involved).
    #[default]
    RaScene,
    /// Raw IQ cubes holding a point target, static clutter and noise.
    IqPointTarget,
}

impl FromStr for SceneKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ra_scene" => Ok(SceneKind::RaScene),
            "iq_point_target" => Ok(SceneKind::IqPointTarget),
            other => Err(Error::invalid(
                "scene_kind",
                format!("expected ra_scene|iq_point_target, got `{other}`"),
            )),
        }
    }
}

/// Full description of a synthetic scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub seed: u64,
    pub scene_kind: SceneKind,
    pub num_frames: usize,
    pub config: RadarConfig,

    /// Lump center as (range_bin, azimuth_bin).
    pub lump_center: (f64, f64),
    /// Lump extent as (sigma_range, sigma_azimuth) in bins.
    pub lump_sigma: (f64, f64),
    pub lump_amplitude: f64,

    /// Clutter ridge range bin, amplitude and thickness (sigma in bins).
    pub clutter_range_bin: f64,
    pub clutter_amplitude: f64,
    pub clutter_thickness: f64,

    /// Background noise standard deviation.
    pub noise_sigma: f64,

    /// IQ mode: target range in meters and the meters-per-bin scale.
    pub target_range_m: f64,
    pub range_resolution_m: f64,
    pub target_azimuth_deg: f64,
    pub target_amplitude: f64,
    /// Sinusoidal range wobble amplitude in bins.
    pub micro_motion_bins: f64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            seed: 1,
            scene_kind: SceneKind::RaScene,
            num_frames: 100,
            config: RadarConfig::default(),
            lump_center: (40.0, 128.0),
            lump_sigma: (3.0, 9.0),
            lump_amplitude: 1.0,
            clutter_range_bin: 12.0,
            clutter_amplitude: 0.6,
            clutter_thickness: 1.5,
            noise_sigma: 0.05,
            target_range_m: 1.0,
            range_resolution_m: 0.05,
            target_azimuth_deg: 15.0,
            target_amplitude: 1.0,
            micro_motion_bins: 0.3,
        }
    }
}

impl ScenarioSpec {
    pub fn validate(self) -> Result<Self> {
        let cfg = self.config.validate()?;
        if self.scene_kind == SceneKind::RaScene {
            let h = cfg.num_samples as f64;
            let w = cfg.num_azimuth_bins as f64;
            if !(self.lump_center.0 >= 0.0 && self.lump_center.0 < h) {
                return Err(Error::invalid("lump_range_bin", "outside the range grid"));
            }
            if !(self.lump_center.1 >= 0.0 && self.lump_center.1 < w) {
                return Err(Error::invalid("lump_azimuth_bin", "outside the azimuth grid"));
            }
        }
        if self.lump_sigma.0 <= 0.0 || self.lump_sigma.1 <= 0.0 {
            return Err(Error::invalid("lump_sigma", "must be > 0"));
        }
        for (name, v) in [
            ("lump_amplitude", self.lump_amplitude),
            ("clutter_amplitude", self.clutter_amplitude),
            ("noise_sigma", self.noise_sigma),
            ("target_amplitude", self.target_amplitude),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParam {
                    name: "amplitude",
                    reason: format!("{name} must be finite and >= 0"),
                });
            }
        }
        if self.clutter_thickness <= 0.0 {
            return Err(Error::invalid("clutter_thickness", "must be > 0"));
        }
        if self.range_resolution_m <= 0.0 {
            return Err(Error::invalid("range_resolution_m", "must be > 0"));
        }
        Ok(self)
    }

    /// Target range expressed in (fractional) range bins.
    pub fn target_range_bin(&self) -> f64 {
        self.target_range_m / self.range_resolution_m
    }
}

/// Per-frame annotated truth: where the subject actually is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct GroundTruth {
    pub bbox: BBox,
}

fn clamp_bin(v: f64, max_exclusive: usize) -> usize {
    v.round().max(0.0).min(max_exclusive as f64 - 1.0) as usize
}

fn gaussian(x: f64, center: f64, sigma: f64) -> f64 {
    let d = (x - center) / sigma;
    (-0.5 * d * d).exp()
}

/// Generate one range-azimuth frame and its ground-truth box.
///
/// The image is `clutter ridge + lump + |N(0, sigma)|`, clipped at zero and
/// max-normalized; the box covers the lump center +/- 3 sigma, rounded and
/// clipped to the grid. Deterministic in `(spec.seed, frame_index)`.
pub fn gen_ra_scene(spec: &ScenarioSpec, frame_index: usize) -> Result<(RaImage, GroundTruth)> {
    if spec.scene_kind != SceneKind::RaScene {
        return Err(Error::invalid("scene_kind", "spec is not an ra_scene"));
    }
    let h = spec.config.num_samples;
    let w = spec.config.num_azimuth_bins;
    let (cr, ca) = spec.lump_center;
    let (sr, sa) = spec.lump_sigma;

    let mut noise = Xoshiro256pp::from_substream(spec.seed, STREAM_NOISE, frame_index as u64);
    let mut values = Vec::with_capacity(h * w);
    for r in 0..h {
        let ridge = spec.clutter_amplitude
            * gaussian(r as f64, spec.clutter_range_bin, spec.clutter_thickness);
        let lump_row = gaussian(r as f64, cr, sr);
        for c in 0..w {
            let lump = spec.lump_amplitude * lump_row * gaussian(c as f64, ca, sa);
            let n = (spec.noise_sigma * noise.normal()).abs();
            values.push((ridge + lump + n).max(0.0));
        }
    }
    let image = RaImage::from_values(h, w, values)?.normalize_max();

    let truth = GroundTruth {
        bbox: BBox::new(
            clamp_bin(cr - 3.0 * sr, h),
            clamp_bin(cr + 3.0 * sr, h),
            clamp_bin(ca - 3.0 * sa, w),
            clamp_bin(ca + 3.0 * sa, w),
        ),
    };
    Ok((image, truth))
}

/// Generate one IQ frame cube holding a slowly breathing point target, a
/// frame-static clutter tone, and complex white noise.
///
/// The target beat tone sits at the (fractional) range bin mapped from
/// `target_range_m`, with the steering-consistent inter-channel phase
/// `exp(-i 2 pi d sin(az))` on the second `rx_pair` element and a
/// sinusoidal range wobble across frames so the MTI stage passes it. The
/// clutter tone is identical in every frame so the MTI stage cancels it.
pub fn gen_iq_point_target(
    spec: &ScenarioSpec,
    frame_index: usize,
) -> Result<(FrameCube, GroundTruth)> {
    if spec.scene_kind != SceneKind::IqPointTarget {
        return Err(Error::invalid("scene_kind", "spec is not an iq_point_target"));
    }
    let cfg = &spec.config;
    let n = cfg.num_samples;
    let target_bin = spec.target_range_bin();
    if !(target_bin >= 0.0 && target_bin < n as f64) {
        return Err(Error::invalid(
            "target_range_m",
            format!(
                "maps to bin {target_bin:.2}, outside the unambiguous range [0, {n})"
            ),
        ));
    }

    // Frame-independent phases.
    let mut clutter_rng = Xoshiro256pp::from_substream(spec.seed, STREAM_CLUTTER, 0);
    let clutter_phase0 = clutter_rng.uniform(0.0, std::f64::consts::TAU);
    let mut target_rng = Xoshiro256pp::from_substream(spec.seed, STREAM_TARGET, 0);
    let target_phase0 = target_rng.uniform(0.0, std::f64::consts::TAU);
    let breath_phase = target_rng.uniform(0.0, std::f64::consts::TAU);

    let t = frame_index as f64 / cfg.frame_rate;
    let wobble = spec.micro_motion_bins
        * (std::f64::consts::TAU * MICRO_MOTION_HZ * t + breath_phase).sin();
    let k_target = target_bin + wobble;

    let az_phase = -std::f64::consts::TAU
        * cfg.antenna_spacing
        * spec.target_azimuth_deg.to_radians().sin();

    let mut noise = Xoshiro256pp::from_substream(spec.seed, STREAM_NOISE, frame_index as u64);
    let noise_scale = spec.noise_sigma / std::f64::consts::SQRT_2;

    let tau = std::f64::consts::TAU;
    let mut data = Vec::with_capacity(cfg.samples_per_frame());
    for rx in 0..cfg.num_rx {
        let rx_phase = if rx == cfg.rx_pair.1 { az_phase } else { 0.0 };
        for _chirp in 0..cfg.num_chirps {
            for s in 0..n {
                let tp = tau * k_target * s as f64 / n as f64 + target_phase0 + rx_phase;
                let cp = tau * spec.clutter_range_bin * s as f64 / n as f64 + clutter_phase0;
                let re = spec.target_amplitude * tp.cos()
                    + spec.clutter_amplitude * cp.cos()
                    + noise_scale * noise.normal();
                let im = spec.target_amplitude * tp.sin()
                    + spec.clutter_amplitude * cp.sin()
                    + noise_scale * noise.normal();
                data.push(Complex32::new(re as f32, im as f32));
            }
        }
    }
    let cube = FrameCube::from_flat(cfg.num_rx, cfg.num_chirps, n, data)?;

    let table = build_steering_table(cfg);
    let az_bin = table.nearest_bin(spec.target_azimuth_deg);
    let h = n;
    let w = cfg.num_azimuth_bins;
    let truth = GroundTruth {
        bbox: BBox::new(
            clamp_bin(target_bin - 2.0, h),
            clamp_bin(target_bin + 2.0, h),
            az_bin.saturating_sub(8),
            (az_bin + 8).min(w - 1),
        ),
    };
    Ok((cube, truth))
}

/// Parse a plain-text scenario config: one `key = value` per line, `#`
/// starts a comment, later keys override earlier ones.
pub fn parse_scenario(text: &str) -> Result<ScenarioSpec> {
    let mut spec = ScenarioSpec::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let stripped = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if stripped.is_empty() {
            continue;
        }
        let (key, value) = stripped.split_once('=').ok_or(Error::ConfigParse {
            line,
            reason: format!("expected `key = value`, got `{stripped}`"),
        })?;
        let key = key.trim();
        let value = value.trim();
        let bad = |reason: String| Error::ConfigParse { line, reason };
        let parse_f64 = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| bad(format!("`{key}`: not a number: `{v}`")))
        };
        let parse_usize = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| bad(format!("`{key}`: not a non-negative integer: `{v}`")))
        };
        match key {
            "seed" => {
                spec.seed = value
                    .parse::<u64>()
                    .map_err(|_| bad(format!("`seed`: not an integer: `{value}`")))?;
            }
            "scene_kind" => {
                spec.scene_kind = value
                    .parse::<SceneKind>()
                    .map_err(|e| bad(e.to_string()))?;
            }
            "num_frames" => spec.num_frames = parse_usize(value)?,
            "lump_range_bin" => spec.lump_center.0 = parse_f64(value)?,
            "lump_azimuth_bin" => spec.lump_center.1 = parse_f64(value)?,
            "lump_sigma_range" => spec.lump_sigma.0 = parse_f64(value)?,
            "lump_sigma_azimuth" => spec.lump_sigma.1 = parse_f64(value)?,
            "lump_amplitude" => spec.lump_amplitude = parse_f64(value)?,
            "clutter_range_bin" => spec.clutter_range_bin = parse_f64(value)?,
            "clutter_amplitude" => spec.clutter_amplitude = parse_f64(value)?,
            "clutter_thickness" => spec.clutter_thickness = parse_f64(value)?,
            "noise_sigma" => spec.noise_sigma = parse_f64(value)?,
            "target_range_m" => spec.target_range_m = parse_f64(value)?,
            "range_resolution_m" => spec.range_resolution_m = parse_f64(value)?,
            "target_azimuth_deg" => spec.target_azimuth_deg = parse_f64(value)?,
            "target_amplitude" => spec.target_amplitude = parse_f64(value)?,
            "micro_motion_bins" => spec.micro_motion_bins = parse_f64(value)?,
            "num_rx" => spec.config.num_rx = parse_usize(value)?,
            "num_chirps" => spec.config.num_chirps = parse_usize(value)?,
            "num_samples" => spec.config.num_samples = parse_usize(value)?,
            "num_azimuth_bins" => spec.config.num_azimuth_bins = parse_usize(value)?,
            "antenna_spacing" => spec.config.antenna_spacing = parse_f64(value)?,
            "azimuth_fov_deg" => spec.config.azimuth_fov_deg = parse_f64(value)?,
            "frame_rate" => spec.config.frame_rate = parse_f64(value)?,
            other => {
                return Err(bad(format!("unknown key `{other}`")));
            }
        }
    }
    spec.validate().map_err(|e| Error::ConfigParse {
        line: 0,
        reason: e.to_string(),
    })
}
