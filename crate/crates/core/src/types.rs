//! Core domain types: radar geometry, IQ frame cubes, range-azimuth images,
//! detection masks and bounding boxes.
//!
//! All types here are plain immutable value objects; once constructed they can
//! be shared freely across threads.

use num_complex::Complex32;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radar front-end and map geometry.
///
/// Defaults describe a 3-rx sensor producing 3 x 128 x 64 IQ cubes at 10 Hz,
/// beamformed over channels (0, 2) into a 64 x 256 range-azimuth map covering
/// +/-60 degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarConfig {
    /// Receive channel count.
    pub num_rx: usize,
    /// Chirps per frame (Doppler dimension).
    pub num_chirps: usize,
    /// ADC samples per chirp (range dimension).
    pub num_samples: usize,
    /// Frame rate in Hz.
    pub frame_rate: f64,
    /// Ordered pair of channel indices used for beamforming.
    pub rx_pair: (usize, usize),
    /// Separation of the rx_pair elements, in carrier wavelengths.
    pub antenna_spacing: f64,
    /// Azimuth bin count W of the range-azimuth map.
    pub num_azimuth_bins: usize,
    /// Half field of view in degrees, symmetric about boresight.
    pub azimuth_fov_deg: f64,
}

impl Default for RadarConfig {
    fn default() -> Self {
        Self {
            num_rx: 3,
            num_chirps: 128,
            num_samples: 64,
            frame_rate: 10.0,
            rx_pair: (0, 2),
            antenna_spacing: 0.5,
            num_azimuth_bins: 256,
            azimuth_fov_deg: 60.0,
        }
    }
}

impl RadarConfig {
    /// Check the structural invariants; returns the config on success.
    pub fn validate(self) -> Result<Self> {
        if self.num_chirps == 0 || self.num_samples == 0 || self.num_azimuth_bins == 0 {
            return Err(Error::invalid(
                "dims",
                "num_chirps, num_samples and num_azimuth_bins must be >= 1",
            ));
        }
        if self.rx_pair.0 == self.rx_pair.1 {
            return Err(Error::invalid("rx_pair", "channel indices must be distinct"));
        }
        let needed = self.rx_pair.0.max(self.rx_pair.1) + 1;
        if self.num_rx < needed {
            return Err(Error::invalid(
                "num_rx",
                format!("must be >= {needed} to cover rx_pair {:?}", self.rx_pair),
            ));
        }
        if !(self.antenna_spacing > 0.0) {
            return Err(Error::invalid("antenna_spacing", "must be > 0"));
        }
        if !(self.azimuth_fov_deg > 0.0 && self.azimuth_fov_deg <= 90.0) {
            return Err(Error::invalid("azimuth_fov_deg", "must be in (0, 90]"));
        }
        if !(self.frame_rate > 0.0) {
            return Err(Error::invalid("frame_rate", "must be > 0"));
        }
        Ok(self)
    }

    /// Complex samples per frame.
    pub fn samples_per_frame(&self) -> usize {
        self.num_rx * self.num_chirps * self.num_samples
    }
}

/// One radar frame of complex IQ samples, indexed `[rx][chirp][sample]`.
///
/// Samples are stored in container precision (f32 pairs) so a cube written to
/// disk and read back is bit-identical.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameCube {
    num_rx: usize,
    num_chirps: usize,
    num_samples: usize,
    data: Vec<Complex32>,
}

impl FrameCube {
    /// Build a cube from a flat row-major buffer (`rx` outermost, `sample`
    /// innermost). Every element must be finite.
    pub fn from_flat(
        num_rx: usize,
        num_chirps: usize,
        num_samples: usize,
        data: Vec<Complex32>,
    ) -> Result<Self> {
        let expected = num_rx * num_chirps * num_samples;
        if data.len() != expected {
            return Err(Error::DimMismatch {
                expected: format!("{expected} samples ({num_rx}x{num_chirps}x{num_samples})"),
                got: format!("{}", data.len()),
            });
        }
        if let Some(bad) = data.iter().find(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Numerical(format!("non-finite sample {bad}")));
        }
        Ok(Self {
            num_rx,
            num_chirps,
            num_samples,
            data,
        })
    }

    /// All-zero cube with the dimensions of `config`.
    pub fn zeros(config: &RadarConfig) -> Self {
        Self {
            num_rx: config.num_rx,
            num_chirps: config.num_chirps,
            num_samples: config.num_samples,
            data: vec![Complex32::new(0.0, 0.0); config.samples_per_frame()],
        }
    }

    pub fn num_rx(&self) -> usize {
        self.num_rx
    }

    pub fn num_chirps(&self) -> usize {
        self.num_chirps
    }

    pub fn num_samples(&self) -> usize {
        self.num_samples
    }

    /// True when the cube dimensions match `config`.
    pub fn matches(&self, config: &RadarConfig) -> bool {
        self.num_rx == config.num_rx
            && self.num_chirps == config.num_chirps
            && self.num_samples == config.num_samples
    }

    #[inline]
    pub fn at(&self, rx: usize, chirp: usize, sample: usize) -> Complex32 {
        self.data[(rx * self.num_chirps + chirp) * self.num_samples + sample]
    }

    #[inline]
    pub fn at_mut(&mut self, rx: usize, chirp: usize, sample: usize) -> &mut Complex32 {
        &mut self.data[(rx * self.num_chirps + chirp) * self.num_samples + sample]
    }

    /// One chirp as a contiguous slice of samples.
    pub fn chirp(&self, rx: usize, chirp: usize) -> &[Complex32] {
        let base = (rx * self.num_chirps + chirp) * self.num_samples;
        &self.data[base..base + self.num_samples]
    }

    /// Flat sample buffer, rx-major, sample innermost.
    pub fn flat(&self) -> &[Complex32] {
        &self.data
    }
}

/// Real-valued H x W range-azimuth intensity image.
///
/// Rows are range bins, columns azimuth bins. Images produced by the
/// beamformer are max-normalized so values lie in `[0, 1]` with `max == 1`
/// unless the image is identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RaImage {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl RaImage {
    /// Build from a flat row-major buffer. Values must be finite and >= 0.
    pub fn from_values(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || values.len() != height * width {
            return Err(Error::DimMismatch {
                expected: format!("{height}x{width} grid"),
                got: format!("{} values", values.len()),
            });
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Numerical(
                "range-azimuth values must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            height,
            width,
            values,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            values: vec![0.0; height * width],
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    #[inline]
    pub fn at_mut(&mut self, row: usize, col: usize) -> &mut f64 {
        &mut self.values[row * self.width + col]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest value in the image.
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Divide by the maximum so the peak becomes 1. An identically zero
    /// image is left untouched.
    pub fn normalize_max(mut self) -> Self {
        let m = self.max();
        if m > 0.0 {
            for v in &mut self.values {
                *v /= m;
            }
        }
        self
    }

    /// Index of the largest value as `(row, col)`; first occurrence wins.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = (0, 0);
        let mut best_v = f64::NEG_INFINITY;
        for r in 0..self.height {
            for c in 0..self.width {
                let v = self.at(r, c);
                if v > best_v {
                    best_v = v;
                    best = (r, c);
                }
            }
        }
        best
    }
}

/// Per-pixel boolean detection mask with the dims of its source image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    height: usize,
    width: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            bits: vec![false; height * width],
        }
    }

    pub fn from_bits(height: usize, width: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != height * width {
            return Err(Error::DimMismatch {
                expected: format!("{height}x{width} mask"),
                got: format!("{} bits", bits.len()),
            });
        }
        Ok(Self {
            height,
            width,
            bits,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.bits[row * self.width + col] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Number of set pixels.
    pub fn area(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_blank(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    /// Tight bounding box of all set pixels, or `None` for a blank mask.
    pub fn bounding_box(&self) -> Option<BBox> {
        let mut bbox: Option<BBox> = None;
        for r in 0..self.height {
            for c in 0..self.width {
                if self.get(r, c) {
                    bbox = Some(match bbox {
                        None => BBox::new(r, r, c, c),
                        Some(b) => BBox::new(
                            b.row_min.min(r),
                            b.row_max.max(r),
                            b.col_min.min(c),
                            b.col_max.max(c),
                        ),
                    });
                }
            }
        }
        bbox
    }
}

/// Inclusive pixel-index bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BBox {
    pub row_min: usize,
    pub row_max: usize,
    pub col_min: usize,
    pub col_max: usize,
}

impl BBox {
    pub fn new(row_min: usize, row_max: usize, col_min: usize, col_max: usize) -> Self {
        debug_assert!(row_min <= row_max && col_min <= col_max);
        Self {
            row_min,
            row_max,
            col_min,
            col_max,
        }
    }

    /// True when `(row, col)` lies inside the box (bounds inclusive).
    #[inline]
    pub fn contains(&self, row: usize, col: usize) -> bool {
        row >= self.row_min && row <= self.row_max && col >= self.col_min && col <= self.col_max
    }

    /// Pixel count covered by the box.
    pub fn area(&self) -> usize {
        (self.row_max - self.row_min + 1) * (self.col_max - self.col_min + 1)
    }
}

/// Final detector output: the detection mask and, when any component
/// survived, the tight bounding box of the dominant lump.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub mask: BinaryMask,
    pub bbox: Option<BBox>,
}

impl Detection {
    /// Empty detection (blank mask, no box) for an H x W image.
    pub fn empty(height: usize, width: usize) -> Self {
        Self {
            mask: BinaryMask::new(height, width),
            bbox: None,
        }
    }
}
