//! Frame cube to range-Doppler conversion: per-chirp DC removal, windowed
//! range FFT, windowed Doppler FFT, and exponential-moving-average MTI
//! clutter suppression.
//!
//! Range bins keep natural FFT order (bin 0 = zero beat frequency); the
//! Doppler axis is stored fftshifted so bin `num_chirps / 2` is zero
//! Doppler and the clutter ridge stays contiguous.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::types::FrameCube;

/// Window applied before each FFT.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WindowKind {
    #[default]
    Hann,
    None,
}

impl std::str::FromStr for WindowKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hann" => Ok(WindowKind::Hann),
            "none" => Ok(WindowKind::None),
            other => Err(Error::invalid(
                "window",
                format!("unknown window `{other}` (expected hann|none)"),
            )),
        }
    }
}

/// Complex per-channel spectrum after range and Doppler FFTs,
/// indexed `[rx][doppler][range]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeDopplerMap {
    num_rx: usize,
    num_doppler: usize,
    num_range: usize,
    data: Vec<Complex64>,
}

impl RangeDopplerMap {
    pub fn zeros(num_rx: usize, num_doppler: usize, num_range: usize) -> Self {
        Self {
            num_rx,
            num_doppler,
            num_range,
            data: vec![Complex64::new(0.0, 0.0); num_rx * num_doppler * num_range],
        }
    }

    pub fn num_rx(&self) -> usize {
        self.num_rx
    }

    pub fn num_doppler(&self) -> usize {
        self.num_doppler
    }

    pub fn num_range(&self) -> usize {
        self.num_range
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.num_rx, self.num_doppler, self.num_range)
    }

    #[inline]
    pub fn at(&self, rx: usize, doppler: usize, range: usize) -> Complex64 {
        self.data[(rx * self.num_doppler + doppler) * self.num_range + range]
    }

    #[inline]
    pub fn at_mut(&mut self, rx: usize, doppler: usize, range: usize) -> &mut Complex64 {
        &mut self.data[(rx * self.num_doppler + doppler) * self.num_range + range]
    }

    pub fn flat(&self) -> &[Complex64] {
        &self.data
    }

    /// Sum of squared magnitudes over the whole map.
    pub fn energy(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Largest sample magnitude over the whole map.
    pub fn peak_magnitude(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Subtract the complex mean so the output averages to zero.
pub fn remove_dc(chirp: &[Complex64]) -> Vec<Complex64> {
    if chirp.is_empty() {
        return Vec::new();
    }
    let mean = chirp.iter().sum::<Complex64>() / chirp.len() as f64;
    chirp.iter().map(|c| c - mean).collect()
}

/// Periodic Hann coefficient `0.5 (1 - cos(2 pi n / N))`.
#[inline]
fn hann(n: usize, len: usize) -> f64 {
    0.5 * (1.0 - (2.0 * std::f64::consts::PI * n as f64 / len as f64).cos())
}

/// Multiply element-wise by the selected window; `None` is the identity.
pub fn apply_window(vector: &[Complex64], kind: WindowKind) -> Vec<Complex64> {
    match kind {
        WindowKind::None => vector.to_vec(),
        WindowKind::Hann => vector
            .iter()
            .enumerate()
            .map(|(n, c)| c * hann(n, vector.len()))
            .collect(),
    }
}

/// Convert a frame cube into per-channel range-Doppler spectra.
///
/// Per channel: every chirp is DC-removed, windowed and FFT'd over samples
/// (all range bins kept; the input is complex baseband), then every range
/// bin's chirp sequence is windowed, FFT'd and fftshifted over chirps.
pub fn range_doppler_transform(frame: &FrameCube, window: WindowKind) -> RangeDopplerMap {
    let (num_rx, num_chirps, num_samples) =
        (frame.num_rx(), frame.num_chirps(), frame.num_samples());
    let mut planner = FftPlanner::<f64>::new();
    let range_fft = planner.plan_fft_forward(num_samples);
    let doppler_fft = planner.plan_fft_forward(num_chirps);

    let mut out = RangeDopplerMap::zeros(num_rx, num_chirps, num_samples);
    let mut chirp_buf: Vec<Complex64>;
    let mut doppler_buf = vec![Complex64::new(0.0, 0.0); num_chirps];

    for rx in 0..num_rx {
        // Range stage: rows of the intermediate [chirp][range] matrix.
        let mut stage = vec![Complex64::new(0.0, 0.0); num_chirps * num_samples];
        for chirp in 0..num_chirps {
            let samples: Vec<Complex64> = frame
                .chirp(rx, chirp)
                .iter()
                .map(|c| Complex64::new(c.re as f64, c.im as f64))
                .collect();
            chirp_buf = apply_window(&remove_dc(&samples), window);
            range_fft.process(&mut chirp_buf);
            stage[chirp * num_samples..(chirp + 1) * num_samples].copy_from_slice(&chirp_buf);
        }

        // Doppler stage: columns of the intermediate matrix, fftshifted.
        let shift = num_chirps / 2;
        for range in 0..num_samples {
            for chirp in 0..num_chirps {
                doppler_buf[chirp] = stage[chirp * num_samples + range];
            }
            let mut windowed = apply_window(&doppler_buf, window);
            doppler_fft.process(&mut windowed);
            for (i, v) in windowed.iter().enumerate() {
                *out.at_mut(rx, (i + shift) % num_chirps, range) = *v;
            }
        }
    }
    out
}

/// Stateful exponential-moving-average high-pass clutter filter.
///
/// The clutter estimate updates first, then subtracts:
/// `c <- alpha c + (1 - alpha) x`, output `x - c`. The first frame seeds
/// the estimate, so a cold-started stream always outputs zero first.
#[derive(Debug, Clone)]
pub struct MtiState {
    alpha: f64,
    clutter: Option<RangeDopplerMap>,
}

impl MtiState {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::invalid("mti_alpha", "must lie in [0, 1)"));
        }
        Ok(Self {
            alpha,
            clutter: None,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// True once the state has been seeded by a first frame.
    pub fn is_initialized(&self) -> bool {
        self.clutter.is_some()
    }

    /// Filter one frame, updating the clutter estimate in place.
    pub fn filter(&mut self, rd: &RangeDopplerMap) -> Result<RangeDopplerMap> {
        match &mut self.clutter {
            None => {
                self.clutter = Some(rd.clone());
                Ok(RangeDopplerMap::zeros(
                    rd.num_rx,
                    rd.num_doppler,
                    rd.num_range,
                ))
            }
            Some(clutter) => {
                if clutter.dims() != rd.dims() {
                    return Err(Error::DimMismatch {
                        expected: format!("{:?}", clutter.dims()),
                        got: format!("{:?}", rd.dims()),
                    });
                }
                let alpha = self.alpha;
                let mut out = rd.clone();
                for (c, (x, y)) in clutter
                    .data
                    .iter_mut()
                    .zip(rd.data.iter().zip(out.data.iter_mut()))
                {
                    *c = alpha * *c + (1.0 - alpha) * x;
                    *y = x - *c;
                }
                Ok(out)
            }
        }
    }
}
