//! Range-azimuth image formation via per-range 2x2 Capon (MVDR) spatial
//! spectra over two receive channels.
//!
//! For every range bin a spatial covariance is averaged over all Doppler
//! bins, diagonally loaded, and the Capon power `P(theta) = 1 / (a^H R^-1 a)`
//! is evaluated on a steering grid uniform in sin(theta). Stacking powers
//! over range and azimuth and dividing by the maximum yields the normalized
//! H x W map consumed by the detectors.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pipeline::RangeDopplerMap;
use crate::types::{RaImage, RadarConfig};

/// Relative diagonal loading applied to every covariance estimate.
const LOADING_EPS: f64 = 1e-4;
/// Absolute loading floor for all-zero (zero-trace) estimates.
const LOADING_FLOOR: f64 = 1e-12;

/// Hermitian 2x2 spatial covariance. `r10` is implicit as `conj(r01)`.
/// `r00`, `r11`, `r01` hold the raw Doppler average; `loading` is the
/// diagonal term actually added when the matrix is inverted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialCovariance {
    pub r00: f64,
    pub r11: f64,
    pub r01: Complex64,
    pub loading: f64,
}

impl SpatialCovariance {
    /// Determinant of the loaded matrix.
    pub fn det(&self) -> f64 {
        (self.r00 + self.loading) * (self.r11 + self.loading) - self.r01.norm_sqr()
    }
}

/// Precomputed steering vectors over the azimuth grid.
///
/// `vectors[w] = [1, exp(-i 2 pi d sin(theta_w))]` with `d` the pair
/// spacing in wavelengths; both elements are unit magnitude.
#[derive(Debug, Clone)]
pub struct SteeringTable {
    angles_deg: Vec<f64>,
    vectors: Vec<[Complex64; 2]>,
}

impl SteeringTable {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn angle_deg(&self, w: usize) -> f64 {
        self.angles_deg[w]
    }

    pub fn angles_deg(&self) -> &[f64] {
        &self.angles_deg
    }

    pub fn vector(&self, w: usize) -> &[Complex64; 2] {
        &self.vectors[w]
    }

    /// Grid index whose angle is closest to `deg`.
    pub fn nearest_bin(&self, deg: f64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, a) in self.angles_deg.iter().enumerate() {
            let d = (a - deg).abs();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }
}

/// Build the steering grid: W angles uniform in sin-space over
/// `[-sin(fov), +sin(fov)]`, which keeps the two-element phase term linear
/// across the grid.
pub fn build_steering_table(config: &RadarConfig) -> SteeringTable {
    let w = config.num_azimuth_bins;
    debug_assert!(w >= 2);
    let sin_max = config.azimuth_fov_deg.to_radians().sin();
    let d = config.antenna_spacing;

    let mut angles_deg = Vec::with_capacity(w);
    let mut vectors = Vec::with_capacity(w);
    for i in 0..w {
        let s = -sin_max + 2.0 * sin_max * i as f64 / (w - 1) as f64;
        let phase = -2.0 * std::f64::consts::PI * d * s;
        angles_deg.push(s.asin().to_degrees());
        vectors.push([
            Complex64::new(1.0, 0.0),
            Complex64::new(phase.cos(), phase.sin()),
        ]);
    }
    SteeringTable {
        angles_deg,
        vectors,
    }
}

/// Average the 2x2 outer product of the `rx_pair` channels over all Doppler
/// bins at one range, then apply diagonal loading.
pub fn estimate_covariance(
    rd: &RangeDopplerMap,
    range_bin: usize,
    rx_pair: (usize, usize),
) -> SpatialCovariance {
    let d = rd.num_doppler();
    let mut r00 = 0.0;
    let mut r11 = 0.0;
    let mut r01 = Complex64::new(0.0, 0.0);
    for bin in 0..d {
        let x0 = rd.at(rx_pair.0, bin, range_bin);
        let x1 = rd.at(rx_pair.1, bin, range_bin);
        r00 += x0.norm_sqr();
        r11 += x1.norm_sqr();
        r01 += x0 * x1.conj();
    }
    let inv_d = 1.0 / d as f64;
    r00 *= inv_d;
    r11 *= inv_d;
    r01 *= inv_d;

    let trace = r00 + r11;
    let loading = (LOADING_EPS * trace / 2.0).max(LOADING_FLOOR);
    SpatialCovariance {
        r00,
        r11,
        r01,
        loading,
    }
}

/// Capon spectrum value `1 / (a^H R^-1 a)` through the closed-form 2x2
/// inverse of the loaded covariance.
pub fn capon_power(r: &SpatialCovariance, steering: &[Complex64; 2]) -> Result<f64> {
    let a00 = r.r00 + r.loading;
    let a11 = r.r11 + r.loading;
    let det = a00 * a11 - r.r01.norm_sqr();

    // inv(R) = 1/det [[a11, -r01], [-conj(r01), a00]]
    let (s0, s1) = (steering[0], steering[1]);
    let quad = a11 * s0.norm_sqr() + a00 * s1.norm_sqr()
        - 2.0 * (s0.conj() * r.r01 * s1).re;
    let power = det / quad;
    if !power.is_finite() || power <= 0.0 {
        return Err(Error::Numerical(format!(
            "capon power non-positive or non-finite (det={det}, quad={quad})"
        )));
    }
    Ok(power)
}

/// Form the max-normalized H x W range-azimuth image from a range-Doppler
/// map; H = range bins, W = steering-table size.
pub fn build_ra_image(
    rd: &RangeDopplerMap,
    table: &SteeringTable,
    config: &RadarConfig,
) -> Result<RaImage> {
    let h = rd.num_range();
    let w = table.len();
    // A zero map carries no signal; without this guard the loading floor
    // would normalize it into a flat all-ones image.
    if rd.energy() == 0.0 {
        return Ok(RaImage::zeros(h, w));
    }
    let mut image = RaImage::zeros(h, w);
    for range_bin in 0..h {
        let cov = estimate_covariance(rd, range_bin, config.rx_pair);
        for az in 0..w {
            *image.at_mut(range_bin, az) = capon_power(&cov, table.vector(az))?;
        }
    }
    Ok(image.normalize_max())
}
