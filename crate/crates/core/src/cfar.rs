//! Baseline 2-D CA-CFAR and OS-CFAR detectors on range-azimuth images.
//!
//! Both detectors slide a square reference ring (Chebyshev distance
//! `guard < d <= ref`) over every pixel, estimate local noise power from the
//! ring, and compare the squared pixel intensity against a scaled estimate.
//! The ring is clipped at image borders and the scale factor is recomputed
//! from the per-pixel reference count, so detections stay calibrated right
//! up to the first range bin.
//!
//! CA-CFAR uses the exact exponential-noise scale
//! `mu = N (Pfa^(-1/N) - 1)`. OS-CFAR sorts the ring and takes the k-th
//! largest power; its multiplier comes from the exact order-statistic
//! false-alarm relation for exponential noise,
//! `Pfa(alpha) = prod_{j=0}^{ks-1} (N - j) / (N - j + alpha)`
//! with `ks = N - k + 1` the ascending rank, solved for `alpha` by
//! bisection.

use std::collections::BTreeMap;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::types::{BinaryMask, RaImage};

/// Window geometry and calibration for both CFAR variants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfarParams {
    /// Reference half-width r in cells.
    pub ref_band: usize,
    /// Guard half-width g in cells.
    pub guard_band: usize,
    /// Designed false-alarm probability.
    pub p_fa: f64,
    /// Fraction of the reference count defining the OS rank,
    /// `k = max(1, round(fraction * N))` (k-th largest).
    pub os_rank_fraction: f64,
    /// Explicit OS threshold multiplier; `None` selects the calibrated
    /// per-pixel value.
    pub os_scale: Option<f64>,
}

impl Default for CfarParams {
    fn default() -> Self {
        Self {
            ref_band: 8,
            guard_band: 2,
            p_fa: 1e-3,
            os_rank_fraction: 0.75,
            os_scale: None,
        }
    }
}

impl CfarParams {
    pub fn validate(self) -> Result<Self> {
        if self.ref_band <= self.guard_band {
            return Err(Error::invalid("ref_band", "must exceed guard_band"));
        }
        if !(self.p_fa > 0.0 && self.p_fa < 1.0) {
            return Err(Error::invalid("p_fa", "must lie in (0, 1)"));
        }
        if !(self.os_rank_fraction > 0.0 && self.os_rank_fraction <= 1.0) {
            return Err(Error::invalid("os_rank", "must lie in (0, 1]"));
        }
        if let Some(s) = self.os_scale {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::invalid("os_scale", "must be finite and > 0"));
            }
        }
        Ok(self)
    }

    /// Largest possible reference count for this geometry.
    pub fn max_reference_cells(&self) -> usize {
        let outer = 2 * self.ref_band + 1;
        let inner = 2 * self.guard_band + 1;
        outer * outer - inner * inner
    }

    /// OS rank (k-th largest) for a reference count of `n`.
    pub fn os_rank(&self, n: usize) -> usize {
        ((self.os_rank_fraction * n as f64).round() as usize).max(1)
    }
}

/// CA-CFAR scale factor `mu = N (Pfa^(-1/N) - 1)`, exact for
/// exponentially distributed power samples.
pub fn cfar_scale_factor(n: usize, p_fa: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n", "reference count must be >= 1"));
    }
    if !(p_fa > 0.0 && p_fa < 1.0) {
        return Err(Error::invalid("p_fa", "must lie in (0, 1)"));
    }
    let nf = n as f64;
    Ok(nf * (p_fa.powf(-1.0 / nf) - 1.0))
}

/// False-alarm probability of OS-CFAR with multiplier `alpha` when the
/// estimate is the k-th largest of `n` exponential power samples.
pub fn os_false_alarm(n: usize, k_largest: usize, alpha: f64) -> f64 {
    let ks = n - k_largest + 1; // ascending rank
    let mut log_p = 0.0;
    for j in 0..ks {
        let m = (n - j) as f64;
        log_p += m.ln() - (m + alpha).ln();
    }
    log_p.exp()
}

/// Solve `os_false_alarm(n, k, alpha) = p_fa` for `alpha` by bisection.
pub fn os_scale_factor(n: usize, k_largest: usize, p_fa: f64) -> Result<f64> {
    if n == 0 || k_largest == 0 || k_largest > n {
        return Err(Error::invalid("k", "rank must satisfy 1 <= k <= n"));
    }
    if !(p_fa > 0.0 && p_fa < 1.0) {
        return Err(Error::invalid("p_fa", "must lie in (0, 1)"));
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while os_false_alarm(n, k_largest, hi) > p_fa {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Numerical("os scale bisection diverged".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if os_false_alarm(n, k_largest, mid) > p_fa {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Visit every reference cell of the ring `guard < chebyshev <= ref`
/// around `cut`, clipped to the image bounds.
fn for_each_reference_cell(
    height: usize,
    width: usize,
    cut: (usize, usize),
    params: &CfarParams,
    mut visit: impl FnMut(usize, usize),
) {
    let (ci, cj) = (cut.0 as isize, cut.1 as isize);
    let r = params.ref_band as isize;
    let g = params.guard_band as isize;
    let row_lo = (ci - r).max(0);
    let row_hi = (ci + r).min(height as isize - 1);
    let col_lo = (cj - r).max(0);
    let col_hi = (cj + r).min(width as isize - 1);
    for i in row_lo..=row_hi {
        for j in col_lo..=col_hi {
            let d = (i - ci).abs().max((j - cj).abs());
            if d > g {
                visit(i as usize, j as usize);
            }
        }
    }
}

/// Reference-ring pixels for one cell-under-test, with their count.
pub fn reference_cells(
    height: usize,
    width: usize,
    cut: (usize, usize),
    params: &CfarParams,
) -> (Vec<(usize, usize)>, usize) {
    let mut cells = Vec::new();
    for_each_reference_cell(height, width, cut, params, |i, j| cells.push((i, j)));
    let n = cells.len();
    (cells, n)
}

/// Lazily filled per-count scale-factor table; reference counts only take
/// a few hundred distinct values, so threshold math runs once per count.
struct ScaleCache {
    values: Vec<Option<f64>>,
}

impl ScaleCache {
    fn new(max_n: usize) -> Self {
        Self {
            values: vec![None; max_n + 1],
        }
    }

    fn get(&mut self, n: usize, compute: impl FnOnce(usize) -> f64) -> f64 {
        if let Some(v) = self.values[n] {
            return v;
        }
        let v = compute(n);
        self.values[n] = Some(v);
        v
    }
}

/// Process-wide memo for the bisection-calibrated OS multipliers; the
/// solve costs far more than a sort, so it must run once per
/// `(n, k, p_fa)` rather than once per detector call.
static OS_SCALE_MEMO: Mutex<BTreeMap<(usize, usize, u64), f64>> = Mutex::new(BTreeMap::new());

fn cached_os_scale(n: usize, k: usize, p_fa: f64) -> f64 {
    let key = (n, k, p_fa.to_bits());
    if let Some(v) = OS_SCALE_MEMO.lock().expect("memo lock").get(&key) {
        return *v;
    }
    let v = os_scale_factor(n, k, p_fa).expect("validated params");
    OS_SCALE_MEMO.lock().expect("memo lock").insert(key, v);
    v
}

/// Cell-averaging CFAR: noise power is the mean squared intensity over the
/// reference ring; a pixel fires when its squared intensity strictly
/// exceeds `mu * sigma^2`.
pub fn ca_cfar_2d(image: &RaImage, params: &CfarParams) -> BinaryMask {
    let (h, w) = (image.height(), image.width());
    let power: Vec<f64> = image.values().iter().map(|v| v * v).collect();
    let mut cache = ScaleCache::new(params.max_reference_cells());
    let mut mask = BinaryMask::new(h, w);

    for i in 0..h {
        for j in 0..w {
            let mut sum = 0.0;
            let mut n = 0usize;
            for_each_reference_cell(h, w, (i, j), params, |ri, rj| {
                sum += power[ri * w + rj];
                n += 1;
            });
            if n == 0 {
                continue;
            }
            let mu = cache.get(n, |n| {
                cfar_scale_factor(n, params.p_fa).expect("validated params")
            });
            let sigma2 = sum / n as f64;
            if power[i * w + j] > mu * sigma2 {
                mask.set(i, j, true);
            }
        }
    }
    mask
}

fn os_decision_at(
    power: &[f64],
    h: usize,
    w: usize,
    cut: (usize, usize),
    params: &CfarParams,
    ring: &mut Vec<f64>,
    cache: &mut ScaleCache,
) -> bool {
    ring.clear();
    for_each_reference_cell(h, w, cut, params, |ri, rj| {
        ring.push(power[ri * w + rj]);
    });
    let n = ring.len();
    if n == 0 {
        return false;
    }
    let k = params.os_rank(n);
    ring.sort_unstable_by(|a, b| b.partial_cmp(a).expect("finite powers"));
    let sigma2 = ring[k - 1];
    let alpha = params
        .os_scale
        .unwrap_or_else(|| cache.get(n, |n| cached_os_scale(n, params.os_rank(n), params.p_fa)));
    power[cut.0 * w + cut.1] > alpha * sigma2
}

/// Order-statistics CFAR: noise power is the k-th largest squared intensity
/// in the reference ring, making the threshold insensitive to up to
/// `N - k` interfering returns.
pub fn os_cfar_2d(image: &RaImage, params: &CfarParams) -> BinaryMask {
    let (h, w) = (image.height(), image.width());
    let power: Vec<f64> = image.values().iter().map(|v| v * v).collect();
    let mut cache = ScaleCache::new(params.max_reference_cells());
    let mut mask = BinaryMask::new(h, w);
    let mut ring: Vec<f64> = Vec::with_capacity(params.max_reference_cells());

    for i in 0..h {
        for j in 0..w {
            if os_decision_at(&power, h, w, (i, j), params, &mut ring, &mut cache) {
                mask.set(i, j, true);
            }
        }
    }
    mask
}

/// OS-CFAR decision for a single cell-under-test, through the same
/// estimate and threshold path as [`os_cfar_2d`].
pub fn os_cfar_decision(image: &RaImage, cut: (usize, usize), params: &CfarParams) -> bool {
    let (h, w) = (image.height(), image.width());
    let power: Vec<f64> = image.values().iter().map(|v| v * v).collect();
    let mut cache = ScaleCache::new(params.max_reference_cells());
    let mut ring = Vec::with_capacity(params.max_reference_cells());
    os_decision_at(&power, h, w, cut, params, &mut ring, &mut cache)
}
