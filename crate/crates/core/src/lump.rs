//! Percentile-gated lump detector: global percentile threshold, binary
//! closing, small-blob removal, two-pass connected-component labeling, and
//! dominant-component selection with a tight bounding box.
//!
//! Every stage is linear in the pixel count (the percentile uses a
//! linear-time selection, not a sort), so a full detection costs O(HW)
//! per frame regardless of parameter choices.

use crate::error::{Error, Result};
use crate::types::{BinaryMask, Detection, RaImage};

/// Pixel adjacency used for labeling and blob removal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

impl std::str::FromStr for Connectivity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "4" => Ok(Connectivity::Four),
            "8" => Ok(Connectivity::Eight),
            other => Err(Error::invalid(
                "connectivity",
                format!("expected 4 or 8, got `{other}`"),
            )),
        }
    }
}

/// Detector parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LumpParams {
    /// Percentile rank p in (0, 100); p = 99 keeps the top 1% of pixels.
    pub percentile: f64,
    /// Minimum surviving blob area in pixels.
    pub min_area: usize,
    /// Structuring-element edge length for closing.
    pub closing_se: usize,
    /// Adjacency for labeling and blob removal.
    pub connectivity: Connectivity,
}

impl Default for LumpParams {
    fn default() -> Self {
        Self {
            percentile: 99.0,
            min_area: 12,
            closing_se: 2,
            connectivity: Connectivity::Eight,
        }
    }
}

impl LumpParams {
    pub fn validate(self) -> Result<Self> {
        if !(self.percentile > 0.0 && self.percentile < 100.0) {
            return Err(Error::invalid("percentile", "must lie in (0, 100)"));
        }
        if self.min_area == 0 {
            return Err(Error::invalid("min_area", "must be >= 1"));
        }
        if self.closing_se == 0 {
            return Err(Error::invalid("closing_se", "must be >= 1"));
        }
        Ok(self)
    }
}

/// Nearest-rank percentile: the value at ascending index
/// `ceil(p/100 * HW) - 1`, found by linear-time selection.
pub fn percentile_threshold(image: &RaImage, p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 100.0);
    let mut values = image.values().to_vec();
    let idx = (p / 100.0 * values.len() as f64).ceil() as usize - 1;
    let (_, tau, _) =
        values.select_nth_unstable_by(idx, |a, b| a.partial_cmp(b).expect("finite values"));
    *tau
}

/// Keep pixels at or above `tau` (inclusive gate).
pub fn gate_mask(image: &RaImage, tau: f64) -> BinaryMask {
    let (h, w) = (image.height(), image.width());
    let bits = image.values().iter().map(|v| *v >= tau).collect();
    BinaryMask::from_bits(h, w, bits).expect("dims from source image")
}

/// Binary closing: dilation then erosion by an all-ones `se x se` element
/// anchored at its top-left cell (offsets `[0, se) x [0, se)`).
///
/// Dilation ORs the element over every set pixel; erosion keeps a pixel
/// when all element offsets that fall inside the image are set, so border
/// pixels are not penalized for the element sticking out.
pub fn binary_closing(mask: &BinaryMask, se_size: usize) -> BinaryMask {
    debug_assert!(se_size >= 1);
    if se_size == 1 {
        return mask.clone();
    }
    let (h, w) = (mask.height(), mask.width());

    let mut dilated = BinaryMask::new(h, w);
    for i in 0..h {
        for j in 0..w {
            // q is covered when any q - s is set.
            let mut hit = false;
            'probe: for di in 0..se_size.min(i + 1) {
                for dj in 0..se_size.min(j + 1) {
                    if mask.get(i - di, j - dj) {
                        hit = true;
                        break 'probe;
                    }
                }
            }
            dilated.set(i, j, hit);
        }
    }

    let mut closed = BinaryMask::new(h, w);
    for i in 0..h {
        for j in 0..w {
            let mut keep = true;
            'scan: for di in 0..se_size {
                if i + di >= h {
                    break;
                }
                for dj in 0..se_size {
                    if j + dj >= w {
                        break;
                    }
                    if !dilated.get(i + di, j + dj) {
                        keep = false;
                        break 'scan;
                    }
                }
            }
            closed.set(i, j, keep);
        }
    }
    closed
}

/// Label map from two-pass connected-component labeling; label 0 is
/// background and component labels are compacted to `1..=count` in
/// raster-scan order of first appearance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabels {
    height: usize,
    width: usize,
    labels: Vec<u32>,
    areas: Vec<usize>,
}

impl ComponentLabels {
    pub fn component_count(&self) -> usize {
        self.areas.len()
    }

    #[inline]
    pub fn label(&self, row: usize, col: usize) -> u32 {
        self.labels[row * self.width + col]
    }

    /// Pixel count of component `label` (1-based).
    pub fn area(&self, label: u32) -> usize {
        self.areas[label as usize - 1]
    }

    pub fn areas(&self) -> &[usize] {
        &self.areas
    }

    /// Largest-area label, ties broken by the smallest label. `None` when
    /// no components exist.
    pub fn dominant(&self) -> Option<u32> {
        let mut best: Option<(usize, u32)> = None;
        for (i, &a) in self.areas.iter().enumerate() {
            let label = i as u32 + 1;
            match best {
                None => best = Some((a, label)),
                Some((ba, _)) if a > ba => best = Some((a, label)),
                _ => {}
            }
        }
        best.map(|(_, l)| l)
    }

    /// Mask containing exactly the pixels of one component.
    pub fn component_mask(&self, label: u32) -> BinaryMask {
        let bits = self.labels.iter().map(|l| *l == label).collect();
        BinaryMask::from_bits(self.height, self.width, bits).expect("label dims")
    }
}

/// Minimal union-find over provisional labels.
struct Equivalences {
    parent: Vec<u32>,
}

impl Equivalences {
    fn new() -> Self {
        // Slot 0 is the background pseudo-label.
        Self { parent: vec![0] }
    }

    fn make(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            self.parent[x as usize] = self.parent[self.parent[x as usize] as usize];
            x = self.parent[x as usize];
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Root at the smaller label so compaction follows raster order.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// Two-pass labeling with union-find equivalence merging.
pub fn connected_components(mask: &BinaryMask, connectivity: Connectivity) -> ComponentLabels {
    let (h, w) = (mask.height(), mask.width());
    let mut provisional = vec![0u32; h * w];
    let mut eq = Equivalences::new();

    // Pass 1: provisional labels from already-scanned neighbors.
    let mut neighbors: Vec<u32> = Vec::with_capacity(4);
    for i in 0..h {
        for j in 0..w {
            if !mask.get(i, j) {
                continue;
            }
            neighbors.clear();
            if j > 0 && mask.get(i, j - 1) {
                neighbors.push(provisional[i * w + j - 1]);
            }
            if i > 0 {
                if mask.get(i - 1, j) {
                    neighbors.push(provisional[(i - 1) * w + j]);
                }
                if connectivity == Connectivity::Eight {
                    if j > 0 && mask.get(i - 1, j - 1) {
                        neighbors.push(provisional[(i - 1) * w + j - 1]);
                    }
                    if j + 1 < w && mask.get(i - 1, j + 1) {
                        neighbors.push(provisional[(i - 1) * w + j + 1]);
                    }
                }
            }
            let label = match neighbors.iter().min() {
                None => eq.make(),
                Some(&min) => {
                    for &n in &neighbors {
                        eq.union(min, n);
                    }
                    min
                }
            };
            provisional[i * w + j] = label;
        }
    }

    // Pass 2: resolve equivalences and compact labels in raster order.
    let mut compact: Vec<u32> = vec![0; eq.parent.len()];
    let mut areas: Vec<usize> = Vec::new();
    let mut labels = vec![0u32; h * w];
    for idx in 0..h * w {
        let p = provisional[idx];
        if p == 0 {
            continue;
        }
        let root = eq.find(p);
        let c = if compact[root as usize] != 0 {
            compact[root as usize]
        } else {
            areas.push(0);
            let next = areas.len() as u32;
            compact[root as usize] = next;
            next
        };
        labels[idx] = c;
        areas[c as usize - 1] += 1;
    }

    ComponentLabels {
        height: h,
        width: w,
        labels,
        areas,
    }
}

/// Clear every connected component whose area is below `min_area`.
pub fn remove_small(
    mask: &BinaryMask,
    min_area: usize,
    connectivity: Connectivity,
) -> BinaryMask {
    let labels = connected_components(mask, connectivity);
    let (h, w) = (mask.height(), mask.width());
    let mut out = BinaryMask::new(h, w);
    for i in 0..h {
        for j in 0..w {
            let l = labels.label(i, j);
            if l != 0 && labels.area(l) >= min_area {
                out.set(i, j, true);
            }
        }
    }
    out
}

/// Gate at the percentile threshold, close, and drop small blobs; the
/// multi-component candidate mask before dominant-lump selection. This is
/// the mask the percentile-ablation figures show.
pub fn candidate_mask(image: &RaImage, params: &LumpParams) -> BinaryMask {
    let tau = percentile_threshold(image, params.percentile);
    let gated = gate_mask(image, tau);
    let closed = binary_closing(&gated, params.closing_se);
    remove_small(&closed, params.min_area, params.connectivity)
}

/// Full detection: candidate mask, labeling, largest component (ties to the
/// smallest label), tight bounding box.
///
/// An identically zero image short-circuits to an empty detection; a zero
/// map carries no signal and the inclusive gate would otherwise select
/// every pixel.
pub fn detect_lump(image: &RaImage, params: &LumpParams) -> Detection {
    let (h, w) = (image.height(), image.width());
    if image.max() == 0.0 {
        return Detection::empty(h, w);
    }
    let mask = candidate_mask(image, params);
    let labels = connected_components(&mask, params.connectivity);
    match labels.dominant() {
        None => Detection::empty(h, w),
        Some(label) => {
            let mask = labels.component_mask(label);
            let bbox = mask.bounding_box();
            debug_assert!(bbox.is_some());
            Detection { mask, bbox }
        }
    }
}
