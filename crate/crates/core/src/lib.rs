//! FMCW radar quasi-static presence detection pipeline.
//!
//! Raw IQ frame cubes flow through range and Doppler FFTs with DC removal
//! and windowing, an exponential-moving-average MTI clutter filter, and a
//! two-channel Capon beamformer into normalized range-azimuth images. Three
//! interchangeable detectors consume those images: 2-D CA-CFAR, 2-D
//! OS-CFAR, and a percentile-gated lump detector built from plain image
//! morphology. Seeded synthetic scenes, overlap-based evaluation, and a
//! latency benchmark harness round out the toolkit.
//!
//! ```
//! use ra_sentinel_core::prelude::*;
//!
//! let spec = ScenarioSpec::default();
//! let (image, truth) = gen_ra_scene(&spec, 0).unwrap();
//! let detection = detect_lump(&image, &LumpParams::default());
//! let hit = hit_test(&detection.mask, &truth);
//! assert!(hit);
//! ```

pub mod beamform;
pub mod cfar;
pub mod error;
pub mod eval;
pub mod io;
pub mod lump;
pub mod pipeline;
pub mod rng;
pub mod synth;
pub mod types;

/// Convenient single import for the common surface.
pub mod prelude {
    pub use crate::beamform::{
        build_ra_image, build_steering_table, capon_power, estimate_covariance,
        SpatialCovariance, SteeringTable,
    };
    pub use crate::cfar::{
        ca_cfar_2d, cfar_scale_factor, os_cfar_2d, os_cfar_decision, os_scale_factor,
        reference_cells, CfarParams,
    };
    pub use crate::error::{Error, Result};
    pub use crate::eval::{
        benchmark_detectors, evaluate_sequence, format_bench_table, hit_test, BenchSummary,
        CaCfarDetector, Detector, EvalRecord, LumpDetector, OsCfarDetector,
    };
    pub use crate::io::{
        export_image, read_cube_file, read_pgm16, write_cube_file, CubeReader, ExportFormat,
    };
    pub use crate::lump::{
        binary_closing, candidate_mask, connected_components, detect_lump, gate_mask,
        percentile_threshold, remove_small, Connectivity, LumpParams,
    };
    pub use crate::pipeline::{
        apply_window, range_doppler_transform, remove_dc, MtiState, RangeDopplerMap, WindowKind,
    };
    pub use crate::synth::{
        gen_iq_point_target, gen_ra_scene, parse_scenario, GroundTruth, ScenarioSpec, SceneKind,
    };
    pub use crate::types::{
        BBox, BinaryMask, Detection, FrameCube, RaImage, RadarConfig,
    };
}
