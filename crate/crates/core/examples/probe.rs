//! Scratch probe used during development; not part of the deliverable.

use ra_sentinel_core::prelude::*;

fn main() {
    // OS calibration constant for the default geometry.
    let params = CfarParams::default();
    let n = params.max_reference_cells();
    let k = params.os_rank(n);
    let alpha = os_scale_factor(n, k, params.p_fa).unwrap();
    println!("default geometry: N={n} k={k} alpha_os={alpha:.6}");
    println!(
        "check pfa back: {:.6e}",
        ra_sentinel_core::cfar::os_false_alarm(n, k, alpha)
    );

    // Fig-3 style scene: clutter 0.6, lump 1.0, noise 0.05.
    let mut overlap_hits = 0;
    let mut monotone = 0;
    for seed in 0..100u64 {
        let spec = ScenarioSpec {
            seed,
            ..ScenarioSpec::default()
        };
        let (img, truth) = gen_ra_scene(&spec, 0).unwrap();
        let area = |p: f64| {
            candidate_mask(
                &img,
                &LumpParams {
                    percentile: p,
                    ..LumpParams::default()
                },
            )
            .area()
        };
        let (a90, a95, a99) = (area(90.0), area(95.0), area(99.0));
        if a90 >= a95 && a95 >= a99 {
            monotone += 1;
        }
        let det = detect_lump(&img, &LumpParams::default());
        if hit_test(&det.mask, &truth) {
            overlap_hits += 1;
        }
        if seed < 3 {
            println!(
                "seed {seed}: areas p90={a90} p95={a95} p99={a99} bbox={:?}",
                det.bbox
            );
        }
    }
    println!("fig3 scene: monotone {monotone}/100, p99 overlap {overlap_hits}/100");

    // High-clutter scene for Table-1 ordering: spread lump with the ridge
    // inside the CFAR reference ring (self-masking + clutter masking).
    for (ridge_amp, thick, gap) in [(0.65, 2.0, 5.0)] {
        let mut acc = [0usize; 3];
        let trials = 500u64;
        let mut lump_misses = vec![];
        for seed in 0..trials {
            let spec = ScenarioSpec {
                seed,
                clutter_range_bin: 20.0,
                clutter_amplitude: ridge_amp,
                clutter_thickness: thick,
                lump_center: (20.0 + gap + (seed % 4) as f64, 60.0 + (seed * 7 % 140) as f64),
                lump_sigma: (3.0, 10.0),
                noise_sigma: 0.05,
                ..ScenarioSpec::default()
            };
            let (img, truth) = gen_ra_scene(&spec, 0).unwrap();
            let cfar = CfarParams::default();
            let lump = LumpParams::default();
            let masks = [
                ca_cfar_2d(&img, &cfar),
                os_cfar_2d(&img, &cfar),
                detect_lump(&img, &lump).mask,
            ];
            for (i, m) in masks.iter().enumerate() {
                if hit_test(m, &truth) {
                    acc[i] += 1;
                } else if i == 2 {
                    lump_misses.push(seed);
                }
            }
        }
        println!(
            "ridge {ridge_amp} thick {thick} gap {gap}: ca {}/{trials} os {}/{trials} lump {}/{trials} lump_misses {:?}",
            acc[0], acc[1], acc[2], lump_misses
        );
    }

    // Rough per-frame detector latencies on a default 64 x 256 frame.
    {
        let spec = ScenarioSpec::default();
        let (img, _) = gen_ra_scene(&spec, 0).unwrap();
        let time_it = |f: &dyn Fn() -> usize| {
            let start = std::time::Instant::now();
            let mut acc = 0;
            for _ in 0..20 {
                acc += f();
            }
            (start.elapsed().as_secs_f64() / 20.0 * 1e3, acc)
        };
        let ca8 = CfarParams::default();
        let ca16 = CfarParams {
            ref_band: 16,
            guard_band: 2,
            ..CfarParams::default()
        };
        let lp = LumpParams::default();
        let (t_ca, _) = time_it(&|| ca_cfar_2d(&img, &ca8).area());
        let (t_ca16, _) = time_it(&|| ca_cfar_2d(&img, &ca16).area());
        let (t_os, _) = time_it(&|| os_cfar_2d(&img, &ca8).area());
        let (t_lump, _) = time_it(&|| detect_lump(&img, &lp).mask.area());
        println!(
            "latency ms: ca={t_ca:.3} ca_r16={t_ca16:.3} (x{:.2}) os={t_os:.3} lump={t_lump:.3} os/lump={:.1}",
            t_ca16 / t_ca,
            t_os / t_lump
        );
    }

    // End-to-end IQ localization: target at bin 20, +15 deg.
    let spec = ScenarioSpec {
        scene_kind: SceneKind::IqPointTarget,
        target_range_m: 1.0,
        range_resolution_m: 0.05,
        target_azimuth_deg: 15.0,
        target_amplitude: 1.0,
        clutter_amplitude: 1.0,
        clutter_range_bin: 8.0,
        noise_sigma: 0.05,
        ..ScenarioSpec::default()
    };
    let cfg = spec.config;
    let table = build_steering_table(&cfg);
    let expect_az = table.nearest_bin(15.0);
    let mut mti = MtiState::new(0.9).unwrap();
    for frame in 0..8 {
        let (cube, truth) = gen_iq_point_target(&spec, frame).unwrap();
        let rd = range_doppler_transform(&cube, WindowKind::Hann);
        let filtered = mti.filter(&rd).unwrap();
        let img = build_ra_image(&filtered, &table, &cfg).unwrap();
        let (r, c) = img.argmax();
        println!(
            "frame {frame}: argmax=({r},{c}) expected=(20,{expect_az}) gt={:?} ridge_val={:.4}",
            truth.bbox,
            img.at(8, expect_az)
        );
    }
}
