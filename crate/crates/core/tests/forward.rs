mod common;

use cdpsr::field::{bin_intensity, upsample_replicate, RealImage, SamplingGeometry};
use cdpsr::forward::{add_gaussian_noise, generate_mask_set, simulate_measurements, MaskKind, MaskParams};
use cdpsr::propagation::OpticalConfig;
use cdpsr::targets::builtin_target;
use common::{band_limited_field, forward_oracle, random_field, random_image};
use proptest::prelude::*;

#[test]
fn realized_snr_on_benchmark_stack() {
    let geom = SamplingGeometry::from_detector(2, 1.4).unwrap();
    let optics = OpticalConfig::new(0.532, 21_550.0, geom).unwrap();
    let truth = builtin_target(128, 128, geom.hr_pitch()).unwrap();
    let masks = generate_mask_set(&MaskParams::new(MaskKind::IidPhase, 8, 128, 128, geom.hr_pitch(), 5)).unwrap();
    let clean = simulate_measurements(&truth, &masks, &optics).unwrap();
    let noisy = add_gaussian_noise(&clean, 2.0, 6).unwrap();
    let (mut sig, mut noise) = (0.0, 0.0);
    for (c, n) in clean.frames().iter().zip(noisy.frames()) {
        for (a, b) in c.data().iter().zip(n.data()) {
            sig += a * a;
            noise += (b - a) * (b - a);
        }
    }
    let snr = 10.0 * (sig / noise).log10();
    assert!((1.9..=2.1).contains(&snr), "{snr}");
}

#[test]
fn frames_match_composition_oracle() {
    let geom = SamplingGeometry::from_detector(2, 1.4).unwrap();
    let optics = OpticalConfig::new(0.532, 300.0, geom).unwrap();
    let u = random_field(12, 12, geom.hr_pitch(), 3);
    let masks = generate_mask_set(&MaskParams::new(MaskKind::IidPhase, 4, 12, 12, geom.hr_pitch(), 4)).unwrap();
    let stack = simulate_measurements(&u, &masks, &optics).unwrap();
    for (frame, d) in stack.frames().iter().zip(masks.masks()) {
        let want = forward_oracle(&u, d, optics.distance, optics.wavelength, 2);
        let scale = want.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in frame.data().iter().zip(&want) {
            assert!((a - b).abs() <= 1e-12 * scale, "{a} vs {b}");
        }
    }
}

#[test]
fn frame_energy_equals_field_energy() {
    let geom = SamplingGeometry::from_detector(2, 1.4).unwrap();
    let optics = OpticalConfig::new(0.532, 21_550.0, geom).unwrap();
    // at this pitch every grid frequency, corners included, propagates
    let u = band_limited_field(64, geom.hr_pitch(), 0.532, 0.2, 8);
    let masks = generate_mask_set(&MaskParams::new(MaskKind::IidPhase, 1, 64, 64, geom.hr_pitch(), 1)).unwrap();
    let stack = simulate_measurements(&u, &masks, &optics).unwrap();
    let e_in: f64 = u.data().iter().map(|c| c.norm_sqr()).sum();
    let e_out = stack.frames()[0].sum();
    assert!(((e_out - e_in) / e_in).abs() < 1e-10, "{e_in} {e_out}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn masks_are_unit_modulus(seed in 0u64..1000, scale in 1usize..4, diffuser in any::<bool>()) {
        let kind = if diffuser { MaskKind::ShiftedDiffuser } else { MaskKind::IidPhase };
        let mut p = MaskParams::new(kind, 4, 12, 12, 0.35, seed);
        p.feature_scale = scale;
        let set = generate_mask_set(&p).unwrap();
        prop_assert_eq!(set.len(), 4);
        for m in set.masks() {
            prop_assert!(m.data().iter().all(|c| (c.norm() - 1.0).abs() < 1e-12));
        }
        prop_assert_eq!(&generate_mask_set(&p).unwrap(), &set);
    }

    #[test]
    fn upsample_then_bin_round_trips(seed in 0u64..1000, theta in 1usize..5, w in 1usize..6, h in 1usize..6) {
        let geom = SamplingGeometry::from_detector(theta, 1.4).unwrap();
        let lr = RealImage::new(w, h, geom.lr_pitch(), random_image(w, h, seed).data().to_vec()).unwrap();
        let back = bin_intensity(&upsample_replicate(&lr, &geom, true), &geom).unwrap();
        for (a, b) in back.data().iter().zip(lr.data()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
