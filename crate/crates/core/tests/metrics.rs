mod common;

use cdpsr::field::RealImage;
use cdpsr::metrics::{psnr, ssim};
use common::{psnr_oracle, random_image, ssim_oracle};
use proptest::prelude::*;

fn grid(w: usize, h: usize, f: impl Fn(usize, usize) -> f64) -> RealImage {
    let data = (0..h).flat_map(|r| (0..w).map(move |c| (r, c))).map(|(r, c)| f(r, c)).collect();
    RealImage::new(w, h, 1.0, data).unwrap()
}

// Reference values from scikit-image 0.25.2:
// structural_similarity(a, b, data_range=1.0, gaussian_weights=True,
//                       sigma=1.5, use_sample_covariance=False)
#[test]
fn ssim_matches_frozen_scikit_image_values() {
    let stripes = grid(48, 40, |r, c| (((r * 7 + c * 3) / 11) % 2) as f64);
    let inverted = stripes.map(|v| 1.0 - v);
    let s = ssim(&stripes, &inverted, 1.0).unwrap();
    assert!((s - -0.9959028834416518).abs() < 1e-9, "{s}");
    assert!(s < 0.1);

    let a = grid(48, 40, |r, c| (r as f64 / 5.0).sin() * (c as f64 / 7.0).cos() * 0.5 + 0.5);
    let b = grid(48, 40, |r, c| {
        let v = (r as f64 / 5.0).sin() * (c as f64 / 7.0).cos() * 0.5 + 0.5;
        (v + 0.1 * ((r * c) as f64 / 13.0).sin()).clamp(0.0, 1.0)
    });
    let s = ssim(&a, &b, 1.0).unwrap();
    assert!((s - 0.7340244546758645).abs() < 1e-9, "{s}");
}

#[test]
fn psnr_and_ssim_match_oracles() {
    for seed in 0..10 {
        let a = random_image(20, 17, seed);
        let b = random_image(20, 17, seed + 100).map(|v| 0.3 * v);
        let b = b.with_data(a.data().iter().zip(b.data()).map(|(x, y)| x + y).collect()).unwrap();
        let p = psnr(&a, &b, 1.0).unwrap();
        assert!((p - psnr_oracle(a.data(), b.data(), 1.0)).abs() < 1e-9);
        let s = ssim(&a, &b, 1.3).unwrap();
        assert!((s - ssim_oracle(&a, &b, 1.3)).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn metric_ranges(seed in 0u64..10_000, scale in 0.0f64..3.0) {
        let a = random_image(16, 16, seed);
        let b = random_image(16, 16, seed ^ 0xabc).map(|v| v * scale);
        let s = ssim(&a, &b, 1.0).unwrap();
        prop_assert!((-1.0..=1.0).contains(&s));
        prop_assert!(psnr(&a, &b, 1.0).unwrap() >= 0.0);
        prop_assert_eq!(ssim(&a, &a, 1.0).unwrap(), 1.0);
        prop_assert_eq!(psnr(&b, &b, 1.0).unwrap(), 100.0);
    }
}
