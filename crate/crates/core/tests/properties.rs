use dwtmark::colorspace::{rgb_to_ycbcr_pixel, ycbcr_to_rgb_pixel};
use dwtmark::imagecodec::parse_key;
use dwtmark::metrics::{error_bits, psnr};
use dwtmark::watermark::{embed_nibble, pack_bits, unpack_nibbles};
use dwtmark::{forward_2d, inverse_2d, AuthKey, ColorMode, FilterPair, Plane, RgbImage, WatermarkBits};
use proptest::prelude::*;

fn plane(w: usize, h: usize) -> impl Strategy<Value = Plane> {
    prop::collection::vec(-300.0f64..300.0, w * h).prop_map(move |v| Plane::from_vec(w, h, v).unwrap())
}

fn dims() -> impl Strategy<Value = (usize, usize, u32)> {
    (1u32..=3, 1usize..=4, 1usize..=4).prop_map(|(levels, a, b)| (a << levels, b << levels, levels))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn wavelet_perfect_reconstruction(((w, h, levels), seed) in (dims(), any::<u64>())) {
        let p = Plane::from_fn(w, h, |r, c| ((r * 31 + c * 17) as u64 ^ seed) as f64 % 255.0);
        let f = FilterPair::cdf97();
        let back = inverse_2d(&forward_2d(&p, levels, &f).unwrap(), &f).unwrap();
        for (a, b) in p.data().iter().zip(back.data()) {
            prop_assert!((a - b).abs() <= 1e-9 * 255.0);
        }
    }

    #[test]
    fn wavelet_linearity(a in plane(16, 16), b in plane(16, 16), k in -3.0f64..3.0) {
        let f = FilterPair::cdf97();
        let mix = Plane::from_vec(16, 16, a.data().iter().zip(b.data()).map(|(x, y)| x + k * y).collect()).unwrap();
        let (pa, pb, pm) = (
            forward_2d(&a, 2, &f).unwrap(),
            forward_2d(&b, 2, &f).unwrap(),
            forward_2d(&mix, 2, &f).unwrap(),
        );
        for ((x, y), m) in pa.ll.data().iter().zip(pb.ll.data()).zip(pm.ll.data()) {
            prop_assert!((x + k * y - m).abs() < 1e-8);
        }
    }

    #[test]
    fn color_round_trip(rgb in any::<[u8; 3]>()) {
        prop_assert_eq!(ycbcr_to_rgb_pixel(rgb_to_ycbcr_pixel(rgb)), rgb);
    }

    #[test]
    fn nibble_is_nearest_admissible(q in 0u64..1_000_000, n in 0u8..16) {
        let v = embed_nibble(q, n);
        prop_assert_eq!(v % 16, n as u64);
        prop_assert!(v.abs_diff(q) <= 8);
        // ties go to the larger candidate
        prop_assert!((v + 16).abs_diff(q) > v.abs_diff(q));
        if v >= 16 {
            prop_assert!((v - 16).abs_diff(q) >= v.abs_diff(q));
        }
    }

    #[test]
    fn nibble_packing_round_trip(bits in prop::collection::vec(any::<bool>(), 1..200)) {
        prop_assert_eq!(unpack_nibbles(&pack_bits(&bits), bits.len()), bits);
    }

    #[test]
    fn error_bits_is_a_metric(
        a in prop::collection::vec(any::<bool>(), 36),
        b in prop::collection::vec(any::<bool>(), 36),
        c in prop::collection::vec(any::<bool>(), 36),
    ) {
        let [a, b, c] = [a, b, c].map(|v| WatermarkBits::unchecked(6, 6, v).unwrap());
        let d = |x: &WatermarkBits, y: &WatermarkBits| error_bits(x, y).unwrap();
        prop_assert_eq!(d(&a, &a), 0);
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
    }

    #[test]
    fn psnr_decreases_with_larger_error(seed in any::<u8>(), small in 1u8..10, extra in 1u8..10) {
        let base = RgbImage::from_fn(8, 8, |r, c| [seed.wrapping_add((r * 8 + c) as u8) / 2, 60, 90]).unwrap();
        let shift = |d: u8| RgbImage::from_fn(8, 8, |r, c| base.pixel(r, c).map(|v| v + d)).unwrap();
        let near = psnr(&base, &shift(small)).unwrap();
        let far = psnr(&base, &shift(small + extra)).unwrap();
        prop_assert!(near > far);
    }

    #[test]
    fn key_json_round_trip(levels in 1u32..=3, n_bits in 1usize..64, mode in prop_oneof![Just(ColorMode::Ycbcr), Just(ColorMode::Rgb)]) {
        let key = AuthKey {
            format_version: dwtmark::imagecodec::KEY_FORMAT_VERSION,
            color_mode: mode,
            levels,
            subband_id: AuthKey::subband_label(levels),
            host_width: 64,
            host_height: 64,
            wm_width: n_bits,
            wm_height: 1,
            quant_step: 1.5,
            site_indices: dwtmark::watermark::select_sites(64 >> levels, 64 >> levels, n_bits).unwrap(),
        };
        let text = serde_json::to_string(&key).unwrap();
        prop_assert_eq!(parse_key(&text).unwrap(), key);
    }
}
