mod common;

use common::{random_field, rng};
use gidseg::metrics::{dsc, pp_uniformity};
use gidseg::{IntensityImage, SegmentationMask};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn pp_matches_direct_evaluation() {
    let mut r = rng(31);
    let f = IntensityImage::new(random_field(&mut r, 6, 6, 1.0, 255.0)).unwrap();
    let mask = SegmentationMask::from_fn(6, 6, |_, _| r.random_bool(0.5));
    let vals = f.values();
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let ss = |xs: &[f64]| {
        let m = mean(xs);
        xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>()
    };
    let inside: Vec<f64> = vals
        .iter()
        .zip(mask.bits())
        .filter(|p| *p.1)
        .map(|p| *p.0)
        .collect();
    let outside: Vec<f64> = vals
        .iter()
        .zip(mask.bits())
        .filter(|p| !*p.1)
        .map(|p| *p.0)
        .collect();
    let expected = 1.0 - (ss(&inside) + ss(&outside)) / ss(vals);
    assert!((pp_uniformity(&f, &mask).unwrap() - expected).abs() < 1e-12);
}

fn mask_pair() -> impl Strategy<Value = (SegmentationMask, SegmentationMask)> {
    (1usize..12, 1usize..12).prop_flat_map(|(w, h)| {
        (
            prop::collection::vec(any::<bool>(), w * h),
            prop::collection::vec(any::<bool>(), w * h),
        )
            .prop_map(move |(a, b)| {
                (
                    SegmentationMask::new(w, h, a).unwrap(),
                    SegmentationMask::new(w, h, b).unwrap(),
                )
            })
    })
}

proptest! {
    #[test]
    fn dsc_symmetric_and_bounded((a, b) in mask_pair()) {
        let ab = dsc(&a, &b).unwrap();
        prop_assert_eq!(ab, dsc(&b, &a).unwrap());
        prop_assert!((0.0..=1.0).contains(&ab));
        if a.count() > 0 {
            prop_assert_eq!(dsc(&a, &a).unwrap(), 1.0);
        }
    }

    #[test]
    fn pp_swap_and_affine_invariance(
        fv in prop::collection::vec(1.0f64..255.0, 30),
        bits in prop::collection::vec(any::<bool>(), 30),
        scale in 0.1f64..10.0,
        shift in 0.0f64..50.0,
    ) {
        let f = IntensityImage::from_values(6, 5, fv.clone()).unwrap();
        let m = SegmentationMask::new(6, 5, bits).unwrap();
        let pp = pp_uniformity(&f, &m).unwrap();
        prop_assert!((0.0..=1.0).contains(&pp));
        prop_assert!((pp - pp_uniformity(&f, &m.complement()).unwrap()).abs() < 1e-12);
        let g = IntensityImage::from_values(6, 5, fv.iter().map(|v| scale * v + shift).collect()).unwrap();
        prop_assert!((pp - pp_uniformity(&g, &m).unwrap()).abs() < 1e-10);
    }
}
