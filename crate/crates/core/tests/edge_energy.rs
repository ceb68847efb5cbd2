mod common;

use common::{random_field, rng};
use gidseg::edge::{edge_map, isef_kernel, smooth, EdgeParams};
use gidseg::energy::{
    delta_eps, eta, gcs_energy, gid_energy, heaviside_eps, region_constants_mask,
    region_constants_smooth, DataTermVariant, LevelSetWeights, RegionConstants,
};
use gidseg::{IntensityImage, ScalarField, SegmentationMask};
use proptest::prelude::*;
use rand::Rng;

fn positive_image(r: &mut impl Rng, w: usize, h: usize) -> IntensityImage {
    IntensityImage::new(random_field(r, w, h, 1.0, 255.0)).unwrap()
}

#[test]
fn smoothing_matches_direct_2d_convolution() {
    let mut r = rng(21);
    let f = random_field(&mut r, 8, 8, 0.0, 255.0);
    let k = isef_kernel(1.2, 5).unwrap();
    let s = smooth(&f, &k);
    let clampi = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    for i in 0..8 {
        for j in 0..8 {
            let mut acc = 0.0;
            for a in 0..5 {
                for b in 0..5 {
                    let ii = clampi(i as isize + a as isize - 2, 8);
                    let jj = clampi(j as isize + b as isize - 2, 8);
                    acc += k[a] * k[b] * f.get(ii, jj);
                }
            }
            assert!((s.get(i, j) - acc).abs() < 1e-10, "({i},{j})");
        }
    }
}

#[test]
fn edge_map_matches_scalar_formula() {
    let mut r = rng(22);
    let f = random_field(&mut r, 9, 7, 0.0, 255.0);
    let p = EdgeParams {
        beta: 100.0,
        sigma: 1.2,
        kernel_size: 15,
    };
    let g = edge_map(&f, &p).unwrap();
    let s = smooth(&f, &isef_kernel(1.2, 15).unwrap());
    let (w, h) = f.dims();
    for i in 0..h {
        for j in 0..w {
            let dx = match j {
                0 => s.get(i, 1) - s.get(i, 0),
                j if j == w - 1 => s.get(i, j) - s.get(i, j - 1),
                j => (s.get(i, j + 1) - s.get(i, j - 1)) / 2.0,
            };
            let dy = match i {
                0 => s.get(1, j) - s.get(0, j),
                i if i == h - 1 => s.get(i, j) - s.get(i - 1, j),
                i => (s.get(i + 1, j) - s.get(i - 1, j)) / 2.0,
            };
            let expected = 1.0 / (1.0 + 100.0 * (dx * dx + dy * dy));
            assert!((g.get(i, j) - expected).abs() < 1e-12);
        }
    }
}

#[test]
fn delta_matches_finite_difference_of_heaviside() {
    let h = 1e-4;
    for eps in [0.5, 1.0, 2.0] {
        let mut phi = -10.0 * eps;
        while phi <= 10.0 * eps {
            let fd = (heaviside_eps(phi + h, eps) - heaviside_eps(phi - h, eps)) / (2.0 * h);
            assert!(
                (fd - delta_eps(phi, eps)).abs() < 1e-6,
                "phi {phi} eps {eps}"
            );
            phi += 0.05 * eps;
        }
    }
}

#[test]
fn smooth_constants_match_direct_sums() {
    let mut r = rng(23);
    let f = positive_image(&mut r, 6, 6);
    let phi = random_field(&mut r, 6, 6, -3.0, 3.0);
    let c = region_constants_smooth(&f, &phi, 1.0).unwrap();
    let (mut a, mut b, mut cc, mut d) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..6 {
        for j in 0..6 {
            let hv = 0.5 * (1.0 + (2.0 / std::f64::consts::PI) * phi.get(i, j).atan());
            a += f.get(i, j) * hv;
            b += hv;
            cc += f.get(i, j) * (1.0 - hv);
            d += 1.0 - hv;
        }
    }
    assert!((c.c1 - a / b).abs() < 1e-10);
    assert!((c.c2 - cc / d).abs() < 1e-10);
}

#[test]
fn mask_constants_match_direct_sums() {
    let mut r = rng(24);
    let f = positive_image(&mut r, 7, 5);
    let mask = SegmentationMask::from_fn(7, 5, |_, _| r.random_bool(0.4));
    let c = region_constants_mask(&f, &mask).unwrap();
    let (mut s1, mut n1, mut s2, mut n2) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..5 {
        for j in 0..7 {
            if mask.get(i, j) {
                s1 += f.get(i, j);
                n1 += 1.0;
            } else {
                s2 += f.get(i, j);
                n2 += 1.0;
            }
        }
    }
    assert!((c.c1 - s1 / n1).abs() < 1e-10 && (c.c2 - s2 / n2).abs() < 1e-10);
}

#[test]
fn eta_matches_region_costs_for_both_variants() {
    let mut r = rng(25);
    let f = positive_image(&mut r, 5, 4);
    let c = RegionConstants::new(140.0, 70.0).unwrap();
    let gid = eta(&f, c, DataTermVariant::Gid);
    let gaa = eta(&f, c, DataTermVariant::Gaa);
    for (k, &fv) in f.values().iter().enumerate() {
        let e_gid = (140.0 - fv * 140f64.ln()) - (70.0 - fv * 70f64.ln());
        let e_gaa = (140f64.ln() + fv / 140.0) - (70f64.ln() + fv / 70.0);
        assert!((gid.values()[k] - e_gid).abs() < 1e-9);
        assert!((gaa.values()[k] - e_gaa).abs() < 1e-12);
    }
}

#[test]
fn gcs_energy_matches_loop() {
    let mut r = rng(26);
    let phi = random_field(&mut r, 5, 4, 0.0, 1.0);
    let g = random_field(&mut r, 5, 4, 0.1, 1.0);
    let e = random_field(&mut r, 5, 4, -2.0, 2.0);
    let mut expected = 0.0;
    for i in 0..4 {
        for j in 0..5 {
            let dx = if j < 4 {
                phi.get(i, j + 1) - phi.get(i, j)
            } else {
                0.0
            };
            let dy = if i < 3 {
                phi.get(i + 1, j) - phi.get(i, j)
            } else {
                0.0
            };
            expected += g.get(i, j) * (dx.abs() + dy.abs()) + 3.0 * phi.get(i, j) * e.get(i, j);
        }
    }
    assert!((gcs_energy(&phi, &g, &e, 3.0).unwrap() - expected).abs() < 1e-10);
}

#[test]
fn gid_energy_matches_loop() {
    let mut r = rng(27);
    let f = positive_image(&mut r, 6, 6);
    let phi = random_field(&mut r, 6, 6, -2.0, 2.0);
    let g = random_field(&mut r, 6, 6, 0.1, 1.0);
    let c = RegionConstants::new(90.0, 150.0).unwrap();
    let (mu, nu, eps) = (0.7, 1.3, 0.8);
    let weights = LevelSetWeights {
        mu,
        nu,
        eps,
        variant: DataTermVariant::Gid,
    };
    let cd = |n: usize, k: usize, at: &dyn Fn(usize) -> f64| {
        if k == 0 {
            at(1) - at(0)
        } else if k == n - 1 {
            at(k) - at(k - 1)
        } else {
            (at(k + 1) - at(k - 1)) / 2.0
        }
    };
    let mut expected = 0.0;
    for i in 0..6 {
        for j in 0..6 {
            let px = cd(6, j, &|k| phi.get(i, k));
            let py = cd(6, i, &|k| phi.get(k, j));
            let mag = (px * px + py * py).sqrt();
            let p = phi.get(i, j);
            let h = 0.5 * (1.0 + (2.0 / std::f64::consts::PI) * (p / eps).atan());
            let d = eps / (std::f64::consts::PI * (eps * eps + p * p));
            let fv = f.get(i, j);
            expected += g.get(i, j) * d * mag
                + mu * ((90.0 - fv * 90f64.ln()) * h + (150.0 - fv * 150f64.ln()) * (1.0 - h))
                + nu * 0.5 * (mag - 1.0).powi(2);
        }
    }
    let got = gid_energy(&phi, &f, c, &g, &weights).unwrap();
    assert!((got - expected).abs() < 1e-8 * expected.abs().max(1.0));
}

proptest! {
    #[test]
    fn edge_weight_bounds_and_invariances(
        values in prop::collection::vec(1.0f64..255.0, 36),
        offset in 0.0f64..100.0,
        beta in 0.1f64..200.0,
    ) {
        let f = ScalarField::new(6, 6, values).unwrap();
        let p = EdgeParams { beta, ..Default::default() };
        let g = edge_map(&f, &p).unwrap();
        prop_assert!(g.values().iter().all(|&v| v > 0.0 && v <= 1.0));
        let shifted = edge_map(&f.map(|v| v + offset), &p).unwrap();
        for (a, b) in g.values().iter().zip(shifted.values()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        let stronger = edge_map(&f, &EdgeParams { beta: beta * 2.0, ..p }).unwrap();
        prop_assert!(stronger.values().iter().zip(g.values()).all(|(s, w)| s <= w));
    }

    #[test]
    fn smooth_constants_are_convex_combinations(
        fv in prop::collection::vec(1.0f64..255.0, 25),
        pv in prop::collection::vec(-5.0f64..5.0, 25),
    ) {
        let f = IntensityImage::from_values(5, 5, fv.clone()).unwrap();
        let phi = ScalarField::new(5, 5, pv).unwrap();
        let c = region_constants_smooth(&f, &phi, 1.0).unwrap();
        let lo = fv.iter().copied().fold(f64::INFINITY, f64::min) - 1e-9;
        let hi = fv.iter().copied().fold(0.0, f64::max) + 1e-9;
        prop_assert!(c.c1 >= lo && c.c1 <= hi && c.c2 >= lo && c.c2 <= hi);
    }

    #[test]
    fn eta_is_antisymmetric(fv in prop::collection::vec(1.0f64..255.0, 9), a in 1.0f64..255.0, b in 1.0f64..255.0) {
        let f = IntensityImage::from_values(3, 3, fv).unwrap();
        let c = RegionConstants::new(a, b).unwrap();
        for v in [DataTermVariant::Gid, DataTermVariant::Gaa] {
            let e = eta(&f, c, v);
            let s = eta(&f, c.swapped(), v);
            for (x, y) in e.values().iter().zip(s.values()) {
                prop_assert!((x + y).abs() < 1e-9 * x.abs().max(1.0));
            }
        }
    }

    #[test]
    fn gcs_energy_is_convex(
        a in prop::collection::vec(0.0f64..=1.0, 16),
        b in prop::collection::vec(0.0f64..=1.0, 16),
        gv in prop::collection::vec(0.01f64..1.0, 16),
        ev in prop::collection::vec(-3.0f64..3.0, 16),
    ) {
        let pa = ScalarField::new(4, 4, a).unwrap();
        let pb = ScalarField::new(4, 4, b).unwrap();
        let g = ScalarField::new(4, 4, gv).unwrap();
        let e = ScalarField::new(4, 4, ev).unwrap();
        let mid = pa.zip_map(&pb, |x, y| 0.5 * (x + y));
        let ea = gcs_energy(&pa, &g, &e, 2.0).unwrap();
        let eb = gcs_energy(&pb, &g, &e, 2.0).unwrap();
        let em = gcs_energy(&mid, &g, &e, 2.0).unwrap();
        prop_assert!(em <= 0.5 * (ea + eb) + 1e-12);
    }
}
