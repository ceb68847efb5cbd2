//! Multiplicative L-look Gamma speckle and synthetic two-region scenes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{contract, Result};
use crate::field::{IntensityImage, ScalarField, SegmentationMask};

/// Smallest value a noisy pixel may take.
pub const INTENSITY_FLOOR: f64 = 1e-6;

pub const DEFAULT_BACKGROUND_LEVEL: f64 = 60.0;
pub const DEFAULT_FOREGROUND_LEVEL: f64 = 160.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpeckleParams {
    /// Equivalent number of looks `L`.
    pub looks: u32,
    pub seed: u64,
}

impl SpeckleParams {
    pub fn new(looks: u32, seed: u64) -> Result<Self> {
        let p = Self { looks, seed };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.looks == 0 {
            return Err(contract("number of looks must be >= 1"));
        }
        Ok(())
    }
}

/// Draws `count` unit-mean Gamma(L, 1/L) variates, each the mean of `L`
/// unit exponentials. Same params, same sequence.
pub fn gamma_samples(count: usize, params: SpeckleParams) -> Result<Vec<f64>> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let looks = params.looks;
    Ok((0..count)
        .map(|_| {
            let s: f64 = (0..looks)
                .map(|_| -> f64 { Exp1.sample(&mut rng) })
                .sum::<f64>();
            s / looks as f64
        })
        .collect())
}

/// `f = u * n` with `n ~ Gamma(L, 1/L)` per pixel, floored at [`INTENSITY_FLOOR`].
pub fn gamma_speckle(clean: &IntensityImage, params: SpeckleParams) -> Result<IntensityImage> {
    let noise = gamma_samples(clean.values().len(), params)?;
    let values = clean
        .values()
        .iter()
        .zip(noise)
        .map(|(u, n)| (u * n).max(INTENSITY_FLOOR))
        .collect();
    IntensityImage::from_values(clean.width(), clean.height(), values)
}

/// Foreground geometry. Coordinates are pixel centres: `x` is the column,
/// `y` the row.
#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Disk {
        cx: f64,
        cy: f64,
        radius: f64,
    },
    /// Annulus `inner < r <= outer`; its hole is a second, interior boundary.
    Ring {
        cx: f64,
        cy: f64,
        inner: f64,
        outer: f64,
    },
    TwoBlobs {
        first: (f64, f64, f64),
        second: (f64, f64, f64),
    },
    /// Axis-aligned rectangle `[x0, x1] x [y0, y1]` minus a disk.
    RectangleWithHole {
        x0: f64,
        y0: f64,
        x1: f64,
        y1: f64,
        hole: (f64, f64, f64),
    },
}

impl Shape {
    pub fn name(&self) -> &'static str {
        match self {
            Shape::Disk { .. } => "disk",
            Shape::Ring { .. } => "ring",
            Shape::TwoBlobs { .. } => "two_blobs",
            Shape::RectangleWithHole { .. } => "rectangle_with_hole",
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let in_disk =
            |cx: f64, cy: f64, r: f64| r > 0.0 && (x - cx).powi(2) + (y - cy).powi(2) <= r * r;
        match *self {
            Shape::Disk { cx, cy, radius } => in_disk(cx, cy, radius),
            Shape::Ring {
                cx,
                cy,
                inner,
                outer,
            } => in_disk(cx, cy, outer) && !in_disk(cx, cy, inner),
            Shape::TwoBlobs {
                first: (ax, ay, ar),
                second: (bx, by, br),
            } => in_disk(ax, ay, ar) || in_disk(bx, by, br),
            Shape::RectangleWithHole {
                x0,
                y0,
                x1,
                y1,
                hole: (hx, hy, hr),
            } => x >= x0 && x <= x1 && y >= y0 && y <= y1 && !in_disk(hx, hy, hr),
        }
    }

    /// Bounding box `(xmin, ymin, xmax, ymax)` of the foreground, `None` when
    /// the shape is degenerate.
    fn extent(&self) -> Option<(f64, f64, f64, f64)> {
        let disk = |cx: f64, cy: f64, r: f64| (r > 0.0).then_some((cx - r, cy - r, cx + r, cy + r));
        match *self {
            Shape::Disk { cx, cy, radius } => disk(cx, cy, radius),
            Shape::Ring { cx, cy, outer, .. } => disk(cx, cy, outer),
            Shape::TwoBlobs {
                first: (ax, ay, ar),
                second: (bx, by, br),
            } => match (disk(ax, ay, ar), disk(bx, by, br)) {
                (Some(a), Some(b)) => {
                    Some((a.0.min(b.0), a.1.min(b.1), a.2.max(b.2), a.3.max(b.3)))
                }
                (a, b) => a.or(b),
            },
            Shape::RectangleWithHole { x0, y0, x1, y1, .. } => {
                (x1 >= x0 && y1 >= y0).then_some((x0, y0, x1, y1))
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let radii: Vec<f64> = match *self {
            Shape::Disk { radius, .. } => vec![radius],
            Shape::Ring { inner, outer, .. } => {
                if inner >= outer {
                    return Err(contract(format!(
                        "ring inner radius {inner} must be < outer {outer}"
                    )));
                }
                vec![inner, outer]
            }
            Shape::TwoBlobs { first, second } => vec![first.2, second.2],
            Shape::RectangleWithHole { hole, .. } => vec![hole.2],
        };
        if radii.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(contract(format!(
                "radii must be finite and >= 0: {radii:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub foreground_level: f64,
    pub background_level: f64,
    pub shape: Shape,
}

impl SceneSpec {
    /// 85x76 annulus: exterior and interior boundary.
    pub fn ring() -> Self {
        Self {
            width: 85,
            height: 76,
            foreground_level: DEFAULT_FOREGROUND_LEVEL,
            background_level: DEFAULT_BACKGROUND_LEVEL,
            shape: Shape::Ring {
                cx: 42.0,
                cy: 37.5,
                inner: 12.0,
                outer: 30.0,
            },
        }
    }

    /// 85x61 rectangle with a circular hole.
    pub fn rectangle_with_hole() -> Self {
        Self {
            width: 85,
            height: 61,
            foreground_level: DEFAULT_FOREGROUND_LEVEL,
            background_level: DEFAULT_BACKGROUND_LEVEL,
            shape: Shape::RectangleWithHole {
                x0: 14.0,
                y0: 12.0,
                x1: 70.0,
                y1: 48.0,
                hole: (42.0, 30.0, 9.0),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(contract("scene must be at least 1x1"));
        }
        let (fg, bg) = (self.foreground_level, self.background_level);
        if !(fg > 0.0 && bg > 0.0 && fg.is_finite() && bg.is_finite()) {
            return Err(contract(format!(
                "scene levels must be positive, got {fg} and {bg}"
            )));
        }
        if fg == bg {
            return Err(contract("foreground and background levels must differ"));
        }
        self.shape.validate()?;
        if let Some((xmin, ymin, xmax, ymax)) = self.shape.extent() {
            let (w, h) = ((self.width - 1) as f64, (self.height - 1) as f64);
            if xmin < 0.0 || ymin < 0.0 || xmax > w || ymax > h {
                return Err(contract(format!(
                    "{} spans [{xmin}, {xmax}] x [{ymin}, {ymax}], outside the {}x{} grid",
                    self.shape.name(),
                    self.width,
                    self.height
                )));
            }
        }
        Ok(())
    }
}

/// Piecewise-constant clean image and its ground-truth foreground mask.
pub fn render_scene(spec: &SceneSpec) -> Result<(IntensityImage, SegmentationMask)> {
    spec.validate()?;
    let mask = SegmentationMask::from_fn(spec.width, spec.height, |i, j| {
        spec.shape.contains(j as f64, i as f64)
    });
    let image = ScalarField::from_fn(spec.width, spec.height, |i, j| {
        if mask.get(i, j) {
            spec.foreground_level
        } else {
            spec.background_level
        }
    });
    Ok((IntensityImage::new(image)?, mask))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_radius_disk_is_empty() {
        let spec = SceneSpec {
            width: 10,
            height: 8,
            foreground_level: 160.0,
            background_level: 60.0,
            shape: Shape::Disk {
                cx: 4.0,
                cy: 4.0,
                radius: 0.0,
            },
        };
        let (img, mask) = render_scene(&spec).unwrap();
        assert_eq!(mask.count(), 0);
        assert!(img.values().iter().all(|&v| v == 60.0));
    }

    #[test]
    fn equal_levels_rejected() {
        let mut spec = SceneSpec::ring();
        spec.foreground_level = spec.background_level;
        assert!(render_scene(&spec).is_err());
    }

    #[test]
    fn oversized_shape_rejected() {
        let mut spec = SceneSpec::ring();
        spec.shape = Shape::Disk {
            cx: 42.0,
            cy: 37.0,
            radius: 40.0,
        };
        assert!(render_scene(&spec).is_err());
    }

    #[test]
    fn ring_mask_matches_inequality_count() {
        let spec = SceneSpec::ring();
        let (img, mask) = render_scene(&spec).unwrap();
        let Shape::Ring {
            cx,
            cy,
            inner,
            outer,
        } = spec.shape
        else {
            unreachable!()
        };
        let mut expected = 0;
        for y in 0..spec.height {
            for x in 0..spec.width {
                let r2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                if r2 > inner * inner && r2 <= outer * outer {
                    expected += 1;
                }
            }
        }
        assert_eq!(mask.count(), expected);
        let analytic = std::f64::consts::PI * (outer * outer - inner * inner);
        assert!((expected as f64 - analytic).abs() < 2.0 * std::f64::consts::PI * (outer + inner));
        for (k, &b) in mask.bits().iter().enumerate() {
            assert_eq!(img.values()[k], if b { 160.0 } else { 60.0 });
        }
    }

    #[test]
    fn preset_scenes_have_interior_boundaries() {
        use crate::field::Connectivity;
        for spec in [SceneSpec::ring(), SceneSpec::rectangle_with_hole()] {
            let (_, mask) = render_scene(&spec).unwrap();
            assert_eq!(
                mask.complement().component_count(Connectivity::Four),
                2,
                "{}",
                spec.shape.name()
            );
        }
    }

    #[test]
    fn speckle_is_deterministic_and_positive() {
        let (clean, _) = render_scene(&SceneSpec::ring()).unwrap();
        let p = SpeckleParams::new(2, 42).unwrap();
        let a = gamma_speckle(&clean, p).unwrap();
        let b = gamma_speckle(&clean, p).unwrap();
        assert_eq!(a, b);
        assert!(a.values().iter().all(|&v| v > 0.0));
        let c = gamma_speckle(&clean, SpeckleParams::new(2, 43).unwrap()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_looks_rejected() {
        assert!(SpeckleParams::new(0, 1).is_err());
        assert!(gamma_samples(4, SpeckleParams { looks: 0, seed: 0 }).is_err());
    }
}
