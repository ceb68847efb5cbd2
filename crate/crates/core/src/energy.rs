//! Model terms: smoothed Heaviside and delta, region constants, the pixel-wise
//! data-term difference `eta`, and the energies tracked by the solvers.

use std::f64::consts::PI;

use crate::error::{contract, Error, Result};
use crate::field::{IntensityImage, ScalarField, SegmentationMask};
use crate::grid::{central_gradient, grad_x, grad_y};

/// `H_eps(phi) = (1 + (2/pi) atan(phi/eps)) / 2`.
#[inline]
pub fn heaviside_eps(phi: f64, eps: f64) -> f64 {
    debug_assert!(eps > 0.0);
    0.5 * (1.0 + (2.0 / PI) * (phi / eps).atan())
}

/// Derivative of [`heaviside_eps`]: `eps / (pi (eps^2 + phi^2))`.
#[inline]
pub fn delta_eps(phi: f64, eps: f64) -> f64 {
    debug_assert!(eps > 0.0);
    eps / (PI * (eps * eps + phi * phi))
}

/// Region representatives `(C1, C2)` for the foreground and background.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionConstants {
    pub c1: f64,
    pub c2: f64,
}

impl RegionConstants {
    pub fn new(c1: f64, c2: f64) -> Result<Self> {
        if !(c1 > 0.0 && c2 > 0.0 && c1.is_finite() && c2.is_finite()) {
            return Err(contract(format!(
                "region constants must be positive, got ({c1}, {c2})"
            )));
        }
        Ok(Self { c1, c2 })
    }

    pub fn swapped(self) -> Self {
        Self {
            c1: self.c2,
            c2: self.c1,
        }
    }
}

/// Which per-region data cost enters `eta`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum DataTermVariant {
    /// I-divergence: `C - f log C`.
    #[default]
    Gid,
    /// Gamma log-likelihood: `log C + f / C`.
    Gaa,
}

impl DataTermVariant {
    /// Cost of assigning intensity `f` to a region with constant `c`.
    #[inline]
    pub fn region_cost(self, f: f64, c: f64) -> f64 {
        match self {
            DataTermVariant::Gid => c - f * c.ln(),
            DataTermVariant::Gaa => c.ln() + f / c,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DataTermVariant::Gid => "GID",
            DataTermVariant::Gaa => "GAA",
        }
    }
}

impl std::str::FromStr for DataTermVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gid" => Ok(Self::Gid),
            "gaa" => Ok(Self::Gaa),
            other => Err(Error::Config(format!(
                "unknown data term variant {other:?}"
            ))),
        }
    }
}

/// `C1 = sum(f H) / sum(H)`, `C2 = sum(f (1-H)) / sum(1-H)` with `H = H_eps(phi)`.
pub fn region_constants_smooth(
    f: &IntensityImage,
    phi: &ScalarField,
    eps: f64,
) -> Result<RegionConstants> {
    f.field().check_same_dims(phi)?;
    if !(eps > 0.0) {
        return Err(contract(format!("eps must be > 0, got {eps}")));
    }
    let (mut fh, mut h, mut fo, mut o) = (0.0, 0.0, 0.0, 0.0);
    for (&fv, &p) in f.values().iter().zip(phi.values()) {
        let hv = heaviside_eps(p, eps);
        fh += fv * hv;
        h += hv;
        fo += fv * (1.0 - hv);
        o += 1.0 - hv;
    }
    // |phi| large enough saturates H to exactly 0 or 1 in floating point
    let mean = || f.values().iter().sum::<f64>() / f.values().len() as f64;
    let c1 = if h > 0.0 { fh / h } else { mean() };
    let c2 = if o > 0.0 { fo / o } else { mean() };
    RegionConstants::new(c1, c2)
}

/// Region means of `f` inside and outside `mask`. An empty region takes the
/// global mean.
pub fn region_constants_mask(
    f: &IntensityImage,
    mask: &SegmentationMask,
) -> Result<RegionConstants> {
    if f.dims() != mask.dims() {
        return Err(Error::DimensionMismatch {
            left: f.dims(),
            right: mask.dims(),
        });
    }
    let (mut s_in, mut n_in, mut s_out, mut n_out) = (0.0, 0usize, 0.0, 0usize);
    for (&fv, &b) in f.values().iter().zip(mask.bits()) {
        if b {
            s_in += fv;
            n_in += 1;
        } else {
            s_out += fv;
            n_out += 1;
        }
    }
    let mean = (s_in + s_out) / (n_in + n_out) as f64;
    let c1 = if n_in > 0 { s_in / n_in as f64 } else { mean };
    let c2 = if n_out > 0 {
        s_out / n_out as f64
    } else {
        mean
    };
    RegionConstants::new(c1, c2)
}

/// Pixel-wise `cost(f, C1) - cost(f, C2)`; negative values favour region 1.
pub fn eta(f: &IntensityImage, c: RegionConstants, variant: DataTermVariant) -> ScalarField {
    // both variants are affine in f
    let (offset, slope) = match variant {
        DataTermVariant::Gid => (c.c1 - c.c2, -(c.c1.ln() - c.c2.ln())),
        DataTermVariant::Gaa => (c.c1.ln() - c.c2.ln(), 1.0 / c.c1 - 1.0 / c.c2),
    };
    f.field().map(|fv| offset + slope * fv)
}

/// Convex relaxed energy `sum g (|Dx phi| + |Dy phi|) + mu sum phi eta`, with
/// forward differences. Requires `0 <= phi <= 1`.
pub fn gcs_energy(
    phi: &ScalarField,
    g: &ScalarField,
    eta_field: &ScalarField,
    mu: f64,
) -> Result<f64> {
    phi.check_same_dims(g)?;
    phi.check_same_dims(eta_field)?;
    if let Some(v) = phi.values().iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(contract(format!("phi must lie in [0, 1], found {v}")));
    }
    Ok(gcs_energy_unchecked(phi, g, eta_field, mu))
}

pub(crate) fn gcs_energy_unchecked(
    phi: &ScalarField,
    g: &ScalarField,
    eta_field: &ScalarField,
    mu: f64,
) -> f64 {
    let dx = grad_x(phi);
    let dy = grad_y(phi);
    let tv: f64 = g
        .values()
        .iter()
        .zip(dx.values().iter().zip(dy.values()))
        .map(|(gv, (a, b))| gv * (a.abs() + b.abs()))
        .sum();
    tv + mu * phi.dot(eta_field)
}

/// Weights of the level-set energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelSetWeights {
    pub mu: f64,
    pub nu: f64,
    pub eps: f64,
    pub variant: DataTermVariant,
}

/// Edge-weighted level-set energy:
/// `sum g delta_eps(phi) |grad phi| + mu sum [e1 H + e2 (1 - H)] + nu sum (|grad phi| - 1)^2 / 2`
/// where `e_k` is the region cost for `C_k` and `|grad phi|` uses central
/// differences.
pub fn gid_energy(
    phi: &ScalarField,
    f: &IntensityImage,
    c: RegionConstants,
    g: &ScalarField,
    weights: &LevelSetWeights,
) -> Result<f64> {
    phi.check_same_dims(f.field())?;
    phi.check_same_dims(g)?;
    if !(weights.eps > 0.0) {
        return Err(contract(format!("eps must be > 0, got {}", weights.eps)));
    }
    let (px, py) = central_gradient(phi);
    let mut length = 0.0;
    let mut data = 0.0;
    let mut reg = 0.0;
    for k in 0..phi.len() {
        let p = phi.values()[k];
        let mag = px.values()[k].hypot(py.values()[k]);
        let fv = f.values()[k];
        let h = heaviside_eps(p, weights.eps);
        length += g.values()[k] * delta_eps(p, weights.eps) * mag;
        data += weights.variant.region_cost(fv, c.c1) * h
            + weights.variant.region_cost(fv, c.c2) * (1.0 - h);
        reg += 0.5 * (mag - 1.0).powi(2);
    }
    Ok(length + weights.mu * data + weights.nu * reg)
}
