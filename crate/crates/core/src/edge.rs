//! Edge-stopping weight `g = 1 / (1 + beta |grad(f_sigma * f)|^2)` built on
//! the infinite symmetric exponential filter (ISEF).

use crate::error::{contract, Result};
use crate::field::ScalarField;
use crate::grid::central_gradient;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeParams {
    pub beta: f64,
    pub sigma: f64,
    pub kernel_size: usize,
}

impl Default for EdgeParams {
    fn default() -> Self {
        Self {
            beta: 100.0,
            sigma: 1.2,
            kernel_size: 15,
        }
    }
}

impl EdgeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(contract(format!("beta must be > 0, got {}", self.beta)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(contract(format!("sigma must be > 0, got {}", self.sigma)));
        }
        if self.kernel_size.is_multiple_of(2) {
            return Err(contract(format!(
                "kernel size must be odd, got {}",
                self.kernel_size
            )));
        }
        Ok(())
    }
}

/// Samples `exp(-|x| / sigma) / (2 sigma)` at integer offsets centred on zero
/// and renormalizes to unit sum.
pub fn isef_kernel(sigma: f64, size: usize) -> Result<Vec<f64>> {
    if size.is_multiple_of(2) {
        return Err(contract(format!("kernel size must be odd, got {size}")));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(contract(format!("sigma must be > 0, got {sigma}")));
    }
    let half = (size / 2) as i64;
    let taps: Vec<f64> = (-half..=half)
        .map(|x| (-(x.abs() as f64) / sigma).exp() / (2.0 * sigma))
        .collect();
    let total: f64 = taps.iter().sum();
    Ok(taps.into_iter().map(|t| t / total).collect())
}

/// Separable convolution with a symmetric odd-length kernel, replicate borders.
pub fn smooth(f: &ScalarField, kernel: &[f64]) -> ScalarField {
    assert!(kernel.len() % 2 == 1, "kernel length must be odd");
    let (w, h) = f.dims();
    let half = (kernel.len() / 2) as isize;
    let clampi = |k: isize, n: usize| k.clamp(0, n as isize - 1) as usize;

    let rows = ScalarField::from_fn(w, h, |i, j| {
        kernel
            .iter()
            .enumerate()
            .map(|(t, &kv)| kv * f.get(i, clampi(j as isize + t as isize - half, w)))
            .sum()
    });
    ScalarField::from_fn(w, h, |i, j| {
        kernel
            .iter()
            .enumerate()
            .map(|(t, &kv)| kv * rows.get(clampi(i as isize + t as isize - half, h), j))
            .sum()
    })
}

/// Edge weight in `(0, 1]`, small on strong edges. Raw intensities feed the
/// gradient; no rescaling happens here.
pub fn edge_map(f: &ScalarField, params: &EdgeParams) -> Result<ScalarField> {
    params.validate()?;
    let kernel = isef_kernel(params.sigma, params.kernel_size)?;
    let smoothed = smooth(f, &kernel);
    let (gx, gy) = central_gradient(&smoothed);
    Ok(gx.zip_map(&gy, |a, b| 1.0 / (1.0 + params.beta * (a * a + b * b))))
}
