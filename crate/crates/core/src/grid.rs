//! Forward differences, their exact adjoints, the 5-point Laplacian and
//! soft thresholding.
//!
//! Boundaries are replicate (Neumann): the forward difference is zero on the
//! last column/row, and the Laplacian treats out-of-grid neighbours as copies
//! of the edge pixel. With that pairing `laplacian(u) = -(Dx^T Dx + Dy^T Dy) u`
//! holds exactly.

use crate::error::{contract, Result};
use crate::field::ScalarField;

/// Forward difference along x (columns): `u(i, j+1) - u(i, j)`, zero on the
/// last column.
pub fn grad_x(u: &ScalarField) -> ScalarField {
    let (w, h) = u.dims();
    let src = u.values();
    let mut out = vec![0.0; w * h];
    for i in 0..h {
        let row = &src[i * w..(i + 1) * w];
        let dst = &mut out[i * w..(i + 1) * w];
        for j in 0..w - 1 {
            dst[j] = row[j + 1] - row[j];
        }
    }
    ScalarField::new(w, h, out).expect("shape preserved")
}

/// Forward difference along y (rows): `u(i+1, j) - u(i, j)`, zero on the
/// last row.
pub fn grad_y(u: &ScalarField) -> ScalarField {
    let (w, h) = u.dims();
    let src = u.values();
    let mut out = vec![0.0; w * h];
    for i in 0..h - 1 {
        for j in 0..w {
            out[i * w + j] = src[(i + 1) * w + j] - src[i * w + j];
        }
    }
    ScalarField::new(w, h, out).expect("shape preserved")
}

/// Adjoint of [`grad_x`]: `v(i, j-1) - v(i, j)` with the first column
/// reading `-v(i, 0)` and the last column reading `v(i, w-2)`.
pub fn grad_x_adj(v: &ScalarField) -> ScalarField {
    let (w, h) = v.dims();
    let src = v.values();
    let mut out = vec![0.0; w * h];
    if w > 1 {
        for i in 0..h {
            let row = &src[i * w..(i + 1) * w];
            let dst = &mut out[i * w..(i + 1) * w];
            dst[0] = -row[0];
            for j in 1..w - 1 {
                dst[j] = row[j - 1] - row[j];
            }
            dst[w - 1] = row[w - 2];
        }
    }
    ScalarField::new(w, h, out).expect("shape preserved")
}

/// Adjoint of [`grad_y`], the row-wise mirror of [`grad_x_adj`].
pub fn grad_y_adj(v: &ScalarField) -> ScalarField {
    let (w, h) = v.dims();
    let src = v.values();
    let mut out = vec![0.0; w * h];
    if h > 1 {
        for j in 0..w {
            out[j] = -src[j];
            out[(h - 1) * w + j] = src[(h - 2) * w + j];
        }
        for i in 1..h - 1 {
            for j in 0..w {
                out[i * w + j] = src[(i - 1) * w + j] - src[i * w + j];
            }
        }
    }
    ScalarField::new(w, h, out).expect("shape preserved")
}

/// 5-point Laplacian with replicate padding.
pub fn laplacian(u: &ScalarField) -> ScalarField {
    let (w, h) = u.dims();
    ScalarField::from_fn(w, h, |i, j| {
        let c = u.get(i, j);
        let up = if i > 0 { u.get(i - 1, j) } else { c };
        let down = if i + 1 < h { u.get(i + 1, j) } else { c };
        let left = if j > 0 { u.get(i, j - 1) } else { c };
        let right = if j + 1 < w { u.get(i, j + 1) } else { c };
        up + down + left + right - 4.0 * c
    })
}

/// Central differences in the interior, one-sided differences on the border
/// rows and columns (zero along an axis of length 1).
pub fn central_gradient(u: &ScalarField) -> (ScalarField, ScalarField) {
    let (w, h) = u.dims();
    let gx = ScalarField::from_fn(w, h, |i, j| centred(w, j, |k| u.get(i, k)));
    let gy = ScalarField::from_fn(w, h, |i, j| centred(h, i, |k| u.get(k, j)));
    (gx, gy)
}

#[inline]
fn centred(n: usize, k: usize, at: impl Fn(usize) -> f64) -> f64 {
    if n == 1 {
        0.0
    } else if k == 0 {
        at(1) - at(0)
    } else if k == n - 1 {
        at(n - 1) - at(n - 2)
    } else {
        0.5 * (at(k + 1) - at(k - 1))
    }
}

/// Soft threshold `sgn(x) * max(|x| - threshold, 0)`.
pub fn shrink(x: f64, threshold: f64) -> Result<f64> {
    if !(threshold >= 0.0) {
        return Err(contract(format!(
            "shrink threshold must be >= 0, got {threshold}"
        )));
    }
    Ok(shrink_unchecked(x, threshold))
}

#[inline]
pub(crate) fn shrink_unchecked(x: f64, threshold: f64) -> f64 {
    let m = x.abs() - threshold;
    if m > 0.0 {
        m.copysign(x)
    } else {
        0.0
    }
}

/// Weighted shrink: pixel `k` of `x` is thresholded at `threshold[k]`.
pub fn shrink_field(x: &ScalarField, threshold: &ScalarField) -> Result<ScalarField> {
    x.check_same_dims(threshold)?;
    if let Some(t) = threshold.values().iter().find(|t| !(**t >= 0.0)) {
        return Err(contract(format!("shrink threshold must be >= 0, got {t}")));
    }
    Ok(x.zip_map(threshold, shrink_unchecked))
}

/// `x - shrink(x, threshold)`, i.e. `x` clipped to `[-threshold, threshold]`.
#[inline]
pub(crate) fn shrink_residual(x: f64, threshold: f64) -> f64 {
    x.clamp(-threshold, threshold)
}
