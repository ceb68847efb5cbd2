//! Segmentation quality: region uniformity and Dice overlap.

use crate::error::{Error, Result};
use crate::field::{IntensityImage, SegmentationMask};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalResult {
    pub pp: f64,
    /// Absent when no ground truth is available.
    pub dsc: Option<f64>,
}

pub fn evaluate(
    f: &IntensityImage,
    mask: &SegmentationMask,
    gt: Option<&SegmentationMask>,
) -> Result<EvalResult> {
    let pp = pp_uniformity(f, mask)?;
    let dsc = gt.map(|gt| dsc(mask, gt)).transpose()?;
    Ok(EvalResult { pp, dsc })
}

/// `1 - (within-region sum of squares) / (total sum of squares)` over the
/// two regions `mask` and its complement, clamped to `[0, 1]`. A constant
/// image scores 1.
pub fn pp_uniformity(f: &IntensityImage, mask: &SegmentationMask) -> Result<f64> {
    if f.dims() != mask.dims() {
        return Err(Error::DimensionMismatch {
            left: f.dims(),
            right: mask.dims(),
        });
    }
    let values = f.values();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let total: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();

    let mut within = 0.0;
    for side in [true, false] {
        let region: Vec<f64> = values
            .iter()
            .zip(mask.bits())
            .filter(|(_, &b)| b == side)
            .map(|(&v, _)| v)
            .collect();
        if region.is_empty() {
            continue;
        }
        let m = region.iter().sum::<f64>() / region.len() as f64;
        within += region.iter().map(|v| (v - m).powi(2)).sum::<f64>();
    }
    if total == 0.0 {
        return Ok(1.0);
    }
    Ok((1.0 - within / total).clamp(0.0, 1.0))
}

/// `2 |CS ∩ GT| / (|CS| + |GT|)`; two empty masks score 1.
pub fn dsc(cs: &SegmentationMask, gt: &SegmentationMask) -> Result<f64> {
    if cs.dims() != gt.dims() {
        return Err(Error::DimensionMismatch {
            left: cs.dims(),
            right: gt.dims(),
        });
    }
    let (mut both, mut a, mut b) = (0usize, 0usize, 0usize);
    for (&x, &y) in cs.bits().iter().zip(gt.bits()) {
        both += (x && y) as usize;
        a += x as usize;
        b += y as usize;
    }
    if a + b == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * both as f64 / (a + b) as f64)
}
