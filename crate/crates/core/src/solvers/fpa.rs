use std::time::Instant;

use super::{
    check_finite, convex_constants, data_term, normalized_start, relative_change,
    threshold_unchecked, Problem, Solution, SolveReport, SolverConfig,
};
use crate::energy::gcs_energy_unchecked;
use crate::error::Result;
use crate::field::ScalarField;
use crate::grid::shrink_residual;

pub(super) fn run(problem: &Problem, cfg: &SolverConfig) -> Result<Solution> {
    let f = problem.image();
    let g = problem.edge();
    let (w, h) = f.dims();
    let thresholds = g.map(|gv| gv / cfg.lambda);

    let mut phi = normalized_start(f);
    let mut next = phi.clone();
    let mut bx = ScalarField::zeros(w, h);
    let mut by = ScalarField::zeros(w, h);
    let mut constants = convex_constants(problem, &phi, cfg.gamma)?;
    let mut data = data_term(problem, constants, cfg);
    let mut trace = Vec::with_capacity(cfg.max_iters);

    let start = Instant::now();
    let mut iterations = 0;
    for k in 0..cfg.max_iters {
        dual_step(&phi, &mut bx, &mut by, &thresholds, cfg.t_relax);
        primal_step(&phi, &data, &bx, &by, cfg, &mut next);
        check_finite(&next, k + 1)?;
        let change = relative_change(&next, &phi);
        std::mem::swap(&mut phi, &mut next);
        iterations = k + 1;
        trace.push(gcs_energy_unchecked(&phi, g, &data, cfg.mu));

        if cfg.refresh_constants {
            constants = convex_constants(problem, &phi, cfg.gamma)?;
            data = data_term(problem, constants, cfg);
        }
        if cfg.tol > 0.0 && change < cfg.tol {
            break;
        }
    }
    let wall_time = start.elapsed();

    let mask = threshold_unchecked(&phi, cfg.gamma);
    Ok(Solution {
        phi,
        mask,
        report: SolveReport {
            iterations_run: iterations,
            wall_time,
            energy_trace: trace,
            final_constants: constants,
        },
    })
}

/// `b = t b + (1 - t) (I - shrink_{g/lambda})(grad phi + b)` on both axes,
/// with the forward differences of `phi` evaluated in place.
fn dual_step(
    phi: &ScalarField,
    bx: &mut ScalarField,
    by: &mut ScalarField,
    thresholds: &ScalarField,
    t: f64,
) {
    let (w, h) = phi.dims();
    let (p, thr) = (phi.values(), thresholds.values());
    let (bx, by) = (bx.values_mut(), by.values_mut());
    for i in 0..h {
        for j in 0..w {
            let k = i * w + j;
            let gx = if j + 1 < w { p[k + 1] - p[k] } else { 0.0 };
            let gy = if i + 1 < h { p[k + w] - p[k] } else { 0.0 };
            bx[k] = t * bx[k] + (1.0 - t) * shrink_residual(gx + bx[k], thr[k]);
            by[k] = t * by[k] + (1.0 - t) * shrink_residual(gy + by[k], thr[k]);
        }
    }
}

/// `phi - mu eta / alpha - (lambda / alpha)(Dx^T bx + Dy^T by)`, clamped to
/// `[0, 1]` and written to `out`. The adjoints are evaluated in place.
fn primal_step(
    phi: &ScalarField,
    data: &ScalarField,
    bx: &ScalarField,
    by: &ScalarField,
    cfg: &SolverConfig,
    out: &mut ScalarField,
) {
    let (w, h) = phi.dims();
    let data_step = cfg.mu / cfg.alpha;
    let ratio = cfg.lambda / cfg.alpha;
    let (p, e, bx, by) = (phi.values(), data.values(), bx.values(), by.values());
    let dst = out.values_mut();
    for i in 0..h {
        for j in 0..w {
            let k = i * w + j;
            let ax = (if j > 0 { bx[k - 1] } else { 0.0 }) - (if j + 1 < w { bx[k] } else { 0.0 });
            let ay = (if i > 0 { by[k - w] } else { 0.0 }) - (if i + 1 < h { by[k] } else { 0.0 });
            let next = p[k] - data_step * e[k] - ratio * (ax + ay);
            dst[k] = next.clamp(0.0, 1.0);
        }
    }
}

/// The dual recursion with `phi` and `eta` frozen: a primal step from
/// `phi_prev` using `(bx, by)`, followed by the relaxed dual update at the new
/// `phi`. For `lambda / alpha <= 1/4` this map is nonexpansive in `(bx, by)`.
pub fn fpa_dual_update(
    phi_prev: &ScalarField,
    data: &ScalarField,
    edge: &ScalarField,
    bx: &ScalarField,
    by: &ScalarField,
    cfg: &SolverConfig,
) -> (ScalarField, ScalarField) {
    let mut phi = phi_prev.clone();
    primal_step(phi_prev, data, bx, by, cfg, &mut phi);
    let thresholds = edge.map(|gv| gv / cfg.lambda);
    let (mut nx, mut ny) = (bx.clone(), by.clone());
    dual_step(&phi, &mut nx, &mut ny, &thresholds, cfg.t_relax);
    (nx, ny)
}
