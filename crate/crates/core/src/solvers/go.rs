use std::time::Instant;

use super::{
    check_finite, convex_constants, data_term, normalized_start, relative_change,
    threshold_unchecked, Problem, Solution, SolveReport, SolverConfig,
};
use crate::energy::gcs_energy_unchecked;
use crate::error::Result;
use crate::field::ScalarField;
use crate::grid::{grad_x, grad_x_adj, grad_y, grad_y_adj, shrink_unchecked};

/// Split Bregman state: the relaxed indicator and the split/Bregman pairs.
struct State {
    phi: ScalarField,
    dx: ScalarField,
    dy: ScalarField,
    bx: ScalarField,
    by: ScalarField,
}

pub(super) fn run(problem: &Problem, cfg: &SolverConfig) -> Result<Solution> {
    let f = problem.image();
    let g = problem.edge();
    let (w, h) = f.dims();
    let mut st = State {
        phi: normalized_start(f),
        dx: ScalarField::zeros(w, h),
        dy: ScalarField::zeros(w, h),
        bx: ScalarField::zeros(w, h),
        by: ScalarField::zeros(w, h),
    };
    // shrink thresholds g / lambda are fixed for the whole solve
    let thresholds = g.map(|gv| gv / cfg.lambda);

    let mut constants = convex_constants(problem, &st.phi, cfg.gamma)?;
    let mut trace = Vec::with_capacity(cfg.max_iters);
    let start = Instant::now();
    let mut iterations = 0;
    for k in 0..cfg.max_iters {
        if cfg.refresh_constants {
            constants = convex_constants(problem, &st.phi, cfg.gamma)?;
        }
        let data = data_term(problem, constants, cfg);
        let previous = st.phi.clone();

        for _ in 0..cfg.gs_sweeps {
            gauss_seidel_sweep(&mut st, &data, cfg);
        }
        check_finite(&st.phi, k + 1)?;
        bregman_update(&mut st, &thresholds);

        iterations = k + 1;
        trace.push(gcs_energy_unchecked(&st.phi, g, &data, cfg.mu));
        if cfg.tol > 0.0 && relative_change(&st.phi, &previous) < cfg.tol {
            break;
        }
    }
    let wall_time = start.elapsed();
    if cfg.refresh_constants {
        constants = convex_constants(problem, &st.phi, cfg.gamma)?;
    }

    let mask = threshold_unchecked(&st.phi, cfg.gamma);
    Ok(Solution {
        phi: st.phi,
        mask,
        report: SolveReport {
            iterations_run: iterations,
            wall_time,
            energy_trace: trace,
            final_constants: constants,
        },
    })
}

/// One raster-order Gauss-Seidel pass of the discrete Euler-Lagrange equation
/// `lap(phi) = mu eta / lambda - Dx^T (dx - bx) - Dy^T (dy - by)`, projected
/// onto `[0, 1]`. Out-of-grid neighbours replicate the centre pixel.
fn gauss_seidel_sweep(st: &mut State, data: &ScalarField, cfg: &SolverConfig) {
    let (w, h) = st.phi.dims();
    let rx = st.dx.zip_map(&st.bx, |d, b| d - b);
    let ry = st.dy.zip_map(&st.by, |d, b| d - b);
    let ax = grad_x_adj(&rx);
    let ay = grad_y_adj(&ry);
    let scale = cfg.mu / cfg.lambda;

    let phi = st.phi.values_mut();
    for i in 0..h {
        for j in 0..w {
            let k = i * w + j;
            let c = phi[k];
            let up = if i > 0 { phi[k - w] } else { c };
            let down = if i + 1 < h { phi[k + w] } else { c };
            let left = if j > 0 { phi[k - 1] } else { c };
            let right = if j + 1 < w { phi[k + 1] } else { c };
            let alpha = ax.values()[k] + ay.values()[k];
            let beta = 0.25 * (up + down + left + right - scale * data.values()[k] + alpha);
            phi[k] = beta.clamp(0.0, 1.0);
        }
    }
}

/// `d = shrink(grad phi + b, g / lambda)`, then `b += grad phi - d`.
fn bregman_update(st: &mut State, thresholds: &ScalarField) {
    let gx = grad_x(&st.phi);
    let gy = grad_y(&st.phi);
    for (grad, d, b) in [(&gx, &mut st.dx, &mut st.bx), (&gy, &mut st.dy, &mut st.by)] {
        let (d, b) = (d.values_mut(), b.values_mut());
        for k in 0..d.len() {
            let s = grad.values()[k] + b[k];
            d[k] = shrink_unchecked(s, thresholds.values()[k]);
            b[k] = s - d[k];
        }
    }
}
