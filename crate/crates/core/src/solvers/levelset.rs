use std::time::Instant;

use super::{
    check_finite, relative_change, Problem, Solution, SolveReport, SolverConfig, CURVATURE_EPS,
};
use crate::energy::{
    delta_eps, eta, gid_energy, region_constants_smooth, LevelSetWeights, RegionConstants,
};
use crate::error::Result;
use crate::field::{ScalarField, SegmentationMask};
use crate::grid::{central_gradient, laplacian};

/// Fraction of each dimension covered by the initial `phi = +1` rectangle.
const SEED_FRACTION: f64 = 0.6;

/// Binary step: `+1` inside a centred rectangle, `-1` elsewhere.
pub(crate) fn initial_step(width: usize, height: usize) -> ScalarField {
    let span = |n: usize| {
        let margin = ((1.0 - SEED_FRACTION) * 0.5 * n as f64).round() as usize;
        (margin, n - margin)
    };
    let (c0, c1) = span(width);
    let (r0, r1) = span(height);
    ScalarField::from_fn(width, height, |i, j| {
        if (r0..r1).contains(&i) && (c0..c1).contains(&j) {
            1.0
        } else {
            -1.0
        }
    })
}

/// Divergence of `(vx, vy)` with the same central differences as the gradient.
fn divergence(vx: &ScalarField, vy: &ScalarField) -> ScalarField {
    let (dxx, _) = central_gradient(vx);
    let (_, dyy) = central_gradient(vy);
    dxx.zip_map(&dyy, |a, b| a + b)
}

pub(super) fn run(problem: &Problem, cfg: &SolverConfig) -> Result<Solution> {
    let f = problem.image();
    let g = problem.edge();
    let (w, h) = f.dims();
    let weights = LevelSetWeights {
        mu: cfg.mu,
        nu: cfg.nu,
        eps: cfg.eps,
        variant: cfg.variant,
    };

    let mut phi = initial_step(w, h);
    let mut constants = match problem.fixed_constants {
        Some(c) => c,
        None => region_constants_smooth(f, &phi, cfg.eps)?,
    };
    let mut trace = Vec::with_capacity(cfg.max_iters);

    let start = Instant::now();
    let mut iterations = 0;
    for k in 0..cfg.max_iters {
        if cfg.refresh_constants && problem.fixed_constants.is_none() {
            constants = region_constants_smooth(f, &phi, cfg.eps)?;
        }
        let data = eta(f, constants, cfg.variant);
        let next = step(&phi, g, &data, cfg);
        check_finite(&next, k + 1)?;
        let change = relative_change(&next, &phi);
        phi = next;
        iterations = k + 1;
        trace.push(gid_energy(&phi, f, constants, g, &weights)?);
        if cfg.tol > 0.0 && change < cfg.tol {
            break;
        }
    }
    let wall_time = start.elapsed();

    let mask = zero_level_mask(&phi);
    let final_constants: RegionConstants = constants;
    Ok(Solution {
        phi,
        mask,
        report: SolveReport {
            iterations_run: iterations,
            wall_time,
            energy_trace: trace,
            final_constants,
        },
    })
}

/// One forward-Euler step of
/// `delta(phi) div(g grad phi / |grad phi|) - mu delta(phi) eta + nu (lap phi - div(grad phi / |grad phi|))`.
fn step(phi: &ScalarField, g: &ScalarField, data: &ScalarField, cfg: &SolverConfig) -> ScalarField {
    let (px, py) = central_gradient(phi);
    let mag = px.zip_map(&py, |a, b| (a * a + b * b + CURVATURE_EPS).sqrt());
    let nx = px.zip_map(&mag, |a, m| a / m);
    let ny = py.zip_map(&mag, |a, m| a / m);
    let curvature = divergence(&nx, &ny);
    let edge_curvature = divergence(
        &nx.zip_map(g, |a, gv| a * gv),
        &ny.zip_map(g, |a, gv| a * gv),
    );
    let lap = laplacian(phi);

    let mut out = phi.clone();
    for (k, v) in out.values_mut().iter_mut().enumerate() {
        let d = delta_eps(*v, cfg.eps);
        let speed = d * edge_curvature.values()[k] - cfg.mu * d * data.values()[k]
            + cfg.nu * (lap.values()[k] - curvature.values()[k]);
        *v += cfg.dt * speed;
    }
    out
}

fn zero_level_mask(phi: &ScalarField) -> SegmentationMask {
    super::threshold_unchecked(phi, 0.0)
}
