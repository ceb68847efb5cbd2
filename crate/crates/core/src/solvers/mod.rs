//! Level-set evolution, split Bregman and the relaxed fixed-point algorithm,
//! all minimizing the edge-weighted I-divergence segmentation model.

mod fpa;
mod go;
mod levelset;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use crate::edge::{edge_map, EdgeParams};
use crate::energy::{eta, region_constants_mask, DataTermVariant, RegionConstants};
use crate::error::{contract, Error, Result};
use crate::field::{IntensityImage, ScalarField, SegmentationMask};

pub use fpa::fpa_dual_update;

/// Largest `lambda / alpha` accepted by the fixed-point solver. The sharp
/// bound depends on the grid size but always exceeds this value.
pub const FPA_MAX_STEP_RATIO: f64 = 0.25;

/// Regularization of `|grad phi|` in curvature denominators.
pub const CURVATURE_EPS: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolverKind {
    LevelSet,
    Go,
    Fpa,
}

impl SolverKind {
    pub const ALL: [SolverKind; 3] = [SolverKind::LevelSet, SolverKind::Go, SolverKind::Fpa];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::LevelSet => "LS",
            SolverKind::Go => "GO",
            SolverKind::Fpa => "FPA",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ls" | "levelset" | "level_set" => Ok(SolverKind::LevelSet),
            "go" | "bregman" => Ok(SolverKind::Go),
            "fpa" => Ok(SolverKind::Fpa),
            other => Err(Error::Config(format!("unknown solver {other:?}"))),
        }
    }
}

/// Every tunable of the three solvers. Each solver reads the subset it needs.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Data-term weight.
    pub mu: f64,
    /// Bregman / dual penalty weight.
    pub lambda: f64,
    /// Proximal weight of the fixed-point solver.
    pub alpha: f64,
    /// Level-set regularization weight.
    pub nu: f64,
    /// Heaviside smoothing width.
    pub eps: f64,
    /// Level-set time step.
    pub dt: f64,
    /// Relaxation weight `t` of the fixed-point dual update.
    pub t_relax: f64,
    /// Segmentation threshold on the relaxed `phi`.
    pub gamma: f64,
    pub variant: DataTermVariant,
    pub edge: EdgeParams,
    pub max_iters: usize,
    /// Early stop on relative change of `phi`; 0 disables it.
    pub tol: f64,
    /// Gauss-Seidel sweeps per split Bregman iteration.
    pub gs_sweeps: usize,
    /// Recompute `(C1, C2)` every iteration. When false the initial constants
    /// are kept throughout.
    pub refresh_constants: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mu: 5.0,
            lambda: 1.0,
            alpha: 10.0,
            nu: 1.0,
            eps: 1.0,
            dt: 0.1,
            t_relax: 1e-5,
            gamma: 0.5,
            variant: DataTermVariant::Gid,
            edge: EdgeParams::default(),
            max_iters: 10,
            tol: 0.0,
            gs_sweeps: 1,
            refresh_constants: true,
        }
    }
}

impl SolverConfig {
    /// Level-set settings for the synthetic benchmark scenes; the GAA data
    /// term lives on a different scale and uses `mu = 255`.
    pub fn levelset(variant: DataTermVariant) -> Self {
        let mu = match variant {
            DataTermVariant::Gid => 3.0,
            DataTermVariant::Gaa => 255.0,
        };
        Self {
            mu,
            nu: 1.0,
            eps: 1.0,
            dt: 0.1,
            variant,
            max_iters: 20,
            ..Self::default()
        }
    }

    pub fn go(variant: DataTermVariant) -> Self {
        Self {
            mu: 5.0,
            lambda: 0.01,
            gamma: 0.5,
            variant,
            max_iters: 10,
            ..Self::default()
        }
    }

    pub fn fpa(variant: DataTermVariant) -> Self {
        Self {
            mu: 5.0,
            lambda: 1.0,
            alpha: 10.0,
            t_relax: 1e-5,
            gamma: 0.5,
            variant,
            max_iters: 10,
            ..Self::default()
        }
    }

    /// Benchmark preset for a solver.
    pub fn preset(kind: SolverKind, variant: DataTermVariant) -> Self {
        match kind {
            SolverKind::LevelSet => Self::levelset(variant),
            SolverKind::Go => Self::go(variant),
            SolverKind::Fpa => Self::fpa(variant),
        }
    }

    /// Checks the fields `kind` depends on.
    pub fn validate(&self, kind: SolverKind) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be > 0, got {v}")))
            }
        };
        let open_unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must lie in (0, 1), got {v}")))
            }
        };
        positive("mu", self.mu)?;
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be >= 1".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::Config(format!("tol must be >= 0, got {}", self.tol)));
        }
        self.edge
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        match kind {
            SolverKind::LevelSet => {
                positive("eps", self.eps)?;
                positive("dt", self.dt)?;
                if !(self.nu >= 0.0 && self.nu.is_finite()) {
                    return Err(Error::Config(format!("nu must be >= 0, got {}", self.nu)));
                }
            }
            SolverKind::Go => {
                positive("lambda", self.lambda)?;
                open_unit("gamma", self.gamma)?;
                if self.gs_sweeps == 0 {
                    return Err(Error::Config("gs_sweeps must be >= 1".into()));
                }
            }
            SolverKind::Fpa => {
                positive("lambda", self.lambda)?;
                positive("alpha", self.alpha)?;
                open_unit("gamma", self.gamma)?;
                open_unit("t_relax", self.t_relax)?;
                let ratio = self.lambda / self.alpha;
                if ratio > FPA_MAX_STEP_RATIO {
                    return Err(Error::Config(format!(
                        "lambda/alpha = {ratio} exceeds the stability bound {FPA_MAX_STEP_RATIO}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub iterations_run: usize,
    /// Wall time of the iteration loop only.
    pub wall_time: Duration,
    /// Model energy after each iteration.
    pub energy_trace: Vec<f64>,
    pub final_constants: RegionConstants,
}

impl SolveReport {
    pub fn seconds_per_iteration(&self) -> f64 {
        self.wall_time.as_secs_f64() / self.iterations_run.max(1) as f64
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub phi: ScalarField,
    pub mask: SegmentationMask,
    pub report: SolveReport,
}

/// Observed image with its precomputed edge weight.
#[derive(Clone, Debug)]
pub struct Problem {
    image: IntensityImage,
    edge: ScalarField,
    fixed_constants: Option<RegionConstants>,
}

impl Problem {
    pub fn new(image: IntensityImage, params: &EdgeParams) -> Result<Self> {
        let edge = edge_map(image.field(), params)?;
        Ok(Self {
            image,
            edge,
            fixed_constants: None,
        })
    }

    pub fn with_edge(image: IntensityImage, edge: ScalarField) -> Result<Self> {
        image.field().check_same_dims(&edge)?;
        if let Some(v) = edge.values().iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(contract(format!("edge weight must be positive, found {v}")));
        }
        Ok(Self {
            image,
            edge,
            fixed_constants: None,
        })
    }

    /// Pins `(C1, C2)` for the whole solve, overriding the initial estimate.
    pub fn with_fixed_constants(mut self, c: RegionConstants) -> Self {
        self.fixed_constants = Some(c);
        self
    }

    pub fn image(&self) -> &IntensityImage {
        &self.image
    }

    pub fn edge(&self) -> &ScalarField {
        &self.edge
    }

    pub fn solve(&self, kind: SolverKind, cfg: &SolverConfig) -> Result<Solution> {
        cfg.validate(kind)?;
        match kind {
            SolverKind::LevelSet => levelset::run(self, cfg),
            SolverKind::Go => go::run(self, cfg),
            SolverKind::Fpa => fpa::run(self, cfg),
        }
    }
}

pub fn solve(kind: SolverKind, f: &IntensityImage, cfg: &SolverConfig) -> Result<Solution> {
    cfg.validate(kind)?;
    Problem::new(f.clone(), &cfg.edge)?.solve(kind, cfg)
}

/// Gradient-flow level-set evolution, mask `{phi > 0}`.
pub fn solve_levelset(f: &IntensityImage, cfg: &SolverConfig) -> Result<Solution> {
    solve(SolverKind::LevelSet, f, cfg)
}

/// Split Bregman on the convex relaxation, mask `{phi > gamma}`.
pub fn solve_go(f: &IntensityImage, cfg: &SolverConfig) -> Result<Solution> {
    solve(SolverKind::Go, f, cfg)
}

/// Relaxed fixed-point iteration on the convex relaxation, mask `{phi > gamma}`.
pub fn solve_fpa(f: &IntensityImage, cfg: &SolverConfig) -> Result<Solution> {
    solve(SolverKind::Fpa, f, cfg)
}

/// `{x : phi(x) > gamma}`, strict.
pub fn threshold(phi: &ScalarField, gamma: f64) -> Result<SegmentationMask> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(contract(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    Ok(threshold_unchecked(phi, gamma))
}

pub(crate) fn threshold_unchecked(phi: &ScalarField, level: f64) -> SegmentationMask {
    let bits = phi.values().iter().map(|&v| v > level).collect();
    SegmentationMask::new(phi.width(), phi.height(), bits).expect("shape preserved")
}

/// `phi0 = f / max(f)`, shared by both convex solvers.
pub(crate) fn normalized_start(f: &IntensityImage) -> ScalarField {
    let m = f.field().max();
    f.field().map(|v| v / m)
}

/// Constants for the current relaxed iterate, or the pinned pair.
pub(crate) fn convex_constants(
    problem: &Problem,
    phi: &ScalarField,
    gamma: f64,
) -> Result<RegionConstants> {
    match problem.fixed_constants {
        Some(c) => Ok(c),
        None => region_constants_mask(&problem.image, &threshold_unchecked(phi, gamma)),
    }
}

pub(crate) fn data_term(problem: &Problem, c: RegionConstants, cfg: &SolverConfig) -> ScalarField {
    eta(&problem.image, c, cfg.variant)
}

pub(crate) fn check_finite(phi: &ScalarField, iteration: usize) -> Result<()> {
    if let Some(k) = phi.values().iter().position(|v| !v.is_finite()) {
        return Err(Error::Diverged {
            iteration,
            reason: format!("non-finite phi at pixel {k} ({})", phi.values()[k]),
        });
    }
    Ok(())
}

/// `||a - b|| / ||b||`, guarded for a zero reference.
pub(crate) fn relative_change(new: &ScalarField, old: &ScalarField) -> f64 {
    let diff: f64 = new
        .values()
        .iter()
        .zip(old.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    diff.sqrt() / old.norm().max(f64::MIN_POSITIVE)
}
