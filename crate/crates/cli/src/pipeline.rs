//! Segmentation runs, scene rendering and the method x scene benchmark grid.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use gidseg::energy::DataTermVariant;
use gidseg::metrics::evaluate;
use gidseg::pnm::{load_image, load_mask, save_image, save_mask, save_overlay};
use gidseg::solvers::{Problem, SolverConfig, SolverKind};
use gidseg::speckle::{gamma_speckle, render_scene};
use gidseg::{IntensityImage, SegmentationMask};

use crate::config::{parse, Input, RunConfig, ScenePreset};
use crate::error::{CliError, Result, Stage};

/// Command-line settings that take precedence over the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

pub fn load_config(path: &Path, overrides: &Overrides) -> Result<RunConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    let mut cfg = parse(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    if let Some(seed) = overrides.seed {
        cfg.speckle.seed = seed;
    }
    if let Some(out) = &overrides.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

/// Observed image (before intensity scaling) plus optional ground truth.
struct Observation {
    label: String,
    image: IntensityImage,
    truth: Option<SegmentationMask>,
}

fn observe_scene(
    cfg: &RunConfig,
    preset: ScenePreset,
) -> Result<(IntensityImage, IntensityImage, SegmentationMask)> {
    let ctx = format!("scene {preset}");
    let (clean, truth) = render_scene(&preset.spec(cfg.levels))
        .map_err(|e| CliError::from_core(Stage::Config, &ctx, e))?;
    let noisy = gamma_speckle(&clean, cfg.speckle)
        .map_err(|e| CliError::from_core(Stage::Config, &ctx, e))?;
    Ok((clean, noisy, truth))
}

fn observe(cfg: &RunConfig) -> Result<Observation> {
    match &cfg.input {
        Input::Scene(preset) => {
            let (_, image, truth) = observe_scene(cfg, *preset)?;
            Ok(Observation {
                label: preset.name().to_string(),
                image,
                truth: Some(truth),
            })
        }
        Input::Image(path) => {
            let ctx = format!("loading {}", path.display());
            let image = load_image(path).map_err(|e| CliError::from_core(Stage::Load, &ctx, e))?;
            let truth = match &cfg.ground_truth {
                None => None,
                Some(gt) => {
                    let ctx = format!("loading {}", gt.display());
                    let mask =
                        load_mask(gt).map_err(|e| CliError::from_core(Stage::Load, &ctx, e))?;
                    if mask.dims() != image.dims() {
                        return Err(CliError::Io(format!(
                            "{ctx}: ground truth is {:?}, image is {:?}",
                            mask.dims(),
                            image.dims()
                        )));
                    }
                    Some(mask)
                }
            };
            let label = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok(Observation {
                label,
                image,
                truth,
            })
        }
    }
}

fn scaled(image: &IntensityImage, scale: f64) -> Result<IntensityImage> {
    if scale == 1.0 {
        return Ok(image.clone());
    }
    IntensityImage::new(image.field().map(|v| v * scale))
        .map_err(|e| CliError::from_core(Stage::Config, "intensity_scale", e))
}

/// Row label of a method: the data term alone for the level set, `TERM+SOLVER` otherwise.
pub fn method_label(kind: SolverKind, variant: DataTermVariant) -> String {
    match kind {
        SolverKind::LevelSet => variant.name().to_string(),
        _ => format!("{}+{}", variant.name(), kind.name()),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellStats {
    pub iterations: usize,
    pub seconds: f64,
    pub dsc: Option<f64>,
    pub pp: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub method: String,
    pub scene: String,
    /// `Err` holds the failure message of a cell that did not finish.
    pub outcome: std::result::Result<CellStats, String>,
}

struct Segmented {
    stats: CellStats,
    mask: SegmentationMask,
}

fn segment_image(
    obs: &Observation,
    scale: f64,
    kind: SolverKind,
    solver: &SolverConfig,
) -> Result<Segmented> {
    let input = scaled(&obs.image, scale)?;
    let problem = Problem::new(input, &solver.edge)
        .map_err(|e| CliError::from_core(Stage::Config, "edge map", e))?;
    let ctx = format!("{} on {}", method_label(kind, solver.variant), obs.label);
    let sol = problem
        .solve(kind, solver)
        .map_err(|e| CliError::from_core(Stage::Solve, &ctx, e))?;
    let eval = evaluate(&obs.image, &sol.mask, obs.truth.as_ref())
        .map_err(|e| CliError::from_core(Stage::Solve, &ctx, e))?;
    Ok(Segmented {
        stats: CellStats {
            iterations: sol.report.iterations_run,
            seconds: sol.report.wall_time.as_secs_f64(),
            dsc: eval.dsc,
            pp: eval.pp,
        },
        mask: sol.mask,
    })
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("creating {}: {e}", dir.display())))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}

fn write_with<F>(path: PathBuf, write: F) -> Result<PathBuf>
where
    F: FnOnce(&Path) -> gidseg::Result<()>,
{
    write(&path).map_err(|e| {
        CliError::from_core(Stage::Write, &format!("writing {}", path.display()), e)
    })?;
    Ok(path)
}

#[derive(Clone, Debug)]
pub struct SegmentOutput {
    pub row: ResultRow,
    pub files: Vec<PathBuf>,
}

/// Runs the configured solver and writes `mask.pgm`, `overlay.ppm` and
/// `metrics.csv` (everything except timing, so reruns are byte-identical).
pub fn segment(cfg: &RunConfig) -> Result<SegmentOutput> {
    let obs = observe(cfg)?;
    let run = segment_image(&obs, cfg.intensity_scale, cfg.method, &cfg.solver)?;
    let dir = &cfg.output_dir;
    create_dir(dir)?;
    let row = ResultRow {
        method: method_label(cfg.method, cfg.solver.variant),
        scene: obs.label.clone(),
        outcome: Ok(run.stats),
    };
    let files = vec![
        write_with(dir.join("mask.pgm"), |p| save_mask(&run.mask, p))?,
        write_with(dir.join("overlay.ppm"), |p| {
            save_overlay(&obs.image, &run.mask, p)
        })?,
        {
            let path = dir.join("metrics.csv");
            write_text(&path, &metrics_csv(&row))?;
            path
        },
    ];
    Ok(SegmentOutput { row, files })
}

fn metrics_csv(row: &ResultRow) -> String {
    let mut out = String::from("method,scene,iterations,dsc,pp\n");
    if let Ok(s) = &row.outcome {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.6}",
            row.method,
            row.scene,
            s.iterations,
            fmt_dsc(s.dsc),
            s.pp
        );
    }
    out
}

/// Renders the configured scene and writes `clean.pgm`, `speckled.pgm` and
/// `ground_truth.pgm`.
pub fn scene(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let Input::Scene(preset) = cfg.input else {
        return Err(CliError::Config(
            "the scene command needs [input] scene = <name>".into(),
        ));
    };
    let (clean, noisy, truth) = observe_scene(cfg, preset)?;
    let dir = &cfg.output_dir;
    create_dir(dir)?;
    Ok(vec![
        write_with(dir.join("clean.pgm"), |p| save_image(clean.field(), p))?,
        write_with(dir.join("speckled.pgm"), |p| save_image(noisy.field(), p))?,
        write_with(dir.join("ground_truth.pgm"), |p| save_mask(&truth, p))?,
    ])
}

/// Method grid in table order.
pub const BENCH_METHODS: [(DataTermVariant, SolverKind); 6] = [
    (DataTermVariant::Gaa, SolverKind::LevelSet),
    (DataTermVariant::Gid, SolverKind::LevelSet),
    (DataTermVariant::Gaa, SolverKind::Go),
    (DataTermVariant::Gid, SolverKind::Go),
    (DataTermVariant::Gaa, SolverKind::Fpa),
    (DataTermVariant::Gid, SolverKind::Fpa),
];

/// Settings of one bench cell: the method preset with the configured edge
/// detector, stopping rule and iteration budget.
pub fn bench_solver(cfg: &RunConfig, variant: DataTermVariant, kind: SolverKind) -> SolverConfig {
    let max_iters = match kind {
        SolverKind::LevelSet => cfg.bench.levelset_iters,
        _ => cfg.bench.convex_iters,
    };
    SolverConfig {
        edge: cfg.solver.edge,
        tol: cfg.solver.tol,
        max_iters,
        ..SolverConfig::preset(kind, variant)
    }
}

/// Every method on every configured scene, one noise realization per scene.
/// A cell that errors is kept as a failed row.
pub fn bench(cfg: &RunConfig) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for &preset in &cfg.bench.scenes {
        let (_, image, truth) = observe_scene(cfg, preset)?;
        let obs = Observation {
            label: preset.name().to_string(),
            image,
            truth: Some(truth),
        };
        for (variant, kind) in BENCH_METHODS {
            let solver = bench_solver(cfg, variant, kind);
            let outcome = solver
                .validate(kind)
                .map_err(|e| CliError::from_core(Stage::Config, "bench cell", e))
                .and_then(|_| segment_image(&obs, cfg.intensity_scale, kind, &solver))
                .map(|s| s.stats)
                .map_err(|e| e.to_string());
            rows.push(ResultRow {
                method: method_label(kind, variant),
                scene: obs.label.clone(),
                outcome,
            });
        }
    }
    Ok(rows)
}

/// Writes `bench.csv` and `bench.txt` into the output directory.
pub fn write_bench(cfg: &RunConfig, rows: &[ResultRow]) -> Result<Vec<PathBuf>> {
    let dir = &cfg.output_dir;
    create_dir(dir)?;
    let csv = dir.join("bench.csv");
    write_text(&csv, &format_csv(rows))?;
    let table = dir.join("bench.txt");
    write_text(&table, &format_table(rows))?;
    Ok(vec![csv, table])
}

fn fmt_dsc(dsc: Option<f64>) -> String {
    dsc.map_or_else(|| "NA".to_string(), |d| format!("{d:.6}"))
}

pub const CSV_HEADER: &str = "method,scene,iterations,seconds,dsc,pp";

pub fn format_csv(rows: &[ResultRow]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for row in rows {
        let _ = match &row.outcome {
            Ok(s) => writeln!(
                out,
                "{},{},{},{:.6},{},{:.6}",
                row.method,
                row.scene,
                s.iterations,
                s.seconds,
                fmt_dsc(s.dsc),
                s.pp
            ),
            Err(_) => writeln!(
                out,
                "{},{},FAILED,FAILED,FAILED,FAILED",
                row.method, row.scene
            ),
        };
    }
    out
}

/// Aligned table; failed cells show `FAILED` and their reason below the table.
pub fn format_table(rows: &[ResultRow]) -> String {
    let header = ["method", "scene", "iterations", "seconds", "dsc", "pp"].map(String::from);
    let body: Vec<[String; 6]> = rows
        .iter()
        .map(|row| match &row.outcome {
            Ok(s) => [
                row.method.clone(),
                row.scene.clone(),
                s.iterations.to_string(),
                format!("{:.4}", s.seconds),
                s.dsc
                    .map_or_else(|| "NA".to_string(), |d| format!("{d:.4}")),
                format!("{:.4}", s.pp),
            ],
            Err(_) => [
                row.method.clone(),
                row.scene.clone(),
                "FAILED".into(),
                "-".into(),
                "-".into(),
                "-".into(),
            ],
        })
        .collect();
    let mut widths = header.clone().map(|h| h.len());
    for r in &body {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: &[String; 6]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(widths)
            .enumerate()
            .map(|(k, (c, w))| {
                if k < 2 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect();
        parts.join("  ").trim_end().to_string()
    };
    let mut out = line(&header) + "\n";
    out += &(widths
        .iter()
        .map(|w| "-".repeat(*w))
        .collect::<Vec<_>>()
        .join("  ")
        + "\n");
    for r in &body {
        out += &(line(r) + "\n");
    }
    for row in rows {
        if let Err(reason) = &row.outcome {
            let _ = writeln!(out, "FAILED {} on {}: {reason}", row.method, row.scene);
        }
    }
    out
}
