//! Run configuration in a sectioned `key = value` text format.
//!
//! ```text
//! [input]
//! # exactly one of scene / image
//! scene = ring
//! ground_truth = gt.pgm
//! intensity_scale = 1
//! [scene]
//! foreground = 160
//! background = 60
//! [speckle]
//! looks = 2
//! seed = 0
//! [solver]
//! method = FPA
//! variant = GID
//! ...
//! ```
//!
//! Missing keys take the preset of the configured method; [`emit`] writes every
//! field so that `parse(&emit(cfg)) == cfg`.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use gidseg::edge::EdgeParams;
use gidseg::energy::DataTermVariant;
use gidseg::solvers::{SolverConfig, SolverKind};
use gidseg::speckle::{
    SceneSpec, SpeckleParams, DEFAULT_BACKGROUND_LEVEL, DEFAULT_FOREGROUND_LEVEL,
};
use ini::{EscapePolicy, Ini, LineSeparator, ParseOption, WriteOption};

use crate::error::{CliError, Result, Stage};

/// Built-in synthetic two-region scenes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenePreset {
    Ring,
    RectangleWithHole,
}

impl ScenePreset {
    pub fn name(self) -> &'static str {
        match self {
            ScenePreset::Ring => "ring",
            ScenePreset::RectangleWithHole => "rectangle_with_hole",
        }
    }

    pub fn spec(self, levels: SceneLevels) -> SceneSpec {
        let base = match self {
            ScenePreset::Ring => SceneSpec::ring(),
            ScenePreset::RectangleWithHole => SceneSpec::rectangle_with_hole(),
        };
        SceneSpec {
            foreground_level: levels.foreground,
            background_level: levels.background,
            ..base
        }
    }
}

impl fmt::Display for ScenePreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenePreset {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ring" => Ok(ScenePreset::Ring),
            "rectangle_with_hole" => Ok(ScenePreset::RectangleWithHole),
            other => Err(CliError::Config(format!(
                "unknown scene {other:?} (ring, rectangle_with_hole)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SceneLevels {
    pub foreground: f64,
    pub background: f64,
}

impl Default for SceneLevels {
    fn default() -> Self {
        Self {
            foreground: DEFAULT_FOREGROUND_LEVEL,
            background: DEFAULT_BACKGROUND_LEVEL,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Input {
    Image(PathBuf),
    Scene(ScenePreset),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub scenes: Vec<ScenePreset>,
    /// Iteration budget of the level-set rows.
    pub levelset_iters: usize,
    /// Iteration budget of the GO and FPA rows.
    pub convex_iters: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            scenes: vec![ScenePreset::Ring, ScenePreset::RectangleWithHole],
            levelset_iters: 20,
            convex_iters: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub input: Input,
    pub ground_truth: Option<PathBuf>,
    /// Multiplies the observed image before edge detection and solving.
    pub intensity_scale: f64,
    pub levels: SceneLevels,
    pub speckle: SpeckleParams,
    pub method: SolverKind,
    pub solver: SolverConfig,
    pub output_dir: PathBuf,
    pub bench: BenchConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: Input::Scene(ScenePreset::Ring),
            ground_truth: None,
            intensity_scale: 1.0,
            levels: SceneLevels::default(),
            speckle: SpeckleParams { looks: 2, seed: 0 },
            method: SolverKind::Fpa,
            solver: SolverConfig::fpa(DataTermVariant::Gid),
            output_dir: PathBuf::from("out"),
            bench: BenchConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let config_err = |ctx: &str, e| CliError::from_core(Stage::Config, ctx, e);
        self.solver
            .validate(self.method)
            .map_err(|e| config_err("[solver]", e))?;
        self.speckle
            .validate()
            .map_err(|e| config_err("[speckle]", e))?;
        if !(self.intensity_scale > 0.0 && self.intensity_scale.is_finite()) {
            return Err(CliError::Config(format!(
                "intensity_scale must be > 0, got {}",
                self.intensity_scale
            )));
        }
        for scene in self.scenes_in_use() {
            scene
                .spec(self.levels)
                .validate()
                .map_err(|e| config_err("[scene]", e))?;
        }
        if self.bench.scenes.is_empty() {
            return Err(CliError::Config("[bench] needs at least one scene".into()));
        }
        if self.bench.levelset_iters == 0 || self.bench.convex_iters == 0 {
            return Err(CliError::Config(
                "[bench] iteration budgets must be >= 1".into(),
            ));
        }
        Ok(())
    }

    fn scenes_in_use(&self) -> Vec<ScenePreset> {
        let mut v = self.bench.scenes.clone();
        if let Input::Scene(s) = self.input {
            v.push(s);
        }
        v
    }
}

/// Keys accepted in each section.
const SCHEMA: &[(&str, &[&str])] = &[
    (
        "input",
        &["image", "scene", "ground_truth", "intensity_scale"],
    ),
    ("scene", &["foreground", "background"]),
    ("speckle", &["looks", "seed"]),
    (
        "solver",
        &[
            "method",
            "variant",
            "mu",
            "lambda",
            "alpha",
            "nu",
            "eps",
            "dt",
            "t_relax",
            "gamma",
            "max_iters",
            "tol",
            "gs_sweeps",
            "refresh_constants",
        ],
    ),
    ("edge", &["beta", "sigma", "kernel_size"]),
    ("output", &["dir"]),
    ("bench", &["scenes", "levelset_iters", "convex_iters"]),
];

struct Reader<'a> {
    ini: &'a Ini,
}

impl Reader<'_> {
    fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.ini
            .section(Some(section))
            .and_then(|p| p.get(key))
            .map(str::trim)
    }

    fn value<T: FromStr>(&self, section: &str, key: &str, default: T) -> Result<T> {
        match self.raw(section, key) {
            None => Ok(default),
            Some(s) => s.parse().map_err(|_| {
                CliError::Config(format!("[{section}] {key} = {s:?} is not a valid value"))
            }),
        }
    }

    fn parsed<T>(&self, section: &str, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        match self.raw(section, key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|e| CliError::Config(format!("[{section}] {key}: {e}"))),
        }
    }
}

fn check_schema(ini: &Ini) -> Result<()> {
    for (section, props) in ini.iter() {
        let Some(name) = section else {
            if let Some((key, _)) = props.iter().next() {
                return Err(CliError::Config(format!(
                    "key {key:?} appears before any [section]"
                )));
            }
            continue;
        };
        let allowed = SCHEMA
            .iter()
            .find(|(s, _)| *s == name)
            .map(|(_, keys)| *keys)
            .ok_or_else(|| CliError::Config(format!("unknown section [{name}]")))?;
        let mut seen = BTreeSet::new();
        for (key, _) in props.iter() {
            if !allowed.contains(&key) {
                return Err(CliError::Config(format!("unknown key {key:?} in [{name}]")));
            }
            if !seen.insert(key) {
                return Err(CliError::Config(format!(
                    "duplicate key {key:?} in [{name}]"
                )));
            }
        }
    }
    Ok(())
}

pub fn parse(text: &str) -> Result<RunConfig> {
    let opt = ParseOption {
        enabled_quote: false,
        enabled_escape: false,
        ..ParseOption::default()
    };
    let ini = Ini::load_from_str_opt(text, opt)
        .map_err(|e| CliError::Config(format!("line {}: {}", e.line, e.msg)))?;
    check_schema(&ini)?;
    let r = Reader { ini: &ini };

    let input = match (r.raw("input", "image"), r.raw("input", "scene")) {
        (Some(path), None) => Input::Image(PathBuf::from(path)),
        (None, Some(scene)) => Input::Scene(scene.parse()?),
        (Some(_), Some(_)) => {
            return Err(CliError::Config("[input] sets both image and scene".into()))
        }
        (None, None) => {
            return Err(CliError::Config(
                "[input] needs exactly one of image or scene".into(),
            ))
        }
    };
    let defaults = RunConfig::default();
    let method: SolverKind = r.parsed("solver", "method", defaults.method)?;
    let variant: DataTermVariant = r.parsed("solver", "variant", DataTermVariant::Gid)?;
    let p = SolverConfig::preset(method, variant);
    let edge = EdgeParams {
        beta: r.value("edge", "beta", p.edge.beta)?,
        sigma: r.value("edge", "sigma", p.edge.sigma)?,
        kernel_size: r.value("edge", "kernel_size", p.edge.kernel_size)?,
    };
    let solver = SolverConfig {
        mu: r.value("solver", "mu", p.mu)?,
        lambda: r.value("solver", "lambda", p.lambda)?,
        alpha: r.value("solver", "alpha", p.alpha)?,
        nu: r.value("solver", "nu", p.nu)?,
        eps: r.value("solver", "eps", p.eps)?,
        dt: r.value("solver", "dt", p.dt)?,
        t_relax: r.value("solver", "t_relax", p.t_relax)?,
        gamma: r.value("solver", "gamma", p.gamma)?,
        variant,
        edge,
        max_iters: r.value("solver", "max_iters", p.max_iters)?,
        tol: r.value("solver", "tol", p.tol)?,
        gs_sweeps: r.value("solver", "gs_sweeps", p.gs_sweeps)?,
        refresh_constants: r.value("solver", "refresh_constants", p.refresh_constants)?,
    };
    let bench_scenes = match r.raw("bench", "scenes") {
        None => defaults.bench.scenes.clone(),
        Some(list) => list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?,
    };

    let cfg = RunConfig {
        input,
        ground_truth: r.raw("input", "ground_truth").map(PathBuf::from),
        intensity_scale: r.value("input", "intensity_scale", defaults.intensity_scale)?,
        levels: SceneLevels {
            foreground: r.value("scene", "foreground", defaults.levels.foreground)?,
            background: r.value("scene", "background", defaults.levels.background)?,
        },
        speckle: SpeckleParams {
            looks: r.value("speckle", "looks", defaults.speckle.looks)?,
            seed: r.value("speckle", "seed", defaults.speckle.seed)?,
        },
        method,
        solver,
        output_dir: r
            .raw("output", "dir")
            .map(PathBuf::from)
            .unwrap_or(defaults.output_dir),
        bench: BenchConfig {
            scenes: bench_scenes,
            levelset_iters: r.value("bench", "levelset_iters", defaults.bench.levelset_iters)?,
            convex_iters: r.value("bench", "convex_iters", defaults.bench.convex_iters)?,
        },
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Writes every field; floats use the shortest representation that parses
/// back to the same value.
pub fn emit(cfg: &RunConfig) -> String {
    let mut ini = Ini::new();
    {
        let mut s = ini.with_section(Some("input"));
        match &cfg.input {
            Input::Image(path) => s.set("image", path.display().to_string()),
            Input::Scene(scene) => s.set("scene", scene.name()),
        };
        if let Some(gt) = &cfg.ground_truth {
            s.set("ground_truth", gt.display().to_string());
        }
        s.set("intensity_scale", cfg.intensity_scale.to_string());
    }
    ini.with_section(Some("scene"))
        .set("foreground", cfg.levels.foreground.to_string())
        .set("background", cfg.levels.background.to_string());
    ini.with_section(Some("speckle"))
        .set("looks", cfg.speckle.looks.to_string())
        .set("seed", cfg.speckle.seed.to_string());
    let p = &cfg.solver;
    ini.with_section(Some("solver"))
        .set("method", cfg.method.name())
        .set("variant", p.variant.name())
        .set("mu", p.mu.to_string())
        .set("lambda", p.lambda.to_string())
        .set("alpha", p.alpha.to_string())
        .set("nu", p.nu.to_string())
        .set("eps", p.eps.to_string())
        .set("dt", p.dt.to_string())
        .set("t_relax", p.t_relax.to_string())
        .set("gamma", p.gamma.to_string())
        .set("max_iters", p.max_iters.to_string())
        .set("tol", p.tol.to_string())
        .set("gs_sweeps", p.gs_sweeps.to_string())
        .set("refresh_constants", p.refresh_constants.to_string());
    ini.with_section(Some("edge"))
        .set("beta", p.edge.beta.to_string())
        .set("sigma", p.edge.sigma.to_string())
        .set("kernel_size", p.edge.kernel_size.to_string());
    ini.with_section(Some("output"))
        .set("dir", cfg.output_dir.display().to_string());
    let scenes: Vec<&str> = cfg.bench.scenes.iter().map(|s| s.name()).collect();
    ini.with_section(Some("bench"))
        .set("scenes", scenes.join(", "))
        .set("levelset_iters", cfg.bench.levelset_iters.to_string())
        .set("convex_iters", cfg.bench.convex_iters.to_string());

    let opt = WriteOption {
        escape_policy: EscapePolicy::Nothing,
        line_separator: LineSeparator::CR,
        kv_separator: " = ",
    };
    let mut out = Vec::new();
    ini.write_to_opt(&mut out, opt).expect("writing to memory");
    String::from_utf8(out).expect("config text is utf-8")
}
