//! Experiment configuration: a TOML file plus `--set key=value` overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use shearsparse_core::cartoon::{scenes, DEFAULT_OVERSAMPLE};
use shearsparse_core::{build_generators, CartoonImage, GeneratorConfig, GeneratorSpec, SmoothPatch, SystemConfig};

use crate::error::{CliError, Result};

/// Environment variable overriding the output directory.
pub const OUT_ENV: &str = "SHEARSPARSE_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Nterm,
    BaselineCompare,
    EdgeDecay,
    Bessel,
    Counting,
    FrameBounds,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Nterm => "nterm",
            ExperimentKind::BaselineCompare => "baseline-compare",
            ExperimentKind::EdgeDecay => "edge-decay",
            ExperimentKind::Bessel => "bessel",
            ExperimentKind::Counting => "counting",
            ExperimentKind::FrameBounds => "frame-bounds",
        }
    }

    /// Solve-based experiments default to pixel-matched atoms; the
    /// analysis-only ones to the resolved default unit.
    pub fn default_unit(self) -> UnitChoice {
        match self {
            ExperimentKind::Nterm | ExperimentKind::BaselineCompare | ExperimentKind::FrameBounds => {
                UnitChoice::Named(NamedUnit::PixelMatched)
            }
            _ => UnitChoice::Named(NamedUnit::Default),
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        ExperimentKind::deserialize(toml::Value::String(s.to_string())).map_err(|e| e.to_string())
    }
}

/// Image length of one native generator unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum UnitChoice {
    Named(NamedUnit),
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedUnit {
    PixelMatched,
    Default,
}

fn default_c() -> f64 {
    1.0
}
fn default_oversample() -> usize {
    DEFAULT_OVERSAMPLE
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative residual of the dual reconstruction.
    pub cg: f64,
    pub max_iter: usize,
    /// Relative accuracy of the frame-bound eigenvalue estimates.
    pub bounds: f64,
    /// Allowed growth of the error curve, as a multiple of `tol^2 ||f||^2`.
    pub monotone_factor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            cg: 1e-6,
            max_iter: 500,
            bounds: 1e-3,
            monotone_factor: 1e6,
        }
    }
}

/// `N = 2^lo .. 2^hi` with `steps` points per octave.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweep {
    pub lo: f64,
    pub hi: f64,
    pub steps_per_octave: usize,
    /// Inclusive fit window; the default drops the first point and the
    /// top 10%.
    #[serde(default)]
    pub fit: Option<(f64, f64)>,
    /// Fixed power of `log N` for the second fit.
    pub log_exponent: f64,
}

impl Default for Sweep {
    fn default() -> Self {
        Sweep {
            lo: 6.0,
            hi: 13.0,
            steps_per_octave: 2,
            fit: None,
            log_exponent: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSection {
    /// Boundary angles of the probes.
    pub thetas: Vec<f64>,
    pub padding: f64,
    pub j_min: u32,
    /// Threshold of the per-cube significant count.
    pub cube_epsilon: f64,
}

impl Default for ProbeSection {
    fn default() -> Self {
        ProbeSection {
            thetas: vec![0.0, std::f64::consts::FRAC_PI_2],
            padding: shearsparse_core::decay::DEFAULT_PADDING,
            j_min: 0,
            cube_epsilon: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CountingSection {
    pub eps_hi: f64,
    pub eps_lo: f64,
    pub eps_count: usize,
}

impl Default for CountingSection {
    fn default() -> Self {
        CountingSection {
            eps_hi: 1e-1,
            eps_lo: 1e-4,
            eps_count: 13,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub scene: Option<PathBuf>,
    #[serde(default)]
    pub generator: Option<PathBuf>,
    pub n: usize,
    #[serde(rename = "J", alias = "j")]
    pub j_max: u32,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_oversample")]
    pub oversample: usize,
    #[serde(default)]
    pub unit: Option<UnitChoice>,
    #[serde(default, skip_serializing)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    /// Record wall-clock times (breaks byte-identical reruns).
    #[serde(default)]
    pub timing: bool,
    #[serde(default = "default_true")]
    pub dump_coefficients: bool,
    #[serde(default)]
    pub tolerance: Tolerances,
    #[serde(default)]
    pub sweep: Sweep,
    #[serde(default)]
    pub probe: ProbeSection,
    #[serde(default)]
    pub counting: CountingSection,
    /// Directory that relative paths resolve against.
    #[serde(skip)]
    pub base: PathBuf,
}

/// Applies `key=value` to a TOML table; dotted keys address subtables and
/// values parse as TOML, falling back to a bare string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::config(assignment, "override must look like key=value"))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::config(key, "empty key segment"));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| CliError::config(key, format!("`{p}` is not a table")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Best-effort name of the offending key in a deserialization message.
fn field_of(message: &str) -> String {
    for pat in ["unknown field `", "missing field `", "key `"] {
        if let Some(i) = message.find(pat) {
            let rest = &message[i + pat.len()..];
            if let Some(end) = rest.find('`') {
                return rest[..end].to_string();
            }
        }
    }
    "config".to_string()
}

impl ExperimentConfig {
    /// Parses `path` with overrides applied; relative paths resolve against
    /// the config's directory.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))?;
        let mut table: toml::Table = toml::from_str(&text).map_err(|e| CliError::config("config", e.message().to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let mut cfg = ExperimentConfig::deserialize(toml::Value::Table(table)).map_err(|e| {
            let msg = e.to_string();
            CliError::config(field_of(&msg), msg.trim().to_string())
        })?;
        cfg.base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_relative() {
            self.base.join(p)
        } else {
            p.to_path_buf()
        }
    }

    pub fn scene_path(&self) -> Option<PathBuf> {
        self.scene.as_deref().map(|p| self.resolve(p))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || !self.n.is_power_of_two() {
            return Err(CliError::config("n", format!("{} is not a power of two", self.n)));
        }
        if self.oversample == 0 {
            return Err(CliError::config("oversample", "must be at least 1"));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(CliError::config("c", format!("{} is not positive", self.c)));
        }
        if let Some(UnitChoice::Value(u)) = self.unit {
            if !(u > 0.0 && u.is_finite()) {
                return Err(CliError::config("unit", format!("{u} is not positive")));
            }
        }
        let t = &self.tolerance;
        if !(t.cg > 0.0 && t.cg < 1.0) {
            return Err(CliError::config("tolerance.cg", format!("{} not in (0,1)", t.cg)));
        }
        if !(t.bounds > 0.0 && t.bounds < 1.0) {
            return Err(CliError::config("tolerance.bounds", format!("{} not in (0,1)", t.bounds)));
        }
        if t.max_iter == 0 {
            return Err(CliError::config("tolerance.max_iter", "must be positive"));
        }
        if !(t.monotone_factor >= 0.0) {
            return Err(CliError::config("tolerance.monotone_factor", "must be non-negative"));
        }
        let s = &self.sweep;
        if !(s.lo >= 0.0 && s.hi > s.lo) || s.steps_per_octave == 0 {
            return Err(CliError::config("sweep", "need 0 <= lo < hi and steps_per_octave >= 1"));
        }
        if let Some((a, b)) = s.fit {
            if !(a > 0.0 && b > a) {
                return Err(CliError::config("sweep.fit", format!("({a}, {b}) is not an increasing range")));
            }
        }
        if !(self.probe.padding >= 1.0) {
            return Err(CliError::config("probe.padding", "must be at least 1"));
        }
        if self.probe.j_min > self.j_max {
            return Err(CliError::config("probe.j_min", "exceeds J"));
        }
        if self.probe.thetas.is_empty() {
            return Err(CliError::config("probe.thetas", "no probes"));
        }
        let k = &self.counting;
        if !(k.eps_hi > k.eps_lo && k.eps_lo > 0.0) || k.eps_count < 2 {
            return Err(CliError::config("counting", "need eps_hi > eps_lo > 0 and eps_count >= 2"));
        }
        let needs_scene = self.kind != ExperimentKind::FrameBounds;
        match &self.scene_path() {
            None if needs_scene => return Err(CliError::config("scene", "required for this experiment")),
            Some(p) if !p.is_file() => {
                return Err(CliError::config("scene", format!("{} does not exist", p.display())))
            }
            _ => {}
        }
        if let Some(p) = self.generator.as_deref().map(|p| self.resolve(p)) {
            if !p.is_file() {
                return Err(CliError::config("generator", format!("{} does not exist", p.display())));
            }
        }
        // parse everything up front so a bad file is a config error
        if needs_scene {
            let scene = self.scene()?;
            match (self.kind, &scene) {
                (ExperimentKind::Bessel, Scene::Image(_)) => {
                    return Err(CliError::config("scene", "bessel needs an edge-free patch"))
                }
                (ExperimentKind::Bessel, _) => {}
                (_, Scene::Patch(_)) => return Err(CliError::config("scene", "this experiment needs a cartoon image")),
                _ => {}
            }
        }
        self.generator_spec()?;
        Ok(())
    }

    pub fn unit(&self) -> UnitChoice {
        self.unit.unwrap_or(self.kind.default_unit())
    }

    pub fn system_config(&self) -> SystemConfig {
        let base = match self.unit() {
            UnitChoice::Named(NamedUnit::PixelMatched) => SystemConfig::pixel_matched(self.j_max, self.n),
            UnitChoice::Named(NamedUnit::Default) => SystemConfig::new(self.j_max),
            UnitChoice::Value(u) => SystemConfig {
                unit: u,
                ..SystemConfig::new(self.j_max)
            },
        };
        SystemConfig { c: self.c, ..base }
    }

    pub fn generator_config(&self) -> Result<GeneratorConfig> {
        match &self.generator {
            None => Ok(GeneratorConfig::default()),
            Some(p) => read_generator_config(&self.resolve(p)).map_err(|e| CliError::config("generator", e)),
        }
    }

    pub fn generator_spec(&self) -> Result<GeneratorSpec> {
        build_generators(&self.generator_config()?).map_err(|e| CliError::config("generator", e.to_string()))
    }

    pub fn scene(&self) -> Result<Scene> {
        let p = self
            .scene_path()
            .ok_or_else(|| CliError::config("scene", "required for this experiment"))?;
        Scene::read(&p).map_err(|e| CliError::config("scene", e))
    }

    /// Output directory: `SHEARSPARSE_OUT`, then `output`, then
    /// `shearsparse-out/<kind>` under the working directory.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(OUT_ENV) {
            Some(v) if !v.is_empty() => PathBuf::from(v),
            _ => match &self.output {
                Some(p) => self.resolve(p),
                None => PathBuf::from("shearsparse-out").join(self.kind.name()),
            },
        }
    }

    /// Canonical TOML of the configuration, without the output directory.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

pub fn read_generator_config(path: &Path) -> std::result::Result<GeneratorConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("{}: {}", path.display(), e.message()))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scene {
    Image(CartoonImage),
    Patch(SmoothPatch),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    builtin: Option<String>,
    #[serde(default)]
    image: Option<CartoonImage>,
    #[serde(default)]
    patch: Option<SmoothPatch>,
}

impl Scene {
    pub fn builtin(name: &str) -> Option<Scene> {
        match name {
            "smooth-bump" => Some(Scene::Patch(scenes::smooth_bump())),
            _ => scenes::by_name(name).map(Scene::Image),
        }
    }

    /// A scene file holds exactly one of `builtin = "<name>"`, an `[image]`
    /// table or a `[patch]` table.
    pub fn read(path: &Path) -> std::result::Result<Scene, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let f: SceneFile = toml::from_str(&text).map_err(|e| format!("{}: {}", path.display(), e.message()))?;
        let _ = f.name;
        let scene = match (f.builtin, f.image, f.patch) {
            (Some(b), None, None) => Scene::builtin(&b).ok_or_else(|| format!("unknown builtin scene {b:?}"))?,
            (None, Some(i), None) => Scene::Image(i),
            (None, None, Some(p)) => Scene::Patch(p),
            _ => return Err("exactly one of builtin, [image], [patch] is required".into()),
        };
        if let Scene::Image(i) = &scene {
            i.boundary.validate().map_err(|e| e.to_string())?;
        }
        Ok(scene)
    }
}

/// Name recorded for the scene: the file's `name`, its builtin, or the file
/// stem.
pub fn scene_name(path: &Path) -> String {
    let from_file = std::fs::read_to_string(path)
        .ok()
        .and_then(|t| toml::from_str::<SceneFile>(&t).ok())
        .and_then(|f| f.name.or(f.builtin));
    from_file.unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scene".into())
    })
}
