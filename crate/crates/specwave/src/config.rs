//! Experiment configuration: sectioned TOML (or JSON) with strict keys.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use specwave_core::dynamics::PhysicalConstants;
use specwave_core::poisson::{CycleKind, GmresOptions, MultigridOptions, SolverOptions};
use specwave_core::spectral::FilterSpec;
use specwave_core::waves::MeanCurrent;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Converge,
    Dispersion,
    BoundaryLayer,
    Bar,
    PoissonBench,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Converge => "converge",
            Self::Dispersion => "dispersion",
            Self::BoundaryLayer => "boundary-layer",
            Self::Bar => "bar",
            Self::PoissonBench => "poisson-bench",
        }
    }

    fn section(self) -> &'static str {
        match self {
            Self::Converge => "converge",
            Self::Dispersion => "dispersion",
            Self::BoundaryLayer => "boundary_layer",
            Self::Bar => "bar",
            Self::PoissonBench => "poisson_bench",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precond {
    None,
    Vcycle,
    Fmg,
}

impl From<Precond> for CycleKind {
    fn from(p: Precond) -> Self {
        match p {
            Precond::None => CycleKind::None,
            Precond::Vcycle => CycleKind::VCycle,
            Precond::Fmg => CycleKind::Fmg,
        }
    }
}

/// Mean-current condition of a stream-function wave.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Current {
    Eulerian,
    MassTransport,
}

impl From<Current> for MeanCurrent {
    fn from(c: Current) -> Self {
        match c {
            Current::Eulerian => MeanCurrent::Eulerian,
            Current::MassTransport => MeanCurrent::MassTransport,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub kind: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsSection {
    /// Gravitational acceleration [m/s²].
    pub g: f64,
    /// Density [kg/m³].
    pub rho: f64,
    /// Kinematic viscosity [m²/s].
    pub nu: f64,
}

impl Default for PhysicsSection {
    fn default() -> Self {
        let c = PhysicalConstants::default();
        Self {
            g: c.g,
            rho: c.rho,
            nu: c.nu,
        }
    }
}

impl PhysicsSection {
    pub fn constants(&self) -> PhysicalConstants {
        PhysicalConstants {
            g: self.g,
            rho: self.rho,
            nu: self.nu,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub precond: Precond,
    pub tol: f64,
    pub restart: usize,
    pub max_iter: usize,
    pub stagnation: usize,
    pub pre_smooth: usize,
    pub post_smooth: usize,
    pub columns_per_block: usize,
    pub coarse_unknowns: usize,
    /// Largest scaled stage divergence accepted before a step fails.
    pub divergence_limit: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let g = GmresOptions::default();
        let m = MultigridOptions::default();
        Self {
            precond: Precond::Vcycle,
            tol: g.tol,
            restart: g.restart,
            max_iter: g.max_iter,
            stagnation: g.stagnation,
            pre_smooth: m.pre_smooth,
            post_smooth: m.post_smooth,
            columns_per_block: m.columns_per_block,
            coarse_unknowns: m.coarse_unknowns,
            divergence_limit: 1e-6,
        }
    }
}

impl SolverSection {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            precond: self.precond.into(),
            gmres: GmresOptions {
                tol: self.tol,
                restart: self.restart,
                max_iter: self.max_iter,
                stagnation: self.stagnation,
            },
            multigrid: MultigridOptions {
                pre_smooth: self.pre_smooth,
                post_smooth: self.post_smooth,
                columns_per_block: self.columns_per_block,
                coarse_unknowns: self.coarse_unknowns,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterSection {
    pub enabled: bool,
    /// Cutoff as a fraction of the highest Fourier mode.
    pub x_cutoff: f64,
    /// Cutoff as a fraction of the highest Chebyshev mode.
    pub sigma_cutoff: f64,
    pub alpha: f64,
    pub order: f64,
}

impl Default for FilterSection {
    fn default() -> Self {
        Self {
            enabled: true,
            x_cutoff: 0.5,
            sigma_cutoff: 0.9,
            alpha: 36.0,
            order: 2.0,
        }
    }
}

impl FilterSection {
    pub fn specs(&self, max_x_mode: usize, m: usize) -> specwave_core::Result<Option<(FilterSpec, FilterSpec)>> {
        if !self.enabled {
            return Ok(None);
        }
        Ok(Some((
            FilterSpec::with_fraction(max_x_mode, self.x_cutoff, self.alpha, self.order)?,
            FilterSpec::with_fraction(m, self.sigma_cutoff, self.alpha, self.order)?,
        )))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergeSection {
    pub kh: Vec<f64>,
    /// Wave heights as fractions of the breaking limit.
    pub steepness: Vec<f64>,
    pub n: Vec<usize>,
    /// Vertical orders; empty pairs each `n` with `m = n`, otherwise the
    /// full `n × m` product is run.
    pub m: Vec<usize>,
    pub depth: f64,
    /// Time step as a fraction of the wave period.
    pub dt_fraction: f64,
    pub sf_modes: usize,
    /// Apply the spectral filter during the step.
    pub filter: bool,
    /// Repeat each case with half the step to confirm spatial dominance.
    pub dt_check: bool,
}

impl Default for ConvergeSection {
    fn default() -> Self {
        Self {
            kh: vec![0.5, 2.0, 2.0 * PI],
            steepness: vec![0.1, 0.4, 0.7, 0.9],
            n: vec![8, 16, 32, 64],
            m: Vec::new(),
            depth: 1.0,
            dt_fraction: 1e-4,
            sf_modes: 32,
            filter: false,
            dt_check: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DispersionSection {
    pub kh: Vec<f64>,
    pub m: Vec<usize>,
    pub n: usize,
    pub depth: f64,
    /// Wave height relative to the depth; irrelevant to the linear model.
    pub height_ratio: f64,
    pub periods: f64,
    pub steps_per_period: usize,
    /// Viscosity used by this study; inviscid by default.
    pub nu: f64,
}

/// `count` values spaced logarithmically on `[lo, hi]`.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

impl Default for DispersionSection {
    fn default() -> Self {
        Self {
            kh: log_space(0.1, 2.0 * PI, 19),
            m: vec![4, 6, 8, 12, 16, 24, 32],
            n: 2,
            depth: 1.0,
            height_ratio: 1e-3,
            periods: 1.0,
            steps_per_period: 400,
            nu: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundaryLayerSection {
    pub height: f64,
    pub kh: f64,
    pub depth: f64,
    pub n: usize,
    pub m: usize,
    pub steps_per_period: usize,
    pub periods: f64,
    /// Profile output extent in boundary-layer thicknesses.
    pub profile_extent: f64,
    pub profile_points: usize,
    /// Comparison window in boundary-layer thicknesses.
    pub compare_extent: f64,
    /// Apply the spectral filter during the step.
    pub filter: bool,
}

impl Default for BoundaryLayerSection {
    fn default() -> Self {
        Self {
            height: 0.02,
            kh: 0.6725,
            depth: 0.4,
            n: 20,
            m: 50,
            steps_per_period: 100,
            periods: 10.0,
            profile_extent: 5.0,
            profile_points: 101,
            compare_extent: 3.0,
            filter: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BarSection {
    pub height: f64,
    pub period: f64,
    pub offshore_depth: f64,
    pub up_start: f64,
    pub up_end: f64,
    pub crest_depth: f64,
    pub crest_end: f64,
    pub down_end: f64,
    pub smoothing: f64,
    /// Domain length in incident wavelengths.
    pub wavelengths: usize,
    /// Start of the absorption zone in bar coordinates [m].
    pub absorption_start: f64,
    /// Gauge positions in bar coordinates [m]; the first is the incident gauge.
    pub gauges: Vec<f64>,
    pub n: usize,
    pub m: usize,
    pub steps_per_period: usize,
    pub duration: f64,
    pub ramp_periods: f64,
    pub sf_modes: usize,
    /// Mean-current condition of the generated wave.
    pub current: Current,
    /// Whole periods at the end of the run used for harmonic analysis.
    pub analysis_periods: usize,
}

impl Default for BarSection {
    fn default() -> Self {
        let c = specwave_core::tank::BarConfig::default();
        Self {
            height: c.height,
            period: c.period,
            offshore_depth: c.bar.offshore_depth,
            up_start: c.bar.up_start,
            up_end: c.bar.up_end,
            crest_depth: c.bar.crest_depth,
            crest_end: c.bar.crest_end,
            down_end: c.bar.down_end,
            smoothing: c.bar.smoothing,
            wavelengths: c.wavelengths,
            absorption_start: c.absorption_start,
            gauges: c.gauges,
            n: c.n,
            m: c.m,
            steps_per_period: c.steps_per_period,
            duration: c.duration,
            ramp_periods: c.ramp_periods,
            sf_modes: c.sf_modes,
            current: match c.current {
                MeanCurrent::Eulerian => Current::Eulerian,
                MeanCurrent::MassTransport => Current::MassTransport,
            },
            analysis_periods: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PoissonBenchSection {
    pub n: usize,
    pub m: usize,
    pub kh: f64,
    pub steepness: f64,
    pub depth: f64,
    pub tols: Vec<f64>,
    pub preconds: Vec<Precond>,
    /// Iteration cap for the unpreconditioned solver, run without restarts.
    pub max_iter_unpreconditioned: usize,
    /// Time step defining the right-hand side, as a fraction of the period.
    pub dt_fraction: f64,
    pub sf_modes: usize,
}

impl Default for PoissonBenchSection {
    fn default() -> Self {
        Self {
            n: 40,
            m: 40,
            kh: 2.0,
            steepness: 0.4,
            depth: 1.0,
            tols: vec![1e-4, 1e-8, 1e-12],
            preconds: vec![Precond::None, Precond::Vcycle, Precond::Fmg],
            max_iter_unpreconditioned: 3000,
            dt_fraction: 0.025,
            sf_modes: 32,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub physics: PhysicsSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub filter: FilterSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converge: Option<ConvergeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dispersion: Option<DispersionSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_layer: Option<BoundaryLayerSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bar: Option<BarSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poisson_bench: Option<PoissonBenchSection>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Toml,
    Json,
}

impl Format {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Toml,
        }
    }
}

fn parse_value(text: &str, format: Format) -> Result<Value> {
    match format {
        Format::Json => serde_json::from_str(text).map_err(|e| Error::Syntax(e.to_string())),
        Format::Toml => toml::from_str(text).map_err(|e| Error::Syntax(e.to_string())),
    }
}

/// Parses the right-hand side of `key=value` as a TOML value, falling back
/// to a bare string.
fn parse_override_value(raw: &str) -> Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .and_then(|v| serde_json::to_value(v).ok())
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Applies `section.key=value` to a parsed document.
pub fn apply_override(doc: &mut Value, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::Override(format!("`{spec}` is not of the form key=value")))?;
    let key = key.trim();
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Override(format!("malformed key `{key}`")));
    }
    let mut node = doc;
    for (i, part) in parts.iter().enumerate() {
        let map = node.as_object_mut().ok_or_else(|| {
            Error::Override(format!("`{}` is not a section", parts[..i].join(".")))
        })?;
        if i + 1 == parts.len() {
            map.insert(part.to_string(), parse_override_value(raw.trim()));
            return Ok(());
        }
        node = map
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

impl ExperimentConfig {
    /// Parses a document, applies overrides and validates.
    pub fn parse(text: &str, format: Format, overrides: &[String]) -> Result<Self> {
        let mut doc = parse_value(text, format)?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        Self::from_value(doc)
    }

    pub fn from_value(doc: Value) -> Result<Self> {
        let cfg: Self = serde_path_to_error::deserialize(doc).map_err(|e| {
            let path = e.path().to_string();
            Error::Schema {
                path: if path == "." { String::new() } else { path },
                message: e.into_inner().to_string(),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::parse(&text, Format::from_path(path), overrides)
    }

    pub fn kind(&self) -> ExperimentKind {
        self.experiment.kind
    }

    /// Canonical JSON echo of the resolved configuration.
    pub fn echo(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON echo.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let kind = self.kind();
        let present = match kind {
            ExperimentKind::Converge => self.converge.is_some(),
            ExperimentKind::Dispersion => self.dispersion.is_some(),
            ExperimentKind::BoundaryLayer => self.boundary_layer.is_some(),
            ExperimentKind::Bar => self.bar.is_some(),
            ExperimentKind::PoissonBench => self.poisson_bench.is_some(),
        };
        if !present {
            return Err(Error::Schema {
                path: kind.section().into(),
                message: format!("missing section `{}` required by experiment kind `{kind}`", kind.section()),
            });
        }
        let p = &self.physics;
        positive("physics.g", p.g)?;
        positive("physics.rho", p.rho)?;
        non_negative("physics.nu", p.nu)?;
        let s = &self.solver;
        positive("solver.tol", s.tol)?;
        positive("solver.divergence_limit", s.divergence_limit)?;
        at_least("solver.restart", s.restart, 1)?;
        at_least("solver.max_iter", s.max_iter, 1)?;
        at_least("solver.columns_per_block", s.columns_per_block, 1)?;
        let f = &self.filter;
        if !(f.x_cutoff > 0.0 && f.x_cutoff <= 1.0) {
            return Err(range("filter.x_cutoff", "must lie in (0, 1]"));
        }
        if !(f.sigma_cutoff > 0.0 && f.sigma_cutoff <= 1.0) {
            return Err(range("filter.sigma_cutoff", "must lie in (0, 1]"));
        }
        non_negative("filter.alpha", f.alpha)?;
        positive("filter.order", f.order)?;
        if let Some(c) = &self.converge {
            non_empty("converge.kh", &c.kh)?;
            non_empty("converge.steepness", &c.steepness)?;
            non_empty("converge.n", &c.n)?;
            all_positive("converge.kh", &c.kh)?;
            if c.steepness.iter().any(|v| !(*v > 0.0 && *v < 1.0)) {
                return Err(range("converge.steepness", "fractions must lie in (0, 1)"));
            }
            all_at_least("converge.n", &c.n, 2)?;
            all_at_least("converge.m", &c.m, 2)?;
            positive("converge.depth", c.depth)?;
            positive("converge.dt_fraction", c.dt_fraction)?;
            at_least("converge.sf_modes", c.sf_modes, 2)?;
        }
        if let Some(d) = &self.dispersion {
            non_empty("dispersion.kh", &d.kh)?;
            non_empty("dispersion.m", &d.m)?;
            all_positive("dispersion.kh", &d.kh)?;
            all_at_least("dispersion.m", &d.m, 2)?;
            at_least("dispersion.n", d.n, 2)?;
            positive("dispersion.depth", d.depth)?;
            positive("dispersion.height_ratio", d.height_ratio)?;
            positive("dispersion.periods", d.periods)?;
            at_least("dispersion.steps_per_period", d.steps_per_period, 1)?;
            non_negative("dispersion.nu", d.nu)?;
        }
        if let Some(b) = &self.boundary_layer {
            positive("boundary_layer.height", b.height)?;
            positive("boundary_layer.kh", b.kh)?;
            positive("boundary_layer.depth", b.depth)?;
            at_least("boundary_layer.n", b.n, 2)?;
            at_least("boundary_layer.m", b.m, 2)?;
            at_least("boundary_layer.steps_per_period", b.steps_per_period, 1)?;
            positive("boundary_layer.periods", b.periods)?;
            positive("boundary_layer.profile_extent", b.profile_extent)?;
            positive("boundary_layer.compare_extent", b.compare_extent)?;
            at_least("boundary_layer.profile_points", b.profile_points, 2)?;
        }
        if let Some(b) = &self.bar {
            positive("bar.height", b.height)?;
            positive("bar.period", b.period)?;
            positive("bar.duration", b.duration)?;
            non_empty("bar.gauges", &b.gauges)?;
            at_least("bar.n", b.n, 2)?;
            at_least("bar.m", b.m, 2)?;
            at_least("bar.steps_per_period", b.steps_per_period, 1)?;
            at_least("bar.wavelengths", b.wavelengths, 3)?;
            at_least("bar.analysis_periods", b.analysis_periods, 1)?;
            non_negative("bar.ramp_periods", b.ramp_periods)?;
        }
        if let Some(b) = &self.poisson_bench {
            at_least("poisson_bench.n", b.n, 2)?;
            at_least("poisson_bench.m", b.m, 2)?;
            positive("poisson_bench.kh", b.kh)?;
            positive("poisson_bench.depth", b.depth)?;
            positive("poisson_bench.dt_fraction", b.dt_fraction)?;
            non_empty("poisson_bench.tols", &b.tols)?;
            all_positive("poisson_bench.tols", &b.tols)?;
            non_empty("poisson_bench.preconds", &b.preconds)?;
            at_least("poisson_bench.max_iter_unpreconditioned", b.max_iter_unpreconditioned, 1)?;
            if !(b.steepness > 0.0 && b.steepness < 1.0) {
                return Err(range("poisson_bench.steepness", "fraction must lie in (0, 1)"));
            }
        }
        Ok(())
    }
}

fn range(path: &str, message: &str) -> Error {
    Error::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn positive(path: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(range(path, &format!("must be positive, got {v}")))
    }
}

fn non_negative(path: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(range(path, &format!("must be non-negative, got {v}")))
    }
}

fn at_least(path: &str, v: usize, min: usize) -> Result<()> {
    if v >= min {
        Ok(())
    } else {
        Err(range(path, &format!("must be at least {min}, got {v}")))
    }
}

fn non_empty<T>(path: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        Err(range(path, "must not be empty"))
    } else {
        Ok(())
    }
}

fn all_positive(path: &str, v: &[f64]) -> Result<()> {
    v.iter().try_for_each(|x| positive(path, *x))
}

fn all_at_least(path: &str, v: &[usize], min: usize) -> Result<()> {
    v.iter().try_for_each(|x| at_least(path, *x, min))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[experiment]\nkind = \"converge\"\n\n[converge]\n";

    #[test]
    fn defaults_fill_sections() {
        let c = ExperimentConfig::parse(MINIMAL, Format::Toml, &[]).unwrap();
        assert_eq!(c.kind(), ExperimentKind::Converge);
        assert_eq!(c.converge.as_ref().unwrap().n, vec![8, 16, 32, 64]);
        assert_eq!(c.solver.precond, Precond::Vcycle);
    }

    #[test]
    fn missing_kind_names_key() {
        let e = ExperimentConfig::parse("[experiment]\n", Format::Toml, &[]).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("kind"), "{msg}");
        assert!(msg.contains("experiment"), "{msg}");
    }

    #[test]
    fn missing_study_section() {
        let e = ExperimentConfig::parse("[experiment]\nkind = \"bar\"\n", Format::Toml, &[]).unwrap_err();
        assert!(e.to_string().contains("`bar`"), "{e}");
    }

    #[test]
    fn unknown_key_rejected_with_path() {
        let text = format!("{MINIMAL}\n[solver]\ntolerance = 1e-6\n");
        let msg = ExperimentConfig::parse(&text, Format::Toml, &[]).unwrap_err().to_string();
        assert!(msg.contains("solver"), "{msg}");
        assert!(msg.contains("tolerance"), "{msg}");
    }

    #[test]
    fn wrong_type_reports_path() {
        let text = format!("{MINIMAL}\n[solver]\ntol = \"small\"\n");
        let msg = ExperimentConfig::parse(&text, Format::Toml, &[]).unwrap_err().to_string();
        assert!(msg.starts_with("solver.tol"), "{msg}");
    }

    #[test]
    fn scientific_notation_and_overrides() {
        let text = format!("{MINIMAL}\n[physics]\nnu = 1e-6\n");
        let o = vec![
            "solver.tol=1e-8".to_string(),
            "converge.n=[8, 16]".to_string(),
            "solver.precond=fmg".to_string(),
        ];
        let c = ExperimentConfig::parse(&text, Format::Toml, &o).unwrap();
        assert_eq!(c.physics.nu, 1e-6);
        assert_eq!(c.solver.tol, 1e-8);
        assert_eq!(c.solver.precond, Precond::Fmg);
        assert_eq!(c.converge.unwrap().n, vec![8, 16]);
        assert!(ExperimentConfig::parse(MINIMAL, Format::Toml, &["solver".into()]).is_err());
    }

    #[test]
    fn json_alternative_and_echo_roundtrip() {
        let json = r#"{"experiment": {"kind": "poisson-bench"}, "poisson_bench": {"tols": [1e-4]}}"#;
        let c = ExperimentConfig::parse(json, Format::Json, &[]).unwrap();
        let again = ExperimentConfig::from_value(c.echo()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.hash(), again.hash());
        let text = toml::to_string(&c).unwrap();
        assert_eq!(ExperimentConfig::parse(&text, Format::Toml, &[]).unwrap(), c);
    }

    #[test]
    fn range_checks() {
        let e = ExperimentConfig::parse(MINIMAL, Format::Toml, &["converge.depth=-1".into()]).unwrap_err();
        assert!(e.to_string().starts_with("converge.depth"), "{e}");
    }
}
