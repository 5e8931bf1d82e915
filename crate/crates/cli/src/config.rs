//! Run configuration (TOML).
//!
//! ```toml
//! [cavity]                  # metal-clad cavity template, all keys optional
//! length_nm = 628.0
//!
//! [grid]
//! energy = { min = 1.6, max = 2.6, points = 500 }   # eV
//! kx = { min = 0.0, max = 12.0, points = 500 }      # μm⁻¹
//! polarization = "TE"
//!
//! [output]
//! dir = "out"
//! name = "map"
//! heatmap = true
//! ```
//!
//! An explicit `[stack]` (incidence, layers, exit) replaces the template.
//! Tabulated materials name a CSV file relative to the config file.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use polariton_core::materials::{DielectricModel, DrudeParams, LorentzParams, TabulatedOptics};
use polariton_core::spectral::{SweepOptions, DEFAULT_MIN_PROMINENCE};
use polariton_core::tmm::{Layer, LayerStack, Polarization};
use polariton_core::CavityParams;

use crate::error::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub cavity: CavityParams,
    pub stack: Option<StackConfig>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackConfig {
    pub incidence: MaterialConfig,
    #[serde(default)]
    pub layers: Vec<LayerConfig>,
    pub exit: MaterialConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerConfig {
    pub thickness_nm: f64,
    pub material: MaterialConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MaterialConfig {
    Constant { n: f64 },
    Lorentz(LorentzParams),
    Drude(DrudeParams),
    Silver,
    Tabulated { file: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.min + step * i as f64).collect()
    }

    fn check(&self, name: &str) -> Result<(), CliError> {
        let ok = self.min.is_finite() && self.max.is_finite() && self.points >= 1 && (self.points == 1 || self.max > self.min);
        if ok {
            Ok(())
        } else {
            Err(CliError::Input(format!(
                "grid.{name}: need finite min < max and points ≥ 1 (got {self:?})"
            )))
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub energy: Axis,
    pub kx: Axis,
    pub polarization: Polarization,
    /// Drop momenta beyond the incidence light line at the lowest energy.
    pub clip_to_light_line: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            energy: Axis { min: 1.6, max: 2.6, points: 500 },
            kx: Axis { min: 0.0, max: 12.0, points: 500 },
            polarization: Polarization::TE,
            clip_to_light_line: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub name: String,
    pub heatmap: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("."),
            name: "map".into(),
            heatmap: true,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub min_nm: f64,
    pub max_nm: f64,
    pub step_nm: f64,
    pub ex: f64,
    pub window_ev: f64,
    pub min_prominence: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            min_nm: 400.0,
            max_nm: 1600.0,
            step_nm: 10.0,
            ex: 2.1,
            window_ev: 0.15,
            min_prominence: DEFAULT_MIN_PROMINENCE,
        }
    }
}

impl SweepConfig {
    /// Lengths from `min_nm` to `max_nm` inclusive; empty when `max_nm < min_nm`.
    pub fn lengths(&self) -> Result<Vec<f64>, CliError> {
        if !(self.step_nm > 0.0 && self.step_nm.is_finite()) {
            return Err(CliError::Input(format!("sweep.step_nm must be > 0, got {}", self.step_nm)));
        }
        if !(self.min_nm.is_finite() && self.max_nm.is_finite()) {
            return Err(CliError::Input("sweep range must be finite".into()));
        }
        if self.max_nm < self.min_nm {
            return Ok(Vec::new());
        }
        // tolerate rounding at the upper end
        let n = ((self.max_nm - self.min_nm) / self.step_nm + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| self.min_nm + self.step_nm * i as f64).collect())
    }

    pub fn options(&self, polarization: Polarization) -> SweepOptions {
        SweepOptions {
            ex: self.ex,
            window: self.window_ev,
            min_prominence: self.min_prominence,
            polarization,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_files(base)?;
        Ok(cfg)
    }

    /// Parses TOML text; errors carry the offending line and column.
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e: toml::de::Error| {
            let Some(span) = e.span() else {
                return e.message().to_string();
            };
            let line = text[..span.start].matches('\n').count() + 1;
            let col = span.start - text[..span.start].rfind('\n').map_or(0, |i| i + 1) + 1;
            format!("line {line}, column {col}: {}", e.message())
        })
    }

    fn resolve_files(&mut self, base: &Path) -> Result<(), CliError> {
        if let Some(stack) = &mut self.stack {
            let materials = std::iter::once(&mut stack.incidence)
                .chain(stack.layers.iter_mut().map(|l| &mut l.material))
                .chain(std::iter::once(&mut stack.exit));
            for m in materials {
                if let MaterialConfig::Tabulated { file } = m {
                    if file.is_relative() {
                        *file = base.join(&*file);
                    }
                    if !file.is_file() {
                        return Err(CliError::Input(format!("material table {} does not exist", file.display())));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn check_grid(&self) -> Result<(), CliError> {
        self.grid.energy.check("energy")?;
        self.grid.kx.check("kx")?;
        if self.grid.energy.min <= 0.0 {
            return Err(CliError::Input("grid.energy: photon energies must be > 0 eV".into()));
        }
        Ok(())
    }

    /// The simulated stack: the explicit `[stack]` if given, else the template.
    pub fn layer_stack(&self) -> Result<LayerStack, CliError> {
        let stack = match &self.stack {
            None => self.cavity.stack(),
            Some(s) => {
                let layers = s
                    .layers
                    .iter()
                    .enumerate()
                    .map(|(i, l)| {
                        if !(l.thickness_nm >= 0.0 && l.thickness_nm.is_finite()) {
                            return Err(CliError::Input(format!(
                                "stack.layers[{i}].thickness_nm must be ≥ 0, got {}",
                                l.thickness_nm
                            )));
                        }
                        Ok(Layer::new(l.thickness_nm, l.material.model()?))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                LayerStack::new(s.incidence.model()?, layers, s.exit.model()?)
            }
        };
        stack.validate().map_err(|e| CliError::Input(e.to_string()))?;
        Ok(stack)
    }
}

impl MaterialConfig {
    pub fn model(&self) -> Result<DielectricModel, CliError> {
        Ok(match self {
            MaterialConfig::Constant { n } => DielectricModel::constant(*n),
            MaterialConfig::Lorentz(p) => DielectricModel::Lorentz(*p),
            MaterialConfig::Drude(p) => DielectricModel::Drude(*p),
            MaterialConfig::Silver => DielectricModel::silver(),
            MaterialConfig::Tabulated { file } => {
                let text = std::fs::read_to_string(file)
                    .map_err(|e| CliError::Input(format!("cannot read {}: {e}", file.display())))?;
                let table = TabulatedOptics::from_csv_str(&text)
                    .map_err(|e| CliError::Input(format!("{}: {e}", file.display())))?;
                DielectricModel::Tabulated { table }
            }
        })
    }
}
