//! Metal-clad cavity template: substrate / mirror / Lorentz film / mirror / exit.
//!
//! Light enters from the glass substrate and leaves into air.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::materials::{DielectricModel, DrudeParams, LorentzParams};
use crate::tmm::{Layer, LayerStack};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CavityParams {
    pub length_nm: f64,
    pub mirror_nm: f64,
    pub film: LorentzParams,
    pub mirror: DrudeParams,
    pub substrate_n: f64,
    pub exit_n: f64,
}

impl Default for CavityParams {
    fn default() -> Self {
        Self {
            length_nm: 628.0,
            mirror_nm: 35.0,
            film: LorentzParams::TDBC_FILM,
            mirror: DrudeParams::SILVER,
            substrate_n: 1.5,
            exit_n: 1.0,
        }
    }
}

impl CavityParams {
    pub fn with_length(length_nm: f64) -> Self {
        Self {
            length_nm,
            ..Self::default()
        }
    }

    pub fn stack(&self) -> LayerStack {
        let metal = DielectricModel::Drude(self.mirror);
        LayerStack::new(
            DielectricModel::constant(self.substrate_n),
            vec![
                Layer::new(self.mirror_nm, metal.clone()),
                Layer::new(self.length_nm, DielectricModel::Lorentz(self.film)),
                Layer::new(self.mirror_nm, metal),
            ],
            DielectricModel::constant(self.exit_n),
        )
    }

    pub fn get(&self, p: CavityParam) -> f64 {
        match p {
            CavityParam::L => self.length_nm,
            CavityParam::F => self.film.f,
            CavityParam::Gamma => self.film.gamma,
            CavityParam::N0 => self.film.n0,
            CavityParam::Ex => self.film.ex,
            CavityParam::EpsInf => self.mirror.eps_inf,
            CavityParam::Ep => self.mirror.ep,
            CavityParam::DrudeDamping => self.mirror.damping,
            CavityParam::MirrorThickness => self.mirror_nm,
        }
    }

    pub fn set(&mut self, p: CavityParam, v: f64) {
        let slot = match p {
            CavityParam::L => &mut self.length_nm,
            CavityParam::F => &mut self.film.f,
            CavityParam::Gamma => &mut self.film.gamma,
            CavityParam::N0 => &mut self.film.n0,
            CavityParam::Ex => &mut self.film.ex,
            CavityParam::EpsInf => &mut self.mirror.eps_inf,
            CavityParam::Ep => &mut self.mirror.ep,
            CavityParam::DrudeDamping => &mut self.mirror.damping,
            CavityParam::MirrorThickness => &mut self.mirror_nm,
        };
        *slot = v;
    }
}

/// Named scalar parameters of [`CavityParams`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CavityParam {
    #[serde(rename = "L")]
    L,
    #[serde(rename = "f")]
    F,
    #[serde(rename = "gamma")]
    Gamma,
    #[serde(rename = "n0")]
    N0,
    #[serde(rename = "Ex")]
    Ex,
    #[serde(rename = "eps_inf")]
    EpsInf,
    #[serde(rename = "Ep")]
    Ep,
    #[serde(rename = "drude_gamma")]
    DrudeDamping,
    #[serde(rename = "mirror_nm")]
    MirrorThickness,
}

impl CavityParam {
    /// Name used in config and problem files.
    pub fn name(self) -> &'static str {
        match self {
            CavityParam::L => "L",
            CavityParam::F => "f",
            CavityParam::Gamma => "gamma",
            CavityParam::N0 => "n0",
            CavityParam::Ex => "Ex",
            CavityParam::EpsInf => "eps_inf",
            CavityParam::Ep => "Ep",
            CavityParam::DrudeDamping => "drude_gamma",
            CavityParam::MirrorThickness => "mirror_nm",
        }
    }
}

impl std::fmt::Display for CavityParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for CavityParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::InvalidParameter(format!("unknown cavity parameter `{s}`")))
    }
}
