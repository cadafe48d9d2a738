//! Named solution-model strategies. The CLI and validation harness select
//! one of these at runtime by name; all evaluate the same confined
//! compression setup.

use crate::analytic::ConsolidationProblem;
use crate::error::{Error, Result};
use crate::material::{BiphasicParams, ParamSet};
use crate::{biphasic, terzaghi};

pub trait SolutionModel: Sync {
    fn name(&self) -> &'static str;
    fn pore_pressure(&self, prob: &ConsolidationProblem, z: f64, t: f64) -> Result<f64>;
    fn displacement(&self, prob: &ConsolidationProblem, z: f64, t: f64) -> Result<f64>;
}

struct Fractional;

impl SolutionModel for Fractional {
    fn name(&self) -> &'static str {
        "fractional"
    }
    fn pore_pressure(&self, prob: &ConsolidationProblem, z: f64, t: f64) -> Result<f64> {
        prob.pore_pressure(z, t)
    }
    fn displacement(&self, prob: &ConsolidationProblem, z: f64, t: f64) -> Result<f64> {
        prob.displacement(z, t)
    }
}

struct Terzaghi;

impl SolutionModel for Terzaghi {
    fn name(&self) -> &'static str {
        "terzaghi"
    }
    fn pore_pressure(&self, prob: &ConsolidationProblem, z: f64, t: f64) -> Result<f64> {
        terzaghi::pressure(prob, z, t)
    }
    fn displacement(&self, prob: &ConsolidationProblem, z: f64, t: f64) -> Result<f64> {
        terzaghi::displacement(prob, z, t)
    }
}

struct Biphasic;

impl Biphasic {
    fn as_biphasic(prob: &ConsolidationProblem) -> Result<BiphasicParams> {
        match prob.params {
            ParamSet::Incompressible(inc) => BiphasicParams::from_incompressible(&inc, 1.0),
            ParamSet::Compressible(_) => Err(Error::InvalidParameter {
                name: "params",
                value: f64::NAN,
                reason: "biphasic model needs the incompressible order-0 record",
            }),
        }
    }
}

impl SolutionModel for Biphasic {
    fn name(&self) -> &'static str {
        "biphasic"
    }
    fn pore_pressure(&self, prob: &ConsolidationProblem, z: f64, t: f64) -> Result<f64> {
        Self::as_biphasic(prob)?;
        // mixture pressure coincides with the classical series for the
        // equivalent record
        terzaghi::pressure(prob, z, t)
    }
    fn displacement(&self, prob: &ConsolidationProblem, z: f64, t: f64) -> Result<f64> {
        let bi = Self::as_biphasic(prob)?;
        biphasic::biphasic_displacement(&bi, prob.h, prob.p_a, z, t)
    }
}

static MODELS: [&dyn SolutionModel; 3] = [&Fractional, &Terzaghi, &Biphasic];

pub fn registry() -> &'static [&'static dyn SolutionModel] {
    &MODELS
}

pub fn lookup(name: &str) -> Result<&'static dyn SolutionModel> {
    registry()
        .iter()
        .copied()
        .find(|m| m.name() == name)
        .ok_or_else(|| Error::UnknownName {
            kind: "solution model",
            name: name.to_string(),
            choices: "fractional, terzaghi, biphasic",
        })
}
