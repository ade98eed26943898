//! Flat `key = value` run configuration and loading-program files.
//!
//! ```text
//! # reference concrete, hydrostatic tension
//! material.E   = 30000
//! material.nu  = 0.15
//! run.scenario = 2.1
//! ```
//!
//! Lines starting with `#` are comments. Unknown and repeated keys are
//! rejected. Material keys may be omitted when `run.scenario` names a
//! preset, in which case the preset's material fills the gaps.
//!
//! A loading-program file holds one phase per line: the increment count
//! followed by six controls in (11, 22, 33, 12, 13, 23) order, each either
//! `e:<strain>` or `s:<stress in MPa>`:
//!
//! ```text
//! 200  s:-8   s:-8   s:-8   e:0 e:0 e:0
//! 200  e:2e-4 e:2e-4 e:5e-4 e:0 e:0 e:0
//! ```

use std::path::PathBuf;

use crate::driver::{Control, ControlStep, LoadingProgram, Scenario, DEFAULT_INCREMENTS};
use crate::error::{Error, Result};
use crate::return_map::Tolerances;
use crate::surface::MaterialParams;

/// Material keys in the order they appear in [`MaterialParams`].
pub const MATERIAL_KEYS: [&str; 10] = [
    "material.E",
    "material.nu",
    "material.fc",
    "material.ft",
    "material.e",
    "material.t",
    "material.k1d",
    "material.qh0",
    "material.gA",
    "material.gB",
];

#[derive(Clone, Debug, PartialEq)]
pub enum ScenarioSelector {
    Preset(Scenario),
    /// Path of a loading-program file.
    File(PathBuf),
}

impl ScenarioSelector {
    pub fn parse(s: &str) -> Self {
        match s.parse::<Scenario>() {
            Ok(p) => ScenarioSelector::Preset(p),
            Err(_) => ScenarioSelector::File(PathBuf::from(s)),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    /// Explicit material values, indexed like [`MATERIAL_KEYS`].
    pub material: [Option<f64>; 10],
    pub scenario: Option<ScenarioSelector>,
    pub increments: Option<usize>,
    pub toll: Option<f64>,
    pub tol_f: Option<f64>,
    pub output: Option<PathBuf>,
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let config = RunConfig::parse(text)?;
    config.validate()?;
    Ok(config)
}

fn parse_number(line: usize, key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Parse {
            line,
            message: format!("`{key}` expects a number, got `{value}`"),
        })
}

impl RunConfig {
    /// Syntax-level parse; see [`RunConfig::validate`].
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = RunConfig::default();
        let mut seen: Vec<String> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected `key = value`, got `{trimmed}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return Err(Error::Parse {
                    line,
                    message: format!("`{key}` has no value"),
                });
            }
            if seen.iter().any(|k| k == key) {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
            seen.push(key.to_string());

            if let Some(i) = MATERIAL_KEYS.iter().position(|k| *k == key) {
                config.material[i] = Some(parse_number(line, key, value)?);
                continue;
            }
            match key {
                "run.scenario" => config.scenario = Some(ScenarioSelector::parse(value)),
                "run.increments" => {
                    let n = value
                        .parse::<usize>()
                        .ok()
                        .filter(|n| *n > 0)
                        .ok_or_else(|| Error::Parse {
                            line,
                            message: format!("`run.increments` expects a positive integer, got `{value}`"),
                        })?;
                    config.increments = Some(n);
                }
                "run.toll" => config.toll = Some(parse_number(line, key, value)?),
                "run.tolf" => config.tol_f = Some(parse_number(line, key, value)?),
                "run.output" => config.output = Some(PathBuf::from(value)),
                _ => {
                    return Err(Error::Parse {
                        line,
                        message: format!("unknown key `{key}`"),
                    })
                }
            }
        }
        if seen.is_empty() {
            return Err(Error::Parse {
                line: 0,
                message: "configuration is empty".into(),
            });
        }
        Ok(config)
    }

    pub fn with_scenario(mut self, scenario: &str) -> Self {
        self.scenario = Some(ScenarioSelector::parse(scenario));
        self
    }

    pub fn preset(&self) -> Option<Scenario> {
        match self.scenario {
            Some(ScenarioSelector::Preset(p)) => Some(p),
            _ => None,
        }
    }

    /// Material parameters: explicit keys over the preset's material.
    pub fn material_params(&self) -> Result<MaterialParams> {
        let base = self.preset().map(|p| p.params());
        let defaults = base.map(|p| {
            [
                p.young,
                p.poisson,
                p.fc,
                p.ft,
                p.eccentricity,
                p.t,
                p.k1d,
                p.qh0,
                p.g_a,
                p.g_b,
            ]
        });
        let mut v = [0.0; 10];
        for (i, slot) in v.iter_mut().enumerate() {
            *slot = match (self.material[i], defaults) {
                (Some(x), _) => x,
                (None, Some(d)) => d[i],
                (None, None) => {
                    return Err(Error::Validation(format!(
                        "missing required key `{}`",
                        MATERIAL_KEYS[i]
                    )))
                }
            };
        }
        let params = MaterialParams {
            young: v[0],
            poisson: v[1],
            fc: v[2],
            ft: v[3],
            eccentricity: v[4],
            t: v[5],
            k1d: v[6],
            qh0: v[7],
            g_a: v[8],
            g_b: v[9],
        };
        params.validate()?;
        Ok(params)
    }

    pub fn tolerances(&self, params: &MaterialParams) -> Result<Tolerances> {
        let mut tol = Tolerances::for_params(params);
        if let Some(t) = self.toll {
            tol.toll = t;
        }
        if let Some(t) = self.tol_f {
            tol.tol_f = t;
        }
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        let params = self.material_params()?;
        self.tolerances(&params)?;
        Ok(())
    }

    /// Program of a preset scenario, honouring `run.increments`.
    pub fn preset_program(&self) -> Option<LoadingProgram> {
        self.preset()
            .map(|p| p.program(self.increments.unwrap_or(DEFAULT_INCREMENTS)))
    }
}

/// Parses a loading-program file.
pub fn parse_program(text: &str, label: &str) -> Result<LoadingProgram> {
    let mut steps = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 7 {
            return Err(Error::Parse {
                line,
                message: format!(
                    "expected an increment count and 6 controls, got {} fields",
                    fields.len()
                ),
            });
        }
        let increments = fields[0]
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::Parse {
                line,
                message: format!("bad increment count `{}`", fields[0]),
            })?;
        let mut controls = [Control::Strain(0.0); 6];
        for (c, field) in controls.iter_mut().zip(&fields[1..]) {
            let bad = || Error::Parse {
                line,
                message: format!("bad control `{field}`, expected e:<strain> or s:<stress>"),
            };
            let (kind, value) = field.split_once(':').ok_or_else(bad)?;
            let value = value.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad)?;
            *c = match kind {
                "e" => Control::Strain(value),
                "s" => Control::Stress(value),
                _ => return Err(bad()),
            };
        }
        steps.push(ControlStep { controls, increments });
    }
    let program = LoadingProgram {
        label: label.to_string(),
        steps,
    };
    program.validate()?;
    Ok(program)
}
