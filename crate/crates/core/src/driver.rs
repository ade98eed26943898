//! Single material point under mixed strain/stress control.
//!
//! A program is a sequence of phases. In each phase every component is
//! driven linearly, over a number of increments, from its value at the
//! start of the phase to a target strain or a target stress. Components
//! under stress control are found by a Newton iteration on the free strain
//! components using the tangent of the stress update.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::return_map::{integrate_step, InternalState, Material, Mode, StepResult, Tolerances};
use crate::surface::{apex_xi, HardeningState, MaterialParams};
use crate::tensor::{HwCoords, SymTensor};

/// Default number of increments per phase.
pub const DEFAULT_INCREMENTS: usize = 200;

/// Edge length of the cube specimens (mm).
pub const CUBE_EDGE_MM: f64 = 100.0;

const OUTER_MAX_ITER: usize = 25;
const OUTER_TOL_FACTOR: f64 = 1e-10;
const MAX_HALVINGS: usize = 8;
const FD_JACOBIAN_STEP: f64 = 1e-7;

/// Control applied to one component over a phase.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Control {
    /// Target strain (engineering shear for components 4..6).
    Strain(f64),
    /// Target stress (MPa).
    Stress(f64),
}

impl Control {
    pub fn value(self) -> f64 {
        match self {
            Control::Strain(v) | Control::Stress(v) => v,
        }
    }

    pub fn is_stress(self) -> bool {
        matches!(self, Control::Stress(_))
    }
}

/// One loading phase: six component controls reached over `increments`
/// equal increments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlStep {
    pub controls: [Control; 6],
    pub increments: usize,
}

impl ControlStep {
    pub fn strain(target: SymTensor, increments: usize) -> Self {
        ControlStep {
            controls: target.0.map(Control::Strain),
            increments,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.increments == 0 {
            return Err(Error::Validation("a phase needs at least one increment".into()));
        }
        if self.controls.iter().any(|c| !c.value().is_finite()) {
            return Err(Error::Validation("control targets must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadingProgram {
    pub label: String,
    pub steps: Vec<ControlStep>,
}

impl LoadingProgram {
    pub fn total_increments(&self) -> usize {
        self.steps.iter().map(|s| s.increments).sum()
    }

    /// Replaces every phase's increment count.
    pub fn with_increments(mut self, increments: usize) -> Self {
        for s in &mut self.steps {
            s.increments = increments;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps.is_empty() {
            return Err(Error::Validation("loading program has no phases".into()));
        }
        self.steps.iter().try_for_each(ControlStep::validate)
    }
}

/// State of the material point after one increment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Global increment index, starting at 1.
    pub step: usize,
    /// Phase index, starting at 0.
    pub phase: usize,
    /// Increment index within the phase, starting at 1.
    pub phase_step: usize,
    pub eps: SymTensor,
    pub sigma: SymTensor,
    pub hw: HwCoords,
    pub kappa: f64,
    pub qh: f64,
    pub qs: f64,
    pub xia: f64,
    pub mode: Mode,
    pub iterations: usize,
}

impl StepRecord {
    fn new(
        (step, phase, phase_step): (usize, usize, usize),
        eps: SymTensor,
        result: &StepResult,
        material: &Material,
        tol: &Tolerances,
    ) -> Self {
        let h = HardeningState::at(result.state.kappa, &material.params);
        StepRecord {
            step,
            phase,
            phase_step,
            eps,
            sigma: result.sigma,
            hw: result.sigma.to_hw(tol.rho_eps),
            kappa: result.state.kappa,
            qh: h.qh,
            qs: h.qs,
            xia: apex_xi(result.state.kappa, &material.params),
            mode: result.mode,
            iterations: result.iterations,
        }
    }

    pub fn mean_stress(&self) -> f64 {
        self.sigma.trace() / 3.0
    }
}

/// Runs a loading program from the virgin state.
pub fn run_program(program: &LoadingProgram, material: &Material, tol: &Tolerances) -> Result<Vec<StepRecord>> {
    program.validate()?;
    tol.validate()?;
    let mut records = Vec::with_capacity(program.total_increments());
    let mut eps = SymTensor::ZERO;
    let mut sigma = SymTensor::ZERO;
    let mut state = InternalState::default();
    let mut step = 0;

    for (phase, control) in program.steps.iter().enumerate() {
        let (eps0, sigma0) = (eps, sigma);
        let n = control.increments;
        for k in 1..=n {
            step += 1;
            let frac = k as f64 / n as f64;
            let mut target_eps = eps;
            let mut target_sigma = [0.0; 6];
            let mut free = Vec::new();
            for (i, c) in control.controls.iter().enumerate() {
                match *c {
                    Control::Strain(v) => target_eps[i] = eps0[i] + (v - eps0[i]) * frac,
                    Control::Stress(v) => {
                        target_sigma[i] = sigma0[i] + (v - sigma0[i]) * frac;
                        free.push(i);
                    }
                }
            }
            let (eps_next, result) = solve_increment(target_eps, &free, &target_sigma, &state, material, tol, step)?;
            records.push(StepRecord::new((step, phase, k), eps_next, &result, material, tol));
            eps = eps_next;
            sigma = result.sigma;
            state = result.state;
        }
    }
    Ok(records)
}

fn residual(result: &StepResult, free: &[usize], target: &[f64; 6]) -> DVector<f64> {
    DVector::from_iterator(free.len(), free.iter().map(|&i| result.sigma[i] - target[i]))
}

fn fd_jacobian(
    eps: &SymTensor,
    free: &[usize],
    state: &InternalState,
    material: &Material,
    tol: &Tolerances,
) -> Result<DMatrix<f64>> {
    let h = FD_JACOBIAN_STEP;
    let mut jac = DMatrix::zeros(free.len(), free.len());
    for (c, &j) in free.iter().enumerate() {
        let mut up = *eps;
        let mut dn = *eps;
        up[j] += h;
        dn[j] -= h;
        let s_up = integrate_step(&up, state, material, tol)?.sigma;
        let s_dn = integrate_step(&dn, state, material, tol)?.sigma;
        for (r, &i) in free.iter().enumerate() {
            jac[(r, c)] = (s_up[i] - s_dn[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

fn solve_increment(
    mut eps: SymTensor,
    free: &[usize],
    target: &[f64; 6],
    state: &InternalState,
    material: &Material,
    tol: &Tolerances,
    increment: usize,
) -> Result<(SymTensor, StepResult)> {
    let mut result = integrate_step(&eps, state, material, tol)?;
    if free.is_empty() {
        return Ok((eps, result));
    }
    let limit = OUTER_TOL_FACTOR * material.params.fc;
    let mut res = residual(&result, free, target);
    for _ in 0..OUTER_MAX_ITER {
        if res.amax() <= limit {
            return Ok((eps, result));
        }
        let jac = DMatrix::from_fn(free.len(), free.len(), |r, c| result.tangent[(free[r], free[c])]);
        let delta = match jac.lu().solve(&(-&res)) {
            Some(d) if d.iter().all(|v| v.is_finite()) => d,
            _ => fd_jacobian(&eps, free, state, material, tol)?
                .lu()
                .solve(&(-&res))
                .ok_or(Error::OuterNonConvergence {
                    increment,
                    residual: res.amax(),
                })?,
        };
        let mut alpha = 1.0;
        let mut halvings = 0;
        loop {
            let mut trial = eps;
            for (k, &i) in free.iter().enumerate() {
                trial[i] += alpha * delta[k];
            }
            let r = integrate_step(&trial, state, material, tol)?;
            let rr = residual(&r, free, target);
            if rr.norm() <= res.norm() || halvings == MAX_HALVINGS {
                eps = trial;
                result = r;
                res = rr;
                break;
            }
            alpha *= 0.5;
            halvings += 1;
        }
    }
    if res.amax() <= limit {
        return Ok((eps, result));
    }
    Err(Error::OuterNonConvergence {
        increment,
        residual: res.amax(),
    })
}

/// Strain produced by a face displacement on the reference cube.
pub fn displacement_strain(displacement_mm: f64) -> f64 {
    displacement_mm / CUBE_EDGE_MM
}

/// Built-in validation scenarios.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// Hydrostatic tension with the softening law inactive.
    HydrostaticTension,
    /// Hydrostatic tension with softening.
    HydrostaticSoftening,
    /// Hydrostatic softening with an elastic unload/reload cycle.
    HydrostaticSofteningUnload,
    /// Hydrostatic confinement followed by deviatoric tension, no softening.
    ConfinedTension,
    /// Hydrostatic confinement followed by deviatoric tension with softening.
    ConfinedTensionSoftening,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::HydrostaticTension,
        Scenario::HydrostaticSoftening,
        Scenario::HydrostaticSofteningUnload,
        Scenario::ConfinedTension,
        Scenario::ConfinedTensionSoftening,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::HydrostaticTension => "2.1",
            Scenario::HydrostaticSoftening => "2.2",
            Scenario::HydrostaticSofteningUnload => "2.2-unload",
            Scenario::ConfinedTension => "2.3",
            Scenario::ConfinedTensionSoftening => "2.4",
        }
    }

    /// Material of the scenario: the reference concrete with the
    /// scenario's hardening overrides.
    pub fn params(self) -> MaterialParams {
        let base = MaterialParams::REFERENCE;
        match self {
            Scenario::HydrostaticTension | Scenario::ConfinedTension => base,
            Scenario::HydrostaticSoftening | Scenario::HydrostaticSofteningUnload => {
                MaterialParams { k1d: 1e-4, ..base }
            }
            Scenario::ConfinedTensionSoftening => MaterialParams {
                k1d: 8e-5,
                t: 1e-3,
                ..base
            },
        }
    }

    pub fn program(self, increments: usize) -> LoadingProgram {
        let n = increments;
        let hydro = |e: f64| ControlStep::strain(SymTensor::hydrostatic(e), n);
        let steps = match self {
            Scenario::HydrostaticTension => vec![hydro(5e-4)],
            Scenario::HydrostaticSoftening => vec![hydro(2e-4), hydro(1e-2)],
            Scenario::HydrostaticSofteningUnload => vec![hydro(1e-3), hydro(7e-4), hydro(1e-2)],
            Scenario::ConfinedTension => confined_tension(0.05, 0.02, n),
            Scenario::ConfinedTensionSoftening => confined_tension(0.075, 0.005, n),
        };
        LoadingProgram {
            label: self.name().to_string(),
            steps,
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::Validation(format!("unknown scenario preset `{s}`")))
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Confining pressure of the pre-confined scenarios (MPa, compression).
pub const CONFINEMENT: f64 = -8.0;

/// Stress-controlled hydrostatic confinement, then the axial (3) and
/// transversal (1, 2) strains are driven to the displacement targets
/// measured from the undeformed cube.
fn confined_tension(axial_mm: f64, transversal_mm: f64, n: usize) -> Vec<ControlStep> {
    let confine = ControlStep {
        controls: [
            Control::Stress(CONFINEMENT),
            Control::Stress(CONFINEMENT),
            Control::Stress(CONFINEMENT),
            Control::Strain(0.0),
            Control::Strain(0.0),
            Control::Strain(0.0),
        ],
        increments: n,
    };
    let et = displacement_strain(transversal_mm);
    let ea = displacement_strain(axial_mm);
    vec![confine, ControlStep::strain(SymTensor::diag(et, et, ea), n)]
}
