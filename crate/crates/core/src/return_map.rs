//! Elastic predictor and plastic correctors.
//!
//! Three regimes are distinguished from the trial stress: elastic, return
//! onto the smooth part of the yield surface along the potential normal,
//! and return to the apex of the surface on the hydrostatic axis. The
//! apex branch solves for the hardening variable with Newton's method and
//! comes with a closed-form consistent tangent; the smooth branch uses a
//! finite-difference tangent of the full corrector.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::{newton_bracketed, SolveError};
use crate::surface::{
    apex_xi, d_apex_xi_dkappa, potential_gradient, potential_partials, yield_f, yield_partials, MaterialParams,
};
use crate::tensor::{ElasticModuli, HwCoords, SymTensor, Tangent, SQRT_3};

/// Strain perturbation of the finite-difference tangent.
pub const FD_TANGENT_STEP: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Apex residual tolerance (MPa).
    pub toll: f64,
    /// Yield function tolerance.
    pub tol_f: f64,
    pub max_iter: usize,
    /// Deviatoric radius below which a stress counts as hydrostatic (MPa).
    pub rho_eps: f64,
}

impl Tolerances {
    pub fn for_params(params: &MaterialParams) -> Self {
        Tolerances {
            toll: 1e-9 * params.fc,
            tol_f: 1e-9,
            max_iter: 50,
            rho_eps: 1e-9 * params.fc,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.toll > 0.0 && self.tol_f > 0.0 && self.rho_eps > 0.0 && self.max_iter >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::Validation(format!("tolerances must be positive: {self:?}")))
        }
    }
}

/// Validated material parameters with derived elastic moduli.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Material {
    pub params: MaterialParams,
    pub moduli: ElasticModuli,
}

impl Material {
    pub fn new(params: MaterialParams) -> Result<Self> {
        params.validate()?;
        Ok(Material {
            params,
            moduli: params.moduli()?,
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InternalState {
    /// Plastic strain, engineering shears.
    pub eps_p: SymTensor,
    /// Accumulated volumetric plastic strain.
    pub kappa: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    Elastic,
    SmoothReturn,
    ApexReturn,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Elastic, Mode::SmoothReturn, Mode::ApexReturn];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Elastic => "Elastic",
            Mode::SmoothReturn => "SmoothReturn",
            Mode::ApexReturn => "ApexReturn",
        }
    }

    pub fn from_name(s: &str) -> Option<Mode> {
        Mode::ALL.into_iter().find(|m| m.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Elastic,
    Smooth,
    Apex,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepResult {
    pub sigma: SymTensor,
    pub state: InternalState,
    pub tangent: Tangent,
    pub mode: Mode,
    pub iterations: usize,
    /// |r| (MPa) for an apex return, |f| otherwise.
    pub residual: f64,
}

/// Converged corrector output before the tangent is attached.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Update {
    sigma: SymTensor,
    state: InternalState,
    mode: Mode,
    iterations: usize,
    residual: f64,
}

impl Update {
    fn with_tangent(self, tangent: Tangent) -> StepResult {
        StepResult {
            sigma: self.sigma,
            state: self.state,
            tangent,
            mode: self.mode,
            iterations: self.iterations,
            residual: self.residual,
        }
    }
}

/// Elastic predictor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Trial {
    /// Trial elastic strain ε − ε^p_n (engineering shears).
    pub eps_e: SymTensor,
    pub sigma: SymTensor,
    pub hw: HwCoords,
}

impl Trial {
    fn from_elastic_strain(eps_e: SymTensor, moduli: &ElasticModuli, rho_eps: f64) -> Self {
        let sigma = moduli.stress(&eps_e);
        Trial {
            eps_e,
            sigma,
            hw: sigma.to_hw(rho_eps),
        }
    }
}

pub fn trial_state(eps_total_next: &SymTensor, state_n: &InternalState, moduli: &ElasticModuli, rho_eps: f64) -> Trial {
    Trial::from_elastic_strain(*eps_total_next - state_n.eps_p, moduli, rho_eps)
}

pub fn classify(hw_tr: &HwCoords, kappa_n: f64, params: &MaterialParams, tol: &Tolerances) -> Regime {
    if hw_tr.xi > apex_xi(kappa_n, params) {
        Regime::Apex
    } else if yield_f(hw_tr, kappa_n, params) > tol.tol_f {
        Regime::Smooth
    } else {
        Regime::Elastic
    }
}

/// Apex residual r(κ) = ξ_a(κ) − ξ^Tr + B(κ − κ_n) and its derivative.
pub fn apex_residual(
    kappa: f64,
    xi_tr: f64,
    kappa_n: f64,
    params: &MaterialParams,
    moduli: &ElasticModuli,
) -> (f64, f64) {
    let b = moduli.modified_bulk;
    let r = apex_xi(kappa, params) - xi_tr + b * (kappa - kappa_n);
    let dr = d_apex_xi_dkappa(kappa, params) + b;
    (r, dr)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApexSolution {
    pub kappa: f64,
    pub xi: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// Newton iteration on the apex residual, starting from κ_n.
///
/// The root is bracketed by [κ_n, κ_n + ξ^Tr/B]: r < 0 at the left end
/// whenever the trial stress lies beyond the apex, and r = ξ_a > 0 at the
/// right end.
pub fn apex_return(
    xi_tr: f64,
    kappa_n: f64,
    params: &MaterialParams,
    moduli: &ElasticModuli,
    tol: &Tolerances,
) -> Result<ApexSolution> {
    let residual = |k: f64| apex_residual(k, xi_tr, kappa_n, params, moduli);
    let (r0, _) = residual(kappa_n);
    if r0 > tol.toll {
        // trial stress is not beyond the apex: the only root lies below κ_n
        return Err(Error::KappaDecrease {
            before: kappa_n,
            after: kappa_n - r0 / moduli.modified_bulk,
        });
    }
    let hi = kappa_n + xi_tr.max(0.0) / moduli.modified_bulk;
    let (r_hi, _) = residual(hi);
    let root =
        newton_bracketed(residual, (kappa_n, r0), (hi, r_hi), kappa_n, tol.toll, tol.max_iter).map_err(
            |e| match e {
                SolveError::MaxIter(best) => Error::NonConvergence {
                    context: "apex return",
                    iterations: best.iterations,
                    residual: best.fx.abs(),
                },
                SolveError::NoSignChange { f_lo, .. } => Error::NonConvergence {
                    context: "apex return",
                    iterations: 0,
                    residual: f_lo.abs(),
                },
            },
        )?;
    if root.x < kappa_n {
        return Err(Error::KappaDecrease {
            before: kappa_n,
            after: root.x,
        });
    }
    Ok(ApexSolution {
        kappa: root.x,
        xi: apex_xi(root.x, params),
        iterations: root.iterations,
        residual: root.fx.abs(),
    })
}

/// Consistent tangent at the apex,
/// (B/√3)·[1 − B/((√3 fc/m)·dq_s/dκ + B)]·(I ⊗ I).
pub fn apex_tangent(kappa_next: f64, params: &MaterialParams, moduli: &ElasticModuli) -> Result<Tangent> {
    let b = moduli.modified_bulk;
    let denominator = d_apex_xi_dkappa(kappa_next, params) + b;
    if denominator.abs() <= 1e-12 * b {
        return Err(Error::SingularTangent { denominator });
    }
    let c = b / SQRT_3 * (1.0 - b / denominator);
    let mut t = Tangent::zeros();
    for i in 0..3 {
        for j in 0..3 {
            t[(i, j)] = c;
        }
    }
    Ok(t)
}

fn apex_state(solution: &ApexSolution, trial: &Trial, state_n: &InternalState, moduli: &ElasticModuli) -> Update {
    let sigma = SymTensor::hydrostatic(solution.xi / SQRT_3);
    let eps_p = state_n.eps_p + moduli.strain(&(trial.sigma - sigma));
    Update {
        sigma,
        state: InternalState {
            eps_p,
            kappa: solution.kappa,
        },
        mode: Mode::ApexReturn,
        iterations: solution.iterations,
        residual: solution.residual,
    }
}

/// Builds the hydrostatic stress at the apex, the plastic strain
/// ε^p_n + C⁻¹(σ^Tr − σ_{n+1}) and the apex tangent.
pub fn apex_update(
    solution: &ApexSolution,
    trial: &Trial,
    state_n: &InternalState,
    material: &Material,
) -> Result<StepResult> {
    let update = apex_state(solution, trial, state_n, &material.moduli);
    let tangent = apex_tangent(solution.kappa, &material.params, &material.moduli)?;
    Ok(update.with_tangent(tangent))
}

fn apex_correct(trial: &Trial, state_n: &InternalState, material: &Material, tol: &Tolerances) -> Result<Update> {
    let solution = apex_return(trial.hw.xi, state_n.kappa, &material.params, &material.moduli, tol)?;
    Ok(apex_state(&solution, trial, state_n, &material.moduli))
}

fn smooth_correct(trial: &Trial, state_n: &InternalState, material: &Material, tol: &Tolerances) -> Result<Update> {
    let params = &material.params;
    let moduli = &material.moduli;
    let hw = trial.hw;
    let kappa_n = state_n.kappa;

    // flow direction frozen at the trial point
    let deviator = trial.sigma.deviator();
    let n = potential_gradient(&hw, &deviator, kappa_n, params, tol.rho_eps)?;
    let (g_xi, g_rho) = potential_partials(&hw, kappa_n, params);
    let tr_n = n.trace();
    let xi_rate = 3.0 * moduli.bulk * g_xi;
    let rho_rate = 2.0 * moduli.shear * g_rho;

    let coords = |dl: f64| {
        let h = HwCoords {
            xi: hw.xi - xi_rate * dl,
            rho: (hw.rho - rho_rate * dl).max(0.0),
            theta: hw.theta,
        };
        (h, kappa_n + tr_n * dl)
    };
    let phi = |dl: f64| {
        let (h, k) = coords(dl);
        let f = yield_f(&h, k, params);
        let d = yield_partials(&h, k, params);
        (f, -d.d_xi * xi_rate - d.d_rho * rho_rate + d.d_kappa * tr_n)
    };

    let (phi0, _) = phi(0.0);
    if phi0 < 0.0 {
        return Err(Error::NegativeMultiplier);
    }
    // the deviatoric radius vanishes at the far end of the bracket
    let mut hi = if rho_rate > 0.0 {
        hw.rho / rho_rate
    } else {
        phi0 / (xi_rate * yield_partials(&hw, kappa_n, params).d_xi)
    };
    let mut phi_hi = phi(hi).0;
    if rho_rate <= 0.0 {
        let mut grow = 0;
        while phi_hi > 0.0 && grow < 200 {
            hi *= 2.0;
            phi_hi = phi(hi).0;
            grow += 1;
        }
    }
    if phi_hi > 0.0 {
        let (h, k) = coords(hi);
        if h.xi > apex_xi(k, params) {
            return apex_correct(trial, state_n, material, tol);
        }
        return Err(Error::NegativeMultiplier);
    }

    // first guess: linearised consistency without hardening
    let d0 = yield_partials(&hw, kappa_n, params);
    let slope0 = d0.d_xi * xi_rate + d0.d_rho * rho_rate;
    let x0 = if slope0 > 0.0 { phi0 / slope0 } else { 0.5 * hi };
    let root = newton_bracketed(phi, (0.0, phi0), (hi, phi_hi), x0, tol.tol_f, tol.max_iter).map_err(|e| match e {
        SolveError::MaxIter(best) => Error::NonConvergence {
            context: "smooth return",
            iterations: best.iterations,
            residual: best.fx.abs(),
        },
        SolveError::NoSignChange { .. } => Error::NegativeMultiplier,
    })?;
    let dl = root.x;

    let flow = n.to_engineering();
    let sigma = trial.sigma - dl * moduli.stress(&flow);
    let state = InternalState {
        eps_p: state_n.eps_p + dl * flow,
        kappa: kappa_n + dl * tr_n,
    };
    let hw_next = sigma.to_hw(tol.rho_eps);
    if hw_next.xi > apex_xi(state.kappa, params) {
        return apex_correct(trial, state_n, material, tol);
    }
    Ok(Update {
        sigma,
        state,
        mode: Mode::SmoothReturn,
        iterations: root.iterations,
        residual: yield_f(&hw_next, state.kappa, params).abs(),
    })
}

/// Return along the potential normal evaluated at the trial point. Falls
/// through to the apex branch when no admissible smooth return exists.
pub fn smooth_return(
    trial: &Trial,
    state_n: &InternalState,
    material: &Material,
    tol: &Tolerances,
) -> Result<StepResult> {
    let update = smooth_correct(trial, state_n, material, tol)?;
    attach_tangent(update, trial, state_n, material, tol)
}

fn corrector(
    eps_e: SymTensor,
    state_n: &InternalState,
    material: &Material,
    tol: &Tolerances,
) -> Result<(Trial, Update)> {
    let trial = Trial::from_elastic_strain(eps_e, &material.moduli, tol.rho_eps);
    let update = match classify(&trial.hw, state_n.kappa, &material.params, tol) {
        Regime::Elastic => Update {
            sigma: trial.sigma,
            state: *state_n,
            mode: Mode::Elastic,
            iterations: 0,
            residual: 0.0,
        },
        Regime::Smooth => smooth_correct(&trial, state_n, material, tol)?,
        Regime::Apex => apex_correct(&trial, state_n, material, tol)?,
    };
    Ok((trial, update))
}

/// Central-difference tangent of the full corrector with respect to the
/// trial elastic strain (equivalently the total strain), state_n frozen.
pub fn smooth_tangent(
    trial: &Trial,
    state_n: &InternalState,
    material: &Material,
    tol: &Tolerances,
) -> Result<Tangent> {
    let h = FD_TANGENT_STEP;
    let mut t = Tangent::zeros();
    for j in 0..6 {
        let mut up = trial.eps_e;
        let mut dn = trial.eps_e;
        up[j] += h;
        dn[j] -= h;
        let s_up = corrector(up, state_n, material, tol)?.1.sigma;
        let s_dn = corrector(dn, state_n, material, tol)?.1.sigma;
        for i in 0..6 {
            t[(i, j)] = (s_up[i] - s_dn[i]) / (2.0 * h);
        }
    }
    Ok(t)
}

fn attach_tangent(
    update: Update,
    trial: &Trial,
    state_n: &InternalState,
    material: &Material,
    tol: &Tolerances,
) -> Result<StepResult> {
    let tangent = match update.mode {
        Mode::Elastic => material.moduli.stiffness(),
        Mode::ApexReturn => apex_tangent(update.state.kappa, &material.params, &material.moduli)?,
        Mode::SmoothReturn => smooth_tangent(trial, state_n, material, tol)?,
    };
    Ok(update.with_tangent(tangent))
}

/// One strain-driven stress update from the converged state `state_n`.
pub fn integrate_step(
    eps_total_next: &SymTensor,
    state_n: &InternalState,
    material: &Material,
    tol: &Tolerances,
) -> Result<StepResult> {
    let (trial, update) = corrector(*eps_total_next - state_n.eps_p, state_n, material, tol)?;
    attach_tangent(update, &trial, state_n, material, tol)
}
