//! Menétrey-Willam yield surface with a volumetric-strain driven
//! hardening/softening law and a quadratic non-associated potential.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{ElasticModuli, HwCoords, SymTensor, SQRT_3, SQRT_6};

/// Upper bound on |dq_h/dκ|; the exact derivative is infinite at κ = 0.
pub const DERIVATIVE_CLAMP: f64 = 1e12;

/// Elastic, strength and hardening coefficients of the concrete model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    /// Young's modulus (MPa).
    pub young: f64,
    pub poisson: f64,
    /// Uniaxial compressive strength, positive magnitude (MPa).
    pub fc: f64,
    /// Uniaxial tensile strength (MPa).
    pub ft: f64,
    /// Eccentricity of the deviatoric section.
    pub eccentricity: f64,
    /// Softening slope.
    pub t: f64,
    /// Plastic volumetric strain at the uniaxial peak.
    pub k1d: f64,
    /// Initial value of the hardening function.
    pub qh0: f64,
    pub g_a: f64,
    pub g_b: f64,
}

impl MaterialParams {
    /// Reference concrete used by all validation scenarios.
    pub const REFERENCE: MaterialParams = MaterialParams {
        young: 30000.0,
        poisson: 0.15,
        fc: 32.0,
        ft: 3.0,
        eccentricity: 0.52,
        t: 0.0055,
        k1d: 0.10008,
        qh0: 0.20,
        g_a: 21.22,
        g_b: 31.46,
    };

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Validation(msg));
        let all = [
            self.young,
            self.poisson,
            self.fc,
            self.ft,
            self.eccentricity,
            self.t,
            self.k1d,
            self.qh0,
            self.g_a,
            self.g_b,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return fail("all parameters must be finite".into());
        }
        ElasticModuli::new(self.young, self.poisson)?;
        if !(self.ft > 0.0 && self.fc > self.ft) {
            return fail(format!(
                "strengths must satisfy fc > ft > 0 (fc = {}, ft = {})",
                self.fc, self.ft
            ));
        }
        if !(self.eccentricity > 0.5 && self.eccentricity <= 1.0) {
            return fail(format!(
                "eccentricity e must satisfy 0.5 < e <= 1, got {}",
                self.eccentricity
            ));
        }
        if !(self.qh0 > 0.0 && self.qh0 <= 1.0) {
            return fail(format!("qh0 must lie in (0, 1], got {}", self.qh0));
        }
        if self.k1d <= 0.0 {
            return fail(format!("k1d must be positive, got {}", self.k1d));
        }
        if self.t <= 0.0 {
            return fail(format!("t must be positive, got {}", self.t));
        }
        if self.g_a < 0.0 || self.g_b < 0.0 {
            return fail(format!(
                "gA and gB must be non-negative (gA = {}, gB = {})",
                self.g_a, self.g_b
            ));
        }
        Ok(())
    }

    pub fn moduli(&self) -> Result<ElasticModuli> {
        ElasticModuli::new(self.young, self.poisson)
    }
}

/// Hardening variable together with the hardening, softening and
/// combined functions evaluated at it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HardeningState {
    pub kappa: f64,
    pub qh: f64,
    pub qs: f64,
    pub q: f64,
}

impl HardeningState {
    pub fn at(kappa: f64, params: &MaterialParams) -> Self {
        let qh = hardening_qh(kappa, params);
        let qs = softening_qs(kappa, params);
        HardeningState {
            kappa,
            qh,
            qs,
            q: qh * qs,
        }
    }
}

/// Cohesion m = 3(fc² − ft²)/(fc·ft) · e/(e + 1).
pub fn cohesion_m(params: &MaterialParams) -> f64 {
    let (fc, ft, e) = (params.fc, params.ft, params.eccentricity);
    3.0 * (fc * fc - ft * ft) / (fc * ft) * e / (e + 1.0)
}

/// Elliptic roundness function of the deviatoric section.
pub fn elliptic_r(theta: f64, e: f64) -> f64 {
    let c = theta.cos();
    let a = 1.0 - e * e;
    let b = 2.0 * e - 1.0;
    let root = (4.0 * a * c * c + 5.0 * e * e - 4.0 * e).max(0.0).sqrt();
    (4.0 * a * c * c + b * b) / (2.0 * a * c + b * root)
}

pub fn hardening_qh(kappa: f64, params: &MaterialParams) -> f64 {
    if kappa >= params.k1d {
        return 1.0;
    }
    let a = (params.k1d - kappa.max(0.0)) / params.k1d;
    params.qh0 + (1.0 - params.qh0) * (1.0 - a * a).max(0.0).sqrt()
}

/// dq_h/dκ, clamped at [`DERIVATIVE_CLAMP`] near κ = 0 and zero past k1d.
pub fn d_qh_dkappa(kappa: f64, params: &MaterialParams) -> f64 {
    if kappa >= params.k1d {
        return 0.0;
    }
    let a = (params.k1d - kappa.max(0.0)) / params.k1d;
    let root = (1.0 - a * a).max(0.0).sqrt();
    let num = (1.0 - params.qh0) * a;
    let den = params.k1d * root;
    if num >= DERIVATIVE_CLAMP * den {
        DERIVATIVE_CLAMP
    } else {
        num / den
    }
}

pub fn softening_qs(kappa: f64, params: &MaterialParams) -> f64 {
    if kappa <= params.k1d {
        return 1.0;
    }
    let u = softening_u(kappa, params);
    (1.0 + u * u).powi(-2)
}

pub fn d_qs_dkappa(kappa: f64, params: &MaterialParams) -> f64 {
    if kappa <= params.k1d {
        return 0.0;
    }
    let u = softening_u(kappa, params);
    let n2m1 = params.t / params.k1d;
    -4.0 * u * (1.0 + u * u).powi(-3) / (params.k1d * n2m1)
}

// u = (n1 − 1)/(n2 − 1) with n1 = κ/k1d and n2 = (k1d + t)/k1d
fn softening_u(kappa: f64, params: &MaterialParams) -> f64 {
    let n1 = kappa / params.k1d;
    let n2 = (params.k1d + params.t) / params.k1d;
    (n1 - 1.0) / (n2 - 1.0)
}

/// Yield function; f ≤ 0 is admissible.
pub fn yield_f(hw: &HwCoords, kappa: f64, params: &MaterialParams) -> f64 {
    let h = HardeningState::at(kappa, params);
    let fc = params.fc;
    let r = elliptic_r(hw.theta, params.eccentricity);
    let m = cohesion_m(params);
    1.5 * (hw.rho / fc).powi(2) + h.qh * m * (hw.rho * r / (SQRT_6 * fc) + hw.xi / (SQRT_3 * fc)) - h.q
}

/// Partial derivatives of the yield function at fixed Lode angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YieldPartials {
    pub d_xi: f64,
    pub d_rho: f64,
    pub d_kappa: f64,
}

pub fn yield_partials(hw: &HwCoords, kappa: f64, params: &MaterialParams) -> YieldPartials {
    let h = HardeningState::at(kappa, params);
    let fc = params.fc;
    let r = elliptic_r(hw.theta, params.eccentricity);
    let m = cohesion_m(params);
    let dqh = d_qh_dkappa(kappa, params);
    let dqs = d_qs_dkappa(kappa, params);
    let cone = m * (hw.rho * r / (SQRT_6 * fc) + hw.xi / (SQRT_3 * fc));
    YieldPartials {
        d_xi: h.qh * m / (SQRT_3 * fc),
        d_rho: 3.0 * hw.rho / (fc * fc) + h.qh * m * r / (SQRT_6 * fc),
        d_kappa: dqh * cone - (dqh * h.qs + h.qh * dqs),
    }
}

/// Scalar plastic potential, written so that deviatoric flow is
/// co-directional with the stress deviator:
/// g = g_A (ρ/(fc√q))² + g_B ρ/(fc√q) + ξ/(fc√q).
pub fn plastic_potential(hw: &HwCoords, kappa: f64, params: &MaterialParams) -> f64 {
    let scale = params.fc * HardeningState::at(kappa, params).q.sqrt();
    let r = hw.rho / scale;
    params.g_a * r * r + params.g_b * r + hw.xi / scale
}

/// (∂g/∂ξ, ∂g/∂ρ) with q evaluated at `kappa`.
pub fn potential_partials(hw: &HwCoords, kappa: f64, params: &MaterialParams) -> (f64, f64) {
    let q = HardeningState::at(kappa, params).q;
    let fc = params.fc;
    let d_xi = 1.0 / (fc * q.sqrt());
    let d_rho = 2.0 * params.g_a * hw.rho / (fc * fc * q) + params.g_b / (fc * q.sqrt());
    (d_xi, d_rho)
}

/// Flow direction ∂g/∂σ (tensor shear components) at a stress with
/// deviator `s` and coordinates `hw`.
pub fn potential_gradient(
    hw: &HwCoords,
    s: &SymTensor,
    kappa: f64,
    params: &MaterialParams,
    rho_eps: f64,
) -> Result<SymTensor> {
    if hw.rho <= rho_eps {
        return Err(Error::DegenerateDirection { rho: hw.rho });
    }
    let (d_xi, d_rho) = potential_partials(hw, kappa, params);
    Ok((d_xi / SQRT_3) * SymTensor::IDENTITY + (d_rho / hw.rho) * *s)
}

/// Hydrostatic coordinate of the apex, ξ_a = (√3 fc/m)·q_s(κ).
pub fn apex_xi(kappa: f64, params: &MaterialParams) -> f64 {
    SQRT_3 * params.fc / cohesion_m(params) * softening_qs(kappa, params)
}

/// dξ_a/dκ.
pub fn d_apex_xi_dkappa(kappa: f64, params: &MaterialParams) -> f64 {
    SQRT_3 * params.fc / cohesion_m(params) * d_qs_dkappa(kappa, params)
}
