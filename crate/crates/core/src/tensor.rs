//! Symmetric second-order tensors, stress invariants, Haigh-Westergaard
//! coordinates and isotropic linear elasticity.
//!
//! Components are stored in the fixed order (11, 22, 33, 12, 13, 23).
//! Stress tensors hold true shear components, strain tensors hold
//! engineering shears (γ12 = 2ε12). Tension is positive.

use std::f64::consts::FRAC_PI_3;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use nalgebra::{Matrix3, Matrix6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;
pub const SQRT_3: f64 = 1.732_050_807_568_877_2;
pub const SQRT_6: f64 = 2.449_489_742_783_178;

/// 6×6 operator acting on engineering-shear strain vectors and producing
/// true-shear stress vectors.
pub type Tangent = Matrix6<f64>;

/// Symmetric tensor in (11, 22, 33, 12, 13, 23) order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SymTensor(pub [f64; 6]);

impl SymTensor {
    pub const ZERO: SymTensor = SymTensor([0.0; 6]);

    /// The vector I = [1, 1, 1, 0, 0, 0].
    pub const IDENTITY: SymTensor = SymTensor([1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);

    pub fn new(components: [f64; 6]) -> Self {
        SymTensor(components)
    }

    pub fn diag(a: f64, b: f64, c: f64) -> Self {
        SymTensor([a, b, c, 0.0, 0.0, 0.0])
    }

    pub fn hydrostatic(p: f64) -> Self {
        SymTensor::diag(p, p, p)
    }

    pub fn trace(&self) -> f64 {
        self.0[0] + self.0[1] + self.0[2]
    }

    pub fn components(&self) -> &[f64; 6] {
        &self.0
    }

    /// Deviatoric part, assuming true shear components.
    pub fn deviator(&self) -> SymTensor {
        let p = self.trace() / 3.0;
        let c = &self.0;
        SymTensor([c[0] - p, c[1] - p, c[2] - p, c[3], c[4], c[5]])
    }

    /// Full 3×3 matrix, reading shears as tensor components.
    pub fn to_matrix(&self) -> Matrix3<f64> {
        let c = &self.0;
        Matrix3::new(c[0], c[3], c[4], c[3], c[1], c[5], c[4], c[5], c[2])
    }

    /// Inverse of [`SymTensor::to_matrix`]; the matrix is symmetrised.
    pub fn from_matrix(m: &Matrix3<f64>) -> Self {
        SymTensor([
            m[(0, 0)],
            m[(1, 1)],
            m[(2, 2)],
            0.5 * (m[(0, 1)] + m[(1, 0)]),
            0.5 * (m[(0, 2)] + m[(2, 0)]),
            0.5 * (m[(1, 2)] + m[(2, 1)]),
        ])
    }

    /// Converts tensor shears to engineering shears (doubles them).
    pub fn to_engineering(&self) -> SymTensor {
        let c = &self.0;
        SymTensor([c[0], c[1], c[2], 2.0 * c[3], 2.0 * c[4], 2.0 * c[5]])
    }

    /// Converts engineering shears to tensor shears (halves them).
    pub fn to_tensorial(&self) -> SymTensor {
        let c = &self.0;
        SymTensor([c[0], c[1], c[2], 0.5 * c[3], 0.5 * c[4], 0.5 * c[5]])
    }

    /// Double contraction, both operands holding tensor shears.
    pub fn ddot(&self, other: &SymTensor) -> f64 {
        let (a, b) = (&self.0, &other.0);
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + 2.0 * (a[3] * b[3] + a[4] * b[4] + a[5] * b[5])
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Stress invariants (I1, J2, J3) of a stress tensor.
    pub fn invariants(&self) -> Invariants {
        let s = self.deviator();
        let c = &s.0;
        let j2 = 0.5 * (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]) + c[3] * c[3] + c[4] * c[4] + c[5] * c[5];
        let j3 = c[0] * c[1] * c[2] + 2.0 * c[3] * c[4] * c[5]
            - c[0] * c[5] * c[5]
            - c[1] * c[4] * c[4]
            - c[2] * c[3] * c[3];
        Invariants {
            i1: self.trace(),
            j2: j2.max(0.0),
            j3,
        }
    }

    /// Haigh-Westergaard coordinates of a stress tensor. Below `rho_eps`
    /// the Lode angle is undefined and set to zero.
    pub fn to_hw(&self, rho_eps: f64) -> HwCoords {
        let inv = self.invariants();
        let xi = inv.i1 / SQRT_3;
        let rho = (2.0 * inv.j2).sqrt();
        let theta = if rho < rho_eps {
            0.0
        } else {
            (inv.cos3theta().clamp(-1.0, 1.0)).acos() / 3.0
        };
        HwCoords { xi, rho, theta }
    }
}

impl Index<usize> for SymTensor {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for SymTensor {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for SymTensor {
    type Output = SymTensor;
    fn add(mut self, rhs: SymTensor) -> SymTensor {
        self += rhs;
        self
    }
}

impl AddAssign for SymTensor {
    fn add_assign(&mut self, rhs: SymTensor) {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
    }
}

impl Sub for SymTensor {
    type Output = SymTensor;
    fn sub(mut self, rhs: SymTensor) -> SymTensor {
        self -= rhs;
        self
    }
}

impl SubAssign for SymTensor {
    fn sub_assign(&mut self, rhs: SymTensor) {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a -= b;
        }
    }
}

impl Mul<SymTensor> for f64 {
    type Output = SymTensor;
    fn mul(self, rhs: SymTensor) -> SymTensor {
        SymTensor(rhs.0.map(|v| self * v))
    }
}

impl Neg for SymTensor {
    type Output = SymTensor;
    fn neg(self) -> SymTensor {
        SymTensor(self.0.map(|v| -v))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Invariants {
    pub i1: f64,
    pub j2: f64,
    pub j3: f64,
}

impl Invariants {
    /// cos 3θ before clamping. Zero on the hydrostatic axis.
    pub fn cos3theta(&self) -> f64 {
        if self.j2 <= 0.0 {
            return 0.0;
        }
        1.5 * SQRT_3 * self.j3 / self.j2.powf(1.5)
    }
}

/// Cylindrical stress coordinates: hydrostatic coordinate, deviatoric
/// radius and Lode angle in [0, π/3].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HwCoords {
    pub xi: f64,
    pub rho: f64,
    pub theta: f64,
}

impl HwCoords {
    pub fn new(xi: f64, rho: f64, theta: f64) -> Self {
        debug_assert!(rho >= 0.0);
        HwCoords {
            xi,
            rho,
            theta: theta.clamp(0.0, FRAC_PI_3),
        }
    }
}

/// Isotropic elastic constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElasticModuli {
    pub young: f64,
    pub poisson: f64,
    /// B* = E / (3(1 − 2ν))
    pub bulk: f64,
    /// B = √3·B*, relates ξ to volumetric strain.
    pub modified_bulk: f64,
    pub shear: f64,
    pub lame: f64,
}

impl ElasticModuli {
    pub fn new(young: f64, poisson: f64) -> Result<Self> {
        if !(young > 0.0 && young.is_finite()) {
            return Err(Error::Validation(format!("E must be positive, got {young}")));
        }
        if !(poisson > 0.0 && poisson < 0.5) {
            return Err(Error::Validation(format!("nu must lie in (0, 0.5), got {poisson}")));
        }
        let bulk = young / (3.0 * (1.0 - 2.0 * poisson));
        let shear = young / (2.0 * (1.0 + poisson));
        Ok(ElasticModuli {
            young,
            poisson,
            bulk,
            modified_bulk: SQRT_3 * bulk,
            shear,
            lame: bulk - 2.0 * shear / 3.0,
        })
    }

    /// Hooke's law: σ = λ tr(ε)·1 + 2G ε, with τ = G γ on the shears.
    pub fn stress(&self, eps_e: &SymTensor) -> SymTensor {
        let c = &eps_e.0;
        let lv = self.lame * eps_e.trace();
        let g2 = 2.0 * self.shear;
        SymTensor([
            lv + g2 * c[0],
            lv + g2 * c[1],
            lv + g2 * c[2],
            self.shear * c[3],
            self.shear * c[4],
            self.shear * c[5],
        ])
    }

    /// Compliance form of Hooke's law, returns engineering shears.
    pub fn strain(&self, sigma: &SymTensor) -> SymTensor {
        let c = &sigma.0;
        let (e, nu) = (self.young, self.poisson);
        SymTensor([
            (c[0] - nu * (c[1] + c[2])) / e,
            (c[1] - nu * (c[0] + c[2])) / e,
            (c[2] - nu * (c[0] + c[1])) / e,
            c[3] / self.shear,
            c[4] / self.shear,
            c[5] / self.shear,
        ])
    }

    pub fn stiffness(&self) -> Tangent {
        let mut d = Tangent::zeros();
        let l = self.lame;
        let g = self.shear;
        for i in 0..3 {
            for j in 0..3 {
                d[(i, j)] = l;
            }
            d[(i, i)] = l + 2.0 * g;
            d[(i + 3, i + 3)] = g;
        }
        d
    }
}

pub fn elastic_stress(eps_e: &SymTensor, moduli: &ElasticModuli) -> SymTensor {
    moduli.stress(eps_e)
}

pub fn elastic_strain(sigma: &SymTensor, moduli: &ElasticModuli) -> SymTensor {
    moduli.strain(sigma)
}
