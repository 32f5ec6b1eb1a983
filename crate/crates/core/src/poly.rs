//! Polynomials in the bifurcation parameter and polynomial vector fields.
//!
//! Perturbation fields are sums of monomials `coeff(λ) · x1^p · x2^q`. Scalar
//! forms such as `<x, f>` or `<f, Sx>` are built symbolically with like terms
//! merged, so identities that hold algebraically evaluate to an exact zero.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Polynomial in λ with coefficients `c0, c1, …` (value `Σ cj λ^j`).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LambdaPoly {
    pub coeffs: Vec<f64>,
}

impl LambdaPoly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * lambda + c)
    }

    /// Value of dP/dλ.
    pub fn eval_derivative(&self, lambda: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (j, &c)| acc * lambda + j as f64 * c)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * factor).collect())
    }

    pub fn add_assign(&mut self, other: &LambdaPoly) {
        if other.coeffs.len() > self.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), 0.0);
        }
        for (dst, src) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *dst += src;
        }
    }
}

impl From<Vec<f64>> for LambdaPoly {
    fn from(coeffs: Vec<f64>) -> Self {
        Self::new(coeffs)
    }
}

/// One monomial `coeff(λ) · x1^pow1 · x2^pow2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonomialTerm {
    pub coeff: LambdaPoly,
    pub pow1: u32,
    pub pow2: u32,
}

impl MonomialTerm {
    pub fn new(coeff: impl Into<LambdaPoly>, pow1: u32, pow2: u32) -> Self {
        Self {
            coeff: coeff.into(),
            pow1,
            pow2,
        }
    }

    pub fn degree(&self) -> u32 {
        self.pow1 + self.pow2
    }

    pub fn eval(&self, x: [f64; 2], lambda: f64) -> f64 {
        self.coeff.eval(lambda) * powu(x[0], self.pow1) * powu(x[1], self.pow2)
    }
}

fn powu(base: f64, exp: u32) -> f64 {
    base.powi(exp as i32)
}

/// Polynomial vector field `(Σ comp1, Σ comp2)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PolyField {
    pub comp1: Vec<MonomialTerm>,
    pub comp2: Vec<MonomialTerm>,
}

impl PolyField {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn new(comp1: Vec<MonomialTerm>, comp2: Vec<MonomialTerm>) -> Self {
        Self { comp1, comp2 }
    }

    pub fn eval(&self, x: [f64; 2], lambda: f64) -> [f64; 2] {
        let sum = |terms: &[MonomialTerm]| terms.iter().map(|t| t.eval(x, lambda)).sum::<f64>();
        [sum(&self.comp1), sum(&self.comp2)]
    }

    pub fn terms(&self) -> impl Iterator<Item = &MonomialTerm> {
        self.comp1.iter().chain(self.comp2.iter())
    }

    pub fn is_empty(&self) -> bool {
        self.comp1.is_empty() && self.comp2.is_empty()
    }

    /// `<x, f>` as a merged scalar polynomial.
    pub fn radial_form(&self) -> ScalarPoly {
        let mut out = ScalarPoly::default();
        out.add_shifted(&self.comp1, 1.0, (1, 0));
        out.add_shifted(&self.comp2, 1.0, (0, 1));
        out
    }

    /// `<f, Sx>` with `S = [[0, -1], [1, 0]]`, i.e. `-x2 f1 + x1 f2`.
    pub fn rotation_form(&self) -> ScalarPoly {
        let mut out = ScalarPoly::default();
        out.add_shifted(&self.comp1, -1.0, (0, 1));
        out.add_shifted(&self.comp2, 1.0, (1, 0));
        out
    }
}

/// Scalar polynomial in (x1, x2) with λ-polynomial coefficients, like terms merged.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScalarPoly {
    terms: BTreeMap<(u32, u32), LambdaPoly>,
}

impl ScalarPoly {
    fn add_shifted(&mut self, terms: &[MonomialTerm], sign: f64, shift: (u32, u32)) {
        for t in terms {
            let key = (t.pow1 + shift.0, t.pow2 + shift.1);
            self.terms
                .entry(key)
                .or_default()
                .add_assign(&t.coeff.scaled(sign));
        }
        self.terms.retain(|_, c| !c.is_zero());
    }

    /// True when every merged coefficient cancelled exactly.
    pub fn is_identically_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: [f64; 2], lambda: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(p, q), c)| c.eval(lambda) * powu(x[0], p) * powu(x[1], q))
            .sum()
    }
}
