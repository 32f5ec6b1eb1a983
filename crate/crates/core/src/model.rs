//! The switched planar family: quadrant regions, the switching law, and the
//! piecewise vector fields `f_i(x, λ) = A_i(λ) x + g_i(x, λ)`.

use std::f64::consts::{E, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{LambdaPoly, MonomialTerm, PolyField};

pub type Point = [f64; 2];
pub type Matrix2 = [[f64; 2]; 2];

/// Default number of equispaced λ samples used by [`SwitchedSystem::validate`].
pub const DEFAULT_VALIDATION_SAMPLES: usize = 1001;

/// One of the four half-open regions S1..S4.
///
/// S1 = {x1 > 0, x2 >= 0}, S2 = {x1 <= 0, x2 > 0}, S3 = {x1 < 0, x2 <= 0},
/// S4 = {x1 >= 0, x2 < 0}. Together with the origin they partition the plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Quadrant {
    Q1,
    Q2,
    Q3,
    Q4,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [Quadrant::Q1, Quadrant::Q2, Quadrant::Q3, Quadrant::Q4];

    pub fn index(self) -> u8 {
        match self {
            Quadrant::Q1 => 1,
            Quadrant::Q2 => 2,
            Quadrant::Q3 => 3,
            Quadrant::Q4 => 4,
        }
    }

    pub fn from_index(i: u8) -> Option<Quadrant> {
        match i {
            1 => Some(Quadrant::Q1),
            2 => Some(Quadrant::Q2),
            3 => Some(Quadrant::Q3),
            4 => Some(Quadrant::Q4),
            _ => None,
        }
    }

    /// Quadrant entered next by a clockwise rotation (1 → 4 → 3 → 2 → 1).
    pub fn clockwise_next(self) -> Quadrant {
        match self {
            Quadrant::Q1 => Quadrant::Q4,
            Quadrant::Q4 => Quadrant::Q3,
            Quadrant::Q3 => Quadrant::Q2,
            Quadrant::Q2 => Quadrant::Q1,
        }
    }

    pub fn counterclockwise_next(self) -> Quadrant {
        match self {
            Quadrant::Q1 => Quadrant::Q2,
            Quadrant::Q2 => Quadrant::Q3,
            Quadrant::Q3 => Quadrant::Q4,
            Quadrant::Q4 => Quadrant::Q1,
        }
    }

    /// Quadrants 1 and 3 carry A(λ); quadrants 2 and 4 carry B(λ).
    pub fn uses_a(self) -> bool {
        matches!(self, Quadrant::Q1 | Quadrant::Q3)
    }

    /// Signs (sgn x1, sgn x2) of points in the open quadrant.
    pub fn signs(self) -> [f64; 2] {
        match self {
            Quadrant::Q1 => [1.0, 1.0],
            Quadrant::Q2 => [-1.0, 1.0],
            Quadrant::Q3 => [-1.0, -1.0],
            Quadrant::Q4 => [1.0, -1.0],
        }
    }

    /// Coordinate that vanishes on the boundary crossed when leaving clockwise.
    pub fn clockwise_exit_axis(self) -> usize {
        if self.uses_a() {
            1
        } else {
            0
        }
    }

    pub(crate) fn slot(self) -> usize {
        self.index() as usize - 1
    }
}

impl fmt::Display for Quadrant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// Region S_i containing `x`, following the half-open definitions literally.
pub fn region_of(x: Point) -> Result<Quadrant> {
    let [x1, x2] = x;
    if x1 > 0.0 && x2 >= 0.0 {
        Ok(Quadrant::Q1)
    } else if x1 <= 0.0 && x2 > 0.0 {
        Ok(Quadrant::Q2)
    } else if x1 < 0.0 && x2 <= 0.0 {
        Ok(Quadrant::Q3)
    } else if x1 >= 0.0 && x2 < 0.0 {
        Ok(Quadrant::Q4)
    } else {
        Err(Error::Origin)
    }
}

/// Open quadrant strictly containing `x`, if `x` is off both axes.
pub fn open_quadrant_of(x: Point) -> Option<Quadrant> {
    let [x1, x2] = x;
    match (x1 > 0.0, x1 < 0.0, x2 > 0.0, x2 < 0.0) {
        (true, _, true, _) => Some(Quadrant::Q1),
        (_, true, true, _) => Some(Quadrant::Q2),
        (_, true, _, true) => Some(Quadrant::Q3),
        (true, _, _, true) => Some(Quadrant::Q4),
        _ => None,
    }
}

/// Damping `a` and the λ-dependent rotation coefficients `b(λ)`, `c(λ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub a: f64,
    pub b: LambdaPoly,
    pub c: LambdaPoly,
    /// Closed hull `(lo, hi)` of the parameter interval.
    pub lambda_domain: (f64, f64),
}

impl SystemParams {
    pub fn new(a: f64, b: impl Into<LambdaPoly>, c: impl Into<LambdaPoly>, lambda_domain: (f64, f64)) -> Self {
        Self {
            a,
            b: b.into(),
            c: c.into(),
            lambda_domain,
        }
    }

    /// Parameters with b, c independent of λ.
    pub fn constant(a: f64, b: f64, c: f64) -> Self {
        Self::new(a, vec![b], vec![c], (-1.0, 1.0))
    }

    pub fn check_lambda(&self, lambda: f64) -> Result<()> {
        let (lo, hi) = self.lambda_domain;
        if lambda.is_finite() && lo <= lambda && lambda <= hi {
            Ok(())
        } else {
            Err(Error::Domain { lambda, lo, hi })
        }
    }

    /// `(b(λ), c(λ))` after a domain check.
    pub fn bc(&self, lambda: f64) -> Result<(f64, f64)> {
        self.check_lambda(lambda)?;
        Ok((self.b.eval(lambda), self.c.eval(lambda)))
    }

    /// A(λ) for quadrants 1, 3 and B(λ) for quadrants 2, 4.
    pub fn linear_matrix(&self, q: Quadrant, lambda: f64) -> Result<Matrix2> {
        let (b, c) = self.bc(lambda)?;
        let a = self.a;
        Ok(if q.uses_a() {
            [[-a, b], [-c, -a]]
        } else {
            [[-a, c], [-b, -a]]
        })
    }
}

/// The full family: linear parts plus one polynomial perturbation per quadrant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchedSystem {
    pub params: SystemParams,
    /// Perturbations g_1..g_4 indexed by quadrant.
    pub perturbations: [PolyField; 4],
}

impl SwitchedSystem {
    pub fn new(params: SystemParams, perturbations: [PolyField; 4]) -> Self {
        Self {
            params,
            perturbations,
        }
    }

    /// Purely linear switched system (all perturbations zero).
    pub fn linear(params: SystemParams) -> Self {
        Self::new(params, Default::default())
    }

    /// Built-in benchmark: a = 2, b(λ) = eπ + λ + λ², c(λ) = π/e + λ² with
    /// cubic perturbations in quadrants 1, 3 and λ-weighted quintic ones in 2, 4.
    pub fn paper_example() -> Self {
        let params = SystemParams::new(2.0, vec![E * PI, 1.0, 1.0], vec![PI / E, 0.0, 1.0], (-2.0, 2.0));
        let odd = PolyField::new(
            vec![
                MonomialTerm::new(vec![-1.0], 3, 0),
                MonomialTerm::new(vec![0.0, -1.0], 1, 2),
            ],
            vec![
                MonomialTerm::new(vec![0.0, -1.0], 0, 3),
                MonomialTerm::new(vec![-1.0], 2, 1),
            ],
        );
        let even = PolyField::new(
            vec![MonomialTerm::new(vec![0.0, -1.0], 5, 0)],
            vec![MonomialTerm::new(vec![0.0, -1.0], 4, 1)],
        );
        Self::new(params, [odd.clone(), even.clone(), odd, even])
    }

    pub fn perturbation(&self, q: Quadrant) -> &PolyField {
        &self.perturbations[q.slot()]
    }

    pub fn is_linear(&self) -> bool {
        self.perturbations.iter().all(|p| p.is_empty())
    }

    /// Same linear part with all perturbations removed.
    pub fn linearized(&self) -> Self {
        Self::linear(self.params.clone())
    }

    pub fn linear_matrix(&self, q: Quadrant, lambda: f64) -> Result<Matrix2> {
        self.params.linear_matrix(q, lambda)
    }

    /// `A_q(λ) x + g_q(x, λ)`.
    pub fn eval_field(&self, q: Quadrant, x: Point, lambda: f64) -> Result<Point> {
        let m = self.linear_matrix(q, lambda)?;
        Ok(self.eval_field_with(&m, q, x, lambda))
    }

    /// Field evaluation with a pre-computed matrix (hot path of the integrator).
    pub(crate) fn eval_field_with(&self, m: &Matrix2, q: Quadrant, x: Point, lambda: f64) -> Point {
        let g = self.perturbation(q).eval(x, lambda);
        [
            m[0][0] * x[0] + m[0][1] * x[1] + g[0],
            m[1][0] * x[0] + m[1][1] * x[1] + g[1],
        ]
    }

    pub fn validate(&self) -> ValidationReport {
        self.validate_with_samples(DEFAULT_VALIDATION_SAMPLES)
    }

    /// Checks the standing assumptions; b and c positivity is tested on
    /// `samples` equispaced points of the λ domain plus λ = 0.
    pub fn validate_with_samples(&self, samples: usize) -> ValidationReport {
        let mut report = ValidationReport::default();
        let p = &self.params;

        if !(p.a > 0.0) {
            report.push("a", "a ≤ 0", format!("a = {}", p.a));
        }
        let (lo, hi) = p.lambda_domain;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            report.push("lambda_domain", "empty or non-finite λ domain", format!("[{lo}, {hi}]"));
        } else if !(lo <= 0.0 && 0.0 <= hi) {
            report.push("lambda_domain", "λ domain does not contain 0", format!("[{lo}, {hi}]"));
        }
        for (name, poly) in [("b_poly", &p.b), ("c_poly", &p.c)] {
            if poly.coeffs.is_empty() || !poly.is_finite() {
                report.push(name, "coefficients must be a non-empty finite list", format!("{:?}", poly.coeffs));
            }
        }

        if report.is_ok() {
            let n = samples.max(2);
            let grid = (0..n)
                .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                .chain(std::iter::once(0.0));
            let (mut b_bad, mut c_bad) = (false, false);
            for l in grid {
                let (b, c) = (p.b.eval(l), p.c.eval(l));
                if !b_bad && !(b > 0.0) {
                    b_bad = true;
                    report.push("b_poly", "b(λ) ≤ 0", format!("b({l}) = {b}"));
                }
                if !c_bad && !(c > 0.0) {
                    c_bad = true;
                    report.push("c_poly", "c(λ) ≤ 0", format!("c({l}) = {c}"));
                }
            }
        }

        for q in Quadrant::ALL {
            for (comp, terms) in [(1, &self.perturbation(q).comp1), (2, &self.perturbation(q).comp2)] {
                for t in terms.iter() {
                    let field = format!("perturbations.q{q}.comp{comp}");
                    if t.degree() < 2 {
                        report.push(
                            &field,
                            "o(‖x‖) violated",
                            format!("monomial x1^{} x2^{} has degree {}", t.pow1, t.pow2, t.degree()),
                        );
                    }
                    if !t.coeff.is_finite() {
                        report.push(&field, "non-finite coefficient", format!("{:?}", t.coeff.coeffs));
                    }
                }
            }
        }
        report
    }

    pub fn validated(self) -> Result<Self> {
        self.validate().into_result()?;
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: String,
    pub message: String,
    pub witness: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ({})", self.field, self.message, self.witness)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn push(&mut self, field: &str, message: &str, witness: String) {
        self.violations.push(Violation {
            field: field.to_string(),
            message: message.to_string(),
            witness,
        });
    }

    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(Error::Validation(self.violations.iter().map(|v| v.to_string()).collect()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn region_examples() {
        assert_eq!(region_of([1.0, 0.0]), Ok(Quadrant::Q1));
        assert_eq!(region_of([0.0, 1.0]), Ok(Quadrant::Q2));
        assert_eq!(region_of([-1.0, 0.0]), Ok(Quadrant::Q3));
        assert_eq!(region_of([0.0, -1.0]), Ok(Quadrant::Q4));
        assert_eq!(region_of([0.0, 0.0]), Err(Error::Origin));
        assert_eq!(region_of([0.5, 0.5]), Ok(Quadrant::Q1));
        assert_eq!(region_of([-0.5, 0.5]), Ok(Quadrant::Q2));
    }

    #[test]
    fn matrices_follow_quadrant_pairing() {
        let p = SystemParams::constant(0.1, 6.0, 1.0);
        assert_eq!(p.linear_matrix(Quadrant::Q1, 0.0).unwrap(), [[-0.1, 6.0], [-1.0, -0.1]]);
        assert_eq!(p.linear_matrix(Quadrant::Q2, 0.0).unwrap(), [[-0.1, 1.0], [-6.0, -0.1]]);
        assert_eq!(p.linear_matrix(Quadrant::Q3, 0.0), p.linear_matrix(Quadrant::Q1, 0.0));
        assert_eq!(p.linear_matrix(Quadrant::Q4, 0.0), p.linear_matrix(Quadrant::Q2, 0.0));
        assert!(matches!(p.linear_matrix(Quadrant::Q1, 5.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn linear_field_value() {
        let sys = SwitchedSystem::linear(SystemParams::constant(0.1, 6.0, 1.0));
        let v = sys.eval_field(Quadrant::Q1, [1.0, 0.0], 0.0).unwrap();
        assert_eq!(v, [-0.1, -1.0]);
    }

    #[test]
    fn paper_field_at_unit_point() {
        let sys = SwitchedSystem::paper_example();
        let v = sys.eval_field(Quadrant::Q1, [1.0, 1.0], 0.0).unwrap();
        // A(0)(1,1) = (-2 + eπ, -π/e - 2); g1((1,1), 0) = (-1, -1)
        let expected = [-2.0 + E * PI - 1.0, -PI / E - 2.0 - 1.0];
        assert!((v[0] - expected[0]).abs() < 1e-14);
        assert!((v[1] - expected[1]).abs() < 1e-14);
    }

    #[test]
    fn origin_is_equilibrium() {
        let sys = SwitchedSystem::paper_example();
        for q in Quadrant::ALL {
            for &l in &[-1.0, 0.0, 0.3, 2.0] {
                assert_eq!(sys.eval_field(q, [0.0, 0.0], l).unwrap(), [0.0, 0.0]);
            }
        }
    }

    #[test]
    fn validation_examples() {
        assert!(SwitchedSystem::paper_example().validate().is_ok());

        let mut bad = SwitchedSystem::paper_example();
        bad.params.a = -1.0;
        let rep = bad.validate();
        assert!(rep.violations.iter().any(|v| v.message == "a ≤ 0"));

        let mut lin = SwitchedSystem::paper_example();
        lin.perturbations[0].comp1.push(MonomialTerm::new(vec![1.0], 1, 0));
        let rep = lin.validate();
        assert!(rep.violations.iter().any(|v| v.message == "o(‖x‖) violated"));

        let mut neg = SwitchedSystem::paper_example();
        neg.params.c = LambdaPoly::new(vec![0.5, 0.0, -1.0]);
        let rep = neg.validate();
        assert!(rep.violations.iter().any(|v| v.message == "c(λ) ≤ 0"));
    }

    #[test]
    fn clockwise_cycle() {
        let mut q = Quadrant::Q1;
        let mut seen = vec![];
        for _ in 0..4 {
            q = q.clockwise_next();
            seen.push(q.index());
        }
        assert_eq!(seen, vec![4, 3, 2, 1]);
        for q in Quadrant::ALL {
            assert_eq!(q.clockwise_next().counterclockwise_next(), q);
        }
    }
}
