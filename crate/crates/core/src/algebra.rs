//! Multivariate polynomials with degree caps and normalized rational functions.
//!
//! Monomials are listed in graded lexicographic order: ascending total degree,
//! and within one degree descending exponent vectors, so `x0` precedes `x1`
//! and `x0^2` precedes `x0*x1`. This order fixes the mapping between parameter
//! indices and monomials.

use crate::error::{Error, Result};
use crate::family::guards::guard_div;

/// Euclidean norms below this are treated as an all-zero denominator.
pub const ZERO_NORM: f64 = 1e-30;

/// A set of admissible exponent vectors under a total-degree cap and
/// per-input power caps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialBasis {
    exponents: Vec<Vec<u32>>,
    max_total_degree: u32,
    caps: Vec<u32>,
}

impl MonomialBasis {
    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exponents
    }

    pub fn max_total_degree(&self) -> u32 {
        self.max_total_degree
    }

    pub fn caps(&self) -> &[u32] {
        &self.caps
    }

    pub fn n_inputs(&self) -> usize {
        self.caps.len()
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    /// Index of the exponent vector, if present.
    pub fn position(&self, exponent: &[u32]) -> Option<usize> {
        self.exponents.iter().position(|e| e.as_slice() == exponent)
    }

    /// Values of every monomial at `x`, in basis order.
    pub fn monomial_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_inputs() {
            return Err(Error::DimensionMismatch {
                what: "input vector",
                expected: self.n_inputs(),
                got: x.len(),
            });
        }
        Ok(self
            .exponents
            .iter()
            .map(|e| monomial(e, x))
            .collect())
    }
}

/// Evaluates `prod x_i^e_i`.
#[inline]
pub fn monomial(exponent: &[u32], x: &[f64]) -> f64 {
    exponent
        .iter()
        .zip(x)
        .fold(1.0, |acc, (&e, &xi)| if e == 0 { acc } else { acc * xi.powi(e as i32) })
}

/// Enumerates every exponent vector with total degree at most
/// `max_total_degree` and component `i` at most `per_input_caps[i]`.
///
/// # Panics
///
/// Panics if `n_inputs == 0` or the cap list length differs from `n_inputs`.
pub fn enumerate_monomials(
    n_inputs: usize,
    max_total_degree: u32,
    per_input_caps: &[u32],
) -> MonomialBasis {
    assert!(n_inputs >= 1, "at least one input is required");
    assert_eq!(per_input_caps.len(), n_inputs, "one cap per input");

    let mut exponents = Vec::new();
    let mut current = vec![0u32; n_inputs];
    for degree in 0..=max_total_degree {
        fill_degree(0, degree, per_input_caps, &mut current, &mut exponents);
    }
    MonomialBasis {
        exponents,
        max_total_degree,
        caps: per_input_caps.to_vec(),
    }
}

// Writes all vectors of exactly `remaining` total degree over inputs `var..`,
// in descending lexicographic order.
fn fill_degree(
    var: usize,
    remaining: u32,
    caps: &[u32],
    current: &mut Vec<u32>,
    out: &mut Vec<Vec<u32>>,
) {
    if var + 1 == caps.len() {
        if remaining <= caps[var] {
            current[var] = remaining;
            out.push(current.clone());
        }
        current[var] = 0;
        return;
    }
    let top = remaining.min(caps[var]);
    for e in (0..=top).rev() {
        current[var] = e;
        fill_degree(var + 1, remaining - e, caps, current, out);
    }
    current[var] = 0;
}

/// Evaluates `sum_j coeffs_j * m_j(x)`.
pub fn eval_poly(coeffs: &[f64], basis: &MonomialBasis, x: &[f64]) -> Result<f64> {
    if coeffs.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            what: "polynomial coefficients",
            expected: basis.len(),
            got: coeffs.len(),
        });
    }
    let m = basis.monomial_values(x)?;
    Ok(coeffs.iter().zip(&m).map(|(c, v)| c * v).sum())
}

/// Gradient of [`eval_poly`] with respect to the coefficients, which is the
/// vector of monomial values.
pub fn eval_poly_coeff_grad(basis: &MonomialBasis, x: &[f64]) -> Result<Vec<f64>> {
    basis.monomial_values(x)
}

/// Numerator and denominator monomial bases of one rational function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalSpec {
    numerator_basis: MonomialBasis,
    denominator_basis: MonomialBasis,
}

impl RationalSpec {
    pub fn new(numerator_basis: MonomialBasis, denominator_basis: MonomialBasis) -> Result<Self> {
        if numerator_basis.n_inputs() != denominator_basis.n_inputs() {
            return Err(Error::InvalidSpec(
                "numerator and denominator bases differ in input count".into(),
            ));
        }
        let zero = vec![0; denominator_basis.n_inputs()];
        if denominator_basis.position(&zero).is_none() {
            return Err(Error::InvalidSpec(
                "denominator basis lacks the constant monomial".into(),
            ));
        }
        Ok(Self {
            numerator_basis,
            denominator_basis,
        })
    }

    pub fn numerator_basis(&self) -> &MonomialBasis {
        &self.numerator_basis
    }

    pub fn denominator_basis(&self) -> &MonomialBasis {
        &self.denominator_basis
    }
}

/// Euclidean norm of a denominator block, rejecting the all-zero case.
pub fn denominator_norm(den_coeffs: &[f64]) -> Result<f64> {
    let norm = den_coeffs.iter().map(|b| b * b).sum::<f64>().sqrt();
    if norm < ZERO_NORM || !norm.is_finite() {
        return Err(Error::ZeroDenominator);
    }
    Ok(norm)
}

/// Evaluates `p_a(x) / guard(p_b(x) / ||b||_2)`.
pub fn eval_rational(
    num_coeffs: &[f64],
    den_coeffs: &[f64],
    spec: &RationalSpec,
    x: &[f64],
) -> Result<f64> {
    if den_coeffs.len() != spec.denominator_basis.len() {
        return Err(Error::DimensionMismatch {
            what: "denominator coefficients",
            expected: spec.denominator_basis.len(),
            got: den_coeffs.len(),
        });
    }
    let norm = denominator_norm(den_coeffs)?;
    let num = eval_poly(num_coeffs, &spec.numerator_basis, x)?;
    let den = eval_poly(den_coeffs, &spec.denominator_basis, x)? / norm;
    Ok(num / guard_div(den).0)
}
