//! Exterior algebra over a fixed dual basis with pluggable coefficients.
//!
//! Generators are numbered from zero. In an adapted Kähler basis of real
//! dimension `2n` the first `n` generators are `a^i` and the next `n` are
//! `b^i`; cone generators follow.

mod coeff;
mod form;
mod matrix;

pub use coeff::{Coeff, ZeroTolerance, PRUNE_EPS};
pub use form::{blade_degree, blade_indices, blades_of_degree, wedge_sign, Blade, Form, MAX_DIM};
pub use matrix::FormMatrix;

use crate::error::{Error, Result};

/// Complex structure on one-forms: `J a^i = b^i`, `J b^i = -a^i`.
///
/// With `cone` set, the two generators after the base (`φ`, `ψ`) are
/// rotated as well: `J φ = ψ`, `J ψ = -φ`.
pub fn apply_j<C: Coeff>(x: &Form<C>, n: usize, cone: bool) -> Result<Form<C>> {
    if !x.is_empty() && x.degree() != Some(1) {
        return Err(Error::Degree { expected: 1, found: x.degree() });
    }
    let limit = if cone { 2 * n + 2 } else { 2 * n };
    let mut out = Form::zero(x.dim());
    for (b, c) in x.terms() {
        let i = b.trailing_zeros() as usize;
        let (target, neg) = match i {
            _ if i < n => (i + n, false),
            _ if i < 2 * n => (i - n, true),
            _ if cone && i == 2 * n => (2 * n + 1, false),
            _ if cone && i == 2 * n + 1 => (2 * n, true),
            _ => return Err(Error::IndexOutOfRange { index: i, dim: limit }),
        };
        out.add_term(1u64 << target, if neg { c.neg() } else { c.clone() });
    }
    Ok(out)
}

/// Entrywise [`apply_j`] on a matrix of one-forms.
pub fn apply_j_matrix<C: Coeff>(m: &FormMatrix<C>, n: usize) -> Result<FormMatrix<C>> {
    let mut out = FormMatrix::zeros(m.rows(), m.cols(), m.dim());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out.set(i, j, apply_j(m.get(i, j), n, false)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j_on_basis() {
        let n = 2;
        let a1 = Form::<f64>::generator(4, 0);
        let b1 = Form::<f64>::generator(4, 2);
        assert_eq!(apply_j(&a1, n, false).unwrap(), b1);
        assert_eq!(apply_j(&apply_j(&a1, n, false).unwrap(), n, false).unwrap(), a1.scale(-1.0));
        // 2a1 + 3b2 -> 2b1 - 3a2
        let x = &a1.scale(2.0) + &Form::generator(4, 3).scale(3.0);
        let expected = &b1.scale(2.0) - &Form::generator(4, 1).scale(3.0);
        assert_eq!(apply_j(&x, n, false).unwrap(), expected);
    }

    #[test]
    fn j_rejects_two_forms() {
        let w = Form::<f64>::monomial(2, &[0, 1], 1.0);
        assert!(matches!(apply_j(&w, 1, false), Err(Error::Degree { .. })));
    }

    #[test]
    fn j_on_cone_generators() {
        let phi = Form::<f64>::generator(4, 2);
        let psi = Form::<f64>::generator(4, 3);
        assert_eq!(apply_j(&phi, 1, true).unwrap(), psi);
        assert_eq!(apply_j(&psi, 1, true).unwrap(), phi.scale(-1.0));
        assert!(apply_j(&phi, 1, false).is_err());
    }
}
