//! Graded differential algebras over the trigonometric-Laurent ring.
//!
//! A DGA is fixed by the differentials of its generators together with the
//! one-forms standing for `dt` and `dτ`; a coefficient `f(t, τ)` then has
//! `df = ∂_t f · dt + ∂_τ f · dτ`.

use crate::exterior::{Form, FormMatrix};
use crate::trig::TrigLaurent;

pub type RForm = Form<TrigLaurent>;
pub type RMatrix = FormMatrix<TrigLaurent>;

/// Constant-coefficient copy of a real form.
pub fn lift(x: &Form<f64>) -> RForm {
    x.map_coeffs(|c| TrigLaurent::constant(*c))
}

/// Constant-coefficient copy re-indexed into a larger basis.
pub fn lift_into(x: &Form<f64>, dim: usize, index_map: &[usize]) -> RForm {
    lift(x).embed(dim, index_map)
}

#[derive(Clone, Debug)]
pub struct Dga {
    dim: usize,
    images: Vec<RForm>,
    t_form: RForm,
    tau_form: RForm,
}

impl Dga {
    pub fn new(images: Vec<RForm>, t_form: RForm, tau_form: RForm) -> Self {
        let dim = images.len();
        assert!(images.iter().all(|f| f.dim() == dim));
        assert_eq!(t_form.dim(), dim);
        assert_eq!(tau_form.dim(), dim);
        Self { dim, images, t_form, tau_form }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generator(&self, i: usize) -> RForm {
        Form::generator(self.dim, i)
    }

    pub fn generator_differential(&self, i: usize) -> &RForm {
        &self.images[i]
    }

    pub fn t_form(&self) -> &RForm {
        &self.t_form
    }

    pub fn tau_form(&self) -> &RForm {
        &self.tau_form
    }

    pub fn d_coeff(&self, f: &TrigLaurent) -> RForm {
        let mut out = self.t_form.mul_coeff(&f.d_dt());
        out.add_assign(&self.tau_form.mul_coeff(&f.d_dtau()));
        out
    }

    pub fn d(&self, x: &RForm) -> RForm {
        x.derivation(&self.images, |c| self.d_coeff(c))
    }

    pub fn d_matrix(&self, m: &RMatrix) -> RMatrix {
        m.map(|e| self.d(e))
    }

    /// `L_V x = ι_V dx + d ι_V x` for the vector with pairings `pairing`.
    pub fn lie_derivative(&self, x: &RForm, pairing: &[(usize, TrigLaurent)]) -> RForm {
        let mut out = self.d(x).contract(pairing);
        out.add_assign(&self.d(&x.contract(pairing)));
        out
    }

    /// Largest coefficient of `d∘d` over generators and sample coefficient functions.
    pub fn d_squared_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            worst = worst.max(self.d(&self.images[i]).max_abs());
        }
        let samples = [
            TrigLaurent::t_pow(1),
            TrigLaurent::t_pow(-2),
            TrigLaurent::cos(),
            TrigLaurent::sin(),
            TrigLaurent::monomial(1.0, 2, 1, 1),
            TrigLaurent::monomial(0.7, -1, 3, 0),
        ];
        for f in &samples {
            worst = worst.max(self.d(&self.d_coeff(f)).max_abs());
            for i in 0..self.dim {
                let x = self.generator(i).mul_coeff(f);
                worst = worst.max(self.d(&self.d(&x)).max_abs());
            }
        }
        worst
    }
}

/// Largest coefficient across a slice of ring-valued matrices.
pub fn max_abs_all(ms: &[&RMatrix]) -> f64 {
    ms.iter().map(|m| m.max_abs()).fold(0.0, f64::max)
}

/// Evaluate all ring coefficients at `(t, τ)`.
pub fn eval_form(x: &RForm, t: f64, tau: f64) -> Form<f64> {
    x.map_coeffs(|c| c.eval(t, tau))
}
