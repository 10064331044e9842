//! Exact quadratic model of the residual map.
//!
//! Every residual is a polynomial of degree at most two in the unknowns, so
//! the constant, linear and quadratic parts are recovered exactly (up to
//! rounding) by polarization from point evaluations.

use nalgebra::{DMatrix, DVector};

use super::lm::LeastSquares;

#[derive(Clone, Debug)]
pub struct QuadraticModel {
    nvar: usize,
    nres: usize,
    constant: Vec<f64>,
    linear: Vec<Vec<f64>>,
    /// Sparse quadratic coefficients `((j, k), [(row, value)])` with `j ≤ k`.
    quadratic: Vec<((usize, usize), Vec<(usize, f64)>)>,
}

const SPARSE_EPS: f64 = 1e-13;

impl QuadraticModel {
    pub fn build(nvar: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> Self {
        let zero = vec![0.0; nvar];
        let constant = f(&zero);
        let nres = constant.len();
        let unit = |pairs: &[(usize, f64)]| {
            let mut x = zero.clone();
            for &(i, v) in pairs {
                x[i] += v;
            }
            x
        };
        let mut linear = Vec::with_capacity(nvar);
        let mut diag = Vec::with_capacity(nvar);
        for j in 0..nvar {
            let fp = f(&unit(&[(j, 1.0)]));
            let fm = f(&unit(&[(j, -1.0)]));
            linear.push((0..nres).map(|r| 0.5 * (fp[r] - fm[r])).collect::<Vec<_>>());
            diag.push((0..nres).map(|r| 0.5 * (fp[r] + fm[r]) - constant[r]).collect::<Vec<_>>());
        }
        let mut quadratic = Vec::new();
        for j in 0..nvar {
            let sparse: Vec<(usize, f64)> = diag[j].iter().enumerate().filter(|(_, v)| v.abs() > SPARSE_EPS).map(|(r, v)| (r, *v)).collect();
            if !sparse.is_empty() {
                quadratic.push(((j, j), sparse));
            }
            for k in j + 1..nvar {
                let fjk = f(&unit(&[(j, 1.0), (k, 1.0)]));
                let sparse: Vec<(usize, f64)> = (0..nres)
                    .map(|r| (r, fjk[r] - constant[r] - linear[j][r] - linear[k][r] - diag[j][r] - diag[k][r]))
                    .filter(|(_, v)| v.abs() > SPARSE_EPS)
                    .collect();
                if !sparse.is_empty() {
                    quadratic.push(((j, k), sparse));
                }
            }
        }
        Self { nvar, nres, constant, linear, quadratic }
    }

    pub fn nvar(&self) -> usize {
        self.nvar
    }

    pub fn nres(&self) -> usize {
        self.nres
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = self.constant.clone();
        for (j, col) in self.linear.iter().enumerate() {
            if x[j] != 0.0 {
                for (o, v) in out.iter_mut().zip(col) {
                    *o += x[j] * v;
                }
            }
        }
        for ((j, k), entries) in &self.quadratic {
            let w = x[*j] * x[*k];
            if w != 0.0 {
                for (r, v) in entries {
                    out[*r] += w * v;
                }
            }
        }
        out
    }

    /// Analytic Jacobian, `nres × nvar`.
    pub fn jacobian_at(&self, x: &[f64]) -> DMatrix<f64> {
        let mut jac = DMatrix::zeros(self.nres, self.nvar);
        for (j, col) in self.linear.iter().enumerate() {
            for (r, v) in col.iter().enumerate() {
                jac[(r, j)] = *v;
            }
        }
        for ((j, k), entries) in &self.quadratic {
            let (j, k) = (*j, *k);
            if j == k {
                for (r, v) in entries {
                    jac[(*r, j)] += 2.0 * x[j] * v;
                }
            } else {
                for (r, v) in entries {
                    jac[(*r, j)] += x[k] * v;
                    jac[(*r, k)] += x[j] * v;
                }
            }
        }
        jac
    }
}

impl LeastSquares for QuadraticModel {
    fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_vec(self.eval(x.as_slice()))
    }
    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.jacobian_at(x.as_slice())
    }
}
