//! Levenberg–Marquardt with Nielsen damping updates.

use nalgebra::{DMatrix, DVector};

pub trait LeastSquares {
    fn residual(&self, x: &DVector<f64>) -> DVector<f64>;
    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64>;
}

#[derive(Clone, Copy, Debug)]
pub struct LmOptions {
    pub max_iters: usize,
    pub damping_init: f64,
    /// Stop once the residual ∞-norm drops below this.
    pub target: f64,
}

#[derive(Clone, Debug)]
pub struct LmOutcome {
    pub x: DVector<f64>,
    pub residual_inf: f64,
    pub iterations: usize,
}

pub fn levenberg_marquardt<P: LeastSquares>(problem: &P, x0: DVector<f64>, opts: &LmOptions) -> LmOutcome {
    let mut x = x0;
    let mut r = problem.residual(&x);
    let mut cost = 0.5 * r.norm_squared();
    let mut jac = problem.jacobian(&x);
    let mut a = jac.tr_mul(&jac);
    let mut g = jac.tr_mul(&r);
    let max_diag = (0..a.nrows()).map(|i| a[(i, i)]).fold(0.0, f64::max);
    let mut mu = opts.damping_init * max_diag.max(1e-12);
    let mut nu = 2.0;
    let mut iterations = 0;
    while iterations < opts.max_iters {
        if r.amax() < opts.target || g.amax() < 1e-15 {
            break;
        }
        iterations += 1;
        let mut damped = a.clone();
        for i in 0..damped.nrows() {
            damped[(i, i)] += mu;
        }
        let Some(chol) = damped.cholesky() else {
            mu *= nu;
            nu *= 2.0;
            continue;
        };
        let h = -chol.solve(&g);
        if h.norm() <= 1e-15 * (x.norm() + 1e-15) {
            break;
        }
        let x_new = &x + &h;
        let r_new = problem.residual(&x_new);
        let cost_new = 0.5 * r_new.norm_squared();
        let predicted = 0.5 * h.dot(&(&h * mu - &g));
        let rho = if predicted > 0.0 { (cost - cost_new) / predicted } else { -1.0 };
        if rho > 0.0 {
            x = x_new;
            r = r_new;
            cost = cost_new;
            jac = problem.jacobian(&x);
            a = jac.tr_mul(&jac);
            g = jac.tr_mul(&r);
            mu *= (1.0f64 / 3.0).max(1.0 - (2.0 * rho - 1.0).powi(3));
            nu = 2.0;
        } else {
            mu *= nu;
            nu *= 2.0;
            if !mu.is_finite() {
                break;
            }
        }
    }
    let residual_inf = r.amax();
    LmOutcome { x, residual_inf, iterations }
}
