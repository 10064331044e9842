//! One-parameter curvature scans.

use rayon::prelude::*;

use super::{solve_with_model, Geometry, SolveConfig, SolveStatus};
use crate::error::Result;

const GOLDEN_ITERS: usize = 60;

#[derive(Clone, Debug, PartialEq)]
pub struct ScanReport {
    /// `(parameter, best residual)` on the uniform grid.
    pub grid: Vec<(f64, f64)>,
    /// Local polish around non-feasible grid minima.
    pub refined: Vec<(f64, f64)>,
    /// Parameters (grid or refined) where the solve succeeded.
    pub feasible: Vec<f64>,
}

fn evaluate<F>(family: &F, c: f64, cfg: &SolveConfig) -> Result<(f64, bool)>
where
    F: Fn(f64) -> Result<Geometry> + Sync,
{
    let g = family(c)?;
    let model = g.model();
    let r = solve_with_model(&g, &model, cfg)?;
    Ok((r.best_residual, r.status == SolveStatus::Solved))
}

/// Best residual at each parameter value.
pub fn scan_values<F>(family: &F, params: &[f64], cfg: &SolveConfig) -> Result<Vec<(f64, f64, bool)>>
where
    F: Fn(f64) -> Result<Geometry> + Sync,
{
    cfg.validate()?;
    params.iter().map(|&c| evaluate(family, c, cfg).map(|(r, ok)| (c, r, ok))).collect()
}

/// Uniform scan of `[lo, hi]` with `steps` points, optionally followed by a
/// golden-section polish between the neighbours of each grid local minimum.
pub fn scan_curvature<F>(family: &F, lo: f64, hi: f64, steps: usize, polish: bool, cfg: &SolveConfig) -> Result<ScanReport>
where
    F: Fn(f64) -> Result<Geometry> + Sync,
{
    cfg.validate()?;
    let params: Vec<f64> = match steps {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect(),
    };
    let values = params
        .par_iter()
        .map(|&c| evaluate(family, c, cfg).map(|(r, ok)| (c, r, ok)))
        .collect::<Result<Vec<_>>>()?;
    let mut feasible: Vec<f64> = values.iter().filter(|v| v.2).map(|v| v.0).collect();
    let mut refined = Vec::new();
    if polish {
        let minima: Vec<usize> = (1..values.len().saturating_sub(1))
            .filter(|&i| !values[i].2 && values[i].1 <= values[i - 1].1 && values[i].1 <= values[i + 1].1)
            .collect();
        let polished = minima
            .par_iter()
            .map(|&i| golden(family, values[i - 1].0, values[i + 1].0, cfg))
            .collect::<Result<Vec<_>>>()?;
        for (c, r, ok) in polished {
            refined.push((c, r));
            if ok {
                feasible.push(c);
            }
        }
    }
    feasible.sort_by(f64::total_cmp);
    Ok(ScanReport { grid: values.iter().map(|v| (v.0, v.1)).collect(), refined, feasible })
}

fn golden<F>(family: &F, mut a: f64, mut b: f64, cfg: &SolveConfig) -> Result<(f64, f64, bool)>
where
    F: Fn(f64) -> Result<Geometry> + Sync,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = evaluate(family, x1, cfg)?.0;
    let mut f2 = evaluate(family, x2, cfg)?.0;
    for _ in 0..GOLDEN_ITERS {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = evaluate(family, x1, cfg)?.0;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = evaluate(family, x2, cfg)?.0;
        }
    }
    let c = if f1 <= f2 { x1 } else { x2 };
    let (r, ok) = evaluate(family, c, cfg)?;
    Ok((c, r, ok))
}
